"""``kazext`` command line.

Exit codes: 0 success, 1 usage or bad input, 2 disconnected generating set,
3 resource or size guard (including solver non-convergence), 4 search cap,
5 a verification check failed.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .balanced import (
    balance_trial,
    census_csv,
    census_formula,
    failure_bound,
    rank_census,
    required_s,
)
from .errors import (
    ConvergenceError,
    KazextError,
    SearchCapError,
    SizeGuardError,
)
from .families import (
    build_gamma_k2,
    build_nonsplit_metabelian,
    build_split_metabelian,
    g_epsilon_search,
    random_generating_B,
    random_lifted_generators,
    verify_gamma_k2,
    verify_main_theorem,
    verify_nonsplit,
    verify_serre,
)
from .groups import (
    ElementaryAbelian,
    FiniteGroup,
    commutator_subgroup,
    make_cyclic,
    make_group_algebra,
    read_table,
)
from .groups.core import Extension
from .spectra import DENSE_THRESHOLD, ITER_TOL, build_cayley, spectral_gap
from .tame import tame_csv, tame_table

# balance trials check s * p^n rows against all p^p characters; keep that enumerable
BALANCE_S_CAP = 10**4

EXIT_OK, EXIT_USAGE, EXIT_DISCONNECTED, EXIT_GUARD, EXIT_CAP, EXIT_FAIL = range(6)


class UsageError(KazextError):
    pass


@dataclass(frozen=True)
class RunConfig:
    seed: int = 0
    tolerance: float = ITER_TOL
    dense_threshold: int = DENSE_THRESHOLD
    output_format: str = "json"
    output_path: str | None = None
    workers: int = 1

    def __post_init__(self):
        if not self.tolerance > 0:
            raise UsageError("tolerance must be positive")
        if self.dense_threshold < 1:
            raise UsageError("dense threshold must be >= 1")


# -- group and element designators ------------------------------------

class Codec:
    """Element designators for one group: parse to an index and format back."""

    def __init__(self, group: FiniteGroup):
        self.group = group

    def parse(self, token: str) -> int:
        try:
            g = int(token)
        except ValueError:
            raise UsageError(f"bad element designator {token!r} for {self.group.label}") from None
        return self._check(g)

    def format(self, g: int) -> str:
        return str(int(g))

    def _check(self, g: int) -> int:
        if not 0 <= g < self.group.order:
            raise UsageError(f"element {g} out of range for {self.group.label}")
        return int(g)


class VectorCodec(Codec):
    group: ElementaryAbelian

    def parse(self, token: str) -> int:
        if "," not in token:
            return super().parse(token)
        try:
            c = [int(x) for x in token.split(",")]
        except ValueError:
            raise UsageError(f"bad vector {token!r}") from None
        if len(c) != self.group.d:
            raise UsageError(f"expected {self.group.d} coordinates, got {len(c)}")
        return int(self.group.index(np.array(c)))

    def format(self, g: int) -> str:
        return ",".join(map(str, self.group.coords(int(g)).tolist()))


class PairCodec(Codec):
    """``a|h`` with ``a`` in the kernel and ``h`` in the quotient; ``g = iota(a) * lift(h)``."""

    def __init__(self, group, base: Codec, quot: Codec, compose, split):
        super().__init__(group)
        self.base, self.quot = base, quot
        self._compose, self._split = compose, split

    def parse(self, token: str) -> int:
        if "|" not in token:
            return super().parse(token)
        a, _, h = token.partition("|")
        return int(self._compose(self.base.parse(a), self.quot.parse(h)))

    def format(self, g: int) -> str:
        a, h = self._split(int(g))
        return f"{self.base.format(a)}|{self.quot.format(h)}"


def _codec_for(G: FiniteGroup) -> Codec:
    if isinstance(G, ElementaryAbelian):
        return VectorCodec(G)
    if isinstance(G, Extension):
        return PairCodec(G, _codec_for(G.base), _codec_for(G.quotient), G.element,
                         lambda g: tuple(int(x) for x in G.pair(g)))
    return Codec(G)


def _metabelian_codec(inst) -> Codec:
    if inst.split:
        return _codec_for(inst.group)
    G, q, iso = inst.group, inst.projection, inst.kernel_iso
    back = np.full(G.order, -1, dtype=np.int64)
    back[iso] = np.arange(iso.size)

    def compose(a, h):
        return G.mul(iso[a], q.section[h])

    def split(g):
        h = int(q.projection[g])
        return int(back[G.mul(g, G.inv(q.section[h]))]), h

    return PairCodec(G, VectorCodec(inst.algebra), Codec(q.target), compose, split)


def _ints(text: str, n: int, what: str) -> list[int]:
    parts = text.split(",")
    if len(parts) != n:
        raise UsageError(f"{what} expects {n} comma-separated integers")
    try:
        return [int(x) for x in parts]
    except ValueError:
        raise UsageError(f"{what}: non-integer parameter in {text!r}") from None


def parse_group(text: str) -> tuple[FiniteGroup, Codec]:
    kind, sep, arg = text.partition(":")
    if not sep:
        raise UsageError(f"group designator {text!r} lacks a ':'")
    if kind == "cyclic":
        (m,) = _ints(arg, 1, "cyclic")
        G = make_cyclic(m)
        return G, Codec(G)
    if kind == "algebra":
        (p,) = _ints(arg, 1, "algebra")
        A, _ = make_group_algebra(p)
        return A, VectorCodec(A)
    if kind == "metabelian":
        *nums, mode = arg.split(",") if arg else [""]
        p, n = _ints(",".join(nums), 2, "metabelian")
        if mode not in ("split", "nonsplit"):
            raise UsageError("metabelian mode must be split or nonsplit")
        inst = build_split_metabelian(p, n) if mode == "split" else build_nonsplit_metabelian(p, n)
        return inst.group, _metabelian_codec(inst)
    if kind == "gamma2":
        p, k = _ints(arg, 2, "gamma2")
        G = build_gamma_k2(p, k).group
        return G, _codec_for(G)
    if kind == "file":
        try:
            G = read_table(arg)
        except OSError as exc:
            raise UsageError(f"cannot read {arg}: {exc.strerror}") from None
        return G, Codec(G)
    raise UsageError(f"unknown group kind {kind!r}")


def parse_generators(tokens: list[str], G: FiniteGroup, codec: Codec, seed: int) -> np.ndarray:
    if len(tokens) == 1 and tokens[0].startswith("random:"):
        (m,) = _ints(tokens[0][7:], 1, "random")
        if not 1 <= m < G.order:
            raise UsageError(f"random:{m} needs 1 <= m < {G.order}")
        rng = np.random.default_rng(seed)
        return np.sort(rng.choice(np.arange(1, G.order), size=m, replace=False))
    return np.array([codec.parse(t) for t in tokens], dtype=np.int64)


def parse_range(text: str) -> list[int]:
    """``3``, ``1-10`` or ``1,4,7``."""
    out = []
    try:
        for part in text.split(","):
            lo, sep, hi = part.partition("-")
            out.extend(range(int(lo), int(hi) + 1) if sep else [int(lo)])
    except ValueError:
        raise UsageError(f"bad range {text!r}") from None
    return out


# -- output ------------------------------------------------------------------

def _csv(rows: list[dict]) -> str:
    if not rows:
        return ""
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: json.dumps(v) if isinstance(v, (list, dict)) else v for k, v in r.items()})
    return buf.getvalue()


def render(payload: dict, rows: list[dict] | None, fmt: str) -> str:
    if fmt == "json":
        doc = dict(payload)
        if rows is not None:
            doc["rows"] = rows
        return json.dumps(doc, indent=2) + "\n"
    if fmt == "csv":
        return _csv(rows if rows is not None else [payload])
    lines = [f"{k}: {v}" for k, v in payload.items()]
    for r in rows or []:
        lines.append("  " + " ".join(f"{k}={v}" for k, v in r.items()))
    return "\n".join(lines) + "\n"


def emit(text: str, cfg: RunConfig) -> None:
    if cfg.output_path:
        Path(cfg.output_path).write_text(text)
    else:
        sys.stdout.write(text)


def _pmap(fn, args: list[tuple], workers: int) -> list:
    if workers <= 1 or len(args) <= 1:
        return [fn(*a) for a in args]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, *zip(*args)))


def _round(d: dict) -> dict:
    return {k: float(f"{v:.15g}") if isinstance(v, float) else v for k, v in d.items()}


# -- commands ----------------------------------------------------------------

def cmd_gap(args, cfg: RunConfig) -> int:
    G, codec = parse_group(args.group)
    S = parse_generators(args.gens, G, codec, cfg.seed)
    rep = spectral_gap(build_cayley(G, S), method=args.method, tol=cfg.tolerance,
                       seed=cfg.seed, threshold=cfg.dense_threshold)
    payload = rep.to_dict()
    payload["generators"] = [codec.format(g) for g in S]
    emit(render(payload, None, cfg.output_format), cfg)
    return EXIT_OK if rep.connected else EXIT_DISCONNECTED


def _main_theorem_trial(p: int, n: int, split: bool, seed: int, tol: float) -> dict:
    rng = np.random.default_rng(seed)
    inst = build_split_metabelian(p, n) if split else build_nonsplit_metabelian(p, n)
    size = int(rng.integers(1, 5))
    B = random_generating_B(p, size, rng)
    rep = verify_main_theorem(inst, [1], B, tol=tol, seed=seed)
    return {"seed": seed, "B": [int(b) for b in B], **rep.to_dict()}


def _serre_trial(p: int, k: int, size: int, seed: int, tol: float, threshold: int) -> dict:
    inst = build_gamma_k2(p, k)
    G = inst.group
    S = random_lifted_generators(G, size, np.random.default_rng(seed))
    rep = verify_serre(G, commutator_subgroup(G), S, tol=tol, seed=seed, threshold=threshold)
    return {"seed": seed, "S": [int(s) for s in S], **rep.to_dict()}


def verify_suite(args, cfg: RunConfig) -> tuple[dict, list[dict] | None]:
    suite = args.suite
    if suite == "census":
        p = args.p
        got, want = rank_census(p), census_formula(p)
        rows = [{"rank": r, "count": got.get(r, 0), "formula_count": want[r],
                 "pass": got.get(r, 0) == want[r]} for r in sorted(want)]
        return {"suite": suite, "p": p, "pass": got == want}, rows
    if suite == "nonsplit":
        p, n = args.p, args.n
        s = verify_nonsplit(build_split_metabelian(p, n))
        ns = verify_nonsplit(build_nonsplit_metabelian(p, n))
        rows = [{"instance": "split", **s.to_dict()}, {"instance": "nonsplit", **ns.to_dict()}]
        return {"suite": suite, "p": p, "n": n, "pass": ns.nonsplit and not s.nonsplit}, rows
    if suite == "gamma2":
        rep = verify_gamma_k2(build_gamma_k2(args.p, args.k))
        rows = [{"check": c, "pass": ok} for c, ok in rep.checks.items()]
        return {"suite": suite, **rep.to_dict()}, rows
    if suite == "main-theorem":
        p, n = args.p, args.n
        kinds = [True] if n < 2 else [True, False]
        jobs = [(p, n, kinds[t % len(kinds)], cfg.seed + t, cfg.tolerance) for t in range(args.trials)]
        rows = _pmap(_main_theorem_trial, jobs, cfg.workers)
        passed = sum(r["pass"] for r in rows)
        return _round({"suite": suite, "p": p, "n": n, "trials": len(rows), "passed": passed,
                       "min_ratio": min(r["ratio"] for r in rows),
                       "pass": passed == len(rows)}), rows
    if suite == "serre":
        p, k = args.p, args.k
        size = args.size or 2 * k
        jobs = [(p, k, size, cfg.seed + t, cfg.tolerance, cfg.dense_threshold)
                for t in range(args.trials)]
        rows = _pmap(_serre_trial, jobs, cfg.workers)
        passed = sum(r["pass"] for r in rows)
        return {"suite": suite, "p": p, "k": k, "trials": len(rows), "passed": passed,
                "pass": passed == len(rows)}, rows
    raise UsageError(f"unknown suite {suite!r}")


def cmd_verify(args, cfg: RunConfig) -> int:
    payload, rows = verify_suite(args, cfg)
    if args.suite == "census" and cfg.output_format == "csv":
        text = census_csv(args.p)
    else:
        text = render(payload, rows, cfg.output_format)
    emit(text, cfg)
    return EXIT_OK if payload["pass"] else EXIT_FAIL


def cmd_balance(args, cfg: RunConfig) -> int:
    p, n, delta, c = args.p, args.n, args.delta, args.c
    s = required_s(p, delta, c, cap=BALANCE_S_CAP)
    jobs = [(p, n, delta, s, cfg.seed + t) for t in range(args.trials)]
    rows = [_round(r) for r in _pmap(balance_trial, jobs, cfg.workers)]
    ok = [r for r in rows if r["success"]]
    fb = failure_bound(p, delta, 1, s)
    payload = _round({
        "p": p, "n": n, "delta": delta, "c": c, "s": s, "trials": len(rows),
        "successes": len(ok), "success_rate": len(ok) / len(rows) if rows else 0.0,
        "inequality_holds": all(2 * r["delta_star"] <= r["avg_kazhdan"] + 1e-9 for r in ok),
        "failure_bound_single": fb.single, "failure_bound_aggregate": fb.aggregate,
    })
    if cfg.output_format == "csv":
        emit(_csv(rows), cfg)
    else:
        emit(render(payload, rows, cfg.output_format), cfg)
    return EXIT_OK


def cmd_tame_table(args, cfg: RunConfig) -> int:
    entries = tame_table(parse_range(args.k), parse_range(args.c))
    if cfg.output_format == "csv":
        emit(tame_csv(entries), cfg)
    else:
        rows = [{"k": e.k, "c": e.c, "case": e.case_label, "bound": e.bound,
                 "nielsen_size": e.nielsen_size} for e in entries]
        emit(render({"rows_count": len(rows)}, rows, cfg.output_format), cfg)
    return EXIT_OK


def cmd_geps(args, cfg: RunConfig) -> int:
    G, codec = parse_group(args.group)
    try:
        rep = g_epsilon_search(G, args.eps, trials=args.trials, seed=cfg.seed, max_m=args.max_m,
                               tol=cfg.tolerance, threshold=cfg.dense_threshold)
    except SearchCapError as exc:
        best = dict(exc.best or {})
        if best.get("witness") is not None:
            best["witness"] = [codec.format(g) for g in best["witness"]]
        emit(render(_round({"error": str(exc), **best}), None, cfg.output_format), cfg)
        return EXIT_CAP
    d = rep.to_dict()
    d["witness"] = [codec.format(g) for g in rep.witness]
    emit(render(d, None, cfg.output_format), cfg)
    return EXIT_OK


# -- parser ------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=ITER_TOL)
    p.add_argument("--dense-threshold", type=int, default=DENSE_THRESHOLD)
    p.add_argument("--format", choices=("json", "csv", "text"), default="json")
    p.add_argument("--output")
    p.add_argument("--workers", type=int, default=1)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="kazext", description="Spectral gaps and average Kazhdan constants of finite group extensions.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gap", help="spectral gap of a Cayley graph")
    g.add_argument("group")
    g.add_argument("--gens", nargs="+", required=True)
    g.add_argument("--method", choices=("auto", "characters", "dense", "iterative"), default="auto")
    _common(g)

    v = sub.add_parser("verify", help="run a verification suite")
    v.add_argument("suite", choices=("main-theorem", "serre", "nonsplit", "gamma2", "census"))
    v.add_argument("--p", type=int, default=3)
    v.add_argument("--n", type=int, default=2)
    v.add_argument("--k", type=int, default=2)
    v.add_argument("--trials", type=int, default=20)
    v.add_argument("--size", type=int, default=None, help="lifted generating set size (serre)")
    _common(v)

    b = sub.add_parser("balance", help="balanced-set sampling experiment")
    b.add_argument("--p", type=int, default=5)
    b.add_argument("--n", type=int, default=1)
    b.add_argument("--delta", type=float, default=0.25)
    b.add_argument("--c", type=float, default=2.0)
    b.add_argument("--trials", type=int, default=100)
    _common(b)

    t = sub.add_parser("tame-table", help="tame automorphism bounds")
    t.add_argument("--k", default="3")
    t.add_argument("--c", default="1-10")
    _common(t)

    e = sub.add_parser("geps", help="randomized upper bound on g_eps")
    e.add_argument("group")
    e.add_argument("--eps", type=float, required=True)
    e.add_argument("--trials", type=int, default=20)
    e.add_argument("--max-m", type=int, default=None)
    _common(e)
    return ap


COMMANDS = {"gap": cmd_gap, "verify": cmd_verify, "balance": cmd_balance,
            "tame-table": cmd_tame_table, "geps": cmd_geps}


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:  # --help, --version and usage errors
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        cfg = RunConfig(args.seed, args.tol, args.dense_threshold, args.format, args.output,
                        args.workers)
        return COMMANDS[args.command](args, cfg)
    except (SizeGuardError, ConvergenceError) as exc:
        print(f"kazext: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except SearchCapError as exc:
        print(f"kazext: {exc}", file=sys.stderr)
        return EXIT_CAP
    except KazextError as exc:
        print(f"kazext: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
