"""Arithmetic in F_p[C_p]: character sums, balance, T_f ranks and sampling.

Elements are coefficient vectors ``f[x] = f(x)`` for ``x in C_p``. A multiset
is a 2-D integer array with one element per row. Row-vector indices agree
with ``ElementaryAbelian(p, p)``: ``index(f) = sum_x f[x] p^x``.
"""

from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .errors import GroupError, SizeGuardError
from .groups.core import ElementaryAbelian, is_prime
from .spectra import build_cayley, spectral_gap

MAX_P = 7
REQUIRED_S_CAP = 10**6


@dataclass(frozen=True)
class GroupAlgebraElement:
    p: int
    coeffs: tuple[int, ...]

    def __post_init__(self):
        if len(self.coeffs) != self.p:
            raise GroupError(f"expected {self.p} coefficients, got {len(self.coeffs)}")
        if any(not 0 <= c < self.p for c in self.coeffs):
            raise GroupError("coefficients must lie in [0, p)")

    @classmethod
    def of(cls, p: int, coeffs: Sequence[int]) -> "GroupAlgebraElement":
        return cls(p, tuple(int(c) % p for c in coeffs))

    @classmethod
    def zero(cls, p: int) -> "GroupAlgebraElement":
        return cls(p, (0,) * p)

    @property
    def index(self) -> int:
        return sum(c * self.p**x for x, c in enumerate(self.coeffs))

    def rotate(self, h: int) -> "GroupAlgebraElement":
        """Left translation: ``(h . f)(x) = f(x - h)``."""
        p = self.p
        return GroupAlgebraElement(p, tuple(self.coeffs[(x - h) % p] for x in range(p)))

    def __neg__(self) -> "GroupAlgebraElement":
        return GroupAlgebraElement(self.p, tuple((-c) % self.p for c in self.coeffs))

    def __array__(self, dtype=None, copy=None):
        return np.array(self.coeffs, dtype=dtype or np.int64)


def _as_multiset(B, p: int | None = None) -> tuple[np.ndarray, int]:
    if isinstance(B, np.ndarray):
        arr = np.atleast_2d(B).astype(np.int64)
        if p is None:
            p = arr.shape[1]
    else:
        B = list(B)
        if not B:
            raise GroupError("empty multiset")
        ps = {b.p for b in B}
        if len(ps) != 1:
            raise GroupError("mixed primes in multiset")
        p = ps.pop()
        arr = np.array([b.coeffs for b in B], dtype=np.int64)
    if arr.shape[0] == 0:
        raise GroupError("empty multiset")
    if arr.shape[1] != p:
        raise GroupError(f"multiset rows have length {arr.shape[1]}, expected {p}")
    return arr % p, p


def dot(f: GroupAlgebraElement, g: GroupAlgebraElement) -> int:
    if f.p != g.p:
        raise GroupError("mismatched primes")
    return sum(a * b for a, b in zip(f.coeffs, g.coeffs)) % f.p


def e_p(alpha, p: int):
    return np.exp(2j * np.pi * np.asarray(alpha) / p)


def charsum(B, f: GroupAlgebraElement) -> complex:
    """``sum_{h in B} e_p(f . h)`` counted with multiplicity."""
    arr, p = _as_multiset(B)
    if f.p != p:
        raise GroupError("mismatched primes")
    residues = (arr @ np.array(f.coeffs)) % p
    counts = np.bincount(residues, minlength=p)
    return complex(counts @ e_p(np.arange(p), p))


def all_elements(p: int) -> np.ndarray:
    """All ``p^p`` coefficient vectors in lexicographic order of the tuples."""
    idx = np.arange(p**p, dtype=np.int64)
    return (idx[:, None] // p ** np.arange(p - 1, -1, -1)) % p


@dataclass(frozen=True)
class BalancedReport:
    delta_star: float
    witness: GroupAlgebraElement
    multiset_size: int
    max_abs_sum: float

    def is_balanced(self, delta: float, slack: float = 1e-12) -> bool:
        return delta <= self.delta_star + slack


def balance_defect(B, chunk: int | None = None) -> BalancedReport:
    """Exact ``delta_star = 1 - max_{f != 0} |sum_h e_p(f.h)| / |B|``.

    Exhaustive over all nonzero ``f``; ties go to the lexicographically
    smallest ``f``.
    """
    arr, p = _as_multiset(B)
    if p > MAX_P:
        raise SizeGuardError(f"p = {p} > {MAX_P}")
    m = arr.shape[0]
    roots = e_p(np.arange(p), p)
    if chunk is None:
        chunk = max(1, 2**24 // max(m, 1))
    best, best_f = -1.0, None
    F_all = all_elements(p)[1:]
    for start in range(0, len(F_all), chunk):
        F = F_all[start:start + chunk]
        res = (F @ arr.T) % p  # (chunk, m)
        counts = np.stack([(res == r).sum(axis=1) for r in range(p)], axis=1)
        mags = np.abs(counts @ roots)
        i = int(np.argmax(mags >= mags.max() - 1e-9))
        if mags[i] > best + 1e-9:
            best, best_f = float(mags[i]), F[i]
    witness = GroupAlgebraElement.of(p, best_f)
    return BalancedReport(1.0 - best / m, witness, m, best)


# -- ranks of T_f ------------------------------------------------------------

def circulant(f) -> np.ndarray:
    """Rows are the rotations ``x^j f``; its row space is ``Span(C_p f)``."""
    c = np.asarray(f, dtype=np.int64)
    p = c.size
    return np.stack([np.roll(c, j) for j in range(p)])


def rank_mod_p(M: np.ndarray, p: int) -> int:
    """Rank over ``F_p`` by Gaussian elimination."""
    R = np.array(M, dtype=np.int64) % p
    rows, cols = R.shape
    r = 0
    for c in range(cols):
        piv = next((i for i in range(r, rows) if R[i, c]), None)
        if piv is None:
            continue
        R[[r, piv]] = R[[piv, r]]
        R[r] = (R[r] * pow(int(R[r, c]), -1, p)) % p
        for i in range(rows):
            if i != r and R[i, c]:
                R[i] = (R[i] - R[i, c] * R[r]) % p
        r += 1
        if r == rows:
            break
    return r


def rank_Tf(f: GroupAlgebraElement) -> int:
    return rank_mod_p(circulant(f.coeffs), f.p)


def _poly_trim(a: list[int]) -> list[int]:
    while a and a[-1] == 0:
        a.pop()
    return a


def _poly_mod(a: list[int], b: list[int], p: int) -> list[int]:
    a = a[:]
    inv = pow(b[-1], -1, p)
    while len(a) >= len(b):
        q = a[-1] * inv % p
        shift = len(a) - len(b)
        for i, bi in enumerate(b):
            a[shift + i] = (a[shift + i] - q * bi) % p
        _poly_trim(a)
    return a


def poly_gcd_degree(a: Sequence[int], b: Sequence[int], p: int) -> int:
    """Degree of ``gcd(a, b)`` over ``F_p`` (coefficients low-to-high)."""
    a, b = _poly_trim([x % p for x in a]), _poly_trim([x % p for x in b])
    while b:
        a, b = b, _poly_mod(a, b, p)
    return len(a) - 1


def rank_Tf_poly(f: GroupAlgebraElement) -> int:
    """``p - deg gcd(f(x), (x - 1)^p)``, using ``F_p[C_p] = F_p[x]/(x-1)^p``."""
    p = f.p
    if not any(f.coeffs):
        return 0
    x_minus_1_p = [math.comb(p, i) * (-1) ** (p - i) for i in range(p + 1)]
    return p - poly_gcd_degree(list(f.coeffs), x_minus_1_p, p)


def _batched_rank_mod_p(M: np.ndarray, p: int) -> np.ndarray:
    """Ranks of a stack of square matrices over ``F_p``."""
    R = M.copy() % p
    N, n, _ = R.shape
    inv = np.zeros(p, dtype=np.int64)
    inv[1:] = [pow(a, -1, p) for a in range(1, p)]
    row = np.zeros(N, dtype=np.int64)
    rows = np.arange(n)
    allb = np.arange(N)
    for c in range(n):
        cand = (R[:, :, c] != 0) & (rows[None, :] >= row[:, None])
        has = cand.any(axis=1)
        piv = np.argmax(cand, axis=1)
        b = allb[has]
        if b.size == 0:
            continue
        r, pv = row[b], piv[b]
        top, pr = R[b, r].copy(), R[b, pv].copy()
        R[b, r], R[b, pv] = pr, top
        pr = (pr * inv[pr[:, c]][:, None]) % p
        R[b, r] = pr
        factors = R[b, :, c].copy()
        factors[np.arange(b.size), r] = 0
        R[b] = (R[b] - factors[:, :, None] * pr[:, None, :]) % p
        row[b] += 1
    return row


def rank_census(p: int, chunk: int = 200_000) -> dict[int, int]:
    """Exhaustive ``rank -> count`` over all ``p^p`` elements of ``F_p[C_p]``."""
    if not is_prime(p):
        raise GroupError(f"{p} is not prime")
    if p > MAX_P:
        raise SizeGuardError(f"p = {p} > {MAX_P}")
    census = dict.fromkeys(range(p + 1), 0)
    total = p**p
    weights = p ** np.arange(p - 1, -1, -1)
    shifts = (np.arange(p)[:, None] - np.arange(p)[None, :]) % p  # row j = roll by j
    for start in range(0, total, chunk):
        idx = np.arange(start, min(total, start + chunk))
        F = (idx[:, None] // weights) % p
        mats = F[:, shifts]
        ranks = _batched_rank_mod_p(mats, p)
        for k, cnt in zip(*np.unique(ranks, return_counts=True)):
            census[int(k)] += int(cnt)
    return census


def census_formula(p: int) -> dict[int, int]:
    out = {0: 1}
    out.update({k: (p - 1) * p ** (k - 1) for k in range(1, p + 1)})
    return out


def census_csv(p: int, census: dict[int, int] | None = None) -> str:
    census = rank_census(p) if census is None else census
    formula = census_formula(p)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["rank", "count", "formula_count"])
    for k in range(p + 1):
        w.writerow([k, census[k], formula[k]])
    return buf.getvalue()


# -- the randomized construction ---------------------------------------------

def required_s(p: int, delta: float, c: float, cap: int = REQUIRED_S_CAP) -> int:
    """``ceil(4 c ln p / (1 - 2 delta)^2)`` orbits for a ``delta``-balanced union."""
    if not 0 < delta < 0.5:
        raise GroupError(f"delta must lie in (0, 1/2), got {delta}")
    if c <= 1:
        raise GroupError(f"c must exceed 1, got {c}")
    s = math.ceil(4 * c * math.log(p) / (1 - 2 * delta) ** 2)
    if s > cap:
        raise SizeGuardError(f"required s = {s} exceeds cap {cap}")
    return s


def sample_orbit_union(p: int, n: int, s: int, seed: int) -> np.ndarray:
    """Multiset ``U_i C_{p^n} h_i`` for ``s`` uniform ``h_i``; shape ``(s p^n, p)``.

    Rows ``i p^n .. (i+1) p^n - 1`` are ``j . h_i`` for ``j = 0 .. p^n - 1``,
    so each rotation of ``h_i`` appears ``p^(n-1)`` times.
    """
    if s < 1:
        raise GroupError("s must be >= 1")
    rng = np.random.default_rng(seed)
    h = rng.integers(0, p, size=(s, p))
    x = np.arange(p)
    shifts = (x[None, :] - np.arange(p**n)[:, None]) % p  # (p^n, p): f(x - j)
    return h[:, shifts].reshape(s * p**n, p)


def negate(B: np.ndarray, p: int) -> np.ndarray:
    return (-np.asarray(B)) % p


class FailureBound(NamedTuple):
    single: float
    aggregate: float


def failure_bound(p: int, delta: float, r: int, s: int) -> FailureBound:
    """``8 exp(-(1-2delta)^2 r s / 4)`` and its union over ranks ``1..p``.

    The aggregate weights rank ``r`` by ``p^r`` (an upper bound for the
    number of elements of that rank).
    """
    if not 1 <= r <= p:
        raise GroupError(f"rank r must lie in [1, {p}]")
    a = (1 - 2 * delta) ** 2 / 4
    single = 8 * math.exp(-a * r * s)
    aggregate = 8 * sum(p**k * math.exp(-a * k * s) for k in range(1, p + 1))
    return FailureBound(single, aggregate)


def multiset_avg_kazhdan(B) -> float:
    """Average constant of ``F_p[C_p]`` with respect to ``B u -B`` (character method)."""
    arr, p = _as_multiset(B)
    A = ElementaryAbelian(p, p)
    with warnings.catch_warnings():
        # the zero vector is a legitimate orbit; its self-loops count in the average
        warnings.simplefilter("ignore")
        op = build_cayley(A, A.index(arr))
    return spectral_gap(op, method="characters").avg_kazhdan


def balance_trial(p: int, n: int, delta: float, s: int, seed: int) -> dict:
    B = sample_orbit_union(p, n, s, seed)
    rep = balance_defect(B)
    return {"seed": seed, "s": s, "delta_target": delta, "delta_star": rep.delta_star,
            "success": rep.is_balanced(delta), "avg_kazhdan": multiset_avg_kazhdan(B)}


def balance_rows(p: int, n: int, delta: float, c: float, trials: int, seed: int) -> list[dict]:
    """Per-trial records for the sampling experiment; trial ``t`` uses ``seed + t``."""
    s = required_s(p, delta, c)
    return [balance_trial(p, n, delta, s, seed + t) for t in range(trials)]
