"""Named group families and numerical checks of the extension bounds."""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import GroupError, PreconditionError, SearchCapError, SizeGuardError
from .groups import (
    Cocycle,
    ElementaryAbelian,
    ExtensionData,
    FiniteGroup,
    QuotientMap,
    SubgroupHandle,
    cocycle_extension,
    commutator_subgroup,
    is_prime,
    lower_p_series,
    make_cyclic,
    make_group_algebra,
    orbit_closure,
    quotient_by_normal,
    quotient_map_from_projection,
    semidirect_product,
    subgroup_generated,
    trivial_action,
)
from .groups.core import Extension, as_index
from .spectra import (
    DENSE_THRESHOLD,
    ITER_TOL,
    build_cayley,
    gap_dense,
    kazhdan_max_abelian,
    relative_gap_deflated,
    spectral_gap,
)

#: Largest group order the family builders will construct.
MAX_ORDER = 2**20
COMPARE_SLACK = 1e-9


def _fmt(d: dict) -> dict:
    return {k: float(f"{v:.15g}") if isinstance(v, float) else v for k, v in d.items()}


# -- metabelian extensions of F_p[C_p] by C_{p^n} ----------------------------

@dataclass(frozen=True, eq=False)
class MetabelianInstance:
    p: int
    n: int
    split: bool
    group: FiniteGroup
    projection: QuotientMap  # onto C_{p^n}
    kernel_iso: np.ndarray  # index in F_p[C_p] -> element of group
    algebra: ElementaryAbelian

    def lift(self, h: int) -> int:
        return int(self.projection.section[h])


def _metabelian_guard(p: int, n: int, order: int) -> None:
    if not is_prime(p):
        raise GroupError(f"{p} is not prime")
    if n < 1:
        raise GroupError("n must be >= 1")
    if p > 7 or (n >= 2 and p > 5) or order > MAX_ORDER:
        raise SizeGuardError(f"metabelian group for p={p}, n={n} has order {order}; too large")


def build_split_metabelian(p: int, n: int) -> MetabelianInstance:
    """``C_{p^n} x| F_p[C_p]`` with the rotation action."""
    _metabelian_guard(p, n, p**p * p**n)
    A, action = make_group_algebra(p, n)
    H = action.acting
    G = semidirect_product(A, H, action, label=f"C_{p**n} x| F_{p}[C_{p}]")
    proj = G.elements() // A.order
    q = QuotientMap(G, SubgroupHandle.from_mask(G, proj == 0), H, proj, A.order * H.elements())
    return MetabelianInstance(p, n, True, G, q, A.elements(), A)


def build_nonsplit_metabelian(p: int, n: int) -> MetabelianInstance:
    """Quotient of ``C_{p^{n+1}} x| F_p[C_p]`` by a diagonal central subgroup.

    The diagonal is generated by (constant vector 1, p^n): the product of a
    central constant vector and the order-``p`` element of ``C_{p^{n+1}}``.
    """
    if n < 2:
        raise GroupError("a non-split extension needs n >= 2")
    _metabelian_guard(p, n, p**p * p**(n + 1))
    A, action = make_group_algebra(p, n + 1)
    H = action.acting
    big = semidirect_product(A, H, action, label=f"C_{p**(n + 1)} x| F_{p}[C_{p}]")
    ones = A.index(np.ones(p, dtype=np.int64))
    Z = subgroup_generated(big, [ones])
    if not Z.is_central():
        raise GroupError("constant vectors are not central")
    K = subgroup_generated(big, [big.element(ones, p**n)])
    q1 = quotient_by_normal(big, K, label=f"Gamma({p},{n})")
    G = q1.target
    target = make_cyclic(p**n)
    proj = (q1.section // A.order) % p**n
    q = quotient_map_from_projection(G, target, proj)
    kernel_iso = q1.projection[A.elements()]
    if not np.array_equal(np.sort(kernel_iso), q.kernel.members):
        raise GroupError("F_p[C_p] does not map onto the kernel")
    return MetabelianInstance(p, n, False, G, q, kernel_iso, A)


@dataclass
class NonsplitReport:
    nonsplit: bool
    lifting_orders: dict
    witness: int | None
    target_order: int

    def to_dict(self) -> dict:
        return {"nonsplit": self.nonsplit, "target_order": self.target_order,
                "lifting_orders": {str(k): v for k, v in sorted(self.lifting_orders.items())},
                "witness": self.witness}


def verify_nonsplit(inst: MetabelianInstance) -> NonsplitReport:
    """Non-split iff no preimage of the generator ``1`` has order ``p^n``."""
    G = inst.group
    target = inst.p**inst.n
    lifts = inst.projection.fiber(1)
    orders = G.element_orders(lifts)
    hist = Counter(int(o) for o in orders)
    hits = lifts[orders == target]
    witness = int(hits[0]) if hits.size else None
    return NonsplitReport(witness is None, dict(hist), witness, target)


# -- relatively free class-2 groups ------------------------------------------

@dataclass(frozen=True, eq=False)
class GammaK2Instance:
    p: int
    k: int
    group: Extension
    generators: np.ndarray


def _commutator_pairs(k: int) -> list[tuple[int, int]]:
    return [(i, j) for i in range(k) for j in range(i + 1, k)]


def build_gamma_k2(p: int, k: int, experimental: bool = False) -> GammaK2Instance:
    """``F_k / phi_3(F_k)`` as a central extension of ``F_p^{k(k+1)/2}`` by ``F_p^k``.

    Elements are normal words ``x_1^{h_1} ... x_k^{h_k} . a``. Central
    coordinates: first the ``k`` powers ``x_i^p``, then ``[x_i, x_j]`` for
    ``i < j``. Multiplying collects ``x_j^{a} x_i^{b} = x_i^{b} x_j^{a} [x_i, x_j]^{-ab}``,
    so the cocycle is the carry ``floor((a_i + b_i)/p)`` on the power
    coordinates plus ``-a_j b_i`` on ``[x_i, x_j]``.
    """
    if not is_prime(p):
        raise GroupError(f"{p} is not prime")
    if k < 2:
        raise GroupError("k must be >= 2")
    if p == 2 and not experimental:
        raise GroupError("p = 2 is experimental; pass experimental=True")
    d = k * (k + 1) // 2
    if p ** (k + d) > MAX_ORDER:
        raise SizeGuardError(f"Gamma_{{{k},2}} at p={p} has order p^{k + d}; too large")
    A = ElementaryAbelian(p, d, label=f"F_{p}^{d}")
    H = ElementaryAbelian(p, k, label=f"F_{p}^{k}")
    hc = H.coords(H.elements())
    a, b = hc[:, None, :], hc[None, :, :]
    parts = [(a + b) // p]
    parts += [((-a[..., j] * b[..., i]) % p)[..., None] for i, j in _commutator_pairs(k)]
    sigma = A.index(np.concatenate(parts, axis=-1))
    data = ExtensionData(A, H, trivial_action(H, A), Cocycle(sigma))
    G, _ = cocycle_extension(data, label=f"Gamma_{k},2(p={p})", check=p**k <= 243)
    gens = A.order * H.generators()
    return GammaK2Instance(p, k, G, gens)


@dataclass
class GammaK2Report:
    p: int
    k: int
    order: int
    phi2_order: int
    index: int
    commutator_order: int
    phi3_trivial: bool
    phi2_central: bool
    phi2_exponent_p: bool
    generated: bool
    checks: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(self.checks.values())

    def to_dict(self) -> dict:
        d = asdict(self)
        d["pass"] = self.ok
        return d


def verify_gamma_k2(inst: GammaK2Instance) -> GammaK2Report:
    p, k, G = inst.p, inst.k, inst.group
    half = k * (k + 1) // 2
    series = lower_p_series(G, p, check=False)
    phi2 = series[1] if len(series) > 1 else series[0]
    phi3_trivial = len(series) == 3 and series[2].is_trivial()
    comm = commutator_subgroup(G)
    generated = subgroup_generated(G, inst.generators).order == G.order
    exp_p = bool((as_index(G.power(phi2.members, p)) == 0).all())
    rep = GammaK2Report(
        p, k, G.order, phi2.order, G.order // phi2.order, comm.order,
        phi3_trivial, phi2.is_central(), exp_p, generated,
    )
    rep.checks = {
        "order": G.order == p ** (k + half),
        "phi2_order": phi2.order == p**half,
        "index": G.order // phi2.order == p**k,
        "commutator_order": comm.order == p ** (k * (k - 1) // 2),
        "phi3_trivial": phi3_trivial,
        "phi2_central": rep.phi2_central,
        "phi2_exponent_p": exp_p,
        "generated": generated,
    }
    return rep


# -- the extension bound ------------------------------------------------------

def theorem1_bound(eps_H: float, eps_A: float, sizeS: int, sizeB: int) -> float:
    """``eps_H eps_A / (512 (1 + |S|/|B| + |B|/|S|))``."""
    if min(eps_H, eps_A) <= 0 or min(sizeS, sizeB) <= 0:
        raise GroupError("bound inputs must be positive")
    c = sizeB / sizeS
    return eps_H * eps_A / (512 * (1 + c + 1 / c))


@dataclass
class MainTheoremReport:
    p: int
    n: int
    split: bool
    sizeS: int
    sizeB: int
    eps_H: float
    eps_A: float
    eps_Gamma: float
    bound: float
    ratio: float
    passed: bool

    def to_dict(self) -> dict:
        d = asdict(self)
        d["pass"] = d.pop("passed")
        return _fmt(d)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def verify_main_theorem(inst: MetabelianInstance, S, B, S_lift=None,
                        tol: float = ITER_TOL, seed: int = 0) -> MainTheoremReport:
    """Check ``eps_Gamma >= theorem1_bound(eps_H, eps_A, |S|, |B|)``.

    ``S`` lists elements of ``C_{p^n}``, ``B`` elements of ``F_p[C_p]`` (by
    index). ``eps_A`` uses the ``|B| |H|`` multiset of orbit images. The
    default lifting is the instance's section.
    """
    S = as_index(S).ravel()
    B = as_index(B).ravel()
    A = inst.algebra
    A_, action = make_group_algebra(inst.p, inst.n)
    H = action.acting
    if subgroup_generated(H, S).order != H.order:
        raise PreconditionError("S does not generate C_{p^n}")
    B_orbit = orbit_closure(A_, H, action, B, mode="multiset")
    if subgroup_generated(A, B_orbit).order != A.order:
        raise PreconditionError("the orbits of B do not generate F_p[C_p]")
    S_lift = inst.projection.section[S] if S_lift is None else as_index(S_lift).ravel()
    if not np.array_equal(inst.projection.projection[S_lift], S):
        raise GroupError("S_lift is not a lifting of S")
    eps_H = spectral_gap(build_cayley(H, S), method="characters").avg_kazhdan
    eps_A = spectral_gap(build_cayley(A, B_orbit), method="characters").avg_kazhdan
    gens = np.concatenate([S_lift, inst.kernel_iso[B]])
    eps_G = spectral_gap(build_cayley(inst.group, gens), tol=tol, seed=seed).avg_kazhdan
    bound = theorem1_bound(eps_H, eps_A, S.size, B.size)
    return MainTheoremReport(
        inst.p, inst.n, inst.split, int(S.size), int(B.size), eps_H, eps_A, eps_G,
        bound, eps_G / bound, eps_G >= bound - COMPARE_SLACK,
    )


def random_generating_B(p: int, size: int, rng: np.random.Generator, max_tries: int = 1000) -> np.ndarray:
    """``size`` distinct nonzero elements of ``F_p[C_p]`` whose rotation orbits generate it."""
    A, action = make_group_algebra(p, 1)
    for _ in range(max_tries):
        B = rng.choice(np.arange(1, A.order), size=size, replace=False)
        orb = orbit_closure(A, action.acting, action, B, mode="set")
        if subgroup_generated(A, orb).order == A.order:
            return B
    raise PreconditionError("could not sample a generating B")


# -- central extensions -------------------------------------------------------

@dataclass
class SerreReport:
    order: int
    quotient_order: int
    sizeS: int
    eps2_quotient: float
    relative_avg: float
    bound: float
    passed: bool
    vacuous: bool = False
    eps1_quotient: float | None = None
    max_form_bound: float | None = None
    max_form_certified: bool | None = None
    method: str = ""

    def to_dict(self) -> dict:
        d = asdict(self)
        d["pass"] = d.pop("passed")
        return _fmt(d)


#: Power-iteration budget for relative gaps: eigenvalue clusters from
#: irreducibles of dimension >= 2 make convergence much slower than for plain gaps.
SERRE_MAX_ITER = 50_000


def verify_serre(G: FiniteGroup, A: SubgroupHandle, S_lift, tol: float = ITER_TOL,
                 seed: int = 0, threshold: int = DENSE_THRESHOLD,
                 max_iter: int = SERRE_MAX_ITER) -> SerreReport:
    """Relative average constant on irreducibles of dimension >= 2 vs ``eps_2 / 4``.

    ``eps_2`` is the average constant of ``G/A`` for the projected set; the
    relative constant is ``2 beta`` of ``Cay(G, S_lift)`` after deflating
    everything constant on cosets of the commutator subgroup. The max-form
    statement is certified when ``sqrt(relative) >= eps_1 / (2|S|)``, since
    the max over ``S`` dominates the root of the mean square.
    """
    if A.parent is not G:
        raise GroupError("A is not a subgroup of G")
    if not A.is_central():
        raise GroupError("A is not central in G")
    S_lift = as_index(S_lift).ravel()
    if subgroup_generated(G, S_lift).order != G.order:
        raise PreconditionError("S_lift does not generate G")
    q = quotient_by_normal(G, A)
    Hq = q.target
    S = q.projection[S_lift]
    op_H = build_cayley(Hq, S)
    eps2 = spectral_gap(op_H, tol=tol, seed=seed, threshold=threshold, max_iter=max_iter).avg_kazhdan
    bound = eps2 / 4
    comm = commutator_subgroup(G)
    if comm.is_trivial():
        return SerreReport(G.order, Hq.order, int(S.size), eps2, math.inf, bound, True,
                           vacuous=True)
    op_G = build_cayley(G, S_lift)
    rel = relative_gap_deflated(op_G, comm, tol=tol, seed=seed, threshold=threshold,
                                max_iter=max_iter)
    rel_avg = rel.avg_kazhdan
    rep = SerreReport(G.order, Hq.order, int(S.size), eps2, rel_avg, bound,
                      rel_avg >= bound - COMPARE_SLACK, method=rel.method)
    if Hq.is_abelian:
        eps1 = kazhdan_max_abelian(op_H, S)
        rep.eps1_quotient = eps1
        rep.max_form_bound = eps1 / (2 * S.size)
        rep.max_form_certified = math.sqrt(max(rel_avg, 0.0)) >= rep.max_form_bound - COMPARE_SLACK
    return rep


def random_lifted_generators(G: FiniteGroup, size: int, rng: np.random.Generator,
                             max_tries: int = 1000) -> np.ndarray:
    """``size`` distinct non-identity elements that generate ``G``."""
    for _ in range(max_tries):
        S = rng.choice(np.arange(1, G.order), size=size, replace=False)
        if subgroup_generated(G, S).order == G.order:
            return S
    raise PreconditionError(f"no generating set of size {size} found")


# -- g_eps search -------------------------------------------------------------

@dataclass
class GEpsReport:
    group: str
    order: int
    eps: float
    m: int
    witness: list
    avg_kazhdan: float
    verified_avg_kazhdan: float
    trials: int
    seed: int

    def to_dict(self) -> dict:
        return _fmt(asdict(self))


def default_search_cap(order: int) -> int:
    return 2 + math.ceil(math.log2(max(order, 2)))


def g_epsilon_search(G: FiniteGroup, eps: float, trials: int = 20, seed: int = 0,
                     max_m: int | None = None, tol: float = ITER_TOL,
                     threshold: int = DENSE_THRESHOLD) -> GEpsReport:
    """Smallest sampled ``m`` with an ``m``-subset of average constant ``>= eps``.

    An upper bound on ``g_eps(G)``, never a certificate of minimality. Sets
    are uniform ``m``-subsets of the non-identity elements; the witness is
    recomputed by a second route (dense, or characters for large abelian
    groups) before returning.
    """
    if eps <= 0:
        raise GroupError("eps must be positive")
    if G.order == 1:
        raise GroupError("trivial group has no nontrivial representations")
    cap = default_search_cap(G.order) if max_m is None else max_m
    rng = np.random.default_rng(seed)
    pool = np.arange(1, G.order)
    best = {"m": None, "avg_kazhdan": -math.inf, "witness": None}
    for m in range(1, min(cap, pool.size) + 1):
        for _ in range(trials):
            S = np.sort(rng.choice(pool, size=m, replace=False))
            rep = spectral_gap(build_cayley(G, S), tol=tol, seed=seed, threshold=threshold)
            if rep.avg_kazhdan > best["avg_kazhdan"]:
                best = {"m": m, "avg_kazhdan": rep.avg_kazhdan, "witness": S.tolist()}
            if rep.connected and rep.avg_kazhdan >= eps:
                verified = _reverify(G, S, rep, threshold)
                if verified < eps - COMPARE_SLACK:
                    raise GroupError("witness failed re-verification")
                return GEpsReport(G.label, G.order, eps, m, S.tolist(), rep.avg_kazhdan,
                                  verified, trials, seed)
    raise SearchCapError(f"no set of size <= {cap} reached eps = {eps}", best)


def _reverify(G: FiniteGroup, S: np.ndarray, rep, threshold: int) -> float:
    op = build_cayley(G, S)
    if G.order <= threshold:
        return gap_dense(op, threshold).avg_kazhdan
    if G.is_abelian and rep.method != "characters":
        return spectral_gap(op, method="characters").avg_kazhdan
    return spectral_gap(op, method="iterative", tol=rep.tolerance / 10, seed=(rep.seed or 0) + 1).avg_kazhdan

