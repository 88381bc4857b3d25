"""Cayley averaging operators, spectral gaps and average Kazhdan constants.

For a symmetric multiset ``S`` the operator ``M v(g) = (1/|S|) sum_s v(g s)``
is self-adjoint; ``lambda2`` is its second largest (signed) eigenvalue and
the average Kazhdan constant of the group with respect to ``S`` is
``2 * (1 - lambda2)``.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import ConvergenceError, GroupError, SizeGuardError
from .groups import FiniteGroup, SubgroupHandle, quotient_by_normal, subgroup_generated
from .groups.core import as_index

DENSE_THRESHOLD = 4096
EXACT_TOL = 1e-12
ITER_TOL = 1e-7


class CayleyOperator:
    """Normalized averaging operator of ``Cay(G, S u S^-1)``.

    ``generators`` is the symmetrized multiset ``S`` followed by the inverses
    of ``S``. Symmetrizing loses nothing: ``|rho(s)v - v| = |rho(s^-1)v - v|``
    for unitary ``rho``, so the average over ``S`` equals the average over
    ``S u S^-1``.
    """

    def __init__(self, group: FiniteGroup, raw):
        raw = as_index(raw).ravel()
        if raw.size == 0:
            raise GroupError("generating multiset is empty")
        if raw.min() < 0 or raw.max() >= group.order:
            raise GroupError("generator index out of range")
        self.group = group
        self.raw = raw
        self.generators = np.concatenate([raw, as_index(group.inv(raw)).ravel()])
        self.degree = int(self.generators.size)
        self.has_identity = bool((raw == 0).any())
        if self.has_identity:
            warnings.warn("identity in generating multiset (self-loops)", stacklevel=2)
        uniq, counts = np.unique(self.generators, return_counts=True)
        self._uniq, self._weights = uniq, counts / self.degree
        self._perms: np.ndarray | None = None

    def __repr__(self):
        return f"<CayleyOperator {self.group.label} degree={self.degree}>"

    @property
    def perms(self) -> np.ndarray:
        """``perms[i, g] = g * s_i`` for the distinct generators ``s_i``."""
        if self._perms is None:
            e = self.group.elements()
            self._perms = np.stack([as_index(self.group.mul(e, s)) for s in self._uniq])
        return self._perms

    def matvec(self, v: np.ndarray) -> np.ndarray:
        """Apply ``M`` to a vector or to the columns of a matrix."""
        if v.ndim == 1:
            return self._weights @ v[self.perms]
        out = np.zeros_like(v, dtype=float)
        for perm, w in zip(self.perms, self._weights):
            out += w * v[perm]
        return out

    def dense(self) -> np.ndarray:
        n = self.group.order
        M = np.zeros((n, n))
        rows = np.arange(n)
        for perm, w in zip(self.perms, self._weights):
            M[rows, perm] += w
        return M

    @property
    def connected(self) -> bool:
        return subgroup_generated(self.group, self._uniq).order == self.group.order


def build_cayley(G: FiniteGroup, S) -> CayleyOperator:
    return CayleyOperator(G, S)


def _fmt(x):
    if isinstance(x, float):
        return float(f"{x:.15g}")
    return x


@dataclass
class SpectralReport:
    group: str
    order: int
    degree: int
    lambda2: float
    beta: float
    avg_kazhdan: float
    method: str  # characters | dense | iterative
    tolerance: float
    iterations: int = 0
    connected: bool = True
    seed: int | None = None
    empty: bool = False
    residual: float = 0.0
    extra: dict = field(default_factory=dict)

    JSON_KEYS = ("group", "order", "degree", "lambda2", "beta", "avg_kazhdan", "method",
                 "tolerance", "iterations", "connected", "seed")

    def to_dict(self) -> dict:
        d = asdict(self)
        return {k: _fmt(d[k]) for k in self.JSON_KEYS}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def _report(op: CayleyOperator, lambda2: float, method: str, tol: float, **kw) -> SpectralReport:
    lambda2 = float(min(lambda2, 1.0))
    beta = 1.0 - lambda2
    return SpectralReport(
        group=op.group.label, order=op.group.order, degree=op.degree,
        lambda2=lambda2, beta=beta, avg_kazhdan=2.0 * beta,
        method=method, tolerance=tol, **kw,
    )


def _disconnected(op: CayleyOperator, method: str, tol: float, **kw) -> SpectralReport:
    return _report(op, 1.0, method, tol, connected=False, **kw)


def _trivial_group(op: CayleyOperator, method: str, tol: float) -> SpectralReport:
    # no nonconstant functions: report the empty-spectrum sentinel
    return _report(op, -1.0, method, tol, empty=True)


# -- abelian groups --------------------------------------------------------

def character_values(G: FiniteGroup, elems) -> np.ndarray:
    """``chi_k(s)`` for all characters ``k`` (rows) and ``elems`` (columns).

    Row 0 is the trivial character; rows follow the row-major order of the
    exponent vectors over ``G.abelian_coordinates()``.
    """
    moduli, coords = G.abelian_coordinates()
    return np.exp(2j * np.pi * _phases(moduli, coords, elems))


def _character_grid(moduli) -> np.ndarray:
    if not moduli:
        return np.zeros((1, 0), dtype=np.int64)
    grids = np.meshgrid(*[np.arange(m) for m in moduli], indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=1)


def _int_phases(moduli, coords, elems) -> tuple[np.ndarray, int]:
    """Integer phases ``L sum_j k_j c_j(s) / m_j mod L`` with ``L = lcm(moduli)``."""
    elems = as_index(elems).ravel()
    if not moduli:
        return np.zeros((1, elems.size), dtype=np.int64), 1
    L = math.lcm(*moduli)
    scale = np.array([L // m for m in moduli], dtype=np.int64)
    K = _character_grid(moduli)
    C = (coords[elems] * scale).T
    if len(moduli) * max(moduli) * L < 2**50:
        # BLAS float product; exact at this magnitude
        return np.rint(K.astype(float) @ C.astype(float)).astype(np.int64) % L, L
    return (K @ C) % L, L


def _phases(moduli, coords, elems) -> np.ndarray:
    """Fractional phases ``sum_j k_j c_j(s) / m_j`` in ``[0, 1)``."""
    ph, L = _int_phases(moduli, coords, elems)
    return ph / L


def abelian_spectrum(op: CayleyOperator) -> np.ndarray:
    """All eigenvalues of ``op`` (one per character, row 0 trivial)."""
    moduli, coords = op.group.abelian_coordinates()
    ph, L = _int_phases(moduli, coords, op._uniq)
    return np.cos(2 * np.pi * np.arange(L) / L)[ph] @ op._weights


def _spectrum_and_connectivity(op: CayleyOperator) -> tuple[np.ndarray, bool]:
    moduli, coords = op.group.abelian_coordinates()
    ph, L = _int_phases(moduli, coords, op._uniq)
    # S generates G iff no nontrivial character is trivial on all of S
    connected = not (ph[1:] == 0).all(axis=1).any()
    return np.cos(2 * np.pi * np.arange(L) / L)[ph] @ op._weights, connected


def abelian_gap_characters(op: CayleyOperator) -> SpectralReport:
    G = op.group
    if not G.is_abelian:
        raise GroupError(f"{G.label} is not abelian")
    if G.order == 1:
        return _trivial_group(op, "characters", EXACT_TOL)
    ev, connected = _spectrum_and_connectivity(op)
    if not connected:
        return _disconnected(op, "characters", EXACT_TOL)
    return _report(op, float(ev[1:].max()), "characters", EXACT_TOL)


def character_average(G: FiniteGroup, S_raw) -> float:
    """``min_{chi != 1} (1/|S|) sum_s |chi(s) - 1|^2`` evaluated directly."""
    S_raw = as_index(S_raw).ravel()
    chi = character_values(G, S_raw)[1:]
    return float((np.abs(chi - 1.0) ** 2).mean(axis=1).min())


def kazhdan_max_abelian(op: CayleyOperator, S_raw=None) -> float:
    """Max-form constant ``min_{chi != 1} max_s |chi(s) - 1|``."""
    G = op.group
    if not G.is_abelian:
        raise GroupError(f"{G.label} is not abelian")
    S_raw = op.raw if S_raw is None else as_index(S_raw).ravel()
    chi = character_values(G, S_raw)[1:]
    return float(np.abs(chi - 1.0).max(axis=1).min())


# -- dense -----------------------------------------------------------------

def dense_spectrum(op: CayleyOperator, threshold: int = DENSE_THRESHOLD) -> np.ndarray:
    """Eigenvalues in decreasing order."""
    if op.group.order > threshold:
        raise SizeGuardError(f"order {op.group.order} above dense threshold {threshold}")
    M = op.dense()
    return np.linalg.eigvalsh((M + M.T) / 2)[::-1]


def gap_dense(op: CayleyOperator, threshold: int = DENSE_THRESHOLD) -> SpectralReport:
    if op.group.order > threshold:
        raise SizeGuardError(f"order {op.group.order} above dense threshold {threshold}")
    if op.group.order == 1:
        return _trivial_group(op, "dense", EXACT_TOL)
    if not op.connected:
        return _disconnected(op, "dense", EXACT_TOL)
    ev = dense_spectrum(op, threshold)
    return _report(op, float(ev[1]), "dense", EXACT_TOL)


# -- iterative -------------------------------------------------------------

def default_max_iter(order: int) -> int:
    return int(math.ceil(200 * math.log(max(order, 2))))


class _Deflator:
    """Orthogonal projection away from functions constant on cosets of ``N``."""

    def __init__(self, labels: np.ndarray, count: int):
        self.labels = labels
        self.count = count
        self.sizes = np.bincount(labels, minlength=count).astype(float)

    def __call__(self, V: np.ndarray) -> np.ndarray:
        if V.ndim == 1:
            means = np.bincount(self.labels, weights=V, minlength=self.count) / self.sizes
            return V - means[self.labels]
        b = V.shape[1]
        flat = (self.labels[:, None] * b + np.arange(b)).ravel()
        sums = np.bincount(flat, weights=V.ravel(), minlength=self.count * b).reshape(self.count, b)
        return V - (sums / self.sizes[:, None])[self.labels]


def _constant_deflator(n: int) -> _Deflator:
    return _Deflator(np.zeros(n, dtype=np.int64), 1)


def _power_iteration_vector(op: CayleyOperator, deflate: _Deflator, tol: float, max_iter: int,
                            rng: np.random.Generator) -> tuple[float, float, int]:
    v = deflate(rng.standard_normal(op.group.order))
    v /= np.linalg.norm(v)
    residual = math.inf
    for it in range(1, max_iter + 1):
        Mv = op.matvec(v)
        w = deflate(0.5 * (Mv + v))
        lam = 2.0 * float(v @ w) - 1.0
        residual = float(np.linalg.norm(deflate(Mv) - lam * v))
        if residual <= tol:
            return lam, residual, it
        v = w / np.linalg.norm(w)
    raise ConvergenceError(
        f"power iteration did not converge in {max_iter} iterations (residual {residual:.3e})",
        residual, max_iter,
    )


def _power_iteration(op: CayleyOperator, deflate: _Deflator, tol: float, max_iter: int,
                     seed: int, block: int) -> tuple[float, float, int]:
    """Block power iteration on ``(M + I)/2`` inside the deflated subspace.

    Each step multiplies the block, re-projects, orthonormalizes and takes
    the top Rayleigh-Ritz pair; stops when ``|M v - lambda v| <= tol``.
    Returns ``(lambda, residual, iterations)``.
    """
    n = op.group.order
    rng = np.random.default_rng(seed)
    b = max(1, min(block, n - deflate.count))
    if b == 1:
        return _power_iteration_vector(op, deflate, tol, max_iter, rng)
    Q = deflate(rng.standard_normal((n, b)))
    Q, _ = np.linalg.qr(Q)
    residual = math.inf
    lam = 1.0
    for it in range(1, max_iter + 1):
        MQ = op.matvec(Q)
        W = deflate(0.5 * (MQ + Q))
        T = Q.T @ W
        T = (T + T.T) / 2
        evals, evecs = np.linalg.eigh(T)
        y = evecs[:, -1]
        v = Q @ y
        mu = float(evals[-1])
        lam = 2.0 * mu - 1.0
        r = deflate(MQ @ y) - lam * v
        residual = float(np.linalg.norm(r))
        if residual <= tol:
            return lam, residual, it
        Q, _ = np.linalg.qr(W)
    raise ConvergenceError(
        f"power iteration did not converge in {max_iter} iterations (residual {residual:.3e})",
        residual, max_iter,
    )


def gap_iterative(op: CayleyOperator, tol: float = ITER_TOL, max_iter: int | None = None,
                  seed: int = 0, block: int = 1) -> SpectralReport:
    """``lambda2`` by deflated power iteration; deterministic for fixed ``seed``."""
    n = op.group.order
    max_iter = default_max_iter(n) if max_iter is None else max_iter
    if n == 1:
        return _trivial_group(op, "iterative", tol)
    if not op.connected:
        return _disconnected(op, "iterative", tol, seed=seed)
    lam, res, it = _power_iteration(op, _constant_deflator(n), tol, max_iter, seed, block)
    return _report(op, lam, "iterative", tol, iterations=it, seed=seed, residual=res)


def spectral_gap(op: CayleyOperator, method: str = "auto", tol: float = ITER_TOL,
                 seed: int = 0, threshold: int = DENSE_THRESHOLD,
                 max_iter: int | None = None) -> SpectralReport:
    """Dispatch: characters for abelian groups, dense when small, else iterative."""
    if method == "auto":
        if op.group.is_abelian:
            method = "characters"
        elif op.group.order <= threshold:
            method = "dense"
        else:
            method = "iterative"
    if method == "characters":
        return abelian_gap_characters(op)
    if method == "dense":
        return gap_dense(op, threshold)
    if method == "iterative":
        return gap_iterative(op, tol=tol, max_iter=max_iter, seed=seed)
    raise ValueError(f"unknown method {method!r}")


# -- relative gaps ---------------------------------------------------------

def _coset_labels(op: CayleyOperator, N: SubgroupHandle) -> tuple[np.ndarray, int]:
    if N.parent is not op.group:
        raise GroupError("subgroup belongs to a different group")
    q = quotient_by_normal(op.group, N)
    return np.asarray(q.projection), q.target.order


def _helmert(k: int) -> np.ndarray:
    """Orthonormal basis (k x (k-1)) of the sum-zero vectors in R^k."""
    H = np.zeros((k, k - 1))
    for j in range(1, k):
        H[:j, j - 1] = 1.0
        H[j, j - 1] = -j
        H[:, j - 1] /= math.sqrt(j * (j + 1))
    return H


def relative_spectrum_dense(op: CayleyOperator, N: SubgroupHandle,
                            threshold: int = DENSE_THRESHOLD) -> np.ndarray:
    """Spectrum of ``M`` on functions orthogonal to ``N``-coset indicators."""
    if op.group.order > threshold:
        raise SizeGuardError(f"order {op.group.order} above dense threshold {threshold}")
    labels, count = _coset_labels(op, N)
    k = N.order
    n = op.group.order
    if k == 1:
        return np.zeros(0)
    order = np.argsort(labels, kind="stable")  # cosets as contiguous blocks
    Hm = _helmert(k)
    basis = np.zeros((n, count * (k - 1)))
    for c in range(count):
        rows = order[c * k:(c + 1) * k]
        basis[rows, c * (k - 1):(c + 1) * (k - 1)] = Hm
    MB = op.matvec(basis)
    T = basis.T @ MB
    return np.linalg.eigvalsh((T + T.T) / 2)[::-1]


def relative_gap_deflated(op: CayleyOperator, N: SubgroupHandle, method: str = "auto",
                          tol: float = ITER_TOL, seed: int = 0, max_iter: int | None = None,
                          threshold: int = DENSE_THRESHOLD, block: int = 1) -> SpectralReport:
    """Gap of ``M`` restricted to the complement of functions constant on ``N``-cosets.

    That complement is invariant under ``M``. With ``N`` the commutator
    subgroup it is the sum of all irreducibles of dimension >= 2. When ``N``
    is trivial the complement is empty and the report carries
    ``empty=True`` with the sentinel ``beta = 2``.
    """
    G = op.group
    if method == "auto":
        method = "dense" if G.order <= threshold else "iterative"
    labels, count = _coset_labels(op, N)
    if N.order == 1:
        return _report(op, -1.0, method, tol if method == "iterative" else EXACT_TOL, empty=True)
    if not op.connected:
        return _disconnected(op, method, tol if method == "iterative" else EXACT_TOL)
    if method == "dense":
        ev = relative_spectrum_dense(op, N, threshold)
        return _report(op, float(ev[0]), "dense", EXACT_TOL)
    if method == "iterative":
        max_iter = default_max_iter(G.order) if max_iter is None else max_iter
        lam, res, it = _power_iteration(op, _Deflator(labels, count), tol, max_iter, seed, block)
        return _report(op, lam, "iterative", tol, iterations=it, seed=seed, residual=res)
    raise ValueError(f"unknown method {method!r}")
