"""Finite groups on dense element indices.

Every group is a set of indices ``0 .. order-1`` with identity ``0``.
Multiplication and inversion are vectorized over numpy integer arrays with
ordinary broadcasting; scalar inputs give Python ``int`` results.

Small groups can materialize their multiplication table (``group.table``);
large ones multiply structurally (pair arithmetic for extensions, digit
arithmetic for elementary abelian groups) so that no ``order x order``
array is ever stored.
"""

from __future__ import annotations

import functools

import numpy as np

from ..errors import GroupError, SizeGuardError

#: Largest order for which ``FiniteGroup.table`` may be materialized.
TABLE_LIMIT = 4096


def as_index(x) -> np.ndarray:
    return np.asarray(x, dtype=np.int64)


def _scalar_or_array(out: np.ndarray):
    return int(out) if out.ndim == 0 else out


def prime_factors(n: int) -> list[int]:
    out, q = [], 2
    while q * q <= n:
        if n % q == 0:
            out.append(q)
            while n % q == 0:
                n //= q
        q += 1
    if n > 1:
        out.append(n)
    return out


def is_prime(n: int) -> bool:
    return n >= 2 and prime_factors(n) == [n]


def closure_mask(group: "FiniteGroup", gens) -> np.ndarray:
    """Boolean membership mask of the subgroup generated by ``gens``."""
    gens = np.unique(as_index(gens).ravel())
    mask = np.zeros(group.order, dtype=bool)
    mask[0] = True
    frontier = np.array([0], dtype=np.int64)
    if gens.size == 0:
        return mask
    while frontier.size:
        prod = group._mul(frontier[:, None], gens[None, :]).ravel()
        prod = np.unique(prod)
        prod = prod[~mask[prod]]
        mask[prod] = True
        frontier = prod
    return mask


class FiniteGroup:
    """Abstract finite group; subclasses provide ``_mul`` and ``_inv``."""

    def __init__(self, order: int, label: str):
        if order < 1:
            raise GroupError("group order must be positive")
        self.order = int(order)
        self.label = label

    identity = 0

    def __repr__(self) -> str:
        return f"<{type(self).__name__} {self.label} order={self.order}>"

    def __len__(self) -> int:
        return self.order

    # subclasses override
    def _mul(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _inv(self, a: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def mul(self, a, b):
        a, b = np.broadcast_arrays(as_index(a), as_index(b))
        return _scalar_or_array(np.asarray(self._mul(a, b)))

    def inv(self, a):
        return _scalar_or_array(np.asarray(self._inv(as_index(a))))

    def elements(self) -> np.ndarray:
        return np.arange(self.order, dtype=np.int64)

    def conj(self, x, g):
        """``g^-1 x g``."""
        g = as_index(g)
        return self.mul(self.mul(self._inv(g), x), g)

    def commutator(self, x, y):
        """``[x, y] = x^-1 y^-1 x y``."""
        x, y = np.broadcast_arrays(as_index(x), as_index(y))
        left = self._mul(self._inv(x), self._inv(y))
        return _scalar_or_array(np.asarray(self._mul(self._mul(left, x), y)))

    def power(self, g, m: int):
        g = as_index(g)
        if m < 0:
            g, m = as_index(self._inv(g)), -m
        result = np.zeros_like(g)
        base = g
        while m:
            if m & 1:
                result = self._mul(result, base)
            base = self._mul(base, base)
            m >>= 1
        return _scalar_or_array(np.asarray(result))

    def element_orders(self, elems=None) -> np.ndarray:
        """Orders of ``elems`` (default: all elements), vectorized."""
        elems = self.elements() if elems is None else as_index(elems).ravel()
        out = np.zeros(elems.shape, dtype=np.int64)
        divisors = [d for d in range(1, self.order + 1) if self.order % d == 0]
        for d in divisors:
            todo = out == 0
            if not todo.any():
                break
            hit = as_index(self.power(elems[todo], d)) == 0
            idx = np.flatnonzero(todo)[hit]
            out[idx] = d
        return out

    @functools.cached_property
    def table(self) -> np.ndarray:
        if self.order > TABLE_LIMIT:
            raise SizeGuardError(
                f"refusing to materialize a {self.order}x{self.order} table "
                f"(limit {TABLE_LIMIT})"
            )
        e = self.elements()
        return np.asarray(self._mul(e[:, None], e[None, :]), dtype=np.int64)

    @functools.cached_property
    def inverses(self) -> np.ndarray:
        return np.asarray(self._inv(self.elements()), dtype=np.int64)

    def generators(self) -> np.ndarray:
        """A small generating set, chosen greedily by lowest index."""
        return self._greedy_generators

    @functools.cached_property
    def _greedy_generators(self) -> np.ndarray:
        gens: list[int] = []
        mask = closure_mask(self, gens)
        while not mask.all():
            gens.append(int(np.argmin(mask)))
            mask = closure_mask(self, gens)
        return np.array(gens, dtype=np.int64)

    @functools.cached_property
    def is_abelian(self) -> bool:
        gens = self.generators()
        if gens.size < 2:
            return True
        a, b = gens[:, None], gens[None, :]
        return bool(np.array_equal(self._mul(a, b), self._mul(b, a)))

    def abelian_coordinates(self) -> tuple[tuple[int, ...], np.ndarray]:
        """Cyclic decomposition ``(moduli, coords)`` of an abelian group.

        ``coords[g]`` holds the exponents of ``g`` over a basis of cyclic
        factors with the given moduli, so characters are
        ``exp(2 pi i sum_j k_j coords[g, j] / moduli[j])``.
        """
        if not self.is_abelian:
            raise GroupError(f"{self.label} is not abelian")
        return self._abelian_coordinates

    @functools.cached_property
    def _abelian_coordinates(self) -> tuple[tuple[int, ...], np.ndarray]:
        from .abelian import cyclic_decomposition

        return cyclic_decomposition(self)


class TableGroup(FiniteGroup):
    """Group given by an explicit multiplication table (identity at 0)."""

    def __init__(self, table, label: str = "table", check: bool = True):
        table = np.array(table, dtype=np.int64)
        n = table.shape[0]
        if table.shape != (n, n):
            raise GroupError("multiplication table must be square")
        super().__init__(n, label)
        if check:
            check_table(table)
        self.__dict__["table"] = table
        inv = np.argmin(table, axis=1)  # column holding the identity 0
        self.__dict__["inverses"] = inv.astype(np.int64)

    def _mul(self, a, b):
        return self.table[a, b]

    def _inv(self, a):
        return self.inverses[a]


def check_table(table: np.ndarray) -> None:
    """Validate group axioms on a multiplication table; raises ``GroupError``.

    Associativity uses Light's test: ``x(gy) = (xg)y`` for all ``x, y`` and
    every ``g`` in a generating set, which is equivalent to checking all
    triples.
    """
    n = table.shape[0]
    e = np.arange(n)
    if not (np.array_equal(table[0], e) and np.array_equal(table[:, 0], e)):
        raise GroupError("index 0 is not a two-sided identity")
    if not (np.sort(table, axis=1) == e).all() or not (np.sort(table, axis=0) == e[:, None]).all():
        raise GroupError("table is not a Latin square")
    probe = TableGroup.__new__(TableGroup)
    FiniteGroup.__init__(probe, n, "probe")
    probe.__dict__["table"] = table
    for g in probe.generators():
        lhs = table[e[:, None], table[g][None, :]]  # x(gy)
        rhs = table[table[:, g][:, None], e[None, :]]  # (xg)y
        if not np.array_equal(lhs, rhs):
            x, y = np.argwhere(lhs != rhs)[0]
            raise GroupError(f"associativity fails at ({x}, {g}, {y})")


class CyclicGroup(FiniteGroup):
    def __init__(self, m: int):
        super().__init__(m, f"C_{m}")
        self.m = m

    def _mul(self, a, b):
        return (a + b) % self.m

    def _inv(self, a):
        return (-a) % self.m

    def generators(self):
        return np.array([1] if self.m > 1 else [], dtype=np.int64)

    @functools.cached_property
    def _abelian_coordinates(self):
        if self.m == 1:
            return (), np.zeros((1, 0), dtype=np.int64)
        return (self.m,), self.elements()[:, None]


class ElementaryAbelian(FiniteGroup):
    """``F_p^d`` under addition; index ``sum_i c_i p^i`` for coordinates ``c``."""

    def __init__(self, p: int, d: int, label: str | None = None):
        super().__init__(p**d, label or f"F_{p}^{d}")
        self.p, self.d = p, d
        self._weights = p ** np.arange(d, dtype=np.int64)

    def coords(self, a) -> np.ndarray:
        a = as_index(a)
        return (a[..., None] // self._weights) % self.p

    def index(self, coords) -> np.ndarray | int:
        c = as_index(coords) % self.p
        return _scalar_or_array(np.asarray(c @ self._weights))

    def _mul(self, a, b):
        return (((self.coords(a) + self.coords(b)) % self.p) * self._weights).sum(-1)

    def _inv(self, a):
        return (((-self.coords(a)) % self.p) * self._weights).sum(-1)

    def generators(self):
        return self._weights.copy()

    @property
    def is_abelian(self):
        return True

    @functools.cached_property
    def _abelian_coordinates(self):
        return (self.p,) * self.d, self.coords(self.elements())


class Extension(FiniteGroup):
    """Pairs ``(a, h)`` with ``(a1,h1)(a2,h2) = (a1 . act[h1](a2) . sigma[h1,h2], h1 h2)``.

    The index of ``(a, h)`` is ``a + |A| * h``. ``act`` has shape
    ``(|H|, |A|)`` (row ``h`` is the permutation of ``A`` by ``h``) and
    ``sigma`` has shape ``(|H|, |H|)`` with entries in ``A``.
    """

    def __init__(self, base: FiniteGroup, quotient: FiniteGroup, act: np.ndarray,
                 sigma: np.ndarray, label: str):
        super().__init__(base.order * quotient.order, label)
        self.base, self.quotient = base, quotient
        self.act = np.asarray(act, dtype=np.int64)
        self.sigma = np.asarray(sigma, dtype=np.int64)
        self._split = not self.sigma.any()

    def pair(self, g):
        return np.divmod(as_index(g), self.base.order)[::-1]

    def element(self, a, h):
        return _scalar_or_array(as_index(a) + self.base.order * as_index(h))

    def _mul(self, x, y):
        A, H = self.base, self.quotient
        h1, a1 = np.divmod(x, A.order)
        h2, a2 = np.divmod(y, A.order)
        a = A._mul(a1, self.act[h1, a2])
        if not self._split:
            a = A._mul(a, self.sigma[h1, h2])
        return a + A.order * H._mul(h1, h2)

    def _inv(self, x):
        A, H = self.base, self.quotient
        h, a = np.divmod(x, A.order)
        hi = H._inv(h)
        t = A._inv(a)
        if not self._split:
            t = A._mul(t, A._inv(self.sigma[h, hi]))
        return self.act[hi, t] + A.order * hi

    def generators(self):
        A, H = self.base, self.quotient
        return np.concatenate([A.generators(), A.order * H.generators()]).astype(np.int64)


class EmbeddedSubgroup(FiniteGroup):
    """A subgroup re-indexed by position in its sorted member list."""

    def __init__(self, parent: FiniteGroup, members: np.ndarray, label: str):
        super().__init__(len(members), label)
        self.parent = parent
        self.members = members

    def _pos(self, g):
        return np.searchsorted(self.members, g)

    def _mul(self, a, b):
        return self._pos(self.parent._mul(self.members[a], self.members[b]))

    def _inv(self, a):
        return self._pos(self.parent._inv(self.members[a]))


class QuotientGroup(FiniteGroup):
    """Cosets of a normal subgroup, indexed by sorted least representatives."""

    def __init__(self, parent: FiniteGroup, reps: np.ndarray, projection: np.ndarray,
                 label: str):
        super().__init__(len(reps), label)
        self.parent = parent
        self.reps = reps
        self.projection = projection

    def _mul(self, a, b):
        return self.projection[self.parent._mul(self.reps[a], self.reps[b])]

    def _inv(self, a):
        return self.projection[self.parent._inv(self.reps[a])]


def make_cyclic(m: int) -> CyclicGroup:
    if m < 1:
        raise GroupError(f"cyclic group order must be >= 1, got {m}")
    return CyclicGroup(int(m))
