"""Subgroups, normal closures, central series and quotients."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import GroupError, NotNormalError
from .core import (
    EmbeddedSubgroup,
    FiniteGroup,
    QuotientGroup,
    as_index,
    closure_mask,
)


@dataclass(frozen=True, eq=False)
class SubgroupHandle:
    parent: FiniteGroup
    members: np.ndarray  # sorted element indices

    @classmethod
    def from_mask(cls, parent: FiniteGroup, mask: np.ndarray) -> "SubgroupHandle":
        members = np.flatnonzero(mask).astype(np.int64)
        members.setflags(write=False)
        return cls(parent, members)

    @property
    def order(self) -> int:
        return int(self.members.size)

    def __len__(self) -> int:
        return self.order

    def __contains__(self, g) -> bool:
        i = np.searchsorted(self.members, int(g))
        return bool(i < self.members.size and self.members[i] == int(g))

    def contains(self, elems) -> np.ndarray:
        return self.mask[as_index(elems)]

    @property
    def mask(self) -> np.ndarray:
        m = np.zeros(self.parent.order, dtype=bool)
        m[self.members] = True
        return m

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, SubgroupHandle)
            and other.parent is self.parent
            and np.array_equal(other.members, self.members)
        )

    def __hash__(self):
        return hash((id(self.parent), self.members.tobytes()))

    def is_trivial(self) -> bool:
        return self.order == 1

    def generators(self) -> np.ndarray:
        """Greedy generating set (lowest missing member first)."""
        gens: list[int] = []
        mask = closure_mask(self.parent, gens)
        while mask.sum() < self.order:
            missing = self.members[~mask[self.members]]
            gens.append(int(missing[0]))
            mask = closure_mask(self.parent, gens)
        return np.array(gens, dtype=np.int64)

    def as_group(self, label: str | None = None) -> EmbeddedSubgroup:
        """The subgroup as a group; element ``i`` is ``members[i]``."""
        return EmbeddedSubgroup(self.parent, self.members, label or f"<{self.order}> in {self.parent.label}")

    def normality_witness(self) -> tuple[int, int] | None:
        """``(g, n)`` with ``g^-1 n g`` outside, or ``None`` if normal."""
        G = self.parent
        gens = self.generators()
        if gens.size == 0:
            return None
        mask = self.mask
        for g in G.generators():
            conj = G.mul(G.mul(G.inv(g), gens), g)
            bad = ~mask[conj]
            if bad.any():
                return int(g), int(gens[np.argmax(bad)])
        return None

    def is_normal(self) -> bool:
        return self.normality_witness() is None

    def is_central(self) -> bool:
        G = self.parent
        gens = G.generators()
        a, b = self.members[:, None], gens[None, :]
        return bool(np.array_equal(G.mul(a, b), G.mul(b, a)))


def subgroup_generated(G: FiniteGroup, gens) -> SubgroupHandle:
    return SubgroupHandle.from_mask(G, closure_mask(G, gens))


def trivial_subgroup(G: FiniteGroup) -> SubgroupHandle:
    return subgroup_generated(G, [])


def whole_group(G: FiniteGroup) -> SubgroupHandle:
    return SubgroupHandle.from_mask(G, np.ones(G.order, dtype=bool))


def element_order(G: FiniteGroup, g: int) -> int:
    m, x = 1, int(g)
    while x != 0:
        x = G.mul(x, g)
        m += 1
    return m


def normal_closure(G: FiniteGroup, elems) -> SubgroupHandle:
    """Smallest normal subgroup of ``G`` containing ``elems``."""
    mask = closure_mask(G, elems)
    ggens = G.generators()
    while True:
        members = np.flatnonzero(mask)
        conj = G.mul(G.mul(G.inv(ggens)[None, :], members[:, None]), ggens[None, :]).ravel()
        new = np.unique(conj[~mask[conj]])
        if new.size == 0:
            return SubgroupHandle.from_mask(G, mask)
        gens = np.concatenate([SubgroupHandle.from_mask(G, mask).generators(), new])
        mask = closure_mask(G, gens)


def commutator_of(G: FiniteGroup, N: SubgroupHandle, M: SubgroupHandle | None = None) -> SubgroupHandle:
    """``[N, M]`` for normal ``N`` (``M`` defaults to ``G``).

    Generated as the normal closure of ``[n, m]`` over all members ``n`` of
    ``N`` and generators ``m`` of ``M``.
    """
    mgens = G.generators() if M is None else M.generators()
    if mgens.size == 0 or N.order == 1:
        return trivial_subgroup(G)
    comms = G.commutator(N.members[:, None], mgens[None, :]).ravel()
    return normal_closure(G, np.unique(comms))


def commutator_subgroup(G: FiniteGroup) -> SubgroupHandle:
    gens = G.generators()
    if gens.size < 2:
        return trivial_subgroup(G)
    comms = G.commutator(gens[:, None], gens[None, :]).ravel()
    return normal_closure(G, np.unique(comms))


def center(G: FiniteGroup) -> SubgroupHandle:
    e = G.elements()
    mask = np.ones(G.order, dtype=bool)
    for s in G.generators():
        mask &= G.mul(e, s) == G.mul(s, e)
    return SubgroupHandle.from_mask(G, mask)


def p_power_subgroup(G: FiniteGroup, N: SubgroupHandle, p: int) -> SubgroupHandle:
    """Subgroup generated by ``x^p`` for all ``x`` in ``N``."""
    return subgroup_generated(G, np.unique(G.power(N.members, p)))


@dataclass(frozen=True)
class SeriesCheck:
    index: int
    exponent_p: bool
    central: bool

    @property
    def ok(self) -> bool:
        return self.exponent_p and self.central


def check_p_series(G: FiniteGroup, series: list[SubgroupHandle], p: int) -> list[SeriesCheck]:
    """Each factor ``phi_i / phi_{i+1}`` has exponent ``p`` and is central."""
    out = []
    ggens = G.generators()
    for i in range(len(series) - 1):
        upper, lower = series[i], series[i + 1]
        low = lower.mask
        exp_ok = bool(low[G.power(upper.members, p)].all())
        comms = G.commutator(upper.members[:, None], ggens[None, :])
        central = bool(low[comms].all()) if ggens.size else True
        out.append(SeriesCheck(i + 1, exp_ok, central))
    return out


def lower_p_series(G: FiniteGroup, p: int, check: bool = True) -> list[SubgroupHandle]:
    """``phi_1 = G``, ``phi_{i+1} = phi_i^p [phi_i, G]`` until stabilization.

    With ``check`` and ``G`` a ``p``-group, every factor is verified to be
    elementary abelian and central; a failure raises ``GroupError``.
    """
    series = [whole_group(G)]
    while True:
        cur = series[-1]
        powers = G.power(cur.members, p)
        comm = commutator_of(G, cur)
        nxt = normal_closure(G, np.unique(np.concatenate([np.atleast_1d(powers), comm.generators()])))
        if nxt == cur:
            break
        series.append(nxt)
        if nxt.is_trivial():
            break
    if check and _is_p_power(G.order, p):
        for c in check_p_series(G, series, p):
            if not c.ok:
                raise GroupError(f"lower {p}-series factor {c.index} is not elementary abelian central")
    return series


def _is_p_power(n: int, p: int) -> bool:
    while n % p == 0:
        n //= p
    return n == 1


@dataclass(frozen=True, eq=False)
class QuotientMap:
    """Surjection ``source -> target`` with kernel and a fixed section."""

    source: FiniteGroup
    kernel: SubgroupHandle
    target: FiniteGroup
    projection: np.ndarray  # source index -> target index
    section: np.ndarray  # target index -> source index
    extra: dict = field(default_factory=dict)

    def project(self, g):
        return self.projection[as_index(g)]

    def lift(self, h):
        return self.section[as_index(h)]

    def fiber(self, h: int) -> np.ndarray:
        return np.flatnonzero(self.projection == h)


def quotient_map_from_projection(source: FiniteGroup, target: FiniteGroup, projection) -> QuotientMap:
    """Build a ``QuotientMap`` from an element map, checking it is a surjective hom.

    The section picks the least source index in each fiber.
    """
    projection = as_index(projection)
    if not np.array_equal(np.unique(projection), target.elements()):
        raise GroupError("projection is not surjective")
    gens = source.generators()
    e = source.elements()
    lhs = projection[source.mul(e[:, None], gens[None, :])]
    rhs = target.mul(projection[:, None], projection[gens][None, :])
    if not np.array_equal(lhs, rhs):
        raise GroupError("projection is not a homomorphism")
    section = np.full(target.order, source.order, dtype=np.int64)
    np.minimum.at(section, projection, e)
    kernel = SubgroupHandle.from_mask(source, projection == 0)
    return QuotientMap(source, kernel, target, projection, section)


def quotient_by_normal(G: FiniteGroup, N: SubgroupHandle, label: str | None = None) -> QuotientMap:
    """``G -> G/N`` on cosets; the section is the least index of each coset."""
    witness = N.normality_witness()
    if witness is not None:
        raise NotNormalError(
            f"subgroup of order {N.order} is not normal: conjugating {witness[1]} by {witness[0]} leaves it",
            witness,
        )
    e = G.elements()
    least = np.full(G.order, G.order, dtype=np.int64)
    chunk = max(1, 2_000_000 // max(N.order, 1))
    for start in range(0, G.order, chunk):
        block = e[start:start + chunk]
        least[start:start + chunk] = G.mul(block[:, None], N.members[None, :]).min(axis=1)
    reps = np.unique(least)
    projection = np.searchsorted(reps, least)
    reps.setflags(write=False)
    projection.setflags(write=False)
    target = QuotientGroup(G, reps, projection, label or f"{G.label}/<{N.order}>")
    return QuotientMap(G, N, target, projection, reps)
