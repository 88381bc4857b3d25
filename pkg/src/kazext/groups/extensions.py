"""Actions, 2-cocycles and group extensions.

Conventions: actions are left actions, ``act(h1 h2) = act(h1) o act(h2)``,
and an extension of ``A`` by ``H`` multiplies pairs as

    (a1, h1)(a2, h2) = (a1 . act(h1)(a2) . sigma(h1, h2), h1 h2),

which is associative exactly when ``sigma`` satisfies

    act(h1)(sigma(h2, h3)) . sigma(h1, h2 h3) = sigma(h1, h2) . sigma(h1 h2, h3).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import CocycleError, GroupError, SizeGuardError
from .core import ElementaryAbelian, Extension, FiniteGroup, as_index, is_prime, make_cyclic
from .subgroups import QuotientMap, SubgroupHandle


@dataclass(frozen=True, eq=False)
class ActionHom:
    acting: FiniteGroup
    target: FiniteGroup
    maps: np.ndarray  # shape (|H|, |A|); maps[h, a] = h . a

    def __call__(self, h, a):
        return self.maps[as_index(h), as_index(a)]

    def validate(self) -> None:
        """Raise ``GroupError`` unless ``maps`` is a homomorphism into Aut(A)."""
        H, A = self.acting, self.target
        if self.maps.shape != (H.order, A.order):
            raise GroupError(f"action table has shape {self.maps.shape}, expected {(H.order, A.order)}")
        e = A.elements()
        if not (np.sort(self.maps, axis=1) == e).all():
            raise GroupError("action maps are not permutations")
        if not np.array_equal(self.maps[0], e):
            raise GroupError("identity of H does not act trivially")
        gens = A.generators()
        # m(a b) = m(a) m(b) for all a and generators b is enough for a homomorphism
        prod = A.mul(e[:, None], gens[None, :])
        for h in range(H.order):
            m = self.maps[h]
            if not np.array_equal(m[prod], A.mul(m[:, None], m[gens][None, :])):
                raise GroupError(f"element {h} of H does not act by automorphisms")
        hg = H.generators()
        hh = H.mul(H.elements()[:, None], hg[None, :])
        for j, g in enumerate(hg):
            composed = self.maps[:, self.maps[g]]  # maps[h] o maps[g]
            if not np.array_equal(self.maps[hh[:, j]], composed):
                raise GroupError("action is not a homomorphism H -> Aut(A)")


def trivial_action(H: FiniteGroup, A: FiniteGroup) -> ActionHom:
    maps = np.broadcast_to(A.elements(), (H.order, A.order)).copy()
    return ActionHom(H, A, maps)


@dataclass(frozen=True, eq=False)
class Cocycle:
    values: np.ndarray  # shape (|H|, |H|), entries in A

    @classmethod
    def zero(cls, H: FiniteGroup) -> "Cocycle":
        return cls(np.zeros((H.order, H.order), dtype=np.int64))


@dataclass(frozen=True, eq=False)
class ExtensionData:
    base: FiniteGroup
    quotient: FiniteGroup
    action: ActionHom
    cocycle: Cocycle


@dataclass(frozen=True)
class CocycleCheck:
    ok: bool
    witness: tuple[int, int, int] | None = None
    reason: str = ""

    def __bool__(self) -> bool:
        return self.ok


def verify_cocycle(data: ExtensionData) -> CocycleCheck:
    """Exhaustively check normalization and the cocycle identity.

    On failure the witness is the lexicographically first bad triple
    ``(h1, h2, h3)``; normalization failures report ``(0, h, 0)`` or
    ``(h, 0, 0)``.
    """
    A, H = data.base, data.quotient
    s = as_index(data.cocycle.values)
    act = data.action.maps
    if s.shape != (H.order, H.order):
        return CocycleCheck(False, None, f"cocycle table has shape {s.shape}")
    if s[0].any():
        h = int(np.argmax(s[0] != 0))
        return CocycleCheck(False, (0, h, 0), "sigma(1, h) is not the identity")
    if s[:, 0].any():
        h = int(np.argmax(s[:, 0] != 0))
        return CocycleCheck(False, (h, 0, 0), "sigma(h, 1) is not the identity")
    Hm = H.table if H.order <= 4096 else None
    e = H.elements()
    for h1 in range(H.order):
        h2, h3 = e[:, None], e[None, :]
        h2h3 = Hm[h2, h3] if Hm is not None else H.mul(h2, h3)
        h1h2 = Hm[h1, h2] if Hm is not None else H.mul(h1, h2)
        lhs = A.mul(act[h1][s[h2, h3]], s[h1, h2h3])
        rhs = A.mul(s[h1, h2], s[h1h2, h3])
        bad = lhs != rhs
        if bad.any():
            i, j = np.argwhere(bad)[0]
            return CocycleCheck(False, (h1, int(i), int(j)), "cocycle identity fails")
    return CocycleCheck(True)


def cocycle_extension(data: ExtensionData, label: str | None = None,
                      check: bool = True) -> tuple[Extension, QuotientMap]:
    """Group on pairs ``(a, h)`` with the quotient map onto ``H``."""
    if check:
        data.action.validate()
        res = verify_cocycle(data)
        if not res:
            raise CocycleError(f"{res.reason} at {res.witness}", res.witness)
    A, H = data.base, data.quotient
    G = Extension(A, H, data.action.maps, data.cocycle.values,
                  label or f"{A.label} . {H.label}")
    projection = G.elements() // A.order
    section = A.order * H.elements()
    kernel = SubgroupHandle.from_mask(G, projection == 0)
    return G, QuotientMap(G, kernel, H, projection, section)


def semidirect_product(A: FiniteGroup, H: FiniteGroup, action: ActionHom,
                       label: str | None = None) -> Extension:
    action.validate()
    data = ExtensionData(A, H, action, Cocycle.zero(H))
    G, _ = cocycle_extension(data, label or f"{H.label} x| {A.label}", check=False)
    return G


def make_group_algebra(p: int, n: int = 1) -> tuple[ElementaryAbelian, ActionHom]:
    """Additive group of ``F_p[C_p]`` and the rotation action of ``C_{p^n}``.

    Element index is ``sum_x f(x) p^x``. The generator of ``C_{p^n}`` sends
    the basis vector at ``x`` to the one at ``x + 1 (mod p)``.
    """
    if not is_prime(p):
        raise GroupError(f"{p} is not prime")
    if p > 7:
        raise SizeGuardError(f"F_{p}[C_{p}] has {p}^{p} elements; p <= 7 required")
    if n < 1:
        raise GroupError("n must be >= 1")
    A = ElementaryAbelian(p, p, label=f"F_{p}[C_{p}]")
    H = make_cyclic(p**n)
    coords = A.coords(A.elements())  # (|A|, p)
    maps = np.empty((H.order, A.order), dtype=np.int64)
    x = np.arange(p)
    for h in range(H.order):
        # (h . f)(x) = f(x - h)
        maps[h] = A.index(coords[:, (x - h) % p])
    return A, ActionHom(H, A, maps)


def orbit_closure(A: FiniteGroup, H: FiniteGroup, action: ActionHom, B,
                  mode: str = "multiset") -> np.ndarray:
    """``{h . b}`` over ``b in B``, ``h in H``.

    ``multiset`` returns all ``|B| |H|`` images, grouped by ``b``;
    ``set`` returns the sorted union of orbits.
    """
    B = as_index(B).ravel()
    imgs = action.maps[:, B].T.ravel()
    if mode == "multiset":
        return imgs
    if mode == "set":
        return np.unique(imgs)
    raise ValueError(f"unknown mode {mode!r}")


def extract_cocycle(q: QuotientMap) -> ExtensionData:
    """Action and cocycle of ``q.source`` over ``q.target`` via ``q.section``.

    ``act(h)(a) = s(h) a s(h)^-1`` and ``sigma(h1, h2) = s(h1) s(h2) s(h1 h2)^-1``,
    with kernel elements indexed by position in ``q.kernel.members``.
    """
    G, H, N = q.source, q.target, q.kernel
    A = N.as_group(f"ker({G.label} -> {H.label})")
    if not A.is_abelian:
        raise GroupError("kernel is not abelian")
    s = q.section
    s_inv = G.inv(s)
    conj = G.mul(G.mul(s[:, None], N.members[None, :]), s_inv[:, None])
    maps = np.searchsorted(N.members, conj)
    hh = H.mul(H.elements()[:, None], H.elements()[None, :])
    sig = G.mul(G.mul(s[:, None], s[None, :]), s_inv[hh])
    if not N.mask[sig].all():
        raise GroupError("section products leave the kernel")
    values = np.searchsorted(N.members, sig)
    return ExtensionData(A, H, ActionHom(H, A, maps), Cocycle(values))


def extension_isomorphism(q: QuotientMap, data: ExtensionData, ext: Extension) -> np.ndarray:
    """Map ``(a, h) -> a . s(h)`` from ``ext`` onto ``q.source``; checked.

    Bijectivity is checked on all elements and the homomorphism property on
    all pairs ``(x, g)`` with ``g`` in a generating set, which suffices.
    """
    G, N = q.source, q.kernel
    h, a = np.divmod(ext.elements(), data.base.order)
    phi = G.mul(N.members[a], q.section[h])
    if not np.array_equal(np.sort(phi), G.elements()):
        raise GroupError("pair map is not a bijection")
    gens = ext.generators()
    e = ext.elements()
    lhs = phi[ext.mul(e[:, None], gens[None, :])]
    rhs = G.mul(phi[:, None], phi[gens][None, :])
    if not np.array_equal(lhs, rhs):
        raise GroupError("pair map is not a homomorphism")
    return phi
