"""Cyclic decomposition of finite abelian groups given only by multiplication."""

from __future__ import annotations

import numpy as np

from ..errors import GroupError
from .core import FiniteGroup, prime_factors


def _primary_basis(G: FiniteGroup, members: np.ndarray, q: int):
    """Greedy basis of the Sylow ``q``-subgroup with the given members.

    Each step picks the element of largest order modulo the span so far and
    corrects it so that its cyclic group meets the span trivially.
    """
    span = np.zeros(G.order, dtype=bool)
    span[0] = True
    span_elems = np.array([0], dtype=np.int64)
    span_coords = np.zeros((1, 0), dtype=np.int64)
    basis: list[int] = []
    moduli: list[int] = []
    while span_elems.size < members.size:
        # order of each member modulo the span
        rel = np.ones(members.size, dtype=np.int64)
        cur = members.copy()
        while True:
            out = ~span[cur]
            if not out.any():
                break
            rel[out] *= q
            cur[out] = G.power(cur[out], q)
        i = int(np.argmax(rel))
        x, m = int(members[i]), int(rel[i])
        y = G.power(x, m)
        t = span_coords[np.searchsorted(span_elems, y)]
        if np.any(t % m):
            raise GroupError("cyclic decomposition failed: lifted element not splittable")
        for g, tj in zip(basis, t):
            x = G.mul(x, G.power(g, -(int(tj) // m)))
        basis.append(x)
        moduli.append(m)
        powers = np.zeros(m, dtype=np.int64)
        for k in range(1, m):
            powers[k] = G.mul(powers[k - 1], x)
        new_elems = G.mul(span_elems[:, None], powers[None, :]).ravel()
        new_coords = np.concatenate(
            [np.repeat(span_coords, m, axis=0), np.tile(np.arange(m), span_elems.size)[:, None]],
            axis=1,
        )
        order = np.argsort(new_elems)
        span_elems, span_coords = new_elems[order], new_coords[order]
        span[span_elems] = True
    return basis, moduli


def cyclic_decomposition(G: FiniteGroup) -> tuple[tuple[int, ...], np.ndarray]:
    """Return ``(moduli, coords)`` for an abelian group ``G``.

    The basis is a union of primary bases, so moduli are prime powers.
    ``coords[g, j]`` is the exponent of the ``j``-th basis element in ``g``.
    """
    if G.order == 1:
        return (), np.zeros((1, 0), dtype=np.int64)
    orders = G.element_orders()
    basis: list[int] = []
    moduli: list[int] = []
    for q in prime_factors(G.order):
        o = orders.copy()
        while True:
            reducible = (o % q == 0)
            if not reducible.any():
                break
            o[reducible] //= q
        members = np.flatnonzero(o == 1)
        b, m = _primary_basis(G, members, q)
        basis += b
        moduli += m
    elems = np.array([0], dtype=np.int64)
    coords = np.zeros((1, 0), dtype=np.int64)
    for x, m in zip(basis, moduli):
        powers = np.zeros(m, dtype=np.int64)
        for k in range(1, m):
            powers[k] = G.mul(powers[k - 1], x)
        elems = G.mul(elems[:, None], powers[None, :]).ravel()
        coords = np.concatenate(
            [np.repeat(coords, m, axis=0), np.tile(np.arange(m), len(coords))[:, None]], axis=1
        )
    if not np.array_equal(np.sort(elems), G.elements()):
        raise GroupError("cyclic decomposition is not a bijection")
    out = np.empty_like(coords)
    out[elems] = coords
    return tuple(moduli), out
