"""Plain-text multiplication tables.

Format: a header line ``order N`` followed by ``N`` lines of ``N``
space-separated indices; row ``g``, column ``h`` holds ``g*h``. Index 0 must
be the identity.
"""

from __future__ import annotations

import io
from pathlib import Path

import numpy as np

from ..errors import GroupError
from .core import FiniteGroup, TableGroup


def dumps_table(G: FiniteGroup) -> str:
    t = G.table
    buf = io.StringIO()
    buf.write(f"order {G.order}\n")
    for row in t:
        buf.write(" ".join(map(str, row.tolist())))
        buf.write("\n")
    return buf.getvalue()


def loads_table(text: str, label: str = "table") -> TableGroup:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise GroupError("empty table file")
    head = lines[0].split()
    if len(head) != 2 or head[0] != "order" or not head[1].isdigit():
        raise GroupError(f"bad header line: {lines[0]!r}")
    n = int(head[1])
    if len(lines) - 1 != n:
        raise GroupError(f"expected {n} rows, found {len(lines) - 1}")
    try:
        rows = [list(map(int, ln.split())) for ln in lines[1:]]
    except ValueError as exc:
        raise GroupError(f"non-integer entry: {exc}") from None
    if any(len(r) != n for r in rows):
        raise GroupError("ragged table row")
    table = np.array(rows, dtype=np.int64)
    if table.min() < 0 or table.max() >= n:
        raise GroupError("table entry out of range")
    return TableGroup(table, label=label)


def write_table(G: FiniteGroup, path: str | Path) -> None:
    Path(path).write_text(dumps_table(G))


def read_table(path: str | Path) -> TableGroup:
    path = Path(path)
    return loads_table(path.read_text(), label=path.stem)
