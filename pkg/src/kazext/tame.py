"""Kazhdan-constant lower bounds for tame automorphism groups of free nilpotent groups."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

from .errors import GroupError

CASES = ("small_c", "c=2kl+1", "c=2kl+2", "c=2kl+3", "c=2kl+4", "otherwise")


@dataclass(frozen=True)
class TameBoundEntry:
    k: int
    c: int
    case_label: str
    bound: float

    @property
    def nielsen_size(self) -> int:
        return nielsen_size(self.k)


def _check(k: int, c: int) -> None:
    if int(k) != k or int(c) != c:
        raise GroupError("k and c must be integers")
    if k < 3:
        raise GroupError("k must be >= 3")
    if c < 1:
        raise GroupError("c must be >= 1")


def _base(k: int) -> float:
    return 84 * math.sqrt(k) + 1920


def nielsen_size(k: int) -> int:
    """Number of Nielsen moves on ``k`` free generators."""
    return 4 * k * (k - 1)


def tame_delta(k: int, c: int) -> float:
    """``2 sqrt(c) / sqrt((84 sqrt(k) + 1920) (4k)^c)``."""
    _check(k, c)
    return 2 * math.sqrt(c) / math.sqrt(_base(k) * float(4 * k) ** c)


def tame_case(k: int, c: int) -> str:
    _check(k, c)
    if c <= 2 * k:
        return "small_c"
    r = c % (2 * k)
    return f"c=2kl+{r}" if 1 <= r <= 4 else "otherwise"


def tame_kazhdan_bound(k: int, c: int) -> TameBoundEntry:
    case = tame_case(k, c)
    b = _base(k)
    if case == "small_c":
        bound = math.sqrt(c) / math.sqrt(b * float(4 * k) ** c)
    else:
        # (sqrt offset, extra power of k)
        shift, kpow = {"c=2kl+1": (0, 4), "c=2kl+2": (1, 3), "c=2kl+3": (2, 2),
                       "c=2kl+4": (3, 1), "otherwise": (4, 0)}[case]
        bound = math.sqrt(c - shift) / math.sqrt(b * 4.0 ** (c + 3) * float(k) ** (c + kpow))
    return TameBoundEntry(k, c, case, bound)


def tame_table(ks, cs) -> list[TameBoundEntry]:
    return [tame_kazhdan_bound(k, c) for k in ks for c in cs]


def tame_csv(entries) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["k", "c", "case", "bound", "nielsen_size"])
    for e in entries:
        w.writerow([e.k, e.c, e.case_label, f"{e.bound:.15g}", e.nielsen_size])
    return buf.getvalue()
