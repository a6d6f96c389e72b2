"""Double sequences on finite truncations.

A :class:`DoubleSeq` is a rectangular grid of scalars indexed (k, l) in
[0..K) x [0..L), optionally tagged with the closed-form family that generated
it.  Grids are immutable after construction; every operation returns a new
sequence.  K, L >= 2 throughout (the forward-difference stencil needs one
forward neighbour in each direction).

Family tags are what let the detection protocols return decisive verdicts
about asymptotic behaviour: when present, ``grid[k, l]`` equals the family's
closed form at every index, and the analytic queries in :mod:`dseq.families`
apply.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from . import families as fam
from .scalars import QC, coerce, format_number, parse_number

FAMILY_TAGS = (
    "constant",
    "boos",
    "monomial",
    "geometric",
    "e",
    "e_k",
    "e^l",
    "e^kl",
    "table",
)


@dataclass(frozen=True)
class Truncation:
    """Evaluation window: grid bounds plus the index from which asymptotic
    behaviour is assessed."""

    K: int
    L: int
    diag_start: int = 1

    def __post_init__(self):
        if self.K < 2 or self.L < 2:
            raise ValueError("truncation bounds must be >= 2")
        if not 0 <= self.diag_start < min(self.K, self.L):
            raise ValueError("diag_start must satisfy 0 <= N0 < min(K, L)")


@dataclass(frozen=True)
class DoubleSeq:
    data: np.ndarray
    mode: str = "float"
    family: Optional[fam.Family] = None
    flags: tuple = field(default=())

    def __post_init__(self):
        if self.data.ndim != 2:
            raise ValueError("grid must be 2-dimensional")
        if self.K < 2 or self.L < 2:
            raise ValueError("truncation bounds must be >= 2")
        self.data.setflags(write=False)

    @property
    def K(self) -> int:
        return self.data.shape[0]

    @property
    def L(self) -> int:
        return self.data.shape[1]

    @property
    def shape(self):
        return self.data.shape

    def __getitem__(self, idx):
        return self.data[idx]

    def truncation(self, diag_start: int = 1) -> Truncation:
        return Truncation(self.K, self.L, diag_start)

    def to_complex(self) -> np.ndarray:
        if self.data.dtype == object:
            out = np.empty(self.shape, dtype=complex)
            for idx, v in np.ndenumerate(self.data):
                out[idx] = complex(v)
            return out
        return self.data

    def with_family(self, family) -> "DoubleSeq":
        return DoubleSeq(self.data, self.mode, family, self.flags)

    def with_flags(self, *extra: str) -> "DoubleSeq":
        return DoubleSeq(self.data, self.mode, self.family, self.flags + extra)


def _empty(K: int, L: int, mode: str) -> np.ndarray:
    if mode == "exact":
        return np.empty((K, L), dtype=object)
    return np.zeros((K, L), dtype=complex)


def from_array(data: np.ndarray, mode: str = "float", family=None, flags=()) -> DoubleSeq:
    arr = data if (mode == "exact") == (data.dtype == object) else None
    if arr is None:
        K, L = data.shape
        arr = _empty(K, L, mode)
        for idx, v in np.ndenumerate(data):
            arr[idx] = coerce(v, mode)
    return DoubleSeq(arr, mode, family, tuple(flags))


def from_rows(rows, mode: str = "float", family=None) -> DoubleSeq:
    K = len(rows)
    L = len(rows[0])
    arr = _empty(K, L, mode)
    for k, row in enumerate(rows):
        if len(row) != L:
            raise ValueError("ragged grid")
        for l, v in enumerate(row):
            arr[k, l] = coerce(v, mode)
    return DoubleSeq(arr, mode, family)


def zeros(K: int, L: int, mode: str = "float") -> DoubleSeq:
    arr = _empty(K, L, mode)
    if mode == "exact":
        for idx in np.ndindex(K, L):
            arr[idx] = QC()
    return DoubleSeq(arr, mode, fam.constant(0))


def _family_from_tag(tag: str, params: dict) -> Optional[fam.Family]:
    if tag == "constant":
        return fam.constant(params.get("c", 1))
    if tag == "e":
        return fam.constant(1)
    if tag == "boos":
        return fam.BOOS
    if tag == "monomial":
        return fam.monomial(int(params.get("a", 1)), int(params.get("b", 1)))
    if tag == "geometric":
        return fam.geometric(params.get("r", Fraction(1, 2)), params.get("s", Fraction(1, 2)))
    if tag == "e_k":
        return fam.RowLine(int(params.get("k", 0)))
    if tag == "e^l":
        return fam.ColLine(int(params.get("l", 0)))
    if tag == "e^kl":
        return fam.basis_point(int(params.get("k", 0)), int(params.get("l", 0)))
    if tag == "table":
        return None
    raise ValueError(f"unknown family tag {tag!r}")


def make_family(tag: str, K: int, L: int, mode: str = "float", **params) -> DoubleSeq:
    """Build a grid from a closed-form family tag.

    Tags: constant (c), boos, monomial (a, b; negative exponents give 0 on the
    affected boundary, flagged), geometric (r, s), e, e_k (k), e^l (l),
    e^kl (k, l), table (values=rows).
    """
    if K < 2 or L < 2:
        raise ValueError("truncation bounds must be >= 2")
    if tag == "table":
        return from_rows(params["values"], mode=mode)
    family = _family_from_tag(tag, params)
    seq = realize(family, K, L, mode)
    if tag == "monomial" and (int(params.get("a", 1)) < 0 or int(params.get("b", 1)) < 0):
        seq = seq.with_flags("negative-exponent monomial: boundary entries set to 0")
    return seq


def realize(family: fam.Family, K: int, L: int, mode: str = "float") -> DoubleSeq:
    """Evaluate a family's closed form on a K x L grid."""
    arr = _empty(K, L, mode)
    for k in range(K):
        for l in range(L):
            arr[k, l] = coerce(fam.family_value(family, k, l), mode)
    return DoubleSeq(arr, mode, family)


# -- pointwise algebra --------------------------------------------------------


def _check_compat(x: DoubleSeq, y: DoubleSeq):
    if x.shape != y.shape:
        raise ValueError(f"truncation mismatch: {x.shape} vs {y.shape}")
    if x.mode != y.mode:
        raise ValueError(f"mode mismatch: {x.mode} vs {y.mode}")


def add(x: DoubleSeq, y: DoubleSeq) -> DoubleSeq:
    _check_compat(x, y)
    family = None
    if x.family is not None and y.family is not None:
        family = fam.family_add_const_multiple(x.family, y.family)
    return DoubleSeq(x.data + y.data, x.mode, family)


def sub(x: DoubleSeq, y: DoubleSeq) -> DoubleSeq:
    _check_compat(x, y)
    family = None
    if x.family is not None and y.family is not None:
        family = fam.family_add_const_multiple(x.family, y.family, 1, -1)
    return DoubleSeq(x.data - y.data, x.mode, family)


def scale(x: DoubleSeq, c) -> DoubleSeq:
    cv = coerce(c, x.mode)
    return DoubleSeq(x.data * cv, x.mode, fam.family_scale(x.family, c))


def hadamard(x: DoubleSeq, y: DoubleSeq) -> DoubleSeq:
    _check_compat(x, y)
    family = fam.family_hadamard(x.family, y.family)
    return DoubleSeq(x.data * y.data, x.mode, family)


def pointwise(op: str, x: DoubleSeq, other) -> DoubleSeq:
    """Dispatch entry point: op in {add, sub, scale, hadamard}."""
    if op == "add":
        return add(x, other)
    if op == "sub":
        return sub(x, other)
    if op == "scale":
        return scale(x, other)
    if op == "hadamard":
        return hadamard(x, other)
    raise ValueError(f"unknown pointwise op {op!r}")


def scale_by_index(x: DoubleSeq, direction: str) -> DoubleSeq:
    """integral: entry (k,l) -> kl*x_kl;  d: entry -> x_kl/(kl) for k,l >= 1.

    Division by kl is undefined on the first row/column; those entries pass
    through unchanged and the result is flagged.
    """
    if direction not in ("integral", "d"):
        raise ValueError(f"unknown direction {direction!r}")
    arr = _empty(x.K, x.L, x.mode)
    flagged = False
    for k in range(x.K):
        for l in range(x.L):
            v = x.data[k, l]
            if k == 0 or l == 0:
                if direction == "integral":
                    arr[k, l] = coerce(0, x.mode)
                else:
                    arr[k, l] = v
                    flagged = True
            else:
                w = k * l if x.mode == "float" else Fraction(k * l)
                arr[k, l] = v * w if direction == "integral" else v * (
                    Fraction(1, k * l) if x.mode == "exact" else 1.0 / (k * l)
                )
    family = fam.family_scale_index(x.family, direction)
    flags = ("index-division boundary passthrough",) if flagged and direction == "d" else ()
    return DoubleSeq(arr, x.mode, family, flags)


def restrict(x: DoubleSeq, K: int, L: int) -> DoubleSeq:
    """Restrict to the leading K x L sub-grid."""
    if K > x.K or L > x.L:
        raise ValueError("restriction bounds exceed the truncation")
    return DoubleSeq(x.data[:K, :L].copy(), x.mode, x.family, x.flags)


# -- CSV interchange ----------------------------------------------------------


def save_csv(x: DoubleSeq, path) -> None:
    """Row k per line, column l per field, complex as a "re+imj" literal."""
    with open(path, "w", encoding="utf-8") as fh:
        for k in range(x.K):
            fh.write(",".join(format_number(x.data[k, l]) for l in range(x.L)))
            fh.write("\n")


def load_csv(path, mode: str = "float") -> DoubleSeq:
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            rows.append([parse_number(tok, mode) for tok in line.split(",")])
    if not rows:
        raise ValueError(f"empty grid file {path}")
    K, L = len(rows), len(rows[0])
    arr = _empty(K, L, mode)
    for k, row in enumerate(rows):
        if len(row) != L:
            raise ValueError("ragged CSV grid")
        for l, v in enumerate(row):
            arr[k, l] = v
    return DoubleSeq(arr, mode)
