"""The four-dimensional forward-difference operator and its inverse.

The forward difference maps x to

    y[m,n] = x[m,n] - x[m+1,n] - x[m,n+1] + x[m+1,n+1],

shrinking the truncation by one in each direction (the stencil needs forward
neighbours; padding would fabricate data).  Its inverse reconstructs x from y
by rectangular partial sums plus arbitrary first-row/first-column boundary
data; with the zero boundary the reconstruction lands in the projected space
where the operator acts as a norm-preserving bijection.

Membership in the difference-domain spaces (bounded or ϑ-convergent after
applying the stencil) and the domain norm

    ||x|| = sup |x[k,0] + x[0,l] - x[0,0]| + sup |Δx|

live here too, together with the continuous-functional pairing
f(x) = sum a[k,l] (Δx)[k,l] and its bound sup|Δx| * ||a||_1.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import families as fam
from . import gridops
from . import verdicts as vd
from .convergence import space_membership
from .scalars import abs2, abs_value, coerce, to_float_scalar
from .sequences import DoubleSeq
from .verdicts import DetectParams, Verdict

DELTA_SPACES = {
    "M_u": "M_u",
    "C_p": "C_p",
    "C_p0": "C_p0",
    "C_bp": "C_bp",
    "C_bp0": "C_bp0",
    "C_r": "C_r",
    "C_r0": "C_r0",
}


def forward_difference(x: DoubleSeq) -> DoubleSeq:
    """Apply the stencil; output truncation is (K-1, L-1)."""
    if x.K < 2 or x.L < 2:
        raise ValueError("truncation too small for the forward difference")
    data = gridops.diff_11(x.data)
    family = fam.family_delta(x.family)
    return DoubleSeq(data, x.mode, family)


@dataclass(frozen=True)
class BoundaryData:
    """First-row/first-column values consumed by the inverse difference."""

    row0: tuple   # x[k, 0] for k < K
    col0: tuple   # x[0, l] for l < L

    def __post_init__(self):
        if not self.row0 or not self.col0:
            raise ValueError("boundary data must be nonempty")
        if self.row0[0] != self.col0[0]:
            raise ValueError("boundary corner mismatch: row0[0] != col0[0]")

    @property
    def corner(self):
        return self.row0[0]

    @classmethod
    def zero(cls, K: int, L: int, mode: str = "float") -> "BoundaryData":
        z = coerce(0, mode)
        return cls((z,) * K, (z,) * L)

    @classmethod
    def of(cls, x: DoubleSeq) -> "BoundaryData":
        return cls(tuple(x.data[:, 0]), tuple(x.data[0, :]))


def inverse_difference(y: DoubleSeq, boundary: Optional[BoundaryData] = None) -> DoubleSeq:
    """Reconstruct x with Δx = y; output truncation (K+1, L+1).

    x[k,l] = sum_{i<k, j<l} y[i,j] - x[0,0] + x[k,0] + x[0,l] on the interior,
    boundary row/column copied from the supplied data (zero by default).
    """
    K, L = y.K + 1, y.L + 1
    if boundary is None:
        boundary = BoundaryData.zero(K, L, y.mode)
    if len(boundary.row0) != K or len(boundary.col0) != L:
        raise ValueError(
            f"boundary dimensions {len(boundary.row0)}x{len(boundary.col0)} "
            f"do not match output truncation {K}x{L}"
        )
    prefix = gridops.prefix_sums(y.data)
    if y.mode == "exact":
        out = np.empty((K, L), dtype=object)
    else:
        out = np.zeros((K, L), dtype=complex)
    corner = coerce(boundary.corner, y.mode)
    for l in range(L):
        out[0, l] = coerce(boundary.col0[l], y.mode)
    for k in range(K):
        out[k, 0] = coerce(boundary.row0[k], y.mode)
    for k in range(1, K):
        for l in range(1, L):
            out[k, l] = prefix[k - 1, l - 1] - corner + out[k, 0] + out[0, l]
    return DoubleSeq(out, y.mode)


def telescoping_identity(x: DoubleSeq, k: int, l: int):
    """Both sides of the telescoping identity at (k, l), for assertion.

    lhs = sum of (Δx)[i,j] over i <= k, j <= l;
    rhs = x[k+1,l+1] + x[0,0] - x[k+1,0] - x[0,l+1].
    """
    if k + 1 >= x.K or l + 1 >= x.L:
        raise IndexError(f"(k+1, l+1) = ({k + 1}, {l + 1}) outside truncation {x.shape}")
    dx = gridops.diff_11(x.data)
    lhs = gridops.prefix_sums(dx[: k + 1, : l + 1])[k, l]
    rhs = x.data[k + 1, l + 1] + x.data[0, 0] - x.data[k + 1, 0] - x.data[0, l + 1]
    return lhs, rhs


def project_interior(x: DoubleSeq) -> DoubleSeq:
    """Zero the first row and first column (the operator P)."""
    out = x.data.copy()
    z = coerce(0, x.mode)
    out[0, :] = [z] * x.L
    out[:, 0] = [z] * x.K
    return DoubleSeq(out, x.mode, fam.family_project(x.family))


def delta_space_membership(
    x: DoubleSeq, space: str, params: DetectParams = DetectParams()
) -> Verdict:
    """Membership in the difference domain: space_membership of Δx.

    space names the base space; e.g. "M_u" answers x in M_u(Δ).
    """
    if space not in DELTA_SPACES:
        raise ValueError(f"unknown delta-domain space {space!r}")
    y = forward_difference(x)
    return space_membership(y, DELTA_SPACES[space], params).named(f"x in {space}(Δ)")


def delta_norm(x: DoubleSeq):
    """sup_{k,l} |x[k,0] + x[0,l] - x[0,0]| + sup |Δx|.

    The first supremum reads the free indices of the boundary term over the
    whole truncation; see the package notes on this convention.
    """
    if x.K < 2 or x.L < 2:
        raise ValueError("truncation too small")
    corner = x.data[0, 0]
    best = None
    for k in range(x.K):
        for l in range(x.L):
            v = x.data[k, 0] + x.data[0, l] - corner
            a = abs2(v)
            if best is None or a > best[0]:
                best = (a, v)
    boundary_sup = abs_value(best[1])
    dx = gridops.diff_11(x.data)
    return boundary_sup + gridops.max_abs_value(dx)


@dataclass(frozen=True)
class PairingCoefficients:
    """Coefficient sequence for the functional pairing, supported on k,l >= 1."""

    seq: DoubleSeq
    l1_norm: object
    divergent_tail: bool

    @classmethod
    def from_seq(cls, a: DoubleSeq) -> "PairingCoefficients":
        interior = a.data[1:, 1:]
        l1 = gridops.sum_abs(interior)
        divergent = False
        if a.family is not None:
            facts = fam.family_abs_series(a.family, include_zero=False)
            divergent = facts is not None and facts[0] == "diverges"
        return cls(a, l1, divergent)


def functional_apply(a: PairingCoefficients, x: DoubleSeq):
    """Evaluate f(x) = sum_{k,l>=1} a[k,l] (Δx)[k,l] and its norm bound.

    x must have zero first row and column (apply project_interior first).
    Returns (value, bound) with bound = sup|Δx| * ||a||_1; the inequality
    |value| <= bound is asserted (exactly in exact mode).
    """
    z = coerce(0, x.mode)
    if any(x.data[0, l] != z for l in range(x.L)) or any(
        x.data[k, 0] != z for k in range(x.K)
    ):
        raise ValueError("x must be boundary-projected (zero first row and column)")
    dx = gridops.diff_11(x.data)
    K = min(a.seq.K, dx.shape[0])
    L = min(a.seq.L, dx.shape[1])
    value = coerce(0, x.mode)
    for k in range(1, K):
        row = coerce(0, x.mode)
        for l in range(1, L):
            row = row + a.seq.data[k, l] * dx[k, l]
        value = value + row
    sup_dx = gridops.max_abs_value(dx)
    bound = sup_dx * a.l1_norm
    if isinstance(bound, float) or x.mode == "float":
        assert float(abs_value(value)) <= float(bound) * (1 + 1e-12) + 1e-300
    else:
        assert abs2(value) <= bound * bound
    return value, bound
