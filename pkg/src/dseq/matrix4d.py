"""Four-dimensional matrices, their transformations, and class characterization.

A Matrix4D maps double sequences to double sequences via

    y[m,n] = ϑ-limit of the rectangular partial sums of sum a[m,n,k,l] x[k,l].

Representations: a translation-invariant stencil (finite offsets with
coefficients), an explicit block (zero outside its bounds), or a closed form
(callable of m, n, k, l with optional per-row family metadata for the
analytic layer).  Stencil and block rows are finitely supported, so their
transforms are exact finite sums; closed-form rows get truncated series with
per-entry verdicts.

The class-characterization registry evaluates the standard boundedness /
limit / uniform-smallness conditions on a matrix and conjoins the condition
set registered for each (source, target) pair of spaces; pairs whose
characterization is unknown raise :class:`UnsupportedClassError`.  The two
reduction theorems -- tail-summing a matrix to move a difference-domain
source to its base space, and row-differencing to move a difference-domain
target -- are realized by :func:`build_b` / :func:`build_f` plus the
identity harness asserting that both transformation routes agree exactly.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

import numpy as np

from . import families as fam
from . import gridops
from . import verdicts as vd
from .convergence import (
    _bounded_verdict,
    _limit_verdict,
    _rows_cols_verdict,
    series_abs_verdict,
    space_membership,
)
from .diffops import BoundaryData, forward_difference, inverse_difference
from .duals import delta_domain_battery, dual_membership
from .scalars import abs_value, coerce, to_float_scalar
from .sequences import DoubleSeq, make_family, from_rows
from .verdicts import DetectParams, LimitEstimate, Verdict

CONDITION_IDS = (
    "C3.0",
    "C3.01",
    "C3.99",
    "C3.9",
    "C3.10",
    "C3.7",
    "C3.8",
    "C3.15",
    "C3.151",
    "C3.152",
    "C3.153",
)

BASE_SPACES = ("M_u", "C_bp", "C_r")

# (source, target) -> class number in the condition registry; None marks the
# pairs whose characterization is unknown.
CLASS_TABLE = {
    ("M_u", "M_u"): 1,
    ("M_u", "C_bp"): 2,
    ("M_u", "C_r"): None,
    ("C_bp", "M_u"): 3,
    ("C_bp", "C_bp"): 4,
    ("C_bp", "C_r"): 4,
    ("C_r", "M_u"): None,
    ("C_r", "C_bp"): 5,
    ("C_r", "C_r"): 5,
}

CLASS_CONDITIONS = {
    1: ("C3.0",),
    2: ("C3.0", "C3.01", "C3.15", "C3.151", "C3.152", "C3.153"),
    3: ("C3.0",),
    4: ("C3.0", "C3.01", "C3.99", "C3.9", "C3.10"),
    5: ("C3.0", "C3.01", "C3.99", "C3.7", "C3.8"),
}

DELTA_STENCIL = {(0, 0): 1, (1, 0): -1, (0, 1): -1, (1, 1): 1}


class UnsupportedClassError(Exception):
    """Raised for (source, target) pairs with no known characterization."""


@dataclass(frozen=True)
class Matrix4D:
    kind: str                      # stencil | block | closed
    bounds: tuple                  # (M, N, K, L) evaluation bounds
    mode: str = "float"
    stencil: Optional[dict] = None
    block: Optional[np.ndarray] = None
    closed: Optional[Callable] = None
    row_family: Optional[Callable] = None
    triangular: bool = False
    name: str = ""
    entry_flags: Optional[np.ndarray] = None   # per-entry truncation flags

    @property
    def M(self):
        return self.bounds[0]

    @property
    def N(self):
        return self.bounds[1]

    @property
    def K(self):
        return self.bounds[2]

    @property
    def L(self):
        return self.bounds[3]

    def entry(self, m: int, n: int, k: int, l: int):
        if self.kind == "stencil":
            return self.stencil.get((k - m, l - n), 0)
        if self.kind == "block":
            M, N, K, L = self.block.shape
            if 0 <= m < M and 0 <= n < N and 0 <= k < K and 0 <= l < L:
                return self.block[m, n, k, l]
            return 0
        return self.closed(m, n, k, l)

    def row_seq(self, m: int, n: int, K: Optional[int] = None, L: Optional[int] = None) -> DoubleSeq:
        """The coefficient row A_mn as a double sequence over (k, l)."""
        K = self.K if K is None else K
        L = self.L if L is None else L
        if self.kind == "stencil":
            pts = tuple(
                sorted(((m + dk, n + dl), c) for (dk, dl), c in self.stencil.items() if c != 0)
            )
            family = fam.FiniteSupport(tuple(p for p in pts if p[0][0] < K and p[0][1] < L))
        elif self.kind == "block":
            support = [
                ((k, l), self.block[m, n, k, l])
                for k in range(min(K, self.block.shape[2]))
                for l in range(min(L, self.block.shape[3]))
                if m < self.block.shape[0] and n < self.block.shape[1]
                and self.block[m, n, k, l] != 0
            ]
            family = fam.FiniteSupport(tuple(support))
        else:
            family = self.row_family(m, n) if self.row_family is not None else None
        rows = [[self.entry(m, n, k, l) for l in range(L)] for k in range(K)]
        seq = from_rows(rows, mode=self.mode)
        return seq.with_family(family) if family is not None else seq

    def finite_rows(self) -> bool:
        return self.kind in ("stencil", "block")

    def row_support_bounds(self, m: int, n: int):
        """Bounds that cover the full support of row (m, n) for finite rows."""
        if self.kind == "stencil":
            maxdk = max((dk for dk, _ in self.stencil), default=0)
            maxdl = max((dl for _, dl in self.stencil), default=0)
            return max(self.K, m + maxdk + 1), max(self.L, n + maxdl + 1)
        if self.kind == "block":
            return max(self.K, self.block.shape[2]), max(self.L, self.block.shape[3])
        return self.K, self.L

    def full_row(self, m: int, n: int) -> DoubleSeq:
        Ks, Ls = self.row_support_bounds(m, n)
        return self.row_seq(m, n, Ks, Ls)


def stencil_matrix(offsets: dict, bounds, mode: str = "float", name: str = "") -> Matrix4D:
    offsets = {od: c for od, c in offsets.items() if c != 0}
    triangular = all(dk <= 0 and dl <= 0 for dk, dl in offsets)
    return Matrix4D(
        "stencil", tuple(bounds), mode, stencil=offsets, triangular=triangular, name=name
    )


def identity_matrix(bounds, mode: str = "float") -> Matrix4D:
    return stencil_matrix({(0, 0): 1}, bounds, mode, name="identity")


def delta_matrix(bounds, mode: str = "float") -> Matrix4D:
    return stencil_matrix(dict(DELTA_STENCIL), bounds, mode, name="forward-difference")


def zero_matrix(bounds, mode: str = "float") -> Matrix4D:
    return stencil_matrix({}, bounds, mode, name="zero")


def block_matrix(arr: np.ndarray, mode: str = "float", name: str = "") -> Matrix4D:
    if arr.ndim != 4:
        raise ValueError("block matrices are 4-dimensional")
    triangular = True
    M, N, K, L = arr.shape
    for m in range(M):
        for n in range(N):
            for k in range(K):
                for l in range(L):
                    if (k > m or l > n) and arr[m, n, k, l] != 0:
                        triangular = False
                        break
    return Matrix4D("block", arr.shape, mode, block=arr, triangular=triangular, name=name)


def ones_row_matrix(m0: int, n0: int, bounds, mode: str = "float") -> Matrix4D:
    """All-ones coefficient row at (m0, n0); zero elsewhere.  The canonical
    divergent-row example."""

    def closed(m, n, k, l):
        return 1 if (m, n) == (m0, n0) else 0

    def row_family(m, n):
        return fam.constant(1 if (m, n) == (m0, n0) else 0)

    return Matrix4D(
        "closed", tuple(bounds), mode, closed=closed, row_family=row_family,
        name=f"ones-row({m0},{n0})",
    )


# -- transformation -------------------------------------------------------------


def apply_matrix(
    A: Matrix4D, x: DoubleSeq, theta: str = "bp", params: DetectParams = DetectParams()
):
    """Transform x; returns (y, verdict grid).

    Stencil and block rows are exact finite sums (verdict Holds).  Closed
    rows are truncated series judged by the ϑ-protocol on their partial
    sums.  The identity and forward-difference stencils propagate family
    tags so downstream membership questions stay decisive.
    """
    if A.kind == "stencil":
        maxdk = max((dk for dk, _ in A.stencil), default=0)
        maxdl = max((dl for _, dl in A.stencil), default=0)
        mindk = min((dk for dk, _ in A.stencil), default=0)
        mindl = min((dl for _, dl in A.stencil), default=0)
        if mindk < 0 or mindl < 0:
            raise ValueError("stencil offsets must be >= 0 in this toolkit")
        M = min(A.M, x.K - maxdk)
        N = min(A.N, x.L - maxdl)
        if M < 2 or N < 2:
            raise ValueError("truncation too small for the stencil")
        acc = None
        for (dk, dl), c in A.stencil.items():
            term = x.data[dk : dk + M, dl : dl + N] * coerce(c, x.mode)
            acc = term if acc is None else acc + term
        if acc is None:
            data = np.zeros((M, N), dtype=complex) if x.mode == "float" else None
            if data is None:
                data = np.empty((M, N), dtype=object)
                for idx in np.ndindex(M, N):
                    data[idx] = coerce(0, "exact")
            acc = data
        family = None
        if A.stencil == DELTA_STENCIL:
            family = fam.family_delta(x.family)
        elif A.stencil == {(0, 0): 1}:
            family = x.family
        elif not A.stencil:
            family = fam.constant(0)
        y = DoubleSeq(acc, x.mode, family)
        verdict = vd.holds(reason="finite stencil row; exact sum")
        grid = [[verdict for _ in range(N)] for _ in range(M)]
        return y, grid
    if A.kind == "block":
        M, N, K, L = A.block.shape
        if x.K < K or x.L < L:
            raise ValueError(f"x truncation {x.shape} does not cover matrix bounds {(K, L)}")
        out = np.empty((M, N), dtype=object) if x.mode == "exact" else np.zeros((M, N), dtype=complex)
        for m in range(M):
            for n in range(N):
                total = coerce(0, x.mode)
                for k in range(K):
                    row = coerce(0, x.mode)
                    for l in range(L):
                        c = A.block[m, n, k, l]
                        if c != 0:
                            row = row + coerce(c, x.mode) * x.data[k, l]
                    total = total + row
                out[m, n] = total
        verdict = vd.holds(reason="finite block row; exact sum")
        y = DoubleSeq(out, x.mode)
        grid = [[verdict for _ in range(N)] for _ in range(M)]
        return y, grid
    # closed form: truncated series per row with ϑ-protocol verdicts
    M, N = A.M, A.N
    out = np.zeros((M, N), dtype=complex)
    grid = []
    from .convergence import series_theta_verdict

    for m in range(M):
        row_verdicts = []
        for n in range(N):
            row = A.row_seq(m, n, min(A.K, x.K), min(A.L, x.L))
            z = DoubleSeq(row.data * x.data[: row.K, : row.L], x.mode,
                          fam.family_hadamard(row.family, x.family))
            v = series_theta_verdict(z, theta, params)
            out[m, n] = complex(gridops.grid_total(z.data))
            row_verdicts.append(v)
        grid.append(row_verdicts)
    return DoubleSeq(out, "float"), grid


def summability_domain_member(
    A: Matrix4D, x: DoubleSeq, target_space: str, theta: str = "bp",
    params: DetectParams = DetectParams(), q: float = 1.0,
) -> Verdict:
    """Does Ax exist (every row ϑ-sums) and land in the target space?"""
    y, grid = apply_matrix(A, x, theta, params)
    parts = {}
    for m, row in enumerate(grid):
        for n, v in enumerate(row):
            if not v.holds:
                parts[f"row ({m},{n})"] = v
    parts["transform in target"] = space_membership(y, target_space, params, q=q)
    return vd.conjoin(parts, question=f"x in domain of A with target {target_space}")


# -- derived matrices -----------------------------------------------------------


def build_b(A: Matrix4D, bounds=None) -> Matrix4D:
    """Tail-sum matrix: b[m,n,k,l] = sum of a[m,n,i,j] over i >= k, j >= l.

    Exact for finitely supported rows (stencil/block).  Closed-form rows
    are tail-summed over the truncation with per-entry flags when the row
    family cannot certify the tail.
    """
    M, N, K, L = bounds if bounds is not None else A.bounds
    out = np.empty((M, N, K, L), dtype=object)
    flags = np.zeros((M, N, K, L), dtype=bool)
    for m in range(M):
        for n in range(N):
            if A.kind == "stencil":
                maxdk = max((dk for dk, _ in A.stencil), default=0)
                maxdl = max((dl for _, dl in A.stencil), default=0)
                Kf = max(K, m + maxdk + 1)
                Lf = max(L, n + maxdl + 1)
            elif A.kind == "block":
                Kf = max(K, A.block.shape[2])
                Lf = max(L, A.block.shape[3])
            else:
                Kf, Lf = K, L
            row = np.empty((Kf, Lf), dtype=object)
            for k in range(Kf):
                for l in range(Lf):
                    row[k, l] = A.entry(m, n, k, l)
            tails = gridops.suffix_sums_inclusive(row)
            out[m, n] = tails[:K, :L]
            if not A.finite_rows():
                certified = False
                rf = A.row_family(m, n) if A.row_family is not None else None
                if rf is not None:
                    facts = fam.family_abs_series(rf, include_zero=True)
                    certified = facts is not None and facts[0] == "converges"
                if not certified:
                    flags[m, n, :, :] = True
    name = f"tail-sums({A.name})" if A.name else "tail-sums"
    arr = out if A.mode == "exact" else _to_float_block(out)
    bm = block_matrix(arr, A.mode, name=name)
    if flags.any():
        bm = dataclasses.replace(bm, entry_flags=flags)
    return bm


def _to_float_block(obj_arr: np.ndarray) -> np.ndarray:
    out = np.zeros(obj_arr.shape, dtype=complex)
    for idx, v in np.ndenumerate(obj_arr):
        out[idx] = complex(v) if v is not None else 0
    return out


def build_f(A: Matrix4D) -> Matrix4D:
    """Row-difference matrix: the forward-difference stencil applied to A
    along its row indices (m, n)."""
    M, N, K, L = A.bounds
    if M < 2 or N < 2:
        raise ValueError("bounds too small to difference along (m, n)")
    if A.kind == "stencil":
        new = {}
        for (dk, dl), c in A.stencil.items():
            for sk, sl, sgn in ((0, 0, 1), (1, 0, -1), (0, 1, -1), (1, 1, 1)):
                # a[m+sk, n+sl] has stencil offset (dk - sk, dl - sl)
                od = (dk - sk, dl - sl)
                new[od] = new.get(od, 0) + sgn * c
        new = {od: c for od, c in new.items() if c != 0}
        shift = max(0, -min((dk for dk, _ in new), default=0)), max(
            0, -min((dl for _, dl in new), default=0)
        )
        if shift != (0, 0):
            # negative offsets mean the differenced matrix is no longer a
            # translation stencil on natural indices; materialize instead
            return _materialize_f(A)
        name = f"row-difference({A.name})" if A.name else "row-difference"
        return stencil_matrix(new, (M - 1, N - 1, K, L), A.mode, name=name)
    return _materialize_f(A)


def _materialize_f(A: Matrix4D) -> Matrix4D:
    M, N, K, L = A.bounds
    if A.kind == "block":
        b = A.block
        arr = b[:-1, :-1] - b[1:, :-1] - b[:-1, 1:] + b[1:, 1:]
        name = f"row-difference({A.name})" if A.name else "row-difference"
        return block_matrix(arr, A.mode, name=name)
    if A.kind == "closed":
        closed0 = A.closed

        def closed(m, n, k, l):
            return (
                closed0(m, n, k, l)
                - closed0(m + 1, n, k, l)
                - closed0(m, n + 1, k, l)
                + closed0(m + 1, n + 1, k, l)
            )

        row_family = None
        if A.row_family is not None:
            rf0 = A.row_family

            def row_family(m, n):
                parts = [
                    (rf0(m, n), 1), (rf0(m + 1, n), -1),
                    (rf0(m, n + 1), -1), (rf0(m + 1, n + 1), 1),
                ]
                total = 0
                for f, sgn in parts:
                    if not isinstance(f, fam.Separable) or fam.factor_degree(f.fk) != 0 or \
                            fam.factor_degree(f.fl) != 0 or f.fk.ratio != 1 or f.fl.ratio != 1:
                        return None
                    total += sgn * f.fk.poly[0] * f.fl.poly[0]
                return fam.constant(total)

        name = f"row-difference({A.name})" if A.name else "row-difference"
        return Matrix4D(
            "closed", (M - 1, N - 1, K, L), A.mode, closed=closed,
            row_family=row_family, name=name,
        )
    # stencil fallback with negative offsets: materialize a block
    arr = np.empty((M - 1, N - 1, K, L), dtype=object)
    for m in range(M - 1):
        for n in range(N - 1):
            for k in range(K):
                for l in range(L):
                    arr[m, n, k, l] = (
                        A.entry(m, n, k, l)
                        - A.entry(m + 1, n, k, l)
                        - A.entry(m, n + 1, k, l)
                        + A.entry(m + 1, n + 1, k, l)
                    )
    if A.mode == "float":
        arr = _to_float_block(arr)
    name = f"row-difference({A.name})" if A.name else "row-difference"
    return block_matrix(arr, A.mode, name=name)


# -- condition registry ----------------------------------------------------------


def _theta_limit_verdict(
    seq: DoubleSeq, theta: str, params: DetectParams, force_zero: bool = False
) -> Verdict:
    if theta == "p":
        return _limit_verdict(seq, params, force_zero)
    if theta == "bp":
        return vd.conjoin(
            {"limit": _limit_verdict(seq, params, force_zero),
             "bounded": _bounded_verdict(seq, params)}
        )
    if theta == "r":
        return vd.conjoin(
            {"limit": _limit_verdict(seq, params, force_zero),
             "bounded": _bounded_verdict(seq, params),
             "rows/cols": _rows_cols_verdict(seq, params)}
        )
    raise ValueError(f"unknown theta {theta!r}")


def _mn_grid(A: Matrix4D, values) -> DoubleSeq:
    rows = [[values(m, n) for n in range(A.N)] for m in range(A.M)]
    return from_rows(rows, mode="float")


def _row_abs_sum(A: Matrix4D, m: int, n: int, params: DetectParams):
    """(row abs-sum value, verdict that the row is absolutely summable).

    Finite rows are summed over their full support, so the value is exact."""
    row = A.full_row(m, n)
    total = float(gridops.sum_abs(row.data))
    if A.finite_rows():
        return total, vd.holds(reason="finitely supported row")
    return total, series_abs_verdict(row, params, interior_only=False)


def condition_check(
    A: Matrix4D, cond: str, params: DetectParams = DetectParams(), theta: str = "bp",
    limits: Optional[np.ndarray] = None,
) -> Verdict:
    """Evaluate one registry condition on the truncation.

    The ϑ-limits over (m, n) use the standard detection protocol; the
    existential conditions search every grid-resident candidate index and
    report the witness found.  Conditions that reference the entrywise
    limits inherit Inconclusive when those limits are undecided.
    """
    if cond == "C3.0":
        parts = {}
        sums = np.zeros((A.M, A.N))
        for m in range(A.M):
            for n in range(A.N):
                total, v = _row_abs_sum(A, m, n, params)
                sums[m, n] = total
                if not v.holds:
                    witness = dict(v.witness or {})
                    witness["row"] = [m, n]
                    parts[f"row ({m},{n})"] = (
                        vd.fails(witness, v.reason) if v.fails else v
                    )
        if parts:
            return vd.conjoin(parts, question="C3.0: uniformly summable rows").named(
                "C3.0"
            )
        sup_seq = from_rows(sums.tolist(), mode="float")
        return _bounded_verdict(sup_seq, params).named("C3.0")
    if cond == "C3.01":
        verdict, _ = entry_limits(A, params, theta)
        return verdict.named("C3.01")
    if cond == "C3.99":
        def rowsum(m, n):
            row = A.full_row(m, n)
            return complex(gridops.grid_total(row.data))

        summable = _all_rows_summable(A, params)
        if summable is not None:
            return summable.named("C3.99")
        grid = _mn_grid(A, rowsum)
        return _theta_limit_verdict(grid, theta, params).named("C3.99")
    if cond in ("C3.9", "C3.10"):
        verdict, lim = entry_limits(A, params, theta)
        if not verdict.decisive:
            return vd.inconclusive("entrywise limits (C3.01) undecided").named(cond)
        if verdict.fails:
            return vd.fails(dict(verdict.witness or {}), "entrywise limits fail").named(cond)
        axis = 0 if cond == "C3.9" else 1
        return _exists_index_verdict(A, params, theta, lim, axis, absolute=True).named(cond)
    if cond in ("C3.7", "C3.8"):
        axis = 1 if cond == "C3.7" else 0
        return _exists_index_verdict(A, params, theta, None, axis, absolute=False).named(cond)
    if cond == "C3.15":
        verdict, lim = entry_limits(A, params, "bp")
        if not verdict.decisive:
            return vd.inconclusive("entrywise limits (C3.01) undecided").named(cond)
        if verdict.fails:
            return vd.fails(dict(verdict.witness or {}), "entrywise limits fail").named(cond)
        grid_rows = []
        for m in range(A.M):
            row_vals = []
            for n in range(A.N):
                row = A.row_seq(m, n)
                diff = row.to_complex() - lim[: row.K, : row.L]
                row_vals.append(float(np.abs(diff).sum()))
            grid_rows.append(row_vals)
        grid = from_rows(grid_rows, mode="float")
        return _theta_limit_verdict(grid, "bp", params, force_zero=True).named(cond)
    if cond in ("C3.151", "C3.152"):
        parts = {}
        for idx in range(A.K if cond == "C3.151" else A.L):
            if cond == "C3.151":
                def val(m, n, _k=idx):
                    return complex(
                        sum(complex(A.entry(m, n, _k, l)) for l in range(0, n + 1))
                    )
            else:
                def val(m, n, _l=idx):
                    return complex(
                        sum(complex(A.entry(m, n, k, _l)) for k in range(0, m + 1))
                    )
            grid = _mn_grid(A, val)
            label = f"k={idx}" if cond == "C3.151" else f"l={idx}"
            parts[label] = _theta_limit_verdict(grid, "bp", params)
        return vd.conjoin(parts, question=f"{cond}: truncated line sums converge").named(cond)
    if cond == "C3.153":
        parts = {}
        for m in range(A.M):
            for n in range(A.N):
                _, v = _row_abs_sum(A, m, n, params)
                if not v.holds:
                    parts[f"row ({m},{n})"] = v
        if parts:
            return vd.conjoin(parts, question="C3.153: rows absolutely convergent").named(cond)
        return vd.holds(reason="all rows absolutely convergent").named(cond)
    raise ValueError(f"unknown condition id {cond!r}")


def _all_rows_summable(A: Matrix4D, params: DetectParams) -> Optional[Verdict]:
    """Fails/Inconclusive verdict if some row is not summable; None when fine."""
    if A.finite_rows():
        return None
    parts = {}
    for m in range(A.M):
        for n in range(A.N):
            _, v = _row_abs_sum(A, m, n, params)
            if not v.holds:
                parts[f"row ({m},{n})"] = v
    if parts:
        return vd.conjoin(parts)
    return None


def audit_cap(A: Matrix4D, params: DetectParams) -> int:
    """Largest entry depth whose (m, n)-transient the evaluation window can see.

    Entrywise-limit conditions quantify over all (k, l); the truncated
    surrogate audits only the cells whose stabilization can complete inside
    the (M, N) window with the required margin.  Corner-region protocols
    (p, bp) pass a cell once both indices exceed it, so the relevant depth
    is min(k, l); the row/column protocols of the regular mode see a
    transient at each index separately, so theirs is max(k, l).
    """
    return min(A.M, A.N) - 2 - params.window


def _audited(k: int, l: int, cap: int, theta: str) -> bool:
    depth = max(k, l) if theta == "r" else min(k, l)
    return depth <= cap


def entry_limits(A: Matrix4D, params: DetectParams, theta: str):
    """ϑ-limits of a[m,n,k,l] over (m,n) for resident (k,l).

    Returns (conjoined verdict over the audited cells, K x L complex array
    of limit estimates).  Cells with min(k, l) beyond :func:`audit_cap` get
    estimates (far-corner means) but do not enter the verdict.
    """
    cap = audit_cap(A, params)
    if cap < 0:
        return (
            vd.inconclusive("evaluation window too small to audit any entrywise limit"),
            np.zeros((A.K, A.L), dtype=complex),
        )
    lim = np.zeros((A.K, A.L), dtype=complex)
    parts = {}
    for k in range(A.K):
        for l in range(A.L):
            grid = _mn_grid(A, lambda m, n, _k=k, _l=l: complex(A.entry(m, n, _k, _l)))
            if _audited(k, l, cap, theta):
                v = _theta_limit_verdict(grid, theta, params)
                parts[f"(k,l)=({k},{l})"] = v
                if v.holds and v.estimate is not None:
                    lim[k, l] = to_float_scalar(v.estimate.value)
            else:
                from .convergence import _candidate_limit

                lim[k, l] = to_float_scalar(_candidate_limit(grid, params))
    if not parts:
        return vd.inconclusive("no entry within the audit window"), lim
    out = vd.conjoin(parts, question="C3.01: entrywise limits")
    if out.holds:
        out = vd.holds(out.estimate, reason=f"audited entry depth <= {cap}")
    return out, lim


def _exists_index_verdict(
    A: Matrix4D, params: DetectParams, theta: str, lim, axis: int, absolute: bool
) -> Verdict:
    """Existential conditions: some row index k0 (axis 0) or column index l0
    (axis 1) whose line sums ϑ-converge (absolute=False) or whose absolute
    deviation from the entrywise limits tends to 0 (absolute=True).

    Candidates beyond :func:`audit_cap` leave transients the window cannot
    see, so the search stops there."""
    cap = audit_cap(A, params)
    hi = min((A.K if axis == 0 else A.L), cap + 1)
    if hi <= 0:
        return vd.inconclusive("evaluation window too small to audit any candidate")
    candidates = range(hi)
    outcomes = {}
    for idx in candidates:
        def val(m, n, _i=idx):
            if axis == 0:
                terms = (
                    (complex(A.entry(m, n, _i, l)) - (lim[_i, l] if lim is not None else 0))
                    for l in range(A.L)
                )
            else:
                terms = (
                    (complex(A.entry(m, n, k, _i)) - (lim[k, _i] if lim is not None else 0))
                    for k in range(A.K)
                )
            if absolute:
                return float(sum(abs(t) for t in terms))
            return complex(sum(terms))

        grid = _mn_grid(A, val)
        outcomes[idx] = _theta_limit_verdict(grid, theta, params, force_zero=absolute)
    for idx, v in outcomes.items():
        if v.holds:
            label = "k0" if axis == 0 else "l0"
            est = v.estimate
            return vd.holds(est, reason=f"witness {label} = {idx}")
    if all(v.fails for v in outcomes.values()):
        first = next(iter(outcomes.values()))
        return vd.fails(
            {"kind": "no-candidate", "detail": "every grid-resident index fails",
             **(first.witness or {})}
        )
    return vd.inconclusive("no grid-resident candidate certified; some undecided")


# -- class checks -----------------------------------------------------------------


@dataclass(frozen=True)
class ClassReport:
    source: str
    target: str
    class_id: Optional[int]
    conditions: dict
    extra: dict = field(default_factory=dict)

    @property
    def overall(self) -> Verdict:
        parts = dict(self.extra)
        parts.update(self.conditions)
        return vd.conjoin(parts, question=f"A in ({self.source} : {self.target})")

    def to_record(self) -> dict:
        rec = {
            "source": self.source,
            "target": self.target,
            "class": self.class_id,
            "conditions": {cid: v.to_record() for cid, v in self.conditions.items()},
            "overall": self.overall.to_record(),
        }
        if self.extra:
            rec["extra"] = {k: v.to_record() for k, v in self.extra.items()}
        return rec


def _theta_for_target(target: str) -> str:
    return "r" if target == "C_r" else "bp"


def class_check(
    A: Matrix4D, source: str, target: str, params: DetectParams = DetectParams()
) -> ClassReport:
    """Look up the registered condition set for (source, target) and conjoin."""
    if source not in BASE_SPACES or target not in BASE_SPACES:
        raise ValueError(f"spaces must be in {BASE_SPACES}")
    class_id = CLASS_TABLE[(source, target)]
    if class_id is None:
        raise UnsupportedClassError(
            f"the characterization of ({source} : {target}) is unknown"
        )
    theta = _theta_for_target(target)
    conditions = {
        cid: condition_check(A, cid, params, theta) for cid in CLASS_CONDITIONS[class_id]
    }
    return ClassReport(source, target, class_id, conditions)


def domain_source_class_check(
    A: Matrix4D, source: str, target: str, params: DetectParams = DetectParams(),
    samples=None, theta: Optional[str] = None,
) -> ClassReport:
    """Characterize A mapping a difference-domain source into a base space.

    source is "<λ>(Δ)"; checks per-row dual membership, the index-weighted
    row sums landing in the target, and the tail-sum matrix class.
    """
    if "(" not in source:
        raise ValueError("source must be a difference-domain space like 'M_u(Δ)'")
    lam = source.split("(")[0]
    if lam not in BASE_SPACES or target not in BASE_SPACES:
        raise ValueError(f"base spaces must be in {BASE_SPACES}")
    theta = theta or _theta_for_target(target)
    if samples is None:
        samples = delta_domain_battery(A.K, A.L, A.mode, seed=0)
    row_parts = {}
    for m in range(A.M):
        for n in range(A.N):
            row = A.row_seq(m, n)
            row_parts[f"row ({m},{n})"] = dual_membership(row, "beta", samples, params, theta)
    rows_dual = vd.conjoin(row_parts, question="rows in the source's beta-dual")

    def weighted(m, n):
        row = A.full_row(m, n)
        total = 0j
        for k in range(1, row.K):
            for l in range(1, row.L):
                total += k * l * complex(row.data[k, l])
        return total

    wgrid = _mn_grid(A, weighted)
    wmember = space_membership(wgrid, target, params).named(
        "index-weighted row sums in target"
    )
    B = build_b(A)
    breport = class_check(B, lam, target, params)
    conditions = dict(breport.conditions)
    extra = {"rows in beta-dual (4.1)": rows_dual, "weighted row sums (4.2)": wmember}
    return ClassReport(source, target, breport.class_id, conditions, extra)


def base_space_battery(space: str, K: int, L: int, mode: str = "float", seed: int = 0):
    """Sample members of a base space for pairing checks."""
    import random as _random

    rng = _random.Random(seed)
    samples = [
        ("e", make_family("e", K, L, mode=mode)),
        ("e^{1,1}", make_family("e^kl", K, L, k=1, l=1, mode=mode)),
        ("2^-k 2^-l", make_family("geometric", K, L, r=Fraction(1, 2), s=Fraction(1, 2), mode=mode)),
    ]
    if space == "M_u":
        samples.append(
            ("alternating", make_family("geometric", K, L, r=-1, s=-1, mode=mode))
        )
    pts = {}
    for _ in range(3):
        pts[(rng.randint(0, K - 1), rng.randint(0, L - 1))] = Fraction(
            rng.randint(-9, 9), rng.randint(1, 9)
        )
    rows = [[pts.get((k, l), 0) for l in range(L)] for k in range(K)]
    fs = from_rows(rows, mode=mode).with_family(
        fam.FiniteSupport(tuple(sorted((pt, v) for pt, v in pts.items() if v != 0)))
    )
    samples.append(("random finite support", fs))
    return samples


def domain_target_class_check(
    A: Matrix4D, source: str, target: str, params: DetectParams = DetectParams(),
    samples=None, theta: Optional[str] = None,
) -> ClassReport:
    """Characterize A mapping a base space into a difference-domain target.

    target is "<λ>(Δ)"; checks per-row dual membership in the source's
    series dual and the row-difference matrix class.
    """
    lam = target.split("(")[0]
    if lam not in BASE_SPACES or source not in BASE_SPACES:
        raise ValueError(f"base spaces must be in {BASE_SPACES}")
    theta = theta or _theta_for_target(lam)
    if samples is None:
        samples = base_space_battery(source, max(A.K, 8), max(A.L, 8), A.mode, seed=0)
    row_parts = {}
    for m in range(A.M):
        for n in range(A.N):
            row = A.row_seq(m, n)
            row_parts[f"row ({m},{n})"] = dual_membership(row, "beta", samples, params, theta)
    rows_dual = vd.conjoin(row_parts, question="rows in the source's beta-dual")
    F = build_f(A)
    freport = class_check(F, source, lam, params)
    conditions = dict(freport.conditions)
    extra = {"rows in beta-dual (5.1)": rows_dual}
    return ClassReport(source, target, freport.class_id, conditions, extra)


# -- the transformation identity --------------------------------------------------


def shift_by_one(y: DoubleSeq) -> DoubleSeq:
    """z[k, l] = y[k-1, l-1] for k, l >= 1; zero first row/column."""
    K, L = y.K + 1, y.L + 1
    if y.mode == "exact":
        out = np.empty((K, L), dtype=object)
        for idx in np.ndindex(K, L):
            out[idx] = coerce(0, "exact")
    else:
        out = np.zeros((K, L), dtype=complex)
    out[1:, 1:] = y.data
    return DoubleSeq(out, y.mode)


def thm41_identity_harness(
    A: Matrix4D, samples, theta: str = "bp", params: DetectParams = DetectParams()
):
    """Assert Ax = (tail-sum matrix applied to the shifted difference data).

    samples: iterable of (name, y) with y in the base space; the partner is
    x[k,l] = sum_{i<k, j<l} y[i,j] (zero boundary), for which the exact
    identity A x = B ~y holds with ~y the by-one shift of y.  Exact equality
    in exact mode; per-sample max error reported in float mode.
    """
    rows = []
    B = build_b(A)
    for name, y in samples:
        x = inverse_difference(y, BoundaryData.zero(y.K + 1, y.L + 1, y.mode))
        lhs, _ = apply_matrix(A, x, theta, params)
        rhs, _ = apply_matrix(B, shift_by_one(y), theta, params)
        M = min(lhs.K, rhs.K)
        N = min(lhs.L, rhs.L)
        if y.mode == "exact":
            exact = all(lhs.data[m, n] == rhs.data[m, n] for m in range(M) for n in range(N))
            err = 0.0 if exact else float(
                max(
                    abs(complex(lhs.data[m, n]) - complex(rhs.data[m, n]))
                    for m in range(M)
                    for n in range(N)
                )
            )
        else:
            err = float(np.abs(lhs.to_complex()[:M, :N] - rhs.to_complex()[:M, :N]).max())
            exact = err == 0.0
        rows.append({"sample": name, "exact": exact, "max_error": err, "cells": M * N})
    return {"matrix": A.name or A.kind, "samples": rows, "ok": all(r["exact"] for r in rows)}
