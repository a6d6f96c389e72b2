"""Partial sums, tail sums, and Abel double partial summation as executable
identities.

The Abel rearrangement and the tail-sum decomposition are algebraic
identities on finite grids, so they are checked for exact equality in exact
mode.  The bound and decay lemmas are quantitative: they compare truncated
quantities and return verdicts, with analytic tail factors attached when the
input family provides them.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from . import families as fam
from . import gridops
from . import verdicts as vd
from .convergence import (
    DetectParams,
    _bounded_verdict,
    _limit_verdict,
    bs_verdict,
    partial_sum_seq,
    series_theta_verdict,
)
from .scalars import abs2, abs_value, coerce, to_float_scalar
from .sequences import DoubleSeq, scale_by_index
from .verdicts import LimitEstimate, Verdict

PARTIAL_DIFF_KINDS = ("10", "01", "11")


def partial_sum_grid(x: DoubleSeq) -> DoubleSeq:
    """s[m,n] = sum of x[k,l] for k <= m, l <= n (2D prefix-sum recurrence)."""
    return partial_sum_seq(x)


def partial_difference(a: DoubleSeq, kind: str) -> DoubleSeq:
    """Directional partial differences: kind in {"10", "01", "11"}."""
    if kind == "10":
        return DoubleSeq(gridops.diff_10(a.data), a.mode)
    if kind == "01":
        return DoubleSeq(gridops.diff_01(a.data), a.mode)
    if kind == "11":
        return DoubleSeq(gridops.diff_11(a.data), a.mode)
    raise ValueError(f"kind must be one of {PARTIAL_DIFF_KINDS}")


def _weight(m_plus_k: int, n_plus_l: int, mode: str):
    if mode == "exact":
        return Fraction(1, m_plus_k * n_plus_l)
    return 1.0 / (m_plus_k * n_plus_l)


def abel_identity_check(y: DoubleSeq, m: int, n: int, s: int, t: int):
    """Both routes of the Abel double partial summation, for assertion.

    lhs sums y[m+k-1, n+l-1] / ((m+k)(n+l)) directly over k <= s, l <= t;
    rhs is the four-block rearrangement through the shifted partial sums
    Y[k,l] = sum_{i<=k, j<=l} y[m+i-1, n+j-1].
    """
    if s < 1 or t < 1:
        raise IndexError("s, t must be >= 1")
    if m + s - 1 >= y.K or n + t - 1 >= y.L:
        raise IndexError(
            f"window (m+s-1, n+t-1) = ({m + s - 1}, {n + t - 1}) outside truncation {y.shape}"
        )
    mode = y.mode
    # block[k-1, l-1] = y[m+k-1, n+l-1] for k in 1..s, l in 1..t
    block = y.data[m : m + s, n : n + t]
    if block.shape != (s, t):
        raise IndexError("window does not fit the truncation")

    def w(k, l):
        return _weight(m + k, n + l, mode)

    lhs = coerce(0, mode)
    for k in range(1, s + 1):
        row = coerce(0, mode)
        for l in range(1, t + 1):
            row = row + block[k - 1, l - 1] * w(k, l)
        lhs = lhs + row

    Y = gridops.prefix_sums(block)  # Y[k-1, l-1] = sum_{i<=k, j<=l}

    rhs = coerce(0, mode)
    for k in range(1, s):
        for l in range(1, t):
            d11 = w(k, l) - w(k + 1, l) - w(k, l + 1) + w(k + 1, l + 1)
            rhs = rhs + Y[k - 1, l - 1] * d11
    for k in range(1, s):
        d10 = w(k, t) - w(k + 1, t)
        rhs = rhs + Y[k - 1, t - 1] * d10
    for l in range(1, t):
        d01 = w(s, l) - w(s, l + 1)
        rhs = rhs + Y[s - 1, l - 1] * d01
    rhs = rhs + Y[s - 1, t - 1] * w(s, t)
    return lhs, rhs


def lemma31_bound_check(y: DoubleSeq, params: DetectParams = DetectParams()) -> Verdict:
    """Bounded interior partial sums force the weighted shifted sums down.

    M = max |sum_{k,l=1}^{m,n} y_kl|; the check asserts, for every (m, n),
    (m+1)(n+1) |sum y[m+k-1, n+l-1] / ((m+k)(n+l))| <= M over the truncated
    inner sum.
    """
    S = partial_sum_seq(y, interior_only=True)
    M = gridops.max_abs_value(S.data)
    Mf = float(M)
    worst = None
    for m in range(y.K):
        for n in range(y.L):
            inner = coerce(0, y.mode)
            for k in range(1, y.K - m + 1):
                for l in range(1, y.L - n + 1):
                    inner = inner + y.data[m + k - 1, n + l - 1] * _weight(m + k, n + l, y.mode)
            lhs = (m + 1) * (n + 1) * float(abs_value(inner))
            if lhs > Mf * (1 + 1e-12) + 1e-300:
                witness = {
                    "kind": "bound-violation",
                    "cell": [m, n],
                    "lhs": lhs,
                    "bound": Mf,
                }
                return vd.fails(witness).named("weighted shifted sums bounded by M")
            if worst is None or lhs > worst:
                worst = lhs
    est = LimitEstimate(M, max(params.epsilon, Mf), 0, float(worst or 0.0))
    return vd.holds(est, reason=f"M = {Mf:.6g}; worst check {float(worst or 0):.6g}").named(
        "weighted shifted sums bounded by M"
    )


@dataclass(frozen=True)
class TailGrid:
    """Truncated tail sums R[m,n] = sum of a[k,l] over k > m, l > n.

    Values with m or n at the far edge are pure truncation artifacts (empty
    sums).  When the input family supports it, `beyond_grid_bound` bounds the
    mass the truncation cannot see and `analytic_tail_value` gives the exact
    untruncated tail (pure geometric inputs).
    """

    seq: DoubleSeq
    artifact_edge: tuple
    term_family: Optional[object] = None

    def beyond_grid_bound(self, m: int, n: int) -> Optional[float]:
        """Bound on |true R[m,n] - grid R[m,n]| (mass outside the truncation)."""
        f = self.term_family
        sep = f.interior if isinstance(f, fam.Pieced) else f
        if not isinstance(sep, fam.Separable):
            return None
        ak = fam.factor_abs_series(sep.fk)
        al = fam.factor_abs_series(sep.fl)
        if not ak or not al or ak[0] != "converges" or al[0] != "converges":
            return None
        if ak[1] is None or al[1] is None:
            return None
        K, L = self.seq.shape
        return ak[1](K - 1) * al[1](max(n, 1)) + ak[1](max(m, 1)) * al[1](L - 1)

    def analytic_tail_value(self, m: int, n: int):
        """Exact untruncated tail for pure geometric term families, else None."""
        f = self.term_family
        sep = f.interior if isinstance(f, fam.Pieced) else f
        if not isinstance(sep, fam.Separable):
            return None

        def tail(fc: fam.Factor, idx: int):
            if fc.power != 0 or len(fc.poly) != 1:
                return None
            c, r = fc.poly[0], fc.ratio
            if isinstance(r, (int, Fraction)) and abs(r) < 1 and r != 0:
                return c * r ** (idx + 1) / (1 - r)
            return None

        tk, tl = tail(sep.fk, m), tail(sep.fl, n)
        if tk is None or tl is None:
            return None
        return tk * tl


def tail_grid(a: DoubleSeq) -> TailGrid:
    """Suffix-sum recurrence from the far corner; exclusive tails."""
    K, L = a.shape
    incl = gridops.suffix_sums_inclusive(a.data)
    if a.mode == "exact":
        out = np.empty((K, L), dtype=object)
        for idx in np.ndindex(K, L):
            out[idx] = coerce(0, "exact")
    else:
        out = np.zeros((K, L), dtype=complex)
    out[: K - 1, : L - 1] = incl[1:, 1:]
    seq = DoubleSeq(out, a.mode, None, flags=("far-edge tails are truncation artifacts",))
    return TailGrid(seq, artifact_edge=(K - 1, L - 1), term_family=a.family)


def _index_weighted_tail_seq(tg: TailGrid) -> DoubleSeq:
    """Grid of mn * R[m,n] with the family pushed through when available."""
    return scale_by_index(tg.seq, "integral")


def corollary41_check(
    a: DoubleSeq, part: str, params: DetectParams = DetectParams(), theta: str = "bp"
) -> Verdict:
    """Executable content of the tail-sum corollary.

    part i:  bounded weighted partial sums  =>  mn R[m,n] bounded;
    part ii: convergent weighted series     =>  mn R[m,n] -> 0;
    part iii: the exact finite decomposition
        sum_{k,l=1}^{s,t} kl a_kl = sum_{k,l=1}^{s,t} R'_kl,
        R'_kl = sum_{i=k..s, j=l..t} a_ij,  at every admissible (s, t).
    """
    weighted = scale_by_index(a, "integral")
    if part == "i":
        hyp = bs_verdict(weighted, params, interior_only=True)
        if hyp.fails:
            return vd.holds(reason="hypothesis fails; implication vacuous").named(
                "cor tail-sums part i"
            )
        if not hyp.holds:
            return vd.inconclusive("hypothesis not decided").named("cor tail-sums part i")
        mnr = _index_weighted_tail_seq(tail_grid(a))
        return _bounded_verdict(mnr, params).named("cor tail-sums part i")
    if part == "ii":
        hyp = series_theta_verdict(weighted, theta, params, interior_only=True)
        if hyp.fails:
            return vd.holds(reason="hypothesis fails; implication vacuous").named(
                "cor tail-sums part ii"
            )
        if not hyp.holds:
            return vd.inconclusive("hypothesis not decided").named("cor tail-sums part ii")
        mnr = _index_weighted_tail_seq(tail_grid(a))
        return _limit_verdict(mnr, params, force_zero=True).named("cor tail-sums part ii")
    if part == "iii":
        K, L = a.shape
        for s in range(1, K):
            for t in range(1, L):
                lhs = coerce(0, a.mode)
                for k in range(1, s + 1):
                    for l in range(1, t + 1):
                        w = k * l if a.mode == "float" else Fraction(k * l)
                        lhs = lhs + a.data[k, l] * w
                block = a.data[1 : s + 1, 1 : t + 1]
                rprime = gridops.suffix_sums_inclusive(block)
                rhs = gridops.grid_total(rprime)
                if a.mode == "exact":
                    equal = lhs == rhs
                else:
                    equal = abs(complex(lhs) - complex(rhs)) <= 1e-9 * (1 + abs(complex(lhs)))
                if not equal:
                    return vd.fails(
                        {
                            "kind": "identity-violation",
                            "cell": [s, t],
                            "lhs": to_float_scalar(lhs),
                            "rhs": to_float_scalar(rhs),
                        }
                    ).named("cor tail-sums part iii")
        return vd.holds(reason="decomposition exact at every admissible (s, t)").named(
            "cor tail-sums part iii"
        )
    raise ValueError("part must be one of: i, ii, iii")
