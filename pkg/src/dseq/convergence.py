"""Verdict-based detection of convergence modes and the sequence-space norms.

The detection protocol for limit questions, fixed here once and reused by
every module:

* the candidate limit L is the mean of the entries on the last ``window``
  anti-diagonals intersected with {m, n >= n0} (first row/column never
  pollute the candidate);
* Holds requires a stabilization index N with at least ``window`` corner
  depths remaining such that every entry with m, n >= N is within epsilon
  of L -- or an analytic certificate from the sequence's family tag, in
  which case the estimate reports the certified tail bound as its residual;
* Fails requires a concrete witness: a family-implied divergence (with the
  offending grid cell named), a growth envelope that is still rising at the
  grid edge, or two far-corner entries differing by more than 2*epsilon
  whose oscillation is not contracting toward the corner;
* anything else is Inconclusive, with the reason recorded.

Boundedness (M_u) is stricter about Fails: a finite grid cannot prove
unboundedness, so Fails comes only from family knowledge; untagged growth
reaching the grid edge yields Inconclusive.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Optional

import numpy as np

from . import families as fam
from . import gridops
from . import verdicts as vd
from .scalars import abs_value, coerce, to_float_scalar
from .sequences import DoubleSeq
from .verdicts import DetectParams, LimitEstimate, Verdict

SPACES = ("M_u", "C_p", "C_p0", "C_bp", "C_bp0", "C_r", "C_r0", "L_q")
THETAS = ("p", "bp", "r")


def _require_depth(x: DoubleSeq, params: DetectParams):
    if min(x.K, x.L) <= params.n0 + params.window:
        raise ValueError(
            f"truncation {x.shape} too small for n0={params.n0}, window={params.window}"
        )


def partial_sum_seq(x: DoubleSeq, interior_only: bool = False) -> DoubleSeq:
    """Grid of rectangular partial sums, tagged for downstream analytics."""
    data = x.data
    if interior_only:
        work = data.copy()
        work[0, :] = [coerce(0, x.mode)] * x.L
        work[:, 0] = [coerce(0, x.mode)] * x.K
        data = work
    sums = gridops.prefix_sums(data)
    family = None
    if x.family is not None:
        family = fam.PrefixGrid(x.family, interior_only=interior_only)
    return DoubleSeq(sums, x.mode, family)


# -- protocol building blocks -------------------------------------------------


def _candidate_limit(x: DoubleSeq, params: DetectParams):
    """Mean over the last `window` anti-diagonals within {m,n >= n0}."""
    K, L = x.K, x.L
    cutoff = (K - 1) + (L - 1) - (params.window - 1)
    cells = [
        (m, n)
        for m in range(params.n0, K)
        for n in range(params.n0, L)
        if m + n >= cutoff
    ]
    if not cells:
        cells = [(K - 1, L - 1)]
    total = coerce(0, x.mode)
    for m, n in cells:
        total = total + x.data[m, n]
    if x.mode == "exact":
        return total * Fraction(1, len(cells))
    return total / len(cells)


def _deviation_grid(x: DoubleSeq, L_value) -> np.ndarray:
    return np.abs(x.to_complex() - to_float_scalar(L_value))


def _stabilization(dev: np.ndarray, params: DetectParams):
    """Smallest admissible N with max dev over {m,n >= N} <= epsilon, or None."""
    sm = gridops.corner_suffix_max(dev)
    D = min(dev.shape) - 1
    last_ok = D - params.window
    for N in range(params.n0, last_ok + 1):
        if sm[N, N] <= params.epsilon:
            return N, float(sm[N, N])
    return None


def _depth_maxima(absg: np.ndarray, n0: int):
    K, L = absg.shape
    D = min(K, L) - 1
    out = []
    for d in range(n0, D + 1):
        vals = [absg[d, n] for n in range(d, L)] + [absg[m, d] for m in range(d + 1, K)]
        out.append(max(vals))
    return out


def _growth_witness(x: DoubleSeq, params: DetectParams) -> Optional[dict]:
    """Monotone growth still rising at the grid edge (the linear-envelope test)."""
    absg = gridops.abs_grid(x.data)
    g = _depth_maxima(absg, params.n0)
    if len(g) < params.window + 1:
        return None
    total = g[-1] - g[0]
    if total <= 2 * params.epsilon:
        return None
    if any(b < a for a, b in zip(g, g[1:])):
        return None
    rate = total / (2 * (len(g) - 1))
    incs = [g[i + 1] - g[i] for i in range(len(g) - params.window - 1, len(g) - 1)]
    if any(inc < rate for inc in incs):
        return None
    K, L = x.shape
    corner = gridops.max_abs_index(x.data[-min(K, 2):, -min(L, 2):])
    cell = (K - 2 + corner[0], L - 2 + corner[1])
    return {
        "kind": "growth",
        "cell": list(cell),
        "value": to_float_scalar(x.data[cell]),
        "depth_maxima": [g[0], g[-1]],
    }


def _oscillation_witness(x: DoubleSeq, L_value, params: DetectParams) -> Optional[dict]:
    """Two far-corner entries > 2*epsilon apart whose spread is not contracting."""
    K, L = x.shape
    D = min(K, L) - 1
    Nf = max(params.n0, D - params.window)
    xf = x.to_complex()

    def diameter_pair(N):
        region = xf[N:, N:]
        re, im = region.real, region.imag
        pairs = []
        for comp in (re, im):
            hi = np.unravel_index(int(np.argmax(comp)), comp.shape)
            lo = np.unravel_index(int(np.argmin(comp)), comp.shape)
            pairs.append((abs(region[hi] - region[lo]), hi, lo))
        best = max(pairs, key=lambda p: p[0])
        return best[0], (best[1][0] + N, best[1][1] + N), (best[2][0] + N, best[2][1] + N)

    near, hi, lo = diameter_pair(Nf)
    far, _, _ = diameter_pair(min(D - 1, Nf + params.window))
    if near > 2 * params.epsilon and far >= 0.5 * near:
        return {
            "kind": "oscillation",
            "cells": [list(hi), list(lo)],
            "values": [to_float_scalar(xf[hi]), to_float_scalar(xf[lo])],
            "spread": float(near),
        }
    return None


def _certified_estimate(x, L_value, params, residual_bound=None) -> LimitEstimate:
    dev = _deviation_grid(x, L_value)
    grid_res = float(dev[params.n0:, params.n0:].max()) if dev.size else 0.0
    residual = grid_res if residual_bound is None else min(grid_res, residual_bound)
    eps = max(params.epsilon, residual)
    return LimitEstimate(L_value, eps, params.n0, residual)


# -- limit detection ----------------------------------------------------------


def _limit_verdict(x: DoubleSeq, params: DetectParams, force_zero: bool) -> Verdict:
    """Pringsheim limit detection; force_zero pins the candidate to 0."""
    _require_depth(x, params)
    analytic = fam.family_p_limit(x.family) if x.family is not None else None

    if analytic is not None and analytic[0] == "exists":
        L_value = analytic[1]
        if L_value is not None:
            if force_zero and L_value != 0:
                corner = (x.K - 1, x.L - 1)
                return vd.fails(
                    {"kind": "nonzero-limit", "cell": list(corner),
                     "value": to_float_scalar(x.data[corner])},
                    reason="family limit is nonzero",
                )
            est = _certified_estimate(x, coerce(L_value, x.mode), params)
            return vd.holds(est, reason="certified by family analytics")
        # limit exists but its value is only available from the grid
        if force_zero:
            dev0 = float(gridops.abs_grid(x.data)[params.n0:, params.n0:].max())
            if dev0 <= params.epsilon:
                return vd.holds(LimitEstimate(coerce(0, x.mode), params.epsilon, params.n0, dev0))
            return vd.inconclusive(
                "family certifies convergence but the limit value is not confirmed to be 0"
            )
        L_grid = x.data[x.K - 1, x.L - 1]
        bound = None
        if isinstance(x.family, fam.PrefixGrid):
            bound = fam.family_prefix_residual(x.family, x.K - 1, x.L - 1)
        est = _certified_estimate(x, L_grid, params, residual_bound=bound)
        return vd.holds(est, reason="series certified convergent; value from far corner")

    if analytic is not None and analytic[0] == "unbounded":
        idx = gridops.max_abs_index(x.data)
        return vd.fails(
            {"kind": "growth", "cell": list(idx), "value": to_float_scalar(x.data[idx]),
             "analytic": "family unbounded"},
        )
    if analytic is not None and analytic[0] == "oscillates":
        witness = _oscillation_witness(x, 0, params)
        if witness is not None:
            witness["analytic"] = "family oscillates"
            return vd.fails(witness)
        # amplitude below tolerance on this grid: fall through to the protocol

    L_value = coerce(0, x.mode) if force_zero else _candidate_limit(x, params)
    dev = _deviation_grid(x, L_value)
    found = _stabilization(dev, params)
    if found is not None:
        N, res = found
        return vd.holds(LimitEstimate(L_value, params.epsilon, N, res))

    growth = _growth_witness(x, params)
    if growth is not None:
        return vd.fails(growth)
    osc = _oscillation_witness(x, L_value, params)
    if osc is not None:
        return vd.fails(osc)
    return vd.inconclusive(
        f"no stabilization within epsilon={params.epsilon} on this truncation"
    )


def _bounded_verdict(x: DoubleSeq, params: DetectParams) -> Verdict:
    sup = gridops.max_abs_value(x.data)
    idx = gridops.max_abs_index(x.data)
    est = LimitEstimate(sup, max(params.epsilon, 0.0), params.n0, 0.0)
    analytic = fam.family_bounded(x.family) if x.family is not None else None
    if analytic is True:
        return vd.holds(est, reason=f"family bounded; grid sup {float(sup):.6g}")
    if analytic is False:
        return vd.fails(
            {"kind": "unbounded", "cell": list(idx), "value": to_float_scalar(x.data[idx]),
             "analytic": "family unbounded"},
        )
    growth = _growth_witness(x, params)
    if growth is not None:
        return vd.inconclusive("growth detected at the truncation boundary")
    return vd.holds(est, reason=f"grid sup {float(sup):.6g}; no growth trend")


def _rows_cols_verdict(x: DoubleSeq, params: DetectParams) -> Verdict:
    analytic = fam.family_rows_cols_converge(x.family) if x.family is not None else None
    if analytic is True:
        return vd.holds(reason="family rows/columns converge")
    if analytic is False:
        bad = _worst_line(x, params)
        return vd.fails({"kind": "divergent-line", **bad, "analytic": "family line diverges"})
    parts = {}
    xf = x.to_complex()
    for m in range(x.K):
        parts[f"row {m}"] = _line_verdict(xf[m, :], params)
    for n in range(x.L):
        parts[f"col {n}"] = _line_verdict(xf[:, n], params)
    return vd.conjoin(parts)


def _worst_line(x: DoubleSeq, params: DetectParams) -> dict:
    xf = x.to_complex()
    worst, info = -1.0, {}
    for m in range(x.K):
        spread = float(np.abs(xf[m, -params.window:] - xf[m, -1]).max() + np.abs(xf[m, -1]))
        if spread > worst:
            worst, info = spread, {"line": f"row {m}", "values": [xf[m, -2], xf[m, -1]]}
    for n in range(x.L):
        spread = float(np.abs(xf[-params.window:, n] - xf[-1, n]).max() + np.abs(xf[-1, n]))
        if spread > worst:
            worst, info = spread, {"line": f"col {n}", "values": [xf[-2, n], xf[-1, n]]}
    info["values"] = [to_float_scalar(v) for v in info.get("values", [])]
    return info


def _line_verdict(vals: np.ndarray, params: DetectParams) -> Verdict:
    """1D analogue of the limit protocol, for rows/columns of C_r checks."""
    n = len(vals)
    if n <= params.n0 + params.window:
        raise ValueError("line too short for the detection window")
    cand = vals[-params.window:].mean()
    dev = np.abs(vals - cand)
    tail_max = np.maximum.accumulate(dev[::-1])[::-1]
    for N in range(params.n0, n - params.window + 1):
        if tail_max[N] <= params.epsilon:
            return vd.holds(LimitEstimate(cand, params.epsilon, N, float(tail_max[N])))
    mags = np.abs(vals[params.n0:])
    incs = np.diff(mags)
    total = mags[-1] - mags[0]
    if (
        len(incs) >= params.window
        and total > 2 * params.epsilon
        and np.all(incs >= 0)
        and np.all(incs[-params.window:] >= total / (2 * len(incs)))
    ):
        return vd.fails(
            {"kind": "line-growth", "values": [float(mags[0]), float(mags[-1])]}
        )
    spread_near = float(dev[params.n0:].max() * 2)
    spread_far = float(dev[-params.window:].max() * 2)
    if spread_near > 2 * params.epsilon and spread_far >= 0.5 * spread_near:
        return vd.fails(
            {"kind": "line-oscillation", "spread": spread_near}
        )
    return vd.inconclusive("line not stabilized at this tolerance")


def _lq_verdict(x: DoubleSeq, q: float, params: DetectParams) -> Verdict:
    if q < 1:
        raise ValueError("q must be >= 1")
    _require_depth(x, params)
    if x.family is not None and q == 1:
        facts = fam.family_abs_series(x.family, include_zero=True)
        if facts is not None and facts[0] == "diverges":
            idx = gridops.max_abs_index(x.data)
            return vd.fails(
                {"kind": "abs-divergence", "cell": list(idx), "analytic": "family |x| not summable"},
            )
        if facts is not None and facts[0] == "converges":
            total = gridops.sum_abs(x.data)
            bound = fam.family_region_tail_bound(x.family, x.K - 1, x.L - 1, start=0)
            est = LimitEstimate(
                total, max(params.epsilon, bound or 0.0), params.n0, float(bound or 0.0)
            )
            return vd.holds(est, reason="certified by family analytics")
    absq = gridops.abs_grid(x.data) ** q
    S = gridops.prefix_sums(absq)
    total = S[-1, -1]
    dev = total - S
    found = _stabilization(dev, params)
    if found is not None:
        N, res = found
        return vd.holds(LimitEstimate(total ** (1.0 / q), params.epsilon, N, res))
    growth = _growth_witness(
        DoubleSeq(S.astype(complex), "float"), params
    )
    if growth is not None:
        growth["kind"] = "partial-sum growth"
        return vd.fails(growth)
    return vd.inconclusive("partial sums of |x|^q not stabilized on this truncation")


# -- public operations ---------------------------------------------------------


def space_membership(
    x: DoubleSeq, space: str, params: DetectParams = DetectParams(), q: float = 1.0
) -> Verdict:
    """Membership verdict for the classical double-sequence spaces.

    space in {M_u, C_p, C_p0, C_bp, C_bp0, C_r, C_r0, L_q}; q applies to L_q.
    """
    if space == "M_u":
        return _bounded_verdict(x, params).named("x in M_u")
    if space == "L_q":
        return _lq_verdict(x, q, params).named(f"x in L_q(q={q})")
    if space in ("C_p", "C_p0"):
        v = _limit_verdict(x, params, force_zero=space.endswith("0"))
        return v.named(f"x in {space}")
    if space in ("C_bp", "C_bp0"):
        parts = {
            "pringsheim limit": _limit_verdict(x, params, force_zero=space.endswith("0")),
            "boundedness": _bounded_verdict(x, params),
        }
        return vd.conjoin(parts, question=f"x in {space}")
    if space in ("C_r", "C_r0"):
        parts = {
            "pringsheim limit": _limit_verdict(x, params, force_zero=space.endswith("0")),
            "boundedness": _bounded_verdict(x, params),
            "rows and columns": _rows_cols_verdict(x, params),
        }
        return vd.conjoin(parts, question=f"x in {space}")
    raise ValueError(f"unknown space {space!r}")


def cs_verdict(x: DoubleSeq, theta: str, params: DetectParams = DetectParams()) -> Verdict:
    """Is the double series sum x_kl ϑ-convergent?  Equals space_membership of
    the partial-sum grid by construction."""
    if theta not in THETAS:
        raise ValueError(f"theta must be one of {THETAS}")
    space = {"p": "C_p", "bp": "C_bp", "r": "C_r"}[theta]
    return space_membership(partial_sum_seq(x), space, params).named(
        f"series x in CS_{theta}"
    )


def series_theta_verdict(
    x: DoubleSeq, theta: str, params: DetectParams = DetectParams(),
    interior_only: bool = False,
) -> Verdict:
    """ϑ-convergence of the series with optional restriction to k,l >= 1."""
    if theta not in THETAS:
        raise ValueError(f"theta must be one of {THETAS}")
    space = {"p": "C_p", "bp": "C_bp", "r": "C_r"}[theta]
    return space_membership(partial_sum_seq(x, interior_only), space, params).named(
        f"series x in CS_{theta}" + (" (interior)" if interior_only else "")
    )


def series_abs_verdict(
    x: DoubleSeq, params: DetectParams = DetectParams(), interior_only: bool = False
) -> Verdict:
    """Absolute summability (L_u-style) with optional interior restriction."""
    if not interior_only:
        return _lq_verdict(x, 1.0, params).named("series |x| summable")
    if x.family is not None:
        facts = fam.family_abs_series(x.family, include_zero=False)
        if facts is not None and facts[0] == "diverges":
            sub = x.data[1:, 1:]
            idx = gridops.max_abs_index(sub)
            return vd.fails(
                {"kind": "abs-divergence", "cell": [idx[0] + 1, idx[1] + 1],
                 "analytic": "family |x| not summable on the interior"},
            ).named("series |x| summable (interior)")
        if facts is not None and facts[0] == "converges":
            total = gridops.sum_abs(x.data[1:, 1:])
            bound = fam.family_region_tail_bound(x.family, x.K - 1, x.L - 1, start=1)
            est = LimitEstimate(
                total, max(params.epsilon, bound or 0.0), params.n0, float(bound or 0.0)
            )
            return vd.holds(est, reason="certified by family analytics").named(
                "series |x| summable (interior)"
            )
    interior = DoubleSeq(x.data[1:, 1:].copy(), x.mode) if min(x.shape) > 2 else x
    return _lq_verdict(interior, 1.0, params).named("series |x| summable (interior)")


def bs_verdict(
    x: DoubleSeq, params: DetectParams = DetectParams(), interior_only: bool = False
) -> Verdict:
    """Are the rectangular partial sums bounded (BS membership)?"""
    S = partial_sum_seq(x, interior_only)
    return _bounded_verdict(S, params).named(
        "partial sums bounded" + (" (interior)" if interior_only else "")
    )


# -- norms ----------------------------------------------------------------------


def norm(x: DoubleSeq, which: str, q: float = 1.0, n0: int = 1):
    """Truncation value of the named norm/seminorm.

    sup and bs are exact in exact mode (Fraction) when the maximizing modulus
    is rational; bv and lq(1) are exact for real-rational grids.  All values
    are computed over the truncation only.
    """
    if which == "sup":
        return gridops.max_abs_value(x.data)
    if which == "cp_seminorm":
        if n0 >= min(x.shape):
            raise ValueError("n0 exceeds the truncation")
        return gridops.max_abs_value(x.data[n0:, n0:])
    if which == "bs":
        return gridops.max_abs_value(gridops.prefix_sums(x.data))
    if which == "bv":
        K, L = x.shape
        if x.mode == "exact":
            padded = np.empty((K + 1, L + 1), dtype=object)
            zero = coerce(0, "exact")
            padded[0, :] = [zero] * (L + 1)
            padded[:, 0] = [zero] * (K + 1)
        else:
            padded = np.zeros((K + 1, L + 1), dtype=complex)
        padded[1:, 1:] = x.data
        back = padded[1:, 1:] - padded[:-1, 1:] - padded[1:, :-1] + padded[:-1, :-1]
        return gridops.sum_abs(back)
    if which == "lq":
        if q < 1:
            raise ValueError("q must be >= 1")
        if q == 1:
            return gridops.sum_abs(x.data)
        total = float((gridops.abs_grid(x.data) ** q).sum())
        return total ** (1.0 / q)
    raise ValueError(f"unknown norm {which!r}")
