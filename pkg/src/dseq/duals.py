"""Dual-set predicates and the dual-characterization harnesses.

The coefficient sets, all summed over k, l >= 1:

    D1: sum kl |a_kl| stabilizes            (weighted absolute summability)
    D2: sum kl a_kl is ϑ-convergent         (weighted ϑ-summability)
    D3: sup |sum_{k,l<=m,n} kl a_kl| bounded (weighted bounded partial sums)
    D4: sum |sum_{i>=k, j>=l} a_ij| stabilizes (absolutely summable tails)

Dual membership of a coefficient sequence is a universally quantified
statement ("for every x in the space ..."), which no finite computation can
decide.  The harness approximates the quantifier with a documented battery
of projected sample sequences (monomials of per-axis degree <= 1, basis
points, a geometric decay, a seeded random finite-support draw) and checks
the pairing {a_kl x_kl} against the target series space per sample.  The
dual theorems then become testable agreements: whenever both the D-set side
and the pairing side are decisive, they must match.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from . import families as fam
from . import gridops
from . import verdicts as vd
from .convergence import (
    _lq_verdict,
    bs_verdict,
    series_abs_verdict,
    series_theta_verdict,
)
from .diffops import project_interior
from .scalars import coerce
from .sequences import DoubleSeq, from_rows, hadamard, make_family, scale_by_index
from .verdicts import DetectParams, Verdict

DSET_IDS = ("D1", "D2", "D3", "D4")
DUAL_KINDS = ("alpha", "beta", "gamma")


def in_dset(
    a: DoubleSeq, dset: str, params: DetectParams = DetectParams(), theta: str = "bp"
) -> Verdict:
    """Membership verdict for the concrete coefficient sets D1-D4."""
    if dset == "D1":
        weighted = scale_by_index(a, "integral")
        return series_abs_verdict(weighted, params, interior_only=True).named("a in D1")
    if dset == "D2":
        weighted = scale_by_index(a, "integral")
        return series_theta_verdict(weighted, theta, params, interior_only=True).named(
            f"a in D2({theta})"
        )
    if dset == "D3":
        weighted = scale_by_index(a, "integral")
        return bs_verdict(weighted, params, interior_only=True).named("a in D3")
    if dset == "D4":
        return _d4_verdict(a, params).named("a in D4")
    raise ValueError(f"unknown D-set {dset!r}")


def _d4_verdict(a: DoubleSeq, params: DetectParams) -> Verdict:
    """sum_{k,l>=1} |R_kl| with R_kl the inclusive tail from (k, l).

    For sign-definite families the double tail sum telescopes back to the
    weighted series sum kl a_kl, so D4 inherits D1's analytic facts.
    """
    interior = fam.family_project(a.family) if a.family is not None else None
    if interior is not None and fam.family_sign_definite(interior):
        weighted = fam.family_scale_index(interior, "integral")
        facts = fam.family_abs_series(weighted, include_zero=False) if weighted else None
        if facts is not None and facts[0] == "diverges":
            return vd.fails(
                {"kind": "tail-divergence", "analytic": "sum kl|a| diverges and a is sign-definite"}
            )
        if facts is not None and facts[0] == "converges":
            incl = gridops.suffix_sums_inclusive(a.data)
            total = gridops.sum_abs(incl[1:, 1:])
            bound = fam.family_region_tail_bound(weighted, a.K - 1, a.L - 1, start=1)
            est = vd.LimitEstimate(
                total, max(params.epsilon, bound or 0.0), params.n0, float(bound or 0.0)
            )
            return vd.holds(est, reason="certified via the weighted series (sign-definite)")
    incl = gridops.suffix_sums_inclusive(a.data)
    tails = gridops.abs_grid(incl[1:, 1:]).astype(complex)
    seq = DoubleSeq(tails, "float", flags=("tail values truncated at the grid edge",))
    return _lq_verdict(seq, 1.0, params)


def delta_domain_battery(
    K: int, L: int, mode: str = "float", seed: int = 0, random_points: int = 3
):
    """Projected sample sequences lying in every P(λ(Δ)) under test.

    Monomials are capped at per-axis degree 1: higher powers push the
    forward difference across the zeroed boundary strip beyond any bound,
    so they are not members of the sampled spaces.
    """
    samples = [
        ("P(e)", project_interior(make_family("e", K, L, mode=mode))),
        ("P(k)", project_interior(make_family("monomial", K, L, a=1, b=0, mode=mode))),
        ("P(l)", project_interior(make_family("monomial", K, L, a=0, b=1, mode=mode))),
        ("P(kl)", project_interior(make_family("monomial", K, L, a=1, b=1, mode=mode))),
        (
            "P(2^-k 2^-l)",
            project_interior(
                make_family("geometric", K, L, r=Fraction(1, 2), s=Fraction(1, 2), mode=mode)
            ),
        ),
        ("e^{2,2}", make_family("e^kl", K, L, k=min(2, K - 1), l=min(2, L - 1), mode=mode)),
        ("P(boos)", project_interior(make_family("boos", K, L, mode=mode))),
    ]
    rng = random.Random(seed)
    pts = {}
    for _ in range(random_points):
        k = rng.randint(1, min(K - 1, 6))
        l = rng.randint(1, min(L - 1, 6))
        pts[(k, l)] = Fraction(rng.randint(-9, 9), rng.randint(1, 9))
    rows = [[pts.get((k, l), 0) for l in range(L)] for k in range(K)]
    rand = from_rows(rows, mode=mode).with_family(
        fam.FiniteSupport(tuple(sorted((pt, v) for pt, v in pts.items() if v != 0)))
    )
    samples.append(("random finite support", rand))
    return samples


def dual_membership(
    a: DoubleSeq,
    kind: str,
    samples,
    params: DetectParams = DetectParams(),
    theta: str = "bp",
) -> Verdict:
    """Direct definition check of dual membership over a sample battery.

    alpha: {a x} absolutely summable; beta: the series ϑ-converges;
    gamma: partial sums bounded -- for every sampled x.
    """
    if kind not in DUAL_KINDS:
        raise ValueError(f"unknown dual kind {kind!r}")
    if not samples:
        raise ValueError("empty sample battery")
    parts = {}
    for name, x in samples:
        z = hadamard(a, x)
        if kind == "alpha":
            parts[name] = series_abs_verdict(z, params, interior_only=True)
        elif kind == "beta":
            parts[name] = series_theta_verdict(z, theta, params, interior_only=True)
        else:
            parts[name] = bs_verdict(z, params, interior_only=True)
    label = {"alpha": "alpha", "beta": f"beta({theta})", "gamma": "gamma"}[kind]
    return vd.conjoin(parts, question=f"a in {label}-dual (battery of {len(parts)})")


def dset_side(
    a: DoubleSeq, kind: str, params: DetectParams = DetectParams(), theta: str = "bp"
) -> Verdict:
    """The D-set combination the dual theorems pair with each kind."""
    if kind == "alpha":
        return in_dset(a, "D1", params)
    if kind == "beta":
        return vd.conjoin(
            {"D2": in_dset(a, "D2", params, theta), "D4": in_dset(a, "D4", params)},
            question=f"a in D2({theta}) ∩ D4",
        )
    if kind == "gamma":
        return vd.conjoin(
            {"D3": in_dset(a, "D3", params), "D4": in_dset(a, "D4", params)},
            question="a in D3 ∩ D4",
        )
    raise ValueError(f"unknown dual kind {kind!r}")


@dataclass(frozen=True)
class HarnessRow:
    family: str
    kind: str
    dset: Verdict
    pairing: Verdict

    @property
    def decisive(self) -> bool:
        return self.dset.decisive and self.pairing.decisive

    @property
    def agrees(self) -> Optional[bool]:
        if not self.decisive:
            return None
        return self.dset.holds == self.pairing.holds

    def to_record(self) -> dict:
        return {
            "family": self.family,
            "kind": self.kind,
            "dset": self.dset.to_record(),
            "pairing": self.pairing.to_record(),
            "agreement": self.agrees,
        }


@dataclass(frozen=True)
class HarnessReport:
    rows: tuple

    @property
    def disagreements(self):
        return [r for r in self.rows if r.agrees is False]

    @property
    def decisive_count(self) -> int:
        return sum(1 for r in self.rows if r.decisive)

    def to_records(self):
        return [r.to_record() for r in self.rows]


def dual_theorem_harness(
    kinds,
    coefficient_families,
    sample_space,
    params: DetectParams = DetectParams(),
    theta: str = "bp",
) -> HarnessReport:
    """Cross-check D-set conjunctions against pairing-based dual membership.

    coefficient_families: iterable of (name, DoubleSeq).  Each decisive
    (D-side, pairing-side) pair must agree; Inconclusive pairs are reported,
    not failed.
    """
    rows = []
    for kind in kinds:
        for name, a in coefficient_families:
            d = dset_side(a, kind, params, theta)
            p = dual_membership(a, kind, sample_space, params, theta)
            rows.append(HarnessRow(name, kind, d, p))
    return HarnessReport(tuple(rows))


def default_coefficient_battery(K: int, L: int, mode: str = "float"):
    """The coefficient families exercised by the dual-theorem harness."""
    return [
        ("k^-3 l^-3", make_family("monomial", K, L, a=-3, b=-3, mode=mode)),
        ("k^-2 l^-2", make_family("monomial", K, L, a=-2, b=-2, mode=mode)),
        ("e^{1,1}", make_family("e^kl", K, L, k=1, l=1, mode=mode)),
        (
            "2^-k 2^-l",
            make_family("geometric", K, L, r=Fraction(1, 2), s=Fraction(1, 2), mode=mode),
        ),
    ]
