"""Closed-form sequence families and their analytic facts.

Verdicts on a finite grid can only say so much; when a sequence carries a
closed-form tag we can answer boundedness, limit and summability questions
analytically and attach honest tail bounds to truncated sums.  The algebra
here is deliberately small but closed under the operations the toolkit
applies to tagged sequences: pointwise products, index scaling (kl * x and
x / kl), the interior projection, and the forward-difference stencil.

The building block is a separable 1D factor

    f(n) = n**power * poly(n) * ratio**n

with ``power <= 0`` (nonnegative powers are absorbed into ``poly``) and exact
coefficients.  A 2D family is one of:

* ``Separable(fk, fl)``            -- x[k,l] = fk(k) * fl(l)
* ``Pieced(interior, row0, col0)`` -- separable interior, 1D closed forms on
                                      the first row/column, explicit corner
* ``RowLine`` / ``ColLine``        -- supported on a single row/column
* ``FiniteSupport``                -- finitely many nonzero entries

All analytic queries return ``None`` when the answer is not certified; the
grid-based detection protocols are the fallback in that case.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union

from .scalars import QC, abs_value, coerce

# --------------------------------------------------------------------------
# polynomial helpers (coefficients low -> high, exact numbers)
# --------------------------------------------------------------------------


def _trim(coeffs):
    c = list(coeffs)
    while len(c) > 1 and c[-1] == 0:
        c.pop()
    return tuple(c)


def polyval(coeffs, n):
    acc = 0
    for c in reversed(coeffs):
        acc = acc * n + c
    return acc


def polymul(a, b):
    out = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        for j, bj in enumerate(b):
            out[i + j] += ai * bj
    return _trim(out)


def polyadd(a, b):
    n = max(len(a), len(b))
    return _trim(tuple((a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0) for i in range(n)))


def polyscale(a, c):
    return _trim(tuple(c * ai for ai in a))


def polyshift(a):
    """Coefficients of p(n+1) given those of p(n)."""
    out = [0] * len(a)
    for i, ai in enumerate(a):
        for j in range(i + 1):
            out[j] += ai * math.comb(i, j)
    return _trim(out)


# --------------------------------------------------------------------------
# 1D factors
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Factor:
    power: int = 0          # <= 0 after normalization
    poly: tuple = (1,)      # exact coefficients, low -> high
    ratio: object = 1       # geometric base

    def __post_init__(self):
        object.__setattr__(self, "poly", _trim(self.poly))


ZERO_FACTOR = Factor(poly=(0,))
ONE_FACTOR = Factor()


def factor(c=1, power=0, ratio=1) -> Factor:
    """Normalized c * n**power * ratio**n."""
    if power > 0:
        poly = (0,) * power + (c,)
        return Factor(0, poly, ratio)
    return Factor(power, (c,), ratio)


def factor_is_zero(f: Factor) -> bool:
    return all(c == 0 for c in f.poly)


def _pow_scalar(base, n: int):
    if isinstance(base, QC):
        acc = QC(1)
        b = base
        e = n
        while e:
            if e & 1:
                acc = acc * b
            b = b * b
            e >>= 1
        return acc
    return base ** n


def factor_value(f: Factor, n: int):
    """Exact value at index n >= 0; n**power at n == 0 is taken as 0."""
    v = polyval(f.poly, n)
    if f.power:
        if n == 0:
            return 0
        v = v * Fraction(1, n ** (-f.power))
    if f.ratio != 1:
        v = v * _pow_scalar(f.ratio, n)
    return v


def factor_degree(f: Factor) -> int:
    return f.power + len(f.poly) - 1


def factor_lead(f: Factor):
    return f.poly[-1]


def _ratio_abs(f: Factor):
    return abs_value(f.ratio) if not isinstance(f.ratio, (int, Fraction)) else abs(f.ratio)


def _abs_coeff_sum(f: Factor) -> float:
    return float(sum(float(abs_value(c)) for c in f.poly))


def factor_mul(a: Factor, b: Factor) -> Factor:
    return Factor(a.power + b.power, polymul(a.poly, b.poly), a.ratio * b.ratio)


def factor_scale(a: Factor, c) -> Factor:
    return Factor(a.power, polyscale(a.poly, c), a.ratio)


def factor_mul_n(a: Factor) -> Factor:
    """Multiply by the index n."""
    if a.power < 0:
        return Factor(a.power + 1, a.poly, a.ratio)
    return Factor(0, (0,) + a.poly, a.ratio)


def factor_div_n(a: Factor) -> Factor:
    """Divide by the index n (value at n = 0 becomes the 0 convention)."""
    if a.power == 0 and len(a.poly) > 1 and a.poly[0] == 0:
        return Factor(0, a.poly[1:], a.ratio)
    return Factor(a.power - 1, a.poly, a.ratio)


def factor_sub(a: Factor, b: Factor) -> Optional[Factor]:
    """a - b when representable (requires matching ratio and power)."""
    if factor_is_zero(b):
        return a
    if factor_is_zero(a):
        return factor_scale(b, -1)
    if a.ratio != b.ratio or a.power != b.power:
        return None
    return Factor(a.power, polyadd(a.poly, polyscale(b.poly, -1)), a.ratio)


def factor_delta(f: Factor) -> Optional[Factor]:
    """Forward difference f(n) - f(n+1); needs power == 0."""
    if factor_is_zero(f):
        return ZERO_FACTOR
    if f.power != 0:
        return None
    shifted = polyshift(f.poly)  # p(n+1)
    if f.ratio == 1:
        return Factor(0, polyadd(f.poly, polyscale(shifted, -1)), 1)
    # p(n) r^n - p(n+1) r^(n+1) = [p(n) - r p(n+1)] r^n
    return Factor(0, polyadd(f.poly, polyscale(shifted, -f.ratio)), f.ratio)


# -- 1D limit and series facts ----------------------------------------------

# limit kinds: ("zero",) ("const", c) ("unbounded",) ("osc_bounded",) ("osc_unbounded",) or None


def factor_limit(f: Factor):
    if factor_is_zero(f):
        return ("zero",)
    ra = _ratio_abs(f)
    deg = factor_degree(f)
    if ra < 1:
        return ("zero",)
    if ra == 1:
        if f.ratio == 1:
            if deg < 0:
                return ("zero",)
            if deg == 0:
                return ("const", factor_lead(f))
            return ("unbounded",)
        # unit modulus, non-trivial phase
        if deg < 0:
            return ("zero",)
        if deg == 0:
            return ("osc_bounded",)
        return ("osc_unbounded",)
    return ("unbounded",)


def factor_bounded(f: Factor) -> Optional[bool]:
    kind = factor_limit(f)
    if kind is None:
        return None
    return kind[0] in ("zero", "const", "osc_bounded")


def factor_converges(f: Factor) -> Optional[bool]:
    """Does f(n) converge as a single sequence?"""
    kind = factor_limit(f)
    if kind is None:
        return None
    return kind[0] in ("zero", "const")


def _real_poly(f: Factor) -> bool:
    return all(isinstance(c, (int, Fraction)) for c in f.poly)


def factor_abs_series(f: Factor, start: int = 1):
    """Facts about sum_{n >= start} |f(n)|.

    Returns ("converges", tail_fn) with tail_fn(m) an upper bound on the sum
    over n > m (valid for m >= start), ("diverges", None), or None.
    """
    if factor_is_zero(f):
        return ("converges", lambda m: 0.0)
    ra = float(_ratio_abs(f))
    deg = factor_degree(f)
    C = _abs_coeff_sum(f)
    if ra < 1:
        d = max(deg, 0)

        def tail(m, _C=C, _d=d, _ra=ra):
            rho = _ra * ((m + 2) / (m + 1)) ** _d
            if rho >= 1:
                return math.inf
            return _C * (m + 1) ** _d * _ra ** (m + 1) / (1 - rho)

        return ("converges", tail)
    if ra == 1:
        if deg < -1:
            def tail(m, _C=C, _deg=deg):
                return _C * m ** (_deg + 1) / (-_deg - 1)

            return ("converges", tail)
        return ("diverges", None)
    return ("diverges", None)


def factor_signed_series(f: Factor, start: int = 1):
    """ϑ-independent facts about sum_{n >= start} f(n): "converges"/"diverges"/None."""
    facts = factor_abs_series(f, start)
    if facts is not None and facts[0] == "converges":
        return ("converges", facts[1])
    if factor_is_zero(f):
        return ("converges", lambda m: 0.0)
    ra = _ratio_abs(f)
    deg = factor_degree(f)
    if ra == 1 and f.ratio == 1 and _real_poly(f):
        # eventually sign-definite terms bounded below by ~n^deg, deg >= -1
        return ("diverges", None)
    if f.ratio == -1 and _real_poly(f):
        if deg < 0:
            def tail(m, _C=_abs_coeff_sum(f), _deg=deg):
                return _C * (m + 1) ** _deg

            return ("converges", tail)  # alternating, terms -> 0 monotonically in bound
        return ("diverges", None)
    if ra > 1:
        return ("diverges", None)  # terms unbounded
    return None


def factor_series_value(f: Factor, start: int, upto: int, mode: str = "float"):
    """Explicit partial sum of f over [start, upto]."""
    total = coerce(0, mode)
    for n in range(start, upto + 1):
        total = total + coerce(factor_value(f, n), mode)
    return total


def factor_abs_partial(f: Factor, start: int, upto: int) -> float:
    return sum(float(abs_value(factor_value(f, n))) for n in range(start, upto + 1))


# --------------------------------------------------------------------------
# 2D families
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Separable:
    fk: Factor
    fl: Factor


@dataclass(frozen=True)
class Pieced:
    interior: Optional[Separable]   # values on k,l >= 1
    row0: Optional[Factor] = None   # value at (0, l), l >= 1
    col0: Optional[Factor] = None   # value at (k, 0), k >= 1
    corner: object = 0              # value at (0, 0)


@dataclass(frozen=True)
class RowLine:
    k0: int
    lfac: Factor = ONE_FACTOR       # value at (k0, l) = lfac(l)


@dataclass(frozen=True)
class ColLine:
    l0: int
    kfac: Factor = ONE_FACTOR


@dataclass(frozen=True)
class FiniteSupport:
    points: tuple                   # tuple of ((k, l), exact value)


@dataclass(frozen=True)
class PrefixGrid:
    """Tag for grids of rectangular partial sums of a tagged sequence.

    Attached by partial-sum constructions so that limit questions about the
    sum grid reduce to series facts about the underlying terms.
    """

    of: object                      # Family of the summed terms
    interior_only: bool = False     # sums over k,l >= 1 only


Family = Union[Separable, Pieced, RowLine, ColLine, FiniteSupport, PrefixGrid]

BOOS = Pieced(interior=None, row0=Factor(poly=(0, 1)), col0=None, corner=0)


def constant(c) -> Separable:
    return Separable(factor(c), ONE_FACTOR)


def monomial(a: int, b: int) -> Separable:
    return Separable(factor(1, power=a), factor(1, power=b))


def geometric(r, s) -> Separable:
    return Separable(factor(1, ratio=r), factor(1, ratio=s))


def basis_point(k0: int, l0: int) -> FiniteSupport:
    return FiniteSupport((((k0, l0), 1),))


ZERO_FAMILY = constant(0)


def family_value(fam: Family, k: int, l: int):
    """Exact closed-form value at (k, l)."""
    if isinstance(fam, PrefixGrid):
        start = 1 if fam.interior_only else 0
        total = 0
        for i in range(start, k + 1):
            for j in range(start, l + 1):
                total = total + family_value(fam.of, i, j)
        return total
    if isinstance(fam, Separable):
        return factor_value(fam.fk, k) * factor_value(fam.fl, l)
    if isinstance(fam, Pieced):
        if k == 0 and l == 0:
            return fam.corner
        if k == 0:
            return factor_value(fam.row0, l) if fam.row0 is not None else 0
        if l == 0:
            return factor_value(fam.col0, k) if fam.col0 is not None else 0
        if fam.interior is None:
            return 0
        return family_value(fam.interior, k, l)
    if isinstance(fam, RowLine):
        return factor_value(fam.lfac, l) if k == fam.k0 else 0
    if isinstance(fam, ColLine):
        return factor_value(fam.kfac, k) if l == fam.l0 else 0
    if isinstance(fam, FiniteSupport):
        for (pk, pl), v in fam.points:
            if pk == k and pl == l:
                return v
        return 0
    raise TypeError(f"unknown family {fam!r}")


def family_has_negative_power(fam: Family) -> bool:
    if isinstance(fam, Separable):
        return fam.fk.power < 0 or fam.fl.power < 0
    if isinstance(fam, Pieced):
        return fam.interior is not None and family_has_negative_power(fam.interior)
    return False


# -- boundedness / limits ----------------------------------------------------


def _sep_bounded(sep: Separable) -> Optional[bool]:
    if factor_is_zero(sep.fk) or factor_is_zero(sep.fl):
        return True
    bk, bl = factor_bounded(sep.fk), factor_bounded(sep.fl)
    if bk is None or bl is None:
        return None
    return bk and bl


def family_bounded(fam: Family) -> Optional[bool]:
    if isinstance(fam, PrefixGrid):
        facts = family_signed_series(fam.of, include_zero=not fam.interior_only)
        if facts is None:
            return None
        if facts[0] == "converges":
            return True
        return False  # sign-definite divergence: partial sums unbounded
    if isinstance(fam, Separable):
        return _sep_bounded(fam)
    if isinstance(fam, Pieced):
        parts = []
        if fam.interior is not None:
            parts.append(_sep_bounded(fam.interior))
        if fam.row0 is not None:
            parts.append(factor_bounded(fam.row0))
        if fam.col0 is not None:
            parts.append(factor_bounded(fam.col0))
        if any(p is False for p in parts):
            return False
        if any(p is None for p in parts):
            return None
        return True
    if isinstance(fam, RowLine):
        return factor_bounded(fam.lfac)
    if isinstance(fam, ColLine):
        return factor_bounded(fam.kfac)
    if isinstance(fam, FiniteSupport):
        return True
    return None


def family_p_limit(fam: Family):
    """Pringsheim limit over the corner regions {m,n >= N}.

    Returns ("exists", L), ("unbounded",), ("oscillates",), or None.
    L is None when the limit is certified to exist but its value is not
    analytically available (partial-sum grids).
    """
    if isinstance(fam, PrefixGrid):
        facts = family_signed_series(fam.of, include_zero=not fam.interior_only)
        if facts is None:
            return None
        if facts[0] == "converges":
            return ("exists", None)
        return ("unbounded",)
    if isinstance(fam, (RowLine, ColLine, FiniteSupport)):
        return ("exists", 0)
    if isinstance(fam, Pieced):
        if fam.interior is None:
            return ("exists", 0)
        return family_p_limit(fam.interior)
    if not isinstance(fam, Separable):
        return None
    if factor_is_zero(fam.fk) or factor_is_zero(fam.fl):
        return ("exists", 0)
    ka, la = factor_limit(fam.fk), factor_limit(fam.fl)
    if ka is None or la is None:
        return None
    kinds = {ka[0], la[0]}
    if kinds <= {"zero", "const"}:
        lk = 0 if ka[0] == "zero" else ka[1]
        ll = 0 if la[0] == "zero" else la[1]
        return ("exists", lk * ll)
    if "zero" in kinds:
        other = la if ka[0] == "zero" else ka
        if other[0] == "osc_bounded":
            return ("exists", 0)
        # zero * unbounded: corner sup is infinite along the growing axis
        return ("unbounded",)
    if "unbounded" in kinds or "osc_unbounded" in kinds:
        return ("unbounded",)
    return ("oscillates",)


def family_rows_cols_converge(fam: Family) -> Optional[bool]:
    """Do all rows and all columns converge as single sequences?"""
    if isinstance(fam, PrefixGrid):
        ax_k = family_axis_signed_series(fam.of, 0, include_zero=not fam.interior_only)
        ax_l = family_axis_signed_series(fam.of, 1, include_zero=not fam.interior_only)
        if ax_k is None or ax_l is None:
            return None
        if ax_k[0] == "converges" and ax_l[0] == "converges":
            return True
        return False
    if isinstance(fam, FiniteSupport):
        return True
    if isinstance(fam, RowLine):
        return factor_converges(fam.lfac)
    if isinstance(fam, ColLine):
        return factor_converges(fam.kfac)
    if isinstance(fam, Separable):
        if factor_is_zero(fam.fk) or factor_is_zero(fam.fl):
            return True
        ck, cl = factor_converges(fam.fk), factor_converges(fam.fl)
        if ck is None or cl is None:
            return None
        return ck and cl
    if isinstance(fam, Pieced):
        parts = []
        if fam.interior is not None:
            parts.append(family_rows_cols_converge(fam.interior))
        if fam.row0 is not None:
            parts.append(factor_converges(fam.row0))
        if fam.col0 is not None:
            parts.append(factor_converges(fam.col0))
        if any(p is False for p in parts):
            return False
        if any(p is None for p in parts):
            return None
        return True
    return None


def family_axis_signed_series(fam: Family, axis: int, include_zero: bool = False):
    """Convergence facts for the 1D series along one axis (0 = k, 1 = l).

    Answers whether rows (axis 1) / columns (axis 0) of the partial-sum grid
    converge.  Returns ("converges", _), ("diverges", _), or None.
    """
    start = 0 if include_zero else 1
    if isinstance(fam, FiniteSupport):
        return ("converges", None)
    if isinstance(fam, RowLine):
        return factor_signed_series(fam.lfac, start) if axis == 1 else ("converges", None)
    if isinstance(fam, ColLine):
        return factor_signed_series(fam.kfac, start) if axis == 0 else ("converges", None)
    if isinstance(fam, Separable):
        own = fam.fk if axis == 0 else fam.fl
        other = fam.fl if axis == 0 else fam.fk
        if factor_is_zero(own) or factor_is_zero(other):
            return ("converges", None)
        return factor_signed_series(own, start)
    if isinstance(fam, Pieced):
        parts = []
        if fam.interior is not None:
            parts.append(family_axis_signed_series(fam.interior, axis, include_zero=False))
        if include_zero:
            strip = fam.row0 if axis == 1 else fam.col0
            if strip is not None:
                parts.append(factor_signed_series(strip, 1))
        if not parts:
            return ("converges", None)
        if any(p is None for p in parts):
            return None
        if all(p[0] == "converges" for p in parts):
            return ("converges", None)
        if any(p[0] == "diverges" for p in parts) and all(
            p[0] in ("converges", "diverges") for p in parts
        ):
            # divergent part plus convergent parts cannot cancel
            if sum(1 for p in parts if p[0] == "diverges") == 1:
                return ("diverges", None)
        return None
    return None


# -- series facts ------------------------------------------------------------


def _combine_product_series(a, b):
    """Series facts for a product of independent 1D sums."""
    if a is None or b is None:
        return None
    if a[0] == "converges" and b[0] == "converges":
        return ("converges", (a[1], b[1]))
    if a[0] == "diverges" or b[0] == "diverges":
        return ("diverges", None)
    return None


def family_abs_series(fam: Family, include_zero: bool = False):
    """Facts about sum |x_kl| over k,l >= 1 (or over all k,l).

    Returns ("converges", tailinfo), ("diverges", None), or None.  For
    separable families tailinfo is the pair of 1D tail functions.
    """
    if isinstance(fam, FiniteSupport):
        return ("converges", None)
    if isinstance(fam, RowLine):
        if not include_zero and fam.k0 == 0:
            return ("converges", None)
        facts = factor_abs_series(fam.lfac, start=0 if include_zero else 1)
        return (facts[0], None) if facts else None
    if isinstance(fam, ColLine):
        if not include_zero and fam.l0 == 0:
            return ("converges", None)
        facts = factor_abs_series(fam.kfac, start=0 if include_zero else 1)
        return (facts[0], None) if facts else None
    if isinstance(fam, Pieced):
        interior = (
            ("converges", None)
            if fam.interior is None
            else family_abs_series(fam.interior, include_zero=False)
        )
        if not include_zero:
            return interior
        strips = []
        if fam.row0 is not None:
            strips.append(factor_abs_series(fam.row0, start=1))
        if fam.col0 is not None:
            strips.append(factor_abs_series(fam.col0, start=1))
        parts = [interior] + strips
        if any(p is None for p in parts):
            return None
        if any(p[0] == "diverges" for p in parts):
            return ("diverges", None)
        return ("converges", None)
    if isinstance(fam, Separable):
        if factor_is_zero(fam.fk) or factor_is_zero(fam.fl):
            return ("converges", (lambda m: 0.0, lambda m: 0.0))
        start = 0 if include_zero else 1
        a = factor_abs_series(fam.fk, start=start)
        b = factor_abs_series(fam.fl, start=start)
        return _combine_product_series(a, b)
    return None


def family_signed_series(fam: Family, include_zero: bool = False):
    """ϑ-independent convergence facts for sum x_kl (rectangular sense)."""
    facts = family_abs_series(fam, include_zero)
    if facts is not None and facts[0] == "converges":
        return ("converges", facts[1])
    if facts is not None and facts[0] == "diverges" and _family_sign_definite(fam):
        return ("diverges", None)
    if isinstance(fam, Separable):
        if factor_is_zero(fam.fk) or factor_is_zero(fam.fl):
            return ("converges", None)
        start = 0 if include_zero else 1
        a = factor_signed_series(fam.fk, start)
        b = factor_signed_series(fam.fl, start)
        if a is None or b is None:
            return None
        if a[0] == "converges" and b[0] == "converges":
            return ("converges", None)
        if a[0] == "diverges" and b[0] == "diverges" and _family_sign_definite(fam):
            return ("diverges", None)
        # one factor's series diverges: the outcome depends on the other's
        # limit being nonzero, which is not certified in general
        return None
    return None


def family_sign_definite(fam: Family) -> bool:
    """All nonzero values share one sign (real families); False when unknown."""
    return _family_sign_definite(fam)


def _family_sign_definite(fam: Family) -> bool:
    if isinstance(fam, Separable):
        return _factor_sign_definite(fam.fk) and _factor_sign_definite(fam.fl)
    if isinstance(fam, Pieced):
        strips_zero = fam.row0 is None and fam.col0 is None and fam.corner == 0
        return strips_zero and fam.interior is not None and _family_sign_definite(fam.interior)
    if isinstance(fam, (RowLine,)):
        return _factor_sign_definite(fam.lfac)
    if isinstance(fam, (ColLine,)):
        return _factor_sign_definite(fam.kfac)
    return False


def _factor_sign_definite(f: Factor) -> bool:
    if not _real_poly(f) or not isinstance(f.ratio, (int, Fraction)):
        return False
    if f.ratio < 0:
        return False
    nz = [c for c in f.poly if c != 0]
    return bool(nz) and (all(c > 0 for c in nz) or all(c < 0 for c in nz))


def family_tail_bound(fam: Family, m: int, n: int) -> Optional[float]:
    """Upper bound on sum |x_kl| over k > m, l > n (both >= 1)."""
    if isinstance(fam, FiniteSupport):
        return float(
            sum(float(abs_value(v)) for (pk, pl), v in fam.points if pk > m and pl > n)
        )
    if isinstance(fam, Pieced):
        if fam.interior is None:
            return 0.0
        return family_tail_bound(fam.interior, m, n)
    if isinstance(fam, RowLine):
        if fam.k0 <= m:
            return 0.0
        facts = factor_abs_series(fam.lfac)
        if facts and facts[0] == "converges" and facts[1] is not None:
            return facts[1](max(n, 1))
        return None
    if isinstance(fam, ColLine):
        if fam.l0 <= n:
            return 0.0
        facts = factor_abs_series(fam.kfac)
        if facts and facts[0] == "converges" and facts[1] is not None:
            return facts[1](max(m, 1))
        return None
    if isinstance(fam, Separable):
        a = factor_abs_series(fam.fk)
        b = factor_abs_series(fam.fl)
        if not a or not b or a[0] != "converges" or b[0] != "converges":
            return None
        if a[1] is None or b[1] is None:
            return None
        return a[1](max(m, 1)) * b[1](max(n, 1))
    return None


def family_region_tail_bound(fam: Family, m: int, n: int, start: int = 1) -> Optional[float]:
    """Upper bound on sum |x_kl| over the L-shaped region outside [start..m]x[start..n]."""
    if isinstance(fam, FiniteSupport):
        return float(
            sum(
                float(abs_value(v))
                for (pk, pl), v in fam.points
                if (pk > m or pl > n) and pk >= start and pl >= start
            )
        )
    if isinstance(fam, Pieced):
        inner = 0.0
        if fam.interior is not None:
            r = family_region_tail_bound(fam.interior, m, n, start=max(start, 1))
            if r is None:
                return None
            inner = r
        if start >= 1:
            return inner
        strips = 0.0
        for strip, upto in ((fam.row0, n), (fam.col0, m)):
            if strip is None:
                continue
            facts = factor_abs_series(strip)
            if not facts or facts[0] != "converges" or facts[1] is None:
                return None
            strips += facts[1](max(upto, 1))
        return inner + strips
    if isinstance(fam, Separable):
        a = factor_abs_series(fam.fk, start=max(start, 0) or 1)
        b = factor_abs_series(fam.fl, start=max(start, 0) or 1)
        if not a or not b or a[0] != "converges" or b[0] != "converges":
            return None
        if a[1] is None or b[1] is None:
            return None
        sk = factor_abs_partial(fam.fk, start, m) + a[1](m)
        sl = factor_abs_partial(fam.fl, start, n) + b[1](n)
        return a[1](m) * sl + sk * b[1](n)
    if isinstance(fam, (RowLine, ColLine)):
        return family_tail_bound(fam, 0, 0)  # crude: whole line when it may poke out
    return None


def family_prefix_residual(fam: "PrefixGrid", m: int, n: int) -> Optional[float]:
    """Upper bound on |full sum - partial sum up to (m, n)| for a tagged prefix grid."""
    start = 1 if fam.interior_only else 0
    return family_region_tail_bound(fam.of, m, n, start=start)


# -- transforms ---------------------------------------------------------------


def family_project(fam: Optional[Family]) -> Optional[Family]:
    """Zero the first row and column."""
    if fam is None:
        return None
    if isinstance(fam, Separable):
        return Pieced(interior=fam)
    if isinstance(fam, Pieced):
        return Pieced(interior=fam.interior)
    if isinstance(fam, RowLine):
        return ZERO_FAMILY if fam.k0 == 0 else fam
    if isinstance(fam, ColLine):
        return ZERO_FAMILY if fam.l0 == 0 else fam
    if isinstance(fam, FiniteSupport):
        return FiniteSupport(tuple(p for p in fam.points if p[0][0] >= 1 and p[0][1] >= 1))
    return None


def family_scale(fam: Optional[Family], c) -> Optional[Family]:
    if fam is None:
        return None
    if isinstance(fam, Separable):
        return Separable(factor_scale(fam.fk, c), fam.fl)
    if isinstance(fam, Pieced):
        return Pieced(
            interior=None if fam.interior is None else family_scale(fam.interior, c),
            row0=None if fam.row0 is None else factor_scale(fam.row0, c),
            col0=None if fam.col0 is None else factor_scale(fam.col0, c),
            corner=c * fam.corner,
        )
    if isinstance(fam, RowLine):
        return RowLine(fam.k0, factor_scale(fam.lfac, c))
    if isinstance(fam, ColLine):
        return ColLine(fam.l0, factor_scale(fam.kfac, c))
    if isinstance(fam, FiniteSupport):
        return FiniteSupport(tuple((pt, c * v) for pt, v in fam.points))
    return None


def family_hadamard(f1: Optional[Family], f2: Optional[Family]) -> Optional[Family]:
    """Pointwise product family, when representable."""
    if f1 is None or f2 is None:
        return None
    if isinstance(f1, FiniteSupport):
        return FiniteSupport(
            tuple((pt, v * family_value(f2, *pt)) for pt, v in f1.points)
        )
    if isinstance(f2, FiniteSupport):
        return family_hadamard(f2, f1)
    if isinstance(f1, Separable) and isinstance(f2, Separable):
        return Separable(factor_mul(f1.fk, f2.fk), factor_mul(f1.fl, f2.fl))
    if isinstance(f1, RowLine) and isinstance(f2, Separable):
        c = factor_value(f2.fk, f1.k0)
        return RowLine(f1.k0, factor_scale(factor_mul(f1.lfac, f2.fl), c))
    if isinstance(f2, RowLine):
        return family_hadamard(f2, f1) if isinstance(f1, Separable) else None
    if isinstance(f1, ColLine) and isinstance(f2, Separable):
        c = factor_value(f2.fl, f1.l0)
        return ColLine(f1.l0, factor_scale(factor_mul(f1.kfac, f2.fk), c))
    if isinstance(f2, ColLine):
        return family_hadamard(f2, f1) if isinstance(f1, Separable) else None
    if isinstance(f1, Pieced) and isinstance(f2, Separable):
        interior = None
        if f1.interior is not None:
            interior = family_hadamard(f1.interior, f2)
        row0 = None
        if f1.row0 is not None:
            row0 = factor_scale(factor_mul(f1.row0, f2.fl), factor_value(f2.fk, 0))
        col0 = None
        if f1.col0 is not None:
            col0 = factor_scale(factor_mul(f1.col0, f2.fk), factor_value(f2.fl, 0))
        corner = f1.corner * factor_value(f2.fk, 0) * factor_value(f2.fl, 0)
        return Pieced(interior, row0, col0, corner)
    if isinstance(f2, Pieced):
        return family_hadamard(f2, f1) if isinstance(f1, Separable) else None
    return None


def family_add_const_multiple(f1: Optional[Family], f2: Optional[Family], c1=1, c2=1):
    """c1*f1 + c2*f2 for same-shape separable/finite families, else None."""
    if f1 is None or f2 is None:
        return None
    if isinstance(f1, FiniteSupport) and isinstance(f2, FiniteSupport):
        acc = {}
        for pt, v in f1.points:
            acc[pt] = acc.get(pt, 0) + c1 * v
        for pt, v in f2.points:
            acc[pt] = acc.get(pt, 0) + c2 * v
        return FiniteSupport(tuple((pt, v) for pt, v in sorted(acc.items()) if v != 0))
    return None


def family_scale_index(fam: Optional[Family], direction: str) -> Optional[Family]:
    """integral: x -> kl*x; d: x -> x/(kl) on the interior (boundary passthrough)."""
    if fam is None:
        return None
    if direction == "integral":
        if isinstance(fam, Separable):
            return Pieced(interior=Separable(factor_mul_n(fam.fk), factor_mul_n(fam.fl)))
        if isinstance(fam, Pieced):
            if fam.interior is None:
                return Pieced(interior=None)
            return Pieced(interior=Separable(factor_mul_n(fam.interior.fk), factor_mul_n(fam.interior.fl)))
        if isinstance(fam, RowLine):
            if fam.k0 == 0:
                return ZERO_FAMILY
            return RowLine(fam.k0, factor_scale(factor_mul_n(fam.lfac), fam.k0))
        if isinstance(fam, ColLine):
            if fam.l0 == 0:
                return ZERO_FAMILY
            return ColLine(fam.l0, factor_scale(factor_mul_n(fam.kfac), fam.l0))
        if isinstance(fam, FiniteSupport):
            return FiniteSupport(tuple(((k, l), k * l * v) for (k, l), v in fam.points))
        return None
    if direction == "d":
        if isinstance(fam, Separable):
            # boundary entries pass through unchanged
            return Pieced(
                interior=Separable(factor_div_n(fam.fk), factor_div_n(fam.fl)),
                row0=factor_scale(fam.fl, factor_value(fam.fk, 0)),
                col0=factor_scale(fam.fk, factor_value(fam.fl, 0)),
                corner=factor_value(fam.fk, 0) * factor_value(fam.fl, 0),
            )
        if isinstance(fam, Pieced):
            interior = None
            if fam.interior is not None:
                interior = Separable(factor_div_n(fam.interior.fk), factor_div_n(fam.interior.fl))
            return Pieced(interior, fam.row0, fam.col0, fam.corner)
        if isinstance(fam, FiniteSupport):
            return FiniteSupport(
                tuple(
                    ((k, l), Fraction(1, k * l) * v if k >= 1 and l >= 1 else v)
                    for (k, l), v in fam.points
                )
            )
        return None
    raise ValueError(f"unknown direction {direction!r}")


def family_delta(fam: Optional[Family]) -> Optional[Family]:
    """Family of the forward difference y_kl = x_kl - x_{k+1,l} - x_{k,l+1} + x_{k+1,l+1}."""
    if fam is None:
        return None
    if isinstance(fam, Separable):
        dk, dl = factor_delta(fam.fk), factor_delta(fam.fl)
        if dk is None or dl is None:
            return None
        return Separable(dk, dl)
    if isinstance(fam, FiniteSupport):
        acc = {}
        for (k, l), v in fam.points:
            for dk, dl, sgn in ((0, 0, 1), (-1, 0, -1), (0, -1, -1), (-1, -1, 1)):
                kk, ll = k + dk, l + dl
                if kk >= 0 and ll >= 0:
                    acc[(kk, ll)] = acc.get((kk, ll), 0) + sgn * v
        return FiniteSupport(tuple((pt, v) for pt, v in sorted(acc.items()) if v != 0))
    if isinstance(fam, Pieced):
        f = fam.interior.fk if fam.interior is not None else ZERO_FACTOR
        g = fam.interior.fl if fam.interior is not None else ZERO_FACTOR
        if f.power < 0 or g.power < 0:
            return None
        df, dg = factor_delta(f), factor_delta(g)
        h = fam.row0 if fam.row0 is not None else ZERO_FACTOR
        u = fam.col0 if fam.col0 is not None else ZERO_FACTOR
        dh, du = factor_delta(h), factor_delta(u)
        if None in (df, dg, dh, du):
            return None
        f1 = factor_value(f, 1)
        g1 = factor_value(g, 1)
        # interior of the difference
        interior = Separable(df, dg)
        # (0, l): Δrow0(l) - f(1) Δg(l),   (k, 0): Δcol0(k) - Δf(k) g(1)
        row0 = factor_sub(dh, factor_scale(dg, f1))
        col0 = factor_sub(du, factor_scale(df, g1))
        if row0 is None or col0 is None:
            return None
        corner = (
            fam.corner
            - factor_value(u, 1)
            - factor_value(h, 1)
            + f1 * g1
        )
        return Pieced(interior, row0, col0, corner)
    return None
