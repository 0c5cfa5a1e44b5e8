"""Wigner 3j and 6j symbols by the Racah sum formulas in exact rational arithmetic.

All factorial products and the alternating sums are carried as fractions.Fraction,
so the only floating-point step is the final square root; results are accurate to
a few ulp for the low angular momenta used here (j up to a few tens).
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache


def _as_two_j(value, name: str) -> int:
    """Validate a (half-)integer angular momentum argument, return 2*value as int."""
    two = 2.0 * float(value)
    rounded = round(two)
    if abs(two - rounded) > 1e-9:
        raise ValueError(f"{name} = {value} is not integer or half-integer")
    return int(rounded)


@lru_cache(maxsize=None)
def _fact(n: int) -> int:
    return math.factorial(n)


def _triangle_num(two_a: int, two_b: int, two_c: int) -> Fraction | None:
    """Triangle coefficient Delta(a b c)^2 as an exact Fraction, or None if violated."""
    s1 = (two_a + two_b - two_c) // 2
    s2 = (two_a - two_b + two_c) // 2
    s3 = (-two_a + two_b + two_c) // 2
    if (two_a + two_b - two_c) % 2 or s1 < 0 or s2 < 0 or s3 < 0:
        return None
    return Fraction(_fact(s1) * _fact(s2) * _fact(s3), _fact((two_a + two_b + two_c) // 2 + 1))


def _sqrt_fraction(value: Fraction) -> float:
    return math.sqrt(value.numerator) / math.sqrt(value.denominator)


def wigner3j(j1, j2, j3, m1, m2, m3) -> float:
    """Wigner 3j symbol (j1 j2 j3; m1 m2 m3).

    Returns 0.0 when selection rules forbid the symbol; raises ValueError for
    arguments that are not (half-)integers or with m not matching j parity.
    """
    tj1, tj2, tj3 = (_as_two_j(j, "j") for j in (j1, j2, j3))
    tm1, tm2, tm3 = (_as_two_j(m, "m") for m in (m1, m2, m3))
    if tj1 < 0 or tj2 < 0 or tj3 < 0:
        raise ValueError("angular momenta must be non-negative")
    for tj, tm in ((tj1, tm1), (tj2, tm2), (tj3, tm3)):
        if (tj + tm) % 2:
            raise ValueError("m must have the same parity as j")
        if abs(tm) > tj:
            return 0.0
    if tm1 + tm2 + tm3 != 0:
        return 0.0
    tri = _triangle_num(tj1, tj2, tj3)
    if tri is None:
        return 0.0

    # Racah sum over k; all factorial arguments are guaranteed integral here.
    k_min = max(0, (tj2 - tj3 - tm1) // 2, (tj1 - tj3 + tm2) // 2)
    k_max = min(
        (tj1 + tj2 - tj3) // 2,
        (tj1 - tm1) // 2,
        (tj2 + tm2) // 2,
    )
    if k_max < k_min:
        return 0.0
    total = Fraction(0)
    for k in range(k_min, k_max + 1):
        denom = (
            _fact(k)
            * _fact((tj1 + tj2 - tj3) // 2 - k)
            * _fact((tj1 - tm1) // 2 - k)
            * _fact((tj2 + tm2) // 2 - k)
            * _fact((tj3 - tj2 + tm1) // 2 + k)
            * _fact((tj3 - tj1 - tm2) // 2 + k)
        )
        total += Fraction(-1 if k % 2 else 1, denom)
    if total == 0:
        return 0.0
    radicand = tri * (
        _fact((tj1 + tm1) // 2) * _fact((tj1 - tm1) // 2)
        * _fact((tj2 + tm2) // 2) * _fact((tj2 - tm2) // 2)
        * _fact((tj3 + tm3) // 2) * _fact((tj3 - tm3) // 2)
    )
    phase = -1.0 if ((tj1 - tj2 - tm3) // 2) % 2 else 1.0
    return phase * _sqrt_fraction(radicand) * float(total)


def wigner6j(j1, j2, j3, j4, j5, j6) -> float:
    """Wigner 6j symbol {j1 j2 j3; j4 j5 j6}; 0.0 when any triad violates triangles."""
    tj = [_as_two_j(j, "j") for j in (j1, j2, j3, j4, j5, j6)]
    if any(t < 0 for t in tj):
        raise ValueError("angular momenta must be non-negative")
    t1, t2, t3, t4, t5, t6 = tj
    triads = (
        _triangle_num(t1, t2, t3),
        _triangle_num(t1, t5, t6),
        _triangle_num(t4, t2, t6),
        _triangle_num(t4, t5, t3),
    )
    if any(t is None for t in triads):
        return 0.0
    tri_product = triads[0] * triads[1] * triads[2] * triads[3]

    a1 = (t1 + t2 + t3) // 2
    a2 = (t1 + t5 + t6) // 2
    a3 = (t4 + t2 + t6) // 2
    a4 = (t4 + t5 + t3) // 2
    b1 = (t1 + t2 + t4 + t5) // 2
    b2 = (t2 + t3 + t5 + t6) // 2
    b3 = (t3 + t1 + t6 + t4) // 2
    total = Fraction(0)
    for k in range(max(a1, a2, a3, a4), min(b1, b2, b3) + 1):
        num = _fact(k + 1)
        denom = (
            _fact(k - a1) * _fact(k - a2) * _fact(k - a3) * _fact(k - a4)
            * _fact(b1 - k) * _fact(b2 - k) * _fact(b3 - k)
        )
        total += Fraction(-num if k % 2 else num, denom)
    if total == 0:
        return 0.0
    return _sqrt_fraction(tri_product) * float(total)
