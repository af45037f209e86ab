"""Straight-line reference implementations used as oracles in tests.

Pure Python, no numpy. Every accumulation runs over the data in
reverse, so the floating-point rounding path is independent of the
library's vectorized kernels; agreement is asserted to tolerance, not
by construction.
"""

from __future__ import annotations

import math
from statistics import NormalDist

_NORMAL = NormalDist()


def rsum(values) -> float:
    """Sum accumulated in reverse order."""
    total = 0.0
    for v in reversed(list(values)):
        total += v
    return total


def ref_mean(values) -> float:
    values = list(values)
    return rsum(values) / len(values)


def ref_sd(values) -> float:
    """Population standard deviation (divide by n)."""
    values = list(values)
    m = ref_mean(values)
    return math.sqrt(rsum((v - m) ** 2 for v in values) / len(values))


def ref_pearson(xs, ys) -> float:
    """Population Pearson correlation of two equal-length lists."""
    xs, ys = list(xs), list(ys)
    if len(xs) != len(ys):
        raise ValueError("length mismatch")
    mx, my = ref_mean(xs), ref_mean(ys)
    sx, sy = ref_sd(xs), ref_sd(ys)
    cov = rsum((x - mx) * (y - my) for x, y in zip(xs, ys)) / len(xs)
    return cov / (sx * sy)


def ref_omega_indices(values, h: float) -> list[int]:
    """Indices where |value - mean| >= h * sd (boundary included)."""
    values = list(values)
    m, s = ref_mean(values), ref_sd(values)
    return [i for i, v in enumerate(values) if abs(v - m) >= h * s]


def ref_constrained(xs, ys, h: float) -> float:
    """Correlation of xs and ys over xs' volatile indices."""
    keep = ref_omega_indices(xs, h)
    return ref_pearson([xs[i] for i in keep], [ys[i] for i in keep])


def ref_delta_f(xs, ys, h: float) -> float:
    """Constrained correlation conditioning on xs minus conditioning on ys."""
    return ref_constrained(xs, ys, h) - ref_constrained(ys, xs, h)


def ref_rate_own(levels) -> list[float]:
    levels = list(levels)
    return [(levels[t + 1] - levels[t]) / levels[t] for t in range(len(levels) - 1)]


def ref_rate_other(levels, denominators) -> list[float]:
    levels, denominators = list(levels), list(denominators)
    return [
        (levels[t + 1] - levels[t]) / denominators[t] for t in range(len(levels) - 1)
    ]


def ref_z(e: float, s: float, n: int) -> float:
    return e * math.sqrt(n) / s


def ref_p(z: float) -> float:
    """Two-sided normal tail via the stdlib normal CDF."""
    return 2.0 * _NORMAL.cdf(-abs(z))
