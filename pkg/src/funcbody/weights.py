"""Decreasing piecewise-linear weight functions with compact support.

Compact support makes every moment integral finite, so each weight belongs
to all the decreasing-weight classes at once, and it keeps every downstream
layer-cake integral a finite sum of polynomial pieces.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np


@dataclass(frozen=True)
class WeightFunction:
    """Continuous, nonnegative, decreasing, piecewise-linear weight.

    Constant at its left value on (-inf, t0], zero on [tm, +inf); the last
    stored value must be 0 and the first positive.
    """

    breakpoints: tuple
    values: tuple

    def __post_init__(self):
        bp = tuple(float(t) for t in self.breakpoints)
        vals = tuple(float(v) for v in self.values)
        if len(bp) != len(vals) or len(bp) < 2:
            raise ValueError("need matching breakpoints/values, at least two")
        if any(b >= a for a, b in zip(bp[1:], bp)):
            raise ValueError("breakpoints must be strictly increasing")
        if any(v < 0 for v in vals):
            raise ValueError("weight must be nonnegative")
        if any(b > a + 1e-15 for a, b in zip(vals, vals[1:])):
            raise ValueError("weight must be decreasing")
        if vals[-1] != 0.0:
            raise ValueError("weight must reach 0 at its last breakpoint")
        if vals[0] <= 0.0:
            raise ValueError("weight must not be identically zero")
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "values", vals)

    @cached_property
    def _arrays(self):
        return np.array(self.breakpoints), np.array(self.values)

    @property
    def support_end(self):
        return self.breakpoints[-1]

    @property
    def max_value(self):
        return self.values[0]

    def eval(self, t):
        bp, vals = self._arrays
        return float(np.interp(t, bp, vals))

    def generalized_inverse(self, r):
        """sup{s : weight(s) >= r}; flat segments resolve to their right end.

        With this convention {weight(u) >= r} = {u <= generalized_inverse(r)}
        for any function u, both sets closed.
        """
        bp, vals = self._arrays
        if not (0.0 < r <= vals[0]):
            raise ValueError(f"inverse defined on (0, {vals[0]}], got {r}")
        j = int(np.max(np.nonzero(vals >= r)[0]))
        if j == len(vals) - 1:
            return float(bp[-1])
        drop = vals[j] - vals[j + 1]
        lam = (vals[j] - r) / drop
        return float(bp[j] + lam * (bp[j + 1] - bp[j]))

    def moment(self, k):
        """Exact integral of t^k * weight(t) over [0, +inf)."""
        if k < 0 or k != int(k):
            raise ValueError("moment order must be a nonnegative integer")
        k = int(k)
        bp, vals = self._arrays
        total = 0.0
        if bp[0] > 0.0:  # constant-extension head
            total += vals[0] * bp[0] ** (k + 1) / (k + 1)
        for i in range(len(bp) - 1):
            a, b = max(bp[i], 0.0), bp[i + 1]
            if b <= 0.0 or b <= a:
                continue
            slope = (vals[i + 1] - vals[i]) / (bp[i + 1] - bp[i])
            intercept = vals[i] - slope * bp[i]
            total += intercept * (b ** (k + 1) - a ** (k + 1)) / (k + 1)
            total += slope * (b ** (k + 2) - a ** (k + 2)) / (k + 2)
        return total

    def stieltjes_slopes(self):
        """Piecewise-constant density of the measure -d(weight): a list of
        ((a, b), slope) with slope >= 0; the total mass is the left value."""
        bp, vals = self._arrays
        out = []
        for i in range(len(bp) - 1):
            slope = -(vals[i + 1] - vals[i]) / (bp[i + 1] - bp[i])
            out.append(((float(bp[i]), float(bp[i + 1])), float(slope)))
        return out

    def density_on(self, a, b):
        """Slope of -d(weight) on [a, b], which must lie inside one linear
        segment (or outside the support, where the density is 0)."""
        bp, _ = self._arrays
        if b <= bp[0] or a >= bp[-1]:
            return 0.0
        return (self.eval(a) - self.eval(b)) / (b - a)


def eval(zeta: WeightFunction, t):
    return zeta.eval(t)


def generalized_inverse(zeta: WeightFunction, r):
    return zeta.generalized_inverse(r)


def moment(zeta: WeightFunction, k):
    return zeta.moment(k)


def stieltjes_slopes(zeta: WeightFunction):
    return zeta.stieltjes_slopes()
