"""Limits of sampled sequences: polynomial (Richardson) extrapolation in
h = 1/k, with divergence and non-convergence detection."""

from __future__ import annotations

from dataclasses import dataclass

from .errors import NoLimitError, ScheduleError
from .scalars import INF, context, magnitude

DIVERGENCE_THRESHOLD = 1e6
GROWTH_RATIO = 1.5
GROWTH_FLOOR = 1e-6      # geometric growth of values below this is rounding noise
EXTRAPOLATION_POINTS = 4


@dataclass(frozen=True)
class Limit:
    value: object          # mpc, or INF when the sequence diverges
    diverges: bool
    error: float           # rough size of the extrapolation error

    @property
    def finite(self) -> bool:
        return not self.diverges


def neville(hs, vs, x=0):
    """Value at x of the interpolating polynomial through (hs, vs)."""
    p = list(vs)
    n = len(hs)
    for m in range(1, n):
        for i in range(n - m):
            p[i] = ((x - hs[i + m]) * p[i] + (hs[i] - x) * p[i + 1]) / (hs[i] - hs[i + m])
    return p[0]


def diverges(values, threshold: float = DIVERGENCE_THRESHOLD, growth: float = GROWTH_RATIO) -> bool:
    """Monotone growth over the last three samples, and either beyond the
    threshold or growing geometrically from a non-negligible size."""
    if len(values) < 3:
        return False
    a, b, c = (magnitude(v) for v in values[-3:])
    if not (a < b < c):
        return False
    if c > threshold:
        return True
    return c > GROWTH_FLOOR and a > 0 and b / a >= growth and c / b >= growth


def extrapolate(ks, values, prec: int = 256, points: int = EXTRAPOLATION_POINTS,
                threshold: float = DIVERGENCE_THRESHOLD, growth: float = GROWTH_RATIO,
                what: str = "sequence") -> Limit:
    """Limit of values[i] as ks[i] -> infinity."""
    if len(ks) < 3 or len(ks) != len(values):
        raise ScheduleError(f"need at least 3 samples to extrapolate, got {len(ks)}")
    if diverges(values, threshold, growth):
        return Limit(INF, True, float("inf"))
    ctx = context(prec)
    vals = [v if getattr(v, "context", None) is not None else ctx.mpc(v) for v in values]
    scale = 1 + max(magnitude(v) for v in vals[-3:])
    d1 = magnitude(vals[-2] - vals[-3])
    d2 = magnitude(vals[-1] - vals[-2])
    tiny = 2.0 ** (-prec / 2) * scale
    if d2 > tiny and d2 > 0.9 * d1:
        raise NoLimitError(f"{what} does not settle: successive differences {d1:.3g}, {d2:.3g}")
    m = min(points, len(ks))
    hs = [ctx.mpf(1) / k for k in ks[-m:]]
    best = neville(hs, vals[-m:])
    prev = neville(hs[1:], vals[-(m - 1):]) if m > 2 else vals[-1]
    return Limit(best, False, magnitude(best - prev))
