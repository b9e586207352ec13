"""Estimators recovering model parameters from data: the tail index of a
degree sequence (Hill), the long-range parameter from the finite-size
truncated edge-length tail, and growth exponents from epidemic curves."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.stats import binomtest

from .core_graph import SpatialGraph
from .errors import EstimationError, ParameterError, ValidationError
from .spread import EpidemicCurve

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class TailFit:
    """Generic fit output: point estimate, fit window, residual and size."""

    estimate: float
    window: tuple
    residual_sse: float
    points_used: int
    method: str
    r_squared: float | None = None
    scale: float | None = None


@dataclass(frozen=True)
class HillResult:
    kappa: int
    gamma_hat: float
    tau_hat: float
    kappa_sweep: tuple  # ((kappa, gamma_hat), ...)


def hill_estimator(sample, kappa) -> float:
    """Hill tail-index estimate: mean log ratio of the top kappa order
    statistics to the (kappa+1)-th."""
    x = np.asarray(sample, dtype=float)
    if np.any(x <= 0):
        raise ValidationError("Hill estimator requires positive values")
    kappa = int(kappa)
    if kappa < 1 or kappa + 1 > x.size:
        raise ParameterError(f"kappa must satisfy 1 <= kappa <= {x.size - 1}")
    top = np.sort(x)[::-1][:kappa + 1]
    return float(np.mean(np.log(top[:kappa] / top[kappa])))


def _hill_sweep(x_desc, kappas):
    logs = np.log(x_desc)
    csum = np.concatenate(([0.0], np.cumsum(logs)))
    ks = np.asarray(kappas, dtype=np.int64)
    return csum[ks] / ks - logs[ks]


def select_kappa(sample, grid_points=60, window=7):
    """Plateau-detecting choice of the Hill order count.

    Sweeps kappa geometrically between n^0.3 and n^0.8 and picks the centre
    of the 7-point window with the smallest variance of gamma_hat.  If the
    rolling variance is monotone (no plateau), falls back to n^(2/3) with a
    warning.
    """
    x = np.asarray(sample, dtype=float)
    n = x.size
    if n < 500:
        raise ValidationError("kappa selection needs at least 500 values")
    if np.any(x <= 0):
        raise ValidationError("sample values must be positive")
    x_desc = np.sort(x)[::-1]
    lo = max(2, math.ceil(n ** 0.3))
    hi = min(n - 1, math.ceil(n ** 0.8))
    kappas = np.unique(np.geomspace(lo, hi, grid_points).astype(np.int64))
    gammas = _hill_sweep(x_desc, kappas)
    if np.any(gammas <= 0):
        raise EstimationError("degenerate sample: zero log-ratios")
    if kappas.size < window:
        raise EstimationError("too few distinct kappa values to sweep")
    sw = np.lib.stride_tricks.sliding_window_view(gammas, window)
    var = sw.var(axis=1)
    centers = kappas[window // 2: window // 2 + var.size]
    monotone = np.all(np.diff(var) >= 0) or np.all(np.diff(var) <= 0)
    if monotone:
        warnings.warn("no variance plateau in the Hill sweep; "
                      "falling back to kappa = ceil(n^(2/3))")
        kappa = min(n - 1, math.ceil(n ** (2.0 / 3.0)))
    else:
        kappa = int(centers[int(np.argmin(var))])
    gamma = hill_estimator(x, kappa)
    sweep = tuple((int(k), float(g)) for k, g in zip(kappas, gammas))
    return HillResult(kappa, gamma, 1.0 + 1.0 / gamma, sweep)


def estimate_tau(degrees, **kw) -> HillResult:
    """Hill with automatic kappa on the positive entries of a degree
    sequence; tau_hat = 1 + 1/gamma_hat."""
    d = np.asarray(degrees, dtype=float)
    return select_kappa(d[d > 0], **kw)


# ---------------------------------------------------------------------------
# edge-length tail


def empirical_truncated_tail(g: SpatialGraph, l_minus, l_plus,
                             grid_points=60):
    """Tail F(L) = #edges in (L, L+] / #edges in [L-, L+] on a log-spaced
    grid of L; F(L-) = 1 and F(L+) = 0 by construction."""
    if not 0 < l_minus < l_plus:
        raise ValidationError("need 0 < L- < L+")
    lengths = np.sort(g.lengths)
    total = (np.searchsorted(lengths, l_plus, side="right")
             - np.searchsorted(lengths, l_minus, side="left"))
    if total < 100:
        raise EstimationError(
            f"only {total} edges in [{l_minus}, {l_plus}]; need >= 100")
    grid = np.geomspace(l_minus, l_plus, grid_points)
    upper = np.searchsorted(lengths, l_plus, side="right")
    above = upper - np.searchsorted(lengths, grid, side="right")
    fbar = above / total
    fbar[0] = 1.0
    fbar[-1] = 0.0
    return grid, fbar


def _golden_min(f, a, b, tol=1e-6):
    c = b - GOLDEN * (b - a)
    d_ = a + GOLDEN * (b - a)
    fc, fd = f(c), f(d_)
    while b - a > tol:
        if fc < fd:
            b, d_, fd = d_, c, fc
            c = b - GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d_, fd
            d_ = a + GOLDEN * (b - a)
            fd = f(d_)
    return 0.5 * (a + b)


def fit_alpha(tail, l_plus, d, a_max=6.0) -> TailFit:
    """Least squares of log f_(a,b) against log F over the truncated-tail
    model f_(a,b)(L) = b (L^(-d(a-1)) - L+^(-d(a-1))).

    The scale b has a closed form for fixed a, so only a is searched: a
    coarse grid refined by golden section.
    """
    grid, fbar = tail
    grid = np.asarray(grid, dtype=float)
    fbar = np.asarray(fbar, dtype=float)
    keep = (fbar > 0) & (fbar < 1)
    if keep.sum() < 10:
        raise EstimationError("need at least 10 grid points with F in (0,1)")
    ll = np.log(grid[keep])
    lf = np.log(fbar[keep])
    lp = math.log(l_plus)

    def sse(a):
        expo = -d * (a - 1.0)
        shape = np.exp(expo * ll) - math.exp(expo * lp)
        if np.any(shape <= 0):
            return math.inf
        lg = np.log(shape)
        resid = lf - lg
        return float(np.sum((resid - resid.mean()) ** 2))

    a_grid = np.linspace(1.0 + 1e-3, a_max, 800)
    vals = np.array([sse(a) for a in a_grid])
    best = int(np.argmin(vals))
    lo = a_grid[max(best - 1, 0)]
    hi = a_grid[min(best + 1, a_grid.size - 1)]
    a_hat = _golden_min(sse, lo, hi)
    if not math.isfinite(sse(a_hat)):
        raise EstimationError("alpha fit did not converge")
    expo = -d * (a_hat - 1.0)
    shape = np.exp(expo * ll) - math.exp(expo * lp)
    log_b = float(np.mean(lf - np.log(shape)))
    return TailFit(float(a_hat), (float(grid[0]), float(l_plus)),
                   sse(a_hat), int(keep.sum()), "truncated-tail-nls",
                   scale=math.exp(log_b))


# ---------------------------------------------------------------------------
# epidemic-curve fits

MODE_LOGLOG = "loglog"
MODE_LOGLINEAR = "loglinear"

DEFAULT_FIT_LOW = 10.0 ** 2.17
DEFAULT_FIT_HIGH = 10.0 ** 3.70


def _window_points(curve: EpidemicCurve, i_low, i_high):
    keep = (curve.counts >= i_low) & (curve.counts <= i_high)
    return curve.counts[keep].astype(float), curve.times[keep]


def fit_growth_exponent(curve: EpidemicCurve, i_low=DEFAULT_FIT_LOW,
                        i_high=DEFAULT_FIT_HIGH,
                        mode=MODE_LOGLOG) -> TailFit:
    """OLS slope of log10 I against log10 t (loglog) or t (loglinear) over
    the count window [i_low, i_high]."""
    if mode not in (MODE_LOGLOG, MODE_LOGLINEAR):
        raise ValidationError(f"unknown mode {mode!r}")
    counts, times = _window_points(curve, i_low, i_high)
    if counts.size < 5:
        raise EstimationError(
            f"only {counts.size} curve samples in window; need >= 5")
    y = np.log10(counts)
    if mode == MODE_LOGLOG:
        if np.any(times <= 0):
            keep = times > 0
            counts, times, y = counts[keep], times[keep], y[keep]
            if counts.size < 5:
                raise EstimationError("too few positive-time samples")
        x = np.log10(times)
    else:
        x = times
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    sse = float(np.sum(resid ** 2))
    sst = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - sse / sst if sst > 0 else 1.0
    return TailFit(float(slope), (float(i_low), float(i_high)), sse,
                   int(counts.size), f"growth-{mode}", r_squared=r2)


VERDICT_CONCAVE = "concave"
VERDICT_LINEAR = "linear"
VERDICT_CONVEX = "convex"


@dataclass(frozen=True)
class ConcavityVerdict:
    verdict: str
    p_value: float
    negative: int
    positive: int


def _rolling_median(a, width):
    """Rolling median, decimated to non-overlapping windows when there is
    enough data; overlapping medians leave adjacent slopes anti-correlated,
    which drowns the curvature sign test in noise."""
    if a.size < width:
        return a
    sw = np.lib.stride_tricks.sliding_window_view(a, width)
    med = np.median(sw, axis=1)
    if med.size >= 4 * width:
        med = med[::width]
    return med


def concavity_check(curve: EpidemicCurve, i_low=1.0, i_high=math.inf,
                    mode=MODE_LOGLINEAR, width=5,
                    p_threshold=0.05) -> ConcavityVerdict:
    """Sign test on slope changes of log10 I over the window.

    Slopes of consecutive smoothed samples are compared; a significant
    majority of decreasing slopes means concave, increasing means convex,
    otherwise linear.
    """
    counts, times = _window_points(curve, i_low, i_high)
    if counts.size < 10:
        raise EstimationError("need at least 10 samples in window")
    y = np.log10(counts.astype(float))
    if mode == MODE_LOGLOG:
        keep = times > 0
        y, times = y[keep], times[keep]
        x = np.log10(times)
    else:
        x = times
    x = _rolling_median(x, width)
    y = _rolling_median(y, width)
    dx = np.diff(x)
    ok = dx > 0
    slopes = np.diff(y)[ok] / dx[ok]
    d2 = np.diff(slopes)
    scale = max(np.max(np.abs(slopes)), 1e-300)
    neg = int(np.sum(d2 < -1e-9 * scale))
    pos = int(np.sum(d2 > 1e-9 * scale))
    n = neg + pos
    if n == 0:
        return ConcavityVerdict(VERDICT_LINEAR, 1.0, 0, 0)
    p = binomtest(neg, n, 0.5).pvalue
    if p < p_threshold and neg > pos:
        return ConcavityVerdict(VERDICT_CONCAVE, p, neg, pos)
    if p < p_threshold and pos > neg:
        return ConcavityVerdict(VERDICT_CONVEX, p, neg, pos)
    return ConcavityVerdict(VERDICT_LINEAR, p, neg, pos)
