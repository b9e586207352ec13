"""Closed-form phase classification and growth exponents for penalized SI
spreading on scale-free spatial networks, plus the numeric feasibility
search that cross-checks the closed forms, and the finite-size edge-length
theory used to predict edge counts per length window.

All classification inequalities are strict; a comparison that lands within
``tol`` of equality sets the boundary flag and resolves to the slower phase.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError, StateError, ValidationError

PHASE_EXPLOSIVE = "explosive"
PHASE_QUASI_EXP = "quasi_exponential"
PHASE_POLYNOMIAL = "polynomial"
PHASE_GEOMETRIC = "geometric"

REGION_NAMES = {
    "A": "explosive",
    "B": "weak-tie quasi-exponential",
    "C": "hub quasi-exponential",
    "D": "weak-tie polynomial",
    "E": "hybrid polynomial",
    "F": "hub polynomial",
    "G": "geometric",
}


@dataclass(frozen=True)
class ModelPoint:
    """Classifier input: dimension d, weight tail tau, long-range alpha
    (inf = threshold kernel), penalty exponents mu and zeta.

    Only the mu = nu surface is supported; pass nu explicitly to assert it.
    """

    d: int
    tau: float
    alpha: float
    mu: float
    zeta: float
    nu: float | None = None

    def __post_init__(self):
        if self.d < 1:
            raise ParameterError("d must be a positive integer")
        if not self.tau > 2:
            raise ParameterError("tau must exceed 2")
        if not self.alpha > 1:
            raise ParameterError("alpha must exceed 1 (or be inf)")
        if self.mu < 0 or self.zeta < 0:
            raise ParameterError("mu and zeta must be nonnegative")
        if self.nu is not None and self.nu != self.mu:
            raise ParameterError(
                "asymmetric penalties (nu != mu) are outside the supported "
                "classification surface; growth classes for nu != mu are "
                "not established")


@dataclass(frozen=True)
class PhaseReport:
    phase: str
    region: str
    phi: float | None = None
    psi: float | None = None
    eta_star: float | None = None
    s_star: float | None = None
    boundary: bool = False
    flags: tuple = ()


class _Cmp:
    """Strict comparisons with boundary detection at tolerance ``tol``."""

    def __init__(self, tol):
        self.tol = tol
        self.boundary = False

    def lt(self, a, b):
        if math.isinf(a) or math.isinf(b):
            return a < b
        if abs(a - b) <= self.tol:
            self.boundary = True
            return False
        return a < b

    def gt(self, a, b):
        return self.lt(b, a)


def _le_gate(a, b):
    """Non-strict gate used by the optimal-exponent definitions."""
    return a <= b


def _eta_candidates(m: ModelPoint, strict_upper: bool):
    """(eta, gate) triples for the three polynomial-phase mechanisms.

    ``strict_upper`` selects the upper-bound gates (which also require the
    exponent to stay at most 1); otherwise the lower-bound gates are used.
    At alpha = inf the weak-tie and hybrid mechanisms are unavailable.
    """
    d, tau, alpha, mu, zeta = m.d, m.tau, m.alpha, m.mu, m.zeta
    inf_alpha = math.isinf(alpha)

    eta1 = zeta - d * (2 - alpha) if not inf_alpha else math.inf
    eta2 = (zeta + mu * d * (alpha - 2) / (alpha - (tau - 1))
            if not inf_alpha and alpha != tau - 1 else
            (zeta + mu * d if not inf_alpha else math.inf))
    eta3 = zeta + mu * d - d * (3 - tau)

    if strict_upper:
        g1 = (not inf_alpha) and alpha < 2 and _le_gate(zeta / d,
                                                        2 - alpha + 1 / d)
        g2 = ((not inf_alpha) and alpha > 2 and tau < 3
              and _le_gate(mu, (1 - zeta) * (1 / d + (3 - tau)
                                             / (d * (alpha - 2)))))
        g3 = tau < 3 and _le_gate(mu + zeta / d, 3 - tau + 1 / d)
    else:
        g1 = (not inf_alpha) and alpha <= 2
        g2 = (not inf_alpha) and alpha > 2 and tau <= 3
        g3 = tau <= 3
    return (eta1, g1), (eta2, g2), (eta3, g3)


def compute_s_star(m: ModelPoint) -> float:
    """Optimal lower-bound exponent: min of the gated eta candidates with
    ungated candidates counting as infinity.  Requires zeta/d > 2 - alpha
    and mu + zeta/d > 3 - tau."""
    d = m.d
    if not (m.zeta / d > 2 - m.alpha and m.mu + m.zeta / d > 3 - m.tau):
        raise StateError(
            "s_star is defined only where zeta/d > 2 - alpha and "
            "mu + zeta/d > 3 - tau (outside the quasi-exponential range)")
    cands = [eta for eta, gate in _eta_candidates(m, strict_upper=False)
             if gate]
    return min(cands) if cands else math.inf


@dataclass(frozen=True)
class PsiResult:
    psi: float
    region: str
    eta_star: float


def compute_psi(m: ModelPoint, phase_hint=None) -> PsiResult:
    """Polynomial growth exponent psi = 1/eta_star (psi = 1 means purely
    geometric).  Region is the mechanism achieving the smallest applicable
    eta, ties broken D < E < F."""
    if phase_hint is None:
        phase_hint = classify(m).phase
    if phase_hint not in (PHASE_POLYNOMIAL, PHASE_GEOMETRIC):
        raise StateError("compute_psi applies to the polynomial and "
                         "geometric phases only")
    triples = _eta_candidates(m, strict_upper=True)
    regions = ("D", "E", "F")
    best = None
    best_region = "G"
    for (eta, gate), reg in zip(triples, regions):
        if gate and (best is None or eta < best):
            best = eta
            best_region = reg
    if best is None or best >= 1.0:
        return PsiResult(1.0, "G", 1.0)
    return PsiResult(1.0 / best, best_region, best)


@dataclass(frozen=True)
class PhiResult:
    phi: float
    region: str
    delta: float
    upper_bound_only: bool


def compute_phi(m: ModelPoint, phase_hint=None, tol=1e-9) -> PhiResult:
    """Quasi-exponential stretch exponent phi (log I(t) ~ t^phi) and its
    inverse delta.  The hub mechanism's delta is only an upper bound, which
    the result flags."""
    if phase_hint is None:
        phase_hint = classify(m, tol=tol).phase
    if phase_hint != PHASE_QUASI_EXP:
        raise StateError("compute_phi applies to the quasi-exponential "
                         "phase only")
    d, tau, alpha, mu, zeta = m.d, m.tau, m.alpha, m.mu, m.zeta
    cmp = _Cmp(tol)
    cands = []
    if not math.isinf(alpha) and cmp.lt(zeta / d, 2 - alpha):
        cands.append((1.0 - math.log2(alpha + zeta / d), "B"))
    if cmp.lt(mu + zeta / d, 3 - tau):
        cands.append((1.0 - math.log2(tau - 1 + mu + zeta / d), "C"))
    if not cands:
        raise StateError("no quasi-exponential mechanism applies")
    phi, region = max(cands)
    return PhiResult(phi, region, 1.0 / phi, upper_bound_only=(region == "C"))


def classify(m: ModelPoint, tol=1e-9) -> PhaseReport:
    """Map model parameters to growth phase and region A-G.

    Phase conditions, checked fastest first:
      explosive        mu + zeta/d < (3-tau)/2
      quasi-exp        additionally to its failure: zeta/d < 2-alpha or
                       mu + zeta/d < 3-tau
      polynomial       mu + zeta/d > 3-tau, zeta/d > 2-alpha, and one of
                       the three mechanism conditions
      geometric        everything else
    """
    d, tau, alpha, mu, zeta = m.d, m.tau, m.alpha, m.mu, m.zeta
    cmp = _Cmp(tol)
    flags = []

    if cmp.lt(mu + zeta / d, (3 - tau) / 2):
        return PhaseReport(PHASE_EXPLOSIVE, "A", boundary=cmp.boundary)

    quasi_b = (not math.isinf(alpha)) and cmp.lt(zeta / d, 2 - alpha)
    quasi_c = cmp.lt(mu + zeta / d, 3 - tau)
    if quasi_b or quasi_c:
        res = compute_phi(m, phase_hint=PHASE_QUASI_EXP, tol=tol)
        if res.upper_bound_only:
            flags.append("upper_bound_only")
        return PhaseReport(PHASE_QUASI_EXP, res.region, phi=res.phi,
                           boundary=cmp.boundary, flags=tuple(flags))

    poly_main = (cmp.gt(mu + zeta / d, 3 - tau)
                 and (math.isinf(alpha) or cmp.gt(zeta / d, 2 - alpha)))
    poly_a = ((not math.isinf(alpha)) and cmp.lt(alpha, 2)
              and cmp.lt(zeta / d, 2 - alpha + 1 / d))
    poly_b = ((not math.isinf(alpha)) and cmp.gt(alpha, 2)
              and cmp.lt(tau, 3)
              and cmp.lt(mu, (1 - zeta) * (1 / d + (3 - tau)
                                           / (d * (alpha - 2)))
                         if alpha > 2 else math.inf))
    poly_c = cmp.lt(tau, 3) and cmp.lt(mu + zeta / d, 3 - tau + 1 / d)

    s_star = None
    eta_star = None
    if poly_main:
        try:
            s_star = compute_s_star(m)
        except StateError:
            s_star = None
    if poly_main and (poly_a or poly_b or poly_c):
        res = compute_psi(m, phase_hint=PHASE_POLYNOMIAL)
        return PhaseReport(PHASE_POLYNOMIAL, res.region, psi=res.psi,
                           eta_star=res.eta_star, s_star=s_star,
                           boundary=cmp.boundary, flags=tuple(flags))
    res = compute_psi(m, phase_hint=PHASE_GEOMETRIC)
    return PhaseReport(PHASE_GEOMETRIC, "G", psi=1.0, eta_star=res.eta_star,
                       s_star=s_star, boundary=cmp.boundary,
                       flags=tuple(flags))


# ---------------------------------------------------------------------------
# numeric feasibility search


def lambda_value(s, gamma, x, m: ModelPoint):
    """Exponent budget 2(1-x)d*gamma + min(alpha*d*(2x*gamma/(tau-1) - 1), 0)
    + min(s - zeta - 2x*mu*d*gamma/(tau-1), 0)."""
    if not (0 < gamma <= 1 and 0 <= x <= 1):
        raise ValidationError("gamma must be in (0, 1], x in [0, 1]")
    d, tau, alpha, mu, zeta = m.d, m.tau, m.alpha, m.mu, m.zeta
    t2_arg = 2 * x * gamma / (tau - 1) - 1
    if math.isinf(alpha):
        term2 = 0.0 if t2_arg >= 0 else -math.inf
    else:
        term2 = min(alpha * d * t2_arg, 0.0)
    term3 = min(s - zeta - 2 * x * mu * d * gamma / (tau - 1), 0.0)
    return 2 * (1 - x) * d * gamma + term2 + term3


@dataclass(frozen=True)
class LambdaSearchResult:
    s_min: float
    gamma_opt: float
    x_opt: float
    feasible_at_zero: bool
    delta_from_gamma: float | None


def _lambda_max_over_x(s, gammas, m: ModelPoint):
    """Max of Lambda over the x kinks {0, 1, (tau-1)/(2 gamma), x3} for a
    vector of gammas.  Lambda is piecewise linear in x, so this is exact."""
    d, tau, alpha, mu, zeta = m.d, m.tau, m.alpha, m.mu, m.zeta
    g = np.asarray(gammas, dtype=float)
    xs = [np.zeros_like(g), np.ones_like(g),
          np.clip((tau - 1) / (2 * g), 0.0, 1.0)]
    if mu > 0:
        xs.append(np.clip((s - zeta) * (tau - 1) / (2 * mu * d * g),
                          0.0, 1.0))
    best = np.full(g.shape, -np.inf)
    best_x = np.zeros_like(g)
    for x in xs:
        t2_arg = 2 * x * g / (tau - 1) - 1
        if math.isinf(alpha):
            term2 = np.where(t2_arg >= 0, 0.0, -np.inf)
        else:
            term2 = np.minimum(alpha * d * t2_arg, 0.0)
        term3 = np.minimum(s - zeta - 2 * x * mu * d * g / (tau - 1), 0.0)
        val = 2 * (1 - x) * d * g + term2 + term3
        upd = val > best
        best = np.where(upd, val, best)
        best_x = np.where(upd, x, best_x)
    return best, best_x


def _gamma_grid(m: ModelPoint, resolution):
    g = np.linspace(1.0 / resolution, 1.0 - 1e-12, resolution)
    # exact kink locations of the closed forms, and a ladder approaching 1
    extra = [1.0 - 10.0 ** (-k) for k in range(3, 13)]
    for val in ((m.alpha + m.zeta / m.d) / 2 if not math.isinf(m.alpha)
                else None,
                (m.tau - 1 + m.mu + m.zeta / m.d) / 2):
        if val is not None and 0 < val < 1:
            extra.extend([val, min(val + 1e-9, 1 - 1e-12)])
    return np.unique(np.concatenate((g, np.array(extra))))


def lambda_search(m: ModelPoint, resolution=2000, s_tol=1e-3
                  ) -> LambdaSearchResult:
    """Minimal s >= 0 for which some gamma in (0,1), x in [0,1] make the
    exponent budget positive; feasibility is monotone in s, so bisection
    applies.  When s = 0 is feasible, also reports the infimal feasible
    gamma and the resulting polylog exponent delta = 1/log2(1/gamma)."""
    if resolution < 1000:
        raise ValidationError("resolution must be at least 1e3 per axis")
    gammas = _gamma_grid(m, resolution)

    def feasible(s):
        vals, xs = _lambda_max_over_x(s, gammas, m)
        i = int(np.argmax(vals))
        return vals[i] > 0.0, float(gammas[i]), float(xs[i])

    feas0, g0, x0 = feasible(0.0)
    delta = None
    if feas0:
        vals, _ = _lambda_max_over_x(0.0, gammas, m)
        pos = np.flatnonzero(vals > 0)
        lo_idx = pos[0]
        gamma_lo = gammas[lo_idx - 1] if lo_idx > 0 else gammas[0] / 2
        gamma_hi = gammas[lo_idx]
        for _ in range(60):  # bisect the feasibility boundary in gamma
            mid = 0.5 * (gamma_lo + gamma_hi)
            v, _ = _lambda_max_over_x(0.0, np.array([mid]), m)
            if v[0] > 0:
                gamma_hi = mid
            else:
                gamma_lo = mid
        if gamma_hi >= 1.0 - 1e-9:
            delta = math.inf
        else:
            delta = 1.0 / math.log2(1.0 / gamma_hi)
        return LambdaSearchResult(0.0, g0, x0, True, delta)

    s_hi = m.zeta + m.mu * m.d + m.d + 1.0
    feas_hi, g_hi, x_hi = feasible(s_hi)
    if not feas_hi:
        return LambdaSearchResult(math.inf, g_hi, x_hi, False, None)
    lo, hi = 0.0, s_hi
    while hi - lo > s_tol:
        mid = 0.5 * (lo + hi)
        ok, _, _ = feasible(mid)
        if ok:
            hi = mid
        else:
            lo = mid
    _, g_opt, x_opt = feasible(hi)
    return LambdaSearchResult(hi, g_opt, x_opt, False, None)


# ---------------------------------------------------------------------------
# finite-size edge-length theory

REGIME_ALPHA_LESS = "alpha_less"        # alpha < tau - 1
REGIME_ALPHA_EQUAL = "alpha_equal"
REGIME_ALPHA_GREATER = "alpha_greater"


def surface_area(d):
    """Surface of the unit sphere in R^d (2 pi for d = 2)."""
    return 2.0 * math.pi ** (d / 2.0) / math.gamma(d / 2.0)


@dataclass(frozen=True)
class EdgeTailPrediction:
    regime: str
    c1: float
    c2: float
    c3: float
    c4: float | None
    expected_per_node: float
    l1_below_floor: bool


def _tail_shape(L, d, tau, alpha, regime):
    if regime == REGIME_ALPHA_LESS:
        return L ** (-d * (alpha - 1))
    if regime == REGIME_ALPHA_EQUAL:
        return L ** (-d * (alpha - 1)) * math.log(L ** d) ** 2
    return L ** (-d * (tau - 2)) * math.log(L ** d)


def edge_tail_theory(L1, L2, d, tau, alpha, c=1.0, M=None,
                     l1_floor=10.0) -> EdgeTailPrediction:
    """Predicted number of edges per node with length in [L1, L2].

    Closed forms per regime of alpha vs tau - 1; with a weight-product cap M
    the tail is a pure power law with prefactor c4(M) valid for L1 > M^(1/d).
    The reported constants follow the annulus-integral derivation, which
    sums over ordered node pairs; ``expected_per_node`` halves that so it
    counts each undirected edge once (verified against Monte Carlo).
    """
    if not L1 < L2:
        raise ValidationError("need L1 < L2")
    if math.isinf(alpha):
        raise ParameterError("edge-tail theory requires finite alpha")
    if abs(alpha - 1.0) < 1e-12 or abs(tau - 2.0) < 1e-12:
        raise ParameterError("alpha = 1 or tau = 2 are singular parameters")
    if not (alpha > 1 and tau > 2 and 0 < c <= 1):
        raise ParameterError("need alpha > 1, tau > 2, c in (0, 1]")

    surf = surface_area(d)
    t1 = tau - 1.0
    if abs(alpha - t1) < 1e-12:
        regime = REGIME_ALPHA_EQUAL
    elif alpha < t1:
        regime = REGIME_ALPHA_LESS
    else:
        regime = REGIME_ALPHA_GREATER

    c1 = c * surf * t1 ** 2 / ((t1 - alpha) ** 2 * d * (alpha - 1)) \
        if regime != REGIME_ALPHA_EQUAL else math.nan
    c2 = c * surf * t1 ** 2 / (2 * d * (alpha - 1))
    c3 = (c * surf * (t1 + t1 ** 2 / (alpha + 1 - tau)) / (d * (tau - 2))
          if regime == REGIME_ALPHA_GREATER else math.nan)

    c4 = None
    if M is not None:
        if M <= 1:
            raise ValidationError("weight cap M must exceed 1")
        if regime == REGIME_ALPHA_EQUAL:
            tilde = t1 ** 2 * math.log(M) ** 2 / 2.0
        else:
            a1t = alpha + 1 - tau
            tilde = (t1 ** 2 / a1t ** 2
                     + M ** a1t * t1 ** 2 * (math.log(M) - 1 / a1t) / a1t)
        c4 = c * surf * tilde / (d * (alpha - 1))
        expected = c4 * (L1 ** (-d * (alpha - 1)) - L2 ** (-d * (alpha - 1)))
    elif regime == REGIME_ALPHA_LESS:
        expected = c1 * (L1 ** (-d * (alpha - 1)) - L2 ** (-d * (alpha - 1)))
    elif regime == REGIME_ALPHA_EQUAL:
        expected = c2 * (_tail_shape(L1, d, tau, alpha, regime)
                         - _tail_shape(L2, d, tau, alpha, regime))
    else:
        expected = c3 * (_tail_shape(L1, d, tau, alpha, regime)
                         - _tail_shape(L2, d, tau, alpha, regime))

    return EdgeTailPrediction(regime, c1, c2, c3, c4,
                              max(expected, 0.0) / 2.0,
                              l1_below_floor=L1 < l1_floor)


# ---------------------------------------------------------------------------
# phase diagram grids

_AXIS_FIELDS = ("mu", "zeta", "alpha", "tau", "d")


def phase_diagram_grid(fixed: dict, x_axis, y_axis, tol=1e-9):
    """Classify over a rectangular parameter grid.

    ``x_axis``/``y_axis`` are (name, lo, hi, points); ``fixed`` holds the
    remaining ModelPoint fields.  Returns a list of row dicts with x, y,
    phase, region, exponent and boundary columns.
    """
    for name, *_ in (x_axis, y_axis):
        if name not in _AXIS_FIELDS:
            raise ValidationError(f"unknown axis parameter {name!r}")
    xn, x0, x1, nx = x_axis
    yn, y0, y1, ny = y_axis
    xs = np.linspace(float(x0), float(x1), int(nx))
    ys = np.linspace(float(y0), float(y1), int(ny))
    rows = []
    for yv in ys:
        for xv in xs:
            kw = dict(fixed)
            kw[xn] = float(xv)
            kw[yn] = float(yv)
            kw["d"] = int(kw.get("d", 2))
            try:
                rep = classify(ModelPoint(**kw), tol=tol)
            except ParameterError:
                continue
            if rep.phase == PHASE_QUASI_EXP:
                expo = rep.phi
            elif rep.phase in (PHASE_POLYNOMIAL, PHASE_GEOMETRIC):
                expo = rep.psi
            else:
                expo = math.nan
            rows.append({"x": float(xv), "y": float(yv), "phase": rep.phase,
                         "region": rep.region, "exponent": expo,
                         "boundary": rep.boundary})
    return rows
