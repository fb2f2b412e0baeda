"""Distribution statistics and moment assembly for the cone constraints.

Covers: empirical signal statistics with a chi-square divergence radius
against the fitted Gaussian, the adjusted risk tolerance, standard
normal quantiles, terminal-energy estimation by replay, and the
per-constraint mean/covariance blocks used by the hour-ahead cones.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, asdict

import numpy as np

from . import signals as sig

EPS_MIN = 1e-6
DEFAULT_BINS = 50


class EstimationError(ValueError):
    pass


class DegenerateVarianceError(EstimationError):
    """Hourly means carry zero variance; no Gaussian reference exists."""


@dataclass
class SignalStatistics:
    mean_s1: float
    var_s1: float
    mean_sH: float
    var_sH: float
    rho: float
    mean_mileage: float
    sample_count: int

    def to_json(self):
        return json.dumps(asdict(self))

    @classmethod
    def from_json(cls, line):
        return cls(**json.loads(line))


@dataclass
class CapacityForecast:
    """Per-hour first and second moments of the fleet envelope."""

    mean_p_plus: float
    var_p_plus: float
    mean_p_minus: float
    var_p_minus: float
    mean_e_plus: float
    var_e_plus: float
    mean_e_minus: float
    var_e_minus: float
    mean_e0: float = 0.0
    var_e0: float = 0.0

    def __post_init__(self):
        if self.mean_p_plus < 0.0 or self.mean_p_minus > 0.0:
            raise EstimationError("power envelope sign convention violated")
        if self.mean_e_minus > self.mean_e_plus + 1e-9:
            raise EstimationError("energy envelope crossed (e- > e+)")
        for name in ("var_p_plus", "var_p_minus", "var_e_plus", "var_e_minus", "var_e0"):
            if getattr(self, name) < 0.0:
                raise EstimationError(f"negative variance {name}")

    def to_json(self):
        return json.dumps(asdict(self))

    @classmethod
    def from_json(cls, line):
        return cls(**json.loads(line))


@dataclass
class MomentData:
    """Mean vectors and diagonal covariances of the four constraint rows.

    Each dbar_j is the 3-vector of coefficients on [R, P_gr_ha, 1];
    each gamma_j is the diagonal of a 3x3 PSD covariance.
    """

    dbar: dict      # j -> np.ndarray(3)
    gamma: dict     # j -> np.ndarray(3), diagonal entries
    sign_da: int


def chi2_divergence(p, q) -> float:
    """sum (p_i - q_i)^2 / q_i for two probability vectors."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise EstimationError("length mismatch")
    if abs(p.sum() - 1.0) > 1e-9 or abs(q.sum() - 1.0) > 1e-9:
        raise EstimationError("inputs must each sum to 1")
    if np.any(q <= 0.0):
        raise EstimationError("reference probabilities must be positive")
    return float(np.sum((p - q) ** 2 / q))


def adjusted_epsilon(eps: float, rho: float) -> float:
    """Tightened tolerance for the divergence-ball chance constraint.

    Radicand uses (eps - eps^2), which keeps it nonnegative for all
    rho >= 0 and restores eps' -> eps as rho -> 0; the printed variant
    with (eps^2 - eps) goes negative for small rho. Result is clamped
    to (EPS_MIN, eps].
    """
    if not (0.0 < eps <= 0.5):
        raise ValueError("eps must lie in (0, 0.5]")
    if rho < 0.0:
        raise ValueError("rho must be >= 0")
    if rho == 0.0:
        return eps
    rad = rho * rho + 4.0 * rho * (eps - eps * eps)
    eps_p = eps - (math.sqrt(rad) - (1.0 - 2.0 * eps) * rho) / (2.0 * rho + 2.0)
    return min(eps, max(EPS_MIN, eps_p))


# Acklam's rational approximation of the inverse normal CDF, refined by
# one Newton step on the erfc-based CDF.
_A = (-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
      1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00)
_B = (-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
      6.680131188771972e+01, -1.328068155288572e+01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
      -2.549732539343734e+00, 4.374664141464968e+00, 2.938163982698783e+00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
      3.754408661907416e+00)
_P_LOW = 0.02425


def _normal_cdf(x):
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


def _normal_pdf(x):
    return math.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)


def gaussian_quantile(p: float) -> float:
    """Standard normal quantile to absolute error <= 1e-9."""
    if not (0.0 < p < 1.0):
        raise ValueError("p must lie strictly in (0, 1)")
    if p < _P_LOW:
        q = math.sqrt(-2.0 * math.log(p))
        x = ((((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5])
             / ((((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0))
    elif p > 1.0 - _P_LOW:
        q = math.sqrt(-2.0 * math.log(1.0 - p))
        x = -((((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5])
              / ((((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0))
    else:
        q = p - 0.5
        r = q * q
        x = ((((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5]) * q
             / (((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1.0))
    # one Newton refinement on the CDF
    for _ in range(2):
        err = _normal_cdf(x) - p
        pdf = _normal_pdf(x)
        if pdf <= 0.0:
            break
        x -= err / pdf
    return x


def _pairwise_sum(values):
    return float(np.sum(np.asarray(values, dtype=float)))


def fit_signal_stats(trajs, bins: int = DEFAULT_BINS) -> SignalStatistics:
    """Pooled 2-second and per-hour-mean statistics plus the chi-square
    radius of the hourly means against their Gaussian fit.

    Unbiased (n-1) variances throughout. The histogram uses `bins`
    equal-probability cells under the fitted Gaussian, so every
    reference mass is exactly 1/bins and the division is safe.
    """
    trajs = list(trajs)
    if len(trajs) < 2:
        raise EstimationError("need at least 2 hours of signals")
    if bins < 5:
        raise EstimationError("bins must be >= 5")
    pooled = np.concatenate([t.samples for t in trajs])
    hourly = np.array([float(t.samples.mean()) for t in trajs])
    miles = np.array([sig.mileage(t) for t in trajs])
    mean_s1 = float(pooled.mean())
    var_s1 = float(pooled.var(ddof=1))
    mean_sH = float(hourly.mean())
    var_sH = float(hourly.var(ddof=1))
    if var_sH <= 0.0:
        raise DegenerateVarianceError(
            "hourly means have zero variance; chi-square radius undefined")
    std = math.sqrt(var_sH)
    # interior edges at Gaussian quantiles; tail cells are half-open
    edges = np.array([mean_sH + std * gaussian_quantile(i / bins)
                      for i in range(1, bins)])
    counts = np.bincount(np.searchsorted(edges, hourly), minlength=bins)
    p = counts / counts.sum()
    q = np.full(bins, 1.0 / bins)
    rho = chi2_divergence(p, q)
    return SignalStatistics(
        mean_s1=mean_s1, var_s1=var_s1, mean_sH=mean_sH, var_sH=var_sH,
        rho=rho, mean_mileage=float(miles.mean()), sample_count=len(trajs))


def estimate_e0(prev_offer, trajs, fleet, eta_c, eta_d, prior_energy=0.0):
    """Mean/variance of cumulative energy after replaying hour t-1.

    Dispatches the previous hour's fixed offer against each historical
    trajectory and takes sample statistics of the terminal energies,
    shifted by the pre-hour cumulative energy.
    """
    from . import simulator  # local import; simulator depends on signals only
    r_prev, p_prev = prev_offer
    trajs = list(trajs)
    if not trajs:
        raise EstimationError("empty trajectory ensemble")
    terms = []
    for t in trajs:
        res = simulator.dispatch((r_prev, p_prev), t, fleet, eta_c, eta_d)
        terms.append(res.energy_end - fleet.e_start)
    terms = np.asarray(terms)
    mean_e0 = prior_energy + float(terms.mean())
    var_e0 = float(terms.var(ddof=1)) if len(terms) > 1 else 0.0
    return mean_e0, var_e0


def assemble_moments(stats: SignalStatistics, fc: CapacityForecast,
                     sign_da: int, eta_c: float, eta_d: float,
                     squared_scaling: bool = False) -> MomentData:
    """Mean/covariance blocks for the four chance-constraint rows.

    With powers in kW, energies in kWh and a 1-hour horizon the
    sub-hourly horizon factor is 1 and is absorbed. Covariance entries
    scale signal variance by eta (as printed); `squared_scaling`
    switches to the dimensionally squared eta^2 variant.
    """
    if not (0.0 < eta_c <= 1.0 and 0.0 < eta_d <= 1.0):
        raise EstimationError("efficiencies must be in (0, 1]")
    k3 = (1.0 + eta_c * eta_d) / (2.0 * eta_d)
    k3c = (1.0 - eta_c * eta_d) / (2.0 * eta_d)
    p_coef3 = -eta_c if sign_da >= 0 else -1.0 / eta_d

    def _sc(f):
        return f * f if squared_scaling else f

    dbar = {
        1: np.array([-eta_c * stats.mean_s1, eta_c, -fc.mean_p_plus]),
        2: np.array([stats.mean_s1 / eta_d, -1.0 / eta_d, fc.mean_p_minus]),
        3: np.array([k3 * stats.mean_sH + k3c, p_coef3,
                     -fc.mean_e0 + fc.mean_e_minus]),
        4: np.array([-eta_c * stats.mean_sH, eta_c, fc.mean_e0 - fc.mean_e_plus]),
    }
    gamma = {
        1: np.array([_sc(eta_c) * stats.var_s1, 0.0, fc.var_p_plus]),
        2: np.array([_sc(1.0 / eta_d) * stats.var_s1, 0.0, fc.var_p_minus]),
        3: np.array([_sc(k3) * stats.var_sH, 0.0, fc.var_e0 + fc.var_e_minus]),
        4: np.array([_sc(eta_c) * stats.var_sH, 0.0, fc.var_e0 + fc.var_e_plus]),
    }
    return MomentData(dbar=dbar, gamma=gamma, sign_da=1 if sign_da >= 0 else -1)
