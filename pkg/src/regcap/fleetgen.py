"""Synthetic PEV fleet and aggregate flexibility envelopes.

A deliberately simple behavioral model: each vehicle has a truncated
Gaussian plug-in window and trip-energy need. Hourly power bounds come
from connected rated power (V2G-symmetric by default); cumulative
energy bounds come from earliest-full-rate and latest-deadline
charging trajectories:

    e_plus[t]  = sum_v min(pr_v * connected_hours(<=t), headroom_v)
    e_minus[t] = sum_v max(0, need_v - pr_v * connected_hours(>t))

Both curves are nondecreasing and e_minus <= e_plus when every vehicle
can still meet its need. Multiplicative Gaussian noise (relative std
0.05 by default) models the envelope forecast uncertainty.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dayahead import FleetScenarioSet, ScenarioHour, ModelError
from .simulator import HourlyEnvelope


@dataclass
class FleetConfig:
    n_vehicles: int = 5000
    battery_kwh: float = 24.0
    charger_levels_kw: tuple = (3.3, 6.6)
    charger_split: tuple = (0.5, 0.5)
    eta_c: float = 0.92
    eta_d: float = 0.92
    c_d: float = 4.1 / 24.0
    arrival_mean: float = 18.0
    arrival_std: float = 2.0
    departure_mean: float = 7.0   # next morning, hours past midnight
    departure_std: float = 1.5
    trip_energy_mean: float = 8.0
    trip_energy_std: float = 3.0
    envelope_noise_std: float = 0.05  # relative

    def __post_init__(self):
        if not np.isclose(sum(self.charger_split), 1.0):
            raise ModelError("charger split fractions must sum to 1")
        if any(f < 0.0 for f in self.charger_split):
            raise ModelError("charger split fractions must be in [0, 1]")
        if self.n_vehicles < 1 or self.battery_kwh <= 0.0:
            raise ModelError("need a positive fleet")


def _sample_fleet(cfg: FleetConfig, rng):
    n = cfg.n_vehicles
    n_level1 = int(round(cfg.charger_split[0] * n))
    rated = np.concatenate([
        np.full(n_level1, cfg.charger_levels_kw[0]),
        np.full(n - n_level1, cfg.charger_levels_kw[1])])
    rng.shuffle(rated)
    arrive = np.clip(rng.normal(cfg.arrival_mean, cfg.arrival_std, n), 0.0, 23.0)
    depart = np.clip(rng.normal(cfg.departure_mean, cfg.departure_std, n),
                     1.0, 12.0) + 24.0
    need = np.clip(rng.normal(cfg.trip_energy_mean, cfg.trip_energy_std, n),
                   0.0, cfg.battery_kwh)
    # infeasible windows are clipped so the deadline is always meetable
    window = depart - arrive
    need = np.minimum(need, rated * window)
    return rated, arrive, depart, need


def _hour_envelopes(cfg, rated, arrive, depart, need, horizon, day_start=0.0):
    """Aggregate per-hour envelopes for hours [day_start, day_start+horizon)."""
    p_plus = np.zeros(horizon)
    e_plus = np.zeros(horizon)
    e_minus = np.zeros(horizon)
    hours = day_start + np.arange(horizon)
    for t, h0 in enumerate(hours):
        h1 = h0 + 1.0
        # wall-clock connection; windows wrap past midnight
        conn = _overlap(arrive, depart, h0, h1) + \
            _overlap(arrive - 24.0, depart - 24.0, h0, h1)
        p_plus[t] = float(np.sum(rated * (conn > 0.0)))
        conn_before = _overlap(arrive, depart, day_start, h1) + \
            _overlap(arrive - 24.0, depart - 24.0, day_start, h1)
        conn_after = _overlap(arrive, depart, h1, day_start + horizon) + \
            _overlap(arrive - 24.0, depart - 24.0, h1, day_start + horizon)
        # vehicles return with soc = battery - need, so net headroom = need
        e_plus[t] = float(np.sum(np.minimum(rated * conn_before, need)))
        e_minus[t] = float(np.sum(np.maximum(0.0, need - rated * conn_after)))
    p_minus = -p_plus
    return p_plus, p_minus, e_minus, e_plus


def _overlap(a, b, lo, hi):
    return np.clip(np.minimum(b, hi) - np.maximum(a, lo), 0.0, None)


def generate_scenarios(cfg: FleetConfig, n_scenarios: int, horizon: int,
                       seed: int, signal_aggregates=None) -> FleetScenarioSet:
    """Sample scenario envelopes and attach aggregate-signal parameters.

    `signal_aggregates` is a pool of HourlyAggregate records; each
    scenario-hour draws one. Without a pool, a neutral symmetric signal
    is used. Per-scenario seeds derive from `seed + scenario index`.
    """
    if horizon < 1:
        raise ModelError("horizon must be >= 1")
    hours = []
    for w in range(n_scenarios):
        rng = np.random.default_rng(seed + w)
        rated, arrive, depart, need = _sample_fleet(cfg, rng)
        p_plus, p_minus, e_minus, e_plus = _hour_envelopes(
            cfg, rated, arrive, depart, need, horizon)
        noise = cfg.envelope_noise_std
        if noise > 0.0:
            p_plus = p_plus * np.abs(1.0 + noise * rng.standard_normal(horizon))
            p_minus = -p_plus
            e_plus = e_plus * np.abs(1.0 + noise * rng.standard_normal(horizon))
            e_minus = e_minus * np.abs(1.0 + noise * rng.standard_normal(horizon))
            e_plus = np.maximum.accumulate(e_plus)
            e_minus = np.minimum(np.maximum.accumulate(e_minus), e_plus)
        sc = []
        for t in range(horizon):
            agg = _pick_aggregate(signal_aggregates, rng)
            sc.append(ScenarioHour(
                s_up=agg[0], s_dn=agg[1], dt_up=agg[2], dt_dn=agg[3],
                mileage=agg[4], p_plus=float(p_plus[t]),
                p_minus=float(p_minus[t]), e_minus=float(e_minus[t]),
                e_plus=float(e_plus[t])))
        hours.append(sc)
    probs = np.full(n_scenarios, 1.0 / n_scenarios)
    return FleetScenarioSet(probs, hours)


def _pick_aggregate(pool, rng):
    if not pool:
        return (0.3, -0.3, 0.5, 0.5, 100.0)
    a = pool[rng.integers(len(pool))]
    return (a.s_up, a.s_dn, a.dt_up, a.dt_dn, a.mileage)


def realize_fleet(cfg: FleetConfig, horizon: int, seed: int):
    """One ground-truth draw: per-hour HourlyEnvelope list for dispatch."""
    rng = np.random.default_rng(seed)
    rated, arrive, depart, need = _sample_fleet(cfg, rng)
    p_plus, p_minus, e_minus, e_plus = _hour_envelopes(
        cfg, rated, arrive, depart, need, horizon)
    out = []
    for t in range(horizon):
        e_lo = float(min(e_minus[t], e_plus[t]))
        e_hi = float(e_plus[t])
        out.append(HourlyEnvelope(
            p_plus=float(p_plus[t]), p_minus=float(p_minus[t]),
            e_minus=e_lo, e_plus=e_hi,
            e_start=min(max(0.0, e_lo), e_hi)))
    return out
