"""Real-time replay of 2-second regulation signals against an offer.

Per step the target grid power is P - s*R; it gets projected onto the
interval allowed by the fleet's power limits and by the requirement
that post-step cumulative resource energy stays inside [e-, e+]. The
projection lands exactly on an energy bound mid-step rather than
zeroing the step, which keeps energy conservation exact.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .signals import SignalTrajectory


class DispatchError(ValueError):
    pass


@dataclass
class HourlyEnvelope:
    """Realized fleet limits for one hour of dispatch."""

    p_plus: float
    p_minus: float
    e_minus: float
    e_plus: float
    e_start: float = 0.0

    def __post_init__(self):
        if self.p_plus < 0.0 or self.p_minus > 0.0:
            raise DispatchError("power envelope sign convention violated")
        if self.e_minus > self.e_plus + 1e-12:
            raise DispatchError("energy envelope crossed")
        if not (self.e_minus - 1e-9 <= self.e_start <= self.e_plus + 1e-9):
            raise DispatchError("e_start outside energy envelope")


@dataclass
class DispatchResult:
    instructed: np.ndarray
    achieved: np.ndarray
    grid_power: np.ndarray
    energy: np.ndarray          # post-step cumulative resource energy
    energy_end: float
    violations: int             # steps where any clamp engaged
    score_raw: float
    score: float                # clamped to [0, 1]
    grid_energy: float = 0.0    # realized grid-side energy over the hour
    discharged_energy: float = 0.0


def _resource_power(y, eta_c, eta_d):
    return eta_c * np.maximum(y, 0.0) + np.minimum(y, 0.0) / eta_d


def dispatch(offer, traj: SignalTrajectory, fleet: HourlyEnvelope,
             eta_c: float, eta_d: float) -> DispatchResult:
    """Replay one hour of signals against a fixed (R, P) offer."""
    r, p = float(offer[0]), float(offer[1])
    if r < 0.0:
        raise DispatchError("regulation capacity R must be >= 0")
    if not (0.0 < eta_c <= 1.0 and 0.0 < eta_d <= 1.0):
        raise DispatchError("efficiencies must be in (0, 1]")
    s = traj.samples
    dd = traj.delta_d
    y_tgt = p - s * r
    # grid-power interval implied by resource power limits
    y_lo_pow = eta_d * fleet.p_minus
    y_hi_pow = fleet.p_plus / eta_c

    # fast path: nothing can bind
    inc_free = _resource_power(np.clip(y_tgt, y_lo_pow, y_hi_pow), eta_c, eta_d) * dd
    cum_free = fleet.e_start + np.cumsum(inc_free)
    if (np.all(y_tgt >= y_lo_pow - 1e-12) and np.all(y_tgt <= y_hi_pow + 1e-12)
            and np.all(cum_free >= fleet.e_minus - 1e-12)
            and np.all(cum_free <= fleet.e_plus + 1e-12)):
        y = y_tgt
        energy = cum_free
        violations = 0
    else:
        n = s.size
        y = np.empty(n)
        energy = np.empty(n)
        e = fleet.e_start
        violations = 0
        for d in range(n):
            yd = y_tgt[d]
            lo, hi = y_lo_pow, y_hi_pow
            # energy corridor translated into grid power for this step
            f_lo = (fleet.e_minus - e) / dd
            f_hi = (fleet.e_plus - e) / dd
            lo = max(lo, f_lo / eta_c if f_lo >= 0.0 else f_lo * eta_d)
            hi = min(hi, f_hi / eta_c if f_hi >= 0.0 else f_hi * eta_d)
            ya = min(max(yd, lo), hi)
            if abs(ya - yd) > 1e-12:
                violations += 1
            e = e + float(_resource_power(np.float64(ya), eta_c, eta_d)) * dd
            y[d] = ya
            energy[d] = e
    if r > 0.0:
        s_r = (p - y) / r
    else:
        s_r = s.copy()
    raw = performance_score(s, s_r) if np.any(s != 0.0) or r == 0.0 else 1.0
    return DispatchResult(
        instructed=s, achieved=s_r, grid_power=y, energy=energy,
        energy_end=float(energy[-1]), violations=violations,
        score_raw=raw, score=min(1.0, max(0.0, raw)),
        grid_energy=float(np.sum(y) * dd),
        discharged_energy=float(np.sum(-np.minimum(y, 0.0) / eta_d) * dd),
    )


def performance_score(instructed, achieved) -> float:
    """Precision score: 1 - mean|s - s_r| / mean|s|, unclamped."""
    s = np.asarray(instructed, dtype=float)
    s_r = np.asarray(achieved, dtype=float)
    if s.size == 0 or s.shape != s_r.shape:
        raise DispatchError("sequences must be nonempty and equal-length")
    s_abs = float(np.mean(np.abs(s)))
    if s_abs == 0.0:
        # nothing was instructed; perfect by definition
        return 1.0
    return 1.0 - float(np.mean(np.abs(s - s_r))) / s_abs


@dataclass
class HourLedger:
    hour: int
    strategy: str
    r_offer: float
    p_da: float
    p_ha: float
    score: float
    score_raw: float
    violations: int
    revenue_reg: float
    cost_energy: float
    cost_degradation: float
    revenue_actual: float
    expected_objective: float


def settle(results, prices, mileages, expected, day_ahead_p, offers):
    """Hourly and daily ledger: actual = S x reg revenue - costs.

    `results` maps hour -> DispatchResult, `offers` maps hour ->
    (strategy, R, P_ha, expected_objective); energy cost combines the
    day-ahead purchase with the real-time price on the realized
    grid-energy deviation.
    """
    ledger = []
    for t in sorted(results):
        res = results[t]
        if t not in offers:
            raise DispatchError(f"missing offer for hour {t}")
        strategy, r_t, p_ha, exp_obj = offers[t]
        m = mileages[t]
        rev_reg = (prices.c_rc[t] + prices.c_rp[t] * m) * r_t
        p_da = day_ahead_p[t]
        cost_e = (prices.c_e_da[t] * p_da
                  + prices.c_e_rt[t] * abs(res.grid_energy - p_da))
        cost_d = prices.c_d * res.discharged_energy
        actual = res.score * rev_reg - cost_e - cost_d
        ledger.append(HourLedger(
            hour=t, strategy=strategy, r_offer=r_t, p_da=p_da, p_ha=p_ha,
            score=res.score, score_raw=res.score_raw, violations=res.violations,
            revenue_reg=rev_reg, cost_energy=cost_e, cost_degradation=cost_d,
            revenue_actual=actual, expected_objective=exp_obj))
    return ledger


@dataclass
class CampaignRow:
    strategy: str
    day: int
    offer_mwh: float
    score: float
    revenue_usd: float
    expected_usd: float
    violation_hours: int


@dataclass
class CampaignConfig:
    """Knobs for a multi-day offer/dispatch campaign.

    Seed derivation per day d: signal history uses seed + 1000*d + 1,
    scenario envelopes seed + 1000*d + 2, the realized day (fleet and
    signals) seed + 1000*d + 3. Everything downstream is deterministic.
    """

    fleet: object = None                 # fleetgen.FleetConfig
    hours_per_day: int = 24
    n_scenarios: int = 3
    n_history: int = 48                  # hours of signal history for stats
    samples_per_hour: int = 1800
    bins: int = 10
    eps: float = 0.2
    prices: object = None                # dayahead.MarketPrices or None
    future_block: bool = True
    e0_replays: int = 6                  # history hours replayed for e0 stats

    def __post_init__(self):
        if self.fleet is None:
            from . import fleetgen
            self.fleet = fleetgen.FleetConfig()
        if not (0.0 < self.eps <= 0.5):
            raise DispatchError("eps must lie in (0, 0.5]")


def default_prices(horizon, c_d=0.0):
    """Flat-ish hourly price forecasts with a mild diurnal energy shape."""
    from .dayahead import MarketPrices
    t = np.arange(horizon)
    c_e_da = 0.03 + 0.012 * np.sin(2.0 * np.pi * (t - 4.0) / 24.0)
    return MarketPrices(c_e_da=c_e_da, c_e_rt=1.5 * c_e_da,
                        c_rc=np.full(horizon, 0.05),
                        c_rp=np.full(horizon, 5e-4), c_d=c_d)


STRATEGIES = ("proposed", "robust", "determ", "ignore_eff")


def benchmark_config(eps: float = 0.3) -> CampaignConfig:
    """The bundled benchmark campaign: a small overnight PEV fleet.

    Six hours ending at the morning departure deadline, so mandatory
    charging competes with the regulation offer. Sized to keep a
    multi-day, multi-strategy campaign in the seconds range while
    still separating the offer strategies.
    """
    from .fleetgen import FleetConfig
    fleet = FleetConfig(n_vehicles=300, trip_energy_mean=4.0,
                        trip_energy_std=1.5, envelope_noise_std=0.09)
    return CampaignConfig(fleet=fleet, hours_per_day=6, n_scenarios=2,
                          n_history=24, samples_per_hour=900, bins=8, eps=eps)


def run_campaign(config: CampaignConfig, strategies, days: int, seed: int):
    """Offer and dispatch `days` synthetic days for each strategy.

    The day-ahead stage is shared (it does not depend on eps or the
    strategy); strategies differ in the hour-ahead reoffer. Returns a
    list of CampaignRow plus the per-hour ledgers keyed (strategy, day).
    """
    from . import fleetgen, signals as sig, uncertainty as U
    from . import dayahead as DA, hourahead as HA
    for s in strategies:
        if s not in STRATEGIES:
            raise DispatchError(f"unknown strategy {s!r}")
    T = config.hours_per_day
    prices = config.prices if config.prices is not None \
        else default_prices(T, config.fleet.c_d)
    eta_c, eta_d = config.fleet.eta_c, config.fleet.eta_d
    rows = []
    ledgers = {}
    for day in range(days):
        hist = sig.synthesize_trajectories(
            config.n_history, seed=seed + 1000 * day + 1,
            samples_per_hour=config.samples_per_hour)
        stats = U.fit_signal_stats(hist, bins=config.bins)
        aggs = [sig.aggregate(tr) for tr in hist]
        scen = fleetgen.generate_scenarios(
            config.fleet, config.n_scenarios, T,
            seed=seed + 1000 * day + 2, signal_aggregates=aggs)
        da = DA.solve_dayahead(DA.build_dayahead(prices, scen, eta_c, eta_d))
        real_env = fleetgen.realize_fleet(config.fleet, T,
                                          seed=seed + 1000 * day + 3)
        real_traj = sig.synthesize_trajectories(
            T, seed=seed + 1000 * day + 3,
            samples_per_hour=config.samples_per_hour)
        fcs = [hourly_forecast(scen, t) for t in range(T)]
        for strat in strategies:
            results, offers = {}, {}
            e_real = 0.0          # realized cumulative energy, day start = 0
            prev = None           # (offer, envelope used) of hour t-1
            # the efficiency-ignoring benchmark also books its own
            # energy position lossless, which is where it goes wrong
            eta_own = (1.0, 1.0) if strat == "ignore_eff" else (eta_c, eta_d)
            for t in range(T):
                fc = fcs[t]
                if t == 0:
                    fc.mean_e0, fc.var_e0 = 0.0, 0.0
                else:
                    # metered position through t-2 plus a replay of the
                    # still-running hour t-1 under the strategy's own
                    # efficiency model
                    prior = results[t - 2].energy_end if t >= 2 else 0.0
                    fc.mean_e0, fc.var_e0 = U.estimate_e0(
                        prev[0], hist[: config.e0_replays], prev[1],
                        *eta_own, prior_energy=prior)
                prob = HA.build_hourahead(
                    da, t, prices, scen, stats, fc, eps=config.eps,
                    eta_c=eta_c, eta_d=eta_d,
                    future_block=config.future_block, strategy=strat)
                try:
                    sol = HA.solve_hourahead(prob)
                except DA.ModelError:
                    sol = HA._zero_offer(prob)
                env = HourlyEnvelope(
                    p_plus=real_env[t].p_plus, p_minus=real_env[t].p_minus,
                    e_minus=real_env[t].e_minus, e_plus=real_env[t].e_plus,
                    e_start=min(max(e_real, real_env[t].e_minus),
                                real_env[t].e_plus))
                res = dispatch((sol.r, sol.p_gr_ha), real_traj[t], env,
                               eta_c, eta_d)
                e_real = res.energy_end
                results[t] = res
                offers[t] = (strat, sol.r, sol.p_gr_ha,
                             sol.objective - sol.future_value)
                prev = ((sol.r, sol.p_gr_ha), env)
            mileages = [sig.mileage(real_traj[t]) for t in range(T)]
            ledger = settle(results, prices, mileages, None,
                            da.p_gr_da, offers)
            ledgers[(strat, day)] = ledger
            sold = [h for h in ledger if h.r_offer > 1e-9]
            score = float(np.mean([h.score for h in sold])) if sold else 1.0
            rows.append(CampaignRow(
                strategy=strat, day=day,
                offer_mwh=float(sum(h.r_offer for h in ledger)) / 1000.0,
                score=score,
                revenue_usd=float(sum(h.revenue_actual for h in ledger)),
                expected_usd=float(sum(h.expected_objective for h in ledger)),
                violation_hours=sum(1 for h in ledger if h.violations)))
    return rows, ledgers


def hourly_forecast(scen, t):
    """Ensemble mean/variance CapacityForecast for hour t of a scenario set."""
    from .uncertainty import CapacityForecast
    n_w = scen.n_scenarios

    def _m(k):
        v = np.array([getattr(scen.hours[w][t], k) for w in range(n_w)])
        return float(v.mean()), float(v.var(ddof=1)) if n_w > 1 else 0.0

    mp, vp = _m("p_plus")
    mm, vm = _m("p_minus")
    mep, vep = _m("e_plus")
    mem, vem = _m("e_minus")
    return CapacityForecast(mp, vp, mm, vm, mep, vep, min(mem, mep), vem)


def summarize_campaign(rows):
    """Per-strategy means over days, Table-style."""
    out = {}
    for strat in sorted({r.strategy for r in rows}):
        mine = [r for r in rows if r.strategy == strat]
        out[strat] = {
            "offer_mwh_per_day": float(np.mean([r.offer_mwh for r in mine])),
            "mean_score": float(np.mean([r.score for r in mine])),
            "mean_revenue_usd": float(np.mean([r.revenue_usd for r in mine])),
            "mean_expected_usd": float(np.mean([r.expected_usd for r in mine])),
        }
    return out
