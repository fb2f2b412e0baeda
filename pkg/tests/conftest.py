"""Shared random-instance generators for the test suite."""

import numpy as np
import pytest

from regcap import dayahead as da_mod
from regcap import fleetgen, hourahead as ha_mod, simulator as sim
from regcap import signals as sig
from regcap.uncertainty import SignalStatistics, fit_signal_stats


def random_scenarios(rng, n_w=2, horizon=4, power=1000.0, need=1500.0):
    """A feasible random FleetScenarioSet with a ramping energy corridor."""
    hours = []
    for _ in range(n_w):
        sc = []
        p_plus = power * rng.uniform(0.8, 1.2, horizon)
        # corridor: cumulative need ramps to `need`, always chargeable
        e_min = np.sort(rng.uniform(0.0, need, horizon))
        e_min = np.minimum(e_min, np.cumsum(0.8 * p_plus))
        e_max = e_min + rng.uniform(0.3, 1.0) * power
        e_max = np.maximum.accumulate(e_max)
        for t in range(horizon):
            s_up = rng.uniform(0.1, 0.6)
            s_dn = -rng.uniform(0.1, 0.6)
            dt_up = rng.uniform(0.3, 0.7)
            sc.append(da_mod.ScenarioHour(
                s_up=s_up, s_dn=s_dn, dt_up=dt_up, dt_dn=1.0 - dt_up,
                mileage=rng.uniform(50.0, 200.0),
                p_plus=float(p_plus[t]), p_minus=float(-p_plus[t]),
                e_minus=float(e_min[t]), e_plus=float(e_max[t])))
        hours.append(sc)
    probs = rng.uniform(0.2, 1.0, n_w)
    return da_mod.FleetScenarioSet(probs / probs.sum(), hours)


def random_prices(rng, horizon, c_d=0.17):
    return da_mod.MarketPrices(
        c_e_da=rng.uniform(0.02, 0.05, horizon),
        c_e_rt=rng.uniform(0.03, 0.08, horizon),
        c_rc=rng.uniform(0.03, 0.08, horizon),
        c_rp=rng.uniform(2e-4, 8e-4, horizon),
        c_d=c_d)


def random_stats(rng):
    return SignalStatistics(
        mean_s1=float(rng.uniform(-0.05, 0.05)),
        var_s1=float(rng.uniform(0.05, 0.15)),
        mean_sH=float(rng.uniform(-0.03, 0.03)),
        var_sH=float(rng.uniform(0.002, 0.01)),
        rho=float(rng.uniform(0.0, 0.5)),
        mean_mileage=float(rng.uniform(50.0, 200.0)),
        sample_count=24)


def random_hourahead(rng, eps=0.2, strategy="proposed", future_block=False,
                     eta=0.92):
    """A consistent random hour-ahead problem at hour 0 of a fresh day."""
    scen = random_scenarios(rng)
    prices = random_prices(rng, scen.horizon)
    da = da_mod.solve_dayahead(da_mod.build_dayahead(prices, scen, eta, eta))
    stats = random_stats(rng)
    fc = sim.hourly_forecast(scen, 0)
    prob = ha_mod.build_hourahead(da, 0, prices, scen, stats, fc, eps=eps,
                                  eta_c=eta, eta_d=eta,
                                  future_block=future_block, strategy=strategy)
    return prob, da


@pytest.fixture(scope="session")
def history_900():
    """Two days of 900-sample synthetic signal history (shared, read-only)."""
    return sig.synthesize_trajectories(48, seed=7, samples_per_hour=900)


@pytest.fixture(scope="session")
def stats_900(history_900):
    return fit_signal_stats(history_900, bins=10)
