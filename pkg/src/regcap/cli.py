"""Command-line orchestration: aggregate, stats, offers, simulation,
benchmark, and report emission.

Configuration is a flat ``key = value`` file (``#`` comments); CLI flags
override config keys. All randomness derives from the single ``seed``
key. Numbers are serialized with 9 significant digits; ledger currency
uses 2 decimals. Exit codes: 2 missing file, 3 validation failure,
4 solver failure.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import dayahead as da_mod
from . import fleetgen
from . import hourahead as ha_mod
from . import signals as sig
from . import simulator as sim
from . import uncertainty as unc
from .solver import SolverError

EXIT_MISSING_FILE = 2
EXIT_VALIDATION = 3
EXIT_SOLVER = 4


def _fmt(x) -> str:
    return f"{float(x):.9g}"


# ---------------------------------------------------------------------------
# configuration

CONFIG_KEYS = {
    "signals": str, "prices": str, "scenarios": str, "outdir": str,
    "strategy": str,
    "eps": float, "c_d": float,
    "bins": int, "horizon": int, "seed": int, "days": int, "hour": int,
    "n_scenarios": int, "samples_per_hour": int, "n_history": int,
    "n_vehicles": int,
    "battery_kwh": float, "eta_c": float, "eta_d": float,
    "trip_energy_mean": float, "trip_energy_std": float,
    "envelope_noise_std": float,
    "future_block": int,
}

DEFAULTS = {
    "eps": 0.2, "bins": 10, "horizon": 6, "seed": 0, "days": 1, "hour": 0,
    "n_scenarios": 2, "samples_per_hour": 900, "n_history": 24,
    "strategy": "proposed", "outdir": ".", "future_block": 1,
}


def load_config(path) -> dict:
    """Parse a flat key = value file; unknown keys are rejected."""
    out = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value'")
            key, _, val = line.partition("=")
            key, val = key.strip(), val.strip()
            if key not in CONFIG_KEYS:
                raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
            try:
                out[key] = CONFIG_KEYS[key](val)
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: bad value for {key!r}") from exc
    return out


def _settings(args) -> dict:
    cfg = dict(DEFAULTS)
    if getattr(args, "config", None):
        cfg.update(load_config(args.config))
    for key in CONFIG_KEYS:
        flag = getattr(args, key, None)
        if flag is not None:
            cfg[key] = CONFIG_KEYS[key](flag)
    if not (0.0 < cfg["eps"] <= 0.5):
        raise ValueError("eps must lie in (0, 0.5]")
    return cfg


def _fleet_config(cfg) -> fleetgen.FleetConfig:
    base = sim.benchmark_config().fleet
    kw = {}
    for key in ("n_vehicles", "battery_kwh", "eta_c", "eta_d", "c_d",
                "trip_energy_mean", "trip_energy_std", "envelope_noise_std"):
        kw[key] = cfg.get(key, getattr(base, key))
    return fleetgen.FleetConfig(**kw)


def _prices(cfg, fleet) -> da_mod.MarketPrices:
    if cfg.get("prices"):
        with open(cfg["prices"], "r", encoding="utf-8") as fh:
            return da_mod.MarketPrices.from_csv(fh, c_d=fleet.c_d)
    return sim.default_prices(cfg["horizon"], fleet.c_d)


def _history(cfg):
    if cfg.get("signals"):
        with open(cfg["signals"], "r", encoding="utf-8") as fh:
            return sig.parse_trajectories(fh, cfg["samples_per_hour"])
    return sig.synthesize_trajectories(
        cfg["n_history"], seed=cfg["seed"] + 1,
        samples_per_hour=cfg["samples_per_hour"])


def _scenarios(cfg, fleet, history) -> da_mod.FleetScenarioSet:
    if cfg.get("scenarios"):
        with open(cfg["scenarios"], "r", encoding="utf-8") as fh:
            return da_mod.FleetScenarioSet.from_jsonl(fh)
    aggs = [sig.aggregate(tr) for tr in history]
    return fleetgen.generate_scenarios(
        fleet, cfg["n_scenarios"], cfg["horizon"], seed=cfg["seed"] + 2,
        signal_aggregates=aggs)


def _write(path, text):
    if path in (None, "-"):
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


# ---------------------------------------------------------------------------
# commands

def cmd_aggregate(args) -> int:
    cfg = _settings(args)
    with open(args.signals, "r", encoding="utf-8") as fh:
        trajs = sig.parse_trajectories(fh, cfg["samples_per_hour"])
    lines = ["hour_id,s_up,s_dn,dt_up_min,dt_dn_min,mileage,s_mean"]
    for tr in trajs:
        a = sig.aggregate(tr)
        lines.append(",".join([a.hour_id, _fmt(a.s_up), _fmt(a.s_dn),
                               _fmt(a.dt_up * 60.0), _fmt(a.dt_dn * 60.0),
                               _fmt(a.mileage), _fmt(a.s_mean)]))
    _write(args.out, "\n".join(lines) + "\n")
    return 0


def cmd_stats(args) -> int:
    cfg = _settings(args)
    with open(args.signals, "r", encoding="utf-8") as fh:
        trajs = sig.parse_trajectories(fh, cfg["samples_per_hour"])
    stats = unc.fit_signal_stats(trajs, bins=cfg["bins"])
    _write(args.out, stats.to_json() + "\n")
    return 0


def cmd_offer_da(args) -> int:
    cfg = _settings(args)
    fleet = _fleet_config(cfg)
    history = _history(cfg)
    scen = _scenarios(cfg, fleet, history)
    prices = _prices(cfg, fleet)
    model = da_mod.build_dayahead(prices, scen, fleet.eta_c, fleet.eta_d)
    sol = da_mod.solve_dayahead(model)
    _write(args.out, sol.to_json() + "\n")
    return 0


def cmd_offer_ha(args) -> int:
    cfg = _settings(args)
    fleet = _fleet_config(cfg)
    history = _history(cfg)
    scen = _scenarios(cfg, fleet, history)
    prices = _prices(cfg, fleet)
    with open(args.da, "r", encoding="utf-8") as fh:
        da_sol = da_mod.DayAheadSolution.from_json(fh.read())
    stats = unc.fit_signal_stats(history, bins=cfg["bins"])
    t = cfg["hour"]
    if not (0 <= t < scen.horizon):
        raise ValueError(f"hour {t} outside scenario horizon {scen.horizon}")
    fc = sim.hourly_forecast(scen, t)
    prob = ha_mod.build_hourahead(
        da_sol, t, prices, scen, stats, fc, eps=cfg["eps"],
        eta_c=fleet.eta_c, eta_d=fleet.eta_d,
        future_block=bool(cfg["future_block"]), strategy=cfg["strategy"])
    sol = ha_mod.solve_hourahead(prob)
    _write(args.out, sol.to_json() + "\n")
    return 0


def _read_offers(path):
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    try:
        data = json.loads(text)
        recs = data if isinstance(data, list) else [data]
    except json.JSONDecodeError:
        recs = [json.loads(line) for line in text.splitlines() if line.strip()]
    offers = {}
    for rec in recs:
        offers[int(rec["hour"])] = (rec.get("strategy", "proposed"),
                                    float(rec["r"]), float(rec["p_gr_ha"]),
                                    float(rec.get("objective", 0.0)))
    if not offers:
        raise ValueError("no offers found")
    return offers


def cmd_simulate(args) -> int:
    cfg = _settings(args)
    fleet = _fleet_config(cfg)
    offers = _read_offers(args.offers)
    with open(args.signals, "r", encoding="utf-8") as fh:
        trajs = sig.parse_trajectories(fh, cfg["samples_per_hour"])
    horizon = max(offers) + 1
    if len(trajs) < horizon:
        raise ValueError(f"need {horizon} signal hours, got {len(trajs)}")
    prices = _prices(cfg, fleet)
    if prices.horizon < horizon:
        raise ValueError("price horizon shorter than offers")
    envs = fleetgen.realize_fleet(fleet, horizon, seed=cfg["seed"] + 3)
    if args.da:
        with open(args.da, "r", encoding="utf-8") as fh:
            p_day = da_mod.DayAheadSolution.from_json(fh.read()).p_gr_da
    else:
        p_day = np.array([offers.get(t, ("", 0.0, 0.0, 0.0))[2]
                          for t in range(horizon)])
    results = {}
    e_real = 0.0
    for t in range(horizon):
        if t not in offers:
            continue
        _, r_t, p_ha, _ = offers[t]
        env = sim.HourlyEnvelope(
            p_plus=envs[t].p_plus, p_minus=envs[t].p_minus,
            e_minus=envs[t].e_minus, e_plus=envs[t].e_plus,
            e_start=min(max(e_real, envs[t].e_minus), envs[t].e_plus))
        res = sim.dispatch((r_t, p_ha), trajs[t], env, fleet.eta_c, fleet.eta_d)
        e_real = res.energy_end
        results[t] = res
    mileages = {t: sig.mileage(trajs[t]) for t in results}
    ledger = sim.settle(results, prices, mileages, None, p_day, offers)
    lines = ["hour,strategy,r_offer,p_da,p_ha,score,violations,"
             "revenue_reg,cost_energy,cost_degradation,revenue_actual"]
    for h in ledger:
        lines.append(",".join([
            str(h.hour), h.strategy, _fmt(h.r_offer), _fmt(h.p_da),
            _fmt(h.p_ha), _fmt(h.score), str(h.violations),
            f"{h.revenue_reg:.2f}", f"{h.cost_energy:.2f}",
            f"{h.cost_degradation:.2f}", f"{h.revenue_actual:.2f}"]))
    _write(args.out, "\n".join(lines) + "\n")
    return 0


def _campaign_config(cfg) -> sim.CampaignConfig:
    base = sim.benchmark_config(eps=cfg["eps"])
    base.fleet = _fleet_config(cfg)
    for key in ("n_scenarios", "n_history", "samples_per_hour", "bins"):
        setattr(base, key, cfg[key])
    base.hours_per_day = cfg["horizon"]
    if cfg.get("prices"):
        base.prices = _prices(cfg, base.fleet)
    return base


def cmd_benchmark(args) -> int:
    cfg = _settings(args)
    camp = _campaign_config(cfg)
    rows, _ = sim.run_campaign(camp, list(sim.STRATEGIES), cfg["days"],
                               seed=cfg["seed"])
    lines = ["strategy,day,offer_mwh,score,revenue_usd"]
    for r in rows:
        lines.append(",".join([r.strategy, str(r.day), _fmt(r.offer_mwh),
                               _fmt(r.score), f"{r.revenue_usd:.2f}"]))
    _write(args.out, "\n".join(lines) + "\n")
    if args.summary:
        summary = sim.summarize_campaign(rows)
        _write(args.summary, json.dumps(summary, indent=1) + "\n")
    return 0


REPORT_HEADER = "one_minus_eps,score,violation_ratio,expected_usd,revenue_usd"


def _sweep_series(cfg):
    rows_out = []
    for one_minus in np.linspace(0.5, 0.95, 10):
        camp = _campaign_config(cfg)
        camp.eps = float(1.0 - one_minus)
        rows, _ = sim.run_campaign(camp, ["proposed"], cfg["days"],
                                   seed=cfg["seed"])
        hours = cfg["days"] * camp.hours_per_day
        rows_out.append((
            float(one_minus),
            float(np.mean([r.score for r in rows])),
            float(sum(r.violation_hours for r in rows)) / hours,
            float(sum(r.expected_usd for r in rows)),
            float(sum(r.revenue_usd for r in rows))))
    return rows_out


def _read_series(path):
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != REPORT_HEADER:
            raise ValueError(f"unexpected report header {header!r}")
        return [tuple(float(v) for v in line.split(","))
                for line in fh if line.strip()]


def _render_figures(series, outdir):
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    conf = [s[0] for s in series]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(conf, [s[1] for s in series], "o-", label="performance score")
    ax.plot(conf, [s[2] for s in series], "s--", label="violation ratio")
    ax.set_xlabel("confidence level 1 - eps")
    ax.set_ylabel("score / ratio")
    ax.legend()
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    score_png = f"{outdir}/score_vs_confidence.png"
    fig.savefig(score_png, dpi=120)
    plt.close(fig)
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(conf, [s[3] for s in series], "o-", label="expected revenue")
    ax.plot(conf, [s[4] for s in series], "s--", label="actual revenue")
    ax.set_xlabel("confidence level 1 - eps")
    ax.set_ylabel("daily total revenue ($)")
    ax.legend()
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    rev_png = f"{outdir}/revenue_vs_confidence.png"
    fig.savefig(rev_png, dpi=120)
    plt.close(fig)
    return [score_png, rev_png]


def cmd_report(args) -> int:
    cfg = _settings(args)
    outdir = cfg["outdir"]
    if args.ledger:
        series = _read_series(args.ledger)
    else:
        series = _sweep_series(cfg)
    lines = [REPORT_HEADER]
    for row in series:
        lines.append(",".join(_fmt(v) for v in row))
    csv_path = f"{outdir}/report_series.csv"
    _write(csv_path, "\n".join(lines) + "\n")
    written = [csv_path] + _render_figures(series, outdir)
    for path in written:
        print(path)
    return 0


# ---------------------------------------------------------------------------
# argument parsing

def _add_common(p):
    p.add_argument("--config", help="flat key = value configuration file")
    p.add_argument("--eps", help="risk tolerance in (0, 0.5]")
    p.add_argument("--bins", help="histogram bins for the divergence radius")
    p.add_argument("--horizon", help="hours in the offer day")
    p.add_argument("--seed", help="single 64-bit seed; all randomness derives from it")
    p.add_argument("--samples-per-hour", dest="samples_per_hour",
                   help="2-second steps per hour (1800 for real archives)")
    p.add_argument("--out", default="-", help="output path (default stdout)")


def build_parser():
    ap = argparse.ArgumentParser(
        prog="regcap",
        description="Regulation-capacity offering toolkit: signal statistics, "
                    "day-ahead and hour-ahead offers, dispatch replay, "
                    "benchmark campaigns, and reports.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("aggregate", help="hourly two-block aggregates of a signals CSV")
    p.add_argument("--signals", required=True, help="signals CSV (hour_id,step,signal)")
    _add_common(p)
    p.set_defaults(func=cmd_aggregate)

    p = sub.add_parser("stats", help="signal statistics JSON incl. divergence radius")
    p.add_argument("--signals", required=True)
    _add_common(p)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("offer-da", help="solve the day-ahead commitment")
    p.add_argument("--signals", help="signal history CSV (else synthesized)")
    p.add_argument("--prices", help="prices CSV (else bundled defaults)")
    p.add_argument("--scenarios", help="scenario JSONL (else generated)")
    p.add_argument("--n-scenarios", dest="n_scenarios")
    _add_common(p)
    p.set_defaults(func=cmd_offer_da)

    p = sub.add_parser("offer-ha", help="hour-ahead reoffer for one hour")
    p.add_argument("--da", required=True, help="day-ahead solution JSON")
    p.add_argument("--hour", required=True)
    p.add_argument("--signals", help="signal history CSV (else synthesized)")
    p.add_argument("--prices")
    p.add_argument("--scenarios")
    p.add_argument("--strategy", choices=sim.STRATEGIES)
    p.add_argument("--future-block", dest="future_block",
                   help="1/0: include the receding-horizon block")
    _add_common(p)
    p.set_defaults(func=cmd_offer_ha)

    p = sub.add_parser("simulate", help="dispatch offers against realized signals")
    p.add_argument("--offers", required=True, help="offer JSON (array or lines)")
    p.add_argument("--signals", required=True, help="realized signals CSV")
    p.add_argument("--da", help="day-ahead solution JSON for settlement baseline")
    p.add_argument("--prices")
    _add_common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("benchmark", help="four-strategy campaign comparison")
    p.add_argument("--days")
    p.add_argument("--prices")
    p.add_argument("--summary", help="also write a JSON summary here")
    _add_common(p)
    p.set_defaults(func=cmd_benchmark)

    p = sub.add_parser("report", help="risk-sweep series CSV plus rendered figures")
    p.add_argument("--ledger", help="existing report series CSV to re-plot")
    p.add_argument("--days")
    p.add_argument("--prices")
    p.add_argument("--outdir", help="directory for CSV and PNG outputs")
    _add_common(p)
    p.set_defaults(func=cmd_report)
    return ap


def _fail(code, exc) -> int:
    record = {"error": type(exc).__name__, "message": str(exc)}
    print(json.dumps(record), file=sys.stderr)
    return code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        return _fail(EXIT_MISSING_FILE, exc)
    except SolverError as exc:
        return _fail(EXIT_SOLVER, exc)
    except (ValueError, KeyError) as exc:
        # covers signal/model/dispatch/estimation errors, all ValueErrors
        return _fail(EXIT_VALIDATION, exc)


if __name__ == "__main__":
    sys.exit(main())
