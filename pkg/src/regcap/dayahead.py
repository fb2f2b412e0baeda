"""Day-ahead joint energy schedule and regulation capacity offer.

Two-stage stochastic MILP over aggregate-signal scenarios: first-stage
hourly grid schedule, second-stage per-scenario regulation capacities
with charge/discharge mode binaries and a cumulative-energy corridor.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import solver

TIE_BREAK = 1e-9

DIRS = ("up", "dn")


class ModelError(ValueError):
    pass


@dataclass
class MarketPrices:
    """Hourly price forecasts ($/kWh) plus the degradation price."""

    c_e_da: np.ndarray
    c_e_rt: np.ndarray
    c_rc: np.ndarray
    c_rp: np.ndarray
    c_d: float = 0.0

    def __post_init__(self):
        for name in ("c_e_da", "c_e_rt", "c_rc", "c_rp"):
            arr = np.asarray(getattr(self, name), dtype=float)
            setattr(self, name, arr)
            if not np.all(np.isfinite(arr)):
                raise ModelError(f"non-finite price in {name}")
        if self.c_d < 0.0:
            raise ModelError("degradation price must be >= 0")

    @property
    def horizon(self):
        return self.c_e_da.size

    @classmethod
    def from_csv(cls, fh, c_d=0.0):
        import csv
        rows = list(csv.DictReader(fh))
        rows.sort(key=lambda r: int(r["hour"]))
        return cls(
            c_e_da=np.array([float(r["c_e_da"]) for r in rows]),
            c_e_rt=np.array([float(r["c_e_rt"]) for r in rows]),
            c_rc=np.array([float(r["c_rc"]) for r in rows]),
            c_rp=np.array([float(r["c_rp"]) for r in rows]),
            c_d=c_d)

    def to_csv(self, fh):
        fh.write("hour,c_e_da,c_e_rt,c_rc,c_rp\n")
        for t in range(self.horizon):
            fh.write(f"{t},{self.c_e_da[t]:.9g},{self.c_e_rt[t]:.9g},"
                     f"{self.c_rc[t]:.9g},{self.c_rp[t]:.9g}\n")


@dataclass
class ScenarioHour:
    s_up: float
    s_dn: float
    dt_up: float
    dt_dn: float
    mileage: float
    p_plus: float
    p_minus: float
    e_minus: float
    e_plus: float


@dataclass
class FleetScenarioSet:
    """Scenarios of aggregate signals and capacity envelopes."""

    probabilities: np.ndarray
    hours: list  # hours[w][t] -> ScenarioHour

    def __post_init__(self):
        self.probabilities = np.asarray(self.probabilities, dtype=float)
        if abs(self.probabilities.sum() - 1.0) > 1e-9:
            raise ModelError("scenario probabilities must sum to 1")
        horizon = len(self.hours[0])
        for w, sc in enumerate(self.hours):
            if len(sc) != horizon:
                raise ModelError("ragged scenario horizons")
            for t, h in enumerate(sc):
                if h.p_plus < 0.0 or h.p_minus > 0.0:
                    raise ModelError(f"scenario {w} hour {t}: power envelope sign")
                if h.e_minus > h.e_plus + 1e-9:
                    raise ModelError(f"scenario {w} hour {t}: e- > e+")
                if not (h.s_up >= 0.0 >= h.s_dn):
                    raise ModelError(f"scenario {w} hour {t}: signal sign")

    @property
    def n_scenarios(self):
        return self.probabilities.size

    @property
    def horizon(self):
        return len(self.hours[0])

    def to_jsonl(self, fh):
        for w, sc in enumerate(self.hours):
            for t, h in enumerate(sc):
                rec = {"scenario": w, "hour": t,
                       "probability": float(self.probabilities[w])}
                rec.update({k: float(getattr(h, k)) for k in (
                    "s_up", "s_dn", "dt_up", "dt_dn", "mileage",
                    "p_plus", "p_minus", "e_minus", "e_plus")})
                fh.write(json.dumps(rec) + "\n")

    @classmethod
    def from_jsonl(cls, fh):
        recs = [json.loads(line) for line in fh if line.strip()]
        if not recs:
            raise ModelError("empty scenario file")
        n_w = max(r["scenario"] for r in recs) + 1
        n_t = max(r["hour"] for r in recs) + 1
        probs = np.zeros(n_w)
        hours = [[None] * n_t for _ in range(n_w)]
        for r in recs:
            w, t = r["scenario"], r["hour"]
            probs[w] = r["probability"]
            hours[w][t] = ScenarioHour(**{k: r[k] for k in (
                "s_up", "s_dn", "dt_up", "dt_dn", "mileage",
                "p_plus", "p_minus", "e_minus", "e_plus")})
        if any(h is None for sc in hours for h in sc):
            raise ModelError("scenario file has gaps")
        return cls(probs, hours)


@dataclass
class DayAheadSolution:
    p_gr_da: np.ndarray
    r_da: np.ndarray
    r_scen: np.ndarray  # (n_scenarios, horizon)
    objective: float
    revenue_regulation: float
    cost_energy: float
    cost_degradation: float
    gap: float = 0.0
    diagnostics: dict = field(default_factory=dict)

    def to_json(self):
        return json.dumps({
            "p_gr_da": [float(v) for v in self.p_gr_da],
            "r_da": [float(v) for v in self.r_da],
            "r_scen": [[float(v) for v in row] for row in self.r_scen],
            "objective": self.objective,
            "revenue_regulation": self.revenue_regulation,
            "cost_energy": self.cost_energy,
            "cost_degradation": self.cost_degradation,
            "gap": self.gap,
        }, indent=1)

    @classmethod
    def from_json(cls, text):
        d = json.loads(text)
        return cls(np.asarray(d["p_gr_da"]), np.asarray(d["r_da"]),
                   np.asarray(d["r_scen"]), d["objective"],
                   d["revenue_regulation"], d["cost_energy"],
                   d["cost_degradation"], d.get("gap", 0.0))


@dataclass
class DayAheadModel:
    mip: solver.MixedIntegerProgram
    index: dict
    prices: MarketPrices
    scen: FleetScenarioSet
    eta_c: float
    eta_d: float
    horizon: int


def build_dayahead(prices: MarketPrices, scen: FleetScenarioSet,
                   eta_c: float, eta_d: float,
                   horizon: int | None = None) -> DayAheadModel:
    """Assemble the MILP (schedule, capacities, modes, energy corridor)."""
    if horizon is None:
        horizon = min(prices.horizon, scen.horizon)
    if horizon < 1:
        raise ModelError("horizon must be >= 1")
    if prices.horizon < horizon or scen.horizon < horizon:
        raise ModelError("scenario/price data shorter than horizon")
    if not (0.0 < eta_c <= 1.0 and 0.0 < eta_d <= 1.0):
        raise ModelError("efficiencies must be in (0, 1]")
    n_w = scen.n_scenarios
    p_plus_all = [scen.hours[w][t].p_plus for w in range(n_w) for t in range(horizon)]
    p_minus_all = [scen.hours[w][t].p_minus for w in range(n_w) for t in range(horizon)]
    r_cap = max(p_plus_all) + abs(min(p_minus_all))

    mb = solver.ModelBuilder()
    inf = solver.INF
    idx = {}
    for t in range(horizon):
        idx["P", t] = mb.var(f"P[{t}]", lo=-inf, hi=inf,
                             obj=-prices.c_e_da[t])
    for w in range(n_w):
        pi = scen.probabilities[w]
        for t in range(horizon):
            h = scen.hours[w][t]
            idx["R", w, t] = mb.var(
                f"R[{w},{t}]", lo=0.0, hi=r_cap,
                obj=pi * (prices.c_rc[t] + prices.c_rp[t] * h.mileage) - TIE_BREAK)
            dts = {"up": h.dt_up, "dn": h.dt_dn}
            for dr in DIRS:
                idx["Pc", w, t, dr] = mb.var(f"Pc[{w},{t},{dr}]", lo=0.0, hi=h.p_plus)
                # degradation cost: -c_d * E_der_d; E_der_d = -sum dt*Pd
                idx["Pd", w, t, dr] = mb.var(f"Pd[{w},{t},{dr}]",
                                             lo=h.p_minus, hi=0.0,
                                             obj=pi * prices.c_d * dts[dr])
                idx["D", w, t, dr] = mb.var(f"D[{w},{t},{dr}]", lo=0.0, hi=1.0)
    binaries = [idx["D", w, t, dr]
                for w in range(n_w) for t in range(horizon) for dr in DIRS]
    for w in range(n_w):
        for t in range(horizon):
            h = scen.hours[w][t]
            for dr, s_dir in (("up", h.s_up), ("dn", h.s_dn)):
                # grid/resource power balance
                mb.constr([(idx["P", t], 1.0), (idx["R", w, t], -s_dir),
                           (idx["Pc", w, t, dr], -1.0 / eta_c),
                           (idx["Pd", w, t, dr], -eta_d)], "=", 0.0)
                # mode exclusivity through the binary
                mb.constr([(idx["Pc", w, t, dr], 1.0),
                           (idx["D", w, t, dr], h.p_plus)], "<", h.p_plus)
                mb.constr([(idx["Pd", w, t, dr], 1.0),
                           (idx["D", w, t, dr], -h.p_minus)], ">", 0.0)
            # cumulative energy corridor through hour t
            terms = []
            for tau in range(t + 1):
                htau = scen.hours[w][tau]
                for dr, dt_len in (("up", htau.dt_up), ("dn", htau.dt_dn)):
                    terms.append((idx["Pc", w, tau, dr], dt_len))
                    terms.append((idx["Pd", w, tau, dr], dt_len))
            mb.constr(terms, ">", h.e_minus)
            mb.constr(terms, "<", h.e_plus)
    lp = mb.build()
    mip = solver.MixedIntegerProgram(lp, binaries)
    return DayAheadModel(mip=mip, index=idx, prices=prices, scen=scen,
                         eta_c=eta_c, eta_d=eta_d, horizon=horizon)


def solve_dayahead(model: DayAheadModel, gap: float = 1e-6) -> DayAheadSolution:
    res = solver.solve_milp(model.mip, gap=gap)
    if res.status == "infeasible":
        raise ModelError("day-ahead model infeasible")
    if res.status == "unbounded":
        raise ModelError("day-ahead model unbounded")
    x = res.x
    idx = model.index
    T, n_w = model.horizon, model.scen.n_scenarios
    prices, scen = model.prices, model.scen
    p_gr = np.array([x[idx["P", t]] for t in range(T)])
    r_scen = np.array([[x[idx["R", w, t]] for t in range(T)] for w in range(n_w)])
    r_da = r_scen.max(axis=0)
    rev = sum(scen.probabilities[w]
              * (prices.c_rc[t] + prices.c_rp[t] * scen.hours[w][t].mileage)
              * r_scen[w, t]
              for w in range(n_w) for t in range(T))
    cost_e = float(np.dot(prices.c_e_da[:T], p_gr))
    cost_deg = 0.0
    for w in range(n_w):
        for t in range(T):
            h = scen.hours[w][t]
            e_der_d = -(h.dt_up * x[idx["Pd", w, t, "up"]]
                        + h.dt_dn * x[idx["Pd", w, t, "dn"]])
            cost_deg += scen.probabilities[w] * prices.c_d * e_der_d
    return DayAheadSolution(
        p_gr_da=p_gr, r_da=r_da, r_scen=r_scen,
        objective=float(rev - cost_e - cost_deg),
        revenue_regulation=float(rev), cost_energy=cost_e,
        cost_degradation=float(cost_deg), gap=res.gap,
        diagnostics={"nodes": res.nodes, "raw_obj": res.obj})
