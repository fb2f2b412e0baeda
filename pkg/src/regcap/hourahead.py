"""Hour-ahead capacity offering as a cone-constrained program.

The four probabilistic power/energy limits enter as second-order cone
restrictions kappa_j * ||Gamma_j^(1/2) X^|| + dbar_j . X^ <= 0 over
X^ = [R, P, 1]. The core is solved by Kelley cutting planes on a
master LP that also carries the relaxed per-scenario degradation block
and an optional receding-horizon block of the remaining hours priced
at day-ahead forecasts. Benchmark strategies (robust worst-case,
deterministic means, efficiency-ignoring) reuse the same machinery.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import solver
from .dayahead import DayAheadSolution, FleetScenarioSet, MarketPrices, ModelError, DIRS
from .uncertainty import (MomentData, SignalStatistics, CapacityForecast,
                          adjusted_epsilon, gaussian_quantile, assemble_moments)

CONE_TOL = 1e-6
MAX_CUT_ITERS = 200
TIE_BREAK = 1e-9


@dataclass
class ConeConstraint:
    kappa: float
    dbar: np.ndarray        # (3,)
    gamma: np.ndarray       # (3,) diagonal entries
    label: str

    def value(self, x_hat):
        norm = math.sqrt(float(np.dot(self.gamma, np.asarray(x_hat) ** 2)))
        return self.kappa * norm + float(np.dot(self.dbar, x_hat))

    def gradient(self, x_hat):
        """Subgradient wrt (R, P); zero norm-gradient at the origin."""
        x_hat = np.asarray(x_hat, dtype=float)
        norm = math.sqrt(float(np.dot(self.gamma, x_hat ** 2)))
        if norm > 0.0:
            g = self.kappa * (self.gamma * x_hat) / norm + self.dbar
        else:
            g = self.dbar.copy()
        return g[:2]


def build_cones(moments: MomentData, eps: float, eps_prime: float):
    """The four cone constraints of the safe approximation."""
    if not (0.0 < eps <= 0.5):
        raise ModelError("eps must lie in (0, 0.5]")
    for j in (1, 2, 3, 4):
        if np.any(moments.gamma[j] < 0.0):
            raise ModelError(f"negative variance entry in constraint {j}")
    kappa_12 = math.sqrt((1.0 - eps) / eps)
    kappa_34 = max(0.0, gaussian_quantile(1.0 - eps_prime))
    out = []
    for j in (1, 2, 3, 4):
        kappa = kappa_12 if j in (1, 2) else kappa_34
        out.append(ConeConstraint(kappa=kappa, dbar=moments.dbar[j].copy(),
                                  gamma=moments.gamma[j].copy(), label=f"j{j}"))
    return out


@dataclass
class HourAheadProblem:
    hour: int
    eps: float
    eps_prime: float
    rho: float
    cones: list
    lp: solver.LinearProgram
    index: dict
    scen: FleetScenarioSet
    prices: MarketPrices
    p_gr_da: float
    r_da: float
    eta_c: float
    eta_d: float
    strategy: str = "proposed"
    future_hours: int = 0
    kappa_12: float = 0.0
    kappa_34: float = 0.0


@dataclass
class HourAheadSolution:
    hour: int
    r: float
    p_gr_ha: float
    dp: float
    objective: float
    revenue_regulation: float
    cost_deviation: float
    cost_degradation: float
    future_value: float
    cone_slacks: dict
    e_der_scen: np.ndarray
    eps: float
    eps_prime: float
    rho: float
    strategy: str
    iterations: int = 0
    saturated: bool = False
    diagnostics: dict = field(default_factory=dict)

    def to_json(self):
        d = {
            "hour": self.hour, "r": self.r, "p_gr_ha": self.p_gr_ha,
            "dp": self.dp, "objective": self.objective,
            "revenue_regulation": self.revenue_regulation,
            "cost_deviation": self.cost_deviation,
            "cost_degradation": self.cost_degradation,
            "future_value": self.future_value,
            "cone_slacks": self.cone_slacks,
            "e_der_scen": [float(v) for v in np.atleast_1d(self.e_der_scen)],
            "eps": self.eps, "eps_prime": self.eps_prime, "rho": self.rho,
            "strategy": self.strategy, "iterations": self.iterations,
            "saturated": self.saturated,
        }
        return json.dumps(d)

    @classmethod
    def from_json(cls, text):
        d = json.loads(text)
        d["e_der_scen"] = np.asarray(d["e_der_scen"])
        return cls(**d)


def _master_lp(da, t, prices, scen, eta_c, eta_d, mean_mileage,
               future_block=True, mean_e0=0.0, linear_rows=()):
    """Master LP: objective, box/linear constraints, degradation block,
    optional receding-horizon block; cones enter later as cuts."""
    p_da = float(da.p_gr_da[t])
    r_da = float(da.r_da[t])
    sign_da = 1.0 if p_da >= 0.0 else -1.0
    T = min(scen.horizon, prices.horizon)
    n_w = scen.n_scenarios
    mb = solver.ModelBuilder()
    inf = solver.INF
    p_hi = max(h.p_plus for sc in scen.hours for h in sc) / eta_c
    p_lo = eta_d * min(h.p_minus for sc in scen.hours for h in sc)
    big = 10.0 * (abs(p_da) + r_da + p_hi - p_lo + 1.0)
    idx = {}
    idx["R"] = mb.var("R", lo=0.0, hi=r_da,
                      obj=(prices.c_rc[t] + prices.c_rp[t] * mean_mileage) - TIE_BREAK)
    idx["P"] = mb.var("P", lo=-big, hi=big)
    idx["dP"] = mb.var("dP", lo=0.0, hi=inf, obj=-prices.c_e_rt[t])
    mb.constr([(idx["dP"], 1.0), (idx["P"], -1.0)], ">", -p_da)
    mb.constr([(idx["dP"], 1.0), (idx["P"], 1.0)], ">", p_da)
    # proof premise made explicit: hour-ahead schedule keeps the
    # day-ahead sign
    mb.constr([(idx["P"], sign_da)], ">", 0.0)

    def _block(w, tau, p_var, r_var):
        h = scen.hours[w][tau]
        pi = scen.probabilities[w]
        dts = {"up": h.dt_up, "dn": h.dt_dn}
        for dr, s_dir in (("up", h.s_up), ("dn", h.s_dn)):
            pc = mb.var(f"Pc[{w},{tau},{dr}]", lo=0.0, hi=h.p_plus)
            pd = mb.var(f"Pd[{w},{tau},{dr}]", lo=h.p_minus, hi=0.0,
                        obj=pi * prices.c_d * dts[dr])
            dv = mb.var(f"D[{w},{tau},{dr}]", lo=0.0, hi=1.0)
            idx["Pc", w, tau, dr] = pc
            idx["Pd", w, tau, dr] = pd
            mb.constr([(p_var, 1.0), (r_var, -s_dir),
                       (pc, -1.0 / eta_c), (pd, -eta_d)], "=", 0.0)
            mb.constr([(pc, 1.0), (dv, h.p_plus)], "<", h.p_plus)
            mb.constr([(pd, 1.0), (dv, -h.p_minus)], ">", 0.0)

    # hour-t degradation block (binaries relaxed away)
    for w in range(n_w):
        _block(w, t, idx["P"], idx["R"])

    future_value_terms = []
    n_future = 0
    if future_block and t + 1 < T:
        n_future = T - (t + 1)
        for tau in range(t + 1, T):
            idx["Pf", tau] = mb.var(f"Pf[{tau}]", lo=-inf, hi=inf,
                                    obj=-prices.c_e_da[tau])
            future_value_terms.append((idx["Pf", tau], -prices.c_e_da[tau]))
        for w in range(n_w):
            pi = scen.probabilities[w]
            for tau in range(t + 1, T):
                h = scen.hours[w][tau]
                idx["Rf", w, tau] = mb.var(
                    f"Rf[{w},{tau}]", lo=0.0, hi=r_da + p_hi,
                    obj=pi * (prices.c_rc[tau] + prices.c_rp[tau] * h.mileage)
                        - TIE_BREAK)
                future_value_terms.append(
                    (idx["Rf", w, tau],
                     pi * (prices.c_rc[tau] + prices.c_rp[tau] * h.mileage)))
                _block(w, tau, idx["Pf", tau], idx["Rf", w, tau])
            # cumulative energy corridor from hour t onward
            for tau in range(t, T):
                h = scen.hours[w][tau]
                terms = []
                for kap in range(t, tau + 1):
                    hk = scen.hours[w][kap]
                    for dr, dt_len in (("up", hk.dt_up), ("dn", hk.dt_dn)):
                        terms.append((idx["Pc", w, kap, dr], dt_len))
                        terms.append((idx["Pd", w, kap, dr], dt_len))
                mb.constr(terms, ">", h.e_minus - mean_e0)
                mb.constr(terms, "<", h.e_plus - mean_e0)
    for cols_vals_rhs in linear_rows:
        cols, vals, rhs = cols_vals_rhs
        mb.constr(list(zip(cols, vals)), "<", rhs)
    lp = mb.build()
    return lp, idx, sign_da, n_future


def build_hourahead(da: DayAheadSolution, t: int, prices: MarketPrices,
                    scen: FleetScenarioSet, stats: SignalStatistics,
                    fc: CapacityForecast, eps: float, eta_c: float,
                    eta_d: float, future_block: bool = True,
                    strategy: str = "proposed") -> HourAheadProblem:
    p_da = float(da.p_gr_da[t])
    sign_da = 1 if p_da >= 0.0 else -1
    if strategy == "ignore_eff":
        eta_used = (1.0, 1.0)
    else:
        eta_used = (eta_c, eta_d)
    moments = assemble_moments(stats, fc, sign_da, *eta_used)
    rho = stats.rho
    eps_prime = adjusted_epsilon(eps, rho)
    if strategy in ("determ", "robust"):
        rho = 0.0
        eps_prime = eps
    saturated = eps_prime <= 1.000001e-6
    if strategy == "determ":
        cones = [ConeConstraint(0.0, moments.dbar[j].copy(),
                                np.zeros(3), f"j{j}") for j in (1, 2, 3, 4)]
    elif strategy == "robust":
        cones = _worst_case_rows(stats, fc, sign_da, eta_c, eta_d)
    else:
        cones = build_cones(moments, eps, eps_prime)
    lp, idx, sign, n_future = _master_lp(
        da, t, prices, scen, *eta_used, mean_mileage=stats.mean_mileage,
        future_block=future_block, mean_e0=fc.mean_e0)
    prob = HourAheadProblem(
        hour=t, eps=eps, eps_prime=eps_prime, rho=rho, cones=cones,
        lp=lp, index=idx, scen=scen, prices=prices, p_gr_da=p_da,
        r_da=float(da.r_da[t]), eta_c=eta_used[0], eta_d=eta_used[1],
        strategy=strategy, future_hours=n_future,
        kappa_12=math.sqrt((1.0 - eps) / eps),
        kappa_34=max(0.0, gaussian_quantile(1.0 - eps_prime)))
    prob._saturated = saturated
    return prob


def _worst_case_rows(stats, fc, sign_da, eta_c, eta_d, width=3.0):
    """Deterministic rows with each uncertain input at its adversarial
    extreme (signal bounds, 3-sigma tightened capacities)."""
    sd_s1 = 1.0  # instantaneous signal can reach either rail
    # in the worst scenario the signal parks at a rail for the whole
    # hour, so the hourly average hits the rail too
    s_h_hi = 1.0
    s_h_lo = -1.0
    p_plus_w = max(0.0, fc.mean_p_plus - width * math.sqrt(fc.var_p_plus))
    p_minus_w = min(0.0, fc.mean_p_minus + width * math.sqrt(fc.var_p_minus))
    e0_sd = math.sqrt(fc.var_e0)
    k3 = (1.0 + eta_c * eta_d) / (2.0 * eta_d)
    k3c = (1.0 - eta_c * eta_d) / (2.0 * eta_d)
    p_coef3 = -eta_c if sign_da >= 0 else -1.0 / eta_d
    rows = [
        np.array([eta_c * sd_s1, eta_c, -p_plus_w]),                      # j=1, s=-1
        np.array([sd_s1 / eta_d, -1.0 / eta_d, p_minus_w]),               # j=2, s=+1
        np.array([k3 * s_h_hi + k3c, p_coef3,
                  -(fc.mean_e0 - width * e0_sd)
                  + fc.mean_e_minus + width * math.sqrt(fc.var_e_minus)]),
        np.array([-eta_c * s_h_lo, eta_c,
                  (fc.mean_e0 + width * e0_sd)
                  - (fc.mean_e_plus - width * math.sqrt(fc.var_e_plus))]),
    ]
    return [ConeConstraint(0.0, rows[j], np.zeros(3), f"j{j + 1}")
            for j in range(4)]


def solve_hourahead(prob: HourAheadProblem) -> HourAheadSolution:
    """Kelley cutting planes over the master LP until all cones hold."""
    pool = solver.CutPool(prob.lp)
    if pool.result.status != "optimal":
        worst = _most_violated_at(prob, (0.0, prob.p_gr_da))
        raise ModelError(
            f"hour-ahead master {pool.result.status}; most violated cone {worst}")
    i_r, i_p = prob.index["R"], prob.index["P"]
    iters = 0
    for iters in range(1, MAX_CUT_ITERS + 1):
        x = pool.result.x
        x_hat = np.array([x[i_r], x[i_p], 1.0])
        vals = [c.value(x_hat) for c in prob.cones]
        if max(vals) <= CONE_TOL:
            break
        progressed = False
        for c, v in zip(prob.cones, vals):
            if v > CONE_TOL:
                g = c.gradient(x_hat)
                rhs = float(g @ x_hat[:2]) - v
                res = pool.add_cut([i_r, i_p], [g[0], g[1]], rhs)
                progressed = True
                if res.status != "optimal":
                    return _fallback_restriction(prob, x_hat, iters)
        if not progressed:
            break
    else:
        return _fallback_restriction(prob, x_hat, iters)
    return _extract(prob, pool.result.x, iters)


def _most_violated_at(prob, rp):
    x_hat = np.array([rp[0], rp[1], 1.0])
    vals = [(c.value(x_hat), c.label) for c in prob.cones]
    return max(vals)[1]


def _fallback_restriction(prob, x_hat, iters):
    """Shrink the offer toward the R=0 anchor until all cones hold."""
    anchor = np.array([0.0, prob.p_gr_da, 1.0])
    lam = 1.0
    cur = x_hat.copy()
    for _ in range(60):
        if max(c.value(cur) for c in prob.cones) <= CONE_TOL:
            break
        lam *= 0.5
        cur = anchor + lam * (x_hat - anchor)
    x = np.zeros(prob.lp.n_vars)
    x[prob.index["R"]] = max(0.0, cur[0])
    x[prob.index["P"]] = cur[1]
    x[prob.index["dP"]] = abs(cur[1] - prob.p_gr_da)
    sol = _extract(prob, x, iters, partial=True)
    sol.diagnostics["fallback"] = True
    return sol


def _extract(prob, x, iters, partial=False):
    i_r, i_p = prob.index["R"], prob.index["P"]
    r = max(0.0, float(x[i_r]))
    p = float(x[i_p])
    dp = abs(p - prob.p_gr_da)
    t = prob.hour
    prices, scen = prob.prices, prob.scen
    n_w = scen.n_scenarios
    rev = (prices.c_rc[t] + prices.c_rp[t]
           * _mean_mileage(prob)) * r
    cost_dev = prices.c_e_rt[t] * dp
    cost_deg = 0.0
    e_der = np.zeros(n_w)
    for w in range(n_w):
        h = scen.hours[w][t]
        if partial:
            pd_up, pd_dn = _relaxed_block_opt(p, r, h, prob.eta_c, prob.eta_d)
        else:
            pd_up = x[prob.index["Pd", w, t, "up"]]
            pd_dn = x[prob.index["Pd", w, t, "dn"]]
        e_der_d = -(h.dt_up * pd_up + h.dt_dn * pd_dn)
        cost_deg += scen.probabilities[w] * prices.c_d * e_der_d
        e_der[w] = e_der_d
    future_val = 0.0
    if not partial and prob.future_hours:
        T = t + 1 + prob.future_hours
        for tau in range(t + 1, T):
            future_val -= prices.c_e_da[tau] * x[prob.index["Pf", tau]]
            for w in range(n_w):
                h = scen.hours[w][tau]
                future_val += (scen.probabilities[w]
                               * (prices.c_rc[tau] + prices.c_rp[tau] * h.mileage)
                               * x[prob.index["Rf", w, tau]])
                pd_u = x[prob.index["Pd", w, tau, "up"]]
                pd_d = x[prob.index["Pd", w, tau, "dn"]]
                future_val -= (scen.probabilities[w] * prices.c_d
                               * -(h.dt_up * pd_u + h.dt_dn * pd_d))
    x_hat = np.array([r, p, 1.0])
    slacks = {c.label: -c.value(x_hat) for c in prob.cones}
    return HourAheadSolution(
        hour=t, r=r, p_gr_ha=p, dp=dp,
        objective=float(rev - cost_dev - cost_deg + future_val),
        revenue_regulation=float(rev), cost_deviation=float(cost_dev),
        cost_degradation=float(cost_deg), future_value=float(future_val),
        cone_slacks=slacks, e_der_scen=e_der, eps=prob.eps,
        eps_prime=prob.eps_prime, rho=prob.rho, strategy=prob.strategy,
        iterations=iters, saturated=getattr(prob, "_saturated", False))


def _mean_mileage(prob):
    # the objective built the R coefficient from the fitted mean mileage;
    # recover it from the LP to keep the decomposition consistent
    coef = prob.lp.c[prob.index["R"]] + TIE_BREAK
    t = prob.hour
    return (coef - prob.prices.c_rc[t]) / prob.prices.c_rp[t] \
        if prob.prices.c_rp[t] else 0.0


def _relaxed_block_opt(p, r, h, eta_c, eta_d):
    """Degradation-minimal (Pc, Pd) for fixed (P, R) in one scenario."""
    out = []
    for s_dir in (h.s_up, h.s_dn):
        y = p - s_dir * r
        if y >= 0.0:
            out.append(0.0)
        else:
            out.append(max(y / eta_d, h.p_minus))
    return out[0], out[1]


def robust_offer(da, t, prices, scen, stats, fc, eta_c, eta_d,
                 future_block=True) -> HourAheadSolution:
    prob = build_hourahead(da, t, prices, scen, stats, fc, eps=0.5,
                           eta_c=eta_c, eta_d=eta_d, future_block=future_block,
                           strategy="robust")
    try:
        return solve_hourahead(prob)
    except ModelError:
        return _zero_offer(prob)


def deterministic_offer(da, t, prices, scen, stats, fc, eta_c, eta_d,
                        future_block=True) -> HourAheadSolution:
    prob = build_hourahead(da, t, prices, scen, stats, fc, eps=0.5,
                           eta_c=eta_c, eta_d=eta_d, future_block=future_block,
                           strategy="determ")
    return solve_hourahead(prob)


def ignore_efficiency_offer(da, t, prices, scen, stats, fc, eps,
                            eta_c, eta_d, future_block=True) -> HourAheadSolution:
    prob = build_hourahead(da, t, prices, scen, stats, fc, eps=eps,
                           eta_c=eta_c, eta_d=eta_d, future_block=future_block,
                           strategy="ignore_eff")
    return solve_hourahead(prob)


def _zero_offer(prob):
    x = np.zeros(prob.lp.n_vars)
    x[prob.index["P"]] = prob.p_gr_da
    sol = _extract(prob, x, 0, partial=True)
    sol.diagnostics["infeasible_worst_case"] = True
    return sol
