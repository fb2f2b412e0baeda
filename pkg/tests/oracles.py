"""Independent oracles used by the test suite.

scipy (HiGHS) provides the reference LP solutions; everything else is
direct-formula or brute-force numpy, deliberately sharing no code with
the package under test.
"""

import numpy as np
from scipy.optimize import linprog

from regcap.solver import INF


def scipy_solve(lp, lo=None, hi=None):
    """Reference solve of a regcap LinearProgram (maximization).

    Returns (status, x, obj) with status in optimal/infeasible/unbounded.
    """
    lo = lp.lo if lo is None else lo
    hi = lp.hi if hi is None else hi
    a = lp.dense_matrix()
    a_ub, b_ub, a_eq, b_eq = [], [], [], []
    for i, sense in enumerate(lp.senses):
        if sense == "<":
            a_ub.append(a[i]); b_ub.append(lp.rhs[i])
        elif sense == ">":
            a_ub.append(-a[i]); b_ub.append(-lp.rhs[i])
        else:
            a_eq.append(a[i]); b_eq.append(lp.rhs[i])
    bounds = [(None if l == -INF else l, None if h == INF else h)
              for l, h in zip(lo, hi)]
    res = linprog(-lp.c,
                  A_ub=np.array(a_ub) if a_ub else None,
                  b_ub=np.array(b_ub) if b_ub else None,
                  A_eq=np.array(a_eq) if a_eq else None,
                  b_eq=np.array(b_eq) if b_eq else None,
                  bounds=bounds, method="highs")
    if res.status == 0:
        return "optimal", res.x, float(-res.fun)
    if res.status == 2:
        return "infeasible", None, float("nan")
    if res.status == 3:
        return "unbounded", None, float("nan")
    raise RuntimeError(f"linprog status {res.status}: {res.message}")


def milp_enumerate(mip):
    """Exhaustive optimum over every binary pattern.

    Depth-first over the binaries with LP-relaxation bound pruning
    (sound: the relaxation dominates every completion), scipy LPs at
    the nodes. Returns (status, best_obj).
    """
    lp = mip.lp
    order = list(mip.binary_idx)
    best = [-np.inf]

    def rec(k, lo, hi):
        st, _, obj = scipy_solve(lp, lo, hi)
        if st != "optimal":
            return
        if obj <= best[0] + 1e-10:
            return
        if k == len(order):
            best[0] = max(best[0], obj)
            return
        j = order[k]
        for b in (0.0, 1.0):
            lo2 = lo.copy(); hi2 = hi.copy()
            lo2[j] = hi2[j] = b
            rec(k + 1, lo2, hi2)

    rec(0, lp.lo.copy(), lp.hi.copy())
    if best[0] == -np.inf:
        return "infeasible", float("nan")
    return "optimal", best[0]


def hourahead_grid(prob, n=2000, zoom=4):
    """Grid-search optimum of a future-block-off hour-ahead problem.

    Searches an n-point grid over R. For each R column the feasible P
    set is an interval (every constraint is convex in P); its endpoints
    come from vectorized bisection on the cone functions and the
    objective is piecewise-linear concave in P, so checking the interval
    endpoints and the kink points resolves the column optimum exactly.
    The grid then zooms around the best column a few times. A plain
    (R, P) product grid misses thin corners between near-parallel active
    constraints by far more than the comparison tolerance, which is why
    the P axis is handled exactly instead.
    """
    assert prob.future_hours == 0, "oracle only covers future_block=False"
    t = prob.hour
    prices, scen = prob.prices, prob.scen
    n_w = scen.n_scenarios
    eta_c, eta_d = prob.eta_c, prob.eta_d
    coef_r = prob.lp.c[prob.index["R"]] + 1e-9  # strip the tie-break
    sign_da = 1.0 if prob.p_gr_da >= 0.0 else -1.0
    rows = [(h.s_up, h.dt_up, scen.probabilities[w], h) for w in range(n_w)
            for h in [scen.hours[w][t]]]
    rows += [(h.s_dn, h.dt_dn, scen.probabilities[w], h) for w in range(n_w)
             for h in [scen.hours[w][t]]]

    def objective(R, P):
        obj = coef_r * R - prices.c_e_rt[t] * np.abs(P - prob.p_gr_da)
        for s_dir, dt_len, pi, h in rows:
            y = P - s_dir * R
            obj = obj + pi * prices.c_d * dt_len * np.minimum(y, 0.0) / eta_d
        return obj

    def column_best(R):
        """Exact max over P for each R in the array (vectorized)."""
        lo = np.full_like(R, -INF)
        hi = np.full_like(R, INF)
        for s_dir, _, _, h in rows:
            lo = np.maximum(lo, eta_d * h.p_minus + s_dir * R)
            hi = np.minimum(hi, h.p_plus / eta_c + s_dir * R)
        if sign_da > 0:
            lo = np.maximum(lo, 0.0)
        else:
            hi = np.minimum(hi, 0.0)
        feas = lo <= hi + 1e-12
        for cone in prob.cones:
            g0, g1, g2 = cone.gamma
            d0, d1, d2 = cone.dbar
            a = g0 * R ** 2 + g2
            c = d0 * R + d2
            k = cone.kappa

            def f(P):
                return k * np.sqrt(a + g1 * P ** 2) + d1 * P + c

            # minimizer of the convex column function f
            if g1 > 0.0 and k * k * g1 > d1 * d1:
                pm = -np.sign(d1) * np.sqrt(
                    d1 * d1 * a / (g1 * (k * k * g1 - d1 * d1)))
            elif d1 > 0.0:
                pm = lo.copy()
            elif d1 < 0.0:
                pm = hi.copy()
            else:  # d1 == 0 and f constant-in-slope: flat or V at 0
                pm = np.zeros_like(R)
            pm = np.clip(pm, lo, hi)
            feas &= f(pm) <= 1e-9
            # bisect for the interval endpoints f(P) = 0 on each side
            for side, box in ((+1, hi), (-1, lo)):
                need = f(box) > 1e-9
                a_pt = pm.copy()
                b_pt = box.copy()
                for _ in range(100):
                    mid = 0.5 * (a_pt + b_pt)
                    inside = f(mid) <= 1e-9
                    a_pt = np.where(inside, mid, a_pt)
                    b_pt = np.where(inside, b_pt, mid)
                bound = np.where(need, a_pt, box)
                if side > 0:
                    hi = np.minimum(hi, bound)
                else:
                    lo = np.maximum(lo, bound)
        # concave piecewise-linear in P: optimum at an interval endpoint
        # or at a kink (the schedule point and every y = 0 crossing)
        cands = [lo, hi, np.full_like(R, prob.p_gr_da)]
        cands += [s_dir * R for s_dir, _, _, _ in rows]
        best = np.full_like(R, -np.inf)
        for P in cands:
            ok = feas & (P >= lo - 1e-9) & (P <= hi + 1e-9)
            val = objective(R, np.clip(P, lo, hi))
            best = np.maximum(best, np.where(ok, val, -np.inf))
        return best

    rr = np.linspace(0.0, prob.r_da, n)
    best = -np.inf
    for _ in range(zoom):
        vals = column_best(rr)
        k = int(np.argmax(vals))
        best = max(best, float(vals[k]))
        if not np.isfinite(best):
            break
        rr = np.linspace(rr[max(k - 1, 0)], rr[min(k + 1, rr.size - 1)], n)
    return best


def monte_carlo_violations(sol, moments, n_draws=100_000, seed=0):
    """Per-cone empirical violation frequency under the Gaussian model.

    Draws d~_j ~ N(dbar_j, Gamma_j) and counts d~_j . [R, P, 1] > 0.
    Returns {label: frequency}.
    """
    rng = np.random.default_rng(seed)
    x_hat = np.array([sol.r, sol.p_gr_ha, 1.0])
    out = {}
    for j in (1, 2, 3, 4):
        sd = np.sqrt(moments.gamma[j])
        draws = moments.dbar[j] + sd * rng.standard_normal((n_draws, 3))
        out[f"j{j}"] = float(np.mean(draws @ x_hat > 0.0))
    return out


def simplex_tableau_oracle(c, a, b):
    """Tiny dense standard-form oracle: max c x, a x <= b, x >= 0.

    Bland's rule full-tableau simplex; only for hand-sized instances.
    Returns (status, x, obj).
    """
    c = np.asarray(c, dtype=float)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    m, n = a.shape
    if np.any(b < 0.0):
        raise ValueError("oracle needs b >= 0")
    tab = np.zeros((m + 1, n + m + 1))
    tab[:m, :n] = a
    tab[:m, n:n + m] = np.eye(m)
    tab[:m, -1] = b
    tab[m, :n] = -c
    basis = list(range(n, n + m))
    for _ in range(10000):
        piv_col = next((j for j in range(n + m) if tab[m, j] < -1e-12), None)
        if piv_col is None:
            x = np.zeros(n + m)
            x[basis] = tab[:m, -1]
            return "optimal", x[:n], float(tab[m, -1])
        ratios = [(tab[i, -1] / tab[i, piv_col], basis[i], i)
                  for i in range(m) if tab[i, piv_col] > 1e-12]
        if not ratios:
            return "unbounded", None, float("inf")
        _, _, piv_row = min(ratios)
        tab[piv_row] /= tab[piv_row, piv_col]
        for i in range(m + 1):
            if i != piv_row and tab[i, piv_col] != 0.0:
                tab[i] -= tab[i, piv_col] * tab[piv_row]
        basis[piv_row] = piv_col
    raise RuntimeError("oracle did not converge")
