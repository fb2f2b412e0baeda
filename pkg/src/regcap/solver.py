"""Self-contained LP / MILP kernels.

Dense revised simplex over bounded variables, two-phase start with
artificials, product-form basis-inverse updates with periodic
refactorization, a dual-simplex path for appending cut rows with a
retained basis, and a best-first branch-and-bound wrapper for binaries.

Desk-scale by design (a few thousand rows); no sparse LU, no presolve
beyond bound checks.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field

import numpy as np

# Centralized tolerances.
PERTURB = 1e-9
FEAS_TOL = 1e-8
INT_TOL = 1e-6
OPT_TOL = 1e-9
REFACTOR_EVERY = 50
BLAND_AFTER = 1000

INF = float("inf")


class SolverError(Exception):
    pass


@dataclass
class LinearProgram:
    """max c @ x  s.t.  A x (<=,=,>=) b,  lo <= x <= hi.

    The constraint matrix is stored in triplet form; rows are built
    densely on demand.
    """

    c: np.ndarray
    a_rows: list = field(default_factory=list)
    a_cols: list = field(default_factory=list)
    a_vals: list = field(default_factory=list)
    senses: list = field(default_factory=list)
    rhs: list = field(default_factory=list)
    lo: np.ndarray | None = None
    hi: np.ndarray | None = None

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float)
        n = self.c.size
        if self.lo is None:
            self.lo = np.zeros(n)
        if self.hi is None:
            self.hi = np.full(n, INF)
        self.lo = np.asarray(self.lo, dtype=float)
        self.hi = np.asarray(self.hi, dtype=float)
        if self.lo.size != n or self.hi.size != n:
            raise SolverError("bound vectors do not match objective size")
        if np.any(self.lo > self.hi + FEAS_TOL):
            raise SolverError("variable bounds crossed (lo > hi)")

    @property
    def n_vars(self):
        return self.c.size

    @property
    def n_rows(self):
        return len(self.rhs)

    def add_row(self, cols, vals, sense, rhs):
        if sense not in ("<", "=", ">"):
            raise SolverError("sense must be one of <, =, >")
        cols = list(cols)
        vals = list(vals)
        if len(cols) != len(vals):
            raise SolverError("row dimension mismatch")
        for j in cols:
            if not (0 <= j < self.n_vars):
                raise SolverError("column index out of range")
        r = len(self.rhs)
        self.a_rows.extend([r] * len(cols))
        self.a_cols.extend(cols)
        self.a_vals.extend(vals)
        self.senses.append(sense)
        self.rhs.append(float(rhs))
        return r

    def dense_matrix(self):
        a = np.zeros((self.n_rows, self.n_vars))
        if self.a_rows:
            a[np.asarray(self.a_rows), np.asarray(self.a_cols)] = 0.0
            np.add.at(a, (np.asarray(self.a_rows), np.asarray(self.a_cols)),
                      np.asarray(self.a_vals, dtype=float))
        return a

    def copy(self):
        lp = LinearProgram(self.c.copy(), list(self.a_rows), list(self.a_cols),
                           list(self.a_vals), list(self.senses), list(self.rhs),
                           self.lo.copy(), self.hi.copy())
        return lp

    def write_lp_text(self, path):
        """Plain LP-format export for cross-checking with external tools."""
        a = self.dense_matrix()
        lines = ["Maximize", " obj: " + _lincomb(self.c)]
        lines.append("Subject To")
        for i in range(self.n_rows):
            op = {"<": "<=", "=": "=", ">": ">="}[self.senses[i]]
            lines.append(f" r{i}: {_lincomb(a[i])} {op} {self.rhs[i]:.12g}")
        lines.append("Bounds")
        for j in range(self.n_vars):
            lo = "-inf" if self.lo[j] == -INF else f"{self.lo[j]:.12g}"
            hi = "+inf" if self.hi[j] == INF else f"{self.hi[j]:.12g}"
            lines.append(f" {lo} <= x{j} <= {hi}")
        lines.append("End")
        with open(path, "w") as f:
            f.write("\n".join(lines) + "\n")


def _lincomb(coeffs):
    terms = []
    for j, v in enumerate(coeffs):
        if v != 0.0:
            terms.append(f"{'+' if v >= 0 else '-'} {abs(v):.12g} x{j}")
    return " ".join(terms) if terms else "0 x0"


@dataclass
class MixedIntegerProgram:
    lp: LinearProgram
    binary_idx: list = field(default_factory=list)

    def __post_init__(self):
        for j in self.binary_idx:
            if not (0 <= j < self.lp.n_vars):
                raise SolverError("binary index out of range")


@dataclass
class LPResult:
    status: str  # optimal | infeasible | unbounded
    x: np.ndarray | None = None
    obj: float = float("nan")
    certificate: np.ndarray | None = None  # farkas dual / unbounded ray
    basis: object = None  # opaque warm-start handle


@dataclass
class MILPResult:
    status: str
    x: np.ndarray | None = None
    obj: float = float("nan")
    bound: float = float("nan")
    gap: float = float("nan")
    nodes: int = 0


# nonbasic status codes
_AT_LO, _AT_UP, _FREE = 0, 1, 2


class _Simplex:
    """Bounded-variable revised simplex in equality form (minimization)."""

    def __init__(self, lp: LinearProgram):
        self.lp = lp
        n, m = lp.n_vars, lp.n_rows
        self.n_struct = n
        self.m = m
        a = np.zeros((m, n + m))
        if lp.a_rows:
            np.add.at(a, (np.asarray(lp.a_rows), np.asarray(lp.a_cols)),
                      np.asarray(lp.a_vals, dtype=float))
        lo = np.concatenate([lp.lo, np.zeros(m)])
        hi = np.concatenate([lp.hi, np.zeros(m)])
        for i, s in enumerate(lp.senses):
            a[i, n + i] = 1.0
            if s == "<":
                lo[n + i], hi[n + i] = 0.0, INF
            elif s == ">":
                lo[n + i], hi[n + i] = -INF, 0.0
            else:
                lo[n + i], hi[n + i] = 0.0, 0.0
        self.a = a
        self.lo = lo
        self.hi = hi
        self.b = np.asarray(lp.rhs, dtype=float)
        # internal minimization of -c
        self.cost = np.concatenate([-lp.c, np.zeros(m)])
        self.n_art = 0

    # ---- state helpers -------------------------------------------------
    def _nonbasic_value(self, j):
        st = self.status[j]
        if st == _AT_LO:
            return self.lo[j]
        if st == _AT_UP:
            return self.hi[j]
        return 0.0

    def _nonbasic_vector(self):
        return np.where(self.status == _AT_LO, self.lo,
                        np.where(self.status == _AT_UP, self.hi, 0.0))

    def _x_full(self):
        x = self._nonbasic_vector()
        x[self.basis] = self.xb
        return x

    def _refactor(self):
        bmat = self.a[:, self.basis]
        try:
            self.binv = np.linalg.inv(bmat)
        except np.linalg.LinAlgError:
            raise SolverError("singular basis during refactorization")
        xn = self._nonbasic_vector()
        xn[self.basis] = 0.0
        self.xb = self.binv @ (self.b - self.a @ xn)

    # ---- degeneracy control --------------------------------------------
    # Tiny deterministic outward shifts of every finite bound break the
    # ties that stall the ratio test; after optimizing the perturbed
    # problem the true bounds are restored and a short dual/primal
    # cleanup re-establishes exact feasibility.
    def _perturb_bounds(self):
        self._true_lo = self.lo.copy()
        self._true_hi = self.hi.copy()
        rng = np.random.default_rng(self.a.shape[1])
        u = 0.5 + rng.random(self.lo.size)
        v = 0.5 + rng.random(self.hi.size)
        scale_lo = PERTURB * np.maximum(1.0, np.abs(self.lo, where=np.isfinite(self.lo), out=np.zeros_like(self.lo)))
        scale_hi = PERTURB * np.maximum(1.0, np.abs(self.hi, where=np.isfinite(self.hi), out=np.zeros_like(self.hi)))
        fin_lo = np.isfinite(self.lo)
        fin_hi = np.isfinite(self.hi)
        self.lo[fin_lo] -= (u * scale_lo)[fin_lo]
        self.hi[fin_hi] += (v * scale_hi)[fin_hi]

    def _restore_bounds(self):
        self.lo = self._true_lo
        self.hi = self._true_hi

    # ---- initial basis -------------------------------------------------
    def _init_basis(self):
        ncols = self.a.shape[1]
        self.status = np.empty(ncols, dtype=np.int8)
        for j in range(ncols):
            if self.lo[j] > -INF:
                self.status[j] = _AT_LO
            elif self.hi[j] < INF:
                self.status[j] = _AT_UP
            else:
                self.status[j] = _FREE
        n, m = self.n_struct, self.m
        xn = self._nonbasic_vector()
        resid = self.b - self.a[:, :n] @ xn[:n]  # slack target values
        basis = []
        art_cols, art_rows = [], []
        for i in range(m):
            sj = n + i
            r = resid[i] - xn[sj]  # residual once slack sits at its bound
            if self.lo[sj] - FEAS_TOL <= resid[i] <= self.hi[sj] + FEAS_TOL:
                basis.append(sj)
            else:
                # slack stays nonbasic at its nearest bound; artificial
                # absorbs the residual with a sign making it nonnegative
                if resid[i] > self.hi[sj]:
                    self.status[sj] = _AT_UP
                else:
                    self.status[sj] = _AT_LO
                r = resid[i] - self._nonbasic_value(sj)
                art_rows.append(i)
                art_cols.append(1.0 if r >= 0 else -1.0)
                basis.append(ncols + len(art_rows) - 1)
        self.n_art = len(art_rows)
        if self.n_art:
            art = np.zeros((m, self.n_art))
            for k, (i, sgn) in enumerate(zip(art_rows, art_cols)):
                art[i, k] = sgn
            self.a = np.hstack([self.a, art])
            self.lo = np.concatenate([self.lo, np.zeros(self.n_art)])
            self.hi = np.concatenate([self.hi, np.full(self.n_art, INF)])
            self.cost = np.concatenate([self.cost, np.zeros(self.n_art)])
            self.status = np.concatenate(
                [self.status, np.full(self.n_art, _AT_LO, dtype=np.int8)])
        self.basis = np.asarray(basis, dtype=int)
        self.in_basis = np.zeros(self.a.shape[1], dtype=bool)
        self.in_basis[self.basis] = True
        self._refactor()

    # ---- core iteration ------------------------------------------------
    def _iterate(self, cost, phase1):
        """Primal simplex to optimality for the given cost vector."""
        ncols = self.a.shape[1]
        degenerate = 0
        pivots = 0
        while True:
            if pivots and pivots % REFACTOR_EVERY == 0:
                self._refactor()
            y = cost[self.basis] @ self.binv
            d = cost - y @ self.a
            nb = ~self.in_basis
            # improving candidates for minimization
            cand = nb & (
                ((self.status == _AT_LO) & (d < -OPT_TOL))
                | ((self.status == _AT_UP) & (d > OPT_TOL))
                | ((self.status == _FREE) & (np.abs(d) > OPT_TOL))
            )
            if phase1:
                # artificials may leave but never re-enter
                cand[ncols - self.n_art:] = False
            idx = np.nonzero(cand)[0]
            if idx.size == 0:
                return "optimal"
            if degenerate > BLAND_AFTER:
                j = idx[0]  # Bland
            else:
                j = idx[np.argmax(np.abs(d[idx]))]
            sigma = 1.0 if (self.status[j] != _AT_UP and
                            not (self.status[j] == _FREE and d[j] > 0)) else -1.0
            if self.status[j] == _AT_UP:
                sigma = -1.0
            w = self.binv @ self.a[:, j]
            # ratio test: xb - t*sigma*w stays within basic bounds
            sw = sigma * w
            lo_b = self.lo[self.basis]
            hi_b = self.hi[self.basis]
            t_best = INF
            r_best = -1
            with np.errstate(divide="ignore", invalid="ignore"):
                pos = sw > FEAS_TOL
                ratios_lo = np.where(pos, (self.xb - lo_b) / np.where(pos, sw, 1.0), INF)
                neg = sw < -FEAS_TOL
                ratios_hi = np.where(neg, (hi_b - self.xb) / np.where(neg, -sw, 1.0), INF)
            ratios = np.minimum(ratios_lo, ratios_hi)
            ratios[~np.isfinite(lo_b) & pos] = ratios_hi[~np.isfinite(lo_b) & pos]
            # recover which bound limits each row
            if ratios.size:
                ratios = np.maximum(ratios, 0.0)
                r_best = int(np.argmin(ratios))
                t_best = float(ratios[r_best])
                if np.isfinite(t_best):
                    # deterministic tie-break: lowest basic variable index
                    ties = np.nonzero(np.abs(ratios - t_best) <= 1e-12)[0]
                    if ties.size > 1:
                        r_best = int(ties[np.argmin(self.basis[ties])])
            # bound-flip limit of the entering variable itself
            span = self.hi[j] - self.lo[j]
            flip = span if (self.status[j] in (_AT_LO, _AT_UP) and span < INF) else INF
            if flip < t_best - 1e-15:
                # flip without basis change
                self.xb = self.xb - flip * sw
                self.status[j] = _AT_UP if self.status[j] == _AT_LO else _AT_LO
                pivots += 1
                continue
            if not np.isfinite(t_best):
                # unbounded direction
                ray = np.zeros(ncols)
                ray[j] = sigma
                ray[self.basis] = -sw
                self._ray = ray
                return "unbounded"
            if t_best <= 1e-12:
                degenerate += 1
            else:
                degenerate = 0
            # pivot: j enters, basis[r_best] leaves at the bound it hit
            leave = self.basis[r_best]
            new_leave_val = self.xb[r_best] - t_best * sw[r_best]
            if abs(w[r_best]) < 1e-11:
                self._refactor()
                continue
            if np.isfinite(self.lo[leave]) and \
                    abs(new_leave_val - self.lo[leave]) <= abs(new_leave_val - self.hi[leave]):
                self.status[leave] = _AT_LO
            else:
                self.status[leave] = _AT_UP if np.isfinite(self.hi[leave]) else _AT_LO
            self.xb = self.xb - t_best * sw
            enter_val = self._nonbasic_value(j) + sigma * t_best
            self.in_basis[leave] = False
            self.in_basis[j] = True
            self.basis[r_best] = j
            # product-form update of binv
            br = self.binv[r_best] / w[r_best]
            self.binv = self.binv - np.outer(w, br)
            self.binv[r_best] = br
            self.xb[r_best] = enter_val
            self.status[j] = _FREE  # basic; status ignored while basic
            pivots += 1

    # ---- public solve --------------------------------------------------
    def solve(self, perturb=True):
        self._init_basis()
        if perturb:
            self._perturb_bounds()
        self._refactor()
        ncols = self.a.shape[1]
        if self.n_art:
            p1 = np.zeros(ncols)
            p1[ncols - self.n_art:] = 1.0
            st = self._iterate(p1, phase1=True)
            if st != "optimal":
                raise SolverError("phase-1 breakdown")
            p1_obj = p1[self.basis] @ self.xb
            if p1_obj > 1e-7:
                # Farkas-style certificate from the phase-1 duals
                y = p1[self.basis] @ self.binv
                return LPResult(status="infeasible", certificate=y)
            # pin artificials at zero for phase 2
            for arr in (self.lo, self.hi, self._true_lo, self._true_hi):
                arr[ncols - self.n_art:] = 0.0
            self.status[ncols - self.n_art:][
                ~self.in_basis[ncols - self.n_art:]] = _AT_LO
        st = self._iterate(self.cost, phase1=False)
        if st == "unbounded":
            ray = self._ray[: self.n_struct + self.m]
            return LPResult(status="unbounded", certificate=ray[: self.n_struct])
        if perturb:
            # drop the perturbation and repair the residual violations
            self._restore_bounds()
            self._refactor()
            if not self._dual_iterate():
                raise SolverError("cleanup after unperturbing failed")
            st = self._iterate(self.cost, phase1=False)
            if st != "optimal":
                raise SolverError("cleanup re-optimization failed")
        self._refactor()
        x = self._x_full()[: self.n_struct]
        obj = float(self.lp.c @ x)
        return LPResult(status="optimal", x=x, obj=obj, basis=self._snapshot())

    def _snapshot(self):
        return {
            "basis": self.basis.copy(),
            "status": self.status.copy(),
            "n_art": self.n_art,
        }


def solve_lp(lp: LinearProgram) -> LPResult:
    """Solve an LP to primal-dual feasibility within 1e-8."""
    try:
        return _Simplex(lp).solve()
    except SolverError:
        # the perturbed run hit numerical trouble; redo it exactly
        return _Simplex(lp.copy()).solve(perturb=False)


class CutPool:
    """An LP plus appended <= rows, re-solved with the retained basis.

    `add_cut` appends a row and repairs optimality with dual-simplex
    steps; on numerical trouble it falls back to a cold solve.
    """

    def __init__(self, lp: LinearProgram):
        self.lp = lp.copy()
        self.result = solve_lp(self.lp)

    def add_cut(self, cols, vals, rhs):
        if any(not (0 <= j < self.lp.n_vars) for j in cols):
            raise SolverError("cut column index out of range")
        self.lp.add_row(cols, vals, "<", rhs)
        # warm dual repair; correctness checked against cold solve in tests
        res = self._dual_repair()
        if res is None:
            res = solve_lp(self.lp)
        self.result = res
        return self.result

    def _dual_repair(self):
        prev = self.result
        if prev.status != "optimal":
            return None
        try:
            sx = _Simplex(self.lp)
            snap = prev.basis
            m_old = len(snap["basis"])
            # old basis entries index into [struct | old slacks]; the new
            # slack column shifts artificials away, so rebuild directly.
            n = sx.n_struct
            basis = list(snap["basis"][:m_old])
            basis = [int(b) for b in basis if b < n + sx.m - 1]
            if len(basis) != sx.m - 1:
                return None
            basis.append(n + sx.m - 1)  # new cut slack enters the basis
            sx.status = np.empty(sx.a.shape[1], dtype=np.int8)
            sx.status[: n + sx.m - 1] = snap["status"][: n + sx.m - 1]
            sx.status[n + sx.m - 1] = _AT_LO
            sx.basis = np.asarray(basis, dtype=int)
            sx.in_basis = np.zeros(sx.a.shape[1], dtype=bool)
            sx.in_basis[sx.basis] = True
            sx.n_art = 0
            sx._refactor()
            if not sx._dual_iterate():
                return None
            st = sx._iterate(sx.cost, phase1=False)
            if st != "optimal":
                return None
            sx._refactor()
            if np.any(sx.xb < sx.lo[sx.basis] - 1e-7) or \
                    np.any(sx.xb > sx.hi[sx.basis] + 1e-7):
                return None
            x = sx._x_full()[: sx.n_struct]
            return LPResult(status="optimal", x=x, obj=float(self.lp.c @ x),
                            basis=sx._snapshot())
        except (SolverError, np.linalg.LinAlgError):
            return None


def _dual_iterate(self):
    """Dual simplex: drive out-of-bound basic variables to their bounds."""
    for _ in range(5000):
        viol_lo = self.lo[self.basis] - self.xb
        viol_hi = self.xb - self.hi[self.basis]
        viol = np.maximum(viol_lo, viol_hi)
        if viol.size == 0:
            return True
        r = int(np.argmax(viol))
        if viol[r] <= 1e-9:
            return True
        below = viol_lo[r] >= viol_hi[r]
        alpha = self.binv[r] @ self.a
        y = self.cost[self.basis] @ self.binv
        d = self.cost - y @ self.a
        nb = ~self.in_basis
        # entering candidates keep dual feasibility
        if below:
            ok = nb & (((self.status == _AT_LO) & (alpha < -1e-10))
                       | ((self.status == _AT_UP) & (alpha > 1e-10))
                       | ((self.status == _FREE) & (np.abs(alpha) > 1e-10)))
        else:
            ok = nb & (((self.status == _AT_LO) & (alpha > 1e-10))
                       | ((self.status == _AT_UP) & (alpha < -1e-10))
                       | ((self.status == _FREE) & (np.abs(alpha) > 1e-10)))
        idx = np.nonzero(ok)[0]
        if idx.size == 0:
            return False  # dual unbounded => primal infeasible; cold solve decides
        ratios = np.abs(d[idx] / alpha[idx])
        k = int(np.argmin(ratios))
        ties = np.nonzero(np.abs(ratios - ratios[k]) <= 1e-12)[0]
        j = int(idx[ties[np.argmin(idx[ties])]]) if ties.size > 1 else int(idx[k])
        w = self.binv @ self.a[:, j]
        if abs(w[r]) < 1e-11:
            return False
        leave = self.basis[r]
        target = self.lo[leave] if below else self.hi[leave]
        t = (self.xb[r] - target) / w[r]
        self.status[leave] = _AT_LO if below else _AT_UP
        self.xb = self.xb - t * w
        enter_val = self._nonbasic_value(j) + t
        self.in_basis[leave] = False
        self.in_basis[j] = True
        self.basis[r] = j
        br = self.binv[r] / w[r]
        self.binv = self.binv - np.outer(w, br)
        self.binv[r] = br
        self.xb[r] = enter_val
        self.status[j] = _FREE
    return False


_Simplex._dual_iterate = _dual_iterate


def add_cut(pool: CutPool, cols, vals, rhs) -> LPResult:
    return pool.add_cut(cols, vals, rhs)


def solve_milp(mip: MixedIntegerProgram, gap: float = 1e-6,
               node_limit: int = 10 ** 6) -> MILPResult:
    """Best-first branch-and-bound on LP relaxations (maximization)."""
    lp0 = mip.lp
    bins = sorted(set(int(j) for j in mip.binary_idx))
    root = solve_lp(lp0)
    if root.status != "optimal":
        return MILPResult(status=root.status, nodes=1)
    incumbent = None
    inc_obj = -INF
    counter = 0
    # heap entries: (-bound, counter, lo_over, hi_over)
    heap = [(-root.obj, counter, {}, {}, root)]
    nodes = 0
    global_bound = root.obj
    while heap and nodes < node_limit:
        neg_bound, _, lo_over, hi_over, res = heapq.heappop(heap)
        bound = -neg_bound
        global_bound = bound
        if incumbent is not None and bound <= inc_obj + gap * max(1.0, abs(inc_obj)):
            break
        nodes += 1
        x = res.x
        frac = [(abs(x[j] - round(x[j])), j) for j in bins]
        worst = max(frac, default=(0.0, -1))
        if worst[0] <= INT_TOL:
            xr = x.copy()
            for j in bins:
                xr[j] = round(xr[j])
            obj = float(lp0.c @ xr)
            if obj > inc_obj:
                inc_obj, incumbent = obj, xr
            continue
        # branch on most-fractional binary, lowest index on ties
        best_f = max(f for f, _ in frac)
        j = min(jj for f, jj in frac if f >= best_f - 1e-12)
        for fix in (0.0, 1.0):
            lp = lp0.copy()
            for k, v in lo_over.items():
                lp.lo[k] = v
            for k, v in hi_over.items():
                lp.hi[k] = v
            lo2 = dict(lo_over)
            hi2 = dict(hi_over)
            lo2[j] = fix
            hi2[j] = fix
            lp.lo[j] = fix
            lp.hi[j] = fix
            child = solve_lp(lp)
            if child.status != "optimal":
                continue
            if incumbent is not None and child.obj <= inc_obj + gap * max(1.0, abs(inc_obj)):
                continue
            counter += 1
            heapq.heappush(heap, (-child.obj, counter, lo2, hi2, child))
    if incumbent is None:
        return MILPResult(status="infeasible", nodes=nodes)
    bound = max(global_bound, inc_obj)
    rel_gap = (bound - inc_obj) / max(1.0, abs(inc_obj))
    return MILPResult(status="optimal", x=incumbent, obj=inc_obj,
                      bound=bound, gap=rel_gap, nodes=max(nodes, 1))


class ModelBuilder:
    """Tiny helper for building LPs with named variables."""

    def __init__(self):
        self.names = []
        self.lo = []
        self.hi = []
        self.obj = []
        self.rows = []  # (cols, vals, sense, rhs)
        self.index = {}

    def var(self, name, lo=0.0, hi=INF, obj=0.0):
        if name in self.index:
            raise SolverError(f"duplicate variable {name}")
        j = len(self.names)
        self.index[name] = j
        self.names.append(name)
        self.lo.append(lo)
        self.hi.append(hi)
        self.obj.append(obj)
        return j

    def constr(self, terms, sense, rhs):
        cols, vals = [], []
        acc = {}
        for j, v in terms:
            acc[j] = acc.get(j, 0.0) + v
        for j, v in acc.items():
            cols.append(j)
            vals.append(v)
        self.rows.append((cols, vals, sense, float(rhs)))

    def build(self) -> LinearProgram:
        lp = LinearProgram(np.asarray(self.obj, dtype=float),
                           lo=np.asarray(self.lo, dtype=float),
                           hi=np.asarray(self.hi, dtype=float))
        for cols, vals, sense, rhs in self.rows:
            lp.add_row(cols, vals, sense, rhs)
        return lp
