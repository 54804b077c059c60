"""A small dense revised-simplex LP solver.

Problems are stated as::

    minimize    c @ x
    subject to  A_eq @ x == b_eq
                A_ub @ x <= b_ub
                lower <= x <= upper          (bounds may be infinite)

and converted internally to ``min c'y, A'y = b', y >= 0``. The core also accepts
a pricing callback instead of an explicit column matrix, which lets callers solve
LPs whose columns are too many to enumerate (column generation).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.linalg.blas import dger

from . import _kernels

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
ITERATION_LIMIT = "iteration_limit"

FEAS_TOL = 1e-9
OPT_TOL = 1e-9
_PIVOT_TOL = 1e-9
_TIE_RATIO = 1e-3
_PERTURBATION = 1e-7
_ROW_TRIES = 20
_REL_PIVOT = 1e-7
_ZERO_SLOPE = 1e-11
_COST_SHIFT = 1e-6
_REFACTOR_EVERY = 100
_STALL_LIMIT = 50


@dataclass
class StandardLp:
    c: np.ndarray
    A_eq: np.ndarray
    b_eq: np.ndarray
    A_ub: Optional[np.ndarray] = None
    b_ub: Optional[np.ndarray] = None
    lower: Optional[np.ndarray] = None
    upper: Optional[np.ndarray] = None

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float)
        nvar = self.c.shape[0]
        self.A_eq = np.asarray(self.A_eq, dtype=float).reshape(-1, nvar)
        self.b_eq = np.asarray(self.b_eq, dtype=float).reshape(-1)
        if self.A_ub is None:
            self.A_ub = np.zeros((0, nvar))
            self.b_ub = np.zeros(0)
        self.A_ub = np.asarray(self.A_ub, dtype=float).reshape(-1, nvar)
        self.b_ub = np.asarray(self.b_ub, dtype=float).reshape(-1)
        self.lower = np.zeros(nvar) if self.lower is None else np.asarray(self.lower, dtype=float)
        self.upper = np.full(nvar, np.inf) if self.upper is None else np.asarray(self.upper, dtype=float)
        if self.A_eq.shape[0] != self.b_eq.shape[0] or self.A_ub.shape[0] != self.b_ub.shape[0]:
            raise ValueError("constraint matrix and right-hand side disagree in length")
        if self.lower.shape != (nvar,) or self.upper.shape != (nvar,):
            raise ValueError("bounds must have one entry per variable")
        if np.any(self.lower > self.upper):
            raise ValueError("a lower bound exceeds its upper bound")

    @property
    def num_vars(self) -> int:
        return self.c.shape[0]

    @property
    def num_eq(self) -> int:
        return self.A_eq.shape[0]

    @property
    def num_ub(self) -> int:
        return self.A_ub.shape[0]

    def residual(self, x: np.ndarray) -> float:
        """Largest violation of any constraint or bound at ``x``."""
        parts = [0.0]
        if self.num_eq:
            parts.append(np.max(np.abs(self.A_eq @ x - self.b_eq)))
        if self.num_ub:
            parts.append(np.max(self.A_ub @ x - self.b_ub))
        parts.append(np.max(self.lower - x))
        parts.append(np.max(x - self.upper))
        return float(max(parts))

    def to_text(self) -> str:
        """Plain-text dump: a dimension header followed by dense rows."""
        fmt = lambda row: " ".join(repr(float(v)) for v in row)  # noqa: E731
        lines = [f"lp {self.num_vars} {self.num_eq} {self.num_ub}", "c " + fmt(self.c)]
        lines += ["eq " + fmt(np.append(row, rhs)) for row, rhs in zip(self.A_eq, self.b_eq)]
        lines += ["ub " + fmt(np.append(row, rhs)) for row, rhs in zip(self.A_ub, self.b_ub)]
        lines += ["lower " + fmt(self.lower), "upper " + fmt(self.upper)]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "StandardLp":
        rows = [ln.split() for ln in text.splitlines() if ln.strip()]
        nvar = int(rows[0][1])
        data: dict = {"c": None, "eq": [], "ub": [], "lower": None, "upper": None}
        for tag, *vals in rows[1:]:
            arr = np.array([float(v) for v in vals])
            if tag in ("eq", "ub"):
                data[tag].append(arr)
            else:
                data[tag] = arr
        eq = np.array(data["eq"]).reshape(-1, nvar + 1)
        ub = np.array(data["ub"]).reshape(-1, nvar + 1)
        return cls(data["c"], eq[:, :-1], eq[:, -1], ub[:, :-1], ub[:, -1], data["lower"], data["upper"])


@dataclass
class LpSolution:
    status: str
    x: Optional[np.ndarray] = None
    objective: float = math.nan
    residual: float = math.nan
    dual: Optional[np.ndarray] = None
    dual_objective: float = math.nan
    iterations: int = 0
    message: str = ""

    @property
    def duality_gap(self) -> float:
        return abs(self.objective - self.dual_objective)

    @property
    def ok(self) -> bool:
        return self.status == OPTIMAL


class LpError(RuntimeError):
    """Raised by callers that need an optimal solution and did not get one."""


# A pricer receives the simplex multipliers y and the phase (1 or 2) and returns
# (column, cost, reduced_cost, key) for its most attractive column, or None.
Pricer = Callable[[np.ndarray, int], Optional[tuple]]


class _Pool:
    """Columns known to the simplex core (explicit, or grown by a pricer)."""

    def __init__(self, A: np.ndarray, c: np.ndarray):
        self._A = np.array(A, dtype=float)
        self._c = np.array(c, dtype=float)
        self.size = self._A.shape[1]
        self.keys: list = [None] * self.size
        self._index: dict = {}

    @property
    def A(self) -> np.ndarray:
        return self._A[:, : self.size]

    @property
    def c(self) -> np.ndarray:
        return self._c[: self.size]

    def scale_rows(self, sign: np.ndarray) -> None:
        self._A *= sign[:, None]

    def add(self, col: np.ndarray, cost: float, key) -> int:
        if key is not None and key in self._index:
            # re-entering column: the caller's cost replaces any earlier shifted one
            j = self._index[key]
            self._c[j] = cost
            return j
        if self.size == self._A.shape[1]:
            # amortised growth instead of a copy per column
            grow = max(16, self.size)
            self._A = np.hstack([self._A, np.zeros((self._A.shape[0], grow))])
            self._c = np.concatenate([self._c, np.zeros(grow)])
        self._A[:, self.size] = col
        self._c[self.size] = cost
        self.keys.append(key)
        if key is not None:
            self._index[key] = self.size
        self.size += 1
        return self.size - 1


class _Simplex:
    """Two-phase revised simplex on ``min c y, A y = b, y >= 0`` with an explicit basis inverse."""

    def __init__(self, b, pool: _Pool, pricer: Optional[Pricer], feas_tol, opt_tol, max_iter):
        self.m = b.shape[0]
        self.sign = np.where(b < 0, -1.0, 1.0)
        self.b = b * self.sign
        self.pool = pool
        self.pool.scale_rows(self.sign)
        self.pricer = pricer
        self.feas_tol, self.opt_tol, self.max_iter = feas_tol, opt_tol, max_iter
        # basis entries < 0 denote artificial variables: -(row + 1)
        self.basis = -(np.arange(self.m) + 1)
        self.Binv = np.eye(self.m, order="F")
        self.B = np.eye(self.m)
        self.xB = self.b.copy()
        self.iterations = 0
        self.bland = False
        self.stall = 0
        # artificials are held at zero, so their phase-2 costs are free; they set the starting duals
        self.art_cost = np.zeros(self.m)

    def _column(self, j: int) -> np.ndarray:
        if j < 0:
            e = np.zeros(self.m)
            e[-j - 1] = 1.0
            return e
        return self.pool.A[:, j]

    def _update_inverse(self, r: int, u: np.ndarray):
        # in-place rank-one update; needs the Fortran-ordered inverse
        row = self.Binv[r] / u[r]
        dger(-1.0, u, row, a=self.Binv, overwrite_a=1)
        self.Binv[r] = row

    def _refactor(self):
        self.Binv = np.asfortranarray(np.linalg.inv(self.B))
        self.xB = self.Binv @ self.b
        self.xB[np.abs(self.xB) < 1e-13] = 0.0

    def duals(self, phase: int) -> np.ndarray:
        art = self.basis < 0
        cB = np.where(art, 1.0 if phase == 1 else 0.0, 0.0)
        if phase == 2:
            cB[~art] = self.pool.c[self.basis[~art]]
            cB[art] = self.art_cost[-self.basis[art] - 1]
        return cB @ self.Binv

    def _entering(self, y: np.ndarray, phase: int):
        """Index and direction data of the entering column, or None at optimality.

        With a pricer the stored columns are a subset of what the pricer
        searches, so they are scanned only in Bland mode.
        """
        best = None
        if self.pool.size and (self.pricer is None or self.bland):
            costs = np.zeros(self.pool.size) if phase == 1 else self.pool.c
            red = costs - y @ self.pool.A
            red[self.basis[self.basis >= 0]] = 0.0
            cand = np.flatnonzero(red < -self.opt_tol)
            if cand.size:
                j = int(cand[0]) if self.bland else int(cand[np.argmin(red[cand])])
                best = (j, red[j])
        if self.pricer is not None and best is None:
            # the pricer sees multipliers for the unflipped rows
            offer = self.pricer(y * self.sign, phase)
            if offer is not None:
                col, cost, red, key = offer
                if red < -self.opt_tol:
                    j = self.pool.add(np.asarray(col, dtype=float) * self.sign, cost, key)
                    if j in self.basis:
                        return None
                    best = (j, red)
        return best

    def _leaving(self, u: np.ndarray, phase: int) -> Optional[int]:
        xB = self.xB
        artificial = self.basis < 0
        if phase == 2:
            # artificials left in the basis are pinned at zero: any nonzero entry forces them out
            forced = np.flatnonzero(artificial & (np.abs(u) > _PIVOT_TOL))
            if forced.size:
                return int(forced[np.argmax(np.abs(u[forced]))])
        pos = np.flatnonzero(u > _PIVOT_TOL)
        if not pos.size:
            return None
        ratios = np.maximum(xB[pos], 0.0) / u[pos]
        # Harris-style two pass: among near-minimal ratios prefer a large pivot
        limit = np.min((np.maximum(xB[pos], 0.0) + self.feas_tol) / u[pos])
        ties = pos[ratios <= limit]
        # tiny pivots wreck the basis inverse, so only well-sized ones compete
        ties = ties[u[ties] >= _TIE_RATIO * u[ties].max()]
        if self.bland:
            order = np.where(self.basis[ties] < 0, -1, self.basis[ties])
            return int(ties[np.argmin(order)])
        art = ties[self.basis[ties] < 0]
        if art.size:
            return int(art[np.argmax(u[art])])
        return int(ties[np.argmax(u[ties])])

    def _pivot(self, r: int, q: int, u: np.ndarray):
        theta = max(self.xB[r], 0.0) / u[r]
        self.xB = self.xB - theta * u
        self.xB[r] = theta
        self.xB[np.abs(self.xB) < 1e-13] = 0.0
        self._update_inverse(r, u)
        self.basis[r] = q
        self.B[:, r] = self._column(q)
        if theta <= self.feas_tol:
            self.stall += 1
            if self.stall >= _STALL_LIMIT:
                self.bland = True
        else:
            self.stall = 0
            self.bland = False

    def run_phase(self, phase: int) -> str:
        self.bland, self.stall = False, 0
        since_refactor = 0
        while True:
            if self.iterations >= self.max_iter:
                return ITERATION_LIMIT
            if since_refactor >= _REFACTOR_EVERY:
                self._refactor()
                since_refactor = 0
            y = self.duals(phase)
            entering = self._entering(y, phase)
            if entering is None:
                return OPTIMAL
            q = entering[0]
            u = self.Binv @ self._column(q)
            r = self._leaving(u, phase)
            if r is None:
                return UNBOUNDED
            self._pivot(r, q, u)
            self.iterations += 1
            since_refactor += 1

    def _reset(self, b: np.ndarray):
        self.b = b
        self.basis = -(np.arange(self.m) + 1)
        self.Binv = np.eye(self.m, order="F")
        self.B = np.eye(self.m)
        self.xB = b.copy()

    def _two_phase(self) -> tuple[str, np.ndarray]:
        status = self.run_phase(1)
        if status == ITERATION_LIMIT:
            return status, self.duals(1)
        self._refactor()
        if np.sum(self.xB[self.basis < 0]) > self.feas_tol * max(1.0, np.abs(self.b).max(initial=0.0)):
            return INFEASIBLE, self.duals(1)
        status = self.run_phase(2)
        self._refactor()
        return status, self.duals(2)

    def solve(self, perturb: bool = True) -> tuple[str, np.ndarray]:
        """Two-phase solve, first on a slightly raised right-hand side.

        Raising every row by a distinct tiny amount removes most degenerate
        pivots. The final basis is then re-evaluated on the true right-hand
        side; if it is not feasible there (or the perturbed solve did not reach
        an optimum) the problem is solved again without perturbation.
        """
        b_true = self.b.copy()
        if perturb and self.m:
            scale = max(1.0, float(np.abs(b_true).max()))
            shift = _PERTURBATION * scale * (1.0 + np.random.default_rng(0).random(self.m))
            self._reset(b_true + shift)
            status, y = self._two_phase()
            if status == OPTIMAL:
                self.b = b_true
                self._refactor()
                bad = self.xB < -self.feas_tol * scale
                bad |= (self.basis < 0) & (np.abs(self.xB) > self.feas_tol * scale)
                if not bad.any():
                    self.xB = np.maximum(self.xB, 0.0)
                    return status, y * self.sign
            if status == ITERATION_LIMIT:
                return status, y * self.sign
            self._reset(b_true)
        status, y = self._two_phase()
        return status, y * self.sign

    def primal(self) -> np.ndarray:
        y = np.zeros(self.pool.A.shape[1])
        for i, j in enumerate(self.basis):
            if j >= 0:
                y[j] = max(self.xB[i], 0.0)
        return y

    def _dual_pivot(self, r: int, q: int, u: np.ndarray, step: float):
        theta = self.xB[r] / u[r]
        self.xB = self.xB - theta * u
        self.xB[r] = theta
        self._update_inverse(r, u)
        self.basis[r] = q
        self.B[:, r] = self._column(q)
        if step <= self.opt_tol:
            self.stall += 1
            if self.stall >= _STALL_LIMIT:
                self.bland = True
        else:
            self.stall = 0
            self.bland = False

    def run_dual(self, cone: "SignCone", shift: np.ndarray) -> str:
        """Dual simplex from the all-artificial basis, artificials fixed at zero.

        ``y = 0`` is dual feasible because every cone column has positive cost,
        so the method only has to drive the artificials out while keeping all
        reduced costs nonnegative. Leaving rows are chosen by dual steepest
        edge (row norms of the explicit inverse are cheap); the entering column
        comes from :func:`_dual_ratio`. Column ``(g, sigma)`` costs
        ``costs[g] + sigma . shift[g]``; a small random ``shift`` breaks the
        ties between sign vectors that otherwise make most pivots degenerate.
        """
        self.bland, self.stall = False, 0
        since_refactor = _REFACTOR_EVERY
        tol = self.feas_tol * max(1.0, float(np.abs(self.b).max(initial=0.0)))
        while True:
            if self.iterations >= self.max_iter:
                return ITERATION_LIMIT
            if since_refactor >= _REFACTOR_EVERY:
                # fresh inverse, row norms and reduced-cost table; between refactors they are updated
                if self.iterations:
                    self._refactor()
                weights = np.einsum("ij,ij->i", self.Binv, self.Binv)
                g = cone.transpose(self.duals(2) * self.sign) - shift
                since_refactor = 0
            art = self.basis < 0
            infeas = np.where(art, np.abs(self.xB), np.maximum(-self.xB, 0.0))
            rows = np.flatnonzero(infeas > tol)
            if not rows.size:
                return OPTIMAL
            if self.bland:
                order = np.where(self.basis[rows] < 0, -1, self.basis[rows])
                rows = rows[np.argsort(order, kind="stable")]
            else:
                rows = rows[np.argsort(-(infeas[rows] ** 2) / weights[rows], kind="stable")]
            choice = None
            # a row whose entries are all numerically zero cannot be repaired now; try the next one
            for r in rows[:_ROW_TRIES]:
                r = int(r)
                s = 1.0 if self.xB[r] > 0 else -1.0
                h = cone.transpose(s * self.Binv[r] * self.sign)
                offer = _dual_ratio(g, h, cone.costs, self.opt_tol, self.bland)
                if offer is None:
                    continue
                group, sigma, step = offer
                table = np.zeros_like(g)
                table[group] = sigma
                col = cone.apply(table) * self.sign
                u = self.Binv @ col
                if s * u[r] > _PIVOT_TOL:
                    choice = (r, group, sigma, step, col, u, h)
                    break
            if choice is None:
                if since_refactor == 0:
                    return INFEASIBLE
                # drift in the inverse leaves round-off entries where exact zeros belong; refactor and retry
                since_refactor = _REFACTOR_EVERY
                continue
            r, group, sigma, step, col, u, h = choice
            # a Harris step may pick a column whose reduced cost is already slightly negative;
            # raising its cost to zero reduced cost keeps the dual step nonnegative
            cost = max(float(cone.costs[group]), float(sigma @ (g[group] + step * h[group])))
            q = self.pool.add(col, cost + float(sigma @ shift[group]), (group, tuple(sigma.astype(int))))
            ratio = u / u[r]
            tau = self.Binv @ self.Binv[r]
            w_r = weights[r]
            self._dual_pivot(r, q, u, step)
            weights = np.maximum(weights - 2.0 * ratio * tau + ratio**2 * w_r, 1e-14)
            weights[r] = w_r / u[r] ** 2
            g = g + step * h
            self.iterations += 1
            since_refactor += 1


def independent_rows(A: np.ndarray, b: np.ndarray, tol: float = 1e-10) -> tuple[np.ndarray, bool]:
    """Indices of a maximal independent row subset and whether the dropped rows are consistent.

    Modified Gram-Schmidt over the rows, carrying the right-hand side along.
    """
    keep, Q, beta = [], [], []
    consistent = True
    for i, (a, rhs) in enumerate(zip(A, b)):
        r, rb = a.astype(float).copy(), float(rhs)
        for q, qb in zip(Q, beta):
            coef = q @ r
            r -= coef * q
            rb -= coef * qb
        norm = np.linalg.norm(r)
        if norm > tol * max(1.0, np.linalg.norm(a)):
            keep.append(i)
            Q.append(r / norm)
            beta.append(rb / norm)
        elif abs(rb) > 1e-8 * max(1.0, abs(rhs)):
            consistent = False
    return np.array(keep, dtype=int), consistent


def _to_standard(problem: StandardLp, eq_rows: np.ndarray):
    """Map the problem to ``min c'y, A'y = b', y >= 0`` and return the back-substitution."""
    nvar = problem.num_vars
    lo, up = problem.lower, problem.upper
    cols, costs = [], []
    # x = offset + T @ y
    T_entries = []
    offset = np.zeros(nvar)
    upper_rows = []
    for j in range(nvar):
        e = np.zeros(nvar)
        e[j] = 1.0
        if np.isfinite(lo[j]):
            offset[j] = lo[j]
            T_entries.append((j, 1.0))
            if np.isfinite(up[j]):
                upper_rows.append((len(T_entries) - 1, up[j] - lo[j]))
        elif np.isfinite(up[j]):
            offset[j] = up[j]
            T_entries.append((j, -1.0))
        else:
            T_entries.append((j, 1.0))
            T_entries.append((j, -1.0))
    nstd = len(T_entries)
    T = np.zeros((nvar, nstd))
    for k, (j, s) in enumerate(T_entries):
        T[j, k] = s
    A_eq = problem.A_eq[eq_rows]
    b_eq = problem.b_eq[eq_rows] - A_eq @ offset
    A_ub, b_ub = problem.A_ub, problem.b_ub - problem.A_ub @ offset
    m_eq, m_ub, m_up = len(eq_rows), A_ub.shape[0], len(upper_rows)
    nslack = m_ub + m_up
    A = np.zeros((m_eq + m_ub + m_up, nstd + nslack))
    A[:m_eq, :nstd] = A_eq @ T
    A[m_eq : m_eq + m_ub, :nstd] = A_ub @ T
    A[m_eq : m_eq + m_ub, nstd : nstd + m_ub] = np.eye(m_ub)
    b = np.concatenate([b_eq, b_ub, np.array([u for _, u in upper_rows])])
    for k, (col, _) in enumerate(upper_rows):
        A[m_eq + m_ub + k, col] = 1.0
        A[m_eq + m_ub + k, nstd + m_ub + k] = 1.0
    c = np.concatenate([problem.c @ T, np.zeros(nslack)])
    const = float(problem.c @ offset)
    return A, b, c, T, offset, const, m_eq


def solve(
    problem: StandardLp,
    feas_tol: float = FEAS_TOL,
    opt_tol: float = OPT_TOL,
    max_iter: int = 100_000,
    presolve: bool = True,
) -> LpSolution:
    """Solve ``problem`` with the two-phase revised simplex method.

    Infeasible and unbounded problems are reported through ``status``; no
    exception is raised for them.
    """
    if presolve and problem.num_eq:
        rows, consistent = independent_rows(problem.A_eq, problem.b_eq)
        if not consistent:
            return LpSolution(INFEASIBLE, message="inconsistent equality rows")
    else:
        rows = np.arange(problem.num_eq)
    A, b, c, T, offset, const, m_eq = _to_standard(problem, rows)
    core = _Simplex(b, _Pool(A.copy(), c.copy()), None, feas_tol, opt_tol, max_iter)
    status, y = core.solve()
    if status != OPTIMAL:
        return LpSolution(status, iterations=core.iterations)
    z = core.primal()
    x = offset + T @ z[: T.shape[1]]
    dual = np.zeros(problem.num_eq)
    dual[rows] = y[:m_eq]
    return LpSolution(
        OPTIMAL,
        x=x,
        objective=float(problem.c @ x),
        residual=problem.residual(x),
        dual=dual,
        dual_objective=float(y @ b) + const,
        iterations=core.iterations,
    )


@dataclass
class GeneratedSolution:
    """Result of :func:`solve_generated`: weights on the generated columns."""

    status: str
    weights: np.ndarray
    keys: list
    columns: np.ndarray
    objective: float
    dual: np.ndarray
    iterations: int

    @property
    def ok(self) -> bool:
        return self.status == OPTIMAL


def solve_generated(
    b: np.ndarray,
    pricer: Pricer,
    feas_tol: float = FEAS_TOL,
    opt_tol: float = OPT_TOL,
    max_iter: int = 100_000,
) -> GeneratedSolution:
    """Solve ``min c y, A y = b, y >= 0`` where columns of ``A`` come from ``pricer``.

    ``pricer(y, phase)`` must return the column of least reduced cost
    (``cost - y @ column``, with ``cost`` taken as 0 in phase 1) or ``None``.
    ``b`` must have linearly independent rows' worth of columns available.
    """
    b = np.asarray(b, dtype=float)
    core = _Simplex(b, _Pool(np.zeros((b.shape[0], 0)), np.zeros(0)), pricer, feas_tol, opt_tol, max_iter)
    status, y = core.solve()
    z = core.primal()
    cols = core.pool.A * core.sign[:, None]
    used = np.flatnonzero(z > 0)
    return GeneratedSolution(
        status=status,
        weights=z[used],
        keys=[core.pool.keys[j] for j in used],
        columns=cols[:, used],
        objective=float(core.pool.c[used] @ z[used]) if used.size else 0.0,
        dual=y,
        iterations=core.iterations,
    )


@dataclass
class SignCone:
    """Columns ``sum_b sigma_b M[:, (g, b)]`` for every group ``g`` and sign vector ``sigma``.

    ``M`` is given implicitly: ``transpose(y)`` returns the ``(groups, d)`` table
    ``M^T y`` and ``apply(table)`` returns ``M @ table``. Every column of group
    ``g`` costs ``costs[g] > 0``. The LP is ``min cost . lam`` subject to
    ``sum lam * column = b``, ``lam >= 0``; its dual is
    ``max b . y`` subject to ``|M_g^T y|_1 <= costs[g]`` for every group.
    """

    b: np.ndarray
    costs: np.ndarray
    transpose: Callable[[np.ndarray], np.ndarray]
    apply: Callable[[np.ndarray], np.ndarray]

    def pricer(self) -> Pricer:
        """Primal pricing oracle: best sign vector per group is ``sign(M_g^T y)``."""

        def price(y: np.ndarray, phase: int):
            g = self.transpose(y)
            gain = np.abs(g).sum(axis=1)
            red = -gain if phase == 1 else self.costs - gain
            k = int(np.argmin(red))
            sigma = np.where(g[k] >= 0, 1.0, -1.0)
            table = np.zeros_like(g)
            table[k] = sigma
            return self.apply(table), float(self.costs[k]), float(red[k]), (k, tuple(sigma.astype(int)))

        return price


def _crossings_numpy(g: np.ndarray, h: np.ndarray, levels: list[np.ndarray]):
    """Per group, the least ``lam >= 0`` where ``f(lam) = |g + lam h|_1`` reaches each cost level while rising.

    ``f`` is convex and piecewise linear. An entry with ``g_b`` and ``h_b`` of
    opposite signs flips at ``-g_b / h_b`` and the slope grows by ``2|h_b|``
    there, so sorting the flips gives every segment's slope and start value.
    Returns one ``lam`` array per level (``inf`` where ``f`` never rises past
    it), plus the segment index, its start and its slope for the first level.
    """
    G, d = g.shape
    ah = np.abs(h)
    with np.errstate(divide="ignore", invalid="ignore"):
        bp = -g / h
    active = (h != 0) & (bp > 0)
    bp = np.where(active, bp, np.inf)
    order = np.argsort(bp, axis=1)
    flips = np.take_along_axis(bp, order, axis=1)
    gain = np.take_along_axis(np.where(active, 2.0 * ah, 0.0), order, axis=1)
    slope0 = ah.sum(axis=1) - gain.sum(axis=1)
    start = np.concatenate([np.zeros((G, 1)), flips], axis=1)
    slope = slope0[:, None] + np.concatenate([np.zeros((G, 1)), np.cumsum(gain, axis=1)], axis=1)
    finite = np.isfinite(start)
    width = np.where(finite[:, 1:], np.diff(np.where(finite, start, 0.0), axis=1), 0.0)
    f = np.abs(g).sum(axis=1)[:, None] + np.concatenate(
        [np.zeros((G, 1)), np.cumsum(slope[:, :-1] * width, axis=1)], axis=1
    )
    end = np.concatenate([flips, np.full((G, 1), np.inf)], axis=1)
    # slopes at round-off level belong to basic columns, whose row entry is exactly zero
    rising = finite & (slope > _ZERO_SLOPE * max(1.0, float(ah.max())))
    idx = np.arange(G)
    out = []
    for c in levels:
        with np.errstate(divide="ignore", invalid="ignore"):
            lam = start + np.maximum(c[:, None] - f, 0.0) / slope
        lam = np.where(rising & (lam <= end * (1 + 1e-12) + 1e-15), lam, np.inf)
        out.append(lam)
    seg = np.argmin(out[0], axis=1)
    return [lam[idx, np.argmin(lam, axis=1)] for lam in out], seg, start[idx, seg], slope[idx, seg]


def _ratio_scan(g: np.ndarray, h: np.ndarray, tight: np.ndarray, loose: np.ndarray):
    """Tight and relaxed crossings plus the tight segment's start and slope, per group."""
    zero = _ZERO_SLOPE * max(1.0, float(np.abs(h).max()))
    if _kernels.scan is not None:
        return _kernels.scan(g, h, tight, loose, zero)
    (lam, lam_loose), _, start, slope = _crossings_numpy(g, h, [tight, loose])
    return lam, lam_loose, start, slope


def _segment_signs(g: np.ndarray, h: np.ndarray, at: float) -> np.ndarray:
    """Sign vector of ``g + lam h`` just to the right of ``lam = at``."""
    with np.errstate(divide="ignore", invalid="ignore"):
        bp = -g / h
    flipped = (h != 0) & (bp > 0) & (bp <= at)
    base = np.where(g > 0, 1.0, np.where(g < 0, -1.0, np.where(h >= 0, 1.0, -1.0)))
    return np.where(flipped, np.sign(h), base)


def _dual_ratio(g: np.ndarray, h: np.ndarray, costs: np.ndarray, tol: float, bland: bool):
    """Entering (group, sign vector, step) for the dual ratio test over all cone columns.

    A column ``(g, sigma)`` has reduced cost ``c_g - sigma . g_g`` and row entry
    ``sigma . h_g``; the least ratio over eligible sign vectors is the crossing
    point of ``|g_g + lam h_g|_1 = c_g``. Harris two-pass: the bound relaxed by
    ``tol`` picks a window and the largest row entry inside it wins.
    """
    lam, loose, start, slope = _ratio_scan(g, h, costs, costs + tol)
    if not np.isfinite(lam).any():
        return None
    # every rising group bounds the step; only entries large against the row may enter
    big = slope > _REL_PIVOT * max(1.0, float(np.abs(h).max()))
    if bland:
        window = np.flatnonzero(lam <= lam.min() * (1 + 1e-12) + 1e-15)
        window = window[big[window]]
        if not window.size:
            return None
        k = int(window[0])
    else:
        window = np.flatnonzero((lam <= loose.min()) & big)
        if not window.size:
            return None
        k = int(window[np.argmax(slope[window])])
    signs = _kernels.signs if _kernels.signs is not None else _segment_signs
    return k, signs(g[k], h[k], float(start[k])), float(lam[k])


def solve_sign_cone(
    cone: SignCone,
    feas_tol: float = FEAS_TOL,
    opt_tol: float = OPT_TOL,
    max_iter: int = 100_000,
) -> GeneratedSolution:
    """Solve a :class:`SignCone` LP: dual simplex, then primal clean-up if needed.

    The primal pass starts from the dual optimum and only runs when round-off
    left some reduced cost below ``-opt_tol``.
    """
    b = np.asarray(cone.b, dtype=float)
    core = _Simplex(b, _Pool(np.zeros((b.shape[0], 0)), np.zeros(0)), cone.pricer(), feas_tol, opt_tol, max_iter)
    probe = cone.transpose(np.zeros_like(b))
    rng = np.random.default_rng(0)
    shift = _COST_SHIFT * cone.costs[:, None] * rng.uniform(-1.0, 1.0, probe.shape) / probe.shape[1]
    # start from the largest dual feasible multiple of b rather than y = 0
    spread = np.abs(cone.transpose(b)).sum(axis=1)
    room = cone.costs - np.abs(shift).sum(axis=1)
    if np.any(spread > 0):
        alpha = float(np.min(room[spread > 0] / spread[spread > 0]))
        core.art_cost = alpha * b * core.sign
    status = core.run_dual(cone, shift)
    if status == OPTIMAL:
        # back to the true costs; the primal pass repairs the few reduced costs that turn negative
        for j, (group, _) in enumerate(core.pool.keys):
            core.pool._c[j] = cone.costs[group]
        core._refactor()
        structural = core.basis >= 0
        core.xB[structural] = np.maximum(core.xB[structural], 0.0)
        status = core.run_phase(2)
        core._refactor()
    y = core.duals(2) * core.sign
    z = core.primal()
    cols = core.pool.A * core.sign[:, None]
    used = np.flatnonzero(z > 0)
    return GeneratedSolution(
        status=status,
        weights=z[used],
        keys=[core.pool.keys[j] for j in used],
        columns=cols[:, used],
        objective=float(core.pool.c[used] @ z[used]) if used.size else 0.0,
        dual=y,
        iterations=core.iterations,
    )
