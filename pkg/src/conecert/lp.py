"""Dense linear programs with named scalar and matrix unknowns.

Problems are assembled from affine expressions over named variables and
solved with the HiGHS engine behind scipy.optimize.linprog.  The module
keeps the surface small: build an :class:`LpProblem`, add equality and
">= 0" constraints, set a maximization objective, call :meth:`solve`.
``audit`` re-evaluates every constraint from the stored expressions, so
feasibility claims never depend on solver internals.

All solves are deterministic: identical problem descriptions produce
identical solutions.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from .errors import NumericalFailure

# Absolute feasibility tolerance promised by solve(); the engine runs
# tighter (1e-9) so optimal solutions clear this after rounding.
solver_tolerance = 1e-8

_HIGHS_OPTIONS = {
    "primal_feasibility_tolerance": 1e-9,
    "dual_feasibility_tolerance": 1e-9,
}


class LinExpr:
    """Affine expression ``sum(coeff * var) + const`` over named variables."""

    __slots__ = ("coeffs", "const")

    def __init__(self, coeffs=None, const=0.0):
        self.coeffs = {} if coeffs is None else coeffs
        self.const = float(const)

    def copy(self):
        return LinExpr(dict(self.coeffs), self.const)

    def __add__(self, other):
        if isinstance(other, LinExpr):
            out = dict(self.coeffs)
            for name, c in other.coeffs.items():
                out[name] = out.get(name, 0.0) + c
            return LinExpr(out, self.const + other.const)
        return LinExpr(dict(self.coeffs), self.const + float(other))

    __radd__ = __add__

    def __neg__(self):
        return LinExpr({k: -c for k, c in self.coeffs.items()}, -self.const)

    def __sub__(self, other):
        return self + (-other if isinstance(other, LinExpr) else -float(other))

    def __rsub__(self, other):
        return (-self) + float(other)

    def __mul__(self, scalar):
        s = float(scalar)
        return LinExpr({k: c * s for k, c in self.coeffs.items()}, self.const * s)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return self * (1.0 / float(scalar))

    def value(self, values):
        """Evaluate at a name -> float mapping."""
        return self.const + sum(c * values[k] for k, c in self.coeffs.items())

    def __repr__(self):
        terms = " + ".join(f"{c:g}*{k}" for k, c in self.coeffs.items())
        return f"LinExpr({terms or '0'} + {self.const:g})"


class LpStatus(enum.Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"


@dataclass(frozen=True)
class LpSolution:
    """Solver outcome; ``values`` is empty unless status is Optimal."""

    status: LpStatus
    values: dict
    objective: float

    def value(self, expr):
        """Evaluate a LinExpr, a float, or an array of either at the solution."""
        return evaluate(expr, self.values)


def evaluate(expr, values):
    """Evaluate LinExpr scalars or (possibly object-dtype) arrays of them."""
    if isinstance(expr, LinExpr):
        return expr.value(values)
    arr = np.asarray(expr)
    if arr.dtype != object:
        return arr.astype(float)
    out = np.empty(arr.shape, dtype=float)
    flat_in = arr.reshape(-1)
    flat_out = out.reshape(-1)
    for i, e in enumerate(flat_in):
        flat_out[i] = e.value(values) if isinstance(e, LinExpr) else float(e)
    return out


def lin_matmul(a, b):
    """Matrix product where either factor may hold LinExpr entries."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.dtype != object and b.dtype != object:
        return a @ b
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ValueError(f"cannot multiply shapes {a.shape} and {b.shape}")
    out = np.empty((a.shape[0], b.shape[1]), dtype=object)
    for i in range(a.shape[0]):
        for j in range(b.shape[1]):
            acc = a[i, 0] * b[0, j]
            for k in range(1, a.shape[1]):
                acc = acc + a[i, k] * b[k, j]
            out[i, j] = acc
    return out


class LpProblem:
    """A maximization LP assembled from named variables and affine constraints."""

    def __init__(self, name=""):
        self.name = name
        self._bounds = {}        # var name -> [lb, ub], insertion ordered
        self._objective = LinExpr()
        self._eqs = []           # (LinExpr, label), expr == 0
        self._ges = []           # (LinExpr, label), expr >= 0

    # -- variables ---------------------------------------------------------

    def add_var(self, name, lb=None, ub=None):
        if name in self._bounds:
            raise ValueError(f"variable {name!r} declared twice")
        self._bounds[name] = (
            None if lb is None else float(lb),
            None if ub is None else float(ub),
        )
        return LinExpr({name: 1.0})

    def add_matrix(self, name, rows, cols, lb=None, ub=None):
        """Declare a rows x cols block of scalar variables named name[i,j]."""
        out = np.empty((rows, cols), dtype=object)
        for i in range(rows):
            for j in range(cols):
                out[i, j] = self.add_var(f"{name}[{i},{j}]", lb=lb, ub=ub)
        return out

    def add_vector(self, name, size, lb=None, ub=None):
        out = np.empty(size, dtype=object)
        for i in range(size):
            out[i] = self.add_var(f"{name}[{i}]", lb=lb, ub=ub)
        return out

    # -- constraints and objective ------------------------------------------

    def _check_known(self, expr):
        for k in expr.coeffs:
            if k not in self._bounds:
                raise ValueError(f"constraint references undeclared variable {k!r}")

    def maximize(self, expr):
        if not isinstance(expr, LinExpr):
            raise TypeError("objective must be a LinExpr")
        self._check_known(expr)
        self._objective = expr

    def add_eq(self, expr, label=""):
        """Constrain expr == 0.  Arrays are added entrywise."""
        for e, sub in _iter_exprs(expr, label):
            self._check_known(e)
            self._eqs.append((e, sub))

    def add_ge(self, expr, label=""):
        """Constrain expr >= 0.  Arrays are added entrywise."""
        for e, sub in _iter_exprs(expr, label):
            self._check_known(e)
            self._ges.append((e, sub))

    @property
    def num_vars(self):
        return len(self._bounds)

    @property
    def num_constraints(self):
        return len(self._eqs) + len(self._ges)

    # -- solving -------------------------------------------------------------

    def solve(self):
        """Run HiGHS and classify the outcome.

        Returns an LpSolution with status Optimal, Infeasible or Unbounded.
        Raises NumericalFailure when the engine cannot classify the problem
        or the returned point violates a constraint by more than
        ``solver_tolerance``.
        """
        if not self._bounds:
            raise ValueError("problem has no variables")
        names = list(self._bounds)
        index = {k: i for i, k in enumerate(names)}
        n = len(names)

        c = np.zeros(n)
        for k, coef in self._objective.coeffs.items():
            c[index[k]] = -coef  # linprog minimizes

        a_eq, b_eq = _rows(self._eqs, index, n, flip=False)
        a_ub, b_ub = _rows(self._ges, index, n, flip=True)

        for arr in (c, a_eq, b_eq, a_ub, b_ub):
            if arr is not None and not np.all(np.isfinite(arr)):
                raise ValueError("non-finite coefficient in LP data")

        res = linprog(
            c,
            A_ub=a_ub,
            b_ub=b_ub,
            A_eq=a_eq,
            b_eq=b_eq,
            bounds=list(self._bounds.values()),
            method="highs",
            options=dict(_HIGHS_OPTIONS),
        )
        if res.status == 2:
            return LpSolution(LpStatus.INFEASIBLE, {}, float("nan"))
        if res.status == 3:
            return LpSolution(LpStatus.UNBOUNDED, {}, float("nan"))
        if res.status != 0:
            raise NumericalFailure(
                f"LP {self.name!r}: solver status {res.status}: {res.message}"
            )
        values = {k: float(res.x[i]) for i, k in enumerate(names)}
        worst = audit(self, values)
        if worst > solver_tolerance:
            raise NumericalFailure(
                f"LP {self.name!r}: optimal point violates constraints by {worst:.3e}"
            )
        objective = self._objective.value(values)
        return LpSolution(LpStatus.OPTIMAL, values, objective)


def _iter_exprs(expr, label):
    if isinstance(expr, LinExpr):
        yield expr, label
        return
    arr = np.asarray(expr, dtype=object)
    for idx in np.ndindex(arr.shape):
        e = arr[idx]
        if not isinstance(e, LinExpr):
            e = LinExpr(const=float(e))
        sub = f"{label}[{','.join(map(str, idx))}]" if label else label
        yield e, sub


def _rows(constraints, index, n, flip):
    if not constraints:
        return None, None
    a = np.zeros((len(constraints), n))
    b = np.zeros(len(constraints))
    for r, (expr, _) in enumerate(constraints):
        for k, coef in expr.coeffs.items():
            a[r, index[k]] = coef
        b[r] = -expr.const
    if flip:
        # expr >= 0  <=>  -coeffs . x <= const
        return -a, -b
    return a, b


def audit(problem, values):
    """Largest absolute constraint violation of ``values`` for ``problem``.

    Evaluates every stored equality, inequality and variable bound directly
    from the affine expressions; returns 0.0 when all are satisfied.
    """
    worst = 0.0
    for expr, _ in problem._eqs:
        worst = max(worst, abs(expr.value(values)))
    for expr, _ in problem._ges:
        worst = max(worst, -min(0.0, expr.value(values)))
    for name, (lb, ub) in problem._bounds.items():
        x = values[name]
        if lb is not None:
            worst = max(worst, lb - x)
        if ub is not None:
            worst = max(worst, x - ub)
    return worst
