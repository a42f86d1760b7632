"""Test-side oracles, independent of the package implementation.

The brute-force LP oracle enumerates candidate vertices of a polytope by
solving every square subsystem of active constraints.  It is exponential in
the variable count and only meant for cross-checking small problems.
"""

import itertools

import numpy as np

FEAS_TOL = 1e-9


def brute_force_maximize(c, a_ub, b_ub, a_eq=None, b_eq=None):
    """Maximize c.x over {a_ub x <= b_ub, a_eq x = b_eq} by vertex enumeration.

    Assumes the feasible region is bounded (callers include box constraints
    in a_ub).  Returns (best_value, best_x), or (None, None) when no feasible
    vertex was found.
    """
    c = np.asarray(c, dtype=float)
    a_ub = np.asarray(a_ub, dtype=float)
    b_ub = np.asarray(b_ub, dtype=float)
    n = c.size
    if a_eq is None:
        a_eq = np.zeros((0, n))
        b_eq = np.zeros(0)
    else:
        a_eq = np.asarray(a_eq, dtype=float)
        b_eq = np.asarray(b_eq, dtype=float)

    n_active = n - a_eq.shape[0]
    if n_active < 0:
        raise ValueError("more equalities than variables")

    best_val = None
    best_x = None
    for rows in itertools.combinations(range(a_ub.shape[0]), n_active):
        a_sq = np.vstack([a_eq, a_ub[list(rows)]])
        b_sq = np.concatenate([b_eq, b_ub[list(rows)]])
        try:
            x = np.linalg.solve(a_sq, b_sq)
        except np.linalg.LinAlgError:
            continue
        if not np.all(np.isfinite(x)):
            continue
        if np.max(np.abs(a_sq @ x - b_sq)) > FEAS_TOL:
            continue
        if np.any(a_ub @ x - b_ub > FEAS_TOL):
            continue
        if a_eq.size and np.max(np.abs(a_eq @ x - b_eq)) > FEAS_TOL:
            continue
        val = float(c @ x)
        if best_val is None or val > best_val:
            best_val = val
            best_x = x
    return best_val, best_x


def random_bounded_lp(rng, max_vars=6):
    """Draw a feasible, bounded random LP.

    Returns (c, a_ub, b_ub, a_eq, b_eq, bounds) where bounds is a list of
    finite (lb, ub) pairs already included in (a_ub, b_ub) for the oracle.
    A known interior-ish point makes feasibility certain; the boxes make the
    region bounded.
    """
    n = int(rng.integers(1, max_vars + 1))
    x0 = rng.normal(size=n)
    half = rng.uniform(0.5, 2.0, size=n)
    lb = x0 - half
    ub = x0 + half

    m = int(rng.integers(1, 9))
    a = rng.normal(size=(m, n))
    b = a @ x0 + np.abs(rng.normal(size=m)) + 0.1

    rows = [a, np.eye(n), -np.eye(n)]
    rhs = [b, ub, -lb]
    a_ub = np.vstack(rows)
    b_ub = np.concatenate(rhs)

    if n >= 2 and rng.random() < 0.3:
        a_eq = rng.normal(size=(1, n))
        b_eq = a_eq @ x0
    else:
        a_eq, b_eq = None, None

    c = rng.normal(size=n)
    return c, a, b, a_eq, b_eq, list(zip(lb, ub)), a_ub, b_ub
