import numpy as np
import pytest

from conecert.lp import LinExpr, LpProblem, LpStatus, audit, evaluate, lin_matmul
from conecert.errors import NumericalFailure

from oracles import brute_force_maximize, random_bounded_lp


def test_box_maximum():
    prob = LpProblem("box")
    x = prob.add_var("x", lb=0.0, ub=1.0)
    y = prob.add_var("y", lb=0.0, ub=1.0)
    prob.maximize(x + y)
    sol = prob.solve()
    assert sol.status is LpStatus.OPTIMAL
    assert sol.objective == pytest.approx(2.0, abs=1e-9)
    assert sol.values["x"] == pytest.approx(1.0, abs=1e-9)


def test_infeasible_pair():
    prob = LpProblem()
    x = prob.add_var("x")
    prob.add_ge(x - 1.0)   # x >= 1
    prob.add_ge(-x)        # x <= 0
    prob.maximize(x)
    assert prob.solve().status is LpStatus.INFEASIBLE


def test_unbounded():
    prob = LpProblem()
    x = prob.add_var("x", lb=0.0)
    prob.maximize(x)
    assert prob.solve().status is LpStatus.UNBOUNDED


def test_audit_flags_perturbed_solution():
    prob = LpProblem()
    x = prob.add_var("x")
    prob.add_ge(1.0 - x)   # x <= 1
    prob.maximize(x)
    assert audit(prob, {"x": 1.1}) == pytest.approx(0.1)
    assert audit(prob, {"x": 0.5}) == 0.0


def test_audit_covers_bounds():
    prob = LpProblem()
    prob.add_var("x", lb=-1.0, ub=2.0)
    assert audit(prob, {"x": 2.5}) == pytest.approx(0.5)
    assert audit(prob, {"x": -3.0}) == pytest.approx(2.0)


def test_optimal_point_passes_audit():
    prob = LpProblem()
    x = prob.add_var("x", lb=-4.0, ub=4.0)
    y = prob.add_var("y", lb=-4.0, ub=4.0)
    prob.add_ge(3.0 - x - y)
    prob.add_eq(x - 2.0 * y)
    prob.maximize(x + 0.5 * y)
    sol = prob.solve()
    assert sol.status is LpStatus.OPTIMAL
    assert audit(prob, sol.values) <= 1e-8


def test_matrix_variables_and_equalities():
    # Solve K A = P K for P with K invertible; the unique solution is K A K^-1.
    k = np.array([[1.0, 0.0], [2.0, 1.0]])
    a = np.array([[0.0, 1.0], [-7.0, -6.0]])
    prob = LpProblem("embed")
    p = prob.add_matrix("P", 2, 2)
    t = prob.add_var("t", ub=100.0)
    prob.add_eq(lin_matmul(k, a) - lin_matmul(p, k), label="embed")
    prob.add_ge(p[0, 1] - t)
    prob.add_ge(p[1, 0] - t)
    prob.maximize(t)
    sol = prob.solve()
    assert sol.status is LpStatus.OPTIMAL
    expected = k @ a @ np.linalg.inv(k)
    np.testing.assert_allclose(sol.value(p), expected, atol=1e-9)


def test_evaluate_mixed_array():
    prob = LpProblem()
    x = prob.add_var("x")
    arr = np.array([[x, 2.0], [x * 3.0 + 1.0, x - x]], dtype=object)
    vals = evaluate(arr, {"x": 2.0})
    np.testing.assert_allclose(vals, [[2.0, 2.0], [7.0, 0.0]])


def test_lin_matmul_matches_numpy_on_floats():
    rng = np.random.default_rng(3)
    a = rng.normal(size=(3, 4))
    b = rng.normal(size=(4, 2))
    np.testing.assert_allclose(lin_matmul(a, b), a @ b)


def test_undeclared_variable_rejected():
    prob = LpProblem()
    prob.add_var("x")
    ghost = LinExpr({"ghost": 1.0})
    with pytest.raises(ValueError):
        prob.add_ge(ghost)
    with pytest.raises(ValueError):
        prob.maximize(ghost)


def test_duplicate_variable_rejected():
    prob = LpProblem()
    prob.add_var("x")
    with pytest.raises(ValueError):
        prob.add_var("x")


def test_nonfinite_coefficient_rejected():
    prob = LpProblem()
    x = prob.add_var("x")
    prob.add_ge(x * np.inf)
    prob.maximize(x)
    with pytest.raises(ValueError):
        prob.solve()


def test_solve_is_deterministic():
    def build():
        prob = LpProblem()
        x = prob.add_var("x", lb=-10.0, ub=10.0)
        y = prob.add_var("y", lb=-10.0, ub=10.0)
        prob.add_ge(4.0 - x - 2.0 * y)
        prob.add_ge(x + y)
        prob.maximize(2.0 * x + y)
        return prob.solve()

    first = build()
    second = build()
    assert first.values == second.values
    assert first.objective == second.objective


def test_agrees_with_vertex_enumeration_oracle():
    rng = np.random.default_rng(20260816)
    for _ in range(100):
        c, a, b, a_eq, b_eq, bounds, a_ub_full, b_ub_full = random_bounded_lp(rng)
        ref, _ = brute_force_maximize(c, a_ub_full, b_ub_full, a_eq, b_eq)
        assert ref is not None

        prob = LpProblem("random")
        xs = np.array(
            [prob.add_var(f"x{i}", lb=lo, ub=hi) for i, (lo, hi) in enumerate(bounds)],
            dtype=object,
        )
        for row, rhs in zip(a, b):
            prob.add_ge(float(rhs) - sum(float(cf) * x for cf, x in zip(row, xs)))
        if a_eq is not None:
            for row, rhs in zip(a_eq, b_eq):
                prob.add_eq(sum(float(cf) * x for cf, x in zip(row, xs)) - float(rhs))
        prob.maximize(sum(float(cf) * x for cf, x in zip(c, xs)))
        sol = prob.solve()
        assert sol.status is LpStatus.OPTIMAL
        assert abs(sol.objective - ref) <= 1e-8
        assert audit(prob, sol.values) <= 1e-8
