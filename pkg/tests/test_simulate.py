import numpy as np
import pytest

from conecert.cones import make_cone
from conecert.errors import DegenerateFit, DimensionMismatch, NonFinite, UnknownExample
from conecert.simulate import (
    MassSpringModel,
    NetworkModel,
    Trajectory,
    VectorField,
    benchmark_certificate,
    check_cone_invariance,
    check_lyapunov_decay,
    estimate_contraction,
    integrate,
    linear_field,
    make_random_network,
    mass_spring_field,
    repro,
    write_csv,
)
from conecert.nonlinear import check_network_outdegree

CONE = make_cone([[1.0, 0.0], [2.0, 1.0]])
# x0 - x0' = (0.1, -0.15) embeds to (0.1, 0.05) >= 0, so the pair is ordered.
ORDERED_PAIR = np.array([[1.0, 0.0], [0.9, 0.15]])


def test_scalar_exponential():
    traj = integrate(linear_field([[-1.0]]), np.array([1.0]), t_end=1.0)
    assert traj.final()[0] == pytest.approx(np.exp(-1.0), abs=1e-6)
    assert traj.t.size == 1001
    assert traj.t[-1] == pytest.approx(1.0)


def test_constant_field():
    fld = VectorField(n=2, rhs=lambda x: np.zeros(2))
    traj = integrate(fld, np.array([3.0, -1.0]), t_end=2.0, dt=0.5)
    np.testing.assert_array_equal(traj.x, np.tile([3.0, -1.0], (5, 1)))


def test_fourth_order_convergence():
    # halving the step should cut the global error by about 2^4
    fld = linear_field([[-1.0]])
    exact = np.exp(-2.0)
    coarse = abs(integrate(fld, np.array([1.0]), t_end=2.0, dt=0.2).final()[0] - exact)
    fine = abs(integrate(fld, np.array([1.0]), t_end=2.0, dt=0.1).final()[0] - exact)
    assert 8.0 <= coarse / fine <= 32.0


@pytest.mark.filterwarnings("ignore:overflow")
def test_nonfinite_guard():
    fld = VectorField(n=1, rhs=lambda x: x * x)
    with pytest.raises(NonFinite):
        integrate(fld, np.array([3.0]), t_end=5.0, dt=0.05)


def test_integrate_validation():
    fld = linear_field([[-1.0]])
    with pytest.raises(ValueError):
        integrate(fld, np.array([1.0]), dt=0.0)
    with pytest.raises(DimensionMismatch):
        integrate(fld, np.array([1.0, 2.0]))
    with pytest.raises(DimensionMismatch):
        integrate(fld, np.array([1.0]), u=1.0)  # no input channel


def test_input_channel_forms():
    fld = linear_field([[-1.0]], B=[[1.0]])
    hold = integrate(fld, np.array([0.0]), u=2.0, t_end=4.0)
    assert hold.final()[0] == pytest.approx(2.0 * (1.0 - np.exp(-4.0)), abs=1e-6)
    wave = integrate(fld, np.array([0.0]), u=lambda t: 2.0, t_end=4.0)
    np.testing.assert_allclose(wave.x, hold.x)


def test_closed_loop_spring_converges():
    traj = integrate(mass_spring_field(), np.array([1.0, 0.0]), t_end=10.0)
    assert np.abs(traj.final()).sum() <= 1e-3
    assert traj.y is not None and traj.y.shape == (traj.t.size, 1)


def test_invariance_certified_pair():
    margin = check_cone_invariance(mass_spring_field(), CONE, [ORDERED_PAIR])
    assert margin >= -1e-6


def test_invariance_zero_difference():
    pair = np.array([[1.0, 0.5], [1.0, 0.5]])
    margin = check_cone_invariance(mass_spring_field(), CONE, [pair], horizon=1.0)
    assert margin == 0.0


def test_invariance_negative_control():
    # open-loop unit spring is not cone-invariant; a boundary difference exits
    fld = mass_spring_field(slope=1.0, gains=(0.0, 0.0))
    pair = np.array([[0.0, 1.0], [0.0, 0.0]])  # difference on the K row-1 face
    margin = check_cone_invariance(fld, CONE, [pair], horizon=5.0)
    assert margin < -1e-4


def test_invariance_rejects_unordered_sample():
    bad = np.array([[0.0, 0.0], [1.0, 0.0]])
    with pytest.raises(ValueError):
        check_cone_invariance(mass_spring_field(), CONE, [bad], horizon=0.1)


def test_lyapunov_decay_certified_rate():
    fld = mass_spring_field()
    ratio = check_lyapunov_decay(fld, CONE, [3.0, 1.0], 2.0 / 3.0, [ORDERED_PAIR])
    assert ratio <= 1.0 + 1e-4
    # rate 0 is a strictly weaker claim
    assert check_lyapunov_decay(fld, CONE, [3.0, 1.0], 0.0, [ORDERED_PAIR]) <= ratio


def test_lyapunov_decay_inflated_rate_fails():
    ratio = check_lyapunov_decay(
        mass_spring_field(), CONE, [3.0, 1.0], 5.0, [ORDERED_PAIR], horizon=3.0
    )
    assert ratio > 1.0


def test_contraction_exponential():
    lam = estimate_contraction(linear_field([[-1.0]]), [1.0], [0.5])
    assert lam == pytest.approx(1.0, abs=0.01)


def test_contraction_marginal():
    fld = VectorField(n=1, rhs=lambda x: np.zeros(1))
    lam = estimate_contraction(fld, [1.0], [0.5])
    assert lam == pytest.approx(0.0, abs=0.01)


def test_contraction_spring_meets_certificate():
    lam = estimate_contraction(mass_spring_field(), [1.0, 0.0], [0.9, 0.15])
    assert lam >= 0.5


def test_contraction_degenerate():
    fld = linear_field([[-100.0]])
    with pytest.raises(DegenerateFit):
        estimate_contraction(fld, [1.0], [0.5], horizon=10.0, dt=0.01)
    with pytest.raises(ValueError):
        estimate_contraction(fld, [1.0], [1.0])


def test_spring_model_slope_guard():
    with pytest.raises(ValueError):
        MassSpringModel(slope_lo=-1.0, slope_hi=1.0, spring=lambda x: np.sin(2.0 * x))
    with pytest.raises(ValueError):
        MassSpringModel(slope_lo=1.0, slope_hi=-1.0)


def test_network_model_validation():
    with pytest.raises(ValueError):
        NetworkModel(a=[0.7], W=[[0.0]])
    with pytest.raises(ValueError):
        NetworkModel(a=[0.2, 0.3], W=[[0.0, 0.9], [0.0, 0.0]])
    with pytest.raises(DimensionMismatch):
        NetworkModel(a=[0.2], W=[[0.0, 0.0]])


def test_random_network_invariants():
    model, bounds = make_random_network(100, seed=7)
    assert model.a.min() >= 0.0 and model.a.max() <= 0.5
    assert model.W.min() >= 0.0 and model.W.max() <= 0.01
    check = check_network_outdegree(model.subsystem_certificates(), bounds)
    assert check.verdict == "Certified"
    # verdict does not depend on the draw
    other, other_bounds = make_random_network(100, seed=8)
    assert not np.array_equal(other.W, model.W)
    again = check_network_outdegree(other.subsystem_certificates(), other_bounds)
    assert again.verdict == "Certified"


def test_random_network_single_node():
    model, bounds = make_random_network(1, seed=3)
    assert model.W.shape == (1, 1) and model.W[0, 0] <= 1.0
    fld = model.field()
    assert fld.n == 2 and fld.m == 1


def test_benchmark_certificate_rate():
    res = benchmark_certificate()
    assert res.verdict == "Certified"
    assert 0.6660 <= res.certificate.rate <= 0.6674


def test_write_csv_deterministic(tmp_path):
    rows = np.array([[0.0, 1.0 / 3.0], [0.1, -2.5e-7]])
    first = tmp_path / "a.csv"
    second = tmp_path / "b.csv"
    write_csv(first, ["t", "x_1"], rows, meta={"seed": 7})
    write_csv(second, ["t", "x_1"], rows, meta={"seed": 7})
    assert first.read_bytes() == second.read_bytes()
    text = first.read_text().splitlines()
    assert text[0] == "# seed: 7"
    assert text[1] == "t,x_1"
    with pytest.raises(DimensionMismatch):
        write_csv(tmp_path / "c.csv", ["t"], rows)


def test_repro_unknown_id():
    with pytest.raises(UnknownExample):
        repro("no-such-example")


def test_repro_ms_linear_table():
    bundle = repro("ms-linear")
    columns, rows = bundle.tables["feasibility"]
    assert columns == ["F1", "F2", "closed_form_margin", "certified"]
    assert rows.shape == (41 * 41, 4)
    # verdicts match the closed-form sign away from the boundary
    clear = np.abs(rows[:, 2]) > 1e-6
    np.testing.assert_array_equal(rows[clear, 3] == 1.0, rows[clear, 2] > 0.0)


def test_repro_ms_nonlinear_bundle(tmp_path):
    bundle = repro("ms-nonlinear")
    assert bundle.certificate.verdict == "Certified"
    assert bundle.certificate.certificate.rate == pytest.approx(2.0 / 3.0, abs=1e-3)
    assert {"phase", "cone_rays"} <= set(bundle.tables)
    from conecert.simulate import write_bundle

    paths = write_bundle(bundle, tmp_path)
    assert len(paths) == len(bundle.tables)
