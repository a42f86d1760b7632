import numpy as np
import pytest

from conecert.cones import identity_cone, make_cone
from conecert.errors import DimensionMismatch, NotSimple, ZeroRow


def test_orthant_membership():
    cone = identity_cone(2)
    assert cone.contains([1.0, 0.0])
    assert cone.contains([0.0, 0.0])
    assert not cone.contains([-1.0, 0.5])


def test_shifted_cone_membership_and_embedding():
    cone = make_cone([[1.0, 0.0], [2.0, 1.0]])
    assert cone.contains([1.0, -1.0])          # K x = (1, 1)
    assert not cone.contains([1.0, -3.0])      # K x = (1, -1)
    np.testing.assert_allclose(cone.embed([1.0, -1.0]), [1.0, 1.0])


def test_partial_order():
    cone = make_cone([[1.0, 0.0], [2.0, 1.0]])
    x1 = np.array([0.0, 0.0])
    x2 = np.array([1.0, -1.0])
    assert cone.leq(x1, x2)
    assert not cone.leq(x2, x1)


def test_non_square_cone_is_simple():
    cone = make_cone([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
    assert cone.rows == 3 and cone.n == 2
    assert cone.contains([1.0, 1.0])
    assert not cone.contains([1.0, -2.0])


def test_zero_row_rejected():
    with pytest.raises(ZeroRow):
        make_cone([[1.0, 0.0], [0.0, 0.0]])


def test_rank_deficient_rejected():
    with pytest.raises(NotSimple):
        make_cone([[1.0, 0.0], [1.0, 0.0]])


def test_wide_matrix_rejected():
    with pytest.raises(NotSimple):
        make_cone([[1.0, 0.0, 0.0]])


def test_bad_shapes_rejected():
    with pytest.raises(DimensionMismatch):
        make_cone([1.0, 0.0])
    cone = identity_cone(2)
    with pytest.raises(DimensionMismatch):
        cone.contains([1.0, 0.0, 0.0])


def test_cone_axioms_on_random_points():
    rng = np.random.default_rng(11)
    cone = make_cone(rng.normal(size=(5, 3)) + 2.0 * np.eye(5, 3))
    for _ in range(50):
        x = rng.normal(size=3)
        y = rng.normal(size=3)
        a = float(rng.uniform(0.1, 10.0))
        assert cone.contains(x) == cone.contains(a * x)
        if cone.contains(x) and cone.contains(y):
            assert cone.contains(x + y)
        np.testing.assert_allclose(
            cone.embed(x + y), cone.embed(x) + cone.embed(y), atol=1e-12
        )


def test_embedding_is_injective():
    rng = np.random.default_rng(12)
    K = rng.normal(size=(4, 3))
    cone = make_cone(K)
    x = rng.normal(size=3)
    z = cone.embed(x)
    back, *_ = np.linalg.lstsq(K, z, rcond=None)
    np.testing.assert_allclose(back, x, atol=1e-10)


def test_batch_embedding():
    cone = make_cone([[1.0, 0.0], [2.0, 1.0]])
    xs = np.array([[1.0, -1.0], [0.0, 1.0]])
    np.testing.assert_allclose(cone.embed(xs), [[1.0, 1.0], [0.0, 1.0]])
