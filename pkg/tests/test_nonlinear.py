import numpy as np
import pytest

from conecert.cones import identity_cone, make_cone
from conecert.errors import ModeViolation
from conecert.nonlinear import (
    AnalysisOptions,
    DifferentialCertificate,
    InDegreeCertificate,
    InterconnectionBounds,
    MonotoneEmbedding,
    SupplyRate,
    certify_differential_dissipativity,
    certify_incremental_stability,
    certify_indegree,
    certify_monotonicity,
    check_network_indegree,
    check_network_outdegree,
    linear_envelope,
    make_envelope,
    mass_spring_envelope,
)

BENCH_CONE = make_cone([[1.0, 0.0], [2.0, 1.0]])
V0 = AnalysisOptions(v0=np.array([3.0, 1.0]))


def spring_env():
    return mass_spring_envelope(gains=(-6.0, -6.0))


def test_mass_spring_envelope_vertices():
    env = spring_env()
    assert env.num_vertices == 2
    np.testing.assert_allclose(env.vertices[0], [[0.0, 1.0], [-5.0, -6.0]])
    np.testing.assert_allclose(env.vertices[1], [[0.0, 1.0], [-7.0, -6.0]])
    np.testing.assert_allclose(env.B, [[0.0], [1.0]])
    np.testing.assert_allclose(env.C, [[1.0, 0.0]])


def test_envelope_validation():
    with pytest.raises(ValueError):
        make_envelope([])
    with pytest.raises(ValueError):
        make_envelope([np.eye(2), np.eye(3)])
    with pytest.raises(ValueError):
        make_envelope([np.eye(2)], B=np.zeros((3, 1)))


def test_monotonicity_vertex_embeddings():
    result = certify_monotonicity(spring_env(), BENCH_CONE)
    assert result.verdict == "Certified"
    emb = result.certificate
    np.testing.assert_allclose(emb.P[0], [[-2.0, 1.0], [3.0, -4.0]], atol=1e-9)
    np.testing.assert_allclose(emb.P[1], [[-2.0, 1.0], [1.0, -4.0]], atol=1e-9)
    assert result.margins["offdiagonal"] == pytest.approx(1.0, abs=1e-9)
    assert result.residuals["embedding"] <= 1e-8


def test_monotonicity_fails_without_feedback():
    env = mass_spring_envelope(gains=(0.0, 0.0))
    result = certify_monotonicity(env, BENCH_CONE)
    assert result.verdict == "NotCertified"
    assert result.margins["offdiagonal"] < 0


def test_incremental_stability_rate_one():
    result = certify_incremental_stability(spring_env(), BENCH_CONE, V0)
    assert result.verdict == "Certified"
    cert = result.certificate
    assert isinstance(cert, DifferentialCertificate)
    np.testing.assert_allclose(cert.v, [3.0, 1.0])
    assert cert.rate == pytest.approx(1.0, abs=1e-9)
    assert cert.supply is None


def test_differential_dissipativity_rate_two_thirds():
    supply = SupplyRate.scalar(r=1.0, q=1.0)
    result = certify_differential_dissipativity(spring_env(), BENCH_CONE, supply, V0)
    assert result.verdict == "Certified"
    assert result.certificate.rate == pytest.approx(2.0 / 3.0, abs=1e-9)
    # Slower than the linear slope-one system, whose rate is 1.
    np.testing.assert_allclose(result.certificate.v, [3.0, 1.0])


def test_dissipativity_default_scaling_alternates():
    # Starting from v = (1, 1) the decay row is violated; one rebalancing
    # step lands on v = (1.5, 0.5) which certifies with rate 1/3.
    supply = SupplyRate.scalar(r=1.0, q=1.0)
    result = certify_differential_dissipativity(spring_env(), BENCH_CONE, supply)
    assert result.verdict == "Certified"
    assert result.rounds == 2
    np.testing.assert_allclose(result.certificate.v, [1.5, 0.5], atol=1e-9)
    assert result.certificate.rate == pytest.approx(1.0 / 3.0, abs=1e-8)


def test_fixed_scaling_respects_decay_chain():
    # With v = (v1, 1) fixed, certifiability needs -f2 > v1 + 2 > -f2 - v1 r
    # entrywise; probe one passing and one failing gain pair in single-round
    # mode so no rebalancing can rescue the failing one.
    supply = SupplyRate.scalar(r=1.0, q=1.0)
    opts = AnalysisOptions(v0=np.array([3.0, 1.0]), rounds=1)
    good = certify_differential_dissipativity(spring_env(), BENCH_CONE, supply, opts)
    assert good.verdict == "Certified"
    env_bad = mass_spring_envelope(gains=(-6.0, -2.0))
    bad = certify_differential_dissipativity(env_bad, BENCH_CONE, supply, opts)
    assert bad.verdict == "Unknown"


def test_single_vertex_envelope_matches_linear():
    a = np.array([[0.0, 1.0], [-7.0, -6.0]])
    env = linear_envelope(a, B=[[0.0], [1.0]], C=[[1.0, 0.0]])
    assert env.num_vertices == 1
    result = certify_incremental_stability(env, BENCH_CONE, V0)
    assert result.verdict == "Certified"
    assert result.certificate.rate == pytest.approx(1.0, abs=1e-9)


def test_vertex_certificate_covers_hull():
    # Margins are affine in the vertex matrices, so any convex combination
    # inherits the worst-vertex bound; spot-check random mixtures.
    result = certify_monotonicity(spring_env(), BENCH_CONE)
    p1, p2 = result.certificate.P
    rng = np.random.default_rng(7)
    worst = min(p1[1, 0], p2[1, 0])
    for theta in rng.uniform(0.0, 1.0, size=16):
        mix = theta * p1 + (1.0 - theta) * p2
        assert mix[1, 0] >= worst - 1e-12
        assert mix[0, 1] == pytest.approx(1.0)


def test_unstable_envelope_unknown():
    env = linear_envelope([[1.0, 0.5], [0.5, 1.0]])
    result = certify_incremental_stability(env, identity_cone(2))
    assert result.verdict == "Unknown"


def test_indegree_certification():
    supply = SupplyRate.scalar(r=1.0, q=1.0)
    result = certify_indegree(spring_env(), BENCH_CONE, supply)
    assert result.verdict == "Certified"
    cert = result.certificate
    assert isinstance(cert, InDegreeCertificate)
    assert np.all(cert.w > 0)
    assert cert.rate > 0.2
    # Direct recheck of the defining inequalities at the found scaling.
    emb = cert.embedding
    gq = np.asarray(emb.G, dtype=float) @ supply.q
    for p in emb.P:
        assert np.all(-p @ cert.w - gq >= cert.rate * cert.w - 1e-8)
    assert np.all(supply.r - np.asarray(emb.H, dtype=float) @ cert.w >= -1e-9)


def _handmade_pair(rng, mode_exact=True):
    """Symmetric single-node setup where both degree forms must agree."""
    off = rng.uniform(0.0, 1.0)
    diag = -rng.uniform(1.5, 3.0)
    p = np.array([[diag, off], [off, diag]])
    g = rng.uniform(0.0, 1.0, size=(2, 1))
    v = rng.uniform(0.5, 2.0, size=2)
    emb_out = MonotoneEmbedding(K=np.eye(2), P=(p,), G=g, H=g.T)
    r = float(g[:, 0] @ v)
    q = rng.uniform(0.0, 0.5)
    rate = rng.uniform(0.05, 0.2)
    out = DifferentialCertificate(
        embedding=emb_out, v=v, rate=rate,
        supply=SupplyRate(r=[r], q=[q]),
    )
    ind = InDegreeCertificate(
        embedding=emb_out, w=v, rate=rate,
        supply=SupplyRate(r=[r], q=[q]),
    )
    return out, ind


def test_degree_forms_agree_on_symmetric_instances():
    rng = np.random.default_rng(20260816)
    for _ in range(25):
        out, ind = _handmade_pair(rng)
        w = rng.uniform(-0.3, 0.8)
        bounds = InterconnectionBounds.from_weight_matrix([[w]])
        for mode in ("standard", "alternate"):
            a = check_network_outdegree([out], bounds, mode=mode)
            b = check_network_indegree([ind], bounds, mode=mode)
            assert a.verdict == b.verdict, (w, mode)
            if a.verdict == "Certified":
                assert a.rate == pytest.approx(b.rate)


def _spring_out_cert():
    supply = SupplyRate.scalar(r=1.0, q=1.0)
    res = certify_differential_dissipativity(spring_env(), BENCH_CONE, supply, V0)
    assert res.verdict == "Certified"
    return res.certificate


def test_outdegree_network_standard():
    cert = _spring_out_cert()
    good = check_network_outdegree(
        [cert, cert], InterconnectionBounds.from_weight_matrix([[0.0, 0.4], [0.3, 0.0]])
    )
    assert good.verdict == "Certified"
    assert good.rate == pytest.approx(cert.rate)
    assert good.margins["supply_balance"] >= 0
    bad = check_network_outdegree(
        [cert, cert], InterconnectionBounds.from_weight_matrix([[0.0, 1.2], [0.3, 0.0]])
    )
    assert bad.verdict == "Unknown"
    assert bad.rate is None


def test_alternate_mode_allows_negative_self_coupling():
    # v = (3, 1) makes r = G.v exactly 1, so the aggregated form applies; a
    # mildly negative self-weight shifts the embedded off-diagonals by the
    # weight but keeps them nonnegative.
    cert = _spring_out_cert()
    bounds = InterconnectionBounds.from_scalar_ranges([[-0.5]], [[-0.2]])
    standard = check_network_outdegree([cert], bounds)
    assert standard.verdict == "Unknown"
    assert standard.margins["coupling_nonneg"] < 0
    alt = check_network_outdegree([cert], bounds, mode="alternate")
    assert alt.verdict == "Certified"
    assert alt.margins["self_coupling_offd"] == pytest.approx(0.5, abs=1e-9)
    too_negative = InterconnectionBounds.from_scalar_ranges([[-2.0]], [[-1.5]])
    assert check_network_outdegree([cert], too_negative, mode="alternate").verdict == "Unknown"


def test_alternate_mode_requires_matched_supply():
    cert = _spring_out_cert()
    mismatched = DifferentialCertificate(
        embedding=cert.embedding, v=cert.v, rate=cert.rate,
        supply=SupplyRate(r=[2.0], q=cert.supply.q),
    )
    bounds = InterconnectionBounds.from_weight_matrix([[0.1]])
    with pytest.raises(ModeViolation):
        check_network_outdegree([mismatched], bounds, mode="alternate")


def test_network_requires_supplies():
    res = certify_incremental_stability(spring_env(), BENCH_CONE, V0)
    bounds = InterconnectionBounds.from_weight_matrix([[0.0]])
    with pytest.raises(ModeViolation):
        check_network_outdegree([res.certificate], bounds)


def test_bounds_validation():
    with pytest.raises(ValueError):
        InterconnectionBounds.from_scalar_ranges([[0.5]], [[0.2]])
    with pytest.raises(ValueError):
        InterconnectionBounds.from_weight_matrix([[0.0, 1.0]])
