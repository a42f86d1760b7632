"""Cone positivity, stability and dissipativity of linear systems.

A linear system x' = A x + B u, y = C x is positive with respect to a
simple polyhedral cone {x : K x >= 0} exactly when the embedded system
z' = P z + G u, y = H z exists with P Metzler, G >= 0, H >= 0; the test
is a single linear program and its negative answer is a disproof.
Exponential stability and dissipativity add a strictly positive scaling
vector v and are sufficient conditions with verdict Unknown on failure.

This module is the one-vertex specialization of :mod:`conecert.nonlinear`.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .cones import PolyhedralCone
from .nonlinear import (
    CERTIFIED,
    AnalysisOptions,
    CertificationResult,
    DifferentialCertificate,
    InterconnectionBounds,
    JacobianEnvelope,
    MonotoneEmbedding,
    SupplyRate,
    certify_differential_dissipativity,
    certify_incremental_stability,
    certify_monotonicity,
    check_network_outdegree,
    linear_envelope,
    make_envelope,
)

__all__ = [
    "LinearSystem",
    "PositiveEmbedding",
    "StabilityCertificate",
    "DissipativityCertificate",
    "SupplyRate",
    "certify_positivity",
    "certify_stability",
    "certify_dissipativity",
    "check_linear_network",
]


@dataclass(frozen=True)
class LinearSystem:
    """x' = A x + B u, y = C x.  B or C may be None for closed systems."""

    A: np.ndarray = field(repr=False)
    B: np.ndarray | None = field(repr=False, default=None)
    C: np.ndarray | None = field(repr=False, default=None)

    def __post_init__(self):
        env = make_envelope([self.A], self.B, self.C)
        object.__setattr__(self, "A", env.vertices[0])
        object.__setattr__(self, "B", env.B)
        object.__setattr__(self, "C", env.C)

    @property
    def n(self):
        return self.A.shape[0]

    def as_envelope(self) -> JacobianEnvelope:
        return linear_envelope(self.A, self.B, self.C)


@dataclass(frozen=True)
class PositiveEmbedding:
    """K A = P K with P Metzler, G = K B >= 0, C = H K with H >= 0."""

    K: np.ndarray = field(repr=False)
    P: np.ndarray = field(repr=False)
    G: np.ndarray = field(repr=False)
    H: np.ndarray = field(repr=False)


@dataclass(frozen=True)
class StabilityCertificate:
    embedding: PositiveEmbedding
    v: np.ndarray
    rate: float


@dataclass(frozen=True)
class DissipativityCertificate:
    embedding: PositiveEmbedding
    v: np.ndarray
    rate: float
    supply: SupplyRate


def _to_linear_embedding(memb: MonotoneEmbedding) -> PositiveEmbedding:
    return PositiveEmbedding(memb.K, memb.P[0], memb.G, memb.H)


def certify_positivity(system: LinearSystem, cone: PolyhedralCone) -> CertificationResult:
    """Decide K-positivity of a linear system.  The verdict is definitive."""
    result = certify_monotonicity(system.as_envelope(), cone)
    if result.certificate is None:
        return result
    return replace(result, certificate=_to_linear_embedding(result.certificate))


def certify_stability(
    system: LinearSystem,
    cone: PolyhedralCone,
    opts: AnalysisOptions | None = None,
) -> CertificationResult:
    """Search for v > 0 with -v.P >= rate * v, rate > 0 (sufficient only)."""
    result = certify_incremental_stability(system.as_envelope(), cone, opts)
    if result.certificate is None:
        return result
    cert = StabilityCertificate(
        _to_linear_embedding(result.certificate.embedding),
        result.certificate.v,
        result.certificate.rate,
    )
    return replace(result, certificate=cert)


def certify_dissipativity(
    system: LinearSystem,
    cone: PolyhedralCone,
    supply: SupplyRate,
    opts: AnalysisOptions | None = None,
) -> CertificationResult:
    """Search for v > 0 with -v.P - q.H >= rate * v and r >= v.G."""
    result = certify_differential_dissipativity(system.as_envelope(), cone, supply, opts)
    if result.certificate is None:
        return result
    cert = DissipativityCertificate(
        _to_linear_embedding(result.certificate.embedding),
        result.certificate.v,
        result.certificate.rate,
        result.certificate.supply,
    )
    return replace(result, certificate=cert)


def _as_differential(cert) -> DifferentialCertificate:
    emb = cert.embedding
    if isinstance(emb, PositiveEmbedding):
        emb = MonotoneEmbedding(emb.K, (emb.P,), emb.G, emb.H)
    return DifferentialCertificate(emb, cert.v, cert.rate, cert.supply)


def check_linear_network(certs, coupling, mode="standard"):
    """Stability of u_i = sum_j W_ij y_j with dissipative linear subsystems.

    ``coupling`` is a dense N x N matrix for scalar ports or a nested list
    of blocks (m_i x p_j); the constant coupling gives tight Jacobian
    bounds, so this is the out-degree interconnection check.
    """
    if isinstance(coupling, InterconnectionBounds):
        bounds = coupling
    else:
        try:
            dense = np.asarray(coupling, dtype=float)
        except (TypeError, ValueError):
            dense = None
        if dense is not None and dense.ndim == 2:
            bounds = InterconnectionBounds.from_weight_matrix(dense)
        else:
            bounds = InterconnectionBounds.from_blocks(coupling)
    return check_network_outdegree([_as_differential(c) for c in certs], bounds, mode=mode)
