"""Simple polyhedral cones {x : K x >= 0} and the induced partial order."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, NotSimple, ZeroRow

# Rank cutoff is relative to the largest singular value.
rank_rtol = 1e-10
# Default membership slack for analysis; simulation callers scale their own.
membership_tol = 1e-9


@dataclass(frozen=True)
class PolyhedralCone:
    """Cone defined by row constraints K x >= 0 with K full column rank."""

    K: np.ndarray = field(repr=False)

    @property
    def n(self) -> int:
        """Ambient state dimension."""
        return self.K.shape[1]

    @property
    def rows(self) -> int:
        """Number of half-space constraints p_K."""
        return self.K.shape[0]

    def embed(self, x):
        """Embedded coordinates z = K x."""
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.n if x.ndim > 1 else x.shape[0] != self.n:
            raise DimensionMismatch(
                f"state has dimension {x.shape[-1] if x.ndim > 1 else x.shape[0]}, cone expects {self.n}"
            )
        return x @ self.K.T if x.ndim > 1 else self.K @ x

    def margin(self, x) -> float:
        """Smallest constraint value min_i K_i x; nonnegative inside the cone."""
        return float(np.min(self.embed(x)))

    def contains(self, x, tol: float = membership_tol) -> bool:
        return self.margin(x) >= -tol

    def leq(self, x1, x2, tol: float = membership_tol) -> bool:
        """Partial order: x1 precedes x2 iff x2 - x1 lies in the cone."""
        return self.contains(np.asarray(x2, dtype=float) - np.asarray(x1, dtype=float), tol)

    def __repr__(self):
        return f"PolyhedralCone(rows={self.rows}, n={self.n})"


def make_cone(K) -> PolyhedralCone:
    """Validate K and wrap it as a simple polyhedral cone.

    Raises ZeroRow when K has an all-zero row, NotSimple when K has more
    columns than rows or is column-rank deficient (relative singular-value
    cutoff ``rank_rtol``).
    """
    K = np.array(K, dtype=float)
    if K.ndim != 2:
        raise DimensionMismatch(f"cone matrix must be 2-d, got shape {K.shape}")
    if not np.all(np.isfinite(K)):
        raise ValueError("cone matrix has non-finite entries")
    rows, n = K.shape
    if n == 0 or rows == 0:
        raise DimensionMismatch("cone matrix must be nonempty")
    zero = np.all(K == 0.0, axis=1)
    if np.any(zero):
        raise ZeroRow(f"cone matrix row {int(np.argmax(zero))} is zero")
    if rows < n:
        raise NotSimple(f"cone matrix is {rows}x{n}; needs at least {n} rows")
    sv = np.linalg.svd(K, compute_uv=False)
    if sv[-1] <= rank_rtol * sv[0]:
        raise NotSimple(
            f"cone matrix is column-rank deficient (sigma_min/sigma_max = {sv[-1] / sv[0]:.2e})"
        )
    K.setflags(write=False)
    return PolyhedralCone(K)


def identity_cone(n: int) -> PolyhedralCone:
    """The nonnegative orthant in dimension n."""
    return make_cone(np.eye(n))
