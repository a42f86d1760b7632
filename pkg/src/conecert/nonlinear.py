"""Certificates for systems whose Jacobian ranges over a matrix polytope.

A vector field f with dJ(x) = df/dx contained in the convex hull of known
vertex matrices A_1..A_L is monotone with respect to a simple polyhedral
cone {x : K x >= 0} when every vertex admits an embedding K A_i = P_i K
with P_i Metzler (off-diagonal entries nonnegative), inputs enter through
G = K B >= 0 and outputs factor as C = H K with H >= 0.  Scaling vectors
v (or w for the in-degree form) upgrade monotonicity to incremental
exponential stability and to differential dissipativity with a linear
supply rate r.u - q.y.  Every condition here is affine, so each question
is answered by small linear programs; the bilinear coupling between the
scaling vector and the embedding matrices is handled by alternation.

Main entry points
-----------------
certify_monotonicity            vertex embeddings, necessary and sufficient
certify_incremental_stability   adds a scaling vector v and decay rate
certify_differential_dissipativity   adds a supply rate (r, q)
certify_indegree                column/max-type variant with scaling w
check_network_outdegree         interconnection test driven by (r, q)
check_network_indegree          interconnection test for the w-form
mass_spring_envelope            Jacobian hull of the spring benchmark
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .cones import PolyhedralCone
from .errors import DimensionMismatch, ModeViolation, NumericalFailure
from .lp import LpProblem, LpStatus, lin_matmul

CERTIFIED = "Certified"
NOT_CERTIFIED = "NotCertified"
UNKNOWN = "Unknown"

# Numerical guards.  Margin and rate unknowns are capped and matrix unknowns
# boxed so every assembled LP has a vertex optimum; the caps sit far outside
# the scale of any certificate of interest and never bind a verdict at the
# zero threshold.
MARGIN_CAP = 1e3
RATE_CAP = 1e3
ENTRY_BOX = 1e6
# Verdict comparisons at exactly zero are hardened by solver tolerance.
VERDICT_TOL = 1e-9
# Residual scale for embedding equalities produced by the solver.
RESIDUAL_TOL = 1e-8


def _as_matrix(value, name, rows=None, cols=None):
    arr = np.array(value, dtype=float)
    if arr.ndim != 2:
        raise DimensionMismatch(f"{name} must be a matrix, got shape {arr.shape}")
    if rows is not None and arr.shape[0] != rows:
        raise DimensionMismatch(f"{name} has {arr.shape[0]} rows, expected {rows}")
    if cols is not None and arr.shape[1] != cols:
        raise DimensionMismatch(f"{name} has {arr.shape[1]} columns, expected {cols}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    arr.setflags(write=False)
    return arr


def _as_vector(value, name, size=None):
    arr = np.array(value, dtype=float).reshape(-1)
    if size is not None and arr.size != size:
        raise DimensionMismatch(f"{name} has length {arr.size}, expected {size}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    arr.setflags(write=False)
    return arr


def _entry_min(arr):
    arr = np.asarray(arr)
    return float(arr.min()) if arr.size else float("inf")


def _offd_min(mat):
    p = mat.shape[0]
    if p < 2:
        return float("inf")
    mask = ~np.eye(p, dtype=bool)
    return float(mat[mask].min())


@dataclass(frozen=True)
class SupplyRate:
    """Linear supply rate s(u, y) = r.u - q.y.

    For the in-degree (w-form) certificates the roles flip: r is compared
    against H w in output coordinates and q weighs the input matrix G.
    """

    r: np.ndarray
    q: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "r", _as_vector(self.r, "r"))
        object.__setattr__(self, "q", _as_vector(self.q, "q"))

    @classmethod
    def scalar(cls, r, q):
        return cls(np.array([float(r)]), np.array([float(q)]))


@dataclass(frozen=True)
class JacobianEnvelope:
    """Vertex matrices A_1..A_L whose convex hull contains the Jacobian.

    B and C are the constant input and output matrices; either may be empty
    (shape (n, 0) / (0, n)) for closed or output-free systems.  ``field``
    optionally carries a simulatable vector field for cross-checks; it is
    never called here.
    """

    vertices: tuple
    B: np.ndarray = field(repr=False, default=None)
    C: np.ndarray = field(repr=False, default=None)
    field_handle: object = None

    @property
    def n(self):
        return self.vertices[0].shape[0]

    @property
    def m(self):
        return self.B.shape[1]

    @property
    def p(self):
        return self.C.shape[0]

    @property
    def num_vertices(self):
        return len(self.vertices)


def make_envelope(vertices, B=None, C=None, field_handle=None) -> JacobianEnvelope:
    """Validate vertex/input/output data and build a JacobianEnvelope."""
    if len(vertices) == 0:
        raise DimensionMismatch("envelope needs at least one vertex")
    mats = []
    n = None
    for i, A in enumerate(vertices):
        A = _as_matrix(A, f"vertex {i}")
        if A.shape[0] != A.shape[1]:
            raise DimensionMismatch(f"vertex {i} is not square: {A.shape}")
        if n is None:
            n = A.shape[0]
        elif A.shape[0] != n:
            raise DimensionMismatch(f"vertex {i} has size {A.shape[0]}, expected {n}")
        mats.append(A)
    B = np.zeros((n, 0)) if B is None else _as_matrix(B, "B", rows=n)
    C = np.zeros((0, n)) if C is None else _as_matrix(C, "C", cols=n)
    B.setflags(write=False)
    C.setflags(write=False)
    return JacobianEnvelope(tuple(mats), B, C, field_handle)


def linear_envelope(A, B=None, C=None) -> JacobianEnvelope:
    """Envelope of a linear system: a single vertex."""
    return make_envelope([A], B, C)


def mass_spring_envelope(slope_lo=-1.0, slope_hi=1.0, gains=None, field_handle=None):
    """Jacobian hull of the one-mass nonlinear spring benchmark.

    State (position, velocity), dynamics x1' = x2, x2' = -k(x1) + u with
    spring slope dk/dx1 in [slope_lo, slope_hi].  ``gains`` (f1, f2) closes
    the loop x2' += f1 x1 + f2 x2 while keeping the external input channel.
    """
    if slope_hi < slope_lo:
        raise ValueError("slope_hi must be at least slope_lo")
    f1, f2 = (0.0, 0.0) if gains is None else (float(gains[0]), float(gains[1]))
    verts = [
        np.array([[0.0, 1.0], [f1 - s, f2]])
        for s in ([slope_lo] if slope_hi == slope_lo else [slope_lo, slope_hi])
    ]
    return make_envelope(
        verts, B=[[0.0], [1.0]], C=[[1.0, 0.0]], field_handle=field_handle
    )


@dataclass(frozen=True)
class MonotoneEmbedding:
    """Vertex embeddings K A_i = P_i K with Metzler P_i, G = K B, C = H K."""

    K: np.ndarray = field(repr=False)
    P: tuple = field(repr=False)
    G: np.ndarray = field(repr=False)
    H: np.ndarray = field(repr=False)


@dataclass(frozen=True)
class DifferentialCertificate:
    """Scaled embedding certificate: -v.P_i - q.H >= rate * v at each vertex.

    ``supply`` is None for pure incremental stability (q = 0, no r column).
    """

    embedding: MonotoneEmbedding
    v: np.ndarray
    rate: float
    supply: SupplyRate | None = None


@dataclass(frozen=True)
class InDegreeCertificate:
    """Column-form certificate: -P_i w - G q >= rate * w, r - H w >= 0."""

    embedding: MonotoneEmbedding
    w: np.ndarray
    rate: float
    supply: SupplyRate | None = None


@dataclass(frozen=True)
class CertificationResult:
    verdict: str
    margins: dict
    residuals: dict
    certificate: object = None
    rounds: int = 0

    @property
    def ok(self):
        return self.verdict == CERTIFIED

    def worst_margin(self):
        if not self.margins:
            return None, float("inf")
        name = min(self.margins, key=lambda k: self.margins[k])
        return name, self.margins[name]


@dataclass(frozen=True)
class AnalysisOptions:
    """Knobs for the alternation used by the scaled certificates.

    eps1 hardens strict inequalities (v >= eps1); rounds bounds the number
    of alternation sweeps; stall_tol is the minimum improvement of the
    feasibility slack between sweeps before giving up; v0 seeds the scaling
    vector (w for the in-degree form) and defaults to all ones.
    """

    eps1: float = 1e-6
    rounds: int = 20
    stall_tol: float = 1e-7
    v0: np.ndarray | None = None
    rate_cap: float = RATE_CAP
    margin_cap: float = MARGIN_CAP
    entry_box: float = ENTRY_BOX


# ---------------------------------------------------------------------------
# embeddings (monotonicity)
# ---------------------------------------------------------------------------


def _square_embedding(K, A):
    # P K = K A with K invertible has the unique solution K A K^-1.
    return np.linalg.solve(K.T, (K @ A).T).T


def _vertex_embedding_lp(K, A, tag, cap=MARGIN_CAP, box=ENTRY_BOX):
    """Maximize t subject to K A = P K and offd(P) >= t; return (P, t)."""
    pk, n = K.shape
    prob = LpProblem(f"embedding[{tag}]")
    P = prob.add_matrix("P", pk, pk, lb=-box, ub=box)
    t = prob.add_var("t", ub=cap)
    prob.add_eq(lin_matmul(K, A) - lin_matmul(P, K), "embed")
    for a in range(pk):
        for b in range(pk):
            if a != b:
                prob.add_ge(P[a, b] - t)
    prob.maximize(t)
    sol = prob.solve()
    if sol.status is not LpStatus.OPTIMAL:
        raise NumericalFailure(f"embedding LP returned {sol.status.value}")
    P_val = sol.value(P)
    if pk == n:
        direct = _square_embedding(K, A)
        scale = max(1.0, float(np.abs(direct).max()))
        if np.abs(P_val - direct).max() > RESIDUAL_TOL * scale:
            raise NumericalFailure("square-cone embedding disagrees with K A K^-1")
    if pk < 2:
        return P_val, float("inf")
    return P_val, float(sol.objective)


def _output_factor_lp(K, C, cap=MARGIN_CAP, box=ENTRY_BOX):
    """Maximize s subject to C = H K and H >= s; return (H, s)."""
    pk, n = K.shape
    p = C.shape[0]
    if p == 0:
        return np.zeros((0, pk)), float("inf")
    prob = LpProblem("output-factor")
    H = prob.add_matrix("H", p, pk, lb=-box, ub=box)
    s = prob.add_var("s", ub=cap)
    prob.add_eq(C - lin_matmul(H, K), "output")
    for a in range(p):
        for b in range(pk):
            prob.add_ge(H[a, b] - s)
    prob.maximize(s)
    sol = prob.solve()
    if sol.status is LpStatus.INFEASIBLE:
        # C = H K is always solvable for full-column-rank K; treat anything
        # else as numerical trouble.
        raise NumericalFailure("output factor LP infeasible")
    if sol.status is not LpStatus.OPTIMAL:
        raise NumericalFailure(f"output factor LP returned {sol.status.value}")
    return sol.value(H), float(sol.objective)


def embedding_residuals(K, vertices, P_list, G, H, B, C):
    """Equality residuals of an embedding, max-abs per family."""
    res_embed = 0.0
    for A, P in zip(vertices, P_list):
        res_embed = max(res_embed, float(np.abs(K @ A - P @ K).max()))
    res_g = float(np.abs(G - K @ B).max()) if G.size else 0.0
    res_h = float(np.abs(C - H @ K).max()) if C.size else 0.0
    return {"embedding": res_embed, "input_map": res_g, "output_factor": res_h}


def embedding_margins(P_list, G, H):
    """Inequality slacks of an embedding (>= 0 when valid)."""
    return {
        "offdiagonal": min(_offd_min(P) for P in P_list),
        "input_map": _entry_min(G),
        "output_factor": _entry_min(H),
    }


def certify_monotonicity(env: JacobianEnvelope, cone: PolyhedralCone) -> CertificationResult:
    """Decide cone monotonicity of every field with Jacobian in the envelope.

    Runs one LP per vertex maximizing the worst off-diagonal entry of P_i,
    one LP for the output factor H, and checks G = K B directly.  The
    verdict is definitive relative to the envelope: NotCertified means no
    valid embedding exists.
    """
    K = cone.K
    if env.n != cone.n:
        raise DimensionMismatch(
            f"envelope dimension {env.n} does not match cone dimension {cone.n}"
        )
    P_list = []
    worst_offd = float("inf")
    for i, A in enumerate(env.vertices):
        P, t = _vertex_embedding_lp(K, A, tag=i)
        P_list.append(P)
        worst_offd = min(worst_offd, t)
    H, h_margin = _output_factor_lp(K, env.C)
    G = K @ env.B
    margins = {
        "offdiagonal": worst_offd,
        "input_map": _entry_min(G),
        "output_factor": h_margin,
    }
    residuals = embedding_residuals(K, env.vertices, P_list, G, H, env.B, env.C)
    overall = min(margins.values())
    if overall >= -VERDICT_TOL:
        cert = MonotoneEmbedding(K, tuple(P_list), G, H)
        return CertificationResult(CERTIFIED, margins, residuals, cert)
    return CertificationResult(NOT_CERTIFIED, margins, residuals, None)


# ---------------------------------------------------------------------------
# scaled certificates (alternation on v or w)
# ---------------------------------------------------------------------------


def _feasibility_stage_out(K, env, v, q, eps1, opts):
    """Fix v; maximize c with offd(P_i), H >= c_p and -v.P_i - q.H >= c_s."""
    pk = K.shape[0]
    L = env.num_vertices
    p = env.p
    v_row = v.reshape(1, pk)
    prob = LpProblem("stage-v-fixed")
    c = prob.add_var("c", ub=opts.margin_cap)
    c_p = prob.add_var("c_p", ub=opts.margin_cap)
    c_s = prob.add_var("c_s", ub=opts.margin_cap)
    Ps = [
        prob.add_matrix(f"P{i}", pk, pk, lb=-opts.entry_box, ub=opts.entry_box)
        for i in range(L)
    ]
    if p:
        H = prob.add_matrix("H", p, pk, lb=-opts.entry_box, ub=opts.entry_box)
        prob.add_eq(env.C - lin_matmul(H, K), "output")
        for entry in H.reshape(-1):
            prob.add_ge(entry - c_p)
        qH = lin_matmul(q.reshape(1, p), H)
    else:
        H = None
        qH = np.zeros((1, pk))
    for i, A in enumerate(env.vertices):
        prob.add_eq(lin_matmul(K, A) - lin_matmul(Ps[i], K), f"embed{i}")
        for a in range(pk):
            for b in range(pk):
                if a != b:
                    prob.add_ge(Ps[i][a, b] - c_p)
        decay = -lin_matmul(v_row, Ps[i]) - qH
        for j in range(pk):
            prob.add_ge(decay[0, j] - c_s)
    prob.add_ge(c_p - c)
    prob.add_ge(c_s - eps1 - c)
    prob.maximize(c)
    sol = prob.solve()
    if sol.status is not LpStatus.OPTIMAL:
        raise NumericalFailure(f"scaled feasibility LP returned {sol.status.value}")
    P_vals = [sol.value(P) for P in Ps]
    H_val = sol.value(H) if H is not None else np.zeros((0, pk))
    return float(sol.objective), P_vals, H_val


def _update_v_out(P_list, H, G, r, q, eps1, pk, cap):
    """Fix (P_i, H); maximize the worst decay slack over admissible v."""
    prob = LpProblem("stage-update-v")
    v = prob.add_vector("v", pk, lb=eps1)
    s = prob.add_var("s", ub=cap)
    prob.add_eq(sum(v) - float(pk), "normalization")
    v_row = v.reshape(1, pk)
    qH = q @ H if H.shape[0] else np.zeros(pk)
    for P in P_list:
        decay = -lin_matmul(v_row, P) - qH.reshape(1, pk)
        for j in range(pk):
            prob.add_ge(decay[0, j] - s)
    if r is not None and G.shape[1]:
        rv = r.reshape(1, -1) - lin_matmul(v_row, G)
        for jj in range(rv.shape[1]):
            prob.add_ge(rv[0, jj])
    prob.maximize(s)
    sol = prob.solve()
    if sol.status is not LpStatus.OPTIMAL:
        return None
    return sol.value(v)


def _rate_lp_out(K, env, v, q, opts):
    """Fix v; re-free (P_i, H) at validity thresholds and maximize the rate."""
    pk = K.shape[0]
    p = env.p
    v_row = v.reshape(1, pk)
    prob = LpProblem("stage-rate")
    lam = prob.add_var("rate", ub=opts.rate_cap)
    Ps = [
        prob.add_matrix(f"P{i}", pk, pk, lb=-opts.entry_box, ub=opts.entry_box)
        for i in range(env.num_vertices)
    ]
    if p:
        H = prob.add_matrix("H", p, pk, lb=-opts.entry_box, ub=opts.entry_box)
        prob.add_eq(env.C - lin_matmul(H, K), "output")
        for entry in H.reshape(-1):
            prob.add_ge(entry)
        qH = lin_matmul(q.reshape(1, p), H)
    else:
        H = None
        qH = np.zeros((1, pk))
    for i, A in enumerate(env.vertices):
        prob.add_eq(lin_matmul(K, A) - lin_matmul(Ps[i], K), f"embed{i}")
        for a in range(pk):
            for b in range(pk):
                if a != b:
                    prob.add_ge(Ps[i][a, b])
        decay = -lin_matmul(v_row, Ps[i]) - qH
        for j in range(pk):
            prob.add_ge(decay[0, j] - lam * float(v[j]))
    prob.maximize(lam)
    sol = prob.solve()
    if sol.status is not LpStatus.OPTIMAL:
        raise NumericalFailure(f"rate LP returned {sol.status.value}")
    P_vals = [sol.value(P) for P in Ps]
    H_val = sol.value(H) if H is not None else np.zeros((0, pk))
    return float(sol.objective), P_vals, H_val


def decay_margins_out(P_list, G, H, v, rate, supply):
    """Slacks of the v-form decay and supply conditions."""
    q = supply.q if supply is not None else np.zeros(H.shape[0])
    qH = q @ H if H.shape[0] else np.zeros(P_list[0].shape[0])
    margins = {
        "v_positive": float(v.min()),
        "decay": min(
            float((-v @ P - qH - rate * v).min()) for P in P_list
        ),
    }
    if supply is not None and G.shape[1]:
        margins["supply_input"] = float((supply.r - v @ G).min())
    return margins


def _certify_scaled_out(env, cone, supply, opts, require_positive_rate=True):
    K = cone.K
    if env.n != cone.n:
        raise DimensionMismatch(
            f"envelope dimension {env.n} does not match cone dimension {cone.n}"
        )
    pk = K.shape[0]
    if supply is not None:
        r = _as_vector(supply.r, "r", size=env.m)
        q = _as_vector(supply.q, "q", size=env.p)
        if q.size and q.min() < 0:
            raise ValueError("supply weight q must be nonnegative")
    else:
        r = None
        q = np.zeros(env.p)

    v = np.ones(pk) if opts.v0 is None else _as_vector(opts.v0, "v0", size=pk)
    if v.min() <= 0:
        raise ValueError("v0 must be strictly positive")

    G = K @ env.B
    g_margin = _entry_min(G)
    prev_c = None
    last = {"c": float("-inf")}
    rnd = 0
    for rnd in range(1, opts.rounds + 1):
        c_star, P_vals, H_val = _feasibility_stage_out(K, env, v, q, opts.eps1, opts)
        r_slack = (
            float((r - v @ G).min()) if (r is not None and G.shape[1]) else float("inf")
        )
        last = {"c": c_star, "r_slack": r_slack}
        feasible = (
            c_star >= -VERDICT_TOL
            and r_slack >= -VERDICT_TOL
            and g_margin >= -VERDICT_TOL
        )
        if feasible:
            rate, P_vals, H_val = _rate_lp_out(K, env, v, q, opts)
            emb = MonotoneEmbedding(K, tuple(P_vals), G, H_val)
            cert = DifferentialCertificate(emb, v, rate, supply)
            margins = embedding_margins(P_vals, G, H_val)
            margins.update(decay_margins_out(P_vals, G, H_val, v, rate, supply))
            residuals = embedding_residuals(
                K, env.vertices, P_vals, G, H_val, env.B, env.C
            )
            return CertificationResult(CERTIFIED, margins, residuals, cert, rnd)
        if g_margin < -VERDICT_TOL:
            break  # G = K B >= 0 fails; no choice of v can repair it
        if prev_c is not None and c_star - prev_c < opts.stall_tol:
            break
        prev_c = c_star
        v_new = _update_v_out(P_vals, H_val, G, r, q, opts.eps1, pk, opts.margin_cap)
        if v_new is None:
            break  # no admissible v satisfies the supply-input constraint
        v = v_new
    margins = {"feasibility": last["c"], "input_map": g_margin}
    if "r_slack" in last and last["r_slack"] != float("inf"):
        margins["supply_input"] = last["r_slack"]
    return CertificationResult(UNKNOWN, margins, {}, None, rnd)


def certify_incremental_stability(
    env: JacobianEnvelope, cone: PolyhedralCone, opts: AnalysisOptions | None = None
) -> CertificationResult:
    """Search for v > 0 with -v.P_i >= rate * v at every vertex (rate > 0).

    Success implies every pair of trajectories of any field with Jacobian
    in the envelope contracts exponentially in the weighted norm induced by
    (K, v).  Unknown is not a disproof; the condition is only sufficient.
    """
    return _certify_scaled_out(env, cone, None, opts or AnalysisOptions())


def certify_differential_dissipativity(
    env: JacobianEnvelope,
    cone: PolyhedralCone,
    supply: SupplyRate,
    opts: AnalysisOptions | None = None,
) -> CertificationResult:
    """Search for v > 0 with -v.P_i - q.H >= rate * v and r >= v.G."""
    if supply is None:
        raise ValueError("supply rate is required; use certify_incremental_stability")
    return _certify_scaled_out(env, cone, supply, opts or AnalysisOptions())


# -- in-degree (w) form ------------------------------------------------------


def _feasibility_stage_in(K, env, w, r, q, eps1, opts):
    """Fix w; maximize c with offd(P_i), H >= c_p, -P_i w - G q >= c_s,
    and r - H w >= c_r, all tied to c."""
    pk = K.shape[0]
    p = env.p
    w_col = w.reshape(pk, 1)
    Gq = (K @ env.B) @ q if env.m else np.zeros(pk)
    prob = LpProblem("stage-w-fixed")
    c = prob.add_var("c", ub=opts.margin_cap)
    c_p = prob.add_var("c_p", ub=opts.margin_cap)
    c_s = prob.add_var("c_s", ub=opts.margin_cap)
    Ps = [
        prob.add_matrix(f"P{i}", pk, pk, lb=-opts.entry_box, ub=opts.entry_box)
        for i in range(env.num_vertices)
    ]
    if p:
        H = prob.add_matrix("H", p, pk, lb=-opts.entry_box, ub=opts.entry_box)
        prob.add_eq(env.C - lin_matmul(H, K), "output")
        for entry in H.reshape(-1):
            prob.add_ge(entry - c_p)
        if r is not None:
            c_r = prob.add_var("c_r", ub=opts.margin_cap)
            slack = r.reshape(p, 1) - lin_matmul(H, w_col)
            for a in range(p):
                prob.add_ge(slack[a, 0] - c_r)
            prob.add_ge(c_r - c)
    for i, A in enumerate(env.vertices):
        prob.add_eq(lin_matmul(K, A) - lin_matmul(Ps[i], K), f"embed{i}")
        for a in range(pk):
            for b in range(pk):
                if a != b:
                    prob.add_ge(Ps[i][a, b] - c_p)
        decay = -lin_matmul(Ps[i], w_col)
        for j in range(pk):
            prob.add_ge(decay[j, 0] - float(Gq[j]) - c_s)
    prob.add_ge(c_p - c)
    prob.add_ge(c_s - eps1 - c)
    prob.maximize(c)
    sol = prob.solve()
    if sol.status is not LpStatus.OPTIMAL:
        raise NumericalFailure(f"in-degree feasibility LP returned {sol.status.value}")
    P_vals = [sol.value(P) for P in Ps]
    H_val = sol.value(H) if p else np.zeros((0, pk))
    return float(sol.objective), P_vals, H_val


def _update_w_in(P_list, H, Gq, r, eps1, pk, cap):
    """Fix (P_i, H); maximize the worst slack over admissible w."""
    prob = LpProblem("stage-update-w")
    w = prob.add_vector("w", pk, lb=eps1)
    s = prob.add_var("s", ub=cap)
    prob.add_eq(sum(w) - float(pk), "normalization")
    w_col = w.reshape(pk, 1)
    for P in P_list:
        decay = -lin_matmul(P, w_col)
        for j in range(pk):
            prob.add_ge(decay[j, 0] - float(Gq[j]) - s)
    if r is not None and H.shape[0]:
        slack = r.reshape(-1, 1) - lin_matmul(H, w_col)
        for a in range(slack.shape[0]):
            prob.add_ge(slack[a, 0] - s)
    prob.maximize(s)
    sol = prob.solve()
    if sol.status is not LpStatus.OPTIMAL:
        return None
    return sol.value(w)


def _rate_lp_in(K, env, w, r, q, opts):
    """Fix w; re-free (P_i, H) at validity thresholds and maximize the rate."""
    pk = K.shape[0]
    p = env.p
    w_col = w.reshape(pk, 1)
    Gq = (K @ env.B) @ q if env.m else np.zeros(pk)
    prob = LpProblem("stage-rate-w")
    lam = prob.add_var("rate", ub=opts.rate_cap)
    Ps = [
        prob.add_matrix(f"P{i}", pk, pk, lb=-opts.entry_box, ub=opts.entry_box)
        for i in range(env.num_vertices)
    ]
    if p:
        H = prob.add_matrix("H", p, pk, lb=-opts.entry_box, ub=opts.entry_box)
        prob.add_eq(env.C - lin_matmul(H, K), "output")
        for entry in H.reshape(-1):
            prob.add_ge(entry)
        if r is not None:
            slack = r.reshape(p, 1) - lin_matmul(H, w_col)
            for a in range(p):
                prob.add_ge(slack[a, 0])
    for i, A in enumerate(env.vertices):
        prob.add_eq(lin_matmul(K, A) - lin_matmul(Ps[i], K), f"embed{i}")
        for a in range(pk):
            for b in range(pk):
                if a != b:
                    prob.add_ge(Ps[i][a, b])
        decay = -lin_matmul(Ps[i], w_col)
        for j in range(pk):
            prob.add_ge(decay[j, 0] - float(Gq[j]) - lam * float(w[j]))
    prob.maximize(lam)
    sol = prob.solve()
    if sol.status is not LpStatus.OPTIMAL:
        raise NumericalFailure(f"in-degree rate LP returned {sol.status.value}")
    P_vals = [sol.value(P) for P in Ps]
    H_val = sol.value(H) if p else np.zeros((0, pk))
    return float(sol.objective), P_vals, H_val


def decay_margins_in(P_list, G, H, w, rate, supply):
    """Slacks of the w-form decay and supply conditions."""
    q = supply.q if supply is not None else np.zeros(G.shape[1])
    Gq = G @ q if G.shape[1] else np.zeros(P_list[0].shape[0])
    margins = {
        "w_positive": float(w.min()),
        "decay": min(float((-P @ w - Gq - rate * w).min()) for P in P_list),
    }
    if supply is not None and H.shape[0]:
        margins["supply_output"] = float((supply.r - H @ w).min())
    return margins


def certify_indegree(
    env: JacobianEnvelope,
    cone: PolyhedralCone,
    supply: SupplyRate,
    opts: AnalysisOptions | None = None,
) -> CertificationResult:
    """Column-form dissipativity: w > 0 with -P_i w - G q >= rate * w.

    The supply roles flip relative to the v-form: r (output-sized) bounds
    H w and q (input-sized) weighs G.  Success bounds trajectory deviations
    in the max norm weighted by 1/w on the embedded coordinates.
    """
    opts = opts or AnalysisOptions()
    K = cone.K
    if env.n != cone.n:
        raise DimensionMismatch(
            f"envelope dimension {env.n} does not match cone dimension {cone.n}"
        )
    pk = K.shape[0]
    if supply is None:
        raise ValueError("supply rate is required")
    r = _as_vector(supply.r, "r", size=env.p) if env.p else None
    q = _as_vector(supply.q, "q", size=env.m)
    if q.size and q.min() < 0:
        raise ValueError("supply weight q must be nonnegative")

    w = np.ones(pk) if opts.v0 is None else _as_vector(opts.v0, "v0", size=pk)
    if w.min() <= 0:
        raise ValueError("initial w must be strictly positive")

    G = K @ env.B
    g_margin = _entry_min(G)
    Gq = G @ q if env.m else np.zeros(pk)
    prev_c = None
    last_c = float("-inf")
    rnd = 0
    for rnd in range(1, opts.rounds + 1):
        c_star, P_vals, H_val = _feasibility_stage_in(K, env, w, r, q, opts.eps1, opts)
        last_c = c_star
        if c_star >= -VERDICT_TOL and g_margin >= -VERDICT_TOL:
            rate, P_vals, H_val = _rate_lp_in(K, env, w, r, q, opts)
            emb = MonotoneEmbedding(K, tuple(P_vals), G, H_val)
            cert = InDegreeCertificate(emb, w, rate, supply)
            margins = embedding_margins(P_vals, G, H_val)
            margins.update(decay_margins_in(P_vals, G, H_val, w, rate, supply))
            residuals = embedding_residuals(
                K, env.vertices, P_vals, G, H_val, env.B, env.C
            )
            return CertificationResult(CERTIFIED, margins, residuals, cert, rnd)
        if g_margin < -VERDICT_TOL:
            break
        if prev_c is not None and c_star - prev_c < opts.stall_tol:
            break
        prev_c = c_star
        w_new = _update_w_in(P_vals, H_val, Gq, r, opts.eps1, pk, opts.margin_cap)
        if w_new is None:
            break
        w = w_new
    margins = {"feasibility": last_c, "input_map": g_margin}
    return CertificationResult(UNKNOWN, margins, {}, None, rnd)


# ---------------------------------------------------------------------------
# network interconnection checks
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NetworkCheck:
    verdict: str
    rate: float | None
    margins: dict

    @property
    def ok(self):
        return self.verdict == CERTIFIED


class InterconnectionBounds:
    """Entrywise bounds on the coupling Jacobian blocks dU_i/dy_j.

    Block (i, j) has shape (m_i, p_j).  For networks with scalar ports the
    bounds may be given as dense N x N matrices, which the checks exploit.
    """

    def __init__(self, lower, upper=None, scalar=False):
        if scalar:
            self._scalar_lower = _as_matrix(lower, "lower")
            self._scalar_upper = (
                self._scalar_lower if upper is None else _as_matrix(upper, "upper")
            )
            if self._scalar_lower.shape != self._scalar_upper.shape:
                raise DimensionMismatch("bound matrices differ in shape")
            if self._scalar_lower.shape[0] != self._scalar_lower.shape[1]:
                raise DimensionMismatch("scalar-port bounds must be square")
            if np.any(self._scalar_lower > self._scalar_upper):
                raise ValueError("lower bound exceeds upper bound")
            self._blocks_lower = None
            self._blocks_upper = None
            self._n = self._scalar_lower.shape[0]
            return
        self._scalar_lower = None
        self._scalar_upper = None
        low = [[_as_matrix(b, f"lower[{i}][{j}]") for j, b in enumerate(row)]
               for i, row in enumerate(lower)]
        if upper is None:
            up = low
        else:
            up = [[_as_matrix(b, f"upper[{i}][{j}]") for j, b in enumerate(row)]
                  for i, row in enumerate(upper)]
        n = len(low)
        if any(len(row) != n for row in low) or len(up) != n or any(
            len(row) != n for row in up
        ):
            raise DimensionMismatch("bounds must form an N x N grid of blocks")
        for i in range(n):
            for j in range(n):
                if low[i][j].shape != up[i][j].shape:
                    raise DimensionMismatch(f"bound block ({i},{j}) shapes differ")
                if np.any(low[i][j] > up[i][j]):
                    raise ValueError(f"lower bound exceeds upper bound in block ({i},{j})")
        self._blocks_lower = low
        self._blocks_upper = up
        self._n = n

    @classmethod
    def from_weight_matrix(cls, W):
        """Tight bounds of a constant scalar-port coupling u = W y."""
        return cls(W, None, scalar=True)

    @classmethod
    def from_scalar_ranges(cls, lower, upper):
        """Scalar-port coupling with entrywise Jacobian ranges."""
        return cls(lower, upper, scalar=True)

    @classmethod
    def from_blocks(cls, lower, upper=None):
        return cls(lower, upper, scalar=False)

    @property
    def size(self):
        return self._n

    @property
    def is_scalar(self):
        return self._scalar_lower is not None

    def lower_block(self, i, j):
        if self.is_scalar:
            return self._scalar_lower[i : i + 1, j : j + 1]
        return self._blocks_lower[i][j]

    def upper_block(self, i, j):
        if self.is_scalar:
            return self._scalar_upper[i : i + 1, j : j + 1]
        return self._blocks_upper[i][j]


def _network_supplies(certs, tol):
    rs, qs = [], []
    for idx, cert in enumerate(certs):
        if cert.supply is None:
            raise ModeViolation(f"subsystem {idx} certificate carries no supply rate")
        rs.append(np.asarray(cert.supply.r, dtype=float))
        qs.append(np.asarray(cert.supply.q, dtype=float))
        if rs[-1].size and rs[-1].min() < -tol:
            raise ModeViolation(
                f"subsystem {idx} has a negative supply weight r; worst-corner "
                "evaluation of the balance condition is invalid"
            )
    return rs, qs


def _check_mode(mode):
    if mode not in ("standard", "alternate"):
        raise ValueError(f"unknown network check mode {mode!r}")


def check_network_outdegree(certs, bounds, mode="standard", tol=VERDICT_TOL):
    """Interconnection test in the v-form: supplies against column blocks.

    Standard mode checks every coupling block is entrywise nonnegative at
    its lower corner and the balance q_i >= sum_j r_j . dU_j/dy_i at the
    upper corner.  Alternate mode absorbs the block-diagonal coupling into
    the vertex matrices; it requires each certificate to satisfy
    r_i = G_i^T v_i and nonnegative cross products G_i W_ij H_j.
    The network rate is the minimum subsystem rate.
    """
    _check_mode(mode)
    n = len(certs)
    if bounds.size != n:
        raise DimensionMismatch(
            f"bounds describe {bounds.size} subsystems, got {n} certificates"
        )
    rs, qs = _network_supplies(certs, tol)
    margins = {}

    if mode == "standard":
        if bounds.is_scalar:
            margins["coupling_nonneg"] = float(bounds._scalar_lower.min())
        else:
            margins["coupling_nonneg"] = min(
                _entry_min(bounds.lower_block(i, j))
                for i in range(n)
                for j in range(n)
            )
    else:
        worst_self = float("inf")
        worst_cross = float("inf")
        for i, cert in enumerate(certs):
            emb = cert.embedding
            v = cert.v
            mismatch = (
                float(np.abs(rs[i] - emb.G.T @ v).max()) if emb.G.size else 0.0
            )
            if mismatch > 1e-8:
                raise ModeViolation(
                    f"subsystem {i}: alternate mode needs r = G^T v "
                    f"(mismatch {mismatch:.2e})"
                )
            absorbed = emb.G @ bounds.lower_block(i, i) @ emb.H
            for P in emb.P:
                worst_self = min(worst_self, _offd_min(P + absorbed))
            for j in range(n):
                if j != i:
                    cross = emb.G @ bounds.lower_block(i, j) @ certs[j].embedding.H
                    worst_cross = min(worst_cross, _entry_min(cross))
        margins["self_coupling_offd"] = worst_self
        if n > 1:
            margins["cross_coupling"] = worst_cross

    if bounds.is_scalar and all(r.size == 1 for r in rs) and all(
        q.size == 1 for q in qs
    ):
        r_vec = np.array([float(r[0]) for r in rs])
        q_vec = np.array([float(q[0]) for q in qs])
        balance = q_vec - bounds._scalar_upper.T @ r_vec
        margins["supply_balance"] = float(balance.min())
    else:
        worst = float("inf")
        for i in range(n):
            acc = qs[i].copy()
            for j in range(n):
                acc -= bounds.upper_block(j, i).T @ rs[j]
            worst = min(worst, _entry_min(acc))
        margins["supply_balance"] = worst

    rate = min(float(c.rate) for c in certs)
    verdict = CERTIFIED if min(margins.values()) >= -tol else UNKNOWN
    return NetworkCheck(verdict, rate if verdict == CERTIFIED else None, margins)


def check_network_indegree(certs, bounds, mode="standard", tol=VERDICT_TOL):
    """Interconnection test in the w-form: supplies against row blocks.

    Standard mode checks nonnegative coupling blocks and the balance
    q_i >= sum_j dU_i/dy_j . r_j at the upper corner.  Alternate mode is as
    in the out-degree check but requires r_i = H_i w_i.
    """
    _check_mode(mode)
    n = len(certs)
    if bounds.size != n:
        raise DimensionMismatch(
            f"bounds describe {bounds.size} subsystems, got {n} certificates"
        )
    rs, qs = _network_supplies(certs, tol)
    margins = {}

    if mode == "standard":
        if bounds.is_scalar:
            margins["coupling_nonneg"] = float(bounds._scalar_lower.min())
        else:
            margins["coupling_nonneg"] = min(
                _entry_min(bounds.lower_block(i, j))
                for i in range(n)
                for j in range(n)
            )
    else:
        worst_self = float("inf")
        worst_cross = float("inf")
        for i, cert in enumerate(certs):
            emb = cert.embedding
            w = cert.w
            mismatch = (
                float(np.abs(rs[i] - emb.H @ w).max()) if emb.H.size else 0.0
            )
            if mismatch > 1e-8:
                raise ModeViolation(
                    f"subsystem {i}: alternate mode needs r = H w "
                    f"(mismatch {mismatch:.2e})"
                )
            absorbed = emb.G @ bounds.lower_block(i, i) @ emb.H
            for P in emb.P:
                worst_self = min(worst_self, _offd_min(P + absorbed))
            for j in range(n):
                if j != i:
                    cross = emb.G @ bounds.lower_block(i, j) @ certs[j].embedding.H
                    worst_cross = min(worst_cross, _entry_min(cross))
        margins["self_coupling_offd"] = worst_self
        if n > 1:
            margins["cross_coupling"] = worst_cross

    if bounds.is_scalar and all(r.size == 1 for r in rs) and all(
        q.size == 1 for q in qs
    ):
        r_vec = np.array([float(r[0]) for r in rs])
        q_vec = np.array([float(q[0]) for q in qs])
        balance = q_vec - bounds._scalar_upper @ r_vec
        margins["supply_balance"] = float(balance.min())
    else:
        worst = float("inf")
        for i in range(n):
            acc = qs[i].copy()
            for j in range(n):
                acc -= bounds.upper_block(i, j) @ rs[j]
            worst = min(worst, _entry_min(acc))
        margins["supply_balance"] = worst

    rate = min(float(c.rate) for c in certs)
    verdict = CERTIFIED if min(margins.values()) >= -tol else UNKNOWN
    return NetworkCheck(verdict, rate if verdict == CERTIFIED else None, margins)
