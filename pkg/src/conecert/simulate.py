"""Fixed-step simulation and empirical validation of emitted certificates.

Classical fourth-order Runge-Kutta integration of the benchmark vector
fields (single mass-spring, its linearization, and the N-subsystem network
aggregate), plus the spot checks a certificate is supposed to survive:
forward invariance of the cone along difference trajectories, pointwise
decay of the weighted Lyapunov function V = v.K(x - x'), and a fitted
contraction rate for comparison against the certified one.  The repro
presets collect everything needed to regenerate the benchmark figures as
plain CSV tables.

All integration is deterministic: fixed step, no adaptivity, seeded
initial-condition sampling through numpy's PCG64 generator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .cones import PolyhedralCone, make_cone
from .errors import DegenerateFit, DimensionMismatch, NonFinite, UnknownExample
from .nonlinear import (
    AnalysisOptions,
    InterconnectionBounds,
    JacobianEnvelope,
    SupplyRate,
    certify_differential_dissipativity,
    check_network_outdegree,
    mass_spring_envelope,
)

DEFAULT_DT = 1e-3
SUBSYSTEM_HORIZON = 10.0
NETWORK_HORIZON = 30.0

# Spring benchmark constants: the eq-style cone rows and the stabilizing
# gains used throughout the worked examples.
BENCH_K = np.array([[1.0, 0.0], [2.0, 1.0]])
BENCH_GAINS = (-6.0, -6.0)

REPRO_IDS = ("ms-linear", "ms-nonlinear", "network100", "output-feedback")


def default_spring(x1):
    """Benchmark spring law k(x1) = (sin(x1) - x1) / 2."""
    return 0.5 * (np.sin(x1) - x1)


# ---------------------------------------------------------------------------
# vector fields
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class VectorField:
    """Autonomous rule dx = rhs(x) plus an optional affine input channel.

    ``rhs`` maps a state vector to its derivative; inputs enter as B u with
    a constant matrix.  ``C`` exposes outputs y = C x for trajectory
    post-processing.  ``tag`` is a short human label used in CSV headers.
    """

    n: int
    rhs: object
    B: np.ndarray | None = None
    C: np.ndarray | None = None
    tag: str = "field"

    def __post_init__(self):
        if self.B is not None:
            B = np.asarray(self.B, dtype=float)
            if B.shape[0] != self.n:
                raise DimensionMismatch(f"B has {B.shape[0]} rows, state is {self.n}")
            object.__setattr__(self, "B", B)
        if self.C is not None:
            C = np.asarray(self.C, dtype=float)
            if C.shape[1] != self.n:
                raise DimensionMismatch(f"C has {C.shape[1]} cols, state is {self.n}")
            object.__setattr__(self, "C", C)

    @property
    def m(self):
        return 0 if self.B is None else self.B.shape[1]

    def derivative(self, x, u=None):
        dx = np.asarray(self.rhs(x), dtype=float)
        if u is not None:
            if self.B is None:
                raise DimensionMismatch("field has no input channel")
            dx = dx + self.B @ u
        return dx


def linear_field(A, B=None, C=None, tag="linear"):
    """Vector field of dx = A x (+ B u)."""
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionMismatch(f"A must be square, got {A.shape}")
    return VectorField(n=A.shape[0], rhs=lambda x: A @ x, B=B, C=C, tag=tag)


@dataclass(frozen=True)
class MassSpringModel:
    """One-mass spring benchmark: x1' = x2, x2' = -k(x1) + F1 x1 + F2 x2 + u.

    ``spring`` is the scalar spring law k; its slope must stay inside
    [slope_lo, slope_hi], which is what the certificates assume.  The
    constructor samples the slope over a coarse grid as a sanity check.
    """

    slope_lo: float = -1.0
    slope_hi: float = 1.0
    gains: tuple = BENCH_GAINS
    spring: object = default_spring

    def __post_init__(self):
        if self.slope_hi < self.slope_lo:
            raise ValueError("slope_hi must be at least slope_lo")
        grid = np.linspace(-10.0, 10.0, 401)
        h = 1e-5
        slopes = (self._k(grid + h) - self._k(grid - h)) / (2.0 * h)
        if slopes.min() < self.slope_lo - 1e-6 or slopes.max() > self.slope_hi + 1e-6:
            raise ValueError(
                "spring slope leaves the declared bounds on the test grid: "
                f"[{slopes.min():.6f}, {slopes.max():.6f}] vs "
                f"[{self.slope_lo}, {self.slope_hi}]"
            )

    def _k(self, x1):
        return np.asarray(self.spring(x1), dtype=float)

    def envelope(self):
        return mass_spring_envelope(self.slope_lo, self.slope_hi, gains=self.gains)

    def field(self, tag="mass-spring"):
        f1, f2 = self.gains

        def rhs(x):
            return np.array([x[1], -float(self._k(x[0])) + f1 * x[0] + f2 * x[1]])

        return VectorField(
            n=2, rhs=rhs, B=np.array([[0.0], [1.0]]), C=np.array([[1.0, 0.0]]), tag=tag
        )


def mass_spring_field(slope=None, gains=BENCH_GAINS, tag="mass-spring"):
    """Closed-loop benchmark spring field; ``slope=None`` selects the
    built-in nonlinear law, a float selects the linear spring k(x1) = k x1."""
    if slope is None:
        model = MassSpringModel(gains=gains)
    else:
        k = float(slope)
        model = MassSpringModel(
            slope_lo=k, slope_hi=k, gains=gains, spring=lambda x1: k * np.asarray(x1)
        )
    return model.field(tag=tag)


@dataclass(frozen=True)
class NetworkModel:
    """N spring subsystems coupled through constant weights u_i = sum W_ij y_j.

    Each subsystem i uses the spring law k_i(x1) = a_i (sin(x1) - x1) with
    0 <= a_i <= 1/2 and the shared stabilizing gains; weights obey
    0 <= W_ij <= 1/N so the out-degree balance with q = 1 holds.  The state
    is interleaved: (x_{1,1}, x_{1,2}, x_{2,1}, x_{2,2}, ...).
    """

    a: np.ndarray
    W: np.ndarray
    gains: tuple = BENCH_GAINS
    seed: int | None = None

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float)
        W = np.asarray(self.W, dtype=float)
        if a.ndim != 1:
            raise DimensionMismatch("a must be a vector of subsystem coefficients")
        n = a.size
        if W.shape != (n, n):
            raise DimensionMismatch(f"W must be {n}x{n}, got {W.shape}")
        if a.min() < 0.0 or a.max() > 0.5:
            raise ValueError("subsystem coefficients must lie in [0, 1/2]")
        if W.min() < 0.0 or W.max() > 1.0 / n + 1e-12:
            raise ValueError("weights must lie in [0, 1/N]")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "W", W)

    @property
    def size(self):
        return self.a.size

    def field(self, tag="network"):
        n = self.size
        f1, f2 = self.gains
        a = self.a
        W = self.W

        def rhs(x):
            pos = x[0::2]
            vel = x[1::2]
            acc = -a * (np.sin(pos) - pos) + f1 * pos + f2 * vel + W @ pos
            out = np.empty_like(x)
            out[0::2] = vel
            out[1::2] = acc
            return out

        idx = np.arange(n)
        B = np.zeros((2 * n, n))
        B[2 * idx + 1, idx] = 1.0
        C = np.zeros((n, 2 * n))
        C[idx, 2 * idx] = 1.0
        return VectorField(n=2 * n, rhs=rhs, B=B, C=C, tag=tag)

    def subsystem_certificates(self, tol=None):
        """One shared certificate per subsystem.

        Every a_i <= 1/2 keeps the individual slope inside [-1, 0], so the
        benchmark certificate for the full range [-1, 1] covers all of them;
        certify once and replicate.
        """
        res = benchmark_certificate()
        return [res.certificate] * self.size

    def bounds(self):
        return InterconnectionBounds.from_weight_matrix(self.W)


def make_random_network(N, seed):
    """Seeded random network: a_i ~ U[0, 1/2], W_ij ~ U[0, 1/N].

    Returns the model together with its tight interconnection bounds
    (the coupling is linear, so the Jacobian is exactly W).  Draw order is
    fixed: coefficients first, then the weight matrix row-major.
    """
    if N < 1:
        raise ValueError("N must be at least 1")
    rng = np.random.Generator(np.random.PCG64(seed))
    a = rng.uniform(0.0, 0.5, size=N)
    W = rng.uniform(0.0, 1.0 / N, size=(N, N))
    model = NetworkModel(a=a, W=W, seed=seed)
    return model, model.bounds()


def benchmark_certificate():
    """Differential dissipativity certificate of the closed-loop spring.

    Slope range [-1, 1], gains (-6, -6), supply r = q = 1, scaling seeded
    at v = (3, 1); the certified rate is the vertex bound 2/3.
    """
    env = mass_spring_envelope(gains=BENCH_GAINS)
    cone = make_cone(BENCH_K)
    supply = SupplyRate.scalar(r=1.0, q=1.0)
    opts = AnalysisOptions(v0=np.array([3.0, 1.0]))
    return certify_differential_dissipativity(env, cone, supply, opts)


# ---------------------------------------------------------------------------
# integration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Trajectory:
    """Samples of one integration run on a uniform time grid."""

    t: np.ndarray = field(repr=False)
    x: np.ndarray = field(repr=False)
    y: np.ndarray | None = field(repr=False, default=None)

    @property
    def dt(self):
        return float(self.t[1] - self.t[0]) if self.t.size > 1 else 0.0

    def final(self):
        return self.x[-1]


def _input_signal(u, m):
    """Normalize an input spec to a callable t -> vector (or None)."""
    if u is None:
        return None
    if callable(u):
        def call(t):
            val = np.asarray(u(t), dtype=float)
            return val.reshape(m) if val.ndim else np.full(m, float(val))
        return call
    const = np.asarray(u, dtype=float)
    vec = const.reshape(m) if const.ndim else np.full(m, float(const))
    return lambda t: vec


def integrate(fld: VectorField, x0, u=None, t_end=SUBSYSTEM_HORIZON, dt=DEFAULT_DT):
    """Classical RK4 with a fixed step.

    ``u`` may be None, a constant vector/scalar, or a callable u(t).  The
    returned grid has round(t_end / dt) + 1 samples.  Raises NonFinite the
    moment a state sample overflows.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    x = np.asarray(x0, dtype=float).copy()
    if x.shape != (fld.n,):
        raise DimensionMismatch(f"x0 has shape {x.shape}, field needs ({fld.n},)")
    steps = int(round(t_end / dt))
    signal = _input_signal(u, fld.m)
    if signal is None:
        def deriv(t, state):
            return fld.derivative(state)
    else:
        def deriv(t, state):
            return fld.derivative(state, signal(t))
    samples = np.empty((steps + 1, fld.n))
    samples[0] = x
    half = 0.5 * dt
    for i in range(steps):
        t = i * dt
        k1 = deriv(t, x)
        k2 = deriv(t + half, x + half * k1)
        k3 = deriv(t + half, x + half * k2)
        k4 = deriv(t + dt, x + dt * k3)
        x = x + (dt / 6.0) * (k1 + 2.0 * (k2 + k3) + k4)
        if not np.all(np.isfinite(x)):
            raise NonFinite(f"trajectory left finite range at t = {(i + 1) * dt:.6g}")
        samples[i + 1] = x
    grid = dt * np.arange(steps + 1)
    outputs = samples @ fld.C.T if fld.C is not None else None
    return Trajectory(t=grid, x=samples, y=outputs)


# ---------------------------------------------------------------------------
# certificate spot checks
# ---------------------------------------------------------------------------


def _as_pair(item, n):
    """A sample is either a state pair or a single state (paired with 0)."""
    arr = np.asarray(item, dtype=float)
    if arr.ndim == 1:
        if arr.size != n:
            raise DimensionMismatch(f"sample has size {arr.size}, field needs {n}")
        return arr, np.zeros(n)
    if arr.shape == (2, n):
        return arr[0], arr[1]
    raise DimensionMismatch(f"sample must be one state or a pair, got shape {arr.shape}")


def check_cone_invariance(
    fld: VectorField, cone: PolyhedralCone, samples, horizon=SUBSYSTEM_HORIZON,
    dt=DEFAULT_DT, u=None, tol=1e-9,
):
    """Worst embedded margin min over t and rows of K (x(t) - x'(t)).

    Each sample is a pair (x0, x0') ordered in the cone, or a single state
    (compared against the origin, which closed linear systems fix).  Both
    members integrate under the same input.  A certified system must report
    a margin above -tolerance * scale; an uncertified one may go negative.
    """
    K = cone.K
    worst = math.inf
    for item in samples:
        x0, x0p = _as_pair(item, fld.n)
        z0 = K @ (x0 - x0p)
        if z0.min() < -tol:
            raise ValueError(
                f"sample difference is outside the cone (min K delta = {z0.min():.3e})"
            )
        first = integrate(fld, x0, u=u, t_end=horizon, dt=dt)
        second = integrate(fld, x0p, u=u, t_end=horizon, dt=dt)
        z = (first.x - second.x) @ K.T
        worst = min(worst, float(z.min()))
    return worst


def check_lyapunov_decay(
    fld: VectorField, cone: PolyhedralCone, v, rate, pairs,
    horizon=SUBSYSTEM_HORIZON, dt=DEFAULT_DT, u=None,
):
    """Worst one-step ratio V(t + dt) / (exp(-rate dt) V(t)).

    V is the weighted embedding v . K (x - x'); the differential certificate
    promises dV/dt <= -rate V, so every one-step ratio along any ordered
    pair should stay at or below 1 up to integration error.  Ratios are only
    formed while V is at least 1e-10 of its initial value; far below that
    the quantity is float noise, not dynamics.
    """
    K = cone.K
    v = np.asarray(v, dtype=float)
    if v.shape != (K.shape[0],):
        raise DimensionMismatch(f"v has shape {v.shape}, cone has {K.shape[0]} rows")
    gain = math.exp(rate * dt)
    worst = 0.0
    for item in pairs:
        x0, x0p = _as_pair(item, fld.n)
        first = integrate(fld, x0, u=u, t_end=horizon, dt=dt)
        second = integrate(fld, x0p, u=u, t_end=horizon, dt=dt)
        V = (first.x - second.x) @ (K.T @ v)
        if V[0] <= 0.0:
            continue
        floor = 1e-10 * V[0]
        valid = V[:-1] > floor
        if not np.any(valid):
            continue
        ratios = V[1:][valid] * gain / V[:-1][valid]
        worst = max(worst, float(ratios.max()))
    return worst


def estimate_contraction(
    fld: VectorField, x0, x0p, horizon=SUBSYSTEM_HORIZON, dt=DEFAULT_DT, u=None
):
    """Fitted decay rate of |x(t) - x'(t)|_1 over the tail half of the run.

    Log-linear least squares; the sign convention makes a contracting pair
    return a positive rate.  Raises DegenerateFit when the difference
    underflows before the fit window, which happens for very fast systems
    or very long horizons.
    """
    x0 = np.asarray(x0, dtype=float)
    x0p = np.asarray(x0p, dtype=float)
    if np.array_equal(x0, x0p):
        raise ValueError("initial states must differ")
    first = integrate(fld, x0, u=u, t_end=horizon, dt=dt)
    second = integrate(fld, x0p, u=u, t_end=horizon, dt=dt)
    gap = np.abs(first.x - second.x).sum(axis=1)
    tail = slice(gap.size // 2, None)
    span = gap[tail]
    if span.min() <= 1e-13 * max(1.0, float(gap[0])):
        raise DegenerateFit(
            "trajectory difference underflowed before the fit window"
        )
    slope = np.polyfit(first.t[tail], np.log(span), 1)[0]
    return -float(slope)


# ---------------------------------------------------------------------------
# reproduction bundles
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ReproBundle:
    """Everything a repro preset produces: named tables plus a certificate.

    ``tables`` maps a file stem to (column names, row array); ``meta`` keys
    are echoed into every CSV header so outputs are self-describing.
    """

    name: str
    tables: dict
    certificate: object | None
    meta: dict


def write_csv(path, columns, rows, meta=None):
    """Deterministic CSV emission: meta comment lines, header row, %.17g."""
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    if rows.shape[1] != len(columns):
        raise DimensionMismatch(
            f"{rows.shape[1]} columns of data against {len(columns)} names"
        )
    lines = [f"# {key}: {value}" for key, value in (meta or {}).items()]
    lines.append(",".join(columns))
    fmt = "%.17g"
    for row in rows:
        lines.append(",".join(fmt % val for val in row))
    with open(path, "w") as handle:
        handle.write("\n".join(lines) + "\n")
    return path


def write_bundle(bundle: ReproBundle, out_dir):
    """Write every table of a bundle under out_dir; returns written paths."""
    import os

    os.makedirs(out_dir, exist_ok=True)
    paths = []
    for stem, (columns, rows) in bundle.tables.items():
        path = os.path.join(out_dir, f"{bundle.name}_{stem}.csv")
        write_csv(path, columns, rows, meta=bundle.meta)
        paths.append(path)
    return paths


def _trajectory_table(traj: Trajectory, outputs_only=False, stride=1):
    data = traj.y if outputs_only else traj.x
    columns = ["t"] + [
        (f"y_{i + 1}" if outputs_only else f"x_{i + 1}") for i in range(data.shape[1])
    ]
    rows = np.column_stack([traj.t[::stride], data[::stride]])
    return columns, rows


def _repro_ms_linear(seed, dt, horizon):
    """Feasibility region of positivity + stability for the linear spring."""
    from .cones import make_cone as _mk
    from .linear import LinearSystem, certify_positivity

    cone = _mk(BENCH_K)
    k = 1.0
    grid = np.linspace(-10.0, 2.0, 41)
    rows = []
    for f1 in grid:
        for f2 in grid:
            system = LinearSystem(A=[[0.0, 1.0], [f1 - k, f2]])
            res = certify_positivity(system, cone)
            closed_form = -4.0 - k + f1 - 2.0 * f2
            rows.append(
                [f1, f2, closed_form, 1.0 if res.verdict == "Certified" else 0.0]
            )
    tables = {
        "feasibility": (["F1", "F2", "closed_form_margin", "certified"], np.array(rows))
    }
    meta = {"example": "ms-linear", "spring_slope": k}
    return ReproBundle("ms-linear", tables, None, meta)


def _repro_ms_nonlinear(seed, dt, horizon):
    """Phase-portrait data and certificate for the closed-loop spring."""
    result = benchmark_certificate()
    fld = mass_spring_field()
    span = np.linspace(-3.0, 3.0, 21)
    arrows = []
    for x1 in span:
        for x2 in span:
            dx = fld.derivative(np.array([x1, x2]))
            arrows.append([x1, x2, dx[0], dx[1]])
    rays = np.linalg.inv(BENCH_K)
    ray_rows = [[float(i + 1), rays[0, i], rays[1, i]] for i in range(2)]
    tables = {
        "phase": (["x1", "x2", "dx1", "dx2"], np.array(arrows)),
        "cone_rays": (["ray", "x1", "x2"], np.array(ray_rows)),
    }
    for idx, x0 in enumerate([(1.0, 0.0), (-2.0, 1.0), (0.5, -2.5)]):
        traj = integrate(fld, np.array(x0), t_end=horizon, dt=dt)
        columns, rows = _trajectory_table(traj, stride=10)
        tables[f"trajectory_{idx + 1}"] = (columns, rows)
    meta = {"example": "ms-nonlinear", "dt": dt, "horizon": horizon}
    return ReproBundle("ms-nonlinear", tables, result, meta)


def _repro_network100(seed, dt, horizon):
    """Decay under u = 0 and input tracking under u_i = 5 sin t."""
    model, bounds = make_random_network(100, seed)
    certs = model.subsystem_certificates()
    check = check_network_outdegree(certs, bounds)
    fld = model.field()
    rng = np.random.Generator(np.random.PCG64(seed + 1))
    n = model.size
    stride = 100

    def draw_state():
        x0 = np.empty(2 * n)
        x0[0::2] = rng.uniform(-1.0, 1.0, size=n)
        x0[1::2] = rng.uniform(-1.0, 1.0, size=n)
        return x0

    x_a, x_b = draw_state(), draw_state()
    free = integrate(fld, x_a, t_end=horizon, dt=dt)
    forced_a = integrate(fld, x_a, u=lambda t: np.full(n, 5.0 * math.sin(t)),
                         t_end=horizon, dt=dt)
    forced_b = integrate(fld, x_b, u=lambda t: np.full(n, 5.0 * math.sin(t)),
                         t_end=horizon, dt=dt)
    gap = np.abs(forced_a.y - forced_b.y).max(axis=1)
    tables = {
        "outputs_free": _trajectory_table(free, outputs_only=True, stride=stride),
        "outputs_forced_a": _trajectory_table(forced_a, outputs_only=True, stride=stride),
        "outputs_forced_b": _trajectory_table(forced_b, outputs_only=True, stride=stride),
        "forced_gap": (
            ["t", "sup_gap"],
            np.column_stack([forced_a.t[::stride], gap[::stride]]),
        ),
    }
    meta = {
        "example": "network100", "N": n, "prng": "PCG64", "seed": seed,
        "dt": dt, "horizon": horizon, "input": "0 and 5 sin(t)",
    }
    return ReproBundle("network100", tables, check, meta)


def _repro_output_feedback(seed, dt, horizon):
    """Rerun the order-one output-feedback synthesis and simulate the result."""
    from .codesign import (
        CodesignConfig, algorithm2, augment_output_feedback, split_output_feedback,
    )

    plant = mass_spring_envelope(gains=(0.0, 0.0))
    aug, gain = augment_output_feedback(plant, 1)
    kbar = initial_synthesis_cone()
    k0 = np.vstack([aug.C, kbar])
    fixed_h = np.zeros((1, 7))
    fixed_h[0, 0] = 1.0
    cfg = CodesignConfig(pinned_rows=(0,), fixed_h=fixed_h, eps2=0.1, max_iters=500)
    supply = SupplyRate.scalar(r=1.0, q=1.0)
    out = algorithm2(aug, k0, np.ones(7), supply, cfg, gain=gain)

    log_rows = [
        [h["iteration"], h["c"], h["c_p"], h["c_s"], h["step_k"], h["step_v"]]
        for h in out.state.history
    ]
    tables = {
        "iteration_log": (
            ["iteration", "c", "c_p", "c_s", "step_k", "step_v"], np.array(log_rows)
        ),
        "cone": (
            ["k1", "k2", "k3"], out.state.K.copy()
        ),
        "scaling": (["v"], out.state.v.reshape(-1, 1).copy()),
    }
    meta = {"example": "output-feedback", "verdict": out.verdict,
            "iterations": out.iterations, "dt": dt}
    if out.ok:
        a_c, b_c, c_c, d_c = split_output_feedback(out.state.theta, aug.m, aug.p)
        tables["controller"] = (
            ["A_c", "B_c", "C_c", "D_c"],
            np.array([[float(a_c), float(b_c), float(c_c), float(d_c)]]),
        )

        def rhs(x):
            y = x[0]
            u_plant = float(d_c) * y + float(c_c) * x[2]
            return np.array([
                x[1],
                -default_spring(x[0]) + u_plant,
                float(b_c) * y + float(a_c) * x[2],
            ])

        closed = VectorField(n=3, rhs=rhs, C=np.array([[1.0, 0.0, 0.0]]),
                             tag="output-feedback")
        traj = integrate(closed, np.array([1.0, 0.0, 0.0]), t_end=SUBSYSTEM_HORIZON,
                         dt=dt)
        tables["closed_loop"] = _trajectory_table(traj, stride=10)
    return ReproBundle("output-feedback", tables, out.certificate, meta)


def initial_synthesis_cone():
    """Evenly fanned initial rows for the order-one synthesis benchmark."""
    return np.array([
        [0.0, 0.707, 0.707],
        [0.0, -0.707, 0.707],
        [-0.416, 0.572, 0.707],
        [-0.416, -0.572, 0.707],
        [-0.672, 0.219, 0.707],
        [-0.672, -0.219, 0.707],
    ])


_REPRO_BUILDERS = {
    "ms-linear": _repro_ms_linear,
    "ms-nonlinear": _repro_ms_nonlinear,
    "network100": _repro_network100,
    "output-feedback": _repro_output_feedback,
}


def repro(example, seed=7, dt=DEFAULT_DT, horizon=None):
    """Build the reproduction bundle for one preset id."""
    if example not in _REPRO_BUILDERS:
        raise UnknownExample(
            f"unknown repro id {example!r}; choose from {', '.join(REPRO_IDS)}"
        )
    if horizon is None:
        horizon = NETWORK_HORIZON if example == "network100" else SUBSYSTEM_HORIZON
    return _REPRO_BUILDERS[example](seed, dt, horizon)
