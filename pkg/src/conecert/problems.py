"""Problem files and certificate documents.

A problem file is a single JSON object whose ``kind`` selects the analysis:
``linear``, ``envelope``, ``network``, ``codesign`` or ``simulate``.  All
matrices are dense, row-major nested lists.  Running a problem produces a
certificate document, another JSON object that embeds the original problem
together with the certificate data, so a later ``--check-only`` pass can
re-verify every inequality without re-solving anything.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .cones import make_cone
from .errors import NonFinite, ProblemFormatError
from .linear import LinearSystem, certify_dissipativity, certify_positivity, certify_stability
from .nonlinear import (
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
    decay_margins_in,
    decay_margins_out,
    embedding_margins,
    embedding_residuals,
    make_envelope,
)

DOCUMENT_FORMAT = "conecert-certificate"
DOCUMENT_VERSION = 1
RECHECK_TOL = 1e-8

KINDS = ("linear", "envelope", "network", "codesign", "simulate")

_PASS_VERDICTS = ("Certified", "Success")


@dataclass
class RunResult:
    """Outcome of running one problem: verdict, files, exit code."""

    verdict: str
    exit_code: int
    message: str
    document: dict | None = None
    tables: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# field access with diagnostics
# ---------------------------------------------------------------------------


def _need(data, key, path):
    if key not in data:
        raise ProblemFormatError(f"{path}: missing required field {key!r}")
    return data[key]


def _matrix(data, key, path, required=True):
    if key not in data or data[key] is None:
        if required:
            raise ProblemFormatError(f"{path}: missing required field {key!r}")
        return None
    try:
        arr = np.asarray(data[key], dtype=float)
    except (TypeError, ValueError) as exc:
        raise ProblemFormatError(f"{path}.{key}: not numeric ({exc})") from exc
    if arr.ndim != 2:
        raise ProblemFormatError(f"{path}.{key}: expected a matrix, got ndim {arr.ndim}")
    return arr

def _vector(data, key, path, required=True):
    if key not in data or data[key] is None:
        if required:
            raise ProblemFormatError(f"{path}: missing required field {key!r}")
        return None
    try:
        arr = np.asarray(data[key], dtype=float)
    except (TypeError, ValueError) as exc:
        raise ProblemFormatError(f"{path}.{key}: not numeric ({exc})") from exc
    if arr.ndim != 1:
        raise ProblemFormatError(f"{path}.{key}: expected a vector, got ndim {arr.ndim}")
    return arr


def _cone(data, path):
    spec = _need(data, "cone", path)
    if not isinstance(spec, dict):
        raise ProblemFormatError(f"{path}.cone: expected an object with a K matrix")
    K = _matrix(spec, "K", f"{path}.cone")
    try:
        return make_cone(K)
    except ValueError as exc:
        raise ProblemFormatError(f"{path}.cone.K: {exc}") from exc


def _supply(data, path, required):
    spec = data.get("supply")
    if spec is None:
        if required:
            raise ProblemFormatError(f"{path}: this check needs a supply rate")
        return None
    if not isinstance(spec, dict):
        raise ProblemFormatError(f"{path}.supply: expected an object with r and q")
    return SupplyRate(
        r=_vector(spec, "r", f"{path}.supply"), q=_vector(spec, "q", f"{path}.supply")
    )


def _options(data, path):
    spec = data.get("options", {})
    if not isinstance(spec, dict):
        raise ProblemFormatError(f"{path}.options: expected an object")
    known = {"eps1", "rounds", "stall_tol", "v0"}
    extra = set(spec) - known
    if extra:
        raise ProblemFormatError(f"{path}.options: unknown keys {sorted(extra)}")
    kwargs = {k: spec[k] for k in ("eps1", "rounds", "stall_tol") if k in spec}
    if "v0" in spec:
        kwargs["v0"] = _vector(spec, "v0", f"{path}.options")
    return AnalysisOptions(**kwargs)


def _jsonable(value):
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


def load_problem(path):
    """Parse and validate a problem file; raises ProblemFormatError."""
    with open(path) as handle:
        try:
            data = json.load(handle)
        except json.JSONDecodeError as exc:
            raise ProblemFormatError(
                f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: "
                f"{exc.msg}"
            ) from exc
    return validate_problem(data, origin=str(path))


def validate_problem(data, origin="problem"):
    if not isinstance(data, dict):
        raise ProblemFormatError(f"{origin}: top level must be an object")
    kind = data.get("kind")
    if kind not in KINDS:
        raise ProblemFormatError(
            f"{origin}.kind: expected one of {', '.join(KINDS)}, got {kind!r}"
        )
    return data


# ---------------------------------------------------------------------------
# certificate payloads
# ---------------------------------------------------------------------------


def _cert_payload(cert):
    """Serialize any of the certificate dataclasses into plain JSON."""
    if cert is None:
        return None
    if isinstance(cert, (DifferentialCertificate, InDegreeCertificate)):
        emb = cert.embedding
        payload = {
            "K": emb.K, "P": list(emb.P), "G": emb.G, "H": emb.H,
            "rate": cert.rate,
        }
        if isinstance(cert, InDegreeCertificate):
            payload["w"] = cert.w
        else:
            payload["v"] = cert.v
        if cert.supply is not None:
            payload["supply"] = {"r": cert.supply.r, "q": cert.supply.q}
        return _jsonable(payload)
    if isinstance(cert, MonotoneEmbedding):
        return _jsonable({"K": cert.K, "P": list(cert.P), "G": cert.G, "H": cert.H})
    # linear-module certificates: single P, optional v/rate/supply
    emb = getattr(cert, "embedding", cert)
    payload = {"K": emb.K, "P": [emb.P], "G": emb.G, "H": emb.H}
    if hasattr(cert, "v"):
        payload["v"] = cert.v
        payload["rate"] = cert.rate
    if getattr(cert, "supply", None) is not None:
        payload["supply"] = {"r": cert.supply.r, "q": cert.supply.q}
    return _jsonable(payload)


def _finite(entries):
    """Drop vacuous (infinite) entries; empty constraint families report inf."""
    return {k: v for k, v in entries.items() if np.isfinite(v)}


def _result_payload(result):
    payload = {
        "verdict": result.verdict,
        "margins": _jsonable(_finite(result.margins)),
        "residuals": _jsonable(_finite(result.residuals)),
        "rounds": result.rounds,
        "certificate": _cert_payload(result.certificate),
    }
    return payload


def make_document(kind, problem, result_payload, verdict):
    return {
        "format": DOCUMENT_FORMAT,
        "version": DOCUMENT_VERSION,
        "kind": kind,
        "verdict": verdict,
        "problem": _jsonable(problem),
        "result": result_payload,
    }


def write_document(doc, path):
    with open(path, "w") as handle:
        json.dump(doc, handle, indent=1)
        handle.write("\n")
    return path


# ---------------------------------------------------------------------------
# runners
# ---------------------------------------------------------------------------


def _fail_message(result):
    name, value = result.worst_margin()
    if name is None:
        return "no certificate found"
    return f"not certified: worst margin {name} = {value:.6e}"


def _run_linear(problem):
    path = "problem"
    system = LinearSystem(
        A=_matrix(problem, "A", path),
        B=_matrix(problem, "B", path, required=False),
        C=_matrix(problem, "C", path, required=False),
    )
    cone = _cone(problem, path)
    check = problem.get("check", "positivity")
    opts = _options(problem, path)
    if check == "positivity":
        result = certify_positivity(system, cone)
    elif check == "stability":
        result = certify_stability(system, cone, opts)
    elif check == "dissipativity":
        result = certify_dissipativity(system, cone, _supply(problem, path, True), opts)
    else:
        raise ProblemFormatError(
            f"{path}.check: linear problems support positivity, stability, "
            f"dissipativity; got {check!r}"
        )
    doc = make_document("linear", problem, _result_payload(result), result.verdict)
    ok = result.verdict in _PASS_VERDICTS
    message = f"{check}: {result.verdict}" if ok else _fail_message(result)
    return RunResult(result.verdict, 0 if ok else 1, message, doc)


def _build_envelope(problem, path):
    verts = _need(problem, "vertices", path)
    if not isinstance(verts, list) or not verts:
        raise ProblemFormatError(f"{path}.vertices: expected a nonempty list")
    mats = [_matrix({"v": v}, "v", f"{path}.vertices[{i}]") for i, v in enumerate(verts)]
    try:
        return make_envelope(
            mats,
            B=_matrix(problem, "B", path, required=False),
            C=_matrix(problem, "C", path, required=False),
        )
    except ValueError as exc:
        raise ProblemFormatError(f"{path}: {exc}") from exc


def _run_envelope(problem):
    path = "problem"
    env = _build_envelope(problem, path)
    cone = _cone(problem, path)
    check = problem.get("check", "monotonicity")
    opts = _options(problem, path)
    if check == "monotonicity":
        result = certify_monotonicity(env, cone)
    elif check == "stability":
        result = certify_incremental_stability(env, cone, opts)
    elif check == "dissipativity":
        result = certify_differential_dissipativity(
            env, cone, _supply(problem, path, True), opts
        )
    elif check == "indegree":
        result = certify_indegree(env, cone, _supply(problem, path, True), opts)
    else:
        raise ProblemFormatError(
            f"{path}.check: envelope problems support monotonicity, stability, "
            f"dissipativity, indegree; got {check!r}"
        )
    doc = make_document("envelope", problem, _result_payload(result), result.verdict)
    ok = result.verdict in _PASS_VERDICTS
    message = f"{check}: {result.verdict}" if ok else _fail_message(result)
    return RunResult(result.verdict, 0 if ok else 1, message, doc)


def _run_network(problem, seed=None):
    path = "problem"
    variant = problem.get("variant", "outdegree")
    if variant not in ("outdegree", "indegree"):
        raise ProblemFormatError(f"{path}.variant: outdegree or indegree, got {variant!r}")
    mode = problem.get("mode", "standard")
    if "random" in problem:
        from .simulate import make_random_network

        spec = problem["random"]
        if not isinstance(spec, dict) or "N" not in spec:
            raise ProblemFormatError(f"{path}.random: expected an object with N")
        n = int(spec["N"])
        used_seed = int(seed if seed is not None else spec.get("seed", 0))
        model, bounds = make_random_network(n, used_seed)
        certs = model.subsystem_certificates()
        if variant == "indegree":
            raise ProblemFormatError(
                f"{path}: random networks are checked in the outdegree variant"
            )
    else:
        subs = _need(problem, "subsystems", path)
        if not isinstance(subs, list) or not subs:
            raise ProblemFormatError(f"{path}.subsystems: expected a nonempty list")
        certs = []
        for i, sub in enumerate(subs):
            sub_path = f"{path}.subsystems[{i}]"
            env = _build_envelope(sub, sub_path)
            cone = _cone(sub, sub_path)
            supply = _supply(sub, sub_path, True)
            opts = _options(sub, sub_path)
            if variant == "indegree":
                res = certify_indegree(env, cone, supply, opts)
            else:
                res = certify_differential_dissipativity(env, cone, supply, opts)
            if not res.ok:
                message = f"subsystem {i} failed: {_fail_message(res)}"
                doc = make_document("network", problem, _result_payload(res), res.verdict)
                return RunResult(res.verdict, 1, message, doc)
            certs.append(res.certificate)
        lower = _matrix(problem, "weights", path, required="weights_lower" not in problem)
        if lower is None:
            lower = _matrix(problem, "weights_lower", path)
            upper = _matrix(problem, "weights_upper", path)
            bounds = InterconnectionBounds.from_scalar_ranges(lower, upper)
        else:
            bounds = InterconnectionBounds.from_weight_matrix(lower)
    checker = check_network_indegree if variant == "indegree" else check_network_outdegree
    check = checker(certs, bounds, mode=mode)
    payload = {
        "verdict": check.verdict,
        "rate": check.rate,
        "margins": _jsonable(check.margins),
        "subsystem_certificates": [_cert_payload(c) for c in certs],
        "bounds": {
            "lower": _jsonable(bounds._scalar_lower),
            "upper": _jsonable(bounds._scalar_upper),
        } if bounds.is_scalar else None,
        "variant": variant,
        "mode": mode,
    }
    doc = make_document("network", problem, payload, check.verdict)
    if check.ok:
        message = f"network {variant}: Certified at rate {check.rate:.6g}"
        return RunResult(check.verdict, 0, message, doc)
    worst = min(check.margins, key=lambda k: check.margins[k])
    message = (
        f"network {variant}: Unknown; binding margin {worst} = "
        f"{check.margins[worst]:.6e}"
    )
    return RunResult(check.verdict, 1, message, doc)


def _codesign_config(problem, path, overrides):
    from .codesign import CodesignConfig

    spec = dict(problem.get("config", {}))
    if not isinstance(spec, dict):
        raise ProblemFormatError(f"{path}.config: expected an object")
    for key, value in overrides.items():
        if value is not None:
            spec[key] = value
    kwargs = {}
    for key in ("eps1", "eps2", "eps3", "gain_bound"):
        if key in spec and spec[key] is not None:
            kwargs[key] = float(spec[key])
    if "max_iters" in spec and spec["max_iters"] is not None:
        kwargs["max_iters"] = int(spec["max_iters"])
    if "rank_guard" in spec:
        kwargs["rank_guard"] = spec["rank_guard"]
    if "pinned_rows" in spec:
        kwargs["pinned_rows"] = tuple(int(i) for i in spec["pinned_rows"])
    if "fixed_h" in spec and spec["fixed_h"] is not None:
        kwargs["fixed_h"] = _matrix(spec, "fixed_h", f"{path}.config")
    try:
        return CodesignConfig(**kwargs)
    except (ValueError, TypeError) as exc:
        raise ProblemFormatError(f"{path}.config: {exc}") from exc


def _run_codesign(problem, eps1=None, eps2=None, eps3=None, max_iters=None):
    from .codesign import algorithm1, algorithm2, augment_output_feedback, split_output_feedback

    path = "problem"
    env = _build_envelope(problem, path)
    gain = None
    feedback = problem.get("output_feedback")
    if feedback is not None:
        if not isinstance(feedback, dict) or "order" not in feedback:
            raise ProblemFormatError(f"{path}.output_feedback: expected an object with order")
        env, gain = augment_output_feedback(env, int(feedback["order"]))
    K0 = _matrix(problem, "K0", path)
    v0 = _vector(problem, "v0", path, required=False)
    if v0 is None:
        v0 = np.ones(K0.shape[0])
    cfg = _codesign_config(
        problem, path,
        {"eps1": eps1, "eps2": eps2, "eps3": eps3, "max_iters": max_iters},
    )
    supply = _supply(problem, path, required=False)
    try:
        if supply is None:
            out = algorithm1(env, K0, v0, cfg, gain=gain)
        else:
            out = algorithm2(env, K0, v0, supply, cfg, gain=gain)
    except ValueError as exc:
        raise ProblemFormatError(f"{path}: {exc}") from exc

    state = out.state
    closed = gain.closed_loop(env.vertices, state.theta) if gain is not None else [
        A + env.B @ state.theta for A in env.vertices
    ]
    payload = {
        "verdict": out.verdict,
        "message": out.message,
        "iterations": out.iterations,
        "K": _jsonable(state.K),
        "v": _jsonable(state.v),
        "theta": _jsonable(state.theta),
        "closed_loop": {
            "vertices": _jsonable(list(closed)),
            "B": _jsonable(env.B),
            "C": _jsonable(env.C),
        },
        "certificate": _cert_payload(
            out.certificate.certificate if out.certificate else None
        ),
        "history": _jsonable(state.history),
    }
    if gain is not None and state.theta is not None and feedback is not None:
        a_c, b_c, c_c, d_c = split_output_feedback(state.theta, env.m, env.p)
        payload["controller"] = _jsonable(
            {"A_c": a_c, "B_c": b_c, "C_c": c_c, "D_c": d_c}
        )
    doc = make_document("codesign", problem, payload, out.verdict)
    log_rows = np.array(
        [
            [h["iteration"], h["c"], h["c_p"], h["c_s"], h["step_k"], h["step_v"]]
            for h in state.history
        ]
    )
    tables = {
        "iteration_log": (["iteration", "c", "c_p", "c_s", "step_k", "step_v"], log_rows)
    }
    code = 0 if out.ok else 1
    return RunResult(out.verdict, code, out.message, doc, tables)


def _simulate_field(problem, path, seed):
    from . import simulate as sim

    spec = _need(problem, "field", path)
    if not isinstance(spec, dict) or "type" not in spec:
        raise ProblemFormatError(f"{path}.field: expected an object with a type")
    kind = spec["type"]
    if kind == "linear":
        return sim.linear_field(
            _matrix(spec, "A", f"{path}.field"),
            B=_matrix(spec, "B", f"{path}.field", required=False),
            C=_matrix(spec, "C", f"{path}.field", required=False),
        )
    if kind == "mass-spring":
        gains = spec.get("gains", list(sim.BENCH_GAINS))
        slope = spec.get("slope")
        return sim.mass_spring_field(
            slope=None if slope is None else float(slope),
            gains=(float(gains[0]), float(gains[1])),
        )
    if kind == "network":
        rand = spec.get("random")
        if not isinstance(rand, dict) or "N" not in rand:
            raise ProblemFormatError(f"{path}.field.random: expected an object with N")
        used_seed = int(seed if seed is not None else rand.get("seed", 0))
        model, _ = sim.make_random_network(int(rand["N"]), used_seed)
        return model.field()
    raise ProblemFormatError(
        f"{path}.field.type: linear, mass-spring or network, got {kind!r}"
    )


def _simulate_input(problem, path):
    import math

    spec = problem.get("input")
    if spec is None:
        return None
    if not isinstance(spec, dict) or "type" not in spec:
        raise ProblemFormatError(f"{path}.input: expected an object with a type")
    kind = spec["type"]
    if kind == "zero":
        return None
    if kind == "constant":
        value = spec.get("value", 0.0)
        return np.asarray(value, dtype=float)
    if kind == "sine":
        amp = float(spec.get("amplitude", 1.0))
        freq = float(spec.get("frequency", 1.0))
        return lambda t: amp * math.sin(freq * t)
    raise ProblemFormatError(f"{path}.input.type: zero, constant or sine, got {kind!r}")


def _run_simulate(problem, seed=None, dt=None, horizon=None):
    from . import simulate as sim

    path = "problem"
    fld = _simulate_field(problem, path, seed)
    x0_spec = _need(problem, "x0", path)
    if isinstance(x0_spec, dict):
        rand = x0_spec.get("random")
        if not isinstance(rand, dict):
            raise ProblemFormatError(f"{path}.x0: expected a vector or a random object")
        used_seed = int(seed if seed is not None else rand.get("seed", 0))
        box = float(rand.get("box", 1.0))
        rng = np.random.Generator(np.random.PCG64(used_seed))
        x0 = rng.uniform(-box, box, size=fld.n)
    else:
        x0 = _vector(problem, "x0", path)
    step = float(dt if dt is not None else problem.get("dt", sim.DEFAULT_DT))
    t_end = float(horizon if horizon is not None else problem.get("t_end", 10.0))
    try:
        traj = sim.integrate(fld, x0, u=_simulate_input(problem, path),
                             t_end=t_end, dt=step)
    except NonFinite as exc:
        return RunResult("Fail", 1, str(exc))
    stride = max(1, int(problem.get("stride", 1)))
    columns, rows = sim._trajectory_table(traj, stride=stride)
    tables = {"trajectory": (columns, rows)}
    message = f"integrated {fld.tag} for {t_end:g}s at dt = {step:g}"
    return RunResult("Success", 0, message, None, tables)


def run_problem(problem, seed=None, eps1=None, eps2=None, eps3=None,
                max_iters=None, dt=None, horizon=None):
    """Dispatch one validated problem; returns a RunResult."""
    kind = problem["kind"]
    if kind == "linear":
        return _run_linear(problem)
    if kind == "envelope":
        return _run_envelope(problem)
    if kind == "network":
        return _run_network(problem, seed=seed)
    if kind == "codesign":
        return _run_codesign(problem, eps1=eps1, eps2=eps2, eps3=eps3,
                             max_iters=max_iters)
    return _run_simulate(problem, seed=seed, dt=dt, horizon=horizon)


# ---------------------------------------------------------------------------
# document re-verification (--check-only)
# ---------------------------------------------------------------------------


def _payload_cert(payload):
    """Rebuild certificate arrays from a document payload."""
    K = np.asarray(payload["K"], dtype=float)
    P = [np.asarray(p, dtype=float) for p in payload["P"]]
    G = np.asarray(payload["G"], dtype=float)
    H = np.asarray(payload["H"], dtype=float)
    if G.ndim == 1:
        G = G.reshape(K.shape[0], -1)
    if H.ndim == 1:
        H = H.reshape(-1, K.shape[0])
    supply = None
    if payload.get("supply") is not None:
        supply = SupplyRate(r=payload["supply"]["r"], q=payload["supply"]["q"])
    return K, P, G, H, supply


def _recheck_embedding(vertices, B, C, payload):
    K, P, G, H, supply = _payload_cert(payload)
    residuals = embedding_residuals(K, vertices, P, G, H, B, C)
    margins = embedding_margins(P, G, H)
    if "v" in payload:
        v = np.asarray(payload["v"], dtype=float)
        margins.update(decay_margins_out(P, G, H, v, float(payload["rate"]), supply))
    elif "w" in payload:
        w = np.asarray(payload["w"], dtype=float)
        margins.update(decay_margins_in(P, G, H, w, float(payload["rate"]), supply))
    scale = max(1.0, float(np.abs(K).max()),
                max(float(np.abs(A).max()) for A in vertices))
    margins = _finite(margins)
    ok = min(margins.values()) >= -RECHECK_TOL and (
        max(residuals.values()) <= RECHECK_TOL * scale
    )
    return ok, margins, residuals


def verify_document(doc):
    """Re-verify an emitted certificate document from its stored data.

    Returns (ok, margins, residuals).  No LP is solved; every inequality is
    evaluated directly at the stored certificate.
    """
    if not isinstance(doc, dict) or doc.get("format") != DOCUMENT_FORMAT:
        raise ProblemFormatError("not a certificate document")
    kind = doc.get("kind")
    result = doc.get("result", {})
    if doc.get("verdict") not in _PASS_VERDICTS:
        raise ProblemFormatError(
            f"document records verdict {doc.get('verdict')!r}; only certified "
            "documents can be re-verified"
        )
    if kind in ("linear", "envelope"):
        problem = doc["problem"]
        if kind == "linear":
            vertices = [np.asarray(problem["A"], dtype=float)]
        else:
            vertices = [np.asarray(v, dtype=float) for v in problem["vertices"]]
        n = vertices[0].shape[0]
        B = np.asarray(problem["B"], dtype=float) if problem.get("B") else np.zeros((n, 0))
        C = np.asarray(problem["C"], dtype=float) if problem.get("C") else np.zeros((0, n))
        return _recheck_embedding(vertices, B, C, result["certificate"])
    if kind == "codesign":
        closed = result["closed_loop"]
        vertices = [np.asarray(v, dtype=float) for v in closed["vertices"]]
        n = vertices[0].shape[0]
        B = np.asarray(closed["B"], dtype=float) if closed.get("B") else np.zeros((n, 0))
        C = np.asarray(closed["C"], dtype=float) if closed.get("C") else np.zeros((0, n))
        return _recheck_embedding(vertices, B, C, result["certificate"])
    if kind == "network":
        certs = []
        for payload in result["subsystem_certificates"]:
            K, P, G, H, supply = _payload_cert(payload)
            emb = MonotoneEmbedding(K=K, P=tuple(P), G=G, H=H)
            if "w" in payload:
                certs.append(InDegreeCertificate(
                    emb, np.asarray(payload["w"], dtype=float),
                    float(payload["rate"]), supply,
                ))
            else:
                certs.append(DifferentialCertificate(
                    emb, np.asarray(payload["v"], dtype=float),
                    float(payload["rate"]), supply,
                ))
        stored = result.get("bounds")
        if stored is None:
            raise ProblemFormatError("network document carries no bounds")
        bounds = InterconnectionBounds.from_scalar_ranges(
            stored["lower"], stored["upper"]
        )
        checker = (
            check_network_indegree
            if result.get("variant") == "indegree"
            else check_network_outdegree
        )
        check = checker(certs, bounds, mode=result.get("mode", "standard"))
        return check.ok, dict(check.margins), {}
    raise ProblemFormatError(f"documents of kind {kind!r} cannot be re-verified")
