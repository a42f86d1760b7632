"""Command-line front end: conecert {certify, codesign, network, simulate, repro}.

Exit codes: 0 for Certified/Success, 1 for Unknown/NotCertified/Fail (stdout
carries a margin report naming the binding constraint), 2 for input errors
(malformed files, schema violations, wrong problem kind for the command).
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import problems
from . import simulate as sim
from .errors import ProblemFormatError, UnknownExample

_KIND_FOR_COMMAND = {
    "certify": ("linear", "envelope"),
    "codesign": ("codesign",),
    "network": ("network",),
    "simulate": ("simulate",),
}


def _add_common(parser, problem_required=True):
    if problem_required:
        parser.add_argument("--problem", required=True, help="problem file (JSON)")
    parser.add_argument("--out", default=None, help="directory for output files")
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--eps1", type=float, default=None)
    parser.add_argument("--eps2", type=float, default=None)
    parser.add_argument("--eps3", type=float, default=None)
    parser.add_argument("--max-iters", type=int, default=None, dest="max_iters")
    parser.add_argument("--dt", type=float, default=None)
    parser.add_argument("--horizon", type=float, default=None)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="conecert",
        description="Polyhedral-cone certificates and cone/controller co-design",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    certify = sub.add_parser(
        "certify", help="certify a linear or envelope problem, or re-verify a document"
    )
    _add_common(certify)
    certify.add_argument(
        "--check-only", action="store_true", dest="check_only",
        help="treat --problem as an emitted certificate document and re-verify it",
    )

    codesign = sub.add_parser("codesign", help="run the cone/controller co-design loop")
    _add_common(codesign)

    network = sub.add_parser("network", help="check a network interconnection")
    _add_common(network)

    simulate = sub.add_parser("simulate", help="integrate a field described by a problem file")
    _add_common(simulate)

    repro = sub.add_parser("repro", help="emit a reproduction data bundle")
    repro.add_argument("example", help=f"one of: {', '.join(sim.REPRO_IDS)}")
    _add_common(repro, problem_required=False)
    return parser


def _print_margins(margins, stream=sys.stdout):
    for name in sorted(margins):
        print(f"  {name}: {margins[name]:.9e}", file=stream)


def _write_outputs(result, out_dir, stem="certificate"):
    if out_dir is None:
        return
    os.makedirs(out_dir, exist_ok=True)
    if result.document is not None:
        path = os.path.join(out_dir, f"{stem}.json")
        problems.write_document(result.document, path)
        print(f"wrote {path}")
    for name, (columns, rows) in result.tables.items():
        path = os.path.join(out_dir, f"{name}.csv")
        sim.write_csv(path, columns, rows)
        print(f"wrote {path}")


def _check_only(path):
    with open(path) as handle:
        try:
            doc = json.load(handle)
        except json.JSONDecodeError as exc:
            raise ProblemFormatError(
                f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}"
            ) from exc
    ok, margins, residuals = problems.verify_document(doc)
    print(f"document verdict: {doc.get('verdict')}")
    _print_margins(margins)
    for name in sorted(residuals):
        print(f"  residual {name}: {residuals[name]:.9e}")
    if ok:
        print("re-verification: all inequalities hold")
        return 0
    print("re-verification FAILED: a stored inequality is violated")
    return 1


def _run_from_file(args):
    problem = problems.load_problem(args.problem)
    kind = problem["kind"]
    allowed = _KIND_FOR_COMMAND[args.command]
    if kind not in allowed:
        raise ProblemFormatError(
            f"{args.problem}: kind {kind!r} is not handled by "
            f"'conecert {args.command}' (expected {' or '.join(allowed)})"
        )
    result = problems.run_problem(
        problem, seed=args.seed, eps1=args.eps1, eps2=args.eps2, eps3=args.eps3,
        max_iters=args.max_iters, dt=args.dt, horizon=args.horizon,
    )
    print(f"{result.verdict}: {result.message}")
    if result.exit_code != 0 and result.document is not None:
        margins = result.document.get("result", {}).get("margins")
        if margins:
            _print_margins(margins)
    _write_outputs(result, args.out)
    return result.exit_code


def _run_repro(args):
    kwargs = {}
    if args.seed is not None:
        kwargs["seed"] = args.seed
    if args.dt is not None:
        kwargs["dt"] = args.dt
    if args.horizon is not None:
        kwargs["horizon"] = args.horizon
    bundle = sim.repro(args.example, **kwargs)
    out_dir = args.out if args.out is not None else "."
    for path in sim.write_bundle(bundle, out_dir):
        print(f"wrote {path}")
    verdict = getattr(bundle.certificate, "verdict", None)
    if bundle.certificate is not None:
        doc = {
            "format": problems.DOCUMENT_FORMAT,
            "version": problems.DOCUMENT_VERSION,
            "kind": "repro",
            "example": bundle.name,
            "verdict": verdict,
            "meta": problems._jsonable(bundle.meta),
            "result": _repro_payload(bundle.certificate),
        }
        path = os.path.join(out_dir, f"{bundle.name}_certificate.json")
        problems.write_document(doc, path)
        print(f"wrote {path}")
        print(f"{bundle.name}: {verdict}")
        return 0 if verdict in ("Certified", "Success") else 1
    print(f"{bundle.name}: data bundle written")
    return 0


def _repro_payload(certificate):
    if hasattr(certificate, "margins") and hasattr(certificate, "residuals"):
        return problems._result_payload(certificate)
    # network checks carry margins but no residuals
    return {
        "verdict": certificate.verdict,
        "rate": getattr(certificate, "rate", None),
        "margins": problems._jsonable(getattr(certificate, "margins", {})),
    }


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.command == "repro":
            return _run_repro(args)
        if args.command == "certify" and args.check_only:
            return _check_only(args.problem)
        return _run_from_file(args)
    except (ProblemFormatError, UnknownExample) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
