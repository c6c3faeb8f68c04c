"""Command-line interface: ``pickreg <command> [options]``.

Every command writes its outputs plus a ``manifest.json`` into ``--out``;
``pickreg replay manifest.json`` reruns the recorded command and compares
output hashes.  Exit codes: 0 success, 2 invalid input, 3 precision
exhaustion, 4 invariant violation.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import tempfile
import warnings
from fractions import Fraction
from typing import Callable, Dict, List, Optional

from . import __version__, blaschke, carleson, io, kernels, nodes, spectra, svg
from .errors import (
    DimensionError,
    EscalationExhausted,
    IndeterminateComparison,
    InvalidParameter,
    InvariantViolation,
)
from .numerics import PrecisionContext, default_context

EXIT_OK, EXIT_INVALID, EXIT_PRECISION, EXIT_INVARIANT = 0, 2, 3, 4


class _Run:
    """Collects output files of one command and writes the manifest."""

    def __init__(self, args: argparse.Namespace):
        self.args = args
        self.out = args.out
        self.outputs: Dict[str, str] = {}
        self.inputs: Dict[str, str] = {}
        os.makedirs(self.out, exist_ok=True)

    @property
    def ctx(self) -> PrecisionContext:
        return _context(self.args)

    def write(self, name: str, text: str):
        path = os.path.join(self.out, name)
        with open(path, "w", newline="") as fh:
            fh.write(text)
        self.outputs[name] = hashlib.sha256(text.encode()).hexdigest()

    def read_json(self, path: str) -> dict:
        doc = io.load(path)
        with open(path, "rb") as fh:
            self.inputs[path] = hashlib.sha256(fh.read()).hexdigest()
        return doc

    def manifest(self):
        recorded = {k: v for k, v in vars(self.args).items() if k not in ("out", "func")}
        doc = {
            "schema_version": io.SCHEMA_VERSION,
            "kind": "manifest",
            "tool": "pickreg",
            "version": __version__,
            "command": self.args.command,
            "args": recorded,
            "precision": {"bits": self.ctx.bits, "max_bits": self.ctx.max_bits},
            "backend": "auto",
            "inputs": self.inputs,
            "outputs": dict(sorted(self.outputs.items())),
        }
        with open(os.path.join(self.out, "manifest.json"), "w") as fh:
            fh.write(io.dumps(doc))


def _context(args) -> PrecisionContext:
    base = default_context()
    bits = args.bits if args.bits is not None else base.bits
    max_bits = args.max_bits if args.max_bits is not None else max(base.max_bits, bits)
    return PrecisionContext(bits, max_bits)


def _rational(text: str) -> Fraction:
    try:
        return io.parse_rational(text)
    except InvalidParameter as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _fmt(e) -> str:
    lo, hi = e.to_decimal_strings(12)
    return lo if lo == hi else f"[{lo}, {hi}]"


def _say(args, msg: str):
    if not args.quiet:
        print(msg)


# ---------------------------------------------------------------------------
# commands

def _parse_point(text: str):
    """``"a"`` for a real node, ``"a:b"`` for ``a + b i``."""
    if ":" in text:
        re, im = text.split(":", 1)
        return (io.parse_rational(re), io.parse_rational(im))
    return io.parse_rational(text)


def cmd_nodes(args, run: _Run) -> int:
    ctx = run.ctx
    if args.family == "radial":
        if args.p is None:
            raise InvalidParameter("--p is required for the radial family")
        seq = nodes.gen_radial_power(args.p, args.count, ctx)
    elif args.family == "geometric":
        if args.r is None:
            raise InvalidParameter("--r is required for the geometric family")
        seq = nodes.gen_geometric(args.r, args.count, ctx)
    else:
        if not args.values:
            raise InvalidParameter("--values is required for explicit nodes")
        seq = nodes.explicit([_parse_point(v) for v in args.values.split(",")], ctx.bits)
    bad = nodes.validate(seq, ctx)
    if bad:
        raise InvalidParameter("invalid nodes: " + ", ".join(map(str, bad)))
    run.write("nodes.json", io.dumps(io.nodes_json(seq)))
    _say(args, f"{len(seq)} nodes -> {os.path.join(run.out, 'nodes.json')}")
    return EXIT_OK


def cmd_moments(args, run: _Run) -> int:
    m = kernels.moment_generator(args.kind, args.count, run.ctx)
    run.write("moments.json", io.dumps(io.moments_json(m)))
    _say(args, f"{len(m)} {args.kind} moments -> {os.path.join(run.out, 'moments.json')}")
    return EXIT_OK


def _family(args, run: _Run) -> kernels.MatrixFamily:
    doc = run.read_json(args.input)
    ctx = run.ctx
    if args.kernel == "hankel":
        return kernels.hankel_family(io.moments_from_json(doc, ctx))
    seq = io.nodes_from_json(doc, ctx)
    bad = nodes.validate(seq, ctx)
    if bad:
        raise InvalidParameter("invalid nodes: " + ", ".join(map(str, bad)))
    return kernels.pick_family(seq) if args.kernel == "pick" else kernels.gram_family(seq)


def _write_trajectory(run: _Run, stem: str, traj: spectra.Trajectory, verdict=None):
    run.write(f"{stem}.csv", io.trajectory_csv(traj))
    run.write(f"{stem}.json", io.dumps(io.trajectory_json(traj, verdict)))


def cmd_lambda0(args, run: _Run) -> int:
    family = _family(args, run)
    nmax = family.max_n if args.nmax is None else args.nmax
    try:
        traj = spectra.lambda0_trajectory(family, nmax, args.rel_tol, run.ctx)
    except spectra.TrajectoryInterrupted as exc:
        _write_trajectory(run, "lambda0", exc.partial)
        raise
    verdict = spectra.classify(traj)
    _write_trajectory(run, "lambda0", traj, verdict)
    if args.svg:
        bands = [(r.n, r.lambda0.value) for r in traj]
        run.write("lambda0.svg", svg.semilog_bands([(family.name, bands)], f"lambda_0 ({family.name})",
                                                   "lambda_0"))
    last = traj[-1]
    _say(args, f"n={last.n}: lambda_0 {_fmt(last.lambda0.value)}; verdict {verdict.tag}")
    return EXIT_OK


def cmd_carleson(args, run: _Run) -> int:
    ctx = run.ctx
    if args.measure:
        mu = io.measure_from_json(run.read_json(args.measure), ctx.bits)
        rep = carleson.box_constant(mu, ctx)
        run.write("box_constant.json", io.dumps(io.box_report_json(rep, ctx.bits)))
        _say(args, f"box constant {_fmt(rep.constant)} at {rep.witness}")
        return EXIT_OK
    if not args.nodes:
        raise InvalidParameter("one of --nodes or --measure is required")
    seq = io.nodes_from_json(run.read_json(args.nodes), ctx)
    bad = nodes.validate(seq, ctx)
    if bad:
        raise InvalidParameter("invalid nodes: " + ", ".join(map(str, bad)))
    nmax = len(seq) - 1 if args.nmax is None else args.nmax
    weights = "self"
    if args.weights != "self":
        if not args.weights.startswith("ambient:"):
            raise InvalidParameter("--weights must be 'self' or 'ambient:M'")
        weights = int(args.weights.split(":", 1)[1])
    traj = carleson.box_constant_trajectory(seq, nmax, weights, ctx)
    _write_trajectory(run, "box_trajectory", traj)
    if args.svg:
        bands = [(r.n, r.aux["box_constant"]) for r in traj]
        run.write("box_trajectory.svg", svg.semilog_bands([("box constant", bands)], "Carleson box constant",
                                                          "box constant"))
    _say(args, f"n={traj[-1].n}: box constant {_fmt(traj[-1].aux['box_constant'])}")
    return EXIT_OK


# verify ------------------------------------------------------------------

SCENARIOS: Dict[str, Callable[[PrecisionContext], nodes.NodeSequence]] = {
    "two-node": lambda ctx: nodes.explicit([Fraction(1, 2), Fraction(3, 4)], ctx.bits),
    "radial-p2-n20": lambda ctx: nodes.gen_radial_power(2, 21, ctx),
    "geometric-n20": lambda ctx: nodes.gen_geometric(Fraction(1, 2), 21, ctx),
}


def run_checks(scenario: str, ctx: PrecisionContext, inject_fault: bool = False) -> List[dict]:
    """Identity and inequality suite on a named scenario; one dict per check."""
    seq = SCENARIOS[scenario](ctx)
    n = len(seq) - 1
    K = kernels.pick_matrix(seq, n, ctx)
    if inject_fault:
        K = K.with_entry(0, 1, K[0, 1].exact + Fraction(1, 1000))
    checks: List[dict] = []

    def record(name, ok, detail=""):
        checks.append({"name": name, "status": "pass" if ok else "fail", "detail": detail})

    # embed * lambda_0 = 1 and the Carleson comparisons at every section
    failures = []
    for m in range(n + 1):
        rec = carleson.theorem_comparison(seq, m, ctx, strict=False, pick=K if m == n else None)
        failures.extend(f"{f}@n={m}" for f in rec.failures())
    for name in ("embed-lambda0-identity", "box-le-c-embed", "embed-le-c-box"):
        bad = [f for f in failures if f.startswith(name + "@")]
        record(name, not bad, ", ".join(bad))

    rep = kernels.proof_identity(seq, n, ctx, K=K)
    record("proof-matrix-identity", rep.holds,
           "" if rep.holds else f"entry {rep.worst_entry} differs")

    il = spectra.interlacing_check(kernels.pick_family(seq), n, ctx)
    record("interlacing", il.passed, str(il))

    try:
        spectra.lambda0_trajectory(kernels.pick_family(seq), n, Fraction(1, 10 ** 6), ctx)
        record("monotone-lambda0", True)
    except InvariantViolation as exc:
        record("monotone-lambda0", False, str(exc))

    targets = kernels.TargetValues.of([Fraction(1, 2)] * len(seq), ctx.bits)
    dom = kernels.domination_gap(seq, targets, n, ctx)
    zero = kernels.domination_gap(seq, kernels.TargetValues.of([0] * len(seq), ctx.bits), n, ctx)
    record("domination", dom.difference_psd and dom.gap.lo >= 0 and zero.gap.exact == 0,
           f"gap {dom.gap}")

    if seq.provenance.kind == "radial_power":
        rows = blaschke.example_mass_table(seq.provenance.parameter, len(seq) + 1, ctx)
        bad = [r.n for r in rows if not r.holds]
        record("mass-lower-bound", not bad, f"failing n: {bad}" if bad else f"{len(rows)} rows")
    else:
        checks.append({"name": "mass-lower-bound", "status": "skipped",
                       "detail": "only defined for the radial example"})
    return checks


def cmd_verify(args, run: _Run) -> int:
    checks = run_checks(args.scenario, run.ctx, args.inject_fault)
    ok = all(c["status"] != "fail" for c in checks)
    doc = {"schema_version": io.SCHEMA_VERSION, "kind": "verify", "scenario": args.scenario,
           "inject_fault": args.inject_fault, "passed": ok, "checks": checks}
    run.write("verify.json", io.dumps(doc))
    for c in checks:
        _say(args, f"{c['status']:>7}  {c['name']}  {c['detail']}")
    if not ok:
        failed = [c["name"] for c in checks if c["status"] == "fail"]
        print(f"invariant violated: {', '.join(failed)}", file=sys.stderr)
        return EXIT_INVARIANT
    return EXIT_OK


# reproduce-example ---------------------------------------------------------

def cmd_reproduce(args, run: _Run) -> int:
    ctx = run.ctx
    p, nmax = args.p, args.nmax
    rad = nodes.gen_radial_power(p, nmax + 1, ctx)
    lam = spectra.lambda0_trajectory(kernels.pick_family(rad), nmax, args.rel_tol, ctx)
    v_rad = spectra.classify(lam)
    _write_trajectory(run, "lambda0_radial", lam, v_rad)

    box = carleson.box_constant_trajectory(rad, nmax, "self", ctx)
    _write_trajectory(run, "box_radial", box)

    rows = blaschke.example_mass_table(p, nmax + 1, ctx)
    lines = ["n,N,mass_lo,mass_hi,bound_lo,bound_hi,holds"]
    for r in rows:
        lines.append(",".join([str(r.n), str(r.N), *r.mass.to_decimal_strings(),
                               *r.bound.to_decimal_strings(), str(r.holds).lower()]))
    run.write("masses.csv", "\n".join(lines) + "\n")

    g_n = min(nmax, args.companion_nmax)
    geo = nodes.gen_geometric(Fraction(1, 2), g_n + 1, ctx)
    lam_g = spectra.lambda0_trajectory(kernels.pick_family(geo), g_n, args.rel_tol, ctx)
    v_geo = spectra.classify(lam_g)
    _write_trajectory(run, "lambda0_geometric", lam_g, v_geo)

    verdicts = {"schema_version": io.SCHEMA_VERSION, "kind": "verdicts", "p": str(p), "nmax": nmax,
                "radial": io.verdict_json(v_rad), "geometric_r_1/2": io.verdict_json(v_geo),
                "mass_bounds_hold": all(r.holds for r in rows),
                "box_constant_final": io.enclosure_json(box[-1].aux["box_constant"])}
    run.write("verdicts.json", io.dumps(verdicts))

    run.write("lambda0.svg", svg.semilog_bands(
        [(f"radial p={p}", [(r.n, r.lambda0.value) for r in lam]),
         ("geometric r=1/2", [(r.n, r.lambda0.value) for r in lam_g])],
        "smallest eigenvalue of K_n", "lambda_0"))
    run.write("box.svg", svg.semilog_bands(
        [(f"radial p={p}", [(r.n, r.aux["box_constant"]) for r in box])],
        "Carleson box constant of nu", "box constant"))
    run.write("masses.svg", svg.semilog_bands(
        [("mass", [(r.n, r.mass) for r in rows]), ("lower bound", [(r.n, r.bound) for r in rows])],
        f"nu_N masses, N={nmax + 1}", "mass"))
    _say(args, f"radial p={p}: {v_rad.tag}; geometric: {v_geo.tag}; "
               f"final box constant {_fmt(box[-1].aux['box_constant'])}")
    return EXIT_OK


# replay --------------------------------------------------------------------

def cmd_replay(args, _run=None) -> int:
    doc = io.load(args.manifest)
    if doc.get("kind") != "manifest":
        raise InvalidParameter(f"{args.manifest} is not a manifest")
    out = args.out or tempfile.mkdtemp(prefix="pickreg-replay-")
    ns = argparse.Namespace(**doc["args"])
    ns.out = out
    ns.quiet = True
    ns.func = COMMANDS[doc["command"]]
    for path, digest in doc.get("inputs", {}).items():
        with open(path, "rb") as fh:
            if hashlib.sha256(fh.read()).hexdigest() != digest:
                raise InvalidParameter(f"input {path} changed since the recorded run")
    code = _dispatch(ns)
    if code != EXIT_OK:
        return code
    with open(os.path.join(out, "manifest.json")) as fh:
        fresh = json.load(fh)
    diff = sorted(k for k in set(doc["outputs"]) | set(fresh["outputs"])
                  if doc["outputs"].get(k) != fresh["outputs"].get(k))
    if diff:
        print(f"outputs differ: {', '.join(diff)}", file=sys.stderr)
        return EXIT_INVARIANT
    print(f"replay identical: {len(fresh['outputs'])} outputs in {out}")
    return EXIT_OK


COMMANDS = {
    "nodes": cmd_nodes,
    "moments": cmd_moments,
    "lambda0": cmd_lambda0,
    "carleson": cmd_carleson,
    "verify": cmd_verify,
    "reproduce-example": cmd_reproduce,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--bits", type=int, default=None,
                        help="starting precision in bits (default: $PICKREG_BITS or 128)")
    common.add_argument("--max-bits", type=int, default=None, help="escalation cap (default 4096)")
    common.add_argument("--out", default=".", help="output directory")
    common.add_argument("--quiet", action="store_true")

    parser = argparse.ArgumentParser(prog="pickreg", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"pickreg {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("nodes", parents=[common], help="generate a node sequence")
    p.add_argument("--family", choices=["radial", "geometric", "explicit"], required=True)
    p.add_argument("--p", type=_rational)
    p.add_argument("--r", type=_rational)
    p.add_argument("--count", type=int, default=10)
    p.add_argument("--values", help="comma separated nodes, 'a' or 'a:b' for a+bi")

    p = sub.add_parser("moments", parents=[common], help="generate a moment sequence")
    p.add_argument("--kind", choices=["factorial", "gaussian", "lognormal"], required=True)
    p.add_argument("--count", type=int, required=True)

    p = sub.add_parser("lambda0", parents=[common], help="certified lambda_0 trajectory")
    p.add_argument("--kernel", choices=["pick", "hankel", "gram"], default="pick")
    p.add_argument("--input", required=True, help="nodes.json or moments.json")
    p.add_argument("--nmax", type=int)
    p.add_argument("--rel-tol", type=_rational, default=Fraction(1, 10 ** 12))
    p.add_argument("--svg", action="store_true", help="also write a semilog band plot")

    p = sub.add_parser("carleson", parents=[common], help="box constants")
    p.add_argument("--nodes", help="nodes.json for a box-constant trajectory")
    p.add_argument("--measure", help="measure.json for a single box constant")
    p.add_argument("--nmax", type=int)
    p.add_argument("--weights", default="self", help="'self' or 'ambient:M'")
    p.add_argument("--svg", action="store_true")

    p = sub.add_parser("verify", parents=[common], help="run the identity suite on a scenario")
    p.add_argument("--scenario", choices=sorted(SCENARIOS), required=True)
    p.add_argument("--inject-fault", action="store_true", help="corrupt one Pick matrix entry")

    p = sub.add_parser("reproduce-example", parents=[common], help="radial example bundle")
    p.add_argument("--p", type=_rational, default=Fraction(2))
    p.add_argument("--nmax", type=int, default=50)
    p.add_argument("--rel-tol", type=_rational, default=Fraction(1, 10 ** 6))
    p.add_argument("--companion-nmax", type=int, default=30)

    p = sub.add_parser("replay", help="rerun a manifest and compare outputs")
    p.add_argument("manifest")
    p.add_argument("--out", default=None)
    return parser


def _jsonable(ns: argparse.Namespace) -> argparse.Namespace:
    for k, v in list(vars(ns).items()):
        if isinstance(v, Fraction):
            setattr(ns, k, str(v))
    return ns


def _restore(ns: argparse.Namespace) -> argparse.Namespace:
    for k in ("p", "r", "rel_tol"):
        v = getattr(ns, k, None)
        if isinstance(v, str):
            setattr(ns, k, Fraction(v))
    return ns


def _dispatch(ns: argparse.Namespace) -> int:
    func = ns.func
    run = _Run(_jsonable(argparse.Namespace(**{k: v for k, v in vars(ns).items() if k != "func"})))
    _restore(ns)
    try:
        code = func(ns, run)
    finally:
        run.manifest()
    return code


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "replay":
            return cmd_replay(args)
        if args.command == "reproduce-example" and args.bits is None and not os.environ.get("PICKREG_BITS"):
            args.bits = 512  # the tail of the radial trajectory is below 2**-64
        args.func = COMMANDS[args.command]
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            return _dispatch(args)
    except (InvalidParameter, DimensionError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (EscalationExhausted, IndeterminateComparison) as exc:
        print(f"precision exhausted: {exc}", file=sys.stderr)
        return EXIT_PRECISION
    except InvariantViolation as exc:
        print(f"invariant violated: {exc}", file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
