"""Command-line front end.

Subcommands cover path enumeration, exact extreme-path laws, stochastic
dominance between stored laws, the verification suites, resampling-chain
runs, exact kernels, and SVG rendering.  Exit code 0 means every checked
claim holds, 2 means some claim failed, 1 means a usage or model error.

The seed comes from --seed, falling back to the PERCO_SEED environment
variable, then 0; identical jobs with identical seeds produce byte-identical
reports.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from fractions import Fraction

import numpy as np

from .chain import (
    CoupledChain,
    ResamplingChain,
    chain_theorem1_estimate,
    conditional_stationary,
    exact_kernel,
    invariance_gap_tv,
    trajectory_rows,
)
from .engine import sample_bits
from .inequalities import (
    ConnectionEvent,
    event_probability,
    verify_corollary62,
    verify_corollary63,
    verify_lemma61,
)
from .lattice import (
    LatticeError,
    PercolationModel,
    Region,
    Sentinel,
    Site,
    band,
    strictly_left_region,
    support_for,
)
from .oracle import (
    PathDistribution,
    exact_extreme_distribution,
    stochastic_leq,
    verify_corollary2,
    verify_proposition31,
    verify_theorem1,
)
from .paths import Configuration, PathSpec, enumerate_paths
from .render import render_svg
from .report import Report


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _parse_sites(tokens) -> tuple:
    out = []
    for tok in tokens:
        if tok.startswith("@"):
            with open(tok[1:]) as fh:
                out.extend(Site(int(x), int(y)) for x, y in json.load(fh))
            continue
        for part in tok.split(";"):
            part = part.strip()
            if not part:
                continue
            try:
                x, y = part.split(",")
                out.append(Site(int(x), int(y)))
            except ValueError as exc:
                raise UsageError(f"bad coordinate {part!r}, expected x,y") from exc
    return tuple(out)


def _parse_path(token, m: int):
    if token in ("-inf", "-oo"):
        return Sentinel.LEFT_INFINITE
    if token in ("inf", "+inf", "+oo"):
        return Sentinel.RIGHT_INFINITE
    try:
        xs = tuple(int(t) for t in token.split(","))
    except ValueError as exc:
        raise UsageError(f"bad path {token!r}, expected x0,x1,...") from exc
    return PathSpec(m, xs)


def _model_from_args(args) -> PercolationModel:
    if getattr(args, "model", None):
        with open(args.model) as fh:
            obj = json.load(fh)
        return PercolationModel.from_json(obj)
    kwargs = {}
    if getattr(args, "variant", None):
        kwargs["variant"] = args.variant
    if getattr(args, "p", None) is not None:
        kwargs["p"] = args.p
    if getattr(args, "pair_law", None):
        kwargs["pair_law"] = tuple(args.pair_law.split(","))
        kwargs.setdefault("variant", "CorrelatedPairBond")
    if getattr(args, "range", None):
        a, b = args.range.split(",")
        kwargs["step_range"] = (int(a), int(b))
        kwargs.setdefault("variant", "RangeSite")
    return PercolationModel(**kwargs)


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("PERCO_SEED")
    if env is not None:
        return int(env)
    return 0


def _emit(args, text: str):
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _emit_report(args, report: Report) -> int:
    fmt = args.format or "json"
    if fmt == "csv":
        _emit(args, report.to_csv())
    else:
        _emit(args, report.to_json())
    return 0 if report.all_hold else 2


def _json_text(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _region_from_args(args, model, A, B):
    m = A[0].y
    n = B[0].y
    tau1 = _parse_path(args.tau1, m) if getattr(args, "tau1", None) else Sentinel.LEFT_INFINITE
    tau2 = _parse_path(args.tau2, m) if getattr(args, "tau2", None) else Sentinel.RIGHT_INFINITE
    if isinstance(tau1, Sentinel) and isinstance(tau2, Sentinel):
        return Region.whole(m, n)
    return band(tau1, tau2, m, n)


def _add_common(p, *, geometry=True, walls=False):
    p.add_argument("--model", help="JSON model file")
    p.add_argument("--variant", help="model variant name")
    p.add_argument("--p", help="shared openness probability")
    p.add_argument("--pair-law", dest="pair_law", help="q00,q01,q10,q11")
    p.add_argument("--range", help="a,b step range for site models")
    if geometry:
        p.add_argument("--A", nargs="+", default=[], help="source sites x,y")
        p.add_argument("--B", nargs="+", default=[], help="target sites x,y")
        p.add_argument("--G", nargs="+", default=[], help="obstacle sites x,y")
    if walls:
        p.add_argument("--tau1", help="left wall path (or -inf)")
        p.add_argument("--tau2", help="right wall path (or +inf)")
        p.add_argument("--tau3", help="middle wall path")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", help="output file (default stdout)")
    p.add_argument("--format", choices=["json", "csv", "svg"], default=None)


def build_parser() -> _Parser:
    parser = _Parser(prog="perco", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("paths", help="enumerate slab paths")
    _add_common(p, walls=True)

    p = sub.add_parser("exact", help="exact extreme-path law")
    _add_common(p, walls=True)
    p.add_argument("--side", choices=["left", "right"], default="left")

    p = sub.add_parser("dominance", help="compare two stored path laws")
    _add_common(p, geometry=False)
    p.add_argument("--lhs", required=True, help="JSON path-law file")
    p.add_argument("--rhs", required=True, help="JSON path-law file")

    p = sub.add_parser("theorem1", help="restriction inequalities for extreme-path laws")
    _add_common(p)
    p.add_argument("--certificates", action="store_true")

    p = sub.add_parser("prop31", help="band monotonicity inequalities")
    _add_common(p, walls=True)

    p = sub.add_parser("corollary2", help="flanking-point monotonicity")
    _add_common(p)
    p.add_argument("--extra", required=True, help="flanking site x,y")
    p.add_argument("--side", choices=["left", "right"], required=True)
    p.add_argument("--at", choices=["start", "end"], default="start")

    p = sub.add_parser("chain", help="resampling chain runs")
    _add_common(p)
    p.add_argument("--steps", type=int, default=10000)
    p.add_argument("--burn-in", dest="burn_in", type=int, default=None)

    p = sub.add_parser("kernel", help="exact transition kernel on crossing states")
    _add_common(p)

    for name in ("lemma61", "corr62"):
        p = sub.add_parser(name, help="conditional connection inequalities")
        _add_common(p, geometry=False)
        p.add_argument("--A", nargs="+", required=True)
        p.add_argument("--B1", nargs="+", required=True)
        p.add_argument("--B2", nargs="+", required=True)
        p.add_argument("--B3", nargs="+", required=True)
        p.add_argument("--method", choices=["exact", "mc"], default="exact")
        p.add_argument("--budget", type=int, default=10**6)

    p = sub.add_parser("corr63", help="displacement monotonicity of connection")
    _add_common(p, geometry=False)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--ys", nargs="+", type=int, default=None)
    p.add_argument("--method", choices=["exact", "mc"], default=None)
    p.add_argument("--budget", type=int, default=10**6)

    p = sub.add_parser("render", help="SVG of a sampled slab configuration")
    _add_common(p, walls=True)

    p = sub.add_parser("job", help="run a JSON job file")
    p.add_argument("jobfile")
    p.add_argument("--out", help="override the job's output path")
    p.add_argument("--format", choices=["json", "csv", "svg"], default=None)
    p.add_argument("--seed", type=int, default=None)

    return parser


# --- handlers --------------------------------------------------------------------


def cmd_paths(args) -> int:
    model = _model_from_args(args)
    A = _parse_sites(args.A)
    B = _parse_sites(args.B)
    region = _region_from_args(args, model, A, B)
    paths = enumerate_paths(model, A, B, region)
    _emit(args, _json_text({"count": len(paths), "paths": [p.to_json() for p in paths]}))
    return 0


def cmd_exact(args) -> int:
    model = _model_from_args(args)
    A = _parse_sites(args.A)
    B = _parse_sites(args.B)
    region = _region_from_args(args, model, A, B)
    dist = exact_extreme_distribution(
        model, A, B, region, side=args.side, threads=args.threads
    )
    _emit(args, _json_text({"side": args.side, "distribution": dist.to_json()}))
    return 0


def cmd_dominance(args) -> int:
    with open(args.lhs) as fh:
        mu = PathDistribution.from_json(json.load(fh))
    with open(args.rhs) as fh:
        nu = PathDistribution.from_json(json.load(fh))
    res = stochastic_leq(mu, nu)
    obj = {"holds": res.holds}
    if res.certificate is not None:
        obj["certificate"] = [
            {"lhs_path": p.to_json(), "rhs_path": q.to_json(), "weight": str(w)}
            for (p, q), w in sorted(res.certificate.items(), key=lambda kv: (kv[0][0].xs, kv[0][1].xs))
        ]
    if res.violating_up_set is not None:
        obj["violating_up_set"] = [p.to_json() for p in res.violating_up_set]
        obj["lhs_up_mass"] = str(res.lhs_up_mass)
        obj["rhs_up_mass"] = str(res.rhs_up_mass)
    _emit(args, _json_text(obj))
    return 0 if res.holds else 2


def cmd_theorem1(args) -> int:
    model = _model_from_args(args)
    report = verify_theorem1(
        model,
        _parse_sites(args.A),
        _parse_sites(args.B),
        _parse_sites(args.G),
        threads=args.threads,
        want_certificates=args.certificates,
    )
    return _emit_report(args, report)


def cmd_prop31(args) -> int:
    model = _model_from_args(args)
    A = _parse_sites(args.A)
    B = _parse_sites(args.B)
    if not args.tau3:
        raise UsageError("prop31 needs --tau3")
    m = A[0].y if A else 0
    report = verify_proposition31(
        model,
        _parse_path(args.tau1, m) if args.tau1 else Sentinel.LEFT_INFINITE,
        _parse_path(args.tau2, m) if args.tau2 else Sentinel.RIGHT_INFINITE,
        _parse_path(args.tau3, m),
        A,
        B,
        threads=args.threads,
    )
    return _emit_report(args, report)


def cmd_corollary2(args) -> int:
    model = _model_from_args(args)
    extra = _parse_sites([args.extra])
    report = verify_corollary2(
        model,
        _parse_sites(args.A),
        _parse_sites(args.B),
        extra[0],
        args.side,
        args.at,
        threads=args.threads,
    )
    return _emit_report(args, report)


def cmd_chain(args) -> int:
    model = _model_from_args(args)
    A = _parse_sites(args.A)
    B = _parse_sites(args.B)
    G = _parse_sites(args.G)
    seed = _seed(args)
    if args.format == "csv":
        m, n = A[0].y, B[0].y
        whole = Region.whole(m, n)
        sup = support_for(model, whole, A, B)
        if G:
            sub = support_for(model, strictly_left_region(G, m, n), A, B)
            chain = CoupledChain(model, sup, sub, seed=seed)
            fields = ["step", "gamma_left_xs", "gamma_right_xs",
                      "xi_gamma_left_xs", "xi_gamma_right_xs"]
        else:
            chain = ResamplingChain(model, sup, seed=seed)
            fields = ["step", "gamma_left_xs", "gamma_right_xs"]
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
        writer.writeheader()
        for row in trajectory_rows(chain, args.steps):
            writer.writerow(row)
        _emit(args, buf.getvalue())
        return 0
    report = chain_theorem1_estimate(
        model, A, B, G, steps=args.steps, burn_in=args.burn_in, seed=seed
    )
    return _emit_report(args, report)


def cmd_kernel(args) -> int:
    model = _model_from_args(args)
    A = _parse_sites(args.A)
    B = _parse_sites(args.B)
    whole = Region.whole(A[0].y, B[0].y)
    sup = support_for(model, whole, A, B)
    ker = exact_kernel(model, sup)
    if args.format == "csv":
        if len(ker.states) > 4096:
            raise UsageError("dense CSV export is capped at 4096 crossing states")
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["state"] + [str(s) for s in ker.states])
        for bits, row in zip(ker.states, ker.matrix):
            writer.writerow([bits] + [repr(float(v)) for v in row])
        _emit(args, buf.getvalue())
        return 0
    states, pi = conditional_stationary(model, sup)
    obj = {
        "states": ker.states,
        "size": len(ker.states),
        "invariance_tv": invariance_gap_tv(model, sup),
        "stationary": [repr(float(v)) for v in pi],
    }
    if len(ker.states) <= 64:
        obj["matrix"] = [[repr(float(v)) for v in row] for row in ker.matrix]
    _emit(args, _json_text(obj))
    return 0


def cmd_lemma61(args) -> int:
    model = _model_from_args(args)
    report = verify_lemma61(
        model,
        _parse_sites(args.A),
        _parse_sites(args.B1),
        _parse_sites(args.B2),
        _parse_sites(args.B3),
        method=args.method,
        budget=args.budget,
        seed=_seed(args),
        threads=args.threads,
    )
    return _emit_report(args, report)


def cmd_corr62(args) -> int:
    model = _model_from_args(args)
    report = verify_corollary62(
        model,
        _parse_sites(args.A),
        _parse_sites(args.B1),
        _parse_sites(args.B2),
        _parse_sites(args.B3),
        method=args.method,
        budget=args.budget,
        seed=_seed(args),
        threads=args.threads,
    )
    return _emit_report(args, report)


def cmd_corr63(args) -> int:
    model = _model_from_args(args)
    report = verify_corollary63(
        model,
        args.n,
        y_values=args.ys,
        method=args.method,
        budget=args.budget,
        seed=_seed(args),
        threads=args.threads,
    )
    if (args.format or "json") == "csv":
        rec = report.records[0]
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["y", "probability"])
        for y, v in rec.values:
            writer.writerow([y, repr(float(Fraction(v))) if isinstance(v, str) else repr(v)])
        _emit(args, buf.getvalue())
        return 0 if rec.holds else 2
    return _emit_report(args, report)


def cmd_render(args) -> int:
    model = _model_from_args(args)
    A = _parse_sites(args.A)
    B = _parse_sites(args.B)
    region = _region_from_args(args, model, A, B)
    sup = support_for(model, region, A, B)
    rng = np.random.default_rng(_seed(args))
    bits = int(sample_bits(model, sup, 1, rng)[0])
    svg = render_svg(Configuration(sup, bits))
    _emit(args, svg)
    return 0


HANDLERS = {
    "paths": cmd_paths,
    "exact": cmd_exact,
    "dominance": cmd_dominance,
    "theorem1": cmd_theorem1,
    "prop31": cmd_prop31,
    "corollary2": cmd_corollary2,
    "chain": cmd_chain,
    "kernel": cmd_kernel,
    "lemma61": cmd_lemma61,
    "corr62": cmd_corr62,
    "corr63": cmd_corr63,
    "render": cmd_render,
}


def cmd_job(args) -> int:
    with open(args.jobfile) as fh:
        job = json.load(fh)
    command = job.get("command")
    if command not in HANDLERS:
        raise UsageError(f"job command {command!r} unknown")
    argv = [command]
    geo = job.get("geometry", {})

    def push_sites(flag, key):
        pts = geo.get(key)
        if pts:
            argv.append(flag)
            argv.extend(f"{x},{y}" for x, y in pts)

    push_sites("--A", "A")
    push_sites("--B", "B")
    push_sites("--G", "G")
    push_sites("--B1", "B1")
    push_sites("--B2", "B2")
    push_sites("--B3", "B3")
    for key in ("tau1", "tau2", "tau3"):
        if geo.get(key):
            argv.extend([f"--{key}", geo[key]])
    if geo.get("extra"):
        x, y = geo["extra"]
        argv.extend(["--extra", f"{x},{y}"])
    for key in ("side", "at"):
        if geo.get(key):
            argv.extend([f"--{key}", geo[key]])
    if geo.get("n") is not None:
        argv.extend(["--n", str(geo["n"])])
    if job.get("model") is not None:
        import tempfile

        tmp = tempfile.NamedTemporaryFile(
            "w", suffix=".json", delete=False, prefix="perco-model-"
        )
        json.dump(job["model"], tmp)
        tmp.close()
        argv.extend(["--model", tmp.name])
    if job.get("budget") is not None:
        argv.extend(["--budget", str(job["budget"])])
    if job.get("steps") is not None:
        argv.extend(["--steps", str(job["steps"])])
    if job.get("burn_in") is not None:
        argv.extend(["--burn-in", str(job["burn_in"])])
    seed = args.seed if args.seed is not None else job.get("seed")
    if seed is not None:
        argv.extend(["--seed", str(seed)])
    output = job.get("output", {})
    out = args.out or output.get("path")
    if out:
        argv.extend(["--out", out])
    fmt = args.format or output.get("format")
    if fmt:
        argv.extend(["--format", fmt])
    return main(argv)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "job":
            return cmd_job(args)
        return HANDLERS[args.command](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (LatticeError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
