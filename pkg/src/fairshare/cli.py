"""Command-line entry point.

Exit codes: 0 success, 1 usage error, 2 solver or oracle failure. Progress goes to
standard error; machine-readable output goes to standard output or ``--out``.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path as FsPath

from . import __version__, admm, harness, oracle
from .errors import ProxConvergenceError
from .instance import InstanceError, read_instance, read_partition, write_instance, write_partition
from .penalty import BoundError, penalty_bound
from .topology import generate_barabasi_albert, generate_fat_tree, generate_instance, partition_domains

log = logging.getLogger("fairshare")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _int_list(text: str) -> tuple[int, ...]:
    """``1,2,4`` or ``0:15`` (half-open range)."""
    try:
        if ":" in text:
            a, b = text.split(":")
            return tuple(range(int(a), int(b)))
        return tuple(int(t) for t in text.split(",") if t)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected integers like 1,2,4 or 0:15, got {text!r}")


def _float_list(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(t) for t in text.split(",") if t)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _positive(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="fairshare", description="Distributed alpha-fair bandwidth allocation.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("generate", help="generate a synthetic instance")
    g.add_argument("--topology", choices=("ba", "fat-tree"), default="ba")
    g.add_argument("--nodes", type=int, default=30)
    g.add_argument("--min-degree", type=int, default=4)
    g.add_argument("--pods", type=int, default=4)
    g.add_argument("--requests", type=int)
    g.add_argument("--paths", type=_int_list, default=(1, 4), help="min,max paths per request")
    g.add_argument("--capacity", type=_positive, default=100.0)
    g.add_argument("--link-mode", choices=("undirected", "directed"), default="undirected")
    g.add_argument("--alpha", type=_positive, default=1.0)
    g.add_argument("--seed", type=int, required=True)
    g.add_argument("--out")

    pa = sub.add_parser("partition", help="split links into connected domains")
    pa.add_argument("--instance", required=True)
    pa.add_argument("--domains", type=int, required=True)
    pa.add_argument("--seed", type=int, required=True)
    pa.add_argument("--no-align", action="store_true", help="do not keep request first hops together")
    pa.add_argument("--out")

    s = sub.add_parser("solve", help="run FD-ADMM and print the trace CSV")
    _instance_flags(s)
    s.add_argument("--tol", type=_positive, default=1e-2)
    s.add_argument("--max-iters", type=int, default=10_000)
    s.add_argument("--theta", type=float, help="switching price; the baseline is --baseline or zero")
    s.add_argument("--baseline", help="JSON map path id -> incumbent allocation")
    s.add_argument("--allocation", help="write the final feasible allocation here (JSON)")
    s.add_argument("--pairs", help="write per-pair float counts here (CSV)")
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--out")

    c = sub.add_parser("certify", help="certify an allocation, or a reference solve")
    c.add_argument("--instance", required=True)
    c.add_argument("--alpha", type=_positive)
    c.add_argument("--solution", help="JSON map path id -> allocation; default: solve a reference")
    c.add_argument("--tol", type=_positive, default=1e-6)
    c.add_argument("--out")

    b = sub.add_parser("bound", help="print a_r, rho_r, d_r and lambda*")
    b.add_argument("--instance", required=True)
    b.add_argument("--alpha", type=_positive)
    b.add_argument("--out")

    for name, mode in (("sweep-domains", "convergence"), ("sweep-theta", "reconfig")):
        e = sub.add_parser(name, help=f"{mode} experiment")
        e.set_defaults(mode=mode)
        e.add_argument("--config", help="JSON experiment config; flags override its fields")
        e.add_argument("--instance", help="instance file (default: generated BA(30,4), 40 requests)")
        e.add_argument("--alpha", type=_positive)
        e.add_argument("--domains", type=_int_list)
        e.add_argument("--seed", type=_int_list, help="seeds, e.g. 0:15")
        e.add_argument("--lambda", dest="lam", type=_positive)
        e.add_argument("--tol", type=_positive)
        e.add_argument("--max-iters", type=int)
        e.add_argument("--theta", type=_float_list)
        e.add_argument("--epsilon", type=_positive)
        e.add_argument("--workers", type=int)
        e.add_argument("--out", required=True, help="output directory")
    return p


def _instance_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--instance", required=True)
    p.add_argument("--partition")
    p.add_argument("--domains", type=int, default=1)
    p.add_argument("--seed", type=int, default=0, help="partition seed when --domains > 1")
    p.add_argument("--alpha", type=_positive)
    p.add_argument("--lambda", dest="lam", type=_positive)


def _load(args):
    inst = read_instance(args.instance)
    if getattr(args, "alpha", None) is not None:
        inst = inst.with_alpha(args.alpha)
    return inst


def _emit(text: str, out: str | None) -> None:
    if out:
        FsPath(out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_generate(args) -> int:
    lo, hi = (args.paths + args.paths)[:2] if len(args.paths) == 1 else args.paths[:2]
    if args.topology == "ba":
        if args.requests is None:
            raise UsageError("--requests is required for ba topologies")
        topo = generate_barabasi_albert(args.nodes, args.min_degree, args.seed)
    else:
        topo = generate_fat_tree(args.pods)
    inst = generate_instance(topo, args.requests, (lo, hi), args.seed, args.alpha, args.capacity,
                             args.link_mode)
    log.info("generated %d links, %d requests, %d paths", len(inst.links), len(inst.requests),
             len(inst.paths))
    write_instance(inst, args.out or sys.stdout)
    return 0


def cmd_partition(args) -> int:
    inst = read_instance(args.instance)
    part = partition_domains(inst, args.domains, args.seed, align_sources=not args.no_align)
    write_partition(part, args.out or sys.stdout)
    return 0


def _partition_for(args, inst):
    if args.partition:
        return read_partition(args.partition, inst)
    return partition_domains(inst, args.domains, args.seed)


def cmd_solve(args) -> int:
    inst = _load(args)
    part = _partition_for(args, inst)
    baseline = None
    if args.baseline:
        baseline = json.loads(FsPath(args.baseline).read_text())
    state = admm.init_state(inst, part, args.lam, theta=args.theta, baseline=baseline,
                            workers=args.workers)
    if args.theta is not None and baseline is None:
        admm.set_switching(state, args.theta, [0.0] * len(state.layout.path_ids))
    log.info("solving with %d domains, lambda=%.6g", part.num_domains, state.lam)
    trace = admm.solve(state, admm.StopRule(args.tol, args.max_iters))
    log.info("%s after %d rounds", "converged" if trace.converged else "not converged", trace.iterations)
    _emit(trace.to_csv(), args.out)
    if args.pairs:
        FsPath(args.pairs).write_text(trace.pairs_csv())
    if args.allocation:
        FsPath(args.allocation).write_text(
            json.dumps(admm.path_values(state, trace.feasible), indent=2, sort_keys=True) + "\n")
    return 0


def cmd_certify(args) -> int:
    inst = _load(args)
    if args.solution:
        x = json.loads(FsPath(args.solution).read_text())
        tol = 1e-3 * sum(r.weight for r in inst.requests)
        cert = oracle.fairness_certificate(inst, x, tolerance=tol)
    else:
        cert = oracle.solve_reference(inst, args.tol).certificate
    doc = {"certified": cert.certified, "violation": cert.violation, "tolerance": cert.tolerance,
           "aggregates": cert.candidate_y}
    _emit(json.dumps(doc, indent=2, sort_keys=True) + "\n", args.out)
    return 0 if cert.certified else 2


def cmd_bound(args) -> int:
    inst = _load(args)
    pb = penalty_bound(inst)
    lines = ["request,a,rho,d"]
    lines += [f"{r},{a!r},{rho!r},{d!r}" for r, a, rho, d in pb.table()]
    lines.append(f"lambda_star,{pb.lambda_star!r}")
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def _experiment_config(args) -> harness.ExperimentConfig:
    doc = json.loads(FsPath(args.config).read_text()) if args.config else {}
    doc["mode"] = args.mode
    if args.instance:
        doc["instance"] = {"file": args.instance}
    doc.setdefault("instance", {"kind": "ba", "nodes": 30, "requests": 40})
    for flag, key in (("alpha", "alpha"), ("domains", "domains"), ("seed", "seeds"), ("lam", "lam"),
                      ("tol", "residual_threshold"), ("max_iters", "max_iters"), ("theta", "thetas"),
                      ("epsilon", "epsilon"), ("workers", "workers")):
        value = getattr(args, flag)
        if value is not None:
            doc[key] = value
    try:
        return harness.ExperimentConfig.from_dict(doc)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"bad experiment config: {exc}")


def cmd_sweep(args) -> int:
    cfg = _experiment_config(args)
    if cfg.mode == "convergence":
        res = harness.run_convergence(cfg)
        files = {"convergence.csv": res.to_csv(), "cells.csv": res.cells_csv(),
                 "overhead.csv": harness.overhead_csv(harness.overhead_report(res))}
    else:
        sweep = harness.run_reconfig(cfg)
        files = {"reconfig.csv": sweep.to_csv(), "reconfig_summary.csv": sweep.summary_csv()}
    manifest = harness.write_outputs(args.out, cfg, files)
    log.info("wrote %s", manifest)
    return 0


COMMANDS = {
    "generate": cmd_generate,
    "partition": cmd_partition,
    "solve": cmd_solve,
    "certify": cmd_certify,
    "bound": cmd_bound,
    "sweep-domains": cmd_sweep,
    "sweep-theta": cmd_sweep,
}


def _configure_logging() -> None:
    level = os.environ.get("FAIRSHARE_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")


def main(argv=None) -> int:
    _configure_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"fairshare: error: {exc}", file=sys.stderr)
        return 1
    except (InstanceError, OSError, json.JSONDecodeError) as exc:
        print(f"fairshare: error: {exc}", file=sys.stderr)
        return 1
    except (ProxConvergenceError, BoundError, oracle.CertificateError, oracle.ReferenceError) as exc:
        print(f"fairshare: solver failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
