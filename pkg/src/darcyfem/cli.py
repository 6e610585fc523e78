"""Command-line convergence studies on the heterogeneous benchmark.

Typical invocations:

    darcyfem --method cgls --order 1 --interface constrained --meshes 8,16,32,64
    darcyfem --method galerkin --order 2 --meshes 4,8,16,32
    darcyfem --method mgls --order 1 --meshes 8 --dump-fields

Writes convergence.csv (or --out) with one row per mesh; rates occupy the
finer row of each consecutive mesh pair and the coarsest row leaves them
empty.  --dump-fields additionally writes fields_n{N}.csv with nodal values;
in the constrained interface modes every interface node appears twice, once
per side.  The DARCYFEM_NUM_THREADS environment variable (default 1) allows
solving the meshes of a study concurrently; output is identical either way.

Exit codes: 0 success, 1 configuration error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import linsolve
from .dg import DGParams, default_beta0
from .verification import (INTERFACE_MODES, MIXED_METHODS, ErrorReport,
                           crumpton_problem, l2_errors, solve_single)

CSV_HEADER = ("method,order,interface_mode,n,h,err_p,err_u,err_divu,"
              "rate_p,rate_u,rate_divu")
METHODS = ("galerkin", "mgls", "hvm", "cgls", "dg")


class _CliError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _CliError(message)


@dataclass
class RunConfig:
    method: str
    order: int
    sizes: list
    gamma: float
    interface_mode: str
    dg_alpha: float | None
    dg_beta0: float | None
    out: Path
    dump_fields: bool

    def validate(self):
        if self.method not in METHODS:
            raise _CliError(f"unknown method {self.method!r}")
        if self.order not in (1, 2):
            raise _CliError(f"order must be 1 or 2, got {self.order}")
        if not self.sizes or any(b <= a for a, b in
                                 zip(self.sizes, self.sizes[1:])):
            raise _CliError(
                f"mesh sizes must be strictly increasing, got {self.sizes}")
        if any(s < 1 for s in self.sizes):
            raise _CliError("mesh sizes must be positive")
        if self.gamma <= 0.0:
            raise _CliError(f"gamma must be positive, got {self.gamma}")
        if self.interface_mode not in INTERFACE_MODES:
            raise _CliError(f"unknown interface mode {self.interface_mode!r}")
        if self.interface_mode != "continuous" and \
                self.method not in MIXED_METHODS:
            raise _CliError(
                "constrained interface modes apply only to mgls/hvm/cgls")
        if self.method != "dg" and (self.dg_alpha is not None
                                    or self.dg_beta0 is not None):
            raise _CliError("--dg-alpha/--dg-beta0 apply only to --method dg")
        if self.dump_fields and self.method not in MIXED_METHODS:
            raise _CliError("--dump-fields applies only to mgls/hvm/cgls")

    def dg_params(self):
        if self.method != "dg":
            return None
        alpha = -1.0 if self.dg_alpha is None else self.dg_alpha
        beta0 = default_beta0(self.order) if self.dg_beta0 is None \
            else self.dg_beta0
        return DGParams(alpha=alpha, beta0=beta0)


def build_parser() -> _Parser:
    parser = _Parser(prog="darcyfem", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--method", required=True, choices=METHODS)
    parser.add_argument("--order", type=int, default=1)
    parser.add_argument("--meshes", default="8,16,32,64",
                        help="comma-separated elements per direction")
    parser.add_argument("--gamma", type=float, default=1.0,
                        help="conductivity contrast of the benchmark")
    parser.add_argument("--interface", default="continuous",
                        choices=INTERFACE_MODES, dest="interface_mode")
    parser.add_argument("--dg-alpha", type=float, default=None)
    parser.add_argument("--dg-beta0", type=float, default=None)
    parser.add_argument("--out", default="convergence.csv",
                        help="output CSV path")
    parser.add_argument("--dump-fields", action="store_true")
    return parser


def parse_config(argv) -> RunConfig:
    args = build_parser().parse_args(argv)
    try:
        sizes = [int(tok) for tok in args.meshes.split(",") if tok.strip()]
    except ValueError as exc:
        raise _CliError(f"bad --meshes value {args.meshes!r}") from exc
    config = RunConfig(
        method=args.method, order=args.order, sizes=sizes, gamma=args.gamma,
        interface_mode=args.interface_mode, dg_alpha=args.dg_alpha,
        dg_beta0=args.dg_beta0, out=Path(args.out),
        dump_fields=args.dump_fields,
    )
    config.validate()
    return config


def _fmt(value) -> str:
    return "" if value is None else repr(float(value))


def write_convergence_csv(path: Path, config: RunConfig, reports):
    lines = [CSV_HEADER]
    for r in reports:
        lines.append(",".join([
            config.method, str(config.order), config.interface_mode,
            str(r.n), _fmt(r.h), _fmt(r.err_p), _fmt(r.err_u),
            _fmt(r.err_divu), _fmt(r.rate_p), _fmt(r.rate_u),
            _fmt(r.rate_divu),
        ]))
    path.write_text("\n".join(lines) + "\n")


def write_fields_csv(path: Path, run, problem, constrained: bool):
    """Nodal field dump: x,y,ux,uy,p,side.  Constrained modes emit interface
    nodes once per side with the recovered two-sided velocity."""
    mesh = run.mesh
    nodal = run.solution.nodal
    sides = np.where(mesh.nodes[:, 0] < (mesh.interface_x
                                         if mesh.interface_x is not None
                                         else np.inf), 1, 2)
    iface = set(int(i) for i in mesh.interface_nodes)
    traces = {tr.node: tr for tr in run.solution.interface_traces()} \
        if constrained else {}
    lines = ["x,y,ux,uy,p,side"]
    for node in range(mesh.n_nodes):
        x, y = mesh.nodes[node]
        if node in traces:
            tr = traces[node]
            for side, state in ((1, tr.side1), (2, tr.side2)):
                lines.append(",".join([repr(float(x)), repr(float(y)),
                                       repr(float(state[0])),
                                       repr(float(state[1])),
                                       repr(float(state[2])), str(side)]))
            continue
        side = 2 if node in iface else int(sides[node])
        ux, uy, p = nodal[node]
        lines.append(",".join([repr(float(x)), repr(float(y)),
                               repr(float(ux)), repr(float(uy)),
                               repr(float(p)), str(side)]))
    path.write_text("\n".join(lines) + "\n")


def run_study(config: RunConfig):
    problem = crumpton_problem(config.gamma)
    dg_params = config.dg_params()

    def one(n):
        run = solve_single(config.method, config.order, n, problem,
                           interface_mode=config.interface_mode,
                           dg_params=dg_params)
        errs = l2_errors(run.mesh, run.solution, problem)
        return run, errs

    workers = int(os.environ.get("DARCYFEM_NUM_THREADS", "1"))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one, config.sizes))
    else:
        results = [one(n) for n in config.sizes]

    reports = []
    for n, (run, errs) in zip(config.sizes, results):
        reports.append(ErrorReport(n=n, h=2.0 / n, err_p=errs.err_p,
                                   err_u=errs.err_u, err_divu=errs.err_divu))
    for prev, cur in zip(reports, reports[1:]):
        ratio = np.log(prev.h / cur.h)
        for field in ("p", "u", "divu"):
            e0 = getattr(prev, f"err_{field}")
            e1 = getattr(cur, f"err_{field}")
            if e0 > 0.0 and e1 > 0.0:
                setattr(cur, f"rate_{field}", float(np.log(e0 / e1) / ratio))
    return results, reports, problem


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        config = parse_config(argv)
    except _CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    try:
        results, reports, problem = run_study(config)
    except (ValueError, _CliError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except linsolve.SolverError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    out = config.out
    if out.parent and not out.parent.exists():
        out.parent.mkdir(parents=True, exist_ok=True)
    write_convergence_csv(out, config, reports)
    if config.dump_fields:
        constrained = config.interface_mode != "continuous"
        for n, (run, _) in zip(config.sizes, results):
            write_fields_csv(out.parent / f"fields_n{n}.csv", run, problem,
                             constrained)
    for r in reports:
        rates = ",".join(_fmt(v) for v in (r.rate_p, r.rate_u, r.rate_divu))
        print(f"n={r.n:4d} h={r.h:g} err_p={r.err_p:.6e} "
              f"err_u={r.err_u:.6e} err_divu={r.err_divu:.6e} rates=[{rates}]")
    return 0


if __name__ == "__main__":
    sys.exit(main())
