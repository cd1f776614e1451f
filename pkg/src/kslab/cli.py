"""Command-line front end.

Exit codes: 0 success, 1 invalid parameters (message names the violated
precondition), 2 a numerical check failed its tolerance.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import audit as audit_mod
from . import disturb, kscons, mermin, report
from .states import STANDARD_FAMILY, parse_state_spec

EXACT_TOL = 1e-10
SPIN_TOL = 1e-14


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _n_list(text: str) -> list:
    try:
        vals = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"--n-list must be comma-separated integers, got {text!r}")
    if not vals:
        raise argparse.ArgumentTypeError("--n-list is empty")
    return vals


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="kslab", description="Position/momentum epsilon-obstruction laboratory.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def family_flags(sp, grid_default=2048, n_default=4):
        sp.add_argument("--n", type=int, default=n_default, help="family index n >= 1")
        sp.add_argument("--c", type=int, default=1, help="commensurability multiplier c >= 1")
        sp.add_argument("--a", type=float, default=1.0, help="free scale a > 0")
        sp.add_argument("--grid", type=int, default=grid_default, help="lattice size N")

    def state_flags(sp):
        sp.add_argument(
            "--state",
            action="append",
            default=None,
            help="gaussian:x0=..,p0=..,sigma=.. (box-relative; repeatable)",
        )

    def out_flags(sp, svg=False):
        sp.add_argument("--out", help="CSV output path")
        sp.add_argument("--json", help="JSON output path")
        if svg:
            sp.add_argument("--svg", help="SVG plot output path")

    sp = sub.add_parser("check-relations", help="commutation, anticommutation and Weyl/shift residuals")
    family_flags(sp)
    state_flags(sp)
    out_flags(sp)

    sp = sub.add_parser("sweep-disturbance", help="disturbance norms across family indices")
    sp.add_argument("--n-list", type=_n_list, default=[2, 4, 8, 16, 32])
    sp.add_argument("--c", type=int, default=1)
    sp.add_argument("--a", type=float, default=1.0)
    sp.add_argument("--grid", type=int, default=None, help="fixed N for every n (default: resolving rule)")
    sp.add_argument("--k-max", type=int, default=4)
    state_flags(sp)
    out_flags(sp, svg=True)

    sp = sub.add_parser("audit", help="end-to-end obstruction audit")
    family_flags(sp)
    sp.add_argument("--delta", type=float, default=0.05)
    sp.add_argument("--k-max", type=int, default=4)
    state_flags(sp)
    out_flags(sp)

    sp = sub.add_parser("mermin", help="two-spin obstruction and exhaustive assignment search")
    out_flags(sp)

    sp = sub.add_parser("bell", help="Monte-Carlo checks of the single-spin noncontextual model")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--samples", type=int, default=100_000)
    sp.add_argument("--pairs", type=int, default=20, help="random direction pairs for the Born-rule check")
    sp.add_argument("--epsilon", type=float, default=0.3)
    out_flags(sp)

    sp = sub.add_parser("two-dof", help="Hermitian two-mode construction")
    sp.add_argument("--grid", type=int, default=128, help="sites per mode")
    sp.add_argument("--m", type=int, default=0)
    sp.add_argument("--n", type=int, default=0)
    out_flags(sp)

    sp = sub.add_parser("fantasy-check", help="no integer solution: parity certificate and scan")
    sp.add_argument("--bound", type=int, default=50)
    out_flags(sp)
    return p


def _check_writable(*paths) -> None:
    for path in paths:
        if not path:
            continue
        parent = Path(path).resolve().parent
        if not parent.is_dir() or not os.access(parent, os.W_OK):
            raise UsageError(f"output path {path!r} is not writable")


def _specs(args):
    if not args.state:
        return STANDARD_FAMILY
    return tuple(parse_state_spec(s) for s in args.state)


def _emit(args, csv_text=None, json_text=None):
    if args.out and csv_text is not None:
        report.write_text(args.out, csv_text)
    if args.json and json_text is not None:
        report.write_text(args.json, json_text)


def cmd_check_relations(args) -> int:
    fam = kscons.make_family(args.grid, args.n, args.c, args.a)
    states = [s.build(fam.cfg) for s in _specs(args)]
    table = dict(kscons.relation_suite(fam, states))
    table.update(kscons.weyl_check(fam, states))
    expected_nonzero = {"comm_A2n_B1"}
    rows, failed = [], []
    for name, value in table.items():
        if name in expected_nonzero:
            status = "reported"
        else:
            status = "pass" if value < EXACT_TOL else "fail"
            if status == "fail":
                failed.append((name, value))
        rows.append((name, value, EXACT_TOL, status))
    _emit(
        args,
        report.csv_text(("name", "residual", "tolerance", "status"), rows),
        report.dumps_json({"n": fam.n, "N": fam.N, "c": fam.c, "a": fam.a, "residuals": table}),
    )
    print(f"n={fam.n} N={fam.N} L={fam.L:.6g}: {len(table)} residuals, {len(failed)} over {EXACT_TOL:g}")
    return _fail(failed)


def _fail(failed) -> int:
    for name, value in failed:
        print(f"FAILED {name}: residual {report.fmt_float(value)}", file=sys.stderr)
    return 2 if failed else 0


def cmd_sweep(args) -> int:
    if args.k_max < 1:
        raise UsageError("--k-max must be >= 1")
    rule = (lambda n: args.grid) if args.grid else None
    rep = disturb.convergence_sweep(args.n_list, args.c, args.a, rule, args.k_max, _specs(args))
    _emit(args, report.disturbance_csv(rep), report.disturbance_json(rep))
    peaks = rep.max_delta(1)
    if args.svg:
        report.emit_plot(
            [("max ||Delta(B1;A2n) psi||", list(peaks.items()))],
            args.svg,
            log_log=True,
            title="disturbance vs family index",
            xlabel="n",
            ylabel="norm",
        )
    for n, v in peaks.items():
        print(f"n={n:>4} N={rep.grids[n]:>7} max||Delta||={v:.6g}")
    print(f"log-log slope {rep.fit[0]:.4f}")
    sym = max(r.sym_delta_norm for r in rep.rows)
    return _fail([("sym_delta_norm", sym)] if sym >= EXACT_TOL else [])


def cmd_audit(args) -> int:
    rep = audit_mod.run_audit(
        N=args.grid, n=args.n, c=args.c, a=args.a, delta=args.delta, k_max=args.k_max, states=_specs(args)
    )
    _emit(args, report.audit_summary_csv(rep), report.audit_json(rep))
    cert = rep.certificate
    print(f"n={rep.n} N={rep.N} delta={rep.delta:g}: epsilon={rep.epsilon:.6g} P(|v1 v2|>3eps)={rep.p_threshold:.6g}")
    print(f"certificate: upper_gap={cert.upper_gap:.6g} lower_gap={cert.lower_gap:.6g} contradiction={cert.contradiction}")
    print(f"verdict: {rep.verdict['overall']}")
    return _fail(list(rep.failures().items()))


def cmd_mermin(args) -> int:
    rel = mermin.mermin_relations_check()
    ref = mermin.assignment_search()
    _emit(
        args,
        report.residuals_csv(rel, SPIN_TOL),
        report.dumps_json(
            {"residuals": rel, "assignments": ref.total, "consistent": ref.consistent, "traces": list(ref.traces)}
        ),
    )
    print(ref.text())
    print(f"consistent assignments: {ref.consistent} of {ref.total}")
    failed = [(k, v) for k, v in rel.items() if v >= SPIN_TOL]
    if ref.consistent:
        failed.append(("consistent_assignments", float(ref.consistent)))
    return _fail(failed)


def cmd_bell(args) -> int:
    if args.samples < 1 or args.pairs < 1:
        raise UsageError("--samples and --pairs must be >= 1")
    born = mermin.born_rule_check(args.samples, args.pairs, args.seed)
    n_hat, dirs = mermin.standard_angle_sequence()
    chk = mermin.bell_eps_product_check(n_hat, dirs, args.epsilon, args.samples, seed=args.seed)
    rows = [("born", i, th, p, ph, z) for i, th, p, ph, z in born]
    rows += [("eps_product", i, th, "", r, "") for i, (th, r) in enumerate(zip(chk.angles, chk.pass_rates))]
    _emit(
        args,
        report.csv_text(("check", "index", "angle", "expected", "empirical", "z"), rows),
        report.dumps_json(
            {
                "seed": args.seed,
                "samples": args.samples,
                "born": [dict(zip(("index", "angle", "expected", "empirical", "z"), r)) for r in born],
                "eps_product": {"epsilon": chk.epsilon, "angles": chk.angles, "pass_rates": chk.pass_rates},
            }
        ),
    )
    worst = max(r[4] for r in born)
    print(f"Born-rule check: max |z| = {worst:.3f} over {len(born)} pairs")
    print("eps-product pass rates: " + ", ".join(f"{r:.4f}" for r in chk.pass_rates))
    failed = []
    if worst > 4:
        failed.append(("born_max_z", worst))
    if not chk.nondecreasing or chk.pass_rates[-1] < 0.9:
        failed.append(("eps_product_final_rate", chk.pass_rates[-1]))
    return _fail(failed)


def cmd_two_dof(args) -> int:
    table = kscons.two_dof_check(args.grid, args.grid, args.m, args.n)
    _emit(args, report.residuals_csv(table, EXACT_TOL), report.dumps_json({"residuals": table}))
    for k, v in table.items():
        print(f"{k:>12} {v:.3e}")
    return _fail([(k, v) for k, v in table.items() if v >= EXACT_TOL])


def cmd_fantasy(args) -> int:
    if args.bound < 1:
        raise UsageError("--bound must be >= 1")
    cert = kscons.fantasy_unsat(args.bound)
    near = kscons.near_solution(4)
    _emit(
        args,
        report.csv_text(
            ("search_bound", "quadruples_scanned", "consistent"),
            [(cert.search_bound, cert.quadruples_scanned, len(cert.consistent_quadruples))],
        ),
        report.dumps_json({**cert.as_dict(), "near_solution_n4": near}),
    )
    print(cert.parity_argument)
    print(
        f"scanned {cert.quadruples_scanned} quadruples with |k|,|l|,|m|,|n| <= {cert.search_bound}: "
        f"{len(cert.consistent_quadruples)} consistent"
    )
    return _fail([("consistent_quadruples", float(len(cert.consistent_quadruples)))] if not cert.unsat else [])


COMMANDS = {
    "check-relations": cmd_check_relations,
    "sweep-disturbance": cmd_sweep,
    "audit": cmd_audit,
    "mermin": cmd_mermin,
    "bell": cmd_bell,
    "two-dof": cmd_two_dof,
    "fantasy-check": cmd_fantasy,
}


OUTPUT_FLAGS = ("out", "json", "svg")


@dataclass(frozen=True)
class RunConfig:
    """One fully parsed invocation.

    ``params`` holds the numeric and state parameters in flag order; ``seed``
    is None for the commands that draw no random numbers.
    """

    command: str
    params: tuple = ()
    outputs: dict = field(default_factory=dict)
    seed: int | None = None

    @classmethod
    def from_argv(cls, argv) -> "RunConfig":
        ns = vars(build_parser().parse_args(argv))
        command = ns.pop("command")
        outputs = {k: ns.pop(k) for k in OUTPUT_FLAGS if k in ns and ns[k] is not None}
        for k in OUTPUT_FLAGS:
            ns.pop(k, None)
        seed = ns.pop("seed", None)
        return cls(command, tuple(ns.items()), outputs, seed)

    def namespace(self) -> argparse.Namespace:
        ns = argparse.Namespace(command=self.command, seed=self.seed, **dict(self.params))
        for k in OUTPUT_FLAGS:
            setattr(ns, k, self.outputs.get(k))
        return ns


def execute(cfg: RunConfig) -> int:
    """Run a parsed configuration; validation errors propagate."""
    _check_writable(*cfg.outputs.values())
    return COMMANDS[cfg.command](cfg.namespace())


def parse_and_dispatch(argv=None) -> int:
    """Run one command; returns the process exit code."""
    try:
        return execute(RunConfig.from_argv(argv))
    except (UsageError, ValueError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main(argv=None) -> int:
    return parse_and_dispatch(argv)


if __name__ == "__main__":
    sys.exit(main())
