"""Acceptance criteria, one test each.

Every test records a ``CRITERION k: PASS|FAIL ...`` line that the terminal
summary prints in order, then asserts.  Run standalone with
``python3 tests/test_acceptance.py``.
"""

import time

import numpy as np
import pytest

from kslab import cli
from kslab.audit import DEFAULT_AUDIT_STATE, identity_cc_check, premise_residuals, run_audit
from kslab.disturb import convergence_sweep, disturbance, expectation_shift
from kslab.kscons import fantasy_unsat, make_family, relation_suite, two_dof_check, weyl_check
from kslab.lattice import mixture
from kslab.mermin import (
    assignment_search,
    bell_eps_product_check,
    born_rule_check,
    mermin_relations_check,
    standard_angle_sequence,
)
from kslab.opalg import compose, dense_materialize, power, sign_projections, sym_product
from kslab.states import build_states

from oracles import brute_force_fantasy, delta_dense, family_dense, sym

N_VALUES = (1, 2, 4, 8)


@pytest.fixture
def record(pytestconfig):
    def _record(k, ok, detail):
        pytestconfig.acceptance_lines.append(f"CRITERION {k}: {'PASS' if ok else 'FAIL'} {detail}")
        return ok

    return _record


def test_criterion_01_exact_relations(record):
    t0 = time.perf_counter()
    worst, nonzero = 0.0, []
    for n in N_VALUES:
        fam = make_family(1024, n, 1, 1.0)
        states = build_states(fam.cfg)
        assert len(states) == 5
        table = dict(relation_suite(fam, states))
        nonzero.append(table.pop("comm_A2n_B1"))
        table.update(weyl_check(fam, states))
        worst = max(worst, max(table.values()))
    elapsed = time.perf_counter() - t0
    ok = worst < 1e-10 and elapsed < 30
    record(1, ok, f"max residual {worst:.3g} (< 1e-10), [A2n,B1] min {min(nonzero):.3g} reported, {elapsed:.2f}s (< 30s)")
    assert ok


def test_criterion_02_disturbance_convergence(record):
    ns = [2, 4, 8, 16, 32]
    sweep = convergence_sweep(ns, k_max=4)
    peaks = sweep.max_delta(1)
    vals = [peaks[n] for n in ns]
    strict = all(b < a for a, b in zip(vals, vals[1:]))
    jitter = True
    for k in range(1, 5):
        for col in ("delta_norm", "product_delta_norm"):
            seq = list(sweep.max_delta(k, col).values())
            jitter &= all(b <= 1.05 * a for a, b in zip(seq, seq[1:]))
    slope = np.polyfit(np.log(ns), np.log(vals), 1)[0]

    dense_err = 0.0
    for n in (1, 2, 4):
        fam = make_family(256, n)
        d = family_dense(256, n)
        psi = np.stack([s.amplitudes for s in build_states(fam.cfg)], axis=1)
        for k in range(1, 5):
            ref = np.linalg.norm(delta_dense(np.linalg.matrix_power(d["B1"], k), d["E2"]) @ psi, axis=0)
            got = np.linalg.norm(disturbance(power(fam.B1, k), fam.E2.as_list()).apply(psi), axis=0)
            dense_err = max(dense_err, float(np.max(np.abs(got - ref))))
    ok = strict and jitter and -0.75 <= slope <= -0.25 and dense_err < 1e-10
    record(
        2,
        ok,
        "peaks " + ", ".join(f"{v:.4f}" for v in vals)
        + f"; slope {slope:.3f} in [-0.75,-0.25]; dense diff {dense_err:.2g} (< 1e-10)",
    )
    assert ok


def test_criterion_03_symmetrized_disturbance(record):
    worst = 0.0
    for n in N_VALUES:
        fam = make_family(1024, n)
        table = premise_residuals(fam, build_states(fam.cfg), k_max=4)
        worst = max(worst, max(v for key, v in table.items() if key.startswith("sym_disturbance[")))
    sweep = convergence_sweep([2, 16], k_max=4)
    worst = max(worst, max(r.sym_delta_norm for r in sweep.rows))
    ok = worst < 1e-10
    record(3, ok, f"max ||Delta((A o B)^k; A) psi|| over k<=4 = {worst:.3g} (< 1e-10)")
    assert ok


def test_criterion_04_identity_cc(record):
    lib = 0.0
    for n in N_VALUES:
        fam = make_family(1024, n)
        lib = max(lib, identity_cc_check(fam, build_states(fam.cfg)))
    dense = 0.0
    for n in (1, 2, 4):
        d = family_dense(256, n)
        A1, A2, B1, B2 = d["A1n"], d["A2n"], d["B1"], d["B2n"]
        ref = sym(B1 @ B2, A1 @ A2) + sym(B1, A2) @ B2 @ A1
        f = make_family(256, n)
        got = dense_materialize(
            sym_product(compose(f.B1, f.B2n), compose(f.A1n, f.A2n)) + compose(sym_product(f.B1, f.A2n), f.B2n, f.A1n)
        )
        dense = max(dense, float(np.max(np.abs(ref))), float(np.max(np.abs(got - ref))))
    ok = lib < 1e-10 and dense < 1e-10
    record(4, ok, f"structured residual {lib:.3g}, dense residual/agreement {dense:.3g} (< 1e-10)")
    assert ok


def test_criterion_05_expectation_shift(record):
    worst, largest = 0.0, 0.0
    for n in N_VALUES:
        fam = make_family(1024, n)
        states = build_states(fam.cfg)
        EAA = sign_projections(fam.A_product()).as_list()
        for rho in states + [mixture(states)]:
            for k in range(1, 5):
                for proj, B in ((fam.E2.as_list(), power(fam.B1, k)), (EAA, power(fam.B_product(), k))):
                    direct, via = expectation_shift(rho, proj, B)
                    worst = max(worst, abs(direct - via))
                    largest = max(largest, abs(direct))
    ok = worst < 1e-11
    record(5, ok, f"max |direct - via_delta| {worst:.3g} (< 1e-11); largest shift {largest:.3g}")
    assert ok


def test_criterion_06_end_to_end_audit(record):
    t0 = time.perf_counter()
    rep = run_audit(N=4096, n=8, delta=0.05, states=DEFAULT_AUDIT_STATE)
    elapsed = time.perf_counter() - t0
    c = rep.certificate
    ok = rep.passed and rep.epsilon > 0 and c.contradiction and c.lower_gap > c.upper_gap and elapsed < 60
    record(
        6,
        ok,
        f"verdict {'pass' if rep.passed else 'fail'}, eps {rep.epsilon:.5f}, "
        f"lower_gap {c.lower_gap:.5f} > upper_gap {c.upper_gap:.5f}, {elapsed:.2f}s (< 60s)",
    )
    assert ok


def test_criterion_07_peres_mermin(record):
    t0 = time.perf_counter()
    worst = max(mermin_relations_check().values())
    ref = assignment_search()
    elapsed = time.perf_counter() - t0
    ok = worst < 1e-14 and ref.consistent == 0 and ref.total == 16 and elapsed < 1
    record(7, ok, f"max residual {worst:.3g} (< 1e-14), {ref.consistent}/{ref.total} consistent, {elapsed:.3f}s (< 1s)")
    assert ok


def test_criterion_08_two_dof(record):
    table = two_dof_check(128, 128, 0, 0)
    worst = max(table.values())
    ok = len(table) == 6 and worst < 1e-10
    record(8, ok, f"{len(table)} residuals, max {worst:.3g} (< 1e-10)")
    assert ok


def test_criterion_09_fantasy_equations(record):
    t0 = time.perf_counter()
    cert = fantasy_unsat(50)
    elapsed = time.perf_counter() - t0
    small = brute_force_fantasy(8)
    ok = cert.unsat and bool(cert.parity_argument) and not small and elapsed < 1
    record(
        9,
        ok,
        f"parity certificate present, {cert.quadruples_scanned} quadruples scanned, "
        f"{len(cert.consistent_quadruples)} consistent, {elapsed:.3f}s (< 1s)",
    )
    assert ok


def test_criterion_10_bell_model(record):
    rows = born_rule_check(100_000, 20, seed=0)
    zmax = max(r[4] for r in rows)
    n_hat, dirs = standard_angle_sequence()
    chk = bell_eps_product_check(n_hat, dirs, 0.3, 100_000, seed=0)
    ok = len(rows) == 20 and zmax <= 4 and chk.nondecreasing and chk.pass_rates[-1] >= 0.9
    record(
        10,
        ok,
        f"max |z| {zmax:.2f} (<= 4) over {len(rows)} pairs; eps-product rates "
        + ", ".join(f"{r:.4f}" for r in chk.pass_rates)
        + " (nondecreasing, last >= 0.9)",
    )
    assert ok


DETERMINISM_RUNS = [
    ["check-relations", "--n", "2", "--grid", "512"],
    ["sweep-disturbance", "--n-list", "2,4", "--k-max", "2"],
    ["audit", "--n", "4", "--grid", "1024", "--k-max", "1"],
    ["mermin"],
    ["bell", "--seed", "7", "--samples", "20000", "--pairs", "4"],
    ["two-dof", "--grid", "64"],
    ["fantasy-check", "--bound", "10"],
]


def test_criterion_11_determinism(record, tmp_path, capsys):
    mismatched = []
    for argv in DETERMINISM_RUNS:
        blobs, configs = [], []
        for rep in (0, 1):
            paths = ["--out", str(tmp_path / f"r{rep}.csv"), "--json", str(tmp_path / f"r{rep}.json")]
            cfg = cli.RunConfig.from_argv(argv + paths)
            assert cli.execute(cfg) == 0, argv
            configs.append((cfg.command, cfg.params, cfg.seed))
            blobs.append(((tmp_path / f"r{rep}.csv").read_bytes(), (tmp_path / f"r{rep}.json").read_bytes()))
        assert configs[0] == configs[1]
        if blobs[0] != blobs[1]:
            mismatched.append(argv[0])
    capsys.readouterr()
    ok = not mismatched
    record(11, ok, f"{len(DETERMINISM_RUNS)} commands run twice, byte mismatches: {mismatched or 'none'}")
    assert ok


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
