import itertools
import math

import numpy as np
import pytest

from kslab.mermin import (
    Assignment,
    BellModel,
    assignment_search,
    bell_eps_product_check,
    bell_outcome,
    bell_sample,
    born_rule_check,
    mermin_operators,
    mermin_relations_check,
    standard_angle_sequence,
)

from oracles import bell_pass_rate

Z = np.array([0.0, 0.0, 1.0])
X = np.array([1.0, 0.0, 0.0])


def test_relations():
    table = mermin_relations_check()
    assert max(table.values()) < 1e-14
    assert {"comm[A1,A2]", "comm[A1,B2]", "comm[B1,A2]", "comm[B1,B2]", "anti[A1,B1]", "anti[A2,B2]"} <= set(table)


def test_operators_are_exact():
    ops = mermin_operators()
    for M in (ops.A1, ops.A2, ops.B1, ops.B2):
        assert set(np.unique(M.real)) <= {-1.0, 0.0, 1.0}
        assert set(np.unique(M.imag)) <= {-1.0, 0.0, 1.0}
        np.testing.assert_array_equal(M @ M, np.eye(4))


def test_assignment_search_refutes_everything():
    ref = assignment_search()
    assert ref.total == 16 and ref.consistent == 0
    assert ref.operator_sign == -1
    assert len(ref.traces) == 16
    first = ref.traces[0]
    assert "A1:+1, A2:+1, B1:+1, B2:+1" in first
    assert "=+1" in first and "demands -1" in first and first.endswith("inconsistent")


def test_product_equals_its_negation_in_every_branch():
    # independent of the library: the two routes always agree for +-1 values
    for a1, a2, b1, b2 in itertools.product((1, -1), repeat=4):
        route_a = (a1 * a2) * (b1 * b2)
        route_b = (a1 * b2) * (a2 * b1)
        assert route_a == route_b  # yet the operator identity demands route_a == -route_b


def test_assignment_validation():
    with pytest.raises(ValueError):
        Assignment(1, 0, 1, 1)


def test_aligned_outcome_is_certain(rng):
    out = bell_sample(BellModel(Z), Z, rng, size=10_000)
    assert np.all(out == 1)
    assert bell_sample(BellModel(Z), Z, rng) == 1


def test_perpendicular_is_fair(rng):
    samples = 100_000
    out = bell_sample(BellModel(Z), X, rng, size=samples)
    p = np.mean(out == 1)
    assert abs(p - 0.5) <= 4 * math.sqrt(0.25 / samples)


def test_born_rule_over_random_pairs():
    rows = born_rule_check(100_000, 20, seed=7)
    assert len(rows) == 20
    assert max(r[4] for r in rows) <= 4.0
    for _, theta, expected, _, _ in rows:
        assert expected == pytest.approx(math.cos(theta / 2) ** 2)


def test_mean_matches_dot_product(rng):
    m = np.array([math.sin(1.0), 0.0, math.cos(1.0)])
    samples = 100_000
    out = bell_sample(BellModel(Z), m, rng, size=samples)
    mean = out.mean()
    var = 1 - math.cos(1.0) ** 2
    assert abs(mean - math.cos(1.0)) <= 4 * math.sqrt(var / samples)


def test_commuting_directions_obey_product_rule_exactly():
    lam = np.linspace(-0.5, 0.5, 10_001)
    a = np.array([0.3, 0.4, math.sqrt(1 - 0.25)])
    for b, expected in ((a, 1), (-a, -1)):
        prod = bell_outcome(Z, a, lam) * bell_outcome(Z, b, lam)
        assert np.all(prod == expected)


def test_non_unit_vectors_rejected(rng):
    with pytest.raises(ValueError):
        BellModel(np.array([1.0, 1.0, 0.0]))
    with pytest.raises(ValueError):
        bell_sample(BellModel(Z), np.array([0.0, 0.0, 2.0]), rng)


def test_eps_product_trivial_cases():
    a = np.array([math.sin(0.5), 0.0, math.cos(0.5)])
    chk = bell_eps_product_check(Z, [(a, -a), (a, a)], 0.1, 20_000)
    assert chk.pass_rates == (1.0, 1.0)


def test_eps_product_sequence_against_quadrature():
    samples = 100_000
    n_hat, dirs = standard_angle_sequence()
    chk = bell_eps_product_check(n_hat, dirs, 0.3, samples, seed=3)
    assert chk.nondecreasing and chk.pass_rates[-1] >= 0.9
    for (a, b), rate in zip(dirs, chk.pass_rates):
        ref = bell_pass_rate(n_hat, a, b, 0.3)
        assert abs(rate - ref) <= 4 * math.sqrt(max(ref * (1 - ref), 1e-12) / samples)
    # both outcomes differ only for lambda between -|a.n|/2 and -|b.n|/2
    closed = [1 - 0.5 * abs(math.cos(math.pi / 6) - math.cos(math.pi / 6 + t)) for t in chk.angles]
    assert [bell_pass_rate(n_hat, a, b, 0.3) for a, b in dirs] == pytest.approx(closed, abs=1e-9)


def test_eps_product_errors():
    n_hat, dirs = standard_angle_sequence()
    with pytest.raises(ValueError, match="empty"):
        bell_eps_product_check(n_hat, [], 0.3, 10)
    with pytest.raises(ValueError, match="decreasing"):
        bell_eps_product_check(n_hat, dirs[::-1], 0.3, 10)


def test_seeded_runs_repeat():
    n_hat, dirs = standard_angle_sequence()
    a = bell_eps_product_check(n_hat, dirs, 0.3, 5_000, seed=11)
    b = bell_eps_product_check(n_hat, dirs, 0.3, 5_000, seed=11)
    assert a == b
    assert born_rule_check(1000, 3, seed=2) == born_rule_check(1000, 3, seed=2)
