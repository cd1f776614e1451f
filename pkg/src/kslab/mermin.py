"""Finite-dimensional comparison cases.

Two spin-1/2 particles carry the four-operator obstruction exactly; a single
spin-1/2 admits Bell's noncontextual model, which also respects the
epsilon-Product Rule.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

__all__ = [
    "SpinOpSet",
    "Assignment",
    "Refutation",
    "BellModel",
    "BellCheck",
    "mermin_operators",
    "mermin_relations_check",
    "assignment_search",
    "bell_outcome",
    "bell_sample",
    "bell_eps_product_check",
    "born_rule_check",
    "standard_angle_sequence",
]

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
I2 = np.eye(2, dtype=complex)


@dataclass(frozen=True, eq=False)
class SpinOpSet:
    A1: np.ndarray
    A2: np.ndarray
    B1: np.ndarray
    B2: np.ndarray


def mermin_operators() -> SpinOpSet:
    """``A_i = sigma_x`` and ``B_i = sigma_y`` on particle ``i``."""
    return SpinOpSet(
        A1=np.kron(SIGMA_X, I2),
        A2=np.kron(I2, SIGMA_X),
        B1=np.kron(SIGMA_Y, I2),
        B2=np.kron(I2, SIGMA_Y),
    )


def _maxabs(M: np.ndarray) -> float:
    return float(np.max(np.abs(M)))


def mermin_relations_check(ops: SpinOpSet | None = None) -> dict:
    """Max-entry residuals of the commutation table and the sign identity."""
    o = ops or mermin_operators()
    eye = np.eye(o.A1.shape[0])
    out = {}
    for name, M in (("A1", o.A1), ("A2", o.A2), ("B1", o.B1), ("B2", o.B2)):
        out[f"hermitian[{name}]"] = _maxabs(M - M.conj().T)
        out[f"involution[{name}]"] = _maxabs(M @ M - eye)
    for x, y in (("A1", "A2"), ("A1", "B2"), ("B1", "A2"), ("B1", "B2")):
        X, Y = getattr(o, x), getattr(o, y)
        out[f"comm[{x},{y}]"] = _maxabs(X @ Y - Y @ X)
    for i in ("1", "2"):
        X, Y = getattr(o, "A" + i), getattr(o, "B" + i)
        out[f"anti[A{i},B{i}]"] = _maxabs(X @ Y + Y @ X)
    out["sign_identity"] = _maxabs(o.A1 @ o.B2 @ o.A2 @ o.B1 + o.A1 @ o.A2 @ o.B1 @ o.B2)
    return out


@dataclass(frozen=True)
class Assignment:
    vA1: int
    vA2: int
    vB1: int
    vB2: int

    def __post_init__(self):
        for v in (self.vA1, self.vA2, self.vB1, self.vB2):
            if v not in (-1, 1):
                raise ValueError(f"values must be +-1, got {v!r}")


@dataclass(frozen=True)
class Refutation:
    total: int
    consistent: int
    operator_sign: int
    traces: tuple = field(repr=False)

    def text(self) -> str:
        return "\n".join(self.traces)


def _operator_sign(o: SpinOpSet) -> int:
    lhs = o.A1 @ o.B2 @ o.A2 @ o.B1
    rhs = o.A1 @ o.A2 @ o.B1 @ o.B2
    for s in (1, -1):
        if np.allclose(lhs, s * rhs, atol=1e-14, rtol=0):
            return s
    raise ValueError("A1 B2 A2 B1 is not +-A1 A2 B1 B2 for these operators")


def assignment_search(ops: SpinOpSet | None = None) -> Refutation:
    """Try all 16 value assignments against the Product Rule.

    Route (a) pairs ``A1 A2`` with ``B1 B2``; route (b) pairs ``A1 B2`` with
    ``A2 B1``.  The operators satisfy ``A1 B2 A2 B1 = s A1 A2 B1 B2`` with the
    sign ``s`` read off the matrices, so a consistent assignment needs
    ``route_b == s * route_a``.
    """
    o = ops or mermin_operators()
    s = _operator_sign(o)
    traces = []
    consistent = 0
    for vals in itertools.product((1, -1), repeat=4):
        v = Assignment(*vals)
        route_a = (v.vA1 * v.vA2) * (v.vB1 * v.vB2)
        route_b = (v.vA1 * v.vB2) * (v.vA2 * v.vB1)
        ok = route_b == s * route_a
        consistent += ok
        traces.append(
            f"v=(A1:{v.vA1:+d}, A2:{v.vA2:+d}, B1:{v.vB1:+d}, B2:{v.vB2:+d}) "
            f"v[A1A2B1B2]=v[A1A2]v[B1B2]={route_a:+d} "
            f"v[A1B2A2B1]=v[A1B2]v[A2B1]={route_b:+d} "
            f"operator sign demands {s * route_a:+d} -> {'consistent' if ok else 'inconsistent'}"
        )
    return Refutation(total=16, consistent=int(consistent), operator_sign=s, traces=tuple(traces))


# -- Bell's single-spin model -------------------------------------------------


def _unit(v, name: str) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.shape != (3,) or abs(np.linalg.norm(v) - 1.0) > 1e-12:
        raise ValueError(f"{name} must be a unit 3-vector, got {v!r}")
    return v


def _sign(x):
    return np.where(x >= 0, 1, -1)


@dataclass(frozen=True, eq=False)
class BellModel:
    """Spin-1/2 prepared along ``state_direction``; hidden ``lambda ~ U[-1/2, 1/2]``."""

    state_direction: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "state_direction", _unit(self.state_direction, "state_direction"))

    def draw(self, rng: np.random.Generator, size=None):
        return rng.uniform(-0.5, 0.5, size)


def bell_outcome(n_hat, m_hat, lam):
    """Outcome of ``sigma . m`` given hidden variable(s) ``lam``.

    ``sign(m.n) * sign(lam + |m.n|/2)``, with ``sign(0) = +1``.  This gives
    ``P(+1) = (1 + m.n)/2`` and flips deterministically under ``m -> -m``.
    """
    mn = float(np.dot(m_hat, n_hat))
    return _sign(mn) * _sign(np.asarray(lam) + 0.5 * abs(mn))


def bell_sample(model: BellModel, m_hat, rng: np.random.Generator, size=None):
    """Draw outcome(s) of ``sigma . m_hat``; scalar when ``size`` is None."""
    m_hat = _unit(m_hat, "m_hat")
    out = bell_outcome(model.state_direction, m_hat, model.draw(rng, size))
    return int(out) if size is None else out


@dataclass(frozen=True)
class BellCheck:
    angles: tuple
    pass_rates: tuple
    epsilon: float
    samples: int

    @property
    def nondecreasing(self) -> bool:
        return all(b >= a for a, b in zip(self.pass_rates, self.pass_rates[1:]))


def bell_eps_product_check(
    n_hat,
    directions: Sequence[tuple],
    epsilon: float,
    samples: int,
    seed: int = 0,
) -> BellCheck:
    """Empirical epsilon-Product Rule pass rate along a sequence of direction pairs.

    ``(sigma.a) o (sigma.b) = (a.b) I``, so its value is ``a.b`` with
    certainty.  Each run draws one ``lambda`` and evaluates both outcomes from
    it; the run passes when ``|a.b - v[a] v[b]| < epsilon``.
    """
    if not directions:
        raise ValueError("empty direction sequence")
    n_hat = _unit(n_hat, "n_hat")
    angles = []
    for a, b in directions:
        a, b = _unit(a, "a"), _unit(b, "b")
        angles.append(float(np.arccos(np.clip(np.dot(a, b), -1.0, 1.0))))
    if any(y >= x for x, y in zip(angles, angles[1:])):
        raise ValueError(f"angles must be strictly decreasing, got {angles}")
    rng = np.random.default_rng(seed)
    model = BellModel(n_hat)
    rates = []
    for a, b in directions:
        lam = model.draw(rng, samples)
        prod = bell_outcome(n_hat, a, lam) * bell_outcome(n_hat, b, lam)
        rates.append(float(np.mean(np.abs(np.dot(a, b) - prod) < epsilon)))
    return BellCheck(tuple(angles), tuple(rates), float(epsilon), int(samples))


def _random_unit(rng: np.random.Generator) -> np.ndarray:
    v = rng.normal(size=3)
    return v / np.linalg.norm(v)


def born_rule_check(samples: int, pairs: int, seed: int = 0) -> list:
    """Empirical ``P(+1)`` against ``cos^2(theta/2)`` for random direction pairs.

    Returns rows ``(index, theta, expected, empirical, z)`` where ``z`` is the
    deviation in binomial standard errors.
    """
    if samples < 1 or pairs < 1:
        raise ValueError("samples and pairs must be >= 1")
    rng = np.random.default_rng(seed)
    rows = []
    for i in range(pairs):
        n_hat, m_hat = _random_unit(rng), _random_unit(rng)
        out = bell_sample(BellModel(n_hat), m_hat, rng, size=samples)
        p_hat = float(np.mean(out == 1))
        theta = float(np.arccos(np.clip(np.dot(m_hat, n_hat), -1.0, 1.0)))
        p = math.cos(theta / 2) ** 2
        var = p * (1 - p) / samples
        if var > 0:
            z = abs(p_hat - p) / math.sqrt(var)
        else:
            z = 0.0 if p_hat == p else math.inf
        rows.append((i, theta, p, p_hat, z))
    return rows


def standard_angle_sequence(angles=(np.pi / 4, np.pi / 8, np.pi / 16)) -> tuple:
    """State along z; ``a`` at polar angle pi/6 and ``b`` a further ``theta`` away in the x-z plane."""
    n_hat = np.array([0.0, 0.0, 1.0])
    pol = lambda t: np.array([np.sin(t), 0.0, np.cos(t)])
    base = np.pi / 6
    return n_hat, [(pol(base), pol(base + t)) for t in angles]
