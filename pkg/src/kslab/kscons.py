"""The approximate obstruction family for a single pair (q, p).

For family index ``n`` and free scale ``a`` the four frequencies are::

    a1n = (2n + 1) a        b1  = pi / a
    a2n = (2 + 1/(2n)) a    b2n = 2 n pi / a

with ``A_in = sign cos(a_in q)`` (``>= 0`` counted as +1) and
``B = cos(b p)``.  The box length is locked to ``L = 4 n pi c / a`` so every
period and every translation above is an exact number of lattice sites; the
only inexact relation left is ``[A2n, B1] != 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .lattice import LatticeConfig, gaussian_state, make_lattice, to_momentum, to_position
from .opalg import (
    LinOp,
    PositionDiag,
    SignProjectionPair,
    anticommutator,
    applied_residual,
    as_columns,
    commutator,
    compose,
    diag_p,
    diag_q,
    sign_projections,
    translation,
)

__all__ = [
    "CommensurabilityError",
    "ObstructionFamily",
    "make_family",
    "minimal_grid",
    "sign_function",
    "shift_relation_residual",
    "weyl_phase_residual",
    "weyl_check",
    "relation_suite",
    "two_dof_check",
    "FantasyCertificate",
    "parity_inconsistent",
    "fantasy_unsat",
    "near_solution",
]


class CommensurabilityError(ValueError):
    """Grid and parameters do not fit the torus exactly."""

    def __init__(self, message: str, minimal_N: int | None = None):
        super().__init__(message)
        self.minimal_N = minimal_N


def minimal_grid(N: int, n: int, c: int) -> int:
    """Smallest grid size ``>= N`` compatible with family ``(n, c)``."""
    step = 4 * n * c
    return step * math.ceil(max(N, 8) / step)


def sign_function(freq: float, offset: float = 0.0):
    """``q -> sign(cos(freq q + offset))`` with zero mapped to +1."""

    def f(q):
        return np.where(np.cos(freq * q + offset) >= 0, 1.0, -1.0)

    return f


@dataclass(frozen=True, eq=False)
class ObstructionFamily:
    cfg: LatticeConfig
    n: int
    c: int
    a: float
    a1n: float
    a2n: float
    b1: float
    b2n: float
    eps_n: float
    E1: SignProjectionPair
    E2: SignProjectionPair
    # E2 translated: key -1 is E(-eps_n), key +1 is E(+eps_n)
    E2_shifted: dict = field(repr=False)
    A1n: PositionDiag = field(repr=False)
    A2n: PositionDiag = field(repr=False)
    B1: LinOp = field(repr=False)
    B2n: LinOp = field(repr=False)

    @property
    def N(self) -> int:
        return self.cfg.N

    @property
    def L(self) -> float:
        return self.cfg.L

    @property
    def b1_sites(self) -> int:
        return self.cfg.sites(self.b1)

    @property
    def b2n_sites(self) -> int:
        return self.cfg.sites(self.b2n)

    def products(self) -> dict:
        """The four frequency products in units of pi."""
        return {
            "a1n_b1": self.a1n * self.b1 / np.pi,
            "a1n_b2n": self.a1n * self.b2n / np.pi,
            "a2n_b1": self.a2n * self.b1 / np.pi,
            "a2n_b2n": self.a2n * self.b2n / np.pi,
        }

    def A_product(self) -> PositionDiag:
        return compose(self.A1n, self.A2n)

    def B_product(self) -> LinOp:
        return compose(self.B1, self.B2n)


def _involution(pair: SignProjectionPair, name: str) -> PositionDiag:
    return PositionDiag(pair.e_plus.cfg, pair.e_plus.values - pair.e_minus.values, name)


def make_family(N: int, n: int, c: int = 1, a: float = 1.0) -> ObstructionFamily:
    """Build the operator family for index ``n`` on an ``N``-site torus.

    ``N`` must be a multiple of ``4 n c``; otherwise
    :class:`CommensurabilityError` reports the smallest valid grid.
    """
    if int(n) != n or n < 1:
        raise ValueError(f"n must be a positive integer, got {n!r}")
    if int(c) != c or c < 1:
        raise ValueError(f"c must be a positive integer, got {c!r}")
    if not a > 0:
        raise ValueError(f"a must be positive, got {a!r}")
    n, c = int(n), int(c)
    step = 4 * n * c
    if int(N) != N or N % step or N < 8:
        minimal = minimal_grid(int(N), n, c)
        raise CommensurabilityError(
            f"N must be divisible by {step}; minimal valid N: {minimal}", minimal
        )
    L = 4 * n * np.pi * c / a
    cfg = make_lattice(int(N), L)
    a1n = (2 * n + 1) * a
    a2n = (2 + 1 / (2 * n)) * a
    b1 = np.pi / a
    b2n = 2 * n * np.pi / a
    eps_n = np.pi / (2 * n)

    E1 = sign_projections(diag_q(cfg, lambda q: np.cos(a1n * q), "cos(a1n q)"))
    E2 = sign_projections(diag_q(cfg, lambda q: np.cos(a2n * q), "cos(a2n q)"))
    E2_shifted = {
        s: sign_projections(
            diag_q(cfg, lambda q, s=s: np.cos(a2n * q + s * eps_n), f"cos(a2n q{'+' if s > 0 else '-'}eps)")
        )
        for s in (-1, +1)
    }
    return ObstructionFamily(
        cfg=cfg,
        n=n,
        c=c,
        a=float(a),
        a1n=a1n,
        a2n=a2n,
        b1=b1,
        b2n=b2n,
        eps_n=eps_n,
        E1=E1,
        E2=E2,
        E2_shifted=E2_shifted,
        A1n=_involution(E1, "A1n"),
        A2n=_involution(E2, "A2n"),
        B1=diag_p(cfg, lambda p: np.cos(b1 * p), "B1"),
        B2n=diag_p(cfg, lambda p: np.cos(b2n * p), "B2n"),
    )


def shift_relation_residual(cfg: LatticeConfig, f, b: float, states) -> float:
    """``max ||(f(q) T_b - T_b f(q - b)) psi||`` with ``T_b = e^{i b p}``."""
    T = translation(cfg, b)
    lhs = compose(diag_q(cfg, f), T)
    rhs = compose(T, diag_q(cfg, lambda q: f(q - b)))
    psi = as_columns(states)
    return float(np.max(np.linalg.norm(lhs.apply(psi) - rhs.apply(psi), axis=0)))


def weyl_phase_residual(cfg: LatticeConfig, alpha: float, b: float, states) -> float:
    """``max ||(e^{i alpha q} T_b - e^{-i alpha b} T_b e^{i alpha q}) psi||``.

    ``e^{i alpha q}`` must be periodic on the torus and ``b`` a whole number of
    sites, else :class:`CommensurabilityError`.
    """
    turns = alpha * cfg.L / (2 * np.pi)
    if abs(turns - round(turns)) > 1e-9 * max(1.0, abs(turns)):
        raise CommensurabilityError(f"e^(i {alpha!r} q) is not periodic on L={cfg.L!r}")
    try:
        T = translation(cfg, b)
    except ValueError as exc:
        raise CommensurabilityError(str(exc)) from None
    U = diag_q(cfg, lambda q: np.exp(1j * alpha * q))
    psi = as_columns(states)
    lhs = compose(U, T).apply(psi)
    rhs = np.exp(-1j * alpha * b) * compose(T, U).apply(psi)
    return float(np.max(np.linalg.norm(lhs - rhs, axis=0)))


def _translation_paths_residual(cfg: LatticeConfig, b: float, psi: np.ndarray) -> float:
    """Roll-based translation versus the transform-based ``e^{i b p}``."""
    T = translation(cfg, b)
    phi = to_momentum(cfg, psi)
    via_fft = to_position(cfg, np.exp(1j * b * cfg.p_samples)[:, None] * phi)
    return float(np.max(np.linalg.norm(T.apply(psi) - via_fft, axis=0)))


def weyl_check(family: ObstructionFamily, states) -> dict:
    """Shift relation, Weyl phase relation and translation-path agreement.

    Every entry is a max applied-norm residual and should be at roundoff.
    """
    cfg = family.cfg
    psi = as_columns(states)
    fs = {
        "cos_a1n": lambda q: np.cos(family.a1n * q),
        "A1n": sign_function(family.a1n),
        "A2n": sign_function(family.a2n),
    }
    bs = {"b1": family.b1, "b2n": family.b2n, "-b1": -family.b1}
    out = {}
    for fname, f in fs.items():
        for bname, b in bs.items():
            out[f"shift[{fname},{bname}]"] = shift_relation_residual(cfg, f, b, psi)
    for bname, b in bs.items():
        out[f"translation_paths[{bname}]"] = _translation_paths_residual(cfg, b, psi)
    pairs = {
        "a,b1": (family.a, family.b1),
        "a,b2n": (family.a, family.b2n),
        "a1n,b1": (family.a1n, family.b1),
        "a1n,b2n": (family.a1n, family.b2n),
    }
    for pname, (alpha, b) in pairs.items():
        out[f"phase[{pname}]"] = weyl_phase_residual(cfg, alpha, b, psi)
    return out


def relation_suite(family: ObstructionFamily, states) -> dict:
    """Commutators, anticommutators and the ``A2n B1`` decomposition.

    ``comm_A2n_B1`` is the one entry expected to be clearly nonzero.
    """
    f = family
    psi = as_columns(states)
    out = {
        "comm_A1n_A2n": applied_residual(commutator(f.A1n, f.A2n), psi),
        "comm_A1n_B2n": applied_residual(commutator(f.A1n, f.B2n), psi),
        "comm_B1_B2n": applied_residual(commutator(f.B1, f.B2n), psi),
        "anti_A1n_B1": applied_residual(anticommutator(f.A1n, f.B1), psi),
        "anti_A2n_B2n": applied_residual(anticommutator(f.A2n, f.B2n), psi),
        "comm_A2n_B1": applied_residual(commutator(f.A2n, f.B1), psi),
    }
    T_plus = translation(f.cfg, f.b1)
    T_minus = translation(f.cfg, -f.b1)
    Em, Ep = f.E2_shifted[-1], f.E2_shifted[+1]

    def decomposition(lhs, left, right):
        rhs = 0.5 * compose(T_plus, left) + 0.5 * compose(T_minus, right)
        return applied_residual(lhs - rhs, psi)

    out["decomp_Eplus_B1"] = decomposition(compose(f.E2.e_plus, f.B1), Em.e_plus, Ep.e_plus)
    out["decomp_Eminus_B1"] = decomposition(compose(f.E2.e_minus, f.B1), Em.e_minus, Ep.e_minus)
    out["decomp_A2n_B1"] = decomposition(
        compose(f.A2n, f.B1),
        _involution(Em, "A2n(-eps)"),
        _involution(Ep, "A2n(+eps)"),
    )
    return out


# -- two degrees of freedom -------------------------------------------------


def _on_mode(op: LinOp, block: np.ndarray, axis: int) -> np.ndarray:
    """Apply a one-mode operator to ``block`` (shape ``(N1, N2, m)``) along ``axis``."""
    moved = np.moveaxis(block, axis, 0)
    shape = moved.shape
    out = op.apply(moved.reshape(shape[0], -1)).reshape(shape)
    return np.moveaxis(out, 0, axis)


def _mode_lattice(N: int, odd: int, a: float, periods: int) -> tuple:
    b = odd * np.pi / a
    if N % (2 * periods):
        raise CommensurabilityError(
            f"mode grid N={N} must be divisible by {2 * periods} so b is a whole number of sites",
            2 * periods * math.ceil(N / (2 * periods)),
        )
    cfg = make_lattice(N, 2 * b * periods)
    return cfg, b


def two_dof_check(
    N1: int,
    N2: int,
    m: int,
    n: int,
    states=None,
    a1: float = math.sqrt(math.pi),
    a2: float = math.sqrt(math.pi),
    periods: int = 4,
) -> dict:
    """Hermitian two-mode construction ``A_i = cos(a_i q_i)``, ``B_i = cos(b_i p_i)``.

    ``b_i`` is fixed by ``a_1 b_1 = (2m+1) pi`` and ``a_2 b_2 = (2n+1) pi``;
    each mode's box holds ``periods`` translations by ``2 b_i``.  ``states``
    are vectors of length ``N1*N2`` (row-major, mode 1 slow); by default a few
    product Gaussians and one entangled superposition are used.
    """
    if m < 0 or n < 0:
        raise ValueError("m and n must be nonnegative so that b_i > 0")
    cfg1, b1 = _mode_lattice(N1, 2 * m + 1, a1, periods)
    cfg2, b2 = _mode_lattice(N2, 2 * n + 1, a2, periods)
    A = [diag_q(cfg1, lambda q: np.cos(a1 * q)), diag_q(cfg2, lambda q: np.cos(a2 * q))]
    B = [diag_p(cfg1, lambda p: np.cos(b1 * p)), diag_p(cfg2, lambda p: np.cos(b2 * p))]
    if states is None:
        states = _default_two_mode_states(cfg1, cfg2)
    block = np.stack([np.asarray(s, dtype=complex).reshape(N1, N2) for s in states], axis=-1)

    def act(ops, vec):
        for mode, op in reversed(ops):
            vec = _on_mode(op, vec, mode)
        return vec

    def resid(X, Y, sign):
        diff = act([X, Y], block) + sign * act([Y, X], block)
        return float(np.max(np.linalg.norm(diff.reshape(N1 * N2, -1), axis=0)))

    A1, A2, B1, B2 = (0, A[0]), (1, A[1]), (0, B[0]), (1, B[1])
    return {
        "comm_A1_A2": resid(A1, A2, -1),
        "comm_A1_B2": resid(A1, B2, -1),
        "comm_B1_A2": resid(B1, A2, -1),
        "comm_B1_B2": resid(B1, B2, -1),
        "anti_A1_B1": resid(A1, B1, +1),
        "anti_A2_B2": resid(A2, B2, +1),
    }


def _default_two_mode_states(cfg1: LatticeConfig, cfg2: LatticeConfig) -> list:

    g1 = [
        gaussian_state(cfg1, 0.0, 0.0, cfg1.L / 12),
        gaussian_state(cfg1, 0.1 * cfg1.L, 2 * 2 * np.pi / cfg1.L, cfg1.L / 16),
    ]
    g2 = [
        gaussian_state(cfg2, -0.15 * cfg2.L, 0.0, cfg2.L / 14),
        gaussian_state(cfg2, 0.0, -3 * 2 * np.pi / cfg2.L, cfg2.L / 10),
    ]
    prods = [np.outer(x.amplitudes, y.amplitudes).ravel() for x in g1 for y in g2]
    ent = prods[0] + prods[3]
    return prods + [ent / np.linalg.norm(ent)]


# -- the unsolvable integer system ------------------------------------------


@dataclass(frozen=True)
class FantasyCertificate:
    search_bound: int
    parity_argument: str
    quadruples_scanned: int
    consistent_quadruples: tuple
    odd_products: int
    even_products: int

    @property
    def unsat(self) -> bool:
        return not self.consistent_quadruples

    def as_dict(self) -> dict:
        return {
            "search_bound": self.search_bound,
            "parity_argument": self.parity_argument,
            "quadruples_scanned": self.quadruples_scanned,
            "consistent_quadruples": [list(q) for q in self.consistent_quadruples],
            "distinct_odd_products": self.odd_products,
            "distinct_even_products": self.even_products,
            "unsat": self.unsat,
        }


PARITY_ARGUMENT = (
    "(a1 b1)(a2 b2) = (2m+1)(2n+1) pi^2 is an odd multiple of pi^2; "
    "(a1 b2)(a2 b1) = 4 k l pi^2 is an even multiple of pi^2; "
    "both equal a1 a2 b1 b2, so no integers k, l, m, n exist."
)


def parity_inconsistent(k: int, l: int, m: int, n: int) -> bool:
    """True when ``(2m+1)(2n+1)`` and ``4kl`` differ in parity (always)."""
    odd = (2 * m + 1) * (2 * n + 1)
    even = 4 * k * l
    return odd % 2 == 1 and even % 2 == 0


def fantasy_unsat(search_bound: int) -> FantasyCertificate:
    """Exhaustively rule out integer quadruples with ``max |.| <= search_bound``.

    A quadruple ``(k, l, m, n)`` admits reals ``a1, a2, b1, b2`` exactly when
    ``(2m+1)(2n+1) == 4kl`` (both sides being ``a1 a2 b1 b2 / pi^2``), so the
    scan intersects the sets of attainable odd and even products.
    """
    if search_bound < 1:
        raise ValueError("search_bound must be >= 1")
    r = np.arange(-search_bound, search_bound + 1, dtype=np.int64)
    odd = np.multiply.outer(2 * r + 1, 2 * r + 1).ravel()
    even = np.multiply.outer(2 * r, 2 * r).ravel()
    common = np.intersect1d(odd, even)
    consistent = []
    for v in common:  # empty by parity; kept so the scan reports witnesses if any
        mi, ni = np.divmod(np.flatnonzero(odd == v), r.size)
        ki, li = np.divmod(np.flatnonzero(even == v), r.size)
        for x, y in zip(mi, ni):
            for u, w in zip(ki, li):
                consistent.append((int(r[u]), int(r[w]), int(r[x]), int(r[y])))
    return FantasyCertificate(
        search_bound=int(search_bound),
        parity_argument=PARITY_ARGUMENT,
        quadruples_scanned=int(r.size) ** 4,
        consistent_quadruples=tuple(consistent),
        odd_products=int(np.unique(odd).size),
        even_products=int(np.unique(even).size),
    )


def near_solution(n: int, a: float = 1.0) -> dict:
    """How the family misses the integer system: only ``a2n b1`` is off."""
    a1n = (2 * n + 1) * a
    a2n = (2 + 1 / (2 * n)) * a
    b1 = np.pi / a
    b2n = 2 * n * np.pi / a
    return {
        "a1n_b1_over_pi": a1n * b1 / np.pi,
        "a1n_b2n_over_2pi": a1n * b2n / (2 * np.pi),
        "a2n_b1_over_pi": a2n * b1 / np.pi,
        "a2n_b2n_over_pi": a2n * b2n / np.pi,
        "a2n_b1_offset": a2n * b1 - 2 * np.pi,
        "eps_n": np.pi / (2 * n),
    }
