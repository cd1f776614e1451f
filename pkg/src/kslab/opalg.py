"""Matrix-free structured operators on a :class:`~kslab.lattice.LatticeConfig`.

Four structures cover everything the obstruction needs:

- :class:`PositionDiag` -- multiplication by ``f(q)``
- :class:`MomentumDiag` -- multiplication by ``g(p)`` in the momentum basis
- :class:`ProductChain` -- ordered product, rightmost factor acts first
- :class:`WeightedSum` -- complex linear combination

Operators are immutable expression trees.  ``apply`` accepts a single vector
of length ``N`` or an ``(N, m)`` block of column vectors.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Sequence, Union

import numpy as np

from .lattice import LatticeConfig, PureState, to_momentum, to_position

__all__ = [
    "LinOp",
    "PositionDiag",
    "MomentumDiag",
    "ProductChain",
    "WeightedSum",
    "SignProjectionPair",
    "ZeroGuardError",
    "identity",
    "zero",
    "diag_q",
    "diag_p",
    "translation",
    "compose",
    "apply",
    "power",
    "sym_product",
    "commutator",
    "anticommutator",
    "sign_projections",
    "residual_suite",
    "applied_residual",
    "as_columns",
    "dense_materialize",
    "dft_matrix",
]

ZERO_GUARD = 1e-9
DENSE_LIMIT = 4096

StateLike = Union[PureState, np.ndarray]


class ZeroGuardError(ValueError):
    """A diagonal value sits too close to zero for a well-defined sign split."""


class LinOp:
    cfg: LatticeConfig

    def apply(self, vec: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, psi):
        return apply(self, psi)

    def __matmul__(self, other: "LinOp") -> "LinOp":
        return compose(self, other)

    def __add__(self, other: "LinOp") -> "LinOp":
        return WeightedSum(((1.0, self), (1.0, other)))

    def __sub__(self, other: "LinOp") -> "LinOp":
        return WeightedSum(((1.0, self), (-1.0, other)))

    def __neg__(self) -> "LinOp":
        return WeightedSum(((-1.0, self),))

    def __rmul__(self, coeff) -> "LinOp":
        if isinstance(coeff, (int, float, complex, np.number)):
            return WeightedSum(((complex(coeff), self),))
        return NotImplemented

    def _check(self, vec: np.ndarray) -> np.ndarray:
        vec = np.asarray(vec)
        if vec.ndim not in (1, 2) or vec.shape[0] != self.cfg.N:
            raise ValueError(f"dimension mismatch: operator N={self.cfg.N}, vector shape {vec.shape}")
        return vec


def _broadcast(values: np.ndarray, vec: np.ndarray) -> np.ndarray:
    return values if vec.ndim == 1 else values[:, None]


@dataclass(frozen=True, eq=False)
class PositionDiag(LinOp):
    cfg: LatticeConfig
    values: np.ndarray
    name: str = ""

    def apply(self, vec):
        vec = self._check(vec)
        return _broadcast(self.values, vec) * vec

    @property
    def is_real(self) -> bool:
        return not np.iscomplexobj(self.values) or not np.any(self.values.imag)


@dataclass(frozen=True, eq=False)
class MomentumDiag(LinOp):
    """Diagonal in the momentum basis.

    ``shift`` is set for pure translations ``e^{i s dx p}``; those are applied
    as an exact circular roll by ``s`` sites instead of a transform pair.
    """

    cfg: LatticeConfig
    values: np.ndarray
    name: str = ""
    shift: int | None = None

    def apply(self, vec):
        vec = self._check(vec)
        if self.shift is not None:
            # (e^{i b p} psi)(q) = psi(q + b)
            return np.roll(vec, -self.shift, axis=0)
        phi = to_momentum(self.cfg, vec)
        return to_position(self.cfg, _broadcast(self.values, phi) * phi)

    @property
    def is_real(self) -> bool:
        return not np.iscomplexobj(self.values) or not np.any(self.values.imag)


@dataclass(frozen=True, eq=False)
class ProductChain(LinOp):
    factors: tuple

    def __post_init__(self):
        factors = tuple(self.factors)
        if not factors:
            raise ValueError("empty product chain")
        _same_lattice(factors)
        object.__setattr__(self, "factors", factors)

    @property
    def cfg(self):
        return self.factors[0].cfg

    def apply(self, vec):
        vec = self._check(vec)
        for op in reversed(self.factors):
            vec = op.apply(vec)
        return vec


@dataclass(frozen=True, eq=False)
class WeightedSum(LinOp):
    terms: tuple

    def __post_init__(self):
        terms = tuple((complex(c), op) for c, op in self.terms)
        if not terms:
            raise ValueError("empty weighted sum")
        _same_lattice([op for _, op in terms])
        object.__setattr__(self, "terms", terms)

    @property
    def cfg(self):
        return self.terms[0][1].cfg

    def apply(self, vec):
        vec = self._check(vec)
        out = np.zeros(vec.shape, dtype=complex)
        for c, op in self.terms:
            out += c * op.apply(vec)
        return out


def _same_lattice(ops: Iterable[LinOp]) -> None:
    ops = list(ops)
    cfg = ops[0].cfg
    for op in ops[1:]:
        if not op.cfg.same_as(cfg):
            raise ValueError(f"dimension mismatch: N={cfg.N} vs N={op.cfg.N}")


@dataclass(frozen=True)
class SignProjectionPair:
    e_plus: PositionDiag
    e_minus: PositionDiag

    def as_list(self) -> list:
        return [self.e_plus, self.e_minus]


def _sampled(fn, samples: np.ndarray) -> np.ndarray:
    vals = fn(samples) if callable(fn) else np.asarray(fn)
    vals = np.broadcast_to(np.asarray(vals), samples.shape).copy()
    if not np.all(np.isfinite(vals)):
        raise ValueError("operator function is not finite on every lattice sample")
    if np.iscomplexobj(vals) and not np.any(vals.imag):
        vals = vals.real.copy()
    vals.setflags(write=False)
    return vals


def identity(cfg: LatticeConfig) -> PositionDiag:
    return diag_q(cfg, np.ones(cfg.N), name="I")


def zero(cfg: LatticeConfig) -> PositionDiag:
    return diag_q(cfg, np.zeros(cfg.N), name="0")


def diag_q(cfg: LatticeConfig, f: Callable | np.ndarray, name: str = "") -> PositionDiag:
    """Multiplication by ``f(q)``; ``f`` is a vectorized callable or sample array."""
    return PositionDiag(cfg, _sampled(f, cfg.q_samples), name)


def diag_p(cfg: LatticeConfig, g: Callable | np.ndarray, name: str = "") -> MomentumDiag:
    """Multiplication by ``g(p)`` in the momentum representation."""
    return MomentumDiag(cfg, _sampled(g, cfg.p_samples), name)


def translation(cfg: LatticeConfig, b: float, name: str = "") -> MomentumDiag:
    """``e^{i b p}``, i.e. ``psi(q) -> psi(q + b)``.

    ``b`` must be an integer number of sites; anything else raises.
    """
    s = cfg.sites(b)
    vals = np.exp(2j * np.pi * np.arange(-cfg.N // 2, cfg.N // 2) * s / cfg.N)
    vals.setflags(write=False)
    return MomentumDiag(cfg, vals, name or f"T[{s}]", shift=s)


def compose(*ops: LinOp) -> LinOp:
    """Product ``ops[0] @ ops[1] @ ...`` with adjacent same-basis diagonals merged."""
    flat: list[LinOp] = []
    for op in ops:
        flat.extend(op.factors if isinstance(op, ProductChain) else [op])
    _same_lattice(flat)
    merged: list[LinOp] = []
    for op in flat:
        prev = merged[-1] if merged else None
        if isinstance(op, PositionDiag) and isinstance(prev, PositionDiag):
            merged[-1] = PositionDiag(op.cfg, prev.values * op.values, f"{prev.name}{op.name}")
        elif isinstance(op, MomentumDiag) and isinstance(prev, MomentumDiag):
            shift = None
            if op.shift is not None and prev.shift is not None:
                shift = op.shift + prev.shift
            merged[-1] = MomentumDiag(op.cfg, prev.values * op.values, f"{prev.name}{op.name}", shift)
        else:
            merged.append(op)
    return merged[0] if len(merged) == 1 else ProductChain(tuple(merged))


def power(op: LinOp, k: int) -> LinOp:
    """``op**k`` for ``k >= 1``; diagonal operators stay diagonal."""
    if k < 1:
        raise ValueError(f"power needs k >= 1, got {k}")
    if isinstance(op, PositionDiag):
        return PositionDiag(op.cfg, op.values**k, f"{op.name}^{k}")
    if isinstance(op, MomentumDiag) and op.shift is None:
        return MomentumDiag(op.cfg, op.values**k, f"{op.name}^{k}")
    return op if k == 1 else ProductChain((op,) * k)


def apply(op: LinOp, psi: StateLike) -> np.ndarray:
    vec = psi.amplitudes if isinstance(psi, PureState) else psi
    return op.apply(vec)


def sym_product(A: LinOp, B: LinOp) -> WeightedSum:
    """``A o B = (AB + BA) / 2``."""
    return WeightedSum(((0.5, compose(A, B)), (0.5, compose(B, A))))


def commutator(A: LinOp, B: LinOp) -> WeightedSum:
    return WeightedSum(((1.0, compose(A, B)), (-1.0, compose(B, A))))


def anticommutator(A: LinOp, B: LinOp) -> WeightedSum:
    return WeightedSum(((1.0, compose(A, B)), (1.0, compose(B, A))))


def sign_projections(op: PositionDiag, guard: float = ZERO_GUARD) -> SignProjectionPair:
    """Indicator projections onto ``op >= 0`` and ``op < 0``.

    Raises :class:`ZeroGuardError` if any diagonal value is within ``guard`` of
    zero: on the lattice such a site would make the split depend on roundoff.
    """
    if not isinstance(op, PositionDiag):
        raise TypeError("sign_projections needs a position-diagonal operator")
    vals = np.asarray(op.values)
    if np.iscomplexobj(vals):
        if np.any(np.abs(vals.imag) > guard):
            raise ValueError("sign_projections needs real diagonal values")
        vals = vals.real
    near = np.flatnonzero(np.abs(vals) < guard)
    if near.size:
        raise ZeroGuardError(
            f"{near.size} diagonal value(s) within {guard:g} of zero "
            f"(first at site {near[0]}); grid and parameters are not commensurate"
        )
    plus = (vals >= 0).astype(float)
    name = op.name or "f"
    return SignProjectionPair(
        PositionDiag(op.cfg, plus, f"E+[{name}]"),
        PositionDiag(op.cfg, 1.0 - plus, f"E-[{name}]"),
    )


def as_columns(states: Sequence[StateLike] | np.ndarray) -> np.ndarray:
    """Stack states into an ``(N, m)`` block."""
    if isinstance(states, np.ndarray):
        return states if states.ndim == 2 else states[:, None]
    cols = [s.amplitudes if isinstance(s, PureState) else np.asarray(s) for s in states]
    if not cols:
        raise ValueError("need at least one state")
    return np.stack(cols, axis=1)


def applied_residual(op: LinOp, states) -> float:
    """Max over states of ``||op psi||``."""
    out = op.apply(as_columns(states))
    return float(np.max(np.linalg.norm(out, axis=0)))


def residual_suite(A: LinOp, B: LinOp, states) -> tuple[float, float]:
    """``(max ||[A,B] psi||, max ||{A,B} psi||)`` over ``states``."""
    psi = as_columns(states)
    ab = compose(A, B).apply(psi)
    ba = compose(B, A).apply(psi)
    comm = float(np.max(np.linalg.norm(ab - ba, axis=0)))
    anti = float(np.max(np.linalg.norm(ab + ba, axis=0)))
    return comm, anti


def dft_matrix(cfg: LatticeConfig) -> np.ndarray:
    """Explicit unitary ``F[k, j] = exp(-i p_k q_j) / sqrt(N)``."""
    return np.exp(-1j * np.outer(cfg.p_samples, cfg.q_samples)) / np.sqrt(cfg.N)


def dense_materialize(op: LinOp, _F: np.ndarray | None = None) -> np.ndarray:
    """Dense ``N x N`` matrix of ``op``, built from explicit matrices.

    This route never calls the FFT or ``np.roll``, so it serves as an
    independent oracle for :meth:`LinOp.apply`.
    """
    N = op.cfg.N
    if N > DENSE_LIMIT:
        raise ValueError(f"dense materialization refused for N={N} > {DENSE_LIMIT}")
    if isinstance(op, PositionDiag):
        return np.diag(op.values.astype(complex))
    if isinstance(op, MomentumDiag):
        F = dft_matrix(op.cfg) if _F is None else _F
        return F.conj().T @ (op.values[:, None] * F)
    if _F is None:
        _F = dft_matrix(op.cfg)
    if isinstance(op, ProductChain):
        mat = dense_materialize(op.factors[0], _F)
        for f in op.factors[1:]:
            mat = mat @ dense_materialize(f, _F)
        return mat
    if isinstance(op, WeightedSum):
        mat = np.zeros((N, N), dtype=complex)
        for c, term in op.terms:
            mat += c * dense_materialize(term, _F)
        return mat
    raise TypeError(f"cannot materialize {type(op).__name__}")
