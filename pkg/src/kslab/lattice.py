"""Periodic position lattice for one canonical pair and its momentum dual.

Units have hbar = 1.  Position samples sit on a half-offset grid
``q_j = -L/2 + (j + 1/2) dx`` and momenta are ``p_k = 2 pi k / L`` for
``k = -N/2 ... N/2 - 1``.  Momentum-space arrays are always stored in that
ascending-k order, so ``momentum_amplitudes[i]`` belongs to ``p_samples[i]``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np

__all__ = [
    "LatticeConfig",
    "PureState",
    "Ensemble",
    "make_lattice",
    "gaussian_state",
    "plane_wave",
    "transform",
    "to_momentum",
    "to_position",
    "expectation",
    "mixture",
]

NORM_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class LatticeConfig:
    N: int
    L: float
    dx: float = field(init=False)
    q_samples: np.ndarray = field(init=False, repr=False)
    p_samples: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        dx = self.L / self.N
        q = -self.L / 2 + (np.arange(self.N) + 0.5) * dx
        p = 2 * np.pi * np.arange(-self.N // 2, self.N // 2) / self.L
        q.setflags(write=False)
        p.setflags(write=False)
        object.__setattr__(self, "dx", dx)
        object.__setattr__(self, "q_samples", q)
        object.__setattr__(self, "p_samples", p)
        # phase e^{-i p_k q_0} turning a plain DFT into the half-offset transform
        phase = np.exp(-1j * p * q[0])
        phase.setflags(write=False)
        object.__setattr__(self, "_phase", phase)

    def same_as(self, other: "LatticeConfig") -> bool:
        return self is other or (self.N == other.N and self.L == other.L)

    def sites(self, length: float, tol: float = 1e-9) -> int:
        """Return ``length / dx`` as an int, or raise if it is not integral."""
        s = length / self.dx
        r = round(s)
        if abs(s - r) > tol * max(1.0, abs(s)):
            raise ValueError(
                f"translation {length!r} is not an integer number of sites "
                f"(dx={self.dx!r}, ratio={s!r})"
            )
        return int(r)


def make_lattice(N: int, L: float) -> LatticeConfig:
    """Build a periodic lattice with ``N`` sites on a box of length ``L``.

    ``N`` must be even and at least 8; ``L`` must be positive.
    """
    if int(N) != N or N < 8:
        raise ValueError(f"N must be an integer >= 8, got {N!r}")
    if N % 2:
        raise ValueError(f"N must be even, got {N}")
    if not np.isfinite(L) or L <= 0:
        raise ValueError(f"L must be positive, got {L!r}")
    return LatticeConfig(int(N), float(L))


def to_momentum(cfg: LatticeConfig, psi: np.ndarray, axis: int = 0) -> np.ndarray:
    """Unitary position -> momentum map along ``axis``."""
    phi = np.fft.fftshift(np.fft.fft(psi, axis=axis, norm="ortho"), axes=axis)
    shape = [1] * phi.ndim
    shape[axis] = cfg.N
    return phi * cfg._phase.reshape(shape)


def to_position(cfg: LatticeConfig, phi: np.ndarray, axis: int = 0) -> np.ndarray:
    """Inverse of :func:`to_momentum`."""
    shape = [1] * np.ndim(phi)
    shape[axis] = cfg.N
    phi = phi * np.conj(cfg._phase).reshape(shape)
    return np.fft.ifft(np.fft.ifftshift(phi, axes=axis), axis=axis, norm="ortho")


@dataclass(frozen=True, eq=False)
class PureState:
    """Normalized state in the position representation."""

    cfg: LatticeConfig
    amplitudes: np.ndarray
    label: str = ""

    def __post_init__(self):
        amp = np.asarray(self.amplitudes, dtype=complex)
        if amp.shape != (self.cfg.N,):
            raise ValueError(f"expected {self.cfg.N} amplitudes, got shape {amp.shape}")
        norm = np.linalg.norm(amp)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state is not normalized (norm={norm!r})")
        amp = amp.copy()
        amp.setflags(write=False)
        object.__setattr__(self, "amplitudes", amp)

    @classmethod
    def from_vector(cls, cfg: LatticeConfig, vec, label: str = "") -> "PureState":
        vec = np.asarray(vec, dtype=complex)
        norm = np.linalg.norm(vec)
        if norm == 0:
            raise ValueError("cannot normalize the zero vector")
        return cls(cfg, vec / norm, label)

    @property
    def momentum_amplitudes(self) -> np.ndarray:
        return to_momentum(self.cfg, self.amplitudes)

    def position_mean(self) -> float:
        return float(np.sum(self.cfg.q_samples * np.abs(self.amplitudes) ** 2))

    def momentum_mean(self) -> float:
        return float(np.sum(self.cfg.p_samples * np.abs(self.momentum_amplitudes) ** 2))


@dataclass(frozen=True, eq=False)
class Ensemble:
    """Finite mixture of pure states standing in for a density operator."""

    members: tuple

    def __post_init__(self):
        members = tuple((float(w), s) for w, s in self.members)
        if not members:
            raise ValueError("ensemble needs at least one member")
        cfg = members[0][1].cfg
        for w, s in members:
            if w < 0:
                raise ValueError(f"negative weight {w!r}")
            if not s.cfg.same_as(cfg):
                raise ValueError("ensemble members live on different lattices")
        total = sum(w for w, _ in members)
        if abs(total - 1.0) > NORM_TOL:
            raise ValueError(f"weights sum to {total!r}, not 1")
        object.__setattr__(self, "members", members)

    @property
    def cfg(self) -> LatticeConfig:
        return self.members[0][1].cfg

    @property
    def weights(self) -> np.ndarray:
        return np.array([w for w, _ in self.members])

    def stacked(self) -> np.ndarray:
        """Member amplitudes as columns of an ``(N, m)`` array."""
        return np.stack([s.amplitudes for _, s in self.members], axis=1)

    @classmethod
    def pure(cls, state: PureState) -> "Ensemble":
        return cls(((1.0, state),))


def mixture(states: Sequence[PureState], weights: Sequence[float] | None = None) -> Ensemble:
    """Ensemble over ``states``; equal weights unless given."""
    states = list(states)
    if weights is None:
        weights = [1.0 / len(states)] * len(states)
    return Ensemble(tuple(zip(weights, states)))


def gaussian_state(cfg: LatticeConfig, x0: float, p0: float, sigma: float, label: str = "") -> PureState:
    """Discrete Gaussian wave packet ``exp(-(q-x0)^2/(4 sigma^2) + i p0 q)``.

    ``sigma`` is the position standard deviation of ``|psi|^2``.  It must be
    resolved (``sigma >= 3 dx``) and the packet must sit inside the box with
    three standard deviations to spare.
    """
    if sigma < 3 * cfg.dx * (1 - 1e-12):
        raise ValueError(f"sigma={sigma!r} is below 3*dx={3 * cfg.dx!r} (unresolved)")
    if sigma > cfg.L / 6 * (1 + 1e-12):
        raise ValueError(f"sigma={sigma!r} exceeds L/6={cfg.L / 6!r} (box-clipped)")
    room = cfg.L / 2 - 3 * sigma
    if abs(x0) > room + 1e-12 * cfg.L:
        raise ValueError(f"x0={x0!r} outside [-{room!r}, {room!r}] (box-clipped)")
    q = cfg.q_samples
    amp = np.exp(-((q - x0) ** 2) / (4 * sigma**2) + 1j * p0 * q)
    return PureState.from_vector(cfg, amp, label)


def plane_wave(cfg: LatticeConfig, k: int) -> PureState:
    """Momentum eigenstate ``e^{i p_k q_j} / sqrt(N)`` for ``k in [-N/2, N/2)``."""
    p = 2 * np.pi * k / cfg.L
    return PureState(cfg, np.exp(1j * p * cfg.q_samples) / np.sqrt(cfg.N), f"plane[{k}]")


def transform(state: PureState, direction: Literal["to-momentum", "to-position"]) -> PureState:
    """Unitary change of representation.

    The returned :class:`PureState` holds the amplitudes in the requested
    representation; the caller keeps track of which one it is.
    """
    if direction == "to-momentum":
        out = to_momentum(state.cfg, state.amplitudes)
    elif direction == "to-position":
        out = to_position(state.cfg, state.amplitudes)
    else:
        raise ValueError(f"unknown direction {direction!r}")
    return PureState(state.cfg, out, state.label)


def expectation(rho: Ensemble | PureState, op) -> complex:
    """``sum_i w_i <psi_i| op |psi_i>``."""
    if isinstance(rho, PureState):
        rho = Ensemble.pure(rho)
    if op.cfg.N != rho.cfg.N:
        raise ValueError(f"dimension mismatch: operator N={op.cfg.N}, state N={rho.cfg.N}")
    psi = rho.stacked()
    vals = np.einsum("im,im->m", psi.conj(), op.apply(psi))
    return complex(np.dot(rho.weights, vals))
