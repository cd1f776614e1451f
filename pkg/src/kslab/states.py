"""Box-relative state recipes.

A recipe fixes a state's shape relative to the box, so the same recipe can be
instantiated on lattices of different ``N`` and ``L`` (each family index ``n``
gets its own torus).  Units: ``x0`` and ``sigma`` are fractions of ``L``;
``p0`` counts momentum grid steps ``2 pi / L``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lattice import LatticeConfig, PureState, gaussian_state

__all__ = ["GaussianSpec", "SuperpositionSpec", "parse_state_spec", "STANDARD_FAMILY", "build_states"]


@dataclass(frozen=True)
class GaussianSpec:
    x0: float = 0.0
    p0: float = 0.0
    sigma: float = 1 / 12

    @property
    def label(self) -> str:
        return f"gaussian:x0={self.x0:g},p0={self.p0:g},sigma={self.sigma:g}"

    def build(self, cfg: LatticeConfig) -> PureState:
        return gaussian_state(
            cfg,
            self.x0 * cfg.L,
            self.p0 * 2 * np.pi / cfg.L,
            self.sigma * cfg.L,
            label=self.label,
        )


@dataclass(frozen=True)
class SuperpositionSpec:
    parts: tuple  # of (complex coefficient, GaussianSpec)

    @property
    def label(self) -> str:
        return "superposition(" + ";".join(p.label for _, p in self.parts) + ")"

    def build(self, cfg: LatticeConfig) -> PureState:
        vec = sum(c * p.build(cfg).amplitudes for c, p in self.parts)
        return PureState.from_vector(cfg, vec, self.label)


# momenta stay near p = 0, well away from p = +-a/2 where cos(b1 p) vanishes
STANDARD_FAMILY = (
    GaussianSpec(0.0, 0.0, 1 / 12),
    GaussianSpec(0.15, 0.0, 1 / 12),
    GaussianSpec(-0.2, 1.0, 1 / 10),
    GaussianSpec(0.1, -1.0, 1 / 10),
    SuperpositionSpec(((1.0, GaussianSpec(-0.2, 0.0, 1 / 12)), (1j, GaussianSpec(0.2, 0.0, 1 / 12)))),
)


def build_states(cfg: LatticeConfig, specs=STANDARD_FAMILY) -> list:
    return [s.build(cfg) for s in specs]


def parse_state_spec(text: str) -> GaussianSpec:
    """Parse ``gaussian:x0=..,p0=..,sigma=..`` (missing keys take defaults)."""
    kind, _, rest = text.partition(":")
    if kind.strip() != "gaussian":
        raise ValueError(f"unknown state kind {kind!r}; expected 'gaussian'")
    fields = {}
    for item in filter(None, (s.strip() for s in rest.split(","))):
        key, eq, val = item.partition("=")
        if not eq or key not in ("x0", "p0", "sigma"):
            raise ValueError(f"malformed state field {item!r}")
        fields[key] = float(val)
    return GaussianSpec(**fields)
