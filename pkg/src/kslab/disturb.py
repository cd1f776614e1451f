"""Measurement disturbance, post-measurement ensembles and outcome statistics.

The disturbance of ``B`` by an ideal measurement of ``A`` (spectral
projections ``P_i``) is ``Delta(B; A) = -sum_i (I - P_i) B P_i``; its
expectation is exactly the shift in ``<B>`` caused by measuring ``A`` first.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .kscons import CommensurabilityError, ObstructionFamily, make_family
from .lattice import Ensemble, PureState, expectation, to_momentum
from .opalg import (
    LinOp,
    MomentumDiag,
    PositionDiag,
    WeightedSum,
    as_columns,
    compose,
    identity,
    power,
    sign_projections,
    sym_product,
)
from .states import STANDARD_FAMILY

__all__ = [
    "ProjectionError",
    "Histogram",
    "DisturbanceRow",
    "DisturbanceReport",
    "check_resolution",
    "involution_projections",
    "disturbance",
    "expectation_shift",
    "post_measurement_ensemble",
    "bucketize",
    "basis_probabilities",
    "outcome_distribution",
    "default_grid_rule",
    "sweep_row",
    "convergence_sweep",
]

RESOLUTION_TOL = 1e-10
DROP_WEIGHT = 1e-14
BUCKET_TOL = 1e-9


class ProjectionError(ValueError):
    """Projections do not form an orthogonal resolution of the identity."""


def _complement(P: LinOp) -> LinOp:
    if isinstance(P, PositionDiag):
        return PositionDiag(P.cfg, 1.0 - P.values, f"(I-{P.name})")
    return identity(P.cfg) - P


def check_resolution(projections: Sequence[LinOp], tol: float = RESOLUTION_TOL) -> float:
    """Largest violation of completeness, idempotence or orthogonality.

    Diagonal projections are checked entrywise; anything else on a fixed set
    of seeded probe vectors.  Raises :class:`ProjectionError` above ``tol``.
    """
    projections = list(projections)
    if not projections:
        raise ProjectionError("no projections given")
    cfg = projections[0].cfg
    if all(isinstance(P, PositionDiag) for P in projections):
        vals = np.stack([np.asarray(P.values) for P in projections])
        worst = max(
            float(np.max(np.abs(vals.sum(axis=0) - 1.0))),
            float(np.max(np.abs(vals * vals - vals))),
        )
        for i in range(len(vals)):
            for j in range(i + 1, len(vals)):
                worst = max(worst, float(np.max(np.abs(vals[i] * vals[j]))))
    else:
        rng = np.random.default_rng(0)
        probe = rng.normal(size=(cfg.N, 3)) + 1j * rng.normal(size=(cfg.N, 3))
        images = [P.apply(probe) for P in projections]
        worst = float(np.max(np.abs(sum(images) - probe)))
        for i, P in enumerate(projections):
            worst = max(worst, float(np.max(np.abs(P.apply(images[i]) - images[i]))))
            for j in range(len(projections)):
                if j != i:
                    worst = max(worst, float(np.max(np.abs(P.apply(images[j])))))
    if worst > tol:
        raise ProjectionError(f"projections are not a resolution of the identity (violation {worst:.3e})")
    return worst


def involution_projections(A: PositionDiag) -> list:
    """``[(I + A)/2, (I - A)/2]`` for a position-diagonal ``A`` with ``A^2 = I``."""
    vals = np.real(np.asarray(A.values))
    if np.max(np.abs(vals * vals - 1.0)) > RESOLUTION_TOL:
        raise ProjectionError("operator is not an involution")
    return [
        PositionDiag(A.cfg, (1.0 + vals) / 2, f"P+[{A.name}]"),
        PositionDiag(A.cfg, (1.0 - vals) / 2, f"P-[{A.name}]"),
    ]


def disturbance(B: LinOp, A_projections: Sequence[LinOp]) -> WeightedSum:
    """``Delta(B; A) = -sum_i (I - P_i) B P_i``."""
    A_projections = list(A_projections)
    check_resolution(A_projections)
    return WeightedSum(tuple((-1.0, compose(_complement(P), B, P)) for P in A_projections))


def post_measurement_ensemble(rho: Ensemble | PureState, A_projections: Sequence[LinOp]) -> Ensemble:
    """Ensemble after an ideal, unread measurement with projections ``P_i``.

    Each member ``psi`` splits into normalized ``P_i psi`` with weight
    ``w ||P_i psi||^2``; pieces below 1e-14 are dropped and weights
    renormalized.
    """
    if isinstance(rho, PureState):
        rho = Ensemble.pure(rho)
    check_resolution(A_projections)
    members = []
    for w, state in rho.members:
        for P in A_projections:
            vec = P.apply(state.amplitudes)
            mass = w * float(np.vdot(vec, vec).real)
            if mass >= DROP_WEIGHT:
                members.append((mass, PureState.from_vector(rho.cfg, vec, state.label)))
    total = sum(m for m, _ in members)
    return Ensemble(tuple((m / total, s) for m, s in members))


def expectation_shift(rho: Ensemble | PureState, A_projections: Sequence[LinOp], B: LinOp) -> tuple:
    """``(direct, via_delta)``: two independent routes to ``<B'> - <B>``.

    ``direct`` measures ``B`` on the post-measurement ensemble; ``via_delta``
    is ``Tr(rho Delta(B; A))``.
    """
    if isinstance(rho, PureState):
        rho = Ensemble.pure(rho)
    after = post_measurement_ensemble(rho, A_projections)
    direct = expectation(after, B).real - expectation(rho, B).real
    via_delta = expectation(rho, disturbance(B, A_projections)).real
    return float(direct), float(via_delta)


# -- outcome statistics -------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Histogram:
    """Outcome buckets.  ``values`` is ``(m,)`` or ``(m, d)`` for joint outcomes."""

    values: np.ndarray
    probs: np.ndarray
    bucket_tol: float = BUCKET_TOL

    def __len__(self):
        return len(self.probs)

    @property
    def total(self) -> float:
        return float(np.sum(self.probs))

    @property
    def buckets(self) -> list:
        vals = self.values.tolist()
        return [(v if not isinstance(v, list) else tuple(v), float(p)) for v, p in zip(vals, self.probs)]

    def mass_at(self, value, tol: float | None = None) -> float:
        """Probability of the bucket matching ``value`` (0 if none)."""
        tol = self.bucket_tol if tol is None else tol
        value = np.atleast_1d(np.asarray(value, dtype=float))
        vals = self.values.reshape(len(self.probs), -1)
        scale = np.maximum(1.0, np.abs(value))
        hit = np.all(np.abs(vals - value) <= tol * scale + 1e-12, axis=1)
        return float(np.sum(self.probs[hit]))

    def marginal(self, axis: int) -> "Histogram":
        if self.values.ndim != 2:
            raise ValueError("marginal needs a joint histogram")
        return bucketize(self.values[:, axis], self.probs, self.bucket_tol)


def _group_ids(values: np.ndarray, tol: float) -> tuple:
    """Chain-group sorted ``values``; returns ``(ids per value, representatives)``."""
    order = np.argsort(values, kind="stable")
    sv = values[order]
    gaps = np.diff(sv) > tol * np.maximum(1.0, np.abs(sv[1:]))
    gid_sorted = np.concatenate([[0], np.cumsum(gaps)])
    ids = np.empty_like(gid_sorted)
    ids[order] = gid_sorted
    ngroups = int(gid_sorted[-1]) + 1 if len(sv) else 0
    sums = np.bincount(gid_sorted, weights=sv, minlength=ngroups)
    counts = np.bincount(gid_sorted, minlength=ngroups)
    return ids, sums / counts


def bucketize(values, probs, bucket_tol: float = BUCKET_TOL) -> Histogram:
    """Merge outcome values closer than ``bucket_tol`` (relative) and sum probabilities.

    For joint outcomes (``values`` of shape ``(m, d)``) each coordinate is
    grouped separately, so joint buckets marginalize onto the one-observable
    buckets exactly.
    """
    if not bucket_tol > 0:
        raise ValueError(f"bucket_tol must be positive, got {bucket_tol!r}")
    values = np.asarray(values, dtype=float)
    probs = np.asarray(probs, dtype=float)
    if values.ndim == 1:
        ids, reps = _group_ids(values, bucket_tol)
        p = np.bincount(ids, weights=probs, minlength=len(reps))
        return Histogram(reps, p, bucket_tol)
    cols = [_group_ids(values[:, d], bucket_tol) for d in range(values.shape[1])]
    keys = np.stack([ids for ids, _ in cols], axis=1)
    uniq, inv = np.unique(keys, axis=0, return_inverse=True)
    inv = inv.ravel()
    p = np.bincount(inv, weights=probs, minlength=len(uniq))
    reps = np.stack([cols[d][1][uniq[:, d]] for d in range(values.shape[1])], axis=1)
    return Histogram(reps, p, bucket_tol)


def basis_probabilities(rho: Ensemble | PureState, op: LinOp) -> np.ndarray:
    """Ensemble-weighted ``|amplitude|^2`` in the basis diagonalizing ``op``."""
    if isinstance(rho, PureState):
        rho = Ensemble.pure(rho)
    psi = rho.stacked()
    if isinstance(op, MomentumDiag):
        psi = to_momentum(rho.cfg, psi)
    elif not isinstance(op, PositionDiag):
        raise TypeError("outcome statistics need a position- or momentum-diagonal operator")
    return np.abs(psi) ** 2 @ rho.weights


def _real_values(op) -> np.ndarray:
    vals = np.asarray(op.values)
    if np.iscomplexobj(vals):
        if np.any(np.abs(vals.imag) > 1e-12):
            raise ValueError("observable has non-real eigenvalues")
        vals = vals.real
    return vals


def outcome_distribution(rho: Ensemble | PureState, B: LinOp, bucket_tol: float = BUCKET_TOL) -> Histogram:
    """Born-rule distribution of ``B``'s outcomes, one bucket per distinct eigenvalue."""
    if not bucket_tol > 0:
        raise ValueError(f"bucket_tol must be positive, got {bucket_tol!r}")
    probs = basis_probabilities(rho, B)
    return bucketize(_real_values(B), probs, bucket_tol)


# -- convergence sweeps -------------------------------------------------------


@dataclass(frozen=True)
class DisturbanceRow:
    n: int
    k: int
    state_id: str
    delta_norm: float
    sym_delta_norm: float
    product_delta_norm: float

    FIELDS = ("n", "k", "state_id", "delta_norm", "sym_delta_norm", "product_delta_norm")


@dataclass(frozen=True)
class DisturbanceReport:
    rows: tuple
    fit: tuple  # (slope, intercept) of log max ||Delta(B1; A2n) psi|| against log n
    grids: dict = field(default_factory=dict)

    def max_delta(self, k: int = 1, column: str = "delta_norm") -> dict:
        out: dict = {}
        for r in self.rows:
            if r.k == k:
                out[r.n] = max(out.get(r.n, 0.0), getattr(r, column))
        return dict(sorted(out.items()))


def default_grid_rule(n: int, c: int = 1) -> int:
    """Grid resolving each mismatch strip of ``cos(a2n q)`` with >= 4 sites.

    The strip is ``eps_n`` wide in phase and one site advances the phase by
    ``2 pi c (4n + 1) / N``, so ``N / (4 n c) >= 4 (4n + 1)``.  The site count
    of ``b1`` is rounded up to a power of two: an even count keeps every
    ``cos(a1n q_j)`` away from zero on the half-offset grid.
    """
    sites_b1 = 1 << math.ceil(math.log2(4 * (4 * n + 1)))
    return max(4 * n * c * sites_b1, 256)


def sweep_row(family: ObstructionFamily, specs, k_max: int) -> list:
    """All sweep rows for one family (one ``n``)."""
    psi = as_columns([s.build(family.cfg) for s in specs])
    labels = [s.label for s in specs]
    E2 = family.E2.as_list()
    AA = family.A_product()
    BB = family.B_product()
    EAA = sign_projections(AA).as_list()
    sym_single = sym_product(family.A2n, family.B1)
    sym_pair = sym_product(AA, BB)
    rows = []
    for k in range(1, k_max + 1):
        norms = lambda op: np.linalg.norm(op.apply(psi), axis=0)
        d = norms(disturbance(power(family.B1, k), E2))
        s1 = norms(disturbance(power(sym_single, k), E2))
        s2 = norms(disturbance(power(sym_pair, k), EAA))
        p = norms(disturbance(power(BB, k), EAA))
        for j, label in enumerate(labels):
            rows.append(
                DisturbanceRow(family.n, k, label, float(d[j]), float(max(s1[j], s2[j])), float(p[j]))
            )
    return rows


def _workers() -> int:
    env = os.environ.get("KSLAB_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def convergence_sweep(
    n_list: Sequence[int],
    c: int = 1,
    a: float = 1.0,
    N_rule: Callable[[int], int] | None = None,
    k_max: int = 4,
    states=STANDARD_FAMILY,
    workers: int | None = None,
) -> DisturbanceReport:
    """Disturbance norms for each ``n`` in ``n_list`` on its own commensurate torus.

    ``sym_delta_norm`` is the larger of ``||Delta((A2n o B1)^k; A2n) psi||`` and
    ``||Delta(((A1n A2n) o (B1 B2n))^k; A1n A2n) psi||``; both vanish exactly
    because each ``A`` squares to the identity.
    """
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    n_list = [int(n) for n in n_list]
    if not n_list:
        raise ValueError("empty n_list")
    rule = N_rule or (lambda n: default_grid_rule(n, c))
    families = {}
    for n in n_list:
        try:
            families[n] = make_family(rule(n), n, c, a)
        except CommensurabilityError as exc:
            raise CommensurabilityError(f"n={n}: {exc}", exc.minimal_N) from None
    workers = workers or _workers()
    with ThreadPoolExecutor(max_workers=min(workers, len(n_list))) as pool:
        chunks = list(pool.map(lambda n: sweep_row(families[n], states, k_max), n_list))
    rows = tuple(r for chunk in chunks for r in chunk)
    grids = {n: families[n].N for n in n_list}
    report = DisturbanceReport(rows, (math.nan, math.nan), grids)
    peaks = report.max_delta(1)
    if len(peaks) >= 2:
        x = np.log(np.array(list(peaks)))
        y = np.log(np.array(list(peaks.values())))
        slope, intercept = np.polyfit(x, y, 1)
        report = DisturbanceReport(rows, (float(slope), float(intercept)), grids)
    return report
