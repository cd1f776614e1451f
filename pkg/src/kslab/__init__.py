"""Position/momentum epsilon-obstruction laboratory on a periodic lattice."""

from .audit import AuditReport, ContradictionCertificate, contradiction_certificate, run_audit
from .disturb import convergence_sweep, disturbance, outcome_distribution
from .kscons import CommensurabilityError, ObstructionFamily, fantasy_unsat, make_family, relation_suite
from .lattice import Ensemble, LatticeConfig, PureState, gaussian_state, make_lattice, mixture
from .opalg import LinOp, ZeroGuardError, compose, sign_projections, sym_product
from .states import STANDARD_FAMILY, GaussianSpec

__all__ = [
    "AuditReport",
    "ContradictionCertificate",
    "contradiction_certificate",
    "run_audit",
    "convergence_sweep",
    "disturbance",
    "outcome_distribution",
    "CommensurabilityError",
    "ObstructionFamily",
    "fantasy_unsat",
    "make_family",
    "relation_suite",
    "Ensemble",
    "LatticeConfig",
    "PureState",
    "gaussian_state",
    "make_lattice",
    "mixture",
    "LinOp",
    "ZeroGuardError",
    "compose",
    "sign_projections",
    "sym_product",
    "STANDARD_FAMILY",
    "GaussianSpec",
]
