"""Exact spin-1/2 teleportation, local hidden-variable models, and a numerical
checker for the projection-versus-conditioning no-go argument."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    CandidateParseError,
    IntegrationError,
    TeleportHVError,
)
from .spinor_core import Direction  # noqa: E402
from .teleport import BellLabel  # noqa: E402
from .quadrature import IntegralResult, QuadratureSpec  # noqa: E402
from .hv_models import MODEL1, MODEL2, HvModel, TpCandidate, shipped_candidate  # noqa: E402
from .nogo import NogoReport, one_spin_nogo, tp_nogo  # noqa: E402

__all__ = [
    "BellLabel",
    "CandidateParseError",
    "Direction",
    "HvModel",
    "IntegralResult",
    "IntegrationError",
    "MODEL1",
    "MODEL2",
    "NogoReport",
    "QuadratureSpec",
    "TeleportHVError",
    "TpCandidate",
    "one_spin_nogo",
    "shipped_candidate",
    "tp_nogo",
]
