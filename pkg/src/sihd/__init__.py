"""Semi-implicit homogeneous differentiation and observer-based ODE integration."""

__version__ = "0.1.0"

from .core import (
    DiffParams,
    DiffState,
    Differentiator,
    DivergenceError,
    ProjectorResult,
    estimate,
    injection,
    projector,
    sd_bound,
    signed_power,
    step,
)
from .ode import (
    IntegrationError,
    OdeProblem,
    PsiRule,
    SihdSchemeConfig,
    catalog,
    euler_step,
    get_problem,
    integrate,
    nsfd_sihd_step,
    psi_eval,
    rk4_step,
)
from .records import RunRecord, read_csv
from .signals import SignalSpec, SineSource

__all__ = [
    "DiffParams",
    "DiffState",
    "Differentiator",
    "DivergenceError",
    "IntegrationError",
    "OdeProblem",
    "ProjectorResult",
    "PsiRule",
    "RunRecord",
    "SignalSpec",
    "SihdSchemeConfig",
    "SineSource",
    "catalog",
    "estimate",
    "euler_step",
    "get_problem",
    "injection",
    "integrate",
    "nsfd_sihd_step",
    "projector",
    "psi_eval",
    "read_csv",
    "rk4_step",
    "sd_bound",
    "signed_power",
    "step",
]
