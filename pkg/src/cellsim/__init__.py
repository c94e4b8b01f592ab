"""Reduced-order lithium-ion cell simulation with internal-state monitoring.

The package couples a fast reduced-order electrochemical engine (parabolic
electrolyte profiles, first-order solid-phase surrogates, closed-form pore-wall
flux distribution) with a full-order finite-volume reference solver used to
verify it.  Both share the same parameter laws and equilibrium-potential data.
"""

from cellsim.errors import (
    CellSimError,
    ConvergenceError,
    DegenerateModelError,
    ParameterError,
    ProfileValidityError,
    ScenarioError,
    TemperatureRangeError,
    WindowError,
)

__version__ = "0.1.0"

__all__ = [
    "CellSimError",
    "ConvergenceError",
    "DegenerateModelError",
    "ParameterError",
    "ProfileValidityError",
    "ScenarioError",
    "TemperatureRangeError",
    "WindowError",
    "__version__",
]
