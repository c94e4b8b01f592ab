"""Exception types shared across the package."""


class CellSimError(Exception):
    """Base class for all cellsim errors."""


class ParameterError(CellSimError):
    """Invalid, missing, or unknown cell parameter."""


class TemperatureRangeError(CellSimError):
    """Operating point outside the validity range of a material law."""


class DegenerateModelError(CellSimError):
    """A derived model quantity lost its required sign or magnitude."""


class ProfileValidityError(CellSimError):
    """Reconstructed concentration profile is non-physical."""


class OCPRangeError(CellSimError):
    """Stoichiometry or potential outside the tabulated equilibrium curve."""


class WindowError(CellSimError):
    """Stoichiometry-window solve failed or is infeasible."""


class ConvergenceError(CellSimError):
    """An iterative solve did not reach its tolerance."""


class ScenarioError(CellSimError):
    """Malformed scenario, profile, or measurement input."""


class CorrectionRangeError(CellSimError):
    """Closed-loop stoichiometry correction has no root in its bracket."""
