"""Exception hierarchy shared across the simulation and calibration modules."""

from __future__ import annotations


class ClimdfaError(Exception):
    """Base class for all package errors."""


class ConfigError(ClimdfaError):
    """Invalid configuration or input data; maps to CLI exit code 2."""


class MissingVariableError(ClimdfaError):
    """A required climate variable is absent from the drawn ensemble member."""

    def __init__(self, variable: str, member_id: str):
        self.variable = variable
        self.member_id = member_id
        super().__init__(
            f"climate variable {variable!r} is not supplied by ensemble member "
            f"{member_id!r} and no fallback member provides it"
        )


class MissingCovariateError(ClimdfaError):
    """A hazard regression requires a covariate that was not supplied."""

    def __init__(self, hazard_id: str, covariate: str):
        self.hazard_id = hazard_id
        self.covariate = covariate
        super().__init__(
            f"hazard {hazard_id!r} requires covariate {covariate!r} which is missing"
        )


class FitError(ClimdfaError):
    """A statistical fit could not be carried out on the given data."""


class ConvergenceError(FitError):
    """An iterative fit failed to converge; carries the iteration trace."""

    def __init__(self, message: str, trace: list[float]):
        self.trace = trace
        super().__init__(f"{message} (log-likelihood trace: {trace})")


class SimulationError(ClimdfaError):
    """A numeric failure inside a simulation path; maps to CLI exit code 3."""

    def __init__(self, scenario_id: str, path_index: int, year: int, message: str):
        self.scenario_id = scenario_id
        self.path_index = path_index
        self.year = year
        super().__init__(
            f"simulation failed in scenario {scenario_id!r}, path {path_index}, "
            f"year {year}: {message}"
        )
