"""Stochastic climate trajectories from a deterministic forecast ensemble.

A member's raw forecast for each variable is mapped through an affine
bias correction fitted against the historical record, then perturbed
with i.i.d. Normal noise whose scale was calibrated on the member's
corrected backcast residuals.  One member is drawn uniformly per
simulation path and reused for every variable of that path; variables a
member does not supply fall back to a configured default member.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import ConfigError, MissingVariableError
from .rngs import RandomStreams

#: Canonical variable names and their native resolution.
ANNUAL_VARIABLES = ("rx5day", "fwixx")
MONTHLY_VARIABLES = ("sst", "sst_gradient", "mslp", "near_surface_temp", "mid_troposphere_temp")
VARIABLE_RESOLUTION: dict[str, str] = {
    **{v: "annual" for v in ANNUAL_VARIABLES},
    **{v: "monthly" for v in MONTHLY_VARIABLES},
}


@dataclass(frozen=True)
class MemberVariable:
    """One member's forecast of one variable plus its correction parameters.

    `forecast` holds raw (uncorrected) model output from `start_year` on:
    shape (n_years,) for annual variables, (n_years, 12) for monthly ones.
    """

    bias_intercept: float
    bias_slope: float
    noise_sigma: float
    forecast: np.ndarray
    start_year: int

    def __post_init__(self):
        arr = np.asarray(self.forecast, dtype=float)
        object.__setattr__(self, "forecast", arr)
        if self.noise_sigma < 0:
            raise ConfigError("noise_sigma must be >= 0")
        if not (np.isfinite(self.bias_intercept) and np.isfinite(self.bias_slope)):
            raise ConfigError("bias correction coefficients must be finite")
        if arr.ndim not in (1, 2) or (arr.ndim == 2 and arr.shape[1] != 12):
            raise ConfigError("forecast must be (n_years,) or (n_years, 12)")
        if not np.all(np.isfinite(arr)):
            raise ConfigError("forecast series must be gap-free (no NaN/inf)")

    @property
    def n_years(self) -> int:
        return self.forecast.shape[0]

    def window(self, start_year: int, n_years: int) -> np.ndarray:
        """Forecast slice covering [start_year, start_year + n_years)."""
        i0 = start_year - self.start_year
        if i0 < 0 or i0 + n_years > self.n_years:
            raise ConfigError(
                f"forecast covers {self.start_year}..{self.start_year + self.n_years - 1}, "
                f"requested {start_year}..{start_year + n_years - 1}"
            )
        return self.forecast[i0 : i0 + n_years]


@dataclass(frozen=True)
class EnsembleMember:
    model_id: str
    variables: Mapping[str, MemberVariable]


@dataclass
class ClimateTrajectory:
    """One simulated path of every climate covariate over the horizon.

    Year index 0 is the baseline (reference) year; indices 1..n_years-1
    are projection years.  Monthly arrays are (n_years, 12).
    """

    start_year: int
    n_years: int
    member_id: str
    annual: dict[str, np.ndarray] = field(default_factory=dict)
    monthly: dict[str, np.ndarray] = field(default_factory=dict)

    def year_index(self, year: int) -> int:
        idx = year - self.start_year
        if idx < 0 or idx >= self.n_years:
            raise KeyError(f"year {year} outside trajectory {self.start_year}..{self.start_year + self.n_years - 1}")
        return idx

    def has_variable(self, name: str) -> bool:
        return name in self.annual or name in self.monthly

    def annual_value(self, name: str, year: int) -> float:
        return float(self.annual[name][self.year_index(year)])

    def monthly_values(self, name: str, year: int) -> np.ndarray:
        return self.monthly[name][self.year_index(year)]


def apply_bias_correction(raw: float, member_variable: MemberVariable) -> float:
    """Affine map from raw model output to the bias-corrected value."""
    return member_variable.bias_intercept + member_variable.bias_slope * raw


def _resolve_variable(
    variable: str,
    member: EnsembleMember,
    default_member: EnsembleMember | None,
) -> MemberVariable:
    mv = member.variables.get(variable)
    if mv is not None:
        return mv
    if default_member is not None:
        mv = default_member.variables.get(variable)
        if mv is not None:
            return mv
    raise MissingVariableError(variable, member.model_id)


def simulate_climate_path(
    start_year: int,
    n_years: int,
    ensemble: Sequence[EnsembleMember],
    streams: RandomStreams,
    variables: Iterable[str] | None = None,
    default_member: EnsembleMember | None = None,
) -> ClimateTrajectory:
    """Draw one stochastic trajectory of all requested variables.

    One ensemble member is selected uniformly for the whole path.  Each
    variable's output is its bias-corrected forecast plus independent
    Normal(0, sigma^2) noise per period, drawn from a per-variable
    sub-stream so the trajectory does not depend on generation order.
    """
    if not ensemble:
        raise ConfigError("ensemble must contain at least one member")
    wanted = tuple(variables) if variables is not None else tuple(VARIABLE_RESOLUTION)
    for v in wanted:
        if v not in VARIABLE_RESOLUTION:
            raise ConfigError(f"unknown climate variable {v!r}")

    member = ensemble[int(streams.child("climate-member").integers(len(ensemble)))]
    traj = ClimateTrajectory(start_year=start_year, n_years=n_years, member_id=member.model_id)

    for variable in wanted:
        mv = _resolve_variable(variable, member, default_member)
        raw = mv.window(start_year, n_years)
        corrected = apply_bias_correction(raw, mv)
        if mv.noise_sigma > 0.0:
            noise = mv.noise_sigma * streams.child("climate-var", variable).standard_normal(raw.shape)
            values = corrected + noise
        else:
            values = np.array(corrected, dtype=float, copy=True)
        if VARIABLE_RESOLUTION[variable] == "annual":
            if values.ndim != 1:
                raise ConfigError(f"variable {variable!r} must have an annual forecast")
            traj.annual[variable] = values
        else:
            if values.ndim != 2:
                raise ConfigError(f"variable {variable!r} must have a monthly forecast")
            traj.monthly[variable] = values
    return traj
