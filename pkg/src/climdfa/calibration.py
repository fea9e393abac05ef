"""Statistical fitters for every model the engine consumes.

Covers the affine quantile map and residual noise of the climate layer,
Poisson frequency GLMs and lognormal severity regressions of the hazard
layer, AR(1) processes and linear regressions of the macro/asset layer,
and the method-of-moments dispersion of the non-catastrophe loss model.
All fitters are pure functions of their input arrays.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np
from scipy.special import gammaln

from .errors import ConvergenceError, FitError

#: 1%..99% in 1% steps; empirical quantiles use linear interpolation
#: between order statistics (numpy's default convention).
DEFAULT_QUANTILE_GRID = np.arange(1, 100) / 100.0

_SEPARATION_BOUND = 30.0
_IRLS_MAX_ITER = 100
_IRLS_RTOL = 1e-10


@dataclass(frozen=True)
class FitResult:
    """Coefficients plus the information-criterion bookkeeping of one fit.

    `aic = 2k - 2*loglik` and `bic = k*ln(n) - 2*loglik` with k the number
    of regression coefficients; an estimated residual scale is reported in
    `sigma` and deliberately not counted in k.
    """

    coefficients: dict[str, float]
    standard_errors: dict[str, float]
    log_likelihood: float
    aic: float
    bic: float
    n_obs: int
    sigma: float | None = None
    flags: tuple[str, ...] = field(default=())


class Ar1Fit(NamedTuple):
    mean: float
    ar_coeff: float
    sigma: float
    se_mean: float
    se_ar: float
    se_sigma: float


def _as_1d(x, name: str) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 1:
        raise FitError(f"{name} must be one-dimensional")
    return arr


def _design_matrix(covariates, n_rows: int | None = None) -> np.ndarray:
    X = np.asarray(covariates, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2:
        raise FitError("covariates must be a vector or a 2-d matrix")
    if n_rows is not None and X.shape[0] != n_rows:
        raise FitError(f"covariates have {X.shape[0]} rows, expected {n_rows}")
    return X


def _coef_names(names: Sequence[str] | None, k: int) -> list[str]:
    if names is None:
        return [f"b{j}" for j in range(k)]
    if len(names) != k:
        raise FitError(f"{len(names)} names given for {k} coefficients")
    return list(names)


def _check_full_rank(X: np.ndarray) -> None:
    if np.linalg.matrix_rank(X) < X.shape[1]:
        raise FitError("design matrix is rank deficient")


def fit_affine_quantile_map(
    historical,
    backcast,
    quantile_grid: np.ndarray | None = None,
) -> tuple[float, float]:
    """Fit `observed_quantile = intercept + slope * model_quantile`.

    Both series are reduced to empirical quantiles on the grid and the
    intercept/slope come from ordinary least squares across grid points.
    """
    hist = _as_1d(historical, "historical")
    back = _as_1d(backcast, "backcast")
    if hist.size == 0 or back.size == 0:
        raise FitError("quantile map needs non-empty series")
    grid = DEFAULT_QUANTILE_GRID if quantile_grid is None else np.asarray(quantile_grid, dtype=float)
    if grid.size < 2 or np.any(grid <= 0.0) or np.any(grid >= 1.0):
        raise FitError("quantile grid must hold at least two fractions in (0, 1)")
    qh = np.quantile(hist, grid)
    qb = np.quantile(back, grid)
    if np.ptp(qb) == 0.0:
        raise FitError("backcast quantiles are constant; affine map is unidentified")
    slope, intercept = np.polyfit(qb, qh, 1)
    return float(intercept), float(slope)


def fit_residual_sigma(historical, corrected_backcast) -> float:
    """Maximum-likelihood sigma of a mean-zero Normal on the residuals."""
    hist = _as_1d(historical, "historical")
    corr = _as_1d(corrected_backcast, "corrected_backcast")
    if hist.shape != corr.shape:
        raise FitError(f"series lengths differ: {hist.size} vs {corr.size}")
    if hist.size < 2:
        raise FitError("need at least two observations")
    resid = hist - corr
    return float(np.sqrt(np.mean(resid**2)))


def _poisson_loglik(y: np.ndarray, eta: np.ndarray) -> float:
    mu = np.exp(eta)
    return float(np.sum(y * eta - mu - gammaln(y + 1.0)))


def fit_poisson_glm(
    counts,
    covariates,
    offset=None,
    names: Sequence[str] | None = None,
) -> FitResult:
    """Log-link Poisson regression by iteratively reweighted least squares.

    The caller supplies the full design matrix (include a column of ones
    for an intercept).  Convergence is declared when the relative change
    in log-likelihood falls below 1e-10; the likelihood is kept
    non-decreasing by step halving.  Standard errors come from the
    observed information at the optimum.  Coefficients beyond +-30 on the
    log scale are flagged as (quasi-)separation.
    """
    y = _as_1d(counts, "counts")
    if np.any(y < 0) or np.any(y != np.round(y)):
        raise FitError("counts must be non-negative integers")
    X = _design_matrix(covariates, y.size)
    _check_full_rank(X)
    n, k = X.shape
    off = np.zeros(n) if offset is None else _as_1d(offset, "offset")
    if off.size != n:
        raise FitError("offset length mismatch")

    beta = np.zeros(k)
    # Start from the log of the mean response spread over the first column
    # when it looks like an intercept; otherwise zero is fine.
    if np.all(X[:, 0] == 1.0):
        beta[0] = np.log(max(y.mean(), 1e-8))
    eta = np.clip(X @ beta + off, -40.0, 40.0)
    loglik = _poisson_loglik(y, eta)
    trace = [loglik]

    converged = False
    for _ in range(_IRLS_MAX_ITER):
        mu = np.exp(eta)
        w = mu
        z = (eta - off) + (y - mu) / np.maximum(mu, 1e-300)
        XtW = X.T * w
        try:
            delta = np.linalg.solve(XtW @ X, XtW @ z) - beta
        except np.linalg.LinAlgError as exc:
            raise ConvergenceError(f"IRLS normal equations singular: {exc}", trace) from exc

        step = 1.0
        new_loglik = -np.inf
        for _ in range(40):
            cand = beta + step * delta
            eta_cand = np.clip(X @ cand + off, -40.0, 40.0)
            new_loglik = _poisson_loglik(y, eta_cand)
            if new_loglik >= loglik - 1e-13:
                beta, eta = cand, eta_cand
                break
            step *= 0.5
        else:
            # No ascent direction left: treat current point as optimum.
            new_loglik = loglik

        trace.append(new_loglik)
        if abs(new_loglik - loglik) <= _IRLS_RTOL * (abs(loglik) + 1e-12):
            loglik = new_loglik
            converged = True
            break
        loglik = new_loglik

    flags: tuple[str, ...] = ()
    if np.any(np.abs(beta) > _SEPARATION_BOUND):
        flags = ("separation",)
    elif not converged:
        raise ConvergenceError("Poisson IRLS did not converge in 100 iterations", trace)

    mu = np.exp(np.clip(X @ beta + off, -40.0, 40.0))
    info = (X.T * mu) @ X
    try:
        cov = np.linalg.inv(info)
        se = np.sqrt(np.clip(np.diag(cov), 0.0, None))
    except np.linalg.LinAlgError:
        se = np.full(k, np.nan)

    cnames = _coef_names(names, k)
    return FitResult(
        coefficients=dict(zip(cnames, beta.tolist())),
        standard_errors=dict(zip(cnames, se.tolist())),
        log_likelihood=loglik,
        aic=2.0 * k - 2.0 * loglik,
        bic=k * np.log(n) - 2.0 * loglik,
        n_obs=n,
        flags=flags,
    )


def _gaussian_loglik(n: int, rss: float) -> float:
    sigma2 = max(rss / n, 1e-300)
    return -0.5 * n * (np.log(2.0 * np.pi * sigma2) + 1.0)


def fit_ols(
    response,
    covariates,
    names: Sequence[str] | None = None,
) -> FitResult:
    """Least squares with classical standard errors and Gaussian AIC/BIC."""
    y = _as_1d(response, "response")
    X = _design_matrix(covariates, y.size)
    n, k = X.shape
    if n <= k:
        raise FitError(f"need more observations ({n}) than coefficients ({k})")
    _check_full_rank(X)

    beta, _, _, _ = np.linalg.lstsq(X, y, rcond=None)
    resid = y - X @ beta
    rss = float(resid @ resid)
    dof = n - k
    s2 = rss / dof if dof > 0 else np.nan
    cov = s2 * np.linalg.inv(X.T @ X)
    se = np.sqrt(np.clip(np.diag(cov), 0.0, None))
    loglik = _gaussian_loglik(n, rss)

    cnames = _coef_names(names, k)
    return FitResult(
        coefficients=dict(zip(cnames, beta.tolist())),
        standard_errors=dict(zip(cnames, se.tolist())),
        log_likelihood=loglik,
        aic=2.0 * k - 2.0 * loglik,
        bic=k * np.log(n) - 2.0 * loglik,
        n_obs=n,
        sigma=float(np.sqrt(rss / n)),
    )


def fit_lognormal_location(
    losses,
    covariates,
    names: Sequence[str] | None = None,
) -> FitResult:
    """Regress log losses on covariates; `sigma` is the MLE residual scale."""
    loss = _as_1d(losses, "losses")
    if np.any(loss <= 0.0):
        raise FitError("losses must be strictly positive for a lognormal fit")
    return fit_ols(np.log(loss), covariates, names=names)


def fit_ar1(series) -> Ar1Fit:
    """Conditional least squares for x_t = c + a*x_{t-1} + noise.

    Returns the stationary mean c/(1-a), the autoregressive coefficient
    and the residual standard deviation, each with a standard error (the
    mean's by the delta method).  A non-stationary slope estimate is
    returned as-is with a warning.
    """
    x = _as_1d(series, "series")
    if x.size < 3:
        raise FitError("AR(1) fit needs at least three observations")
    if np.ptp(x) == 0.0:
        raise FitError("series is constant; AR(1) is unidentified")

    lag, cur = x[:-1], x[1:]
    X = np.column_stack([np.ones(lag.size), lag])
    beta, _, _, _ = np.linalg.lstsq(X, cur, rcond=None)
    c, a = float(beta[0]), float(beta[1])
    resid = cur - X @ beta
    n = cur.size
    rss = float(resid @ resid)
    sigma = float(np.sqrt(rss / n))

    dof = max(n - 2, 1)
    cov = (rss / dof) * np.linalg.inv(X.T @ X)
    se_c, se_a = np.sqrt(np.diag(cov))
    cov_ca = cov[0, 1]

    if abs(a) >= 1.0:
        warnings.warn("AR(1) slope estimate is non-stationary (|a| >= 1)", stacklevel=2)
        mean = np.nan
        se_mean = np.nan
    else:
        mean = c / (1.0 - a)
        # Delta method for mu = c/(1-a).
        dc, da = 1.0 / (1.0 - a), c / (1.0 - a) ** 2
        se_mean = float(np.sqrt(dc * dc * cov[0, 0] + 2 * dc * da * cov_ca + da * da * cov[1, 1]))

    se_sigma = sigma / np.sqrt(2.0 * n)
    return Ar1Fit(mean, a, sigma, se_mean, float(se_a), float(se_sigma))


def fit_tweedie_dispersion(losses, mu: float, power: float) -> float:
    """Method-of-moments dispersion: sample variance divided by mu**power."""
    loss = _as_1d(losses, "losses")
    if loss.size == 0:
        raise FitError("empty sample")
    if not mu > 0.0:
        raise FitError("mu must be positive")
    if not 1.0 < power < 2.0:
        raise FitError("power must lie in (1, 2)")
    if loss.size == 1:
        return 0.0
    return float(np.var(loss, ddof=1) / mu**power)
