"""Closed-form moments of the binomial MSM and a two-step GMM estimator.

The moment conditions use ``xi_{t,T} = ln|r_t| - ln|r_{t-T}|``. Writing
``lam = (ln m0 - ln(2 - m0)) / 2`` and ``rho_i(T) = (1 - gamma_i) ** T``
(the lag-T autocorrelation of the centered log multiplier of level i):

    E[xi_{t,T}^2]              =  sum_i lam^2 / 2 * (1 - rho_i)     + 2 Var ln|u|
    E[xi_{t,T} * xi_{t-T,T}]   = -sum_i lam^2 / 4 * (1 - rho_i)^2   -   Var ln|u|
    E[r_t^2]                   =  sigma^2

The xi moments do not depend on sigma, which enters only through E[r^2].
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .exceptions import DegenerateInputError, DomainError
from .model import ReturnSeries, transition_probabilities

__all__ = [
    "LOG_ABS_NORMAL_MEAN",
    "LOG_ABS_NORMAL_VAR",
    "MomentVector",
    "GmmConfig",
    "GmmResult",
    "analytic_moments",
    "empirical_moments",
    "moment_contributions",
    "newey_west",
    "gmm_estimate",
]

log = logging.getLogger(__name__)

# E[ln|u|] and Var[ln|u|] for u ~ N(0, 1)
LOG_ABS_NORMAL_MEAN = -0.5 * (np.euler_gamma + np.log(2.0))
LOG_ABS_NORMAL_VAR = np.pi**2 / 8.0

DEFAULT_LAGS = (1, 5, 10, 20)
_M0_LO, _M0_HI = 1.0 + 1e-6, 2.0 - 1e-6


@dataclass
class MomentVector:
    """Moment values laid out as ``[E xi_1^2, E xi_1 xi_1', ..., E r^2]``.

    ``n_obs`` and ``n_dropped`` are only meaningful for empirical vectors.
    """

    lags: tuple[int, ...]
    values: np.ndarray
    kind: str
    n_obs: int = 0
    n_dropped: int = 0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.size != 2 * len(self.lags) + 1:
            raise DomainError("moment vector length must be 2 * len(lags) + 1")

    @property
    def xi_sq(self) -> np.ndarray:
        return self.values[0:-1:2]

    @property
    def xi_cross(self) -> np.ndarray:
        return self.values[1:-1:2]

    @property
    def r_sq(self) -> float:
        return float(self.values[-1])


def _check_lags(lags) -> tuple[int, ...]:
    lags = tuple(int(x) for x in lags)
    if not lags:
        raise DomainError("lag set must be non-empty")
    if any(x < 1 for x in lags) or list(lags) != sorted(set(lags)):
        raise DomainError(f"lags must be distinct positive integers in ascending order, got {lags}")
    return lags


def _half_log_ratio(m0):
    if not (1.0 <= m0 < 2.0):
        raise DomainError(f"m0 must satisfy 1 <= m0 < 2, got {m0}")
    return 0.5 * (np.log(m0) - np.log(2.0 - m0))


def _decay_sums(probs: np.ndarray, lags: tuple[int, ...]):
    """Per-lag sums of (1 - rho_i) and (1 - rho_i)^2 over cascade levels."""
    t = np.asarray(lags, dtype=float)[:, None]
    with np.errstate(divide="ignore"):
        one_minus_rho = -np.expm1(t * np.log1p(-probs))
    return one_minus_rho.sum(axis=1), (one_minus_rho**2).sum(axis=1)


def _moment_values(lam_sq, sigma, a, c):
    out = np.empty(2 * a.size + 1)
    out[0:-1:2] = 0.5 * lam_sq * a + 2.0 * LOG_ABS_NORMAL_VAR
    out[1:-1:2] = -0.25 * lam_sq * c - LOG_ABS_NORMAL_VAR
    out[-1] = sigma**2
    return out


def analytic_moments(m0, k, gamma_k=0.5, b=2.0, sigma=1.0, lags=DEFAULT_LAGS) -> MomentVector:
    """Model-implied moment vector for the binomial MSM."""
    lags = _check_lags(lags)
    lam = _half_log_ratio(m0)
    a, c = _decay_sums(transition_probabilities(k, gamma_k, b), lags)
    return MomentVector(lags, _moment_values(lam * lam, sigma, a, c), kind="analytic")


def _values_of(series) -> np.ndarray:
    if isinstance(series, ReturnSeries):
        return series.values
    return np.asarray(series, dtype=float)


def moment_contributions(series, lags=DEFAULT_LAGS):
    """Per-observation moment functions, one row per usable date.

    Row ``t`` (for ``t >= 2 * max(lags)``) holds ``xi_{t,T}^2`` and
    ``xi_{t,T} xi_{t-T,T}`` for every lag followed by ``r_t^2``. Rows that
    touch a zero return (where ``ln|r|`` is undefined) are dropped.

    Returns ``(h, n_dropped, n_zero)``.
    """
    lags = _check_lags(lags)
    r = _values_of(series)
    span = 2 * lags[-1]
    if r.size <= span + 10:
        raise DegenerateInputError(
            f"series of length {r.size} too short for lags up to {lags[-1]} (need > {span + 10})"
        )
    zero = r == 0.0
    with np.errstate(divide="ignore"):
        logabs = np.where(zero, np.nan, np.log(np.abs(r)))
    n = r.size - span
    h = np.empty((n, 2 * len(lags) + 1))
    cur = logabs[span:]
    for j, lag in enumerate(lags):
        mid = logabs[span - lag : r.size - lag]
        old = logabs[span - 2 * lag : r.size - 2 * lag]
        xi, xi_prev = cur - mid, mid - old
        h[:, 2 * j] = xi * xi
        h[:, 2 * j + 1] = xi * xi_prev
    h[:, -1] = r[span:] ** 2
    keep = ~np.isnan(h).any(axis=1)
    n_zero = int(zero.sum())
    if n_zero:
        log.info("%d zero returns: dropped %d of %d moment rows", n_zero, n - keep.sum(), n)
    return h[keep], int(n - keep.sum()), n_zero


def empirical_moments(series, lags=DEFAULT_LAGS) -> MomentVector:
    """Sample analogues of :func:`analytic_moments`."""
    h, n_dropped, _ = moment_contributions(series, lags)
    if h.shape[0] < 30:
        raise DegenerateInputError(f"only {h.shape[0]} usable observations after dropping zero returns")
    return MomentVector(
        _check_lags(lags), h.mean(axis=0), kind="empirical", n_obs=h.shape[0], n_dropped=n_dropped
    )


def newey_west(h: np.ndarray, lag: int) -> np.ndarray:
    """Bartlett-weighted long-run covariance of the rows of ``h``.

    ``h`` is used as given (not demeaned); pass centered moment functions.
    """
    h = np.asarray(h, dtype=float)
    n = h.shape[0]
    s = h.T @ h / n
    for j in range(1, min(int(lag), n - 1) + 1):
        g = h[j:].T @ h[:-j] / n
        s += (1.0 - j / (lag + 1.0)) * (g + g.T)
    return s


@dataclass
class GmmConfig:
    """Knobs of :func:`gmm_estimate`.

    ``hac_lag=None`` uses ``floor(n ** 0.25)``. ``iterate`` switches from
    two-step to iterated GMM (weighting matrix re-estimated until the
    parameters settle or ``max_iter`` rounds have run).
    """

    lags: tuple[int, ...] = DEFAULT_LAGS
    hac_lag: int | None = None
    tol: float = 1e-8
    m0_starts: tuple[float, ...] = (1.1, 1.3, 1.5, 1.7, 1.9)
    sigma_starts: tuple[float, ...] = (0.5, 1.0, 2.0)
    iterate: bool = False
    max_iter: int = 50
    gamma_k: float = 0.5
    b: float = 2.0

    @classmethod
    def from_dict(cls, d: dict) -> "GmmConfig":
        d = dict(d)
        for key in ("lags", "m0_starts", "sigma_starts"):
            if key in d:
                d[key] = tuple(d[key])
        return cls(**d)


@dataclass
class GmmResult:
    m0_hat: float
    sigma_hat: float
    std_errors: tuple[float, float]
    j_statistic: float
    iterations: int
    converged: bool
    at_boundary: bool = False
    k: int = 0
    lags: tuple[int, ...] = field(default=DEFAULT_LAGS)
    n_obs: int = 0
    n_dropped: int = 0

    def to_record(self) -> dict:
        """Flat record in the column order of a GMM estimates table."""
        return {
            "k": self.k,
            "m0": self.m0_hat,
            "sigma": self.sigma_hat,
            "se_m0": self.std_errors[0],
            "se_sigma": self.std_errors[1],
            "j_stat": self.j_statistic,
            "n_obs": self.n_obs,
            "converged": self.converged,
            "at_boundary": self.at_boundary,
        }


class _Objective:
    """GMM quadratic form on data scaled to unit mean square."""

    def __init__(self, hbar, probs, lags):
        self.hbar = hbar
        self.a, self.c = _decay_sums(probs, lags)

    def moments(self, theta):
        lam = _half_log_ratio(theta[0])
        return _moment_values(lam * lam, theta[1], self.a, self.c)

    def jacobian(self, theta):
        m0, sigma = theta
        lam = _half_log_ratio(m0)
        dlam_sq = lam * (1.0 / m0 + 1.0 / (2.0 - m0))
        jac = np.zeros((self.hbar.size, 2))
        jac[0:-1:2, 0] = 0.5 * dlam_sq * self.a
        jac[1:-1:2, 0] = -0.25 * dlam_sq * self.c
        jac[-1, 1] = 2.0 * sigma
        return jac

    def __call__(self, theta, w):
        g = self.moments(theta) - self.hbar
        wg = w @ g
        return float(g @ wg), 2.0 * self.jacobian(theta).T @ wg


def _minimize(obj: _Objective, w, cfg: GmmConfig, starts):
    best = None
    for x0 in starts:
        res = minimize(
            obj, x0, args=(w,), jac=True, method="L-BFGS-B",
            bounds=[(_M0_LO, _M0_HI), (1e-8, None)],
            options={"ftol": cfg.tol, "gtol": 1e-10, "maxiter": 1000},
        )
        if best is None or res.fun < best.fun:
            best = res
    return best


def gmm_estimate(series, k: int, lags=None, config: GmmConfig | None = None) -> GmmResult:
    """Estimate ``(m0, sigma)`` of a binomial MSM with ``k`` levels by GMM.

    First step uses identity weighting, second step the inverse Newey-West
    covariance of the moment functions evaluated at the first-step
    estimate. Standard errors come from the GMM sandwich formula. The data
    are rescaled to unit mean square internally; the xi moments are
    scale-free, so only ``sigma`` and its standard error are mapped back.
    """
    cfg = config or GmmConfig()
    lags = _check_lags(lags if lags is not None else cfg.lags)
    r = _values_of(series)
    scale = float(np.sqrt(np.mean(r * r)))
    if not scale > 0:
        raise DegenerateInputError("series is identically zero")
    h, n_dropped, _ = moment_contributions(r / scale, lags)
    n = h.shape[0]
    if n < 30:
        raise DegenerateInputError(f"only {n} usable observations after dropping zero returns")
    hac_lag = cfg.hac_lag if cfg.hac_lag is not None else int(np.floor(n**0.25))

    obj = _Objective(h.mean(axis=0), transition_probabilities(k, cfg.gamma_k, cfg.b), lags)
    starts = [(m, s) for m in cfg.m0_starts for s in cfg.sigma_starts]

    def long_run_cov(theta):
        return newey_west(h - obj.moments(theta), hac_lag)

    w = np.eye(h.shape[1])
    res = _minimize(obj, w, cfg, starts)
    iterations = res.nit
    rounds = cfg.max_iter if cfg.iterate else 1
    for _ in range(rounds):
        prev = res.x
        w = np.linalg.pinv(long_run_cov(prev), hermitian=True)
        res = _minimize(obj, w, cfg, [tuple(prev)] + starts)
        iterations += res.nit
        if np.max(np.abs(res.x - prev)) < 1e-7:
            break

    theta = res.x
    s = long_run_cov(theta)
    jac = obj.jacobian(theta)
    bread = np.linalg.pinv(jac.T @ w @ jac)
    cov = bread @ (jac.T @ w @ s @ w @ jac) @ bread / n
    se = np.sqrt(np.clip(np.diag(cov), 0.0, None))
    g = obj.moments(theta) - obj.hbar
    j_stat = float(n * g @ np.linalg.pinv(s, hermitian=True) @ g)

    m0_hat = float(theta[0])
    pinned = m0_hat <= _M0_LO + 1e-4 or m0_hat >= _M0_HI - 1e-4
    # near m0 = 1 only lambda^2 ~ (m0 - 1)^2 is identified; flag when it is
    # not significantly positive, i.e. the data cannot tell m0 from 1
    lam = _half_log_ratio(m0_hat)
    se_lam_sq = abs(lam * (1.0 / m0_hat + 1.0 / (2.0 - m0_hat))) * se[0]
    at_boundary = pinned or lam * lam < 1.96 * se_lam_sq
    if at_boundary:
        log.warning("m0 estimate %.6f is at or indistinguishable from the boundary of [1, 2)", m0_hat)
    return GmmResult(
        m0_hat=m0_hat,
        sigma_hat=float(theta[1]) * scale,
        std_errors=(float(se[0]), float(se[1]) * scale),
        j_statistic=j_stat,
        iterations=int(iterations),
        converged=bool(res.success),
        at_boundary=bool(at_boundary),
        k=int(k),
        lags=lags,
        n_obs=n,
        n_dropped=n_dropped,
    )
