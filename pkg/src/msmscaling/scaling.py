"""Scaling exponents: generalized Hurst exponents and Lo's modified R/S."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import DegenerateInputError, DomainError
from .model import ReturnSeries

__all__ = [
    "GheResult",
    "LoResult",
    "LO_INTERVALS",
    "structure_function",
    "ghe",
    "ghe_averaged",
    "ghe_input",
    "lo_statistic",
    "lo_statistics",
    "rs_significance",
]

DEFAULT_TAU_MAX = tuple(range(5, 20))
DEFAULT_LO_TAUS = (0, 5, 10, 25, 50, 100)
GHE_MODES = ("integrated", "raw")

# acceptance regions of V_T under the short-memory null (Brownian bridge range)
LO_INTERVALS = {0.95: (0.809, 1.862), 0.99: (0.721, 2.098)}


@dataclass
class GheResult:
    q: float
    h: float
    h_std: float
    tau_max_set: tuple[int, ...]
    mode: str


@dataclass
class LoResult:
    tau: int
    q_stat: float
    v_stat: float
    h: float
    reject_95: bool
    reject_99: bool
    n: int = 0


def _as_array(x) -> np.ndarray:
    if isinstance(x, ReturnSeries):
        x = x.values
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise DomainError("series must be one-dimensional")
    if not np.all(np.isfinite(x)):
        raise DomainError("series contains non-finite values")
    return x


def structure_function(x, q: float, tau: int, v: int = 1) -> float:
    """K_q(tau): mean of ``|x(t+tau) - x(t)|**q`` over ``|x(t)|**q``.

    Both averages run over the grid ``t = 0, v, 2v, ...``.
    """
    x = _as_array(x)
    if not q > 0:
        raise DomainError(f"q must be positive, got {q}")
    if int(v) != v or v < 1 or int(tau) != tau or tau < v:
        raise DomainError(f"need integers tau >= v >= 1, got tau={tau}, v={v}")
    if x.size <= tau:
        raise DomainError(f"series of length {x.size} too short for tau={tau}")
    grid = x[::v]
    denom = np.mean(np.abs(grid) ** q)
    if denom == 0:
        raise DegenerateInputError("structure function undefined for an identically zero series")
    start = x[: x.size - tau : v]
    end = x[tau::v][: start.size]
    return float(np.mean(np.abs(end - start) ** q) / denom)


def _log_structure(x: np.ndarray, q: float, tau_hi: int) -> np.ndarray:
    k = np.array([structure_function(x, q, tau) for tau in range(1, tau_hi + 1)])
    if np.any(k <= 0):
        raise DegenerateInputError("zero increments: the scaling fit is undefined (constant series?)")
    return np.log(k)


def _slopes(log_k: np.ndarray, tau_max_set) -> np.ndarray:
    out = []
    for tau_max in tau_max_set:
        log_tau = np.log(np.arange(1, tau_max + 1))
        out.append(np.polyfit(log_tau, log_k[:tau_max], 1)[0])
    return np.array(out)


def ghe(x, q: float, tau_max: int) -> float:
    """H(q) from the least-squares slope of ln K_q(tau) on ln tau, tau = 1..tau_max."""
    if int(tau_max) != tau_max or tau_max < 3:
        raise DomainError(f"tau_max must be an integer >= 3, got {tau_max}")
    x = _as_array(x)
    return float(_slopes(_log_structure(x, q, int(tau_max)), [int(tau_max)])[0] / q)


def ghe_input(r, mode: str = "integrated") -> np.ndarray:
    """Series fed to the structure function for a return series ``r``.

    ``integrated`` is the cumulative sum of demeaned ``|r_t|`` (a random
    walk for iid returns, giving H = 1/2); ``raw`` is ``|r_t|`` itself.
    """
    a = np.abs(_as_array(r))
    if mode == "integrated":
        return np.cumsum(a - a.mean())
    if mode == "raw":
        return a
    raise DomainError(f"unknown GHE mode {mode!r}; expected one of {GHE_MODES}")


def ghe_averaged(r, q: float = 1.0, tau_max_set=DEFAULT_TAU_MAX, mode: str = "integrated") -> GheResult:
    """Average H(q) of the volatility proxy over several fitting ranges."""
    tau_max_set = tuple(int(t) for t in tau_max_set)
    if not tau_max_set or min(tau_max_set) < 3:
        raise DomainError("tau_max values must be >= 3")
    x = ghe_input(r, mode)
    if x.size <= max(tau_max_set):
        raise DomainError(f"series of length {x.size} too short for tau_max={max(tau_max_set)}")
    hs = _slopes(_log_structure(x, q, max(tau_max_set)), tau_max_set) / q
    return GheResult(q=q, h=float(hs.mean()), h_std=float(hs.std()), tau_max_set=tau_max_set, mode=mode)


def _autocov_sums(d: np.ndarray, max_lag: int) -> np.ndarray:
    """``sum_i d_i d_{i-j}`` for j = 0..max_lag."""
    n = d.size
    if max_lag < 32:
        return np.array([d[j:] @ d[: n - j] for j in range(max_lag + 1)])
    size = 1 << int(np.ceil(np.log2(2 * n)))
    f = np.fft.rfft(d, size)
    sums = np.fft.irfft(f * np.conj(f), size)[: max_lag + 1]
    sums[0] = d @ d
    return sums


def _lo_from_sums(t_len, rng_, sums, tau, lag_zero):
    s2 = sums[0] / t_len
    first = 0 if lag_zero else 1
    j = np.arange(first, tau + 1)
    if j.size:
        s2 += 2.0 / t_len * np.sum((1.0 - j / (tau + 1.0)) * sums[j])
    if not s2 > 0:
        raise DegenerateInputError(f"non-positive long-run variance S_tau^2 = {s2} at tau={tau}")
    q_stat = rng_ / np.sqrt(s2)
    if not q_stat > 0:
        raise DegenerateInputError("range of partial sums is zero")
    v_stat = q_stat / np.sqrt(t_len)
    return LoResult(
        tau=tau,
        q_stat=float(q_stat),
        v_stat=float(v_stat),
        h=float(np.log(q_stat) / np.log(t_len)),
        reject_95=rs_significance(v_stat, 0.95),
        reject_99=rs_significance(v_stat, 0.99),
        n=t_len,
    )


def lo_statistics(x, taus=DEFAULT_LO_TAUS, lag_zero: bool = False) -> list[LoResult]:
    """:func:`lo_statistic` for several truncation lags sharing one pass."""
    x = _as_array(x)
    taus = [int(t) for t in taus]
    if any(t < 0 for t in taus):
        raise DomainError("truncation lags must be non-negative")
    t_len = x.size
    if t_len <= max(taus) + 2:
        raise DomainError(f"series of length {t_len} too short for tau={max(taus)}")
    d = x - x.mean()
    partial = np.cumsum(d)
    range_ = partial.max() - partial.min()
    sums = _autocov_sums(d, max(taus))
    return [_lo_from_sums(t_len, range_, sums, tau, lag_zero) for tau in taus]


def lo_statistic(x, tau: int = 0, lag_zero: bool = False) -> LoResult:
    """Lo's modified rescaled range of ``x`` with truncation lag ``tau``.

    ``S_tau^2 = S^2 + (2/T) sum_{j=1..tau} w_j sum_i d_i d_{i-j}`` with
    Bartlett weights ``w_j = 1 - j/(tau+1)`` and ``d`` the demeaned series;
    ``tau = 0`` is the classical R/S. With ``lag_zero=True`` the weighted
    sum also includes ``j = 0`` (weight 1), i.e. ``S_tau^2`` gains
    ``2 S^2``. The Monte Carlo harness defaults to this form.

    ``v_stat = Q / sqrt(T)`` and ``h = ln Q / ln T``. The rejection flags
    are two-sided tests against :data:`LO_INTERVALS`.
    """
    return lo_statistics(x, [tau], lag_zero=lag_zero)[0]


def rs_significance(v_stat: float, level: float = 0.95, tail: str = "two-sided") -> bool:
    """Whether ``v_stat`` rejects the short-memory null at ``level``.

    ``tail="upper"`` only counts exceedances of the upper critical value,
    i.e. evidence for long memory.
    """
    if level not in LO_INTERVALS:
        raise DomainError(f"unsupported level {level}; tabulated levels are {sorted(LO_INTERVALS)}")
    if not v_stat > 0:
        raise DomainError(f"v_stat must be positive, got {v_stat}")
    lo, hi = LO_INTERVALS[level]
    if tail == "upper":
        return bool(v_stat > hi)
    if tail == "two-sided":
        return bool(v_stat < lo or v_stat > hi)
    raise DomainError(f"unknown tail {tail!r}")
