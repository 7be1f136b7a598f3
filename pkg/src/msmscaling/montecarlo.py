"""Monte Carlo comparison of empirical and MSM-implied scaling statistics.

For every cascade size ``k`` an ensemble of paths is simulated from the
fitted model; each path yields generalized Hurst exponents H(q) and Lo
statistics V and H at several truncation lags. Ensembles are summarized by
mean, standard deviation, 2.5/97.5 percent quantiles and (for V) counts of
rejections of the short-memory null.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Mapping

import numpy as np

from .exceptions import DomainError, MsmError
from .model import MsmParams, simulate
from .scaling import (
    DEFAULT_LO_TAUS,
    DEFAULT_TAU_MAX,
    LO_INTERVALS,
    ghe_averaged,
    lo_statistics,
)

__all__ = [
    "McConfig",
    "McSummary",
    "Ensemble",
    "replication_seed",
    "scaling_statistics",
    "run_ensemble",
    "nearest_rank_quantile",
    "quantile_coincidence",
    "rejection_table",
    "ghe_label",
    "v_label",
    "lo_h_label",
]

log = logging.getLogger(__name__)

MIN_COINCIDENCE_REPS = 40


def ghe_label(q: float) -> str:
    return f"H({q:g})"


def v_label(tau: int) -> str:
    return f"V(tau={tau})"


def lo_h_label(tau: int) -> str:
    return f"H_lo(tau={tau})"


@dataclass
class McConfig:
    """Settings of a Monte Carlo replication study.

    GHE statistics use the first ``n_reps_ghe`` paths of each ensemble and
    Lo statistics the first ``n_reps_lo``; paths are shared. ``lo_lag_zero``
    and ``rejection_tail`` select the Lo variant and the counting rule for
    rejections (see :func:`msmscaling.scaling.lo_statistic`).
    """

    n_reps_ghe: int = 100
    n_reps_lo: int = 1000
    T: int = 9372
    k_set: tuple[int, ...] = (5, 10, 15, 20)
    tau_set: tuple[int, ...] = DEFAULT_LO_TAUS
    q_set: tuple[float, ...] = (1.0, 2.0)
    tau_max_set: tuple[int, ...] = DEFAULT_TAU_MAX
    ghe_mode: str = "integrated"
    lo_lag_zero: bool = True
    rejection_tail: str = "upper"
    master_seed: int = 0
    burn_in: int = 0
    n_jobs: int = 1

    def __post_init__(self):
        for name in ("k_set", "tau_set", "q_set", "tau_max_set"):
            setattr(self, name, tuple(getattr(self, name)))
        if self.n_reps_ghe < 1 or self.n_reps_lo < 1:
            raise DomainError("replication counts must be at least 1")
        if self.T < 2:
            raise DomainError("T must be at least 2")
        if self.rejection_tail not in ("upper", "two-sided"):
            raise DomainError(f"unknown rejection tail {self.rejection_tail!r}")

    @property
    def n_paths(self) -> int:
        return max(self.n_reps_ghe, self.n_reps_lo)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class McSummary:
    label: str
    k: int
    mean: float
    std: float
    quantile_2_5: float
    quantile_97_5: float
    n_reps: int
    n_excluded: int = 0
    reject_95: int | None = None
    reject_99: int | None = None

    def to_record(self) -> dict:
        return asdict(self)


@dataclass
class Ensemble:
    """Per-replication statistics and their summaries, keyed by ``(k, label)``."""

    config: McConfig
    values: dict[tuple[int, str], np.ndarray] = field(default_factory=dict)
    summaries: dict[tuple[int, str], McSummary] = field(default_factory=dict)
    excluded: dict[int, list[int]] = field(default_factory=dict)

    def summary(self, k: int, label: str) -> McSummary:
        return self.summaries[(k, label)]

    def labels(self) -> list[str]:
        return list(dict.fromkeys(label for _, label in self.values))


def replication_seed(master_seed: int, k: int, rep: int) -> np.random.SeedSequence:
    """Seed of replication ``rep`` of the ``k``-level ensemble.

    Depends only on its arguments, so ensembles are reproducible and
    independent of execution order.
    """
    return np.random.SeedSequence([int(master_seed), int(k), int(rep)])


def scaling_statistics(r, config: McConfig, ghe: bool = True, lo: bool = True) -> dict[str, float]:
    """All scaling statistics of one return series under ``config``'s settings."""
    out: dict[str, float] = {}
    if ghe:
        for q in config.q_set:
            out[ghe_label(q)] = ghe_averaged(r, q, config.tau_max_set, config.ghe_mode).h
    if lo:
        proxy = np.abs(r.values if hasattr(r, "values") else np.asarray(r, dtype=float))
        for res in lo_statistics(proxy, config.tau_set, lag_zero=config.lo_lag_zero):
            out[v_label(res.tau)] = res.v_stat
            out[lo_h_label(res.tau)] = res.h
    return out


def _replicate(args):
    params, config, rep = args
    seed = replication_seed(config.master_seed, params.k, rep)
    try:
        r = simulate(params, config.T, seed=seed, burn_in=config.burn_in)
        return scaling_statistics(
            r, config, ghe=rep < config.n_reps_ghe, lo=rep < config.n_reps_lo
        )
    except MsmError as exc:
        log.warning("k=%d replication %d excluded: %s", params.k, rep, exc)
        return None


def nearest_rank_quantile(values, p: float) -> float:
    """Nearest-rank quantile: the ``ceil(p * n)``-th smallest value."""
    x = np.sort(np.asarray(values, dtype=float))
    if x.size == 0:
        raise DomainError("empty sample")
    return float(x[max(math.ceil(p * x.size) - 1, 0)])


def _summarize(label, k, vals, n_excluded, config) -> McSummary:
    vals = vals[~np.isnan(vals)]
    s = McSummary(
        label=label,
        k=k,
        mean=float(vals.mean()),
        std=float(vals.std(ddof=1)) if vals.size > 1 else 0.0,
        quantile_2_5=nearest_rank_quantile(vals, 0.025),
        quantile_97_5=nearest_rank_quantile(vals, 0.975),
        n_reps=int(vals.size),
        n_excluded=n_excluded,
    )
    if label.startswith("V("):
        s.reject_95 = _count_rejections(vals, LO_INTERVALS[0.95], config.rejection_tail)
        s.reject_99 = _count_rejections(vals, LO_INTERVALS[0.99], config.rejection_tail)
    return s


def _count_rejections(vals, interval, tail) -> int:
    lo, hi = interval
    if tail == "upper":
        return int(np.sum(vals > hi))
    return int(np.sum((vals < lo) | (vals > hi)))


def run_ensemble(params_per_k: Mapping[int, MsmParams], config: McConfig) -> Ensemble:
    """Simulate and summarize one ensemble per entry of ``params_per_k``.

    Replication ``r`` of level ``k`` is seeded by
    :func:`replication_seed` and the reduction runs in replication order,
    so the result is a pure function of ``(params_per_k, config)`` whatever
    ``config.n_jobs`` is. Replications raising a package error are
    excluded and counted.
    """
    ens = Ensemble(config=config)
    pool = ProcessPoolExecutor(config.n_jobs) if config.n_jobs > 1 else None
    try:
        for k, params in params_per_k.items():
            if params.k != k:
                raise DomainError(f"parameters for k={k} have k={params.k}")
            jobs = [(params, config, rep) for rep in range(config.n_paths)]
            results = list(pool.map(_replicate, jobs, chunksize=16) if pool else map(_replicate, jobs))
            ens.excluded[k] = [rep for rep, res in enumerate(results) if res is None]
            labels = list(dict.fromkeys(lbl for res in results if res for lbl in res))
            for label in labels:
                n = config.n_reps_ghe if label.startswith("H(") else config.n_reps_lo
                vals = np.array([res.get(label, np.nan) if res else np.nan for res in results[:n]])
                ens.values[(k, label)] = vals
                n_excluded = sum(1 for rep in ens.excluded[k] if rep < n)
                ens.summaries[(k, label)] = _summarize(label, k, vals, n_excluded, config)
    finally:
        if pool:
            pool.shutdown()
    return ens


def quantile_coincidence(empirical_value: float, ensemble_values) -> bool:
    """True iff the value lies within the ensemble's [2.5%, 97.5%] quantiles."""
    vals = np.asarray(ensemble_values, dtype=float)
    vals = vals[~np.isnan(vals)]
    if vals.size < MIN_COINCIDENCE_REPS:
        raise DomainError(
            f"ensemble of {vals.size} values too small for quantile coincidence "
            f"(need >= {MIN_COINCIDENCE_REPS})"
        )
    lo = nearest_rank_quantile(vals, 0.025)
    hi = nearest_rank_quantile(vals, 0.975)
    return bool(lo <= empirical_value <= hi)


def rejection_table(
    ensemble: Ensemble,
    tau_set=None,
    levels=(0.95, 0.99),
    tail: str | None = None,
    intervals: Mapping[float, tuple[float, float]] | None = None,
) -> dict[tuple[int, int, float], int]:
    """Count replications whose V statistic rejects, per ``(k, tau, level)``.

    ``intervals`` overrides the tabulated acceptance regions.
    """
    tau_set = ensemble.config.tau_set if tau_set is None else tau_set
    tail = ensemble.config.rejection_tail if tail is None else tail
    regions = dict(LO_INTERVALS)
    if intervals:
        regions.update(intervals)
    counts = {}
    for k in ensemble.excluded:
        for tau in tau_set:
            vals = ensemble.values[(k, v_label(tau))]
            vals = vals[~np.isnan(vals)]
            for level in levels:
                counts[(k, tau, level)] = _count_rejections(vals, regions[level], tail)
    return counts
