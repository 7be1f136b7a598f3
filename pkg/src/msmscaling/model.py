"""Binomial Markov-switching multifractal (MSM) volatility process.

Returns follow ``r_t = sigma_t * u_t`` with ``u_t`` iid N(0, 1) and

    sigma_t**2 = sigma**2 * prod_i M_t^(i),   M_t^(i) in {m0, 2 - m0}.

Level ``i`` of the cascade is renewed with probability
``gamma_i = 1 - (1 - gamma_k) ** (b ** (i - k))``; a renewal is a fresh
fair draw over the two values and may reproduce the current one.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from .exceptions import DomainError

__all__ = [
    "MsmParams",
    "MsmState",
    "ReturnSeries",
    "transition_probabilities",
    "init_state",
    "step",
    "simulate",
    "simulate_path",
]

TRANSFORMS = ("log_diff", "diff", "raw")

# rows per simulation block; bounds memory on long paths
_CHUNK = 1 << 16


@dataclass(frozen=True)
class MsmParams:
    """Parameters of one binomial MSM model.

    ``gamma_k`` and ``b`` default to the parsimonious specification
    (``b = 2``, ``gamma_k = 0.5``) used throughout the package.
    """

    m0: float
    sigma: float
    k: int
    gamma_k: float = 0.5
    b: float = 2.0

    def __post_init__(self):
        if not (1.0 <= self.m0 < 2.0):
            raise DomainError(f"m0 must satisfy 1 <= m0 < 2, got {self.m0}")
        if not (self.sigma > 0 and np.isfinite(self.sigma)):
            raise DomainError(f"sigma must be positive and finite, got {self.sigma}")
        if int(self.k) != self.k or self.k < 1:
            raise DomainError(f"k must be a positive integer, got {self.k}")
        object.__setattr__(self, "k", int(self.k))
        _check_switching(self.gamma_k, self.b)

    @property
    def multiplier_values(self) -> tuple[float, float]:
        return self.m0, 2.0 - self.m0

    def probabilities(self) -> np.ndarray:
        return transition_probabilities(self.k, self.gamma_k, self.b)


@dataclass(frozen=True)
class MsmState:
    """Cascade state: one bit per level, ``True`` selecting ``m0``.

    ``rng_state`` is the bit-generator state to resume from, so a state can
    be passed between calls of :func:`step` without sharing a generator.
    """

    bits: np.ndarray
    m0: float
    rng_state: dict | None = field(default=None, compare=False, repr=False)

    @property
    def k(self) -> int:
        return self.bits.size

    @property
    def multipliers(self) -> np.ndarray:
        return np.where(self.bits, self.m0, 2.0 - self.m0)

    def variance_factor(self) -> float:
        n_low = int(self.bits.sum())
        return self.m0**n_low * (2.0 - self.m0) ** (self.k - n_low)


@dataclass
class ReturnSeries:
    """A return series together with how it was produced."""

    values: np.ndarray
    transform: str = "raw"
    standardized: bool = False
    label: str = ""

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 1:
            raise DomainError("return series must be one-dimensional")
        if self.values.size < 2:
            raise DomainError(f"return series needs at least 2 values, got {self.values.size}")
        if not np.all(np.isfinite(self.values)):
            raise DomainError("return series contains non-finite values")
        if self.transform not in TRANSFORMS:
            raise DomainError(f"unknown transform {self.transform!r}; expected one of {TRANSFORMS}")
        if self.standardized and abs(np.std(self.values) - 1.0) > 1e-9:
            raise DomainError("series flagged standardized but its standard deviation is not 1")

    def __len__(self) -> int:
        return self.values.size


def _check_switching(gamma_k, b):
    if not (0.0 < gamma_k <= 1.0):
        raise DomainError(f"gamma_k must lie in (0, 1], got {gamma_k}")
    if not b > 1.0:
        raise DomainError(f"b must exceed 1, got {b}")


def transition_probabilities(k: int, gamma_k: float = 0.5, b: float = 2.0) -> np.ndarray:
    """Renewal probabilities ``gamma_1 .. gamma_k`` of the cascade levels.

    >>> transition_probabilities(2).round(6)
    array([0.292893, 0.5     ])
    """
    if int(k) != k or k < 1:
        raise DomainError(f"k must be a positive integer, got {k}")
    _check_switching(gamma_k, b)
    exponents = float(b) ** (np.arange(1, int(k) + 1) - int(k))
    probs = -np.expm1(exponents * np.log1p(-gamma_k)) if gamma_k < 1 else np.ones(int(k))
    probs[-1] = gamma_k
    return probs


def init_state(params: MsmParams, seed=None) -> MsmState:
    """Draw each multiplier from its stationary distribution (1/2 on each value)."""
    rng = np.random.default_rng(seed)
    bits = rng.random(params.k) < 0.5
    return MsmState(bits=bits, m0=params.m0, rng_state=rng.bit_generator.state)


def _resume(state: MsmState) -> np.random.Generator:
    rng = np.random.default_rng()
    if state.rng_state is not None:
        rng.bit_generator.state = state.rng_state
    return rng


def step(state: MsmState, probs, rng: np.random.Generator | None = None) -> MsmState:
    """Advance the cascade by one period.

    Each level is renewed independently with probability ``probs[i]``. One
    uniform per level decides both: ``u < p/2`` renews to ``m0``,
    ``p/2 <= u < p`` renews to ``2 - m0``, anything else keeps the value.
    Without ``rng`` the generator stored in ``state`` is resumed.
    """
    probs = np.asarray(probs, dtype=float)
    if probs.shape != state.bits.shape:
        raise DomainError("probs must have one entry per cascade level")
    own = rng is None
    if own:
        rng = _resume(state)
    u = rng.random(state.k)
    bits = np.where(u < probs, u < 0.5 * probs, state.bits)
    return MsmState(bits=bits, m0=state.m0, rng_state=rng.bit_generator.state if own else None)


def _cascade_block(bits: np.ndarray, u: np.ndarray, probs: np.ndarray) -> np.ndarray:
    """Vectorized equivalent of applying :func:`step` to each row of ``u``.

    Returns the (n, k) bit path; row ``t`` is the state after the ``t``-th
    renewal round. A level holds the bit drawn at its most recent renewal,
    or the incoming ``bits`` if it has not been renewed within the block.
    """
    n, k = u.shape
    renew = u < probs
    fresh = u < 0.5 * probs
    last = np.where(renew, np.arange(n)[:, None], -1)
    np.maximum.accumulate(last, axis=0, out=last)
    drawn = fresh[np.maximum(last, 0), np.arange(k)]
    return np.where(last >= 0, drawn, bits)


def _blocks(params: MsmParams, T: int, seed, burn_in: int) -> Iterator[tuple[np.ndarray, np.ndarray, np.ndarray]]:
    rng = np.random.default_rng(seed)
    probs = params.probabilities()
    bits = rng.random(params.k) < 0.5
    m0, m1 = params.multiplier_values
    n = np.arange(params.k + 1)
    # variance for each possible count of levels sitting at m0
    var_by_count = params.sigma**2 * m0**n * m1 ** (params.k - n)

    total = T + burn_in
    done = 0
    while done < total:
        size = min(_CHUNK, total - done)
        path = _cascade_block(bits, rng.random((size, params.k)), probs)
        bits = path[-1]
        variance = var_by_count[path.sum(axis=1)]
        returns = np.sqrt(variance) * rng.standard_normal(size)
        lo = max(burn_in - done, 0)
        if lo < size:
            yield returns[lo:], path[lo:], variance[lo:]
        done += size


def _check_length(T, burn_in):
    if int(T) != T or T < 2:
        raise DomainError(f"T must be an integer >= 2, got {T}")
    if int(burn_in) != burn_in or burn_in < 0:
        raise DomainError(f"burn_in must be a non-negative integer, got {burn_in}")


def simulate(params: MsmParams, T: int, seed=None, burn_in: int = 0, label: str = "") -> ReturnSeries:
    """Simulate ``T`` returns from the MSM model.

    The cascade starts in its stationary distribution, so no burn-in is
    needed; ``burn_in`` periods are simulated and discarded if requested.
    Output is a deterministic function of ``(params, T, seed, burn_in)``.
    """
    _check_length(T, burn_in)
    parts = [r for r, _, _ in _blocks(params, int(T), seed, int(burn_in))]
    return ReturnSeries(np.concatenate(parts), transform="raw", label=label)


def simulate_path(params: MsmParams, T: int, seed=None, burn_in: int = 0):
    """Like :func:`simulate` but also return the cascade.

    Returns ``(returns, bits, variance)`` where ``bits[t, i]`` is True when
    level ``i`` sits at ``m0`` in period ``t`` and ``variance[t]`` is the
    instantaneous variance that scaled the innovation.
    """
    _check_length(T, burn_in)
    rets, paths, variances = zip(*_blocks(params, int(T), seed, int(burn_in)))
    return np.concatenate(rets), np.concatenate(paths), np.concatenate(variances)
