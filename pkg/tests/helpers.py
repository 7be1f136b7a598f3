"""Independent oracles shared by the test modules."""
import numpy as np

from msmscaling.model import MsmParams, _blocks


def fgn(n, hurst, rng):
    """Exact fractional Gaussian noise by circulant embedding (Davies-Harte)."""
    k = np.arange(n + 1, dtype=float)
    acov = 0.5 * ((k + 1) ** (2 * hurst) - 2 * k ** (2 * hurst) + np.abs(k - 1) ** (2 * hurst))
    row = np.concatenate([acov, acov[-2:0:-1]])
    eig = np.fft.fft(row).real
    if np.any(eig < -1e-9):
        raise ValueError("circulant embedding is not non-negative definite")
    eig = np.clip(eig, 0, None)
    m = row.size
    z = rng.standard_normal(m) + 1j * rng.standard_normal(m)
    w = np.fft.fft(np.sqrt(eig / m) * z)
    return w.real[:n]


def simulated_moment_oracle(m0, k, lags, n_steps, seed, n_batches=1000, sigma=1.0):
    """Sample moments of a long simulated path with batch-means standard errors.

    The path is streamed block by block with a carried tail, so memory stays
    bounded at ``n_steps`` of order 1e7. Returns ``(means, std_errors)``
    laid out like :class:`msmscaling.moments.MomentVector` values.
    """
    lags = tuple(lags)
    span = 2 * max(lags)
    n_mom = 2 * len(lags) + 1
    batch_len = n_steps // n_batches
    sums = np.zeros((n_batches, n_mom))
    counts = np.zeros(n_batches)
    tail = np.empty(0)
    pos = 0  # path index of the current block's first element
    params = MsmParams(m0, sigma, k)
    for r, _, _ in _blocks(params, n_steps, seed, 0):
        la = np.concatenate([tail, np.log(np.abs(r))])
        offset = tail.size
        idx = np.arange(max(span - pos, 0), r.size)
        cols = []
        cur = la[offset + idx]
        for lag in lags:
            mid = la[offset + idx - lag]
            old = la[offset + idx - 2 * lag]
            cols += [(cur - mid) ** 2, (cur - mid) * (mid - old)]
        cols.append(r[idx] ** 2)
        vals = np.column_stack(cols)
        batch = np.minimum((pos + idx) // batch_len, n_batches - 1)
        np.add.at(counts, batch, 1)
        for j in range(n_mom):
            sums[:, j] += np.bincount(batch, weights=vals[:, j], minlength=n_batches)
        tail = la[-span:]
        pos += r.size
    batch_means = sums / counts[:, None]
    total = sums.sum(axis=0) / counts.sum()
    se = batch_means.std(axis=0, ddof=1) / np.sqrt(n_batches)
    return total, se
