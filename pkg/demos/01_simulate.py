"""
Simulating a Markov-switching multifractal
==========================================

Volatility is a product of k binary multipliers, each switching on its own
time scale. This script simulates a path, looks at the cascade state and
checks a few basic properties of the returns.
"""
import numpy as np

from msmscaling import MsmParams, simulate, simulate_path, transition_probabilities

# %%
# Level i renews with probability gamma_i; the top level renews most often
print("gamma:", np.round(transition_probabilities(8), 5))

# %%
# A path, along with the multiplier states and the conditional variance
params = MsmParams(m0=1.5, sigma=1.0, k=8)
r, bits, variance = simulate_path(params, 20_000, seed=42)
print("multiplier values:", params.multiplier_values)
print("share of high states per level:", np.round(bits.mean(axis=0), 3))

# %%
# E[prod M] = 1 so the unconditional variance is sigma^2, but the tails are
# fat: the kurtosis of r is well above the Gaussian 3
print("mean r^2 =", round(float(np.mean(r**2)), 3))
print("kurtosis =", round(float(np.mean(r**4) / np.mean(r**2) ** 2), 2))

# %%
# |r| is autocorrelated over long horizons (volatility clustering), r is not
a = np.abs(r) - np.abs(r).mean()
for lag in (1, 10, 100, 1000):
    print(f"lag {lag:>4}: acf |r| = {a[lag:] @ a[:-lag] / (a @ a):6.3f}   "
          f"acf r = {r[lag:] @ r[:-lag] / (r @ r):6.3f}")

# %%
# m0 = 1 switches the cascade off and leaves iid Gaussian noise
flat = simulate(MsmParams(1.0, 2.0, 8), 100_000, seed=1).values
print("m0=1 variance:", round(float(flat.var()), 3))
