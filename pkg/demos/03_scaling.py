"""
Scaling exponents of volatility
===============================

Generalized Hurst exponents H(q) come from the structure function of the
integrated volatility proxy; Lo's modified R/S adds a Bartlett correction
for short memory. Both are compared here on Gaussian noise and on MSM
paths with few and many cascade levels.
"""
import numpy as np

from msmscaling import MsmParams, ghe_averaged, lo_statistics, simulate

T = 9372
rng = np.random.default_rng(3)
series = {
    "iid noise": rng.standard_normal(T),
    "MSM k=5": simulate(MsmParams(1.5, 1.0, 5), T, seed=5).values,
    "MSM k=20": simulate(MsmParams(1.5, 1.0, 20), T, seed=5).values,
}

# %%
# H(1) and H(2), averaged over fitting ranges tau_max = 5..19
for name, r in series.items():
    h1, h2 = (ghe_averaged(r, q) for q in (1, 2))
    print(f"{name:<10} H(1)={h1.h:.3f}  H(2)={h2.h:.3f}")

# %%
# Lo's statistic on |r|. V is compared with the Brownian-bridge range
# intervals; larger tau absorbs more short-range dependence
taus = (0, 5, 25, 100)
print("\n" + " " * 10 + "".join(f"  V(tau={t})" for t in taus))
for name, r in series.items():
    res = lo_statistics(np.abs(r), taus, lag_zero=True)
    print(f"{name:<10}" + "".join(f"{x.v_stat:11.3f}" for x in res))

# %%
# The textbook Bartlett sum starts at lag 1; the lag-zero variant adds the
# j = 0 term and shrinks V by sqrt(3) at tau = 0
r = np.abs(series["MSM k=20"])
for lag_zero in (False, True):
    res = lo_statistics(r, (0, 100), lag_zero=lag_zero)
    print(f"lag_zero={lag_zero!s:<5}  V(0)={res[0].v_stat:.3f}  V(100)={res[1].v_stat:.3f}  H(0)={res[0].h:.3f}")
