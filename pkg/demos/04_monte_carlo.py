"""
Monte Carlo comparison tables
=============================

Fit the MSM for several k to a "market" series, simulate ensembles from the
fits and ask whether the market's scaling exponents fall inside the
ensemble 2.5-97.5% quantile bands. The market here is itself simulated.
Pass a replication count on the command line for bigger ensembles
(the library defaults are 100 for GHE and 1000 for Lo).
"""
import sys

from msmscaling import McConfig, MsmParams, gmm_estimate, rejection_table, run_ensemble, simulate
from msmscaling.montecarlo import scaling_statistics
from msmscaling.report import ghe_table, lo_h_table, render

reps = int(sys.argv[1]) if len(sys.argv) > 1 else 60
market = simulate(MsmParams(1.49, 1.0, 20), 9372, seed=2001)

config = McConfig(n_reps_ghe=reps, n_reps_lo=reps, k_set=(5, 10, 20), master_seed=1)

# %%
# One GMM fit per k
fits = {k: gmm_estimate(market, k) for k in config.k_set}
for k, f in fits.items():
    print(f"k={k:>2}: m0={f.m0_hat:.4f}  sigma={f.sigma_hat:.4f}")
params = {k: MsmParams(f.m0_hat, f.sigma_hat, k) for k, f in fits.items()}

# %%
# Ensembles; each replication is seeded from (master_seed, k, rep)
ensemble = run_ensemble(params, config)
empirical = scaling_statistics(market, config)

# %%
# Tables in the same CSV layout the CLI writes
print(render(ghe_table("market", empirical, ensemble), {"table": "ghe"}))
print(render(lo_h_table("market", empirical, ensemble), {"table": "lo_h"}))

# %%
# Rejections of the short-memory null, counting V above the upper critical value
counts = rejection_table(ensemble, tau_set=(0, 100))
for (k, tau, level), n in sorted(counts.items()):
    print(f"k={k:>2} tau={tau:>3} {int(level * 100)}%: {n}/{reps}")
