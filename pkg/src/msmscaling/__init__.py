"""Markov-switching multifractal volatility: simulation, GMM estimation and
scaling analysis (generalized Hurst exponents, Lo's modified R/S)."""

from .data import PriceSeries, load_csv, standardize, to_returns, write_csv
from .exceptions import DegenerateInputError, DomainError, MsmError, ParseError
from .model import (
    MsmParams,
    MsmState,
    ReturnSeries,
    init_state,
    simulate,
    simulate_path,
    step,
    transition_probabilities,
)
from .moments import (
    GmmConfig,
    GmmResult,
    MomentVector,
    analytic_moments,
    empirical_moments,
    gmm_estimate,
)
from .montecarlo import (
    Ensemble,
    McConfig,
    McSummary,
    quantile_coincidence,
    rejection_table,
    run_ensemble,
)
from .scaling import (
    GheResult,
    LoResult,
    ghe,
    ghe_averaged,
    lo_statistic,
    lo_statistics,
    rs_significance,
    structure_function,
)

__version__ = "0.1.0"
