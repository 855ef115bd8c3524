"""Multivariate quantum reservoir computing toolkit.

Simulates a dissipative spin-network reservoir and a Gaussian
oscillator-network reservoir, drives them with multivariate signals
through three input encodings, and evaluates them with the mixing
capacity metric and Lorenz-63 one-step forecasting. Includes
quantum-resource diagnostics (negativity, squeezing), a self-contained
Parzen-estimator hyperparameter search, and a CLI experiment driver.
"""

from . import (
    encoding,
    experiments,
    hyperopt,
    metrics,
    numerics,
    quantum_props,
    readout,
    reservoir_cv,
    reservoir_dv,
    tasks,
)
from .numerics import Prng

__version__ = "0.1.0"

__all__ = [
    "Prng",
    "encoding",
    "experiments",
    "hyperopt",
    "metrics",
    "numerics",
    "quantum_props",
    "readout",
    "reservoir_cv",
    "reservoir_dv",
    "tasks",
]
