"""Moment bounds and particle simulation for the homogeneous Boltzmann
equation with hard-potential cutoff kernels.

The heavy lifting lives in the compiled extension ``boltzlab._core``; this
package re-exports its public entry points.
"""

from ._core import (
    ConfigError,
    emit_plots,
    gamma,
    run_experiment,
    simulate,
    verify,
)

__all__ = [
    "ConfigError",
    "emit_plots",
    "gamma",
    "run_experiment",
    "simulate",
    "verify",
]

__version__ = "0.1.0"
