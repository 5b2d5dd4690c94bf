"""Simulation and verification harness for interacting Brownian particle systems.

Finite-volume windows of infinite systems are evolved under two schemes --
reflecting ("lower") and absorbing-with-entering ("upper") -- plus a
large-domain reference integrator, starting from equilibrium point fields
(sine_beta, Bessel, Ginibre, Ruelle-class Gibbs).  Statistical diagnostics
check invariance, moment bounds, tail integrals and the convergence of the
schemes toward each other.
"""

__version__ = "0.1.0"

from .configuration import (
    Configuration,
    LabeledConfig,
    label_by_modulus,
    read_configuration_csv,
    restrict,
    write_configuration_csv,
)
from .cutoffs import (
    CutoffParams,
    ball_cutoff,
    core_cutoff,
    default_shell_caps,
    occupancy_cutoff,
    shell_caps_plus,
    within_shell_caps,
)
from .models import (
    ModelSpec,
    PairPotential,
    bessel_model,
    bump_potential,
    gaussian_potential,
    ginibre_model,
    intensity,
    kernel_eval,
    pair_correlation,
    ruelle_model,
    sine_model,
    zero_potential,
)

__all__ = [
    "__version__",
    "Configuration",
    "LabeledConfig",
    "label_by_modulus",
    "restrict",
    "read_configuration_csv",
    "write_configuration_csv",
    "CutoffParams",
    "ball_cutoff",
    "core_cutoff",
    "occupancy_cutoff",
    "within_shell_caps",
    "shell_caps_plus",
    "default_shell_caps",
    "ModelSpec",
    "PairPotential",
    "sine_model",
    "bessel_model",
    "ginibre_model",
    "ruelle_model",
    "zero_potential",
    "gaussian_potential",
    "bump_potential",
    "kernel_eval",
    "pair_correlation",
    "intensity",
]
