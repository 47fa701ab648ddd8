"""Mixed quantum t-design measurements and their classical capacity.

Construction of the catalog families (qubit/qutrit SIC and complete MUB,
icosahedron, Hoggar SIC, anti-SICs, depolarized versions), exact design
certification through the permutation-operator commutant, capacity upper
bounds from Hermite interpolation, closed-form capacities, and an
independent Blahut-Arimoto oracle.
"""

from .core import (
    WeightedElementSet,
    eta,
    haar_random_state,
    mutual_information,
    pair_probability,
    pure_ensemble,
    relative_entropy,
)
from .catalog import (
    AdmissibleInterval,
    DesignSpec,
    FAMILIES,
    admissible_lambda,
    anti_design,
    build,
    depolarize,
    design_strength,
    moments_of_depolarized,
)
from .verify import (
    DesignCertificate,
    MomentVector,
    bell_polynomial,
    certify,
    gamma_empirical,
    gamma_predicted,
    moments,
)
from .bounds import (
    BoundReport,
    InterpolationSpec,
    bound_Ct,
    bound_from_set,
    hermite_interpolate,
    verify_below,
)
from .closedform import capacity, hyp2f1_11, optimal_ensemble, uniform_capacity
from .oracle import (
    OracleResult,
    StateGrid,
    blahut_arimoto,
    default_grid,
    discretized_uniform_povm,
    informational_power,
    kl_maximize,
    kl_objective,
)

__version__ = "0.1.0"

__all__ = [
    "AdmissibleInterval", "BoundReport", "DesignCertificate", "DesignSpec",
    "FAMILIES", "InterpolationSpec", "MomentVector", "OracleResult", "StateGrid",
    "WeightedElementSet", "admissible_lambda", "anti_design", "bell_polynomial",
    "blahut_arimoto", "bound_Ct", "bound_from_set", "build", "capacity", "certify",
    "default_grid", "depolarize", "design_strength", "discretized_uniform_povm",
    "eta", "gamma_empirical", "gamma_predicted", "haar_random_state",
    "hermite_interpolate", "hyp2f1_11", "informational_power", "kl_maximize",
    "kl_objective", "moments", "moments_of_depolarized", "mutual_information",
    "optimal_ensemble", "pair_probability", "pure_ensemble", "relative_entropy",
    "uniform_capacity", "verify_below",
]
