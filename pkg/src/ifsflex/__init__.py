"""Thermodynamic and multifractal invariants of conformal iterated function
systems on the line, with rigidity and flexibility tools for affine systems."""

from .conjugacy import (
    ConjugacyApprox,
    HolderEstimate,
    build_h,
    cauchy_profile,
    estimate_holder,
    holder_exponent_theory,
)
from .errors import (
    ConvergenceError,
    DegenerateSystemError,
    DomainError,
    EnumerationTooLarge,
    IFSError,
    InadmissibleTripleError,
    NoRootError,
    PeelingPrecisionError,
    SchemaError,
    SpectrumDomainError,
)
from .ifs_model import (
    CF12,
    AffineBranch,
    AffineSystem,
    ConformalSystem,
    MoebiusBranch,
    ValidationReport,
    continued_fraction_system,
    cylinder_interval,
    system_from_dict,
    system_to_dict,
    validate,
)
from .multifractal import (
    SpectrumCurve,
    alpha_bounds,
    beta_of_alpha,
    dim_spectrum_tau,
    lyapunov_spectrum,
    spectrum_curve,
)
from .rigidity import (
    AdmissibleTriple,
    LyapunovWitness,
    canonical_form,
    cohomologous_depth1,
    deform,
    equivalent_eas,
    gibbs_equal_up_to_permutation,
    is_admissible,
    lyapunov_related,
    multiflex_check,
    recover_rates_from_pressure,
)
from .shift_space import Word, birkhoff_sum, enumerate_words, periodic_orbit_sums
from .thermo import (
    DimensionResult,
    gibbs_weights,
    hausdorff_dimension,
    pressure,
    pressure_derivative,
    pressure_oracle,
    tabulated_oracle,
)
from .transfer_operator import build_operator, leading_eigen, operator_pressure

__version__ = "0.1.0"
