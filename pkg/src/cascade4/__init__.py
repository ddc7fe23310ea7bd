"""Four-level cascade fluorescence simulator.

Exact master-equation dynamics plus the perturbative Laplace-domain
analytics of the strongly and weakly rf-driven regimes; second-order photon
correlations via the regression theorem; Cauchy-Schwarz ratio and
emission-delay scans.
"""

from . import correlations, dynamics, model, perturbation, ratfunc, validation
from .correlations import (
    CorrelationSeries,
    CSRatioResult,
    DelayScan,
    cs_ratio,
    default_tau_grid,
    g2,
    scan_tau_d,
    tau_delay,
)
from .dynamics import Trajectory, evolve, matrix_exponential, steady_state
from .errors import (
    Cascade4Error,
    ConfigError,
    GridMismatch,
    IllConditionedPoles,
    InvalidLevel,
    InvalidParams,
    NearPole,
    NoPeak,
    NonzeroDetuning,
    NotCatalogued,
    ParseError,
    RangeError,
    SingularGenerator,
    StepFailure,
    UnknownKey,
    ZeroSteadyState,
)
from .model import (
    AffineGenerator,
    DensityMatrix,
    SystemParams,
    build_generator,
    populations,
    prepare_state,
    preset,
)
from .perturbation import (
    Regime,
    RootSet,
    analytic_g2,
    analytic_g2_sum,
    appendix_rational,
    coefficient_identities,
    laplace_solve,
    root_set,
)
from .ratfunc import ExponentialSum, RationalFunction, invert_rational, talbot_invert
from .validation import ValidationReport, brute_force_evolve, run_validation

__version__ = "0.1.0"
