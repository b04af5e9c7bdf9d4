"""Trust-region bundle method with higher-order cutting-plane models.

A library for minimizing max-type nonsmooth functions with a vanishing
trust-region schedule whose regions eventually enclose the minimizer, plus
the seeded test problems and brute-force diagnostics used to verify that
behavior.
"""

from .builder import BuilderResult, BundleBuilderError, compute_W, stopping_threshold
from .diagnostics import (
    EstimateMethod,
    LambdaEstimate,
    ProbeWitness,
    RemainderEstimate,
    criticality_certificate,
    lambda_p,
    min_norm_hull_point,
    property_p_probe,
    remainder_constant_estimator,
    z_star_oracle,
)
from .driver import (
    DriverError,
    HandoffEntry,
    IterateRecord,
    LevelEnclosure,
    RunConfig,
    SolveResult,
    decrease_bound_certificates,
    enclosure_report,
    global_solve,
)
from .geometry import DEFAULT_TOL, NormKind, Point, Tolerances, TrustRegion, derive_rng, norm
from .model import Bundle, PointMemory, model_eval, model_gap, seed_bundle
from .oracle import FDCheckResult, OracleInterface, OracleSample, finite_difference_check, taylor_eval
from .problems import (
    Family,
    InstanceParseError,
    ProblemInstance,
    default_start,
    deserialize,
    generate,
    load_instance,
    oracle_of,
    save_instance,
    serialize,
)
from .subproblem import SolveStatus, SubproblemSolution, solve_linear, solve_quadratic, trs_exact

__version__ = "0.1.0"
