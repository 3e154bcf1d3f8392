"""Certified global minimization of quartically regularized cubic models.

The package builds explicit eigenvalue-checkable sum-of-squares certificates
for minimizers of

    m(s) = f0 + g.s + 1/2 H[s]^2 + 1/6 T[s]^3 + sigma/4 ||s||^4,

solves such models by multistart Newton with certification, and drives an
adaptive third-order regularization method with those solves.
"""

from types import ModuleType as _ModuleType

__version__ = "0.1.0"

from .ar3 import Ar3Config, Ar3Record, Ar3Trace, BasinCell, ar3_run, basin_map
from .bounds import (
    SigmaThresholds,
    StepBounds,
    convexify_radius,
    necessary_matrix,
    sos_sigma_full,
    step_bounds,
    sufficient_matrix,
    thresholds,
)
from .certificates import (
    Certificate,
    GramMatrix,
    TensorSplit,
    build_B,
    build_gram,
    certify,
    certify_qqr,
    certify_schnabel,
    certify_special_t,
    certify_univariate,
    schnabel_necessary,
    split_tensor,
)
from .errors import (
    DimensionMismatch,
    ModelFormatError,
    NotStationary,
    NuOutOfRange,
    OracleFailure,
    QuarticSosError,
    SolveFailed,
    Stalled,
    Unbounded,
    UnknownProblem,
)
from .io import dumps_model, load_model, loads_model, save_model
from .linalg import CERTIFIED, INCONCLUSIVE, VIOLATED, jacobi_eigh, psd_check
from .model import CubicModel, NormBundle, SymTensor3, norm_bundle
from .oracles import FunctionOracle, LeastSquaresOracle, ObjectiveOracle, taylor_model
from .problems import (
    make_ahmadi,
    make_euclidean_example,
    make_named,
    make_regularized_cubic_ball,
    make_sensor,
    random_sensor,
)
from .schnabel import SchnabelModel
from .solver import SolveOptions, SolveOutcome, minimize_certified, schnabel_minimize

__all__ = sorted(n for n, v in globals().items() if not n.startswith("_") and not isinstance(v, _ModuleType))
