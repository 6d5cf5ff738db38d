"""stovk: operator-valued kernel regression and kernel Koopman forecasting
for time-varying vector fields, plus the experiment harness that drives
the convergence, spectrum, and forecasting studies.
"""

from .errors import (
    ConfigError,
    ConvergenceFailure,
    DimensionMismatch,
    EmptyCloud,
    NonpositiveStep,
    NonpositiveValue,
    NotPositiveDefinite,
    RankOutOfRange,
    UnsupportedFamily,
    ZeroMatrix,
)
from .harness import (
    ExperimentConfig,
    ResultRecord,
    default_config,
    emit_results,
    l2_error_quadrature,
    loglog_slope,
    run_exp1,
    run_exp2,
    run_exp3,
    run_experiment,
)
from .kernels import (
    GAUSSIAN,
    SEPARABLE,
    TIME_ALIGNED,
    OperatorKernel,
    ScalarKernel,
    eval_dt_dtprime,
    eval_dt_operator,
    eval_operator,
    eval_scalar,
    operator_gram,
    operator_gram_dt,
    scalar_gram,
)
from .koopman import (
    KoopmanModel,
    SpectralForecast,
    build_forecast,
    fit_koopman,
    forecast_at,
    koopman_apply,
)
from .linalg import (
    SpectralDecomposition,
    eig_general,
    spd_solve,
    truncated_pinv,
)
from .ovkr import (
    FittedField,
    RidgeConfig,
    SliceInterpolants,
    TrainingSet,
    assemble_block_gram,
    fit,
    interpolate_slices,
    predict,
    predict_batch,
    predict_dt,
    predict_dt_batch,
    ridge_objective,
    rkhs_norm_sq,
)
from .sampling import (
    PointCloud,
    TrajectoryPairs,
    eval_test_field,
    fill_distance,
    flow_rk4,
    halton_points,
    make_trajectory_pairs,
)

__version__ = "0.1.0"
