"""Event-camera simulation by adaptive Monte Carlo path tracing."""

from ._core import (
    LogLumStats,
    Scene,
    SimConfig,
    SimMode,
    UserError,
    __version__,
    accumulate,
    load_scene,
    log_samples,
    one_tailed_test,
    parse_scene,
    polarity_f1,
    read_events,
    read_pfm,
    rmse_psnr,
    signed_chamfer,
    simulate,
    student_t_cdf,
    t_statistic,
    termination_rule,
    trace_paths,
    write_events,
    write_pfm,
)

__all__ = [
    "LogLumStats",
    "Scene",
    "SimConfig",
    "SimMode",
    "UserError",
    "__version__",
    "accumulate",
    "load_scene",
    "log_samples",
    "one_tailed_test",
    "parse_scene",
    "polarity_f1",
    "read_events",
    "read_pfm",
    "rmse_psnr",
    "signed_chamfer",
    "simulate",
    "student_t_cdf",
    "t_statistic",
    "termination_rule",
    "trace_paths",
    "write_events",
    "write_pfm",
]
