"""SRM two-port VNA calibration: python bindings over the C++ core."""

from ._srmcal import (  # noqa: F401
    CalibrationResult,
    ConfigError,
    DataError,
    ErrorModel,
    Network,
    NumericalError,
    __version__,
    apply_correction,
    calibrate_dir,
    cascade,
    error_metric,
    error_metric_db,
    fixture_error_model,
    load_error_model,
    mobius_apply,
    one_port,
    random_error_model,
    read_touchstone,
    run_mc,
    s_to_t,
    simulate,
    t_to_s,
    two_port,
    write_touchstone,
)
