"""Time-frequency operator workbench (Rust core, Python bindings)."""

from .tflab_py import (
    Signal,
    Tiles,
    Window,
    bichirp_pair,
    bilinear_tm,
    bilinear_tm_per_scale,
    chirp_train,
    descriptors,
    exp_sum_norm,
    fejer,
    greedy_cover,
    growth_study,
    jitter_min_scale,
    make_tiles,
    maximal_adjoint,
    orbit_distinct,
    project_window,
    shift_modulate,
    spike_train,
    square_function,
    theta_staircase,
    v2res,
    v2_translation_square,
)

__all__ = [
    "Signal",
    "Tiles",
    "Window",
    "bichirp_pair",
    "bilinear_tm",
    "bilinear_tm_per_scale",
    "chirp_train",
    "descriptors",
    "exp_sum_norm",
    "fejer",
    "greedy_cover",
    "growth_study",
    "jitter_min_scale",
    "make_tiles",
    "maximal_adjoint",
    "orbit_distinct",
    "project_window",
    "shift_modulate",
    "spike_train",
    "square_function",
    "theta_staircase",
    "v2res",
    "v2_translation_square",
]
