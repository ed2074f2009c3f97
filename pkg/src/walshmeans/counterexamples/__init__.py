"""Finite-scale versions of the two divergence constructions.

:mod:`.pointwise` builds the one-variable function whose weighted means blow
up along adversarial indices; :mod:`.in_measure` builds the two-variable
sequence witnessing divergence in measure of tensor-product means.
"""
from .pointwise import (
    AdversarialIndex,
    DivergenceReport,
    LevelPlan,
    adversarial_index,
    build_EN,
    build_f,
    build_PN,
    divergence_report,
    kernel_part_closed_form,
    level_indices,
    plan_from_weights,
    theta_points,
)
from .in_measure import (
    EXHAUSTIVE_LIMIT,
    MeasureReport,
    SteinReport,
    greedy_translates,
    measure_experiment,
    stein_sign_search,
    tensor_fk,
)

__all__ = [
    "EXHAUSTIVE_LIMIT", "AdversarialIndex", "DivergenceReport", "LevelPlan", "MeasureReport", "SteinReport",
    "adversarial_index", "build_EN", "build_PN", "build_f", "divergence_report",
    "greedy_translates", "kernel_part_closed_form",    "level_indices", "measure_experiment", "plan_from_weights", "stein_sign_search",
    "tensor_fk", "theta_points",
]
