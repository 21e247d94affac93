"""Synthetic bird-strike classification toolkit (python facade over the C++ core)."""

from _aviary import (  # noqa: F401
    analytic_cca_accuracy,
    apply_darkness,
    apply_noise,
    apply_rain,
    apply_snow,
    bin_flock_size,
    class_report,
    fit_convnet,
    ForestModel,
    formation_names,
    alignment_names,
    size_bin_names,
    generate_corpus,
    KnnModel,
    load_png,
    load_species_table,
    macro_ovr_auc,
    place_formation,
    predict_with_model,
    render_bottom_view,
    render_side_view,
    resize,
    save_png,
    size_class_of,
    to_grayscale3,
)

__all__ = [
    "analytic_cca_accuracy",
    "apply_darkness",
    "apply_noise",
    "apply_rain",
    "apply_snow",
    "bin_flock_size",
    "class_report",
    "fit_convnet",
    "ForestModel",
    "formation_names",
    "alignment_names",
    "size_bin_names",
    "generate_corpus",
    "KnnModel",
    "load_png",
    "load_species_table",
    "macro_ovr_auc",
    "place_formation",
    "predict_with_model",
    "render_bottom_view",
    "render_side_view",
    "resize",
    "save_png",
    "size_class_of",
    "to_grayscale3",
]
