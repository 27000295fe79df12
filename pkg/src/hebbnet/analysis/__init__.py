"""R1 counting, receptive fields, patch mining and artifact export."""

from hebbnet.analysis.export import (
    crop_patches,
    default_grid,
    export_features,
    export_image_grid,
    export_patches,
    export_r1,
    features_to_csv,
    patches_to_csv,
    plot_metrics,
    ppm_bytes,
    r1_to_csv,
    render_grid,
)
from hebbnet.analysis.models import (
    BoundingBox,
    LayerR1,
    PatchActivation,
    R1Report,
    ReceptiveField,
)
from hebbnet.analysis.patches import FieldGeometry, field_geometry, top_activating_patches
from hebbnet.analysis.r1 import count_r1
from hebbnet.analysis.receptive_field import (
    center_position,
    cosine_similarity,
    embedded_kernel,
    linear_response,
    linear_response_gradient,
    receptive_field_pgd,
    response_percentile,
)

__all__ = [
    "BoundingBox",
    "FieldGeometry",
    "LayerR1",
    "PatchActivation",
    "R1Report",
    "ReceptiveField",
    "center_position",
    "cosine_similarity",
    "count_r1",
    "crop_patches",
    "default_grid",
    "embedded_kernel",
    "export_features",
    "export_image_grid",
    "export_patches",
    "export_r1",
    "features_to_csv",
    "field_geometry",
    "linear_response",
    "linear_response_gradient",
    "patches_to_csv",
    "plot_metrics",
    "ppm_bytes",
    "r1_to_csv",
    "receptive_field_pgd",
    "render_grid",
    "response_percentile",
    "top_activating_patches",
]
