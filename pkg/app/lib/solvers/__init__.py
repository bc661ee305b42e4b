from .cubic import (
    ArcConditions,
    cauchy_step_arc,
    check_arc_conditions,
    negative_curvature_step_arc,
    ray_minimizer,
    refine_arc,
)
from .lanczos import LanczosResult, lanczos_min_eig
from .trust_region import (
    boundary_root,
    cauchy_point_tr,
    negative_curvature_step,
    steihaug_cg,
)

__all__ = [
    "ArcConditions",
    "LanczosResult",
    "boundary_root",
    "cauchy_point_tr",
    "cauchy_step_arc",
    "check_arc_conditions",
    "lanczos_min_eig",
    "negative_curvature_step",
    "negative_curvature_step_arc",
    "ray_minimizer",
    "refine_arc",
    "steihaug_cg",
]
