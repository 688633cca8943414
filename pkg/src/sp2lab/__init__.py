"""sp2lab: a numerical laboratory for perturbed metrics on Sp(2) and
the unit tangent bundle of S^4.

The package certifies, by cross-checked closed forms and an independent
finite-difference curvature oracle, that the two-parameter fiber
rescaling of the biinvariant metric on Sp(2) and its further Cheeger
deformation are nonnegatively curved, that the deformed quotient metric
on the unit tangent bundle of S^4 is positively curved away from an
explicit zero locus, and that the zero locus consists exactly of the
known flat-plane families.
"""

from .metrics import (
    INF,
    Biinvariant,
    CheegerDeformed,
    MetricParams,
    SplitMetric,
    cheeger_deform,
    full_metric,
    l_of_nu,
    nu_of_l,
)
from .sp2 import (
    Sp2Point,
    TangentVec,
    identity_point,
    representative_point,
    splitting_at,
    tangent_coords,
    tangent_from_coords,
)
from .curvature import (
    FLAT_THRESHOLD,
    fd_riemann,
    fd_sectional,
    hopf_A,
    riemann_at,
    vertizontal_curv,
)
from .submersions import (
    numerical_A,
    numerical_T,
    oneill_base_sectional,
    projection_residuals,
    q20_horizontal_basis,
)
from .zerolocus import (
    PlaneClassification,
    ScanReport,
    candidate_zero_planes,
    classify_plane_full,
    classify_plane_g_nu,
    scan_min_curvature,
    verify_flat_torus,
    zero_locus_membership,
)
from .topology import (
    HomologyReport,
    gluing_map,
    homology_E,
    transition_identity_check,
)
from .verify import run_suites

__version__ = "0.1.0"

__all__ = [
    "INF",
    "Biinvariant",
    "CheegerDeformed",
    "MetricParams",
    "SplitMetric",
    "cheeger_deform",
    "full_metric",
    "l_of_nu",
    "nu_of_l",
    "Sp2Point",
    "TangentVec",
    "identity_point",
    "representative_point",
    "splitting_at",
    "tangent_coords",
    "tangent_from_coords",
    "FLAT_THRESHOLD",
    "fd_riemann",
    "fd_sectional",
    "hopf_A",
    "riemann_at",
    "vertizontal_curv",
    "numerical_A",
    "numerical_T",
    "oneill_base_sectional",
    "projection_residuals",
    "q20_horizontal_basis",
    "PlaneClassification",
    "ScanReport",
    "candidate_zero_planes",
    "classify_plane_full",
    "classify_plane_g_nu",
    "scan_min_curvature",
    "verify_flat_torus",
    "zero_locus_membership",
    "HomologyReport",
    "gluing_map",
    "homology_E",
    "transition_identity_check",
    "run_suites",
    "__version__",
]
