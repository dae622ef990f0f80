"""Symmetry-reduced Selberg zeta functions and resonances of Schottky surfaces."""
from .cycle import (
    OrbitTable,
    ZetaEvaluator,
    build_orbit_table,
    coeff_a,
    eval_full_zeta,
    eval_zeta,
    eval_zeta_derivative,
    euler_product_oracle,
    recurrence_B,
    relative_error,
    term_T,
)
from .groups import DihedralZ2Group, check_free_action, klein_four_group, trivial_group, z2_group
from .moebius import Disk, Matrix2, ScaledMatrix, cayley, displacement_length, mobius_apply, mobius_image_disk, product_scaled
from .resonances import (
    Resonance,
    SearchRegion,
    argument_count,
    contour_count,
    critical_exponent,
    find_resonances,
    find_zeros,
    refine_zeros,
    scan_resonances,
)
from .spectral import ResonanceSet, envelope, gap
from .surfaces import (
    SymmetricFunnels,
    ThreeFunnel,
    build_bowen_series,
    build_flow_adapted,
    closed_word_matrix,
    funnel_length,
    parse_surface,
    psi_for_length,
    validate_ifs,
)
from .symbolic import (
    GClosedPair,
    PrimeClassDatum,
    canonicalize,
    circle_walk,
    cross_check,
    enumerate_prime_classes_bruteforce,
    enumerate_prime_classes_reduced,
    iterate_pair,
)

__version__ = "0.1.0"
