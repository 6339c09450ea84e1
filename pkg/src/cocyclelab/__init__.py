"""Numerical laboratory for linear cocycles over symbolic hyperbolic dynamics.

Subpackages cover the full pipeline: subshifts and Markov measures
(:mod:`cocyclelab.shifts`), structured matrix analysis
(:mod:`cocyclelab.linalg`), locally constant cocycles with holonomies and
simplicity checks (:mod:`cocyclelab.cocycles`), Lyapunov spectrum estimation
(:mod:`cocyclelab.lyapunov`), suspension flows (:mod:`cocyclelab.suspension`),
rotation numbers of projectivized blocks (:mod:`cocyclelab.rotation`),
shadowing diagnostics (:mod:`cocyclelab.shadowing`), and the reproducible
experiment driver (:mod:`cocyclelab.experiments`).
"""
from .shifts import (
    SftSpec,
    SymbolicPoint,
    MarkovMeasure,
    parse_word,
    spell_word,
    make_point,
    check_point,
    metric,
    periodic_point,
    homoclinic_point,
    parry_measure,
    gibbs_locally_constant,
)
from .linalg import (
    DegenerateSpectrumError,
    SpectrumRecord,
    sorted_spectrum,
    discriminant_distinct,
    standard_symplectic_form,
    is_symplectic,
    symplectic_diagonalize,
    paired_rotation,
    wedge_basis,
    exterior_power,
    twisting_check,
    twisting_witness,
    moduli_separation_perturb,
)
from .cocycles import (
    CocycleSpec,
    HoelderBump,
    HoelderPerturbation,
    evaluate,
    domination_check,
    stable_holonomy,
    unstable_holonomy,
    holonomy_constants,
    psi_transition,
    periodic_eigendata,
    pinching_check,
    SimplicityReport,
    simplicity_check,
    extend_splitting,
    cylinder_perturb,
    RotationFamily,
    rotation_perturb_family,
)
from .lyapunov import (
    LyapunovEstimate,
    lyapunov_qr,
    closed_form_oracle,
    multiplicity_cluster,
    exterior_sum_check,
)
from .suspension import (
    RoofFunction,
    SuspensionSystem,
    flow,
    period,
    HeightPolynomial,
    induced_potential,
    roof_integral,
    lift_measure_integral,
    time_change_scaling,
    FlowCocycle,
    return_cocycle,
    suspend_cocycle,
)
from .rotation import (
    CircleMap,
    projectivize_block,
    doubled_rotation_number,
    circle_cocycle,
    lift_record,
    rho_periodic,
    eigen_argument,
    theta_ell_rho_check,
    lift_theta_family,
    RhoMeasureEstimate,
    rho_measure,
)
from .shadowing import (
    homoclinic_family,
    exponential_shadowing_check,
    period_difference_bound,
    ToralAutomorphism,
    jittered_orbit,
    toral_close,
)

__version__ = "0.1.0"

__all__ = [
    "SftSpec",
    "SymbolicPoint",
    "MarkovMeasure",
    "parse_word",
    "spell_word",
    "make_point",
    "check_point",
    "metric",
    "periodic_point",
    "homoclinic_point",
    "parry_measure",
    "gibbs_locally_constant",
    "DegenerateSpectrumError",
    "SpectrumRecord",
    "sorted_spectrum",
    "discriminant_distinct",
    "standard_symplectic_form",
    "is_symplectic",
    "symplectic_diagonalize",
    "paired_rotation",
    "wedge_basis",
    "exterior_power",
    "twisting_check",
    "twisting_witness",
    "moduli_separation_perturb",
    "CocycleSpec",
    "HoelderBump",
    "HoelderPerturbation",
    "evaluate",
    "domination_check",
    "stable_holonomy",
    "unstable_holonomy",
    "holonomy_constants",
    "psi_transition",
    "periodic_eigendata",
    "pinching_check",
    "SimplicityReport",
    "simplicity_check",
    "extend_splitting",
    "cylinder_perturb",
    "RotationFamily",
    "rotation_perturb_family",
    "LyapunovEstimate",
    "lyapunov_qr",
    "closed_form_oracle",
    "multiplicity_cluster",
    "exterior_sum_check",
    "RoofFunction",
    "SuspensionSystem",
    "flow",
    "period",
    "HeightPolynomial",
    "induced_potential",
    "roof_integral",
    "lift_measure_integral",
    "time_change_scaling",
    "FlowCocycle",
    "return_cocycle",
    "suspend_cocycle",
    "CircleMap",
    "projectivize_block",
    "doubled_rotation_number",
    "circle_cocycle",
    "lift_record",
    "rho_periodic",
    "eigen_argument",
    "theta_ell_rho_check",
    "lift_theta_family",
    "RhoMeasureEstimate",
    "rho_measure",
    "homoclinic_family",
    "exponential_shadowing_check",
    "period_difference_bound",
    "ToralAutomorphism",
    "jittered_orbit",
    "toral_close",
    "__version__",
]
