"""Quantum operational representation of stochastic matrices.

Embeds column-stochastic matrices as N-operator Kraus sets and checks
classical P-divisibility against CP-divisibility of the embedded maps.
"""
from .channels import (
    apply_channel,
    embed_F,
    essentially_same,
    gamma_reorder,
    inverse_F,
    is_completely_positive,
    is_cptp,
    matrix_form,
    pi_diagonalize,
)
from .classical import (
    TimeFamily,
    appendix_b_analysis,
    appendix_b_joint,
    chapman_kolmogorov_check,
    counterexample3_family,
    dichotomic_family,
    evolve,
    intermediate_matrix,
    stochastic_matrix,
)
from .divisibility import DivisibilityReport, assess, intermediate_channel, scan, trace_diagnostics
from .representation import (
    ClassSpec,
    alpha_partition,
    build_c,
    build_class_member,
    build_g,
    build_representation,
    invertibility_scan,
    is_essentially_classical,
    repair_dependence,
    unitary_mix,
    v_blocks,
)

__version__ = "0.1.0"
