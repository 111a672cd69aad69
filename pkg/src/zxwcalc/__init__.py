"""Qudit ZXW diagrams with exact interpretation, verified rewrite rules,
and a normal-form decision procedure."""

from .diagram import (
    CORE_KINDS,
    Diagram,
    Dualiser,
    GreenSpider,
    Hadamard,
    HadamardDagger,
    Identity,
    LabeledBox,
    Multiplier,
    PinkSpider,
    ScalarBox,
    Triangle,
    TriangleInverse,
    VBox,
    WNode,
    WNodeGeneral,
    ZBox,
    bend_to_state,
    cap_diagram,
    compose_par,
    compose_seq,
    constant_phase,
    cup_diagram,
    expand_derived,
    expansion,
    fourier_phase,
    identity_diagram,
    in_port,
    input_pos,
    make_generator,
    one_hot_phase,
    ones_phase,
    out_port,
    output_pos,
    permutation_diagram,
    replace_node,
    validate,
    w_state_diagram,
    zeros_phase,
)
from .interpret import interpret, matrices_equal, semantics
from .normalform import (
    NormalForm,
    decide_equal,
    emit_diagram,
    generator_nf,
    layerize,
    matrix_to_nf,
    nf_permute,
    normalize,
    partial_trace_nf,
    tensor_nf,
    unique_sort,
)
from .rules import (
    RewriteRule,
    SoundnessReport,
    all_rules,
    apply_at,
    check_soundness,
    get_rule,
    verify_all,
)
from .io import parse_diagram, render_dot, serialize_diagram

__version__ = "0.1.0"

__all__ = [
    "CORE_KINDS",
    "Diagram",
    "Dualiser",
    "GreenSpider",
    "Hadamard",
    "HadamardDagger",
    "Identity",
    "LabeledBox",
    "Multiplier",
    "NormalForm",
    "PinkSpider",
    "RewriteRule",
    "ScalarBox",
    "SoundnessReport",
    "Triangle",
    "TriangleInverse",
    "VBox",
    "WNode",
    "WNodeGeneral",
    "ZBox",
    "all_rules",
    "apply_at",
    "bend_to_state",
    "cap_diagram",
    "check_soundness",
    "compose_par",
    "compose_seq",
    "constant_phase",
    "cup_diagram",
    "decide_equal",
    "emit_diagram",
    "expand_derived",
    "expansion",
    "fourier_phase",
    "generator_nf",
    "get_rule",
    "identity_diagram",
    "in_port",
    "input_pos",
    "interpret",
    "layerize",
    "make_generator",
    "matrices_equal",
    "matrix_to_nf",
    "nf_permute",
    "normalize",
    "one_hot_phase",
    "ones_phase",
    "out_port",
    "output_pos",
    "parse_diagram",
    "partial_trace_nf",
    "permutation_diagram",
    "render_dot",
    "replace_node",
    "semantics",
    "serialize_diagram",
    "tensor_nf",
    "unique_sort",
    "validate",
    "verify_all",
    "w_state_diagram",
    "zeros_phase",
]
