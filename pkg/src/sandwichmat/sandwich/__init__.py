"""Sandwich semigroups of rectangular matrices over a finite field."""

from .context import (
    CornerImages,
    GreenKey,
    RegFlags,
    RegTriple,
    SandwichContext,
    context_from_rank,
    corner_images,
    dclass_leq,
    dclass_leq_matrix,
    green_key,
    green_labels,
    make_context,
    man_decompose,
    maximal_dclasses,
    phi_project,
    psi_embed,
    psi_reconstruct,
    reg_membership,
    regular_mask,
    star,
    structure,
)
from .regular import (
    hhat_structure,
    idempotent_mask,
    idempotents,
    man_congruence_check,
    mididentity_check,
    pullback_check,
    regular_elements,
    regularity_preserving,
)
from .classify import IsoResult, classify_iso, verify_witness
from .eggbox import EggboxReport, eggbox, parse_scope
