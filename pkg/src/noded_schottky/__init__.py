"""Rank-3 Schottky groups from a two-parameter mirror family, near a noded limit."""

from .cline import Cline, circle, image, inversive_product, line, reflection, relate, tangency_point
from .family import (
    NODED_POINT,
    ParameterPoint,
    domain_membership,
    evaluate_pinch,
    generators,
    mirror_relation_table,
    mirrors,
    r_max,
    symmetry_report,
    w_orbit_check,
)
from .limitset import limit_set_sample, render
from .moebius import (
    INF,
    AntiMoebiusMap,
    MapKind,
    MoebiusMap,
    apply,
    classify,
    compose,
    fixed_points,
    invert,
    normalized_trace_squared,
    translation_length,
)
from .witness import WitnessCandidate, verify_witness, witness_search
from .words import enumerate_reduced_words, freeness_screen, jorgensen_screen

__all__ = [
    "INF", "NODED_POINT", "AntiMoebiusMap", "Cline", "MapKind", "MoebiusMap", "ParameterPoint",
    "WitnessCandidate", "apply", "circle", "classify", "compose", "domain_membership",
    "enumerate_reduced_words", "evaluate_pinch", "fixed_points", "freeness_screen", "generators",
    "image", "inversive_product", "invert", "jorgensen_screen", "limit_set_sample", "line",
    "mirror_relation_table", "mirrors", "normalized_trace_squared", "r_max", "reflection",
    "relate", "render", "symmetry_report", "tangency_point", "translation_length",
    "verify_witness", "w_orbit_check", "witness_search",
]
