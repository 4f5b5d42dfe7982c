import json
import math
from dataclasses import replace

import numpy as np
import pytest

from noded_schottky.cline import DegenerateClineError
from noded_schottky.family import ParameterPoint, generators, mirrors, r_max
from noded_schottky.moebius import apply, invert
from noded_schottky.witness import (
    EVIDENCE_NOTE,
    OrientedCircle,
    WitnessCandidate,
    verify_witness,
    witness_search,
)

DEEP = ParameterPoint(0.9, 0.1)
NEAR_NODED = ParameterPoint(0.51, 0.99 * r_max(0.51))


def circumcircle(z1, z2, z3):
    # center equidistant from three points (plain Euclidean formula)
    ax, ay, bx, by, cx, cy = z1.real, z1.imag, z2.real, z2.imag, z3.real, z3.imag
    d = 2 * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by))
    ux = ((ax * ax + ay * ay) * (by - cy) + (bx * bx + by * by) * (cy - ay) + (cx * cx + cy * cy) * (ay - by)) / d
    uy = ((ax * ax + ay * ay) * (cx - bx) + (bx * bx + by * by) * (ax - cx) + (cx * cx + cy * cy) * (bx - ax)) / d
    c = complex(ux, uy)
    return c, abs(z1 - c)


def euclidean_discs(cand, gens):
    """(center, radius, bounded?) for all six discs, images by three-point fits."""
    discs = []
    for a, f, inside in zip(cand.alphas, gens.as_tuple(), cand.image_inside):
        discs.append((a.center, a.radius, a.inside))
        pts = [a.center + a.radius * np.exp(1j * t) for t in (0.1, 2.2, 4.4)]
        c, R = circumcircle(*[apply(f, z) for z in pts])
        discs.append((c, R, inside))
    return discs


def in_disc(z, disc):
    c, R, bounded = disc
    return abs(z - c) < R if bounded else abs(z - c) > R


def ping_pong_holds(cand, gens, rng, n=4000):
    """Monte-Carlo ping-pong: A_j sends everything outside alpha_j's disc into alpha'_j's."""
    discs = euclidean_discs(cand, gens)
    pts = 6 * (rng.uniform(-1, 1, n) + 1j * rng.uniform(-1, 1, n))
    for j, f in enumerate(gens.as_tuple()):
        src, dst = discs[2 * j], discs[2 * j + 1]
        for z in pts:
            if not in_disc(z, src):
                w = apply(f, z)
                if not in_disc(w, dst):
                    return False
            if not in_disc(z, dst):
                w = apply(invert(f), z)
                if not in_disc(w, src):
                    return False
    return True


@pytest.fixture(scope="module")
def deep_report():
    return witness_search(generators(DEEP), seed=0, mirror_system=mirrors(DEEP))


def test_search_finds_witness_in_deep_interior(deep_report):
    assert deep_report.verdict == "witness-found"
    assert deep_report.margin > 0
    check = verify_witness(deep_report.candidate, generators(DEEP))
    assert check.passed, check.margins
    assert check.exterior_point is not None


def test_witness_is_a_real_ping_pong_system(deep_report, rng):
    assert ping_pong_holds(deep_report.candidate, generators(DEEP), rng)


def test_hand_built_candidate():
    # discs found once by the search at (0.9, 0.1), rounded to a few digits;
    # alpha_3 is the circle |z| = 1/r whose image is |z| = r
    gens = generators(DEEP)
    alphas = (
        OrientedCircle(-1.45, 0.4013, 1.1564, True),
        OrientedCircle(-0.45, -0.9013, 0.1565, True),
        OrientedCircle(0.0, 0.0, 10.0, False),
    )
    cand = WitnessCandidate.from_alphas(alphas, gens)
    images = cand.images(gens)
    assert abs(images[2].radius - 0.1) < 1e-12
    assert verify_witness(cand, gens).passed


def test_candidate_with_flipped_side_fails_side_test(deep_report):
    gens = generators(DEEP)
    cand = deep_report.candidate
    a1 = cand.alphas[0]
    flipped = replace(cand, alphas=(replace(a1, inside=not a1.inside),) + cand.alphas[1:])
    check = verify_witness(flipped, gens)
    assert not check.passed
    assert not check.conditions["sides"]


def test_intersecting_candidate_fails_disjointness():
    gens = generators(DEEP)
    alphas = (
        OrientedCircle(0.5, 0.5, 1.0, True),
        OrientedCircle(0.5, -0.5, 1.0, True),
        OrientedCircle(0.0, 0.0, 10.0, False),
    )
    check = verify_witness(WitnessCandidate.from_alphas(alphas, gens), gens)
    assert not check.conditions["disjoint"]
    assert not check.passed


def test_degenerate_radius_raises():
    gens = generators(DEEP)
    alphas = (
        OrientedCircle(0.5, 0.5, 1e-12, True),
        OrientedCircle(0.5, -0.5, 1.0, True),
        OrientedCircle(0.0, 0.0, 10.0, False),
    )
    with pytest.raises(DegenerateClineError):
        verify_witness(WitnessCandidate(alphas, (True, True, True)), gens)


def test_json_round_trip_reverifies(deep_report):
    payload = json.loads(json.dumps(deep_report.to_dict(p=DEEP.p, r=DEEP.r)))
    for key in ("alpha1", "alpha2", "alpha3", "verdict", "margin", "seed", "iterations"):
        assert key in payload
    assert set(payload["alpha1"]) >= {"cx", "cy", "radius"}
    cand = WitnessCandidate.from_dict(payload)
    gens = generators(ParameterPoint(payload["p"], payload["r"]))
    assert verify_witness(cand, gens).passed


def test_zero_budget():
    rep = witness_search(generators(DEEP), budget=0)
    assert rep.verdict == "no-witness-within-budget"
    assert rep.iterations == 0 and rep.candidate is None
    assert rep.to_dict()["note"] == EVIDENCE_NOTE


def test_search_is_deterministic():
    gens = generators(NEAR_NODED)
    a = witness_search(gens, budget=8000, seed=3)
    b = witness_search(gens, budget=8000, seed=3)
    assert a.margin_trace == b.margin_trace
    assert a.to_dict() == b.to_dict()


def test_no_witness_near_noded_point_is_evidence_only():
    rep = witness_search(generators(NEAR_NODED), mirror_system=mirrors(NEAR_NODED))
    assert rep.verdict == "no-witness-within-budget"
    assert rep.evidence_only
    assert rep.iterations == 100_000
    assert max(rep.margin_trace) == rep.margin < 0
    assert "not prove" in rep.to_dict()["note"]
    assert math.isfinite(rep.margin)
