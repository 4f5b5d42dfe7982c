"""The two-parameter mirror family and its rank-3 Schottky groups.

Five mirrors (unit circle, real axis, the line through 0 and
``w0 = exp(i pi / 3)``, the circle of radius ``r`` about 0, and a circle
orthogonal to the unit circle through ``p`` and ``1/p``) generate a
reflection group. The conformal generators are products of pairs of
these reflections::

    A1 = tau4 o tau2      A2 = tau1 o A1 o tau1      A3 = tau3 o tau0

with ``o`` meaning "right factor acts first". Under this convention A1
is parabolic exactly when the fourth mirror touches the 60-degree line,
A2 has the complex-conjugate coefficients of A1, and ``A3(z) = r^2 z``.

Six pinchable words become parabolic at the noded parameter point
``(1/2, (sqrt 7 - sqrt 3) / 2)``.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass, replace
from typing import Sequence

import mpmath
import numpy as np

from . import _kernels
from .cline import Cline, ClineRelation, RelationKind, circle, line, reflection, relate
from .moebius import (
    CLASSIFY_TOL,
    AntiMoebiusMap,
    MapClass,
    MapKind,
    MoebiusMap,
    classify_trace_squared,
    compose,
    invert,
    translation_length_from_trace_squared,
)

W0 = cmath.exp(1j * math.pi / 3)
SQRT3 = math.sqrt(3.0)
BOUNDARY_TOL = 1e-12
SYMMETRY_TOL = 1e-10
ORBIT_TOL = 1e-9
ANGLE_TOL = 1e-10


@dataclass(frozen=True)
class ParameterPoint:
    p: float
    r: float


NODED_POINT = ParameterPoint(0.5, (math.sqrt(7.0) - math.sqrt(3.0)) / 2)


def r_max(p: float) -> float:
    """Largest radius keeping the origin circle off the fourth mirror.

    Equals ``|c| - R`` for the fourth mirror's center ``c`` and radius ``R``.
    """
    if not 0 < p <= 1:
        raise ValueError(f"p must lie in (0, 1], got {p}")
    return (math.sqrt(1 + p * p + p ** 4) + p * p - 1) / (SQRT3 * p)


class Membership(enum.Enum):
    INTERIOR = "interior"
    BOUNDARY = "boundary"
    OUTSIDE = "outside"


@dataclass(frozen=True)
class DomainMembership:
    status: Membership
    violated: str | None = None
    active: tuple[str, ...] = ()

    @property
    def admissible(self) -> bool:
        """Interior or on the tangency boundary."""
        return self.status is not Membership.OUTSIDE


def domain_membership(pt: ParameterPoint, tol: float = BOUNDARY_TOL) -> DomainMembership:
    """Locate ``pt`` relative to the admissible parameter domain.

    The two tangency constraints (``p > 1/2`` and ``r < r_max(p)``) may be
    met with equality up to ``tol``; that is reported as the boundary.
    """
    p, r = pt.p, pt.r
    strict = [("0<r", r > tol), ("r<p", r < p - tol), ("p<1", p < 1 - tol)]
    for name, ok in strict:
        if not ok:
            return DomainMembership(Membership.OUTSIDE, name)
    active = []
    if p < 0.5 - tol:
        return DomainMembership(Membership.OUTSIDE, "p>1/2")
    if p <= 0.5 + tol:
        active.append("p>1/2")
    rm = r_max(p)
    if r > rm + tol:
        return DomainMembership(Membership.OUTSIDE, "r<r_max(p)")
    if r >= rm - tol:
        active.append("r<r_max(p)")
    if active:
        return DomainMembership(Membership.BOUNDARY, None, tuple(active))
    return DomainMembership(Membership.INTERIOR)


def fourth_mirror_center(p: float) -> complex:
    return complex((1 + p * p) / (2 * p), (1 - p * p) / (2 * p) / SQRT3)


def fourth_mirror_radius(p: float) -> float:
    return 2 / SQRT3 * (1 - p * p) / (2 * p)


@dataclass(frozen=True)
class MirrorSystem:
    point: ParameterPoint
    lines: tuple[Cline, ...]
    reflections: tuple[AntiMoebiusMap, ...]
    c: complex
    R: float
    w0: complex = W0

    def with_mirror(self, index: int, cline: Cline) -> "MirrorSystem":
        """Copy with one mirror replaced (used to probe the checkers)."""
        lines = list(self.lines)
        refl = list(self.reflections)
        lines[index] = cline
        refl[index] = reflection(cline)
        return replace(self, lines=tuple(lines), reflections=tuple(refl))


def mirrors(pt: ParameterPoint) -> MirrorSystem:
    if not (0 < pt.p < 1 and 0 < pt.r < 1):
        raise ValueError(f"mirrors need p, r in (0, 1), got {pt}")
    c = fourth_mirror_center(pt.p)
    R = fourth_mirror_radius(pt.p)
    lines = (
        circle(0, 1),
        line(0, 1),
        line(0, W0),
        circle(0, pt.r),
        circle(c, R),
    )
    return MirrorSystem(pt, lines, tuple(reflection(L) for L in lines), c, R)


def _system(src) -> MirrorSystem:
    return src if isinstance(src, MirrorSystem) else mirrors(src)


# --------------------------------------------------------------------------
# mirror configuration

ORTHOGONAL_PAIRS = ((0, 1), (0, 2), (0, 4), (1, 3), (2, 3))
SIXTY_DEGREE_PAIRS = ((1, 2), (1, 4))


@dataclass(frozen=True)
class PairCheck:
    i: int
    j: int
    expected: str
    relation: ClineRelation
    passed: bool


@dataclass(frozen=True)
class MirrorTable:
    checks: tuple[PairCheck, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list[PairCheck]:
        return [c for c in self.checks if not c.passed]

    def relation(self, i: int, j: int) -> ClineRelation:
        i, j = min(i, j), max(i, j)
        for c in self.checks:
            if (c.i, c.j) == (i, j):
                return c.relation
        raise KeyError((i, j))


def mirror_relation_table(src, tol: float = 1e-9, angle_tol: float = ANGLE_TOL,
                          boundary_tol: float = BOUNDARY_TOL) -> MirrorTable:
    """Relate every pair of mirrors and compare with the expected pattern.

    At a boundary parameter the matching disjoint pair is expected to be
    tangent instead.
    """
    system = _system(src)
    member = domain_membership(system.point, boundary_tol)
    checks = []
    for i in range(5):
        for j in range(i + 1, 5):
            rel = relate(system.lines[i], system.lines[j], tol)
            if (i, j) in ORTHOGONAL_PAIRS or (i, j) in SIXTY_DEGREE_PAIRS:
                target = math.pi / 2 if (i, j) in ORTHOGONAL_PAIRS else math.pi / 3
                expected = f"angle {'pi/2' if target > 1.2 else 'pi/3'}"
                ok = (rel.kind is RelationKind.INTERSECTING
                      and abs(rel.angle - target) < angle_tol)
            elif (i, j) == (2, 4) and "p>1/2" in member.active:
                expected, ok = "tangent", rel.kind is RelationKind.TANGENT
            elif (i, j) == (3, 4) and "r<r_max(p)" in member.active:
                expected, ok = "tangent", rel.kind is RelationKind.TANGENT
            else:
                expected, ok = "disjoint", rel.kind is RelationKind.DISJOINT
            checks.append(PairCheck(i, j, expected, rel, ok))
    return MirrorTable(tuple(checks))


# --------------------------------------------------------------------------
# generators and symmetries

@dataclass(frozen=True)
class GeneratorTriple:
    A1: MoebiusMap
    A2: MoebiusMap
    A3: MoebiusMap
    # order-3 rotation tau2 o tau1, involution tau0 o tau1, order-3 rotation tau1 o tau4
    w_rotation: MoebiusMap
    j_involution: MoebiusMap
    l_rotation: MoebiusMap

    def as_tuple(self) -> tuple[MoebiusMap, MoebiusMap, MoebiusMap]:
        return (self.A1, self.A2, self.A3)


def generators(src) -> GeneratorTriple:
    t0, t1, t2, t3, t4 = _system(src).reflections
    A1 = compose(t4, t2)
    A2 = compose(t1, compose(A1, t1))
    A3 = compose(t3, t0)
    return GeneratorTriple(A1, A2, A3, compose(t2, t1), compose(t0, t1), compose(t1, t4))


@dataclass(frozen=True)
class RelationCheck:
    name: str
    distance: float
    passed: bool


def _mp_conj(M):
    return M.apply(mpmath.conj)


def _extended_reflections(pt: ParameterPoint) -> list:
    """Matrices of the five mirror reflections (acting on conj z), built in mpmath.

    Call inside an ``mpmath.workdps`` block.
    """
    p, r = mpmath.mpf(pt.p), mpmath.mpf(pt.r)
    w0 = mpmath.expjpi(mpmath.mpf(1) / 3)
    s3 = mpmath.sqrt(3)
    c = (1 + p * p) / (2 * p) + 1j * (1 - p * p) / (2 * p * s3)
    R = 2 / s3 * (1 - p * p) / (2 * p)
    return [
        mpmath.matrix([[0, 1], [1, 0]]),
        mpmath.eye(2),
        mpmath.matrix([[w0 * w0, 0], [0, 1]]),
        mpmath.matrix([[0, r * r], [1, 0]]),
        mpmath.matrix([[c, R * R - abs(c) ** 2], [1, -mpmath.conj(c)]]),
    ]


def _mp_compose(f, g):
    (F, f_conf), (G, g_conf) = f, g
    return (F * (G if f_conf else _mp_conj(G)), f_conf == g_conf)


def _mp_invert(f):
    M, conf = f
    adj = mpmath.matrix([[M[1, 1], -M[0, 1]], [-M[1, 0], M[0, 0]]])
    return (adj if conf else _mp_conj(adj), conf)


def _mp_distance_to_identity(M) -> float:
    N = M / mpmath.sqrt(mpmath.det(M))
    eye = mpmath.eye(2)
    return float(min(mpmath.mnorm(N - eye, "f"), mpmath.mnorm(N + eye, "f")))


def symmetry_report(src, tol: float = SYMMETRY_TOL, dps: int = 50) -> list[RelationCheck]:
    """Check the dihedral/involution relations among the symmetry maps.

    The relations are evaluated in ``dps``-digit arithmetic. Mirrors that
    match the canonical ones for the parameter point are rebuilt exactly
    from ``(p, r)``; any other mirror enters through its double-precision
    reflection matrix. In plain doubles the check is ill-conditioned: near
    ``p = 1`` the entries of ``L`` grow like ``1/(1-p)`` and cubing it
    amplifies rounding by that factor squared.
    """
    system = _system(src)
    canonical = mirrors(system.point)
    with mpmath.workdps(dps):
        exact = _extended_reflections(system.point)
        refl = []
        for k in range(5):
            if system.lines[k] == canonical.lines[k]:
                refl.append((exact[k], False))
            else:
                refl.append((mpmath.matrix(system.reflections[k].matrix().tolist()), False))
        t0, t1, t2, t3, t4 = refl
        A1 = _mp_compose(t4, t2)
        A2 = _mp_compose(t1, _mp_compose(A1, t1))
        W, J, L = _mp_compose(t2, t1), _mp_compose(t0, t1), _mp_compose(t1, t4)
        WJ, LJ = _mp_compose(W, J), _mp_compose(L, J)
        words = [
            ("W^3", _mp_compose(W, _mp_compose(W, W))),
            ("L^3", _mp_compose(L, _mp_compose(L, L))),
            ("J^2", _mp_compose(J, J)),
            ("(WJ)^2", _mp_compose(WJ, WJ)),
            ("(LJ)^2", _mp_compose(LJ, LJ)),
            ("t1 A1 t1 A2^-1", _mp_compose(_mp_compose(t1, _mp_compose(A1, t1)), _mp_invert(A2))),
        ]
        out = []
        for name, (M, _) in words:
            d = _mp_distance_to_identity(M)
            out.append(RelationCheck(name, d, d < tol))
    return out


# --------------------------------------------------------------------------
# pinchable words

Word = tuple[int, ...]


@dataclass(frozen=True)
class PinchWord:
    label: str
    word: Word


PINCH_WORDS = (
    PinchWord("g1", (-2,)),
    PinchWord("g2", (1,)),
    PinchWord("g3", (-1, 2)),
    PinchWord("g4", (-1, 2, -3, -2, 1, 3)),
    PinchWord("g5", (-2, -3, 2, 3)),
    PinchWord("g6", (1, -3, -1, 3)),
)


def pinch_words() -> tuple[PinchWord, ...]:
    return PINCH_WORDS


def letter_index(letter: int) -> int:
    """Map a signed generator letter (+-1, +-2, +-3) to a kernel index 0..5."""
    if letter == 0 or abs(letter) > 3:
        raise ValueError(f"bad letter {letter}")
    return 2 * (abs(letter) - 1) + (letter < 0)


def free_reduce(word: Sequence[int]) -> Word:
    out: list[int] = []
    for x in word:
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(x)
    return tuple(out)


def generator_stack(gens) -> np.ndarray:
    """``(6, 2, 2)`` det-1 matrices for A1, A1^-1, A2, A2^-1, A3, A3^-1.

    Inverses are adjugates, so they are exact.
    """
    if isinstance(gens, GeneratorTriple):
        gens = gens.as_tuple()
    stack = np.empty((6, 2, 2), dtype=complex)
    for k, f in enumerate(gens):
        m = f.normalized().matrix()
        stack[2 * k] = m
        stack[2 * k + 1] = np.array([[m[1, 1], -m[0, 1]], [-m[1, 0], m[0, 0]]])
    return stack


def words_to_array(words: Sequence[Sequence[int]]) -> tuple[np.ndarray, np.ndarray]:
    lengths = np.array([len(w) for w in words], dtype=np.int64)
    arr = np.zeros((len(words), max(1, int(lengths.max(initial=0)))), dtype=np.int8)
    for i, w in enumerate(words):
        for k, x in enumerate(w):
            arr[i, k] = letter_index(x)
    return arr, lengths


def word_trace_squared(gens, words: Sequence[Sequence[int]]) -> np.ndarray:
    """Normalized trace squared of each word, with compensated products.

    Plain double products lose most of their digits on long words deep in
    the parameter domain (traces of commutators reach 1e15 and more); the
    double-double kernel keeps the relative error near machine precision.
    """
    stack = generator_stack(gens)
    arr, lengths = words_to_array(words)
    return _kernels.word_trace_squared_dd(stack, arr, lengths)


def evaluate_word(gens, word: Sequence[int]) -> MoebiusMap:
    if isinstance(gens, GeneratorTriple):
        gens = gens.as_tuple()
    out = MoebiusMap(1, 0, 0, 1)
    for x in word:
        f = gens[abs(x) - 1]
        out = compose(out, f if x > 0 else invert(f))
    return out


@dataclass(frozen=True)
class PinchRow:
    label: str
    word: Word
    trace_squared: complex
    map_class: MapClass
    translation_length: float


def evaluate_pinch(src, tol: float = CLASSIFY_TOL) -> list[PinchRow]:
    """Trace data of the six pinchable words at a parameter point (or generators)."""
    gens = src if isinstance(src, GeneratorTriple) else generators(src)
    words = []
    for pw in PINCH_WORDS:
        reduced = free_reduce(pw.word)
        assert reduced == pw.word, f"{pw.label} is not reduced"
        words.append(reduced)
    t2 = word_trace_squared(gens, words)
    return [
        PinchRow(pw.label, pw.word, complex(v), classify_trace_squared(v, tol),
                 translation_length_from_trace_squared(v, tol))
        for pw, v in zip(PINCH_WORDS, t2)
    ]


@dataclass(frozen=True)
class OrbitCheck:
    passed: bool
    first_orbit: tuple[complex, complex, complex]
    second_orbit: tuple[complex, complex, complex]
    max_deviation: float


def extended_pinch_traces(pt: ParameterPoint, dps: int = 50) -> list[complex]:
    """Normalized trace squared of the six pinch words in ``dps``-digit arithmetic.

    The mirrors, reflections and generators are rebuilt from ``(p, r)``
    with mpmath, so no double rounding enters before the final result.
    Needed when comparing traces of size 1e7 and more to an absolute 1e-9.
    """
    with mpmath.workdps(dps):
        t0, _, t2, t3, t4 = _extended_reflections(pt)
        a1 = t4 * _mp_conj(t2)
        gens = {1: a1, 2: _mp_conj(a1), 3: t3 * _mp_conj(t0)}
        out = []
        for pw in PINCH_WORDS:
            M = mpmath.eye(2)
            for x in pw.word:
                G = gens[abs(x)]
                M = M * (G if x > 0 else mpmath.matrix([[G[1, 1], -G[0, 1]], [-G[1, 0], G[0, 0]]]))
            tr = M[0, 0] + M[1, 1]
            out.append(complex(tr * tr / mpmath.det(M)))
    return out


def w_orbit_check(src, tol: float = ORBIT_TOL) -> OrbitCheck:
    """The order-3 rotation permutes g1, g2, g3 and g4, g5, g6, so traces agree.

    Traces come from :func:`extended_pinch_traces` at the parameter point of
    ``src`` and are compared with an absolute tolerance.
    """
    t = extended_pinch_traces(_system(src).point)
    dev = max(abs(t[0] - t[1]), abs(t[0] - t[2]), abs(t[3] - t[4]), abs(t[3] - t[5]))
    return OrbitCheck(dev < tol, tuple(t[:3]), tuple(t[3:]), dev)


def expected_pinch_kinds(pt: ParameterPoint, tol: float = BOUNDARY_TOL) -> list[MapKind]:
    """Kinds the six words should have: parabolic exactly on the active tangencies."""
    member = domain_membership(pt, tol)
    first = MapKind.PARABOLIC if "p>1/2" in member.active else MapKind.LOXODROMIC
    second = MapKind.PARABOLIC if "r<r_max(p)" in member.active else MapKind.LOXODROMIC
    return [first] * 3 + [second] * 3


def random_interior_points(n: int, rng: np.random.Generator, margin: float = 1e-6) -> list[ParameterPoint]:
    """Uniform draws from the admissible domain, kept ``margin`` off its edges."""
    out = []
    while len(out) < n:
        p = rng.uniform(0.5 + margin, 1 - margin)
        r = rng.uniform(margin, min(p, r_max(p)) - margin)
        pt = ParameterPoint(p, r)
        if domain_membership(pt).status is Membership.INTERIOR:
            out.append(pt)
    return out
