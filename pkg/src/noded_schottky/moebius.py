"""Conformal and anticonformal Moebius maps of the Riemann sphere.

Maps are stored with unnormalized complex coefficients; anything that
compares maps (classification, distances, fixed points) normalizes on
demand. A map ``z -> (a z + b) / (c z + d)`` is a :class:`MoebiusMap`;
the same coefficients acting on ``conj(z)`` give an :class:`AntiMoebiusMap`.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass
from typing import Union

import numpy as np

# tolerance policy
CLASSIFY_TOL = 1e-9
IDENTITY_TOL = 1e-12
DEGENERACY_TOL = 1e-14


class InvalidMapError(ValueError):
    """Raised for a map whose determinant vanishes within tolerance."""


class _Infinity:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INF"

    def __reduce__(self):
        return (_Infinity, ())


INF = _Infinity()

SpherePoint = Union[complex, _Infinity]


def is_infinity(z) -> bool:
    return z is INF


@dataclass(frozen=True)
class _CoefficientMap:
    a: complex
    b: complex
    c: complex
    d: complex

    def __post_init__(self):
        for name in "abcd":
            object.__setattr__(self, name, complex(getattr(self, name)))
        scale = max(abs(self.a), abs(self.b), abs(self.c), abs(self.d))
        det = self.a * self.d - self.b * self.c
        if scale == 0 or not math.isfinite(scale) or abs(det) <= DEGENERACY_TOL * scale * scale:
            raise InvalidMapError(f"degenerate coefficients {self.matrix().tolist()}")

    @classmethod
    def from_matrix(cls, m):
        m = np.asarray(m, dtype=complex)
        return cls(m[0, 0], m[0, 1], m[1, 0], m[1, 1])

    def matrix(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]], dtype=complex)

    @property
    def det(self) -> complex:
        return self.a * self.d - self.b * self.c

    def normalized(self):
        """Same map with determinant one (principal square root)."""
        s = cmath.sqrt(self.det)
        return type(self)(self.a / s, self.b / s, self.c / s, self.d / s)

    def __call__(self, z):
        return apply(self, z)


class MoebiusMap(_CoefficientMap):
    """Orientation-preserving map ``z -> (a z + b) / (c z + d)``."""

    conformal = True

    def __matmul__(self, other):
        return compose(self, other)


class AntiMoebiusMap(_CoefficientMap):
    """Orientation-reversing map ``z -> (a conj(z) + b) / (c conj(z) + d)``."""

    conformal = False

    def __matmul__(self, other):
        return compose(self, other)


AnyMap = Union[MoebiusMap, AntiMoebiusMap]

IDENTITY = MoebiusMap(1, 0, 0, 1)


def compose(f: AnyMap, g: AnyMap) -> AnyMap:
    """Return ``f o g`` (``g`` acts first).

    Two maps of the same kind compose to a conformal map; mixed kinds give
    an anticonformal one.
    """
    F = f.matrix()
    G = g.matrix()
    if not f.conformal:
        G = G.conj()
    M = F @ G
    if f.conformal == g.conformal:
        return MoebiusMap.from_matrix(M)
    return AntiMoebiusMap.from_matrix(M)


def invert(f: AnyMap) -> AnyMap:
    a, b, c, d = f.d, -f.b, -f.c, f.a
    if f.conformal:
        return MoebiusMap(a, b, c, d)
    # conj(z) = M^-1 w  =>  z = conj(M^-1) conj(w)
    return AntiMoebiusMap(a.conjugate(), b.conjugate(), c.conjugate(), d.conjugate())


def apply(f: AnyMap, z: SpherePoint) -> SpherePoint:
    """Evaluate ``f`` on the sphere; poles go to ``INF``."""
    if z is INF:
        if f.c == 0:
            return INF
        return f.a / f.c
    z = complex(z)
    if not f.conformal:
        z = z.conjugate()
    den = f.c * z + f.d
    if den == 0:
        return INF
    return (f.a * z + f.b) / den


def normalized_trace_squared(f: MoebiusMap) -> complex:
    """``tr(M)**2 / det(M)``: invariant under rescaling and conjugation."""
    if not f.conformal:
        raise TypeError("trace invariants are defined for conformal maps only")
    return (f.a + f.d) ** 2 / f.det


def projective_distance_to_identity(f: MoebiusMap) -> float:
    """Frobenius distance of the det-1 lift nearest to the identity matrix."""
    if not f.conformal:
        raise TypeError("an anticonformal map is never the identity")
    M = f.normalized().matrix()
    eye = np.eye(2)
    return float(min(np.linalg.norm(M - eye), np.linalg.norm(M + eye)))


class MapKind(enum.Enum):
    IDENTITY = "identity"
    PARABOLIC = "parabolic"
    ELLIPTIC = "elliptic"
    LOXODROMIC = "loxodromic"


@dataclass(frozen=True)
class MapClass:
    kind: MapKind
    trace_squared: complex
    # set when the parabolic verdict comes from the tolerance band rather
    # than an exact t**2 == 4
    flagged: bool = False


def classify_trace_squared(t2: complex, tol: float = CLASSIFY_TOL) -> MapClass:
    """Classify a non-identity map from its normalized trace squared."""
    t2 = complex(t2)
    dev = abs(t2 - 4)
    if dev < tol:
        return MapClass(MapKind.PARABOLIC, t2, flagged=dev != 0)
    if abs(t2.imag) < tol and 0 <= t2.real < 4:
        return MapClass(MapKind.ELLIPTIC, t2)
    return MapClass(MapKind.LOXODROMIC, t2)


def classify(f: MoebiusMap, tol: float = CLASSIFY_TOL) -> MapClass:
    t2 = normalized_trace_squared(f)
    if projective_distance_to_identity(f) < IDENTITY_TOL:
        return MapClass(MapKind.IDENTITY, t2)
    return classify_trace_squared(t2, tol)


def fixed_points(f: MoebiusMap, tol: float = CLASSIFY_TOL) -> tuple:
    """Fixed points on the sphere.

    A parabolic map yields a single point. For a loxodromic map the
    attracting point comes first.
    """
    kind = classify(f, tol).kind
    if kind is MapKind.IDENTITY:
        raise ValueError("the identity fixes every point")
    g = f.normalized()
    a, b, c, d = g.a, g.b, g.c, g.d
    scale = max(abs(a), abs(b), abs(c), abs(d))
    c_is_zero = abs(c) <= DEGENERACY_TOL * scale
    if kind is MapKind.PARABOLIC:
        if c_is_zero:
            return (INF,)
        return ((a - d) / (2 * c),)
    if c_is_zero:
        # z -> (a/d) z + b/d ; infinity attracts when |a/d| > 1
        finite = b / (d - a)
        return (INF, finite) if abs(a) > abs(d) else (finite, INF)
    disc = cmath.sqrt((a + d) ** 2 - 4)
    # c z^2 + (d - a) z - b = 0, solved without cancellation
    s = disc if ((d - a).conjugate() * disc).real >= 0 else -disc
    q = -0.5 * ((d - a) + s)
    z1 = q / c
    z2 = -b / q if q != 0 else (a - d) / (2 * c)
    if abs(c * z1 + d) >= abs(c * z2 + d):
        return (z1, z2)
    return (z2, z1)


def attracting_fixed_point(f: MoebiusMap, tol: float = CLASSIFY_TOL) -> SpherePoint:
    kind = classify(f, tol).kind
    if kind is not MapKind.LOXODROMIC:
        raise ValueError(f"no attracting fixed point for a {kind.value} map")
    return fixed_points(f, tol)[0]


def translation_length(f: MoebiusMap, tol: float = CLASSIFY_TOL) -> float:
    """Real translation length ``2 Re arccosh(t/2)``; zero unless loxodromic."""
    return translation_length_from_trace_squared(normalized_trace_squared(f), tol)


def translation_length_from_trace_squared(t2: complex, tol: float = CLASSIFY_TOL) -> float:
    if classify_trace_squared(t2, tol).kind is not MapKind.LOXODROMIC:
        return 0.0
    t = cmath.sqrt(complex(t2))
    if t.real < 0:
        t = -t
    return max(0.0, 2.0 * cmath.acosh(t / 2).real)
