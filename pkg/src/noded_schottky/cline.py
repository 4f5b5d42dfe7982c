"""Circles and lines as Hermitian forms.

A cline is the zero set of ``A |z|^2 + B conj(z) + conj(B) z + D`` with
``A, D`` real. Coefficients are kept in a canonical form with
discriminant ``|B|^2 - A D = 1`` and ``A >= 0`` so equal loci compare
equal.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass

import numpy as np

from .moebius import INF, AnyMap, AntiMoebiusMap, SpherePoint, apply, invert

TANGENCY_TOL = 1e-9
# below this (at discriminant one) the quadratic coefficient is a line
LINE_SNAP = 1e-14


class DegenerateClineError(ValueError):
    pass


@dataclass(frozen=True)
class Cline:
    A: float
    B: complex
    D: float

    def __post_init__(self):
        A, B, D = float(self.A), complex(self.B), float(self.D)
        disc = abs(B) ** 2 - A * D
        if not disc > 0 or not math.isfinite(disc):
            raise DegenerateClineError(f"discriminant {disc} is not positive")
        s = math.sqrt(disc)
        A, B, D = A / s, B / s, D / s
        if abs(A) < LINE_SNAP:
            A = 0.0
        flip = A < 0 or (A == 0 and (B.real < 0 or (B.real == 0 and B.imag < 0)))
        if flip:
            A, B, D = -A, -B, -D
        object.__setattr__(self, "A", A + 0.0)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "D", D + 0.0)

    @classmethod
    def from_hermitian(cls, H) -> "Cline":
        H = np.asarray(H)
        return cls(H[0, 0].real, H[0, 1], H[1, 1].real)

    @property
    def is_line(self) -> bool:
        return self.A == 0

    @property
    def center(self) -> complex:
        if self.is_line:
            raise ValueError("a line has no center")
        return -self.B / self.A

    @property
    def radius(self) -> float:
        if self.is_line:
            return math.inf
        return 1.0 / self.A

    def hermitian(self) -> np.ndarray:
        return np.array([[self.A, self.B], [self.B.conjugate(), self.D]], dtype=complex)

    def residual(self, z: SpherePoint) -> float:
        """Value of the canonical form at ``z``; zero on the cline."""
        if z is INF:
            return self.A
        return (self.A * abs(z) ** 2 + 2 * (self.B.conjugate() * z).real + self.D)

    def sample_points(self, n: int = 8) -> list:
        if not self.is_line:
            t = 2 * math.pi * np.arange(n) / n
            return [self.center + self.radius * cmath.exp(1j * x) for x in t]
        # line: foot of the perpendicular from 0, then steps along the line
        nrm = self.B / abs(self.B)
        base = -self.D * nrm / (2 * abs(self.B))
        return [base + 1j * nrm * s for s in np.linspace(-2.0, 2.0, n)]

    def isclose(self, other: "Cline", tol: float = 1e-9) -> bool:
        return (abs(self.A - other.A) + abs(self.B - other.B) + abs(self.D - other.D)) < tol


def circle(center: complex, radius: float) -> Cline:
    if not radius > 0:
        raise DegenerateClineError(f"radius must be positive, got {radius}")
    center = complex(center)
    return Cline(1.0, -center, abs(center) ** 2 - radius * radius)


def line(z1: complex, z2: complex) -> Cline:
    z1, z2 = complex(z1), complex(z2)
    if z1 == z2:
        raise DegenerateClineError("a line needs two distinct points")
    B = 1j * (z2 - z1)
    return Cline(0.0, B, -2 * (B.conjugate() * z1).real)


def reflection(C: Cline) -> AntiMoebiusMap:
    """Anticonformal involution fixing ``C`` pointwise."""
    return AntiMoebiusMap(-C.B, -C.D, C.A, C.B.conjugate())


def push_hermitian(H: np.ndarray, f: AnyMap) -> np.ndarray:
    """Hermitian form of ``f(locus)``; the side ``H < 0`` goes to ``H' < 0``."""
    N = invert(f).matrix() if f.conformal else _anti_preimage_matrix(f)
    H = np.asarray(H, dtype=complex)
    if not f.conformal:
        H = H.T
    out = N.conj().T @ H @ N
    return (out + out.conj().T) / 2


def _anti_preimage_matrix(f: AntiMoebiusMap) -> np.ndarray:
    # f(z) = M conj(z)  =>  z = conj(adj(M) w)
    return np.array([[f.d, -f.b], [-f.c, f.a]], dtype=complex)


def image(C: Cline, f: AnyMap) -> Cline:
    return Cline.from_hermitian(push_hermitian(C.hermitian(), f))


class RelationKind(enum.Enum):
    EQUAL = "equal"
    DISJOINT = "disjoint"
    TANGENT = "tangent"
    INTERSECTING = "intersecting"


@dataclass(frozen=True)
class ClineRelation:
    kind: RelationKind
    inversive_product: float
    angle: float | None = None
    inversive_distance: float | None = None
    in_band: bool = False


def inversive_product(C1: Cline, C2: Cline) -> float:
    """Moebius-invariant pairing; ``(1 + r^2) / (2 r)`` for concentric circles."""
    return (C1.B * C2.B.conjugate()).real - (C1.A * C2.D + C2.A * C1.D) / 2


def relate(C1: Cline, C2: Cline, tol: float = TANGENCY_TOL) -> ClineRelation:
    delta = inversive_product(C1, C2)
    m = abs(delta)
    if abs(m - 1) < tol:
        if C1.isclose(C2, tol):
            return ClineRelation(RelationKind.EQUAL, delta, in_band=True)
        return ClineRelation(RelationKind.TANGENT, delta, angle=0.0, in_band=True)
    if m > 1:
        return ClineRelation(RelationKind.DISJOINT, delta, inversive_distance=math.acosh(m))
    return ClineRelation(RelationKind.INTERSECTING, delta, angle=math.acos(m))


def tangency_point(C1: Cline, C2: Cline, tol: float = TANGENCY_TOL) -> SpherePoint:
    rel = relate(C1, C2, tol)
    if rel.kind is not RelationKind.TANGENT:
        raise ValueError(f"clines are {rel.kind.value}, not tangent")
    # H1 - delta H2 is a point-circle sitting at the tangency point
    s = 1.0 if rel.inversive_product > 0 else -1.0
    A = C1.A - s * C2.A
    B = C1.B - s * C2.B
    scale = max(abs(C1.A), abs(C2.A), abs(C1.B), abs(C2.B), 1e-300)
    if abs(A) <= 1e-12 * scale:
        return INF
    return -B / A


def reflect_point(C: Cline, z: SpherePoint) -> SpherePoint:
    return apply(reflection(C), z)
