"""Search for and verification of classical (all-circle) Schottky systems.

A candidate is three oriented circles ``alpha_j``. Each carries a side
(the bounded disc or the unbounded one); ``A_j`` must carry the circle
onto ``alpha'_j`` and the complement of the ``alpha_j`` side onto the
side of ``alpha'_j``. When the six closed discs are pairwise disjoint the
generators play ping-pong on them and the group is classical Schottky.

Discs are handled as spherical caps under stereographic projection, so
the unbounded side of a circle is an ordinary cap and no special case is
needed for the point at infinity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .cline import Cline, DegenerateClineError, circle, image
from .family import GeneratorTriple, MirrorSystem, generator_stack
from .moebius import INF, MoebiusMap, apply

DEFAULT_SEARCH_BUDGET = 100_000
RESTART_CAP = 5_000
INITIAL_STEP = 0.25
MIN_STEP = 1e-6
# a restart stops early once its spherical gap exceeds this
TARGET_MARGIN = 1e-3
WITNESS_TOL = 1e-9
EVIDENCE_NOTE = ("no witness was found within the search budget; this is numerical "
                 "evidence only and does not prove that no classical system exists")


@dataclass(frozen=True)
class OrientedCircle:
    cx: float
    cy: float
    radius: float
    inside: bool  # True: the disc is the bounded side

    @property
    def center(self) -> complex:
        return complex(self.cx, self.cy)

    def cline(self) -> Cline:
        return circle(self.center, self.radius)

    def hermitian(self) -> np.ndarray:
        """Form that is negative exactly on the chosen side."""
        H = self.cline().hermitian()
        return H if self.inside else -H

    def to_dict(self) -> dict:
        return {"cx": self.cx, "cy": self.cy, "radius": self.radius, "inside": self.inside}

    @classmethod
    def from_dict(cls, d: dict) -> "OrientedCircle":
        return cls(float(d["cx"]), float(d["cy"]), float(d["radius"]), bool(d.get("inside", True)))


def _gen_tuple(gens) -> tuple[MoebiusMap, MoebiusMap, MoebiusMap]:
    return gens.as_tuple() if isinstance(gens, GeneratorTriple) else tuple(gens)


def _oriented_image(H: np.ndarray, f: MoebiusMap) -> np.ndarray:
    """Form negative exactly on ``f`` applied to the complement of ``{H < 0}``."""
    N = f.normalized().matrix()
    Ni = np.array([[N[1, 1], -N[0, 1]], [-N[1, 0], N[0, 0]]])
    K = -(Ni.conj().T @ H @ Ni)
    return (K + K.conj().T) / 2


@dataclass(frozen=True)
class WitnessCandidate:
    alphas: tuple[OrientedCircle, OrientedCircle, OrientedCircle]
    image_inside: tuple[bool, bool, bool]

    @classmethod
    def from_alphas(cls, alphas, gens) -> "WitnessCandidate":
        """Candidate whose image sides are the ones the generators actually produce."""
        flags = []
        for a, f in zip(alphas, _gen_tuple(gens)):
            K = _oriented_image(a.hermitian(), f)
            flags.append(bool(K[0, 0].real > 0))
        return cls(tuple(alphas), tuple(flags))

    def images(self, gens) -> list[Cline]:
        return [image(a.cline(), f) for a, f in zip(self.alphas, _gen_tuple(gens))]

    def to_dict(self) -> dict:
        out = {f"alpha{j + 1}": a.to_dict() for j, a in enumerate(self.alphas)}
        out["image_inside"] = list(self.image_inside)
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "WitnessCandidate":
        alphas = tuple(OrientedCircle.from_dict(d[f"alpha{j}"]) for j in (1, 2, 3))
        return cls(alphas, tuple(bool(x) for x in d["image_inside"]))


@dataclass(frozen=True)
class WitnessCheck:
    passed: bool
    conditions: dict  # condition name -> bool
    margins: dict  # condition name -> float, positive is good
    exterior_point: object = None  # a point of the common exterior, when found
    infinity_in_exterior: bool = False


def _sphere_value(H: np.ndarray, z) -> float:
    """``H(z) / (1 + |z|^2)``, finite at infinity."""
    if z is INF:
        return float(H[0, 0].real)
    z = complex(z)
    val = H[0, 0].real * abs(z) ** 2 + 2 * (H[0, 1].conjugate() * z).real + H[1, 1].real
    return float(val / (1 + abs(z) ** 2))


def _normalize(H: np.ndarray) -> np.ndarray:
    disc = abs(H[0, 1]) ** 2 - H[0, 0].real * H[1, 1].real
    return H / math.sqrt(disc)


def _from_sphere(X: np.ndarray):
    if X[2] > 1 - 1e-15:
        return INF
    return complex(X[0], X[1]) / (1 - X[2])


def _fibonacci_sphere(n: int) -> np.ndarray:
    k = np.arange(n) + 0.5
    z = 1 - 2 * k / n
    phi = math.pi * (3 - math.sqrt(5)) * k
    s = np.sqrt(1 - z * z)
    return np.stack([s * np.cos(phi), s * np.sin(phi), z], axis=1)


def verify_witness(candidate: WitnessCandidate, gens, tol: float = WITNESS_TOL) -> WitnessCheck:
    """Check the classical Schottky conditions on a candidate.

    * ``disjoint``: the six oriented discs are pairwise disjoint, i.e. every
      oriented inversive product exceeds ``1 + tol``;
    * ``pairing``: ``A_j`` maps sample points of ``alpha_j`` onto ``alpha'_j``
      (residual below ``tol``) and ``alpha'_j`` is a genuine circle;
    * ``sides``: the point of the sphere farthest from the ``alpha_j`` disc
      lands strictly inside the declared ``alpha'_j`` side;
    * ``exterior``: an explicit point of the common exterior is exhibited.
    """
    maps = _gen_tuple(gens)
    for a in candidate.alphas:
        if not a.radius > tol:
            raise DegenerateClineError(f"circle radius {a.radius} is below {tol}")
    src = [_normalize(a.hermitian()) for a in candidate.alphas]
    imgs = candidate.images(gens)
    dst = [_normalize(C.hermitian() if inside else -C.hermitian())
           for C, inside in zip(imgs, candidate.image_inside)]
    discs = [m for pair in zip(src, dst) for m in pair]

    worst = math.inf
    for i in range(6):
        for k in range(i + 1, 6):
            H1, H2 = discs[i], discs[k]
            delta = (H1[0, 1] * H2[0, 1].conjugate()).real - (
                H1[0, 0].real * H2[1, 1].real + H2[0, 0].real * H1[1, 1].real) / 2
            worst = min(worst, -delta - 1)

    residual = 0.0
    genuine = True
    for a, C, f in zip(candidate.alphas, imgs, maps):
        genuine &= not C.is_line
        for z in a.cline().sample_points(8):
            w = apply(f, z)
            residual = max(residual, abs(_sphere_value(C.hermitian(), w)))

    side = math.inf
    centers, thetas = _caps(discs)
    for j, f in enumerate(maps):
        far = _from_sphere(-centers[2 * j])
        side = min(side, -_sphere_value(dst[j], apply(f, far)))

    pts = _fibonacci_sphere(4096)
    ang = np.arccos(np.clip(pts @ centers.T, -1.0, 1.0)) - thetas[None, :]
    clearance = ang.min(axis=1)
    best = int(np.argmax(clearance))
    ext_margin = float(clearance[best])
    ext_point = _from_sphere(pts[best]) if ext_margin > tol else None
    inf_clear = float(np.min(np.arccos(np.clip(centers[:, 2], -1.0, 1.0)) - thetas))

    conditions = {
        "disjoint": bool(worst > tol),
        "pairing": bool(residual < tol and genuine),
        "sides": bool(side > tol),
        "exterior": bool(ext_margin > tol),
    }
    margins = {"disjoint": float(worst), "pairing": float(tol - residual),
               "sides": float(side), "exterior": ext_margin}
    return WitnessCheck(all(conditions.values()), conditions, margins, ext_point, bool(inf_clear > tol))


def _caps(forms):
    H = np.array(forms)
    return _kernels.caps_from_hermitian_np(H[:, 0, 0].real, H[:, 0, 1], H[:, 1, 1].real)


# --------------------------------------------------------------------------
# search

@dataclass
class WitnessReport:
    verdict: str  # "witness-found" or "no-witness-within-budget"
    candidate: WitnessCandidate | None
    margin: float  # best smallest spherical gap between the six discs
    iterations: int  # objective evaluations
    restarts: int
    seed: int
    budget: int
    margin_trace: list = field(default_factory=list)  # best margin of each restart
    check: WitnessCheck | None = None

    @property
    def found(self) -> bool:
        return self.verdict == "witness-found"

    @property
    def evidence_only(self) -> bool:
        return not self.found

    def to_dict(self, **extra) -> dict:
        out = dict(extra)
        out.update({
            "verdict": self.verdict,
            "margin": self.margin if math.isfinite(self.margin) else None,
            "seed": self.seed,
            "iterations": self.iterations,
            "restarts": self.restarts,
            "budget": self.budget,
        })
        if self.candidate is not None:
            out.update(self.candidate.to_dict())
        if self.check is not None:
            out["conditions"] = dict(self.check.conditions)
        out["margin_trace"] = list(self.margin_trace)
        if self.evidence_only:
            out["note"] = EVIDENCE_NOTE
        return out


def _to_vector(alphas) -> tuple[np.ndarray, np.ndarray]:
    x = np.array([v for a in alphas for v in (a.cx, a.cy, math.log(a.radius))])
    signs = np.array([1.0 if a.inside else -1.0 for a in alphas])
    return x, signs


def _from_vector(x, signs) -> tuple[OrientedCircle, ...]:
    return tuple(OrientedCircle(float(x[3 * j]), float(x[3 * j + 1]), float(math.exp(x[3 * j + 2])),
                                bool(signs[j] > 0)) for j in range(3))


def _radial_extent(circles) -> tuple[float, float]:
    lo = min(max(abs(c) - R, 0.0) for c, R in circles)
    hi = max(abs(c) + R for c, R in circles)
    return max(lo, 1e-3), hi


def _third_circle(maps, circles) -> tuple[complex, float]:
    """A circle about the fixed point 0 of A3 separating its two discs from the rest."""
    m = maps[2].normalized()
    if abs(m.b) < 1e-14 and abs(m.c) < 1e-14:
        k = abs(m.a / m.d)
        lo, hi = _radial_extent(circles)
        if k > 1:
            k = 1 / k
        return 0j, math.sqrt(hi * lo / k)
    return -m.d / m.c, 1 / abs(m.c)


def base_starts(gens, mirror_system: MirrorSystem | None = None) -> list[tuple[OrientedCircle, ...]]:
    """Deterministic starting systems for the search.

    One start uses the isometric circles of A1 and A2. With a mirror system
    a second start uses the reflection of the fourth mirror in the
    60-degree line (A1 carries it onto the fourth mirror) and its
    conjugate, shrunk so the pairs separate. Each appears with both sides
    of ``alpha_3``.
    """
    maps = _gen_tuple(gens)
    # A maps the outside of |cz + d| = 1 into |cz - a| < 1
    iso = []
    for f in maps[:2]:
        m = f.normalized()
        iso.append((-m.d / m.c, 1 / abs(m.c)))
        iso.append((m.a / m.c, 1 / abs(m.c)))
    systems = [(iso, 1.0)]
    if mirror_system is not None:
        L4 = mirror_system.lines[4]
        src = image(L4, mirror_system.reflections[2])
        mirrored = [(src.center, src.radius), (L4.center, L4.radius)]
        mirrored += [(c.conjugate(), R) for c, R in mirrored]
        systems.append((mirrored, 0.9))
    starts = []
    for pairs, shrink in systems:
        c3, rho = _third_circle(maps, pairs)
        first = [OrientedCircle(pairs[0][0].real, pairs[0][0].imag, pairs[0][1] * shrink, True),
                 OrientedCircle(pairs[2][0].real, pairs[2][0].imag, pairs[2][1] * shrink, True)]
        for inside in (False, True):
            starts.append(tuple(first + [OrientedCircle(c3.real, c3.imag, rho, inside)]))
    return starts


def _pattern_search(objective, x, step, cap):
    fx = objective(x)
    evals = 1
    while step > MIN_STEP and evals < cap and fx < TARGET_MARGIN:
        improved = False
        for i in range(len(x)):
            for s in (step, -step):
                if evals >= cap:
                    break
                y = x.copy()
                y[i] += s
                fy = objective(y)
                evals += 1
                if fy > fx:
                    x, fx, improved = y, fy, True
                    break
            if improved or evals >= cap:
                break
        if not improved:
            step /= 2
    return x, fx, evals


def witness_search(gens, budget: int = DEFAULT_SEARCH_BUDGET, seed: int = 0,
                   restart_cap: int = RESTART_CAP, tol: float = WITNESS_TOL,
                   mirror_system: MirrorSystem | None = None) -> WitnessReport:
    """Seeded random-restart pattern search for a classical Schottky system.

    The objective is the smallest spherical gap between the six discs of
    a candidate (image sides follow the generators, so the side condition
    holds by construction). Restarts run in order: the deterministic base
    starts first, then Gaussian perturbations of them with growing spread.
    The search stops at the first restart whose best candidate verifies.
    ``budget`` counts objective evaluations.
    """
    budget = int(budget)
    report = WitnessReport("no-witness-within-budget", None, -math.inf, 0, 0, seed, budget)
    if budget <= 0:
        return report
    maps = _gen_tuple(gens)
    stack = generator_stack(maps)
    inv_gens = np.ascontiguousarray(stack[1::2])
    bases = [_to_vector(s) for s in base_starts(gens, mirror_system)]
    rng = np.random.default_rng(seed)

    best_x, best_signs = None, None
    k = 0
    while report.iterations < budget:
        x0, signs = bases[k % len(bases)]
        spread = 0.1 * (k // len(bases))
        if spread:
            x0 = x0 + rng.normal(0.0, spread, size=x0.shape)

        def objective(x, signs=signs):
            v = _kernels.witness_margin(x, signs, inv_gens)
            return v if v == v else -math.inf

        cap = min(restart_cap, budget - report.iterations)
        x, fx, evals = _pattern_search(objective, x0.copy(), INITIAL_STEP, cap)
        report.iterations += evals
        report.restarts += 1
        report.margin_trace.append(float(fx))
        if fx > report.margin:
            report.margin, best_x, best_signs = float(fx), x, signs
        k += 1
        if fx > 0:
            cand = WitnessCandidate.from_alphas(_from_vector(x, signs), maps)
            check = verify_witness(cand, maps, tol)
            if check.passed:
                report.verdict = "witness-found"
                report.candidate, report.check, report.margin = cand, check, float(fx)
                return report
    if best_x is not None:
        try:
            report.candidate = WitnessCandidate.from_alphas(_from_vector(best_x, best_signs), maps)
            report.check = verify_witness(report.candidate, maps, tol)
        except DegenerateClineError:
            pass
    return report
