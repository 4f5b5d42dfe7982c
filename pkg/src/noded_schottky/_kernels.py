"""Hot numeric kernels with two interchangeable backends.

Every kernel exists as a numba ``@njit`` loop and as a vectorized numpy
routine. The numba path is used when numba imports and the environment
variable ``NODED_SCHOTTKY_DISABLE_JIT`` is unset (or ``0``); otherwise the
numpy path runs. Both return identical shapes and agree to rounding.

Letter indices 0..5 stand for A1, A1^-1, A2, A2^-1, A3, A3^-1, so the
inverse of letter ``k`` is ``k ^ 1``.
"""

from __future__ import annotations

import contextlib
import os
from types import SimpleNamespace

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

ENV_FLAG = "NODED_SCHOTTKY_DISABLE_JIT"
JIT_AVAILABLE = numba is not None

_state = {
    "backend": "numba"
    if JIT_AVAILABLE and os.environ.get(ENV_FLAG, "").strip().lower() in ("", "0", "false", "no")
    else "numpy"
}


def backend() -> str:
    return _state["backend"]


def set_backend(name: str) -> None:
    if name not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {name!r}")
    if name == "numba" and not JIT_AVAILABLE:
        raise RuntimeError("numba is not installed")
    _state["backend"] = name


@contextlib.contextmanager
def use_backend(name: str):
    old = backend()
    set_backend(name)
    try:
        yield
    finally:
        _state["backend"] = old


def _identity(fn):
    return fn


if JIT_AVAILABLE:
    _njit = numba.njit(cache=True, nogil=True)
else:  # pragma: no cover
    _njit = _identity


# --------------------------------------------------------------------------
# double-double arithmetic (Dekker / Knuth error-free transforms); written
# with plain arithmetic so the same source serves scalars and arrays

def _build_dd(deco):
    @deco
    def two_sum(a, b):
        s = a + b
        bb = s - a
        return s, (a - (s - bb)) + (b - bb)

    @deco
    def quick_two_sum(a, b):
        s = a + b
        return s, b - (s - a)

    @deco
    def two_prod(a, b):
        p = a * b
        t = 134217729.0 * a
        ah = t - (t - a)
        al = a - ah
        t = 134217729.0 * b
        bh = t - (t - b)
        bl = b - bh
        return p, ((ah * bh - p) + ah * bl + al * bh) + al * bl

    @deco
    def dd_add(ah, al, bh, bl):
        s, e = two_sum(ah, bh)
        t, f = two_sum(al, bl)
        e = e + t
        s, e = quick_two_sum(s, e)
        e = e + f
        return quick_two_sum(s, e)

    @deco
    def dd_mul_d(ah, al, b):
        p, e = two_prod(ah, b)
        return quick_two_sum(p, e + al * b)

    @deco
    def cmul_d(rh, rl, ih, il, br, bi):
        # (r + i I) * (br + bi I) with r, i double-double and b plain complex
        p1h, p1l = dd_mul_d(rh, rl, br)
        p2h, p2l = dd_mul_d(ih, il, -bi)
        reh, rel = dd_add(p1h, p1l, p2h, p2l)
        q1h, q1l = dd_mul_d(rh, rl, bi)
        q2h, q2l = dd_mul_d(ih, il, br)
        imh, iml = dd_add(q1h, q1l, q2h, q2l)
        return reh, rel, imh, iml

    @deco
    def cfma(xrh, xrl, xih, xil, yrh, yrl, yih, yil, br, bi):
        # x + y * b
        prh, prl, pih, pil = cmul_d(yrh, yrl, yih, yil, br, bi)
        reh, rel = dd_add(xrh, xrl, prh, prl)
        imh, iml = dd_add(xih, xil, pih, pil)
        return reh, rel, imh, iml

    return SimpleNamespace(two_sum=two_sum, two_prod=two_prod, dd_add=dd_add,
                           dd_mul_d=dd_mul_d, cmul_d=cmul_d, cfma=cfma)


_dd_np = _build_dd(_identity)
_dd_nb = _build_dd(_njit) if JIT_AVAILABLE else _dd_np
_cmul_d_nb = _dd_nb.cmul_d
_cfma_nb = _dd_nb.cfma
_dd_add_nb = _dd_nb.dd_add


# --------------------------------------------------------------------------
# level expansion of the reduced-word tree

@_njit
def _expand_level_nb(mats, last, gens):
    n = mats.shape[0]
    count = 0
    for i in range(n):
        count += 6 if last[i] < 0 else 5
    out = np.empty((count, 2, 2), dtype=np.complex128)
    letters = np.empty(count, dtype=np.int8)
    parent = np.empty(count, dtype=np.int64)
    k = 0
    for i in range(n):
        m00, m01, m10, m11 = mats[i, 0, 0], mats[i, 0, 1], mats[i, 1, 0], mats[i, 1, 1]
        for g in range(6):
            if last[i] >= 0 and g == (last[i] ^ 1):
                continue
            out[k, 0, 0] = m00 * gens[g, 0, 0] + m01 * gens[g, 1, 0]
            out[k, 0, 1] = m00 * gens[g, 0, 1] + m01 * gens[g, 1, 1]
            out[k, 1, 0] = m10 * gens[g, 0, 0] + m11 * gens[g, 1, 0]
            out[k, 1, 1] = m10 * gens[g, 0, 1] + m11 * gens[g, 1, 1]
            letters[k] = g
            parent[k] = i
            k += 1
    return out, letters, parent


def _expand_level_np(mats, last, gens):
    n = mats.shape[0]
    prod = mats[:, None, :, :] @ gens[None, :, :, :]
    letter_grid = np.broadcast_to(np.arange(6, dtype=np.int8), (n, 6))
    allowed = (last[:, None] < 0) | (letter_grid != (last[:, None] ^ 1))
    parent_grid = np.broadcast_to(np.arange(n, dtype=np.int64)[:, None], (n, 6))
    return prod[allowed], letter_grid[allowed].copy(), parent_grid[allowed].copy()


def expand_level(mats: np.ndarray, last: np.ndarray, gens: np.ndarray):
    """Right-multiply every parent by every non-cancelling letter.

    Children come out parent-major, letter-minor, which keeps a level in
    shortlex order when its parents are.
    """
    mats = np.ascontiguousarray(mats, dtype=np.complex128)
    last = np.ascontiguousarray(last, dtype=np.int8)
    gens = np.ascontiguousarray(gens, dtype=np.complex128)
    if backend() == "numba":
        return _expand_level_nb(mats, last, gens)
    return _expand_level_np(mats, last, gens)


# --------------------------------------------------------------------------
# per-matrix invariants

@_njit
def _trace_stats_nb(mats):
    n = mats.shape[0]
    t2 = np.empty(n, dtype=np.complex128)
    dist = np.empty(n, dtype=np.float64)
    for i in range(n):
        a, b, c, d = mats[i, 0, 0], mats[i, 0, 1], mats[i, 1, 0], mats[i, 1, 1]
        tr = a + d
        t2[i] = tr * tr
        off = abs(b) ** 2 + abs(c) ** 2
        dm = np.sqrt(abs(a - 1) ** 2 + abs(d - 1) ** 2 + off)
        dp = np.sqrt(abs(a + 1) ** 2 + abs(d + 1) ** 2 + off)
        dist[i] = min(dm, dp)
    return t2, dist


def _trace_stats_np(mats):
    a, b, c, d = mats[:, 0, 0], mats[:, 0, 1], mats[:, 1, 0], mats[:, 1, 1]
    tr = a + d
    t2 = tr * tr
    off = np.abs(b) ** 2 + np.abs(c) ** 2
    dm = np.sqrt(np.abs(a - 1) ** 2 + np.abs(d - 1) ** 2 + off)
    dp = np.sqrt(np.abs(a + 1) ** 2 + np.abs(d + 1) ** 2 + off)
    return t2, np.minimum(dm, dp)


def trace_stats(mats: np.ndarray):
    """Trace squared and projective distance to the identity of det-1 matrices.

    Word products are det-1 by construction; recomputing the determinant of
    a long product would only add cancellation noise, so it is not used.
    """
    mats = np.ascontiguousarray(mats, dtype=np.complex128)
    if backend() == "numba":
        return _trace_stats_nb(mats)
    return _trace_stats_np(mats)


@_njit
def _attracting_nb(mats, band):
    n = mats.shape[0]
    z = np.zeros(n, dtype=np.complex128)
    at_inf = np.zeros(n, dtype=np.bool_)
    valid = np.zeros(n, dtype=np.bool_)
    for i in range(n):
        a, b, c, d = mats[i, 0, 0], mats[i, 0, 1], mats[i, 1, 0], mats[i, 1, 1]
        tr = a + d
        t2 = tr * tr
        if abs(t2 - 4) < band:
            continue
        if abs(t2.imag) < band and 0.0 <= t2.real < 4.0:
            continue
        sq = np.sqrt(t2 - 4)
        lam = (tr + sq) / 2
        lam2 = (tr - sq) / 2
        if abs(lam2) > abs(lam):
            lam = lam2
        r1 = abs(a - lam) ** 2 + abs(b) ** 2
        r2 = abs(c) ** 2 + abs(d - lam) ** 2
        if r1 >= r2:
            v0, v1 = b, lam - a
        else:
            v0, v1 = lam - d, c
        valid[i] = True
        if v1 == 0:
            at_inf[i] = True
        else:
            z[i] = v0 / v1
    return z, at_inf, valid


def _attracting_np(mats, band):
    a, b, c, d = mats[:, 0, 0], mats[:, 0, 1], mats[:, 1, 0], mats[:, 1, 1]
    tr = a + d
    t2 = tr * tr
    parabolic = np.abs(t2 - 4) < band
    elliptic = (np.abs(t2.imag) < band) & (t2.real >= 0) & (t2.real < 4)
    valid = ~(parabolic | elliptic)
    sq = np.sqrt(t2 - 4)
    lam = (tr + sq) / 2
    lam2 = (tr - sq) / 2
    lam = np.where(np.abs(lam2) > np.abs(lam), lam2, lam)
    r1 = np.abs(a - lam) ** 2 + np.abs(b) ** 2
    r2 = np.abs(c) ** 2 + np.abs(d - lam) ** 2
    use1 = r1 >= r2
    v0 = np.where(use1, b, lam - d)
    v1 = np.where(use1, lam - a, c)
    at_inf = valid & (v1 == 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(valid & ~at_inf, v0 / np.where(v1 == 0, 1, v1), 0)
    return z.astype(np.complex128), at_inf, valid


def attracting_fixed_points(mats: np.ndarray, band: float):
    """Attracting fixed point of each loxodromic det-1 matrix.

    Returns ``(z, at_infinity, valid)``; rows within ``band`` of parabolic
    or elliptic are marked invalid and left at zero.
    """
    mats = np.ascontiguousarray(mats, dtype=np.complex128)
    if backend() == "numba":
        return _attracting_nb(mats, band)
    return _attracting_np(mats, band)


# --------------------------------------------------------------------------
# compensated word traces

@_njit
def _word_t2_dd_nb(gens, gdet, words, lengths):
    n = words.shape[0]
    out = np.empty(n, dtype=np.complex128)
    m = np.zeros((2, 2, 4))
    nxt = np.zeros((2, 2, 4))
    for w in range(n):
        m[:] = 0.0
        m[0, 0, 0] = 1.0
        m[1, 1, 0] = 1.0
        det = 1.0 + 0.0j
        for pos in range(lengths[w]):
            g = gens[words[w, pos]]
            det *= gdet[words[w, pos]]
            for i in range(2):
                for j in range(2):
                    rh, rl, ih, il = _cmul_d_nb(m[i, 0, 0], m[i, 0, 1], m[i, 0, 2], m[i, 0, 3],
                                                g[0, j].real, g[0, j].imag)
                    rh, rl, ih, il = _cfma_nb(rh, rl, ih, il,
                                              m[i, 1, 0], m[i, 1, 1], m[i, 1, 2], m[i, 1, 3],
                                              g[1, j].real, g[1, j].imag)
                    nxt[i, j, 0] = rh
                    nxt[i, j, 1] = rl
                    nxt[i, j, 2] = ih
                    nxt[i, j, 3] = il
            m[:] = nxt
        trh, trl = _dd_add_nb(m[0, 0, 0], m[0, 0, 1], m[1, 1, 0], m[1, 1, 1])
        tih, til = _dd_add_nb(m[0, 0, 2], m[0, 0, 3], m[1, 1, 2], m[1, 1, 3])
        t = complex(trh + trl, tih + til)
        out[w] = t * t / det
    return out


def _word_t2_dd_np(gens, gdet, words, lengths):
    dd = _dd_np
    n, L = words.shape
    z = np.zeros(n)
    one = np.ones(n)
    # m[i][j] = (re_hi, re_lo, im_hi, im_lo)
    m = [[(one.copy(), z.copy(), z.copy(), z.copy()), (z.copy(), z.copy(), z.copy(), z.copy())],
         [(z.copy(), z.copy(), z.copy(), z.copy()), (one.copy(), z.copy(), z.copy(), z.copy())]]
    det = np.ones(n, dtype=np.complex128)
    eye = np.eye(2, dtype=np.complex128)
    for pos in range(L):
        active = pos < lengths
        idx = np.where(active, words[:, pos], 0)
        g = np.where(active[:, None, None], gens[idx], eye)
        det = det * np.where(active, gdet[idx], 1.0)
        new = [[None, None], [None, None]]
        for i in range(2):
            for j in range(2):
                acc = dd.cmul_d(*m[i][0], g[:, 0, j].real, g[:, 0, j].imag)
                acc = dd.cfma(*acc, *m[i][1], g[:, 1, j].real, g[:, 1, j].imag)
                new[i][j] = acc
        m = new
    trh, trl = dd.dd_add(m[0][0][0], m[0][0][1], m[1][1][0], m[1][1][1])
    tih, til = dd.dd_add(m[0][0][2], m[0][0][3], m[1][1][2], m[1][1][3])
    t = (trh + trl) + 1j * (tih + til)
    return t * t / det


def word_trace_squared_dd(gens: np.ndarray, words: np.ndarray, lengths: np.ndarray) -> np.ndarray:
    """Normalized trace squared of letter-index words, products in double-double.

    ``words`` is an ``(n, L)`` int8 array padded past each row's length.
    """
    gens = np.ascontiguousarray(gens, dtype=np.complex128)
    words = np.ascontiguousarray(words, dtype=np.int8)
    lengths = np.ascontiguousarray(lengths, dtype=np.int64)
    if words.ndim != 2 or words.shape[0] != lengths.shape[0]:
        raise ValueError("words must be (n, L) with one length per row")
    gdet = generator_determinants(gens)
    if backend() == "numba":
        return _word_t2_dd_nb(gens, gdet, words, lengths)
    return _word_t2_dd_np(gens, gdet, words, lengths)


def generator_determinants(gens: np.ndarray) -> np.ndarray:
    """``ad - bc`` of each matrix with the products formed in double-double.

    Generators with large entries lose digits to cancellation in plain
    ``ad - bc``, and that error would leak into every normalized trace.
    """
    dd = _dd_np
    g = np.asarray(gens, dtype=np.complex128)
    a, b, c, d = g[:, 0, 0], g[:, 0, 1], g[:, 1, 0], g[:, 1, 1]
    z = np.zeros(len(g))
    adr, adrl, adi, adil = dd.cmul_d(a.real, z, a.imag, z, d.real, d.imag)
    bcr, bcrl, bci, bcil = dd.cmul_d(b.real, z, b.imag, z, c.real, c.imag)
    rh, rl = dd.dd_add(adr, adrl, -bcr, -bcrl)
    ih, il = dd.dd_add(adi, adil, -bci, -bcil)
    return (rh + rl) + 1j * (ih + il)


# --------------------------------------------------------------------------
# witness-search objective: oriented discs as spherical caps

@_njit
def _cap_nb(h00, h01, h11):
    v0 = h01.real
    v1 = h01.imag
    v2 = (h00 - h11) / 2
    nv = np.sqrt(v0 * v0 + v1 * v1 + v2 * v2)
    disc = abs(h01) ** 2 - h00 * h11
    theta = np.arctan2(np.sqrt(max(disc, 0.0)), (h00 + h11) / 2)
    return -v0 / nv, -v1 / nv, -v2 / nv, theta


@_njit
def _witness_margin_nb(x, signs, inv_gens):
    caps = np.empty((6, 4))
    for j in range(3):
        cx, cy, rad = x[3 * j], x[3 * j + 1], np.exp(x[3 * j + 2])
        s = signs[j]
        h00 = s * 1.0
        h01 = s * complex(-cx, -cy)
        h11 = s * (cx * cx + cy * cy - rad * rad)
        caps[2 * j, 0], caps[2 * j, 1], caps[2 * j, 2], caps[2 * j, 3] = _cap_nb(h00, h01, h11)
        # image disc: A_j applied to the complement, H' = N^H (-H) N
        a, b, c, d = inv_gens[j, 0, 0], inv_gens[j, 0, 1], inv_gens[j, 1, 0], inv_gens[j, 1, 1]
        h10 = np.conj(h01)
        k00 = -(np.conj(a) * (h00 * a + h01 * c) + np.conj(c) * (h10 * a + h11 * c))
        k01 = -(np.conj(a) * (h00 * b + h01 * d) + np.conj(c) * (h10 * b + h11 * d))
        k11 = -(np.conj(b) * (h00 * b + h01 * d) + np.conj(d) * (h10 * b + h11 * d))
        caps[2 * j + 1, 0], caps[2 * j + 1, 1], caps[2 * j + 1, 2], caps[2 * j + 1, 3] = _cap_nb(
            k00.real, k01, k11.real)
    best = np.inf
    for i in range(6):
        for k in range(i + 1, 6):
            dot = caps[i, 0] * caps[k, 0] + caps[i, 1] * caps[k, 1] + caps[i, 2] * caps[k, 2]
            c0 = caps[i, 1] * caps[k, 2] - caps[i, 2] * caps[k, 1]
            c1 = caps[i, 2] * caps[k, 0] - caps[i, 0] * caps[k, 2]
            c2 = caps[i, 0] * caps[k, 1] - caps[i, 1] * caps[k, 0]
            ang = np.arctan2(np.sqrt(c0 * c0 + c1 * c1 + c2 * c2), dot)
            m = ang - caps[i, 3] - caps[k, 3]
            if m < best:
                best = m
    return best


def caps_from_hermitian_np(h00, h01, h11):
    """Spherical caps ``(unit centers (k, 3), angular radii (k,))`` of discs ``H < 0``."""
    h00 = np.asarray(h00, dtype=float)
    h01 = np.asarray(h01, dtype=complex)
    h11 = np.asarray(h11, dtype=float)
    v = np.stack([h01.real, h01.imag, (h00 - h11) / 2], axis=-1)
    nv = np.linalg.norm(v, axis=-1)
    disc = np.abs(h01) ** 2 - h00 * h11
    theta = np.arctan2(np.sqrt(np.maximum(disc, 0.0)), (h00 + h11) / 2)
    return -v / nv[..., None], theta


def _witness_margin_np(x, signs, inv_gens):
    x = np.asarray(x, dtype=float).reshape(3, 3)
    c = x[:, 0] + 1j * x[:, 1]
    rad = np.exp(x[:, 2])
    H = np.zeros((3, 2, 2), dtype=complex)
    H[:, 0, 0] = 1.0
    H[:, 0, 1] = -c
    H[:, 1, 0] = -np.conj(c)
    H[:, 1, 1] = np.abs(c) ** 2 - rad ** 2
    H *= np.asarray(signs, dtype=float)[:, None, None]
    K = -np.conj(np.swapaxes(inv_gens, 1, 2)) @ H @ inv_gens
    allH = np.stack([H, K], axis=1).reshape(6, 2, 2)
    n, theta = caps_from_hermitian_np(allH[:, 0, 0].real, allH[:, 0, 1], allH[:, 1, 1].real)
    iu, ku = np.triu_indices(6, 1)
    dot = np.einsum("ij,ij->i", n[iu], n[ku])
    cross = np.linalg.norm(np.cross(n[iu], n[ku]), axis=-1)
    return float(np.min(np.arctan2(cross, dot) - theta[iu] - theta[ku]))


def witness_margin(x: np.ndarray, signs: np.ndarray, inv_gens: np.ndarray) -> float:
    """Smallest spherical gap between the six discs of a 9-parameter candidate.

    ``x`` holds ``(cx, cy, log radius)`` for the three source circles,
    ``signs`` is +1 when a source disc is the bounded side, and
    ``inv_gens`` holds the inverses of A1, A2, A3. Positive means the six
    closed discs are pairwise disjoint.
    """
    if backend() == "numba":
        return float(_witness_margin_nb(np.ascontiguousarray(x, dtype=np.float64),
                                        np.ascontiguousarray(signs, dtype=np.float64),
                                        np.ascontiguousarray(inv_gens, dtype=np.complex128)))
    return _witness_margin_np(x, signs, inv_gens)
