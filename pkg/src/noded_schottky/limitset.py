"""Limit-set sampling from attracting fixed points, and SVG / PPM output."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .cline import Cline
from .family import generator_stack
from .moebius import CLASSIFY_TOL, INF
from .words import index_word, iterate_levels

DEFAULT_SAMPLE_BUDGET = 2_000_000
DEDUP_GRID = 1e-9
DEFAULT_VIEWPORT = (-2.0, 2.0, -2.0, 2.0)


@dataclass
class LimitSetSample:
    points: np.ndarray  # finite attracting fixed points, complex
    words: np.ndarray  # (n, depth) int8 kernel letter indices, padded
    lengths: np.ndarray  # (n,)
    has_infinity: bool
    infinity_word: tuple = ()
    depth: int = 0
    budget: int = DEFAULT_SAMPLE_BUDGET
    seed: int = 0
    partial: bool = False
    merged: int = 0  # duplicates removed by the dedup grid
    near_parabolic: int = 0  # words skipped as not clearly loxodromic
    words_visited: int = 0
    notes: list[str] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.points) + int(self.has_infinity)

    def word(self, i: int) -> tuple:
        return index_word(self.words[i, : self.lengths[i]])

    def sphere_points(self) -> list:
        out = [complex(z) for z in self.points]
        if self.has_infinity:
            out.append(INF)
        return out


def _level_plan(depth: int, budget: int):
    """Full levels that fit the budget, plus the size of a trailing partial level."""
    full, used = 0, 0
    for n in range(1, depth + 1):
        size = 6 * 5 ** (n - 1)
        if used + size > budget:
            return full, budget - used, n
        used += size
        full = n
    return full, 0, None


def _subtree(stack, first, depth, band, partial_level, chosen_local):
    """Fixed points for all words starting with one letter, grouped by level."""
    per_level = {}
    for level in iterate_levels(stack, depth, first_letter=first):
        if partial_level is not None and level.length > partial_level:
            break
        mats, letters = level.mats, level.letters
        if level.length == partial_level:
            mats, letters = mats[chosen_local], letters[chosen_local]
        z, at_inf, valid = _kernels.attracting_fixed_points(mats, band)
        per_level[level.length] = (z, at_inf, valid, letters)
    return per_level


def limit_set_sample(gens, depth: int, budget: int = DEFAULT_SAMPLE_BUDGET, seed: int = 0,
                     workers: int = 1, band: float = CLASSIFY_TOL) -> LimitSetSample:
    """Attracting fixed points of all loxodromic reduced words up to ``depth``.

    When the word count exceeds ``budget`` the last level that does not fit
    is subsampled uniformly (seeded) and the sample is marked partial. The
    result is independent of ``workers``: subtrees are merged in shortlex
    order and duplicates within ``DEDUP_GRID`` keep their first occurrence.
    """
    if depth < 0:
        raise ValueError("depth must be non-negative")
    stack = generator_stack(gens)
    empty = LimitSetSample(np.zeros(0, complex), np.zeros((0, max(depth, 1)), np.int8),
                           np.zeros(0, np.int64), False, depth=depth, budget=budget, seed=seed)
    if depth == 0 or budget <= 0:
        if budget <= 0 < depth:
            empty.partial = True
        return empty

    full, extra, partial_level = _level_plan(depth, budget)
    chosen = [None] * 6
    if partial_level is not None:
        size = 6 * 5 ** (partial_level - 1)
        rng = np.random.default_rng(seed)
        pick = np.sort(rng.choice(size, size=extra, replace=False))
        per = size // 6
        chosen = [pick[(pick >= k * per) & (pick < (k + 1) * per)] - k * per for k in range(6)]
    max_level = partial_level if partial_level is not None else depth

    def run(k):
        return _subtree(stack, k, max_level, band, partial_level, chosen[k])

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, range(6)))
    else:
        parts = [run(k) for k in range(6)]

    zs, infs, valids, letter_rows, length_rows = [], [], [], [], []
    for n in range(1, max_level + 1):
        for k in range(6):
            if n not in parts[k]:
                continue
            z, at_inf, valid, letters = parts[k][n]
            zs.append(z)
            infs.append(at_inf)
            valids.append(valid)
            pad = np.zeros((len(z), depth), dtype=np.int8)
            pad[:, :n] = letters
            letter_rows.append(pad)
            length_rows.append(np.full(len(z), n, dtype=np.int64))
    z = np.concatenate(zs)
    at_inf = np.concatenate(infs)
    valid = np.concatenate(valids)
    letters = np.concatenate(letter_rows)
    lengths = np.concatenate(length_rows)

    visited = len(z)
    near_parabolic = int(np.count_nonzero(~valid))
    inf_idx = np.flatnonzero(valid & at_inf)
    fin_idx = np.flatnonzero(valid & ~at_inf)
    keys = np.stack([np.round(z[fin_idx].real / DEDUP_GRID), np.round(z[fin_idx].imag / DEDUP_GRID)], axis=1)
    _, first = np.unique(keys, axis=0, return_index=True)
    keep = fin_idx[np.sort(first)]
    merged = len(fin_idx) - len(keep) + max(0, len(inf_idx) - 1)

    sample = LimitSetSample(
        points=z[keep], words=letters[keep], lengths=lengths[keep],
        has_infinity=len(inf_idx) > 0,
        infinity_word=index_word(letters[inf_idx[0], : lengths[inf_idx[0]]]) if len(inf_idx) else (),
        depth=depth, budget=budget, seed=seed, partial=partial_level is not None,
        merged=merged, near_parabolic=near_parabolic, words_visited=visited,
    )
    if near_parabolic:
        sample.notes.append(f"{near_parabolic} words within the parabolic/elliptic band were skipped")
    return sample


# --------------------------------------------------------------------------
# rendering

def _check_viewport(viewport):
    xmin, xmax, ymin, ymax = (float(v) for v in viewport)
    if not (xmax > xmin and ymax > ymin) or not all(map(math.isfinite, (xmin, xmax, ymin, ymax))):
        raise ValueError(f"viewport {viewport} has zero area")
    return xmin, xmax, ymin, ymax


def viewport_points(sample: LimitSetSample, viewport=DEFAULT_VIEWPORT) -> np.ndarray:
    xmin, xmax, ymin, ymax = _check_viewport(viewport)
    z = sample.points
    inside = (z.real >= xmin) & (z.real <= xmax) & (z.imag >= ymin) & (z.imag <= ymax)
    return z[inside]


def _canvas(viewport, size):
    xmin, xmax, ymin, ymax = _check_viewport(viewport)
    width = int(size)
    height = max(1, int(round(size * (ymax - ymin) / (xmax - xmin))))
    return xmin, xmax, ymin, ymax, width, height


def _to_pixels(z, canvas):
    xmin, xmax, ymin, ymax, width, height = canvas
    px = (z.real - xmin) / (xmax - xmin) * width
    py = (ymax - z.imag) / (ymax - ymin) * height
    return px, py


def _cline_polyline(C: Cline, canvas, n=4096) -> np.ndarray:
    xmin, xmax, ymin, ymax, _, _ = canvas
    if not C.is_line:
        t = 2 * np.pi * np.arange(n + 1) / n
        return C.center + C.radius * np.exp(1j * t)
    span = 2 * math.hypot(xmax - xmin, ymax - ymin) + abs(complex((xmin + xmax) / 2, (ymin + ymax) / 2))
    nrm = C.B / abs(C.B)
    base = -C.D * nrm / (2 * abs(C.B))
    return base + 1j * nrm * np.linspace(-span, span, n)


def _describe(sample, shown) -> str:
    inf = "dropped" if sample.has_infinity else "absent"
    return (f"limit set sample depth={sample.depth} seed={sample.seed} budget={sample.budget} "
            f"partial={str(sample.partial).lower()} points={len(sample)} in_view={shown} "
            f"infinity={inf} merged={sample.merged}")


def render_svg(sample: LimitSetSample, viewport=DEFAULT_VIEWPORT, size: int = 800,
               clines: tuple = ()) -> bytes:
    canvas = _canvas(viewport, size)
    width, height = canvas[4], canvas[5]
    z = viewport_points(sample, viewport)
    px, py = _to_pixels(z, canvas)
    marks = dict.fromkeys(f'<rect x="{x:.2f}" y="{y:.2f}" width="0.8" height="0.8"/>'
                          for x, y in zip(px, py))
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" '
        f'height="{height}" viewBox="0 0 {width} {height}">',
        f"<desc>{_describe(sample, len(z))} drawn={len(marks)}</desc>",
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
    ]
    if clines:
        lines.append('<g fill="none" stroke="#b03030" stroke-width="1">')
        for C in clines:
            if C.is_line:
                ends = _cline_polyline(C, canvas, n=2)
                (x1, x2), (y1, y2) = _to_pixels(ends, canvas)
                lines.append(f'<line x1="{x1:.2f}" y1="{y1:.2f}" x2="{x2:.2f}" y2="{y2:.2f}"/>')
            else:
                (cx,), (cy,) = _to_pixels(np.array([C.center]), canvas)
                rx = C.radius / (canvas[1] - canvas[0]) * width
                ry = C.radius / (canvas[3] - canvas[2]) * height
                lines.append(f'<ellipse cx="{cx:.2f}" cy="{cy:.2f}" rx="{rx:.2f}" ry="{ry:.2f}"/>')
        lines.append("</g>")
    lines.append('<g fill="black" stroke="none">')
    lines.extend(marks)
    lines.append("</g>")
    lines.append("</svg>")
    return ("\n".join(lines) + "\n").encode("utf-8")


def render_ppm(sample: LimitSetSample, viewport=DEFAULT_VIEWPORT, size: int = 800,
               clines: tuple = ()) -> bytes:
    canvas = _canvas(viewport, size)
    width, height = canvas[4], canvas[5]
    img = np.full((height, width, 3), 255, dtype=np.uint8)

    def plot(z, color):
        px, py = _to_pixels(np.asarray(z), canvas)
        ix = np.clip(np.floor(px).astype(np.int64), 0, width - 1)
        iy = np.clip(np.floor(py).astype(np.int64), 0, height - 1)
        ok = (px >= 0) & (px <= width) & (py >= 0) & (py <= height)
        img[iy[ok], ix[ok]] = color

    for C in clines:
        plot(_cline_polyline(C, canvas), (176, 48, 48))
    z = viewport_points(sample, viewport)
    plot(z, (0, 0, 0))
    header = f"P6\n# {_describe(sample, len(z))}\n{width} {height}\n255\n".encode("ascii")
    return header + img.tobytes()


def render(sample: LimitSetSample, viewport=DEFAULT_VIEWPORT, fmt: str = "svg",
           size: int = 800, clines: tuple = ()) -> bytes:
    """Deterministic picture of a sample; the point at infinity is never drawn."""
    if fmt == "svg":
        return render_svg(sample, viewport, size, clines)
    if fmt == "ppm":
        return render_ppm(sample, viewport, size, clines)
    raise ValueError(f"unknown format {fmt!r}")
