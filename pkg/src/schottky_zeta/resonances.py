"""Zeros of truncated zeta functions: Newton from grid seeds, argument principle, delta."""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import brentq

from .cycle import OrbitTable, ZetaEvaluator

EPS = np.finfo(float).eps
DEDUP_RADIUS = 1e-7


class ContourTooClose(RuntimeError):
    pass


class NoRealZero(RuntimeError):
    pass


@dataclass(frozen=True)
class SearchRegion:
    re_min: float
    re_max: float
    im_min: float
    im_max: float
    grid_re: float = 0.02
    grid_im: float = 0.25

    def __post_init__(self):
        if not (self.re_min < self.re_max and self.im_min < self.im_max):
            raise ValueError(f"empty region {self}")
        if not (self.grid_re > 0 and self.grid_im > 0):
            raise ValueError("grid steps must be positive")

    def contains(self, s, pad: float = 0.0):
        s = np.asarray(s)
        return (
            (s.real >= self.re_min - pad) & (s.real <= self.re_max + pad)
            & (s.imag >= self.im_min - pad) & (s.imag <= self.im_max + pad)
        )

    @property
    def pad(self) -> float:
        return max(self.grid_re, self.grid_im)

    def seeds(self) -> np.ndarray:
        nx = max(2, int(math.ceil((self.re_max - self.re_min) / self.grid_re)) + 1)
        ny = max(2, int(math.ceil((self.im_max - self.im_min) / self.grid_im)) + 1)
        x = np.linspace(self.re_min, self.re_max, nx)
        y = np.linspace(self.im_min, self.im_max, ny)
        return (x[None, :] + 1j * y[:, None]).ravel()

    def split(self, height: float) -> list["SearchRegion"]:
        """Horizontal strips of at most the given height."""
        n = max(1, int(math.ceil((self.im_max - self.im_min) / height)))
        edges = np.linspace(self.im_min, self.im_max, n + 1)
        return [replace(self, im_min=float(a), im_max=float(b)) for a, b in zip(edges, edges[1:])]


def default_region(re_min, re_max, im_min, im_max, max_length: float) -> SearchRegion:
    return SearchRegion(re_min, re_max, im_min, im_max, 0.02, min(0.25, math.pi / (4.0 * max_length)))


@dataclass(frozen=True)
class Zero:
    s: complex
    residual: float
    iterations: int


@dataclass(frozen=True)
class Resonance:
    s: complex
    irrep: str
    order: int
    residual: float
    newton_iterations: int
    error_estimate: float = math.nan  # local R_n
    multiplicity: int = 1

    @property
    def trusted(self) -> bool:
        return self.error_estimate <= 1e-2


def default_threads() -> int:
    env = os.environ.get("ZETA_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _newton(func, seeds: np.ndarray, scale_len: float, box: SearchRegion, max_iter: int):
    s = seeds.astype(complex).copy()
    it = np.zeros(s.shape, dtype=int)
    active = np.ones(s.shape, dtype=bool)
    done = np.zeros(s.shape, dtype=bool)
    resid = np.full(s.shape, np.inf)
    pad = 10 * box.pad
    for _ in range(max_iter):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        f, df = func(s[idx])
        with np.errstate(divide="ignore", invalid="ignore"):
            step = f / df
        bad = ~np.isfinite(step)
        s[idx] = np.where(bad, s[idx], s[idx] - step)
        it[idx] += 1
        tol = np.maximum(1e-12, 8 * EPS * np.abs(s[idx]))
        small = np.abs(step) < tol
        if np.any(small):
            cand = idx[small]
            f2, df2 = func(s[cand])
            scale = np.maximum(1.0, np.abs(df2) * scale_len)
            ok = np.abs(f2) < 1e-10 * scale
            done[cand[ok]] = True
            resid[cand[ok]] = np.abs(f2[ok])
            active[cand] = False
        escaped = ~box.contains(s[idx], pad) | bad
        active[idx[escaped]] = False
    return s[done], resid[done], it[done]


def _dedup(s: np.ndarray, resid: np.ndarray, it: np.ndarray, radius: float = DEDUP_RADIUS) -> list[Zero]:
    """Keep the best-residual point of every cluster of diameter < radius."""
    order = np.argsort(resid, kind="stable")
    buckets: dict = {}
    kept: list[Zero] = []
    for k in order:
        z = complex(s[k])
        bx, by = math.floor(z.real / radius), math.floor(z.imag / radius)
        near = (
            q for dx in (-1, 0, 1) for dy in (-1, 0, 1)
            for q in buckets.get((bx + dx, by + dy), ())
        )
        if any(abs(z - q.s) < radius for q in near):
            continue
        zero = Zero(z, float(resid[k]), int(it[k]))
        buckets.setdefault((bx, by), []).append(zero)
        kept.append(zero)
    kept.sort(key=lambda q: (q.s.imag, q.s.real))
    return kept


def find_zeros(
    func: Callable,
    region: SearchRegion,
    max_iter: int = 60,
    n_jobs: int | None = None,
    chunk: int = 4096,
) -> list[Zero]:
    """Zeros of func inside the padded region; func(s) -> (f(s), f'(s)), vectorized."""
    seeds = region.seeds()
    chunks = [seeds[i:i + chunk] for i in range(0, len(seeds), chunk)]
    scale_len = region.grid_im
    run = lambda c: _newton(func, c, scale_len, region, max_iter)
    n_jobs = n_jobs or default_threads()
    if n_jobs > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            parts = list(pool.map(run, chunks))
    else:
        parts = [run(c) for c in chunks]
    s = np.concatenate([p[0] for p in parts]) if parts else np.zeros(0, complex)
    r = np.concatenate([p[1] for p in parts]) if parts else np.zeros(0)
    it = np.concatenate([p[2] for p in parts]) if parts else np.zeros(0, int)
    inside = region.contains(s, region.pad)
    return _dedup(s[inside], r[inside], it[inside])


def _edge_winding(func, z0: complex, z1: complex, n0: int, max_points: int = 2 ** 20):
    """Phase increment of f and trapezoid of f'/f along [z0, z1], refined until |d arg| < pi/4."""
    t = np.linspace(0.0, 1.0, n0 + 1)
    while True:
        z = z0 + (z1 - z0) * t
        f, df = func(z)
        ratio = f[1:] / f[:-1]
        darg = np.angle(ratio)
        coarse = np.abs(darg) > math.pi / 4
        if not np.any(coarse):
            break
        if len(t) > max_points:
            raise ContourTooClose("contour refinement did not converge")
        mids = 0.5 * (t[:-1] + t[1:])[coarse]
        t = np.sort(np.concatenate([t, mids]))
    g = df / f
    trap = np.sum(0.5 * (g[1:] + g[:-1]) * np.diff(z))
    return float(np.sum(darg)), complex(trap), float(np.min(np.abs(f)))


def contour_count(
    func: Callable,
    rect: SearchRegion,
    known_zeros: Sequence[complex] = (),
    max_jitter: int = 5,
    points_per_unit: float = 16.0,
    seed: int = 12345,
) -> tuple[int, SearchRegion]:
    """Winding number of f around rect, or around a slightly enlarged copy.

    Edges are pushed outward by a fraction of the seed grid when a known zero
    lies on them or the phase refinement fails; the rectangle actually used is
    returned with the count.  func(s) -> (f, f').
    """
    rng = np.random.default_rng(seed)
    step = min(rect.grid_re, rect.grid_im)
    # phase refinement copes with zeros this close; only exact hits need moving
    tol = 1e-3 * step
    known = np.asarray(list(known_zeros), dtype=complex)
    for attempt in range(max_jitter + 1):
        if attempt == 0:
            x0, x1, y0, y1 = _clear_edges(rect, known, step, tol)
        else:
            jit = rng.uniform(0.1, 0.5, 4) * step
            x0, x1 = rect.re_min - jit[0], rect.re_max + jit[1]
            y0, y1 = rect.im_min - jit[2], rect.im_max + jit[3]
        if known.size and _near_contour(known, x0, x1, y0, y1, tol):
            continue
        corners = [complex(x0, y0), complex(x1, y0), complex(x1, y1), complex(x0, y1)]
        total_arg, total_trap, fmin = 0.0, 0.0j, math.inf
        try:
            for a, b in zip(corners, corners[1:] + corners[:1]):
                n0 = max(8, int(abs(b - a) * points_per_unit / max(rect.grid_im, 1e-3) * 0.25))
                d, tr, m = _edge_winding(func, a, b, n0)
                total_arg += d
                total_trap += tr
                fmin = min(fmin, m)
        except ContourTooClose:
            continue
        if fmin == 0.0:
            continue
        wind = total_arg / (2 * math.pi)
        count = int(round(wind))
        # the trapezoid of f'/f is only a coarse cross-check of the phase count
        if abs(wind - count) < 1e-6 and abs(total_trap.imag / (2 * math.pi) - count) < 0.5:
            return count, replace(rect, re_min=x0, re_max=x1, im_min=y0, im_max=y1)
    raise ContourTooClose(f"no reliable contour after {max_jitter} jitters")


def argument_count(func: Callable, rect: SearchRegion, known_zeros: Sequence[complex] = (), **kw) -> int:
    """Winding number of f around the rectangle (possibly slightly enlarged)."""
    return contour_count(func, rect, known_zeros, **kw)[0]


def _clear_edges(rect: SearchRegion, known: np.ndarray, step: float, tol: float):
    """Push each edge outward by the smallest shift (<= step/2) that clears the known zeros."""
    shifts = np.linspace(0.0, 0.5 * step, 51)
    x0, x1, y0, y1 = rect.re_min, rect.re_max, rect.im_min, rect.im_max
    if known.size == 0:
        return x0, x1, y0, y1
    lo_x, hi_x = x0 - 0.5 * step - tol, x1 + 0.5 * step + tol
    lo_y, hi_y = y0 - 0.5 * step - tol, y1 + 0.5 * step + tol
    along_y = known[(known.imag >= lo_y) & (known.imag <= hi_y)]
    along_x = known[(known.real >= lo_x) & (known.real <= hi_x)]

    def pick(base, sign, coords):
        for d in shifts:
            c = base + sign * d
            if coords.size == 0 or np.abs(coords - c).min() > tol:
                return c
        return base + sign * shifts[-1]

    return (pick(x0, -1, along_y.real), pick(x1, 1, along_y.real),
            pick(y0, -1, along_x.imag), pick(y1, 1, along_x.imag))


def _near_contour(z: np.ndarray, x0, x1, y0, y1, tol) -> bool:
    inside_x = (z.real >= x0 - tol) & (z.real <= x1 + tol)
    inside_y = (z.imag >= y0 - tol) & (z.imag <= y1 + tol)
    near_v = inside_y & ((np.abs(z.real - x0) < tol) | (np.abs(z.real - x1) < tol))
    near_h = inside_x & ((np.abs(z.imag - y0) < tol) | (np.abs(z.imag - y1) < tol))
    return bool(np.any(near_v | near_h))


# zeta-specific wrappers

def zeta_function(ev: ZetaEvaluator) -> Callable:
    return lambda s: ev.value_and_derivative(s)


def local_error(ev: ZetaEvaluator, s: Sequence[complex], radius: float, n_ring: int = 8) -> np.ndarray:
    """Median R_n on a small ring around each point (R_n itself blows up at a zero)."""
    s = np.asarray(s, dtype=complex)
    if s.size == 0:
        return np.zeros(0)
    ring = radius * np.exp(2j * np.pi * (np.arange(n_ring) + 0.5) / n_ring)
    pts = s[:, None] + ring[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        z = ev.partial_sums(pts)
        hi, lo = z[ev.order], z[ev.order - 1]
        if ev.product:
            hi, lo = np.prod(hi, axis=0), np.prod(lo, axis=0)
        else:
            hi, lo = hi[0], lo[0]
        r = np.abs(hi - lo) / np.abs(hi)
    return np.median(r, axis=1)


def cluster_moments(func: Callable, center: complex, radius: float, n: int = 128, max_m: int = 4):
    """Delves-Lyness: zeros inside |z - center| < radius from trapezoid moments of f'/f.

    Returns the zeros (with repeats) or None when the winding number is not
    a clean integer in 1..max_m.
    """
    u = np.exp(2j * np.pi * (np.arange(n) + 0.5) / n)
    f, df = func(center + radius * u)
    g = radius * df / f
    # p_k = sum of ((z - center)/radius)^k over the enclosed zeros
    p = [np.mean(u ** (k + 1) * g) for k in range(max_m + 1)]
    m = int(round(p[0].real))
    if not 1 <= m <= max_m or abs(p[0] - m) > 1e-6:
        return None
    e = [1.0 + 0j]
    for k in range(1, m + 1):
        e.append(sum((-1) ** (i - 1) * e[k - i] * p[i] for i in range(1, k + 1)) / k)
    coeffs = [(-1) ** k * e[k] for k in range(m + 1)]
    return center + radius * np.roots(coeffs)


def refine_zeros(func: Callable, zeros: Sequence[Zero], scale: float) -> list[tuple[Zero, int]]:
    """Re-locate each Newton zero from contour moments; returns (zero, multiplicity).

    Newton stalls near multiple or nearly multiple zeros; the moments do not.
    """
    pts = np.array([z.s for z in zeros], dtype=complex)
    out: list[tuple[Zero, int]] = []
    for k, z in enumerate(zeros):
        others = np.delete(pts, k)
        r = min(scale, 0.4 * np.abs(others - z.s).min()) if others.size else scale
        roots = cluster_moments(func, z.s, r) if r > 0 else None
        if roots is None:
            out.append((z, 1))
            continue
        if len(roots) == 1:
            s = complex(roots[0])
            for _ in range(2):
                f, df = func(np.array([s]))
                if df[0] == 0:
                    break
                s = s - complex(f[0] / df[0])
            roots = np.array([s])
        resid = np.abs(func(np.asarray(roots))[0])
        groups: list[list[int]] = []
        for i, w in enumerate(roots):
            for grp in groups:
                if abs(roots[grp[0]] - w) < DEDUP_RADIUS:
                    grp.append(i)
                    break
            else:
                groups.append([i])
        for grp in groups:
            s = complex(np.mean(roots[grp]))
            out.append((Zero(s, float(resid[grp].max()), z.iterations), len(grp)))
    return out


def find_resonances(
    table: OrbitTable,
    irrep,
    order: int,
    region: SearchRegion,
    n_jobs: int | None = None,
) -> list[Resonance]:
    """Zeros of Z^{chi,(n)} for one irrep label (or "full") in the padded region."""
    ev = ZetaEvaluator(table, irrep, order)
    label = "full" if ev.product else ev.labels[0]
    func = zeta_function(ev)
    zeros = find_zeros(func, region, n_jobs=n_jobs)
    refined = refine_zeros(func, zeros, 0.25 * min(region.grid_re, region.grid_im))
    radius = 0.25 * math.pi / max(table.max_length, 1.0)
    pts = [z.s for z, _ in refined]
    err = local_error(ev, pts, radius) if order >= 1 else np.zeros(len(pts))
    return [
        Resonance(z.s, label, order, z.residual, z.iterations, float(e), m)
        for (z, m), e in zip(refined, err)
    ]


@dataclass
class CellReport:
    region: SearchRegion
    irrep: str
    found: int
    counted: int | None

    @property
    def consistent(self) -> bool:
        return self.counted is not None and self.counted == self.found


def scan_resonances(
    table: OrbitTable,
    irreps: Sequence[str],
    order: int,
    region: SearchRegion,
    cell_height: float = 10.0,
    n_jobs: int | None = None,
    refine: int = 2,
) -> tuple[list[Resonance], list[CellReport]]:
    """Cell-by-cell search with an argument-principle count per cell.

    A cell whose count disagrees with the Newton list is re-seeded on a grid
    halved in both directions, up to `refine` times.
    """
    out: list[Resonance] = []
    reports: list[CellReport] = []
    for irrep in irreps:
        ev = ZetaEvaluator(table, irrep, order)
        func = zeta_function(ev)
        for cell in region.split(cell_height):
            res, counted = [], None
            c = cell
            for _ in range(refine + 1):
                cand = find_resonances(table, irrep, order, c, n_jobs)
                try:
                    counted, used = contour_count(func, c, [r.s for r in cand])
                    in_contour = _count_inside(cand, used)
                except ContourTooClose:
                    counted, in_contour = None, -1
                res = [r for r in cand if cell.contains(r.s) and _in_cell(r.s, cell, region)]
                if counted == in_contour:
                    break
                c = replace(c, grid_re=c.grid_re / 2, grid_im=c.grid_im / 2)
            reports.append(CellReport(cell, irrep, in_contour, counted))
            out.extend(res)
    out.sort(key=lambda r: (r.s.imag, r.s.real, r.irrep))
    return out, reports


def _count_inside(res: Sequence[Resonance], rect: SearchRegion) -> int:
    return sum(r.multiplicity for r in res if rect.contains(r.s))


def _in_cell(s: complex, cell: SearchRegion, whole: SearchRegion) -> bool:
    """Half-open in Im so stacked cells do not double count."""
    return s.imag < cell.im_max or cell.im_max >= whole.im_max


def critical_exponent(table: OrbitTable, order: int | None = None, n_scan: int = 400) -> float:
    """Largest real zero of the trivial-irrep zeta in (0, 1)."""
    order = table.max_order if order is None else order
    ev = ZetaEvaluator(table, table.irreps[0], order)
    x = np.linspace(1e-9, 1.0 - 1e-9, n_scan)
    z = np.real(ev(x))
    sign = np.sign(z)
    flips = np.flatnonzero(sign[:-1] * sign[1:] < 0)
    if flips.size == 0:
        raise NoRealZero("no sign change of Z on (0, 1); truncation too low?")
    k = flips[-1]
    f = lambda t: float(np.real(ev(t)))
    return float(brentq(f, x[k], x[k + 1], xtol=1e-14, rtol=4 * EPS, maxiter=500))
