"""Flow-adapted IFS for X_{n_f,psi}, Bowen-Series IFS for X_{l1,l2,l3}."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence, Union

import numpy as np
from scipy.optimize import brentq

from .groups import DihedralZ2Group, FiniteGroup, klein_four_group, trivial_group, z2_group
from .moebius import (
    Disk,
    Matrix2,
    PoleInsideDisk,
    ScaledMatrix,
    cayley,
    displacement_length,
    inverse_cayley,
    mobius_apply,
    mobius_image_disk,
    product_scaled,
    translation,
)


class InvalidPsi(ValueError):
    pass


class ValidationFailed(ValueError):
    pass


class NoSuchSurface(ValueError):
    pass


class NotClosed(ValueError):
    pass


class InvalidTransition(ValueError):
    pass


class OutOfRange(ValueError):
    pass


class NotMonotone(RuntimeError):
    pass


class UnknownGroup(ValueError):
    pass


@dataclass(frozen=True)
class SymmetricFunnels:
    nf: int
    psi: float

    def __post_init__(self):
        if self.nf < 3:
            raise InvalidPsi(f"n_f must be >= 3, got {self.nf}")
        if not 0.0 < self.psi < 2.0 * math.pi / self.nf:
            raise InvalidPsi(f"psi={self.psi} outside (0, 2pi/{self.nf})")

    def render(self) -> str:
        return f"sym:{self.nf}:{self.psi!r}"


@dataclass(frozen=True)
class ThreeFunnel:
    l1: float
    l2: float
    l3: float

    def __post_init__(self):
        if min(self.l1, self.l2, self.l3) <= 0:
            raise NoSuchSurface("funnel lengths must be positive")

    def render(self) -> str:
        return f"bs:{self.l1!r},{self.l2!r},{self.l3!r}"


SurfaceSpec = Union[SymmetricFunnels, ThreeFunnel]


@dataclass(frozen=True, eq=False)
class IfsScheme:
    spec: SurfaceSpec
    disks: tuple[Disk, ...]
    adjacency: np.ndarray
    edge_maps: dict  # (i, j) -> Matrix2, translations folded in
    transition_matrices: dict  # (i, j) -> Matrix2 used for closed-word products
    groups: dict  # choice -> FiniteGroup
    point_action: Callable = field(repr=False)  # (g, u, symbol) -> u'
    delta_offset: float = 0.0

    @property
    def n_symbols(self) -> int:
        return len(self.disks)

    @property
    def group(self) -> FiniteGroup:
        return self.groups["full"]

    def group_for(self, choice: str | FiniteGroup) -> FiniteGroup:
        if isinstance(choice, FiniteGroup):
            return choice
        try:
            return self.groups[choice]
        except KeyError:
            raise UnknownGroup(f"group {choice!r} not available; choose from {sorted(self.groups)}") from None

    def edges(self) -> list[tuple[int, int]]:
        n = self.n_symbols
        return [(i, j) for i in range(1, n + 1) for j in range(1, n + 1) if self.adjacency[i - 1, j - 1]]

    def apply_edge(self, i: int, j: int, u):
        return mobius_apply(self.edge_maps[(i, j)], u)


# flow-adapted scheme

def _flow_disks(nf: int, psi: float) -> tuple[np.ndarray, np.ndarray]:
    j = np.arange(1, nf + 1)
    theta_a = np.pi * (2 * j - 1) / nf - np.pi - psi / 2
    theta_b = theta_a + psi
    a = np.array([cayley(np.exp(1j * t)).real for t in theta_a])
    b = np.array([cayley(np.exp(1j * t)).real for t in theta_b])
    return a, b


def reflection_matrix(center: float, radius: float) -> Matrix2:
    """R u = (m u + r^2 - m^2)/(u - m), inversion in the circle |u - m| = r."""
    m, r = center, radius
    return Matrix2(m / r, (r * r - m * m) / r, 1.0 / r, -m / r)


def reflection_matrices(nf: int, psi: float) -> list[Matrix2]:
    a, b = _flow_disks(nf, psi)
    return [reflection_matrix((aj + bj) / 2, (bj - aj) / 2) for aj, bj in zip(a, b)]


def build_flow_adapted(spec: SymmetricFunnels, validate: bool = True) -> IfsScheme:
    nf, psi = spec.nf, spec.psi
    a, b = _flow_disks(nf, psi)
    centers, radii = (a + b) / 2, (b - a) / 2
    delta = float(b[-1] - a[0] + 1.0)
    disks = tuple(Disk(float(m), float(r)) for m, r in zip(centers, radii))
    disks += tuple(Disk(float(m) + delta, float(r)) for m, r in zip(centers, radii))
    refl = [reflection_matrix(float(m), float(r)) for m, r in zip(centers, radii)]

    n = 2 * nf
    adj = np.zeros((n, n), dtype=bool)
    edge_maps, trans = {}, {}
    for i in range(nf):
        for j in range(nf):
            if i == j:
                continue
            adj[i, j + nf] = adj[j + nf, i] = True
            # copy 0 -> copy 1: R_j(u) + delta ; copy 1 -> copy 0: R_i(u - delta)
            edge_maps[(i + 1, j + nf + 1)] = translation(delta) @ refl[j]
            edge_maps[(j + nf + 1, i + 1)] = refl[i] @ translation(-delta)
            trans[(i + 1, j + nf + 1)] = refl[j]
            trans[(j + nf + 1, i + 1)] = refl[i]

    group = DihedralZ2Group(nf)

    def point_action(g, u, symbol: int):
        copy = (symbol - 1) // nf
        v = u - copy * delta
        turn = g.rot
        if g.refl:
            v = -v
            turn += 1
        if turn % nf:
            rot = np.exp(2j * np.pi * turn / nf)
            w = np.asarray(v, dtype=complex)
            v = (-1j * (rot * (1j - w) / (w + 1j) - 1) / (rot * (1j - w) / (w + 1j) + 1))
            if np.isrealobj(u):
                v = np.real(v)
        return v + (copy ^ g.swap) * delta

    scheme = IfsScheme(
        spec=spec,
        disks=disks,
        adjacency=adj,
        edge_maps=edge_maps,
        transition_matrices=trans,
        groups={"full": group, "trivial": trivial_group(n)},
        point_action=point_action,
        delta_offset=delta,
    )
    if validate:
        report = validate_ifs(scheme)
        if not report.ok:
            raise ValidationFailed(str(report))
    return scheme


# Bowen-Series scheme

def _trace_gap(l1: float, l2: float, l3: float, a: float) -> float:
    """Tr(S_1 S_2^{-1}) + 2 cosh(l3/2) as a function of a."""
    c1, s1 = math.cosh(l1 / 2), math.sinh(l1 / 2)
    c2, s2 = math.cosh(l2 / 2), math.sinh(l2 / 2)
    return 2 * c1 * c2 - s1 * s2 * (a + 1 / a) + 2 * math.cosh(l3 / 2)


def solve_bowen_series_a(l1: float, l2: float, l3: float, lo: float = 1e-8, hi: float = 1e8) -> float:
    """Root a > 1 of the trace condition by bisection in log a.

    The condition is symmetric under a -> 1/a and positive at a = 1, so the
    bracket [1, hi] holds the larger root whenever one exists below hi.
    """
    f = lambda x: _trace_gap(l1, l2, l3, math.exp(x))
    x0, x1 = max(math.log(lo), 0.0), math.log(hi)
    if not f(x0) > 0.0 or not f(x1) < 0.0:
        raise NoSuchSurface(f"no a in ({lo:g}, {hi:g}) solves the trace condition for ({l1}, {l2}, {l3})")
    return math.exp(brentq(f, x0, x1, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500))


def bowen_series_generators(l1: float, l2: float, l3: float) -> tuple[Matrix2, Matrix2, float]:
    a = solve_bowen_series_a(l1, l2, l3)
    c1, s1 = math.cosh(l1 / 2), math.sinh(l1 / 2)
    c2, s2 = math.cosh(l2 / 2), math.sinh(l2 / 2)
    return Matrix2(c1, s1, s1, c1), Matrix2(c2, a * s2, s2 / a, c2), a


def build_bowen_series(spec: ThreeFunnel, validate: bool = True) -> IfsScheme:
    l1, l2 = spec.l1, spec.l2
    S1, S2, a = bowen_series_generators(spec.l1, spec.l2, spec.l3)
    S = {1: S1, 2: S2, 3: S1.inverse(), 4: S2.inverse()}
    d1 = Disk(-1 / math.tanh(l1 / 2), 1 / math.sinh(l1 / 2))
    d2 = Disk(-a / math.tanh(l2 / 2), a / math.sinh(l2 / 2))
    disks = (d1, d2, Disk(-d1.center, d1.radius), Disk(-d2.center, d2.radius))
    adj = np.ones((4, 4), dtype=bool)
    edge_maps = {}
    for i in range(4):
        for j in range(4):
            if abs(i - j) == 2:
                adj[i, j] = False
            else:
                edge_maps[(i + 1, j + 1)] = S[j + 1].inverse()

    sigma1 = lambda u: -u
    sigma2 = lambda u: a / u

    def point_action(g, u, symbol: int):
        bits = g.bits
        if len(bits) > 1 and bits[1]:
            u = sigma2(u)
        if len(bits) > 0 and bits[0]:
            u = sigma1(u)
        return u

    groups = {"z2": z2_group(), "trivial": trivial_group(4)}
    if l1 == l2:
        groups["klein"] = klein_four_group()
    groups["full"] = groups.get("klein", groups["z2"])
    scheme = IfsScheme(
        spec=spec,
        disks=disks,
        adjacency=adj,
        edge_maps=edge_maps,
        transition_matrices=dict(edge_maps),
        groups=groups,
        point_action=point_action,
    )
    if validate:
        report = validate_ifs(scheme)
        if not report.ok:
            raise NoSuchSurface(f"Bowen-Series disks for {spec} violate the IFS axioms: {report}")
    return scheme


def build_scheme(spec: SurfaceSpec, validate: bool = True) -> IfsScheme:
    if isinstance(spec, SymmetricFunnels):
        return build_flow_adapted(spec, validate)
    return build_bowen_series(spec, validate)


@dataclass
class ValidationReport:
    disjoint: list = field(default_factory=list)  # overlapping disk pairs
    nesting: list = field(default_factory=list)  # edges whose image escapes the target
    separation: list = field(default_factory=list)  # overlapping image-disk pairs

    @property
    def ok(self) -> bool:
        return not (self.disjoint or self.nesting or self.separation)

    def __str__(self) -> str:
        if self.ok:
            return "all checks pass"
        return f"disjoint={self.disjoint} nesting={self.nesting} separation={self.separation}"


def validate_ifs(s: IfsScheme) -> ValidationReport:
    rep = ValidationReport()
    n = s.n_symbols
    for i in range(n):
        for j in range(i + 1, n):
            if not s.disks[i].disjoint(s.disks[j]):
                rep.disjoint.append((i + 1, j + 1))
    images = {}
    for (i, j) in s.edges():
        try:
            img = mobius_image_disk(s.edge_maps[(i, j)], s.disks[i - 1])
        except PoleInsideDisk:
            rep.nesting.append((i, j))
            continue
        images[(i, j)] = img
        if not img.inside(s.disks[j - 1]):
            rep.nesting.append((i, j))
    keys = sorted(images)
    for x in range(len(keys)):
        for y in range(x + 1, len(keys)):
            if not images[keys[x]].disjoint(images[keys[y]]):
                rep.separation.append((keys[x], keys[y]))
    return rep


def closed_word_matrix(s: IfsScheme, w: Sequence[int]) -> ScaledMatrix:
    """Product T_n ... T_1 of the transition matrices along a closed word."""
    w = tuple(w)
    if len(w) < 2 or w[0] != w[-1]:
        raise NotClosed(f"word {w} is not closed")
    ms = []
    for x, y in zip(w, w[1:]):
        try:
            ms.append(s.transition_matrices[(x, y)])
        except KeyError:
            raise InvalidTransition(f"{x} -> {y} is not an edge") from None
    return product_scaled(reversed(ms))


def funnel_length(spec: SymmetricFunnels) -> float:
    """Length of the geodesic around one funnel.

    Reduced word (-1) walks 1 -> n_f+2 with an order-2 closing element, so its
    square is the closed word (n_f+2, 1, n_f+2).
    """
    scheme = build_flow_adapted(spec, validate=False)
    return displacement_length(closed_word_matrix(scheme, (spec.nf + 2, 1, spec.nf + 2)))


def _funnel_length_raw(nf: int, psi: float) -> float:
    return funnel_length(SymmetricFunnels(nf, psi))


def psi_for_length(nf: int, target: float, n_scan: int = 64) -> float:
    lo, hi = 1e-6, 2 * math.pi / nf - 1e-6
    grid = np.linspace(lo, hi, n_scan)
    vals = np.array([_funnel_length_raw(nf, p) for p in grid])
    if np.any(np.diff(vals) >= 0):
        raise NotMonotone(f"funnel length not decreasing in psi for n_f={nf}")
    if not vals[-1] < target < vals[0]:
        raise OutOfRange(f"length {target} outside ({vals[-1]:.6g}, {vals[0]:.6g}) for n_f={nf}")
    k = int(np.searchsorted(-vals, -target))
    f = lambda p: _funnel_length_raw(nf, p) - target
    psi = brentq(f, grid[k - 1], grid[k], xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
    if abs(f(psi)) >= 1e-9:
        raise OutOfRange(f"bisection stalled at |residual| = {abs(f(psi)):.3g}")
    return float(psi)


# surface strings and config files

def parse_surface(text: str) -> SurfaceSpec:
    text = text.strip()
    kind, _, rest = text.partition(":")
    try:
        if kind == "sym":
            nf, psi = rest.split(":")
            return SymmetricFunnels(int(nf), float(psi))
        if kind == "bs":
            l1, l2, l3 = (float(x) for x in rest.split(","))
            return ThreeFunnel(l1, l2, l3)
    except ValueError as exc:
        if isinstance(exc, (InvalidPsi, NoSuchSurface)):
            raise
        raise ValueError(f"malformed surface string {text!r}") from exc
    raise ValueError(f"unknown surface variant in {text!r}; expected sym:NF:PSI or bs:L1,L2,L3")


def read_config(path: str | Path) -> dict:
    """key = value (or key: value) lines; '#' starts a comment."""
    out = {}
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        sep = "=" if "=" in line else ":"
        key, _, value = line.partition(sep)
        out[key.strip().lower()] = value.strip()
    return out


def surface_from_config(cfg: dict) -> SurfaceSpec | None:
    variant = cfg.get("variant")
    if variant is None:
        return parse_surface(cfg["surface"]) if "surface" in cfg else None
    if variant in ("sym", "symmetric"):
        return SymmetricFunnels(int(cfg["nf"]), float(cfg["psi"]))
    if variant in ("bs", "three", "bowen-series"):
        return ThreeFunnel(float(cfg["l1"]), float(cfg["l2"]), float(cfg["l3"]))
    raise ValueError(f"unknown variant {variant!r}")
