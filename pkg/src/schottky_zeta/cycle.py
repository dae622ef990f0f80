"""Truncated symmetry-reduced cycle expansions of the Selberg zeta function."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np

from .groups import FiniteGroup, Irrep, check_free_action
from .surfaces import IfsScheme, SymmetricFunnels, closed_word_matrix
from .moebius import displacement_length
from .symbolic import (
    PrimeClassDatum,
    TooLarge,
    count_words,
    enumerate_prime_classes_bruteforce,
    enumerate_prime_classes_reduced,
    iter_gclosed_pairs,
    iter_words,
    iterate_pair,
    orbit_weights,
)


class NotFree(ValueError):
    pass


class OrderTooHigh(ValueError):
    pass


class NotConvergent(ValueError):
    pass


class DegenerateDenominator(ZeroDivisionError):
    pass


@dataclass(frozen=True, eq=False)
class OrbitTable:
    scheme: IfsScheme
    group: FiniteGroup
    max_order: int
    classes: tuple[PrimeClassDatum, ...]
    chars: tuple[np.ndarray, ...]  # per class: (floor(max_order/n_w), n_irreps) of chi(g_w^l)
    weights: dict  # (class index, l) -> orbit weight, 1/l for a free action
    free: bool = True

    @property
    def irreps(self) -> tuple[Irrep, ...]:
        return self.group.irreps

    @property
    def max_length(self) -> float:
        """Largest exponent l L/m appearing in the expansion."""
        return max((self.max_order // d.n_w) * d.length_per_period for d in self.classes)

    def terms(self):
        """Flattened (class, l) terms: t, lambda = l L/m, weight, chi rows."""
        t, lam, w, chi = [], [], [], []
        for i, d in enumerate(self.classes):
            for l in range(1, self.max_order // d.n_w + 1):
                t.append(d.n_w * l)
                lam.append(l * d.length_per_period)
                w.append(self.weights[(i, l)])
                chi.append(self.chars[i][l - 1])
        return (np.array(t, dtype=int), np.array(lam), np.array(w),
                np.array(chi).reshape(len(t), len(self.irreps)))


def build_orbit_table(
    scheme: IfsScheme,
    group: FiniteGroup | str = "full",
    max_order: int = 6,
    enumerator: str = "auto",
    strict: bool = False,
) -> OrbitTable:
    """Enumerate prime classes up to max_order and attach characters and weights.

    With strict=True a non-free action raises NotFree; otherwise the exact orbit
    weights absorb the stabilizers.
    """
    group = scheme.group_for(group)
    n_words = count_words(scheme.adjacency, max_order)
    if n_words > 10 ** 8:
        raise TooLarge(f"{n_words} words up to length {max_order} exceed the enumeration guard")
    free, witness = check_free_action(scheme, max_order, group)
    if strict and not free:
        raise NotFree(f"{group.name} does not act freely on W^G: {witness}")
    reduced_ok = isinstance(scheme.spec, SymmetricFunnels) and group is scheme.group
    if enumerator == "auto":
        enumerator = "reduced" if reduced_ok else "bruteforce"
    if enumerator == "reduced":
        if not reduced_ok:
            raise ValueError("reduced enumeration needs the full symmetry of a symmetric-funnel surface")
        classes = enumerate_prime_classes_reduced(scheme.spec.nf, scheme.spec.psi, max_order, scheme)
    else:
        classes = enumerate_prime_classes_bruteforce(scheme, group, max_order)
    chars = []
    for d in classes:
        powers = [group.power(d.g_w, l) for l in range(1, max_order // d.n_w + 1)]
        chars.append(np.array([[group.character(r, g) for r in group.irreps] for g in powers]))
    weights = orbit_weights(classes, group, max_order)
    return OrbitTable(scheme, group, max_order, tuple(classes), tuple(chars), weights, free)


def term_T(d: PrimeClassDatum, l: int, chi_gl: float, dim: int, s, weight: float | None = None):
    """(d_chi/l) chi(g^l) exp(-s l L/m) / (1 - exp(-l L/m)); weight overrides 1/l."""
    lam = l * d.length_per_period
    w = 1.0 / l if weight is None else weight
    return dim * w * chi_gl * np.exp(-np.asarray(s) * lam) / -math.expm1(-lam)


def _irrep_list(table: OrbitTable, irrep) -> list[Irrep]:
    if irrep in (None, "full", "all"):
        return list(table.irreps)
    if isinstance(irrep, str):
        return [table.group.irrep(irrep)]
    if isinstance(irrep, Irrep):
        return [irrep]
    return [table.group.irrep(r) if isinstance(r, str) else r for r in irrep]


def coeff_a(table: OrbitTable, irrep, t: int, s):
    """-sum of T over (class, l) with n_w l = t."""
    if t > table.max_order:
        raise OrderTooHigh(f"t={t} beyond table order {table.max_order}")
    r = _irrep_list(table, irrep)[0]
    k = table.irreps.index(r)
    total = 0.0
    for i, d in enumerate(table.classes):
        if t % d.n_w:
            continue
        l = t // d.n_w
        total = total + term_T(d, l, table.chars[i][l - 1][k], r.dim, s, table.weights[(i, l)])
    return -total


def recurrence_B(a: Sequence, N: int, r: int):
    """B_{N,1} = a_N, B_{N,r} = (1/r) sum_{t=1}^{N-r+1} B_{N-t,r-1} a_t; a[t] is a_t."""
    if not 1 <= r <= N:
        raise ValueError("need 1 <= r <= N")

    @lru_cache(maxsize=None)
    def B(n, q):
        if q == 1:
            return a[n]
        return sum(B(n - t, q - 1) * a[t] for t in range(1, n - q + 2)) / q

    return B(N, r)


def b_triangle(a: np.ndarray, da: np.ndarray | None = None):
    """Dense B_{N,r} triangle over leading axis t = 0..n of a (a[0] unused).

    Returns arrays of shape (n+1, n+1, *a.shape[1:]); entry [N, r]. With da the
    s-derivative triangle is returned as well.
    """
    n = a.shape[0] - 1
    B = np.zeros((n + 1, n + 1) + a.shape[1:], dtype=complex)
    dB = np.zeros_like(B) if da is not None else None
    for N in range(1, n + 1):
        B[N, 1] = a[N]
        if da is not None:
            dB[N, 1] = da[N]
        for r in range(2, N + 1):
            acc = np.zeros(a.shape[1:], dtype=complex)
            dacc = np.zeros(a.shape[1:], dtype=complex)
            for t in range(1, N - r + 2):
                acc += B[N - t, r - 1] * a[t]
                if da is not None:
                    dacc += dB[N - t, r - 1] * a[t] + B[N - t, r - 1] * da[t]
            B[N, r] = acc / r
            if da is not None:
                dB[N, r] = dacc / r
    return (B, dB) if da is not None else B


class ZetaEvaluator:
    """Z^{chi,(n)}(s) for one irrep, a list of irreps, or their product ("full")."""

    def __init__(self, table: OrbitTable, irrep="full", order: int | None = None):
        order = table.max_order if order is None else order
        if order > table.max_order:
            raise OrderTooHigh(f"order {order} beyond table order {table.max_order}")
        self.table = table
        self.order = order
        self.product = irrep in (None, "full", "all")
        self.irreps = _irrep_list(table, irrep)
        t, lam, w, chi = table.terms()
        keep = t <= order
        self._t, self._lam = t[keep], lam[keep]
        cols = [table.irreps.index(r) for r in self.irreps]
        dims = np.array([r.dim for r in self.irreps], dtype=float)
        # K[j, k] = d_k w_j chi_jk / (1 - e^{-lambda_j})
        K = (w[keep] / -np.expm1(-self._lam))[:, None] * chi[keep][:, cols] * dims[None, :]
        n_r = len(self.irreps)
        self._K = np.zeros((len(self._t), (order + 1) * n_r))
        for j, tj in enumerate(self._t):
            self._K[j, tj * n_r:(tj + 1) * n_r] = K[j]

    @property
    def labels(self) -> list[str]:
        return [r.label for r in self.irreps]

    def coefficients(self, s, derivative: bool = False):
        """a_t(s) with shape (order+1, n_irreps, *s.shape); a_0 = 0."""
        s = np.asarray(s, dtype=complex)
        flat = s.reshape(-1)
        E = np.exp(-np.outer(flat, self._lam))
        shape = (len(flat), self.order + 1, len(self.irreps))
        a = -(E @ self._K).reshape(shape)
        a = np.moveaxis(a, 0, -1).reshape((self.order + 1, len(self.irreps)) + s.shape)
        if not derivative:
            return a
        da = ((E * self._lam) @ self._K).reshape(shape)
        da = np.moveaxis(da, 0, -1).reshape((self.order + 1, len(self.irreps)) + s.shape)
        return a, da

    def partial_sums(self, s, derivative: bool = False):
        """Z^{(N)} for N = 0..order per irrep, shape (order+1, n_irreps, *s.shape)."""
        if derivative:
            a, da = self.coefficients(s, True)
            B, dB = b_triangle(a, da)
            z = 1.0 + np.cumsum(B.sum(axis=1), axis=0)
            dz = np.cumsum(dB.sum(axis=1), axis=0)
            return z, dz
        B = b_triangle(self.coefficients(s))
        return 1.0 + np.cumsum(B.sum(axis=1), axis=0)

    def per_irrep(self, s, order: int | None = None):
        order = self.order if order is None else order
        return self.partial_sums(s)[order]

    def value_and_derivative(self, s, order: int | None = None):
        order = self.order if order is None else order
        z, dz = self.partial_sums(s, True)
        z, dz = z[order], dz[order]
        if not self.product:
            return (z[0], dz[0]) if len(self.irreps) == 1 else (z, dz)
        val = np.prod(z, axis=0)
        der = np.zeros_like(val)
        for k in range(z.shape[0]):
            der = der + dz[k] * np.prod(np.delete(z, k, axis=0), axis=0)
        return val, der

    def __call__(self, s, order: int | None = None):
        order = self.order if order is None else order
        z = self.partial_sums(s)[order]
        if self.product:
            return np.prod(z, axis=0)
        return z[0] if len(self.irreps) == 1 else z

    def relative_error(self, s, n: int | None = None):
        """|Z^{(n-1)} - Z^{(n)}| / |Z^{(n)}|."""
        n = self.order if n is None else n
        if n < 1:
            raise ValueError("n must be >= 1")
        z = self.partial_sums(s)
        hi, lo = z[n], z[n - 1]
        if self.product:
            hi, lo = np.prod(hi, axis=0), np.prod(lo, axis=0)
        elif len(self.irreps) == 1:
            hi, lo = hi[0], lo[0]
        den = np.abs(hi)
        if np.any(den < 1e-300):
            raise DegenerateDenominator("|Z^(n)(s)| vanishes")
        return np.abs(lo - hi) / den


def eval_zeta(ev: ZetaEvaluator, s):
    return ev(s)


def eval_zeta_derivative(ev: ZetaEvaluator, s):
    return ev.value_and_derivative(s)[1]


def eval_full_zeta(table: OrbitTable, order: int, s):
    return ZetaEvaluator(table, "full", order)(s)


def relative_error(table: OrbitTable, irrep, n: int, s):
    return ZetaEvaluator(table, irrep, n).relative_error(s, n)


def euler_product_oracle(table: OrbitTable, s, length_cutoff: float = math.inf):
    """prod over primitive geodesics of prod_k (1 - e^{-(s+k) l}), from a trivial-group table."""
    if len(table.group) != 1:
        raise ValueError("Euler product needs a trivial-group table")
    s = complex(s)
    if s.real <= 1.0:
        raise NotConvergent(f"Re(s) = {s.real} <= 1")
    out = 1.0 + 0.0j
    for d in table.classes:
        L = d.length_L
        if L > length_cutoff:
            continue
        k = 0
        while math.exp(-(s.real + k) * L) >= 1e-18:
            out *= 1.0 - np.exp(-(s + k) * L)
            k += 1
    return out


# trace sums used as a numerical identity check

def _pair_length_cache(scheme: IfsScheme, group: FiniteGroup):
    cache = {}

    def per_period(p):
        if p not in cache:
            m = group.order(p.g)
            closed = iterate_pair(p, m, group)
            cache[p] = displacement_length(closed_word_matrix(scheme, closed.word)) / m
        return cache[p]

    return per_period


def reduced_trace_terms(scheme: IfsScheme, group: FiniteGroup, irrep: Irrep, n: int, s: float) -> np.ndarray:
    """Summands (d/|G|) chi(g) e^{-sL/m}/(1-e^{-L/m}) over all pairs of W^G_n."""
    per_period = _pair_length_cache(scheme, group)
    out = []
    for p in iter_gclosed_pairs(scheme.adjacency, group, n):
        if p.n != n:
            continue
        lam = per_period(p)
        chi = group.character(irrep, p.g)
        out.append(irrep.dim / len(group) * chi * math.exp(-s * lam) / -math.expm1(-lam))
    return np.array(out)


def reduced_trace(scheme: IfsScheme, group: FiniteGroup, irrep: Irrep, n: int, s: float) -> float:
    return float(np.sum(reduced_trace_terms(scheme, group, irrep, n, s)))


def plain_trace(scheme: IfsScheme, n: int, s: float) -> float:
    """Sum over closed words of length n of e^{-sL}/(1-e^{-L})."""
    total = 0.0
    for w in iter_words(scheme.adjacency, n):
        if w[0] != w[-1]:
            continue
        L = displacement_length(closed_word_matrix(scheme, w))
        total += math.exp(-s * L) / -math.expm1(-L)
    return total
