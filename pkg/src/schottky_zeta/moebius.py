"""Real 2x2 Moebius matrices, disks on the real line, overflow-safe products."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

DET_TOL = 1e-9
POLE_TOL = 1e-300
LOG2 = math.log(2.0)


class PoleHit(ZeroDivisionError):
    pass


class PoleInsideDisk(ValueError):
    pass


class NotHyperbolic(ValueError):
    pass


class WrongDeterminant(ValueError):
    pass


@dataclass(frozen=True)
class Matrix2:
    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        det = self.a * self.d - self.b * self.c
        if abs(abs(det) - 1.0) > DET_TOL * max(1.0, abs(self.a * self.d), abs(self.b * self.c)):
            raise WrongDeterminant(f"det = {det!r}, expected +-1")

    @classmethod
    def unchecked(cls, a, b, c, d) -> "Matrix2":
        m = object.__new__(cls)
        object.__setattr__(m, "a", float(a))
        object.__setattr__(m, "b", float(b))
        object.__setattr__(m, "c", float(c))
        object.__setattr__(m, "d", float(d))
        return m

    @classmethod
    def from_array(cls, arr) -> "Matrix2":
        arr = np.asarray(arr, dtype=float)
        return cls(arr[0, 0], arr[0, 1], arr[1, 0], arr[1, 1])

    @classmethod
    def identity(cls) -> "Matrix2":
        return cls(1.0, 0.0, 0.0, 1.0)

    @property
    def det(self) -> float:
        return self.a * self.d - self.b * self.c

    @property
    def trace(self) -> float:
        return self.a + self.d

    def to_array(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]])

    def __matmul__(self, other: "Matrix2") -> "Matrix2":
        return Matrix2(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def inverse(self) -> "Matrix2":
        det = self.det
        return Matrix2(self.d / det, -self.b / det, -self.c / det, self.a / det)


def translation(t: float) -> Matrix2:
    return Matrix2(1.0, t, 0.0, 1.0)


@dataclass(frozen=True)
class Disk:
    center: float
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError(f"radius must be positive, got {self.radius}")

    @property
    def left(self) -> float:
        return self.center - self.radius

    @property
    def right(self) -> float:
        return self.center + self.radius

    def contains(self, z, strict: bool = True) -> bool:
        dist = abs(complex(z) - self.center)
        return dist < self.radius if strict else dist <= self.radius

    def inside(self, other: "Disk", margin: float = 0.0) -> bool:
        """True if the closure of self lies strictly inside other."""
        return abs(self.center - other.center) + self.radius < other.radius - margin

    def disjoint(self, other: "Disk", margin: float = 0.0) -> bool:
        return abs(self.center - other.center) > self.radius + other.radius + margin


def mobius_apply(m: Matrix2, z):
    """(az+b)/(cz+d); works on scalars and numpy arrays."""
    den = m.c * z + m.d
    if np.any(np.abs(den) < POLE_TOL * max(1.0, abs(m.c), abs(m.d))):
        raise PoleHit(f"pole hit at z={z!r}")
    return (m.a * z + m.b) / den


def mobius_image_disk(m: Matrix2, disk: Disk) -> Disk:
    if m.c != 0.0:
        pole = -m.d / m.c
        if abs(pole - disk.center) <= disk.radius:
            raise PoleInsideDisk(f"pole {pole} inside {disk}")
    x0 = mobius_apply(m, disk.left)
    x1 = mobius_apply(m, disk.right)
    return Disk(0.5 * (x0 + x1), 0.5 * abs(x1 - x0))


def cayley(z):
    """u -> -i(u-1)/(u+1), unit circle onto the real line."""
    z = complex(z)
    if abs(z + 1) < POLE_TOL:
        raise PoleHit("cayley pole at z = -1")
    return -1j * (z - 1) / (z + 1)


def inverse_cayley(v):
    v = complex(v)
    if abs(v + 1j) < POLE_TOL:
        raise PoleHit("inverse cayley pole at v = -i")
    return (1j - v) / (v + 1j)


@dataclass(frozen=True)
class ScaledMatrix:
    """True matrix = mat * 2**exp2; det_sign is the product of factor determinants."""

    mat: Matrix2
    exp2: int
    det_sign: int = 0

    def __post_init__(self):
        top = max(abs(self.mat.a), abs(self.mat.b), abs(self.mat.c), abs(self.mat.d))
        if not 1.0 <= top < 2.0:
            raise ValueError(f"scaled matrix not normalized, max entry {top}")

    @property
    def log_abs_trace(self) -> float:
        tr = abs(self.mat.trace)
        if tr == 0.0:
            return -math.inf
        return math.log(tr) + self.exp2 * LOG2

    def to_array(self) -> np.ndarray:
        return np.ldexp(self.mat.to_array(), self.exp2)


def _normalize(arr: np.ndarray) -> tuple[np.ndarray, int]:
    top = np.max(np.abs(arr))
    if top == 0.0:
        raise ValueError("zero matrix in product")
    _, e = math.frexp(top)  # top = f * 2**e with f in [0.5, 1)
    e -= 1
    return np.ldexp(arr, -e), e


def product_scaled(ms: Sequence[Matrix2] | Iterable[Matrix2]) -> ScaledMatrix:
    """Ordered product ms[0] @ ms[1] @ ... renormalized after each multiply."""
    ms = list(ms)
    if not ms:
        raise ValueError("empty product")
    acc, exp2 = _normalize(ms[0].to_array())
    sign = 1 if ms[0].det > 0 else -1
    for m in ms[1:]:
        acc, e = _normalize(acc @ m.to_array())
        exp2 += e
        sign *= 1 if m.det > 0 else -1
    return ScaledMatrix(Matrix2.unchecked(*acc.ravel()), exp2, sign)


def as_scaled(m: Matrix2 | ScaledMatrix) -> ScaledMatrix:
    if isinstance(m, ScaledMatrix):
        return m
    return product_scaled([m])


def _det_sign(s: ScaledMatrix) -> int:
    if s.det_sign:
        return s.det_sign
    det = s.mat.det
    return 1 if det > 0 else -1


def displacement_length(m: Matrix2 | ScaledMatrix) -> float:
    """2*arccosh(|Tr|/2) in log-scaled form."""
    s = as_scaled(m)
    if _det_sign(s) < 0:
        raise WrongDeterminant("orientation-reversing element has no displacement length")
    tr_scaled = abs(s.mat.trace)
    if s.exp2 < 60:
        tr = math.ldexp(tr_scaled, s.exp2)
        if tr <= 2.0 + 1e-12:
            raise NotHyperbolic(f"|Tr| = {tr} <= 2")
        return 2.0 * math.acosh(tr / 2.0)
    if tr_scaled == 0.0:
        raise NotHyperbolic("trace vanishes")
    inv_sq = math.ldexp(4.0 / (tr_scaled * tr_scaled), -2 * s.exp2)
    return 2.0 * (math.log(tr_scaled) + s.exp2 * LOG2 + math.log1p(math.sqrt(1.0 - inv_sq)) - LOG2)
