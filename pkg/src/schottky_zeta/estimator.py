"""Estimator-style facade over the functional core."""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .cycle import ZetaEvaluator, build_orbit_table
from .resonances import SearchRegion, critical_exponent, default_region, find_resonances
from .surfaces import build_scheme, parse_surface


def check_points(S) -> np.ndarray:
    """Complex evaluation points as a 1-D array."""
    arr = np.asarray(S)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if arr.ndim == 2 and arr.shape[1] == 2 and not np.iscomplexobj(arr):
        arr = arr[:, 0] + 1j * arr[:, 1]
    elif arr.ndim != 1:
        raise ValueError(f"expected 1-D complex points or (n, 2) real pairs, got shape {arr.shape}")
    arr = arr.astype(complex)
    if not np.all(np.isfinite(arr)):
        raise ValueError("evaluation points must be finite")
    return arr


class SymmetryReducedZeta(BaseEstimator):
    """fit builds the orbit table; predict evaluates Z^{(n)} at complex points."""

    def __init__(self, surface="sym:3:0.5930", group="full", order=6, irrep="full"):
        self.surface = surface
        self.group = group
        self.order = order
        self.irrep = irrep

    def fit(self, X=None, y=None):
        self.scheme_ = build_scheme(parse_surface(self.surface))
        self.table_ = build_orbit_table(self.scheme_, self.group, self.order)
        self.evaluator_ = ZetaEvaluator(self.table_, self.irrep, self.order)
        self.irrep_labels_ = [r.label for r in self.table_.irreps]
        return self

    def predict(self, S):
        check_is_fitted(self, "evaluator_")
        return np.asarray(self.evaluator_(check_points(S)))

    def transform(self, S):
        """Per-irrep values, shape (n_points, n_irreps)."""
        check_is_fitted(self, "table_")
        ev = ZetaEvaluator(self.table_, "full", self.order)
        return ev.per_irrep(check_points(S)).T

    def relative_error(self, S):
        check_is_fitted(self, "evaluator_")
        return self.evaluator_.relative_error(check_points(S))


class ResonanceSearch(BaseEstimator):
    """fit locates zeros per irrep in a rectangle; results in resonances_."""

    def __init__(self, surface="sym:3:0.5930", group="full", order=6, irreps="all",
                 rect=(0.0, 0.3, 0.0, 10.0), grid_re=None, grid_im=None):
        self.surface = surface
        self.group = group
        self.order = order
        self.irreps = irreps
        self.rect = rect
        self.grid_re = grid_re
        self.grid_im = grid_im

    def fit(self, X=None, y=None):
        scheme = build_scheme(parse_surface(self.surface))
        table = build_orbit_table(scheme, self.group, self.order)
        base = default_region(*self.rect, table.max_length)
        region = SearchRegion(*self.rect, self.grid_re or base.grid_re, self.grid_im or base.grid_im)
        labels = [r.label for r in table.irreps] if self.irreps == "all" else list(self.irreps)
        self.resonances_ = sorted(
            (r for lab in labels for r in find_resonances(table, lab, self.order, region)),
            key=lambda r: (r.s.imag, r.s.real, r.irrep),
        )
        self.delta_ = critical_exponent(table, self.order)
        return self

    def predict(self, X=None):
        check_is_fitted(self, "resonances_")
        return np.array([r.s for r in self.resonances_])
