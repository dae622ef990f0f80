"""Envelope functions, spectral gaps, resonance CSV and SVG output."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .resonances import Resonance

FLOAT_FMT = "%.12e"
EMPTY = "EMPTY"
RESONANCE_COLUMNS = ["re", "im", "rep", "order", "residual", "trust_mask"]

COLORS = {
    "I_1": "#00008b",
    "I_2": "#87cefa",
    "II_1": "#ff0000",
    "II_2": "#ffa500",
    "III_1": "#006400",
    "III_2": "#90ee90",
    "IV_1": "#4b0082",
    "IV_2": "#da70d6",
    "V_1": "#006400",
    "V_2": "#90ee90",
    "A": "#00008b",
    "B": "#87cefa",
    "C": "#ff0000",
    "D": "#ffa500",
}


class EmptyAboveK(ValueError):
    pass


@dataclass
class ResonanceSet:
    resonances: list
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        self.resonances = sorted(self.resonances, key=lambda r: (r.s.imag, r.s.real, r.irrep))

    def __len__(self) -> int:
        return len(self.resonances)

    def filter(self, irreps: Iterable[str] | None = None, trusted_only: bool = False) -> list[Resonance]:
        keep = None if irreps is None else set(irreps)
        return [
            r for r in self.resonances
            if (keep is None or r.irrep in keep) and (not trusted_only or r.trusted)
        ]

    def points(self, irreps=None) -> np.ndarray:
        return np.array([r.s for r in self.filter(irreps)], dtype=complex)

    @property
    def labels(self) -> list[str]:
        return sorted({r.irrep for r in self.resonances})


def envelope(rset: ResonanceSet, irreps, w: float, t: Sequence[float]) -> np.ndarray:
    """h_w(t) = max Re over zeros with |Im - t| <= w; NaN marks an empty window."""
    if not w > 0:
        raise ValueError("window must be positive")
    pts = rset.points(irreps)
    t = np.asarray(t, dtype=float)
    out = np.full(t.shape, np.nan)
    if pts.size == 0:
        return out
    order = np.argsort(pts.imag)
    im, re = pts.imag[order], pts.real[order]
    lo = np.searchsorted(im, t - w, side="left")
    hi = np.searchsorted(im, t + w, side="right")
    for k in range(t.size):
        if hi[k] > lo[k]:
            out[k] = re[lo[k]:hi[k]].max()
    return out


def gap(rset: ResonanceSet, irreps, K: float, delta: float | None) -> float:
    """max Re over zeros with |Im| > K, the zero at delta excluded."""
    pts = rset.points(irreps)
    if delta is not None and pts.size:
        near = np.abs(pts - delta) < 1e-6
        if np.any(near):
            drop = np.flatnonzero(near)[np.argmin(np.abs(pts[near] - delta))]
            pts = np.delete(pts, drop)
    above = pts[np.abs(pts.imag) > K]
    if above.size == 0:
        raise EmptyAboveK(f"no zeros with |Im| > {K}")
    return float(above.real.max())


# files

def _fmt(x: float) -> str:
    return FLOAT_FMT % x


def write_resonances_csv(resonances: Iterable[Resonance], path=None) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(RESONANCE_COLUMNS)
    for r in resonances:
        # a zero of multiplicity m is listed m times
        for _ in range(r.multiplicity):
            wr.writerow([_fmt(r.s.real), _fmt(r.s.imag), r.irrep, r.order, _fmt(r.residual), int(r.trusted)])
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text)
    return text


def read_resonances_csv(path) -> ResonanceSet:
    out = []
    with open(path, newline="") as fh:
        rd = csv.DictReader(fh)
        missing = set(RESONANCE_COLUMNS) - set(rd.fieldnames or [])
        if missing:
            raise ValueError(f"resonance CSV lacks columns {sorted(missing)}")
        for row in rd:
            trusted = int(row["trust_mask"])
            out.append(Resonance(
                complex(float(row["re"]), float(row["im"])),
                row["rep"],
                int(row["order"]),
                float(row["residual"]),
                0,
                0.0 if trusted else math.inf,
            ))
    return ResonanceSet(out, {"source": str(path)})


def write_envelope_csv(t: Sequence[float], h_by_rep: dict, path=None) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["t", "h", "rep"])
    for rep, h in h_by_rep.items():
        for tk, hk in zip(t, h):
            wr.writerow([_fmt(tk), EMPTY if np.isnan(hk) else _fmt(hk), rep])
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text)
    return text


def scatter_svg(rset: ResonanceSet, width: int = 640, height: int = 480, margin: int = 50) -> str:
    pts = rset.resonances
    if pts:
        xs = np.array([r.s.real for r in pts])
        ys = np.array([r.s.imag for r in pts])
        x0, x1 = xs.min(), xs.max()
        y0, y1 = ys.min(), ys.max()
    else:
        x0 = y0 = 0.0
        x1 = y1 = 1.0
    x1 = x1 if x1 > x0 else x0 + 1.0
    y1 = y1 if y1 > y0 else y0 + 1.0
    sx = lambda x: margin + (x - x0) / (x1 - x0) * (width - 2 * margin)
    sy = lambda y: height - margin - (y - y0) / (y1 - y0) * (height - 2 * margin)
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{margin}" y1="{height - margin}" x2="{width - margin}" y2="{height - margin}" stroke="black"/>',
        f'<line x1="{margin}" y1="{margin}" x2="{margin}" y2="{height - margin}" stroke="black"/>',
        f'<text x="{width / 2}" y="{height - 10}" text-anchor="middle" font-size="12">Re(s) [{x0:.3g}, {x1:.3g}]</text>',
        f'<text x="12" y="{height / 2}" font-size="12" transform="rotate(-90 12 {height / 2})">Im(s) [{y0:.4g}, {y1:.4g}]</text>',
    ]
    for r in pts:
        color = COLORS.get(r.irrep, "#808080")
        parts.append(f'<circle cx="{sx(r.s.real):.2f}" cy="{sy(r.s.imag):.2f}" r="2" fill="{color}"><title>{r.irrep}</title></circle>')
    for k, label in enumerate(rset.labels):
        y = margin + 14 * k
        parts.append(f'<circle cx="{width - margin + 8}" cy="{y - 4}" r="4" fill="{COLORS.get(label, "#808080")}"/>')
        parts.append(f'<text x="{width - margin + 16}" y="{y}" font-size="11">{label}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
