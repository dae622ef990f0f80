"""Built-in identity checks run by `schottky-zeta selftest`."""
from __future__ import annotations

import numpy as np

from .cycle import ZetaEvaluator, build_orbit_table, plain_trace, reduced_trace_terms
from .surfaces import SymmetricFunnels, build_flow_adapted
from .symbolic import Mismatch, cross_check


def trace_identity_error(scheme, n: int, s: float) -> float:
    """|sum_chi reduced - plain| / scale, scale = max(|plain|, sum of |summands|)."""
    group = scheme.group
    terms = [reduced_trace_terms(scheme, group, r, n, s) for r in group.irreps]
    reduced = sum(float(t.sum()) for t in terms)
    plain = plain_trace(scheme, n, s)
    scale = max(abs(plain), sum(float(np.abs(t).sum()) for t in terms))
    return abs(reduced - plain) / scale


def factorization_error(scheme, n: int, s) -> float:
    full = ZetaEvaluator(build_orbit_table(scheme, "full", n), "full", n)(s)
    triv = ZetaEvaluator(build_orbit_table(scheme, "trivial", 2 * n), "full", 2 * n)(s)
    return float(np.max(np.abs(full / triv - 1.0)))


def run_selftest(log=print) -> bool:
    scheme = build_flow_adapted(SymmetricFunnels(3, 0.5930))
    rng = np.random.default_rng(2024)
    results = []

    worst = max(trace_identity_error(scheme, n, s) for n in range(1, 5) for s in rng.uniform(0.1, 2.0, 5))
    results.append(("trace identity", worst <= 1e-10, f"max rel err {worst:.2e}"))

    s = rng.uniform(1.5, 3.0, 20) + 1j * rng.uniform(-20, 20, 20)
    err = factorization_error(scheme, 4, s)
    results.append(("factorization", err <= 1e-8, f"max rel err {err:.2e}"))

    for nf, psi in ((3, 0.5930), (4, 0.2311)):
        try:
            ok = cross_check(build_flow_adapted(SymmetricFunnels(nf, psi)), "full", 4)
            msg = "enumerators agree"
        except Mismatch as exc:
            ok, msg = False, str(exc)
        results.append((f"cross_check n_f={nf}", ok, msg))

    for name, ok, msg in results:
        log(f"{'PASS' if ok else 'FAIL'} {name}: {msg}")
    return all(ok for _, ok, _ in results)
