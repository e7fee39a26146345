"""Shared fixtures data, cached derivations and independent oracles for the tests."""
from __future__ import annotations

import csv
import functools
from pathlib import Path

import numpy as np
from scipy.interpolate import BSpline

from gaussgalerkin import HomotopyConfig, KnotVector, SplineSpace, derive_rule

DATA = Path(__file__).parent / "data"

NONUNIFORM_BREAKPOINTS = (0.0, 0.5, 1.0, 1.5, 2.0, 3.0, 4.0, 6.0, 8.0)


def reference(name: str) -> list[tuple[str, str]]:
    """Rows of a reference CSV as (node, weight) decimal strings."""
    with open(DATA / name, newline="") as fh:
        return [(r["node"], r["weight"]) for r in csv.DictReader(fh)]


def open_knots(d: int, c: int, breakpoints) -> KnotVector:
    m = [d - c] * len(breakpoints)
    m[0] = m[-1] = d + 1
    return KnotVector(tuple(breakpoints), tuple(m))


@functools.lru_cache(maxsize=None)
def derived(d: int, c: int, n: int | None = None, breakpoints: tuple | None = None,
            mode: str = "double", domain: tuple | None = None):
    """Derived rules, computed once per test session."""
    cfg = HomotopyConfig(precision_mode=mode)
    if breakpoints is not None:
        return derive_rule(d, c, open_knots(d, c, breakpoints), cfg)
    return derive_rule(d, c, None, cfg, n_elements=n, domain=domain)


# -----------------------------------------------------------------------------
# Oracles (independent of the package's basis code)
# -----------------------------------------------------------------------------
def scipy_basis(space: SplineSpace, x) -> np.ndarray:
    """Normalized B-spline values, shape ``(len(x), dim)``, from scipy."""
    t = space.sequence
    d = space.degree
    x = np.atleast_1d(np.asarray(x, float))
    n = len(t) - d - 1
    out = np.empty((len(x), n))
    eye = np.eye(n)
    for i in range(n):
        out[:, i] = BSpline(t, eye[i], d, extrapolate=False)(x)
    # scipy leaves the right end undefined; take the left limit
    at_b = x >= t[-1]
    if np.any(at_b):
        xb = np.nextafter(t[-1], -np.inf)
        for i in range(n):
            out[at_b, i] = BSpline(t, eye[i], d)(xb)
    return np.nan_to_num(out)


def span_integral(space: SplineSpace, f, points: int = 20) -> float:
    """Composite Gauss-Legendre integral of ``f`` over every knot span."""
    xg, wg = np.polynomial.legendre.leggauss(points)
    x = space.knots.partition
    total = 0.0
    for lo, hi in zip(x, x[1:]):
        h = 0.5 * (hi - lo)
        total += h * np.dot(wg, f(lo + h * (xg + 1)))
    return total


def spline_function(space: SplineSpace, coeffs):
    return BSpline(space.sequence, np.asarray(coeffs, float), space.degree)
