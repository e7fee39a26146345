"""
Knot vectors, spline spaces and B-spline basis evaluation.

The basis used throughout is the normalized (partition-of-unity) B-spline
basis computed with the Cox-de Boor recurrence. The alternative scaling in
which every basis function integrates to ``1/(d+1)`` is available through
:meth:`SplineSpace.basis_eval` with ``normalized=False``.

Two evaluation kernels live here:

* :func:`basis_matrix` -- vectorized over points, double precision, with
  optional first derivatives. Used by Newton tracing.
* :func:`basis_nonzero` -- one point at a time, generic in the scalar type,
  so it runs unchanged on ``mpmath.mpf`` values for extended-precision
  residuals.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

__all__ = [
    "KNOT_RTOL",
    "GalerkinSpec",
    "KnotVector",
    "SplineSpace",
    "basis_integrals",
    "basis_matrix",
    "basis_nonzero",
    "dimension",
    "find_span",
    "galerkin_target",
    "merge_c_minus_1",
    "open_uniform",
    "optimal_node_count",
    "basis_eval",
    "basis_integral",
]

#: Breakpoints closer than this fraction of the domain length are equal.
KNOT_RTOL = 1e-12


# =============================================================================
# Galerkin bookkeeping
# =============================================================================
@dataclass(frozen=True)
class GalerkinSpec:
    """Original discretization: degree ``p``, continuity ``k``, operator order ``l``."""

    p: int
    k: int
    l: int

    def __post_init__(self):
        if self.l > self.k:
            raise ValueError(
                f"derivative order l={self.l} exceeds continuity k={self.k}; "
                "the differentiated space would have negative continuity"
            )
        if not (0 <= self.l and self.k < self.p):
            raise ValueError(f"need 0 <= l <= k < p, got p={self.p}, k={self.k}, l={self.l}")


def galerkin_target(spec: GalerkinSpec) -> tuple[int, int]:
    """
    Degree and continuity of the smallest space holding both mass and
    stiffness integrands.

    Mass-matrix entries live in ``S(2p, k)`` and the ``l``-th derivative
    products in ``S(2(p-l), k-l)``; both are contained in ``S(2p, k-l)``.
    """
    return 2 * spec.p, spec.k - spec.l


# =============================================================================
# Knot vectors
# =============================================================================
@dataclass(frozen=True)
class KnotVector:
    """
    Domain partition ``x_0 < ... < x_N`` with a multiplicity per breakpoint.

    Parameters
    ----------
    partition : sequence of float
        Strictly increasing breakpoints.
    multiplicities : sequence of int
        Positive multiplicities, one per breakpoint.
    """

    partition: tuple[float, ...]
    multiplicities: tuple[int, ...]

    def __post_init__(self):
        x = tuple(float(v) for v in self.partition)
        m = tuple(int(v) for v in self.multiplicities)
        object.__setattr__(self, "partition", x)
        object.__setattr__(self, "multiplicities", m)
        if len(x) != len(m):
            raise ValueError("partition and multiplicities differ in length")
        if len(x) < 2:
            raise ValueError("a knot vector needs at least two breakpoints")
        if any(b <= a for a, b in zip(x, x[1:])):
            raise ValueError("partition must be strictly increasing")
        if any(v < 1 for v in m):
            raise ValueError("multiplicities must be positive")

    @property
    def a(self) -> float:
        return self.partition[0]

    @property
    def b(self) -> float:
        return self.partition[-1]

    @property
    def n_elements(self) -> int:
        return len(self.partition) - 1

    def expanded(self) -> np.ndarray:
        """Full knot sequence with every breakpoint repeated by its multiplicity."""
        return np.repeat(np.asarray(self.partition), self.multiplicities)

    def is_open(self, degree: int) -> bool:
        return self.multiplicities[0] == degree + 1 and self.multiplicities[-1] == degree + 1

    def is_uniform(self) -> bool:
        h = np.diff(self.partition)
        return bool(np.allclose(h, h[0], rtol=0, atol=KNOT_RTOL * (self.b - self.a)))

    def equals(self, other: "KnotVector") -> bool:
        """Compare breakpoints up to :data:`KNOT_RTOL` of the domain length."""
        if self.multiplicities != other.multiplicities:
            return False
        tol = KNOT_RTOL * (self.b - self.a)
        return bool(np.all(np.abs(np.subtract(self.partition, other.partition)) <= tol))

    @classmethod
    def from_sequence(cls, knots: Sequence[float], tol: float | None = None) -> "KnotVector":
        """Group a full (sorted) knot sequence back into breakpoints and multiplicities."""
        t = np.sort(np.asarray(knots, dtype=float))
        if tol is None:
            tol = KNOT_RTOL * (t[-1] - t[0])
        xs: list[float] = [t[0]]
        ms: list[int] = [1]
        for v in t[1:]:
            if v - xs[-1] <= tol:
                ms[-1] += 1
            else:
                xs.append(v)
                ms.append(1)
        return cls(tuple(xs), tuple(ms))


def open_uniform(degree: int, continuity: int, n_elements: int,
                 domain: tuple[float, float] = (0.0, None)) -> KnotVector:
    """
    Open knot vector with ``n_elements`` equal elements and interior
    multiplicity ``degree - continuity``.

    ``domain`` defaults to ``[0, n_elements]`` (unit elements).
    """
    a, b = domain
    if b is None:
        b = a + n_elements
    x = np.linspace(a, b, n_elements + 1)
    m = [degree - continuity] * (n_elements + 1)
    m[0] = m[-1] = degree + 1
    return KnotVector(tuple(x), tuple(m))


# =============================================================================
# Basis kernels
# =============================================================================
def find_span(knots: np.ndarray, degree: int, x) -> np.ndarray:
    """
    Knot span indices ``mu`` with ``knots[mu] <= x < knots[mu + 1]``.

    Evaluation is right-continuous at interior knots. Points at (or beyond)
    the right end of the domain use the last non-empty span, so the basis is
    left-continuous there.
    """
    knots = np.asarray(knots, dtype=float)
    x = np.asarray(x, dtype=float)
    n = len(knots) - degree - 1
    b = knots[n]
    mu = np.searchsorted(knots, x, side="right") - 1
    mu = np.clip(mu, degree, n - 1)
    last = np.searchsorted(knots, b, side="left") - 1
    return np.where(x >= b, last, mu)


def basis_matrix(knots, degree: int, x, deriv: bool = False):
    """
    Dense table of all B-spline values at the points ``x``.

    Parameters
    ----------
    knots : array_like
        Non-decreasing knot sequence of length ``n + degree + 1``.
    degree : int
        Polynomial degree.
    x : array_like
        Evaluation points.
    deriv : bool
        If True, also return first derivatives.

    Returns
    -------
    values : ndarray, shape (len(x), n)
    derivs : ndarray, shape (len(x), n)
        Only when ``deriv`` is True.
    """
    knots = np.asarray(knots, dtype=float)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    d = degree
    n = len(knots) - d - 1
    npts = len(x)
    mu = find_span(knots, d, x)

    vals = np.zeros((npts, d + 1))
    vals[:, 0] = 1.0
    left = np.zeros((npts, d + 1))
    right = np.zeros((npts, d + 1))
    lower = None
    for j in range(1, d + 1):
        if j == d:
            lower = vals[:, :d].copy()
        left[:, j] = x - knots[mu + 1 - j]
        right[:, j] = knots[mu + j] - x
        saved = np.zeros(npts)
        for r in range(j):
            den = right[:, r + 1] + left[:, j - r]
            with np.errstate(divide="ignore", invalid="ignore"):
                tmp = np.where(den != 0.0, vals[:, r] / den, 0.0)
            vals[:, r] = saved + right[:, r + 1] * tmp
            saved = left[:, j - r] * tmp
        vals[:, j] = saved

    rows = np.arange(npts)
    cols = mu[:, None] - d + np.arange(d + 1)[None, :]
    out = np.zeros((npts, n))
    out[rows[:, None], cols] = vals
    if not deriv:
        return out

    dout = np.zeros((npts, n))
    if d == 0:
        return out, dout
    # B'_{i,d} = d * (B_{i,d-1} / (t_{i+d} - t_i) - B_{i+1,d-1} / (t_{i+d+1} - t_{i+1}))
    for k in range(d):
        i1 = mu - d + 1 + k
        den = knots[i1 + d] - knots[i1]
        with np.errstate(divide="ignore", invalid="ignore"):
            c = np.where(den != 0.0, d * lower[:, k] / den, 0.0)
        np.add.at(dout, (rows, i1), c)
        np.add.at(dout, (rows, i1 - 1), -c)
    return out, dout


def basis_nonzero(knots: Sequence, degree: int, x, span: int):
    """
    The ``degree + 1`` non-zero basis values at a single point.

    Pure Python, so the arithmetic follows the type of ``knots`` and ``x``
    (float, ``mpmath.mpf``, ``fractions.Fraction``...). Returns values for the
    basis indices ``span - degree ... span``.
    """
    d = degree
    zero = x - x
    one = zero + 1
    vals = [one] + [zero] * d
    left = [zero] * (d + 1)
    right = [zero] * (d + 1)
    for j in range(1, d + 1):
        left[j] = x - knots[span + 1 - j]
        right[j] = knots[span + j] - x
        saved = zero
        for r in range(j):
            den = right[r + 1] + left[j - r]
            tmp = vals[r] / den if den != 0 else zero
            vals[r] = saved + right[r + 1] * tmp
            saved = left[j - r] * tmp
        vals[j] = saved
    return vals


def basis_integrals(knots, degree: int) -> np.ndarray:
    """Exact integrals ``(t_{i+d+1} - t_i) / (d + 1)`` of the normalized B-splines."""
    knots = np.asarray(knots)
    return (knots[degree + 1:] - knots[:-degree - 1]) / (degree + 1)


# =============================================================================
# Spline spaces
# =============================================================================
@dataclass(frozen=True)
class SplineSpace:
    """
    Splines of degree ``degree`` over ``knots``.

    ``kind`` is informational ("target", "source" or "merged").
    """

    degree: int
    knots: KnotVector
    kind: str = "target"
    _seq: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.degree < 0:
            raise ValueError("degree must be non-negative")
        d = self.degree
        m = self.knots.multiplicities
        if any(v > d + 1 for v in m):
            raise ValueError(f"multiplicity exceeds degree + 1 = {d + 1}")
        if self.kind not in ("target", "source", "merged"):
            raise ValueError(f"unknown space kind {self.kind!r}")
        object.__setattr__(self, "_seq", self.knots.expanded())
        if self.dimension < d + 1:
            raise ValueError("knot vector too short for the degree")

    @classmethod
    def uniform(cls, degree: int, continuity: int, n_elements: int,
                domain: tuple[float, float] | None = None) -> "SplineSpace":
        dom = (0.0, float(n_elements)) if domain is None else domain
        return cls(degree, open_uniform(degree, continuity, n_elements, dom))

    @property
    def sequence(self) -> np.ndarray:
        return self._seq

    @property
    def a(self) -> float:
        return self.knots.a

    @property
    def b(self) -> float:
        return self.knots.b

    @property
    def dimension(self) -> int:
        return sum(self.knots.multiplicities) - (self.degree + 1)

    def continuity(self) -> tuple[int, ...]:
        """Smoothness ``d - m_k`` at each breakpoint."""
        return tuple(self.degree - m for m in self.knots.multiplicities)

    def interior_continuity(self) -> int | None:
        """Common interior continuity, or None if it varies (or there is none)."""
        c = set(self.continuity()[1:-1])
        return c.pop() if len(c) == 1 else None

    def is_open(self) -> bool:
        return self.knots.is_open(self.degree)

    def basis(self, x, deriv: bool = False):
        return basis_matrix(self._seq, self.degree, x, deriv)

    def integrals(self) -> np.ndarray:
        return basis_integrals(self._seq, self.degree)

    def _check_index(self, i: int):
        if not 1 <= i <= self.dimension:
            raise IndexError(f"basis index {i} outside 1..{self.dimension}")

    def basis_eval(self, i: int, t: float, normalized: bool = True) -> float:
        """
        Value of the ``i``-th basis function (1-based) at ``t``.

        With ``normalized=False`` the function is rescaled to integrate to
        ``1/(d+1)``, the divided-difference convention.
        """
        self._check_index(i)
        tol = KNOT_RTOL * (self.b - self.a)
        if not self.a - tol <= t <= self.b + tol:
            raise ValueError(f"t={t} outside [{self.a}, {self.b}]")
        v = float(self.basis([t])[0, i - 1])
        if normalized:
            return v
        s = self._seq
        return v / (s[i + self.degree] - s[i - 1])

    def basis_integral(self, i: int, normalized: bool = True) -> float:
        self._check_index(i)
        if not normalized:
            return 1.0 / (self.degree + 1)
        return float(self.integrals()[i - 1])

    def restrict_elements(self, lo: int, hi: int) -> "SplineSpace":
        """Open space over breakpoints ``lo..hi`` with the same interior multiplicities."""
        x = self.knots.partition[lo:hi + 1]
        m = list(self.knots.multiplicities[lo:hi + 1])
        m[0] = m[-1] = self.degree + 1
        return SplineSpace(self.degree, KnotVector(x, tuple(m)), self.kind)

    def affine(self, a: float, b: float) -> "SplineSpace":
        """The same space mapped affinely onto ``[a, b]``."""
        x = np.asarray(self.knots.partition)
        y = a + (x - self.a) * (b - a) / (self.b - self.a)
        y[0], y[-1] = a, b
        return SplineSpace(self.degree, KnotVector(tuple(y), self.knots.multiplicities), self.kind)


def dimension(space: SplineSpace) -> int:
    if not space.is_open():
        raise ValueError("dimension formula assumes an open knot vector")
    return space.dimension


def optimal_node_count(space: SplineSpace) -> tuple[int, str]:
    """
    Minimal node count ``m`` from ``d + 1 + i = 2m``.

    Odd dimensions get ``(dim + 1) / 2`` nodes with one node position fixed
    in advance (Gauss-Radau).
    """
    dim = dimension(space)
    if dim % 2 == 0:
        return dim // 2, "Gauss"
    return (dim + 1) // 2, "GaussRadau"


def basis_eval(space: SplineSpace, i: int, t: float, normalized: bool = True) -> float:
    return space.basis_eval(i, t, normalized)


def basis_integral(space: SplineSpace, i: int, normalized: bool = True) -> float:
    return space.basis_integral(i, normalized)


def merge_c_minus_1(left: SplineSpace, right: SplineSpace) -> SplineSpace:
    """
    Join two spaces end to end with a full-multiplicity knot in between.

    The basis functions of the two halves do not interact, so the dimension
    of the result is the sum of the two dimensions.
    """
    if left.degree != right.degree:
        raise ValueError(f"degree mismatch: {left.degree} vs {right.degree}")
    tol = KNOT_RTOL * max(left.b - left.a, right.b - right.a)
    if not math.isclose(left.b, right.a, rel_tol=0.0, abs_tol=tol):
        raise ValueError(f"domains do not touch: {left.b} vs {right.a}")
    d = left.degree
    x = left.knots.partition + right.knots.partition[1:]
    m = left.knots.multiplicities[:-1] + (d + 1,) + right.knots.multiplicities[1:]
    return SplineSpace(d, KnotVector(x, m), "merged")
