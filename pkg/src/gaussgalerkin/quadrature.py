"""
Quadrature rules and their exactness residuals on spline spaces.

A rule stores its nodes and weights as float arrays. Rules that went
through extended-precision polishing additionally carry ``mpmath`` copies
of the same values (``nodes_mp``, ``weights_mp``); every routine here
prefers those when present.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import mpmath
import numpy as np

from .solver import span_index
from .spline import KNOT_RTOL, SplineSpace, basis_nonzero, optimal_node_count

__all__ = [
    "QuadratureRule",
    "ResidualReport",
    "affine_map",
    "apply",
    "residual_norm",
    "residuals",
    "residuals_mp",
    "reflect_symmetric",
    "verify",
]

#: Decimal digits used for extended-precision residual evaluation.
EXTENDED_DPS = 40
#: Digits for exact-enough affine maps and reflections of mpmath values.
TRANSFORM_DPS = 100

GAUSS = "Gauss"
RADAU = "GaussRadau"


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """
    Nodes ``tau`` and weights ``w`` on ``domain = (a, b)``.

    Parameters
    ----------
    nodes, weights : array_like
        Equal-length float arrays; nodes strictly increasing inside ``[a, b]``.
    domain : tuple of float
    kind : {"Gauss", "GaussRadau"}
    pinned_index : int, optional
        Zero-based index of a node whose position was fixed in advance.
    space : SplineSpace, optional
        The space the rule is meant to integrate exactly.
    nodes_mp, weights_mp : tuple of mpmath.mpf, optional
        Extended-precision copies of nodes and weights.
    """

    nodes: np.ndarray
    weights: np.ndarray
    domain: tuple[float, float]
    kind: str = GAUSS
    pinned_index: int | None = None
    space: SplineSpace | None = field(default=None, repr=False)
    nodes_mp: tuple | None = field(default=None, repr=False)
    weights_mp: tuple | None = field(default=None, repr=False)

    def __post_init__(self):
        t = np.array(self.nodes, dtype=float).ravel()
        w = np.array(self.weights, dtype=float).ravel()
        t.flags.writeable = False
        w.flags.writeable = False
        object.__setattr__(self, "nodes", t)
        object.__setattr__(self, "weights", w)
        a, b = (float(v) for v in self.domain)
        object.__setattr__(self, "domain", (a, b))
        if len(t) != len(w):
            raise ValueError("nodes and weights differ in length")
        if len(t) == 0:
            raise ValueError("empty rule")
        if self.kind not in (GAUSS, RADAU):
            raise ValueError(f"unknown rule kind {self.kind!r}")
        if np.any(np.diff(t) <= 0):
            raise ValueError("nodes must be strictly increasing")
        tol = KNOT_RTOL * (b - a)
        if t[0] < a - tol or t[-1] > b + tol:
            raise ValueError(f"nodes leave the domain [{a}, {b}]")
        if (self.nodes_mp is None) != (self.weights_mp is None):
            raise ValueError("nodes_mp and weights_mp must be given together")
        if self.nodes_mp is not None and len(self.nodes_mp) != len(t):
            raise ValueError("extended-precision copies have the wrong length")

    @property
    def m(self) -> int:
        return len(self.nodes)

    @property
    def a(self) -> float:
        return self.domain[0]

    @property
    def b(self) -> float:
        return self.domain[1]

    @property
    def extended(self) -> bool:
        return self.nodes_mp is not None

    def with_space(self, space: SplineSpace) -> "QuadratureRule":
        return replace(self, space=space)

    def mp_values(self) -> tuple[list, list]:
        """Nodes and weights as ``mpmath.mpf`` lists (converted from floats if needed)."""
        if self.extended:
            return list(self.nodes_mp), list(self.weights_mp)
        return [mpmath.mpf(v) for v in self.nodes], [mpmath.mpf(v) for v in self.weights]

    def __len__(self) -> int:
        return self.m


def apply(rule: QuadratureRule, f: Callable) -> float:
    """Approximate the integral of ``f`` over the rule's domain."""
    vals = np.asarray([f(t) for t in rule.nodes], dtype=float)
    return float(np.dot(rule.weights, vals))


def residuals(rule: QuadratureRule, space: SplineSpace | None = None,
              normalized: bool = True) -> np.ndarray:
    """
    Exactness residuals ``Q[B_i] - I[B_i]`` for every basis function.

    With ``normalized=False`` each residual is divided by the support length
    of its basis function, i.e. measured against basis functions that all
    integrate to ``1/(d+1)``.
    """
    space = _space_of(rule, space)
    if rule.extended:
        r = np.array([float(v) for v in residuals_mp(rule, space, normalized)])
        return r
    r = space.basis(rule.nodes).T @ rule.weights - space.integrals()
    if not normalized:
        r = r / _support_lengths(space)
    return r


def residuals_mp(rule: QuadratureRule, space: SplineSpace | None = None,
                 normalized: bool = True, knots_mp: Sequence | None = None) -> list:
    """Residuals evaluated with :data:`EXTENDED_DPS` digits (or more, if already set)."""
    with mpmath.workdps(max(mpmath.mp.dps, EXTENDED_DPS)):
        return _residuals_mp(rule, _space_of(rule, space), normalized, knots_mp)


def _residuals_mp(rule, space, normalized, knots_mp):
    d = space.degree
    seq = space.sequence
    T = list(knots_mp) if knots_mp is not None else [mpmath.mpf(v) for v in seq]
    tau, w = rule.mp_values()
    n = space.dimension
    acc = [mpmath.mpf(0)] * n
    for x, wx in zip(tau, w):
        mu = span_index(seq, d, x, T)
        for k, v in enumerate(basis_nonzero(T, d, x, mu)):
            acc[mu - d + k] += wx * v
    out = []
    for i in range(n):
        sup = T[i + d + 1] - T[i]
        r = acc[i] - sup / (d + 1)
        out.append(r if normalized else r / sup)
    return out


def _support_lengths(space: SplineSpace) -> np.ndarray:
    s = space.sequence
    d = space.degree
    return s[d + 1:] - s[:-d - 1]


def _space_of(rule, space):
    space = space if space is not None else rule.space
    if space is None:
        raise ValueError("rule carries no space; pass one explicitly")
    return space


def residual_norm(rule: QuadratureRule, space: SplineSpace | None = None) -> float:
    """
    Normalized Euclidean residual norm ``sqrt(sum r_i^2) / (2m)``.

    Residuals are taken against basis functions scaled to integrate to
    ``1/(d+1)`` and ``m`` is the number of nodes.
    """
    if rule.extended:
        with mpmath.workdps(max(mpmath.mp.dps, EXTENDED_DPS)):
            r = residuals_mp(rule, space, normalized=False)
            return float(mpmath.sqrt(mpmath.fsum(v * v for v in r)) / (2 * rule.m))
    r = residuals(rule, space, normalized=False)
    return float(np.sqrt(np.sum(r * r)) / (2 * rule.m))


@dataclass(frozen=True)
class ResidualReport:
    """Outcome of :func:`verify`."""

    max_residual: float
    norm: float
    exact: bool
    optimal: bool
    positive: bool
    expected_nodes: int
    expected_kind: str
    residuals: np.ndarray = field(repr=False)

    @property
    def passed(self) -> bool:
        return self.exact and self.optimal and self.positive


def verify(rule: QuadratureRule, space: SplineSpace | None = None,
           tol: float | None = None) -> ResidualReport:
    """
    Check exactness, optimality (node count) and weight positivity.

    ``tol`` is an absolute bound on every normalized residual. It defaults to
    ``1e-13`` times the mean element length in double precision and ``1e-24``
    for extended-precision rules.
    """
    space = _space_of(rule, space)
    if tol is None:
        h = (space.b - space.a) / space.knots.n_elements
        tol = (1e-24 if rule.extended else 1e-13) * max(h, 1.0)
    r = residuals(rule, space)
    m_opt, kind = optimal_node_count(space)
    maxr = float(np.max(np.abs(r)))
    return ResidualReport(
        max_residual=maxr,
        norm=residual_norm(rule, space),
        exact=maxr <= tol,
        optimal=rule.m == m_opt,
        positive=bool(np.all(rule.weights > 0)),
        expected_nodes=m_opt,
        expected_kind=kind,
        residuals=r,
    )


def affine_map(rule: QuadratureRule, a: float, b: float) -> QuadratureRule:
    """Map a rule affinely onto ``[a, b]``; weights scale by the length ratio."""
    a0, b0 = rule.domain
    s = (b - a) / (b0 - a0)
    t = a + (rule.nodes - a0) * s
    space = rule.space.affine(a, b) if rule.space is not None else None
    kw = {}
    if rule.extended:
        with mpmath.workdps(TRANSFORM_DPS):
            A0, B0, A, B = (mpmath.mpf(v) for v in (a0, b0, a, b))
            S = (B - A) / (B0 - A0)
            kw = dict(nodes_mp=tuple(A + (x - A0) * S for x in rule.nodes_mp),
                      weights_mp=tuple(v * S for v in rule.weights_mp))
        t = np.array([float(v) for v in kw["nodes_mp"]])
    return QuadratureRule(t, rule.weights * s, (a, b), rule.kind, rule.pinned_index, space, **kw)


def reflect_symmetric(half: QuadratureRule, midpoint: float | None = None,
                      space: SplineSpace | None = None,
                      halved_midpoint: bool = False) -> QuadratureRule:
    """
    Complete a rule on ``[a, c]`` to ``[a, 2c - a]`` by mirroring about ``c``.

    Parameters
    ----------
    half : QuadratureRule
        Left half. A node on the midpoint must be its last node.
    midpoint : float, optional
        Defaults to the right end of ``half``.
    space : SplineSpace, optional
        Space attached to the result.
    halved_midpoint : bool
        How to read the weight of a node on the midpoint. By default it is
        the full-rule weight and appears once unchanged, as in half tables
        that list the full middle weight. With ``True`` the half is a right Radau rule of
        the half space, carrying half the weight, and the two halves add.

    A rule whose domain is already centred on ``midpoint`` is returned
    unchanged.

    Raises
    ------
    ValueError
        If a node lies beyond the midpoint.
    """
    a, c = half.domain
    if midpoint is None:
        midpoint = c
    tol = KNOT_RTOL * (c - a)
    if abs(a + c - 2 * midpoint) <= tol:
        return half
    if np.any(half.nodes > midpoint + tol):
        raise ValueError("half rule has nodes beyond the midpoint")
    if abs(midpoint - c) > tol:
        raise ValueError("mirror point must be the right end or the centre of the rule")
    on_mid = abs(half.nodes[-1] - c) <= tol
    factor = 2 if halved_midpoint else 1
    if half.extended:
        T, W = list(half.nodes_mp), list(half.weights_mp)
        with mpmath.workdps(TRANSFORM_DPS):
            C = mpmath.mpf(c)
            if on_mid:
                Tf = T[:-1] + [C] + [2 * C - x for x in reversed(T[:-1])]
                Wf = W[:-1] + [factor * W[-1]] + list(reversed(W[:-1]))
            else:
                Tf = T + [2 * C - x for x in reversed(T)]
                Wf = W + list(reversed(W))
        t = np.array([float(v) for v in Tf])
        w = np.array([float(v) for v in Wf])
        kw = dict(nodes_mp=tuple(Tf), weights_mp=tuple(Wf))
    else:
        t0, w0 = half.nodes, half.weights
        if on_mid:
            t = np.concatenate([t0[:-1], [c], 2 * c - t0[-2::-1]])
            w = np.concatenate([w0[:-1], [factor * w0[-1]], w0[-2::-1]])
        else:
            t = np.concatenate([t0, 2 * c - t0[::-1]])
            w = np.concatenate([w0, w0[::-1]])
        kw = {}
    pin = len(half.nodes) - 1 if on_mid else None
    kind = RADAU if on_mid and half.kind == RADAU else half.kind
    return QuadratureRule(t, w, (a, 2 * c - a), kind, pin, space, **kw)
