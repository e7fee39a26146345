"""
Asymptotic rules on infinite uniform knot vectors, and finite rules
composed from boundary data plus the periodic pattern.

Far from the boundary an optimal rule on a uniform knot vector becomes
periodic. Two families are available in closed form:

``(4, 0)``
    Two nodes per element. Left of the centre, element ``[k, k+1]`` holds
    ``k + d2`` (weight ``w2``) and ``k + d1`` (weight ``w1``); the right half
    is the mirror image, and the centre knot carries a node of weight
    ``wM``.
``(6, 1)``
    Five nodes per two elements. Period ``[2i, 2i+2]`` holds the knot
    ``2i`` (weight ``w3``), ``2i + d1`` and ``2i + 2 - d1`` (weight ``w1``),
    ``2i + d2`` and ``2i + 2 - d2`` (weight ``w2``).

All values are in units of the element length ``h``.
"""
from __future__ import annotations

from dataclasses import dataclass

import mpmath
import numpy as np

from .blocks import DerivationError
from .quadrature import GAUSS, RADAU, TRANSFORM_DPS, QuadratureRule, verify
from .spline import SplineSpace, open_uniform

__all__ = [
    "AsymptoticRule",
    "asymptotic_system_4_0",
    "asymptotic_system_6_1",
    "boundary_depth",
    "closed_form_4_0",
    "closed_form_6_1",
    "compose_finite",
    "pattern_rule",
    "solve_asymptotic_4_0",
    "solve_asymptotic_6_1",
    "QUARTIC_6_1",
]

#: Ascending coefficients of the quartic satisfied by ``d1`` for ``(6, 1)``.
QUARTIC_6_1 = (52, -364, 905, -938, 343)


@dataclass(frozen=True)
class AsymptoticRule:
    """
    Periodic rule for an infinite uniform knot vector.

    Attributes
    ----------
    d, c : int
    period : int
        Elements per repeating pattern.
    d1, d2 : mpmath.mpf
        Node offsets in element units.
    w1, w2 : mpmath.mpf
        Their weights.
    w_extra : mpmath.mpf
        Knot-node weight ``w3`` for ``(6, 1)``; centre weight ``wM`` for ``(4, 0)``.
    h : float
        Element length.
    """

    d: int
    c: int
    period: int
    d1: object
    d2: object
    w1: object
    w2: object
    w_extra: object
    h: float = 1.0

    @property
    def nodes_per_element(self) -> float:
        return {(4, 0): 2.0, (6, 1): 2.5}[(self.d, self.c)]

    def as_dict(self) -> dict:
        extra = "wM" if (self.d, self.c) == (4, 0) else "w3"
        return {"d1": self.d1, "d2": self.d2, "w1": self.w1, "w2": self.w2, extra: self.w_extra}

    def element_pattern(self, k: int, n_elements: int):
        """
        Pattern nodes (offsets within the element) and weights for element
        ``k`` (zero-based) of an ``n_elements`` uniform mesh.

        Knot nodes belong to the element on their right. The centre node of
        the ``(4, 0)`` layout is not included.
        """
        if (self.d, self.c) == (4, 0):
            if k < n_elements // 2:
                return [self.d2, self.d1], [self.w2, self.w1]
            return [1 - self.d1, 1 - self.d2], [self.w1, self.w2]
        if k % 2 == 0:
            return [mpmath.mpf(0), self.d1, self.d2], [self.w_extra, self.w1, self.w2]
        return [1 - self.d2, 1 - self.d1], [self.w2, self.w1]


# =============================================================================
# (4, 0)
# =============================================================================
def _bern4(j, y):
    return mpmath.binomial(4, j) * y**j * (1 - y) ** (4 - j)


def asymptotic_system_4_0(d1, d2, w1, w2) -> list:
    """
    Residuals of the four periodic exactness conditions for ``(4, 0)``.

    With the element taken as ``[0, 1]`` and nodes at ``d1, d2``: the three
    interior Bernstein functions integrate to ``1/5`` each, and the ``C^0``
    hat centred on a knot, assembled from its two element pieces
    ``y^4`` and ``(1 - y)^4``, integrates to ``2/5``.
    """
    fifth = mpmath.mpf(1) / 5
    eqs = [w1 * _bern4(j, d1) + w2 * _bern4(j, d2) - fifth for j in (1, 2, 3)]
    eqs.append(w1 * (d1**4 + (1 - d1) ** 4) + w2 * (d2**4 + (1 - d2) ** 4) - 2 * fifth)
    return eqs


def centre_weight_4_0(d1, d2, w1, w2):
    """Weight of the centre node from exactness on the discontinuous centre function."""
    return 2 * (mpmath.mpf(1) / 5 - w1 * d1**4 - w2 * d2**4)


def closed_form_4_0(dps: int = 40) -> dict:
    with mpmath.workdps(dps):
        s2, s7, s14 = mpmath.sqrt(2), mpmath.sqrt(7), mpmath.sqrt(14)
        half = mpmath.mpf(1) / 2
        return {
            "d1": half + s7 / 10 - s2 / 10,
            "d2": half - s7 / 10 - s2 / 10,
            "w1": half + s14 / 84,
            "w2": half - s14 / 84,
            "wM": s2 / 6,
        }


def _crosscheck(got: dict, cf: dict, tol: float):
    for key, val in got.items():
        if abs(val - cf[key]) > tol * max(1, abs(cf[key])):
            raise DerivationError(f"{key}: numeric {mpmath.nstr(val, 20)} vs closed form "
                                  f"{mpmath.nstr(cf[key], 20)}")


def solve_asymptotic_4_0(dps: int = 40, check_tol: float = 1e-14) -> AsymptoticRule:
    """
    Solve the ``(4, 0)`` periodic system and the centre weight.

    The numerical solution is cross-checked against the closed forms.
    """
    cf = closed_form_4_0(dps)
    with mpmath.workdps(dps):
        seed = (mpmath.mpf("0.6"), mpmath.mpf("0.1"), mpmath.mpf("0.55"), mpmath.mpf("0.45"))
        d1, d2, w1, w2 = mpmath.findroot(lambda *x: asymptotic_system_4_0(*x), seed)
        wM = centre_weight_4_0(d1, d2, w1, w2)
        _crosscheck(dict(d1=d1, d2=d2, w1=w1, w2=w2, wM=wM), cf, check_tol)
        return AsymptoticRule(4, 0, 1, d1, d2, w1, w2, wM)


# =============================================================================
# (6, 1)
# =============================================================================
def asymptotic_system_6_1(d1, d2, w1, w2) -> list:
    """
    Residuals of the four periodic exactness conditions for ``(6, 1)``.

    Element ``[0, 1]`` carries nodes ``d1, d2``; by symmetry the mirrored
    element carries ``1 - d1, 1 - d2``. Three single-element Bernstein
    functions integrate to ``1/7``; the sum of the two ``C^1`` functions
    that span the pair of elements, seen on one element as
    ``6y^5 - 5y^6``, integrates to ``2/7``.
    """
    seventh = mpmath.mpf(1) / 7
    eqs = []
    for j in (2, 3, 4):
        c = mpmath.binomial(6, j)
        eqs.append(w1 * c * d1**j * (1 - d1) ** (6 - j) + w2 * c * d2**j * (1 - d2) ** (6 - j) - seventh)
    eqs.append(w1 * (6 * d1**5 - 5 * d1**6) + w2 * (6 * d2**5 - 5 * d2**6) - 2 * seventh)
    return eqs


def closed_form_6_1(dps: int = 40) -> dict:
    with mpmath.workdps(dps):
        s5, s6, s13, s78 = (mpmath.sqrt(v) for v in (5, 6, 13, 78))
        f = mpmath.mpf
        return {
            "d1": f(67) / 98 - 3 * s78 / 98 - mpmath.sqrt(95 - 10 * s78) / 98,
            "d2": f(67) / 98 + 3 * s78 / 98 - mpmath.sqrt(95 + 10 * s78) / 98,
            "w1": f(1693) / 4160 + 3 * s5 * s13 / 4160 - 673 * s5 * s6 / 99840 + 2047 * s6 * s13 / 299520,
            "w2": f(1693) / 4160 + 3 * s5 * s13 / 4160 + 673 * s5 * s6 / 99840 - 2047 * s6 * s13 / 299520,
            "w3": f(387) / 1040 - 3 * s5 * s13 / 1040,
        }


def solve_asymptotic_6_1(dps: int = 40, check_tol: float = 1e-14) -> AsymptoticRule:
    """
    Solve the ``(6, 1)`` periodic system; ``w3`` follows from exactness on
    constants, ``2 w1 + 2 w2 + w3 = 2``.

    ``d1`` is also checked to be a root of :data:`QUARTIC_6_1`.
    """
    cf = closed_form_6_1(dps)
    with mpmath.workdps(dps):
        seed = (mpmath.mpf("0.39"), mpmath.mpf("0.82"), mpmath.mpf("0.44"), mpmath.mpf("0.39"))
        d1, d2, w1, w2 = mpmath.findroot(lambda *x: asymptotic_system_6_1(*x), seed)
        w3 = 2 - 2 * w1 - 2 * w2
        q = mpmath.polyval(QUARTIC_6_1[::-1], d1)
        if abs(q) > check_tol:
            raise DerivationError(f"d1 is not a root of the quartic (value {mpmath.nstr(q, 5)})")
        _crosscheck(dict(d1=d1, d2=d2, w1=w1, w2=w2, w3=w3), cf, check_tol)
        return AsymptoticRule(6, 1, 2, d1, d2, w1, w2, w3)


# =============================================================================
# Finite rules
# =============================================================================
def _element_slices(nodes, a, h, n_elements):
    """Group node indices by element (knot nodes go right; ``b`` goes to the last)."""
    idx = np.floor((np.asarray(nodes, float) - a) / h + 1e-9).astype(int)
    idx = np.clip(idx, 0, n_elements - 1)
    return [np.flatnonzero(idx == k) for k in range(n_elements)]


def _uniform_geometry(rule: QuadratureRule):
    space = rule.space
    if space is None or not space.knots.is_uniform():
        raise ValueError("a rule on a uniform knot vector is required")
    n = space.knots.n_elements
    return rule.a, (rule.b - rule.a) / n, n


def _as_mp(rule: QuadratureRule):
    return rule.mp_values()


def boundary_depth(rule: QuadratureRule, asym: AsymptoticRule, tol: float | None = None) -> int:
    """
    Number of leading elements whose nodes or weights differ from the
    periodic pattern.

    Node offsets are compared relative to the element length, weights
    relative to the pattern weight. Only the left half is inspected (the
    rules are symmetric). ``tol`` defaults to ``1e-15`` for
    extended-precision rules and ``1e-13`` otherwise. Returns the element
    count if even the central elements do not match.
    """
    if tol is None:
        tol = 1e-15 if rule.extended else 1e-13
    a, h, n = _uniform_geometry(rule)
    tau, w = _as_mp(rule)
    groups = _element_slices(rule.nodes, a, h, n)
    depth = 0
    with mpmath.workdps(max(mpmath.mp.dps, 40)):
        A, H = mpmath.mpf(a), mpmath.mpf(h)
        for k in range(n // 2):
            pt, pw = asym.element_pattern(k, n)
            g = groups[k]
            ok = len(g) == len(pt)
            if ok:
                for j, off, wref in zip(g, pt, pw):
                    if abs((tau[j] - A) / H - k - off) > tol or abs(w[j] / H - wref) > tol * abs(wref):
                        ok = False
                        break
            if not ok:
                depth = k + 1
    return n if depth == n // 2 else depth


def pattern_rule(asym: AsymptoticRule, n_elements: int, domain=None, extended: bool = False) -> QuadratureRule:
    """
    The periodic pattern alone on ``n_elements`` uniform elements.

    Not exact near the boundary; useful as a reference layout.
    """
    return _assemble(asym, None, 0, n_elements, domain, extended)


def compose_finite(asym: AsymptoticRule, boundary: QuadratureRule, n_elements: int,
                   domain: tuple[float, float] | None = None, depth: int | None = None,
                   verify_tol: float | None = None) -> QuadratureRule:
    """
    Finite uniform rule from boundary data and the periodic pattern.

    The first ``depth`` elements are copied from ``boundary`` (a rule for
    the same ``(d, c)`` on a uniform mesh, rescaled), the last ``depth`` are
    their mirror image and the rest follow the pattern. For ``(4, 0)`` the
    centre node gets the asymptotic centre weight.

    Parameters
    ----------
    asym : AsymptoticRule
    boundary : QuadratureRule
        Derived rule providing the boundary nodes; it must have at least
        ``depth`` elements in each half.
    n_elements : int
        Even, and at least ``2 * depth + 1``.
    domain : tuple, optional
        Defaults to ``[0, n_elements]``.
    depth : int, optional
        Defaults to :func:`boundary_depth` of ``boundary``.

    Raises
    ------
    DerivationError
        If the composed rule is not exact to ``verify_tol`` (default
        ``1e-13`` per unit element length, also for extended input).
    """
    if depth is None:
        depth = boundary_depth(boundary, asym)
    _, _, nb = _uniform_geometry(boundary)
    if n_elements % 2:
        raise ValueError("the composed layout needs an even number of elements")
    if depth > nb // 2:
        raise ValueError(f"boundary rule has only {nb // 2} elements per half, depth is {depth}")
    if n_elements < 2 * depth + 1:
        raise ValueError(f"{n_elements} elements cannot hold two boundary blocks of depth {depth}")
    rule = _assemble(asym, boundary, depth, n_elements, domain, boundary.extended)
    if verify_tol is None:
        # pattern entries agree with the true rule only to the depth tolerance
        verify_tol = 1e-13 * max((rule.b - rule.a) / n_elements, 1.0)
    rep = verify(rule, tol=verify_tol)
    if not rep.exact:
        raise DerivationError(f"composed rule is not exact (max residual {rep.max_residual:.3e})")
    return rule


def _assemble(asym, boundary, depth, n, domain, extended):
    d, c = asym.d, asym.c
    a, b = domain if domain is not None else (0.0, float(n))
    space = SplineSpace(d, open_uniform(d, c, n, (a, b)))
    with mpmath.workdps(TRANSFORM_DPS):
        A, B = mpmath.mpf(a), mpmath.mpf(b)
        H = (B - A) / n
        if boundary is not None:
            a0, h0, nb = _uniform_geometry(boundary)
            bt, bw = _as_mp(boundary)
            groups = _element_slices(boundary.nodes, a0, h0, nb)
            A0, H0 = mpmath.mpf(a0), mpmath.mpf(h0)
        left_t, left_w = [], []
        for k in range(n // 2):
            if k < depth:
                for j in groups[k]:
                    left_t.append(A + (bt[j] - A0) / H0 * H)
                    left_w.append(bw[j] / H0 * H)
            else:
                pt, pw = asym.element_pattern(k, n)
                left_t += [A + (k + off) * H for off in pt]
                left_w += [wv * H for wv in pw]
        C = (A + B) / 2
        mid_t, mid_w = [C], [asym.w_extra * H]
        tau = left_t + mid_t + [2 * C - x for x in reversed(left_t)]
        w = left_w + mid_w + list(reversed(left_w))
    tf = np.array([float(v) for v in tau])
    wf = np.array([float(v) for v in w])
    kind = RADAU if space.dimension % 2 else GAUSS
    pin = len(left_t) if kind == RADAU else None
    kw = dict(nodes_mp=tuple(tau), weights_mp=tuple(w)) if extended else {}
    return QuadratureRule(tf, wf, (a, b), kind, pin, space, **kw)
