"""
Small building-block rules that seed the recursive construction.

Two families have direct algebraic derivations:

* ``(d, c) = (6, 1)`` on two elements: a six-node Gauss rule obtained from
  the roots of a univariate sextic.
* ``(d, c) = (4, 0)`` on four elements: a nine-node Gauss-Radau rule whose
  middle node sits on the centre knot, from two coupled small systems.

Everything else goes through :func:`solve_block`, a symmetric Newton solve
with multi-start seeding.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import mpmath
import numpy as np

from .quadrature import GAUSS, RADAU, QuadratureRule, reflect_symmetric
from .solver import ConvergenceError, newton_mp
from .spline import KnotVector, SplineSpace, basis_integrals, basis_matrix, open_uniform

__all__ = [
    "BlockSpec",
    "DerivationError",
    "SEXTIC_6_1",
    "augmented_element_rule",
    "gauss_block_6_1",
    "radau_block_4_0",
    "radau_4_0_closed_form",
    "solve_block",
]

#: Coefficients (ascending powers) of the univariate polynomial whose roots
#: contain the first-element nodes of the (6, 1) block.
SEXTIC_6_1 = (2, -54, 507, -2024, 3840, -3402, 1127)


class DerivationError(RuntimeError):
    """A block or rule could not be derived."""


@dataclass(frozen=True)
class BlockSpec:
    """
    A building block: ``n_elements`` unit elements of degree ``d`` with
    interior continuity ``c``.

    ``kind`` must agree with the parity of the block dimension.
    """

    d: int
    c: int
    n_elements: int
    kind: str

    def __post_init__(self):
        if self.d % 2:
            raise ValueError("only even degrees are supported")
        if not -1 <= self.c < self.d:
            raise ValueError(f"continuity {self.c} invalid for degree {self.d}")
        if self.n_elements < 1:
            raise ValueError("need at least one element")
        want = GAUSS if self.space().dimension % 2 == 0 else RADAU
        if self.kind != want:
            raise ValueError(f"block dimension {self.space().dimension} calls for {want}, not {self.kind}")

    def space(self) -> SplineSpace:
        return SplineSpace(self.d, open_uniform(self.d, self.c, self.n_elements))


# =============================================================================
# (6, 1) two-element block
# =============================================================================
def _bspline_values_mp(knots, d, x):
    """All basis values at ``x`` in mpmath arithmetic (tiny spaces only)."""
    from .solver import span_index
    from .spline import basis_nonzero

    n = len(knots) - d - 1
    out = [mpmath.mpf(0)] * n
    mu = span_index(knots, d, x, knots)
    for k, v in enumerate(basis_nonzero(knots, d, x, mu)):
        out[mu - d + k] = v
    return out


def gauss_block_6_1(extended: bool = False, dps: int = 40) -> QuadratureRule:
    """
    Six-node Gauss rule for degree-6 ``C^1`` splines on ``[0, 2]``.

    The first-element nodes are three roots of :data:`SEXTIC_6_1`. The
    polynomial has spurious real roots, so every triple of roots in
    ``(0, 1)`` is tried: weights follow from a least-squares fit of the six
    symmetric exactness equations and the triple is accepted only if that
    fit is exact (residual below ``1e-10``) with positive weights.

    Parameters
    ----------
    extended : bool
        Attach ``dps``-digit copies of nodes and weights.
    dps : int
        Working precision for root finding and back-substitution.

    Raises
    ------
    DerivationError
        If the filter does not leave exactly one admissible triple.
    """
    d = 6
    with mpmath.workdps(dps):
        knots = [mpmath.mpf(v) for v in [0] * 7 + [1] * 5 + [2] * 7]
        roots = mpmath.polyroots(SEXTIC_6_1[::-1], maxsteps=200, extraprec=2 * dps)
        real = sorted(mpmath.re(r) for r in roots if abs(mpmath.im(r)) < mpmath.mpf(10) ** (-dps // 2))
        cands = [r for r in real if 0 < r < 1]
        accepted = []
        for tri in itertools.combinations(cands, 3):
            A = mpmath.matrix(6, 3)
            for j, t in enumerate(tri):
                full = _bspline_values_mp(knots, d, t)
                mirr = _bspline_values_mp(knots, d, 2 - t)
                for i in range(6):
                    A[i, j] = full[i] + mirr[i]
            rhs = mpmath.matrix([(knots[i + d + 1] - knots[i]) / (d + 1) for i in range(6)])
            w, res = mpmath.qr_solve(A, rhs)
            if res < 1e-10 and all(v > 0 for v in w):
                accepted.append((list(tri), [w[i] for i in range(3)]))
        if len(accepted) != 1:
            raise DerivationError(f"root filtering left {len(accepted)} admissible triples")
        tau, w = accepted[0]
        # one Newton sweep removes the least-squares rounding
        space = SplineSpace(d, KnotVector((0.0, 1.0, 2.0), (7, 5, 7)))
        full_t = tau + [2 - t for t in reversed(tau)]
        full_w = w + list(reversed(w))
        full_t, full_w, _ = newton_mp(knots, d, 12, full_t, full_w, dps=dps)
        return _make_rule(full_t, full_w, (0.0, 2.0), GAUSS, None, space, extended)


def _make_rule(tau, w, domain, kind, pinned_index, space, extended):
    t = np.array([float(v) for v in tau])
    wf = np.array([float(v) for v in w])
    kw = dict(nodes_mp=tuple(tau), weights_mp=tuple(w)) if extended else {}
    return QuadratureRule(t, wf, domain, kind, pinned_index, space, **kw)


# =============================================================================
# (4, 0) four-element Radau block
# =============================================================================
def radau_4_0_closed_form(dps: int = 40) -> dict:
    """Closed-form values of the (4, 0) four-element block as mpmath numbers."""
    with mpmath.workdps(dps):
        s6, s174 = mpmath.sqrt(6), mpmath.sqrt(174)
        return {
            "tau1": mpmath.mpf(2) / 5 - s6 / 10,
            "tau2": mpmath.mpf(2) / 5 + s6 / 10,
            "w1": mpmath.mpf(4) / 9 - s6 / 36,
            "w2": mpmath.mpf(4) / 9 + s6 / 36,
            "rho": mpmath.mpf(4) / 45,
            "tau3": mpmath.mpf(34) / 25 - s174 / 50,
            "tau4": mpmath.mpf(34) / 25 + s174 / 50,
            "w3": mpmath.mpf(76) / 153 - 7 * s174 / 1972,
            "w4": mpmath.mpf(76) / 153 + 7 * s174 / 1972,
            "w5": mpmath.mpf(4) / 17,
        }


def _bern(j, x, n=4):
    return mpmath.binomial(n, j) * x**j * (1 - x) ** (n - j)


def radau_block_4_0(extended: bool = False, dps: int = 40, check_tol: float = 1e-14) -> QuadratureRule:
    """
    Nine-node Gauss-Radau rule for quartic ``C^0`` splines on ``[0, 4]``.

    Knot multiplicities are ``(5, 4, 5, 4, 5)``: two ``C^0`` two-element
    halves joined discontinuously at 2. By symmetry only the left half is
    solved, in two stages.

    1. The four Bernstein functions of the first element that vanish at 1
       fix a two-node rule ``(tau_1, tau_2, w_1, w_2)``. Its value on the
       fifth Bernstein function, the part of the ``C^0`` hat that lives on
       the first element, is the residuum ``rho``.
    2. The second element carries ``tau_3, tau_4, w_3, w_4`` and the node at
       2 with half weight ``w_5 / 2``. The hat integrates to ``2/5`` and
       already receives ``rho`` from the first element, so the second
       element must supply ``2/5 - rho``. The other four functions need
       ``1/5`` each.

    Both stages are solved numerically and cross-checked against the closed
    forms; a mismatch above ``check_tol`` raises :class:`DerivationError`.
    """
    cf = radau_4_0_closed_form(dps)
    with mpmath.workdps(dps):
        fifth = mpmath.mpf(1) / 5

        def stage1(t1, t2, w1, w2):
            return [w1 * _bern(j, t1) + w2 * _bern(j, t2) - fifth for j in range(4)]

        t1, t2, w1, w2 = mpmath.findroot(stage1, (mpmath.mpf("0.15"), mpmath.mpf("0.65"),
                                                  mpmath.mpf("0.4"), mpmath.mpf("0.5")))
        rho = w1 * t1**4 + w2 * t2**4

        def stage2(t3, t4, w3, w4, w5):
            y3, y4 = t3 - 1, t4 - 1
            eqs = [w3 * _bern(0, y3) + w4 * _bern(0, y4) - (2 * fifth - rho)]
            eqs += [w3 * _bern(j, y3) + w4 * _bern(j, y4) - fifth for j in (1, 2, 3)]
            eqs.append(w3 * _bern(4, y3) + w4 * _bern(4, y4) + w5 / 2 - fifth)
            return eqs

        t3, t4, w3, w4, w5 = mpmath.findroot(stage2, (mpmath.mpf("1.1"), mpmath.mpf("1.6"),
                                                      mpmath.mpf("0.45"), mpmath.mpf("0.55"),
                                                      mpmath.mpf("0.25")))
        got = dict(tau1=t1, tau2=t2, w1=w1, w2=w2, rho=rho, tau3=t3, tau4=t4, w3=w3, w4=w4, w5=w5)
        for key, val in got.items():
            if abs(val - cf[key]) > check_tol * max(1, abs(cf[key])):
                raise DerivationError(f"{key}: numeric {mpmath.nstr(val, 20)} vs closed form "
                                      f"{mpmath.nstr(cf[key], 20)}")
        tau = [cf[k] for k in ("tau1", "tau2", "tau3", "tau4")] + [mpmath.mpf(2)]
        w = [cf[k] for k in ("w1", "w2", "w3", "w4")] + [cf["w5"] / 2]
    half_space = SplineSpace(4, KnotVector((0.0, 1.0, 2.0), (5, 4, 5)))
    half = _make_rule(tau, w, (0.0, 2.0), RADAU, 4, half_space, True)
    # Exact on the (5, 4, 5, 4, 5) space when the centre node averages the two
    # one-sided limits; as a point rule it is the Radau rule of the contained
    # C^0 space, which is what it is attached to.
    full_space = SplineSpace(4, open_uniform(4, 0, 4))
    full = reflect_symmetric(half, 2.0, full_space, halved_midpoint=True)
    if not extended:
        full = QuadratureRule(full.nodes, full.weights, full.domain, RADAU, full.pinned_index, full_space)
    return full


# =============================================================================
# Generic solver
# =============================================================================
def _symmetric_newton(space: SplineSpace, half_t, half_w, mid: bool, tol=1e-14, maxit=60):
    """
    Newton on the symmetric half system.

    Unknowns: the left-half nodes and weights, plus the weight of a node
    fixed at the centre when ``mid`` is True. Equations: the first ``m``
    basis functions, which cover every mirror pair once.
    """
    d = space.degree
    T = space.sequence
    a, b = space.a, space.b
    c2 = a + b
    k = len(half_t)
    m = 2 * k + (1 if mid else 0)
    neq = m
    integ = basis_integrals(T, d)[:neq]

    def unpack(x):
        t = x[:k]
        w = x[k:2 * k]
        wm = x[2 * k:] if mid else np.empty(0)
        full_t = np.concatenate([t, [c2 / 2] if mid else [], c2 - t[::-1]])
        full_w = np.concatenate([w, wm, w[::-1]])
        return full_t, full_w

    def F_and_J(x):
        full_t, full_w = unpack(x)
        V, D = basis_matrix(T, d, full_t, deriv=True)
        F = (V.T @ full_w)[:neq] - integ
        J = np.zeros((neq, len(x)))
        for j in range(k):
            jr = m - 1 - j
            J[:, j] = (full_w[j] * D[j] - full_w[jr] * D[jr])[:neq]
            J[:, k + j] = (V[j] + V[jr])[:neq]
        if mid:
            J[:, 2 * k] = V[k][:neq]
        return F, J

    x = np.concatenate([half_t, half_w, [1.0 / (d // 2 + 1)] if mid else []])
    for _ in range(maxit):
        F, J = F_and_J(x)
        nF = np.max(np.abs(F))
        if nF < tol:
            return unpack(x), nF
        try:
            delta = np.linalg.solve(J, -F)
        except np.linalg.LinAlgError:
            return None, np.inf
        lam = 1.0
        while lam > 1e-4:
            x2 = x + lam * delta
            F2, _ = F_and_J(x2)
            if np.max(np.abs(F2)) < nF and np.all(np.diff(x2[:k]) > 0) and x2[0] > a:
                break
            lam *= 0.5
        x = x2
    F, _ = F_and_J(x)
    nF = np.max(np.abs(F))
    return (unpack(x), nF) if nF < tol * 10 else (None, nF)


def solve_block(spec: BlockSpec, extended: bool = False, dps: int = 40,
                tol: float = 1e-13) -> QuadratureRule:
    """
    Symmetric optimal rule for a uniform block by multi-start Newton.

    Gauss blocks with an odd node count and all Gauss-Radau blocks carry a
    node at the block centre. For Radau blocks that node is the
    pre-constrained one.

    Seeds place equally spaced nodes in each element of the left half with
    weights equal to element length over nodes per element; several offsets
    are tried.

    Raises
    ------
    DerivationError
        If no seed converges to a rule with positive weights and ordered nodes.
    """
    space = spec.space()
    if space.dimension > 24:
        raise DerivationError(f"block dimension {space.dimension} exceeds 24")
    m = (space.dimension + 1) // 2
    mid = m % 2 == 1
    k = m // 2
    a, b = space.a, space.b
    center = 0.5 * (a + b)
    best = None
    for shift in (0.5, 0.3, 0.7, 0.15, 0.85):
        # equally spaced over the left half, nudged by ``shift``
        t0 = a + (np.arange(k) + shift) * (center - a) / (k + (0.5 if mid else 0.0))
        w0 = np.full(k, (b - a) / m)
        sol, res = _symmetric_newton(space, t0, w0, mid)
        if sol is None:
            continue
        full_t, full_w = sol
        if np.all(full_w > 0) and np.all(np.diff(full_t) > 0) and a <= full_t[0] and full_t[-1] <= b:
            best = (full_t, full_w)
            break
    if best is None:
        raise DerivationError(f"generic block solve failed for {spec}")
    full_t, full_w = best
    neq = space.dimension
    pinned = np.zeros(m, bool)
    if spec.kind == RADAU:
        pinned[k] = True
    pin = k if spec.kind == RADAU else None
    if extended:
        tau, w, _ = newton_mp(space.sequence, spec.d, neq, full_t, full_w, pinned, dps=dps)
        return _make_rule(tau, w, (a, b), spec.kind, pin, space, True)
    return QuadratureRule(full_t, full_w, (a, b), spec.kind, pin, space)


def augmented_element_rule(d: int, eta: float = 0.5) -> QuadratureRule:
    """
    Gauss rule on ``[0, 1]`` for degree-``d`` splines with one extra simple
    knot at ``1 - eta``.

    The extra knot makes the dimension ``d + 2`` even, so the rule has
    ``d/2 + 1`` nodes. Seeded from Gauss-Legendre with the same count, which
    is exact on the polynomials of degree ``d + 1`` and thus close.
    """
    from .solver import newton

    if d % 2:
        raise ValueError("degree must be even")
    space = SplineSpace(d, KnotVector((0.0, 1.0 - eta, 1.0), (d + 1, 1, d + 1)))
    m = d // 2 + 1
    x, wg = np.polynomial.legendre.leggauss(m)
    t0, w0 = 0.5 * (x + 1), 0.5 * wg
    try:
        t, w, _, _ = newton(space.sequence, d, 2 * m, t0, w0, tol=1e-15, maxit=60)
    except ConvergenceError as exc:
        raise DerivationError(f"augmented element rule failed for d={d}: {exc}") from None
    return QuadratureRule(t, w, (0.0, 1.0), GAUSS, None, space)
