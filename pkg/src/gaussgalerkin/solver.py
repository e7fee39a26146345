"""
Newton solvers for the exactness system ``sum_j w_j B_i(tau_j) = I[B_i]``.

Unknowns are the free node positions and all weights. Only the first
``neq`` basis functions enter the system, which is how trailing equations
are dropped while knots leave the domain.
"""
from __future__ import annotations

import mpmath
import numpy as np

from .spline import basis_integrals, basis_matrix, basis_nonzero

__all__ = ["ConvergenceError", "exactness_residual", "newton", "newton_mp", "span_index"]


class ConvergenceError(RuntimeError):
    """Newton iteration failed to reach the requested tolerance."""

    def __init__(self, message: str, residual: float = float("nan")):
        super().__init__(message)
        self.residual = residual


def exactness_residual(knots, degree: int, neq: int, tau, w) -> np.ndarray:
    V = basis_matrix(knots, degree, tau)
    return (V.T @ w - basis_integrals(knots, degree))[:neq]


def newton(knots, degree: int, neq: int, tau, w, pinned=None,
           tol: float = 1e-13, maxit: int = 30):
    """
    Damped Newton iteration in double precision.

    Parameters
    ----------
    knots : ndarray
        Full knot sequence.
    degree : int
    neq : int
        Number of leading basis functions that must be integrated exactly.
    tau, w : ndarray
        Initial nodes and weights.
    pinned : ndarray of bool, optional
        Nodes whose position is held fixed.
    tol : float
        Absolute tolerance on the largest residual.
    maxit : int

    Returns
    -------
    tau, w : ndarray
    res : float
        Largest absolute residual at the returned point.
    iters : int

    Raises
    ------
    ConvergenceError
        If ``tol`` is not reached, or the Jacobian is singular.
    """
    knots = np.asarray(knots, dtype=float)
    tau = np.array(tau, dtype=float)
    w = np.array(w, dtype=float)
    free = np.ones(len(tau), bool) if pinned is None else ~np.asarray(pinned, bool)
    nfree = int(free.sum())
    if nfree + len(w) != neq:
        raise ValueError(f"system is not square: {nfree + len(w)} unknowns, {neq} equations")
    integ = basis_integrals(knots, degree)[:neq]
    for it in range(maxit + 1):
        V, D = basis_matrix(knots, degree, tau, deriv=True)
        F = (V.T @ w)[:neq] - integ
        nF = float(np.max(np.abs(F)))
        if nF <= tol:
            return tau, w, nF, it
        if it == maxit:
            break
        J = np.hstack([(D * w[:, None]).T[:neq, free], V.T[:neq]])
        try:
            delta = np.linalg.solve(J, -F)
        except np.linalg.LinAlgError:
            raise ConvergenceError("singular Jacobian", nF) from None
        lam = 1.0
        while True:
            t2 = tau.copy()
            t2[free] += lam * delta[:nfree]
            w2 = w + lam * delta[nfree:]
            F2 = exactness_residual(knots, degree, neq, t2, w2)
            n2 = float(np.max(np.abs(F2)))
            if n2 < nF or lam < 1e-4:
                break
            lam *= 0.5
        if not n2 < nF and nF <= 100 * tol:
            # stagnation at the rounding floor, just above tol
            return tau, w, nF, it
        tau, w = t2, w2
    raise ConvergenceError(f"no convergence after {maxit} iterations (residual {nF:.3e})", nF)


def span_index(knots_f, degree: int, x, knots) -> int:
    """
    Span of a single point using exact comparisons on ``knots``.

    ``knots_f`` is the float copy of the sequence (for its length); points at
    or beyond the last breakpoint belong to the last non-empty span.
    """
    n = len(knots_f) - degree - 1
    if x >= knots[n]:
        mu = n - 1
        while knots[mu] >= knots[mu + 1]:
            mu -= 1
        return mu
    lo, hi = degree, n - 1
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if knots[mid] <= x:
            lo = mid
        else:
            hi = mid - 1
    return lo


def residual_mp(knots, degree: int, neq: int, tau, w) -> list:
    """Residuals of the first ``neq`` equations in mpmath arithmetic."""
    d = degree
    n = len(knots) - d - 1
    acc = [mpmath.mpf(0)] * n
    for x, wx in zip(tau, w):
        mu = span_index(knots, d, x, knots)
        for k, v in enumerate(basis_nonzero(knots, d, x, mu)):
            acc[mu - d + k] += wx * v
    return [acc[i] - (knots[i + d + 1] - knots[i]) / (d + 1) for i in range(neq)]


def newton_mp(knots, degree: int, neq: int, tau, w, pinned=None,
              dps: int = 40, tol=None, maxit: int = 12):
    """
    Mixed-precision Newton: residuals in mpmath, Jacobian in double.

    Each step gains roughly as many digits as double precision carries, so a
    handful of iterations starting from a double-precision root reach the
    working precision.

    Returns mpmath lists ``tau``, ``w`` and the largest residual.
    """
    with mpmath.workdps(dps):
        T = [mpmath.mpf(v) for v in knots]
        Tf = np.array([float(v) for v in T])
        tau = [mpmath.mpf(v) for v in tau]
        w = [mpmath.mpf(v) for v in w]
        free = np.ones(len(tau), bool) if pinned is None else ~np.asarray(pinned, bool)
        nfree = int(free.sum())
        if tol is None:
            tol = mpmath.mpf(10) ** (-(dps - 8))
        best = None
        for it in range(maxit + 1):
            F = residual_mp(T, degree, neq, tau, w)
            nF = max(abs(v) for v in F)
            if best is not None and nF >= best[2]:
                break
            best = (tau, w, nF)
            if nF <= tol or it == maxit:
                break
            tf = np.array([float(v) for v in tau])
            wf = np.array([float(v) for v in w])
            V, D = basis_matrix(Tf, degree, tf, deriv=True)
            J = np.hstack([(D * wf[:, None]).T[:neq, free], V.T[:neq]])
            delta = np.linalg.solve(J, -np.array([float(v) for v in F]))
            tau = list(tau)
            for k, j in enumerate(np.flatnonzero(free)):
                tau[j] = tau[j] + mpmath.mpf(delta[k])
            w = [wj + mpmath.mpf(delta[nfree + j]) for j, wj in enumerate(w)]
        return best
