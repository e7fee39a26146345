"""
Homotopy continuation over knot vectors.

A rule known for a *source* space is deformed into the rule for a *target*
space by moving knots along straight lines and re-solving the exactness
system with Newton's method at every step.

Recursive construction
----------------------
The target partition is split into a left part (a power of two building
units) and a right part. Rules for both parts are derived recursively and
concatenated, which is an optimal rule for the discontinuous join of the two
spaces. The surplus copies of the join knot then travel to the right end of
the domain. When their trailing basis functions have become negligible the
corresponding equations are dropped together with the last node(s).

The building unit is a two-element block when ``c`` is odd. When ``c`` is
even every space of interest has odd dimension, so the recursion instead
works with an *augmented* space, carrying one extra simple knot at
``b - eta * h_last`` that makes the dimension even. A final trace pushes that
knot into ``b``; the node following it is pinned at ``b``, giving a
Gauss-Radau rule. Symmetric ``C^0`` targets with an even number of elements are
assembled from the Radau rule of the left half by reflection, which puts
the constrained node at the midpoint.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .blocks import DerivationError, BlockSpec, augmented_element_rule, gauss_block_6_1, solve_block
from .quadrature import GAUSS, RADAU, QuadratureRule, reflect_symmetric, verify
from .solver import ConvergenceError, newton, newton_mp
from .spline import KNOT_RTOL, KnotVector, SplineSpace, basis_integrals

__all__ = [
    "HomotopyConfig",
    "KnotTrack",
    "TraceError",
    "TraceState",
    "Transition",
    "build_source",
    "derive_rule",
    "knot_schedule",
    "pin_radau",
    "polish_extended",
    "trace",
]

#: Tracks closer than this fraction of the domain length count as coincident.
COINCIDENCE_RTOL = 1e-9


class TraceError(DerivationError):
    """The continuation could not follow the root."""

    def __init__(self, message: str, step: int | None = None, residual: float = float("nan")):
        super().__init__(message)
        self.step = step
        self.residual = residual


@dataclass(frozen=True)
class HomotopyConfig:
    """
    Parameters of a continuation run.

    Attributes
    ----------
    steps : int
        Uniform steps per trace.
    vanish_threshold : float
        Trailing basis integrals below this (times the mean element length)
        trigger the node-removal transition.
    newton_tol : float
        Largest admissible residual, relative to the mean element length.
    newton_max_iter : int
    precision_mode : {"double", "extended"}
        Extended mode polishes the final rule with mpmath.
    extended_dps : int
        Decimal digits for extended polishing.
    max_retries : int
        A failed derivation is repeated with twice the steps this many times.
    augment_eta : float
        Relative distance of the augmenting knot from the right end.
    """

    steps: int = 200
    vanish_threshold: float = 1e-3
    newton_tol: float = 1e-13
    newton_max_iter: int = 30
    precision_mode: str = "double"
    extended_dps: int = 40
    max_retries: int = 3
    augment_eta: float = 0.5

    def __post_init__(self):
        if self.steps < 1:
            raise ValueError("steps must be at least 1")
        if not self.vanish_threshold > 0:
            raise ValueError("vanish_threshold must be positive")
        if not self.newton_tol > 0:
            raise ValueError("newton_tol must be positive")
        if self.precision_mode not in ("double", "extended"):
            raise ValueError(f"unknown precision mode {self.precision_mode!r}")
        if not 0 < self.augment_eta < 1:
            raise ValueError("augment_eta must lie in (0, 1)")


# =============================================================================
# Knot motion
# =============================================================================
@dataclass(frozen=True)
class KnotTrack:
    """``count`` coincident knots moving linearly from ``start`` to ``end``."""

    start: float
    end: float
    count: int = 1
    exits: bool = False

    def at(self, t: float) -> float:
        if t >= 1.0:
            return self.end
        return self.start + (self.end - self.start) * t


@dataclass(frozen=True)
class Transition:
    """
    A family of knot vectors ``T(t)``, ``t`` in ``[0, 1]``.

    Exiting tracks end at ``b`` and are removed from ``T(1)``.
    """

    degree: int
    tracks: tuple[KnotTrack, ...]

    @property
    def a(self) -> float:
        return min(tr.start for tr in self.tracks)

    @property
    def b(self) -> float:
        return max(tr.end for tr in self.tracks)

    @property
    def exiting(self) -> int:
        return sum(tr.count for tr in self.tracks if tr.exits)

    def sequence(self, t: float) -> np.ndarray:
        keep = [tr for tr in self.tracks if not (t >= 1.0 and tr.exits)]
        pos = np.concatenate([np.full(tr.count, tr.at(t)) for tr in keep])
        return np.sort(pos)

    def knot_vector(self, t: float) -> KnotVector:
        return KnotVector.from_sequence(self.sequence(t))

    def coincident(self, t: float) -> bool:
        """True if two tracks that are apart at both ends meet at ``t``."""
        tol = COINCIDENCE_RTOL * (self.b - self.a)
        pos = [tr.at(t) for tr in self.tracks]
        for i in range(len(self.tracks)):
            for j in range(i + 1, len(self.tracks)):
                ti, tj = self.tracks[i], self.tracks[j]
                same_path = abs(ti.start - tj.start) <= tol and abs(ti.end - tj.end) <= tol
                if not same_path and abs(pos[i] - pos[j]) <= tol:
                    return True
        return False

    @classmethod
    def between(cls, degree: int, source: KnotVector, target: KnotVector) -> "Transition":
        """
        Correspondence between a source and a target knot vector.

        Breakpoints are paired in order when both vectors have the same
        number of them; otherwise source breakpoints absent from the target
        leave the domain. Surplus multiplicity of a paired breakpoint also
        leaves through ``b``.
        """
        if not (math.isclose(source.a, target.a) and math.isclose(source.b, target.b)):
            raise ValueError("source and target must share the domain")
        tol = KNOT_RTOL * (target.b - target.a)
        b = target.b
        tracks: list[KnotTrack] = []
        if len(source.partition) == len(target.partition):
            pairs = list(zip(source.partition, source.multiplicities,
                             target.partition, target.multiplicities))
            extra_src = []
        else:
            tgt = list(zip(target.partition, target.multiplicities))
            pairs, extra_src = [], []
            for x, m in zip(source.partition, source.multiplicities):
                hit = [(y, n) for y, n in tgt if abs(y - x) <= tol]
                if hit:
                    pairs.append((x, m, *hit[0]))
                else:
                    extra_src.append((x, m))
            if len(pairs) != len(tgt):
                raise ValueError("no correspondence between source and target breakpoints")
        for xs, ms, xt, mt in pairs:
            if mt > ms:
                raise ValueError(f"target multiplicity {mt} at {xt} exceeds source multiplicity {ms}")
            tracks.append(KnotTrack(xs, xt, mt))
            if ms > mt:
                tracks.append(KnotTrack(xs, b, ms - mt, exits=True))
        for x, m in extra_src:
            tracks.append(KnotTrack(x, b, m, exits=True))
        return cls(degree, tuple(tracks))


def knot_schedule(source_knots: KnotVector, target_knots: KnotVector, steps: int,
                  degree: int | None = None) -> list[KnotVector]:
    """
    Knot vectors at ``t = k/steps``, ``k = 0..steps``.

    The last entry is the target (exited knots removed). Intermediate knot
    vectors may carry merged breakpoints where a moving knot passes a static
    one.
    """
    if steps < 1:
        raise ValueError("steps must be at least 1")
    tr = Transition.between(degree or 0, source_knots, target_knots)
    out = [tr.knot_vector(k / steps) for k in range(steps)]
    out.append(target_knots)
    return out


# =============================================================================
# Tracing
# =============================================================================
@dataclass
class TraceState:
    """
    Root of the exactness system at continuation time ``t``.

    ``active`` counts the leading basis functions in the system; ``pinned``
    marks nodes whose position is fixed.
    """

    t: float
    knots: np.ndarray
    tau: np.ndarray
    w: np.ndarray
    active: int
    pinned: np.ndarray = field(default=None)
    residual: float = 0.0
    event: str | None = None

    def __post_init__(self):
        if self.pinned is None:
            self.pinned = np.zeros(len(self.tau), bool)

    @property
    def unknowns(self) -> int:
        return int((~self.pinned).sum()) + len(self.w)

    def as_record(self) -> dict:
        return {
            "t": self.t,
            "knots": [float(v) for v in self.knots],
            "nodes": [float(v) for v in self.tau],
            "weights": [float(v) for v in self.w],
            "active": self.active,
            "pinned": [int(i) for i in np.flatnonzero(self.pinned)],
            "residual": self.residual,
            "event": self.event,
        }


def pin_radau(state: TraceState, position: float) -> TraceState:
    """
    Fix the node closest to ``position`` at ``position``.

    Only meaningful for an odd number of active equations, where pinning
    one node makes the system square; its weight stays unknown.
    """
    if state.active % 2 == 0:
        raise ValueError("pinning applies to odd-dimensional systems only")
    j = int(np.argmin(np.abs(state.tau - position)))
    tau = state.tau.copy()
    tau[j] = position
    pinned = state.pinned.copy()
    pinned[j] = True
    new = replace(state, tau=tau, pinned=pinned, event="pin")
    if new.unknowns != new.active:
        raise ValueError(f"pinning leaves {new.unknowns} unknowns for {new.active} equations")
    return new


def trace(state0: TraceState, transition: Transition, config: HomotopyConfig = HomotopyConfig(),
          log: Callable[[dict], None] | None = None) -> TraceState:
    """
    Follow a root from ``t = 0`` to ``t = 1``.

    Each step predicts by linear extrapolation of the last two roots (or
    keeps the previous root right after a transition) and corrects with
    damped Newton. Steps at which a moving knot coincides with another knot
    are skipped: the space degenerates there.

    If knots exit, the trailing basis functions lose support. Once the one
    belonging to the leftmost exiting knot integrates to less than
    ``vanish_threshold`` times the mean element length the transition fires:

    * an even number ``q`` of exiting knots removes the last ``q``
      equations and the ``q/2`` right-most nodes;
    * a single exiting knot removes the last equation and pins the right-most
      node to that knot, so the node arrives at ``b`` together with it.

    Raises
    ------
    TraceError
        On Newton failure, unordered nodes, nodes leaving the domain or a
        non-positive weight.
    """
    d = transition.degree
    a, b = transition.a, transition.b
    L = b - a
    seq1 = transition.sequence(1.0)
    hbar = L / max(1, len(np.unique(seq1)) - 1)
    tol = config.newton_tol * max(hbar, 1.0)
    q = transition.exiting
    if q > 1 and q % 2:
        raise TraceError(f"{q} exiting knots: only even counts or a single knot are supported")
    st = replace(state0, tau=np.array(state0.tau, float), w=np.array(state0.w, float),
                 pinned=np.array(state0.pinned, bool))
    done = q == 0
    # a single exiting knot drags the pinned node along with it
    pin_track = None
    hist: list[tuple[float, np.ndarray]] = []
    steps = config.steps
    for k in range(1, steps + 1):
        t = k / steps
        if k < steps and transition.coincident(t):
            continue
        T = transition.sequence(t)
        n = len(T) - d - 1
        event = None
        if not done and (t >= 1.0 or (T[n - q + d + 1] - T[n - q]) / (d + 1) < config.vanish_threshold * hbar):
            st, event = _transition_event(st, q, T[n - q])
            done = True
            hist.clear()
            if q == 1:
                pin_track = next(tr for tr in transition.tracks if tr.exits)
        active = st.active if done else n
        if t >= 1.0:
            active = len(T) - d - 1
        m = len(st.tau)
        secant = None
        if len(hist) >= 2:
            (t1, x1), (t2, x2) = hist[-2], hist[-1]
            secant = x2 + (x2 - x1) * (t - t2) / (t2 - t1)
        err = None
        if pin_track is not None:
            st.tau[st.pinned] = pin_track.at(t)
        for x in _predictions(st, secant, T, hbar):
            tau0, w0 = x[:m].copy(), x[m:].copy()
            tau0[st.pinned] = st.tau[st.pinned]
            try:
                tau, w, res, _ = newton(T, d, active, tau0, w0, st.pinned, tol, config.newton_max_iter)
                _check(tau, w, a, b, k, t)
                break
            except (ConvergenceError, ValueError, TraceError) as exc:
                err = exc
        else:
            raise TraceError(f"step {k} (t={t:.4f}): {err}", k, getattr(err, "residual", np.nan))
        st = TraceState(t, T, tau, w, active, st.pinned, res, event)
        hist.append((t, np.concatenate([tau, w])))
        if log is not None:
            log(st.as_record())
    return st


def _predictions(st: TraceState, secant, T, hbar):
    """
    Starting points for the corrector, most plausible first.

    Right after a moving knot has crossed a static one, a node may sit in
    the short interval between them with a position that does not vary
    smoothly through the crossing. Such nodes are additionally re-seeded at
    several relative positions inside that interval.
    """
    x0 = np.concatenate([st.tau, st.w])
    if secant is not None:
        yield secant
    yield x0
    brk = np.unique(T)
    short = [(lo, hi) for lo, hi in zip(brk[:-1], brk[1:]) if hi - lo < 0.05 * hbar]
    m = len(st.tau)
    base = secant if secant is not None else x0
    for lo, hi in short:
        width = hi - lo
        inside = np.flatnonzero((base[:m] > lo - width) & (base[:m] < hi + width) & ~st.pinned)
        if len(inside) != 1:
            continue
        j = inside[0]
        for r in (0.1, 0.5, 0.9, 0.03, 0.3, 0.7, 0.97):
            x = base.copy()
            x[j] = lo + r * width
            yield x


def _transition_event(st: TraceState, q: int, knot: float) -> tuple[TraceState, str]:
    n = st.active
    if q == 1:
        pinned_state = replace(st, active=n - 1)
        return pin_radau(pinned_state, knot), "pin"
    drop = q // 2
    order = np.argsort(st.tau)
    keep = np.sort(order[:len(st.tau) - drop])
    return replace(st, tau=st.tau[keep], w=st.w[keep], pinned=st.pinned[keep],
                   active=n - q, event="vanish"), "vanish"


def _check(tau, w, a, b, k, t):
    tol = KNOT_RTOL * (b - a)
    if np.any(np.diff(tau) <= 0):
        raise TraceError(f"step {k} (t={t:.4f}): nodes lost their order", k)
    if tau[0] < a - tol or tau[-1] > b + tol:
        raise TraceError(f"step {k} (t={t:.4f}): node left the domain", k)
    if np.any(w <= 0):
        raise TraceError(f"step {k} (t={t:.4f}): non-positive weight {w.min():.3e}", k)


# =============================================================================
# Recursive construction
# =============================================================================
def _unit(c: int) -> int:
    return 2 if c % 2 else 1


def _split(n_units: int) -> int:
    """Units in the left part: the largest power of two below ``n_units``."""
    p = 1 << (n_units - 1).bit_length() - 1
    return p


class _Builder:
    """Derives and caches rules for partitions of a fixed ``(d, c)``."""

    def __init__(self, d: int, c: int, config: HomotopyConfig, log=None):
        if d % 2:
            raise DerivationError("only even degrees are supported")
        if not 0 <= c < d:
            raise DerivationError(f"continuity {c} out of range for degree {d}")
        self.d, self.c, self.cfg, self.log = d, c, config, log
        self.eta = config.augment_eta
        self.augmented = c % 2 == 0
        self.cache: dict[tuple, tuple[np.ndarray, np.ndarray]] = {}

    # -- knots --------------------------------------------------------------
    def target_knots(self, x) -> KnotVector:
        m = [self.d - self.c] * len(x)
        m[0] = m[-1] = self.d + 1
        return KnotVector(tuple(x), tuple(m))

    def work_knots(self, x) -> KnotVector:
        """Knots of the space whose Gauss rule the recursion carries."""
        kv = self.target_knots(x)
        if not self.augmented:
            return kv
        z = x[-1] - self.eta * (x[-1] - x[-2])
        return KnotVector(kv.partition[:-1] + (z, kv.b), kv.multiplicities[:-1] + (1, self.d + 1))

    # -- recursion ----------------------------------------------------------
    def rule(self, x: tuple) -> tuple[np.ndarray, np.ndarray]:
        """Gauss rule of the working space over breakpoints ``x``."""
        x = tuple(float(v) for v in x)
        h0 = x[1] - x[0]
        key = tuple(round((v - x[0]) / h0, 12) for v in x)
        if key not in self.cache:
            self.cache[key] = self._derive(key)
        t, w = self.cache[key]
        return x[0] + h0 * t, h0 * w

    def _derive(self, x: tuple) -> tuple[np.ndarray, np.ndarray]:
        n_el = len(x) - 1
        units = n_el // _unit(self.c)
        if units == 1:
            return self._base(x)
        k = _split(units) * _unit(self.c)
        tl, wl = self.rule(x[:k + 1])
        tr, wr = self.rule(x[k:])
        tau = np.concatenate([tl, tr])
        w = np.concatenate([wl, wr])
        source = self._merged_knots(x, k)
        target = self.work_knots(x)
        return self._run(source, target, tau, w)

    def _merged_knots(self, x, k) -> KnotVector:
        left = self.work_knots(x[:k + 1])
        right = self.work_knots(x[k:])
        part = left.partition + right.partition[1:]
        mult = left.multiplicities[:-1] + (self.d + 1,) + right.multiplicities[1:]
        return KnotVector(part, mult)

    def _base(self, x: tuple) -> tuple[np.ndarray, np.ndarray]:
        d, c = self.d, self.c
        if self.augmented:
            r = augmented_element_rule(d, self.eta)
            return r.nodes * (x[1] - x[0]), r.weights * (x[1] - x[0])
        h = (x[2] - x[0]) / 2
        if (d, c) == (6, 1):
            blk = gauss_block_6_1()
        else:
            blk = solve_block(BlockSpec(d, c, 2, GAUSS))
        tau, w = blk.nodes * h, blk.weights * h
        if math.isclose(x[1] - x[0], h, rel_tol=1e-12):
            return tau, w
        # unequal pair: slide the interior knot from the midpoint into place
        src = self.target_knots((x[0], x[0] + h, x[2]))
        return self._run(src, self.target_knots(x), tau, w)

    def _run(self, source: KnotVector, target: KnotVector, tau, w):
        tr = Transition.between(self.d, source, target)
        n = len(tr.sequence(0.0)) - self.d - 1
        st = TraceState(0.0, tr.sequence(0.0), np.asarray(tau), np.asarray(w), n)
        out = trace(st, tr, self.cfg, self.log)
        return out.tau, out.w

    # -- Radau limit ----------------------------------------------------------
    def radau(self, x: tuple) -> tuple[np.ndarray, np.ndarray]:
        """Right Radau rule (last node at ``b``) of the target space."""
        tau, w = self.rule(x)
        tr = Transition.between(self.d, self.work_knots(x), self.target_knots(x))
        n = len(tr.sequence(0.0)) - self.d - 1
        st = TraceState(0.0, tr.sequence(0.0), tau, w, n)
        out = trace(st, tr, self.cfg, self.log)
        tau = out.tau.copy()
        tau[-1] = x[-1]
        return tau, out.w


def _is_symmetric(x) -> bool:
    h = np.diff(x)
    return bool(np.allclose(h, h[::-1], rtol=0, atol=KNOT_RTOL * (x[-1] - x[0])))


def build_source(target: SplineSpace, config: HomotopyConfig = HomotopyConfig()
                 ) -> tuple[SplineSpace, QuadratureRule]:
    """
    Discontinuous join of the two recursively derived halves of ``target``.

    For even ``c`` both halves are augmented spaces (see module notes).
    """
    d = target.degree
    c = target.interior_continuity()
    x = target.knots.partition
    _check_target(target, c)
    bld = _Builder(d, c, config)
    units = len(x) - 1
    if bld.augmented is False:
        units //= 2
    if units < 2:
        raise DerivationError("target consists of a single building block")
    k = _split(units) * _unit(c)
    tl, wl = bld.rule(x[:k + 1])
    tr, wr = bld.rule(x[k:])
    src = SplineSpace(d, bld._merged_knots(x, k), "source")
    rule = QuadratureRule(np.concatenate([tl, tr]), np.concatenate([wl, wr]), (x[0], x[-1]), GAUSS, None, src)
    return src, rule


def _check_target(target: SplineSpace, c):
    if not target.is_open():
        raise DerivationError("target knot vector must be open")
    if c is None:
        if target.knots.n_elements == 1:
            raise DerivationError("a single element is a polynomial space; use Gauss-Legendre")
        raise DerivationError("interior multiplicities must all be equal")
    if target.degree % 2:
        raise DerivationError("only even degrees are supported")
    if not 0 <= c < target.degree:
        raise DerivationError(f"continuity {c} not supported")
    if c % 2 and target.knots.n_elements % 2:
        raise DerivationError(
            f"odd continuity needs an even number of elements, got {target.knots.n_elements}")


def derive_rule(d: int, c: int, target_knots: KnotVector | None = None,
                config: HomotopyConfig = HomotopyConfig(), *, n_elements: int | None = None,
                domain: tuple[float, float] | None = None,
                log: Callable[[dict], None] | None = None) -> QuadratureRule:
    """
    Optimal rule for degree ``d`` splines with interior continuity ``c``.

    Parameters
    ----------
    d, c : int
        Even degree and interior continuity ``0 <= c < d``.
    target_knots : KnotVector, optional
        Open target knot vector. Its multiplicities are taken from ``(d, c)``;
        only the breakpoints are used.
    config : HomotopyConfig
    n_elements, domain : optional
        Uniform alternative to ``target_knots``.
    log : callable, optional
        Receives one record per accepted continuation step.

    Returns
    -------
    QuadratureRule
        Gauss rule for even dimension. For odd dimension a Gauss-Radau rule
        whose constrained node is the midpoint for ``c = 0`` on symmetric
        partitions with an even element count, and ``b`` otherwise.

    Raises
    ------
    DerivationError
        Unsupported input, or continuation failure after all retries.
    """
    if target_knots is None:
        if n_elements is None:
            raise ValueError("give target_knots or n_elements")
        a, b = domain if domain is not None else (0.0, float(n_elements))
        x = tuple(np.linspace(a, b, n_elements + 1))
    else:
        x = target_knots.partition
    m = [d - c] * len(x)
    m[0] = m[-1] = d + 1
    if len(x) < 2:
        raise DerivationError("need at least one element")
    space = SplineSpace(d, KnotVector(x, tuple(m)))
    if len(x) == 2:
        raise DerivationError("a single element is a polynomial space; use Gauss-Legendre")
    _check_target(space, c)
    cfg = config
    last = None
    for _ in range(config.max_retries + 1):
        try:
            rule = _derive(d, c, x, space, cfg, log)
            break
        except TraceError as exc:
            last = exc
            cfg = replace(cfg, steps=cfg.steps * 2)
    else:
        raise last
    rule = _polish_double(rule, config)
    if config.precision_mode == "extended":
        rule = polish_extended(rule, config.extended_dps)
    rep = verify(rule)
    if not (rep.exact and rep.positive and rep.optimal):
        raise DerivationError(f"derived rule failed verification: {rep}")
    return rule


def _derive(d, c, x, space, cfg, log) -> QuadratureRule:
    bld = _Builder(d, c, cfg, log)
    if not bld.augmented:
        tau, w = bld.rule(x)
        return QuadratureRule(tau, w, (x[0], x[-1]), GAUSS, None, space)
    n_el = len(x) - 1
    # mirroring a right Radau half is optimal only when the centre knot
    # loses exactly one degree of freedom, i.e. for C^0 joins
    if c == 0 and n_el % 2 == 0 and _is_symmetric(x):
        half_x = x[:n_el // 2 + 1]
        tau, w = bld.radau(half_x)
        half_space = SplineSpace(d, bld.target_knots(half_x))
        half = QuadratureRule(tau, w, (x[0], half_x[-1]), RADAU, len(tau) - 1, half_space)
        return reflect_symmetric(half, half_x[-1], space, halved_midpoint=True)
    tau, w = bld.radau(x)
    return QuadratureRule(tau, w, (x[0], x[-1]), RADAU, len(tau) - 1, space)


def _polish_double(rule: QuadratureRule, config: HomotopyConfig) -> QuadratureRule:
    """
    Final Newton pass on the target system in the normalized residual measure.

    The continuation bounds residuals of the unnormalized basis; dividing by
    short supports can amplify them past the verification threshold.
    """
    seq = rule.space.sequence
    d = rule.space.degree
    support = seq[d + 1:] - seq[:-d - 1]
    hbar = (rule.b - rule.a) / rule.space.knots.n_elements
    tol = config.newton_tol * max(hbar, 1.0) * float(support.min())
    pinned = np.zeros(rule.m, bool)
    if rule.pinned_index is not None:
        pinned[rule.pinned_index] = True
    try:
        tau, w, _, _ = newton(seq, d, rule.space.dimension, rule.nodes, rule.weights, pinned, tol,
                              config.newton_max_iter)
    except ConvergenceError:
        return rule
    return QuadratureRule(tau, w, rule.domain, rule.kind, rule.pinned_index, rule.space)


def polish_extended(rule: QuadratureRule, dps: int = 40) -> QuadratureRule:
    """
    Refine a rule with mixed-precision Newton in ``dps`` digits.

    Symmetric rules with a pinned midpoint are polished on their left half
    and reflected, so the symmetry is exact.
    """
    space = rule.space
    if space is None:
        raise ValueError("rule carries no space")
    d = space.degree
    x = space.knots.partition
    mid_pin = (rule.pinned_index is not None and rule.kind == RADAU
               and rule.pinned_index == rule.m // 2 and 0 < rule.pinned_index < rule.m - 1)
    if mid_pin:
        c = 0.5 * (x[0] + x[-1])
        half_x = [v for v in x if v <= c + KNOT_RTOL * (x[-1] - x[0])]
        m = list(space.knots.multiplicities[:len(half_x)])
        m[-1] = d + 1
        half_space = SplineSpace(d, KnotVector(tuple(half_x), tuple(m)))
        j = rule.pinned_index
        half = QuadratureRule(rule.nodes[:j + 1], np.append(rule.weights[:j], rule.weights[j] / 2),
                              (x[0], half_x[-1]), RADAU, j, half_space)
        half = polish_extended(half, dps)
        return reflect_symmetric(half, half_x[-1], space, halved_midpoint=True)
    pinned = np.zeros(rule.m, bool)
    if rule.pinned_index is not None:
        pinned[rule.pinned_index] = True
    tau, w, _ = newton_mp(space.sequence, d, space.dimension, rule.nodes, rule.weights, pinned, dps=dps)
    return QuadratureRule(np.array([float(v) for v in tau]), np.array([float(v) for v in w]),
                          rule.domain, rule.kind, rule.pinned_index, space,
                          nodes_mp=tuple(tau), weights_mp=tuple(w))
