"""
Persistence of quadrature rules as JSON documents with decimal strings.

Numbers are never written as binary floats. Double-precision rules use the
shortest round-tripping representation; extended-precision rules carry as
many digits as they were computed with. A loaded file keeps its strings,
so ``save(load(path))`` reproduces the original text exactly.
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import metadata
from pathlib import Path

import mpmath
import numpy as np

from .quadrature import QuadratureRule, residual_norm
from .spline import KnotVector, SplineSpace

__all__ = ["FORMAT_VERSION", "RuleFile", "RuleFileError", "format_decimal", "load", "load_knots", "save"]

FORMAT_VERSION = 1


class RuleFileError(ValueError):
    """Malformed rule or knot file."""


def _version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "unknown"


def format_decimal(value, digits: int | None = None) -> str:
    """
    Decimal string for a float or ``mpmath.mpf``.

    Floats default to their shortest round-trip form, mpf values to the
    current working precision.
    """
    if isinstance(value, mpmath.mpf):
        return mpmath.nstr(value, digits or mpmath.mp.dps, strip_zeros=False, min_fixed=-30, max_fixed=30)
    if digits is None:
        return repr(float(value))
    return mpmath.nstr(mpmath.mpf(float(value)), digits, strip_zeros=False)


def _parse_number(text) -> Fraction:
    if isinstance(text, bool):
        raise RuleFileError(f"not a number: {text!r}")
    if isinstance(text, (int, float)):
        return Fraction(text)
    try:
        return Fraction(str(text).strip())
    except (ValueError, ZeroDivisionError):
        raise RuleFileError(f"not a decimal or fraction: {text!r}") from None


@dataclass
class RuleFile:
    """
    In-memory form of a rule document.

    Attributes
    ----------
    metadata : dict
        ``degree``, ``continuity``, ``elements``, ``domain``, ``knots``
        (``breakpoints`` and ``multiplicities``), ``kind``, ``pinned_index``,
        ``precision_mode``, ``residual_norm``, ``generator``.
    nodes, weights : list of str
        Decimal strings.
    asymptotic : dict, optional
        Closed-form constants as decimal strings.
    """

    metadata: dict
    nodes: list[str]
    weights: list[str]
    asymptotic: dict | None = field(default=None)

    # -- conversion ----------------------------------------------------------
    @classmethod
    def from_rule(cls, rule: QuadratureRule, continuity: int | None = None,
                  asymptotic: dict | None = None, dps: int = 40) -> "RuleFile":
        space = rule.space
        if space is None:
            raise ValueError("rule carries no space")
        if continuity is None:
            continuity = space.interior_continuity
        if rule.extended:
            with mpmath.workdps(dps):
                nodes = [format_decimal(v, dps) for v in rule.nodes_mp]
                weights = [format_decimal(v, dps) for v in rule.weights_mp]
        else:
            nodes = [format_decimal(v) for v in rule.nodes]
            weights = [format_decimal(v) for v in rule.weights]
        kv = space.knots
        meta = {
            "format": FORMAT_VERSION,
            "degree": space.degree,
            "continuity": continuity,
            "elements": kv.n_elements,
            "domain": [format_decimal(rule.a), format_decimal(rule.b)],
            "knots": {
                "breakpoints": [format_decimal(v) for v in kv.partition],
                "multiplicities": list(kv.multiplicities),
            },
            "kind": rule.kind,
            "pinned_index": rule.pinned_index,
            "precision_mode": "extended" if rule.extended else "double",
            "residual_norm": format_decimal(residual_norm(rule), 3),
            "generator": f"gaussgalerkin {_version()}",
        }
        if asymptotic is not None:
            with mpmath.workdps(dps):
                asymptotic = {k: v if isinstance(v, str) else format_decimal(v, dps)
                              for k, v in asymptotic.items()}
        return cls(meta, nodes, weights, asymptotic)

    def space(self) -> SplineSpace:
        try:
            kn = self.metadata["knots"]
            x = tuple(float(_parse_number(v)) for v in kn["breakpoints"])
            m = tuple(int(v) for v in kn["multiplicities"])
            return SplineSpace(int(self.metadata["degree"]), KnotVector(x, m))
        except (KeyError, TypeError, ValueError) as exc:
            raise RuleFileError(f"invalid knot data: {exc}") from None

    def to_rule(self) -> QuadratureRule:
        """Rebuild the rule; extended files keep their digits as mpf values."""
        if len(self.nodes) != len(self.weights):
            raise RuleFileError("nodes and weights differ in length")
        space = self.space()
        try:
            kind = self.metadata.get("kind", "Gauss")
            pin = self.metadata.get("pinned_index")
            extended = self.metadata.get("precision_mode") == "extended"
            t = np.array([float(_parse_number(v)) for v in self.nodes])
            w = np.array([float(_parse_number(v)) for v in self.weights])
            kw = {}
            if extended:
                digits = max(len(s) for s in self.nodes + self.weights)
                with mpmath.workdps(max(digits, 40)):
                    kw = dict(nodes_mp=tuple(mpmath.mpf(s) for s in self.nodes),
                              weights_mp=tuple(mpmath.mpf(s) for s in self.weights))
            return QuadratureRule(t, w, (space.a, space.b), kind, pin, space, **kw)
        except (TypeError, ValueError) as exc:
            raise RuleFileError(f"invalid rule data: {exc}") from None

    # -- text forms ------------------------------------------------------------
    def dumps(self) -> str:
        doc = {"metadata": self.metadata, "nodes": self.nodes, "weights": self.weights}
        if self.asymptotic is not None:
            doc["asymptotic"] = self.asymptotic
        return json.dumps(doc, indent=2) + "\n"

    @classmethod
    def loads(cls, text: str) -> "RuleFile":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise RuleFileError(f"not valid JSON: {exc}") from None
        if not isinstance(doc, dict) or not {"metadata", "nodes", "weights"} <= doc.keys():
            raise RuleFileError("expected an object with metadata, nodes and weights")
        nodes, weights = doc["nodes"], doc["weights"]
        if not all(isinstance(v, str) for v in nodes + weights):
            raise RuleFileError("nodes and weights must be decimal strings")
        return cls(doc["metadata"], nodes, weights, doc.get("asymptotic"))

    def to_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["node", "weight"])
        wr.writerows(zip(self.nodes, self.weights))
        return buf.getvalue()


def save(rf: RuleFile, path, companion_csv: bool = True) -> list[Path]:
    """Write ``path`` and, by default, the node/weight CSV next to it."""
    path = Path(path)
    path.write_text(rf.dumps())
    out = [path]
    if companion_csv:
        cpath = path.with_suffix(".csv")
        cpath.write_text(rf.to_csv())
        out.append(cpath)
    return out


def load(path) -> RuleFile:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise RuleFileError(f"cannot read {path}: {exc}") from None
    return RuleFile.loads(text)


def load_knots(path, degree: int, continuity: int) -> KnotVector:
    """
    Read a knot file: ``{"breakpoints": [...], "multiplicities": [...]}``.

    Breakpoints may be numbers or decimal/fraction strings such as ``"1/2"``.
    Without multiplicities the open vector for ``(degree, continuity)`` is
    assumed; given multiplicities must agree with it.
    """
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise RuleFileError(f"cannot read knot file {path}: {exc}") from None
    if isinstance(doc, list):
        doc = {"breakpoints": doc}
    if not isinstance(doc, dict) or "breakpoints" not in doc:
        raise RuleFileError("knot file needs a 'breakpoints' list")
    x = tuple(float(_parse_number(v)) for v in doc["breakpoints"])
    if len(x) < 2 or any(b <= a for a, b in zip(x, x[1:])):
        raise RuleFileError("breakpoints must be strictly increasing, at least two")
    expected = [degree - continuity] * len(x)
    expected[0] = expected[-1] = degree + 1
    m = doc.get("multiplicities")
    if m is not None and [int(v) for v in m] != expected:
        raise RuleFileError(f"multiplicities {list(m)} do not match degree {degree}, "
                            f"continuity {continuity}: expected {expected}")
    return KnotVector(x, tuple(expected))
