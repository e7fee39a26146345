"""
Acceptance suite: ten end-to-end criteria at their stated tolerances.

Each test prints one ``[ n] PASS|FAIL description`` line; the lines are
repeated in the terminal summary. Run directly with
``python3 tests/test_acceptance.py`` or through pytest.
"""
from __future__ import annotations

import contextlib
import io
import math
import sys
import time

import mpmath
import numpy as np
import pytest

from gaussgalerkin import (
    HomotopyConfig,
    affine_map,
    boundary_depth,
    compose_finite,
    derive_rule,
    gauss_block_6_1,
    optimal_node_count,
    radau_block_4_0,
    residual_norm,
    solve_asymptotic_4_0,
    solve_asymptotic_6_1,
)
from gaussgalerkin.asymptotic import asymptotic_system_4_0, asymptotic_system_6_1
from gaussgalerkin.cli import main as cli_main

from helpers import NONUNIFORM_BREAKPOINTS, open_knots, reference, span_integral, spline_function

#: One line per criterion, filled as the tests run.
REPORT: dict[int, str] = {}

DPS = 40

# 20-digit reference values of the (6, 1) two-element block, in rule order
BLOCK_6_1 = {
    "tau1": "0.21132486540518711775",
    "tau2": "0.42759570120004222829",
    "tau3": "0.82792440129801198117",
    "w1": "0.23004836288935413032",
    "w2": "0.40614522687566702979",
    "w3": "0.36380641023497883991",
}
ASYM_4_0 = {
    "d1": "0.62315377486914955417",
    "d2": "0.09400351265623143607",
    "w1": "0.54454354031873739745",
    "w2": "0.45545645968126260255",
    "wM": "0.23570226039551584147",
}
ASYM_6_1 = {
    "d1": "0.38693556354866909100",
    "d2": "0.81587550281258499773",
    "w1": "0.43622310273429582467",
    "w2": "0.38934746132575016040",
    "w3": "0.34885887187990802985",
}


def record(n: int, description: str, failures: list[str]):
    status = "PASS" if not failures else "FAIL"
    line = f"[{n:2d}] {status} {description}"
    if failures:
        line += " :: " + "; ".join(failures)
    REPORT[n] = line
    print(line)
    assert not failures, line


def sig_digit_unit(ref: mpmath.mpf, digits: int = 20) -> mpmath.mpf:
    """One unit in the ``digits``-th significant digit of ``ref``."""
    return mpmath.mpf(10) ** (mpmath.floor(mpmath.log10(abs(ref))) - digits + 1)


def timed(fn, *args, **kwargs):
    t0 = time.perf_counter()
    out = fn(*args, **kwargs)
    return out, time.perf_counter() - t0


def table(name):
    with mpmath.workdps(DPS):
        return [(mpmath.mpf(a), mpmath.mpf(b)) for a, b in reference(name)]


@pytest.fixture(scope="module")
def rules():
    """All derivations used by the criteria, with their wall-clock times."""
    ext = HomotopyConfig(precision_mode="extended")
    out = {}
    with mpmath.workdps(DPS):
        out["6_1"] = timed(derive_rule, 6, 1, n_elements=16, domain=(0.0, 16.0))
        out["6_1x"] = timed(derive_rule, 6, 1, n_elements=16, domain=(0.0, 16.0), config=ext)
        out["4_0"] = timed(derive_rule, 4, 0, n_elements=32, domain=(0.0, 32.0))
        out["4_0x"] = timed(derive_rule, 4, 0, n_elements=32, domain=(0.0, 32.0), config=ext)
        out["nonuniform"] = timed(derive_rule, 6, 1, open_knots(6, 1, NONUNIFORM_BREAKPOINTS))
    return out


# -----------------------------------------------------------------------------
def test_criterion_01_block_6_1():
    failures = []
    rule, elapsed = timed(gauss_block_6_1)
    got = dict(zip(("tau1", "tau2", "tau3"), rule.nodes[:3]))
    got.update(zip(("w1", "w2", "w3"), rule.weights[:3]))
    for key, ref in BLOCK_6_1.items():
        err = abs(got[key] - float(ref)) / float(ref)
        if err > 1e-14:
            failures.append(f"double {key} rel err {err:.2e}")
    ext, elapsed_x = timed(gauss_block_6_1, extended=True)
    with mpmath.workdps(DPS):
        got = dict(zip(("tau1", "tau2", "tau3"), ext.nodes_mp[:3]))
        got.update(zip(("w1", "w2", "w3"), ext.weights_mp[:3]))
        for key, ref in BLOCK_6_1.items():
            r = mpmath.mpf(ref)
            if abs(got[key] - r) > sig_digit_unit(r):
                failures.append(f"extended {key} = {mpmath.nstr(got[key], 22)}")
    if max(elapsed, elapsed_x) >= 1.0:
        failures.append(f"runtime {max(elapsed, elapsed_x):.2f} s")
    record(1, "(6,1) two-element block: six reference values, double and 20 digits, < 1 s", failures)


def test_criterion_02_block_4_0():
    failures = []
    r = radau_block_4_0()
    s6, s174 = math.sqrt(6), math.sqrt(174)
    t, w = r.nodes, r.weights
    checks = {
        "tau1": (t[0], 2 / 5 - s6 / 10),
        "tau2": (t[1], 2 / 5 + s6 / 10),
        "w1": (w[0], 4 / 9 - s6 / 36),
        "w2": (w[1], 4 / 9 + s6 / 36),
        "rho": (w[0] * t[0] ** 4 + w[1] * t[1] ** 4, 4 / 45),
        "tau3": (t[2], 34 / 25 - s174 / 50),
        "tau4": (t[3], 34 / 25 + s174 / 50),
        "w5": (w[4], 4 / 17),
    }
    for key, (got, ref) in checks.items():
        if abs(got - ref) > 1e-14:
            failures.append(f"{key} err {abs(got - ref):.2e}")
    record(2, "(4,0) four-element Radau block: closed forms and residuum", failures)


def test_criterion_03_uniform_6_1(rules):
    failures = []
    (r, elapsed), (rx, _) = rules["6_1"], rules["6_1x"]
    ref = table("uniform_6_1_n16_half.csv")
    if r.m != 41:
        failures.append(f"{r.m} nodes")
    dbl = max(max(abs(float(a) - r.nodes[i]), abs(float(b) - r.weights[i])) for i, (a, b) in enumerate(ref))
    if dbl > 1e-13:
        failures.append(f"double max err {dbl:.2e}")
    with mpmath.workdps(DPS):
        ext = max(max(abs(a - rx.nodes_mp[i]), abs(b - rx.weights_mp[i])) for i, (a, b) in enumerate(ref))
    if ext > 1e-20:
        failures.append(f"extended max err {mpmath.nstr(ext, 3)}")
    norm = residual_norm(r)
    if norm > 1e-13:
        failures.append(f"norm {norm:.2e}")
    if elapsed >= 120:
        failures.append(f"runtime {elapsed:.1f} s")
    record(3, "uniform (6,1) N=16: 41 nodes, table to 1e-13 and 20 digits, norm, < 2 min", failures)


def test_criterion_04_uniform_4_0(rules):
    failures = []
    (r, elapsed), (rx, _) = rules["4_0"], rules["4_0x"]
    ref = table("uniform_4_0_n32_half.csv")
    if r.m != 65:
        failures.append(f"{r.m} nodes")
    err = max(max(abs(float(a) - r.nodes[i]), abs(float(b) - r.weights[i])) for i, (a, b) in enumerate(ref))
    if err > 1e-13:
        failures.append(f"max err {err:.2e}")
    if abs(r.weights[32] - math.sqrt(2) / 6) > 1e-13:
        failures.append(f"middle weight {r.weights[32]!r}")
    norm_x = residual_norm(rx)
    if norm_x > 1e-24:
        failures.append(f"extended norm {norm_x:.2e}")
    if elapsed >= 300:
        failures.append(f"runtime {elapsed:.1f} s")
    record(4, "uniform (4,0) N=32: 65 nodes, table to 1e-13, middle weight, extended norm, < 5 min",
           failures)


def test_criterion_05_nonuniform(rules):
    failures = []
    r, _ = rules["nonuniform"]
    ref = table("nonuniform_6_1.csv")
    if r.m != 21:
        failures.append(f"{r.m} nodes")
    err = max(max(abs(float(a) - r.nodes[i]), abs(float(b) - r.weights[i])) for i, (a, b) in enumerate(ref))
    if err > 1e-13:
        failures.append(f"max err {err:.2e}")
    record(5, "non-uniform (6,1): 21 nodes, table to 1e-13", failures)


def test_criterion_06_asymptotic():
    failures = []
    for name, asym, expected, system in (
        ("(4,0)", solve_asymptotic_4_0(), ASYM_4_0, asymptotic_system_4_0),
        ("(6,1)", solve_asymptotic_6_1(), ASYM_6_1, asymptotic_system_6_1),
    ):
        with mpmath.workdps(DPS):
            for key, val in asym.as_dict().items():
                if abs(val - mpmath.mpf(expected[key])) > 1e-14:
                    failures.append(f"{name} {key}")
            res = max(abs(v) for v in system(asym.d1, asym.d2, asym.w1, asym.w2))
        if res > 1e-14:
            failures.append(f"{name} residual {mpmath.nstr(res, 3)}")
    record(6, "asymptotic closed forms and system residuals to 1e-14", failures)


def test_criterion_07_boundary_depth(rules):
    failures = []
    got_4_0 = boundary_depth(rules["4_0x"][0], solve_asymptotic_4_0(), tol=1e-15)
    got_6_1 = boundary_depth(rules["6_1x"][0], solve_asymptotic_6_1(), tol=1e-15)
    if got_4_0 != 10:
        failures.append(f"(4,0) depth {got_4_0}")
    if got_6_1 != 5:
        failures.append(f"(6,1) depth {got_6_1}")
    record(7, "boundary depth 10 for (4,0) N=32 and 5 for (6,1) N=16 at 1e-15", failures)


def test_criterion_08_properties(rules):
    failures = []
    rng = np.random.default_rng(2024)
    for key in ("6_1", "6_1x", "4_0", "4_0x", "nonuniform"):
        r = rules[key][0]
        L = r.b - r.a
        if not np.all(r.weights > 0):
            failures.append(f"{key} non-positive weight")
        if abs(r.weights.sum() - L) > 1e-13 * L:
            failures.append(f"{key} weight sum {r.weights.sum()!r}")
        if (r.m, r.kind) != optimal_node_count(r.space):
            failures.append(f"{key} node count {r.m}")
        worst = 0.0
        for _ in range(50):
            c = rng.standard_normal(r.space.dimension)
            f = spline_function(r.space, c)
            err = abs(float(np.dot(r.weights, f(r.nodes))) - span_integral(r.space, f))
            worst = max(worst, err / np.linalg.norm(c))
        if worst > 1e-12:
            failures.append(f"{key} random-spline err {worst:.2e}")
    for d, c, n in ((6, 1, 16), (4, 0, 32)):
        base = rules[f"{d}_{c}"][0]
        scaled = derive_rule(d, c, n_elements=n, domain=(0.0, 1.0))
        mapped = affine_map(base, 0.0, 1.0)
        err = max(np.max(np.abs(scaled.nodes - mapped.nodes)), np.max(np.abs(scaled.weights - mapped.weights)))
        if err > 1e-14:
            failures.append(f"({d},{c}) affine err {err:.2e}")
    record(8, "positivity, mass, node count, 50 random splines, affine invariance", failures)


def test_criterion_09_cross_validation(rules):
    failures = []
    for key, asym, n in (("6_1", solve_asymptotic_6_1(), 16), ("4_0", solve_asymptotic_4_0(), 32)):
        ref = rules[key][0]
        out = compose_finite(asym, ref, n)
        if out.m != ref.m:
            failures.append(f"{key} {out.m} vs {ref.m} nodes")
            continue
        err = max(np.max(np.abs(out.nodes - ref.nodes)), np.max(np.abs(out.weights - ref.weights)))
        if err > 1e-12:
            failures.append(f"{key} err {err:.2e}")
    record(9, "composed and derived rules agree to 1e-12", failures)


def test_criterion_10_compare():
    failures = []
    buf = io.StringIO()
    with contextlib.redirect_stdout(buf):
        code = cli_main(["compare", "-d", "6", "-c", "1"])
    out = buf.getvalue()
    if code != 0:
        failures.append(f"exit code {code}")
    if "asymptotic nodes per element 2.5 vs 4 classical" not in out:
        failures.append("per-element line missing")
    try:
        ratio = float(out.split("asymptotic 3D ratio")[1].split()[0])
        if not 0.24 <= ratio <= 0.25:
            failures.append(f"3D ratio {ratio}")
    except (IndexError, ValueError):
        failures.append("3D ratio missing")
    record(10, "compare (6,1): 2.5 vs 4 nodes per element, 3D ratio in [0.24, 0.25]", failures)


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
