"""Properties every derived rule must satisfy, checked against independent oracles."""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gaussgalerkin import affine_map, derive_rule, optimal_node_count, verify
from gaussgalerkin.spline import KnotVector

from helpers import NONUNIFORM_BREAKPOINTS, derived, open_knots, span_integral, spline_function

CASES = [
    (6, 1, 4, None),
    (6, 1, 16, None),
    (4, 0, 3, None),
    (4, 0, 32, None),
    (4, 2, 4, None),
    (2, 0, 5, None),
    (8, 3, 4, None),
    (6, 1, None, NONUNIFORM_BREAKPOINTS),
]
IDS = [f"d{d}c{c}-" + (f"n{n}" if n else "nonuniform") for d, c, n, _ in CASES]


def rule_for(case):
    d, c, n, bp = case
    return derived(d, c, n, bp)


@pytest.fixture(params=CASES, ids=IDS)
def rule(request):
    return rule_for(request.param)


class TestRuleProperties:
    """Positivity, mass, node count and exactness on random splines."""

    def test_positive_weights(self, rule):
        assert np.all(rule.weights > 0)

    def test_weights_sum_to_length(self, rule):
        assert rule.weights.sum() == pytest.approx(rule.b - rule.a, abs=1e-13 * (rule.b - rule.a))

    def test_node_count_is_optimal(self, rule):
        m, kind = optimal_node_count(rule.space)
        assert rule.m == m and rule.kind == kind

    def test_nodes_inside_domain(self, rule):
        assert rule.a <= rule.nodes[0] and rule.nodes[-1] <= rule.b
        assert np.all(np.diff(rule.nodes) > 0)

    def test_random_splines(self, rule):
        """Fifty random coefficient vectors against per-span Gauss-Legendre."""
        rng = np.random.default_rng(8)
        for _ in range(50):
            coeffs = rng.standard_normal(rule.space.dimension)
            f = spline_function(rule.space, coeffs)
            q = float(np.dot(rule.weights, f(rule.nodes)))
            ref = span_integral(rule.space, f)
            assert abs(q - ref) <= 1e-12 * np.linalg.norm(coeffs) * max(1.0, rule.b - rule.a)


class TestAffineInvariance:
    """Deriving on a mapped domain gives the mapped rule."""

    @pytest.mark.parametrize("d, c, n", [(6, 1, 4), (4, 0, 3), (4, 2, 4), (8, 3, 4)])
    @pytest.mark.parametrize("domain", [(-3.0, 5.0), (2.5, 3.5)])
    def test_uniform(self, d, c, n, domain):
        ref = derived(d, c, n)
        got = derived(d, c, n, domain=domain)
        mapped = affine_map(ref, *domain)
        np.testing.assert_allclose(got.nodes, mapped.nodes, atol=1e-14 * (domain[1] - domain[0]))
        np.testing.assert_allclose(got.weights, mapped.weights, atol=1e-14 * (domain[1] - domain[0]))

    def test_nonuniform(self):
        ref = derived(6, 1, None, NONUNIFORM_BREAKPOINTS)
        scaled = tuple(0.25 * x - 1 for x in NONUNIFORM_BREAKPOINTS)
        got = derived(6, 1, None, scaled)
        np.testing.assert_allclose(got.nodes, 0.25 * ref.nodes - 1, atol=1e-14)
        np.testing.assert_allclose(got.weights, 0.25 * ref.weights, atol=1e-14)


@st.composite
def partitions(draw):
    """Random even-element partitions with bounded length ratios."""
    n = draw(st.sampled_from([2, 4]))
    gaps = draw(st.lists(st.floats(0.5, 2.0), min_size=n, max_size=n))
    return tuple(np.concatenate([[0.0], np.cumsum(gaps)]))


class TestRandomPartitions:
    """Derivations on random non-uniform knots."""

    @settings(max_examples=8, deadline=None)
    @given(partitions())
    def test_6_1(self, x):
        rule = derive_rule(6, 1, open_knots(6, 1, x))
        rep = verify(rule)
        assert rep.passed
        assert rule.weights.sum() == pytest.approx(x[-1], abs=1e-13 * x[-1])

    @settings(max_examples=8, deadline=None)
    @given(partitions())
    def test_4_0(self, x):
        rule = derive_rule(4, 0, KnotVector(x, (5,) + (4,) * (len(x) - 2) + (5,)))
        assert verify(rule).passed
