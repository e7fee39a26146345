"""Tests for the directly solved building blocks."""
import time

import mpmath
import numpy as np
import pytest

from gaussgalerkin.blocks import (
    SEXTIC_6_1,
    BlockSpec,
    DerivationError,
    augmented_element_rule,
    gauss_block_6_1,
    radau_4_0_closed_form,
    radau_block_4_0,
    solve_block,
)
from gaussgalerkin.quadrature import GAUSS, RADAU, verify

# 20-digit reference values of the (6, 1) block that the solver must reproduce
BLOCK_6_1 = {
    "tau2": "0.42759570120004222829",
    "tau3": "0.82792440129801198117",
    "w1": "0.23004836288935413032",
    "w2": "0.40614522687566702979",
    "w3": "0.36380641023497883991",
}


class TestBlockSpec:
    """Parity rules of block specifications."""

    def test_kind_follows_parity(self):
        assert BlockSpec(6, 1, 2, GAUSS).space().dimension == 12
        with pytest.raises(ValueError):
            BlockSpec(6, 1, 2, RADAU)
        with pytest.raises(ValueError):
            BlockSpec(4, 0, 2, GAUSS)

    def test_rejects_odd_degree(self):
        with pytest.raises(ValueError):
            BlockSpec(5, 1, 2, GAUSS)


class TestGaussBlock61:
    """The six-node (6, 1) block."""

    def test_reference_values(self):
        r = gauss_block_6_1()
        got = {"tau2": r.nodes[1], "tau3": r.nodes[2], "w1": r.weights[0],
               "w2": r.weights[1], "w3": r.weights[2]}
        for key, ref in BLOCK_6_1.items():
            assert got[key] == pytest.approx(float(ref), rel=1e-14), key

    def test_first_node_is_sextic_root(self):
        """The first node solves the univariate reduction."""
        r = gauss_block_6_1(extended=True)
        with mpmath.workdps(40):
            p = mpmath.polyval(SEXTIC_6_1[::-1], r.nodes_mp[0])
            assert abs(p) < mpmath.mpf(10) ** -30
        assert 0 < r.nodes[0] < r.nodes[1]

    def test_extended_digits(self):
        r = gauss_block_6_1(extended=True)
        got = {"tau2": r.nodes_mp[1], "tau3": r.nodes_mp[2], "w1": r.weights_mp[0],
               "w2": r.weights_mp[1], "w3": r.weights_mp[2]}
        with mpmath.workdps(40):
            for key, ref in BLOCK_6_1.items():
                # the last reference digit carries a rounding error of up to two units
                assert abs(got[key] - mpmath.mpf(ref)) <= mpmath.mpf("3e-20"), key

    def test_symmetric_and_exact(self):
        r = gauss_block_6_1()
        np.testing.assert_allclose(r.nodes + r.nodes[::-1], 2.0, atol=1e-15)
        np.testing.assert_allclose(r.weights, r.weights[::-1], atol=1e-15)
        rep = verify(r)
        assert rep.passed and rep.max_residual <= 1e-13

    def test_runtime(self):
        t0 = time.perf_counter()
        gauss_block_6_1(extended=True)
        assert time.perf_counter() - t0 < 1.0


class TestRadauBlock40:
    """The nine-node (4, 0) block."""

    def test_closed_forms(self):
        r = radau_block_4_0()
        s6, s174 = np.sqrt(6), np.sqrt(174)
        expected_t = [2 / 5 - s6 / 10, 2 / 5 + s6 / 10, 34 / 25 - s174 / 50, 34 / 25 + s174 / 50, 2.0]
        expected_w = [4 / 9 - s6 / 36, 4 / 9 + s6 / 36, 76 / 153 - 7 * s174 / 1972,
                      76 / 153 + 7 * s174 / 1972, 4 / 17]
        np.testing.assert_allclose(r.nodes[:5], expected_t, atol=1e-14)
        np.testing.assert_allclose(r.weights[:5], expected_w, atol=1e-14)

    def test_residuum(self):
        cf = radau_4_0_closed_form()
        with mpmath.workdps(40):
            rho = cf["w1"] * cf["tau1"] ** 4 + cf["w2"] * cf["tau2"] ** 4
            assert abs(rho - mpmath.mpf(4) / 45) < 1e-35
            assert abs(cf["rho"] - mpmath.mpf(4) / 45) < 1e-35

    def test_pinned_centre(self):
        r = radau_block_4_0()
        assert r.kind == RADAU and r.pinned_index == 4 and r.m == 9
        assert verify(r).passed

    def test_extended(self):
        r = radau_block_4_0(extended=True)
        assert verify(r).norm < 1e-35


class TestSolveBlock:
    """The generic symmetric block solver."""

    def test_matches_6_1(self):
        a = solve_block(BlockSpec(6, 1, 2, GAUSS))
        b = gauss_block_6_1()
        np.testing.assert_allclose(a.nodes, b.nodes, atol=1e-14)
        np.testing.assert_allclose(a.weights, b.weights, atol=1e-14)

    def test_matches_4_0(self):
        a = solve_block(BlockSpec(4, 0, 4, RADAU))
        b = radau_block_4_0()
        np.testing.assert_allclose(a.nodes, b.nodes, atol=1e-14)
        np.testing.assert_allclose(a.weights, b.weights, atol=1e-14)

    def test_radau_two_elements(self):
        r = solve_block(BlockSpec(4, 0, 2, RADAU))
        assert r.m == 5 and r.nodes[2] == 1.0
        rep = verify(r)
        assert rep.passed and rep.max_residual <= 1e-13

    @pytest.mark.parametrize("d, c", [(4, 1), (8, 3), (2, 1), (6, 3)])
    def test_other_pairs(self, d, c):
        r = solve_block(BlockSpec(d, c, 2, GAUSS))
        assert verify(r).passed

    def test_dimension_limit(self):
        with pytest.raises(DerivationError):
            solve_block(BlockSpec(6, 0, 4, RADAU))


class TestAugmentedElement:
    """Base rule of the augmented recursion."""

    def test_quartic_is_gauss_legendre(self):
        """With the extra knot at the centre the quartic rule is 3-point Gauss-Legendre."""
        r = augmented_element_rule(4)
        x, w = np.polynomial.legendre.leggauss(3)
        np.testing.assert_allclose(r.nodes, 0.5 * (x + 1), atol=1e-14)
        np.testing.assert_allclose(r.weights, 0.5 * w, atol=1e-14)

    @pytest.mark.parametrize("d", [2, 4, 6, 8])
    def test_exact(self, d):
        r = augmented_element_rule(d)
        assert r.m == d // 2 + 1 and verify(r).passed

    def test_odd_degree(self):
        with pytest.raises(ValueError):
            augmented_element_rule(3)
