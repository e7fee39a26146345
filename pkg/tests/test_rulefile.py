"""Tests for the rule document format and knot files."""
import json
from fractions import Fraction

import mpmath
import numpy as np
import pytest

from gaussgalerkin.blocks import gauss_block_6_1, radau_block_4_0
from gaussgalerkin.rulefile import (
    RuleFile,
    RuleFileError,
    format_decimal,
    load,
    load_knots,
    save,
)


class TestFormatDecimal:
    """Decimal rendering."""

    def test_float_round_trips(self):
        v = 0.1 + 0.2
        assert float(format_decimal(v)) == v

    def test_mpf_digits(self):
        with mpmath.workdps(40):
            assert format_decimal(mpmath.sqrt(2), 20) == "1.4142135623730950488"


class TestRoundTrip:
    """Writing and reading rule documents."""

    def test_double_rule_is_bit_identical(self, tmp_path):
        r = gauss_block_6_1()
        save(RuleFile.from_rule(r, 1), tmp_path / "r.json")
        back = load(tmp_path / "r.json").to_rule()
        assert np.array_equal(back.nodes, r.nodes) and np.array_equal(back.weights, r.weights)
        assert back.kind == r.kind and back.space.knots == r.space.knots

    def test_extended_rule_keeps_digits(self, tmp_path):
        r = gauss_block_6_1(extended=True)
        save(RuleFile.from_rule(r, 1), tmp_path / "r.json")
        back = load(tmp_path / "r.json").to_rule()
        assert back.extended
        with mpmath.workdps(40):
            assert max(abs(a - b) for a, b in zip(back.nodes_mp, r.nodes_mp)) <= mpmath.mpf(10) ** -38

    def test_radau_metadata(self, tmp_path):
        r = radau_block_4_0()
        rf = RuleFile.from_rule(r, 0)
        assert rf.metadata["kind"] == "GaussRadau"
        back = RuleFile.loads(rf.dumps()).to_rule()
        assert back.pinned_index == r.pinned_index

    def test_companion_csv(self, tmp_path):
        r = gauss_block_6_1()
        paths = save(RuleFile.from_rule(r, 1), tmp_path / "r.json")
        assert [p.suffix for p in paths] == [".json", ".csv"]
        lines = paths[1].read_text().splitlines()
        assert lines[0] == "node,weight" and len(lines) == r.m + 1

    def test_metadata_fields(self):
        meta = RuleFile.from_rule(gauss_block_6_1(), 1).metadata
        assert {"degree", "continuity", "elements", "domain", "knots", "kind",
                "precision_mode", "residual_norm", "generator"} <= meta.keys()
        assert meta["generator"].startswith("gaussgalerkin ")

    def test_asymptotic_constants_are_strings(self):
        with mpmath.workdps(40):
            rf = RuleFile.from_rule(gauss_block_6_1(), 1, {"d1": mpmath.mpf(1) / 3})
        assert rf.asymptotic["d1"].startswith("0.3333333333")
        assert json.loads(rf.dumps())["asymptotic"] == rf.asymptotic


class TestMalformed:
    """Rejection of broken documents."""

    @pytest.mark.parametrize("text", [
        "not json",
        "[]",
        '{"metadata": {}, "nodes": []}',
        '{"metadata": {}, "nodes": [0.5], "weights": ["1"]}',
    ])
    def test_structure(self, text):
        with pytest.raises(RuleFileError):
            RuleFile.loads(text)

    def test_missing_knots(self):
        rf = RuleFile({"degree": 2}, ["0.5"], ["1"])
        with pytest.raises(RuleFileError):
            rf.to_rule()

    def test_length_mismatch(self):
        rf = RuleFile.from_rule(gauss_block_6_1(), 1)
        rf.weights.pop()
        with pytest.raises(RuleFileError):
            rf.to_rule()

    def test_bad_number(self):
        rf = RuleFile.from_rule(gauss_block_6_1(), 1)
        rf.nodes[0] = "zero point one"
        with pytest.raises(RuleFileError):
            rf.to_rule()

    def test_missing_file(self, tmp_path):
        with pytest.raises(RuleFileError):
            load(tmp_path / "absent.json")


class TestKnotFile:
    """Breakpoint input."""

    def test_fractions_and_defaults(self, tmp_path):
        p = tmp_path / "k.json"
        p.write_text(json.dumps({"breakpoints": [0, "1/2", 1, "3/2", 2]}))
        kv = load_knots(p, 6, 1)
        assert kv.partition == (0.0, 0.5, 1.0, 1.5, 2.0)
        assert kv.multiplicities == (7, 5, 5, 5, 7)

    def test_plain_list(self, tmp_path):
        p = tmp_path / "k.json"
        p.write_text("[0, 1, 3]")
        assert load_knots(p, 4, 0).multiplicities == (5, 4, 5)

    def test_fraction_value_is_exact_double(self, tmp_path):
        p = tmp_path / "k.json"
        p.write_text(json.dumps(["0", "1/3", "1"]))
        assert load_knots(p, 4, 0).partition[1] == float(Fraction(1, 3))

    @pytest.mark.parametrize("doc", [
        {"breakpoints": [0, 2, 1]},
        {"breakpoints": [0]},
        {"points": [0, 1]},
        {"breakpoints": [0, 1, 2], "multiplicities": [7, 4, 7]},
    ])
    def test_rejects(self, tmp_path, doc):
        p = tmp_path / "k.json"
        p.write_text(json.dumps(doc))
        with pytest.raises(RuleFileError):
            load_knots(p, 6, 1)
