"""
Derive, check and export a rule on a graded mesh.

The continuation starts from two-element blocks, merges them and slides
the knots into place. The resulting rule is written as JSON with a CSV
companion and read back for verification.
"""
import tempfile
from pathlib import Path

import numpy as np

from gaussgalerkin import HomotopyConfig, KnotVector, RuleFile, derive_rule, load, save, verify

BREAKPOINTS = (0.0, 0.5, 1.0, 1.5, 2.0, 3.0, 4.0, 6.0, 8.0)


def main():
    m = (7,) + (5,) * (len(BREAKPOINTS) - 2) + (7,)
    steps = []
    rule = derive_rule(6, 1, KnotVector(BREAKPOINTS, m), HomotopyConfig(steps=100), log=steps.append)
    print(f"{len(steps)} continuation steps, {rule.m} nodes")
    for t, w in zip(rule.nodes, rule.weights):
        print(f"  {t:22.17f} {w:22.17f}")

    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "graded.json"
        written = save(RuleFile.from_rule(rule, 1), path)
        back = load(path).to_rule()
        rep = verify(back)
        print("wrote", ", ".join(p.name for p in written))
        print(f"reloaded rule: identical {np.array_equal(back.nodes, rule.nodes)}, "
              f"exact {rep.exact}, optimal {rep.optimal}")


if __name__ == "__main__":
    main()
