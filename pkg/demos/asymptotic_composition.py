"""
Build long uniform rules from boundary blocks and the periodic pattern.

Far from the ends an optimal rule on a uniform mesh repeats a fixed
pattern. Once the boundary influence is measured on a moderate mesh, rules
for any longer mesh follow without another continuation run.
"""
import time

import mpmath

from gaussgalerkin import (
    HomotopyConfig,
    boundary_depth,
    compose_finite,
    derive_rule,
    solve_asymptotic_6_1,
    verify,
)


def main():
    asym = solve_asymptotic_6_1()
    print("periodic pattern for degree 6, continuity 1 (unit elements)")
    for key, val in asym.as_dict().items():
        print(f"  {key:<3} {mpmath.nstr(val, 20)}")

    boundary = derive_rule(6, 1, n_elements=16, config=HomotopyConfig(precision_mode="extended"))
    depth = boundary_depth(boundary, asym)
    print(f"boundary influence reaches {depth} elements into the mesh")

    for n in (64, 256):
        t0 = time.perf_counter()
        rule = compose_finite(asym, boundary, n)
        rep = verify(rule)
        print(f"N={n:<4} {rule.m} nodes, {rule.m / n:.3f} per element, "
              f"max residual {rep.max_residual:.1e}, {time.perf_counter() - t0:.2f} s")


if __name__ == "__main__":
    main()
