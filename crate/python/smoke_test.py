"""Smoke test for the nls4 Python extension.

Build first: `maturin develop --release -m crates/py/Cargo.toml`
"""

import math

import nls4


def main():
    grid = nls4.Grid(2, 32, 8.0)
    assert len(grid) == 32 * 32

    u0 = nls4.Field.gaussian(grid, 1.0, 1.2, velocity=[0.5, 0.0])
    assert u0.mass() > 0

    low = u0.project("at_most", 1.0)
    high = u0.project("above", 1.0)
    vals = [a + b - c for a, b, c in zip(low.values(), high.values(), u0.values())]
    assert max(abs(v) for v in vals) < 1e-12

    traj = nls4.evolve(u0, 0.2, dt=1e-3, sample_every=20, mu=0.0)
    assert len(traj) == 11
    assert traj.mass_drift() < 1e-10
    assert traj.energy_drift() < 1e-6
    lhs, rhs = traj.im4()
    assert lhs > 0 and rhs > 0

    w = nls4.WeightProfile(1.0, 2)
    assert w.w_r(0.5) == 1.0 and w.w_r(10.0) == 0.0
    assert w.w(0.5) == 0.5
    assert w.certify(1) < 50

    n0 = nls4.ScaleFunction("piecewise-linear", [0.0, 1.0, 2.0], [4.0, 1.0, 8.0], 3.0)
    n1 = n0.build_n1()
    n2 = n1.smooth(2)
    assert all(math.log2(v).is_integer() for v in n2.values())

    ok, line = nls4.check(4)
    print(line)
    assert ok
    print("smoke test passed")


if __name__ == "__main__":
    main()
