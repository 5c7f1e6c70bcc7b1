"""Smoke test for the rpdhg_py extension module.

Build and install it first, e.g. ``maturin develop -m crates/py/Cargo.toml``
or ``pip install crates/py``, then run ``python python/smoke_test.py``.
"""

import math
import os

import rpdhg_py as rp

FIXTURES = os.path.join(os.path.dirname(__file__), "..", "crates", "core", "tests", "fixtures")


def main():
    lp = rp.Instance.family("family2", 0.1)
    out = rp.solve(lp, target="ed:1e-8")
    assert out["solution"]["status"] == "optimal_tol", out["solution"]["status"]
    print(f"family2 gamma=0.1: {out['stats']['total_steps']} steps, objective {out['solution']['objective']:.6g}")

    report = rp.analyze(rp.Instance.family("family3", 0.1))
    assert abs(report["mu_p"] - math.sin(0.1)) <= 1e-6
    print(f"family3 gamma=0.1: mu_p {report['mu_p']:.6g}, N {report['N_bound']:.4g}")

    mps = rp.Instance.from_mps(os.path.join(FIXTURES, "diet.mps"))
    pre, before, after = rp.precondition(mps, "complete")
    assert abs(after - 1.0) <= 1e-9
    sol = rp.solve(mps, target="er:1e-8", precondition="complete")
    print(f"diet.mps: kappa {before:.4g} -> {after:.4g}, objective {sol['solution']['objective_original']:.8g}")

    try:
        rp.solve(mps, target="ed:1e-8")
    except ValueError as e:
        print(f"rejected distance target on MPS input: {e}")
    else:
        raise AssertionError("expected ValueError")
    print("smoke test ok")


if __name__ == "__main__":
    main()
