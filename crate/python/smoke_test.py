"""Smoke test for the psdpencil_py extension module.

Build and install first:
    maturin build --release -m crates/python/Cargo.toml -o dist
    pip install dist/psdpencil_py-*.whl
"""

import math
import sys

import psdpencil_py as pp


def close(x, y, tol=1e-8):
    return abs(x - y) <= tol * (1 + abs(y))


def main():
    r = pp.psd_interval([[-1, 0], [0, 2]], [[1, 0], [0, -1]])
    assert r["interval"] == {"kind": "closed", "lo": 1.0, "hi": 2.0}, r
    assert r["path"] == "sdc_nonsingular"

    r = pp.psd_interval([[1, 0], [0, -1]], [[0, 1], [1, 0]])
    assert r["interval"]["kind"] == "empty" and r["sdc"] == "not_sdc", r

    s = pp.is_sdc([[1, 0], [0, 2]], [[2, 1], [1, 3]])
    assert s["verdict"] == "sdc" and s["route"] == "b_inverse_a", s

    # min x^2 - 4x  s.t.  x^2 - 1 <= 0  ->  x = 1, mu = 1, f = -3
    out = pp.solve([[1]], [[1]], [-2], [0], -1)
    assert out["tag"] == "optimal", out
    cert = out["certificate"]
    assert close(cert["x"][0], 1) and close(cert["mu"], 1) and close(out["objective"], -3), out

    for kind in ["interior_mu", "boundary_mu", "singleton_mu", "reducible_singular"]:
        p = pp.plant_instance(11, 5, kind)
        inst = p["instance"]
        out = pp.solve(inst["A"], inst["B"], inst["a"], inst["b"], inst["c"])
        assert out["tag"] == "optimal", (kind, out["tag"])
        scale = 1 + abs(p["ref_objective"])
        assert abs(out["objective"] - p["ref_objective"]) <= 1e-6 * scale, kind
        k = pp.check_kkt(inst["A"], inst["B"], inst["a"], inst["b"], inst["c"], p["ref_x"], p["ref_mu"])
        assert k["r_stationarity"] < 1e-8 and k["psd_margin"] > -1e-8, (kind, k)

    u = pp.plant_instance(3, 4, "unbounded")["instance"]
    assert pp.solve(u["A"], u["B"], u["a"], u["b"], u["c"])["tag"] == "unbounded"

    sc = pp.scan_interval([[-1, 0], [0, 2]], [[1, 0], [0, -1]], lo=0, hi=3, steps=301)
    e = sc["empirical_interval"]
    assert e["kind"] == "closed" and math.isclose(e["lo"], 1) and math.isclose(e["hi"], 2), e

    try:
        pp.psd_interval([[0, 1], [0, 0]], [[1, 0], [0, 1]])
    except ValueError:
        pass
    else:
        raise AssertionError("asymmetric input accepted")
    try:
        pp.is_sdc([[1, 0], [0, 1]], [[1, 0], [0, 1e-7]])
    except pp.AmbiguousError:
        pass
    else:
        raise AssertionError("ambiguous input decided")
    try:
        pp.solve([[1]], [[1]], [-2], [0], -1, max_iter=1, tol_g=1e-15)
    except pp.ConvergenceError:
        pass

    print("smoke test ok")
    return 0


if __name__ == "__main__":
    sys.exit(main())
