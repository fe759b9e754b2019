"""Smoke test for the perfhom extension module.

Build and install first, e.g. `maturin develop --release` or
`pip install .` from the repository root, then run this script.
"""

import math

import perfhom


def main():
    p = 4.0 / 3.0
    formula = perfhom.ball_capacity_formula(p)
    assert abs(formula - math.pi * 4.0 ** (1.0 / 3.0)) < 1e-9, formula

    w = perfhom.energy_density([[0.3, 0.0], [0.0, 0.0]], p=1.5)
    assert abs(w - 0.3 ** 1.5) < 1e-6, w
    assert perfhom.energy_density([[1.0, 0.0], [0.0, 1.0]], model="neo_hookean") == 0.0

    value, csv = perfhom.capacity("boundary_segment", 1.5, 32)
    assert 1.5 < value < 1.7, value
    assert csv.startswith("R,")

    assert "bvp1" in perfhom.default_config("bvp1")

    out = perfhom.ladder(overrides=["eps_ladder=0.25,0.125"])
    assert len(out["rows"]) == 3, out["rows"]
    assert all(r["ok"] for r in out["rows"])
    assert out["gaps_decrease"]
    print(out["csv"], end="")

    try:
        perfhom.ladder(overrides=["p=3"])
    except ValueError as err:
        print("rejected:", err)
    else:
        raise AssertionError("p=3 accepted")

    print("ok")


if __name__ == "__main__":
    main()
