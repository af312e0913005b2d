"""Smoke test for the dilatation_lab extension module.

Build and install first:
    pip install --no-build-isolation ./crates/python
"""

import math

import dilatation_lab as dl


def main():
    p = dl.BumpProfile(0.01, 3)
    assert p.n == 3 and p.a == 0.01
    assert p.exact_coefficients()[1] == "5 - 12 ln2", p.exact_coefficients()
    assert abs(p.coefficients()[1] - (5 - 12 * math.log(2))) < 1e-12
    # outer piece is ln(1/r)
    r = 0.05
    assert abs(p(r) - math.log(1 / r)) < 1e-12
    assert p.n_laplacian(0.5 * p.a) <= 1e-9
    report = p.verify(samples=500)
    assert report["all_pass"], report
    assert all(c["pass"] for c in p.certify())

    searched = dl.BumpProfile.construct(0.01, 3)
    assert searched.n == 3
    try:
        dl.BumpProfile(0.5, 3)
    except ValueError:
        pass
    else:
        raise AssertionError("a = 0.5 must be rejected")

    w = dl.Mapping("winding:k=2")
    x = [0.3, 0.1]
    assert abs(w.dilatation(x) - 2.0) < 1e-8
    d = w.differential(x)
    assert d["jacobian"] > 0
    sq = dl.Mapping("squeeze:w=0.5")
    assert math.isinf(sq.dilatation([0.0, 0.3]))
    est = sq.zero_set_dimension(resolution=257)
    assert est["dimension"] >= 0.85, est

    assert dl.admissible_epsilon_exact(3, "3") == "1/4"
    assert abs(dl.hausdorff_bound(3, 0.25) - 0.75) < 1e-15
    assert abs(dl.target_radius() - math.exp(-math.e)) < 1e-15

    pts = [[t / 999, 0.5] for t in range(1000)]
    seg = dl.box_counting_dimension(pts, [0, 0], [1, 1], [1 / 8, 1 / 16, 1 / 32, 1 / 64])
    assert abs(seg["dimension"] - 1.0) < 0.15, seg

    sweep = dl.check_identity("winding:k=2", resolutions=[65, 129])
    assert sweep["reports"][1]["relative_residual"] < sweep["reports"][0]["relative_residual"]
    print("dilatation_lab", dl.__version__, "smoke test ok")


if __name__ == "__main__":
    main()
