"""Smoke test for the Python bindings; run after `maturin develop`."""

import json
import math

import quadsurf_py as qs

CONFIG = {
    "grid": {"box": [-3, -3, 3, 3], "n": 64},
    "f": {"pieces": [{"shape": {"disk": {"center": [0, 0], "radius": 0.5}}, "value": 4}]},
    "g": {"kind": "constant", "k": 0.25},
    "certificates": {"eigenvalue": False},
}


def main():
    assert qs.radial_qs_radius(4.0, 0.5, 0.25) == 2.0
    p = qs.radial_poisson(1.0, 1.0, 1.0)
    assert abs(p["u0"] - 0.25) < 1e-12 and abs(p["integral"] - math.pi / 8) < 1e-12
    assert abs(qs.radial_bilap_g(1.0, 1.0, 1.0) - 1 / 32) < 1e-12
    assert qs.means_chain([1.0, 2.0, 4.0])["ordered"]

    reports = qs.check(json.dumps(CONFIG))
    by_id = {r["id"]: r for r in reports}
    assert by_id["qs_sufficient"]["verdict"] == "fires"

    report = qs.solve(json.dumps(CONFIG))
    assert report["status"] == "converged", report["status"]
    assert abs(report["mean_radius"] - 2.0) < 0.2

    try:
        qs.solve(json.dumps({**CONFIG, "bogus": 1}))
    except ValueError:
        pass
    else:
        raise AssertionError("unknown key accepted")
    print(f"ok: {len(reports)} certificates, radius {report['mean_radius']:.4f}")


if __name__ == "__main__":
    main()
