"""Smoke test for the `wgfem` extension module.

Build and install first:  pip install --no-build-isolation ./crates/python
"""

import math
import os
import tempfile

import wgfem


def check(cond, msg):
    if not cond:
        raise AssertionError(msg)
    print(f"ok  {msg}")


def main():
    nodes, weights = wgfem.gauss_legendre(4)
    check(abs(sum(weights) - 1.0) < 1e-14, "gauss weights sum to one")
    check(abs(sum(w * x**7 for x, w in zip(nodes, weights)) - 1 / 8) < 1e-14, "4-point rule integrates t^7")

    annulus = wgfem.Mesh.generate("annulus", 2)
    report = annulus.validate()
    check(report["elements"] == annulus.num_elements, f"validated {annulus!r}")
    check(abs(annulus.area - math.pi * 0.84) < 1e-10, "annulus area")
    area = sum(annulus.moments(e, 0)[0][2] for e in range(annulus.num_elements))
    check(abs(area - annulus.area) < 1e-12, "zeroth moments add up to the area")

    with tempfile.TemporaryDirectory() as tmp:
        path = os.path.join(tmp, "annulus.wgmesh")
        annulus.write(path)
        again = wgfem.Mesh.read(path)
        check(again.num_edges == annulus.num_edges, "mesh file round trip")

    patch = wgfem.solve("patch", 4, 2, variant="straight")
    errs = patch.errors()
    check(max(errs.values()) <= 1e-9, f"linear patch solution exact: {max(errs.values()):.2e}")
    check(len(patch.coefficients()) >= patch.dofs, "coefficient vector covers free dofs")
    check(patch.samples_csv().startswith("x,y,u0\n"), "sample csv header")

    table = wgfem.study("curved_quad", [8, 16], 2)
    rows = [line.split(",") for line in table.strip().splitlines()]
    rate = float(rows[2][4])
    check(rows[0][0] == "level" and rate > 1.8, f"P2 energy rate {rate:.2f}")

    try:
        wgfem.solve("curved_quad", 8, 3, maxiter=2)
    except RuntimeError as e:
        check("converge" in str(e), "non-convergence raises RuntimeError")
    else:
        raise AssertionError("expected RuntimeError")

    try:
        wgfem.Mesh.generate("disk", 1)
    except ValueError:
        check(True, "unknown case raises ValueError")
    else:
        raise AssertionError("expected ValueError")

    print("smoke test passed")


if __name__ == "__main__":
    main()
