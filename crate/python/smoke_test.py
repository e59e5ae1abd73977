"""Smoke test for the bioflow extension module.

Build and install first:  pip install --no-build-isolation crates/python
"""

import csv
import io
import math
import os
import tempfile

import bioflow


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def main():
    transport = {r["biomass"]: r for r in rows(bioflow.table("transport"))}
    assert transport["rice_straw"]["unit_cost_thb_per_ton_km"] == "1.01", transport["rice_straw"]
    assert round(bioflow.unit_cost("rice straw"), 2) == 1.01
    assert round(bioflow.unit_cost("molasses"), 2) == 0.23

    biogas = {r["biomass"]: r for r in rows(bioflow.table("biogas"))}
    assert biogas["rice_husk"]["heat_equiv_mj_per_ton"] == "9.0830"

    try:
        bioflow.table("colors")
    except ValueError:
        pass
    else:
        raise AssertionError("unknown table accepted")

    km = bioflow.haversine_km(13.7563, 100.5018, 18.7883, 98.9853)
    assert abs(km - 582.4589) < 1e-3, km
    assert bioflow.output_per_ton("bagasse", 1, 1.0) > 0

    lp = bioflow.solve_lp(
        "BIOFLOW-LP 1\nVARS\nx\ny\nBOUNDS\nx 0 inf\ny 0 inf\nCONSTRAINTS\n"
        "c1: 1 x 2 y >= 4\nc2: 3 x 1 y >= 6\nOBJECTIVE\nminimize 1 x 1 y\nEND\n"
    )
    assert lp["status"] == "Optimal", lp
    assert math.isclose(lp["objective"], 2.8, rel_tol=1e-9), lp

    result = bioflow.run_scenario("mincost")
    assert result["status"] == "Optimal", result["status"]
    assert math.isclose(result["report"]["total_cost"], result["objective"], rel_tol=1e-9)

    suppliers, plants = bioflow.synth_csv(seed=3, suppliers=4, biomass=3, plants=5)
    with tempfile.TemporaryDirectory() as tmp:
        paths = [os.path.join(tmp, n) for n in ("suppliers.csv", "plants.csv")]
        for path, text in zip(paths, (suppliers, plants)):
            with open(path, "w", newline="") as f:
                f.write(text)
        potential = bioflow.run_scenario("potential", suppliers=paths[0], plants=paths[1])
    assert potential["status"] == "Optimal"

    print("python smoke test: ok (bioflow %s)" % bioflow.__version__)


if __name__ == "__main__":
    main()
