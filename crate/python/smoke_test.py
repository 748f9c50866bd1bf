# Copyright 2026 The om-entangle Authors
# SPDX-License-Identifier: Apache-2.0

"""Quick end-to-end check of the om_entangle extension module.

Build it first, e.g.

    maturin develop --release -m crates/python/Cargo.toml
"""

import json
import math

import om_entangle as om


def close(a, b, tol):
    return abs(a - b) <= tol * max(1.0, abs(b))


def main():
    p = om.SystemParams.pulse_search()
    assert p.kappa["mw1"] > 0.0

    # a two-mode squeezed vacuum with r = 1
    r = 1.0
    s, c = math.sinh(r), math.cosh(r)
    e = om.logneg_from_moments(s * s, s * s, complex(0.0, -s * c))
    assert close(e, 2.0 * r / math.log(2.0), 1e-12), e
    assert close(om.r_from_ent(0.999), 3.80, 2e-3)

    # undamped squeezing alone is unstable, damping restores stability
    assert om.rh_metric(p.undamped(), 0.0, 1.0, 0.0, 0.0) > 0.0
    drives = om.DriveSchedule.reference()
    g = drives.values(0.0)
    assert om.rh_metric(p, *g) < 0.0

    vac = om.ThermalSpec()
    sp = om.spectrum(p, drives, vac, 1e6, 200)
    assert len(sp["omega"]) == 401
    assert 0.8 < sp["peak"][2] < 0.9, sp["peak"]

    ts = om.time_series(p, drives, vac, 1e-8, n_points=21, n_trotter=10, n_trap=3)
    assert len(ts["t"]) == 21
    assert ts["e_n"][0] == 0.0
    assert all(v < 0.0 for v in ts["s_rh"])

    rec = json.loads(om.search_spectral(p, vac, trials=8, seed=3, n=50))
    assert rec["version"] == 1 and rec["stats"]["trials"] == 8

    try:
        om.time_series(p, drives, vac, -1.0)
    except ValueError:
        pass
    else:
        raise AssertionError("negative horizon accepted")

    print(f"om_entangle {om.__version__}: smoke test passed (peak ent {sp['peak'][2]:.4f})")


if __name__ == "__main__":
    main()
