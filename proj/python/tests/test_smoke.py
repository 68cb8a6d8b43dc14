import math
import os

import numpy as np
import pytest

import thinfilm

SMALL = dict(
    mesh__nx=4,
    mesh__ny=4,
    mesh__layers=2,
    epsilons=[1, 0.5],
    restarts=1,
    restarts3d=1,
    load="constant 0,0,10",
)


def test_version():
    assert thinfilm.version().count(".") == 2


def test_reduced_density_quadratic():
    fbar = np.array([[1.0, 0.0], [0.0, 2.0], [0.5, 0.0]])
    value, argmin, certified = thinfilm.reduced_density("isotropic-quadratic alpha=2", fbar)
    assert value == pytest.approx(2 * 5.25)
    assert np.allclose(argmin, 0)
    assert certified


def test_two_well_laminate_vanishes_between_wells():
    wells = "two-well alpha=1 plus=1,0,0,0,0,0,0,0,0 minus=-1,0,0,0,0,0,0,0,0"
    assert thinfilm.laminate_upper(wells, np.zeros((3, 2)), 1, (0.5, 4, 2)) == 0.0


def test_planar_surface_envelope_below_reduction():
    angles = np.linspace(0, 2 * math.pi, 37)
    table = thinfilm.planar_surface("weighted-quadratic weights=1,2,4", angles, 720)
    assert table.shape == (37, 2)
    assert np.all(table[:, 1] <= table[:, 0] * (1 + 1e-4))
    assert np.all(table[:, 1] >= 1 / 2 - 1e-12)


def test_sweep_small_passes_and_is_deterministic():
    a = thinfilm.sweep(**SMALL)
    b = thinfilm.sweep(**SMALL)
    assert a["verdict"]["passed"]
    assert [e["energy"]["total"] for e in a["entries"]] == [e["energy"]["total"] for e in b["entries"]]
    for e in a["entries"]:
        en = e["energy"]
        assert en["total"] == pytest.approx(en["bulk"] - en["load"] + en["perimeter"], abs=1e-12)


def test_solve_limit_returns_balanced_layout():
    r = thinfilm.solve_limit(**SMALL)
    assert r["phase"].shape == (4, 4)
    assert r["phase"].sum() == 8
    assert r["total"] == pytest.approx(r["energy"]["total"])


def test_solve_slab_shape():
    r = thinfilm.solve_slab(eps=0.5, **SMALL)
    assert r["phase"].shape == (8, 4)
    assert r["diagnostics"]["u_norm"] >= 0


def test_config_errors_raise():
    with pytest.raises(thinfilm.ConfigError):
        thinfilm.sweep(mesh__nx=1)
    with pytest.raises(ValueError):
        thinfilm.solve_limit(**{"lambda": 0.3})


def test_verdict():
    assert thinfilm.sweep_verdict([1.0, 0.5], -10.0) == (True, True, 0.05)
    passed, monotone, _ = thinfilm.sweep_verdict([1.0, 2.0], -10.0)
    assert not passed and not monotone


@pytest.mark.skipif("THINFILM_CONFIGS" not in os.environ, reason="config directory unknown")
def test_shipped_config_parses():
    path = os.path.join(os.environ["THINFILM_CONFIGS"], "kohn_strang.cfg")
    r = thinfilm.envelope(path, envelope__grid=3, envelope__laminate_depth=1)
    assert r["slices"][0]["closed_form"]
    assert r["slices"][0]["max_closed_form_deviation"] <= 1e-6
