import json
import math

import numpy as np
import pytest

import weightlab as wl


def test_hl_maximal_of_indicator_decays_like_one_over_x():
    g = wl.Grid(n=1, N=256, L=4.0)
    x = np.array(g.coords())
    f = ((x > 0) & (x < 1)).astype(float)
    m = wl.maximal_hl(g, f)
    tail = x > 1
    assert np.max(np.abs(m[tail] - 1 / x[tail])) <= g.h


def test_lorentz_of_indicator_is_measure_power():
    g = wl.Grid(N=128)
    x = np.array(g.coords())
    f = ((x > 0) & (x < 1)).astype(float)
    assert wl.lorentz_norm(g, f, 2.0, math.inf) == pytest.approx(1.0, rel=1e-12)
    assert wl.lebesgue_norm(g, f, 2.0, wl.Weight.power(1.0)) == pytest.approx(math.sqrt(0.5), rel=1e-12)


def test_ap_trends():
    g = wl.Grid(N=256)
    assert wl.ap_trend(wl.Weight.power(0.5), 2.0, g)[0] == "bounded"
    assert wl.ap_trend(wl.Weight.power(1.5), 2.0, g)[0] == "diverging"


def test_probe_is_deterministic():
    a = wl.probe_json("identity", {"ladder": "32,64"})
    assert a == wl.probe_json("identity", {"ladder": "32,64"})
    report = wl.probe("identity", ladder="32,64")
    assert report["trend"] == json.loads(a)["trend"]
    assert "identity" in wl.probe_tags()


def test_errors_map_to_python():
    with pytest.raises(ValueError):
        wl.probe("t36", kappa=1.5)
    with pytest.raises(ValueError):
        wl.maximal_hl(wl.Grid(N=64), np.zeros(10))
    code, _, err = wl.run_cli(["probe", "--frobnicate"])
    assert code == 2 and "Usage" in err
