import math

import numpy as np
import pytest

import specfactor as sf


def test_estimate_recovers_three_factors():
    data = sf.generate_factor_data(snr=10, seed=2)
    assert data.shape == (100, 100)
    r = sf.estimate(data, surface=True)
    assert r["p_hat"] == 3
    assert 0 < r["phi_hat"] <= 1
    assert len(r["surface"]) == 21 * 100
    assert min(d for _, _, d in r["surface"]) == r["d_min"]


def test_model_density_sums_to_one_and_stops_at_edge():
    lo, hi = sf.model_support(1.0)
    assert lo == 0.0
    assert hi == pytest.approx(6.75)
    edges = np.linspace(0, 8, 81)
    e, mass = sf.model_density(1.0, edges)
    assert sum(mass) == pytest.approx(1.0)
    assert all(m == 0 for m, left in zip(mass, e) if left >= 6.75)


def test_js_against_marchenko_pastur():
    data = sf.generate_iid_check_data(640, 960)
    spectrum = sf.residual_spectrum(data, 4)
    c = 640 / 960
    top = 1.1 * max(max(spectrum), (1 + math.sqrt(c)) ** 2)
    edges = list(np.linspace(0, top, 101))
    _, a = sf.esd(spectrum, edges)
    _, b = sf.mp_density(c, edges)
    assert sf.js_divergence(edges, a, b) < 0.05


def test_sliding_windows_and_errors():
    data = sf.generate_factor_data(n=20, t=120, seed=3)
    series = sf.sliding_estimates(data, width=60, step=20, p_max=3)
    assert [w["end_index"] for w in series] == [60, 80, 100, 120]
    with pytest.raises(sf.ConfigError):
        sf.sliding_estimates(data, width=10)
    with pytest.raises(sf.DataError):
        sf.estimate(np.ones((5, 40)))
    with pytest.raises(ValueError):
        sf.generate_factor_data(gamma=0.1, snr=10)
