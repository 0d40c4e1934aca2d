import json
import math
from pathlib import Path

import numpy as np
import pytest

import loctime

CONFIGS = Path(__file__).resolve().parents[2] / "configs"


def test_lazy_walk_basics():
    lazy = loctime.models.lazy_walk()
    assert lazy.size == 3
    np.testing.assert_allclose(lazy.stationary, [0.25, 0.5, 0.25], atol=1e-15)
    assert loctime.asymptotic_variance(lazy) == pytest.approx(0.5, abs=1e-12)
    law = loctime.exact_law(lazy, 2)
    assert law["marginals"][2 - law["support_min"] - 2] == pytest.approx(0.375)
    assert loctime.law_via_inversion(lazy, 2, 0) == pytest.approx(0.375, abs=1e-8)


def test_build_chain_errors_surface():
    with pytest.raises(loctime.LoctimeError, match="NotMixing"):
        loctime.build_chain(np.eye(2), [1, -1])
    with pytest.raises(loctime.LoctimeError, match="MeanNotZero"):
        loctime.build_chain(np.full((2, 2), 0.5), [1, 0])


def test_chain_json_round_trip():
    circ = loctime.models.circulant_walk()
    back = loctime.load_chain(circ.to_json())
    np.testing.assert_array_equal(back.transition, circ.transition)
    assert loctime.load_chain_file(CONFIGS / "lazy_walk.json").observable == [-1, 0, 1]


def test_spectral_and_aperiodicity():
    pm = loctime.models.plus_minus_walk()
    rep = loctime.check_aperiodicity(pm, 256)
    assert not rep["is_aperiodic"]
    assert abs(rep["offending_t"] - math.pi) <= 2 * math.pi / 256
    branch = loctime.eigen_branch(loctime.models.lazy_walk(), loctime.uniform_frequency_grid(33))
    assert branch["lambda"][16] == pytest.approx(1.0)


def test_local_time_and_moduli():
    f = loctime.local_time_field([0, 0, 0, 0])
    assert f.counts == [5]
    assert f.value(0.0) == pytest.approx(2.5)
    paths = loctime.sample_paths(loctime.models.lazy_walk(), 400, 3, seed=1)
    assert paths.shape == (3, 400)
    field = loctime.local_time_field(paths[0].tolist())
    assert field.total() == 401
    omega, omega_prime = loctime.modulus(field, 2.0, 0.1)
    assert omega_prime <= omega
    occ = loctime.occupation(paths[1].tolist(), -0.5, 0.5)
    assert occ["within_bound"]


def test_moments_and_ks_are_deterministic():
    lazy = loctime.models.lazy_walk()
    a = loctime.moment_statistics(lazy, 100, 0, 1, 10000, seed=3)
    b = loctime.moment_statistics(lazy, 100, 0, 1, 10000, seed=3, threads=2)
    assert a == b
    assert set(a) >= {"n", "x", "y", "m6", "rhs", "ratio", "tails"}
    s = loctime.level_samples(lazy, 400, 0.0, 2000, seed=4)
    assert s == sorted(s)
    cdf = loctime.levy_reference_cdf(1.0)
    assert cdf(1.0) == pytest.approx(0.682689492, abs=1e-9)
    assert loctime.ks_statistic([0.0], cdf) == pytest.approx(1.0)
    assert 0.0 <= loctime.ks_statistic(s, loctime.levy_reference_cdf(0.5)) <= 1.0


def test_run_experiment(tmp_path):
    config = {
        "chain_file": str(CONFIGS / "lazy_walk.json"),
        "n_values": [64, 128],
        "sample_counts": [200],
        "seed": 5,
        "x_levels": [0],
        "y_levels": [1],
        "intervals": [[-0.5, 0.5]],
        "eps_grid": [0.5],
        "delta_grid": [0.2, 0.1],
        "output_dir": str(tmp_path / "out"),
        "checks": ["spectral", "exact-law", "occupation"],
    }
    path = tmp_path / "config.json"
    path.write_text(json.dumps(config))
    report = loctime.run_experiment(path)
    status = {c["name"]: c["status"] for c in report["checks"]}
    assert status["spectral"] == "pass"
    assert status["exact-law"] == "pass"
    assert status["moments"] == "skipped"
    assert (tmp_path / "out" / "report.json").exists()
