import math

import pytest

import orbitmatch as om


def test_dna_pair():
    x = "ACAATGAGAGGATGACCTTG"
    y = "TGACTGTAACTGACACAAGC"
    assert om.lcs_text(x, y, "ACGT", 20) == 4
    assert om.lcs_text(x, y, "ACGT", 20, naive=True) == 4


def test_lcs_lists_match_naive():
    x = om.sample_iid([0.5, 0.5], 300, seed=1)
    y = om.sample_iid([0.5, 0.5], 300, seed=2)
    assert om.lcs(x, y, 300) == om.lcs(x, y, 300, naive=True)


def test_entropy_values():
    assert om.h2_iid([0.5, 0.5]) == pytest.approx(math.log(2))
    assert om.h2_markov([[0.9, 0.1], [0.5, 0.5]]) == pytest.approx(0.205268, abs=1e-6)
    pi = om.stationary_distribution([[0.9, 0.1], [0.5, 0.5]])
    assert pi == pytest.approx([5 / 6, 1 / 6])
    est = om.collision_entropy(om.sample_iid([0.5, 0.5], 200000, seed=3), 8)
    assert est["h2"] == pytest.approx(math.log(2), rel=0.05)


def test_orbits_and_distances():
    x = om.orbit("expanding", 2000, seed=1)
    y = om.orbit("expanding", 2000, seed=2)
    assert len(x) == 2000 and all(0 <= p[0] < 1 for p in x)
    assert om.mindist(x, y, 2000) == om.mindist(x, y, 2000, naive=True)
    assert om.mindist([[0.1], [0.5]], [[0.85], [0.85]], 2) == pytest.approx(0.25)
    curve = om.correlation_sum([[0.2], [0.5]], [0.31, 0.29])
    assert curve["c"] == [1.0, 0.0]


def test_rotation_helpers():
    theta = om.golden_theta()
    assert theta.startswith("0x") and len(theta) == 34
    cf = om.continued_fraction(theta)
    assert cf["a"][1:20] == ["1"] * 19
    assert om.eta_estimate(theta) == pytest.approx(1.0, rel=0.05)
    assert om.rotation_mindist(theta, "0x" + "0" * 32, 10) == 0.0


def test_errors_map_to_python_exceptions():
    with pytest.raises(om.InvalidArgument):
        om.lcs_text("AC", "AG", "ACGT", 5)
    with pytest.raises(om.Error):
        om.lcs_text("AC", "AG", "ACGT", 5)
    with pytest.raises(om.ConfigError):
        om.normalize_config("[experiment]\nkind = nope\n")


def test_run_experiment(tmp_path):
    text = om.default_config("bridge").replace("trials = 400", "trials = 10")
    a = om.run_experiment(text, str(tmp_path / "a"))
    b = om.run_experiment(text, str(tmp_path / "b"))
    assert a["passed"]
    assert a["config_hash"] == b["config_hash"]
    name = "bridge_series.csv"
    assert om.sha256_file(str(tmp_path / "a" / name)) == om.sha256_file(str(tmp_path / "b" / name))
