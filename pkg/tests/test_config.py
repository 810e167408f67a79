import pytest

from vvkrr.config import DEFAULT_NS, ConfigError, parse_config


def test_defaults():
    cfg = parse_config("")
    assert cfg["spectral"]["I_max"] == 512
    assert cfg["target"]["d_Y"] == 4
    assert cfg["experiment"]["n_seeds"] == 20
    assert cfg["experiment"]["ns"] == DEFAULT_NS
    assert cfg.spectral_model().I_max == 512
    assert cfg.schedule().lam(1000, 1.0) == pytest.approx(1000 ** (-2 / 3))
    assert str(cfg.output_dir) == "runs/default"


def test_beta_out_of_range_cites_range():
    with pytest.raises(ConfigError, match=r"\(0, 2\]") as err:
        parse_config("[target]\nbeta = 3\n")
    assert "line 2" in str(err.value)


def test_unknown_key_and_section_named():
    with pytest.raises(ConfigError) as err:
        parse_config("[target]\nbeta = 1\nbetta = 2\n[plots]\nx = 1\n")
    msg = str(err.value)
    assert "target.betta" in msg and "line 3" in msg and "[plots]" in msg


def test_all_problems_reported_together():
    text = "[experiment]\ngamma = 1.5\nn_seeds = 0\n[noise]\nkind = cauchy\n[spectral]\np = 2\n"
    with pytest.raises(ConfigError) as err:
        parse_config(text)
    assert len(err.value.problems) == 4


def test_bad_value_and_syntax_errors():
    with pytest.raises(ConfigError, match="line 2.*not a valid"):
        parse_config("[target]\nd_Y = four\n")
    with pytest.raises(ConfigError, match="parse error"):
        parse_config("beta = 1\n")
    with pytest.raises(ConfigError, match="parse error"):
        parse_config("[target]\nbeta = 1\nbeta = 2\n")


def test_gamma_must_be_below_beta():
    with pytest.raises(ConfigError, match="smaller than beta"):
        parse_config("[target]\nbeta = 0.5\n[experiment]\ngamma = 0.5\n")


def test_overrides_and_comments():
    cfg = parse_config("[target]\nbeta = 2  # smoother\n", {"experiment.ns": "10, 20, 40, 80"})
    assert cfg["target"]["beta"] == 2.0
    assert cfg["experiment"]["ns"] == (10, 20, 40, 80)
    with pytest.raises(ConfigError):
        parse_config("", {"nodot": "1"})


def test_kernel_and_target_consistency():
    with pytest.raises(ConfigError, match="designed-mercer"):
        parse_config("[kernel]\nfamily = matern\n")
    cfg = parse_config("[kernel]\nfamily = matern\n[target]\nkind = kernel-expansion\n")
    assert cfg.kernel().family == "matern"
    assert cfg.target().rkhs_norm() == pytest.approx(1.0)


def test_digest_tracks_content():
    a = parse_config("[target]\nbeta = 1\n")
    b = parse_config("[target]\nbeta = 1.0  # same value\n")
    c = parse_config("[target]\nbeta = 2\n")
    assert a.digest() == b.digest() != c.digest()


def test_explicit_eigenvalues():
    cfg = parse_config("[spectral]\neigenvalues = 1, 0.5, 0.25\np = 1\n[target]\nd_Y = 1\n")
    assert cfg.spectral_model().mu.tolist() == [1.0, 0.5, 0.25]
    with pytest.raises(ConfigError, match="nonincreasing"):
        parse_config("[spectral]\neigenvalues = 0.5, 1\n")
