import math

import pytest

import branchsim as bs


def test_binomial_building_blocks():
    d = bs.binomial(2, 0.9)
    assert d.pmf(2) == 0.81
    assert d.mean() == pytest.approx(1.8, abs=1e-12)
    assert d.total_mass() == pytest.approx(1.0, abs=1e-12)
    conv = bs.convolve(d, d)
    assert conv.support_size == 5
    assert bs.pgf(d, 1.0) == pytest.approx(1.0, abs=1e-12)


def test_extinction_matches_fixed_point():
    law = bs.OffspringLaw.from_binomial(2, 0.75)
    value, iterations = bs.extinction_probability(law, 1e-12)
    assert value == pytest.approx(1.0 / 9.0, abs=1e-10)
    assert iterations > 0


def test_exact_law_and_certificate():
    law = bs.OffspringLaw.from_binomial(2, 0.9)
    one_step = bs.exact_law_at(1, law, 1)
    ref = bs.binomial(2, 0.9)
    assert one_step.pmf(0) == pytest.approx(ref.pmf(0), abs=1e-15)
    assert one_step.pmf(2) == pytest.approx(ref.pmf(2), abs=1e-15)

    cert = bs.certificate_search(law, 4, 4)
    assert cert is not None
    assert (cert.block_size, cert.block_time) == (1, 1)
    assert cert.value == 0.81
    assert cert.threshold == 0.5

    none = bs.certificate_search(bs.OffspringLaw.from_binomial(2, 0.5), 4, 4)
    assert none is None


def test_tau_tail_decay():
    law = bs.OffspringLaw.from_binomial(2, 0.4)
    for n in range(1, 12):
        assert bs.tau_tail_exact(1, law, n) <= 0.8**n + 1e-12


def test_survival_lower_bound_constant():
    law = bs.OffspringLaw.from_binomial(2, 0.9)
    out = bs.survival_lower_bound(law, 1.4, 2, 10, 50)
    assert out.c == pytest.approx(0.45, abs=1e-12)
    assert out.truncated_mean == pytest.approx(1.8, abs=1e-12)
    assert 0.0 < out.bound < 1.0


def test_h_identity_and_critical_curve():
    params = bs.CoopParams(0.9, 0.9)
    assert bs.h_exact(params) == pytest.approx(1.796904, abs=1e-9)
    rng = bs.Rng(123)
    for _ in range(100):
        p, q = rng.next_unit(), rng.next_unit()
        pq = bs.CoopParams(p, q)
        assert bs.h_polynomial(pq) == pytest.approx(bs.h_exact(pq), abs=1e-12)

    qstar = bs.critical_q(1.0)
    assert qstar == pytest.approx(0.2663852521627632, abs=1e-10)
    assert abs(bs.h_polynomial(bs.CoopParams(1.0, qstar)) - 1.0) < 1e-9
    with pytest.raises(ValueError):
        bs.critical_q(0.4)


def test_joint_law_and_renormalized_mean():
    sure = bs.exact_joint_law(1, 1, bs.CoopParams(1.0, 1.0))
    assert sure.pmf(4, 2) == 1.0

    out = bs.expected_renormalized_z(1, 1, bs.CoopParams(0.9, 0.9))
    assert out.value == pytest.approx(1.796904, abs=1e-9)

    cert = bs.coop_certificate_search(bs.CoopParams(0.9, 0.9), 4, 4)
    assert cert is not None
    assert (cert.block_size, cert.block_time) == (1, 1)

    with pytest.raises(bs.BudgetExceeded):
        bs.exact_joint_law(1, 7, bs.CoopParams(0.8, 0.8))


def test_monte_carlo_reproducibility():
    law = bs.OffspringLaw.from_binomial(2, 0.75)
    solo = bs.gw_survival_mc(law, 1, 2000, 200, 10000, seed=42, jobs=1)
    pooled = bs.gw_survival_mc(law, 1, 2000, 200, 10000, seed=42, jobs=4)
    assert solo.successes == pooled.successes
    assert solo.ci99_low <= solo.estimate <= solo.ci99_high

    sure = bs.coop_survival_mc(bs.CoopParams(1.0, 1.0), 50, 1000, seed=7)
    assert sure.estimate == 1.0


def test_phase_sweep_and_formats(tmp_path):
    config = bs.SweepConfig()
    config.step = 0.25
    config.estimator = bs.Estimator.HIndicator
    grid = bs.sweep(config)
    assert len(grid.p_axis) == len(grid.q_axis) == 5
    assert grid.at(4, 4) == 2.0
    assert grid.meta.estimator == "h_indicator"

    csv_path = tmp_path / "grid.csv"
    bs.export_csv(grid, str(csv_path))
    back = bs.import_csv(str(csv_path))
    assert back.values == grid.values

    ppm_path = tmp_path / "grid.ppm"
    bs.render_heatmap(grid, str(ppm_path))
    assert ppm_path.read_bytes().startswith(b"P6\n")

    svg_path = tmp_path / "grid.svg"
    options = bs.HeatmapOptions()
    options.format = bs.HeatmapFormat.Svg
    options.overlay_critical = True
    bs.render_heatmap(grid, str(svg_path), options)
    text = svg_path.read_text()
    assert "<svg" in text and "</svg>" in text and "polyline" in text


def test_stream_addressing():
    a = bs.derive_stream(1, 2, 3, 4)
    b = bs.derive_stream(1, 2, 3, 4)
    assert a.next_u64() == b.next_u64()
    c = bs.derive_stream(1, 2, 3, 5)
    assert a.next_u64() != c.next_u64()
    assert bs.binomial_quantile(10, 0.5, 0.999999) >= 9
