"""Reference-law and fitting tests with independent oracles."""
import math
import warnings

import numpy as np
import pytest

from catreverse.analysis import (
    DIFFUSION_COEFFICIENT,
    FidelitySeries,
    FitError,
    MomentSeries,
    YDistribution,
    distribution_distance,
    escape_time,
    fidelity_timescale,
    fit_collapse_constant,
    fit_diffusion,
    fokker_planck_gaussian,
    second_moment,
)
from catreverse.lattice import KS_ENTROPY, PhaseSpaceConfig

CFG = PhaseSpaceConfig(5, 8)  # N=32, L=8, LN=256


def bin_masses(t, y0=0.0, D=DIFFUSION_COEFFICIENT, cfg=CFG):
    y = -cfg.L / 2 + np.arange(cfg.LN) / cfg.N
    return fokker_planck_gaussian(y, t, y0, D, cfg.L) / cfg.N


def test_gaussian_normalization_on_grid():
    for t in (0.5, 5.0, 35.0, 1000.0):
        assert abs(bin_masses(t).sum() - 1.0) < 1e-9


def test_gaussian_unwrapped_second_moment():
    """Variance of the free-space solution is D t (+ y0^2 about the origin)."""
    y = np.linspace(-60, 60, 240_001)
    for t, y0 in ((3.0, 0.0), (12.0, 1.25)):
        w = np.exp(-((y - y0) ** 2) / (2 * DIFFUSION_COEFFICIENT * t))
        w /= math.sqrt(2 * math.pi * DIFFUSION_COEFFICIENT * t)
        m2 = np.trapezoid(w * y * y, y)
        assert abs(m2 - (DIFFUSION_COEFFICIENT * t + y0 * y0)) < 1e-6


def test_gaussian_relaxes_to_uniform():
    t = 10 * CFG.L**2 / DIFFUSION_COEFFICIENT
    y = -CFG.L / 2 + np.arange(CFG.LN) / CFG.N
    density = fokker_planck_gaussian(y, t, 0.3, DIFFUSION_COEFFICIENT, CFG.L)
    assert np.max(np.abs(density - 1.0 / CFG.L)) < 1e-6


def test_gaussian_symmetry_and_monotonicity():
    y = np.linspace(-0.5, 3.5, 200)
    y0 = 1.5
    t = 4.0
    w = fokker_planck_gaussian(y, t, y0, DIFFUSION_COEFFICIENT, CFG.L)
    w_mirror = fokker_planck_gaussian(2 * y0 - y, t, y0, DIFFUSION_COEFFICIENT, CFG.L)
    assert np.allclose(w, w_mirror, rtol=1e-9, atol=1e-12)
    right = fokker_planck_gaussian(np.linspace(y0, y0 + CFG.L / 2, 100), t, y0,
                                   DIFFUSION_COEFFICIENT, CFG.L)
    assert np.all(np.diff(right) <= 1e-15)


def test_gaussian_domain_errors():
    with pytest.raises(ValueError):
        fokker_planck_gaussian(0.0, 0.0, 0.0, DIFFUSION_COEFFICIENT, 8.0)
    with pytest.raises(ValueError):
        fokker_planck_gaussian(0.0, 1.0, 0.0, -0.1, 8.0)


def point_mass(j, cfg=CFG):
    p = np.zeros(cfg.LN)
    p[j] = 1.0
    return YDistribution(cfg, p)


def test_second_moment_examples():
    assert second_moment(point_mass(CFG.LN // 2)) == 0.0
    uniform = YDistribution(CFG, np.full(CFG.LN, 1.0 / CFG.LN))
    # variance of the discrete uniform grid: L^2/12 up to the lattice offset
    assert abs(second_moment(uniform) - CFG.L**2 / 12.0) < 0.02
    assert second_moment(point_mass(0)) == CFG.L**2 / 4.0


def test_wrapped_gaussian_second_moment_saturates():
    long_time = YDistribution(CFG, bin_masses(5000.0))
    assert abs(second_moment(long_time) - CFG.L**2 / 12.0) < 0.02


def test_fit_diffusion_exact_line():
    series = MomentSeries()
    for t in range(0, 40):
        series.append(t, 0.0, t / 12.0 + 0.04)
    assert abs(fit_diffusion(series, (5, 30)) - 1.0 / 12.0) < 1e-12
    # adding a constant to <y^2> leaves the slope unchanged
    shifted = MomentSeries()
    for t in range(0, 40):
        shifted.append(t, 0.0, t / 12.0 + 10.0)
    assert abs(fit_diffusion(shifted, (5, 30)) - fit_diffusion(series, (5, 30))) < 1e-12


def test_fit_diffusion_random_walk_oracle():
    """A plain uniform-kick random walk diffuses with D = 1/12 exactly."""
    gen = np.random.default_rng(123)
    y = np.zeros(200_000)
    series = MomentSeries()
    series.append(0, 0.0, 0.0)
    for t in range(1, 26):
        y += gen.uniform(-0.5, 0.5, size=y.size)
        series.append(t, float(y.mean()), float((y**2).mean()))
    d_fit = fit_diffusion(series, (1, 25))
    assert abs(d_fit - 1.0 / 12.0) / (1.0 / 12.0) < 0.03


def test_fit_diffusion_degenerate_window():
    series = MomentSeries()
    for t in range(3):
        series.append(t, 0.0, 0.0)
    with pytest.raises(FitError):
        fit_diffusion(series, (0, 2))


def test_escape_time_values():
    assert abs(escape_time(1e-8) - 19.1) < 0.1
    assert abs(escape_time(1e-4) - 9.6) < 0.1
    assert abs(escape_time(math.exp(-KS_ENTROPY)) - 1.0) < 1e-12
    with pytest.raises(ValueError):
        escape_time(0.0)
    with pytest.raises(ValueError):
        escape_time(1.5)


def test_fidelity_timescale():
    assert fidelity_timescale(40, 0.01, 0.5) == pytest.approx(125.0)
    assert fidelity_timescale(7, 0.1, 0.5) == pytest.approx(0.5 / 0.07, rel=1e-12)
    assert fidelity_timescale(5, 0.02, 1.0) == 2 * fidelity_timescale(5, 0.02, 0.5)


def synthetic_run(n_q, eps, c=0.5, tmax=400):
    run = FidelitySeries(n_q, n_q + 3, eps, seed=0)
    for t in range(tmax):
        x = eps * eps * n_q * t
        run.append(t, math.exp(-x * math.log(2) / c))
    return run


def test_collapse_fit_on_synthetic_exponentials():
    runs = [synthetic_run(4, 0.03), synthetic_run(5, 0.1, tmax=60), synthetic_run(6, 0.03)]
    fit = fit_collapse_constant(runs)
    assert abs(fit.c_fit - 0.5) / 0.5 < 0.02
    assert fit.diagnostic < 1.05


def test_collapse_fit_two_crossings():
    runs = [synthetic_run(4, 0.1, c=0.4, tmax=100), synthetic_run(5, 0.1, c=0.6, tmax=100)]
    fit = fit_collapse_constant(runs)
    assert fit.c_fit == pytest.approx(0.5, rel=0.02)
    assert fit.diagnostic == pytest.approx(1.5, rel=0.03)


def test_collapse_fit_excludes_non_crossing_runs():
    flat = FidelitySeries(4, 7, 0.0, seed=0)
    for t in range(10):
        flat.append(t, 1.0)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        fit = fit_collapse_constant([flat, synthetic_run(5, 0.1, tmax=60)])
    assert any("never crosses" in str(w.message) for w in caught)
    assert (4, 0.0) in fit.excluded
    with pytest.raises(FitError):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            fit_collapse_constant([flat])


def test_collapse_fit_subsampling_invariance():
    run = synthetic_run(5, 0.03)
    half = FidelitySeries(5, 8, 0.03, seed=0)
    for k in range(0, len(run.ts), 2):
        half.append(run.ts[k], run.fs[k])
    full_fit = fit_collapse_constant([run])
    half_fit = fit_collapse_constant([half])
    spacing = 0.03**2 * 5 * 2  # one subsampled step in x
    assert abs(full_fit.c_fit - half_fit.c_fit) < spacing


def test_distribution_distance():
    assert distribution_distance(point_mass(3), point_mass(3)) == 0.0
    assert distribution_distance(point_mass(3), point_mass(7)) == 1.0
    uniform = YDistribution(CFG, np.full(CFG.LN, 1.0 / CFG.LN))
    assert distribution_distance(uniform, point_mass(0)) == pytest.approx(1.0 - 1.0 / CFG.LN)
    with pytest.raises(ValueError):
        distribution_distance(uniform, YDistribution(PhaseSpaceConfig(2, 3), np.full(8, 1 / 8)))


def test_ydistribution_validation():
    with pytest.raises(ValueError):
        YDistribution(CFG, np.full(CFG.LN, 2.0 / CFG.LN))
    with pytest.raises(ValueError):
        YDistribution(CFG, np.full(7, 1.0 / 7))


def test_moment_series_requires_increasing_t():
    series = MomentSeries()
    series.append(0, 0.0, 0.0)
    with pytest.raises(ValueError):
        series.append(0, 0.0, 0.0)


def test_fidelity_series_validation():
    run = FidelitySeries(4, 7, 0.1, seed=0)
    with pytest.raises(ValueError):
        run.append(0, 0.3)  # f(0) must be 1
    run.append(0, 1.0)
    with pytest.raises(ValueError):
        run.append(1, 1.5)
