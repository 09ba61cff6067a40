import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from riesz_lab import ContractionSchedule, RieszSpec, lebesgue_ft
from riesz_lab.convolution import (
    SubNyquistWarning,
    constant,
    convergence_csv,
    convergence_experiment,
    convolve,
    fejer_indicator,
    indicator,
    interval_average,
    kernel_transform,
    random_bandlimited,
    single_mode,
    square_function_spatial,
    trend_verdict,
)
from riesz_lab.multipliers import sigma_K, square_norm_bound
from riesz_lab.schedules import intertwine_construct

SPEC = RieszSpec((4, 16, 64))
KERNELS = ["uniform", "triangle", SPEC]


def dyadic_scales(K):
    return ContractionSchedule(tuple(Fraction(1, 2**k) for k in range(1, K + 1)), "manual")


@pytest.mark.parametrize("kernel", KERNELS)
@pytest.mark.parametrize("t", [Fraction(1, 3), 0.01, 7])
def test_constant_preserved(kernel, t):
    f = constant(2.5, J=8)
    g = convolve(kernel, t, f)
    np.testing.assert_array_equal(g.coeffs, f.coeffs)


def test_single_mode_uniform():
    for j in (1, 5, -7):
        for t in (0.5, 1e-3, Fraction(1, 1024)):
            g = convolve("uniform", t, single_mode(j))
            assert g.coefficient(j) == lebesgue_ft(float(t) * j)
    assert abs(convolve("uniform", 1e-9, single_mode(3)).coefficient(3) - 1) < 1e-7


def test_rejects_nonpositive_scale():
    with pytest.raises(ValueError):
        convolve("uniform", 0, single_mode(1))
    with pytest.raises(ValueError):
        kernel_transform("gaussian")


def test_indicator_ramp_average():
    eps = 1 / 8
    f = indicator(0.0, 0.5, J=512)
    g = convolve("uniform", eps, f)
    x = np.arange(4096) / 4096
    kinks = np.array([0.0, 0.5, eps, 0.5 + eps, 1.0, 1.0 + eps])
    far = np.min(np.abs(x[:, None] - kinks[None, :]), axis=1) >= 1 / 8
    assert far.sum() > 1000
    vals = g.synthesize(4096)
    exact = interval_average(0.0, 0.5, eps, x)
    assert np.max(np.abs(vals[far] - exact[far])) < 1e-6
    assert np.max(np.abs(vals.imag)) < 1e-12


def test_interval_average_limits():
    x = np.linspace(0, 1, 11, endpoint=False)
    np.testing.assert_allclose(interval_average(0.2, 0.7, 1e-9, x + 1e-6),
                               indicator(0.2, 0.7).closed_form(x + 1e-6))
    assert interval_average(0.0, 1.0, 0.3, x) == pytest.approx(np.ones_like(x))


@given(st.integers(0, 10_000), st.floats(1e-4, 10))
@settings(max_examples=30)
def test_mass_and_contraction(seed, t):
    f = random_bandlimited(16, seed=seed)
    for kernel in KERNELS:
        g = convolve(kernel, t, f)
        assert g.coefficient(0) == f.coefficient(0)
        assert g.norm2() <= f.norm2() * (1 + 1e-12)
        assert g.is_real


@pytest.mark.parametrize("kernel", KERNELS + [RieszSpec((3, 12, 48))])
def test_approximate_identity(kernel):
    phi = kernel_transform(kernel)
    j = np.arange(-64, 65)
    gaps = [np.max(np.abs(phi(2.0**-k * j) - 1)) for k in range(1, 21)]
    assert gaps[-1] < 1e-3
    assert gaps[-1] <= 2 * math.pi * 64 * 2.0**-20 * 1.0001
    assert all(b <= a * 1.0001 for a, b in zip(gaps[8:], gaps[9:]))


@pytest.mark.parametrize("seed", range(4))
def test_parseval_synthesis(seed):
    f = random_bandlimited(64, seed=seed)
    vals = f.synthesize(512)
    assert np.mean(np.abs(vals) ** 2) == pytest.approx(f.norm2(), rel=1e-12)
    x = np.random.default_rng(seed).random(20)
    np.testing.assert_allclose(f.evaluate(x), f.evaluate(x + 1), atol=1e-10)
    np.testing.assert_allclose(f.synthesize(256)[::2], f.synthesize(128), atol=1e-12)


def test_random_signal_properties():
    f = random_bandlimited(64, seed=3)
    assert f.norm2() == pytest.approx(1.0)
    assert f.is_real and f.bandwidth == 64
    g = random_bandlimited(64, seed=3, real=False)
    assert not g.is_real
    np.testing.assert_array_equal(f.coeffs, random_bandlimited(64, seed=3).coeffs)


def test_fejer_indicator_is_smooth_version():
    f, g = indicator(0, 0.5, 32), fejer_indicator(0, 0.5, 32)
    assert g.coefficient(0) == f.coefficient(0)
    assert np.all(np.abs(g.coeffs) <= np.abs(f.coeffs) + 1e-15)
    vals = g.synthesize(1024).real
    assert vals.min() >= -1e-12 and vals.max() <= 1 + 1e-12  # Fejer is positive


def test_sub_nyquist_warning():
    f = random_bandlimited(64, seed=0)
    with pytest.warns(SubNyquistWarning):
        square_function_spatial(SPEC, dyadic_scales(3), f, grid=128)


@pytest.mark.parametrize("j", [1, 4, 17])
def test_square_function_single_mode(j):
    sched = dyadic_scales(5)
    assert square_function_spatial(SPEC, sched, single_mode(j), grid=64) == pytest.approx(
        math.sqrt(sigma_K(SPEC, sched, 5, float(j))), rel=1e-12)


def test_square_function_zero_signal():
    assert square_function_spatial(SPEC, dyadic_scales(3), constant(0.0, 4), grid=32) == 0.0


def test_square_function_routes_agree():
    spec, sched = intertwine_construct(4, 8)
    f = random_bandlimited(64, seed=11)
    spatial = square_function_spatial(spec, sched, f, 8, grid=512, order=3)
    parseval, _ = square_norm_bound(spec, sched, f, 8, order=3)
    assert spatial**2 == pytest.approx(parseval, rel=1e-8)


def test_uniform_convergence_on_fejer_signal():
    reports = convergence_experiment("uniform", dyadic_scales(12), fejer_indicator(0, 0.5, 16))
    assert [r.k for r in reports] == list(range(1, 13))
    assert reports[-1].l2_err <= 1e-3
    assert all(r.verdict == "passing" for r in reports)
    l2 = [r.l2_err for r in reports]
    assert all(b < a for a, b in zip(l2, l2[1:]))
    assert all(r.sup_err >= r.l2_err >= 0 for r in reports)


def test_constant_signal_has_zero_error():
    for kernel in KERNELS:
        reports = convergence_experiment(kernel, dyadic_scales(6), constant(1.0, 4))
        assert all(r.sup_err == 0 and r.l2_err == 0 for r in reports)


def test_point_grid_matches_fft_grid():
    f = random_bandlimited(8, seed=2)
    a = convergence_experiment("triangle", dyadic_scales(4), f, grid=64)
    b = convergence_experiment("triangle", dyadic_scales(4), f, grid=np.arange(64) / 64)
    for r, s in zip(a, b):
        assert r.l2_err == pytest.approx(s.l2_err, rel=1e-10)


def test_riesz_intertwined_trend():
    spec, sched = intertwine_construct(4, 10)
    reports = convergence_experiment(spec, sched, random_bandlimited(64, seed=0), order=3)
    assert reports[-1].l2_err <= 1e-2
    assert reports[0].verdict == "passing"


def test_adversarial_schedule_fails():
    sched = ContractionSchedule((Fraction(1, 2),) * 4, "manual")
    reports = convergence_experiment("uniform", sched, random_bandlimited(16, seed=1))
    assert reports[-1].verdict == "failing"


def test_empty_schedule_rejected():
    with pytest.raises(ValueError):
        convergence_experiment("uniform", ContractionSchedule((), "manual"), constant())


def test_trend_verdict_rules():
    assert trend_verdict([1, 0.5, 0.25, 0.2], 1e-3) == "passing"
    assert trend_verdict([1, 0.5, 0.25, 0.3], 1e-3) == "failing"
    assert trend_verdict([1, 0.5, 0.25, 0.27], 1e-3) == "passing"  # within 10%
    assert trend_verdict([1, 0.5, 0.25, 0.2], 0.5) == "failing"
    assert trend_verdict([1, 0.5, 1e-16, 2e-15], 0) == "passing"


def test_convergence_csv_format():
    reports = convergence_experiment("uniform", dyadic_scales(3), single_mode(1))
    lines = convergence_csv(reports, ["seed: 0"]).splitlines()
    assert lines[0] == "# seed: 0"
    assert lines[1] == "k,t_k,sup_err,l2_err,verdict"
    assert lines[2].startswith("1,1/2,")
    assert len(lines) == 5
    assert float(lines[2].split(",")[3]) == reports[0].l2_err
