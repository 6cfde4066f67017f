import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from aaqip import noon
from aaqip.sysfile import load_gyromagnetic

GYRO = load_gyromagnetic()
D_TRUE = 6.24e-10
DELTA, BIG_DELTA = 2e-3, 0.1
GAMMA_EFF = noon.effective_gamma(noon.StarSystem.from_species("31P", "1H", 9))[0]
G1 = np.linspace(0.0, 0.045, 16)
CORR_GEN = dict(lambda0=0.005, lam_H=(0.226, 0.114), lam_P=(0.028, 0.095))


def slope_oracle(x, y):
    # textbook closed form for the least-squares slope
    xm, ym = np.mean(x), np.mean(y)
    return np.sum((x - xm) * (y - ym)) / np.sum((x - xm) ** 2)


def test_g_factors():
    _, g = noon.effective_gamma(noon.StarSystem.from_species("31P", "1H", 9))
    assert abs(g / 23.2 - 1) < 5e-3
    _, g = noon.effective_gamma(noon.StarSystem.from_species("13C", "1H", 3))
    assert abs(g / 12.92 - 1) < 5e-3


def test_single_spin_limit():
    ge, g = noon.effective_gamma(noon.StarSystem(GYRO["1H"], GYRO["13C"], 1))
    assert ge == GYRO["1H"] and g == 1.0


def test_star_validation():
    with pytest.raises(ValueError):
        noon.StarSystem(0.0, 1.0, 3)
    with pytest.raises(ValueError):
        noon.StarSystem(1.0, 0.0, 3)
    with pytest.raises(ValueError):
        noon.StarSystem(1.0, 1.0, 0)
    with pytest.raises(KeyError):
        noon.StarSystem.from_species("2H", "1H", 2)


@settings(max_examples=50, deadline=None)
@given(st.floats(1e6, 3e8), st.floats(1e6, 3e8), st.integers(1, 30))
def test_g_strictly_increasing(ga, gm, n):
    g1 = noon.effective_gamma(noon.StarSystem(ga, gm, n))[1]
    g2 = noon.effective_gamma(noon.StarSystem(ga, gm, n + 1))[1]
    assert g2 > g1


def test_gradient_phase_scales_with_gamma_eff():
    sq = noon.gradient_phase(GYRO["31P"], 1e-3, 0.01, DELTA)
    nn = noon.gradient_phase(GAMMA_EFF, 1e-3, 0.01, DELTA)
    assert nn / sq == pytest.approx(noon.effective_gamma(noon.StarSystem.from_species("31P", "1H", 9))[1])


def test_diffusion_signal_shape():
    p = noon.DiffusionParams(D_TRUE, DELTA, BIG_DELTA, GAMMA_EFF)
    s = noon.diffusion_signal(G1, p)
    assert s[0] == 1.0 and np.all(np.diff(s) < 0) and np.all(s > 0)
    slope = slope_oracle(G1 ** 2, np.log(s))
    assert slope == pytest.approx(-GAMMA_EFF ** 2 * DELTA ** 2 * D_TRUE * (BIG_DELTA - DELTA / 3), rel=1e-12)
    with pytest.raises(ValueError):
        noon.diffusion_signal(-1.0, p)
    with pytest.raises(ValueError):
        noon.DiffusionParams(D_TRUE, 0.3, 0.05, GAMMA_EFF)


def test_noon_needs_g_squared_less_encoding():
    g = GAMMA_EFF / GYRO["31P"]
    sq = noon.DiffusionParams(D_TRUE, DELTA, BIG_DELTA, GYRO["31P"]).b_per_G2
    nn = noon.DiffusionParams(D_TRUE, DELTA, BIG_DELTA, GAMMA_EFF).b_per_G2
    assert nn / sq == pytest.approx(g ** 2)
    assert g ** 2 == pytest.approx(538, rel=5e-3)


def test_fit_noiseless():
    p = noon.DiffusionParams(D_TRUE, DELTA, BIG_DELTA, GAMMA_EFF)
    D, sD = noon.fit_diffusion(G1, noon.diffusion_signal(G1, p), DELTA, BIG_DELTA, GAMMA_EFF)
    assert abs(D / D_TRUE - 1) < 1e-12
    assert sD < 1e-12 * D_TRUE


def test_fit_two_points_exact():
    p = noon.DiffusionParams(D_TRUE, DELTA, BIG_DELTA, GAMMA_EFF)
    g = np.array([0.01, 0.03])
    D, sD = noon.fit_diffusion(g, noon.diffusion_signal(g, p), DELTA, BIG_DELTA, GAMMA_EFF)
    assert D == pytest.approx(D_TRUE, rel=1e-12) and np.isnan(sD)


def test_fit_errors():
    with pytest.raises(ValueError):
        noon.fit_diffusion(G1, np.zeros_like(G1), DELTA, BIG_DELTA, GAMMA_EFF)
    with pytest.raises(ValueError):
        noon.fit_diffusion(np.full(5, 0.02), np.full(5, 0.5), DELTA, BIG_DELTA, GAMMA_EFF)
    with pytest.raises(ValueError):
        noon.fit_diffusion([0.01], [0.9], DELTA, BIG_DELTA, GAMMA_EFF)


def noisy_trials(seeds=range(100), level=0.01):
    p = noon.DiffusionParams(D_TRUE, DELTA, BIG_DELTA, GAMMA_EFF)
    clean = noon.diffusion_signal(G1, p)
    out = []
    for seed in seeds:
        rng = np.random.default_rng(seed)
        s = clean * (1 + level * rng.standard_normal(G1.size))
        out.append(noon.fit_diffusion(G1, s, DELTA, BIG_DELTA, GAMMA_EFF))
    return np.array(out)


def test_fit_with_noise():
    res = noisy_trials()
    assert abs(res[:, 0].mean() / D_TRUE - 1) < 0.01
    half = np.array([noon.confidence_halfwidth(s, G1.size) for s in res[:, 1]])
    cover = np.mean(np.abs(res[:, 0] - D_TRUE) <= half)
    assert cover >= 0.9


def test_confidence_halfwidth():
    assert noon.confidence_halfwidth(1.0, 16) == pytest.approx(2.1447866879, rel=1e-9)


# ------------------------------------------------------------------------ RFI

def test_rfi_normalization_and_continuity():
    prof = noon.RfiProfile(10e3, 0.018, 0.009)
    nu = np.linspace(0, 30e3, 600_001)
    from scipy.integrate import quad
    total = sum(quad(lambda v: float(noon.rfi_pdf(v, prof)), a, b, epsabs=0, epsrel=1e-12, limit=200)[0]
                for a, b in ((0, 10e3), (10e3, 30e3)))
    assert abs(total - 1) < 1e-6
    below = noon.rfi_pdf(np.nextafter(10e3, 0), prof)
    assert noon.rfi_pdf(10e3, prof) == pytest.approx(prof.a) and below == pytest.approx(prof.a, rel=1e-12)
    assert np.all(noon.rfi_pdf(nu, prof) >= 0)


def test_rfi_symmetric_is_even():
    prof = noon.RfiProfile(1.0, 0.05, 0.05)
    u = np.linspace(0, 0.9, 50)
    assert np.allclose(noon.rfi_pdf(1 - u, prof), noon.rfi_pdf(1 + u, prof), rtol=1e-14)


def test_rfi_fit_recovers_widths():
    prof = noon.RfiProfile(10e3, 0.018, 0.009)
    nu = np.linspace(8e3, 12e3, 201)
    fit = noon.rfi_fit(nu, noon.rfi_pdf(nu, prof), 10e3)
    assert abs(fit.lambda_minus / 0.018 - 1) < 0.02
    assert abs(fit.lambda_plus / 0.009 - 1) < 0.02


def test_rfi_fit_errors():
    with pytest.raises(ValueError):
        noon.rfi_fit(np.linspace(0, 1, 5), np.ones(5), 0.5)
    with pytest.raises(ValueError):
        noon.RfiProfile(1.0, 0.0, 0.1)


def corr_grid(n=256, span=0.6):
    ax = np.linspace(1 - span, 1 + span, n)
    return np.meshgrid(ax, ax, indexing="ij")


def test_corr_nominal_point_and_symmetry():
    prof = noon.RfiCorrProfile(**CORR_GEN)
    assert noon.rfi_corr_pdf(1.0, 1.0, prof) == 1.0
    sym = noon.RfiCorrProfile(0.01, (0.2, 0.2), (0.05, 0.05))
    h, p = corr_grid(41, 0.5)
    v = noon.rfi_corr_pdf(h, p, sym)
    assert np.allclose(v, v[::-1, :], rtol=1e-13) and np.allclose(v, v[:, ::-1], rtol=1e-13)
    with pytest.raises(ValueError):
        noon.rfi_corr_pdf(0.0, 1.0, prof)


def test_corr_fit_recovers_identifiable_ratios():
    prof = noon.RfiCorrProfile(**CORR_GEN)
    h, p = corr_grid()
    fit = noon.corr_fit(h, p, noon.rfi_corr_pdf(h, p, prof))
    assert np.allclose(fit.ratios(), prof.ratios(), rtol=1e-6)


def test_corr_fit_with_known_lambda0():
    prof = noon.RfiCorrProfile(**CORR_GEN)
    h, p = corr_grid()
    fit = noon.corr_fit(h, p, noon.rfi_corr_pdf(h, p, prof), lambda0=0.005)
    got = np.array([fit.lambda0, *fit.lam_H, *fit.lam_P])
    want = np.array([0.005, *CORR_GEN["lam_H"], *CORR_GEN["lam_P"]])
    assert np.allclose(got, want, rtol=1e-6)


def test_corr_profile_is_scale_degenerate():
    prof = noon.RfiCorrProfile(**CORR_GEN)
    k = 3.0
    other = noon.RfiCorrProfile(0.005 * k, tuple(v * k * k for v in CORR_GEN["lam_H"]),
                                tuple(v * k * k for v in CORR_GEN["lam_P"]))
    h, p = corr_grid(33)
    assert np.allclose(noon.rfi_corr_pdf(h, p, prof), noon.rfi_corr_pdf(h, p, other), rtol=1e-13)


# ----------------------------------------------------------------- NOON phase

@pytest.mark.parametrize("N", range(2, 11))
@pytest.mark.parametrize("phi", [0.0, np.pi / 7, np.pi / 3])
def test_noon_phase_matches_amplification(N, phi):
    got = noon.noon_phase(N, phi)
    diff = noon.wrap_phase(got - (N - 1) * phi)
    assert abs(diff) < 1e-10


def test_noon_phase_examples():
    assert noon.noon_phase(5, 0.0) == 0.0
    assert abs(noon.wrap_phase(noon.noon_phase(10, np.pi / 9) - np.pi)) < 1e-10
    with pytest.raises(ValueError):
        noon.noon_phase(1, 0.2)
