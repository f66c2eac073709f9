import math

import numpy as np
import pytest

from idespec import (
    OperatorConfig,
    Spectrum,
    WeylFunction,
    WeylPoleError,
    char_delta,
    delta_from_spectrum,
    eigenvalues,
    fit_omega,
    sector_asymptotics_check,
    verify_adjoint,
    weyl_eval,
)
from idespec.operators import PI


# ------------------------------------------------------- characteristic fns

def test_char_delta_zero_potential_limits(cfg_zero):
    assert abs(char_delta(cfg_zero, 1, 0.0) - PI) <= 1e-10
    assert abs(char_delta(cfg_zero, 1, 0.25) - 2.0) <= 1e-10
    assert abs(char_delta(cfg_zero, 2, 0.25)) <= 1e-10


def test_char_delta_rejects_bad_family(cfg_zero):
    with pytest.raises(ValueError):
        char_delta(cfg_zero, 3, 1.0)


# ------------------------------------------------------------- eigenvalues

def test_eigenvalues_zero_potential(cfg_zero):
    sp1 = eigenvalues(cfg_zero, 1, 3)
    assert np.allclose(sp1.values, [1.0, 4.0, 9.0], rtol=1e-10, atol=1e-10)
    sp2 = eigenvalues(cfg_zero, 2, 3)
    assert np.allclose(sp2.values, [0.25, 2.25, 6.25], rtol=1e-10, atol=1e-10)


def test_eigenvalues_constant_shift(cfg_one):
    sp = eigenvalues(cfg_one, 1, 3)
    assert np.allclose(sp.values, [2.0, 5.0, 10.0], rtol=1e-9)


def test_eigenvalues_negative_spectrum():
    sp = eigenvalues(OperatorConfig([-2.0]), 1, 3)
    assert np.allclose(sp.values, [-1.0, 2.0, 7.0], rtol=1e-9, atol=1e-9)


def test_eigenvalues_linear_potential_vs_fine_grid(cfg_linear):
    coarse = eigenvalues(cfg_linear, 1, 5, n=2000)
    fine = eigenvalues(cfg_linear, 1, 5, n=20000)
    assert np.max(np.abs(coarse.values - fine.values) / fine.values) <= 1e-8


def test_eigenvalues_reject_complex_data():
    with pytest.raises(ValueError):
        eigenvalues(OperatorConfig([1.0 + 1.0j]), 1, 3)


def test_eigenvalues_small_nmax_with_large_mean_potential():
    # the first Dirichlet eigenvalue sits far from its zero-potential centre
    # when the potential mean is large; the count gate must still resolve it
    sp = eigenvalues(OperatorConfig([1.0, 1.0]), 1, 1)
    assert sp.values.size == 1
    lam = sp.values[0]
    ref = eigenvalues(OperatorConfig([1.0, 1.0]), 1, 3).values[0]
    assert abs(lam - ref) <= 1e-9 * abs(ref)
    sp50 = eigenvalues(OperatorConfig([50.0]), 1, 2)
    assert np.allclose(sp50.values, [51.0, 54.0], rtol=1e-9)


# --------------------------------------------------------------- omega fits

def test_fit_omega_unshifted_spectrum():
    fit = fit_omega(Spectrum(1, np.arange(1, 41) ** 2.0))
    assert abs(fit.omega) <= 1e-6


def test_fit_omega_constant_shift_gives_mean_times_pi():
    # lam_n = n^2 + 1 is the q = 1 spectrum; its potential mean integrates to pi
    fit = fit_omega(Spectrum(1, np.arange(1, 41) ** 2.0 + 1.0))
    assert abs(fit.omega - PI) <= 1e-3


def test_fit_omega_linear_potential(cfg_linear):
    sp = eigenvalues(cfg_linear, 1, 30)
    fit = fit_omega(sp)
    assert abs(fit.omega - PI**2 / 2) / (PI**2 / 2) <= 0.02


def test_fit_omega_requires_enough_values():
    with pytest.raises(ValueError):
        fit_omega(Spectrum(1, np.arange(1, 10) ** 2.0))


# ------------------------------------------------------------- product form

def test_product_unit_factors():
    val, _ = delta_from_spectrum(Spectrum(1, np.arange(1, 41) ** 2.0), 0.0, 2000)
    assert abs(val - PI) <= 1e-12


def test_product_closed_tail_reproduces_sinc():
    val, _ = delta_from_spectrum(Spectrum(1, np.arange(1, 41) ** 2.0), 0.25, 2000)
    assert abs(val - 2.0) <= 1e-6


def test_product_exact_zero_on_retained_eigenvalue():
    val, err = delta_from_spectrum(Spectrum(1, np.arange(1, 41) ** 2.0), 4.0, 2000)
    assert val == 0.0 and err == 0.0


def test_product_plain_truncation_error_halves():
    spec = Spectrum(1, np.arange(1, 4001) ** 2.0 + 1.0)
    ref = math.sinh(math.sqrt(2) * PI) / math.sqrt(2)  # q=1 closed form at lam=-1
    e1 = abs(delta_from_spectrum(spec, -1.0, 2000, tail="none")[0] - ref)
    e2 = abs(delta_from_spectrum(spec, -1.0, 4000, tail="none")[0] - ref)
    assert 1.7 <= e1 / e2 <= 2.3


def test_product_matches_solver_for_shifted_potential(cfg_one):
    spec = eigenvalues(cfg_one, 1, 40)
    for lam in (-1.0, 0.3, -7.0):
        ref = char_delta(cfg_one, 1, lam)
        val, _ = delta_from_spectrum(spec, lam, 100)
        assert abs(val - ref) / abs(ref) <= 1e-3


# ------------------------------------------------------------ Weyl function

def test_weyl_solver_backend_closed_form(cfg_zero):
    w = WeylFunction.from_config(cfg_zero)
    assert abs(weyl_eval(w, -1.0) - (-1.0 / math.tanh(PI))) <= 1e-10


def test_weyl_large_negative_lambda_leading_order(cfg_zero):
    w = WeylFunction.from_config(cfg_zero)
    for s in (10.0, 30.0):
        assert abs(weyl_eval(w, -s * s) / (-s) - 1.0) <= 1e-3 / s


def test_weyl_cache_returns_identical_object(cfg_zero):
    w = WeylFunction.from_config(cfg_zero)
    assert w(-2.0) == w(-2.0)
    assert complex(-2.0) in w._cache


def test_weyl_cache_consistent_under_concurrent_readers(cfg_one):
    # many threads hitting the same evaluator must all see the same values
    from concurrent.futures import ThreadPoolExecutor

    w = WeylFunction.from_config(cfg_one, n=256)
    lams = [-1.0, -2.0, -3.0, -4.0]

    def sweep(_):
        return [w(lam) for lam in lams]

    with ThreadPoolExecutor(max_workers=8) as pool:
        results = list(pool.map(sweep, range(16)))
    for got in results[1:]:
        assert got == results[0]


def test_eigenvalues_accept_omega_hint(cfg_one):
    from idespec.operators import PI as _pi

    sp = eigenvalues(cfg_one, 1, 3, omega_hint=_pi)
    assert np.allclose(sp.values, [2.0, 5.0, 10.0], rtol=1e-9)
    assert sp.omega_hint == _pi


def test_weyl_product_backend_exact_spectra():
    s1 = Spectrum(1, np.arange(1, 2001) ** 2.0)
    s2 = Spectrum(2, (np.arange(1, 2001) - 0.5) ** 2)
    w = WeylFunction.from_spectra(s1, s2, n_prod=2000, tail="none")
    expect = -1.0 / math.tanh(PI)
    assert abs(w(-1.0) - expect) / abs(expect) <= 1e-3


def test_weyl_product_pole_guard():
    s1 = Spectrum(1, np.arange(1, 41) ** 2.0)
    s2 = Spectrum(2, (np.arange(1, 41) - 0.5) ** 2)
    w = WeylFunction.from_spectra(s1, s2)
    with pytest.raises(WeylPoleError):
        w(4.0)


def test_weyl_solver_pole_guard(cfg_zero):
    w = WeylFunction.from_config(cfg_zero)
    with pytest.raises(WeylPoleError):
        w(1.0)


def test_weyl_table_backend_exact_match_only():
    from idespec.errors import LadderMismatchError

    w = WeylFunction.from_table([-1.0, -4.0], [0.5, 0.25])
    assert w(-4.0) == 0.25
    with pytest.raises(LadderMismatchError):
        w(-2.0)


def test_weyl_solver_and_product_backends_agree(cfg_one):
    # the two-spectra route must reproduce the direct evaluation within the
    # product truncation error
    ws = WeylFunction.from_config(cfg_one)
    wp = WeylFunction.from_spectra(eigenvalues(cfg_one, 1, 40),
                                   eigenvalues(cfg_one, 2, 40), n_prod=2000)
    for lam in (-1.0, -5.0, 0.4):
        assert abs(ws(lam) - wp(lam)) / abs(ws(lam)) <= 1e-3


def test_spectral_point_branch_conventions():
    from idespec import SpectralPoint

    for lam in (4.0, 0.0, -1.0, 2.0 + 1.0j, 2.0 - 1.0j, -3.0 - 0.5j):
        sp = SpectralPoint.from_lambda(lam)
        assert abs(sp.rho**2 - complex(lam)) <= 1e-12 * (1.0 + abs(complex(lam)))
        assert sp.rho.imag >= 0.0
    assert SpectralPoint.from_lambda(4.0).rho == 2.0
    assert SpectralPoint.from_lambda(-1.0).rho == 1.0j
    with pytest.raises(ValueError):
        SpectralPoint.from_lambda(float("inf"))


# -------------------------------------------------------------- adjoint dual

def test_verify_adjoint_zero_potential(cfg_zero):
    chk = verify_adjoint(cfg_zero, -1.0)
    assert chk.max_residual <= 1e-10


def test_verify_adjoint_with_kernel(cfg_linear_kernel):
    chk = verify_adjoint(cfg_linear_kernel, -2.0)
    assert chk.max_residual <= 1e-7


def test_verify_adjoint_pole(cfg_zero):
    with pytest.raises(WeylPoleError):
        verify_adjoint(cfg_zero, 1.0)


# ------------------------------------------------------------ sector checks

def test_sector_zero_potential_passes(cfg_zero):
    rep = sector_asymptotics_check(cfg_zero, PI / 2, (5, 10, 20, 40), 0.3)
    assert rep.passed
    assert np.all(np.diff(rep.max_devs) < 0)


def test_sector_constant_potential_one_over_s(cfg_one):
    rep = sector_asymptotics_check(cfg_one, PI / 2, (5, 10, 20, 40), 0.3)
    assert rep.passed and 0.7 <= rep.decay_slope <= 1.3


def test_sector_with_kernel(cfg_linear_kernel):
    rep = sector_asymptotics_check(cfg_linear_kernel, PI / 2, (5, 10, 20, 40), 0.3)
    assert rep.passed


def test_sector_rejects_bad_eps(cfg_zero):
    with pytest.raises(ValueError):
        sector_asymptotics_check(cfg_zero, PI / 2, (5, 10), 0.0)
    with pytest.raises(ValueError):
        sector_asymptotics_check(cfg_zero, PI / 2, (5, 10), -0.3)


# ------------------------------------------------ asymptotic shift invariant

def test_eigenvalue_shift_sequences_settle(cfg_linear):
    sp1 = eigenvalues(cfg_linear, 1, 40)
    sp2 = eigenvalues(cfg_linear, 2, 40)
    assert np.all(np.sqrt(sp2.values) < np.sqrt(sp1.values))
    om = fit_omega(sp1).omega
    n = np.arange(1, 41)
    seq1 = n * (np.sqrt(sp1.values) - n - om / (2 * PI * n))
    c2 = n - 0.5
    seq2 = n * (np.sqrt(sp2.values) - c2 - om / (2 * PI * c2))
    assert np.max(np.abs(seq1[29:])) <= 0.1
    assert np.max(np.abs(seq2[29:])) <= 0.1
