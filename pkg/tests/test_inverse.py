import math

import numpy as np
import pytest

from idespec import (
    DivergenceError,
    MomentProbeCase,
    OperatorConfig,
    SectorRay,
    TaylorPotential,
    WeylFunction,
    ZeroKernel,
    extract_coefficient,
    moment_probe,
    reconstruct,
    weyl_gap,
)
from idespec.operators import PI
from idespec.verify import weyl_gap_residual

from conftest import random_poly_config


# ------------------------------------------------------------------- helpers

def coeff_errors(report, truth):
    truth = np.asarray(truth, dtype=complex)
    out = np.zeros(truth.size)
    for j in range(truth.size):
        out[j] = abs(report.coeffs[j] - truth[j])
    return out


# ------------------------------------------------------------------ gap eval

def test_gap_vanishes_for_matching_model(cfg_one):
    nt = WeylFunction.from_config(cfg_one)
    for lam in (-2.0, -9.0, -30.0):
        assert abs(weyl_gap(nt, TaylorPotential([1.0]), ZeroKernel(), lam)) <= 1e-9


def test_gap_constant_potential_leading_order():
    # q = c vs model 0: Nhat ~ -c/(2s) + c^2/(8 s^3) on lam = -s^2
    c = 2.0
    nt = WeylFunction.from_config(OperatorConfig([c]))
    for s in (10.0, 20.0, 40.0):
        gap = weyl_gap(nt, TaylorPotential([0.0]), ZeroKernel(), -s * s)
        assert abs(gap + c / (2 * s)) <= 2.0 * c * c / (8 * s**3)


def test_gap_identity_random_cases():
    rng = np.random.default_rng(23)
    for _ in range(3):
        cfg = random_poly_config(rng, q_deg=2, m_deg=1)
        lam = complex(rng.uniform(-6, -2), rng.uniform(-0.5, 0.5))
        assert weyl_gap_residual(cfg, lam) <= 1e-6


def test_gap_order_of_growth(cfg_linear):
    # first nonzero gap coefficient at order k pins |Nhat| to (2s)^-(k+1):
    # q = x against the zero model has qhat_0 = 0, qhat_1 = 1
    nt = WeylFunction.from_config(cfg_linear)
    for s in (20.0, 40.0, 80.0):
        gap = weyl_gap(nt, TaylorPotential([0.0]), ZeroKernel(), -s * s)
        scaled = abs(gap) * (2 * s) ** 2
        assert 0.5 <= scaled <= 2.0


# --------------------------------------------------------------- extraction

def test_extract_zero_for_exact_model():
    nt = WeylFunction.from_config(OperatorConfig([2.0]))
    fit = extract_coefficient(nt, TaylorPotential([2.0]), ZeroKernel(), 0, SectorRay())
    assert abs(fit.value) <= 1e-6


def test_extract_constant_potential():
    nt = WeylFunction.from_config(OperatorConfig([2.0]))
    fit = extract_coefficient(nt, TaylorPotential([0.0]), ZeroKernel(), 0, SectorRay())
    assert abs(fit.value - 2.0) <= 1e-3


def test_extract_linear_slope(cfg_linear):
    nt = WeylFunction.from_config(cfg_linear)
    fit = extract_coefficient(nt, TaylorPotential([0.0]), ZeroKernel(), 1, SectorRay())
    assert abs(fit.value - 1.0) <= 0.01


def test_extract_divergence_on_erratic_target(cfg_zero):
    base = WeylFunction.from_config(cfg_zero)
    bad = lambda lam: base(lam) + 0.01 * lam  # growing spurious component
    with pytest.raises(DivergenceError) as err:
        extract_coefficient(bad, TaylorPotential([0.0]), ZeroKernel(), 0, SectorRay())
    assert err.value.k == 0


# ------------------------------------------------------------- reconstruct

def test_reconstruct_affine_round_trip():
    nt = WeylFunction.from_config(OperatorConfig([1.0, 1.0]))
    rep = reconstruct(nt, ZeroKernel(), 3)
    errs = coeff_errors(rep, [1.0, 1.0, 0.0, 0.0])
    tol = 0.02 * np.maximum(1.0, np.abs([1.0, 1.0, 0.0, 0.0]))
    assert np.all(errs <= tol)
    assert rep.radius_estimate > PI
    assert not rep.warnings


def test_reconstruct_zero_potential_with_kernel(kernel_xmt):
    nt = WeylFunction.from_config(OperatorConfig([0.0], kernel_xmt))
    rep = reconstruct(nt, kernel_xmt, 2)
    assert np.max(np.abs(rep.coeffs)) <= 1e-3


def test_reconstruct_round_trip_with_kernel_two_extra_orders(kernel_xmt):
    # degree-1 potential with kernel: recover up to two orders past the degree
    nt = WeylFunction.from_config(OperatorConfig([0.5, -1.0], kernel_xmt))
    rep = reconstruct(nt, kernel_xmt, 3)
    errs = coeff_errors(rep, [0.5, -1.0, 0.0, 0.0])
    assert errs[0] <= 0.05 * 0.5
    assert errs[1] <= 0.05 * 1.0
    assert errs[2] <= 0.05 and errs[3] <= 0.05


def test_reconstruct_ray_invariance():
    nt = WeylFunction.from_config(OperatorConfig([1.0, 1.0]))
    rep_a = reconstruct(nt, ZeroKernel(), 3)
    rep_b = reconstruct(nt, ZeroKernel(), 3, ray=SectorRay(theta=PI / 3))
    for j in range(4):
        diff = abs(rep_a.coeffs[j] - rep_b.coeffs[j])
        assert diff <= rep_a.fit_stderrs[j] + rep_b.fit_stderrs[j]


def test_reconstruct_kernel_mismatch_inflates_errors(kernel_xmt):
    truth = [0.0, 1.0, 0.0, -1.0]
    cfg = OperatorConfig([0.0, 1.0, 0.0, -1 / 6, 0.0, 1 / 120], kernel_xmt)
    matched = reconstruct(WeylFunction.from_config(cfg), kernel_xmt, 3)
    err_matched = np.max(coeff_errors(matched, truth))
    try:
        mismatched = reconstruct(WeylFunction.from_config(cfg), ZeroKernel(), 3)
    except DivergenceError:
        return
    err_mismatched = np.max(coeff_errors(mismatched, truth))
    assert err_mismatched >= 10.0 * err_matched


def test_reconstruct_flags_small_radius(kernel_xmt):
    cfg = OperatorConfig([0.0, 1.0, 0.0, -1 / 6, 0.0, 1 / 120], kernel_xmt)
    rep = reconstruct(WeylFunction.from_config(cfg), kernel_xmt, 4)
    assert rep.radius_estimate < PI
    assert any("analytic continuation" in w for w in rep.warnings)


def test_reconstruct_json_schema():
    nt = WeylFunction.from_config(OperatorConfig([1.0]))
    rep = reconstruct(nt, ZeroKernel(), 1)
    payload = rep.to_json_dict()
    assert set(payload) >= {"coeffs", "fit_residuals", "radius_estimate",
                            "ray", "warnings"}
    assert set(payload["ray"]) == {"theta", "s_values"}
    assert all(len(c) == 2 for c in payload["coeffs"])


# ----------------------------------------------------------------- sector ray

def test_sector_ray_validation():
    with pytest.raises(ValueError):
        SectorRay(theta=0.01)  # outside [delta, pi - delta]
    with pytest.raises(ValueError):
        SectorRay(s_values=np.array([1.0, 2.0]))  # too short
    with pytest.raises(ValueError):
        SectorRay(s_values=np.array([10.0, 20.0, 40.0, 200.0]))  # overflow cap
    ray = SectorRay(delta=PI / 4)
    assert abs(ray.eps0 - math.sin(PI / 4)) <= 1e-15


def test_default_ladder_is_capped():
    from idespec.inverse import default_ladder

    s = default_ladder()
    assert s[0] == 8.0 and s.size == 12
    assert s[-1] * PI <= 300.0


# -------------------------------------------------------------- taylor model

def test_taylor_potential_eval_and_radius():
    tp = TaylorPotential([0.0, 1.0, 0.0, -1.0])  # sin x through x^3
    x = np.array([0.0, 0.5, 1.0])
    assert np.max(np.abs(tp.values(x) - (x - x**3 / 6))) <= 1e-12
    assert tp.radius_estimate < PI
    flat = TaylorPotential([1.0, 1.0, 0.0, 0.0])
    assert flat.radius_estimate == math.inf


# ------------------------------------------------------------------- probes

def probe_ray(*s):
    return SectorRay(s_values=np.array(s, dtype=float))


def test_probe_pure_exponential():
    rep = moment_probe(MomentProbeCase(k=0, gamma=1.0), probe_ray(1, 2, 3, 5, 10))
    # deviation is exp(-2 pi s) plus quadrature noise: essentially zero by s=3
    assert rep.deviations[2] <= 1e-6
    assert rep.deviations[-1] <= 1e-8
    assert rep.decaying


def test_probe_polynomial_modulation_against_antiderivative():
    # closed forms: int x e^{ax} and int x^2 e^{ax} with a = 2 i rho
    case = MomentProbeCase(k=1, gamma=2.0, p_coeffs=(0.0, 1.0))
    s_vals = (2.0, 4.0, 8.0, 16.0, 32.0)
    rep = moment_probe(case, probe_ray(*s_vals))
    for s, val in zip(s_vals, rep.values):
        a = 2j * (1j * s)
        e = np.exp(a * PI)
        i1 = (PI * e / a) - (e - 1.0) / a**2
        i2 = (PI**2 * e / a) - 2.0 * PI * e / a**2 + 2.0 * (e - 1.0) / a**3
        expect = (-a) ** 2 * (2.0 * i1 + i2)
        assert abs(val - expect) <= 1e-8 * max(1.0, abs(expect))
    assert rep.decaying
    # deviation ~ 2/(2s) = 1/s
    assert abs(rep.deviations[-1] - 1.0 / 32.0) <= 0.2 / 32.0


def test_probe_bounded_perturbations_one_over_s():
    case = MomentProbeCase(k=0, gamma=1.0,
                           xi=lambda x, rho: math.sin(x),
                           eta=lambda x, rho: math.cos(x))
    rep = moment_probe(case, probe_ray(5, 10, 20, 40))
    assert rep.decaying
    # dominated by the eta term: 2 s/(s^2+1) ~ 2/s
    assert abs(rep.deviations[-1] - 0.05) <= 0.005


def test_probe_rejects_bad_p():
    with pytest.raises(ValueError):
        MomentProbeCase(k=0, gamma=1.0, p_coeffs=(1.0,))
