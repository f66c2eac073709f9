"""Self-consistency battery: duality identities and asymptotics on one config.

Each check has an independent mathematical identity as its oracle, so a
failure localises a solver defect rather than a test artifact:

  * bilinear (Green-type) identity between forward and adjoint solutions,
  * endpoint transfer identities S(pi)=S*(0), C(pi)=-S*'(0),
  * agreement of the Weyl value computed from either side,
  * sector decay of the adjoint Weyl solution,
  * the gap identity  Nhat = -integral qhat Phi Phi~* dx  against a
    built-in perturbed model potential sharing the kernel.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import WeylPoleError
from .operators import PI, OperatorConfig, PolyPotential
from .solver import (
    DEFAULT_N,
    integrate_adjoint,
    integrate_forward,
    integrate_grid,
    solve_phi,
    solve_phi_star,
)
from .spectral import sector_asymptotics_check, verify_adjoint

GREEN_TOL = 1e-6
TRANSFER_TOL = 1e-7
WEYL_MATCH_TOL = 1e-7
GAP_TOL = 1e-6
SECTOR_MIN_SLOPE = 0.7

# perturbation defining the built-in model potential for the gap identity
GAP_PERTURBATION = (0.3, 0.2)


@dataclass
class CheckResult:
    name: str
    value: float
    tolerance: float
    passed: bool
    detail: str = ""

    def to_json_dict(self):
        return {
            "name": self.name,
            "value": self.value,
            "tolerance": self.tolerance,
            "passed": self.passed,
            "detail": self.detail,
        }


@dataclass
class VerificationReport:
    checks: list = field(default_factory=list)
    seed: int = 0

    @property
    def all_passed(self):
        return all(c.passed for c in self.checks)

    def to_json_dict(self):
        return {
            "seed": self.seed,
            "all_passed": self.all_passed,
            "checks": [c.to_json_dict() for c in self.checks],
        }


def _sample_lambda(rng, re_lo=-2.5, re_hi=2.5, im=1.0):
    return complex(rng.uniform(re_lo, re_hi), rng.uniform(-im, im))


def green_identity_residual(config, lam, mu, y_init, z_init, n=DEFAULT_N):
    """|(lam-mu) * int y z dx - [y z' - y' z]_0^pi| for independent solutions."""
    y = integrate_forward(config, lam, y_init[0], y_init[1], n)
    z = integrate_adjoint(config, mu, z_init[0], z_init[1], n)
    h = PI / n
    integral = integrate_grid(y.y * z.y, h)
    boundary = (y.y[-1] * z.yp[-1] - y.yp[-1] * z.y[-1]) - (
        y.y[0] * z.yp[0] - y.yp[0] * z.y[0]
    )
    return abs((complex(lam) - complex(mu)) * integral - boundary)


def weyl_gap_residual(config, lam, n=DEFAULT_N, perturbation=GAP_PERTURBATION):
    """|Nhat + int qhat Phi Phi~* dx| with the built-in perturbed model."""
    delta = np.asarray(perturbation, dtype=complex)
    base = config.q
    x = np.linspace(0.0, PI, n + 1)
    qhat = -np.polynomial.polynomial.polyval(x, delta)  # q - (q + delta)

    if isinstance(base, PolyPotential):
        coeffs = base.coeffs.copy()
        pad = max(0, delta.size - coeffs.size)
        coeffs = np.concatenate([coeffs, np.zeros(pad, dtype=complex)])
        coeffs[: delta.size] += delta
        model = OperatorConfig(PolyPotential(coeffs), config.kernel)
    else:
        samples = base.samples + np.polynomial.polynomial.polyval(
            np.linspace(0.0, PI, base.n + 1), delta
        )
        from .operators import SampledPotential

        model = OperatorConfig(SampledPotential(samples), config.kernel)

    phi, nval = solve_phi(config, lam, n)
    phi_star, nmodel = solve_phi_star(model, lam, n)
    nhat = nval - nmodel
    integral = integrate_grid(qhat * phi.y * phi_star.y, PI / n)
    return abs(nhat + integral)


def run_verification(config, n=DEFAULT_N, seed=0, cases=5):
    rng = np.random.default_rng(seed)
    checks = []

    worst = 0.0
    for _ in range(cases):
        lam = _sample_lambda(rng)
        mu = _sample_lambda(rng)
        y0 = (rng.uniform(-1, 1), rng.uniform(-1, 1))
        z0 = (rng.uniform(-1, 1), rng.uniform(-1, 1))
        worst = max(worst, green_identity_residual(config, lam, mu, y0, z0, n))
    checks.append(CheckResult("green_identity", worst, GREEN_TOL,
                              worst <= GREEN_TOL, f"{cases} random (lam, mu) pairs"))

    worst_s = worst_c = worst_n = 0.0
    done = 0
    while done < cases:
        lam = _sample_lambda(rng)
        try:
            ac = verify_adjoint(config, lam, n)
        except WeylPoleError:
            continue
        worst_s = max(worst_s, ac.res_transfer_s)
        worst_c = max(worst_c, ac.res_transfer_c)
        worst_n = max(worst_n, ac.res_weyl)
        done += 1
    checks.append(CheckResult("transfer_identity", max(worst_s, worst_c),
                              TRANSFER_TOL, max(worst_s, worst_c) <= TRANSFER_TOL,
                              f"S(pi)=S*(0) and C(pi)=-S*'(0) over {cases} lam"))
    checks.append(CheckResult("weyl_adjoint_match", worst_n, WEYL_MATCH_TOL,
                              worst_n <= WEYL_MATCH_TOL,
                              "N from forward vs adjoint construction"))

    sector = sector_asymptotics_check(config, PI / 2, (5.0, 10.0, 20.0, 40.0), 0.3, n)
    checks.append(CheckResult("sector_decay", sector.decay_slope, SECTOR_MIN_SLOPE,
                              sector.passed,
                              "fitted decay exponent of the sector deviation "
                              "(pass: at least 0.7)"))

    worst_gap = 0.0
    done = 0
    while done < cases:
        lam = complex(rng.uniform(-6.0, -2.0), rng.uniform(-0.5, 0.5))
        try:
            worst_gap = max(worst_gap, weyl_gap_residual(config, lam, n))
        except WeylPoleError:
            continue
        done += 1
    checks.append(CheckResult("weyl_gap_identity", worst_gap, GAP_TOL,
                              worst_gap <= GAP_TOL,
                              f"built-in perturbed model, {cases} random lam"))

    return VerificationReport(checks=checks, seed=seed)
