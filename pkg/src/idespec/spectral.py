"""Characteristic functions, eigenvalue enumeration, Weyl function backends.

The two boundary-condition families are k=1 (Dirichlet at 0, zeros of
Delta_1 = S(pi, lam)) and k=2 (Neumann at 0, zeros of Delta_2 = C(pi, lam)).
Large-index zeros sit near the squared centres n and n - 1/2; the mean of the
potential shifts sqrt(lam_nk) by omega/(2*pi*n) with omega = integral of q.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import EnumerationIncompleteError, WeylPoleError
from .operators import PI, kernel_bound
from .solver import (
    DEFAULT_N,
    integrate_forward,
    integrate_grid,
    solve_phi_star,
    weyl_value,
)

__all__ = [
    "Spectrum",
    "char_delta",
    "eigenvalues",
    "OmegaFit",
    "fit_omega",
    "delta_from_spectrum",
    "WeylFunction",
    "weyl_eval",
    "AdjointCheck",
    "verify_adjoint",
    "SectorReport",
    "sector_asymptotics_check",
]


def _centers(k, n_values):
    n_values = np.asarray(n_values, dtype=float)
    return n_values if k == 1 else n_values - 0.5


def _check_k(k):
    if k not in (1, 2):
        raise ValueError(f"boundary family k must be 1 or 2, got {k!r}")


def char_delta(config, k, lam, n=DEFAULT_N):
    """Delta_1 = S(pi, lam) or Delta_2 = C(pi, lam)."""
    _check_k(k)
    if k == 1:
        return complex(integrate_forward(config, lam, 0.0, 1.0, n).y[-1])
    return complex(integrate_forward(config, lam, 1.0, 0.0, n).y[-1])


@dataclass
class Spectrum:
    """Ordered eigenvalue sequence of boundary family k."""

    k: int
    values: np.ndarray
    omega_hint: float | None = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)

    def __len__(self):
        return self.values.size


def _mean_potential_integral(config, n=512):
    x = np.linspace(0.0, PI, n + 1)
    return integrate_grid(config.q.values(x), PI / n).real


def eigenvalues(config, k, n_max, n=DEFAULT_N, omega_hint=None):
    """First n_max real zeros of Delta_k for a real-valued operator.

    Zeros are located by a sign-change scan in the signed-sqrt variable
    u = sign(lam)*sqrt|lam| (unit spacing of high zeros), bracketed around the
    asymptotic centres shifted by omega/(2*pi*center), refined by bisection
    plus one secant polish, and sanity-checked by counting sign changes below
    the (n_max)-th gap.
    """
    _check_k(k)
    if n_max < 1:
        raise ValueError("n_max must be positive")
    if not config.is_real:
        raise ValueError("eigenvalue enumeration requires real-valued q and M")

    omega = _mean_potential_integral(config) if omega_hint is None else float(omega_hint)
    shift = omega / PI  # lam_nk ~ center^2 + shift

    def delta(u):
        lam = u * abs(u)
        return char_delta(config, k, lam, n).real

    # scan bounds: bottom of the spectrum, top at the midpoint between the
    # model roots n_max and n_max + 1 (the additive shift model stays valid
    # at small n where the 1/n expansion of sqrt(lam) does not)
    xs = np.linspace(0.0, PI, 257)
    q_min = float(np.min(config.q.values(xs).real))
    lam_low = min(0.0, q_min - kernel_bound(config.kernel) - 1.0)
    c_pair = _centers(k, np.array([n_max, n_max + 1]))
    rho_model = np.sqrt(np.maximum(c_pair**2 + shift, 0.0))
    cutoff_u = 0.5 * float(rho_model[0] + rho_model[1])
    u_hi = cutoff_u + 0.25
    u_lo = -math.sqrt(-lam_low) if lam_low < 0 else 0.0

    def collect(du):
        grid = np.arange(u_lo, u_hi + du, du)
        vals = np.array([delta(u) for u in grid])
        roots = []
        for i in range(grid.size - 1):
            fa, fb = vals[i], vals[i + 1]
            if fa == 0.0:
                roots.append(grid[i] * abs(grid[i]))
                continue
            if fa * fb < 0.0:
                roots.append(_refine(delta, grid[i], grid[i + 1], fa, fb))
        if vals[-1] == 0.0:
            roots.append(grid[-1] * abs(grid[-1]))
        return np.array(sorted(roots))

    roots = collect(0.2)
    cutoff = cutoff_u * abs(cutoff_u)
    kept = roots[roots < cutoff]
    if kept.size != n_max:
        roots = collect(0.05)
        kept = roots[roots < cutoff]
    if kept.size != n_max:
        raise EnumerationIncompleteError(min(kept.size + 1, n_max))
    return Spectrum(k=k, values=kept, omega_hint=omega)


def _refine(delta, ua, ub, fa, fb, iters=60):
    """Bisection in u to ~1e-9 relative, then one secant polish in lambda."""
    for _ in range(iters):
        if (ub - ua) <= 1e-9 * max(1.0, abs(ua), abs(ub)):
            break
        um = 0.5 * (ua + ub)
        fm = delta(um)
        if fm == 0.0:
            return um * abs(um)
        if fa * fm < 0.0:
            ub, fb = um, fm
        else:
            ua, fa = um, fm
    la, lb = ua * abs(ua), ub * abs(ub)
    if fb == fa:
        return 0.5 * (la + lb)
    return lb - fb * (lb - la) / (fb - fa)


@dataclass
class OmegaFit:
    omega: float
    residual: float


def fit_omega(spectrum):
    """Estimate omega = integral of q from high-index eigenvalue shifts.

    Fits (sqrt(lam_nk) - center)*2*pi*center ~ omega + beta/center over the
    top half of the index range.
    """
    m = len(spectrum)
    if m < 20:
        raise ValueError("omega fit needs at least 20 eigenvalues")
    idx = np.arange(1, m + 1)
    c = _centers(spectrum.k, idx)
    lo = m // 2
    vals = spectrum.values[lo:]
    cc = c[lo:]
    pos = vals > 0
    if np.count_nonzero(pos) < 4:
        raise ValueError("omega fit needs positive eigenvalues in the top half")
    vals, cc = vals[pos], cc[pos]
    w = (np.sqrt(vals) - cc) * 2.0 * PI * cc
    a = np.column_stack([np.ones_like(cc), 1.0 / cc])
    coef, *_ = np.linalg.lstsq(a, w, rcond=None)
    resid = float(np.sqrt(np.mean((a @ coef - w) ** 2)))
    return OmegaFit(omega=float(coef[0]), residual=resid)


def _sin_sqrt(z):
    """Entire function sin(pi*sqrt(z))/sqrt(z); equals pi at z=0."""
    z = complex(z)
    if abs(z) < 1e-10:
        return PI * (1.0 - z * PI**2 / 6.0 + z * z * PI**4 / 120.0)
    r = cmath.sqrt(z)
    return cmath.sin(PI * r) / r


def _cos_sqrt(z):
    return cmath.cos(PI * cmath.sqrt(complex(z)))


def _shift_estimate(spectrum):
    """Mean gap lam_n - center^2, i.e. omega/pi, from the top half."""
    if spectrum.omega_hint is not None:
        return spectrum.omega_hint / PI
    m = len(spectrum)
    if m < 8:
        return 0.0
    idx = np.arange(1, m + 1)
    c = _centers(spectrum.k, idx)
    gaps = spectrum.values - c * c
    return float(np.mean(gaps[m // 2 :]))


def delta_from_spectrum(spectrum, lam, n_prod, tail="closed"):
    """Characteristic function rebuilt from an eigenvalue sequence.

    Returns (value, error_estimate).  tail="closed" multiplies the retained
    factors (lam_n - lam)/(center^2 + w - lam) by the telescoped closed form
    of the shifted zero-potential product (w = omega/pi absorbs the mean of
    the potential, which cuts the raw O(1/N) truncation error to the decay of
    lam_n - center^2 - w).  tail="none" is the plain truncated product, with
    the sequence model-extended by center^2 + w when it is shorter than
    n_prod.
    """
    lam = complex(lam)
    k = spectrum.k
    _check_k(k)
    vals = spectrum.values[:n_prod].astype(complex)
    if vals.size and np.any(vals == lam):
        return 0.0 + 0.0j, 0.0
    m = vals.size
    idx = np.arange(1, m + 1)
    csq = _centers(k, idx) ** 2
    w = _shift_estimate(spectrum)

    if tail == "closed":
        denom = csq + w - lam
        if m and np.min(np.abs(denom)) < 1e-12 * (1.0 + abs(lam)):
            return delta_from_spectrum(spectrum, lam, n_prod, tail="none")
        ratios = (vals - lam) / denom
        base = _sin_sqrt(lam - w) if k == 1 else _cos_sqrt(lam - w)
        value = base * complex(np.prod(ratios))
        rel = m * abs(ratios[-1] - 1.0) if m else 0.0
        return value, abs(value) * min(1.0, rel)

    if tail == "none":
        if m < n_prod:
            ext_idx = np.arange(m + 1, n_prod + 1)
            ext = _centers(k, ext_idx) ** 2 + w
            vals = np.concatenate([vals, ext.astype(complex)])
            idx = np.arange(1, n_prod + 1)
            csq = _centers(k, idx) ** 2
        factors = (vals - lam) / csq
        value = complex(np.prod(factors))
        if k == 1:
            value *= PI
        rel = abs(w - lam) / max(vals.size, 1)
        return value, abs(value) * min(1.0, rel)

    raise ValueError(f"unknown tail strategy {tail!r}")


class WeylFunction:
    """Evaluator of N(lam), backed by the forward solver, by two spectra
    through the product formulas, or by a fixed table of samples."""

    def __init__(self, kind, *, config=None, n=DEFAULT_N, spectra=None,
                 n_prod=2000, tail="closed", table=None, table_rtol=1e-9):
        self.kind = kind
        self.config = config
        self.n = n
        self.spectra = spectra
        self.n_prod = n_prod
        self.tail = tail
        self.table = table
        self.table_rtol = table_rtol
        self._cache = {}

    @classmethod
    def from_config(cls, config, n=DEFAULT_N):
        return cls("solver", config=config, n=n)

    @classmethod
    def from_spectra(cls, spec1, spec2, n_prod=2000, tail="closed"):
        if spec1.k != 1 or spec2.k != 2:
            raise ValueError("from_spectra expects (k=1 spectrum, k=2 spectrum)")
        return cls("product", spectra=(spec1, spec2), n_prod=n_prod, tail=tail)

    @classmethod
    def from_table(cls, lams, values, rtol=1e-9):
        lams = np.asarray(lams, dtype=complex)
        values = np.asarray(values, dtype=complex)
        return cls("table", table=(lams, values), table_rtol=rtol)

    def __call__(self, lam):
        key = complex(lam)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        val = self._evaluate(key)
        self._cache[key] = val
        return val

    def _evaluate(self, lam):
        if self.kind == "solver":
            return weyl_value(self.config, lam, self.n)
        if self.kind == "product":
            spec1, spec2 = self.spectra
            dist = np.min(np.abs(spec1.values[: self.n_prod] - lam)) if len(spec1) else np.inf
            if dist < 1e-10 * (1.0 + abs(lam)):
                raise WeylPoleError(f"lambda={lam} coincides with a recorded pole")
            d1, _ = delta_from_spectrum(spec1, lam, self.n_prod, self.tail)
            d2, _ = delta_from_spectrum(spec2, lam, self.n_prod, self.tail)
            if abs(d1) < 1e-12 * (1.0 + abs(lam)):
                raise WeylPoleError(f"lambda={lam} is within the pole guard of Delta_1")
            return -d2 / d1
        if self.kind == "table":
            lams, values = self.table
            if lams.size == 0:
                raise WeylPoleError("empty Weyl table")
            d = np.abs(lams - lam)
            i = int(np.argmin(d))
            if d[i] > self.table_rtol * (1.0 + abs(lam)):
                from .errors import LadderMismatchError

                raise LadderMismatchError(
                    f"lambda={lam} is not among the tabulated samples "
                    "(interpolation is not supported; samples must lie on the ladder)"
                )
            return complex(values[i])
        raise ValueError(f"unknown backend {self.kind!r}")


def weyl_eval(w, lam):
    """Backend-dispatched N(lam)."""
    return w(lam)


@dataclass
class AdjointCheck:
    res_transfer_s: float
    res_transfer_c: float
    res_weyl: float

    @property
    def max_residual(self):
        return max(self.res_transfer_s, self.res_transfer_c, self.res_weyl)


def verify_adjoint(config, lam, n=DEFAULT_N):
    """Residuals of S(pi)=S*(0), C(pi)=-S*'(0) and N = N' for one lam."""
    c = integrate_forward(config, lam, 1.0, 0.0, n)
    s = integrate_forward(config, lam, 0.0, 1.0, n)
    d1 = s.y[-1]
    if abs(d1) < 1e-12 * (1.0 + abs(complex(lam))):
        raise WeylPoleError(f"lambda={lam} is within the pole guard of the spectrum")
    nval = -c.y[-1] / d1
    _, nstar = solve_phi_star(config, lam, n)
    from .solver import integrate_adjoint

    ss = integrate_adjoint(config, lam, 0.0, -1.0, n)
    return AdjointCheck(
        res_transfer_s=abs(s.y[-1] - ss.y[0]),
        res_transfer_c=abs(c.y[-1] + ss.yp[0]),
        res_weyl=abs(nval - nstar),
    )


@dataclass
class SectorReport:
    theta: float
    eps: float
    s_values: np.ndarray
    max_devs: np.ndarray
    decay_slope: float
    passed: bool
    rows: list = field(default_factory=list)


def sector_asymptotics_check(config, theta, s_list, eps, n=DEFAULT_N):
    """Decay of max_{x <= pi-eps} |Phi*(x) e^{-i rho x} - 1| along a sector ray.

    rho = s*exp(i*theta).  Phi* is the adjoint decaying solution, computed in
    its stable marching direction; with a zero kernel it coincides with Phi.
    Passes when the fitted log-log decay exponent is at least 0.7 (plain
    Sturm-Liouville data decays like 1/s; zero potential decays
    exponentially, hence the one-sided gate).
    """
    if not (0.0 < eps < PI / 2):
        raise ValueError("eps must lie in (0, pi/2); x must stay below pi - eps")
    delta_margin = 0.05
    if not (delta_margin <= theta <= PI - delta_margin):
        raise ValueError("theta must lie inside the sector [delta, pi - delta]")
    s_values = np.asarray(sorted(s_list), dtype=float)
    if s_values.size < 2:
        raise ValueError("need at least two moduli to fit a decay rate")
    devs = []
    rows = []
    for s in s_values:
        rho = s * cmath.exp(1j * theta)
        lam = rho * rho
        phi, _ = solve_phi_star(config, lam, n)
        mask = phi.x <= PI - eps
        dev = float(np.max(np.abs(phi.y[mask] * np.exp(-1j * rho * phi.x[mask]) - 1.0)))
        devs.append(dev)
        rows.append((float(s), dev))
    devs = np.array(devs)
    slope = -float(np.polyfit(np.log(s_values), np.log(np.maximum(devs, 1e-14)), 1)[0])
    return SectorReport(
        theta=float(theta),
        eps=float(eps),
        s_values=s_values,
        max_devs=devs,
        decay_slope=slope,
        passed=bool(slope >= 0.7),
        rows=rows,
    )
