"""Potentials, Volterra kernels and operator configuration.

The operator acts on [0, pi]:

    (L y)(x) = -y''(x) + q(x) y(x) + integral_0^x M(x,t) y(t) dt

and its adjoint integrates the transposed kernel over [x, pi].  Potentials are
either closed-form polynomials about x=0 or samples on the solver grid;
kernels are bivariate polynomials, separable sums of polynomial factors, or
zero.  Every kernel is normalised internally to a separable component list
(f_a(x), g_a(t)), which lets the marching scheme carry the memory integral as
exact auxiliary states w_a' = g_a(x) y(x).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

PI = math.pi

# Stage abscissae of the marching scheme (Cash-Karp); operator data is
# pre-evaluated at x_i + c_j*h so the hot loop does no function calls.
STAGE_OFFSETS = np.array([0.0, 1 / 5, 3 / 10, 3 / 5, 1.0, 7 / 8])


def _polyval(coeffs, x):
    return np.polynomial.polynomial.polyval(x, np.asarray(coeffs, dtype=complex))


def _compose_pi_minus(coeffs):
    """Coefficients of p(pi - x) given coefficients of p(x)."""
    p = np.polynomial.Polynomial(np.asarray(coeffs, dtype=complex))
    return p(np.polynomial.Polynomial([PI, -1.0])).coef.astype(complex)


def _lagrange_uniform(samples, h, xq, stencil=6):
    """Interpolate unit-spaced samples at query points xq (spacing h).

    Uses a sliding 6-point Lagrange stencil, O(h^6) for smooth data, so
    sampled potentials do not cap the order of the marching scheme.
    """
    samples = np.asarray(samples, dtype=complex)
    n = samples.size - 1
    if n + 1 < stencil:
        stencil = n + 1
    t = np.asarray(xq, dtype=float) / h
    base = np.clip(np.floor(t).astype(int) - (stencil // 2 - 1), 0, n - stencil + 1)
    xi = t - base
    out = np.zeros(t.shape, dtype=complex)
    for r in range(stencil):
        w = np.ones_like(xi)
        for s in range(stencil):
            if s != r:
                w *= (xi - s) / (r - s)
        out += w * samples[base + r]
    return out


class PolyPotential:
    """q(x) = sum_j coeffs[j] * x**j on [0, pi]; coefficients may be complex."""

    def __init__(self, coeffs):
        c = np.atleast_1d(np.asarray(coeffs, dtype=complex))
        if c.ndim != 1 or c.size == 0:
            raise ValueError("polynomial coefficients must be a non-empty 1-d sequence")
        if not np.all(np.isfinite(c)):
            raise ValueError("polynomial coefficients must be finite")
        self.coeffs = c

    def values(self, x):
        return _polyval(self.coeffs, np.asarray(x, dtype=float))

    def reflected(self):
        return PolyPotential(_compose_pi_minus(self.coeffs))

    @property
    def is_real(self):
        return bool(np.all(np.abs(self.coeffs.imag) == 0.0))

    def __repr__(self):
        return f"PolyPotential({self.coeffs.tolist()})"


class SampledPotential:
    """q given as samples on the uniform grid x_i = i*pi/n (n+1 values)."""

    def __init__(self, samples):
        s = np.atleast_1d(np.asarray(samples, dtype=complex))
        if s.size < 17:
            raise ValueError("sampled potential needs at least 17 grid values (n >= 16)")
        if not np.all(np.isfinite(s)):
            raise ValueError("potential samples must be finite")
        self.samples = s

    @property
    def n(self):
        return self.samples.size - 1

    def values(self, x):
        return _lagrange_uniform(self.samples, PI / self.n, x)

    def reflected(self):
        return SampledPotential(self.samples[::-1].copy())

    @property
    def is_real(self):
        return bool(np.all(np.abs(self.samples.imag) == 0.0))

    def __repr__(self):
        return f"SampledPotential(<{self.samples.size} samples>)"


class ZeroKernel:
    """M identically zero; the memory term is short-circuited."""

    def components(self):
        return []

    def reflected(self):
        return self

    @property
    def is_real(self):
        return True

    def __repr__(self):
        return "ZeroKernel()"


class SeparableKernel:
    """M(x,t) = sum_i f_i(x) g_i(t) with polynomial factors, on 0 <= t <= x."""

    def __init__(self, terms):
        self.terms = []
        for f, g in terms:
            fc = np.atleast_1d(np.asarray(f, dtype=complex))
            gc = np.atleast_1d(np.asarray(g, dtype=complex))
            if not (np.all(np.isfinite(fc)) and np.all(np.isfinite(gc))):
                raise ValueError("kernel factor coefficients must be finite")
            self.terms.append((fc, gc))
        if not self.terms:
            raise ValueError("separable kernel needs at least one term")

    def components(self):
        return list(self.terms)

    def reflected(self):
        # K(xi, tau) = M(pi - tau, pi - xi): the roles of the factors swap and
        # each is composed with (pi - u); exact in the coefficients.
        return SeparableKernel(
            [(_compose_pi_minus(g), _compose_pi_minus(f)) for f, g in self.terms]
        )

    @property
    def is_real(self):
        return all(
            np.all(np.abs(f.imag) == 0.0) and np.all(np.abs(g.imag) == 0.0)
            for f, g in self.terms
        )

    def __repr__(self):
        return f"SeparableKernel(<{len(self.terms)} terms>)"


class PolyKernel(SeparableKernel):
    """M(x,t) = sum_{a,b} coeffs[a][b] * x**a * t**b on the triangle t <= x."""

    def __init__(self, coeffs):
        c = np.atleast_2d(np.asarray(coeffs, dtype=complex))
        if not np.all(np.isfinite(c)):
            raise ValueError("kernel coefficients must be finite")
        terms = []
        for a in range(c.shape[0]):
            row = c[a, :]
            if np.any(row != 0):
                f = np.zeros(a + 1, dtype=complex)
                f[a] = 1.0
                terms.append((f, row.copy()))
        if not terms:
            raise ValueError("all kernel coefficients are zero; use ZeroKernel")
        self.coeffs = c
        super().__init__(terms)

    def __repr__(self):
        return f"PolyKernel({self.coeffs.tolist()})"


def kernel_value(kernel, x, t):
    """Evaluate M(x, t); only ever meaningful for t <= x."""
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    out = np.zeros(np.broadcast(x, t).shape, dtype=complex)
    for f, g in kernel.components():
        out = out + _polyval(f, x) * _polyval(g, t)
    return out


def kernel_bound(kernel, samples=64):
    """Rough sup |M| over the triangle, used to bound spectra from below."""
    comps = kernel.components()
    if not comps:
        return 0.0
    xs = np.linspace(0.0, PI, samples)
    best = 0.0
    for i, x in enumerate(xs):
        ts = xs[: i + 1]
        best = max(best, float(np.max(np.abs(kernel_value(kernel, x, ts)))))
    return best


@dataclass
class SpectralPoint:
    """Spectral parameter lam with rho**2 = lam and Im rho >= 0."""

    lam: complex
    rho: complex

    @classmethod
    def from_lambda(cls, lam):
        if isinstance(lam, SpectralPoint):
            return lam
        lam = complex(lam)
        if not (math.isfinite(lam.real) and math.isfinite(lam.imag)):
            raise ValueError("spectral parameter must be finite")
        rho = complex(np.sqrt(complex(lam)))
        if rho.imag < 0 or (rho.imag == 0 and rho.real < 0):
            rho = -rho
        return cls(lam=lam, rho=rho)


class Prepared:
    """Operator data pre-evaluated on a grid of n steps for the marcher."""

    def __init__(self, config, n):
        self.n = n
        self.h = PI / n
        self.x = np.linspace(0.0, PI, n + 1)

        q = config.q
        if isinstance(q, SampledPotential) and q.n != n:
            raise ValueError(
                f"sampled potential has {q.n + 1} values but the grid needs {n + 1}"
            )
        # stage abscissae: x_i + c_j*h for i < n, plus plain node values
        xi = self.x[:-1, None] + STAGE_OFFSETS[None, :] * self.h
        self.qstage = np.ascontiguousarray(q.values(xi), dtype=complex)
        self.qnode = np.ascontiguousarray(q.values(self.x), dtype=complex)

        comps = config.kernel.components()
        m = len(comps)
        self.m = m
        self.fstage = np.zeros((m, n, 6), dtype=complex)
        self.gstage = np.zeros((m, n, 6), dtype=complex)
        self.fnode = np.zeros((m, n + 1), dtype=complex)
        self.gnode = np.zeros((m, n + 1), dtype=complex)
        for a, (f, g) in enumerate(comps):
            self.fstage[a] = _polyval(f, xi)
            self.gstage[a] = _polyval(g, xi)
            self.fnode[a] = _polyval(f, self.x)
            self.gnode[a] = _polyval(g, self.x)


class OperatorConfig:
    """The pair (q, M) defining the operator and, by reflection, its adjoint."""

    def __init__(self, q, kernel=None):
        if isinstance(q, (list, tuple, np.ndarray)):
            q = PolyPotential(q)
        self.q = q
        self.kernel = kernel if kernel is not None else ZeroKernel()
        self._prepared = {}
        self._adjoint = None

    @property
    def is_real(self):
        return self.q.is_real and self.kernel.is_real

    def prepared(self, n):
        prep = self._prepared.get(n)
        if prep is None:
            prep = Prepared(self, n)
            self._prepared[n] = prep
        return prep

    def adjoint_reflected(self):
        """Config whose forward problem is the adjoint in xi = pi - x."""
        if self._adjoint is None:
            self._adjoint = OperatorConfig(self.q.reflected(), self.kernel.reflected())
        return self._adjoint

    def __repr__(self):
        return f"OperatorConfig(q={self.q!r}, kernel={self.kernel!r})"
