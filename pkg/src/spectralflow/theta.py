"""Genus-1 theta functions: lattice sums, derivatives, characteristics.

Evaluators are immutable and cache values per (argument, order); the
cache is read-mostly and safe for concurrent readers.  Lattice windows
are chosen adaptively so the dropped Gaussian tail is below 1e-15 of
the retained sum.
"""

from __future__ import annotations

import numpy as np

from .errors import BadModulus

_TAIL = 1e-16
_MIN_HALF = 8
_MAX_HALF = 400


def _check_tau(tau: complex):
    if not (np.imag(tau) > 0):
        raise BadModulus(f"Im tau = {np.imag(tau)} must be positive")


def _adaptive_ns(tau, center=0.0):
    """Integer window wide enough for every sum used here."""
    half = _MIN_HALF
    c = int(round(center))
    return np.arange(c - half, c + half + 1)


class ThetaEvaluator:
    """Riemann theta and the odd Jacobi theta for one modulus tau.

    Characteristics (a, b) refer to the classical theta with
    characteristics; derivative orders up to ~60 are supported (needed
    for local series expansions of elliptic functions).
    """

    def __init__(self, tau: complex, max_cached_order: int = 6):
        _check_tau(tau)
        self.tau = complex(tau)
        self.max_cached_order = max_cached_order
        self._cache: dict = {}

    # -- plain Riemann theta -------------------------------------------------

    def theta(self, u: complex, deriv: int = 0) -> complex:
        """d^k/du^k of theta(u|tau) = sum_n e^{2 i pi n u + i pi n^2 tau}."""
        key = ("t", complex(u), deriv)
        val = self._cache.get(key)
        if val is None:
            val = self._sum(complex(u), deriv, a=0.0, b=0.0)
            self._cache[key] = val
        return val

    def theta_char(self, a: float, b: float, u: complex,
                   deriv: int = 0) -> complex:
        """Theta with characteristics [a, b]:
        sum_n e^{i pi (n+a)^2 tau + 2 i pi (n+a)(u+b)}."""
        key = ("tc", a, b, complex(u), deriv)
        val = self._cache.get(key)
        if val is None:
            val = self._sum(complex(u), deriv, a=a, b=b)
            self._cache[key] = val
        return val

    def theta1(self, u: complex, deriv: int = 0) -> complex:
        """Odd Jacobi theta; theta1(u) = -theta_char(1/2, 1/2, u)."""
        return -self.theta_char(0.5, 0.5, u, deriv)

    def _sum(self, u, deriv, a, b):
        ns = _adaptive_ns(self.tau)
        while True:
            q = ns + a
            expo = 1j * np.pi * q * q * self.tau + 2j * np.pi * q * (u + b)
            shift = np.max(expo.real)
            terms = np.exp(expo - shift)
            if deriv:
                terms = terms * (2j * np.pi * q) ** deriv
            total = np.sum(terms)
            edge = max(abs(terms[0]), abs(terms[-1]))
            scale = max(abs(total), np.max(np.abs(terms)))
            if edge <= _TAIL * scale or len(ns) >= 2 * _MAX_HALF:
                return total * np.exp(shift)
            ns = np.arange(ns[0] * 2, ns[-1] * 2 + 1)

    # -- derived helpers -------------------------------------------------------

    def log_theta1_d(self, u: complex, order: int) -> complex:
        """(d/du)^order of ln theta1 at u, order in {1, 2, 3}."""
        t0 = self.theta1(u)
        t1 = self.theta1(u, 1)
        if order == 1:
            return t1 / t0
        t2 = self.theta1(u, 2)
        if order == 2:
            return t2 / t0 - (t1 / t0) ** 2
        t3 = self.theta1(u, 3)
        if order == 3:
            r1, r2 = t1 / t0, t2 / t0
            return t3 / t0 - 3 * r2 * r1 + 2 * r1 ** 3
        raise ValueError("order must be 1, 2 or 3")

    def theta1_taylor(self, u0: complex, n: int) -> np.ndarray:
        """Taylor coefficients of theta1 around u0, length n+1."""
        from math import factorial
        return np.array([self.theta1(u0, m) / factorial(m)
                         for m in range(n + 1)])


class BigTheta:
    """Lattice sum with scale-N displacement used by the dispersive layer.

    Theta(w | tau) = sum_p exp(i pi q^2 tau + q w + 2 i pi p nu),
    q = p + mu - N eps.  Derivatives are taken with respect to w, so
    each order brings down one factor q.  At genus 0 the evaluator
    degenerates to the constant 1 with vanishing derivatives.
    """

    def __init__(self, tau, mu=0.5, nu=0.5, n_value=1.0, eps=0.0):
        _check_tau(tau)
        self.tau = complex(tau)
        self.mu = float(mu)
        self.nu = float(nu)
        self.n_value = complex(n_value)
        self.eps = complex(eps)
        self._cache: dict = {}

    def value(self, w: complex, deriv: int = 0) -> complex:
        key = (complex(w), deriv)
        val = self._cache.get(key)
        if val is None:
            val = self._sum(complex(w), deriv)
            self._cache[key] = val
        return val

    def _sum(self, w, deriv):
        shift0 = self.mu - self.n_value * self.eps
        # center the window where the Gaussian peaks
        denom = 2 * np.pi * self.tau.imag
        center = -shift0.real + (w.imag + 2 * np.pi * self.tau.real *
                                 shift0.imag) / denom
        ns = _adaptive_ns(self.tau, center)
        while True:
            q = ns + shift0
            expo = 1j * np.pi * q * q * self.tau + q * w \
                + 2j * np.pi * ns * self.nu
            sh = np.max(expo.real)
            terms = np.exp(expo - sh)
            if deriv:
                terms = terms * q ** deriv
            total = np.sum(terms)
            edge = max(abs(terms[0]), abs(terms[-1]))
            scale = max(abs(total), np.max(np.abs(terms)))
            if edge <= _TAIL * scale or len(ns) >= 2 * _MAX_HALF:
                return total * np.exp(sh)
            half = len(ns)
            ns = np.arange(ns[0] - half, ns[-1] + half + 1)


class GenusZeroTheta:
    """Trivial theta provider so genus-0 and genus-1 share code paths."""

    def value(self, w, deriv: int = 0):
        return 1.0 if deriv == 0 else 0.0


def heat_equation_residual(tau, u, h=1e-4):
    """|d_tau theta - (1/4 i pi) d_u^2 theta| by central differences."""
    up = ThetaEvaluator(tau + h)
    dn = ThetaEvaluator(tau - h)
    mid = ThetaEvaluator(tau)
    dtau = (up.theta(u) - dn.theta(u)) / (2 * h)
    return abs(dtau - mid.theta(u, 2) / (4j * np.pi))


def big_theta_heat_residual(bt: BigTheta, w, h=1e-4):
    """|d_tau Theta - i pi Theta''| by central differences."""
    up = BigTheta(bt.tau + h, bt.mu, bt.nu, bt.n_value, bt.eps)
    dn = BigTheta(bt.tau - h, bt.mu, bt.nu, bt.n_value, bt.eps)
    dtau = (up.value(w) - dn.value(w)) / (2 * h)
    return abs(dtau - 1j * np.pi * bt.value(w, 2))
