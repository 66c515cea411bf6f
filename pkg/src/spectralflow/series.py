"""Truncated Laurent/Puiseux series over complex coefficients.

This is the computational substrate for every local expansion in the
library: involutions at ramification points, residues of recursion
kernels, pole data of 1-forms, regularized limits.

A series tracks exponents k/r for integer k in a window [k_min, K]:

    f(z) = sum_{k=k_min..K}  c[k - k_min] * z**(k / r)

Coefficients below k_min are exactly zero; coefficients above the
truncation order K are *unknown*.  All arithmetic propagates the window
honestly and reading past it raises TruncationTooShort rather than
zero-filling.  Values are immutable; operations are pure.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    IncompatibleFrames,
    NotInvertibleAtOrigin,
    OddLeadingExponentForSqrt,
    SpectralFlowError,
    TruncationTooShort,
    ZeroLeadingCoefficient,
)

# Relative threshold below which a would-be leading coefficient counts as zero
# for inversion / square roots.
UNDERFLOW = 1e-13

DEFAULT_TRUNC = 24


@dataclass(frozen=True)
class LocalFrame:
    """Identifies the local coordinate a series lives in.

    coordinate_kind is one of 'sqrt_branch' (sqrt(X - X(a)) at a simple
    ramification point), 'x_shift' (X - X(p) at a finite pole),
    'inverse_root' (X**(-1/d) at a pole of X) or 'generic'.
    """

    center: complex | str
    coordinate_kind: str = "generic"
    expansion_radius_hint: float = 1.0

    @property
    def tag(self) -> str:
        return f"{self.coordinate_kind}@{self.center}"


class TruncSeries:
    """Immutable truncated Puiseux series in one local coordinate."""

    __slots__ = ("ram_index", "k_min", "coeffs", "var_tag")

    def __init__(self, coeffs, k_min=0, ram_index=1, var_tag=""):
        coeffs = np.asarray(coeffs, dtype=complex)
        if coeffs.ndim != 1:
            raise ValueError("coefficient array must be one-dimensional")
        if coeffs.size == 0:
            raise ValueError("series needs at least one tracked coefficient")
        # strip exact zeros at the low edge so k_min is the true valuation
        # (unless everything is zero, in which case keep the window).
        nz = np.nonzero(coeffs)[0]
        if nz.size and nz[0] > 0:
            k_min += int(nz[0])
            coeffs = coeffs[nz[0]:]
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "k_min", int(k_min))
        object.__setattr__(self, "ram_index", int(ram_index))
        object.__setattr__(self, "var_tag", var_tag)

    def __setattr__(self, *a):  # pragma: no cover
        raise AttributeError("TruncSeries is immutable")

    # -- basic structure ----------------------------------------------------

    @property
    def trunc_order(self) -> int:
        return self.k_min + len(self.coeffs) - 1

    def coeff(self, k: int) -> complex:
        """Coefficient of z**(k/r); exact zero below the window."""
        if k > self.trunc_order:
            raise TruncationTooShort(
                f"coefficient {k}/{self.ram_index} beyond truncation order "
                f"{self.trunc_order} (tag {self.var_tag!r})")
        if k < self.k_min:
            return 0.0 + 0.0j
        return complex(self.coeffs[k - self.k_min])

    def __repr__(self):
        head = ", ".join(
            f"{c:.6g}*z^({k}/{self.ram_index})" if self.ram_index != 1
            else f"{c:.6g}*z^{k}"
            for k, c in list(zip(range(self.k_min, self.trunc_order + 1),
                                 self.coeffs))[:4])
        return (f"TruncSeries[{head}, ...; K={self.trunc_order}, "
                f"tag={self.var_tag!r}]")

    def _check_compatible(self, other: "TruncSeries"):
        if self.ram_index != other.ram_index or (
                self.var_tag and other.var_tag
                and self.var_tag != other.var_tag):
            raise IncompatibleFrames(
                f"{self.var_tag!r}/r={self.ram_index} vs "
                f"{other.var_tag!r}/r={other.ram_index}")

    def _tag_with(self, other):
        return self.var_tag or other.var_tag

    # -- ring operations ----------------------------------------------------

    def __add__(self, other):
        if np.isscalar(other) or isinstance(other, complex):
            return self._add_scalar(complex(other))
        self._check_compatible(other)
        K = min(self.trunc_order, other.trunc_order)
        k_min = min(self.k_min, other.k_min)
        if K < k_min:
            raise TruncationTooShort("empty window in addition")
        n = K - k_min + 1
        out = np.zeros(n, dtype=complex)
        for s in (self, other):
            lo = s.k_min - k_min
            hi = min(s.trunc_order, K) - k_min + 1
            out[lo:hi] += s.coeffs[:hi - lo]
        return TruncSeries(out, k_min, self.ram_index, self._tag_with(other))

    def _add_scalar(self, c):
        if self.k_min > 0:
            pad = np.zeros(self.k_min, dtype=complex)
            coeffs = np.concatenate([pad, self.coeffs])
            coeffs[0] += c
            return TruncSeries(coeffs, 0, self.ram_index, self.var_tag)
        if self.trunc_order < 0:
            raise TruncationTooShort("scalar addition beyond truncation")
        coeffs = self.coeffs.copy()
        coeffs[-self.k_min] += c
        return TruncSeries(coeffs, self.k_min, self.ram_index, self.var_tag)

    __radd__ = __add__

    def __neg__(self):
        return TruncSeries(-self.coeffs, self.k_min, self.ram_index,
                           self.var_tag)

    def __sub__(self, other):
        return self + (-other if isinstance(other, TruncSeries)
                       else -complex(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if np.isscalar(other) or isinstance(other, complex):
            return TruncSeries(self.coeffs * complex(other), self.k_min,
                               self.ram_index, self.var_tag)
        self._check_compatible(other)
        k_min = self.k_min + other.k_min
        K = min(self.trunc_order + other.k_min,
                other.trunc_order + self.k_min)
        n = K - k_min + 1
        if n <= 0:
            raise TruncationTooShort("empty window in multiplication")
        full = np.convolve(self.coeffs, other.coeffs)
        return TruncSeries(full[:n], k_min, self.ram_index,
                           self._tag_with(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if np.isscalar(other) or isinstance(other, complex):
            return self * (1.0 / complex(other))
        return self * other.invert()

    def __rtruediv__(self, other):
        return self.invert() * other

    def __pow__(self, n: int):
        if not isinstance(n, int):
            raise TypeError("only integer powers")
        if n < 0:
            return self.invert() ** (-n)
        if n == 0:
            return constant(1.0, self.ram_index, self.var_tag,
                            len(self.coeffs))
        out, base = None, self
        while n:
            if n & 1:
                out = base if out is None else out * base
            n >>= 1
            if n:
                base = base * base
        return out

    # -- units --------------------------------------------------------------

    def _leading(self):
        # compare against neighbouring low orders only: large high-order
        # coefficients are normal for series with small convergence radius
        scale = np.max(np.abs(self.coeffs[:4]))
        if scale == 0.0 or abs(self.coeffs[0]) <= UNDERFLOW * scale:
            raise ZeroLeadingCoefficient(
                f"leading coefficient {self.coeffs[0]} below threshold")
        return self.coeffs[0]

    def invert(self) -> "TruncSeries":
        """Multiplicative inverse; window length is preserved."""
        lead = self._leading()
        n = len(self.coeffs)
        u = self.coeffs / lead            # unit part, u[0] == 1
        inv = np.zeros(n, dtype=complex)
        inv[0] = 1.0
        for m in range(1, n):
            inv[m] = -np.dot(u[1:m + 1][::-1], inv[:m])
        return TruncSeries(inv / lead, -self.k_min, self.ram_index,
                           self.var_tag)

    def sqrt(self, branch: complex | None = None) -> "TruncSeries":
        """Square root; leading exponent must be even.

        ``branch`` selects the leading coefficient explicitly (it must
        square to the series' leading coefficient); by default the
        principal root is used.
        """
        lead = self._leading()
        if self.k_min % 2:
            raise OddLeadingExponentForSqrt(
                f"leading exponent {self.k_min}/{self.ram_index}")
        root = np.sqrt(lead) if branch is None else complex(branch)
        if abs(root * root - lead) > 1e-9 * abs(lead):
            raise ValueError("branch does not square to leading coefficient")
        n = len(self.coeffs)
        u = self.coeffs / lead
        s = np.zeros(n, dtype=complex)
        s[0] = 1.0
        for m in range(1, n):
            acc = u[m] - np.dot(s[1:m], s[1:m][::-1]) if m > 1 else u[m]
            s[m] = acc / 2.0
        return TruncSeries(s * root, self.k_min // 2, self.ram_index,
                           self.var_tag)

    # -- calculus -----------------------------------------------------------

    def differentiate(self) -> "TruncSeries":
        """d/dz, where z is the local coordinate (exponents k/r)."""
        ks = np.arange(self.k_min, self.trunc_order + 1)
        coeffs = self.coeffs * (ks / self.ram_index)
        return TruncSeries(coeffs, self.k_min - self.ram_index,
                           self.ram_index, self.var_tag)

    def antiderivative(self) -> "TruncSeries":
        """Primitive with zero constant; the z**-1 slot must vanish."""
        r = self.ram_index
        if self.k_min <= -r <= self.trunc_order and \
                abs(self.coeff(-r)) > 1e-13 * (np.max(np.abs(self.coeffs)) + 1e-300):
            raise SpectralFlowError(
                "nonzero residue term: primitive needs a log")
        ks = np.arange(self.k_min, self.trunc_order + 1)
        with np.errstate(divide="ignore", invalid="ignore"):
            coeffs = np.where(ks == -r, 0.0, self.coeffs / ((ks + r) / r))
        return TruncSeries(coeffs, self.k_min + r, self.ram_index,
                           self.var_tag)

    def residue(self) -> complex:
        """Coefficient of z**-1 of ``self`` viewed as g(z) in g(z) dz.

        Raises TruncationTooShort when the window ends before the
        z**-1 slot, i.e. when the residue is genuinely unknown.
        """
        r = self.ram_index
        if self.trunc_order < -r:
            raise TruncationTooShort("window ends below the residue slot")
        return self.coeff(-r)

    # -- composition and inversion -------------------------------------------

    def compose(self, inner: "TruncSeries") -> "TruncSeries":
        """self(inner(w)); inner must vanish at the origin."""
        if inner.k_min < 1:
            raise NotInvertibleAtOrigin(
                "composition needs inner series with inner(0) == 0")
        # exact constants get a generous window so they never clip products
        guard = inner.trunc_order + abs(self.k_min) + len(inner.coeffs) + 4
        out = None
        # positive-exponent part by Horner from the top
        top = self.trunc_order
        if top >= 0:
            acc = constant(self.coeff(top), inner.ram_index, inner.var_tag,
                           guard)
            for k in range(top - 1, -1, -1):
                acc = acc * inner + self.coeff(k)
            out = acc
        if self.k_min < 0:
            inv = inner.invert()
            pos = inv
            for k in range(-1, self.k_min - 1, -1):
                term = pos * self.coeff(k)
                out = term if out is None else out + term
                if k > self.k_min:
                    pos = pos * inv
        return out

    def functional_inverse(self) -> "TruncSeries":
        """Series g with self(g(w)) = w up to truncation (Newton)."""
        if self.k_min != 1:
            raise NotInvertibleAtOrigin(
                "need f(0) == 0 and f'(0) != 0 for functional inversion")
        a1 = self.coeffs[0]
        scale = np.max(np.abs(self.coeffs[:4]))
        if abs(a1) <= UNDERFLOW * scale:
            raise NotInvertibleAtOrigin("f'(0) numerically zero")
        n = len(self.coeffs)
        ident = identity(self.ram_index, self.var_tag, self.trunc_order)
        g = TruncSeries(np.array([1.0 / a1]), 1, self.ram_index, self.var_tag)
        # order-doubling Newton; each step is exact to its stated window
        order = 1
        df = self.differentiate()
        while order < n:
            order = min(2 * order, n)
            g = pad(g, order)
            corr = (self.compose(g) - ident) / df.compose(g)
            g = g - corr
        return truncate(g, n)

    # -- misc ----------------------------------------------------------------

    def shift(self, k: int) -> "TruncSeries":
        """Multiply by z**(k/r)."""
        return TruncSeries(self.coeffs, self.k_min + k, self.ram_index,
                           self.var_tag)

    def evaluate(self, z: complex) -> complex:
        """Numeric evaluation (principal branch for fractional exponents)."""
        z = complex(z)
        if self.ram_index == 1:
            val = 0.0 + 0.0j
            for c in self.coeffs[::-1]:
                val = val * z + c
            return val * z ** self.k_min
        return complex(sum(
            c * z ** (k / self.ram_index)
            for k, c in zip(range(self.k_min, self.trunc_order + 1),
                            self.coeffs)))

    def retag(self, var_tag: str) -> "TruncSeries":
        return TruncSeries(self.coeffs, self.k_min, self.ram_index, var_tag)


# -- constructors and helpers -------------------------------------------------

def constant(c, ram_index=1, var_tag="", order=DEFAULT_TRUNC):
    out = np.zeros(order + 1, dtype=complex)
    out[0] = c
    return TruncSeries(out, 0, ram_index, var_tag)


def identity(ram_index=1, var_tag="", order=DEFAULT_TRUNC):
    """The series z itself, tracked up to the given order."""
    out = np.zeros(order, dtype=complex)
    out[0] = 1.0
    return TruncSeries(out, 1, ram_index, var_tag)


def from_poly(coeffs, ram_index=1, var_tag="", order=DEFAULT_TRUNC):
    """Series of a polynomial sum(coeffs[k] z^k), exact, padded to order."""
    c = np.zeros(max(order + 1, len(coeffs)), dtype=complex)
    c[:len(coeffs)] = coeffs
    return TruncSeries(c[:order + 1], 0, ram_index, var_tag)


def truncate(f: TruncSeries, n_or_K: int, absolute=False) -> TruncSeries:
    """Keep ``n`` coefficients (or clip to absolute order K)."""
    K = n_or_K if absolute else f.k_min + n_or_K - 1
    n = min(K - f.k_min + 1, len(f.coeffs))
    if n <= 0:
        raise TruncationTooShort("truncation removes every coefficient")
    return TruncSeries(f.coeffs[:n], f.k_min, f.ram_index, f.var_tag)


def pad(f: TruncSeries, n: int) -> TruncSeries:
    """Declare coefficients up to window length n (only safe when the
    dropped information is known to be zero, e.g. inside Newton loops)."""
    if n <= len(f.coeffs):
        return f
    c = np.zeros(n, dtype=complex)
    c[:len(f.coeffs)] = f.coeffs
    return TruncSeries(c, f.k_min, f.ram_index, f.var_tag)
