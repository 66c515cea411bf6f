"""Spectral-curve backends: genus-0 rational and genus-1 Weierstrass.

A curve carries two meromorphic functions X, Y in a global chart (z on
the sphere, u on the torus), classified ramification points with their
sheet involutions as truncated series, pole frames of X, and a sheet
solver.  Everything is validated at build time; instances are immutable
and all queries are pure.
"""

from __future__ import annotations

import numpy as np

from .elliptic import EllipticTools
from .errors import (
    BadModulus,
    NearBranchPoint,
    NonSimpleRamification,
    NotRepresentable,
    RootFindingFailed,
    SingularCurve,
)
from .series import (
    DEFAULT_TRUNC,
    LocalFrame,
    TruncSeries,
    from_poly,
    truncate,
)

_ROOT_TOL = 1e-8


# -- rational functions -------------------------------------------------------

def _poly_shift(c: np.ndarray, z0: complex) -> np.ndarray:
    """Coefficients of p(z0 + s) from those of p(z) (Taylor shift)."""
    from math import comb
    c = np.asarray(c, dtype=complex)
    n = len(c)
    out = np.zeros(n, dtype=complex)
    for k in range(n):
        ck = c[k]
        if ck == 0:
            continue
        for j in range(k, -1, -1):
            out[j] += ck * comb(k, j) * z0 ** (k - j)
    return out


class RationalFunction:
    """P(z)/Q(z) with ascending complex coefficient arrays."""

    def __init__(self, num, den=(1.0,)):
        self.num = np.trim_zeros(np.asarray(num, dtype=complex), "b")
        self.den = np.trim_zeros(np.asarray(den, dtype=complex), "b")
        if self.num.size == 0:
            self.num = np.zeros(1, dtype=complex)
        if self.den.size == 0:
            raise ZeroDivisionError("zero denominator polynomial")

    def __call__(self, z):
        return (np.polynomial.polynomial.polyval(z, self.num)
                / np.polynomial.polynomial.polyval(z, self.den))

    def deriv(self) -> "RationalFunction":
        der = np.polynomial.polynomial.polyder
        mul = np.polynomial.polynomial.polymul
        num = np.polynomial.polynomial.polysub(
            mul(der(self.num), self.den), mul(self.num, der(self.den)))
        return RationalFunction(num, mul(self.den, self.den))

    def series(self, z0: complex, order: int, var_tag="") -> TruncSeries:
        n = max(len(self.num), len(self.den)) + order + 1
        p = np.zeros(n, dtype=complex)
        q = np.zeros(n, dtype=complex)
        p[:len(self.num)] = self.num
        q[:len(self.den)] = self.den
        ps = TruncSeries(_poly_shift(p, z0)[:order + 1 + len(self.num)], 0,
                         var_tag=var_tag)
        qs = TruncSeries(_poly_shift(q, z0)[:order + 1 + len(self.den)], 0,
                         var_tag=var_tag)
        # deformation sums carry removable 0/0 factors at special points
        return _trim_leading_noise(ps) / _trim_leading_noise(qs)

    def series_at_infinity(self, order: int, var_tag="w@inf") -> TruncSeries:
        """Series in w = 1/z."""
        dp, dq = len(self.num) - 1, len(self.den) - 1
        n = order + max(dp, dq) + 2
        pr = np.zeros(n, dtype=complex)
        qr = np.zeros(n, dtype=complex)
        pr[:dp + 1] = self.num[::-1]
        qr[:dq + 1] = self.den[::-1]
        ps = TruncSeries(pr, dq - dp, var_tag=var_tag)  # w^{-dp} P_rev -> shift
        qs = TruncSeries(qr, 0, var_tag=var_tag)
        return ps / qs

    def finite_poles(self):
        """[(location, multiplicity)] for roots of the denominator."""
        if len(self.den) == 1:
            return []
        roots = np.polynomial.polynomial.polyroots(self.den)
        return _cluster(roots)

    def degree_as_map(self) -> int:
        return max(len(self.num), len(self.den)) - 1

    def is_zero(self) -> bool:
        return not np.any(self.num)

    # small arithmetic closure, enough for curve deformations
    def add(self, other):
        pol = np.polynomial.polynomial
        num = pol.polyadd(pol.polymul(self.num, other.den),
                          pol.polymul(other.num, self.den))
        return RationalFunction(num, pol.polymul(self.den, other.den))

    def scale(self, c):
        return RationalFunction(self.num * c, self.den)

    def compose_affine(self, a, b=0.0):
        """self(a*z + b) as a rational function."""
        pol = np.polynomial.polynomial
        lin = np.array([b, a], dtype=complex)

        def comp(c):
            out = np.array([0.0], dtype=complex)
            for ck in c[::-1]:
                out = pol.polyadd(pol.polymul(out, lin), [ck])
            return out

        return RationalFunction(comp(self.num), comp(self.den))


def _cluster(roots, tol=1e-7):
    """Group numerically equal roots into (value, multiplicity) pairs."""
    roots = sorted(roots, key=lambda r: (round(r.real, 7), round(r.imag, 7)))
    out = []
    for r in roots:
        if out and abs(r - out[-1][0]) < tol * max(1.0, abs(r)):
            val, m = out[-1]
            out[-1] = ((val * m + r) / (m + 1), m + 1)
        else:
            out.append((r, 1))
    return [(complex(v), int(m)) for v, m in out]


# -- data records ---------------------------------------------------------------

class RamificationPoint:
    """Simple zero of dX with its local double-sheet structure.

    All series are in the local coordinate zeta = sqrt(X - X(a)):
    ``s_of_zeta`` maps zeta to the chart offset s = z - a, and the
    involution is s(-zeta).
    """

    def __init__(self, location, branch_value, s_of_zeta, zeta_of_s,
                 y_series, index):
        self.location = complex(location)
        self.branch_value = complex(branch_value)
        self.s_of_zeta = s_of_zeta
        self.zeta_of_s = zeta_of_s
        self.y_series = y_series          # Y(z(zeta)) as series in zeta
        self.index = index

    @property
    def involution(self) -> TruncSeries:
        return flip_parity(self.s_of_zeta)

    @property
    def y_bar_series(self) -> TruncSeries:
        return flip_parity(self.y_series)

    def frame(self):
        return LocalFrame(self.location, "sqrt_branch")


def flip_parity(f: TruncSeries) -> TruncSeries:
    """f(-zeta) for a series in zeta."""
    ks = np.arange(f.k_min, f.trunc_order + 1)
    return TruncSeries(f.coeffs * (-1.0 + 0j) ** (ks % 2), f.k_min,
                       f.ram_index, f.var_tag)


class XPole:
    """Pole of X with its canonical coordinate xi = X^(-1/d)."""

    def __init__(self, location, order, s_of_xi, xi_of_s, label):
        self.location = location          # chart value or "inf"
        self.order = int(order)           # d_p >= 1
        self.s_of_xi = s_of_xi            # chart offset as series in xi
        self.xi_of_s = xi_of_s
        self.label = label

    def frame(self):
        return LocalFrame(self.label, "inverse_root")


class SheetStructure:
    """The d preimages of a base value x, deterministically ordered."""

    def __init__(self, x, preimages, near_branch=False):
        self.x = complex(x)
        self.preimages = list(preimages)
        self.near_branch = bool(near_branch)

    def __len__(self):
        return len(self.preimages)


def _sort_points(pts):
    return sorted(pts, key=lambda z: (round(z.real, 9), round(z.imag, 9)))


# -- the curve ---------------------------------------------------------------------

class SpectralCurve:
    """Parametrized spectral curve with validated regularity."""

    def __init__(self, genus, order=DEFAULT_TRUNC):
        self.genus = genus
        self.order = order
        self.ramification_points: list[RamificationPoint] = []
        self.x_poles: list[XPole] = []

    # subclasses provide: x_value, y_value, dx_value, dy_value,
    # x_series(center, order), y_series(center, order), sheets_above,
    # deformed(...), d (degree of X as a map)

    def branch_values(self):
        return [r.branch_value for r in self.ramification_points]

    def _branch_scale(self):
        vals = [abs(v) for v in self.branch_values()]
        return max(vals) if vals else 1.0

    def check_near_branch(self, x, raise_on_hit=False):
        scale = max(self._branch_scale(), 1.0)
        near = any(abs(x - b) < 1e-6 * scale for b in self.branch_values())
        if near and raise_on_hit:
            raise NearBranchPoint(f"x = {x} within 1e-6*scale of a branch value")
        return near

    def _validate_ramification(self):
        locs = [r.location for r in self.ramification_points]
        for i, a in enumerate(locs):
            for b in locs[i + 1:]:
                if abs(a - b) < 1e-6:
                    raise NonSimpleRamification(
                        f"ramification points {a} and {b} collide")
        for r in self.ramification_points:
            odd = r.y_series - flip_parity(r.y_series)
            if abs(odd.coeff(1)) < 1e-10:
                raise SingularCurve(
                    f"dY vanishes at ramification point {r.location}")
            # involution must satisfy X(s(-zeta)) = X(a) + zeta^2
            fwd = self.x_series_in_zeta(r)
            res = max(abs(fwd.coeff(k) - (1.0 if k == 2 else 0.0))
                      for k in range(fwd.k_min, min(fwd.trunc_order,
                                                    self.order) + 1))
            if res > 1e-8:
                raise SingularCurve(
                    f"local coordinate at {r.location} inconsistent: {res}")

    def x_series_in_zeta(self, ram: RamificationPoint) -> TruncSeries:
        xs = self.x_series(ram.location, self.order + 2) - ram.branch_value
        return xs.compose(ram.s_of_zeta)

    def local_chart(self, ram: RamificationPoint, order: int):
        """(s_of_zeta, zeta_of_s, y_in_zeta) rebuilt at the given order.

        The recursion needs deeper windows than the validation series
        stored on the ramification points."""
        a = ram.location
        xs = self.x_series(a, order + 4) - ram.branch_value
        if self.genus == 1:
            coeffs = xs.coeffs.copy()
            ks = np.arange(xs.k_min, xs.trunc_order + 1)
            coeffs[(ks % 2).astype(bool)] = 0.0
            xs = TruncSeries(coeffs, xs.k_min, xs.ram_index, xs.var_tag)
        xs = _drop_low_noise(xs)
        zeta_of_s = xs.sqrt().retag(ram.s_of_zeta.var_tag)
        s_of_zeta = zeta_of_s.functional_inverse()
        ys = self.y_series(a, order + 4).compose(s_of_zeta)
        return s_of_zeta, zeta_of_s, ys


class Genus0Curve(SpectralCurve):
    def __init__(self, X: RationalFunction, Y: RationalFunction,
                 order=DEFAULT_TRUNC):
        super().__init__(0, order)
        self.X, self.Y = X, Y
        self.dX = X.deriv()
        self.dY = Y.deriv()
        self.d = X.degree_as_map()
        self._find_ramification()
        self._find_x_poles()
        self._validate_ramification()

    # chart helpers (z-chart; "inf" handled through w = 1/z)
    def x_value(self, z):
        return self.X(z)

    def y_value(self, z):
        return self.Y(z)

    def dx_value(self, z):
        return self.dX(z)

    def dy_value(self, z):
        return self.dY(z)

    def x_series(self, center, order, tag=None):
        if center == "inf":
            return self.X.series_at_infinity(order)
        return self.X.series(center, order, tag or f"s@{center:.6g}")

    def y_series(self, center, order, tag=None):
        if center == "inf":
            return self.Y.series_at_infinity(order)
        return self.Y.series(center, order, tag or f"s@{center:.6g}")

    def _find_ramification(self):
        pol = np.polynomial.polynomial
        num = pol.polysub(pol.polymul(pol.polyder(self.X.num), self.X.den),
                          pol.polymul(self.X.num, pol.polyder(self.X.den)))
        num = np.trim_zeros(num, "b")
        if len(num) <= 1:
            return
        roots = _cluster(pol.polyroots(num))
        den_roots = [p for p, _ in self.X.finite_poles()]
        idx = 0
        for a, mult in roots:
            if any(abs(a - q) < 1e-7 for q in den_roots):
                continue                      # cancelled by a pole of X
            if mult > 1:
                raise NonSimpleRamification(
                    f"dX has a zero of order {mult} at {a}")
            xa = self.X(a)
            xs = self.X.series(a, self.order + 4) - xa
            if abs(xs.coeff(1)) > 1e-9 * max(1.0, abs(xs.coeff(2))):
                raise NonSimpleRamification(
                    f"inconsistent vanishing of dX at {a}")
            xs = _drop_low_noise(xs)
            tag = f"zeta@{idx}"
            zeta_of_s = xs.sqrt().retag(tag)       # odd-start series in s
            s_of_zeta = zeta_of_s.functional_inverse()
            ys = self.Y.series(a, self.order + 4).compose(s_of_zeta)
            self.ramification_points.append(RamificationPoint(
                a, xa, s_of_zeta, zeta_of_s, ys, idx))
            idx += 1
        self.ramification_points.sort(
            key=lambda r: (round(r.location.real, 9),
                           round(r.location.imag, 9)))
        for i, r in enumerate(self.ramification_points):
            r.index = i

    def _find_x_poles(self):
        for p, m in self.X.finite_poles():
            xs = self.X.series(p, self.order + 4)
            xi = _root_coordinate(xs, m, f"xi@{p:.6g}")
            self.x_poles.append(XPole(p, m, xi.functional_inverse(), xi,
                                      f"{p:.6g}"))
        dp = len(self.X.num) - len(self.X.den)
        if dp >= 1:
            xs = self.X.series_at_infinity(self.order + 4 + dp)
            xi = _root_coordinate(xs, dp, "xi@inf")
            self.x_poles.append(XPole("inf", dp, xi.functional_inverse(), xi,
                                      "inf"))

    def sheets_above(self, x, allow_near_branch=False) -> SheetStructure:
        near = self.check_near_branch(x, raise_on_hit=not allow_near_branch)
        pol = np.polynomial.polynomial
        coeffs = pol.polysub(self.X.num, np.asarray([x]) * np.pad(
            self.X.den, (0, max(0, len(self.X.num) - len(self.X.den)))))
        coeffs = np.trim_zeros(np.atleast_1d(coeffs), "b")
        if len(coeffs) - 1 != self.d:
            raise RootFindingFailed(
                f"degree drop at x = {x}: preimages escape to infinity")
        roots = pol.polyroots(coeffs)
        if len(roots) != self.d:
            raise RootFindingFailed(f"expected {self.d} preimages at x = {x}")
        # Newton polish
        roots = [_newton(lambda z: self.X(z) - x, self.dX, r) for r in roots]
        return SheetStructure(x, _sort_points(roots), near)

    def deformed(self, dY: RationalFunction) -> "Genus0Curve":
        """New curve with Y -> Y + dY."""
        return Genus0Curve(self.X, self.Y.add(dY), self.order)

    def scaled(self, lam: complex) -> "Genus0Curve":
        """(X, Y) -> (lam X, Y / lam)."""
        return Genus0Curve(RationalFunction(self.X.num * lam, self.X.den),
                           self.Y.scale(1.0 / lam), self.order)


def _drop_low_noise(f: TruncSeries, upto: int = 2) -> TruncSeries:
    """Zero roundoff-level coefficients below exponent ``upto``.

    Used where a vanishing low order is known analytically (simple
    ramification) but root polishing leaves ~1e-16 residue.
    """
    coeffs = f.coeffs.copy()
    ks = np.arange(f.k_min, f.trunc_order + 1)
    scale = np.max(np.abs(coeffs))
    mask = (ks < upto) & (np.abs(coeffs) < 1e-9 * scale)
    coeffs[mask] = 0.0
    return TruncSeries(coeffs, f.k_min, f.ram_index, f.var_tag)


def _root_coordinate(x_series: TruncSeries, m: int, tag: str) -> TruncSeries:
    """xi(s) = X(s)^(-1/m) near a pole of X of order m (principal branch)."""
    inv = x_series.invert()               # k_min = m
    lead = inv.coeffs[0]
    root = np.exp(np.log(lead) / m)
    unit = inv.shift(-m) * (1.0 / lead)
    if m == 1:
        frac = unit
    elif m == 2:
        frac = unit.sqrt()
    else:
        # unit^(1/m) via exp(log/m)
        lg = (unit.differentiate() * unit.invert()).antiderivative()
        frac = _series_exp(lg * (1.0 / m))
    return (frac * root).shift(1).retag(tag)


def _series_exp(f: TruncSeries) -> TruncSeries:
    """exp of a series with f(0) = 0."""
    if f.k_min < 1:
        if abs(f.coeff(0)) > 0:
            raise ValueError("series exp needs vanishing constant term")
    n = f.trunc_order
    out = TruncSeries(np.concatenate([[1.0], np.zeros(n)]), 0,
                      f.ram_index, f.var_tag)
    # Newton-free: e' = e f' with e(0)=1, solved coefficientwise
    df = f.differentiate()
    e = np.zeros(n + 1, dtype=complex)
    e[0] = 1.0
    for m in range(1, n + 1):
        acc = 0.0 + 0.0j
        for j in range(m):
            acc += e[j] * df.coeff(m - 1 - j)
        e[m] = acc / m
    return TruncSeries(e, 0, f.ram_index, f.var_tag)


def _newton(f, df, z0, steps=40, tol=1e-14):
    z = complex(z0)
    for _ in range(steps):
        fz = f(z)
        d = df(z)
        if d == 0:
            break
        step = fz / d
        z -= step
        if abs(step) < tol * max(1.0, abs(z)):
            break
    return z


class Genus1Curve(SpectralCurve):
    """X = x_scale * wp(u), Y = R1(wp) + R2(wp) wp'(u) on C/(Z + tau Z)."""

    def __init__(self, tau, R1: RationalFunction, R2: RationalFunction,
                 x_scale=1.0, order=DEFAULT_TRUNC):
        if not (np.imag(tau) > 0):
            raise BadModulus(f"Im tau = {np.imag(tau)} must be positive")
        super().__init__(1, order)
        self.tau = complex(tau)
        self.R1, self.R2 = R1, R2
        self.x_scale = complex(x_scale)
        self.ell = EllipticTools(tau, order + 12)
        self.d = 2
        self._find_ramification()
        self._find_x_poles()
        self._validate_ramification()

    def x_value(self, u):
        return self.x_scale * self.ell.wp(u)

    def y_value(self, u):
        w = self.ell.wp(u)
        return self.R1(w) + self.R2(w) * self.ell.wp_prime(u)

    def dx_value(self, u):
        return self.x_scale * self.ell.wp_prime(u)

    def dy_value(self, u):
        w = self.ell.wp(u)
        wp = self.ell.wp_prime(u)
        wpp = 6.0 * w * w - 0.5 * self.ell.invariants_g2_g3()[0]
        dR1 = self.R1.deriv()
        dR2 = self.R2.deriv()
        return dR1(w) * wp + dR2(w) * wp * self.ell.wp_prime(u) \
            + self.R2(w) * wpp

    def x_series(self, center, order, tag=None):
        return self.ell.wp_series(center, order).retag(
            tag or f"s@{center:.6g}") * self.x_scale

    def y_series(self, center, order, tag=None):
        wp = self.ell.wp_series(center, order + 4)
        wpp = wp.differentiate()
        r1 = _compose_rational(self.R1, wp, order)
        r2 = _compose_rational(self.R2, wp, order)
        out = r1 + r2 * wpp
        return out.retag(tag or f"s@{center:.6g}")

    def _find_ramification(self):
        halves = [0.5, 0.5 * self.tau, 0.5 * (1 + self.tau)]
        for idx, a in enumerate(halves):
            xa = self.x_value(a)
            xs = self.x_series(a, self.order + 4) - xa
            # wp(a + s) is even in s at a half period: odd slots are noise
            coeffs = xs.coeffs.copy()
            ks = np.arange(xs.k_min, xs.trunc_order + 1)
            coeffs[(ks % 2).astype(bool)] = 0.0
            xs = _drop_low_noise(TruncSeries(coeffs, xs.k_min,
                                             xs.ram_index, xs.var_tag))
            tag = f"zeta@{idx}"
            zeta_of_s = xs.sqrt().retag(tag)
            s_of_zeta = zeta_of_s.functional_inverse()
            ys = self.y_series(a, self.order + 4).compose(s_of_zeta)
            self.ramification_points.append(RamificationPoint(
                a, xa, s_of_zeta, zeta_of_s, ys, idx))

    def _find_x_poles(self):
        xs = self.x_series(0.0, self.order + 6)
        xi = _root_coordinate(xs, 2, "xi@0")
        self.x_poles.append(XPole(0.0, 2, xi.functional_inverse(), xi, "0"))

    def sheets_above(self, x, allow_near_branch=False) -> SheetStructure:
        near = self.check_near_branch(x, raise_on_hit=not allow_near_branch)
        target = x / self.x_scale
        sols = []
        grid = 9
        for i in range(1, grid):
            for j in range(1, grid):
                u0 = (i / grid) + (j / grid) * self.tau
                u = _newton(lambda u: self.ell.wp(u) - target,
                            self.ell.wp_prime, u0, steps=60)
                if abs(self.ell.wp(u) - target) > 1e-9 * max(1.0, abs(target)):
                    continue
                u = self.ell.to_cell(u)
                if self.ell.is_lattice(u, tol=1e-6):
                    continue
                if not any(abs(u - s) < 1e-6 or
                           self.ell.is_lattice(u - s, tol=1e-6)
                           for s in sols):
                    sols.append(u)
        if len(sols) != 2:
            raise RootFindingFailed(
                f"wp inversion found {len(sols)} preimages at x = {x}")
        return SheetStructure(x, _sort_points(sols), near)

    def deformed(self, dR1: RationalFunction, dR2: RationalFunction):
        return Genus1Curve(self.tau, self.R1.add(dR1), self.R2.add(dR2),
                           self.x_scale, self.order)

    def scaled(self, lam: complex) -> "Genus1Curve":
        return Genus1Curve(self.tau, self.R1.scale(1.0 / lam),
                           self.R2.scale(1.0 / lam), self.x_scale * lam,
                           self.order)


def _compose_rational(R: RationalFunction, inner: TruncSeries,
                      order: int) -> TruncSeries:
    """R(inner) where inner may be a Laurent series (wp at its pole).

    Denominators like wp'^2 have structural zeros at half periods, so
    roundoff-level leading coefficients are trimmed before division.
    """
    def poly_of(c):
        out = None
        for ck in np.asarray(c, dtype=complex)[::-1]:
            if out is None:
                out = ck * (inner ** 0)
            else:
                out = out * inner + ck
        return out

    num = _trim_leading_noise(poly_of(R.num))
    den = _trim_leading_noise(poly_of(R.den))
    return num / den


def _trim_leading_noise(f: TruncSeries, rel=3e-12) -> TruncSeries:
    """Zero leading coefficients that are roundoff relative to the head."""
    coeffs = f.coeffs.copy()
    scale = np.max(np.abs(coeffs[:8])) if len(coeffs) else 0.0
    i = 0
    while i < len(coeffs) - 1 and abs(coeffs[i]) < rel * scale:
        coeffs[i] = 0.0
        i += 1
    return TruncSeries(coeffs, f.k_min, f.ram_index, f.var_tag)


# -- sheet continuation ----------------------------------------------------------

def continue_sheets(curve, x_path, preimages):
    """Track preimages along a discrete x-path by nearest Newton basin."""
    current = list(preimages)
    for x in x_path:
        if curve.genus == 0:
            current = [
                _newton(lambda z: curve.x_value(z) - x, curve.dx_value, z)
                for z in current]
        else:
            current = [
                curve.ell.to_cell(_newton(
                    lambda z: curve.x_value(z) - x, curve.dx_value, z))
                for z in current]
    return current


# -- JSON schema --------------------------------------------------------------------

def _cnum(obj):
    if isinstance(obj, dict):
        return complex(obj.get("re", 0.0), obj.get("im", 0.0))
    return complex(obj)


def _rat(obj) -> RationalFunction:
    num = [_cnum(c) for c in obj.get("num", [0.0])]
    den = [_cnum(c) for c in obj.get("den", [1.0])]
    return RationalFunction(num, den)


def build_curve(spec: dict, order=DEFAULT_TRUNC) -> SpectralCurve:
    """Construct a curve from its JSON description.

    Schemas:
      {"backend": "rational", "X": {"num": [...], "den": [...]},
       "Y": {"num": [...], "den": [...]}}
      {"backend": "weierstrass", "tau": {"re": .., "im": ..},
       "Y": {"R1": {...}, "R2": {...}}}
    Complex numbers are written {"re": .., "im": ..}; bare reals are
    accepted as well.
    """
    backend = spec.get("backend")
    if backend == "rational":
        return Genus0Curve(_rat(spec["X"]), _rat(spec["Y"]), order)
    if backend == "weierstrass":
        tau = _cnum(spec["tau"])
        y = spec.get("Y", {})
        return Genus1Curve(tau, _rat(y.get("R1", {"num": [0.0]})),
                           _rat(y.get("R2", {"num": [0.0]})),
                           _cnum(spec.get("xscale", 1.0)), order)
    raise NotRepresentable(f"unknown backend {backend!r}")
