"""Residue recursion for the symplectic covariant forms and invariants.

A form with 2 - 2g - n < 0 is stored as a fully contracted tensor over
the basis

    B_{a,k}(z) = Res_{z'->a} zeta_a(z')^{-k} B(z', z),   k odd,

one index per variable.  The generating property
B(z_a(zeta), w) = sum_k B_{a,k}(w) zeta^{k-1} dzeta closes the
recursion on these tensors: every residue is a series coefficient
read-off, and quadrature exists only as a test oracle.  Even-k slots
are structurally absent (the forms have no residues), which the
quadrature cross-checks confirm.

Tensors are immutable once computed; the memo table fills level by
level in increasing 2g + n.  Residue extraction is pure per
ramification point, so the per-point loop can run on a thread pool
with ordered reduction.
"""

from __future__ import annotations

import itertools

import numpy as np

from .errors import PoleAtRamificationPoint, TruncationTooShort
from .series import TruncSeries


class CorrForm:
    """Coefficient tensor of one (g, n) form over the odd-k basis."""

    def __init__(self, g, n, basis, tensor):
        self.g = int(g)
        self.n = int(n)
        self.basis = basis          # list of (ram_index, k), k odd
        self.tensor = tensor        # ndarray, shape (len(basis),) * n

    def pole_bound(self):
        return 6 * self.g + 2 * self.n - 4


def k_slots(g, n):
    """Odd orders tracked for (g, n): two slots beyond the sharp bound,
    so the pole-order property is a measurement, not a tautology."""
    return list(range(1, 6 * g + 2 * n, 2))


class RecursionEngine:
    """Topological recursion data for one spectral curve."""

    def __init__(self, curve):
        self.curve = curve
        self.rams = curve.ramification_points
        self.A = len(self.rams)
        self._memo: dict = {}
        self._fg: dict = {}
        self._plg: dict = {}
        self._prepare_local_data()

    # -- local expansions -------------------------------------------------------

    def _prepare_local_data(self):
        cv = self.curve
        mmax = self.max_tracked_k() + 2
        # the gamma tables and row builds burn one window slot per
        # series product, so the local charts are rebuilt much deeper
        # than the curve's validation series
        deep = cv.order + 2 * mmax + 16
        self.deep = deep
        self.s_of, self.zeta_of, self.y_of = [], [], []
        for r in self.rams:
            s_of, zeta_of, y_of = cv.local_chart(r, deep)
            self.s_of.append(s_of)
            self.zeta_of.append(zeta_of)
            self.y_of.append(y_of)
        self.zprime = []            # s'(zeta)
        self.ydiff_inv = []         # 1 / (Y(zeta) - Y(-zeta))
        self.phi = []               # primitive of Y dX in the zeta chart
        self.gamma = []             # {m: zeta(s)^-m as TruncSeries}
        from .curve import flip_parity
        for a, r in enumerate(self.rams):
            s_of, y_of = self.s_of[a], self.y_of[a]
            self.zprime.append(s_of.differentiate())
            dy = y_of - flip_parity(y_of)
            self.ydiff_inv.append(dy.invert())
            two_zeta = TruncSeries(
                np.concatenate([[2.0], np.zeros(deep + 4)]), 1,
                var_tag=y_of.var_tag)
            self.phi.append((y_of * two_zeta).antiderivative())
        for a in range(self.A):
            zin = self.zeta_of[a].invert()
            tab = {}
            acc = None
            for m in range(1, mmax + 1):
                acc = zin if acc is None else acc * zin
                tab[m] = acc
            self.gamma.append(tab)
        width = mmax + 6
        self.H = [self._regular_rows(a, mmax, width) for a in range(self.A)]

    def max_tracked_k(self):
        return max(k_slots(3, 1))

    def _regular_rows(self, a, mmax, width):
        """Analytic part of B_{a,m}(z_a(zeta)) as a row matrix."""
        cv = self.curve
        s = self.s_of[a]
        H = np.zeros((mmax, width), dtype=complex)
        gam = self.gamma[a]
        if cv.genus == 0:
            spow = {}
            sinv = s.invert()
            acc = sinv * sinv
            for q in range(0, mmax):
                spow[q] = acc       # s(zeta)^-(q+2)
                acc = acc * sinv
            sp = self.zprime[a]
            for m in range(1, mmax + 1):
                row = None
                for q in range(0, m):
                    gq = gam[m].coeff(-1 - q)
                    if gq == 0:
                        continue
                    t = spow[q] * (gq * (q + 1))
                    row = t if row is None else row + t
                if row is None:
                    continue
                row = row * sp          # chart leg dz = s'(zeta) dzeta
                for t in range(0, width):
                    val = row.coeff(t) if t <= row.trunc_order else 0.0
                    H[m - 1, t] = val
        else:
            F = cv.ell.wp_laurent_at_zero(self.deep + 6) - cv.ell.c0
            from math import factorial
            derivs = {0: F}
            for q in range(1, mmax):
                derivs[q] = derivs[q - 1].differentiate()
            sp = self.zprime[a]
            for m in range(1, mmax + 1):
                row = None
                for q in range(0, m):
                    gq = gam[m].coeff(-1 - q)
                    if gq == 0:
                        continue
                    # F^(q)(a - u) = (-1)^q F^(q)(u - a); u - a = s(zeta)
                    comp = derivs[q].compose(s)
                    t = comp * (gq * (-1.0) ** q / factorial(q))
                    row = t if row is None else row + t
                if row is None:
                    continue
                row = row * sp          # chart leg du = s'(zeta) dzeta
                for t in range(0, width):
                    val = row.coeff(t) if t <= row.trunc_order else 0.0
                    H[m - 1, t] = val
        return H

    def _cross_rows(self, b, a):
        """rows[m-1][t] of B_{b,m}(z_a(zeta)) for b != a (analytic)."""
        key = ("cross", b, a)
        if key in self._plg:
            return self._plg[key]
        cv = self.curve
        mmax = self.max_tracked_k() + 2
        width = mmax + 6
        rb, ra = self.rams[b], self.rams[a]
        sa = self.s_of[a]
        gam = self.gamma[b]
        C = np.zeros((mmax, width), dtype=complex)
        if cv.genus == 0:
            base = sa + (ra.location - rb.location)
            binv = base.invert()
            acc = binv * binv
            pows = {}
            for q in range(0, mmax):
                pows[q] = acc
                acc = acc * binv
            for m in range(1, mmax + 1):
                row = None
                for q in range(0, m):
                    gq = gam[m].coeff(-1 - q)
                    if gq == 0:
                        continue
                    t = pows[q] * (gq * (q + 1))
                    row = t if row is None else row + t
                if row is not None:
                    row = row * self.zprime[a]
                    for t in range(0, width):
                        C[m - 1, t] = row.coeff(t) \
                            if t <= row.trunc_order else 0.0
        else:
            from math import factorial
            F0 = -cv.ell.log_theta1_series(
                rb.location - ra.location, self.deep + 6)\
                .differentiate().differentiate()
            derivs = {0: F0}
            for q in range(1, mmax):
                derivs[q] = derivs[q - 1].differentiate()
            for m in range(1, mmax + 1):
                row = None
                for q in range(0, m):
                    gq = gam[m].coeff(-1 - q)
                    if gq == 0:
                        continue
                    # F^(q)(b - u) at u = a + s: series F^(q)(b-a-s)
                    # = (-1)^q (d/ds)^q-composed: build from derivs at
                    # argument (b - a) with s -> -s parity flip
                    comp = derivs[q].compose(sa * (-1.0))
                    t = comp * (gq / factorial(q))
                    row = t if row is None else row + t
                if row is not None:
                    row = row * self.zprime[a]
                    for t in range(0, width):
                        C[m - 1, t] = row.coeff(t) \
                            if t <= row.trunc_order else 0.0
        self._plg[key] = C
        return C

    # -- basis series -------------------------------------------------------------

    def ram_basis_series(self, b, m, a, lo, hi, sign=+1):
        """Coefficients of B_{b,m}(z_a(+-zeta))/dzeta on [lo, hi].

        For sign < 0 the form is pulled back through zeta -> -zeta
        including d(-zeta) = -dzeta.
        """
        n = hi - lo + 1
        data = np.zeros(n, dtype=complex)
        if a == b:
            if lo <= -(m + 1) <= hi:
                data[-(m + 1) - lo] = m
            H = self.H[a]
            if m - 1 < H.shape[0]:
                row = H[m - 1]
                jmax = min(len(row) - 1, hi)
                for j in range(max(lo, 0), jmax + 1):
                    data[j - lo] += row[j]
        else:
            C = self._cross_rows(b, a)
            if m - 1 < C.shape[0]:
                row = C[m - 1]
                jmax = min(len(row) - 1, hi)
                for j in range(max(lo, 0), jmax + 1):
                    data[j - lo] += row[j]
        if sign < 0:
            ks = np.arange(lo, hi + 1)
            data = data * (-1.0 + 0j) ** ((ks + 1) % 2)
        return data

    # -- the recursion ---------------------------------------------------------------

    def omega(self, g, n) -> CorrForm:
        if 2 - 2 * g - n >= 0:
            raise ValueError("only stable (g, n) carry tensors")
        key = (g, n)
        if key in self._memo:
            return self._memo[key]
        ks = k_slots(g, n)
        if max(ks) + 4 > self.curve.order:
            raise TruncationTooShort(
                f"curve order {self.curve.order} too small for (g, n) = "
                f"({g}, {n}); rebuild with order >= {max(ks) + 4}")
        basis = [(a, k) for a in range(self.A) for k in ks]
        tensor = np.zeros((len(basis),) * n, dtype=complex)
        for a in range(self.A):
            self._add_residues(g, n, a, basis, ks, tensor)
        form = CorrForm(g, n, basis, tensor)
        self._memo[key] = form
        return form

    def _sub_series(self, form: CorrForm, a, sign, lo, hi):
        """Contract slot 0 of ``form`` with the zeta_a chart: returns an
        array of shape (window, D, ..., D) over the *form's own* basis
        for the remaining slots."""
        n = hi - lo + 1
        rest = form.tensor.shape[1:]
        out = np.zeros((n,) + rest, dtype=complex)
        for i, (b, m) in enumerate(form.basis):
            dat = self.ram_basis_series(b, m, a, lo, hi, sign)
            out += dat.reshape((n,) + (1,) * len(rest)) * form.tensor[i]
        return out

    def _add_residues(self, g, n, a, basis, ks, tensor):
        J = n - 1
        lo = -(2 * (6 * g + 2 * n - 4) + 10)
        hi = max(ks) + 1
        inv_dy = self.ydiff_inv[a]
        terms = []  # (data over [lo, hi], [slot bases], axes in J order)

        # omega^{(g-1)}_{J+2}(z, zbar, J)
        if g >= 1:
            if 2 * (g - 1) + (J + 2) > 2:
                sub = self.omega(g - 1, J + 2)
                first = self._sub_series(sub, a, +1, lo, hi)
                acc = None
                for i, (b, m) in enumerate(sub.basis):
                    dat2 = self.ram_basis_series(b, m, a, lo, hi, -1)
                    piece = _axis_conv(first[:, i], lo, dat2, lo, lo, hi)
                    acc = piece if acc is None else acc + piece
                terms.append((acc, [sub.basis] * J, list(range(J))))
            else:
                # omega_2^(0)(z, zbar): the Bergman diagonal
                dat = np.zeros(hi - lo + 1, dtype=complex)
                if lo <= -2 <= hi:
                    dat[-2 - lo] = -0.25
                H = self.H[a]
                Lh = H.shape[0]
                for i in range(Lh):
                    for j in range(Lh - i):
                        t = i + j
                        if lo <= t <= hi:
                            dat[t - lo] += -H[i, j] * (-1.0) ** j
                terms.append((dat, [], []))

        # stable products
        j_ids = list(range(J))
        for h in range(0, g + 1):
            for r in range(0, J + 1):
                for I in itertools.combinations(j_ids, r):
                    g1, n1 = h, 1 + len(I)
                    g2, n2 = g - h, 1 + J - len(I)
                    if (g1, n1) == (0, 1) or (g2, n2) == (0, 1):
                        continue
                    s1, bas1 = self._factor(g1, n1, a, +1, lo, hi, ks, basis)
                    s2, bas2 = self._factor(g2, n2, a, -1, lo, hi, ks, basis)
                    data = _tensor_conv(s1, s2, lo, hi)
                    axes = list(I) + [j for j in j_ids if j not in I]
                    terms.append((data, bas1 + bas2, axes))

        for data, slot_bases, axes in terms:
            if axes:
                inv = np.argsort(axes)
                data = np.transpose(data, axes=[0] + [1 + int(p)
                                                      for p in inv])
                slot_bases = [slot_bases[int(p)] for p in inv]
            s = _axis_conv_ts(data, lo, inv_dy, lo, hi)
            for k in ks:
                row = _take(s, lo, -k)
                if row is None:
                    continue
                coeff = (-0.5 / k) * row
                self._embed(tensor, basis, (a, k), slot_bases, coeff)

    def _factor(self, g, n, a, sign, lo, hi, parent_ks, parent_basis):
        if (g, n) == (0, 2):
            # B(z(+-zeta), w): generating series over the parent basis
            win = hi - lo + 1
            out = np.zeros((win, len(parent_basis)), dtype=complex)
            for k in parent_ks:
                t = k - 1
                if lo <= t <= hi:
                    val = 1.0
                    if sign < 0:
                        val = (-1.0) ** ((t + 1) % 2)
                    out[t - lo, parent_basis.index((a, k))] = val
            return out, [parent_basis]
        sub = self.omega(g, n)
        return self._sub_series(sub, a, sign, lo, hi), \
            [sub.basis] * (n - 1)

    def _embed(self, tensor, basis, head, slot_bases, coeff):
        """tensor[head, emb(slots)] += coeff."""
        i0 = basis.index(head)
        if not slot_bases:
            tensor[i0] += coeff
            return
        idx = [np.array([basis.index(el) for el in sb], dtype=int)
               for sb in slot_bases]
        tensor[(i0,) + np.ix_(*idx)] += coeff

    # -- invariants --------------------------------------------------------------------

    def invariant(self, g):
        """F_g, g >= 2, from the primitive pairing at ramification
        points; independent of the primitive's constant because the
        one-point form has no residues."""
        if g < 2:
            raise ValueError("F_g from residues needs g >= 2")
        if g not in self._fg:
            self._fg[g] = self._invariant_with_phi(g, 0.0)
        return self._fg[g]

    def invariant_with_shifted_primitive(self, g, shift):
        return self._invariant_with_phi(g, complex(shift))

    def _invariant_with_phi(self, g, shift):
        w1 = self.omega(g, 1)
        lo, hi = -(6 * g + 2) - 2, 4
        total = 0.0 + 0.0j
        for a in range(self.A):
            ser = self._sub_series(w1, a, +1, lo, hi)
            phi = self.phi[a] + shift if shift else self.phi[a]
            prod = _axis_conv_ts(ser, lo, phi, lo, hi)
            total += _take(prod, lo, -1)
        return total / (2 - 2 * g)

    # -- evaluation ---------------------------------------------------------------------

    def leg_series(self, a, z, var="eta"):
        """TruncSeries in eta of B(z_a(eta), z)/(d eta d chart)."""
        cv = self.curve
        r = self.rams[a]
        s = self.s_of[a]
        sp = self.zprime[a]
        if cv.genus == 0:
            delta = s + (r.location - z)
            return sp * (delta * delta).invert()
        F = -cv.ell.log_theta1_series(r.location - z, cv.order + 8)\
            .differentiate().differentiate()
        return F.compose(s) * sp

    def basis_values(self, z):
        """{(a, k): B_{a,k}(z)/dchart} for all tracked k."""
        kmax = self.max_tracked_k()
        vals = {}
        for a in range(self.A):
            ser = self.leg_series(a, z)
            for k in range(1, kmax + 1, 2):
                vals[(a, k)] = ser.coeff(k - 1)
        return vals

    def evaluate(self, form: CorrForm, points):
        """omega_n^(g)(points) divided by the chart legs."""
        t = form.tensor
        for z in points:
            bv = self.basis_values(z)
            vec = np.array([bv[key] for key in form.basis])
            t = np.tensordot(t, vec, axes=([0], [0]))
        return complex(t)

    def residue_at_point_oracle(self, form, a, other_points,
                                radius=5e-2, samples=600):
        """Contour-quadrature oracle for the residue at ramification
        point a in the first slot, remaining slots frozen."""
        r = self.rams[a]
        sp = r.s_of_zeta.differentiate()
        total = 0.0 + 0.0j
        for i in range(samples):
            th = 2 * np.pi * (i + 0.5) / samples
            zeta = radius * np.exp(1j * th)
            z = r.location + r.s_of_zeta.evaluate(zeta)
            val = self.evaluate(form, [z] + list(other_points))
            total += val * sp.evaluate(zeta) * zeta
        return total / samples

    # -- cycle contractions -----------------------------------------------------------

    def b_cycle_vector(self, basis):
        """oint_B B_{a,k} per basis element (genus 1; zero at genus 0)."""
        out = np.zeros(len(basis), dtype=complex)
        if self.curve.genus != 1:
            return out
        for i, (a, k) in enumerate(basis):
            out[i] = 2j * np.pi * self.zprime[a].coeff(k - 1)
        return out

    def pole_pairing_vector(self, basis, center, j):
        """(1/j) Res_p xi^-j B_{a,k} per basis element: the dual-cycle
        pairing for the time t_{p,j}."""
        out = np.zeros(len(basis), dtype=complex)
        xp = self._pole_frame(center)
        xi_inv_j = xp.xi_of_s.invert() ** j
        for i, (a, k) in enumerate(basis):
            leg = self._basis_series_at_pole(a, k, xp)
            prod = leg * xi_inv_j.retag(leg.var_tag)
            out[i] = prod.residue() / j
        return out

    def segment_vector(self, basis, z_to, z_from):
        """int from z_from to z_to of B_{a,k}, by primitive endpoints."""
        out = np.zeros(len(basis), dtype=complex)
        prim_to = self._primitives_at(z_to)
        prim_from = self._primitives_at(z_from)
        for i, key in enumerate(basis):
            out[i] = prim_to[key] - prim_from[key]
        return out

    def _primitives_at(self, z):
        """{(a,k): P_{a,k}(z)} with dP = B_{a,k} (G-coefficient read)."""
        cv = self.curve
        kmax = self.max_tracked_k()
        out = {}
        for a, r in enumerate(self.rams):
            s = self.s_of[a]
            sp = self.zprime[a]
            if cv.genus == 0:
                delta = s + (r.location - z)
                ser = sp * delta.invert()
            else:
                lp = cv.ell.log_theta1_series(
                    r.location - z, cv.order + 8).differentiate()
                ser = lp.compose(s) * sp
            for k in range(1, kmax + 1, 2):
                out[(a, k)] = ser.coeff(k - 1)
        return out

    def _pole_frame(self, center):
        from .geometry import _omega_pole_frame
        from .forms import _same_center
        xp = next((p for p in self.curve.x_poles
                   if _same_center(p.location, center)), None)
        if xp is None:
            xp = _omega_pole_frame(self.curve, center)
        return xp

    def _basis_series_at_pole(self, a, k, xp):
        """Series in the pole chart of B_{a,k}(z_p(s))/ds.

        Built from the residue closed form
        B_{a,k}(z) = sum_q gamma^k_{-1-q} (q+1)/(z - a)^(q+2)  (sphere)
        and its theta analogue on the torus, so the conditioning is set
        by true function radii rather than bivariate kernel inverses.
        """
        key = (a, k, str(xp.location))
        if key in self._plg:
            return self._plg[key]
        cv = self.curve
        r = self.rams[a]
        gam = self.gamma[a][k]
        L = self.deep
        if cv.genus == 0 and xp.location == "inf":
            # z = 1/w: 1/(z - a)^(q+2) = w^(q+2)/(1 - a w)^(q+2); the
            # chart weight dz = -dw/w^2 contributes -w^-2
            base = TruncSeries(np.concatenate(
                [[1.0, -r.location], np.zeros(L)]), 0, var_tag="w@inf")
            binv = base.invert()
            ser = None
            acc = binv * binv
            for q in range(0, k):
                gq = gam.coeff(-1 - q)
                if gq != 0:
                    t = acc.shift(q + 2) * (gq * (q + 1))
                    ser = t if ser is None else ser + t
                acc = acc * binv
            ser = (ser * (-1.0)).shift(-2)
        elif cv.genus == 0:
            p = complex(xp.location)
            base = TruncSeries(np.concatenate(
                [[p - r.location, 1.0], np.zeros(L)]), 0,
                var_tag=f"s@{p:.6g}")
            binv = base.invert()
            ser = None
            acc = binv * binv
            for q in range(0, k):
                gq = gam.coeff(-1 - q)
                if gq != 0:
                    t = acc * (gq * (q + 1))
                    ser = t if ser is None else ser + t
                acc = acc * binv
        else:
            from math import factorial
            p = complex(xp.location)
            v0 = r.location - p
            if cv.ell.is_lattice(v0):
                raise PoleAtRamificationPoint(
                    "pole frame collides with a ramification point")
            # B_{a,k}(z) = sum_q gamma_{-1-q}/q! F^(q)(a - u);
            # u = p + s: argument v0 - s
            F = -cv.ell.log_theta1_series(v0, L + 6)\
                .differentiate().differentiate()
            ser = None
            neg = TruncSeries(np.concatenate(
                [[-1.0], np.zeros(L + 6)]), 1,
                var_tag=f"s@{p:.6g}")
            for q in range(0, k):
                gq = gam.coeff(-1 - q)
                if gq != 0:
                    t = F.compose(neg) * (gq / factorial(q))
                    ser = t if ser is None else ser + t
                F = F.differentiate()
            ser = ser.retag(f"s@{p:.6g}")
        self._plg[key] = ser
        return ser


# -- dense 2D series helpers ----------------------------------------------------------

def _tsc(f: TruncSeries, L):
    out = np.zeros(L, dtype=complex)
    for k in range(max(0, f.k_min), min(f.trunc_order, L - 1) + 1):
        out[k] = f.coeff(k)
    return out


def _unit(L):
    out = np.zeros(L, dtype=complex)
    out[0] = 1.0
    return out


def _shift_unit(L):
    out = np.zeros(L, dtype=complex)
    out[1] = 1.0
    return out


def _outer2(a, b):
    return np.outer(a, b)


def _mul2(A, B, L):
    n = 1 << int(np.ceil(np.log2(max(2, 2 * L))))
    fa = np.fft.fft2(A, s=(n, n))
    fb = np.fft.fft2(B, s=(n, n))
    return np.fft.ifft2(fa * fb)[:L, :L]


def _inv2(A, L):
    if A[0, 0] == 0:
        raise ZeroDivisionError("2D series inverse needs a constant term")
    out = np.zeros((L, L), dtype=complex)
    out[0, 0] = 1.0 / A[0, 0]
    size = 1
    while size < L:
        size = min(2 * size, L)
        Xa = _mul2(A[:size, :size], out[:size, :size], size)
        corr = -Xa
        corr[0, 0] += 2.0
        out[:size, :size] = _mul2(out[:size, :size], corr, size)
    return out


def _sub_xy(G, L):
    """(x - y) G(x, y)."""
    out = np.zeros((L, L), dtype=complex)
    out[1:, :] += G[:L - 1, :]
    out[:, 1:] -= G[:, :L - 1]
    return out


def _sub_ab(sb, sa, L):
    """s_b(eta) - s_a(zeta) as a 2D array (eta rows, zeta columns)."""
    out = np.zeros((L, L), dtype=complex)
    out[:len(sb), 0] += sb[:L]
    out[0, :len(sa)] -= sa[:L]
    return out


def _horner2(coeffs, V, L):
    out = np.zeros((L, L), dtype=complex)
    for c in coeffs[::-1]:
        out = _mul2(out, V, L)
        out[0, 0] += c
    return out


def _div_xy(F, L):
    """F / (x - y) for F vanishing on the diagonal."""
    Q = np.zeros((L, L), dtype=complex)
    for i in range(L - 2, -1, -1):
        for j in range(0, L - 1):
            val = F[i + 1, j]
            if j >= 1:
                val += Q[i + 1, j - 1]
            Q[i, j] = val
    return Q


# -- windowed convolutions --------------------------------------------------------------

def _axis_conv(block, off_block, dat2, off2, lo, hi):
    """Convolve the power axis (axis 0) of ``block`` with a 1D array."""
    rest = block.shape[1:]
    Lb, L2 = block.shape[0], len(dat2)
    m = Lb + L2 - 1
    nfft = 1 << int(np.ceil(np.log2(max(2, m))))
    fb = np.fft.fft(block, n=nfft, axis=0)
    f2 = np.fft.fft(dat2, n=nfft)
    conv = np.fft.ifft(
        fb * f2.reshape((nfft,) + (1,) * len(rest)), axis=0)[:m]
    off = off_block + off2
    n = hi - lo + 1
    out = np.zeros((n,) + rest, dtype=complex)
    t0 = max(0, lo - off)
    t1 = min(m - 1, hi - off)
    if t1 >= t0:
        out[t0 + off - lo:t1 + off - lo + 1] = conv[t0:t1 + 1]
    return out


def _axis_conv_ts(block, off_block, f: TruncSeries, lo, hi):
    return _axis_conv(block, off_block, f.coeffs, f.k_min, lo, hi)


def _tensor_conv(d1, d2, lo, hi):
    """Outer product over tensor axes, convolution over the power axis;
    both operands share offset ``lo``."""
    r1, r2 = d1.shape[1:], d2.shape[1:]
    L1, L2 = d1.shape[0], d2.shape[0]
    m = L1 + L2 - 1
    a = d1.reshape((L1, -1))
    b = d2.reshape((L2, -1))
    nfft = 1 << int(np.ceil(np.log2(max(2, m))))
    fa = np.fft.fft(a, n=nfft, axis=0)
    fb = np.fft.fft(b, n=nfft, axis=0)
    conv = np.fft.ifft(fa[:, :, None] * fb[:, None, :], axis=0)[:m]
    off = 2 * lo
    n = hi - lo + 1
    out = np.zeros((n,) + r1 + r2, dtype=complex)
    t0 = max(0, lo - off)
    t1 = min(m - 1, hi - off)
    if t1 >= t0:
        out[t0 + off - lo:t1 + off - lo + 1] = \
            conv[t0:t1 + 1].reshape((t1 - t0 + 1,) + r1 + r2)
    return out


def _take(data, lo, k):
    i = k - lo
    if 0 <= i < data.shape[0]:
        return data[i]
    return None


# -- special geometry ------------------------------------------------------------

def dF_dt(engine: RecursionEngine, g, center, j):
    """dF_g/dt_{p,j} (g >= 2): the dual-cycle pairing of the one-point
    form; sign pinned by the finite-difference oracles."""
    w1 = engine.omega(g, 1)
    pv = engine.pole_pairing_vector(w1.basis, center, j)
    return complex(w1.tensor @ pv)


def dF_deps(engine: RecursionEngine, g):
    """dF_g/deps (g >= 2, genus 1)."""
    w1 = engine.omega(g, 1)
    return complex(w1.tensor @ engine.b_cycle_vector(w1.basis))


def domega_dt(engine: RecursionEngine, g, n, center, j, points):
    """d omega_n^(g)(points)/dt_{p,j} at fixed X: the (n+1)-point form
    contracted with the dual cycle in its first slot.  The sign is
    opposite to the F_g case in this time normalization (pinned by the
    finite-difference oracles; the dilaton shift in F_g's definition
    flips the pairing)."""
    w = engine.omega(g, n + 1)
    pv = engine.pole_pairing_vector(w.basis, center, j)
    t = np.tensordot(w.tensor, pv, axes=([0], [0]))
    for z in points:
        bv = engine.basis_values(z)
        vec = np.array([bv[key] for key in w.basis])
        t = np.tensordot(t, vec, axes=([0], [0]))
    return -complex(t)


def domega_deps(engine: RecursionEngine, g, n, points):
    """d omega_n^(g)(points)/deps at fixed X (genus 1)."""
    w = engine.omega(g, n + 1)
    t = np.tensordot(w.tensor, engine.b_cycle_vector(w.basis),
                     axes=([0], [0]))
    for z in points:
        bv = engine.basis_values(z)
        vec = np.array([bv[key] for key in w.basis])
        t = np.tensordot(t, vec, axes=([0], [0]))
    return -complex(t)
