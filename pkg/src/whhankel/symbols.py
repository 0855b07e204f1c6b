"""Exact arithmetic for a computable sub-algebra of half-line convolution symbols.

A symbol is a finite almost-periodic sum plus shifted strictly-proper rational
parts,

    a(t) = sum_j  a_j e^(i d_j t)  +  sum_m  e^(i s_m t) R_m(t),

where each R_m = num/den has deg num < deg den and no real poles.  This is the
smallest class closed under products, reflection t -> -t, conjugation and
(where representable) inversion that still supports exact Wiener-Hopf
factorization.  Pointwise it is the Fourier transform of a summable
discrete-plus-L1 time kernel, which `time_kernel` recovers explicitly.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from . import poly
from .errors import (
    ImproperRational,
    Inconclusive,
    MeanMotionUnresolved,
    NotInvertible,
    NotMatching,
    NotRepresentable,
    RealPoleError,
    WindingUnresolved,
    XiNotUnimodular,
)

FREQ_TOL = 1e-12          # almost-periodic frequencies closer than this merge
COEFF_PRUNE = 1e-14       # canonicalization drops smaller coefficients
REAL_AXIS_TOL = 1e-9      # |Im root| below this counts as a real root


@dataclass(frozen=True)
class APTerm:
    """One almost-periodic exponential a_j * e^(i freq t)."""

    freq: float
    coeff: complex


@dataclass(frozen=True)
class RationalPart:
    """Strictly proper num/den with monic den and no real poles (ascending coeffs)."""

    num: tuple
    den: tuple

    def eval(self, t):
        return poly.pval(self.num, t) / poly.pval(self.den, t)


@dataclass(frozen=True)
class L0Term:
    """e^(i shift t) * R(t): the transform of a translated L1 kernel piece."""

    shift: float
    rational: RationalPart


@dataclass(frozen=True)
class GSymbol:
    ap: tuple
    l0: tuple

    # -- arithmetic ------------------------------------------------------

    def __add__(self, other):
        other = _coerce(other)
        return make_symbol(
            [(u.freq, u.coeff) for u in self.ap + other.ap],
            [(v.shift, v.rational.num, v.rational.den) for v in self.l0 + other.l0],
        )

    __radd__ = __add__

    def __neg__(self):
        return self * (-1)

    def __sub__(self, other):
        return self + (-_coerce(other))

    def __mul__(self, other):
        other = _coerce(other)
        ap_terms = []
        l0_terms = []
        for u in self.ap:
            for v in other.ap:
                ap_terms.append((u.freq + v.freq, u.coeff * v.coeff))
        for u in self.ap:
            for w in other.l0:
                l0_terms.append(
                    (u.freq + w.shift, poly.pscale(w.rational.num, u.coeff), w.rational.den)
                )
        for w in self.l0:
            for u in other.ap:
                l0_terms.append(
                    (w.shift + u.freq, poly.pscale(w.rational.num, u.coeff), w.rational.den)
                )
        for w1 in self.l0:
            for w2 in other.l0:
                l0_terms.append(
                    (
                        w1.shift + w2.shift,
                        poly.pmul(w1.rational.num, w2.rational.num),
                        poly.pmul(w1.rational.den, w2.rational.den),
                    )
                )
        return make_symbol(ap_terms, l0_terms)

    __rmul__ = __mul__

    # -- structure -------------------------------------------------------

    def is_zero(self):
        return not self.ap and not self.l0

    def eval(self, t):
        """Pointwise value; t may be a scalar or an ndarray."""
        t = np.asarray(t, dtype=float)
        out = np.zeros(t.shape, dtype=complex)
        for u in self.ap:
            out += u.coeff * np.exp(1j * u.freq * t)
        for w in self.l0:
            out += np.exp(1j * w.shift * t) * w.rational.eval(t)
        return out if out.shape else complex(out)

    def isclose(self, other, tol=1e-10):
        """Comparison of canonical forms, tolerant to rounding in coefficients."""
        other = _coerce(other)
        diff = self - other
        if diff.is_zero():
            return True
        scale = max(1.0, _sup_scale(self), _sup_scale(other))
        if any(abs(u.coeff) > tol * scale for u in diff.ap):
            return False
        if not diff.l0:
            return True
        # rational residue: sample around every pole region
        reach = 50.0
        for w in diff.l0:
            for z in poly.proots(w.rational.den):
                reach = max(reach, abs(z.real) + 10.0)
        t = np.linspace(-reach, reach, 4001)
        resid = np.zeros(t.shape, dtype=complex)
        for w in diff.l0:
            resid += np.exp(1j * w.shift * t) * w.rational.eval(t)
        return bool(np.max(np.abs(resid)) <= tol * scale)

    def norm_estimate(self):
        """Diagnostic upper-ish bound sum|a_j| + int|k|; not a certified norm."""
        total = sum(abs(u.coeff) for u in self.ap)
        for piece in time_kernel(self).pieces:
            total += piece.abs_mass()
        return total

    # -- serialization -----------------------------------------------------

    def to_dict(self):
        return {
            "ap": [
                {"freq": u.freq, "re": u.coeff.real, "im": u.coeff.imag}
                for u in self.ap
            ],
            "l0": [
                {
                    "shift": w.shift,
                    "num": [[c.real, c.imag] for c in w.rational.num],
                    "den": [[c.real, c.imag] for c in w.rational.den],
                }
                for w in self.l0
            ],
        }

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), **kw)

    @staticmethod
    def from_dict(d):
        return make_symbol(
            [(u["freq"], complex(u["re"], u["im"])) for u in d["ap"]],
            [
                (
                    w["shift"],
                    [complex(re, im) for re, im in w["num"]],
                    [complex(re, im) for re, im in w["den"]],
                )
                for w in d["l0"]
            ],
        )

    @staticmethod
    def from_json(s):
        return GSymbol.from_dict(json.loads(s))


def _coerce(x):
    if isinstance(x, GSymbol):
        return x
    if isinstance(x, (int, float, complex)):
        return constant(x)
    raise TypeError(f"cannot interpret {x!r} as a symbol")


def _sup_scale(a):
    s = sum(abs(u.coeff) for u in a.ap)
    for w in a.l0:
        num = np.asarray(w.rational.num)
        den = np.asarray(w.rational.den)
        s += np.max(np.abs(num)) / max(np.max(np.abs(den)), 1e-30)
    return s


def _canon_rational(num, den):
    num = poly.trim(num)
    den = poly.trim(den)
    if poly.is_zero(den):
        raise ZeroDivisionError("zero denominator in rational part")
    num, den = poly.reduce_rational(num, den)
    den_lead = den[-1]
    num = poly.trim(num / den_lead)
    den = poly.trim(den / den_lead)
    if poly.is_zero(num):
        return None
    if poly.degree(num) >= poly.degree(den):
        raise ImproperRational(poly.degree(num), poly.degree(den))
    bad = poly.real_roots(den, REAL_AXIS_TOL)
    if bad:
        raise RealPoleError(bad[0])
    return RationalPart(tuple(num), tuple(den))


def make_symbol(ap_terms, l0_terms):
    """Canonicalizing factory: merge like frequencies/shifts, prune noise."""
    # almost-periodic part
    ap_sorted = sorted(ap_terms, key=lambda fc: fc[0])
    merged_ap = []
    for freq, coeff in ap_sorted:
        if merged_ap and abs(freq - merged_ap[-1][0]) < FREQ_TOL:
            merged_ap[-1][1] += complex(coeff)
        else:
            merged_ap.append([float(freq), complex(coeff)])
    scale = max([1.0] + [abs(c) for _, c in merged_ap])
    ap = tuple(
        APTerm(f if abs(f) > FREQ_TOL else 0.0, c)
        for f, c in merged_ap
        if abs(c) > COEFF_PRUNE * scale
    )

    # rational part: fold terms with equal shift over a common denominator
    groups = {}
    order = []
    for shift, num, den in sorted(l0_terms, key=lambda t: t[0]):
        key = None
        for k in order:
            if abs(k - shift) < FREQ_TOL:
                key = k
                break
        if key is None:
            key = float(shift)
            order.append(key)
            groups[key] = (poly.trim(num), poly.trim(den))
        else:
            n0, d0 = groups[key]
            n1, d1 = poly.trim(num), poly.trim(den)
            if len(d0) == len(d1) and np.allclose(d0, d1, rtol=0, atol=0):
                groups[key] = (poly.padd(n0, n1), d0)
            else:
                groups[key] = (
                    poly.padd(poly.pmul(n0, d1), poly.pmul(n1, d0)),
                    poly.pmul(d0, d1),
                )
    l0 = []
    for k in order:
        n, d = groups[k]
        rat = _canon_rational(n, d)
        if rat is not None:
            l0.append(L0Term(k if abs(k) > FREQ_TOL else 0.0, rat))
    return GSymbol(ap=ap, l0=tuple(l0))


# --- constructors ---------------------------------------------------------

def zero():
    return GSymbol(ap=(), l0=())


def constant(c):
    if abs(c) <= COEFF_PRUNE:
        return zero()
    return GSymbol(ap=(APTerm(0.0, complex(c)),), l0=())


def one():
    return constant(1.0)


def exp_symbol(delta, coeff=1.0):
    """coeff * e^(i delta t)."""
    return make_symbol([(float(delta), complex(coeff))], [])


def rational_symbol(num, den, shift=0.0):
    """e^(i shift t) * num/den with deg num <= deg den; splits off the value at
    infinity as an almost-periodic term so the remainder is strictly proper."""
    num = poly.trim(num)
    den = poly.trim(den)
    if poly.degree(num) > poly.degree(den):
        raise ImproperRational(poly.degree(num), poly.degree(den))
    bad = poly.real_roots(den, REAL_AXIS_TOL)
    if bad:
        raise RealPoleError(bad[0])
    q, r = poly.pdivmod(num, den)
    ap_terms = []
    l0_terms = []
    if not poly.is_zero(q):
        ap_terms.append((shift, complex(q[0])))
    if not poly.is_zero(r):
        l0_terms.append((shift, r, den))
    return make_symbol(ap_terms, l0_terms)


def chi(n=1):
    """((t - i)/(t + i))^n, the half-line analogue of the circle monomial."""
    n = int(n)
    if n == 0:
        return one()
    k = abs(n)
    num = poly.pfromroots([1j] * k if n > 0 else [-1j] * k)
    den = poly.pfromroots([-1j] * k if n > 0 else [1j] * k)
    return rational_symbol(num, den)


# --- involutions ------------------------------------------------------------

def tilde(a: GSymbol) -> GSymbol:
    """Reflection a(t) -> a(-t)."""
    ap = [(-u.freq, u.coeff) for u in a.ap]
    l0 = []
    for w in a.l0:
        num = np.asarray(w.rational.num, dtype=complex).copy()
        den = np.asarray(w.rational.den, dtype=complex).copy()
        num[1::2] *= -1
        den[1::2] *= -1
        sign = (-1.0) ** (len(den) - 1)
        l0.append((-w.shift, num * sign, den * sign))
    return make_symbol(ap, l0)


def conj(a: GSymbol) -> GSymbol:
    """Complex conjugate on the real line: conj(a)(t) = conj(a(t))."""
    ap = [(-u.freq, u.coeff.conjugate()) for u in a.ap]
    l0 = [
        (
            -w.shift,
            np.conj(np.asarray(w.rational.num, dtype=complex)),
            np.conj(np.asarray(w.rational.den, dtype=complex)),
        )
        for w in a.l0
    ]
    return make_symbol(ap, l0)


# --- time-domain kernel ------------------------------------------------------

@dataclass(frozen=True)
class KernelPiece:
    """p(u) e^(lam u) on one side of u = 0, translated by ``offset``.

    The piece contributes k(s) = p(s - offset) e^(lam (s - offset)) for
    side*(s - offset) > 0 and nothing elsewhere.  Integrability forces
    Re lam < 0 on the positive side and Re lam > 0 on the negative side.
    """

    side: int               # +1: support right of offset, -1: left
    offset: float
    exponent: complex
    coeffs: tuple

    def value(self, s):
        s = np.asarray(s, dtype=float)
        u = s - self.offset
        active = u > 0 if self.side > 0 else u < 0
        out = np.zeros(s.shape, dtype=complex)
        if np.any(active):
            ua = u[active]
            out[active] = poly.pval(self.coeffs, ua) * np.exp(self.exponent * ua)
        return out

    def integral(self, lo, hi):
        """Exact integral of the piece over [lo, hi] (vectorized in lo/hi)."""
        lo = np.asarray(lo, dtype=float) - self.offset
        hi = np.asarray(hi, dtype=float) - self.offset
        if self.side > 0:
            lo = np.maximum(lo, 0.0)
            hi = np.maximum(hi, 0.0)
        else:
            lo = np.minimum(lo, 0.0)
            hi = np.minimum(hi, 0.0)
        q = poly.exp_poly_antiderivative(self.coeffs, self.exponent)

        def F(u):
            # clamp the decaying exponential to dodge overflow warnings far
            # outside the support (value is ~0 there anyway)
            z = self.exponent * u
            z = np.minimum(z.real, 500.0) + 1j * z.imag
            return poly.pval(q, u) * np.exp(z)

        return F(hi) - F(lo)

    def abs_mass(self):
        lam = abs(self.exponent.real)
        out = 0.0
        for k, c in enumerate(self.coeffs):
            out += abs(c) * math.factorial(k) / lam ** (k + 1)
        return out


@dataclass(frozen=True)
class TimeKernel:
    pieces: tuple

    def value(self, s):
        s = np.asarray(s, dtype=float)
        out = np.zeros(s.shape, dtype=complex)
        for p in self.pieces:
            out += p.value(s)
        return out

    def integral(self, lo, hi):
        lo = np.asarray(lo, dtype=float)
        out = np.zeros(lo.shape, dtype=complex)
        for p in self.pieces:
            out += p.integral(lo, hi)
        return out

    def support_in_right_half(self, tol=1e-12):
        return all(p.side > 0 and p.offset >= -tol for p in self.pieces)

    def support_in_left_half(self, tol=1e-12):
        return all(p.side < 0 and p.offset <= tol for p in self.pieces)


def time_kernel(a: GSymbol) -> TimeKernel:
    """Convolution kernel of the rational part, via residues.

    Convention a(t) = int k(s) e^(its) ds: a pole rho of R in the lower
    half-plane contributes on s > 0 with exponent -i*rho, an upper pole on
    s < 0; a shift e^(i delta t) translates the support by delta.
    """
    pieces = []
    for w in a.l0:
        for pole, coeffs in poly.partial_fractions(w.rational.num, w.rational.den):
            lam = -1j * pole
            lower = pole.imag < 0
            side = 1 if lower else -1
            for j, c in enumerate(coeffs, start=1):
                if c == 0:
                    continue
                # 1/(t-rho)^j  <->  (-+i) (-i u)^(j-1)/(j-1)! e^(-i rho u)
                base = (-1j) ** j if lower else 1j * (-1j) ** (j - 1)
                pc = np.zeros(j, dtype=complex)
                pc[j - 1] = c * base / math.factorial(j - 1)
                pieces.append(KernelPiece(side, w.shift, lam, tuple(pc)))
    return TimeKernel(tuple(pieces))


def is_plus(a: GSymbol) -> bool:
    """Holomorphic extension to the upper half-plane: nonnegative frequencies
    and a time kernel supported on the right half-line."""
    if any(u.freq < -FREQ_TOL for u in a.ap):
        return False
    return time_kernel(a).support_in_right_half()


def is_minus(a: GSymbol) -> bool:
    if any(u.freq > FREQ_TOL for u in a.ap):
        return False
    return time_kernel(a).support_in_left_half()


# --- invertibility and inverse ------------------------------------------------

def _ap_deriv_bound(a):
    return sum(abs(u.coeff * u.freq) for u in a.ap)


def is_invertible(a: GSymbol, window=200.0, step=0.01):
    """Sampled lower bound of |a| on [-window, window] plus an asymptotic
    almost-periodic bound.  Conservative: raises Inconclusive inside the
    uncertainty band instead of guessing."""
    if a.is_zero():
        return False
    t = np.arange(-window, window + step, step)
    vals = np.abs(a.eval(t))
    m = float(np.min(vals))
    tmin = float(t[int(np.argmin(vals))])
    # two-scale local refinement around the argmin: a sampled minimum that
    # keeps shrinking with the sampling step is an exact zero, one that
    # saturates is a genuine positive minimum
    fine1 = np.arange(tmin - step, tmin + step, 1e-6)
    v1 = np.abs(a.eval(fine1))
    m1 = float(np.min(v1))
    t1 = float(fine1[int(np.argmin(v1))])
    fine2 = np.arange(t1 - 2e-6, t1 + 2e-6, 1e-8)
    v2 = np.abs(a.eval(fine2))
    m2 = float(np.min(v2))
    m_ref = min(m, m1, m2)
    if m2 < 1e-9 or m2 < m1 / 8.0:
        return False
    deriv = _ap_deriv_bound(a) + float(np.max(np.abs(np.diff(vals)))) / step * 1.5
    uncert = 0.5 * deriv * step
    # beyond the window the rational part has decayed; the AP part controls
    ap_only = make_symbol([(u.freq, u.coeff) for u in a.ap], [])
    ap_min = float(np.min(np.abs(ap_only.eval(t)))) if a.ap else 0.0
    far = np.linspace(window, 8 * window, 4001)
    l0_tail = 0.0
    if a.l0:
        l0_tail = float(
            max(np.max(np.abs(a.eval(far) - ap_only.eval(far))),
                np.max(np.abs(a.eval(-far) - ap_only.eval(-far))))
        )
    tail_low = ap_min - l0_tail - 0.5 * _ap_deriv_bound(a) * step
    low = min(m_ref - uncert, tail_low)
    if low > 0:
        return True
    raise Inconclusive(
        f"sampled minimum {m_ref:.3e} inside uncertainty band "
        f"(certified lower bound {low:.3e})"
    )


def _single_exponential_form(a):
    """a = e^(i delta t) (A + num/den) with one AP term and matching shifts,
    or None if the symbol leaves that shape."""
    if len(a.ap) != 1:
        return None
    delta = a.ap[0].freq
    amp = a.ap[0].coeff
    if any(abs(w.shift - delta) > FREQ_TOL for w in a.l0):
        return None
    if len(a.l0) > 1:
        return None  # canonical form merges equal shifts, so this is defensive
    if a.l0:
        return delta, amp, np.asarray(a.l0[0].rational.num), np.asarray(a.l0[0].rational.den)
    return delta, amp, np.zeros(1, dtype=complex), np.ones(1, dtype=complex)


def inverse(a: GSymbol) -> GSymbol:
    """Symbolic inverse where it stays in the representation.

    In-scope inputs look like c e^(i delta t) (a0 + R(t)); everything else
    raises NotInvertible (when inf|a| = 0) or NotRepresentable.
    """
    if a.is_zero():
        raise NotInvertible("zero symbol")
    if not a.ap:
        raise NotInvertible("symbol vanishes at infinity (no almost-periodic part)")
    form = _single_exponential_form(a)
    if form is None:
        try:
            ok = is_invertible(a)
        except Inconclusive:
            ok = True
        if not ok:
            raise NotInvertible("symbol has a real zero")
        raise NotRepresentable(
            "inverse leaves the finite representation (nonconstant almost-periodic part)"
        )
    delta, amp, num, den = form
    if abs(amp) <= COEFF_PRUNE:
        raise NotInvertible("symbol vanishes at infinity")
    s_poly = poly.padd(poly.pscale(den, amp), num)
    if poly.real_roots(s_poly, REAL_AXIS_TOL):
        raise NotInvertible("symbol has a zero on the real axis")
    # d/(A d + n) = 1/A - (n/A) / (A d + n), with A d + n monicized
    inv_terms_ap = [(-delta, 1.0 / amp)]
    inv_terms_l0 = []
    if not poly.is_zero(poly.trim(num)):
        lead = s_poly[-1]
        inv_terms_l0.append(
            (-delta, poly.pscale(num, -1.0 / (amp * lead)), s_poly / lead)
        )
    return make_symbol(inv_terms_ap, inv_terms_l0)


# --- indices -------------------------------------------------------------------

def nu(a: GSymbol):
    """Mean motion of the almost-periodic part.

    Exact when one coefficient dominates the rest; otherwise the mean slope of
    the unwrapped argument over two long windows, which must agree.
    """
    if not a.ap:
        raise NotInvertible("mean motion undefined: almost-periodic part vanishes")
    if len(a.ap) == 1:
        return a.ap[0].freq
    mags = [abs(u.coeff) for u in a.ap]
    j0 = int(np.argmax(mags))
    if mags[j0] > sum(m for j, m in enumerate(mags) if j != j0):
        return a.ap[j0].freq
    ap_only = make_symbol([(u.freq, u.coeff) for u in a.ap], [])
    maxfreq = max(abs(u.freq) for u in a.ap)
    step = min(0.05, 0.5 / (1.0 + maxfreq))
    slopes = []
    for L in (1e3, 1e4):
        t = np.arange(-L, L + step, step)
        ph = np.unwrap(np.angle(ap_only.eval(t)))
        slopes.append((ph[-1] - ph[0]) / (t[-1] - t[0]))
    if abs(slopes[0] - slopes[1]) > 1e-3:
        raise MeanMotionUnresolved(
            f"window slopes {slopes[0]:.6f} and {slopes[1]:.6f} disagree"
        )
    return float(slopes[1])


def winding_n(a: GSymbol):
    """Winding of 1 + b^(-1) k across the compactified line (b = AP part).

    Exact zero/pole counting when b is a single exponential sharing its shift
    with the rational part; numerical unwrapping with endpoint asymptotics
    otherwise.  Always an integer.
    """
    if not a.ap:
        raise NotInvertible("winding undefined: almost-periodic part vanishes")
    form = _single_exponential_form(a)
    if form is not None:
        _, amp, num, den = form
        if poly.is_zero(poly.trim(num)):
            return 0
        full = poly.padd(poly.pscale(den, amp), num)
        if poly.real_roots(full, REAL_AXIS_TOL):
            raise NotInvertible("symbol has a zero on the real axis")
        return poly.count_upper(poly.proots(full)) - poly.count_upper(
            poly.proots(den)
        )
    # numerical route: w(t) = a(t)/b(t) - 1 = b^(-1) k
    ap_only = make_symbol([(u.freq, u.coeff) for u in a.ap], [])

    def wfun(t):
        return a.eval(t) / ap_only.eval(t) - 1.0

    maxfreq = max(abs(u.freq) for u in a.ap) + max(
        [abs(w.shift) for w in a.l0], default=0.0
    )
    step = min(0.01, 0.2 / (1.0 + maxfreq))
    L = 200.0
    for _ in range(8):
        if abs(wfun(L)) < 0.5 and abs(wfun(-L)) < 0.5:
            break
        L *= 2
    else:
        raise WindingUnresolved("rational tail does not settle below 1/2")
    t = np.arange(-L, L + step, step)
    if np.min(np.abs(ap_only.eval(t))) < 1e-9:
        raise NotInvertible("almost-periodic part not bounded away from zero")
    vals = 1.0 + wfun(t)
    if np.min(np.abs(vals)) < 1e-9:
        raise NotInvertible("1 + b^(-1)k vanishes on the sample grid")
    ph = np.unwrap(np.angle(vals))
    total = ph[-1] - ph[0]
    # |w| < 1 beyond +-L, so the tails cannot wind: close the curve through 1
    total += -np.angle(vals[-1]) + np.angle(vals[0])
    n = total / (2 * np.pi)
    if abs(n - round(n)) > 1e-3:
        raise WindingUnresolved(f"total phase {n:.6f} (in turns) is not an integer")
    return int(round(n))


def is_matching(g: GSymbol) -> bool:
    """g(t) g(-t) = 1, checked symbolically with a numerical fallback."""
    prod = g * tilde(g)
    if prod == one() or prod.isclose(one(), 1e-12):
        return True
    t = np.linspace(-50.0, 50.0, 2001)
    return bool(np.max(np.abs(prod.eval(t) - 1.0)) < 1e-10)


def xi(g: GSymbol) -> int:
    """Sign invariant (-1)^n g(0) of a matching function with zero mean motion."""
    if not is_matching(g):
        raise NotMatching("xi is defined for matching symbols only")
    if abs(nu(g)) > FREQ_TOL:
        raise NotMatching("xi requires zero mean motion")
    n = winding_n(g)
    val = complex(g.eval(0.0)) * (-1) ** (n % 2)
    if abs(val - 1.0) < 1e-8:
        return 1
    if abs(val + 1.0) < 1e-8:
        return -1
    raise XiNotUnimodular(f"(-1)^n g(0) = {val} is not near +-1")
