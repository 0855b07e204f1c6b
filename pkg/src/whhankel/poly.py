"""Polynomial helpers over the complex numbers.

Coefficient arrays are ascending-degree tuples/arrays, the convention of
``numpy.polynomial.polynomial``.  Root finding goes through the companion
matrix (``polyroots``); root pairing tolerances are generous enough to
survive the accuracy loss of multiple roots.
"""

from __future__ import annotations

import numpy as np
from numpy.polynomial import polynomial as npp

#: coefficients with modulus below this (relative to the largest one) are noise
COEFF_PRUNE = 1e-14

#: pairing tolerance for root cancellation (absolute, scaled by root size)
ROOT_PAIR_TOL = 1e-6

#: clustering tolerance: companion-matrix roots of an m-fold root scatter like
#: eps^(1/m), so clusters up to multiplicity ~4 must be re-fused before pairing
CLUSTER_TOL = 2e-4


def as_poly(c) -> np.ndarray:
    a = np.atleast_1d(np.asarray(c, dtype=complex))
    return a


def trim(c, tol=COEFF_PRUNE) -> np.ndarray:
    """Drop trailing coefficients that are negligible relative to the largest."""
    a = as_poly(c)
    scale = np.max(np.abs(a)) if a.size else 0.0
    if scale == 0.0:
        return np.zeros(1, dtype=complex)
    cut = tol * max(1.0, scale)
    keep = np.nonzero(np.abs(a) > cut)[0]
    if keep.size == 0:
        return np.zeros(1, dtype=complex)
    a = a[: keep[-1] + 1].copy()
    a[np.abs(a) <= cut] = 0.0
    return a


def degree(c) -> int:
    a = trim(c)
    return len(a) - 1 if np.any(a != 0) else -1


def is_zero(c) -> bool:
    return degree(c) < 0


def padd(a, b):
    return trim(npp.polyadd(as_poly(a), as_poly(b)))


def pmul(a, b):
    return trim(npp.polymul(as_poly(a), as_poly(b)))


def pscale(a, s):
    return trim(as_poly(a) * complex(s))


def pdivmod(a, b):
    q, r = npp.polydiv(as_poly(a), as_poly(b))
    return trim(q), trim(r)


def pval(c, t):
    return npp.polyval(np.asarray(t), as_poly(c))


def pder(c):
    return trim(npp.polyder(as_poly(c)))


def proots(c) -> np.ndarray:
    a = trim(c)
    if len(a) <= 1:
        return np.zeros(0, dtype=complex)
    return np.asarray(npp.polyroots(a), dtype=complex)


def pfromroots(roots, lead=1.0) -> np.ndarray:
    roots = sorted(np.asarray(roots, dtype=complex), key=lambda z: (z.real, z.imag))
    if not len(roots):
        return np.array([complex(lead)])
    return trim(npp.polyfromroots(roots) * complex(lead))


def monic(c):
    a = trim(c)
    return a / a[-1]


def sort_roots(roots) -> list[complex]:
    return sorted((complex(z) for z in roots), key=lambda z: (z.real, z.imag))


def cluster_roots(roots, tol=CLUSTER_TOL):
    """Greedy fusion of nearby roots into (centroid, multiplicity) clusters.

    The centroid of an m-fold cluster recovers the true root to near machine
    precision even though the individual roots scatter like eps^(1/m).
    """
    clusters: list[list] = []  # [sum, count]
    for z in sort_roots(roots):
        for cl in clusters:
            c = cl[0] / cl[1]
            if abs(z - c) < tol * max(1.0, abs(c)):
                cl[0] += z
                cl[1] += 1
                break
        else:
            clusters.append([z, 1])
    return [(cl[0] / cl[1], cl[1]) for cl in clusters]


def reduce_rational(num, den):
    """Cancel shared roots of num/den; leaves coefficients untouched when
    nothing cancels, so exactly-entered rationals stay bit-exact."""
    num = trim(num)
    den = trim(den)
    if is_zero(num) or degree(num) < 1 or degree(den) < 1:
        return num, den
    zn = cluster_roots(proots(num))
    zd = cluster_roots(proots(den))
    cancelled = 0
    new_n = []
    new_d = []
    used = [False] * len(zn)
    for p, md in zd:
        hit = None
        for k, (z, mn) in enumerate(zn):
            if not used[k] and abs(z - p) < ROOT_PAIR_TOL * max(1.0, abs(p)):
                hit = k
                break
        if hit is None:
            new_d.append((p, md))
        else:
            used[hit] = True
            z, mn = zn[hit]
            m = min(mn, md)
            cancelled += m
            if mn > m:
                new_n.append((z, mn - m))
            if md > m:
                new_d.append((p, md - m))
    if not cancelled:
        return num, den
    for k, (z, mn) in enumerate(zn):
        if not used[k]:
            new_n.append((z, mn))
    lead_ratio = num[-1] / den[-1]
    den_roots = [p for p, m in new_d for _ in range(m)]
    num_roots = [z for z, m in new_n for _ in range(m)]
    return trim(pfromroots(num_roots, lead_ratio)), trim(pfromroots(den_roots, 1.0))


def real_roots(c, imag_tol=1e-9) -> list[complex]:
    """Roots sitting within ``imag_tol`` of the real axis."""
    return [z for z in proots(c) if abs(z.imag) <= imag_tol]


def count_upper(roots, imag_tol=1e-9) -> int:
    return int(sum(1 for z in roots if z.imag > imag_tol))


def partial_fractions(num, den):
    """Decompose a strictly proper num/den into sum of c/(t-p)^j terms.

    Returns a list of (pole, [c_1, ..., c_m]) where the j-th coefficient
    belongs to 1/(t-p)^j.  Handles multiple poles through derivatives of the
    deflated rational function.
    """
    num = trim(num)
    den = trim(den)
    if is_zero(num):
        return []
    if degree(num) >= degree(den):
        raise ValueError("partial_fractions expects a strictly proper rational")
    num = num / den[-1]
    den = den / den[-1]
    clusters = cluster_roots(proots(den))
    out = []
    for ci, (p, m) in enumerate(clusters):
        rest = pfromroots(
            [q for cj, (q, mm) in enumerate(clusters) if cj != ci for _ in range(mm)],
            1.0,
        )
        # h = num/rest; coefficient of 1/(t-p)^(m-k) is h^(k)(p)/k!
        coeffs = [0j] * m
        hn, hd = num, rest
        fact = 1.0
        for k in range(m):
            if k:
                fact *= k
                hn, hd = padd(pmul(pder(hn), hd), pscale(pmul(hn, pder(hd)), -1)), pmul(hd, hd)
            coeffs[m - 1 - k] = complex(pval(hn, p) / pval(hd, p) / fact)
        out.append((complex(p), coeffs))
    return out


def exp_poly_antiderivative(poly_coeffs, lam):
    """q with d/ds [q(s) e^(lam s)] = p(s) e^(lam s); requires lam != 0."""
    p = as_poly(poly_coeffs)
    n = len(p)
    q = np.zeros(n, dtype=complex)
    for k in range(n - 1, -1, -1):
        upper = (k + 1) * q[k + 1] if k + 1 < n else 0.0
        q[k] = (p[k] - upper) / lam
    return q


def format_complex(z, imag_unit="i") -> str:
    """Round-trippable compact form: 2, -3.5, 2i, (1+2i), (1-2i)."""
    re, im = float(np.real(z)), float(np.imag(z))

    def fnum(x):
        if x == int(x) and abs(x) < 1e15:
            return str(int(x))
        return repr(x)

    if im == 0.0:
        return fnum(re)
    if re == 0.0:
        return f"{fnum(im)}{imag_unit}"
    sign = "+" if im > 0 else "-"
    return f"({fnum(re)}{sign}{fnum(abs(im))}{imag_unit})"


def format_poly(c, var="t") -> str:
    """Descending-power display, e.g. ``t^2 + (1+2i)*t - 3``."""
    a = trim(c)
    if is_zero(a):
        return "0"
    parts = []
    for k in range(len(a) - 1, -1, -1):
        z = a[k]
        if z == 0:
            continue
        coeff = format_complex(z)
        if k == 0:
            parts.append(coeff)
        else:
            tk = var if k == 1 else f"{var}^{k}"
            parts.append(tk if coeff == "1" else f"{coeff}*{tk}")
    return " + ".join(parts).replace(" + -", " - ")
