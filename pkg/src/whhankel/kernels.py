"""Explicit kernel elements and kernel-transport maps, evaluated on grids.

Everything here reduces whole-line compositions like J Q W0(g) P to half-line
Hankel applications: on the mirrored midpoint grid the discrete operators
satisfy J Q W0(g) P = H(tilde(g)) exactly, so the maps below run on N x N
Toeplitz/Hankel matrices.  A Workspace caches assembled matrices per symbol.

Contents: the exponential kernel generator psi0, scalar kernel bases
W(g_+^(-1)) psi0, the involutive projections (f +- J Q W0(g) P f)/2 on
kernels, the mutually inverse transport maps between ker W(V(a,b)) and
ker(W(a) +- H(b)), the half-kernel maps phi_+-, and the conditional
image-membership element for the n(c) = +1 branch.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import factorization, oracle, symbols
from .classify import MatchingPair, subordinated
from .errors import (
    NoRightInverse,
    NotInKernel,
    WrongCase,
    WrongIndex,
)
from .oracle import DEFAULT_CONFIG, Grid
from .symbols import GSymbol, inverse, tilde


@dataclass(frozen=True)
class GridFunction:
    grid: Grid
    values: np.ndarray
    support: str = "half"  # half | full

    def __post_init__(self):
        expected = self.grid.n if self.support == "half" else 2 * self.grid.n
        if len(self.values) != expected:
            raise ValueError("value count does not match grid support")

    def norm(self):
        return float(np.sqrt(self.grid.h) * np.linalg.norm(self.values))

    def normalized(self):
        nrm = self.norm()
        return GridFunction(self.grid, self.values / nrm, self.support)

    def to_triples(self):
        nodes = (
            self.grid.half_nodes() if self.support == "half" else self.grid.full_nodes()
        )
        return [
            (float(t), float(v.real), float(v.imag))
            for t, v in zip(nodes, self.values)
        ]


class Workspace:
    """Matrix cache for one grid; symbols are hashable, so plain dict caching."""

    def __init__(self, grid=None, cfg=DEFAULT_CONFIG):
        self.grid = grid or Grid()
        self.cfg = cfg
        self._wh = {}
        self._hank = {}
        self._w0 = {}

    def wh(self, sym) -> np.ndarray:
        if sym not in self._wh:
            self._wh[sym] = oracle.wh_matrix(sym, self.grid, self.cfg).matrix
        return self._wh[sym]

    def hank(self, sym) -> np.ndarray:
        if sym not in self._hank:
            self._hank[sym] = oracle.hankel_matrix(sym, self.grid, self.cfg).matrix
        return self._hank[sym]

    def w0(self, sym) -> np.ndarray:
        if sym not in self._w0:
            self._w0[sym] = oracle.w0_matrix(sym, self.grid, self.cfg).matrix
        return self._w0[sym]

    def flip_apply(self, g, v):
        """J Q W0(g) P on a half-line vector, computed as H(tilde(g))."""
        return self.hank(tilde(g)) @ v

    def norm_est(self, mat):
        return float(
            np.sqrt(
                np.max(np.sum(np.abs(mat), axis=0)) * np.max(np.sum(np.abs(mat), axis=1))
            )
        )

    def residual(self, mat, v):
        nv = np.linalg.norm(v)
        if nv == 0:
            return 0.0
        return float(np.linalg.norm(mat @ v) / (self.norm_est(mat) * nv))

    def gf(self, values, support="half"):
        return GridFunction(self.grid, np.asarray(values, dtype=complex), support)


def psi0(grid=None, support="half") -> GridFunction:
    """e^(-t) on the half-line nodes, or its zero extension on the full line."""
    grid = grid or Grid()
    if support == "half":
        return GridFunction(grid, np.exp(-grid.half_nodes()).astype(complex), "half")
    nodes = grid.full_nodes()
    vals = np.where(nodes > 0, np.exp(-np.maximum(nodes, 0.0)), 0.0).astype(complex)
    return GridFunction(grid, vals, "full")


def psi0_discrete(grid=None, support="half") -> GridFunction:
    """The exact kernel generator of the discretized operator: the geometric
    sequence r^(j+1/2), r = (2-h)/(2+h), which deviates from e^(-t) by an
    O(h^2) exponent error but annihilates the discrete W(chi^(-1)) to
    truncation accuracy.  Kernel formulas use this twin so transport
    identities hold at near machine precision."""
    grid = grid or Grid()
    r = (2.0 - grid.h) / (2.0 + grid.h)
    j = np.arange(grid.n)
    half = (r ** (j + 0.5)).astype(complex)
    if support == "half":
        return GridFunction(grid, half, "half")
    vals = np.zeros(2 * grid.n, dtype=complex)
    vals[grid.n :] = half
    return GridFunction(grid, vals, "full")


def kernel_basis_scalar(g: GSymbol, ws: Workspace):
    """[W(g_+^(-1)) psi0], the kernel basis of W(g) when nu = 0 and n = -1."""
    g_plus, n, _ = factorization.matching_factorization(g)
    if n != -1:
        raise WrongIndex(f"kernel basis formula requires n = -1, got n = {n}")
    v = ws.wh(inverse(g_plus)) @ psi0_discrete(ws.grid).values
    return [ws.gf(v).normalized()]


def _require_in_kernel(ws, mat, v, what, scale=None):
    """Relative kernel residual check; ``scale`` guards vectors that are
    themselves negligible (the zero vector lies in every kernel)."""
    nv = np.linalg.norm(v)
    if nv == 0.0 or (scale is not None and nv <= 1e-6 * scale):
        return 0.0
    res = float(np.linalg.norm(mat @ v) / (ws.norm_est(mat) * nv))
    if res > ws.cfg.residual_tol:
        raise NotInKernel(f"{what}: relative residual {res:.2e}")
    return res


def projection_P(g: GSymbol, f: GridFunction, ws: Workspace) -> GridFunction:
    """J Q W0(g) P f for f in ker W(g); an involution on the kernel."""
    v = np.asarray(f.values, dtype=complex)
    _require_in_kernel(ws, ws.wh(g), v, "projection input")
    return ws.gf(ws.flip_apply(g, v))


def p_plus(g, f, ws):
    pf = projection_P(g, f, ws)
    return ws.gf(0.5 * (f.values + pf.values))


def p_minus(g, f, ws):
    pf = projection_P(g, f, ws)
    return ws.gf(0.5 * (f.values - pf.values))


def projection_image_dims(g, basis, ws, tol=1e-6):
    """(dim im P^+, dim im P^-) measured from a kernel basis by numerical rank."""
    if not basis:
        return 0, 0
    plus_vecs = []
    minus_vecs = []
    for f in basis:
        pf = ws.flip_apply(g, np.asarray(f.values, dtype=complex))
        plus_vecs.append(0.5 * (f.values + pf))
        minus_vecs.append(0.5 * (f.values - pf))

    def rank(vecs):
        m = np.vstack(vecs)
        s = np.linalg.svd(m, compute_uv=False)
        if s.size == 0 or s[0] == 0:
            return 0
        return int(np.sum(s > tol * s[0] * 10)) if s[0] > tol else 0

    scale = max(np.linalg.norm(np.vstack(plus_vecs + minus_vecs)), 1e-30)

    def rank2(vecs):
        s = np.linalg.svd(np.vstack(vecs), compute_uv=False)
        return int(np.sum(s > tol * scale))

    return rank2(plus_vecs), rank2(minus_vecs)


# --- transport between the block kernel and the +- kernels -------------------

def e1_map(pair: MatchingPair, phi: GridFunction, psi: GridFunction, ws: Workspace):
    """Send (phi, psi) in ker W(V(a,b)) to (Phi, Psi) in ker(W+H) x ker(W-H)."""
    sub = subordinated(pair)
    at_inv = inverse(tilde(pair.a))
    v = np.concatenate([phi.values, psi.values])
    block = oracle.block_v_matrix(pair, ws.grid, ws.cfg).matrix
    _require_in_kernel(ws, block, v, "transport input (block kernel)")
    jc = ws.flip_apply(sub.c, phi.values)
    ja = ws.flip_apply(at_inv, psi.values)
    big_phi = 0.5 * (phi.values - jc + ja)
    big_psi = 0.5 * (phi.values + jc - ja)
    return ws.gf(big_phi), ws.gf(big_psi)


def e2_map(pair: MatchingPair, big_phi: GridFunction, big_psi: GridFunction,
           ws: Workspace):
    """Inverse transport: (Phi, Psi) back into ker W(V(a,b))."""
    a, b = pair.a, pair.b
    wp = ws.wh(a) + ws.hank(b)
    wm = ws.wh(a) - ws.hank(b)
    scale = max(np.linalg.norm(big_phi.values), np.linalg.norm(big_psi.values))
    _require_in_kernel(ws, wp, big_phi.values, "transport input (plus kernel)", scale)
    _require_in_kernel(ws, wm, big_psi.values, "transport input (minus kernel)", scale)
    s = big_phi.values + big_psi.values
    diff = big_phi.values - big_psi.values
    second = ws.wh(tilde(b)) @ s + ws.hank(tilde(a)) @ diff
    return ws.gf(s), ws.gf(second)


def right_inverse_apply(c: GSymbol, v, ws: Workspace):
    """W_r^(-1)(c) v through the factorization recipe [c_+^(-1), chi^(-n), c_-^(-1)]."""
    f = factorization.factorize(c)
    if f.n > 0 or abs(f.nu) > 1e-9:
        raise NoRightInverse(f"W(c) with nu = {f.nu:g}, n = {f.n} is not right-invertible")
    recipe = factorization.one_sided_inverse_recipe(f, "right")
    out = np.asarray(v, dtype=complex)
    for factor in reversed(recipe.factors):
        out = ws.wh(factor) @ out
    return out


def phi_pm(pair: MatchingPair, s: GridFunction, sign: str, ws: Workspace):
    """phi_+-(s) in ker(W(a) +- H(b)) for s in ker W(d):

        2 phi_+-(s) = y -+ J Q W0(c) P y +- J Q W0(a~^(-1)) s,
        y = W_r^(-1)(c) W(a~^(-1)) s.
    """
    if sign not in ("+", "-"):
        raise ValueError("sign must be '+' or '-'")
    sub = subordinated(pair)
    at_inv = inverse(tilde(pair.a))
    _require_in_kernel(ws, ws.wh(sub.d), s.values, "phi input (ker W(d))")
    y = right_inverse_apply(sub.c, ws.wh(at_inv) @ s.values, ws)
    jy = ws.flip_apply(sub.c, y)
    js = ws.flip_apply(at_inv, s.values)
    if sign == "+":
        out = 0.5 * (y - jy + js)
    else:
        out = 0.5 * (y + jy - js)
    return ws.gf(out)


# --- the conditional membership element ----------------------------------------

@dataclass(frozen=True)
class KappaResult:
    kappa: GridFunction
    in_image: bool
    residual: float
    stable: bool
    diagnostics: dict

    def __bool__(self):  # pragma: no cover - guard against accidental truthiness
        raise TypeError("inspect .in_image explicitly")


def _q0(ws):
    return ws.wh(symbols.chi(1)) @ ws.wh(symbols.chi(-1))


def _membership_residual(x, ws):
    q0x = _q0(ws) @ x
    nx = np.linalg.norm(x)
    if nx == 0:
        return 0.0
    return float(np.linalg.norm(x - q0x) / nx)


def kappa_element(a: GSymbol, ws: Workspace = None, cfg=None) -> KappaResult:
    """The transported kernel candidate for the pair (a, a chi^(-1)) with
    nu(a) = n(a) = 0, and its membership in the range of W(chi).

    kappa = W(chi) W(alpha~^(-1)) W(d_+^(-1)) psi0
            + J Q W0(chi^(-1)) P W0(chi) P W(alpha~^(-1)) W(d_+^(-1)) psi0
            - J Q W0(alpha~^(-1)) P W(d_+^(-1)) psi0,

    with alpha = a chi^(-1) and d = a a~^(-1) chi^(-1).  The middle term is
    the zero operator in exact arithmetic (a flip identity) and is asserted
    small; the minus operator W(a) - H(a chi^(-1)) is invertible exactly when
    the third term stays outside the range, i.e. in_image is False.
    """
    ws = ws or Workspace()
    cfg = cfg or ws.cfg
    if abs(symbols.nu(a)) > 1e-9:
        raise WrongCase("kappa element requires nu(a) = 0")
    if symbols.winding_n(a) != 0:
        raise WrongCase("kappa element requires n(a) = 0")
    alpha = a * symbols.chi(-1)
    d = a * inverse(tilde(a)) * symbols.chi(-1)
    if symbols.winding_n(d) != -1:
        raise WrongCase("index bookkeeping failed: n(d) != -1")

    def compute(w):
        alpha_t_inv = inverse(tilde(alpha))
        d_plus, _, _ = factorization.matching_factorization(d)
        s = w.wh(inverse(d_plus)) @ psi0_discrete(w.grid).values
        z = w.wh(alpha_t_inv) @ s
        t1 = w.wh(symbols.chi(1)) @ z
        t2 = w.flip_apply(symbols.chi(-1), w.wh(symbols.chi(1)) @ z)
        t3 = w.flip_apply(alpha_t_inv, s)
        kappa = t1 + t2 - t3
        scale = max(np.linalg.norm(s), 1e-30)
        diag = {
            "middle_term_norm": float(np.linalg.norm(t2) / scale),
            "first_term_membership": _membership_residual(t1, w),
        }
        res = _membership_residual(t3, w)
        return kappa, res, diag

    kappa, res, diag = compute(ws)
    in_img = res < cfg.membership_tol
    fine_ws = Workspace(ws.grid.refined(), cfg)
    _, res2, _ = compute(fine_ws)
    stable = (res2 < cfg.membership_tol) == in_img
    return KappaResult(
        kappa=ws.gf(kappa),
        in_image=in_img,
        residual=res,
        stable=stable,
        diagnostics=diag,
    )


def kappa_for_pair(pair: MatchingPair, ws: Workspace = None, cfg=None) -> KappaResult:
    """General conditional branch: n(c) = +1 and one-dimensional ker W(d).

    Reduces (a, b) to (a chi^(-1), b chi), transports the kernel of W(d)
    through phi_-, and tests whether the transported element meets the range
    of W(chi).  Grid-stability is required before the verdict is reported.
    """
    ws = ws or Workspace()
    cfg = cfg or ws.cfg

    def compute(w):
        reduced = MatchingPair(
            a=pair.a * symbols.chi(-1), b=pair.b * symbols.chi(1)
        )
        sub = subordinated(reduced)
        basis = kernel_basis_scalar(sub.d, w)
        kappa_gf = phi_pm(reduced, basis[0], "-", w)
        return 2.0 * kappa_gf.values, _membership_residual(2.0 * kappa_gf.values, w)

    kappa, res = compute(ws)
    in_img = res < cfg.membership_tol
    fine_ws = Workspace(ws.grid.refined(), cfg)
    _, res2 = compute(fine_ws)
    stable = (res2 < cfg.membership_tol) == in_img
    return KappaResult(
        kappa=ws.gf(kappa),
        in_image=in_img,
        residual=res,
        stable=stable,
        diagnostics={},
    )


def make_kappa_tester(grid=None, cfg=DEFAULT_CONFIG):
    """classify()-compatible tester resolving the conditional branch on a grid."""
    ws = Workspace(grid or Grid(), cfg)

    def tester(pair: MatchingPair):
        return kappa_for_pair(pair, ws, cfg)

    return tester
