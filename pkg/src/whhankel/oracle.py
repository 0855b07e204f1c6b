"""Brute-force numerical ground truth for half-line convolution operators.

Dense discretizations of W(a), H(b), the whole-line W0(a), the flip J, the
half-line restrictions P/Q, and the 2x2 block operator of a matching pair;
SVD-based kernel/cokernel estimation; recipe application; verdict tables.

Discretization: midpoint nodes t_i = (i + 1/2) h on [0, T].  The Toeplitz
generator comes from the symbol itself through the conformal frequency map

    xi(theta) = (2/h) tan(theta/2),      z = e^(i theta),

so a rational symbol becomes a rational function of z with poles off the
unit circle and exponentially decaying Fourier coefficients, and a shift
e^(i delta xi) becomes the monomial z^(delta/h).  Discrete symbols therefore
multiply exactly like their continuum counterparts: every operator identity
of the half-line calculus (product/Hankel splitting, flip conjugation,
one-sided inverse compositions, matching-function algebra) holds on the
matrices up to exponentially small truncation tails, not just to quadrature
order.  Pointwise the discrete operator still agrees with the continuum one
to O(h^2) on smooth decaying functions, so kernel vectors such as e^(-t) are
reproduced on the grid with exponent error h^2/12.

Rank decisions: a square truncation of an index -1 operator and its index +1
transpose share singular spectra, so raw sigma-counting cannot tell a genuine
(decaying) kernel vector from a truncation-boundary artifact.  The estimator
therefore augments the matrix with penalty rows on the outer 20% of nodes
before the SVD: genuine kernel vectors decay and keep sigma ~ e^(-T), while
boundary artifacts are lifted to O(|penalty|).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import hankel as _hankel_mat
from scipy.linalg import toeplitz as _toeplitz_mat

from . import poly, symbols
from .errors import GridMismatch, OutOfScope, ShiftNotCommensurate
from .symbols import GSymbol


@dataclass(frozen=True)
class Grid:
    """Midpoint discretization of [0, T] (half) and [-T, T] (full)."""

    T: float = 25.0
    h: float = 0.025

    def __post_init__(self):
        ratio = self.T / self.h
        if abs(ratio - round(ratio)) > 1e-9:
            raise ValueError("T/h must be an integer")

    @property
    def n(self):
        return int(round(self.T / self.h))

    def half_nodes(self):
        return (np.arange(self.n) + 0.5) * self.h

    def full_nodes(self):
        return -self.T + (np.arange(2 * self.n) + 0.5) * self.h

    def refined(self, t_factor=1.25, h_factor=0.5):
        fine_h = self.h * h_factor
        big_t = self.T * t_factor
        big_t = round(big_t / fine_h) * fine_h
        return Grid(T=big_t, h=fine_h)


@dataclass(frozen=True)
class OracleConfig:
    rank_tol: float = 1e-8          # sigma < rank_tol * sigma_max counts as null
    residual_tol: float = 1e-5      # "numerically in kernel" threshold (relative)
    membership_tol: float = 1e-4    # image-membership threshold (relative)
    stability: bool = True          # re-run rank decisions on (1.25 T, h/2)
    boundary_frac: float = 0.2      # penalty window at the truncation boundary
    snap_tol: float = 0.1           # |delta/h - round| below this snaps, else error


DEFAULT_CONFIG = OracleConfig()


@dataclass
class DiscretizedOp:
    matrix: np.ndarray
    grid: Grid
    description: str
    components: int = 1             # 1 for scalar ops, 2 for the block operator
    rebuild: object = None          # callable Grid -> DiscretizedOp, or None

    @property
    def norm_est(self):
        m = self.matrix
        return float(
            np.sqrt(
                np.max(np.sum(np.abs(m), axis=0)) * np.max(np.sum(np.abs(m), axis=1))
            )
        )

    def adjoint(self):
        parent_rebuild = self.rebuild
        out = DiscretizedOp(
            matrix=self.matrix.conj().T,
            grid=self.grid,
            description=f"adjoint({self.description})",
            components=self.components,
            rebuild=(lambda g: parent_rebuild(g).adjoint()) if parent_rebuild else None,
        )
        return out

    def __matmul__(self, other):
        if isinstance(other, DiscretizedOp):
            if other.grid != self.grid:
                raise GridMismatch("operators live on different grids")
            return DiscretizedOp(
                matrix=self.matrix @ other.matrix,
                grid=self.grid,
                description=f"{self.description} o {other.description}",
                components=self.components,
            )
        return self.matrix @ other


@dataclass(frozen=True)
class KernelEstimate:
    dim: int
    basis: tuple                    # orthonormal null-ish vectors (ndarray rows)
    singular_values: tuple          # descending, of the penalty-augmented matrix
    tol: float
    stable: bool
    residuals: tuple = ()

    def to_dict(self):
        return {
            "dim": self.dim,
            "tol": self.tol,
            "stable": self.stable,
            "residuals": list(self.residuals),
            "smallest_sigmas": [float(s) for s in self.singular_values[-6:]],
        }


# --- assembly ------------------------------------------------------------------

def _ap_offsets(sym, grid, cfg):
    """(index offset, coefficient) per almost-periodic term; offsets are
    delta/h, snapped within cfg.snap_tol or rejected."""
    out = []
    for term in sym.ap:
        q = term.freq / grid.h
        if abs(q - round(q)) > cfg.snap_tol:
            raise ShiftNotCommensurate(
                f"shift {term.freq} is not commensurate with h = {grid.h}"
            )
        if abs(q - round(q)) > 1e-9:
            warnings.warn(
                f"snapping shift {term.freq} to {round(q) * grid.h}",
                stacklevel=3,
            )
        out.append((int(round(q)), term.coeff))
    return out


def _mobius_poly(coeffs, lam, degree):
    """sum_k c_k lam^k (z-1)^k (z+1)^(degree-k) as a polynomial in z."""
    out = np.zeros(1, dtype=complex)
    for k, c in enumerate(coeffs):
        term = poly.pmul(
            poly.pfromroots([1.0] * k, lead=(c * lam**k)),
            poly.pfromroots([-1.0] * (degree - k)),
        )
        out = poly.padd(out, term)
    return out


def _laurent_coeffs(num_z, den_z, m_index):
    """Laurent coefficients on the unit circle of num_z/den_z at indices m_index.

    Poles inside the disc feed negative indices, poles outside feed
    nonnegative ones; a multiple pole contributes binomial-weighted powers.
    """
    m_index = np.asarray(m_index)
    gen = np.zeros(m_index.shape, dtype=complex)
    num_z = poly.trim(num_z)
    den_z = poly.trim(den_z)
    if poly.is_zero(num_z):
        return gen
    if poly.degree(num_z) == poly.degree(den_z):
        c_inf = num_z[-1] / den_z[-1]
        gen[m_index == 0] += c_inf
        num_z = poly.padd(num_z, poly.pscale(den_z, -c_inf))
        if poly.is_zero(num_z):
            return gen
    for pole, coeffs in poly.partial_fractions(num_z, den_z):
        ap = abs(pole)
        if abs(ap - 1.0) < 1e-9:
            raise OutOfScope(f"mapped pole {pole} sits on the unit circle")
        for j, c in enumerate(coeffs, start=1):
            if c == 0:
                continue
            if ap > 1.0:
                # (z-p)^(-j) = (-1)^j sum_{m>=0} C(m+j-1, j-1) z^m p^(-j-m)
                sel = m_index >= 0
                mm = m_index[sel].astype(float)
                binom = np.ones(mm.shape)
                for i in range(1, j):
                    binom *= (mm + i) / i
                gen[sel] += c * (-1) ** j * binom * pole ** (-j - mm)
            else:
                # (z-p)^(-j) = sum_{l>=0} C(l+j-1, j-1) p^l z^(-j-l)
                sel = m_index <= -j
                ll = (-m_index[sel] - j).astype(float)
                binom = np.ones(ll.shape)
                for i in range(1, j):
                    binom *= (ll + i) / i
                gen[sel] += c * binom * pole ** (-m_index[sel] - j)
    return gen


def _symbol_gen(sym, grid, cfg, m_index):
    """Fourier coefficients of the conformally mapped symbol at indices m_index."""
    m_index = np.asarray(m_index)
    gen = np.zeros(m_index.shape, dtype=complex)
    lam = -2j / grid.h
    for off, coeff in _ap_offsets(sym, grid, cfg):
        gen[m_index == off] += coeff
    for w in sym.l0:
        q = w.shift / grid.h
        if abs(q - round(q)) > cfg.snap_tol:
            raise ShiftNotCommensurate(
                f"shift {w.shift} is not commensurate with h = {grid.h}"
            )
        k = int(round(q))
        num = np.asarray(w.rational.num, dtype=complex)
        den = np.asarray(w.rational.den, dtype=complex)
        if abs(poly.pval(den, lam)) < 1e-12:
            raise OutOfScope(
                "denominator vanishes at the discretization's mapped infinity; "
                "refine h"
            )
        degree = len(den) - 1
        num_z = _mobius_poly(num, lam, degree)
        den_z = _mobius_poly(den, lam, degree)
        gen += _laurent_coeffs(num_z, den_z, m_index - k)
    return gen


def wh_matrix(a: GSymbol, grid=None, cfg=DEFAULT_CONFIG) -> DiscretizedOp:
    """Half-line convolution operator W(a) on the midpoint grid."""
    grid = grid or Grid()
    n = grid.n
    gen = _symbol_gen(a, grid, cfg, np.arange(-(n - 1), n))
    col = gen[n - 1 :]          # m = 0 .. n-1
    row = gen[: n][::-1]        # m = 0 .. -(n-1)
    mat = _toeplitz_mat(col, row)
    return DiscretizedOp(
        matrix=mat,
        grid=grid,
        description=f"W[{_short(a)}]",
        rebuild=lambda g: wh_matrix(a, g, cfg),
    )


def hankel_matrix(b: GSymbol, grid=None, cfg=DEFAULT_CONFIG) -> DiscretizedOp:
    """Hankel operator H(b): entry (i, j) is generator coefficient i + j + 1."""
    grid = grid or Grid()
    n = grid.n
    gen = _symbol_gen(b, grid, cfg, np.arange(1, 2 * n))
    mat = _hankel_mat(gen[:n], gen[n - 1 :])
    return DiscretizedOp(
        matrix=mat,
        grid=grid,
        description=f"H[{_short(b)}]",
        rebuild=lambda g: hankel_matrix(b, g, cfg),
    )


def w0_matrix(a: GSymbol, grid=None, cfg=DEFAULT_CONFIG) -> DiscretizedOp:
    """Whole-line convolution operator on the mirrored grid [-T, T]."""
    grid = grid or Grid()
    n2 = 2 * grid.n
    gen = _symbol_gen(a, grid, cfg, np.arange(-(n2 - 1), n2))
    col = gen[n2 - 1 :]
    row = gen[: n2][::-1]
    return DiscretizedOp(
        matrix=_toeplitz_mat(col, row),
        grid=grid,
        description=f"W0[{_short(a)}]",
        rebuild=lambda g: w0_matrix(a, g, cfg),
    )


def _short(a):
    from .dsl import format_symbol

    s = format_symbol(a)
    return s if len(s) <= 40 else s[:37] + "..."


class FullLineOps:
    """Matrix-free J, P, Q on the mirrored grid, plus cached W0 applications."""

    def __init__(self, grid, cfg=DEFAULT_CONFIG):
        self.grid = grid
        self.cfg = cfg
        self._w0 = {}

    def w0(self, a):
        if a not in self._w0:
            self._w0[a] = w0_matrix(a, self.grid, self.cfg)
        return self._w0[a]

    def apply_w0(self, a, v):
        return self.w0(a).matrix @ v

    @staticmethod
    def apply_j(v):
        return v[::-1]

    def apply_p(self, v):
        out = v.copy()
        out[: self.grid.n] = 0.0
        return out

    def apply_q(self, v):
        out = v.copy()
        out[self.grid.n :] = 0.0
        return out

    def embed_half(self, v):
        out = np.zeros(2 * self.grid.n, dtype=complex)
        out[self.grid.n :] = v
        return out

    def restrict_pos(self, v):
        return v[self.grid.n :].copy()


def wh_plus_hankel(a, b, sign=1, grid=None, cfg=DEFAULT_CONFIG) -> DiscretizedOp:
    grid = grid or Grid()
    wa = wh_matrix(a, grid, cfg)
    hb = hankel_matrix(b, grid, cfg)
    name = f"W[{_short(a)}] {'+' if sign > 0 else '-'} H[{_short(b)}]"
    return DiscretizedOp(
        matrix=wa.matrix + sign * hb.matrix,
        grid=grid,
        description=name,
        rebuild=lambda g: wh_plus_hankel(a, b, sign, g, cfg),
    )


def block_v_matrix(pair, grid=None, cfg=DEFAULT_CONFIG) -> DiscretizedOp:
    """2N x 2N matrix of [[0, W(d)], [-W(c), W(tilde(a)^(-1))]]."""
    from .classify import subordinated

    grid = grid or Grid()
    sub = subordinated(pair)
    at_inv = symbols.inverse(symbols.tilde(pair.a))
    n = grid.n
    mat = np.zeros((2 * n, 2 * n), dtype=complex)
    mat[:n, n:] = wh_matrix(sub.d, grid, cfg).matrix
    mat[n:, :n] = -wh_matrix(sub.c, grid, cfg).matrix
    mat[n:, n:] = wh_matrix(at_inv, grid, cfg).matrix
    return DiscretizedOp(
        matrix=mat,
        grid=grid,
        description="W[V(a,b)]",
        components=2,
        rebuild=lambda g: block_v_matrix(pair, g, cfg),
    )


def block_factorization_residual(pair, grid=None, cfg=DEFAULT_CONFIG, seed=0,
                                 nvec=3) -> float:
    """Defect of the whole-line three-factor splitting of the pair operator.

    Verifies, on interior-supported random vectors, that

        diag(W(a)+H(b)+Q, W(a)-H(b)+Q) = B1 B2 B3 (W(V(a,b)) + diag(Q,Q)) A,

    where A couples the components through W0(b~), W0(a~) and the flip,
    B1 = (1/2) [[I, J], [I, -J]], B2/B3 are identity-plus-triangular
    corrections, and all blocks act on the mirrored grid.  Returns the worst
    relative residual.
    """
    from .classify import subordinated
    from .symbols import inverse, tilde

    grid = grid or Grid()
    sub = subordinated(pair)
    a, b = pair.a, pair.b
    at, btld = tilde(a), tilde(b)
    at_inv = inverse(at)
    n2 = 2 * grid.n
    eye = np.eye(n2, dtype=complex)
    pm = np.diag((grid.full_nodes() > 0).astype(complex))
    qm = eye - pm
    jm = eye[::-1]

    def blk(m11, m12, m21, m22):
        return np.block([[m11, m12], [m21, m22]])

    w0 = {s: w0_matrix(s, grid, cfg).matrix
          for s in (a, b, btld, at, sub.c, sub.d, at_inv)}
    corner = a - b * btld * at_inv
    w0corner = (
        np.zeros((n2, n2), dtype=complex)
        if corner.is_zero()
        else w0_matrix(corner, grid, cfg).matrix
    )
    zero = np.zeros((n2, n2), dtype=complex)
    a_op = blk(eye, zero, w0[btld], w0[at]) @ blk(eye, eye, jm, -jm)
    b1 = 0.5 * blk(eye, jm, eye, -jm)
    b2 = np.eye(2 * n2) - blk(
        pm @ w0[a] @ qm, pm @ w0[b] @ pm, qm @ w0[btld] @ qm, qm @ w0[at] @ pm
    )
    b3 = np.eye(2 * n2) + blk(
        pm @ w0corner @ qm, pm @ w0[sub.d] @ qm,
        -(pm @ w0[sub.c] @ qm), pm @ w0[at_inv] @ qm,
    )
    wv = blk(zero, pm @ w0[sub.d] @ pm, -(pm @ w0[sub.c] @ pm), pm @ w0[at_inv] @ pm)
    qq = blk(qm, zero, zero, qm)
    plus = pm @ w0[a] @ pm + pm @ w0[b] @ qm @ jm + qm
    minus = pm @ w0[a] @ pm - pm @ w0[b] @ qm @ jm + qm
    lhs = blk(plus, zero, zero, minus)
    rng = np.random.default_rng(seed)
    mask = np.abs(grid.full_nodes()) <= grid.T / 2
    worst = 0.0
    for _ in range(nvec):
        x = rng.normal(size=2 * n2) + 1j * rng.normal(size=2 * n2)
        x[:n2][~mask] = 0.0
        x[n2:][~mask] = 0.0
        rhs = b1 @ (b2 @ (b3 @ ((wv + qq) @ (a_op @ x))))
        worst = max(worst, float(np.linalg.norm(lhs @ x - rhs) / np.linalg.norm(x)))
    return worst


def block_v_product_form(pair, grid=None, cfg=DEFAULT_CONFIG) -> np.ndarray:
    """The same block operator assembled from its three-factor product form."""
    from .classify import subordinated

    grid = grid or Grid()
    sub = subordinated(pair)
    at_inv = symbols.inverse(symbols.tilde(pair.a))
    n = grid.n
    eye = np.eye(n, dtype=complex)
    zero = np.zeros((n, n), dtype=complex)
    wd = wh_matrix(sub.d, grid, cfg).matrix
    wc = wh_matrix(sub.c, grid, cfg).matrix
    wai = wh_matrix(at_inv, grid, cfg).matrix
    f1 = np.block([[-wd, zero], [zero, eye]])
    f2 = np.block([[zero, -eye], [eye, wai]])
    f3 = np.block([[-wc, zero], [zero, eye]])
    return f1 @ f2 @ f3


# --- kernel estimation --------------------------------------------------------

def _boundary_penalty_rows(op: DiscretizedOp, cfg: OracleConfig):
    n_total = op.matrix.shape[1]
    n_comp = n_total // op.components
    width = max(1, int(round(cfg.boundary_frac * n_comp)))
    idx = []
    for c in range(op.components):
        start = (c + 1) * n_comp - width
        idx.extend(range(start, (c + 1) * n_comp))
    rows = np.zeros((len(idx), n_total), dtype=complex)
    for r, j in enumerate(idx):
        rows[r, j] = 1.0
    return rows


def _augmented_svd(op: DiscretizedOp, cfg: OracleConfig):
    penalty = _boundary_penalty_rows(op, cfg) * max(op.norm_est, 1e-300)
    aug = np.vstack([op.matrix, penalty])
    _, s, vh = np.linalg.svd(aug, full_matrices=False)
    return s, vh


def _estimate_once(op: DiscretizedOp, cfg: OracleConfig, tol):
    s, vh = _augmented_svd(op, cfg)
    smax = s[0] if len(s) else 0.0
    cut = tol * smax
    null_idx = [k for k in range(len(s)) if s[k] < cut]
    basis = [vh[k].conj() for k in null_idx]
    residuals = [
        float(np.linalg.norm(op.matrix @ v) / max(op.norm_est, 1e-300)) for v in basis
    ]
    return len(null_idx), basis, s, residuals


def kernel_estimate(op: DiscretizedOp, cfg=DEFAULT_CONFIG, tol=None) -> KernelEstimate:
    """Numerical kernel dimension and orthonormal basis of a discretized operator.

    dim counts singular values of the boundary-penalized matrix below
    tol * sigma_max.  With stability enabled the dimension is recomputed on
    the (1.25 T, h/2) grid and must agree, else the estimate is flagged.
    """
    tol = cfg.rank_tol if tol is None else tol
    dim, basis, s, residuals = _estimate_once(op, cfg, tol)
    stable = True
    if cfg.stability and op.rebuild is not None:
        fine = op.rebuild(op.grid.refined())
        dim2, _, _, _ = _estimate_once(fine, cfg, tol)
        stable = dim2 == dim
    return KernelEstimate(
        dim=dim,
        basis=tuple(basis),
        singular_values=tuple(float(x) for x in s),
        tol=tol,
        stable=stable,
        residuals=tuple(residuals),
    )


def coker_estimate(op: DiscretizedOp, cfg=DEFAULT_CONFIG, tol=None) -> KernelEstimate:
    """Cokernel dimension, measured as the kernel of the conjugate transpose."""
    return kernel_estimate(op.adjoint(), cfg, tol)


# --- recipes --------------------------------------------------------------------

def recipe_matrices(recipe, grid=None, cfg=DEFAULT_CONFIG):
    grid = grid or Grid()
    return [wh_matrix(f, grid, cfg) for f in recipe.factors]


def apply_recipe(recipe, v, grid=None, cfg=DEFAULT_CONFIG):
    """Apply W(f1) W(f2) ... W(fk) to a half-line vector (rightmost first)."""
    grid = grid or Grid()
    out = np.asarray(v, dtype=complex)
    for op in reversed(recipe_matrices(recipe, grid, cfg)):
        out = op.matrix @ out
    return out


# --- verdicts ---------------------------------------------------------------------

@dataclass
class VerdictRow:
    cell: str
    predicted: str
    measured: object
    stable: bool
    verdict: str  # pass | fail | unstable | no-prediction | consistent

    def to_dict(self):
        return {
            "cell": self.cell,
            "predicted": self.predicted,
            "measured": self.measured,
            "stable": self.stable,
            "verdict": self.verdict,
        }


@dataclass
class VerdictTable:
    rows: list = field(default_factory=list)

    @property
    def ok(self):
        return all(r.verdict != "fail" for r in self.rows)

    def add(self, *args, **kw):
        self.rows.append(VerdictRow(*args, **kw))

    def to_json(self):
        import json

        return json.dumps([r.to_dict() for r in self.rows], indent=2)

    def format_text(self):
        w = max([len(r.cell) for r in self.rows] + [4])
        lines = [f"{'cell':<{w}}  {'predicted':>12}  {'measured':>10}  verdict"]
        for r in self.rows:
            lines.append(
                f"{r.cell:<{w}}  {r.predicted:>12}  {str(r.measured):>10}  "
                f"{r.verdict}{'' if r.stable else ' (unstable)'}"
            )
        return "\n".join(lines)


def _judge(dim_pred, measured, stable):
    """Compare one predicted dimension against a measured one."""
    kind = dim_pred.kind
    if kind == "unknown":
        return "no-prediction"
    if not stable:
        return "unstable"
    if kind == "exact":
        return "pass" if measured == dim_pred.value else "fail"
    if kind == "at_least":
        return "pass" if measured >= dim_pred.value else "fail"
    if kind == "infinite":
        return "consistent" if measured >= 3 else "fail"
    return "no-prediction"


def verify(report, pair, grid=None, cfg=DEFAULT_CONFIG) -> VerdictTable:
    """Compare a classification report against oracle kernel/cokernel estimates."""
    grid = grid or Grid()
    table = VerdictTable()
    measured_index = {}
    for sign, sr in (("plus", report.plus), ("minus", report.minus)):
        op = wh_plus_hankel(pair.a, pair.b, +1 if sign == "plus" else -1, grid, cfg)
        ker = kernel_estimate(op, cfg)
        cok = coker_estimate(op, cfg)
        table.add(f"{sign}.ker", sr.ker.describe(), ker.dim, ker.stable,
                  _judge(sr.ker, ker.dim, ker.stable))
        table.add(f"{sign}.coker", sr.coker.describe(), cok.dim, cok.stable,
                  _judge(sr.coker, cok.dim, cok.stable))
        if ker.stable and cok.stable:
            measured_index[sign] = ker.dim - cok.dim
    if report.index_check is not None and len(measured_index) == 2:
        rhs = report.index_check["rhs"]
        lhs = measured_index["plus"] + measured_index["minus"]
        table.add(
            "index-identity",
            str(rhs),
            lhs,
            True,
            "pass" if lhs == rhs else "fail",
        )
    return table


def verify_scalar(report, a, grid=None, cfg=DEFAULT_CONFIG) -> VerdictTable:
    """Oracle check of a scalar half-line operator classification."""
    grid = grid or Grid()
    table = VerdictTable()
    op = wh_matrix(a, grid, cfg)
    ker = kernel_estimate(op, cfg)
    cok = coker_estimate(op, cfg)
    table.add("ker", report.ker.describe(), ker.dim, ker.stable,
              _judge(report.ker, ker.dim, ker.stable))
    table.add("coker", report.coker.describe(), cok.dim, cok.stable,
              _judge(report.coker, cok.dim, cok.stable))
    return table
