"""Discretized L^2(R_+) model of the operators W_a and V_a.

(W_a F)(t) = exp(-t(1-a)) F(at) is the Paley-Wiener image of a^{-1} C_{psi_a}
on the half-plane, with psi_a(w) = w/a + 1/a - 1.  L^2 splits as M + N where
M vanishes on (0, a) and N on [a, inf); W_a contracts M superexponentially
and V_a, its right inverse on N, contracts with spectral radius sqrt(a).

Two grids are provided.  The uniform midpoint grid is used for quadrature
(Laplace transforms).  The geometric grid has nodes a q^k with q^m = 1/a, so
dilation by a is an exact index shift and W_a V_a = I holds exactly on N;
the spectral bounds and the shadow construction run on it.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import InvalidParameter, NotInN, NotPseudoOrbit
from .shadowing import PseudoOrbit, ShadowReport

DEFAULT_T_MAX = 40.0
DEFAULT_G = 4096
N_TOLERANCE = 1e-12


@dataclass(frozen=True, eq=False)
class Grid:
    nodes: np.ndarray
    weights: np.ndarray
    kind: str
    T_max: float

    @property
    def size(self) -> int:
        return self.nodes.size

    @property
    def step(self) -> float:
        if self.kind != "uniform":
            raise InvalidParameter("only uniform grids have a constant step")
        return self.T_max / self.size


def uniform_grid(T_max: float = DEFAULT_T_MAX, G: int = DEFAULT_G) -> Grid:
    """Midpoints t_k = (k + 1/2) h of G cells covering [0, T_max]."""
    if T_max <= 0 or G < 4:
        raise InvalidParameter("need T_max > 0 and G >= 4")
    h = T_max / G
    return Grid((np.arange(G) + 0.5) * h, np.full(G, h), "uniform", T_max)


def geometric_grid(a: float, t_min: float, T_max: float = DEFAULT_T_MAX, per_factor: int = 16) -> Grid:
    """Log-uniform nodes a q^k, q = a^(-1/per_factor), between t_min and T_max.

    ``a`` is itself a node, and weights are the log-midpoint rule t_k log q.
    """
    _check_a(a)
    log_q = -math.log(a) / per_factor
    k_lo = math.ceil(math.log(t_min / a) / log_q)
    k_hi = math.floor(math.log(T_max / a) / log_q)
    k = np.arange(k_lo, k_hi + 1)
    nodes = a * np.exp(k * log_q)
    return Grid(nodes, nodes * log_q, "geometric", T_max)


@dataclass(frozen=True, eq=False)
class GridFunction:
    values: np.ndarray
    grid: Grid

    def __post_init__(self):
        v = np.array(self.values, dtype=complex)
        if v.shape != self.grid.nodes.shape:
            raise InvalidParameter("values do not match the grid")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def sample(cls, fn, grid: Grid) -> "GridFunction":
        return cls(fn(grid.nodes), grid)

    def l2_norm(self) -> float:
        return weighted_norm(self.values, self.grid)

    def inner(self, other: "GridFunction") -> complex:
        return complex(np.sum(self.grid.weights * self.values * np.conj(other.values)))

    def __add__(self, other):
        return GridFunction(self.values + other.values, self.grid)

    def __sub__(self, other):
        return GridFunction(self.values - other.values, self.grid)

    def __mul__(self, c):
        return GridFunction(c * self.values, self.grid)

    __rmul__ = __mul__


def weighted_norm(values: np.ndarray, grid: Grid) -> float:
    return float(np.sqrt(np.sum(grid.weights * np.abs(values) ** 2)))


def _check_a(a: float) -> None:
    if not 0 < a < 1:
        raise InvalidParameter(f"a must lie in (0, 1), got {a}")


# ------------------------------------------------------------- operators

def interpolation_matrix(grid: Grid, scale: float) -> sp.csr_matrix:
    """Sparse S with (S F)_k = F_interp(scale * t_k), linear between nodes.

    Zero beyond the last node.  Below the first node a uniform grid extends
    F by its first value (linear extrapolation would raise the discrete norm
    of W above a^{-1/2}) and a geometric grid uses zero.
    """
    t = grid.nodes
    x = scale * t
    G = t.size
    j = np.searchsorted(t, x, side="right") - 1
    rows, cols, vals = [], [], []
    for k in range(G):
        xk, jk = x[k], j[k]
        if jk >= 0 and abs(xk - t[jk]) <= 1e-12 * t[jk]:
            rows.append(k), cols.append(jk), vals.append(1.0)
        elif jk + 1 < G and abs(xk - t[jk + 1]) <= 1e-12 * t[jk + 1]:
            rows.append(k), cols.append(jk + 1), vals.append(1.0)
        elif jk < 0:
            if grid.kind == "uniform":
                rows.append(k), cols.append(0), vals.append(1.0)
        elif jk + 1 < G:
            lam = (xk - t[jk]) / (t[jk + 1] - t[jk])
            rows += [k, k]
            cols += [jk, jk + 1]
            vals += [1 - lam, lam]
    return sp.csr_matrix((vals, (rows, cols)), shape=(G, G))


def w_operator(a: float, grid: Grid) -> sp.csr_matrix:
    _check_a(a)
    return sp.diags(np.exp(-grid.nodes * (1 - a))) @ interpolation_matrix(grid, a)


def v_operator(a: float, grid: Grid) -> sp.csr_matrix:
    _check_a(a)
    S = interpolation_matrix(grid, 1 / a).tocoo()
    # factor only where the row is used, to keep exp() finite
    factor = np.exp(grid.nodes[S.row] / a * (1 - a))
    return sp.csr_matrix((S.data * factor, (S.row, S.col)), shape=S.shape)


def masks(a: float, grid: Grid) -> tuple[np.ndarray, np.ndarray]:
    """(mask_M, mask_N): cells with t_k >= a and t_k < a."""
    m = grid.nodes >= a
    return m, ~m


def apply_W(a: float, F: GridFunction) -> GridFunction:
    return GridFunction(w_operator(a, F.grid) @ F.values, F.grid)


def apply_V(a: float, F: GridFunction) -> GridFunction:
    mask_M, _ = masks(a, F.grid)
    if np.any(np.abs(F.values[mask_M]) > N_TOLERANCE):
        raise NotInN("V_a is defined on functions vanishing on [a, inf)")
    return GridFunction(v_operator(a, F.grid) @ F.values, F.grid)


def split(a: float, F: GridFunction) -> tuple[GridFunction, GridFunction]:
    """(P_M F, P_N F) by cell membership; the two parts sum to F exactly."""
    _check_a(a)
    mask_M, mask_N = masks(a, F.grid)
    return GridFunction(np.where(mask_M, F.values, 0), F.grid), GridFunction(np.where(mask_N, F.values, 0), F.grid)


def weighted_operator_norm(A, grid: Grid, mask=None, iters: int = 3000, tol: float = 1e-13) -> float:
    """Norm of A (restricted to ``mask``) in the quadrature-weighted l2 norm.

    Power iteration on A* A, where A* = D^{-1} A^H D is the adjoint for the
    weights D.
    """
    w = grid.weights
    mask = np.ones(grid.size, bool) if mask is None else mask
    AH = A.conj().T.tocsr() if sp.issparse(A) else A.conj().T
    x = mask.astype(complex)
    if not x.any():
        return 0.0
    x /= weighted_norm(x, grid)
    est = 0.0
    for _ in range(iters):
        y = A @ x
        new = weighted_norm(y, grid)
        if new == 0:
            return 0.0
        z = (AH @ (w * y)) / w
        z = np.where(mask, z, 0)
        nz = weighted_norm(z, grid)
        x = z / nz
        if abs(new - est) <= tol * new:
            return new
        est = new
    return est


# ---------------------------------------------------------------- bounds

def bound_W(a: float, n) -> np.ndarray:
    """exp(-a(a^-n - 1)) / a^(n/2): bound on ||W_a^n restricted to M||."""
    n = np.asarray(n, dtype=float)
    with np.errstate(over="ignore"):
        return np.exp(-a * (a**-n - 1) - 0.5 * n * math.log(a))


def bound_V(a: float, n) -> np.ndarray:
    """a^(n/2) exp(a(1 - a^n)): bound on ||V_a^n||."""
    n = np.asarray(n, dtype=float)
    return a ** (n / 2) * np.exp(a * (1 - a**n))


def gh_constant(a: float, tol: float = 1e-17) -> float:
    """K(a) = sum_{k>=0} bound_W(k) + sum_{k>=1} bound_V(k)."""
    _check_a(a)
    total = 0.0
    k = 0
    while True:
        term = float(bound_W(a, k))
        total += term
        if k > 0 and term <= tol * total:
            break
        k += 1
    k = 1
    while True:
        term = float(bound_V(a, k))
        total += term
        if term <= tol * total:
            break
        k += 1
    return total


def predicted_superexponential_n(a: float) -> int:
    return math.ceil(math.log(100) / abs(math.log(a))) + 2


@dataclass(frozen=True)
class SpectralBoundsTable:
    a: float
    rows: list

    COLUMNS = ("n", "measured_W", "bound_W", "measured_V", "bound_V", "root_W", "root_V")

    def column(self, name: str) -> np.ndarray:
        return np.array([r[name] for r in self.rows])

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.COLUMNS)
        for r in self.rows:
            w.writerow([r["n"]] + [repr(float(r[c])) for c in self.COLUMNS[1:]])
        return buf.getvalue()


def spectral_grid(a: float, n_max: int, T_max: float = DEFAULT_T_MAX, per_factor: int = 16) -> Grid:
    return geometric_grid(a, a ** (n_max + 3), T_max, per_factor)


def spectral_bounds_report(a: float, n_max: int = 20, grid: Grid | None = None, iters: int = 3000) -> SpectralBoundsTable:
    """Measured grid norms of W_a^n on M and V_a^n on N against the closed-form bounds."""
    _check_a(a)
    if n_max < 2:
        raise InvalidParameter("n_max must be >= 2")
    grid = spectral_grid(a, n_max) if grid is None else grid
    mask_M, mask_N = masks(a, grid)
    W = w_operator(a, grid)
    V = v_operator(a, grid) @ sp.diags(mask_N.astype(float))
    Wn, Vn = sp.identity(grid.size, format="csr"), sp.identity(grid.size, format="csr")
    rows = []
    for n in range(1, n_max + 1):
        Wn = (W @ Wn).tocsr()
        Vn = (V @ Vn).tocsr()
        mw = weighted_operator_norm(Wn, grid, mask_M, iters)
        mv = weighted_operator_norm(Vn, grid, mask_N, iters)
        rows.append({
            "n": n,
            "measured_W": mw,
            "bound_W": float(bound_W(a, n)),
            "measured_V": mv,
            "bound_V": float(bound_V(a, n)),
            "root_W": mw ** (1 / n),
            "root_V": mv ** (1 / n),
        })
    return SpectralBoundsTable(a, rows)


# ------------------------------------------------------------ shadowing

def gh_grid(a: float, L: int, floor: float = 1e-6, T_max: float = DEFAULT_T_MAX, per_factor: int = 4) -> Grid:
    """Geometric grid deep enough that V_a^L of anything above ``floor`` stays on it."""
    return geometric_grid(a, floor * a ** (L + 1), T_max, per_factor)


def _random_unit(grid: Grid, rng: np.random.Generator, support: np.ndarray) -> np.ndarray:
    # equal expected mass per cell, so both M and N are exercised
    g = rng.standard_normal(grid.size) + 1j * rng.standard_normal(grid.size)
    v = np.where(support, g / np.sqrt(grid.weights), 0)
    return v / weighted_norm(v, grid)


def random_pseudo_orbit(a: float, grid: Grid, delta: float, L: int, rng: np.random.Generator, floor: float = 1e-6) -> PseudoOrbit:
    """x_{n+1} = W_a x_n - e_n with random errors of norm exactly delta."""
    support = grid.nodes >= floor
    W = w_operator(a, grid)
    states = np.empty((L, grid.size), dtype=complex)
    states[0] = _random_unit(grid, rng, support)
    for n in range(1, L):
        states[n] = W @ states[n - 1] - delta * _random_unit(grid, rng, support)
    res = np.array([weighted_norm(W @ states[n] - states[n + 1], grid) for n in range(L - 1)])
    return PseudoOrbit(states, delta, res, grid.weights, grid)


@dataclass(frozen=True, eq=False)
class GHShadowReport(ShadowReport):
    a: float = float("nan")
    delta: float = float("nan")
    K: float = float("nan")

    def to_json(self) -> dict:
        return {"a": self.a, "delta": self.delta, "K": self.K, "sup_error": self.sup_error}


def gh_shadow(a: float, orbit: PseudoOrbit) -> GHShadowReport:
    """Shadow x = x_1 - sum_j V_a^j P_N e_j of a pseudo-orbit of W_a.

    Then W^n x - x_{n+1} = sum_{j<=n} W^{n-j} P_M e_j - sum_{j>n} V^{j-n} P_N e_j,
    whose norm is at most K(a) delta.
    """
    grid = orbit.grid
    if grid is None:
        raise InvalidParameter("gh_shadow needs an orbit of grid functions")
    _check_a(a)
    W, V = w_operator(a, grid), v_operator(a, grid)
    mask_M, mask_N = masks(a, grid)
    states = orbit.states
    L = states.shape[0]
    errs = np.array([W @ states[n] - states[n + 1] for n in range(L - 1)])
    res = np.array([weighted_norm(e, grid) for e in errs])
    slack = 1e-9 * orbit.delta + 1e-12
    if res.size and res.max() > orbit.delta + slack:
        raise NotPseudoOrbit(f"residual {res.max():.6g} exceeds delta = {orbit.delta}")
    # Horner: sum_{j=1}^{L-1} V^j P_N e_j = V(P_N e_1 + V(P_N e_2 + ...))
    acc = np.zeros(grid.size, dtype=complex)
    for e in errs[::-1]:
        acc = V @ (np.where(mask_N, e, 0) + acc)
    x = states[0] - acc
    errors = np.empty(L)
    y = x
    for n in range(L):
        errors[n] = weighted_norm(y - states[n], grid)
        y = W @ y
    K = gh_constant(a)
    return GHShadowReport(x, float(errors.max()), K * orbit.delta, errors, float("nan"), a=a, delta=orbit.delta, K=K)


# --------------------------------------------------- Laplace transform

def paley_wiener(F: GridFunction, w: complex) -> complex:
    """(PF)(w) = int_0^inf F(t) e^{-tw} dt over [0, T_max].

    On a uniform grid this is the midpoint rule plus the h^2/24 endpoint
    correction with one-sided derivative estimates, so smooth integrands are
    integrated to O(h^4).  Other grids use their own weights.
    """
    w = complex(w)
    if w.real <= 0:
        raise InvalidParameter("need Re(w) > 0")
    grid = F.grid
    g = F.values * np.exp(-grid.nodes * w)
    total = np.sum(grid.weights * g)
    if grid.kind == "uniform" and grid.size >= 3:
        h = grid.step
        d_left = -2 * g[0] + 3 * g[1] - g[2]
        d_right = 2 * g[-1] - 3 * g[-2] + g[-3]
        total += h / 24 * (d_right - d_left)
    return complex(total)


def paley_wiener_tail_bound(F: GridFunction, w: complex) -> float:
    """Cauchy-Schwarz factor exp(-Re(w) T_max)/sqrt(2 Re(w)) times ||F||.

    Bounds the neglected tail when F beyond T_max is no larger than F on the grid.
    """
    w = complex(w)
    return math.exp(-w.real * F.grid.T_max) / math.sqrt(2 * w.real) * F.l2_norm()


def psi(a: float, w: complex) -> complex:
    return w / a + (1 / a - 1)


def similarity_check(a: float, F: GridFunction, w_samples) -> float:
    """max |P(W_a F)(w) - a^{-1} (PF)(psi_a(w))| over the samples."""
    _check_a(a)
    WF = apply_W(a, F)
    worst = 0.0
    for w in w_samples:
        if complex(w).real <= 0:
            raise InvalidParameter("need Re(w) > 0")
        lhs = paley_wiener(WF, w)
        rhs = paley_wiener(F, psi(a, w)) / a
        worst = max(worst, abs(lhs - rhs))
    return worst
