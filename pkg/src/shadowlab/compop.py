"""Composition and weighted composition operators as monomial-basis matrices.

Column k of the plain matrix holds the first N+1 Maclaurin coefficients of
phi^k, so the matrix is the compression P_N C_phi P_N of the operator on H^2.
"""

from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidParameter, NoConvergenceWarning, PoleTooClose, WrongClass
from .hardy import TaylorPoly
from .lft import MoebiusMap, SymbolTag, classify, derivative_at, is_inf

POLE_MARGIN = 1e-9


def symbol_series(phi: MoebiusMap, N: int) -> TaylorPoly:
    """Maclaurin coefficients of phi, valid when the pole lies off the closed disk."""
    pole = phi.pole()
    if not is_inf(pole) and abs(pole) <= 1 + POLE_MARGIN:
        raise PoleTooClose(f"pole {pole} is within {POLE_MARGIN} of the closed disk")
    a, b, c, d = phi.a, phi.b, phi.c, phi.d
    out = np.zeros(N + 1, dtype=complex)
    out[0] = b / d
    if N >= 1:
        # ad - bc = 1 after normalization
        out[1:] = (1.0 / d**2) * (-c / d) ** np.arange(N)
    return TaylorPoly(out)


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    entries: np.ndarray
    symbol: MoebiusMap | None = None
    weighted: bool = False

    def __post_init__(self):
        e = np.array(self.entries, dtype=complex)
        e.setflags(write=False)
        object.__setattr__(self, "entries", e)

    @property
    def truncation(self) -> int:
        return self.entries.shape[0] - 1

    def __array__(self, dtype=None, copy=None):
        return self.entries if dtype is None else self.entries.astype(dtype)

    def apply(self, x) -> np.ndarray:
        if isinstance(x, TaylorPoly):
            x = x.padded(self.truncation).coeffs
        return self.entries @ x

    def power(self, n: int) -> np.ndarray:
        return np.linalg.matrix_power(self.entries, n)

    def to_csv(self, threshold: float = 1e-15) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["row", "col", "re", "im"])
        rows, cols = np.nonzero(np.abs(self.entries) > threshold)
        for i, j in zip(rows, cols):
            v = self.entries[i, j]
            w.writerow([i, j, repr(float(v.real)), repr(float(v.imag))])
        return buf.getvalue()


def _powers_matrix(base: np.ndarray, N: int) -> np.ndarray:
    cols = np.zeros((N + 1, N + 1), dtype=complex)
    col = np.zeros(N + 1, dtype=complex)
    col[0] = 1.0
    for k in range(N + 1):
        cols[:, k] = col
        col = np.convolve(col, base)[: N + 1]
    return cols


def comp_matrix(phi: MoebiusMap, N: int) -> OperatorMatrix:
    series = symbol_series(phi, N).coeffs
    return OperatorMatrix(_powers_matrix(series, N), phi, weighted=False)


def weighted_multiplier(Phi: MoebiusMap, N: int) -> TaylorPoly:
    """Truncated series of (1 - Phi(z))/(1 - z); division by 1 - z is a cumulative sum."""
    one_minus = -symbol_series(Phi, N).coeffs
    one_minus[0] += 1.0
    return TaylorPoly(np.cumsum(one_minus))


def weighted_comp_matrix(Phi: MoebiusMap, N: int) -> OperatorMatrix:
    """Matrix of f -> ((1 - Phi)/(1 - z)) f o Phi."""
    plain = _powers_matrix(symbol_series(Phi, N).coeffs, N)
    weight = weighted_multiplier(Phi, N).coeffs
    # multiplication by the weight is a lower-triangular Toeplitz matrix
    idx = np.arange(N + 1)
    diff = idx[:, None] - idx[None, :]
    toeplitz = np.where(diff >= 0, weight[np.clip(diff, 0, N)], 0)
    return OperatorMatrix(toeplitz @ plain, Phi, weighted=True)


# ------------------------------------------------------ norms and radii

def _seed(n: int) -> np.ndarray:
    v = 1.0 / np.arange(1, n + 1)
    return (v / np.linalg.norm(v)).astype(complex)


def power_norm(A: np.ndarray, iters: int = 500, tol: float = 1e-13) -> float:
    """Largest singular value by power iteration on A^H A."""
    x = _seed(A.shape[1])
    est = 0.0
    for _ in range(iters):
        y = A.conj().T @ (A @ x)
        ny = np.linalg.norm(y)
        if ny == 0:
            return 0.0
        new = math.sqrt(ny)
        x = y / ny
        if abs(new - est) <= tol * max(new, 1e-300):
            est = new
            break
        est = new
    return est


@dataclass(frozen=True)
class SpectralEstimate:
    norm: float
    spectral_radius: float
    previous_estimate: float
    converged: bool
    schedule: tuple = field(default=())
    roots: tuple = field(default=())

    def to_json(self, truncation: int) -> dict:
        return {"norm": self.norm, "spectral_radius": self.spectral_radius, "truncation": truncation}


def norm_and_spectral_radius(T, iters: int = 200, max_doublings: int = 10) -> SpectralEstimate:
    """Operator norm and ||T^n||^(1/n) over the schedule n = 1, 2, 4, ...

    NoConvergenceWarning is emitted (not raised) when the last two root
    estimates differ by more than 1e-3.
    """
    if iters < 10:
        raise InvalidParameter("iters must be >= 10")
    A = np.asarray(T, dtype=complex)
    norm = power_norm(A, iters)
    schedule, roots = [], []
    log_scale = 0.0
    P = A.copy()
    n = 1
    for _ in range(max_doublings + 1):
        pn = power_norm(P, iters)
        if pn == 0:
            roots.append(0.0)
            schedule.append(n)
            break
        roots.append(math.exp((math.log(pn) + log_scale) / n))
        schedule.append(n)
        P = P @ P
        log_scale *= 2
        fro = np.linalg.norm(P)
        if fro == 0:
            # nilpotent within the schedule
            roots.append(0.0)
            schedule.append(2 * n)
            break
        P /= fro
        log_scale += math.log(fro)
        n *= 2
    prev = roots[-2] if len(roots) > 1 else roots[-1]
    converged = abs(roots[-1] - prev) <= 1e-3
    if not converged:
        warnings.warn(f"spectral radius estimates {prev:.6g} -> {roots[-1]:.6g} not settled", NoConvergenceWarning)
    return SpectralEstimate(norm, roots[-1], prev, converged, tuple(schedule), tuple(roots))


@dataclass(frozen=True)
class SpectrumAnnulus:
    inner: float
    outer: float
    fixed_point: complex
    multiplier: float

    def contains_circle_in_interior(self) -> bool:
        return self.inner < 1 < self.outer


def spectrum_annulus_HA(phi: MoebiusMap) -> SpectrumAnnulus:
    """Closed-form spectrum of C_phi for a hyperbolic automorphism."""
    cls = classify(phi)
    if cls.tag is not SymbolTag.HA:
        raise WrongClass(f"expected a hyperbolic automorphism, got {cls.tag.value}")
    m = derivative_at(phi, cls.attracting).real
    return SpectrumAnnulus(math.sqrt(m), 1 / math.sqrt(m), cls.attracting, m)
