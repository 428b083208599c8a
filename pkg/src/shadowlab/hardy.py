"""Truncated Maclaurin-coefficient model of H^p on the unit disk."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameter, OutsideDisk

DEFAULT_TRUNCATION = 128
DEFAULT_QUADRATURE = 1024


@dataclass(frozen=True, eq=False)
class TaylorPoly:
    """Coefficients c_0..c_N of a polynomial (or truncated power series)."""

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex).ravel()
        if c.size == 0:
            c = np.zeros(1, dtype=complex)
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def truncation(self) -> int:
        return self.coeffs.size - 1

    def __call__(self, z):
        return evaluate(self, z)

    def __add__(self, other):
        return poly_arith(self, other, "add")

    def __sub__(self, other):
        return poly_arith(self, poly_arith(other, None, "scale", -1), "add")

    def __mul__(self, other):
        if isinstance(other, TaylorPoly):
            return poly_arith(self, other, "truncated_multiply")
        return poly_arith(self, None, "scale", other)

    __rmul__ = __mul__

    def padded(self, n: int) -> "TaylorPoly":
        """Zero-extend (or cut) to truncation ``n``."""
        out = np.zeros(n + 1, dtype=complex)
        k = min(n + 1, self.coeffs.size)
        out[:k] = self.coeffs[:k]
        return TaylorPoly(out)

    def to_json(self) -> list:
        return [[c.real, c.imag] for c in self.coeffs]

    @classmethod
    def from_json(cls, data) -> "TaylorPoly":
        return cls(np.array([complex(re, im) for re, im in data]))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "re", "im"])
        for n, c in enumerate(self.coeffs):
            w.writerow([n, repr(float(c.real)), repr(float(c.imag))])
        return buf.getvalue()


def evaluate(f: TaylorPoly, z):
    """Horner evaluation; works on scalars and arrays."""
    return np.polyval(f.coeffs[::-1], z)


def poly_arith(f: TaylorPoly, g: TaylorPoly | None, op: str, lam: complex = 1.0) -> TaylorPoly:
    if op == "scale":
        return TaylorPoly(lam * f.coeffs)
    n = max(f.truncation, g.truncation)
    if op == "add":
        return TaylorPoly(f.padded(n).coeffs + g.padded(n).coeffs)
    if op == "truncated_multiply":
        return TaylorPoly(np.convolve(f.coeffs, g.coeffs)[: n + 1])
    raise InvalidParameter(f"unknown operation {op!r}")


def h2_inner(f: TaylorPoly, g: TaylorPoly) -> complex:
    n = min(f.coeffs.size, g.coeffs.size)
    return complex(np.vdot(g.coeffs[:n], f.coeffs[:n]))


def h2_norm(f: TaylorPoly) -> float:
    return float(np.linalg.norm(f.coeffs))


@dataclass(frozen=True, eq=False)
class KernelVector:
    w: complex
    poly: TaylorPoly

    @property
    def exact_norm_sq(self) -> float:
        return 1.0 / (1.0 - abs(self.w) ** 2)

    @property
    def truncation_gap(self) -> float:
        """exact_norm_sq minus the truncated squared norm."""
        r2 = abs(self.w) ** 2
        return r2 ** (self.poly.truncation + 1) / (1.0 - r2)


def kernel(w: complex, N: int = DEFAULT_TRUNCATION) -> KernelVector:
    """Truncated reproducing kernel k_w(z) = 1/(1 - conj(w) z)."""
    w = complex(w)
    if abs(w) >= 1:
        raise OutsideDisk(f"|w| = {abs(w)} >= 1")
    return KernelVector(w, TaylorPoly(np.conj(w) ** np.arange(N + 1)))


def boundary_values(f: TaylorPoly, M: int) -> np.ndarray:
    """f at the M-th roots of unity, via an FFT of the folded coefficients."""
    folded = np.zeros(M, dtype=complex)
    np.add.at(folded, np.arange(f.coeffs.size) % M, f.coeffs)
    return np.fft.ifft(folded) * M


def hp_norm(f: TaylorPoly, p: float, M: int = DEFAULT_QUADRATURE) -> float:
    """H^p norm of a polynomial from M equispaced samples on the unit circle.

    For p < inf this is the trapezoid rule for the p-th integral mean at
    radius 1 (where the supremum over radii is attained for polynomials);
    p = inf takes the sample maximum.
    """
    if p < 1:
        raise InvalidParameter("p must be >= 1")
    if M < 4:
        raise InvalidParameter("need at least 4 quadrature points")
    vals = np.abs(boundary_values(f, M))
    if math.isinf(p):
        return float(vals.max())
    return float(np.mean(vals**p) ** (1.0 / p))


def pointwise_bound_margin(f: TaylorPoly, z: complex, p: float, M: int = DEFAULT_QUADRATURE) -> float:
    """||f||_p (1-|z|^2)^(-1/p) - |f(z)|; non-negative for every polynomial f."""
    z = complex(z)
    if abs(z) >= 1:
        raise OutsideDisk(f"|z| = {abs(z)} >= 1")
    weight = 1.0 if math.isinf(p) else (1 - abs(z) ** 2) ** (-1.0 / p)
    return hp_norm(f, p, M) * weight - abs(evaluate(f, z))


def binomial_series(s: float, N: int = DEFAULT_TRUNCATION) -> TaylorPoly:
    """Coefficients of (1 - z)^(-s): c_0 = 1, c_n = c_{n-1} (n - 1 + s)/n."""
    if s <= 0:
        raise InvalidParameter("s must be positive")
    k = np.arange(1, N + 1)
    return TaylorPoly(np.concatenate([[1.0], np.cumprod((k - 1 + s) / k)]))
