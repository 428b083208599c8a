"""Pseudo-orbits, finite-horizon shadow search and divergence certificates."""

from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .compop import OperatorMatrix, comp_matrix
from .errors import (
    IdentityMap,
    IllConditionedWarning,
    InvalidParameter,
    ZeroAtFixedPoint,
    ZeroVector,
)
from .hardy import DEFAULT_TRUNCATION, TaylorPoly, binomial_series, evaluate, h2_norm, hp_norm
from .lft import SHADOWING_CLASSES, MoebiusMap, SymbolTag, classify

RESIDUAL_SLACK = 1e-12
CONDITION_LIMIT = 1e12
MAX_HORIZON = 512


@dataclass(frozen=True, eq=False)
class PseudoOrbit:
    """States x_1..x_L (rows) with the per-step residuals ||T x_n - x_{n+1}||.

    ``weights`` holds quadrature weights when the states are grid functions;
    ``None`` means the plain l2 (H^2 coefficient) norm.
    """

    states: np.ndarray
    delta: float
    residuals: np.ndarray
    weights: np.ndarray | None = None
    grid: object = None

    @property
    def length(self) -> int:
        return self.states.shape[0]

    def norm(self, v: np.ndarray) -> float:
        if self.weights is None:
            return float(np.linalg.norm(v))
        return float(np.sqrt(np.sum(self.weights * np.abs(v) ** 2)))


def _as_matrix(T) -> np.ndarray:
    return np.asarray(T, dtype=complex)


def _residuals(A: np.ndarray, states: np.ndarray) -> np.ndarray:
    return np.linalg.norm(states[:-1] @ A.T - states[1:], axis=1)


def natural_pseudo_orbit(T, x, delta: float, L: int) -> PseudoOrbit:
    """x_1 = delta x/||x||, x_{n+1} = T x_n + x_1; every residual equals delta."""
    if delta <= 0:
        raise InvalidParameter("delta must be positive")
    if L < 2:
        raise InvalidParameter("need at least two states")
    A = _as_matrix(T)
    if isinstance(x, TaylorPoly):
        x = x.padded(A.shape[0] - 1).coeffs
    x = np.asarray(x, dtype=complex)
    nx = np.linalg.norm(x)
    if nx == 0:
        raise ZeroVector("seed vector is zero")
    states = np.empty((L, x.size), dtype=complex)
    states[0] = delta * x / nx
    for n in range(1, L):
        states[n] = A @ states[n - 1] + states[0]
    return PseudoOrbit(states, delta, _residuals(A, states))


class ResidualCheck(NamedTuple):
    max_residual: float
    violated: bool


def validate_pseudo_orbit(T, orbit: PseudoOrbit) -> ResidualCheck:
    res = _residuals(_as_matrix(T), orbit.states)
    worst = float(res.max()) if res.size else 0.0
    return ResidualCheck(worst, worst > orbit.delta + RESIDUAL_SLACK)


@dataclass(frozen=True, eq=False)
class ShadowReport:
    shadow: np.ndarray
    sup_error: float
    epsilon: float
    errors: np.ndarray
    condition_estimate: float = float("nan")

    @property
    def verdict(self) -> str:
        return "shadowed" if self.sup_error <= self.epsilon else "failed"

    @property
    def ill_conditioned(self) -> bool:
        return self.condition_estimate > CONDITION_LIMIT

    def to_json(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "sup_error": self.sup_error,
            "verdict": self.verdict,
            "condition_estimate": self.condition_estimate,
        }


def finite_horizon_shadow(T, orbit: PseudoOrbit, epsilon: float) -> ShadowReport:
    """Least-squares shadow: minimize sum_n ||T^n x - x_{n+1}||^2, n = 0..L-1.

    The sup-error of the minimizer is an upper bound on the best achievable
    sup-error over the horizon.
    """
    if epsilon <= 0:
        raise InvalidParameter("epsilon must be positive")
    L = orbit.length
    if L > MAX_HORIZON:
        raise InvalidParameter(f"horizon {L} exceeds the cap {MAX_HORIZON}")
    A = _as_matrix(T)
    dim = A.shape[1]
    stacked = np.empty((L * dim, dim), dtype=complex)
    P = np.eye(dim, dtype=complex)
    for n in range(L):
        stacked[n * dim:(n + 1) * dim] = P
        P = A @ P
    rhs = orbit.states.reshape(-1)
    x, _, _, sv = np.linalg.lstsq(stacked, rhs, rcond=None)
    cond = float(sv[0] / sv[-1]) if sv[-1] > 0 else math.inf
    if cond > CONDITION_LIMIT:
        warnings.warn(f"stacked shadow system has condition {cond:.3g}", IllConditionedWarning)
    errors = np.linalg.norm((stacked @ x - rhs).reshape(L, dim), axis=1)
    return ShadowReport(x, float(errors.max()), epsilon, errors, cond)


# ------------------------------------------------------------ certificates

@dataclass(frozen=True, eq=False)
class DivergenceCertificate:
    """Lower bounds b_n on ||T^n g - x_n|| for a fixed candidate g."""

    n: np.ndarray
    lower_bounds: np.ndarray
    growth_exponent: float
    constants: dict = field(default_factory=dict)
    orbit_values: np.ndarray | None = None

    def onset(self) -> int:
        """First index after which the bounds are strictly increasing."""
        inc = np.diff(self.lower_bounds) > 0
        bad = np.nonzero(~inc)[0]
        return int(self.n[bad[-1] + 1]) if bad.size else int(self.n[0])


def lemma_constant(s: float, a: complex) -> float:
    """cos(s pi/2) |a|^s/(s+1)."""
    a = complex(a)
    if not 0 < s < 1:
        raise InvalidParameter("s must lie in (0, 1)")
    if a.real < 0 or a == 0:
        raise InvalidParameter("need Re(a) >= 0 and a != 0")
    return math.cos(s * math.pi / 2) * abs(a) ** s / (s + 1)


@dataclass(frozen=True)
class LemmaCheck:
    passed: bool
    first_violation: int | None
    worst_ratio: float

    def __bool__(self):
        return self.passed


def lemma_partial_sums(s: float, a: complex, n_max: int) -> np.ndarray:
    """|sum_{j=0}^n (2 + ja)^s| for n = 1..n_max, principal branch."""
    j = np.arange(n_max + 1)
    terms = (2 + j * complex(a)) ** s
    return np.abs(np.cumsum(terms))[1:]


def lemma_check(s: float, a: complex, n_max: int) -> LemmaCheck:
    c = lemma_constant(s, a)
    if n_max < 1:
        raise InvalidParameter("n_max must be >= 1")
    n = np.arange(1, n_max + 1)
    sums = lemma_partial_sums(s, a, n_max)
    ratio = sums / (c * n ** (s + 1))
    bad = np.nonzero(ratio < 1)[0]
    first = int(n[bad[0]]) if bad.size else None
    return LemmaCheck(first is None, first, float(ratio.min()))


def fixed_point_divergence_bound(alpha: complex, f: TaylorPoly, delta: float, g_at_alpha: complex, n):
    """(1-|alpha|^2)^(1/2) [delta |f(alpha)|/||f|| n - |g(alpha)|]."""
    alpha = complex(alpha)
    if abs(alpha) >= 1:
        raise InvalidParameter("the fixed point must lie in the open disk")
    if delta <= 0:
        raise InvalidParameter("delta must be positive")
    fa = evaluate(f, alpha)
    if fa == 0:
        raise ZeroAtFixedPoint("f vanishes at the fixed point")
    slope = delta * abs(fa) / h2_norm(f)
    return math.sqrt(1 - abs(alpha) ** 2) * (slope * np.asarray(n, dtype=float) - abs(g_at_alpha))


def fixed_point_certificate(alpha, f: TaylorPoly, delta: float, g_at_alpha: complex, L: int) -> DivergenceCertificate:
    n = np.arange(1, L + 1)
    fa = evaluate(f, complex(alpha))
    return DivergenceCertificate(
        n,
        fixed_point_divergence_bound(alpha, f, delta, g_at_alpha, n),
        1.0,
        {"delta": delta, "alpha": complex(alpha), "f_norm": h2_norm(f), "f_alpha": complex(fa), "g_alpha": complex(g_at_alpha)},
        orbit_values=delta * fa / h2_norm(f) * n,
    )


def _check_parabolic(a: complex, s: float, delta: float):
    a = complex(a)
    if a.real < 0 or a == 0:
        raise InvalidParameter("need Re(a) >= 0 and a != 0")
    if not 0 < s < 0.5:
        raise InvalidParameter("s must lie in (0, 1/2)")
    if delta <= 0:
        raise InvalidParameter("delta must be positive")
    return a


def parabolic_orbit_value_at_zero(a: complex, s: float, delta: float, n, N: int = DEFAULT_TRUNCATION):
    """f_n(0) = delta/(2^s ||f_s||) sum_{j<n} (2 + ja)^s, with the truncated norm."""
    a = complex(a)
    n = np.atleast_1d(np.asarray(n, dtype=int))
    f_norm = h2_norm(binomial_series(s, N))
    sums = np.cumsum((2 + np.arange(int(n.max())) * a) ** s)
    return delta / (2**s * f_norm) * sums[n - 1]


def parabolic_divergence_bound(a: complex, s: float, delta: float, g_norm: float, n, N: int = DEFAULT_TRUNCATION):
    """delta c/(2^s ||f_s|| (2+|a|)) (n-1)^(s+1)/n - ||g||/2."""
    a = _check_parabolic(a, s, delta)
    n = np.asarray(n, dtype=float)
    if np.any(n < 2):
        raise InvalidParameter("the bound is stated for n >= 2")
    c = lemma_constant(s, a)
    f_norm = h2_norm(binomial_series(s, N))
    return delta * c / (2**s * f_norm * (2 + abs(a))) * (n - 1) ** (s + 1) / n - g_norm / 2


def parabolic_certificate(a, s: float, delta: float, g_norm: float, L: int, N: int = DEFAULT_TRUNCATION) -> DivergenceCertificate:
    n = np.arange(2, L + 1)
    return DivergenceCertificate(
        n,
        parabolic_divergence_bound(a, s, delta, g_norm, n, N),
        s,
        {"delta": delta, "s": s, "a": complex(a), "c": lemma_constant(s, a),
         "f_norm": h2_norm(binomial_series(s, N)), "truncation": N, "g_norm": g_norm},
        orbit_values=parabolic_orbit_value_at_zero(a, s, delta, n, N),
    )


def shadowing_verdict(phi: MoebiusMap) -> bool:
    """True exactly for hyperbolic automorphisms and type I non-automorphisms."""
    cls = classify(phi)
    if cls.tag is SymbolTag.IDENTITY:
        raise IdentityMap("the identity map is excluded from the classification")
    return cls.tag in SHADOWING_CLASSES


def hinfty_counterexample(delta: float, L: int, phi: MoebiusMap, f_inf_norm: float = 0.0, N: int = 8):
    """Constant pseudo-orbit f_n = n delta/2, measured in the sup norm.

    Returns the orbit (residuals in the sup norm, all delta/2) and the bound
    n delta/2 - ||f||_inf for a candidate shadow of sup norm ``f_inf_norm``.
    """
    if delta <= 0:
        raise InvalidParameter("delta must be positive")
    T = comp_matrix(phi, N)
    n = np.arange(1, L + 1)
    states = np.zeros((L, N + 1), dtype=complex)
    states[:, 0] = n * delta / 2
    res = np.array([hp_norm(TaylorPoly(T.apply(states[k]) - states[k + 1]), math.inf, 64) for k in range(L - 1)])
    orbit = PseudoOrbit(states, delta, res)
    cert = DivergenceCertificate(n, n * delta / 2 - f_inf_norm, 1.0, {"delta": delta, "f_inf": f_inf_norm})
    return orbit, cert


def hinfty_onset(epsilon: float, delta: float, f_inf_norm: float) -> int:
    """Smallest n with n delta/2 - ||f||_inf > epsilon."""
    return int(math.floor(2 * (epsilon + f_inf_norm) / delta)) + 1


def orbit_csv(orbit: PseudoOrbit, alpha: complex, lower_bounds=None, values=None) -> str:
    """Columns n, residual, value_at_alpha_re, value_at_alpha_im, lower_bound.

    Row n describes state x_n; residual is ||T x_n - x_{n+1}|| (empty on the
    last row) and lower_bound the certificate value for index n, if given.
    """
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["n", "residual", "value_at_alpha_re", "value_at_alpha_im", "lower_bound"])
    if values is None:
        values = [evaluate(TaylorPoly(x), alpha) for x in orbit.states]
    lb = {} if lower_bounds is None else dict(lower_bounds)
    for k in range(orbit.length):
        n = k + 1
        res = repr(float(orbit.residuals[k])) if k < orbit.residuals.size else ""
        v = complex(values[k])
        bound = repr(float(lb[n])) if n in lb else ""
        w.writerow([n, res, repr(v.real), repr(v.imag), bound])
    return buf.getvalue()
