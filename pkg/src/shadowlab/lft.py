"""Linear fractional transformations of the extended plane.

A map z -> (az+b)/(cz+d) is stored as its 2x2 coefficient matrix scaled to
unit determinant, so composition is matrix multiplication and two maps are
equal when their matrices agree up to sign.  Self-maps of the unit disk are
classified by the location of their fixed points into the seven families
EA, HA, HNA_I, HNA_II, LOX, PA and PNA.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateCoefficients, IdentityMap, InvalidParameter, NotSelfMap, PoleEvaluation

INF = complex(math.inf, 0.0)

ON_CIRCLE_TOL = 1e-9
IDENTITY_TOL = 1e-12
PARABOLIC_TOL = 1e-9
SELF_MAP_SAMPLES = 64


def is_inf(z: complex) -> bool:
    return cmath.isinf(z)


class SymbolTag(str, enum.Enum):
    EA = "EA"
    HA = "HA"
    HNA_I = "HNA_I"
    HNA_II = "HNA_II"
    LOX = "LOX"
    PA = "PA"
    PNA = "PNA"
    IDENTITY = "Identity"


SHADOWING_CLASSES = frozenset({SymbolTag.HA, SymbolTag.HNA_I})


class MoebiusMap:
    """Normalized linear fractional transformation.

    The stored matrix always has determinant 1.  Instances are immutable and
    hashable only by identity; use ``==`` for the up-to-sign comparison.
    """

    __slots__ = ("_m",)

    def __init__(self, matrix):
        m = np.array(matrix, dtype=complex).reshape(2, 2)
        det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
        scale = np.max(np.abs(m))
        if scale == 0 or abs(det) <= 1e-14 * max(scale * scale, 1.0):
            raise DegenerateCoefficients(f"ad - bc = {det} is (numerically) zero")
        m = m / cmath.sqrt(det)
        m.setflags(write=False)
        self._m = m

    @property
    def matrix(self) -> np.ndarray:
        return self._m

    @property
    def a(self) -> complex:
        return complex(self._m[0, 0])

    @property
    def b(self) -> complex:
        return complex(self._m[0, 1])

    @property
    def c(self) -> complex:
        return complex(self._m[1, 0])

    @property
    def d(self) -> complex:
        return complex(self._m[1, 1])

    @property
    def trace(self) -> complex:
        return self.a + self.d

    def __call__(self, z):
        return evaluate(self, z)

    def __matmul__(self, other: "MoebiusMap") -> "MoebiusMap":
        return compose(self, other)

    def inverse(self) -> "MoebiusMap":
        a, b, c, d = self.a, self.b, self.c, self.d
        return MoebiusMap([[d, -b], [-c, a]])

    def is_identity(self, tol: float = IDENTITY_TOL) -> bool:
        eye = np.eye(2)
        return bool(np.max(np.abs(self._m - eye)) <= tol or np.max(np.abs(self._m + eye)) <= tol)

    def pole(self) -> complex:
        if self.c == 0:
            return INF
        return -self.d / self.c

    def __eq__(self, other):
        if not isinstance(other, MoebiusMap):
            return NotImplemented
        return bool(np.allclose(self._m, other._m, atol=1e-9, rtol=0)
                    or np.allclose(self._m, -other._m, atol=1e-9, rtol=0))

    __hash__ = None

    def __repr__(self):
        a, b, c, d = (f"{x:.6g}" for x in (self.a, self.b, self.c, self.d))
        return f"MoebiusMap(a={a}, b={b}, c={c}, d={d})"

    def to_json(self) -> dict:
        return {k: [getattr(self, k).real, getattr(self, k).imag] for k in "abcd"}

    @classmethod
    def from_json(cls, obj: dict) -> "MoebiusMap":
        return make_moebius(*(complex(*obj[k]) for k in "abcd"))


def make_moebius(a: complex, b: complex, c: complex, d: complex) -> MoebiusMap:
    return MoebiusMap([[a, b], [c, d]])


IDENTITY = make_moebius(1, 0, 0, 1)


def evaluate(phi: MoebiusMap, z):
    """Evaluate on the extended plane; the pole maps to ``INF`` and ``INF`` to a/c."""
    if isinstance(z, np.ndarray):
        return (phi.a * z + phi.b) / (phi.c * z + phi.d)
    z = complex(z)
    a, b, c, d = phi.a, phi.b, phi.c, phi.d
    if is_inf(z):
        return INF if c == 0 else a / c
    den = c * z + d
    if den == 0:
        return INF
    return (a * z + b) / den


def compose(phi: MoebiusMap, psi: MoebiusMap) -> MoebiusMap:
    """Return phi o psi."""
    return MoebiusMap(phi.matrix @ psi.matrix)


def iterate(phi: MoebiusMap, n: int) -> MoebiusMap:
    """n-fold composition by binary powering of the normalized matrix."""
    if n < 0:
        raise InvalidParameter("iterate count must be non-negative")
    result = np.eye(2, dtype=complex)
    base = phi.matrix.copy()
    while n:
        if n & 1:
            result = result @ base
        n >>= 1
        if n:
            base = base @ base
    return MoebiusMap(result)


def parabolic_canonical(a: complex) -> MoebiusMap:
    """z -> ((2-a)z + a)/(-az + 2 + a)."""
    return make_moebius(2 - a, a, -a, 2 + a)


def parabolic_iterate_closed_form(a: complex, n: int) -> MoebiusMap:
    """Closed form of the n-th iterate of the canonical parabolic map."""
    a = complex(a)
    if a.real < -1e-12:
        raise InvalidParameter("parabolic parameter needs Re(a) >= 0")
    if n < 1:
        raise InvalidParameter("n must be >= 1")
    na = n * a
    return make_moebius(2 - na, na, -na, 2 + na)


def derivative_at(phi: MoebiusMap, z: complex) -> complex:
    z = complex(z)
    den = phi.c * z + phi.d
    if den == 0:
        raise PoleEvaluation(f"{z} is the pole of {phi!r}")
    return 1.0 / (den * den)


# ---------------------------------------------------------------- Cayley

def cayley(z: complex) -> complex:
    """gamma(z) = (1+z)/(1-z), disk onto the right half-plane."""
    z = complex(z)
    if z == 1:
        raise PoleEvaluation("Cayley transform is singular at z = 1")
    return (1 + z) / (1 - z)


def cayley_inverse(w: complex) -> complex:
    w = complex(w)
    if w == -1:
        raise PoleEvaluation("inverse Cayley transform is singular at w = -1")
    return (w - 1) / (w + 1)


def cayley_pair(value: complex, direction: str = "forward") -> complex:
    if direction == "forward":
        return cayley(value)
    if direction == "inverse":
        return cayley_inverse(value)
    raise InvalidParameter(f"unknown direction {direction!r}")


CAYLEY = make_moebius(1, 1, -1, 1)
CAYLEY_INV = make_moebius(1, -1, 1, 1)


# ---------------------------------------------------------- fixed points

@dataclass(frozen=True)
class FixedPointSet:
    points: tuple
    multiplicity: int = 1

    def __iter__(self):
        return iter(self.points)

    def __len__(self):
        return len(self.points)

    def finite(self) -> list:
        return [p for p in self.points if not is_inf(p)]


def _on_circle(p: complex, tol: float = ON_CIRCLE_TOL) -> bool:
    return not is_inf(p) and abs(abs(p) - 1.0) <= tol


def fixed_points(phi: MoebiusMap) -> FixedPointSet:
    """Roots of c z^2 + (d-a) z - b = 0 on the extended plane."""
    if phi.is_identity():
        raise IdentityMap("the identity map fixes every point")
    a, b, c, d = phi.a, phi.b, phi.c, phi.d
    scale = max(abs(a), abs(b), abs(c), abs(d))
    B = d - a
    if abs(c) <= 1e-13 * scale:
        if abs(B) <= 1e-13 * scale:
            return FixedPointSet((INF,), multiplicity=2)
        return FixedPointSet((b / B, INF))
    tr = a + d
    if abs(tr * tr - 4) <= PARABOLIC_TOL * max(1.0, abs(tr) ** 2):
        return FixedPointSet(((a - d) / (2 * c),), multiplicity=2)
    root = cmath.sqrt(tr * tr - 4)  # discriminant since ad - bc = 1
    q = -(B + root) / 2 if abs(B + root) >= abs(B - root) else -(B - root) / 2
    return FixedPointSet((q / c, -b / q))


def is_automorphism(phi: MoebiusMap, tol: float = ON_CIRCLE_TOL) -> bool:
    """Three boundary points to the circle plus |phi(0)| < 1."""
    for z in (1, -1, 1j):
        w = evaluate(phi, z)
        if is_inf(w) or abs(abs(w) - 1) > tol:
            return False
    w0 = evaluate(phi, 0)
    return not is_inf(w0) and abs(w0) < 1


def check_self_map(phi: MoebiusMap, tol: float = ON_CIRCLE_TOL) -> None:
    pole = phi.pole()
    if not is_inf(pole) and abs(pole) <= 1 + tol:
        raise NotSelfMap(f"pole {pole} lies in the closed disk")
    theta = 2 * np.pi * np.arange(SELF_MAP_SAMPLES) / SELF_MAP_SAMPLES
    values = evaluate(phi, np.exp(1j * theta))
    if np.max(np.abs(values)) > 1 + tol:
        raise NotSelfMap(f"|phi| reaches {np.max(np.abs(values)):.6g} on the unit circle")
    if abs(evaluate(phi, 0)) >= 1:
        raise NotSelfMap("phi(0) lies outside the open disk")


# -------------------------------------------------------- classification

@dataclass(frozen=True)
class SymbolClass:
    tag: SymbolTag
    multiplier: complex | None
    fixed: FixedPointSet | None = None
    attracting: complex | None = None

    @property
    def shadowing(self) -> bool:
        return self.tag in SHADOWING_CLASSES


def classify(phi: MoebiusMap, tol: float = ON_CIRCLE_TOL) -> SymbolClass:
    check_self_map(phi, tol)
    if phi.is_identity():
        return SymbolClass(SymbolTag.IDENTITY, None)
    fps = fixed_points(phi)
    on_circle = [p for p in fps if _on_circle(p, tol)]
    auto = is_automorphism(phi, tol)

    if fps.multiplicity == 2:
        tag = SymbolTag.PA if auto else SymbolTag.PNA
    elif len(on_circle) == 2:
        tag = SymbolTag.HA
    elif len(on_circle) == 1:
        other = next(p for p in fps if p is not on_circle[0])
        tag = SymbolTag.HNA_I if is_inf(other) or abs(other) > 1 + tol else SymbolTag.HNA_II
    else:
        tag = SymbolTag.EA if auto else SymbolTag.LOX

    candidates = [p for p in fps.finite() if abs(p) <= 1 + tol]
    alpha = min(candidates, key=lambda p: abs(derivative_at(phi, p)))
    return SymbolClass(tag, derivative_at(phi, alpha), fps, alpha)


# ------------------------------------------------------- canonical forms

def disk_automorphism(w: complex, theta: float = 0.0) -> MoebiusMap:
    """z -> e^{i theta} (z - w)/(1 - conj(w) z) for |w| < 1."""
    w = complex(w)
    if abs(w) >= 1:
        raise InvalidParameter("automorphism center must lie in the open disk")
    u = cmath.exp(1j * theta)
    return make_moebius(u, -u * w, -w.conjugate(), 1)


def _rotate_to_one(sigma: MoebiusMap, p: complex) -> MoebiusMap:
    q = evaluate(sigma, p)
    return compose(make_moebius(1 / (q / abs(q)), 0, 0, 1), sigma)


def _sending_to_infinity(q: complex) -> MoebiusMap:
    if is_inf(q):
        return IDENTITY
    return disk_automorphism(1 / complex(q).conjugate())


def table1_map(tag: SymbolTag | str, **params) -> MoebiusMap:
    """Canonical representative of a family with the given parameters."""
    tag = SymbolTag(tag)
    if tag is SymbolTag.EA:
        return make_moebius(params["omega"], 0, 0, 1)
    if tag is SymbolTag.HA:
        r = params["r"]
        return make_moebius(1, r, r, 1)
    if tag is SymbolTag.HNA_I:
        r = params["r"]
        return make_moebius(r, 1 - r, 0, 1)
    if tag is SymbolTag.HNA_II:
        r = params["r"]
        return make_moebius(r, 0, -(1 - r), 1)
    if tag is SymbolTag.LOX:
        a, c = params["a"], params["c"]
        return make_moebius(a, c - a * c, 0, 1)
    if tag in (SymbolTag.PA, SymbolTag.PNA):
        return parabolic_canonical(params["a"])
    raise InvalidParameter(f"no canonical form for {tag}")


@dataclass(frozen=True)
class CanonicalForm:
    tag: SymbolTag
    canonical: MoebiusMap
    conjugator: MoebiusMap
    params: dict = field(default_factory=dict)


def _real(x: complex, what: str) -> float:
    if abs(x.imag) > 1e-9 * max(1.0, abs(x)):
        raise InvalidParameter(f"{what} should be real, got {x}")
    return x.real


def canonical_form(phi: MoebiusMap, tol: float = ON_CIRCLE_TOL) -> CanonicalForm:
    """Conjugate phi by a disk automorphism into its table shape.

    The conjugator sigma satisfies canonical = sigma o phi o sigma^{-1} and
    places the fixed points at 1, -1 (HA), 1, inf (HNA_I), 0, 1 (HNA_II),
    1 (parabolic) or sends the exterior fixed point to inf (EA, LOX).
    """
    cls = classify(phi, tol)
    tag = cls.tag
    if tag is SymbolTag.IDENTITY:
        raise IdentityMap("the identity has no canonical form")
    alpha = cls.attracting
    others = [p for p in cls.fixed if p is not alpha]
    other = others[0] if others else None

    if tag is SymbolTag.HA:
        rot = make_moebius(1 / alpha, 0, 0, 1)
        y = cayley(evaluate(rot, other)).imag
        shift = compose(CAYLEY_INV, compose(make_moebius(1, -1j * y, 0, 1), CAYLEY))
        sigma = compose(shift, rot)
    elif tag is SymbolTag.HNA_I:
        sigma = _rotate_to_one(_sending_to_infinity(other), alpha)
    elif tag is SymbolTag.HNA_II:
        sigma = _rotate_to_one(disk_automorphism(alpha), other)
    elif tag in (SymbolTag.PA, SymbolTag.PNA):
        sigma = make_moebius(1 / alpha, 0, 0, 1)
    else:
        sigma = _sending_to_infinity(other)

    canon = compose(sigma, compose(phi, sigma.inverse()))

    if tag is SymbolTag.HA:
        params = {"r": _real(evaluate(canon, 0), "r")}
    elif tag is SymbolTag.HNA_I:
        params = {"r": _real(1 - evaluate(canon, 0), "r")}
    elif tag is SymbolTag.HNA_II:
        params = {"r": _real(derivative_at(canon, 0), "r")}
    elif tag in (SymbolTag.PA, SymbolTag.PNA):
        params = {"a": cayley(evaluate(canon, 0)) - 1}
    elif tag is SymbolTag.EA:
        params = {"omega": derivative_at(canon, 0)}
    else:
        c = evaluate(sigma, alpha)
        params = {"a": derivative_at(canon, c), "c": c}
    return CanonicalForm(tag, canon, sigma, params)
