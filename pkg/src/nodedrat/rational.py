"""Rational maps of the sphere, Moebius transformations, fixed points,
holomorphic fixed-point indices and principal parts of 1/(z - F(z))."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .errors import (
    CollisionError,
    DegenerateIndexError,
    IdentityMapError,
    IndexFormulaError,
    InvalidTripleError,
    LevelExceededError,
    NotFixedError,
    TooFewPointsError,
)
from .poly import Poly, gcd
from .roots import numeric_roots, exact_roots, polish_multiple
from .scalars import (
    DEFAULT_PREC,
    INF,
    coerce,
    field_prec,
    is_zero,
    magnitude,
    numeric,
    tolerance,
)


# --- Moebius transformations ----------------------------------------------

@dataclass(frozen=True)
class Mobius:
    """z -> (a z + b) / (c z + d)."""

    a: object
    b: object
    c: object
    d: object

    def __post_init__(self):
        vals = coerce((self.a, self.b, self.c, self.d))
        for name, v in zip("abcd", vals):
            object.__setattr__(self, name, v)
        if is_zero(self.a * self.d - self.b * self.c):
            raise InvalidTripleError("Moebius map with ad - bc = 0")

    @classmethod
    def identity(cls) -> "Mobius":
        return cls(1, 0, 0, 1)

    @property
    def prec(self) -> int | None:
        return field_prec((self.a, self.b, self.c, self.d))

    def __call__(self, z):
        if z is INF:
            return INF if is_zero(self.c) else self.a / self.c
        a, b, c, d, z = coerce((self.a, self.b, self.c, self.d, z))
        den = c * z + d
        if is_zero(den):
            return INF
        return (a * z + b) / den

    def inverse(self) -> "Mobius":
        return Mobius(self.d, -self.b, -self.c, self.a)

    def compose(self, other: "Mobius") -> "Mobius":
        """self o other."""
        a, b, c, d, e, f, g, h = coerce((self.a, self.b, self.c, self.d,
                                         other.a, other.b, other.c, other.d))
        return Mobius(a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h)

    def normalized(self) -> "Mobius":
        """Scale so the first nonzero of (c, d) is 1."""
        s = self.c if not is_zero(self.c) else self.d
        return Mobius(self.a / s, self.b / s, self.c / s, self.d / s)

    def is_identity(self, tol: float = 0.0) -> bool:
        m = self.normalized()
        return (magnitude(m.a - m.d) <= tol and magnitude(m.b) <= tol and magnitude(m.c) <= tol)


def _same_point(x, y) -> bool:
    if x is INF or y is INF:
        return x is y
    x, y = coerce((x, y))
    return is_zero(x - y)


def mobius_from_triple(a, b, c) -> Mobius:
    """The Moebius map sending a, b, c to 0, 1, INF."""
    if _same_point(a, b) or _same_point(b, c) or _same_point(a, c):
        raise InvalidTripleError(f"triple points must be distinct: {a!r}, {b!r}, {c!r}")
    a, b, c = coerce((a, b, c))
    if a is INF:
        return Mobius(0, b - c, 1, -c)
    if b is INF:
        return Mobius(1, -a, 1, -c)
    if c is INF:
        return Mobius(1, -a, 0, b - a)
    return Mobius(b - c, -a * (b - c), b - a, -c * (b - a))


# --- rational maps -----------------------------------------------------------

@dataclass(frozen=True)
class RationalMap:
    """F = num / den, kept in reduced form."""

    num: Poly
    den: Poly

    def __post_init__(self):
        if self.den.is_zero():
            raise ValueError("denominator is identically zero")

    @classmethod
    def make(cls, num, den=(1,), reduce: bool = True, prec: int | None = None) -> "RationalMap":
        num = num if isinstance(num, Poly) else Poly(num)
        den = den if isinstance(den, Poly) else Poly(den)
        if prec is not None:
            num, den = num.to_numeric(prec), den.to_numeric(prec)
        num, den = num._unify(den)
        if den.is_zero():
            raise ValueError("denominator is identically zero")
        F = cls(num, den)
        return F.reduced() if reduce else F

    @property
    def degree(self) -> int:
        return max(self.num.degree, self.den.degree, 0)

    @property
    def exact(self) -> bool:
        return self.num.exact and self.den.exact

    @property
    def prec(self) -> int | None:
        p = self.num.prec
        return p if p is not None else self.den.prec

    def working_prec(self) -> int:
        return self.prec or DEFAULT_PREC

    def to_numeric(self, prec: int = DEFAULT_PREC) -> "RationalMap":
        return RationalMap(self.num.to_numeric(prec), self.den.to_numeric(prec))

    def __call__(self, z):
        if z is INF:
            dn, dd = self.num.degree, self.den.degree
            if dn > dd:
                return INF
            if dn < dd:
                return 0 * self.den.lead
            return self.num.lead / self.den.lead
        q = self.den(z)
        if is_zero(q):
            return INF
        return self.num(z) / q

    def fixed_polynomial(self) -> Poly:
        """N = num - z * den, whose roots are the finite fixed points."""
        N = self.num - self.den * self.den.z_like()
        if not self.exact and not N.is_zero():
            scale = max(self.num.norm(), self.den.norm())
            N = _trim_relative(N, tolerance(self.working_prec(), 0.75) * scale)
        return N

    def is_identity(self) -> bool:
        N = self.num - self.den * self.den.z_like()
        if self.exact:
            return N.is_zero()
        scale = max(self.num.norm(), self.den.norm())
        return N.norm() <= tolerance(self.working_prec(), 0.5) * scale

    def reduced(self) -> "RationalMap":
        """Cancel common factors: exactly by gcd, numerically by removing
        near-common roots (within 2**(-prec/3))."""
        num, den = self.num, self.den
        if num.is_zero():
            return RationalMap(num, Poly.raw((den.lead / den.lead,)))
        if self.exact:
            g = gcd(num, den)
            if g.degree >= 1:
                num, den = num // g, den // g
        else:
            prec = self.working_prec()
            scale = max(num.norm(), den.norm())
            num = _trim_relative(num, tolerance(prec, 0.75) * scale)
            den = _trim_relative(den, tolerance(prec, 0.75) * scale)
            if num.degree >= 1 and den.degree >= 1:
                num, den = _cancel_near_common(num, den, prec)
        return RationalMap(num, den).normalized()

    def normalized(self) -> "RationalMap":
        """Scale so the leading coefficient of the higher-degree part is 1
        (the denominator's on ties)."""
        lead = self.den.lead if self.den.degree >= self.num.degree else self.num.lead
        inv = 1 / lead
        return RationalMap(self.num * inv, self.den * inv)

    def derivative_at(self, z):
        P, Q = self.num, self.den
        q = Q(z)
        return (P.deriv()(z) * q - P(z) * Q.deriv()(z)) / (q * q)

    def __repr__(self):
        return f"RationalMap(num={list(self.num.coeffs)!r}, den={list(self.den.coeffs)!r})"


def _trim_relative(p: Poly, abs_tol: float) -> Poly:
    c = list(p.coeffs)
    while c and magnitude(c[-1]) <= abs_tol:
        c.pop()
    return Poly.raw(c)


def _cancel_near_common(num: Poly, den: Poly, prec: int):
    tol = tolerance(prec, 1 / 3)
    rn = numeric_roots(num, prec)
    rd = numeric_roots(den, prec)
    for zn, mn in rn:
        for i, (zd, md) in enumerate(rd):
            if magnitude(zn - zd) <= tol * (1 + magnitude(zd)):
                k = min(mn, md)
                r = (zn + zd) / 2
                lin = Poly.raw((-r, r * 0 + 1))
                for _ in range(k):
                    num = num // lin
                    den = den // lin
                rd[i] = (zd, md - k)
                break
    return num, den


# --- conjugation ---------------------------------------------------------

def mobius_conjugate(F: RationalMap, T: Mobius) -> RationalMap:
    """T o F o T^-1, of the same degree as F."""
    prec = field_prec([c for c in F.num.coeffs + F.den.coeffs] + [T.a, T.b, T.c, T.d])
    a, b, c, d = coerce((T.a, T.b, T.c, T.d), prec)
    P, Q = F.num, F.den
    if prec is not None:
        P, Q = P.to_numeric(prec), Q.to_numeric(prec)
    D = F.degree
    num_lin = Poly.raw((-b, d))     # T^-1(w) = (d w - b) / (-c w + a)
    den_lin = Poly.raw((a, -c))
    Pt = P.homogeneous_substitute(num_lin, den_lin, D)
    Qt = Q.homogeneous_substitute(num_lin, den_lin, D)
    G = RationalMap.make(Pt * a + Qt * b, Pt * c + Qt * d, reduce=False)
    if not G.exact:
        scale = max(G.num.norm(), G.den.norm())
        abs_tol = tolerance(G.working_prec(), 0.75) * scale
        G = RationalMap(_trim_relative(G.num, abs_tol), _trim_relative(G.den, abs_tol))
    return G.normalized()


# --- fixed-point data --------------------------------------------------------

@dataclass(frozen=True)
class FixedPointData:
    """Ordered (point, index) pairs; all points finite and simple."""

    entries: tuple

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple((p, lam) for p, lam in self.entries))

    @property
    def points(self) -> list:
        return [p for p, _ in self.entries]

    @property
    def indices(self) -> list:
        return [lam for _, lam in self.entries]

    @property
    def degree(self) -> int:
        return len(self.entries) - 1

    def __len__(self):
        return len(self.entries)

    def index_sum(self):
        return sum(coerce(self.indices), 0 * coerce(self.indices)[0])

    def validate(self, tol: float | None = None) -> None:
        pts = self.points
        lams = self.indices
        if len(pts) < 3:
            raise TooFewPointsError(f"need at least 3 fixed points (degree >= 2), got {len(pts)}")
        if any(p is INF for p in pts):
            raise CollisionError("fixed-point data must use finite points")
        vals = coerce(pts + lams)
        pts, lams = vals[:len(pts)], vals[len(pts):]
        prec = field_prec(vals)
        for i in range(len(pts)):
            for j in range(i + 1, len(pts)):
                if is_zero(pts[i] - pts[j]):
                    raise CollisionError(f"points {i} and {j} coincide")
        for i, lam in enumerate(lams):
            if is_zero(lam):
                raise DegenerateIndexError(f"index {i} is zero")
        total = sum(lams[1:], lams[0])
        if prec is None:
            ok = is_zero(total - 1)
        else:
            if tol is None:
                tol = tolerance(prec, 0.5) * max(1.0, sum(magnitude(x) for x in lams))
            ok = magnitude(total - 1) <= tol
        if not ok:
            raise IndexFormulaError(f"indices sum to {total}, not 1")


def from_fixed_point_data(data, prec: int | None = None, tol: float | None = None) -> RationalMap:
    """The degree-d map with simple fixed points p_r of index lambda_r:
    1/(z - F(z)) = sum_r lambda_r / (z - p_r)."""
    if not isinstance(data, FixedPointData):
        data = FixedPointData(tuple(data))
    data.validate(tol)
    n = len(data)
    vals = coerce(data.points + data.indices, prec)
    pts, lams = vals[:n], vals[n:]
    lins = [Poly.raw((-p, p * 0 + 1)) for p in pts]
    Pi = Poly.from_roots(pts)
    S = Poly.raw(())
    for r in range(n):
        term = Poly.raw((lams[r],))
        for q in range(n):
            if q != r:
                term = term * lins[q]
        S = S + term
    num = S * S.z_like() - Pi
    # z*S and Pi are both monic of degree d+1 once the indices sum to 1; drop
    # the (numerically tiny) leftover so the degree is exactly d.
    num = Poly.raw(num.coeffs[:n])
    return RationalMap(num, S).normalized()


# --- fixed points and indices ---------------------------------------------

def fixed_points(F: RationalMap, prec: int | None = None) -> list[tuple[object, int]]:
    """Fixed points with multiplicities, summing to d + 1 (INF included)."""
    if F.is_identity():
        raise IdentityMapError("the identity map has no isolated fixed points")
    N = F.fixed_polynomial()
    prec = prec or F.working_prec()
    if F.exact:
        pts = exact_roots(N, prec)
    else:
        pts = numeric_roots(N, prec)
    m_inf = F.degree + 1 - N.degree
    if m_inf > 0:
        pts.append((INF, m_inf))
    return pts


def _series_quotient(A: Sequence, B: Sequence, n: int) -> list:
    """First n coefficients of the power series A/B (B[0] != 0)."""
    zero = B[0] * 0
    out = []
    inv = 1 / B[0]
    for k in range(n):
        acc = A[k] if k < len(A) else zero
        for i in range(1, min(k, len(B) - 1) + 1):
            acc = acc - B[i] * out[k - i]
        out.append(acc * inv)
    return out


def _local_expansion(F: RationalMap, p, multiplicity: int | None = None, tol: float | None = None):
    """Return (m, coeffs) where 1/(z - F(z)) = sum_{l=1}^m c_l (z-p)^-l + O(1)
    at the finite point p, with coeffs = (c_1, ..., c_m).  m = 0 means p is
    not fixed."""
    N = F.fixed_polynomial()
    Q = F.den
    if F.exact and getattr(p, "context", None) is None and not isinstance(p, (float, complex)):
        p = coerce([p])[0]
        Nt = N.shift(p)
        c = Nt.coeffs
        m = 0
        while m < len(c) and is_zero(c[m]):
            m += 1
        if m == 0:
            return 0, ()
        Qt = Q.shift(p).coeffs
        U = _series_quotient(Qt, c[m:], m)
        return m, tuple(-U[m - l] for l in range(1, m + 1))

    prec = F.working_prec()
    p = numeric(p, prec)
    Nn, Qn = N.to_numeric(prec), Q.to_numeric(prec)
    scale = max(Nn.norm(), Qn.norm()) * (1 + magnitude(p)) ** max(Nn.degree, 1)
    if tol is None:
        tol = tolerance(prec, 0.25)
    c = Nn.shift(p).coeffs
    if multiplicity is None:
        # Count roots in a small disc: the first j whose term dominates.
        rho = tol * (1 + magnitude(p))
        m = 0
        for j in range(len(c)):
            lead = magnitude(c[j]) * rho ** j
            rest = sum(magnitude(c[i]) * rho ** i for i in range(len(c)) if i != j)
            if lead > rest:
                m = j
                break
        if m == 0 and magnitude(c[0]) > tol * scale:
            return 0, ()
        if m == 0:
            # Tiny value but no dominant term: fall back to the first
            # non-negligible coefficient.
            m = next((j for j in range(len(c)) if magnitude(c[j]) > tol * scale), 1)
    else:
        m = multiplicity
    if m >= 1:
        p = polish_multiple(Nn, p, m, prec) if m > 1 else _newton(Nn, p, prec)
        c = list(Nn.shift(p).coeffs)
    Qt = Qn.shift(p).coeffs
    U = _series_quotient(Qt, c[m:], m)
    return m, tuple(-U[m - l] for l in range(1, m + 1))


def _newton(N: Poly, z, prec: int, steps: int = 6):
    dN = N.deriv()
    for _ in range(steps):
        d = dN(z)
        if d == 0:
            break
        step = N(z) / d
        z = z - step
        if abs(step) <= 2.0 ** (-prec + 4) * (1 + abs(z)):
            break
    return z


def _infinity_chart(F: RationalMap) -> tuple[RationalMap, Mobius]:
    """Conjugate by z -> 1/(z - s) for a non-fixed s, sending INF to 0."""
    N = F.fixed_polynomial()
    scale = max(N.norm(), 1.0)
    for s in (0, 1, -1, 2, -2, 3, -3, (0, 1), (0, -1), (1, 1)):
        s = coerce([s, *F.den.coeffs])[0]
        if magnitude(N(s)) > 1e-6 * scale:
            T = Mobius(0, 1, 1, -s)
            return mobius_conjugate(F, T), T
    raise NotFixedError("could not find a non-fixed chart point")


def dynamical_index(F: RationalMap, p, tol: float | None = None):
    """Residue of 1/(z - F(z)) at the fixed point p."""
    if F.is_identity():
        raise IdentityMapError("the identity map has no isolated fixed points")
    if p is INF:
        G, _ = _infinity_chart(F)
        return dynamical_index(G, 0 * G.den.lead, tol)
    m, coeffs = _local_expansion(F, p, tol=tol)
    if m == 0:
        raise NotFixedError(f"{p!r} is not a fixed point")
    return coeffs[0]


def residue(F: RationalMap, p, tol: float | None = None):
    """Residue of 1/(z - F(z)) at any point (0 where p is not fixed)."""
    if p is INF:
        G, _ = _infinity_chart(F)
        return residue(G, 0 * G.den.lead, tol)
    m, coeffs = _local_expansion(F, p, tol=tol)
    return coeffs[0] if m else 0 * F.den.lead


@dataclass(frozen=True)
class PrincipalPart:
    base_point: object
    coeffs: tuple
    multiplicity: int

    @property
    def level(self) -> int:
        return len(self.coeffs)

    @property
    def truncated(self) -> bool:
        return self.multiplicity < self.level


def principal_part(F: RationalMap, p, u, v, L: int, tol: float | None = None) -> PrincipalPart:
    """(c_1, ..., c_L) of 1/(z - G(z)) at 0 for G = T F T^-1, T = (p, u, v) -> (0, 1, INF)."""
    if L < 1:
        raise LevelExceededError("level must be at least 1")
    T = mobius_from_triple(p, u, v)
    G = mobius_conjugate(F, T)
    if G.is_identity():
        raise IdentityMapError("the identity map has no principal parts")
    m, coeffs = _local_expansion(G, 0 * G.den.lead, tol=tol)
    if m == 0:
        raise NotFixedError(f"{p!r} is not a fixed point")
    if m > L:
        raise LevelExceededError(f"fixed point multiplicity {m} exceeds level {L}")
    zero = coeffs[0] * 0
    return PrincipalPart(p, tuple(coeffs) + (zero,) * (L - m), m)


# --- polynomial-like classification ----------------------------------------

POLYNOMIAL = "polynomial-conjugate"
CONSTANT = "constant"
NEITHER = "neither"


def is_polynomial_like(F: RationalMap, tol: float | None = None) -> tuple[str, Mobius | None]:
    """Classify F as conjugate to a polynomial (witness sends the totally
    invariant point to INF), a constant, or neither."""
    if F.degree == 0:
        return CONSTANT, Mobius.identity()
    if F.is_identity():
        return POLYNOMIAL, Mobius.identity()
    d = F.degree
    if tol is None:
        tol = 0.0 if F.exact else tolerance(F.working_prec(), 0.25)
    for q, _ in fixed_points(F):
        if q is INF:
            if F.den.degree == 0 and F.num.degree == d:
                return POLYNOMIAL, Mobius.identity()
            continue
        R = F.num - F.den * q
        if R.degree != d:
            continue
        target = Poly.from_roots([q] * d) * R.lead
        diff = R - target
        if diff.is_zero() or diff.norm() <= tol * max(R.norm(), 1.0):
            return POLYNOMIAL, Mobius(0, 1, 1, -q)
    return NEITHER, None


def from_principal_parts(parts, prec: int | None = None, reduce: bool = True,
                         infinity: bool = False) -> RationalMap:
    """The map with 1/(z - F(z)) = sum_p sum_l c_l / (z - p)**l.

    ``parts`` is a sequence of (point, (c_1, ..., c_L)).  Normally the c_1
    sum to 1; with ``infinity`` the remainder 1 - sum c_1 (non-zero) becomes
    the index of a simple fixed point at INF.
    """
    parts = [(p, tuple(cs)) for p, cs in parts]
    flat = coerce([p for p, _ in parts] + [c for _, cs in parts for c in cs], prec)
    pts = flat[:len(parts)]
    rest = flat[len(parts):]
    coeffs = []
    for _, cs in parts:
        coeffs.append(rest[:len(cs)])
        rest = rest[len(cs):]
    lins = [Poly.raw((-p, p * 0 + 1)) for p in pts]
    Pi = Poly.raw((pts[0] * 0 + 1,))
    for lin, cs in zip(lins, coeffs):
        Pi = Pi * lin ** len(cs)
    S = Poly.raw(())
    for i, cs in enumerate(coeffs):
        others = Poly.raw((pts[0] * 0 + 1,))
        for j, (lin, cj) in enumerate(zip(lins, coeffs)):
            if j != i:
                others = others * lin ** len(cj)
        L = len(cs)
        for l, c in enumerate(cs, start=1):
            if is_zero(c):
                continue
            S = S + others * lins[i] ** (L - l) * c
    num = S * S.z_like() - Pi
    if not infinity:
        # With the c_1 summing to 1 the top coefficients of z*S and Pi cancel.
        num = Poly.raw(num.coeffs[:Pi.degree])
    F = RationalMap(num, S)
    return F.reduced() if reduce else F.normalized()
