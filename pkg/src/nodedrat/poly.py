"""Dense univariate polynomials over exact Gaussian rationals or mpmath complex
numbers, coefficients stored lowest degree first."""

from __future__ import annotations

from fractions import Fraction
from numbers import Number

from .scalars import (
    DEFAULT_PREC,
    GaussianRational,
    exact,
    is_zero,
    magnitude,
    numeric,
)


def _coerce(values) -> tuple:
    values = list(values)
    ctx = None
    for v in values:
        c = getattr(v, "context", None)
        if c is not None and (ctx is None or c.prec > ctx.prec):
            ctx = c
    if ctx is not None:
        return tuple(v if getattr(v, "context", None) is ctx else numeric(v, ctx.prec)
                     for v in values)
    if any(isinstance(v, (float, complex)) for v in values):
        return tuple(numeric(v, DEFAULT_PREC) for v in values)
    return tuple(exact(v) for v in values)


class Poly:
    """Immutable polynomial; ``coeffs[i]`` multiplies ``z**i``."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs=(), *, _raw: bool = False):
        c = tuple(coeffs) if _raw else _coerce(coeffs)
        n = len(c)
        while n and is_zero(c[n - 1]):
            n -= 1
        object.__setattr__(self, "coeffs", c[:n])

    def __setattr__(self, name, value):
        raise AttributeError("Poly is immutable")

    # -- construction ----------------------------------------------------
    @classmethod
    def raw(cls, coeffs) -> "Poly":
        return cls(coeffs, _raw=True)

    @classmethod
    def constant(cls, c) -> "Poly":
        return cls((c,))

    @classmethod
    def from_roots(cls, roots, lead=None) -> "Poly":
        roots = list(_coerce(roots))
        if lead is not None:
            lead = _coerce([lead] + roots[:1])[0]
        one = _one_like(roots[0] if roots else lead)
        p = cls.raw((one if lead is None else lead,))
        for r in roots:
            p = p * cls.raw((-r, one))
        return p

    def z_like(self) -> "Poly":
        """The polynomial ``z`` in this polynomial's field."""
        one = _one_like(self.coeffs[0] if self.coeffs else 1)
        return Poly.raw((one * 0, one))

    # -- basic properties ------------------------------------------------
    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def lead(self):
        return self.coeffs[-1]

    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def exact(self) -> bool:
        return all(isinstance(c, GaussianRational) for c in self.coeffs)

    @property
    def prec(self) -> int | None:
        for c in self.coeffs:
            ctx = getattr(c, "context", None)
            if ctx is not None:
                return ctx.prec
        return None

    def coeff(self, i: int):
        return self.coeffs[i] if 0 <= i < len(self.coeffs) else 0

    def norm(self) -> float:
        return max((magnitude(c) for c in self.coeffs), default=0.0)

    # -- arithmetic ------------------------------------------------------
    def __neg__(self) -> "Poly":
        return Poly.raw(tuple(-c for c in self.coeffs))

    def _unify(self, other) -> tuple["Poly", "Poly"]:
        if not isinstance(other, Poly):
            other = Poly.raw(()) if _is_plain_zero(other) else Poly((other,))
        pa, pb = self.prec, other.prec
        if pa == pb:
            return self, other
        if pa is None and (pb is not None and (self.exact or self.is_zero())):
            return self.to_numeric(pb), other
        if pb is None and other.exact:
            return self, other.to_numeric(pa)
        target = max(p for p in (pa, pb) if p is not None)
        return self.to_numeric(target), other.to_numeric(target)

    def _match(self, s) -> tuple["Poly", object]:
        """Bring a scalar and this polynomial into a common field."""
        p = self.prec
        sctx = getattr(s, "context", None)
        if p is None:
            if isinstance(s, (GaussianRational, int, Fraction)):
                return self, exact(s)
            prec = sctx.prec if sctx is not None else DEFAULT_PREC
            return self.to_numeric(prec), numeric(s, prec)
        if sctx is not None and sctx.prec == p:
            return self, s
        return self, numeric(s, p)

    def __add__(self, other) -> "Poly":
        self, other = self._unify(other)
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        return Poly.raw(tuple(a[i] + b[i] if i < len(b) else a[i] for i in range(len(a))))

    __radd__ = __add__

    def __sub__(self, other) -> "Poly":
        self, other = self._unify(other)
        return self + (-other)

    def __rsub__(self, other) -> "Poly":
        return (-self) + other

    def __mul__(self, other) -> "Poly":
        if not isinstance(other, Poly):
            self, s = self._match(other)
            return Poly.raw(tuple(c * s for c in self.coeffs))
        self, other = self._unify(other)
        a, b = self.coeffs, other.coeffs
        if not a or not b:
            return Poly.raw(())
        out = [a[0] * 0] * (len(a) + len(b) - 1)
        for i, x in enumerate(a):
            if is_zero(x):
                continue
            for j, y in enumerate(b):
                out[i + j] = out[i + j] + x * y
        return Poly.raw(out)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "Poly":
        if n < 0:
            raise ValueError("negative power of a polynomial")
        result = Poly.raw((_one_like(self.coeffs[0] if self.coeffs else 1),))
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __divmod__(self, other: "Poly"):
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        self, other = self._unify(other)
        rem = list(self.coeffs)
        db = other.degree
        inv_lead = 1 / other.lead
        if len(rem) <= db:
            return Poly.raw(()), self
        quo = [None] * (len(rem) - db)
        for i in range(len(rem) - 1, db - 1, -1):
            q = rem[i] * inv_lead
            quo[i - db] = q
            if is_zero(q):
                continue
            for j in range(db + 1):
                rem[i - db + j] = rem[i - db + j] - q * other.coeffs[j]
        # The leading slots are zero by construction; drop them explicitly so
        # numeric round-off does not leave junk behind.
        return Poly.raw(quo), Poly.raw(rem[:db])

    def __floordiv__(self, other: "Poly") -> "Poly":
        return divmod(self, other)[0]

    def __mod__(self, other: "Poly") -> "Poly":
        return divmod(self, other)[1]

    def __eq__(self, other) -> bool:
        if not isinstance(other, Poly):
            return NotImplemented
        return len(self.coeffs) == len(other.coeffs) and all(
            is_zero(a - b) for a, b in zip(self.coeffs, other.coeffs))

    def __hash__(self):
        return hash(tuple(str(c) for c in self.coeffs))

    def __call__(self, x):
        self, x = self._match(x)
        acc = 0 * x
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def __repr__(self):
        return f"Poly({list(self.coeffs)!r})"

    # -- calculus and changes of variable --------------------------------
    def deriv(self) -> "Poly":
        return Poly.raw(tuple(c * i for i, c in enumerate(self.coeffs) if i))

    def shift(self, a) -> "Poly":
        """Coefficients of ``t -> p(a + t)`` (Taylor shift)."""
        self, a = self._match(a)
        c = list(self.coeffs)
        n = len(c)
        for i in range(n):
            for j in range(n - 2, i - 1, -1):
                c[j] = c[j] + a * c[j + 1]
        return Poly.raw(c)

    def homogeneous_substitute(self, num: "Poly", den: "Poly", degree: int) -> "Poly":
        """``den**degree * p(num/den)`` for linear ``num``, ``den``."""
        one = _one_like(self.coeffs[0] if self.coeffs else 1)
        pn = [Poly.raw((one,))]
        pd = [Poly.raw((one,))]
        for _ in range(degree):
            pn.append(pn[-1] * num)
            pd.append(pd[-1] * den)
        out = Poly.raw(())
        for i, c in enumerate(self.coeffs):
            if is_zero(c):
                continue
            out = out + (pn[i] * pd[degree - i]) * c
        return out

    # -- normalisation ---------------------------------------------------
    def monic(self) -> "Poly":
        if self.is_zero():
            return self
        inv = 1 / self.lead
        return Poly.raw(tuple(c * inv for c in self.coeffs[:-1]) + (_one_like(self.lead),))

    def trimmed(self, rel_tol: float) -> "Poly":
        """Drop leading coefficients below ``rel_tol`` times the largest one."""
        if self.is_zero():
            return self
        scale = self.norm()
        c = list(self.coeffs)
        while c and magnitude(c[-1]) <= rel_tol * scale:
            c.pop()
        return Poly.raw(c)

    def to_numeric(self, prec: int = DEFAULT_PREC) -> "Poly":
        return Poly.raw(tuple(numeric(c, prec) for c in self.coeffs))


def _is_plain_zero(x) -> bool:
    return isinstance(x, Number) and x == 0


def _one_like(c):
    if isinstance(c, GaussianRational) or isinstance(c, (int, Fraction)) or c is None:
        return exact(1)
    ctx = getattr(c, "context", None)
    if ctx is not None:
        return ctx.mpc(1)
    return numeric(1)


def gcd(a: Poly, b: Poly) -> Poly:
    """Monic gcd by the Euclidean algorithm (exact coefficients only)."""
    if not (a.exact or a.is_zero()) or not (b.exact or b.is_zero()):
        raise TypeError("polynomial gcd requires exact coefficients")
    while not b.is_zero():
        a, b = b, a % b
    return a.monic() if not a.is_zero() else a


def squarefree_decomposition(p: Poly) -> list[tuple[Poly, int]]:
    """Yun's algorithm: ``p = lead * prod f_i**i`` with squarefree, coprime f_i."""
    if p.degree < 1:
        return []
    out = []
    dp = p.deriv()
    a = gcd(p, dp)
    b = p // a
    c = dp // a
    d = c - b.deriv()
    i = 1
    while b.degree >= 1:
        a = gcd(b, d)
        b, c = b // a, d // a
        if a.degree >= 1:
            out.append((a, i))
        i += 1
        d = c - b.deriv()
    return out
