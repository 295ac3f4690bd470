"""Scalars on the Riemann sphere: exact Gaussian rationals, mpmath complex
numbers at a chosen precision, and the point at infinity."""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache
from numbers import Number

import mpmath
from sympy.polys.domains import QQ_I

DEFAULT_PREC = 256

GaussianRational = type(QQ_I(0, 0))


class _Infinity:
    """The point at infinity of the Riemann sphere (a singleton)."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INF"

    def __reduce__(self):
        return (_Infinity, ())


INF = _Infinity()


def is_inf(x) -> bool:
    return x is INF


@lru_cache(maxsize=None)
def context(prec: int = DEFAULT_PREC) -> mpmath.ctx_mp.MPContext:
    # One context per precision; never mutated after creation so it is safe
    # to share between threads.
    if prec < 53:
        raise ValueError(f"precision must be at least 53 bits, got {prec}")
    ctx = mpmath.MPContext()
    ctx.prec = prec
    return ctx


def is_exact(x) -> bool:
    return isinstance(x, (GaussianRational, int, Fraction))


def exact(x):
    """Convert ``x`` to an exact Gaussian rational.

    Accepts ints, Fractions, Gaussian rationals, Python complex numbers with
    dyadic parts, decimal or ``p/q`` strings and ``(re, im)`` pairs.
    """
    if isinstance(x, GaussianRational):
        return x
    if isinstance(x, (int, Fraction)):
        return QQ_I(Fraction(x), 0)
    if isinstance(x, str):
        return QQ_I(Fraction(x), 0)
    if isinstance(x, (tuple, list)) and len(x) == 2:
        return QQ_I(Fraction(x[0]), Fraction(x[1]))
    if isinstance(x, float):
        return QQ_I(Fraction(x), 0)
    if isinstance(x, complex):
        return QQ_I(Fraction(x.real), Fraction(x.imag))
    raise TypeError(f"cannot convert {x!r} to an exact scalar")


def _mpq_parts(g):
    return (Fraction(int(g.x.numerator), int(g.x.denominator)),
            Fraction(int(g.y.numerator), int(g.y.denominator)))


def exact_parts(g) -> tuple[Fraction, Fraction]:
    """Real and imaginary parts of an exact scalar as Fractions."""
    return _mpq_parts(exact(g))


def numeric(x, prec: int = DEFAULT_PREC):
    """Convert ``x`` to an mpc of the context for ``prec`` (INF passes through)."""
    if x is INF:
        return INF
    ctx = context(prec)
    if isinstance(x, GaussianRational):
        re, im = _mpq_parts(x)
        return ctx.mpc(ctx.mpf(re.numerator) / re.denominator,
                       ctx.mpf(im.numerator) / im.denominator)
    if isinstance(x, Fraction):
        return ctx.mpc(ctx.mpf(x.numerator) / x.denominator)
    if isinstance(x, (tuple, list)) and len(x) == 2:
        return ctx.mpc(_parse_real(x[0], ctx), _parse_real(x[1], ctx))
    if isinstance(x, str):
        return ctx.mpc(_parse_real(x, ctx))
    if isinstance(x, (mpmath.mpc, mpmath.mpf)) or isinstance(x, Number):
        return ctx.mpc(x)
    raise TypeError(f"cannot convert {x!r} to a numeric scalar")


def _parse_real(s, ctx):
    if isinstance(s, str) and "/" in s:
        f = Fraction(s)
        return ctx.mpf(f.numerator) / f.denominator
    return ctx.mpf(s)


def is_zero(x) -> bool:
    if isinstance(x, GaussianRational):
        return not x
    return x == 0


def magnitude(x) -> float:
    """|x| as a Python float (inf for the point at infinity)."""
    if x is INF:
        return math.inf
    if isinstance(x, GaussianRational):
        re, im = _mpq_parts(x)
        return math.hypot(float(re), float(im))
    return float(abs(x))


def to_complex(x) -> complex:
    if x is INF:
        return complex(math.inf, 0)
    if isinstance(x, GaussianRational):
        re, im = _mpq_parts(x)
        return complex(float(re), float(im))
    return complex(x)


def distance(a, b) -> float:
    """Distance in the plane, with INF only close to itself."""
    if a is INF or b is INF:
        return 0.0 if a is b else math.inf
    return magnitude(a - b) if (is_exact(a) == is_exact(b)) else abs(to_complex(a) - to_complex(b))


def chordal_distance(a, b) -> float:
    """Chordal (spherical) distance, bounded by 1."""
    if a is INF and b is INF:
        return 0.0
    if a is INF:
        return 1.0 / math.sqrt(1.0 + magnitude(b) ** 2)
    if b is INF:
        return 1.0 / math.sqrt(1.0 + magnitude(a) ** 2)
    za, zb = to_complex(a), to_complex(b)
    return abs(za - zb) / math.sqrt((1 + abs(za) ** 2) * (1 + abs(zb) ** 2))


def snap_exact(x, max_den: int = 10**6):
    """Best Gaussian rational near a numeric ``x`` with bounded denominators."""
    if isinstance(x, complex):
        re, im = Fraction(x.real), Fraction(x.imag)
    else:
        re, im = _mpf_fraction(_real(x)), _mpf_fraction(_imag(x))
    return QQ_I(re.limit_denominator(max_den), im.limit_denominator(max_den))


def _real(x):
    return x.real if hasattr(x, "imag") else x


def _imag(x):
    return x.imag if hasattr(x, "imag") else 0 * x


def _mpf_fraction(v) -> Fraction:
    if not hasattr(v, "_mpf_"):
        return Fraction(v)
    sign, man, exp, _ = v._mpf_
    if not man:
        return Fraction(0)
    f = Fraction(int(man)) * Fraction(2) ** exp
    return -f if sign else f


def tolerance(prec: int, fraction: float) -> float:
    """2**(-prec*fraction), clipped to the float range."""
    return max(2.0 ** (-prec * fraction), 1e-300)


# --- JSON encoding -------------------------------------------------------

def encode(x, digits: int | None = None):
    """[re, im] as decimal strings, or "inf"."""
    if x is INF:
        return "inf"
    if isinstance(x, (GaussianRational, int, Fraction)):
        re, im = _mpq_parts(exact(x))
        return [_frac_str(re), _frac_str(im)]
    if isinstance(x, complex):
        return [repr(x.real), repr(x.imag)]
    ctx = getattr(x, "context", None) or context(DEFAULT_PREC)
    if digits is None:
        digits = int(ctx.prec * math.log10(2)) + 2
    return [ctx.nstr(_real(x), digits, strip_zeros=True),
            ctx.nstr(_imag(x), digits, strip_zeros=True)]


def _frac_str(f: Fraction) -> str:
    return str(f.numerator) if f.denominator == 1 else f"{f.numerator}/{f.denominator}"


def decode(obj, prec: int = DEFAULT_PREC, exact_mode: bool = False):
    """Inverse of :func:`encode`.  Plain numbers and strings are accepted too."""
    if obj == "inf":
        return INF
    if isinstance(obj, (list, tuple)):
        if len(obj) != 2:
            raise ValueError(f"complex scalar must be [re, im], got {obj!r}")
        parts = obj
    elif isinstance(obj, (int, float, str)):
        parts = (obj, "0")
    else:
        raise ValueError(f"cannot decode scalar {obj!r}")
    if exact_mode:
        return QQ_I(Fraction(str(parts[0])), Fraction(str(parts[1])))
    ctx = context(prec)
    return ctx.mpc(_parse_real(str(parts[0]), ctx), _parse_real(str(parts[1]), ctx))


def field_prec(values) -> int | None:
    """Working precision implied by a collection of scalars (None = exact)."""
    prec = None
    floats = False
    for v in values:
        ctx = getattr(v, "context", None)
        if ctx is not None:
            prec = ctx.prec if prec is None else max(prec, ctx.prec)
        elif isinstance(v, (float, complex)):
            floats = True
    if prec is None and floats:
        prec = DEFAULT_PREC
    return prec


def coerce(values, prec: int | None = None) -> list:
    """Bring scalars into one field: exact unless something numeric is present
    (or ``prec`` is given).  INF passes through."""
    values = list(values)
    if prec is None:
        prec = field_prec(v for v in values if v is not INF)
    if prec is None:
        return [v if v is INF else exact(v) for v in values]
    return [v if v is INF or (getattr(v, "context", None) is not None and v.context.prec == prec)
            else numeric(v, prec) for v in values]
