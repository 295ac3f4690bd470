"""Polynomial roots at a chosen precision: Aberth iteration seeded by numpy,
with multiplicity by clustering (numeric) or squarefree factorisation (exact)."""

from __future__ import annotations

import numpy as np

from .poly import Poly, squarefree_decomposition
from .scalars import DEFAULT_PREC, context, snap_exact, to_complex, tolerance


def _seeds(p: Poly) -> list[complex]:
    coeffs = [to_complex(c) for c in reversed(p.coeffs)]
    try:
        seeds = list(np.roots(coeffs))
    except np.linalg.LinAlgError:
        seeds = []
    d = p.degree
    if len(seeds) != d or not all(np.isfinite(s) for s in seeds):
        radius = 1.0 + max(abs(c) for c in coeffs[1:]) / abs(coeffs[0])
        seeds = [radius * np.exp(2j * np.pi * (k + 0.25) / d) for k in range(d)]
    # Aberth needs distinct starting points.
    out = []
    for i, s in enumerate(seeds):
        while any(abs(s - t) < 1e-12 * (1 + abs(s)) for t in out):
            s = s + 1e-6 * (1 + abs(s)) * np.exp(1j * (i + 1))
        out.append(complex(s))
    return out


def aberth(p: Poly, prec: int = DEFAULT_PREC, maxiter: int = 200) -> list:
    """All roots of ``p`` (with repetition) as mpc numbers at ``prec`` bits."""
    d = p.degree
    if d < 1:
        return []
    ctx = context(prec)
    q = p.to_numeric(prec)
    dq = q.deriv()
    z = [ctx.mpc(s) for s in _seeds(p)]
    eps = ctx.mpf(2) ** (-prec + 8)
    for _ in range(maxiter):
        worst = ctx.mpf(0)
        for i in range(d):
            zi = z[i]
            f = q(zi)
            if f == 0:
                continue
            ratio = f / dq(zi) if dq(zi) != 0 else None
            acc = ctx.mpc(0)
            for j in range(d):
                if j != i:
                    diff = zi - z[j]
                    if diff != 0:
                        acc += 1 / diff
            if ratio is None:
                step = 1 / acc if acc != 0 else ctx.mpc(eps)
            else:
                denom = 1 - ratio * acc
                step = ratio / denom if denom != 0 else ratio
            z[i] = zi - step
            rel = abs(step) / (1 + abs(z[i]))
            if rel > worst:
                worst = rel
        if worst < eps:
            break
    return z


def _groups(points, radius: float) -> list[list]:
    """Single-linkage groups of points closer than ``radius`` (relative to
    1+|z|), in order of first appearance."""
    groups: list[list] = []
    for z in points:
        for g in groups:
            if any(abs(z - w) <= radius * (1 + abs(w)) for w in g):
                g.append(z)
                break
        else:
            groups.append([z])
    # A second pass merges groups chained through later members.
    merged = True
    while merged:
        merged = False
        for a in range(len(groups)):
            for b in range(a + 1, len(groups)):
                if any(abs(x - y) <= radius * (1 + abs(y)) for x in groups[a] for y in groups[b]):
                    groups[a].extend(groups.pop(b))
                    merged = True
                    break
            if merged:
                break
    return groups


def cluster_points(points, radius: float) -> list[tuple[object, int]]:
    """(centroid, count) of the groups of points closer than ``radius``."""
    return [(sum(g) / len(g), len(g)) for g in _groups(points, radius)]


def _resolve(points, m: int, prec: int, floor: float) -> list[tuple[object, int]]:
    """Multiplicity-aware clustering.  An m-fold root scatters by about
    eps^(1/m), so a group of size s is accepted when all members lie within
    2^(-prec/(2s)) of its centroid; otherwise it is split more finely."""
    radius = max(tolerance(prec, 1 / (2 * m)), floor)
    out = []
    for g in _groups(points, radius):
        c = sum(g) / len(g)
        r = max(tolerance(prec, 1 / (2 * len(g))), floor) * (1 + abs(c))
        if len(g) == 1 or m <= 2 or all(abs(z - c) <= r for z in g):
            out.append((c, len(g)))
        else:
            out.extend(_resolve(g, min(m, len(g)) - 1, prec, floor))
    return out


def numeric_roots(p: Poly, prec: int = DEFAULT_PREC, radius: float | None = None):
    """Distinct roots with multiplicities of a numeric polynomial."""
    if radius is None:
        radius = tolerance(prec, 0.25)
    pts = aberth(p, prec)
    groups = _resolve(pts, len(pts), prec, radius)
    return [(polish_multiple(p, z, m, prec) if m > 1 else z, m) for z, m in groups]


def polish_multiple(p: Poly, z, m: int, prec: int = DEFAULT_PREC, steps: int = 8):
    """Newton on the (m-1)-th derivative, where an m-fold root is simple."""
    q = p.to_numeric(prec)
    for _ in range(m - 1):
        q = q.deriv()
    dq = q.deriv()
    for _ in range(steps):
        d = dq(z)
        if d == 0:
            break
        step = q(z) / d
        z = z - step
        if abs(step) <= 2.0 ** (-prec + 4) * (1 + abs(z)):
            break
    return z


def exact_roots(p: Poly, prec: int = DEFAULT_PREC, max_den: int = 10**12):
    """Roots with multiplicities of an exact polynomial.

    Multiplicities are exact (squarefree decomposition).  A root is returned
    as a Gaussian rational when one is verified exactly, else as an mpc.
    """
    out = []
    for factor, mult in squarefree_decomposition(p):
        if factor.degree == 1:
            out.append((-factor.coeffs[0] / factor.coeffs[1], mult))
            continue
        for z in aberth(factor, prec):
            cand = snap_exact(z, max_den)
            if not factor(cand):
                out.append((cand, mult))
            else:
                out.append((z, mult))
    return out


def roots(p: Poly, prec: int = DEFAULT_PREC):
    if p.exact:
        return exact_roots(p, prec)
    return numeric_roots(p, prec)


__all__ = ["aberth", "cluster_points", "numeric_roots", "exact_roots", "roots"]
