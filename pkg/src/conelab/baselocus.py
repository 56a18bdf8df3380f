"""Cycles J(L_I, sigma_t) in the base locus of an effective system, with multiplicities."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from math import comb

from .core import JoinCycle, LinearSystemSpec, iter_subsets_bounded
from .cones import FacetInequality, is_effective
from .formulas import k_join


class NotEffectiveError(ValueError):
    """The system is empty, so containment multiplicities are not defined."""

    def __init__(self, L: LinearSystemSpec, violated: list[FacetInequality]):
        self.system = L
        self.violated = violated
        labels = ", ".join(f.label for f in violated)
        super().__init__(f"{L} is not effective; violated facets: {labels}")


@dataclass(frozen=True)
class BaseLocusEntry:
    cycle: JoinCycle
    k: int
    divisorial: bool
    count: int = 1

    @property
    def r(self) -> int:
        return self.cycle.r


def _require_effective(L: LinearSystemSpec) -> None:
    L.require_system()
    ok, violated = is_effective(L.as_divisor())
    if not ok:
        raise NotEffectiveError(L, violated)


def _raw_cycles(L: LinearSystemSpec, include_points: bool) -> list[tuple[JoinCycle, int]]:
    n, d, m = L.n, L.d, L.mults
    kc = L.M - n * d
    out = []
    t = 0
    while n - 2 * t >= 0:
        base = t * kc - (t - 1) * d
        # k_join(I + j) = k_join(I) + m_j - d <= k_join(I) on effective input: prune on k > 0
        bound = lambda size, msum, base=base, t=t: size <= n - 2 * t and msum + base - size * d > 0
        for I in iter_subsets_bounded(m, bound):
            if t == 0 and len(I) == 0:
                continue
            if t == 0 and len(I) == 1 and not include_points:
                continue
            c = JoinCycle(t, I)
            out.append((c, k_join(L, c)))
        t += 1
    return out


def base_locus_table(L: LinearSystemSpec, *, include_points: bool = False) -> list[BaseLocusEntry]:
    """Every join cycle of dimension <= n-1 with positive multiplicity k_join.

    The points themselves (t = 0, |I| = 1, k = m_i) are left out unless
    ``include_points`` is set.  Homogeneous systems are collapsed to one row
    per (t, |I|) with the number of index sets in ``count``.
    """
    _require_effective(L)
    raw = _raw_cycles(L, include_points)
    n = L.n
    if L.is_homogeneous():
        groups: dict[tuple[int, int], BaseLocusEntry] = {}
        for c, k in raw:
            key = (c.t, len(c.I))
            if key in groups:
                e = groups[key]
                groups[key] = BaseLocusEntry(e.cycle, e.k, e.divisorial, e.count + 1)
            else:
                groups[key] = BaseLocusEntry(c, k, c.is_divisorial(n), 1)
        return [groups[key] for key in sorted(groups)]
    rows = [BaseLocusEntry(c, k, c.is_divisorial(n)) for c, k in raw]
    rows.sort(key=lambda e: (e.cycle.t, len(e.cycle.I), e.cycle.I))
    return rows


def divisorial_fixed_components(L: LinearSystemSpec) -> list[BaseLocusEntry]:
    """Base-locus cycles of dimension n-1, i.e. fixed divisors J(L_I, sigma_t) with |I| = n-2t."""
    return [e for e in base_locus_table(L, include_points=L.n == 1) if e.divisorial]


def residual_remove(L: LinearSystemSpec, entry: BaseLocusEntry | JoinCycle) -> LinearSystemSpec:
    """Subtract k copies of the divisor J(L_I, sigma_t) = L_{n,t+1}((t+1)^I, t^rest)."""
    L.require_system()
    cycle = entry.cycle if isinstance(entry, BaseLocusEntry) else entry
    if not cycle.is_divisorial(L.n):
        raise ValueError(f"{cycle.label()} has dimension {cycle.r}, not n-1 = {L.n - 1}")
    k = k_join(L, cycle)
    if k <= 0:
        raise ValueError(f"{cycle.label()} is not a fixed component of {L} (k = {k})")
    if isinstance(entry, BaseLocusEntry) and entry.k != k:
        raise ValueError(f"entry multiplicity {entry.k} does not match k_join = {k}")
    t = cycle.t
    d = L.d - (t + 1) * k
    m = [v - (t + 1) * k if i + 1 in cycle.I else v - t * k for i, v in enumerate(L.mults)]
    if any(v < 0 for v in m):
        warnings.warn(f"residual of {L} along {cycle.label()} has negative multiplicities; clamped to 0", stacklevel=2)
        m = [max(v, 0) for v in m]
    return LinearSystemSpec(L.n, d, m)


@dataclass(frozen=True)
class SecantGeometry:
    n: int
    t: int
    dim: int
    degree: int | None
    mult_along_C: int
    mult_along_sigma_tau_lower: dict[int, int] = field(default_factory=dict)
    mult_along_sigma_tau_exact: dict[int, int] | None = None


def secant_geometry(n: int, t: int) -> SecantGeometry:
    """Dimension, degree and singular multiplicities of the t-secant variety of C in P^n.

    ``degree`` is None when sigma_t fills P^n (2t - 1 >= n).  The exact
    multiplicities along sigma_tau are only known for n = 2t.
    """
    if t < 1:
        raise ValueError(f"secant index must be >= 1, got {t}")
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    dim = min(n, 2 * t - 1)
    deg = comb(n - t + 1, t) if 2 * t - 1 < n else None
    lower = {tau: comb(n - t - tau + 1, t - tau) if n - t - tau + 1 >= 0 else 0 for tau in range(1, t)}
    exact = {tau: t - tau + 1 for tau in range(1, t)} if n == 2 * t else None
    mult_c = comb(n - t, t - 1) if n - t >= 0 else 0
    return SecantGeometry(n, t, dim, deg, mult_c, lower, exact)
