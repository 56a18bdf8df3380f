"""Closed-form dimension counts for fat-point systems with at most n+3 points.

Every count here is an alternating sum of binomials ``C(n + k - r - 1, n)``
over cycles of dimension r contained k times in the base locus.  A term is
non-zero only when ``k >= r + 1``; with all ``m_i <= d`` that condition is
anti-monotone in the index set, so the sums walk a pruned subset tree instead
of all 2^(n+3) subsets.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, product
from typing import Iterator, Sequence, Union

from .core import (
    DivisorClass,
    JoinCycle,
    LinearSystemSpec,
    MultiIndex,
    binom_or_zero,
    iter_subsets_bounded,
)

SystemLike = Union[LinearSystemSpec, DivisorClass]

DEFAULT_TRUNC_BUDGET = 2


@dataclass(frozen=True)
class DimReport:
    vdim: int
    edim: int
    lvdim: int
    ldim: int
    slvdim: int
    sldim: int
    k_C: int
    truncation: str = f"budget={DEFAULT_TRUNC_BUDGET}"

    def as_dict(self) -> dict:
        return {
            "vdim": self.vdim,
            "edim": self.edim,
            "lvdim": self.lvdim,
            "ldim": self.ldim,
            "slvdim": self.slvdim,
            "sldim": self.sldim,
            "k_C": self.k_C,
            "truncation": self.truncation,
        }


def vdim(L: LinearSystemSpec) -> int:
    L.require_system()
    return binom_or_zero(L.n + L.d, L.n) - sum(binom_or_zero(L.n + m - 1, L.n) for m in L.mults if m > 0)


def k_linear(L: SystemLike, I: Sequence[int]) -> int:
    """Multiplicity of the span of the points in I in the base locus (clamped at 0)."""
    if not 1 <= len(I) <= L.n:
        raise ValueError(f"|I| must lie in 1..{L.n}, got {len(I)}")
    return max(sum(L.mults[i - 1] for i in I) - (len(I) - 1) * L.d, 0)


def k_rnc(L: SystemLike) -> int:
    """Multiplicity of the rational normal curve through the n+3 points; not clamped."""
    return L.M - L.n * L.d


def _k_join(n: int, d: int, mults: Sequence[int], I: Sequence[int], t: int) -> int:
    kc = sum(mults) - n * d
    return sum(mults[i - 1] for i in I) + t * kc - (len(I) + t - 1) * d


def k_join(L: SystemLike, c: JoinCycle) -> int:
    """sum_{i in I} m_i + t*k_C - (|I| + t - 1)*d, the formal multiplicity of J(L_I, sigma_t)."""
    return _k_join(L.n, L.d, L.mults, c.I, c.t)


def _all_le_degree(d: int, mults: Sequence[int]) -> bool:
    return all(m <= d for m in mults)


def _subsets(mults: Sequence[int], n_max_size: int, bound, prune: bool) -> Iterator[MultiIndex]:
    """Index sets of size <= n_max_size whose term may be non-zero.

    ``bound(size, msum)`` is anti-monotone only when every m_i <= d, so pruning
    is used only then; otherwise all subsets are produced and the caller's
    binomial filters the zero terms.
    """
    if prune:
        yield from iter_subsets_bounded(mults, lambda k, s: k <= n_max_size and bound(k, s))
        return
    for size in range(n_max_size + 1):
        yield from combinations(range(1, len(mults) + 1), size)


def lvdim(L: LinearSystemSpec) -> int:
    """Linear virtual dimension: the alternating sum over all linear spans L_I of the points."""
    L.require_system()
    n, d = L.n, L.d
    support = [m for m in L.mults if m > 0]
    total = binom_or_zero(n + d, n)
    prune = _all_le_degree(d, support)
    # term for |I| = r+1 is non-zero iff k_I >= |I|, i.e. msum - (size-1)d - size >= 0
    for I in _subsets(support, len(support), lambda k, s: k == 0 or s - (k - 1) * d - k >= 0, prune):
        if not I:
            continue
        r = len(I) - 1
        k = max(sum(support[i - 1] for i in I) - r * d, 0)
        total += (-1) ** (r + 1) * binom_or_zero(n + k - r - 1, n)
    return total


def secant_terms(n: int, d: int, mults: Sequence[int]) -> Iterator[tuple[JoinCycle, int]]:
    """Yield (cycle, signed term) for every cycle whose secant-linear term is non-zero.

    Includes the empty cycle ((), 0), whose term is C(n+d, n).
    """
    kc = sum(mults) - n * d
    prune = _all_le_degree(d, mults)
    t = 0
    while n - 2 * t >= 0:
        base = t * kc - (t - 1) * d

        def bound(size: int, msum: int, base=base, t=t) -> bool:
            # k_join - r - 1 >= 0  with  k_join = msum + base - size*d,  r = size + 2t - 1
            return msum + base - size * d - size - 2 * t >= 0

        for I in _subsets(mults, n - 2 * t, bound, prune):
            k = sum(mults[i - 1] for i in I) + base - len(I) * d
            r = len(I) + 2 * t - 1
            term = binom_or_zero(n + k - r - 1, n)
            if term:
                yield JoinCycle(t, I), (-1) ** len(I) * term
        t += 1


def slvdim(L: LinearSystemSpec) -> int:
    """Secant linear virtual dimension, summed over all joins J(L_I, sigma_t) with r <= n-1."""
    L.require_system()
    return sum(term for _, term in secant_terms(L.n, L.d, L.mults))


def _contained_in(L: LinearSystemSpec, budget: int | None) -> Iterator[LinearSystemSpec]:
    """Systems of the same degree with m'_i <= m_i, i.e. systems containing L.

    ``budget=None`` walks every such m'; otherwise only those whose total
    multiplicity drops by at most ``budget``.  L itself comes first.
    """
    m = L.mults
    yield L
    if budget is None:
        for mp in product(*(range(v + 1) for v in m)):
            if tuple(mp) != m:
                yield LinearSystemSpec(L.n, L.d, mp)
        return
    seen = {m}
    frontier = {m}
    for _ in range(budget):
        nxt = set()
        for v in frontier:
            for i, vi in enumerate(v):
                if vi > 0:
                    w = v[:i] + (vi - 1,) + v[i + 1:]
                    if w not in seen:
                        seen.add(w)
                        nxt.add(w)
        for w in sorted(nxt, reverse=True):
            yield LinearSystemSpec(L.n, L.d, w)
        frontier = nxt


def _truncated(L: LinearSystemSpec, virtual, budget: int | None) -> int:
    value = virtual(L)
    if value < 0:
        return 0
    for Lp in _contained_in(L, budget):
        if Lp is not L and virtual(Lp) < 0:
            return 0
    return value


def ldim(L: LinearSystemSpec, budget: int | None = DEFAULT_TRUNC_BUDGET) -> int:
    """Linear expected dimension.

    Returns 0 if some system containing L (same degree, smaller multiplicities)
    has negative linear virtual dimension.  Only systems within ``budget`` of L
    are searched; ``budget=None`` searches all of them.
    """
    return _truncated(L, lvdim, budget)


def sldim(L: LinearSystemSpec, budget: int | None = DEFAULT_TRUNC_BUDGET) -> int:
    """Secant linear expected dimension, with the same containment truncation as :func:`ldim`."""
    return _truncated(L, slvdim, budget)


def sldim_p2_closed_form(L: LinearSystemSpec) -> int:
    """The plane five-point count C(d+2,2) - sum C(m_i+1,2) + sum_{i<j} C(m_i+m_j-d,2) + C(k_C,2)."""
    if L.n != 2:
        raise ValueError(f"closed form is for n = 2 only, got n = {L.n}")
    L.require_system()
    d, m = L.d, L.mults
    total = binom_or_zero(d + 2, 2) - sum(binom_or_zero(mi + 1, 2) for mi in m)
    total += sum(binom_or_zero(m[i] + m[j] - d, 2) for i, j in combinations(range(5), 2))
    return total + binom_or_zero(k_rnc(L), 2)


def linear_nonspecial_sufficient(L: LinearSystemSpec) -> bool:
    """Sufficient numerical test for linear non-speciality of an (n+3)-point system.

    Checks sum m_i <= n*d + min(n - s(d), s - n - 2) with s(d) the number of
    points of multiplicity d.  Raises if the system does not have n+3 positive
    multiplicities, each at most d.
    """
    L.require_system()
    pts = [m for m in L.mults if m > 0]
    if len(pts) < L.n + 3:
        raise ValueError(f"needs s >= n+3 = {L.n + 3} positive multiplicities, got {len(pts)}")
    if any(m > L.d for m in pts):
        raise ValueError(f"needs 1 <= m_i <= d = {L.d}; got {pts}")
    s = len(pts)
    s_d = sum(1 for m in pts if m == L.d)
    return sum(pts) <= L.n * L.d + min(L.n - s_d, s - L.n - 2)


def predicted_dim(L: LinearSystemSpec, budget: int | None = DEFAULT_TRUNC_BUDGET) -> int:
    """Conjectural dimension: 0 for empty systems, sldim otherwise."""
    from .cones import is_effective_system

    L.require_system()
    if not is_effective_system(L):
        return 0
    return sldim(L, budget)


def dim_report(L: LinearSystemSpec, budget: int | None = DEFAULT_TRUNC_BUDGET) -> DimReport:
    v = vdim(L)
    return DimReport(
        vdim=v,
        edim=max(v, 0),
        lvdim=lvdim(L),
        ldim=ldim(L, budget),
        slvdim=slvdim(L),
        sldim=sldim(L, budget),
        k_C=k_rnc(L),
        truncation="exhaustive" if budget is None else f"budget={budget}",
    )

