"""Effective and movable cones of the blow-up X of P^n at n+3 general points.

Classes are written (d; m_1, ..., m_{n+3}) for dH - sum m_i E_i.  Every facet
is stored as an integer row (c_d; c_1, ..., c_{n+3}) meaning
``c_d*d + sum c_i*m_i <= 0``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations

import numpy as np

from .core import DivisorClass, JoinCycle, LinearSystemSpec, MultiIndex
from .formulas import k_join


@dataclass(frozen=True)
class FacetInequality:
    label: str
    coeffs: tuple[int, ...]
    cycle: JoinCycle | None = None

    def value(self, D: DivisorClass) -> int:
        return self.coeffs[0] * D.d + sum(c * m for c, m in zip(self.coeffs[1:], D.m))

    def holds(self, D: DivisorClass) -> bool:
        return self.value(D) <= 0


@dataclass(frozen=True)
class RayClass:
    t: int
    I: MultiIndex
    cls: DivisorClass

    @property
    def label(self) -> str:
        return f"R(t={self.t},I={{{','.join(map(str, self.I))}}})"


def _top_t(n: int) -> int:
    # l + eps with n = 2l + eps
    return (n + 1) // 2


def pairing(D1: DivisorClass, D2: DivisorClass) -> int:
    """Intersection-style form with <H,H> = n-1, <E_i,E_j> = -delta_ij, <H,E_i> = 0."""
    if D1.n != D2.n:
        raise ValueError(f"classes live on different blow-ups (n={D1.n} vs n={D2.n})")
    return (D1.n - 1) * D1.d * D2.d - sum(a * b for a, b in zip(D1.m, D2.m))


def canonical_class(n: int) -> DivisorClass:
    """K_X = -(n+1)H + (n-1) sum E_i."""
    if n < 2:
        raise ValueError("canonical_class needs n >= 2")
    return DivisorClass(n, -(n + 1), (-(n - 1),) * (n + 3))


def degree(D: DivisorClass) -> int:
    """<D, -K_X>/(n-1), evaluated through the closed form (n+1)d - sum m_i."""
    if D.n < 2:
        raise ValueError("degree needs n >= 2")
    return (D.n + 1) * D.d - D.M


def _join_row(n: int, I: MultiIndex, t: int) -> tuple[int, ...]:
    # k_join = sum_I m_i + t*(M - n d) - (|I| + t - 1) d
    cd = -(t * n + len(I) + t - 1)
    cm = tuple(t + (1 if i in I else 0) for i in range(1, n + 4))
    return (cd,) + cm


def _ab_rows(n: int) -> list[FacetInequality]:
    rows = []
    for i in range(1, n + 4):
        cm = tuple(1 if j == i else 0 for j in range(1, n + 4))
        rows.append(FacetInequality(f"A_{i}", (-1,) + cm))
    for i in range(1, n + 4):
        cm = tuple(0 if j == i else 1 for j in range(1, n + 4))
        rows.append(FacetInequality(f"B_{i}", (-n,) + cm))
    return rows


def _set_label(I: MultiIndex) -> str:
    return "{" + ",".join(map(str, I)) + "}" if I else "{}"


@lru_cache(maxsize=None)
def _facets_effective(n: int) -> tuple[FacetInequality, ...]:
    rows = _ab_rows(n)
    for t in range(-1, _top_t(n) + 1):
        size = n - 2 * t + 1
        if not 0 <= size <= n + 3:
            continue
        for I in combinations(range(1, n + 4), size):
            rows.append(FacetInequality(f"C(t={t},I={_set_label(I)})", _join_row(n, I, t), JoinCycle(t, I)))
    return tuple(rows)


@lru_cache(maxsize=None)
def _facets_movable(n: int) -> tuple[FacetInequality, ...]:
    rows = _ab_rows(n)
    for t in range(-1, _top_t(n) + 1):
        size = n - 2 * t
        if not 0 <= size <= n + 3:
            continue
        for I in combinations(range(1, n + 4), size):
            rows.append(FacetInequality(f"D(t={t},I={_set_label(I)})", _join_row(n, I, t), JoinCycle(t, I)))
    return tuple(rows)


def facets_effective(n: int) -> list[FacetInequality]:
    """A_i, B_i and C(t, I) for -1 <= t <= l+eps, |I| = n-2t+1."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return list(_facets_effective(n))


def facets_movable(n: int) -> list[FacetInequality]:
    """A_i, B_i and D(t, I) for -1 <= t <= l+eps, |I| = n-2t."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return list(_facets_movable(n))


@lru_cache(maxsize=None)
def _rays(n: int) -> tuple[RayClass, ...]:
    out = []
    for t in range(-1, _top_t(n) + 1):
        size = n - 2 * t
        if not 0 <= size <= n + 3:
            continue
        for I in combinations(range(1, n + 4), size):
            m = tuple(t + 1 if i in I else t for i in range(1, n + 4))
            out.append(RayClass(t, I, DivisorClass(n, t + 1, m)))
    return tuple(out)


def rays(n: int) -> list[RayClass]:
    """The degree-one classes (t+1)H - (t+1) sum_I E_i - t sum_{not I} E_i, |I| = n - 2t."""
    if n < 2:
        raise ValueError("rays needs n >= 2")
    return list(_rays(n))


def _check(D: DivisorClass, facets) -> tuple[bool, list[FacetInequality]]:
    violated = [f for f in facets if not f.holds(D)]
    return not violated, violated


def is_effective(D: DivisorClass) -> tuple[bool, list[FacetInequality]]:
    return _check(D, _facets_effective(D.n))


def is_movable(D: DivisorClass) -> tuple[bool, list[FacetInequality]]:
    return _check(D, _facets_movable(D.n))


def is_effective_system(L: LinearSystemSpec) -> bool:
    """Non-emptiness of a linear system (d >= 0, m_i >= 0) via the effective cone."""
    L.require_system()
    return is_effective(L.as_divisor())[0]


def divisorial_k(D: DivisorClass, ray: RayClass) -> int:
    """k_join of D along the cycle of ``ray``; equals -pairing(D, ray.cls)."""
    return k_join(D, JoinCycle(ray.t, ray.I))


def facet_matrix(n: int, kind: str = "effective") -> np.ndarray:
    """Facet rows as an integer array of shape (#facets, n+4); columns (c_d, c_1, ..., c_{n+3})."""
    facets = facets_effective(n) if kind == "effective" else facets_movable(n)
    return np.array([f.coeffs for f in facets], dtype=np.int64)


def ray_matrix(n: int) -> np.ndarray:
    """Ray classes as rows (d, m_1, ..., m_{n+3})."""
    return np.array([(r.cls.d,) + r.cls.m for r in rays(n)], dtype=np.int64)


def membership_mask(n: int, classes: np.ndarray, kind: str = "effective") -> np.ndarray:
    """Vectorised is_effective / is_movable for rows (d, m_1, ..., m_{n+3})."""
    X = np.asarray(classes, dtype=np.int64)
    return np.all(X @ facet_matrix(n, kind).T <= 0, axis=1)


def pairing_matrix(n: int, A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """All pairings between the rows of A and of B, each (d, m_1, ..., m_{n+3})."""
    A = np.asarray(A, dtype=np.int64)
    B = np.asarray(B, dtype=np.int64)
    return (n - 1) * np.outer(A[:, 0], B[:, 0]) - A[:, 1:] @ B[:, 1:].T
