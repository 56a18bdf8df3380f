"""Domain types and index combinatorics shared by every other module.

Multiplicity vectors are stored zero-padded to length ``n + 3``.  Point indices
are 1-based wherever they are shown to a user.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from math import comb
from typing import Callable, Iterable, Iterator, Sequence

MultiIndex = tuple[int, ...]


class InvalidSystemError(ValueError):
    """Input is not a linear system (negative degree or multiplicity, bad shape)."""


def binom_or_zero(a: int, b: int) -> int:
    """C(a, b) when a >= b >= 0, else 0.

    >>> binom_or_zero(4, 2), binom_or_zero(1, 2), binom_or_zero(-3, 2)
    (6, 0, 0)
    """
    if b < 0:
        raise ValueError(f"binom_or_zero: b must be >= 0, got {b}")
    if a < b:
        return 0
    return comb(a, b)


def multi_index(indices: Iterable[int], n: int) -> MultiIndex:
    """Validate and normalise a 1-based index set of {1, ..., n+3}."""
    idx = tuple(sorted(int(i) for i in indices))
    if len(set(idx)) != len(idx):
        raise ValueError(f"duplicate indices in {idx}")
    if idx and (idx[0] < 1 or idx[-1] > n + 3):
        raise ValueError(f"indices {idx} out of range 1..{n + 3}")
    return idx


def _pad(values: Sequence[int], n: int, what: str) -> tuple[int, ...]:
    vals = tuple(int(v) for v in values)
    if len(vals) > n + 3:
        raise InvalidSystemError(f"{what}: {len(vals)} entries exceed n+3 = {n + 3}")
    return vals + (0,) * (n + 3 - len(vals))


@dataclass(frozen=True)
class LinearSystemSpec:
    """The system L_{n,d}(m_1, ..., m_s) of degree-d hypersurfaces of P^n.

    ``mults`` is padded with zeros to length n+3.  Non-negativity is checked by
    the operations that need linear-system semantics, not here.
    """

    n: int
    d: int
    mults: tuple[int, ...] = field(default=())

    def __post_init__(self) -> None:
        if self.n < 1:
            raise InvalidSystemError(f"ambient dimension must be >= 1, got {self.n}")
        object.__setattr__(self, "mults", _pad(self.mults, self.n, "mults"))

    @property
    def M(self) -> int:
        return sum(self.mults)

    @property
    def s(self) -> int:
        """Number of strictly positive multiplicities."""
        return sum(1 for m in self.mults if m > 0)

    def sorted(self) -> LinearSystemSpec:
        return LinearSystemSpec(self.n, self.d, tuple(sorted(self.mults, reverse=True)))

    def is_homogeneous(self) -> bool:
        return len(set(self.mults)) == 1

    def require_system(self) -> None:
        if self.d < 0 or any(m < 0 for m in self.mults):
            raise InvalidSystemError(f"{self} is not a linear system (negative d or m_i)")

    def as_divisor(self) -> DivisorClass:
        return DivisorClass(self.n, self.d, self.mults)

    def __str__(self) -> str:
        return f"L_{{{self.n},{self.d}}}({compact_mults(self.mults)})"


@dataclass(frozen=True)
class DivisorClass:
    """A class dH - sum m_i E_i on the blow-up of P^n at n+3 points.

    Coordinates follow the linear-system convention, so ``L_{n,d}(m)`` and
    ``DivisorClass(n, d, m)`` name the same class; the exceptional divisor E_j
    has d = 0 and m_j = -1.
    """

    n: int
    d: int
    m: tuple[int, ...]

    def __post_init__(self) -> None:
        m = tuple(int(v) for v in self.m)
        if len(m) != self.n + 3:
            raise ValueError(f"DivisorClass needs exactly n+3 = {self.n + 3} entries, got {len(m)}")
        object.__setattr__(self, "m", m)

    @property
    def mults(self) -> tuple[int, ...]:
        return self.m

    @property
    def M(self) -> int:
        return sum(self.m)

    @classmethod
    def hyperplane(cls, n: int) -> DivisorClass:
        return cls(n, 1, (0,) * (n + 3))

    @classmethod
    def exceptional(cls, n: int, j: int) -> DivisorClass:
        m = [0] * (n + 3)
        m[j - 1] = -1
        return cls(n, 0, tuple(m))

    def e_coefficients(self) -> tuple[int, ...]:
        """Coefficients of E_1, ..., E_{n+3} when the class is written in the basis H, E_i."""
        return tuple(-v for v in self.m)

    def as_system(self) -> LinearSystemSpec:
        return LinearSystemSpec(self.n, self.d, self.m)

    def __add__(self, other: DivisorClass) -> DivisorClass:
        if self.n != other.n:
            raise ValueError("cannot add classes on different blow-ups")
        return DivisorClass(self.n, self.d + other.d, tuple(a + b for a, b in zip(self.m, other.m)))

    def __rmul__(self, k: int) -> DivisorClass:
        return DivisorClass(self.n, k * self.d, tuple(k * v for v in self.m))

    def __neg__(self) -> DivisorClass:
        return -1 * self

    def __str__(self) -> str:
        return f"({self.d}; {','.join(map(str, self.m))})"


@dataclass(frozen=True, order=True)
class JoinCycle:
    """The join J(L_I, sigma_t) of the span of the points in I with the t-secant variety.

    ``t = 0`` gives the linear span L_I, ``I = ()`` the secant variety itself and
    ``(I, t) = ((), 0)`` the empty cycle.  Formal values ``t = -1`` are allowed
    for the cone inequalities.
    """

    t: int
    I: MultiIndex = ()

    def __post_init__(self) -> None:
        if self.t < -1:
            raise ValueError(f"secant index must be >= -1, got {self.t}")
        object.__setattr__(self, "I", tuple(sorted(self.I)))

    @property
    def r(self) -> int:
        return len(self.I) + 2 * self.t - 1

    def is_divisorial(self, n: int) -> bool:
        return self.r == n - 1

    def label(self) -> str:
        pts = "".join(str(i) for i in self.I) if all(i < 10 for i in self.I) else ",".join(map(str, self.I))
        if self.t == 0:
            return f"L_{{{pts}}}" if self.I else "empty"
        sec = "C" if self.t == 1 else f"sigma_{self.t}"
        return f"J(L_{{{pts}}},{sec})" if self.I else sec


def enumerate_join_cycles(
    n: int,
    size_rule: Callable[[int, int], bool],
    *,
    min_t: int = 0,
    max_t: int | None = None,
) -> list[JoinCycle]:
    """All (I, t) with I a subset of {1..n+3} and ``size_rule(|I|, t)`` true.

    Order is t ascending, then |I| ascending, then I lexicographic.  ``t`` runs
    from ``min_t`` (0 unless the formal t = -1 rows are wanted) to ``max_t``
    (default n + 3, past which every rule of interest is empty).
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    hi = n + 3 if max_t is None else max_t
    out = []
    for t in range(min_t, hi + 1):
        for size in range(n + 4):
            if size_rule(size, t):
                out.extend(JoinCycle(t, I) for I in combinations(range(1, n + 4), size))
    return out


def compact_mults(mults: Sequence[int]) -> str:
    """Render multiplicities with exponent notation for runs: (6,6,6,1) -> '6^3,1'."""
    parts: list[str] = []
    i = 0
    while i < len(mults):
        j = i
        while j < len(mults) and mults[j] == mults[i]:
            j += 1
        run = j - i
        parts.append(f"{mults[i]}^{run}" if run > 1 else str(mults[i]))
        i = j
    return ",".join(parts)


def iter_subsets_bounded(values: Sequence[int], bound: Callable[[int, int], bool]) -> Iterator[MultiIndex]:
    """Subsets I (1-based) of range(len(values)) in DFS order, pruned by ``bound(len, sum)``.

    ``bound`` must be anti-monotone along the DFS (once false for a set it is
    false for every superset); only then is pruning sound.
    """
    k = len(values)

    def rec(start: int, chosen: list[int], total: int) -> Iterator[MultiIndex]:
        for i in range(start, k):
            chosen.append(i + 1)
            tot = total + values[i]
            if bound(len(chosen), tot):
                yield tuple(chosen)
                yield from rec(i + 1, chosen, tot)
            chosen.pop()

    if bound(0, 0):
        yield ()
    yield from rec(0, [], 0)
