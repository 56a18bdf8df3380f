"""Standard Cremona transformation and cone reduction on (d; m) data."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, TypeVar, Union

from .core import DivisorClass, LinearSystemSpec, MultiIndex, multi_index

X = TypeVar("X", LinearSystemSpec, DivisorClass)


@dataclass(frozen=True)
class ReductionStep:
    kind: str  # "cremona" | "clamp" | "cone"
    pivot: Union[MultiIndex, int, None]  # cone steps store the number of points removed
    c: int | None
    before: LinearSystemSpec
    after: LinearSystemSpec

    def describe(self) -> str:
        if self.kind == "cremona":
            return f"cremona at {{{','.join(map(str, self.pivot))}}} c={self.c}: {self.before} -> {self.after}"
        if self.kind == "cone":
            return f"cone reduction over {self.pivot} point(s) of multiplicity d: {self.before} -> {self.after}"
        return f"clamp negative multiplicities: {self.before} -> {self.after}"


def _pivot(x: LinearSystemSpec | DivisorClass, J: Sequence[int]) -> MultiIndex:
    idx = multi_index(J, x.n)
    if len(idx) != x.n + 1:
        raise ValueError(f"Cremona pivot needs n+1 = {x.n + 1} points, got {len(idx)}")
    return idx


def cremona_c(L: LinearSystemSpec | DivisorClass, J: Sequence[int]) -> int:
    """c = sum_{i in J} m_i - (n-1) d."""
    idx = _pivot(L, J)
    return sum(L.mults[i - 1] for i in idx) - (L.n - 1) * L.d


def cremona_transform(x: X, J: Sequence[int]) -> X:
    """Image of x under the Cremona map based at the points J.

    Exact on coordinates: multiplicities may come out negative.  Use
    :func:`clamp` to return to a linear system of the same dimension.
    """
    idx = set(_pivot(x, J))
    c = cremona_c(x, J)
    m = tuple(v - c if i + 1 in idx else v for i, v in enumerate(x.mults))
    if isinstance(x, DivisorClass):
        return DivisorClass(x.n, x.d - c, m)
    return LinearSystemSpec(x.n, x.d - c, m)


def clamp(L: LinearSystemSpec) -> LinearSystemSpec:
    """Replace negative multiplicities by 0; such points impose no condition."""
    return LinearSystemSpec(L.n, L.d, tuple(max(v, 0) for v in L.mults))


def largest_pivot(L: LinearSystemSpec | DivisorClass) -> MultiIndex:
    """Indices of the n+1 largest multiplicities, ties broken by lowest index."""
    order = sorted(range(len(L.mults)), key=lambda i: (-L.mults[i], i))
    return tuple(sorted(i + 1 for i in order[: L.n + 1]))


def is_cremona_reduced(L: LinearSystemSpec) -> bool:
    if L.d < 0:
        raise ValueError("is_cremona_reduced needs d >= 0")
    return cremona_c(L, largest_pivot(L)) <= 0


@dataclass(frozen=True)
class Reduction:
    system: LinearSystemSpec
    steps: list[ReductionStep]
    empty: bool = False


def cremona_reduce(L: LinearSystemSpec, max_steps: int = 10_000) -> Reduction:
    """Apply Cremona maps at the n+1 largest points until c <= 0 or the degree goes negative.

    The degree drops by c >= 1 at every step, so the loop terminates; a
    negative degree means the system is empty.
    """
    L.require_system()
    steps: list[ReductionStep] = []
    cur = L
    for _ in range(max_steps):
        nxt = _cremona_step(cur, steps)
        if nxt is None:
            return Reduction(cur, steps)
        cur = nxt
        if cur.d < 0:
            return Reduction(cur, steps, empty=True)
    raise RuntimeError(f"cremona_reduce did not terminate in {max_steps} steps")


def cone_reduce(L: LinearSystemSpec) -> tuple[LinearSystemSpec, int]:
    """Drop every point of multiplicity d, lowering n by one per point.

    Elements of L_{n,d}(d, m_2, ...) are cones with vertex at the first point,
    so L and L_{n-1,d}(m_2, ...) have the same dimension.  For d = 0 nothing is
    removed (every zero-multiplicity point would qualify).
    """
    L.require_system()
    if L.d == 0:
        return L, 0
    keep = [m for m in L.mults if m != L.d]
    removed = len(L.mults) - len(keep)
    if removed == 0:
        return L, 0
    n = L.n - removed
    if n < 1:
        raise ValueError(f"cone reduction of {L} is degenerate (would reach n = {n})")
    return LinearSystemSpec(n, L.d, keep), removed


def _cremona_step(cur: LinearSystemSpec, steps: list[ReductionStep]) -> LinearSystemSpec | None:
    J = largest_pivot(cur)
    c = cremona_c(cur, J)
    if c <= 0:
        return None
    nxt = cremona_transform(cur, J)
    steps.append(ReductionStep("cremona", J, c, cur, nxt))
    if any(v < 0 for v in nxt.mults):
        clamped = clamp(nxt)
        steps.append(ReductionStep("clamp", None, None, nxt, clamped))
        nxt = clamped
    return nxt


def reduce_fully(L: LinearSystemSpec, max_steps: int = 10_000) -> Reduction:
    """Cone-reduce whenever some m_i = d, otherwise take one Cremona step; stop when neither applies."""
    L.require_system()
    steps: list[ReductionStep] = []
    cur = L
    for _ in range(max_steps):
        try:
            coned, k = cone_reduce(cur)
        except ValueError:
            k = 0
        if k:
            steps.append(ReductionStep("cone", k, None, cur, coned))
            cur = coned
            continue
        nxt = _cremona_step(cur, steps)
        if nxt is None:
            return Reduction(cur, steps)
        cur = nxt
        if cur.d < 0:
            return Reduction(cur, steps, empty=True)
    raise RuntimeError(f"reduce_fully did not terminate in {max_steps} steps")
