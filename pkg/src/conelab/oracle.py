"""Monte-Carlo interpolation oracle over F_p.

The n+3 points are drawn on the standard rational normal curve
u -> (1, u, ..., u^n).  A multiplicity-m condition at a point is the vanishing
of every Hasse derivative of order m-1 of the degree-d form there.

:func:`oracle_dim` first moves the n+1 points of largest multiplicity to the
coordinate points by the inverse Vandermonde matrix.  At a coordinate point
e_j, multiplicity m just kills the monomials with exponent a_j > d - m, so
those conditions become column deletions and only the remaining two points
contribute rows.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from math import comb
from typing import Iterable, Sequence

import numpy as np

from .core import JoinCycle, LinearSystemSpec
from .cremona import largest_pivot
from .modp import EchelonBasis, is_prime

DEFAULT_PRIME = 67_108_859  # largest prime below 2^26 usable by the float engine
DEFAULT_SEED = 20_240_917
PROBE_RETRIES = 5


class InconclusiveError(RuntimeError):
    """Samples kept disagreeing after the retry budget."""


@dataclass(frozen=True)
class OracleConfig:
    prime: int = DEFAULT_PRIME
    samples: int = 3
    seed: int = DEFAULT_SEED
    parallelism: int = 1

    def __post_init__(self) -> None:
        if self.samples < 1:
            raise ValueError("samples must be >= 1")
        if not is_prime(self.prime):
            raise ValueError(f"{self.prime} is not prime")

    @classmethod
    def from_env(cls, **overrides) -> OracleConfig:
        env = {
            "prime": os.environ.get("CONELAB_PRIME"),
            "samples": os.environ.get("CONELAB_SAMPLES"),
            "seed": os.environ.get("CONELAB_SEED"),
        }
        kw = {k: int(v) for k, v in env.items() if v is not None}
        kw.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**kw)

    def check(self, L: LinearSystemSpec) -> None:
        if self.prime <= max(L.d, max(L.mults, default=0)):
            raise ValueError(f"prime {self.prime} must exceed d and every m_i of {L}")


@dataclass(frozen=True)
class PointConfiguration:
    n: int
    prime: int
    parameters: tuple[int, ...]

    @property
    def points(self) -> list[tuple[int, ...]]:
        return [curve_point(u, self.n, self.prime) for u in self.parameters]


@dataclass(frozen=True)
class OracleResult:
    """``dim`` is the affine dimension; ``rank`` the rank of the full conditions matrix."""

    dim: int
    rank: int
    per_sample: list[tuple[int, int, int]] = field(default_factory=list)  # (prime, seed, rank)
    agreed: bool = True


def curve_point(u: int, n: int, p: int) -> tuple[int, ...]:
    return tuple(pow(u, i, p) for i in range(n + 1))


def _distinct(rng: np.random.Generator, count: int, p: int, avoid: Iterable[int] = ()) -> list[int]:
    if count + len(set(avoid)) > p:
        raise ValueError(f"cannot draw {count} distinct parameters in F_{p}")
    seen = set(avoid)
    out: list[int] = []
    while len(out) < count:
        u = int(rng.integers(0, p))
        if u not in seen:
            seen.add(u)
            out.append(u)
    return out


def sample_points(n: int, s: int, cfg: OracleConfig, seed: int | None = None) -> PointConfiguration:
    """s points on the standard rational normal curve with distinct random parameters."""
    rng = np.random.default_rng(cfg.seed if seed is None else seed)
    return PointConfiguration(n, cfg.prime, tuple(_distinct(rng, s, cfg.prime)))


# ---------------------------------------------------------------------------
# monomials and Hasse derivatives


def exponents(n: int, d: int, caps: Sequence[int] | None = None) -> np.ndarray:
    """Exponent vectors of degree-d monomials in n+1 variables, lexicographically descending.

    ``caps[j]`` bounds the j-th exponent (used for coordinate-point conditions).
    """
    caps = [d] * (n + 1) if caps is None else [min(c, d) for c in caps]
    if any(c < 0 for c in caps):
        return np.zeros((0, n + 1), dtype=np.int64)
    suffix = np.cumsum(caps[::-1])[::-1].tolist() + [0]
    out: list[tuple[int, ...]] = []
    cur = [0] * (n + 1)

    def rec(j: int, left: int) -> None:
        if j == n:
            if left <= caps[n]:
                cur[n] = left
                out.append(tuple(cur))
            return
        hi = min(caps[j], left)
        lo = max(0, left - suffix[j + 1])
        for a in range(hi, lo - 1, -1):
            cur[j] = a
            rec(j + 1, left - a)

    rec(0, d)
    return np.array(out, dtype=np.int64).reshape(-1, n + 1)


def _hasse_tables(q: Sequence[int], d: int, p: int, exact: bool) -> list[np.ndarray]:
    # T_j[a, b] = C(a, b) q_j^(a-b)
    tabs = []
    for qj in q:
        pw = [pow(int(qj), e, p) for e in range(d + 1)]
        T = [[comb(a, b) * pw[a - b] % p if b <= a else 0 for b in range(d + 1)] for a in range(d + 1)]
        tabs.append(np.array(T, dtype=object if exact else np.int64))
    return tabs


def hasse_rows(q: Sequence[int], order: int, cols: np.ndarray, p: int) -> np.ndarray:
    """Rows D^beta(x^alpha)(q) for all |beta| = order, restricted to monomials ``cols``.

    Rows that vanish identically on ``cols`` (some beta_j above every alpha_j)
    are skipped; they impose nothing.
    """
    n1 = len(q)
    if cols.shape[0] == 0 or order < 0:
        return np.zeros((0, cols.shape[0]), dtype=np.int64)
    d = int(cols.sum(axis=1).max())
    if order > d:
        return np.zeros((0, cols.shape[0]), dtype=np.int64)
    caps = cols.max(axis=0).tolist()
    betas = exponents(n1 - 1, order, caps)
    exact = p >= (1 << 31)
    tabs = _hasse_tables(q, d, p, exact)
    M = np.ones((betas.shape[0], cols.shape[0]), dtype=object if exact else np.int64)
    for j in range(n1):
        M = M * tabs[j][cols[:, j][None, :], betas[:, j][:, None]] % p
    return M


def conditions_matrix(
    L: LinearSystemSpec,
    pts: PointConfiguration,
    extra: Sequence[tuple[Sequence[int], int]] = (),
) -> np.ndarray:
    """Full interpolation matrix: one column per degree-d monomial, Hasse rows per point.

    A point of multiplicity m contributes the C(n+m-1, n) derivatives of order
    m-1 (order d when m > d, which forces the zero form).  ``extra`` holds
    (point, order) pairs appended at the bottom.
    """
    L.require_system()
    p = pts.prime
    if p <= max(L.d, max(L.mults, default=0)):
        raise ValueError(f"prime {p} too small for derivative orders of {L}")
    cols = exponents(L.n, L.d)
    blocks = []
    for pt, m in zip(pts.points, L.mults):
        if m > 0:
            blocks.append(_all_rows(pt, min(m - 1, L.d), cols, p))
    for pt, order in extra:
        blocks.append(_all_rows(pt, order, cols, p))
    if not blocks:
        return np.zeros((0, cols.shape[0]), dtype=np.int64)
    return np.concatenate(blocks, axis=0)


def _all_rows(q: Sequence[int], order: int, cols: np.ndarray, p: int) -> np.ndarray:
    # unlike hasse_rows, keep identically-zero rows so the row count is C(n+order, n)
    n1 = len(q)
    d = int(cols.sum(axis=1).max())
    betas = exponents(n1 - 1, order)
    exact = p >= (1 << 31)
    tabs = _hasse_tables(q, max(d, order), p, exact)
    M = np.ones((betas.shape[0], cols.shape[0]), dtype=object if exact else np.int64)
    for j in range(n1):
        M = M * tabs[j][cols[:, j][None, :], betas[:, j][:, None]] % p
    return M


# ---------------------------------------------------------------------------
# reduced frame


def _solve_mod(V: list[list[int]], b: Sequence[int], p: int) -> list[int]:
    """Solve V x = b over F_p by Gauss-Jordan on Python integers."""
    k = len(V)
    A = [list(row) + [int(bi)] for row, bi in zip(V, b)]
    for c in range(k):
        piv = next(i for i in range(c, k) if A[i][c] % p)
        A[c], A[piv] = A[piv], A[c]
        inv = pow(A[c][c], p - 2, p)
        A[c] = [v * inv % p for v in A[c]]
        for i in range(k):
            if i != c and A[i][c]:
                f = A[i][c]
                A[i] = [(vi - f * vc) % p for vi, vc in zip(A[i], A[c])]
    return [A[i][k] for i in range(k)]


@dataclass
class _Frame:
    """One sample: points, change of frame, retained monomials and echelon basis of the conditions."""

    L: LinearSystemSpec
    p: int
    seed: int
    params: list[int]
    V: list[list[int]]
    cols: np.ndarray
    basis: object
    full_cols: int

    @property
    def dim(self) -> int:
        return self.cols.shape[0] - self.basis.rank

    def to_frame(self, x: Sequence[int]) -> list[int]:
        return _solve_mod(self.V, x, self.p)

    def rank_increase(self, q: Sequence[int], order: int) -> int:
        rows = hasse_rows(self.to_frame(q), order, self.cols, self.p)
        if rows.shape[0] == 0:
            return 0
        return self.basis.rank_increase(rows)


def _build_frame(L: LinearSystemSpec, p: int, seed: int) -> _Frame:
    n, d = L.n, L.d
    rng = np.random.default_rng(seed)
    params = _distinct(rng, n + 3, p)
    J = [j - 1 for j in largest_pivot(L)]
    # columns of V are the points moved to e_0, ..., e_n
    V = [[pow(params[j], i, p) for j in J] for i in range(n + 1)]
    caps = [d - L.mults[j] for j in J]
    cols = exponents(n, d, caps)
    basis = EchelonBasis(cols.shape[0], p)
    frame = _Frame(L, p, seed, params, V, cols, basis, comb(n + d, n))
    if cols.shape[0] == 0:
        return frame
    for i in range(n + 3):
        if i in J or L.mults[i] <= 0:
            continue
        q = curve_point(params[i], n, p)
        rows = hasse_rows(frame.to_frame(q), min(L.mults[i] - 1, d), cols, p)
        if rows.shape[0]:
            basis.extend(rows)
    return frame


def _sample_seeds(cfg: OracleConfig, count: int, offset: int = 0) -> list[int]:
    return [cfg.seed + offset + k for k in range(count)]


def _frames(L: LinearSystemSpec, cfg: OracleConfig, seeds: list[int]) -> list[_Frame]:
    if cfg.parallelism > 1 and len(seeds) > 1:
        with ThreadPoolExecutor(max_workers=cfg.parallelism) as pool:
            return list(pool.map(lambda s: _build_frame(L, cfg.prime, s), seeds))
    return [_build_frame(L, cfg.prime, s) for s in seeds]


def oracle_dim(L: LinearSystemSpec, cfg: OracleConfig | None = None) -> OracleResult:
    """Dimension of L at random points on the curve: minimum over the samples.

    Special points can only raise the dimension, so the minimum is the best
    available upper bound for the general value, and a single zero proves
    emptiness.
    """
    cfg = cfg or OracleConfig()
    L.require_system()
    cfg.check(L)
    frames = _frames(L, cfg, _sample_seeds(cfg, cfg.samples))
    dims = [f.dim for f in frames]
    full = comb(L.n + L.d, L.n)
    per = [(cfg.prime, f.seed, full - f.dim) for f in frames]
    dim = min(dims)
    return OracleResult(dim=dim, rank=full - dim, per_sample=per, agreed=len(set(dims)) == 1)


def is_effective_oracle(L: LinearSystemSpec, cfg: OracleConfig | None = None) -> bool:
    return oracle_dim(L, cfg).dim >= 1


# ---------------------------------------------------------------------------
# containment multiplicities


def general_point_on(cycle: JoinCycle, params: Sequence[int], n: int, p: int, rng: np.random.Generator) -> list[int]:
    """A random point of J(L_I, sigma_t): a combination of the points in I and t fresh curve points."""
    if cycle.t < 0:
        raise ValueError("probe needs t >= 0")
    if cycle.r > n - 1:
        raise ValueError(f"{cycle.label()} has dimension {cycle.r} > n-1 = {n - 1}")
    if cycle.r < 0:
        raise ValueError("the empty cycle has no points")
    fresh = _distinct(rng, cycle.t, p, avoid=params)
    gens = [curve_point(params[i - 1], n, p) for i in cycle.I] + [curve_point(v, n, p) for v in fresh]
    coef = [int(c) for c in rng.integers(1, p, size=len(gens))]
    return [sum(c * g[i] for c, g in zip(coef, gens)) % p for i in range(n + 1)]


def _probe_frame(frame: _Frame, cycle: JoinCycle, rng: np.random.Generator) -> int:
    if frame.dim == 0:
        raise ValueError(f"{frame.L} is empty at sample seed {frame.seed}; multiplicities are undefined")
    q = general_point_on(cycle, frame.params, frame.L.n, frame.p, rng)
    k = 0
    # every member vanishes to order >= k+1 at q iff the order-k Hasse rows add no rank
    while k < frame.L.d and frame.rank_increase(q, k) == 0:
        k += 1
    return k


def multiplicity_probes(
    L: LinearSystemSpec,
    cycles: Sequence[JoinCycle],
    cfg: OracleConfig | None = None,
) -> dict[JoinCycle, int]:
    """Measured multiplicity of each cycle in the base locus of L.

    Each sample probes a fresh general point of every cycle.  If the samples
    disagree, a new batch is drawn, up to a fixed number of retries.
    """
    cfg = cfg or OracleConfig()
    L.require_system()
    cfg.check(L)
    for attempt in range(PROBE_RETRIES + 1):
        seeds = _sample_seeds(cfg, cfg.samples, offset=attempt * cfg.samples)
        frames = _frames(L, cfg, seeds)
        values: dict[JoinCycle, set[int]] = {c: set() for c in cycles}
        for f in frames:
            rng = np.random.default_rng([f.seed, 1])
            for c in cycles:
                values[c].add(_probe_frame(f, c, rng))
        if all(len(v) == 1 for v in values.values()):
            return {c: v.pop() for c, v in values.items()}
    raise InconclusiveError(f"probe samples for {L} disagreed after {PROBE_RETRIES} retries: {values}")


def multiplicity_probe(L: LinearSystemSpec, cycle: JoinCycle, cfg: OracleConfig | None = None) -> int:
    return multiplicity_probes(L, [cycle], cfg)[cycle]
