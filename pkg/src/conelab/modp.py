"""Exact rank over F_p.

Primes below 2^26 use a blocked elimination on float64 arrays: products of two
residues are exact in a double, and matrix products go through BLAS after
splitting one factor into limbs small enough that every dot product stays
below 2^53.  Larger primes fall back to row reduction on Python integers.
"""

from __future__ import annotations

from math import ceil, log2

import numpy as np

FLOAT_PRIME_LIMIT = 1 << 26
PANEL = 256


def is_prime(p: int) -> bool:
    """Deterministic Miller-Rabin for p < 3.3e24."""
    if p < 2:
        return False
    small = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)
    for q in small:
        if p % q == 0:
            return p == q
    d, s = p - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in small:
        x = pow(a, d, p)
        if x in (1, p - 1):
            continue
        for _ in range(s - 1):
            x = x * x % p
            if x == p - 1:
                break
        else:
            return False
    return True


class FloatField:
    """Vectorised arithmetic mod p on float64 arrays holding residues in [0, p)."""

    def __init__(self, p: int):
        if p >= FLOAT_PRIME_LIMIT:
            raise ValueError(f"float path needs p < 2^26, got {p}")
        self.p = p
        self.pf = float(p)
        self.pinv = 1.0 / p

    def mod(self, x: np.ndarray) -> np.ndarray:
        # valid for |x| < 2^53; floor(x/p) is off by at most one
        q = x * self.pinv
        np.floor(q, out=q)
        q *= self.pf
        r = x - q
        np.add(r, self.pf, out=r, where=r < 0)
        np.subtract(r, self.pf, out=r, where=r >= self.pf)
        return r

    def sub(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """(a - b) mod p for residues a, b."""
        r = a - b
        np.add(r, self.pf, out=r, where=r < 0)
        return r

    def _limb_bits(self, K: int) -> int:
        bound = float(K) * (self.p - 1)
        return min(int(53 - ceil(log2(bound + 1))), 27)

    def matmul(self, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
        K = X.shape[1]
        if K == 0:
            return np.zeros((X.shape[0], Y.shape[1]))
        L = self._limb_bits(K)
        if L < 4:
            # split the inner dimension so each partial product fits
            step = max(1, int(2 ** (49 - self.p.bit_length())))
            out = np.zeros((X.shape[0], Y.shape[1]))
            for k0 in range(0, K, step):
                out = self.mod(out + self.matmul(X[:, k0:k0 + step], Y[k0:k0 + step]))
            return out
        nlimbs = ceil(self.p.bit_length() / L)
        scale = float(1 << L)
        limbs = []
        rest = Y
        for _ in range(nlimbs - 1):
            hi = np.floor(rest * (1.0 / scale))
            limbs.append(rest - hi * scale)
            rest = hi
        limbs.append(rest)
        out = self.mod(X @ limbs[-1])
        for limb in reversed(limbs[:-1]):
            out = self.mod(out * scale + self.mod(X @ limb))
        return out

    def inv(self, x: float) -> float:
        return float(pow(int(x), self.p - 2, self.p))

    def _pivots_small(self, P: np.ndarray) -> tuple[list[int], list[int]]:
        P = P.copy()
        m, b = P.shape
        rows = np.arange(m)
        pr: list[int] = []
        pc: list[int] = []
        r = 0
        for c in range(b):
            if r == m:
                break
            nz = np.flatnonzero(P[r:, c])
            if nz.size == 0:
                continue
            i = r + int(nz[0])
            if i != r:
                P[[r, i]] = P[[i, r]]
                rows[[r, i]] = rows[[i, r]]
            P[r, c:] = self.mod(P[r, c:] * self.inv(P[r, c]))
            if r + 1 < m:
                f = P[r + 1:, c:c + 1]
                P[r + 1:, c:] = self.sub(P[r + 1:, c:], self.mod(f * P[r, c:]))
            pr.append(int(rows[r]))
            pc.append(c)
            r += 1
        return pr, pc

    def invmat(self, B: np.ndarray) -> np.ndarray:
        k = B.shape[0]
        A = np.concatenate([B, np.eye(k)], axis=1)
        for c in range(k):
            i = c + int(np.flatnonzero(A[c:, c])[0])
            if i != c:
                A[[c, i]] = A[[i, c]]
            A[c] = self.mod(A[c] * self.inv(A[c, c]))
            f = A[:, c:c + 1].copy()
            f[c] = 0
            A = self.sub(A, self.mod(f * A[c]))
        return A[:, k:]

    def _base_pivots(self, P: np.ndarray) -> tuple[list[int], list[int], np.ndarray]:
        # elementwise search on a few candidate rows; rows whose residual is
        # non-zero are added until the pivot set is maximal
        m, w = P.shape
        cand = list(range(min(m, 2 * w)))
        while True:
            pr, pc = self._pivots_small(P[cand])
            pr = [cand[i] for i in pr]
            Binv = self.invmat(P[np.ix_(pr, pc)]) if pr else np.zeros((0, 0))
            if len(pr) == w:
                return pr, pc, Binv
            others = np.setdiff1d(np.arange(m), cand)
            if others.size == 0:
                return pr, pc, Binv
            if pr:
                Y = self.matmul(P[np.ix_(others, pc)], Binv)
                res = self.sub(P[others], self.matmul(Y, P[pr]))
            else:
                res = P[others]
            bad = others[np.any(res != 0, axis=1)]
            if bad.size == 0:
                return pr, pc, Binv
            cand = cand + [int(i) for i in bad[:w]]

    def panel_pivots(self, P: np.ndarray, base: int = 32) -> tuple[list[int], list[int], np.ndarray]:
        """Pivot rows, pivot columns and the inverse of P[rows][:, cols].

        The columns are split in halves: pivots of the left half are found
        first, the rest of the rows are reduced against them, and the right
        half of that Schur complement is searched.  The inverse is assembled
        from the two halves by the block formula, so all heavy work is matmul.
        """
        m, w = P.shape
        if m == 0:
            return [], [], np.zeros((0, 0))
        if w <= base:
            return self._base_pivots(P)
        h = w // 2
        pr1, pc1, B1inv = self.panel_pivots(P[:, :h], base)
        if not pr1:
            pr2, pc2, Sinv = self.panel_pivots(P[:, h:], base)
            return pr2, [h + c for c in pc2], Sinv
        mask = np.ones(m, dtype=bool)
        mask[pr1] = False
        others = np.flatnonzero(mask)
        if others.size == 0:
            return pr1, pc1, B1inv
        Z = self.matmul(P[np.ix_(others, pc1)], B1inv)
        top = P[pr1][:, h:]
        S = self.sub(P[others][:, h:], self.matmul(Z, top))
        pr2, pc2, Sinv = self.panel_pivots(S, base)
        if not pr2:
            return pr1, pc1, B1inv
        # X = B11^-1 B12, Z2 = B21 B11^-1
        X = self.matmul(B1inv, top[:, pc2])
        Z2 = Z[pr2]
        XS = self.matmul(X, Sinv)
        k1, k2 = len(pr1), len(pr2)
        Binv = np.empty((k1 + k2, k1 + k2))
        Binv[:k1, :k1] = self.mod(B1inv + self.matmul(XS, Z2))
        Binv[:k1, k1:] = self.sub(np.zeros_like(XS), XS)
        Binv[k1:, :k1] = self.sub(np.zeros((k2, k1)), self.matmul(Sinv, Z2))
        Binv[k1:, k1:] = Sinv
        return pr1 + [int(others[i]) for i in pr2], pc1 + [h + c for c in pc2], Binv


class FloatEchelon:
    """Row echelon data for a growing set of rows, stored as pivot panels."""

    def __init__(self, ncols: int, p: int, panel: int = PANEL):
        self.F = FloatField(p)
        self.ncols = ncols
        self.panel = panel
        self.panels: list[tuple[np.ndarray, np.ndarray, int, np.ndarray]] = []
        self.rank = 0

    def _as_array(self, rows) -> np.ndarray:
        A = np.asarray(rows)
        if A.ndim != 2 or A.shape[1] != self.ncols:
            raise ValueError(f"expected a matrix with {self.ncols} columns, got shape {A.shape}")
        if A.dtype == np.float64:
            return self.F.mod(A.copy())
        if A.dtype == object:
            return (A % self.F.p).astype(np.float64)
        return np.mod(A.astype(np.int64), self.F.p).astype(np.float64)

    def reduce(self, rows) -> np.ndarray:
        """Residual of ``rows`` after eliminating every stored pivot column."""
        E = self._as_array(rows)
        F = self.F
        for pcols, Binv, start, P in self.panels:
            if E.shape[0] == 0:
                break
            Y = F.matmul(E[:, pcols], Binv)
            E[:, start:] = F.sub(E[:, start:], F.matmul(Y, P))
        return E

    def _echelonize(self, A: np.ndarray) -> list[tuple[np.ndarray, np.ndarray, int, np.ndarray]]:
        """Panels (pivot columns, inverse pivot block, first column, pivot rows from that column on).

        Works on the trailing block only: after a panel is eliminated its
        columns are zero in every remaining row and are dropped.
        """
        F = self.F
        out = []
        A = A[np.any(A != 0, axis=1)]
        live = np.flatnonzero(np.any(A != 0, axis=0))
        if live.size == 0:
            return out
        A = A[:, live]
        off = 0
        while A.shape[0] > 0 and A.shape[1] > 0:
            b = min(self.panel, A.shape[1])
            pr, pc, Binv = F.panel_pivots(A[:, :b])
            if pr:
                start = int(live[off])
                P = np.zeros((len(pr), self.ncols - start))
                P[:, live[off:] - start] = A[pr]
                out.append((live[off + np.asarray(pc)], Binv, start, P))
                keep = np.ones(A.shape[0], dtype=bool)
                keep[pr] = False
                idx = np.flatnonzero(keep)
                if idx.size:
                    Y = F.matmul(A[np.ix_(idx, pc)], Binv)
                    A = F.sub(A[idx, b:], F.matmul(Y, A[pr, b:]))
                    A = A[np.any(A != 0, axis=1)]
                else:
                    A = A[:0, b:]
            else:
                A = A[:, b:]
            off += b
        return out

    def extend(self, rows, chunk: int | None = None) -> int:
        """Add rows; returns the rank increase."""
        A = np.asarray(rows)
        chunk = chunk or max(512, int(6e7 // max(self.ncols, 1)))
        before = self.rank
        for r0 in range(0, A.shape[0], chunk):
            E = self.reduce(A[r0:r0 + chunk])
            for pan in self._echelonize(E):
                self.panels.append(pan)
                self.rank += len(pan[0])
        return self.rank - before

    def rank_increase(self, rows) -> int:
        E = self.reduce(rows)
        return sum(len(pan[0]) for pan in self._echelonize(E))


class ObjectEchelon:
    """Same interface as :class:`FloatEchelon` using exact Python integers (any prime)."""

    def __init__(self, ncols: int, p: int):
        self.p = p
        self.ncols = ncols
        self.pivots: list[tuple[int, np.ndarray]] = []  # (column, row normalised to 1 there)
        self.rank = 0

    def _as_array(self, rows) -> np.ndarray:
        A = np.array([[int(v) % self.p for v in row] for row in rows], dtype=object).reshape(-1, self.ncols)
        return A

    def _reduce_rows(self, A: np.ndarray) -> np.ndarray:
        p = self.p
        for c, P in self.pivots:
            f = A[:, c].copy()
            nz = np.flatnonzero(f)
            if nz.size:
                A[nz] = (A[nz] - np.outer(f[nz], P)) % p
        return A

    def reduce(self, rows) -> np.ndarray:
        return self._reduce_rows(self._as_array(rows))

    def _echelonize(self, A: np.ndarray) -> list[tuple[int, np.ndarray]]:
        p = self.p
        out = []
        A = A.copy()
        for c in range(self.ncols):
            nz = np.flatnonzero(A[:, c])
            if nz.size == 0:
                continue
            i = nz[0]
            row = A[i] * pow(int(A[i, c]), p - 2, p) % p
            A = np.delete(A, i, axis=0)
            f = A[:, c].copy()
            nzf = np.flatnonzero(f)
            if nzf.size:
                A[nzf] = (A[nzf] - np.outer(f[nzf], row)) % p
            out.append((c, row))
            if A.shape[0] == 0:
                break
        return out

    def extend(self, rows, chunk: int = 2048) -> int:
        before = self.rank
        E = self.reduce(rows)
        new = self._echelonize(E)
        self.pivots.extend(new)
        self.rank += len(new)
        return self.rank - before

    def rank_increase(self, rows) -> int:
        return len(self._echelonize(self.reduce(rows)))


def EchelonBasis(ncols: int, p: int, panel: int = PANEL):
    """Incremental echelon form; picks the float engine when p < 2^26."""
    if not is_prime(p):
        raise ValueError(f"modulus {p} is not prime")
    if p < FLOAT_PRIME_LIMIT:
        return FloatEchelon(ncols, p, panel)
    return ObjectEchelon(ncols, p)


def rank_mod_p(matrix, p: int) -> int:
    """Exact rank of an integer matrix over F_p."""
    A = np.asarray(matrix)
    if A.ndim != 2:
        raise ValueError("rank_mod_p expects a 2-d matrix")
    if A.size == 0:
        return 0
    basis = EchelonBasis(A.shape[1], p)
    basis.extend(A)
    return basis.rank
