"""Dense linear algebra mod p: Gaussian elimination, rank, solving, nullspaces."""

from __future__ import annotations

import numpy as np


def _as_mat(M, p: int) -> np.ndarray:
    A = np.array(M, dtype=np.int64) % p
    if A.ndim != 2:
        raise ValueError("expected a 2-d matrix")
    return A


def row_echelon(M, p: int):
    """Reduced row echelon form.  Returns (R, pivot_cols)."""
    A = _as_mat(M, p)
    rows, cols = A.shape
    r = 0
    pivots: list[int] = []
    for c in range(cols):
        nz = np.flatnonzero(A[r:, c])
        if nz.size == 0:
            continue
        pr = r + int(nz[0])
        if pr != r:
            A[[r, pr]] = A[[pr, r]]
        inv = pow(int(A[r, c]), p - 2, p)
        A[r] = A[r] * inv % p
        factors = A[:, c].copy()
        factors[r] = 0
        if factors.any():
            A -= np.outer(factors, A[r])
            A %= p
        pivots.append(c)
        r += 1
        if r == rows:
            break
    return A, pivots


def rank(M, p: int) -> int:
    return len(row_echelon(M, p)[1])


def in_row_span(v, rows, p: int) -> bool:
    """Whether v lies in the row span of `rows` over F_p."""
    A = _as_mat(rows, p) if len(rows) else np.zeros((0, len(v)), dtype=np.int64)
    base = rank(A, p)
    aug = np.vstack([A, np.asarray(v, dtype=np.int64) % p])
    return rank(aug, p) == base


def solve(A, b, p: int):
    """One solution x of A x = b mod p, or None if inconsistent."""
    A = _as_mat(A, p)
    b = np.asarray(b, dtype=np.int64) % p
    rows, cols = A.shape
    R, pivots = row_echelon(np.hstack([A, b.reshape(-1, 1)]), p)
    if cols in pivots:
        return None
    x = np.zeros(cols, dtype=np.int64)
    for i, c in enumerate(pivots):
        x[c] = R[i, cols]
    return x


def nullspace(A, p: int) -> np.ndarray:
    """Basis of the right nullspace as rows of a (d x cols) matrix."""
    A = _as_mat(A, p)
    rows, cols = A.shape
    R, pivots = row_echelon(A, p)
    free = [c for c in range(cols) if c not in pivots]
    basis = np.zeros((len(free), cols), dtype=np.int64)
    for bi, f in enumerate(free):
        basis[bi, f] = 1
        for i, c in enumerate(pivots):
            basis[bi, c] = (-R[i, f]) % p
    return basis


def rank_factors(M, p: int):
    """CR decomposition M = C @ R mod p with C = pivot columns of M, R = rref rows."""
    A = _as_mat(M, p)
    R, pivots = row_echelon(A, p)
    r = len(pivots)
    C = A[:, pivots].copy()
    R = R[:r].copy()
    assert np.array_equal(C @ R % p, A)
    return C, R
