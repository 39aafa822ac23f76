"""
Exact Gaussian elimination over an arbitrary field.

Matrices are held as numpy object arrays so that entries may be Fractions,
prime-field elements or elements of a sympy fraction field alike.
"""
import logging
from typing import List, Optional, Sequence, Tuple

import numpy as np

from app.utils.errors import DivisionByZero

logger = logging.getLogger(__name__)


def as_object_array(matrix) -> np.ndarray:
    arr = np.empty((len(matrix), len(matrix[0]) if len(matrix) else 0), dtype=object)
    for i, row in enumerate(matrix):
        for j, value in enumerate(row):
            arr[i, j] = value
    return arr


def row_reduce(matrix, pivot_columns: Optional[Sequence[int]] = None) -> Tuple[np.ndarray, List[int]]:
    """Reduced row echelon form and the pivot columns, in the order tried.

    `pivot_columns` fixes the order in which columns are tried as pivots;
    by default left to right.
    """
    A = as_object_array(matrix) if not isinstance(matrix, np.ndarray) else matrix.copy()
    m, n = A.shape
    order = list(range(n)) if pivot_columns is None else list(pivot_columns)
    pivots: List[int] = []
    r = 0
    for c in order:
        if r == m:
            break
        pivot = None
        for i in range(r, m):
            if A[i, c]:
                pivot = i
                break
        if pivot is None:
            continue
        if pivot != r:
            A[[r, pivot], :] = A[[pivot, r], :]
        inv = 1 / A[r, c]
        A[r, :] = A[r, :] * inv
        for i in range(m):
            if i != r and A[i, c]:
                A[i, :] = A[i, :] - A[r, :] * A[i, c]
        pivots.append(c)
        r += 1
    return A, pivots


def rank(matrix) -> int:
    if len(matrix) == 0:
        return 0
    _, pivots = row_reduce(matrix)
    return len(pivots)


def det(matrix, one=1):
    """Determinant by elimination (field entries)."""
    A = as_object_array(matrix)
    n = A.shape[0]
    result = one
    for c in range(n):
        pivot = None
        for i in range(c, n):
            if A[i, c]:
                pivot = i
                break
        if pivot is None:
            return result * 0
        if pivot != c:
            A[[c, pivot], :] = A[[pivot, c], :]
            result = -result
        result = result * A[c, c]
        inv = 1 / A[c, c]
        for i in range(c + 1, n):
            if A[i, c]:
                A[i, :] = A[i, :] - A[c, :] * (A[i, c] * inv)
    return result


def solve(matrix, rhs: Sequence, one=1) -> List:
    """Solve M x = rhs for square invertible M."""
    n = len(matrix)
    augmented = [list(row) + [rhs[i]] for i, row in enumerate(matrix)]
    R, pivots = row_reduce(augmented, pivot_columns=range(n))
    if len(pivots) < n:
        raise DivisionByZero("singular linear system", witness=f"rank {len(pivots)} < {n}")
    return [R[i, n] for i in range(n)]


def inverse(matrix, one=1, zero=0) -> List[List]:
    n = len(matrix)
    augmented = [list(row) + [one if i == j else zero for j in range(n)]
                 for i, row in enumerate(matrix)]
    R, pivots = row_reduce(augmented, pivot_columns=range(n))
    if len(pivots) < n:
        raise DivisionByZero("singular matrix", witness=f"rank {len(pivots)} < {n}")
    return [[R[i, n + j] for j in range(n)] for i in range(n)]


def matmul(A: Sequence[Sequence], B: Sequence[Sequence], zero=0) -> List[List]:
    n, k, m = len(A), len(B), len(B[0]) if B else 0
    out = []
    for i in range(n):
        row = []
        for j in range(m):
            acc = zero
            for t in range(k):
                a = A[i][t]
                if a:
                    b = B[t][j]
                    if b:
                        acc = acc + a * b
            row.append(acc)
        out.append(row)
    return out
