"""Small exact linear algebra over Fractions."""
from __future__ import annotations

from fractions import Fraction


def solve(a: list[list[Fraction]], b: list[list[Fraction]]) -> list[list[Fraction]]:
    """Solve ``a x = b`` for a square non-singular ``a`` and several right-hand sides.

    Plain Gauss-Jordan elimination with exact pivoting on the first non-zero
    entry; sizes here are a few hundred at most.
    """
    n = len(a)
    if n == 0:
        return []
    width = len(b[0]) if b else 0
    m = [list(map(Fraction, row)) + list(map(Fraction, rhs)) for row, rhs in zip(a, b)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if m[r][col] != 0), None)
        if pivot is None:
            raise ZeroDivisionError("singular system")
        m[col], m[pivot] = m[pivot], m[col]
        inv = 1 / m[col][col]
        row = [x * inv for x in m[col]]
        m[col] = row
        for r in range(n):
            if r != col and m[r][col] != 0:
                f = m[r][col]
                m[r] = [x - f * y for x, y in zip(m[r], row)]
    return [m[r][n:n + width] for r in range(n)]
