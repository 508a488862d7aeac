"""Exact integer linear algebra: Smith form, lattices, quotients.

Everything here works over Z with arbitrary-precision ints.  Matrices
are plain lists of row lists.  The Smith normal form keeps both
unimodular transforms so that membership tests come with witnesses and
quotient groups come with their invariant factors.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

Matrix = List[List[int]]


def _identity(n: int) -> Matrix:
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def _mat_vec(a: Sequence[Sequence[int]], x: Sequence[int]) -> List[int]:
    return [sum(r[j] * x[j] for j in range(len(x))) for r in a]


@dataclass
class SmithForm:
    """U * A * V = S with U, V unimodular and S in Smith normal form."""

    s: Matrix
    u: Matrix
    v: Matrix
    rank: int

    def diagonal(self) -> List[int]:
        m = len(self.s)
        n = len(self.s[0]) if m else 0
        return [self.s[i][i] for i in range(min(m, n))]


def smith_normal_form(a: Sequence[Sequence[int]]) -> SmithForm:
    """Diagonalize over Z with divisibility d1 | d2 | ... and d_i >= 0.

    Classical pivoting: pull the least nonzero entry to the corner,
    kill its row and column by division steps, then absorb any entry
    the corner fails to divide and repeat.
    """
    m = len(a)
    n = len(a[0]) if m else 0
    s = [list(row) for row in a]
    u = _identity(m)
    v = _identity(n)

    def swap_rows(i, j):
        s[i], s[j] = s[j], s[i]
        u[i], u[j] = u[j], u[i]

    def swap_cols(i, j):
        for row in s:
            row[i], row[j] = row[j], row[i]
        for row in v:
            row[i], row[j] = row[j], row[i]

    def add_row(src, dst, c):  # row dst += c * row src
        s[dst] = [x + c * y for x, y in zip(s[dst], s[src])]
        u[dst] = [x + c * y for x, y in zip(u[dst], u[src])]

    def add_col(src, dst, c):
        for row in s:
            row[dst] += c * row[src]
        for row in v:
            row[dst] += c * row[src]

    def negate_row(i):
        s[i] = [-x for x in s[i]]
        u[i] = [-x for x in u[i]]

    k = 0
    while k < min(m, n):
        # Locate the least nonzero entry of the trailing block.
        pivot = None
        for i in range(k, m):
            for j in range(k, n):
                if s[i][j] != 0 and (pivot is None or abs(s[i][j]) < abs(s[pivot[0]][pivot[1]])):
                    pivot = (i, j)
        if pivot is None:
            break
        swap_rows(k, pivot[0])
        swap_cols(k, pivot[1])
        while True:
            # Reduce the pivot column, then the pivot row.
            dirty = False
            for i in range(k + 1, m):
                if s[i][k] != 0:
                    q = s[i][k] // s[k][k]
                    add_row(k, i, -q)
                    if s[i][k] != 0:  # remainder smaller than pivot
                        swap_rows(k, i)
                        dirty = True
            for j in range(k + 1, n):
                if s[k][j] != 0:
                    q = s[k][j] // s[k][k]
                    add_col(k, j, -q)
                    if s[k][j] != 0:
                        swap_cols(k, j)
                        dirty = True
            if not dirty:
                break
        if s[k][k] < 0:
            negate_row(k)
        # Divisibility: the corner must divide the whole trailing block.
        fixed = True
        for i in range(k + 1, m):
            if any(x % s[k][k] for x in s[i][k + 1 :]):
                add_row(i, k, 1)
                fixed = False
                break
        if fixed:
            k += 1
    rank = sum(1 for i in range(min(m, n)) if s[i][i] != 0)
    return SmithForm(s, u, v, rank)


def solve_integer(
    a: Sequence[Sequence[int]], b: Sequence[int]
) -> Optional[List[int]]:
    """An integer x with A x = b, or None when b is outside the lattice."""
    m = len(a)
    n = len(a[0]) if m else 0
    if m == 0:
        return [0] * n if not any(b) else None
    if n == 0:
        return [] if not any(b) else None
    sf = smith_normal_form(a)
    c = _mat_vec(sf.u, list(b))
    y = [0] * n
    for i in range(m):
        d = sf.s[i][i] if i < min(m, n) else 0
        if d == 0:
            if c[i] != 0:
                return None
        else:
            if c[i] % d:
                return None
            y[i] = c[i] // d
    # x = V y
    return _mat_vec(sf.v, y)


def kernel_basis(a: Sequence[Sequence[int]]) -> List[List[int]]:
    """Basis of the integer kernel, as column vectors."""
    m = len(a)
    n = len(a[0]) if m else 0
    if n == 0:
        return []
    if m == 0:
        return [[1 if i == j else 0 for i in range(n)] for j in range(n)]
    sf = smith_normal_form(a)
    out = []
    for j in range(n):
        d = sf.s[j][j] if j < min(m, n) else 0
        if d == 0:
            out.append([sf.v[i][j] for i in range(n)])
    return out


def cokernel_invariants(
    a: Sequence[Sequence[int]],
) -> Tuple[int, List[int]]:
    """Z^m / column span of A: (free rank, torsion factors > 1)."""
    m = len(a)
    if m == 0:
        return (0, [])
    sf = smith_normal_form(a)
    diag = [d for d in sf.diagonal() if d != 0]
    free = m - len(diag)
    torsion = [d for d in diag if d > 1]
    return (free, torsion)


class Lattice:
    """Integer span of a fixed generator family inside Z^dim.

    Supports membership with witness coefficients, the quotient's
    invariant factors, and membership of a vector modulo doubling,
    which is how half-integer cochain classes are compared.
    """

    def __init__(self, generators: Sequence[Sequence[int]], dim: int):
        self.dim = dim
        self.generators = [list(g) for g in generators]
        for g in self.generators:
            if len(g) != dim:
                raise ValueError(f"generator length {len(g)} != dim {dim}")
        # Columns are generators: membership of b is solvability of A x = b.
        self._a: Matrix = [
            [g[i] for g in self.generators] for i in range(dim)
        ]

    def coefficients_for(self, vec: Sequence[int]) -> Optional[List[int]]:
        """Integer combination of the generators equal to vec, or None."""
        if len(vec) != self.dim:
            raise ValueError(f"vector length {len(vec)} != dim {self.dim}")
        if not self.generators:
            return [] if not any(vec) else None
        return solve_integer(self._a, vec)

    def contains(self, vec: Sequence[int]) -> bool:
        return self.coefficients_for(vec) is not None

    def quotient_invariants(self) -> Tuple[int, List[int]]:
        """Z^dim / lattice as (free rank, torsion invariant factors)."""
        if not self.generators:
            return (self.dim, [])
        return cokernel_invariants(self._a)

    def same_class(self, x: Sequence[int], y: Sequence[int]) -> bool:
        return self.contains([a - b for a, b in zip(x, y)])
