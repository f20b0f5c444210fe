"""Exact integer and rational linear algebra.

Everything here runs on Python bigints / Fractions: no floating point, no
overflow, deterministic output.  Matrices are tuples of row tuples.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd


def _as_rows(mat):
    return [list(row) for row in mat]


def row_hermite(mat):
    """Row Hermite normal form with transform.

    Returns (H, T) with T unimodular, T @ mat == H, H in row echelon form
    with positive pivots and reduced entries above each pivot.
    """
    rows = _as_rows(mat)
    m = len(rows)
    n = len(rows[0]) if m else 0
    trans = [[1 if i == j else 0 for j in range(m)] for i in range(m)]

    def row_op(i, j, q):
        # rows[i] -= q * rows[j]
        ri, rj = rows[i], rows[j]
        for k in range(n):
            ri[k] -= q * rj[k]
        ti, tj = trans[i], trans[j]
        for k in range(m):
            ti[k] -= q * tj[k]

    def swap(i, j):
        rows[i], rows[j] = rows[j], rows[i]
        trans[i], trans[j] = trans[j], trans[i]

    pivot_row = 0
    pivot_cols = []
    for col in range(n):
        # Euclidean reduction in this column below pivot_row.
        while True:
            nz = [i for i in range(pivot_row, m) if rows[i][col] != 0]
            if not nz:
                break
            i_min = min(nz, key=lambda i: abs(rows[i][col]))
            swap(pivot_row, i_min)
            done = True
            for i in range(pivot_row + 1, m):
                if rows[i][col] != 0:
                    q = rows[i][col] // rows[pivot_row][col]
                    row_op(i, pivot_row, q)
                    if rows[i][col] != 0:
                        done = False
            if done:
                break
        if pivot_row < m and rows[pivot_row][col] != 0:
            if rows[pivot_row][col] < 0:
                rows[pivot_row] = [-x for x in rows[pivot_row]]
                trans[pivot_row] = [-x for x in trans[pivot_row]]
            # Reduce entries above the pivot.
            p = rows[pivot_row][col]
            for i in range(pivot_row):
                if rows[i][col] != 0:
                    q = rows[i][col] // p
                    row_op(i, pivot_row, q)
            pivot_cols.append(col)
            pivot_row += 1
            if pivot_row == m:
                break
    H = tuple(tuple(r) for r in rows)
    T = tuple(tuple(r) for r in trans)
    return H, T, tuple(pivot_cols)


def kernel_basis(mat):
    """Basis of the integer kernel {x : mat @ x == 0} of an m x n matrix.

    Returned as a tuple of length-n integer vectors (possibly empty).
    """
    mat = [tuple(row) for row in mat]
    m = len(mat)
    if m == 0:
        return ()
    n = len(mat[0])
    if n == 0:
        return ()
    # Row-reduce the transpose; zero rows of H correspond to kernel vectors.
    transpose = [tuple(mat[i][j] for i in range(m)) for j in range(n)]
    H, T, _ = row_hermite(transpose)
    basis = []
    for i in range(n):
        if all(x == 0 for x in H[i]):
            basis.append(T[i])
    return tuple(basis)


def solve_integer(mat, target):
    """One integer solution x of mat @ x == target, or None.

    mat is m x n, target a length-m vector.  For repeated targets against
    one matrix, build a LatticeSolver instead.
    """
    return LatticeSolver(mat).solve(target)


class LatticeSolver:
    """Reusable integer solver for one matrix and many targets.

    Precomputes the echelon data once; solve(target) then answers
    mat @ x == target over the integers in one forward pass.
    """

    def __init__(self, mat):
        mat = [tuple(row) for row in mat]
        self.m = len(mat)
        self.n = len(mat[0]) if self.m else 0
        transpose = [tuple(mat[i][j] for i in range(self.m)) for j in range(self.n)]
        if self.n:
            self.H, self.T, _ = row_hermite(transpose)
        else:
            self.H = self.T = ()

    def solve(self, target):
        target = tuple(target)
        if self.n == 0:
            return () if all(t == 0 for t in target) else None
        y = [0] * self.n
        residual = list(target)
        for i in range(self.n):
            row = self.H[i]
            piv = next((j for j in range(self.m) if row[j] != 0), None)
            if piv is None:
                continue
            if residual[piv] % row[piv] != 0:
                return None
            q = residual[piv] // row[piv]
            y[i] = q
            for j in range(self.m):
                residual[j] -= q * row[j]
        if any(r != 0 for r in residual):
            return None
        x = [0] * self.n
        for i in range(self.n):
            if y[i]:
                for j in range(self.n):
                    x[j] += y[i] * self.T[i][j]
        return tuple(x)


def solve_rational(mat, target):
    """One rational solution x of mat @ x == target, or None.

    Plain Gaussian elimination over Fraction; free variables are set to 0.
    """
    m = len(mat)
    rows = [[Fraction(v) for v in row] + [Fraction(t)] for row, t in zip(mat, target)]
    n = len(mat[0]) if m else 0
    pivots = []
    r = 0
    for c in range(n):
        p = next((i for i in range(r, m) if rows[i][c] != 0), None)
        if p is None:
            continue
        rows[r], rows[p] = rows[p], rows[r]
        pv = rows[r][c]
        rows[r] = [v / pv for v in rows[r]]
        for i in range(m):
            if i != r and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == m:
            break
    for i in range(r, m):
        if rows[i][n] != 0:
            return None
    x = [Fraction(0)] * n
    for i, c in enumerate(pivots):
        x[c] = rows[i][n]
    return tuple(x)


def nonneg_solution(columns, target):
    """Rational c >= 0 with sum_i c_i * columns[i] == target, or None.

    Phase-1 simplex with Bland's rule over exact Fractions.  `columns`
    is a list of equal-length integer/rational vectors.
    """
    k = len(columns)
    if k == 0:
        return () if all(v == 0 for v in target) else None
    m = len(target)
    # Tableau over variables [c_1..c_k, a_1..a_m]; minimize sum of artificials.
    table = []
    for i in range(m):
        row = [Fraction(col[i]) for col in columns]
        b = Fraction(target[i])
        if b < 0:
            row = [-v for v in row]
            b = -b
        art = [Fraction(1) if j == i else Fraction(0) for j in range(m)]
        table.append(row + art + [b])
    basis = [k + i for i in range(m)]
    nvars = k + m
    # Objective row: cost 1 on artificials, reduced by current basis.
    obj = [Fraction(0)] * (nvars + 1)
    for j in range(k, nvars):
        obj[j] = Fraction(1)
    for i in range(m):
        for j in range(nvars + 1):
            obj[j] -= table[i][j]

    while True:
        enter = next((j for j in range(nvars) if obj[j] < 0), None)
        if enter is None:
            break
        best = None
        for i in range(m):
            if table[i][enter] > 0:
                ratio = table[i][nvars] / table[i][enter]
                if best is None or ratio < best[0] or (
                    ratio == best[0] and basis[i] < basis[best[1]]
                ):
                    best = (ratio, i)
        if best is None:
            return None  # unbounded phase-1 cannot happen, defensive
        _, leave = best
        pv = table[leave][enter]
        table[leave] = [v / pv for v in table[leave]]
        for i in range(m):
            if i != leave and table[i][enter] != 0:
                f = table[i][enter]
                table[i] = [a - f * b for a, b in zip(table[i], table[leave])]
        if obj[enter] != 0:
            f = obj[enter]
            obj = [a - f * b for a, b in zip(obj, table[leave])]
        basis[leave] = enter

    if -obj[nvars] != 0:
        return None  # infeasible: artificials stuck at positive level
    sol = [Fraction(0)] * k
    for i, bv in enumerate(basis):
        if bv < k:
            sol[bv] = table[i][nvars]
        elif table[i][nvars] != 0:
            return None  # defensive; objective said zero
    return tuple(sol)


def vector_gcd(vec):
    g = 0
    for v in vec:
        g = gcd(g, abs(v))
    return g


def normalize_direction(vec):
    """Divide an integer vector by the gcd of its entries (gcd 1 afterwards)."""
    g = vector_gcd(vec)
    if g == 0:
        raise ValueError("zero vector has no direction")
    return tuple(v // g for v in vec), g
