"""Exact integer linear algebra on lists of Python ints.

Only what the lattice code needs: integer row echelon (Hermite) form with a
unimodular transform, from which rank and a Z-basis of the kernel follow.
"""
from __future__ import annotations

from typing import Sequence

IntMatrix = list[list[int]]


def _as_rows(m) -> IntMatrix:
    return [[int(x) for x in row] for row in m]


def hermite_form(m, track: bool = False):
    """Row-style Hermite normal form by unimodular integer row operations.

    Returns ``(H, T, pivots)`` with ``T @ m == H`` when ``track`` is set
    (otherwise ``T`` is None). Pivots are positive and the entries above each
    pivot are reduced into ``[0, pivot)``.
    """
    rows = _as_rows(m)
    nrows = len(rows)
    ncols = len(rows[0]) if rows else 0
    T = [[int(i == j) for j in range(nrows)] for i in range(nrows)] if track else None

    def swap(i, j):
        rows[i], rows[j] = rows[j], rows[i]
        if T is not None:
            T[i], T[j] = T[j], T[i]

    def axpy(dst, src, q):
        # row[dst] -= q * row[src]
        rd, rs = rows[dst], rows[src]
        for k in range(ncols):
            if rs[k]:
                rd[k] -= q * rs[k]
        if T is not None:
            td, ts = T[dst], T[src]
            for k in range(nrows):
                if ts[k]:
                    td[k] -= q * ts[k]

    def negate(i):
        rows[i] = [-x for x in rows[i]]
        if T is not None:
            T[i] = [-x for x in T[i]]

    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        while True:
            nonzero = [i for i in range(r, nrows) if rows[i][c] != 0]
            if not nonzero:
                break
            p = min(nonzero, key=lambda i: abs(rows[i][c]))
            if p != r:
                swap(r, p)
            clean = True
            for i in range(r + 1, nrows):
                if rows[i][c]:
                    axpy(i, r, rows[i][c] // rows[r][c])
                    if rows[i][c]:
                        clean = False
            if clean:
                break
        if rows[r][c] == 0:
            continue
        if rows[r][c] < 0:
            negate(r)
        for i in range(r):
            q = rows[i][c] // rows[r][c]
            if q:
                axpy(i, r, q)
        pivots.append(c)
        r += 1
    return rows, T, pivots


def rank(m) -> int:
    rows = _as_rows(m)
    if not rows or not rows[0]:
        return 0
    return len(hermite_form(rows)[2])


def integer_kernel(m, ncols: int | None = None) -> IntMatrix:
    """Z-basis of ``{x in Z^n : m x = 0}``, returned as rows in Hermite form.

    The transform of the Hermite form of ``m^T`` is unimodular, so its rows
    sitting against zero rows of the echelon form span the kernel lattice
    exactly (not just a finite-index sublattice).
    """
    rows = _as_rows(m)
    n = len(rows[0]) if rows else (ncols or 0)
    if not rows:
        return [[int(i == j) for j in range(n)] for i in range(n)]
    mt = [[rows[i][j] for i in range(len(rows))] for j in range(n)]
    H, T, pivots = hermite_form(mt, track=True)
    basis = [T[i] for i in range(len(pivots), n)]
    if not basis:
        return []
    return hermite_form(basis)[0]


def matvec(m, x: Sequence[int]) -> list[int]:
    return [sum(int(a) * int(b) for a, b in zip(row, x)) for row in m]
