"""Exact linear algebra over the rationals.

The systems built from arenas and strategy products are very sparse, so
rows are kept as dictionaries and elimination picks the shortest pivot row.
"""

from __future__ import annotations

from fractions import Fraction


class SingularSystem(ArithmeticError):
    """The linear system has no unique solution."""


def solve_rows(rows, rhs, n):
    """Solve a square sparse system exactly.

    ``rows[i]`` maps column indices to coefficients of equation ``i`` and
    ``rhs[i]`` is its right-hand side.  Returns the list of ``n`` unknowns.
    """
    if len(rows) != n:
        raise SingularSystem(f"{len(rows)} equations for {n} unknowns")
    rows = [{j: Fraction(v) for j, v in r.items() if v != 0} for r in rows]
    rhs = [Fraction(v) for v in rhs]
    col_rows: list[set[int]] = [set() for _ in range(n)]
    for i, r in enumerate(rows):
        for j in r:
            col_rows[j].add(i)
    pivots = []
    for col in range(n):
        cands = col_rows[col]
        if not cands:
            raise SingularSystem(f"no pivot in column {col}")
        p = min(cands, key=lambda i: (len(rows[i]), i))
        prow = rows[p]
        for j in prow:
            col_rows[j].discard(p)
        pv = prow[col]
        for i in list(col_rows[col]):
            r = rows[i]
            f = r[col] / pv
            for j, v in prow.items():
                nv = r.get(j, 0) - f * v
                if nv == 0:
                    if j in r:
                        del r[j]
                        col_rows[j].discard(i)
                else:
                    if j not in r:
                        col_rows[j].add(i)
                    r[j] = nv
            rhs[i] -= f * rhs[p]
        pivots.append((col, p))
    x = [Fraction(0)] * n
    for col, p in reversed(pivots):
        prow = rows[p]
        acc = rhs[p]
        for j, v in prow.items():
            if j != col:
                acc -= v * x[j]
        x[col] = acc / prow[col]
    return x


def solve(A, b):
    """Solve ``A x = b`` for a dense square matrix given as a list of rows."""
    n = len(A)
    return solve_rows([{j: v for j, v in enumerate(row) if v != 0} for row in A], b, n)


def solve_keyed(equations, unknowns):
    """Solve a system given as ``{unknown: ({unknown: coeff}, rhs)}``.

    Returns a dict mapping each unknown to its value.
    """
    order = list(unknowns)
    index = {u: i for i, u in enumerate(order)}
    rows, rhs = [], []
    for u in order:
        coeffs, b = equations[u]
        row: dict[int, Fraction] = {}
        for v, c in coeffs.items():
            k = index[v]
            row[k] = row.get(k, 0) + c
        rows.append(row)
        rhs.append(b)
    x = solve_rows(rows, rhs, len(order))
    return {u: x[i] for i, u in enumerate(order)}
