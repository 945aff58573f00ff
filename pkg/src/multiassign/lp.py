"""Exact dual simplex and branch-and-bound for small pure-integer programs.

Programs have the shape: minimize ``c . x`` with ``c >= 0``, ``x >= 0``
integer, subject to rows ``g . x (<=|>=|=) h`` with integer data.  Because
``c >= 0`` the all-slack basis is dual feasible from the start, so the dual
simplex needs no phase one; branching only appends rows, so each child node
warm-starts from its parent's tableau.

The tableau is stored in dictionary form over the nonbasic columns.  Each row
is a list of Python ints ``[beta, alpha_1, ..., alpha_k]`` with a positive
integer denominator, reading ``x_B = (beta - sum alpha_j x_j) / den``.  Row 0
is the objective ``z``, stored with ``alpha = -reduced cost`` so that the same
pivot update applies to it.  No floating point is involved anywhere.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from math import gcd, lcm

from .exceptions import SolverError


class Status(str, enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    BUDGET = "budget_exceeded"


def _reduce(row, den):
    if den < 0:
        row = [-v for v in row]
        den = -den
    g = gcd(den, *row)
    if g > 1:
        row = [v // g for v in row]
        den //= g
    return row, den


class Tableau:
    """Dual-simplex dictionary over integer rows.

    Variables ``0..k-1`` are the structural ones; every added row gets a fresh
    slack variable id.  Rows are never mutated in place, so :meth:`copy` is a
    shallow list copy.
    """

    __slots__ = ("rows", "dens", "basis", "cols", "nvars", "pivots")

    def __init__(self, c, k):
        if len(c) != k:
            raise SolverError("objective length does not match variable count")
        if any(v < 0 for v in c):
            raise SolverError("objective coefficients must be nonnegative")
        self.rows = [[0] + [-int(v) for v in c]]
        self.dens = [1]
        self.basis = [-1]
        self.cols = list(range(k))
        self.nvars = k
        self.pivots = 0

    def copy(self):
        t = Tableau.__new__(Tableau)
        t.rows = list(self.rows)
        t.dens = list(self.dens)
        t.basis = list(self.basis)
        t.cols = list(self.cols)
        t.nvars = self.nvars
        t.pivots = self.pivots
        return t

    def _locate(self):
        row_of = {v: r for r, v in enumerate(self.basis) if r}
        col_of = {v: j for j, v in enumerate(self.cols)}
        return row_of, col_of

    def add_le(self, coeffs, rhs):
        """Append the row ``sum coeffs[v] * x_v <= rhs`` (``coeffs`` maps var -> int)."""
        row_of, col_of = self._locate()
        k = len(self.cols)
        beta = Fraction(rhs)
        alpha = [Fraction(0)] * k
        for v, g in coeffs.items():
            if not g:
                continue
            if v in col_of:
                alpha[col_of[v]] += g
            else:
                r = row_of[v]
                src, d = self.rows[r], self.dens[r]
                beta -= Fraction(g * src[0], d)
                for j in range(k):
                    if src[j + 1]:
                        alpha[j] -= Fraction(g * src[j + 1], d)
        vals = [beta] + alpha
        den = lcm(*(f.denominator for f in vals))
        row, den = _reduce([int(f * den) for f in vals], den)
        self.rows.append(row)
        self.dens.append(den)
        self.basis.append(self.nvars)
        self.nvars += 1

    def add_ge(self, coeffs, rhs):
        self.add_le({v: -g for v, g in coeffs.items()}, -rhs)

    def _pivot(self, p, q):
        rp, dp = self.rows[p], self.dens[p]
        a = rp[q + 1]
        new_p = list(rp)
        new_p[q + 1] = dp
        new_p, den_p = _reduce(new_p, a)
        rows, dens = self.rows, self.dens
        for i in range(len(rows)):
            if i == p:
                continue
            ri = rows[i]
            f = ri[q + 1]
            if not f:
                continue
            new = [x * a - f * y for x, y in zip(ri, rp)]
            new[q + 1] = -f * dp
            rows[i], dens[i] = _reduce(new, dens[i] * a)
        rows[p], dens[p] = new_p, den_p
        self.basis[p], self.cols[q] = self.cols[q], self.basis[p]
        self.pivots += 1

    def solve(self):
        """Run the dual simplex; return False when the rows are infeasible."""
        rows, basis = self.rows, self.basis
        while True:
            p = -1
            for i in range(1, len(rows)):
                if rows[i][0] < 0 and (p < 0 or basis[i] < basis[p]):
                    p = i
            if p < 0:
                return True
            rp, obj = rows[p], rows[0]
            q = -1
            for j in range(len(self.cols)):
                a = rp[j + 1]
                if a >= 0:
                    continue
                if q < 0:
                    q = j
                    continue
                b = rp[q + 1]
                lhs, rhs = obj[j + 1] * b, obj[q + 1] * a
                if lhs < rhs or (lhs == rhs and self.cols[j] < self.cols[q]):
                    q = j
            if q < 0:
                return False
            self._pivot(p, q)

    def objective(self):
        return Fraction(self.rows[0][0], self.dens[0])

    def values(self, k):
        """Current basic solution for structural variables ``0..k-1`` as (num, den) pairs."""
        out = [(0, 1)] * k
        for r in range(1, len(self.rows)):
            v = self.basis[r]
            if v < k:
                out[v] = (self.rows[r][0], self.dens[r])
        return out


@dataclass
class BranchResult:
    status: Status
    x: list | None
    value: int | None
    nodes: int
    pivots: int


def _ceil_div(a, b):
    return -((-a) // b)


def branch_and_bound(c, rows, *, priority=None, incumbent=None, upper=None, budget=10**7):
    """Minimize ``c . x`` over nonnegative integers subject to ``rows``.

    ``rows`` holds ``(coeffs, sense, rhs)`` with ``coeffs`` a dense list or a
    ``{var: coeff}`` dict and ``sense`` one of ``<=``, ``>=``, ``=``.
    ``incumbent`` is an optional known feasible integer vector; only strictly
    better solutions replace it.  ``upper`` gives optional per-variable upper
    bounds (``None`` entries are unbounded).  Branching takes the first
    fractional variable in ``priority`` order, down branch first.
    """
    k = len(c)
    root = Tableau(c, k)
    for coeffs, sense, rhs in rows:
        if not isinstance(coeffs, dict):
            coeffs = {v: g for v, g in enumerate(coeffs) if g}
        if sense == "<=":
            root.add_le(coeffs, rhs)
        elif sense == ">=":
            root.add_ge(coeffs, rhs)
        elif sense == "=":
            root.add_le(coeffs, rhs)
            root.add_ge(coeffs, rhs)
        else:
            raise SolverError(f"unknown relation {sense!r}")
    if upper is not None:
        for v, u in enumerate(upper):
            if u is not None:
                root.add_le({v: 1}, u)
    order = list(range(k)) if priority is None else list(priority)

    best, best_val = None, None
    if incumbent is not None:
        best = list(incumbent)
        best_val = sum(a * b for a, b in zip(c, best))

    stack = [root]
    nodes = pivots = 0
    while stack:
        t = stack.pop()
        nodes += 1
        if nodes > budget:
            return BranchResult(Status.BUDGET, best, best_val, nodes - 1, pivots)
        before = t.pivots
        feasible = t.solve()
        pivots += t.pivots - before
        if not feasible:
            continue
        z = t.objective()
        bound = _ceil_div(z.numerator, z.denominator)
        if best_val is not None and bound >= best_val:
            continue
        vals = t.values(k)
        branch_var = None
        for v in order:
            num, den = vals[v]
            if num % den:
                branch_var = v
                break
        if branch_var is None:
            best = [num // den for num, den in vals]
            best_val = bound
            continue
        num, den = vals[branch_var]
        fl = num // den
        up = t.copy()
        up.add_ge({branch_var: 1}, fl + 1)
        t.add_le({branch_var: 1}, fl)
        stack.append(up)
        stack.append(t)
    if best is None:
        return BranchResult(Status.INFEASIBLE, None, None, nodes, pivots)
    return BranchResult(Status.OPTIMAL, best, best_val, nodes, pivots)
