"""Integer programs for optimal multiple assignment maps, and their exact solution.

Variables are ``t`` (the primitive threshold), ``x_p`` for each nonempty
participant subset ``p`` (how many primitive shares are held by exactly the
participants of ``p``) and, for worst-rate programs, ``M`` (the largest share
count).  For a participant set ``A`` the pooled share count is
``|Phi(A)| = sum of x_p over p meeting A``, which keeps every condition linear.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field, replace

from .access import (
    AccessStructure,
    RampAccessStructure,
    check_enumerable,
    format_set,
    ramp_min_max,
    require_consistent,
    SIGNIFICANT,
    VACUOUS,
)
from .exceptions import BudgetExceeded, SolverError
from .lp import Status, branch_and_bound
from .maps import (
    EXACT,
    RELAXED,
    AssignmentMap,
    cumulative_map,
    modified_cumulative_map,
    ramp_cumulative_map,
)

AVG = "avg"
WORST = "worst"
DEFAULT_BUDGET = 10**7
BUDGET_ENV = "MULTIASSIGN_NODE_BUDGET"

T = "t"
M = "M"


def default_budget():
    raw = os.environ.get(BUDGET_ENV)
    if raw is None:
        return DEFAULT_BUDGET
    try:
        value = int(raw)
    except ValueError:
        raise SolverError(f"{BUDGET_ENV} must be an integer, got {raw!r}") from None
    if value < 1:
        raise SolverError(f"{BUDGET_ENV} must be positive")
    return value


@dataclass(frozen=True)
class IntegerLinearProgram:
    """Minimize ``objective . y`` over nonnegative integer ``y`` subject to ``constraints``.

    ``roles`` names each column: ``"M"``, ``"t"`` or an int subset mask ``p``.
    ``labels`` describe each constraint row for printing.
    """

    n: int
    roles: tuple
    objective: tuple
    constraints: tuple
    labels: tuple = ()
    kind: str = AVG
    L: int = 1
    mode: str | None = None

    @property
    def var_count(self):
        return len(self.roles)

    def column(self, role):
        return self.roles.index(role)

    def var_name(self, j):
        r = self.roles[j]
        return r if isinstance(r, str) else f"x{r}"

    def with_rows(self, rows, labels=None):
        """Same program with extra ``(coeffs, relation, rhs)`` rows appended."""
        rows = tuple((tuple(c), rel, int(b)) for c, rel, b in rows)
        labels = tuple(labels) if labels is not None else tuple(f"extra{k}" for k in range(len(rows)))
        return replace(self, constraints=self.constraints + rows, labels=self.labels + labels)

    def satisfied_by(self, y):
        if len(y) != self.var_count or any(v < 0 for v in y):
            return False
        for coeffs, rel, rhs in self.constraints:
            lhs = sum(a * b for a, b in zip(coeffs, y))
            if rel == ">=" and lhs < rhs or rel == "<=" and lhs > rhs or rel == "=" and lhs != rhs:
                return False
        return True

    def value(self, y):
        return sum(a * b for a, b in zip(self.objective, y))


@dataclass(frozen=True)
class IpSolution:
    status: Status
    values: tuple | None
    objective: int | None
    node_count: int
    program: IntegerLinearProgram = field(repr=False, compare=False, default=None)
    notes: tuple = ()

    @property
    def optimal(self):
        return self.status == Status.OPTIMAL

    def value_of(self, role):
        return self.values[self.program.column(role)]

    def x(self):
        """Nonzero ``x_p`` values as ``{p: count}``."""
        return {
            r: v for r, v in zip(self.program.roles, self.values) if not isinstance(r, str) and v
        }


# Program construction -----------------------------------------------------

def _meets_row(roles, mask):
    """Coefficients of ``|Phi(mask)|`` over the given columns."""
    return [0 if isinstance(r, str) else int(bool(r & mask)) for r in roles]


def _holds_row(roles, i):
    return [0 if isinstance(r, str) else (r >> i) & 1 for r in roles]


def _columns(n, kind, keep_common):
    full = (1 << n) - 1
    top = full if keep_common or n == 1 else full - 1
    roles = ([M] if kind == WORST else []) + [T] + list(range(1, top + 1))
    return tuple(roles)


def _objective(roles, kind):
    if kind == WORST:
        return tuple(1 if r == M else 0 for r in roles)
    return tuple(0 if isinstance(r, str) else r.bit_count() for r in roles)


def _participant_rows(roles, n):
    rows, labels = [], []
    m_col = roles.index(M)
    for i in range(n):
        coeffs = [-c for c in _holds_row(roles, i)]
        coeffs[m_col] = 1
        rows.append((tuple(coeffs), ">=", 0))
        labels.append(f"M >= |V{i + 1}|")
    return rows, labels


def _threshold_part(roles, sign):
    t_col = roles.index(T)
    def row(mask):
        coeffs = _meets_row(roles, mask)
        coeffs[t_col] = -1
        return tuple(sign * c for c in coeffs)
    return row


def build_ip(s, kind=AVG, keep_common=False):
    """Program for a perfect structure: ``avg`` minimizes total share count, ``worst`` the largest one.

    The column for shares held by everybody is dropped unless ``keep_common``
    (or ``n == 1``), since such shares never separate qualified from
    forbidden sets.
    """
    if kind not in (AVG, WORST):
        raise ValueError(f"objective must be {AVG!r} or {WORST!r}")
    check_enumerable(s.n)
    require_consistent(s)
    roles = _columns(s.n, kind, keep_common)
    qual = _threshold_part(roles, 1)
    forb = _threshold_part(roles, -1)
    rows, labels = [], []
    for a in s.qualified_min:
        rows.append((qual(a), ">=", 0))
        labels.append(f"qualified {format_set(a, s.names)}")
    for a in s.forbidden_max:
        rows.append((forb(a), ">=", 1))
        labels.append(f"forbidden {format_set(a, s.names)}")
    if not len(s.forbidden_max):
        coeffs = [0] * len(roles)
        coeffs[roles.index(T)] = 1
        rows.append((tuple(coeffs), ">=", 1))
        labels.append("t >= 1")
    if kind == WORST:
        r, lab = _participant_rows(roles, s.n)
        rows += r
        labels += lab
    return IntegerLinearProgram(s.n, roles, _objective(roles, kind), tuple(rows), tuple(labels), kind)


def build_ip_avg(s, keep_common=False):
    return build_ip(s, AVG, keep_common)


def build_ip_worst(s, keep_common=False):
    return build_ip(s, WORST, keep_common)


def build_ip_ramp(s, mode=EXACT, kind=AVG):
    """Program for a ramp structure over ``(t, L, m)`` primitives.

    Top-level minimal sets need ``t`` shares, level-0 maximal sets at most
    ``t - L``, and representatives of level ``j`` need ``t - L + j``
    (exactly, or at most in ``relaxed`` mode).  The all-participant column
    is kept because ramp schemes may use shares common to everyone.
    """
    if mode not in (EXACT, RELAXED):
        raise ValueError(f"mode must be {EXACT!r} or {RELAXED!r}")
    if kind not in (AVG, WORST):
        raise ValueError(f"objective must be {AVG!r} or {WORST!r}")
    check_enumerable(s.n)
    require_consistent(s)
    fams = ramp_min_max(s)
    L = s.L
    roles = _columns(s.n, kind, keep_common=True)
    up = _threshold_part(roles, 1)
    down = _threshold_part(roles, -1)
    rows, labels = [], []
    for a in fams[L][0]:
        rows.append((up(a), ">=", 0))
        labels.append(f"level {L} {format_set(a, s.names)}")
    for j in range(1, L):
        for a in sorted(set(fams[j][0]) | set(fams[j][1])):
            if mode == EXACT:
                rows.append((down(a), "=", L - j))
            else:
                rows.append((down(a), ">=", L - j))
            labels.append(f"level {j} {format_set(a, s.names)}")
    for a in fams[0][1]:
        rows.append((down(a), ">=", L))
        labels.append(f"level 0 {format_set(a, s.names)}")
    coeffs = [0] * len(roles)
    coeffs[roles.index(T)] = 1
    rows.append((tuple(coeffs), ">=", L))
    labels.append(f"t >= {L}")
    if kind == WORST:
        r, lab = _participant_rows(roles, s.n)
        rows += r
        labels += lab
    return IntegerLinearProgram(
        s.n, roles, _objective(roles, kind), tuple(rows), tuple(labels), kind, L, mode
    )


def build_for(s, kind=AVG, mode=None, keep_common=False):
    if isinstance(s, RampAccessStructure):
        return build_ip_ramp(s, mode or EXACT, kind)
    return build_ip(s, kind, keep_common)


# Maps <-> vectors ---------------------------------------------------------

def map_to_vector(amap, ip):
    """Program vector induced by a map, or ``None`` if the map does not fit the columns.

    Shares held by everyone are folded into the threshold when the program
    has no column for them.
    """
    if amap.n != ip.n or amap.L != ip.L:
        return None
    counts = {}
    for w in range(amap.m):
        h = amap.holders(w)
        counts[h] = counts.get(h, 0) + 1
    t = amap.t
    full = (1 << ip.n) - 1
    if counts.get(full) and full not in ip.roles:
        # Folding must leave t >= 1, otherwise the empty set would become qualified.
        if t - counts[full] < 1:
            return None
        t -= counts.pop(full)
    if any(p not in ip.roles for p in counts):
        return None
    y = []
    for r in ip.roles:
        if r == T:
            y.append(t)
        elif r == M:
            y.append(max(amap.sizes()))
        else:
            y.append(counts.get(r, 0))
    return tuple(y)


def solution_to_map(s, sol):
    """Hand out ``x_p`` fresh primitive shares to the members of each ``p`` (ascending ``p``)."""
    if not sol.optimal:
        raise SolverError(f"cannot build a map from a {sol.status.value} solution")
    ip = sol.program
    if ip.n != s.n:
        raise SolverError("solution and structure disagree on n")
    assign = [[] for _ in range(s.n)]
    nxt = 0
    for r, v in zip(ip.roles, sol.values):
        if isinstance(r, str) or not v:
            continue
        block = range(nxt, nxt + v)
        nxt += v
        for i in range(s.n):
            if r >> i & 1:
                assign[i].extend(block)
    return AssignmentMap(s.n, sol.value_of(T), nxt, tuple(assign), ip.L)


# Solving ------------------------------------------------------------------

def _priority(ip):
    cols = list(range(ip.var_count))
    def key(j):
        r = ip.roles[j]
        if r == M:
            return (0, 0, 0)
        if r == T:
            return (1, 0, 0)
        return (2, -r.bit_count(), r)
    return sorted(cols, key=key)


def _upper_bounds(ip, y):
    """Variable bounds valid for every solution at least as good as ``y``.

    Each ``x_p`` is at most the share count of any member of ``p``, hence at
    most the objective.  ``t`` is bounded through a row ``|Phi(A)| >= t`` when
    one exists.
    """
    best = ip.value(y)
    t_col = ip.column(T)
    bounded_t = any(
        rel == ">=" and rhs == 0 and coeffs[t_col] == -1 for coeffs, rel, rhs in ip.constraints
    )
    total = best if ip.kind == AVG else ip.n * best
    ub = []
    for r in ip.roles:
        if r == M:
            ub.append(best)
        elif r == T:
            ub.append(total if bounded_t else None)
        elif ip.kind == AVG:
            ub.append(best // r.bit_count())
        else:
            ub.append(best)
    return ub


def _hints(s, ip):
    """Feasible starting vectors from the explicit constructions."""
    maps = []
    try:
        if isinstance(s, RampAccessStructure):
            maps.append(ramp_cumulative_map(s))
        else:
            maps.append(cumulative_map(s))
            if s.complete:
                maps.append(modified_cumulative_map(s))
    except Exception:  # a failed construction only costs us a starting point
        pass
    vecs = []
    for amap in maps:
        y = map_to_vector(amap, ip)
        if y is not None and ip.satisfied_by(y):
            vecs.append(y)
    return vecs


def _run(c, rows, ub, order, incumbent, budget):
    return branch_and_bound(c, rows, priority=order, incumbent=incumbent, upper=ub, budget=budget)


def _restrict(ip, fixed, extra_eq):
    """Rows of ``ip`` with ``fixed`` columns substituted out, plus ``extra_eq`` equalities."""
    free = [j for j in range(ip.var_count) if j not in fixed]
    rows = []
    for coeffs, rel, rhs in list(ip.constraints) + extra_eq:
        rhs -= sum(coeffs[j] * v for j, v in fixed.items())
        rows.append(({k: coeffs[j] for k, j in enumerate(free) if coeffs[j]}, rel, rhs))
    return free, rows


def solve(ip, hint=None, budget=None, canonical=True):
    """Provably optimal solution of ``ip`` (or a proof of infeasibility).

    ``hint`` is an optional feasible vector used as the starting incumbent.
    Among optimal vectors the result minimizes, in order: for worst-rate
    programs the total share count, then ``t``, then the ``x_p`` columns
    lexicographically in ascending ``p``.  Exhausting ``budget`` nodes gives
    status ``BUDGET`` with the best vector found so far.
    """
    budget = default_budget() if budget is None else budget
    hints = [tuple(hint)] if hint is not None else []
    hints = [h for h in hints if ip.satisfied_by(h)]
    if hint is not None and not hints:
        raise SolverError("supplied hint does not satisfy the program")
    incumbent = min(hints, key=ip.value) if hints else None
    order = _priority(ip)
    ub = _upper_bounds(ip, incumbent) if incumbent is not None else None
    res = _run(ip.objective, ip.constraints, ub, order, incumbent, budget)
    nodes = res.nodes
    if res.status == Status.INFEASIBLE:
        return IpSolution(Status.INFEASIBLE, None, None, nodes, ip)
    if res.status == Status.BUDGET:
        vals = tuple(res.x) if res.x is not None else None
        return IpSolution(Status.BUDGET, vals, res.value, nodes, ip,
                          ("node budget exhausted before optimality was proven",))
    best = tuple(res.x)
    v_star = res.value
    if ub is None:
        ub = _upper_bounds(ip, best)
    if not canonical:
        return IpSolution(Status.OPTIMAL, best, v_star, nodes, ip)

    # Canonical pass: fix the optimum, then minimize each key in turn.
    keys = []
    if ip.kind == WORST:
        keys.append(tuple(0 if isinstance(r, str) else r.bit_count() for r in ip.roles))
    keys += [ip.column(T)] + [j for j, r in enumerate(ip.roles) if not isinstance(r, str)]
    extra = [(ip.objective, "=", v_star)]
    fixed = {}
    if ip.kind == WORST:
        fixed[ip.column(M)] = v_star
    for key in keys:
        if isinstance(key, int):
            if key in fixed:
                continue
            if best[key] == 0:
                fixed[key] = 0
                continue
        free, rows = _restrict(ip, fixed, extra)
        if isinstance(key, int):
            c = [1 if j == key else 0 for j in free]
        else:
            c = [key[j] for j in free]
        sub_ub = [ub[j] for j in free]
        sub_order = [free.index(j) for j in order if j in free]
        remaining = budget - nodes
        sub = _run(c, rows, sub_ub, sub_order, [best[j] for j in free], remaining) if remaining > 0 else None
        nodes += sub.nodes if sub is not None else 0
        if sub is None or sub.status == Status.BUDGET:
            return IpSolution(Status.BUDGET, best, v_star, nodes, ip,
                              ("node budget exhausted while fixing the canonical optimum",))
        vals = dict(fixed)
        vals.update(zip(free, sub.x))
        best = tuple(vals[j] for j in range(ip.var_count))
        if isinstance(key, int):
            fixed[key] = best[key]
        else:
            extra.append((key, "=", sum(a * b for a, b in zip(key, best))))
    if not ip.satisfied_by(best) or ip.value(best) != v_star:
        raise SolverError("canonical pass produced an inconsistent vector")
    return IpSolution(Status.OPTIMAL, best, v_star, nodes, ip)


def solve_structure(s, kind=AVG, mode=None, budget=None, keep_common=False, extra_rows=()):
    """Build the program for ``s``, seed it from the constructions and solve it."""
    ip = build_for(s, kind, mode, keep_common)
    if extra_rows:
        ip = ip.with_rows(extra_rows)
    hints = _hints(s, ip)
    hint = min(hints, key=ip.value) if hints else None
    return solve(ip, hint=hint, budget=budget)


def optimal_map(s, objective=AVG, mode=None, budget=None):
    """Optimal map for ``s``; raises on infeasibility or an exhausted budget."""
    sol = solve_structure(s, objective, mode, budget)
    if sol.status == Status.INFEASIBLE:
        raise SolverError("the program has no feasible solution")
    if sol.status == Status.BUDGET:
        raise BudgetExceeded(f"node budget exhausted after {sol.node_count} nodes")
    return solution_to_map(s, sol), sol


def classify_by_ip(s, budget=None):
    """Participants left without shares by the average-optimal map are vacuous."""
    amap, _ = optimal_map(s, AVG, budget=budget)
    return tuple(SIGNIFICANT if k else VACUOUS for k in amap.sizes())


# Text dump ----------------------------------------------------------------

def _terms(ip, coeffs):
    parts = []
    for j, a in enumerate(coeffs):
        if not a:
            continue
        name = ip.var_name(j)
        sign = "-" if a < 0 else "+"
        mag = abs(a)
        parts.append(f"{sign} {name}" if mag == 1 else f"{sign} {mag} {name}")
    if not parts:
        return "0"
    text = " ".join(parts)
    return text[2:] if text.startswith("+ ") else text


def to_lp_text(ip):
    """The program in CPLEX LP syntax, one row per constraint in build order."""
    lines = ["\\ " + f"{ip.kind} program, n={ip.n}" + (f", L={ip.L}, {ip.mode}" if ip.mode else ""),
             "Minimize", f" obj: {_terms(ip, ip.objective)}", "Subject To"]
    for k, (coeffs, rel, rhs) in enumerate(ip.constraints):
        label = ip.labels[k] if k < len(ip.labels) else ""
        op = "=" if rel == "=" else rel
        lines.append(f" c{k + 1}: {_terms(ip, coeffs)} {op} {rhs}" + (f"  \\ {label}" if label else ""))
    lines.append("General")
    lines.append(" " + " ".join(ip.var_name(j) for j in range(ip.var_count)))
    lines.append("End")
    return "\n".join(lines)
