"""Multiple assignment maps: constructions, verification and coding rates.

A map hands each participant a set of primitive shares of an underlying
``(t, m)``-threshold (or ``(t, L, m)``-ramp) scheme.  Primitive shares are
numbered ``0..m-1`` internally and printed 1-based as ``W1..Wm``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, product

from .access import (
    AccessStructure,
    Multiset,
    RampAccessStructure,
    SetFamily,
    format_set,
    indices_of,
    ramp_check,
    ramp_min_max,
    require_consistent,
)
from .exceptions import AccessStructureError, MapError
from .report import Report

EXACT = "exact"
RELAXED = "relaxed"


@dataclass(frozen=True)
class AssignmentMap:
    """Participant ``i`` holds primitive shares ``assign[i]`` of a ``(t, L, m)`` scheme."""

    n: int
    t: int
    m: int
    assign: tuple
    L: int = 1

    def __post_init__(self):
        assign = tuple(frozenset(int(w) for w in a) for a in self.assign)
        object.__setattr__(self, "assign", assign)
        if len(assign) != self.n:
            raise MapError(f"map lists {len(assign)} participants, expected {self.n}")
        if not 1 <= self.t <= self.m:
            raise MapError(f"need 1 <= t <= m, got t={self.t}, m={self.m}")
        if not 1 <= self.L <= self.t:
            raise MapError(f"need 1 <= L <= t, got L={self.L}, t={self.t}")
        held = frozenset().union(*assign)
        if held != frozenset(range(self.m)):
            missing = sorted(set(range(self.m)) - held)
            extra = sorted(held - set(range(self.m)))
            raise MapError(f"shares must cover 0..{self.m - 1} exactly (missing {missing}, stray {extra})")

    def phi(self, mask):
        """Primitive shares pooled by the participant set ``mask``."""
        out = set()
        for i in indices_of(mask):
            out |= self.assign[i]
        return out

    def count(self, mask):
        return len(self.phi(mask))

    def sizes(self):
        return [len(a) for a in self.assign]

    def holders(self, w):
        """Mask of the participants holding primitive share ``w``."""
        return sum(1 << i for i, a in enumerate(self.assign) if w in a)

    def holder_profile(self):
        """Sorted holder masks; two maps agree up to relabelling shares iff profiles match."""
        return tuple(sorted(self.holders(w) for w in range(self.m)))

    def format(self, names=None):
        lines = [f"({self.t},{self.L},{self.m}) primitives" if self.L > 1 else f"({self.t},{self.m}) primitives"]
        for i, a in enumerate(self.assign):
            who = names[i] if names else f"V{i + 1}"
            lines.append(f"  {who} = {{" + ",".join(f"W{w + 1}" for w in sorted(a)) + "}")
        return "\n".join(lines)

    def to_dict(self):
        return {
            "n": self.n,
            "t": self.t,
            "L": self.L,
            "m": self.m,
            "assign": [sorted(a) for a in self.assign],
        }

    @classmethod
    def from_dict(cls, doc):
        try:
            return cls(int(doc["n"]), int(doc["t"]), int(doc["m"]),
                       tuple(doc["assign"]), int(doc.get("L", 1)))
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, MapError):
                raise
            raise MapError(f"malformed map document: {exc!r}") from exc


@dataclass(frozen=True)
class RateReport:
    per_participant: tuple
    average: Fraction
    worst: Fraction

    def to_dict(self):
        return {
            "rates": [str(r) for r in self.per_participant],
            "average": str(self.average),
            "worst": str(self.worst),
        }


def rates_from_sizes(sizes, L=1):
    per = tuple(Fraction(s, L) for s in sizes)
    return RateReport(per, sum(per, Fraction(0)) / len(per), max(per))


def rates(amap):
    """Coding rates ``|assign(i)| / L`` with their average and maximum."""
    return rates_from_sizes(amap.sizes(), amap.L)


def _map_from_excluded(n, excluded, L=1, t=None):
    """Share ``j`` goes to every participant outside ``excluded[j]``."""
    m = len(excluded)
    assign = [[j for j, f in enumerate(excluded) if not f >> i & 1] for i in range(n)]
    return AssignmentMap(n, m if t is None else t, m, tuple(assign), L)


def cumulative_map(s):
    """One share per maximal forbidden set, held by everyone outside that set.

    The structure may be incomplete, in which case its listed maximal
    forbidden sets are used.  With no forbidden sets at all the trivial
    ``(1, 1)`` map (everyone holds the single share) is returned.
    """
    fmax = s.forbidden_max.members
    if not fmax:
        return AssignmentMap(s.n, 1, 1, tuple((0,) for _ in range(s.n)))
    return _map_from_excluded(s.n, fmax)


def modified_parameters(s):
    """``(g, G0, ell)`` of the modified cumulative map: ``ell`` is the cumulative block-length list."""
    g = min(len(q) for q in s.qualified_min.sets())
    g0 = [f for f in s.forbidden_max if f.bit_count() >= g]
    ell = [0]
    for f in g0:
        ell.append(ell[-1] + f.bit_count() - g + 1)
    return g, g0, ell


def modified_cumulative_map(s):
    """Threshold-based variant of the cumulative map.

    Primitive shares ``0..n-1`` go one per participant; each maximal
    forbidden set ``G`` with ``|G| >= g`` (``g`` the smallest qualified size)
    contributes a block of ``|G| - g + 1`` extra shares held by everyone
    outside ``G``.  Threshold is ``g`` plus the total block length.
    """
    if not s.complete:
        raise AccessStructureError("the modified cumulative map needs a complete structure")
    require_consistent(s)
    n = s.n
    g, g0, ell = modified_parameters(s)
    total = ell[-1]
    assign = [{i} for i in range(n)]
    for j, G in enumerate(g0):
        block = range(n + ell[j], n + ell[j + 1])
        for i in range(n):
            if not G >> i & 1:
                assign[i].update(block)
    return AssignmentMap(n, g + total, n + total, tuple(assign))


def modified_advantage_holds(s):
    """Sufficient condition for the modified map to beat the cumulative map on average."""
    n = s.n
    g, g0, ell = modified_parameters(s)
    rhs = Fraction((n - g - 1) * ell[-1] + n + 2 * len(g0), n - g + 1)
    return len(s.forbidden_max) >= rhs


def construction3_multiset(s):
    """Multiset ``U`` of maximal sets, built level by level from the top.

    Pass ``j = 1..L`` walks the maximal sets of level ``L - j`` in ascending
    mask order and adds each one until at least ``j`` members of ``U``
    contain it.  Returns the members in insertion order.
    """
    require_consistent(s)
    fams = ramp_min_max(s)
    order = []
    for j in range(1, s.L + 1):
        for a in fams[s.L - j][1]:
            have = sum(1 for u in order if a & ~u == 0)
            order.extend([a] * max(0, j - have))
    return order


def ramp_cumulative_map(s):
    """Ramp analogue of the cumulative map over ``(m, L, m)`` primitives, ``m = |U|``."""
    order = construction3_multiset(s)
    if not order:
        raise AccessStructureError("construction produced no sets; every subset is at the top level")
    return _map_from_excluded(s.n, order, L=s.L)


def construction3_as_multiset(s):
    return Multiset(s.n, construction3_multiset(s))


def verify_perfect(amap, s):
    """Check every minimal qualified set reaches ``t`` shares and every maximal forbidden set stays below."""
    rep = Report()
    if amap.L != 1:
        rep.violations.append(f"map has L={amap.L}; perfect schemes need L=1")
    if amap.n != s.n:
        rep.violations.append(f"map is for {amap.n} participants, structure has {s.n}")
        return rep
    for a in s.qualified_min:
        w = amap.count(a)
        if w < amap.t:
            rep.violations.append(f"qualified {format_set(a, s.names)} pools {w} < t={amap.t}")
    for a in s.forbidden_max:
        w = amap.count(a)
        if w > amap.t - 1:
            rep.violations.append(f"forbidden {format_set(a, s.names)} pools {w} > t-1={amap.t - 1}")
    if amap.count((1 << s.n) - 1) != amap.m:
        rep.violations.append("not every primitive share is handed out")
    return rep


def verify_ramp(amap, s, mode=EXACT):
    """Check a map against a ramp structure's representative sets.

    A set pooling ``w`` shares of ``(t, L, m)`` primitives learns
    ``clamp((w - t + L) / L, 0, 1)`` of the secret, so level ``j`` calls for
    exactly ``t - L + j`` shares (``exact``) or at most that many (``relaxed``).
    """
    if mode not in (EXACT, RELAXED):
        raise ValueError(f"mode must be {EXACT!r} or {RELAXED!r}")
    rep = Report()
    if amap.L != s.L:
        rep.violations.append(f"map has L={amap.L}, structure has L={s.L}")
        return rep
    if amap.n != s.n:
        rep.violations.append(f"map is for {amap.n} participants, structure has {s.n}")
        return rep
    chk = ramp_check(s)
    if not chk.ok:
        return rep.extend(chk)
    fams = ramp_min_max(s)
    t, L = amap.t, amap.L
    names = s.names
    for a in fams[L][0]:
        w = amap.count(a)
        if w < t:
            rep.violations.append(f"level {L} {format_set(a, names)} pools {w} < t={t}")
    for a in fams[0][1]:
        w = amap.count(a)
        if w > t - L:
            rep.violations.append(f"level 0 {format_set(a, names)} pools {w} > t-L={t - L}")
    for j in range(1, L):
        want = t - L + j
        for a in sorted(set(fams[j][0]) | set(fams[j][1])):
            w = amap.count(a)
            if w > want or (mode == EXACT and w != want):
                rel = "=" if mode == EXACT else "<="
                rep.violations.append(
                    f"level {j} {format_set(a, names)} pools {w}, need {rel} t-L+{j}={want}"
                )
    return rep


def verify(amap, s, mode=EXACT):
    if isinstance(s, RampAccessStructure):
        return verify_ramp(amap, s, mode)
    return verify_perfect(amap, s)


# Ideal structures ---------------------------------------------------------

def expand_product_form(n, blocks, t):
    """Minimal qualified sets that pick one participant from each of ``t`` distinct blocks."""
    members = set()
    for chosen in combinations(blocks, t):
        for pick in product(*(indices_of(b) for b in chosen)):
            members.add(sum(1 << i for i in pick))
    return SetFamily(n, members)


@dataclass(frozen=True)
class IdealResult:
    ideal: bool
    worst: Fraction
    t: int | None = None
    blocks: tuple | None = None
    amap: AssignmentMap | None = None

    def format(self, names=None):
        if not self.ideal:
            return f"not ideal-realizable by an assignment map (optimal worst rate {self.worst})"
        parts = ", ".join(format_set(b, names) for b in self.blocks)
        return f"ideal: t={self.t}, partition {parts}"


def ideal_partition(s, budget=None):
    """Decide ideal realizability through the worst-rate program.

    When the optimum gives every participant exactly one share, the holders
    of each share form a block of a partition of ``V`` and the minimal
    qualified sets are the picks of one member from ``t`` distinct blocks;
    that expansion is re-checked before the partition is returned.
    """
    from .ilp import optimal_map

    if not s.complete:
        raise AccessStructureError("ideal realizability is decided for complete structures")
    amap, sol = optimal_map(s, objective="worst", budget=budget)
    worst = rates(amap).worst
    if any(sz != 1 for sz in amap.sizes()):
        return IdealResult(False, worst, amap=amap)
    blocks = tuple(sorted(amap.holders(w) for w in range(amap.m)))
    if expand_product_form(s.n, blocks, amap.t) != s.qualified_min:
        raise MapError("rate-one map does not expand to the structure; solver output is inconsistent")
    return IdealResult(True, worst, amap.t, blocks, amap)


# Level-by-level ramp construction -----------------------------------------

CUMULATIVE = "cumulative"
MODIFIED = "modified"
IP_AVG = "ip"
IP_WORST = "ip-worst"


@dataclass(frozen=True)
class RampRecipe:
    """Per-level perfect structures and maps; participant ``i`` holds one share per level."""

    L: int
    levels: tuple
    maps: tuple
    rates: RateReport

    def format(self):
        out = []
        for j, (lev, amap) in enumerate(zip(self.levels, self.maps), start=1):
            out.append(f"level {j}: qualified_min = {lev.qualified_min.format()}")
            out.append("  " + amap.format().replace("\n", "\n  "))
        r = self.rates
        out.append(f"average rate {r.average}, worst rate {r.worst}")
        return "\n".join(out)


def construction2_ramp(s, strategy=CUMULATIVE, budget=None):
    """Realize a ramp structure by sharing each of ``L`` secret pieces with a perfect scheme.

    Level ``j`` uses the perfect structure whose qualified sets are those at
    level ``j`` or above; ``strategy`` picks the map used at each level.
    A participant's rate is the sum of its level share counts divided by ``L``.
    """
    require_consistent(s)
    levels, maps = [], []
    for j in range(1, s.L + 1):
        lev = s.perfect_level_structure(j)
        rep = Report()
        if lev.complete:
            from .access import check_consistency

            rep = check_consistency(lev)
        if not rep.ok:
            raise AccessStructureError(f"level {j} structure is inconsistent:\n{rep}")
        if strategy == CUMULATIVE:
            amap = cumulative_map(lev)
        elif strategy == MODIFIED:
            amap = modified_cumulative_map(lev)
        elif strategy in (IP_AVG, IP_WORST):
            from .ilp import optimal_map

            amap, _ = optimal_map(lev, objective="avg" if strategy == IP_AVG else "worst", budget=budget)
        else:
            raise ValueError(f"unknown per-level strategy {strategy!r}")
        levels.append(lev)
        maps.append(amap)
    totals = [sum(m.sizes()[i] for m in maps) for i in range(s.n)]
    return RampRecipe(s.L, tuple(levels), tuple(maps), rates_from_sizes(totals, s.L))
