"""Participant sets, set families and (ramp) access structures.

A subset of the participants ``V = {V1, ..., Vn}`` is an ``int`` bitmask in
which bit ``i`` stands for ``V(i+1)``.  Families are kept as sorted tuples of
masks so that every iteration order (and therefore every constraint row built
from a family) is reproducible.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from pathlib import Path

import numpy as np

from .exceptions import AccessStructureError, CapacityError
from .report import Report

MAX_PARTICIPANTS = 16
ENUMERATION_CAP = 10

SIGNIFICANT = "significant"
VACUOUS = "vacuous"
COMMON = "common"


def popcount(mask):
    return mask.bit_count()


def mask_of(indices):
    """Bitmask of a collection of 0-based participant indices."""
    mask = 0
    for i in indices:
        if i < 0:
            raise AccessStructureError(f"negative participant index {i}")
        mask |= 1 << i
    return mask


def indices_of(mask):
    return [i for i in range(mask.bit_length()) if mask >> i & 1]


def format_set(mask, names=None):
    """Render a mask as ``{V1,V4}`` (1-based, or with the given names)."""
    if names is None:
        return "{" + ",".join(f"V{i + 1}" for i in indices_of(mask)) + "}"
    return "{" + ",".join(names[i] for i in indices_of(mask)) + "}"


def check_participants(n, cap=MAX_PARTICIPANTS):
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise AccessStructureError(f"participant count must be a positive integer, got {n!r}")
    if n > cap:
        raise CapacityError(f"{n} participants exceeds the cap of {cap}")


def check_enumerable(n, cap=None):
    cap = ENUMERATION_CAP if cap is None else cap
    if n > cap:
        raise CapacityError(
            f"enumerating all 2^{n} subsets exceeds the cap of n <= {cap}; pass cap= to override"
        )


def _as_mask(item):
    if isinstance(item, ParticipantSet):
        return item.bits
    if isinstance(item, (int, np.integer)):
        return int(item)
    return mask_of(item)


@dataclass(frozen=True, order=True)
class ParticipantSet:
    """A subset of ``n`` participants; a readable wrapper over a bitmask."""

    bits: int
    n: int

    def __post_init__(self):
        if self.bits < 0 or self.bits >> self.n:
            raise AccessStructureError(f"mask {self.bits:#x} does not fit {self.n} participants")

    @classmethod
    def of(cls, n, indices):
        return cls(mask_of(indices), n)

    @classmethod
    def full(cls, n):
        return cls((1 << n) - 1, n)

    def indices(self):
        return indices_of(self.bits)

    def __len__(self):
        return popcount(self.bits)

    def __iter__(self):
        return iter(self.indices())

    def __contains__(self, i):
        return bool(self.bits >> i & 1)

    def _other(self, other):
        if isinstance(other, ParticipantSet):
            if other.n != self.n:
                raise AccessStructureError("participant sets over different n")
            return other.bits
        return _as_mask(other)

    def __or__(self, other):
        return ParticipantSet(self.bits | self._other(other), self.n)

    def __and__(self, other):
        return ParticipantSet(self.bits & self._other(other), self.n)

    def __sub__(self, other):
        return ParticipantSet(self.bits & ~self._other(other), self.n)

    def issubset(self, other):
        return self.bits & ~self._other(other) == 0

    def issuperset(self, other):
        return self._other(other) & ~self.bits == 0

    def complement(self):
        return ParticipantSet(((1 << self.n) - 1) & ~self.bits, self.n)

    def __str__(self):
        return format_set(self.bits)


class SetFamily:
    """A duplicate-free family of subsets of ``n`` participants.

    Members may be given as masks, ``ParticipantSet`` objects or iterables of
    0-based indices; they are stored as masks in ascending order.
    """

    __slots__ = ("n", "members")

    def __init__(self, n, members=()):
        check_participants(n)
        masks = sorted({_as_mask(m) for m in members})
        if masks and masks[-1] >> n:
            raise AccessStructureError(
                f"set {format_set(masks[-1])} mentions a participant beyond V{n}"
            )
        self.n = n
        self.members = tuple(masks)

    def __iter__(self):
        return iter(self.members)

    def __len__(self):
        return len(self.members)

    def __contains__(self, item):
        return _as_mask(item) in set(self.members)

    def __getitem__(self, i):
        return self.members[i]

    def __eq__(self, other):
        if not isinstance(other, SetFamily):
            return NotImplemented
        return self.n == other.n and self.members == other.members

    def __hash__(self):
        return hash((self.n, self.members))

    def __repr__(self):
        return f"SetFamily(n={self.n}, {self.format()})"

    def format(self, names=None):
        return "{" + ", ".join(format_set(m, names) for m in self.members) + "}"

    def to_lists(self):
        return [indices_of(m) for m in self.members]

    def sets(self):
        return [ParticipantSet(m, self.n) for m in self.members]

    def is_antichain(self):
        ms = self.members
        return not any(a != b and a & ~b == 0 for a in ms for b in ms)


class Multiset:
    """A family of participant sets in which repeats are allowed."""

    def __init__(self, n, items=()):
        check_participants(n)
        counts = {}
        for item in items:
            mask = _as_mask(item)
            counts[mask] = counts.get(mask, 0) + 1
        self.n = n
        self.counts = dict(sorted(counts.items()))

    def __len__(self):
        return sum(self.counts.values())

    def __iter__(self):
        """Members with repetition, ascending by mask."""
        for mask, c in self.counts.items():
            for _ in range(c):
                yield mask

    def multiplicity(self, item):
        return self.counts.get(_as_mask(item), 0)

    def supersets_count(self, item):
        """Number of members (repeats counted) that contain ``item``."""
        a = _as_mask(item)
        return sum(c for m, c in self.counts.items() if a & ~m == 0)

    def __eq__(self, other):
        if not isinstance(other, Multiset):
            return NotImplemented
        return self.n == other.n and self.counts == other.counts

    def __repr__(self):
        body = ", ".join(
            format_set(m) + (f"x{c}" if c > 1 else "") for m, c in self.counts.items()
        )
        return f"Multiset(n={self.n}, {{{body}}})"


def _family(f, n=None):
    if isinstance(f, SetFamily):
        return f
    if n is None:
        raise AccessStructureError("participant count needed to build a family")
    return SetFamily(n, f)


def minimal_sets(f):
    """Members of ``f`` with no proper subset in ``f``."""
    ms = f.members
    keep = [a for a in ms if not any(b != a and b & ~a == 0 for b in ms)]
    return SetFamily(f.n, keep)


def maximal_sets(f):
    """Members of ``f`` with no proper superset in ``f``."""
    ms = f.members
    keep = [a for a in ms if not any(b != a and a & ~b == 0 for b in ms)]
    return SetFamily(f.n, keep)


# Subset-lattice transforms on indicator arrays of length 2^n.  Index a of the
# reshaped view (-1, 2, 2^i) is (high bits, bit i, low bits).

def indicator(n, masks):
    arr = np.zeros(1 << n, dtype=bool)
    arr[list(masks)] = True
    return arr


def up_closed(arr, n):
    """``out[A]`` is true iff ``arr[B]`` for some ``B`` contained in ``A``."""
    out = arr.copy()
    for i in range(n):
        v = out.reshape(-1, 2, 1 << i)
        v[:, 1, :] |= v[:, 0, :]
    return out


def down_closed(arr, n):
    """``out[A]`` is true iff ``arr[B]`` for some ``B`` containing ``A``."""
    out = arr.copy()
    for i in range(n):
        v = out.reshape(-1, 2, 1 << i)
        v[:, 0, :] |= v[:, 1, :]
    return out


def _max_over_subsets(arr, n):
    out = arr.copy()
    for i in range(n):
        v = out.reshape(-1, 2, 1 << i)
        np.maximum(v[:, 1, :], v[:, 0, :], out=v[:, 1, :])
    return out


def _min_over_supersets(arr, n):
    out = arr.copy()
    for i in range(n):
        v = out.reshape(-1, 2, 1 << i)
        np.minimum(v[:, 0, :], v[:, 1, :], out=v[:, 0, :])
    return out


def _has_proper_subset(arr, n):
    """``out[A]`` is true iff ``arr[B]`` for some ``B`` strictly inside ``A``."""
    closed = up_closed(arr, n)
    out = np.zeros_like(arr)
    idx = np.arange(1 << n)
    for i in range(n):
        bit = 1 << i
        sel = idx[(idx & bit) != 0]
        out[sel] |= closed[sel ^ bit]
    return out


def _has_proper_superset(arr, n):
    closed = down_closed(arr, n)
    out = np.zeros_like(arr)
    idx = np.arange(1 << n)
    for i in range(n):
        bit = 1 << i
        sel = idx[(idx & bit) == 0]
        out[sel] |= closed[sel | bit]
    return out


def upward_closure(f, cap=None):
    """All supersets (within 2^V) of members of ``f``."""
    check_enumerable(f.n, cap)
    return SetFamily(f.n, np.flatnonzero(up_closed(indicator(f.n, f.members), f.n)).tolist())


def downward_closure(f, cap=None):
    """All subsets of members of ``f``."""
    check_enumerable(f.n, cap)
    return SetFamily(f.n, np.flatnonzero(down_closed(indicator(f.n, f.members), f.n)).tolist())


def k_subsets(n, k):
    return [mask_of(c) for c in combinations(range(n), k)]


@dataclass(frozen=True)
class AccessStructure:
    """Perfect access structure held as minimal qualified / maximal forbidden sets.

    Families given at construction are reduced to antichains.  ``complete``
    declares that every subset of ``V`` is either qualified or forbidden; for
    incomplete structures only the listed sets (and their monotone closures)
    are constrained.  Contradictions are not rejected here, see
    :func:`check_consistency`.
    """

    n: int
    qualified_min: SetFamily
    forbidden_max: SetFamily
    complete: bool = True
    names: tuple | None = None

    def __post_init__(self):
        check_participants(self.n)
        q = minimal_sets(_family(self.qualified_min, self.n))
        f = maximal_sets(_family(self.forbidden_max, self.n))
        if q.n != self.n or f.n != self.n:
            raise AccessStructureError("families and structure disagree on n")
        if not len(q):
            raise AccessStructureError("access structure has no qualified sets")
        object.__setattr__(self, "qualified_min", q)
        object.__setattr__(self, "forbidden_max", f)
        if self.names is not None:
            if len(self.names) != self.n:
                raise AccessStructureError("names must list one name per participant")
            object.__setattr__(self, "names", tuple(self.names))

    @classmethod
    def from_qualified(cls, n, qualified, names=None):
        """Complete structure whose forbidden sets are everything not qualified."""
        check_enumerable(n)
        q = _family(qualified, n)
        qual = up_closed(indicator(n, q.members), n)
        forb = np.flatnonzero(~qual)
        fmax = maximal_sets(SetFamily(n, forb.tolist()))
        return cls(n, q, fmax, True, names)

    @classmethod
    def from_forbidden(cls, n, forbidden, names=None):
        check_enumerable(n)
        f = _family(forbidden, n)
        forb = down_closed(indicator(n, f.members), n)
        qmin = minimal_sets(SetFamily(n, np.flatnonzero(~forb).tolist()))
        return cls(n, qmin, f, True, names)

    @property
    def full(self):
        return (1 << self.n) - 1

    def is_qualified(self, mask):
        """True if ``mask`` contains a minimal qualified set."""
        mask = _as_mask(mask)
        return any(q & ~mask == 0 for q in self.qualified_min)

    def is_forbidden(self, mask):
        """True if ``mask`` lies inside a maximal forbidden set."""
        mask = _as_mask(mask)
        return any(mask & ~f == 0 for f in self.forbidden_max)

    @cached_property
    def qualified_indicator(self):
        check_enumerable(self.n)
        return up_closed(indicator(self.n, self.qualified_min.members), self.n)

    @cached_property
    def forbidden_indicator(self):
        check_enumerable(self.n)
        return down_closed(indicator(self.n, self.forbidden_max.members), self.n)

    def to_ramp(self):
        """The same structure viewed as a two-level ramp structure (L = 1)."""
        return RampAccessStructure(
            self.n, 1, (self.forbidden_max, self.qualified_min), names=self.names
        )

    def format(self):
        return (
            f"n={self.n} complete={self.complete}\n"
            f"  qualified_min = {self.qualified_min.format(self.names)}\n"
            f"  forbidden_max = {self.forbidden_max.format(self.names)}"
        )


def from_threshold(k, n):
    """The (k, n)-threshold structure: qualified iff at least k participants."""
    if not 1 <= k <= n:
        raise AccessStructureError(f"threshold needs 1 <= k <= n, got k={k}, n={n}")
    check_participants(n)
    return AccessStructure(n, SetFamily(n, k_subsets(n, k)), SetFamily(n, k_subsets(n, k - 1)))


def is_extendable(s):
    """True if no listed qualified set sits inside a listed forbidden set.

    For an incomplete structure this is exactly the condition under which a
    complete monotone structure containing it exists.
    """
    return not any(a & ~b == 0 for a in s.qualified_min for b in s.forbidden_max)


def check_consistency(s, cap=None):
    """Structural checks on a perfect access structure; returns a :class:`Report`."""
    rep = Report()
    names = s.names
    for fam, label in ((s.qualified_min, "qualified_min"), (s.forbidden_max, "forbidden_max")):
        if not fam.is_antichain():
            rep.violations.append(f"{label} is not an antichain")
    for a in s.qualified_min:
        for b in s.forbidden_max:
            if a & ~b == 0:
                rep.violations.append(
                    f"qualified set {format_set(a, names)} lies inside forbidden set "
                    f"{format_set(b, names)}"
                )
    if s.complete:
        check_enumerable(s.n, cap)
        q = up_closed(indicator(s.n, s.qualified_min.members), s.n)
        f = down_closed(indicator(s.n, s.forbidden_max.members), s.n)
        uncovered = np.flatnonzero(~(q | f))
        if uncovered.size:
            shown = ", ".join(format_set(int(m), names) for m in uncovered[:5])
            rep.violations.append(
                f"declared complete but {uncovered.size} subset(s) are neither qualified "
                f"nor forbidden, e.g. {shown}"
            )
    else:
        rep.notes.append("incomplete structure: only listed sets are constrained")
    return rep


def require_consistent(s):
    rep = check_consistency(s) if isinstance(s, AccessStructure) else ramp_check(s)
    if not rep.ok:
        raise AccessStructureError("inconsistent access structure:\n" + str(rep))


def classify_participants(s, cap=None):
    """Label each participant significant, vacuous or (ramp only) common.

    Exhaustive over 2^V: a participant is significant when adding it to some
    set moves that set to a strictly higher level.
    """
    if isinstance(s, RampAccessStructure):
        return _classify_ramp(s, cap)
    check_enumerable(s.n, cap)
    n = s.n
    q = s.qualified_indicator
    f = s.forbidden_indicator if not s.complete else ~q
    idx = np.arange(1 << n)
    labels = []
    for i in range(n):
        bit = 1 << i
        base = idx[(idx & bit) == 0]
        labels.append(SIGNIFICANT if np.any(f[base] & q[base | bit]) else VACUOUS)
    return tuple(labels)


def _classify_ramp(s, cap):
    check_enumerable(s.n, cap)
    n = s.n
    lev = s.levels
    idx = np.arange(1 << n)
    labels = []
    for i in range(n):
        bit = 1 << i
        base = idx[(idx & bit) == 0]
        a, b = lev[base], lev[base | bit]
        if np.any((a >= 0) & (b > a)):
            labels.append(SIGNIFICANT)
        elif lev[bit] >= 1:
            labels.append(COMMON)
        else:
            labels.append(VACUOUS)
    return tuple(labels)


@dataclass(frozen=True)
class RampAccessStructure:
    """Access structure of a ramp scheme with levels ``0..L``.

    ``listed[j]`` holds sets known to be at exactly level ``j``; these can be
    whole level families, or only their minimal and/or maximal representatives.
    Levels of unlisted sets are inferred through monotonicity: a set
    containing a level-``j`` set is at level ``>= j``, a set contained in one
    is at level ``<= j``.  A set whose bounds meet has a determined level; the
    structure is complete when every subset is determined.
    """

    n: int
    L: int
    listed: tuple
    names: tuple | None = None

    def __post_init__(self):
        check_participants(self.n)
        check_enumerable(self.n)
        if self.L < 1:
            raise AccessStructureError(f"ramp structures need L >= 1, got {self.L}")
        if len(self.listed) != self.L + 1:
            raise AccessStructureError(f"expected {self.L + 1} level families, got {len(self.listed)}")
        fams = tuple(_family(f, self.n) for f in self.listed)
        seen = {}
        for j, fam in enumerate(fams):
            for a in fam:
                if a in seen and seen[a] != j:
                    raise AccessStructureError(
                        f"set {format_set(a)} listed at levels {seen[a]} and {j}"
                    )
                seen[a] = j
        object.__setattr__(self, "listed", fams)
        if self.names is not None:
            object.__setattr__(self, "names", tuple(self.names))

    @classmethod
    def from_levels(cls, n, L, levels, names=None):
        """Build from a mapping ``level -> iterable of sets``."""
        fams = [[] for _ in range(L + 1)]
        for j, sets in levels.items():
            j = int(j)
            if not 0 <= j <= L:
                raise AccessStructureError(f"level {j} outside 0..{L}")
            fams[j].extend(sets)
        return cls(n, L, tuple(SetFamily(n, f) for f in fams), names)

    @cached_property
    def bounds(self):
        """Per-subset (lower, upper) level bounds implied by the listed sets."""
        n, L = self.n, self.L
        lo = np.full(1 << n, -1, dtype=np.int16)
        hi = np.full(1 << n, L + 1, dtype=np.int16)
        for j, fam in enumerate(self.listed):
            for a in fam:
                lo[a] = j
                hi[a] = j
        lo = _max_over_subsets(lo, n)
        hi = _min_over_supersets(hi, n)
        return np.maximum(lo, 0), np.minimum(hi, L)

    @cached_property
    def levels(self):
        """Determined level of every subset, ``-1`` where undetermined."""
        lo, hi = self.bounds
        lev = np.where(lo == hi, lo, -1).astype(np.int16)
        return lev

    @property
    def complete(self):
        return bool(np.all(self.levels >= 0))

    def level_of(self, mask):
        lev = int(self.levels[_as_mask(mask)])
        return None if lev < 0 else lev

    def level_family(self, j):
        """All subsets with determined level ``j``."""
        return SetFamily(self.n, np.flatnonzero(self.levels == j).tolist())

    def perfect_level_structure(self, j):
        """Perfect structure whose qualified sets are those at level ``>= j``."""
        if not 1 <= j <= self.L:
            raise AccessStructureError(f"level {j} outside 1..{self.L}")
        lev = self.levels
        q = minimal_sets(SetFamily(self.n, np.flatnonzero(lev >= j).tolist()))
        f = maximal_sets(SetFamily(self.n, np.flatnonzero((lev >= 0) & (lev < j)).tolist()))
        return AccessStructure(self.n, q, f, self.complete, self.names)

    def format(self):
        lines = [f"n={self.n} L={self.L} complete={self.complete}"]
        for j, (mins, maxs) in enumerate(ramp_min_max(self)):
            lines.append(f"  A{j}-: {mins.format(self.names)}")
            lines.append(f"  A{j}+: {maxs.format(self.names)}")
        return "\n".join(lines)


def ramp_from_threshold(k, L, n):
    """The (k, L, n)-threshold ramp structure."""
    if not 1 <= L <= k <= n:
        raise AccessStructureError(f"ramp threshold needs 1 <= L <= k <= n, got ({k},{L},{n})")
    check_participants(n)
    fams = [SetFamily(n, k_subsets(n, k - L))]
    fams += [SetFamily(n, k_subsets(n, k - L + j)) for j in range(1, L)]
    fams.append(SetFamily(n, k_subsets(n, k)))
    return RampAccessStructure(n, L, tuple(fams))


def ramp_check(s):
    """Extended monotonicity of a ramp structure; constructible iff no violation."""
    rep = Report()
    names = s.names
    listed = [(a, j) for j, fam in enumerate(s.listed) for a in fam]
    for a, ja in listed:
        for b, jb in listed:
            if a != b and a & ~b == 0 and ja > jb:
                rep.violations.append(
                    f"{format_set(a, names)} at level {ja} is inside "
                    f"{format_set(b, names)} at level {jb}"
                )
    if not s.complete and rep.ok:
        undetermined = int(np.sum(s.levels < 0))
        rep.notes.append(f"incomplete: {undetermined} subset(s) have no determined level")
    return rep


def ramp_min_max(s):
    """Per-level ``(A_j^-, A_j^+)``: minimal sets w.r.t. levels ``>= j`` and maximal w.r.t. ``<= j``."""
    rep = ramp_check(s)
    if not rep.ok:
        raise AccessStructureError("ramp structure violates monotonicity:\n" + str(rep))
    n, lev = s.n, s.levels
    out = []
    for j in range(s.L + 1):
        at = lev == j
        below_sub = _has_proper_subset(lev >= j, n)
        above_sup = _has_proper_superset((lev >= 0) & (lev <= j), n)
        mins = SetFamily(n, np.flatnonzero(at & ~below_sub).tolist())
        maxs = SetFamily(n, np.flatnonzero(at & ~above_sup).tolist())
        out.append((mins, maxs))
    return tuple(out)


# JSON documents ----------------------------------------------------------

def structure_from_dict(doc):
    """Parse the JSON access-structure document (see README for the schema)."""
    try:
        n = int(doc["n"])
        kind = doc.get("kind", "perfect")
        names = doc.get("names")
        if kind == "perfect":
            complete = bool(doc.get("complete", True))
            q = doc.get("qualified_min")
            f = doc.get("forbidden_max")
            if q is None:
                raise AccessStructureError("perfect structure needs 'qualified_min'")
            if f is None:
                if not complete:
                    raise AccessStructureError("incomplete structure needs 'forbidden_max'")
                return AccessStructure.from_qualified(n, [list(x) for x in q], names)
            return AccessStructure(
                n, SetFamily(n, [list(x) for x in q]), SetFamily(n, [list(x) for x in f]),
                complete, names,
            )
        if kind == "ramp":
            L = int(doc["L"])
            levels = {}
            for j, spec in doc["levels"].items():
                sets = []
                for key in ("sets", "min", "max"):
                    sets.extend(list(x) for x in spec.get(key, []))
                levels[int(j)] = sets
            return RampAccessStructure.from_levels(n, L, levels, names)
        raise AccessStructureError(f"unknown structure kind {kind!r}")
    except (KeyError, TypeError) as exc:
        raise AccessStructureError(f"malformed structure document: {exc!r}") from exc


def structure_to_dict(s):
    if isinstance(s, AccessStructure):
        doc = {
            "n": s.n,
            "kind": "perfect",
            "complete": s.complete,
            "qualified_min": s.qualified_min.to_lists(),
            "forbidden_max": s.forbidden_max.to_lists(),
        }
    else:
        doc = {"n": s.n, "kind": "ramp", "L": s.L, "complete": s.complete, "levels": {}}
        for j, (mins, maxs) in enumerate(ramp_min_max(s)):
            doc["levels"][str(j)] = {"min": mins.to_lists(), "max": maxs.to_lists()}
    if s.names is not None:
        doc["names"] = list(s.names)
    return doc


def load_structure(path):
    with open(path) as fh:
        return structure_from_dict(json.load(fh))


def dump_structure(s, path):
    Path(path).write_text(json.dumps(structure_to_dict(s), indent=2) + "\n")
