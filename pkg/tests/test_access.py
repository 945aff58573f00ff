import json
from math import comb

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from multiassign.access import (
    COMMON,
    SIGNIFICANT,
    VACUOUS,
    AccessStructure,
    Multiset,
    ParticipantSet,
    RampAccessStructure,
    SetFamily,
    check_consistency,
    classify_participants,
    downward_closure,
    from_threshold,
    is_extendable,
    load_structure,
    mask_of,
    maximal_sets,
    minimal_sets,
    ramp_check,
    ramp_from_threshold,
    ramp_min_max,
    structure_from_dict,
    structure_to_dict,
    upward_closure,
)
from multiassign.exceptions import AccessStructureError, CapacityError


def fam(n, *sets):
    """Family from 1-based participant numbers, matching how the examples are written."""
    return SetFamily(n, [[i - 1 for i in s] for s in sets])


families = st.integers(min_value=1, max_value=5).flatmap(
    lambda n: st.tuples(st.just(n), st.lists(st.integers(0, (1 << n) - 1), max_size=8))
)


# Set algebra ---------------------------------------------------------------------

@given(st.integers(1, 8).flatmap(lambda n: st.tuples(st.just(n), st.sets(st.integers(0, n - 1)), st.sets(st.integers(0, n - 1)))))
def test_participant_set_matches_python_sets(args):
    n, a, b = args
    pa, pb = ParticipantSet.of(n, a), ParticipantSet.of(n, b)
    assert set((pa | pb).indices()) == a | b
    assert set((pa & pb).indices()) == a & b
    assert set((pa - pb).indices()) == a - b
    assert len(pa) == len(a)
    assert pa.issubset(pb) == (a <= b)
    assert set(pa.complement().indices()) == set(range(n)) - a


def test_participant_set_rejects_out_of_range():
    with pytest.raises(AccessStructureError):
        ParticipantSet(8, 3)


def test_set_family_is_sorted_and_deduplicated():
    f = SetFamily(3, [3, 1, 3, 2])
    assert list(f) == [1, 2, 3]
    assert 3 in f and [0, 1] in f


def test_multiset_counts_duplicates():
    u = Multiset(3, [0b011, 0b011, 0b111])
    assert len(u) == 3
    assert u.multiplicity(0b011) == 2
    assert u.supersets_count(0b001) == 3
    assert u.supersets_count(0b100) == 1


def test_minimal_and_maximal_examples():
    assert minimal_sets(fam(4, [1, 2], [1, 2, 3], [4])) == fam(4, [1, 2], [4])
    assert maximal_sets(fam(4, [1], [1, 2])) == fam(4, [1, 2])
    singletons = fam(3, [1], [2], [3])
    assert maximal_sets(singletons) == singletons
    at_least_two = SetFamily(3, [a for a in range(8) if bin(a).count("1") >= 2])
    assert minimal_sets(at_least_two) == fam(3, [1, 2], [1, 3], [2, 3])


def test_closure_examples(fixtures):
    assert upward_closure(fam(3, [1, 2])) == fam(3, [1, 2], [1, 2, 3])
    assert downward_closure(fam(4, [4])) == SetFamily(4, [0, 0b1000])
    g1 = fixtures["gamma1"]
    up = upward_closure(g1.qualified_min)
    assert len(up) == 8
    assert len(up) == sum(g1.is_qualified(a) for a in range(16))
    assert minimal_sets(up) == fam(4, [1, 2, 3], [1, 4], [2, 4], [3, 4])
    assert maximal_sets(downward_closure(g1.forbidden_max)) == fam(4, [1, 2], [1, 3], [2, 3], [4])


@given(families)
def test_closure_reduction_roundtrip(args):
    n, members = args
    f = SetFamily(n, members)
    assert minimal_sets(upward_closure(f)) == minimal_sets(f)
    assert maximal_sets(downward_closure(f)) == maximal_sets(f)
    assert minimal_sets(f).is_antichain() and maximal_sets(f).is_antichain()


def test_closure_refuses_large_n():
    with pytest.raises(CapacityError):
        upward_closure(SetFamily(12, [1]))


# Structures ----------------------------------------------------------------------

@pytest.mark.parametrize("k,n", [(k, n) for n in range(1, 7) for k in range(1, n + 1)])
def test_threshold_sizes(k, n):
    s = from_threshold(k, n)
    assert len(s.qualified_min) == comb(n, k)
    assert len(s.forbidden_max) == comb(n, k - 1)
    assert check_consistency(s).ok
    assert classify_participants(s) == (SIGNIFICANT,) * n


def test_threshold_examples():
    s = from_threshold(2, 3)
    assert len(s.qualified_min) == 3 and s.forbidden_max == fam(3, [1], [2], [3])
    s = from_threshold(4, 4)
    assert s.qualified_min == fam(4, [1, 2, 3, 4]) and len(s.forbidden_max) == 4
    s = from_threshold(1, 4)
    assert s.forbidden_max == SetFamily(4, [0])
    with pytest.raises(AccessStructureError):
        from_threshold(0, 3)


def test_fixture_consistency(fixtures):
    g1 = fixtures["gamma1"]
    rep = check_consistency(g1)
    assert rep.ok and g1.complete
    rep = check_consistency(fixtures["gamma3_sharp"])
    assert rep.ok and not fixtures["gamma3_sharp"].complete
    assert is_extendable(fixtures["gamma3_sharp"])


def test_contradiction_reported():
    s = AccessStructure(2, fam(2, [1]), fam(2, [1, 2]), complete=False)
    rep = check_consistency(s)
    assert not rep.ok
    assert "{V1}" in rep.violations[0] and "{V1,V2}" in rep.violations[0]
    assert not is_extendable(s)


def test_incomplete_coverage_reported():
    s = AccessStructure(3, fam(3, [1, 2]), fam(3, [3]), complete=True)
    rep = check_consistency(s)
    assert not rep.ok
    assert "neither qualified nor forbidden" in rep.violations[0]


def test_empty_qualified_rejected():
    with pytest.raises(AccessStructureError):
        AccessStructure(2, SetFamily(2), fam(2, [1, 2]))


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_complete_structures_partition_power_set(n):
    for s in oracles.all_complete_structures(n):
        q, f = s.qualified_indicator, s.forbidden_indicator
        assert not (q & f).any() and (q | f).all()
        assert AccessStructure.from_qualified(n, list(s.qualified_min)) == s
        assert AccessStructure.from_forbidden(n, list(s.forbidden_max)) == s


# Classification ------------------------------------------------------------------

def brute_classify(s):
    out = []
    for i in range(s.n):
        sig = any(
            s.is_forbidden(a) and s.is_qualified(a | 1 << i)
            for a in range(1 << s.n) if not a >> i & 1
        )
        out.append(SIGNIFICANT if sig else VACUOUS)
    return tuple(out)


def test_classify_examples(fixtures):
    assert classify_participants(fixtures["gamma1"]) == (SIGNIFICANT,) * 4
    s = AccessStructure.from_qualified(2, [[0]])
    assert classify_participants(s) == (SIGNIFICANT, VACUOUS)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_classify_matches_definition(n):
    for s in oracles.all_complete_structures(n):
        assert classify_participants(s) == brute_classify(s)


def test_classify_common_participant():
    # Every coalition, even the empty one, sits at level >= 1; only V1 and V2 together reach level 2.
    s = RampAccessStructure.from_levels(3, 2, {1: [[], [0, 2], [1, 2]], 2: [[0, 1]]})
    assert s.complete
    assert classify_participants(s) == (SIGNIFICANT, SIGNIFICANT, COMMON)


# Ramp structures -----------------------------------------------------------------

def test_ramp_threshold_levels():
    s = ramp_from_threshold(3, 2, 4)
    for a in range(16):
        size = bin(a).count("1")
        assert s.level_of(a) == (0 if size <= 1 else 1 if size == 2 else 2)
    fams = ramp_min_max(s)
    assert len(fams[2][0]) == 4 and all(bin(a).count("1") == 3 for a in fams[2][0])
    s = ramp_from_threshold(4, 3, 4)
    assert [s.level_of(a) for a in (0, 1, 3, 7, 15)] == [0, 0, 1, 2, 3]


@pytest.mark.parametrize("k,n", [(k, n) for n in range(1, 6) for k in range(1, n + 1)])
def test_ramp_threshold_with_one_level_is_perfect(k, n):
    s = ramp_from_threshold(k, 1, n)
    assert s.perfect_level_structure(1) == from_threshold(k, n)


@pytest.mark.parametrize("k,L,n", [(k, L, n) for n in range(1, 6) for k in range(1, n + 1) for L in range(1, k + 1)])
def test_ramp_threshold_passes_check(k, L, n):
    assert ramp_check(ramp_from_threshold(k, L, n)).ok


def test_ramp_fixtures(fixtures):
    g4, g5 = fixtures["gamma4_ramp"], fixtures["gamma5_ramp"]
    assert ramp_check(g4).ok and g4.complete
    assert ramp_min_max(g4)[3][0] == fam(4, [1, 2, 3, 4])
    assert ramp_check(g5).ok
    assert ramp_min_max(g5)[4][0] == fam(5, [1, 2, 3, 4], [1, 2, 4, 5], [2, 3, 4, 5])
    # Two subsets of the Gamma_5 description are never pinned to a level.
    assert not g5.complete and int((g5.levels < 0).sum()) == 2


def test_ramp_violation_reported():
    s = RampAccessStructure.from_levels(3, 2, {2: [[0, 1]], 0: [[0, 1, 2]]})
    rep = ramp_check(s)
    assert not rep.ok
    with pytest.raises(AccessStructureError):
        ramp_min_max(s)


def test_ramp_rejects_double_listing():
    with pytest.raises(AccessStructureError):
        RampAccessStructure.from_levels(2, 1, {0: [[0]], 1: [[0]]})


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 5), st.integers(1, 3), st.randoms(use_true_random=False))
def test_ramp_level_inference_matches_scan(n, L, rng):
    s, levels = oracles.random_ramp_structure(n, L, rng)
    assert [s.level_of(a) for a in range(1 << n)] == levels
    # Representatives alone pin down every level again.
    reps = {j: list(mins) + list(maxs) for j, (mins, maxs) in enumerate(ramp_min_max(s))}
    t = RampAccessStructure.from_levels(n, L, reps)
    assert [t.level_of(a) for a in range(1 << n)] == levels
    assert oracles.ramp_level_table(t) == levels


# JSON ----------------------------------------------------------------------------

def test_json_roundtrip(fixtures, tmp_path):
    for name, s in fixtures.items():
        doc = json.loads(json.dumps(structure_to_dict(s)))
        back = structure_from_dict(doc)
        if isinstance(s, AccessStructure):
            assert back == s
        else:
            assert (back.levels == s.levels).all()


def test_json_qualified_only_means_complete(write_json):
    path = write_json("s.json", {"n": 3, "qualified_min": [[0, 1], [2]]})
    s = load_structure(path)
    assert s.complete and s.forbidden_max == SetFamily(3, [mask_of([0]), mask_of([1])])


@pytest.mark.parametrize("doc", [
    {"qualified_min": [[0]]},
    {"n": 2, "kind": "weird", "qualified_min": [[0]]},
    {"n": 2, "complete": False, "qualified_min": [[0]]},
    {"n": 2, "qualified_min": [[5]]},
])
def test_json_errors(doc):
    with pytest.raises(AccessStructureError):
        structure_from_dict(doc)
