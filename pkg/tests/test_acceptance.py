"""Acceptance checks, one group per numbered criterion.

Run directly (``python tests/test_acceptance.py``) or through pytest; either
way the terminal summary prints one PASS/FAIL line per criterion.
"""

import random
import sys
import time
from fractions import Fraction as F
from itertools import combinations

import pytest

import oracles
from multiassign import crypto, ilp, maps, scheme
from multiassign.access import is_extendable, ramp_min_max
from multiassign.exceptions import ReconstructionRefused
from multiassign.lp import Status


def rate_pair(amap):
    r = maps.rates(amap)
    return r.average, r.worst


def dims(amap):
    return (amap.t, amap.m) if amap.L == 1 else (amap.t, amap.L, amap.m)


# 1. Gamma_1 ----------------------------------------------------------------------

@pytest.mark.criterion(1)
def test_c1_cumulative(fixtures):
    assert rate_pair(maps.cumulative_map(fixtures["gamma1"])) == (F(9, 4), 3)


@pytest.mark.criterion(1)
def test_c1_modified(fixtures):
    assert rate_pair(maps.modified_cumulative_map(fixtures["gamma1"])) == (F(5, 2), 4)


@pytest.mark.criterion(1)
def test_c1_ip_avg(fixtures):
    s = fixtures["gamma1"]
    amap, sol = ilp.optimal_map(s, ilp.AVG)
    assert sol.objective == 5
    assert rate_pair(amap) == (F(5, 4), 2)
    assert maps.verify_perfect(amap, s).ok


@pytest.mark.criterion(1)
def test_c1_ip_worst(fixtures):
    amap, sol = ilp.optimal_map(fixtures["gamma1"], ilp.WORST)
    assert sol.objective == 2
    assert max(amap.sizes()) == 2


# 2. Gamma_2 ----------------------------------------------------------------------

@pytest.mark.criterion(2)
def test_c2_cumulative(fixtures):
    assert rate_pair(maps.cumulative_map(fixtures["gamma2"])) == (4, 4)


@pytest.mark.criterion(2)
def test_c2_modified(fixtures):
    assert rate_pair(maps.modified_cumulative_map(fixtures["gamma2"])) == (F(13, 5), 5)


@pytest.mark.criterion(2)
def test_c2_ip(fixtures):
    s = fixtures["gamma2"]
    amap, _ = ilp.optimal_map(s, ilp.AVG)
    assert rate_pair(amap) == (F(6, 5), 2)
    assert dims(amap) == (4, 6)
    assert maps.verify_perfect(amap, s).ok


# 3. Gamma_3 ----------------------------------------------------------------------

@pytest.mark.criterion(3)
def test_c3_ip(fixtures):
    s = fixtures["gamma3"]
    start = time.perf_counter()
    amap, _ = ilp.optimal_map(s, ilp.AVG)
    assert time.perf_counter() - start < 60
    assert rate_pair(amap) == (2, 4)
    assert dims(amap) == (6, 8)


@pytest.mark.criterion(3)
def test_c3_cumulative(fixtures):
    amap = maps.cumulative_map(fixtures["gamma3"])
    assert rate_pair(amap) == (F(35, 6), 7)
    assert dims(amap) == (11, 11)


@pytest.mark.criterion(3)
def test_c3_modified(fixtures):
    amap = maps.modified_cumulative_map(fixtures["gamma3"])
    assert dims(amap) == (12, 15)
    assert rate_pair(amap) == (5, 9)


@pytest.mark.criterion(3)
def test_c3_solver_time(fixtures):
    for kind in (ilp.AVG, ilp.WORST):
        start = time.perf_counter()
        sol = ilp.solve_structure(fixtures["gamma3"], kind)
        assert sol.optimal
        assert time.perf_counter() - start < 60


# 4. Gamma_3 sharp (incomplete) ---------------------------------------------------

@pytest.mark.criterion(4)
def test_c4_extendable(fixtures):
    assert is_extendable(fixtures["gamma3_sharp"])


@pytest.mark.criterion(4)
def test_c4_ip(fixtures):
    s = fixtures["gamma3_sharp"]
    amap, _ = ilp.optimal_map(s, ilp.AVG)
    assert rate_pair(amap) == (F(7, 6), 2)
    assert dims(amap) == (4, 6)
    assert maps.verify_perfect(amap, s).ok


@pytest.mark.criterion(4)
def test_c4_cumulative(fixtures):
    amap = maps.cumulative_map(fixtures["gamma3_sharp"])
    assert rate_pair(amap) == (3, 5)
    assert dims(amap) == (6, 6)


# 5. Gamma_4^R --------------------------------------------------------------------

@pytest.mark.criterion(5)
def test_c5_exact_ip(fixtures):
    s = fixtures["gamma4_ramp"]
    amap, _ = ilp.optimal_map(s, ilp.AVG, maps.EXACT)
    assert rate_pair(amap) == (F(2, 3), F(2, 3))
    assert dims(amap) == (7, 3, 7)
    assert maps.verify_ramp(amap, s, maps.EXACT).ok


@pytest.mark.criterion(5)
def test_c5_construction2_ideal_levels(fixtures):
    recipe = maps.construction2_ramp(fixtures["gamma4_ramp"], maps.IP_WORST)
    assert (recipe.rates.average, recipe.rates.worst) == (1, 1)


# 6. Gamma_5^R --------------------------------------------------------------------

@pytest.mark.criterion(6)
def test_c6_exact_infeasible(fixtures):
    sol = ilp.solve_structure(fixtures["gamma5_ramp"], ilp.AVG, maps.EXACT)
    assert sol.status == Status.INFEASIBLE


@pytest.mark.criterion(6)
def test_c6_relaxed_ip(fixtures):
    s = fixtures["gamma5_ramp"]
    amap, _ = ilp.optimal_map(s, ilp.AVG, maps.RELAXED)
    assert rate_pair(amap) == (F(1, 2), F(3, 4))
    assert dims(amap) == (8, 4, 9)
    assert maps.verify_ramp(amap, s, maps.RELAXED).ok


@pytest.mark.criterion(6)
def test_c6_construction3(fixtures):
    s = fixtures["gamma5_ramp"]
    amap = maps.ramp_cumulative_map(s)
    assert maps.verify_ramp(amap, s, maps.RELAXED).ok
    avg, worst = rate_pair(amap)
    assert amap.m <= 11 and avg <= F(21, 20) and worst <= F(3, 2)


@pytest.mark.criterion(6)
def test_c6_construction2_cumulative(fixtures):
    recipe = maps.construction2_ramp(fixtures["gamma5_ramp"], maps.CUMULATIVE)
    assert (recipe.rates.average, recipe.rates.worst) == (F(9, 5), 2)


# 7. Cumulative map is the unique t = m optimum -----------------------------------

def random_complete_sample():
    rng = random.Random(7)
    out = []
    while len(out) < 200:
        n = rng.randint(2, 5)
        out.append(oracles.random_complete_structure(n, rng))
    return out


@pytest.mark.criterion(7)
def test_c7_t_equals_m_optimum_is_cumulative():
    for s in random_complete_sample():
        prog = ilp.build_ip(s, ilp.AVG, keep_common=True)
        row = [1 if r == ilp.T else (0 if isinstance(r, str) else -1) for r in prog.roles]
        sol = ilp.solve(prog.with_rows([(row, "=", 0)], ["t = m"]))
        assert sol.optimal, s.format()
        amap = ilp.solution_to_map(s, sol)
        cum = maps.cumulative_map(s)
        assert amap.m == amap.t == len(s.forbidden_max), s.format()
        assert amap.holder_profile() == cum.holder_profile(), s.format()


# 8. Feasibility on every consistent structure ------------------------------------

@pytest.mark.criterion(8)
def test_c8_perfect_exhaustive_small():
    for n in range(1, 5):
        for s in oracles.all_complete_structures(n):
            for kind in (ilp.AVG, ilp.WORST):
                assert ilp.solve_structure(s, kind).status == Status.OPTIMAL, s.format()


@pytest.mark.criterion(8)
def test_c8_perfect_sampled_n5():
    rng = random.Random(85)
    for _ in range(60):
        s = oracles.random_complete_structure(5, rng)
        assert ilp.solve_structure(s, ilp.AVG).status == Status.OPTIMAL, s.format()


@pytest.mark.criterion(8)
def test_c8_ramp_relaxed_sampled():
    rng = random.Random(86)
    for _ in range(60):
        n, L = rng.randint(2, 5), rng.randint(1, 3)
        s, _ = oracles.random_ramp_structure(n, L, rng)
        sol = ilp.solve_structure(s, ilp.AVG, maps.RELAXED)
        assert sol.status == Status.OPTIMAL, s.format()
        assert maps.verify_ramp(ilp.solution_to_map(s, sol), s, maps.RELAXED).ok


# 9. Solver optimum equals exhaustive search ---------------------------------------

@pytest.mark.criterion(9)
@pytest.mark.parametrize("n", [3, 4])
def test_c9_oracle_optimality(n):
    structures = oracles.all_complete_structures(n)
    if n == 4:
        structures = oracles.sample(structures, 200, seed=9)
    for s in structures:
        bound = sum(maps.cumulative_map(s).sizes())
        want, _ = oracles.exhaustive_avg_optimum(s, bound)
        assert want is not None
        assert ilp.solve_structure(s, ilp.AVG).objective == want, s.format()


# 10. Ideal partitions --------------------------------------------------------------

@pytest.mark.criterion(10)
def test_c10_ideal_partition_matches_brute_force():
    for n in range(1, 5):
        for s in oracles.all_complete_structures(n):
            reps = oracles.brute_force_ideal(s)
            res = maps.ideal_partition(s)
            assert res.ideal == bool(reps), s.format()
            if res.ideal:
                assert (res.t, tuple(sorted(res.blocks))) in reps


# 11. Entropy ladder ----------------------------------------------------------------

@pytest.mark.criterion(11)
def test_c11_ladder_gf5():
    p = 5
    for m in range(1, 6):
        for t in range(1, m + 1):
            for L in range(1, t + 1):
                crypto.ramp_split([0] * L, t, L, m, p, random.Random(0))
                for w in range(m + 1):
                    want = min(max(F(t - w, L), F(0)), F(1))
                    for pts in combinations(range(1, m + 1), w):
                        assert crypto.entropy_oracle(p, t, L, pts) == want, (t, L, m, pts)


# 12. End to end --------------------------------------------------------------------

def e2e_map(name, s):
    if name == "gamma5_ramp":
        return ilp.optimal_map(s, ilp.AVG, maps.RELAXED)[0]
    return ilp.optimal_map(s, ilp.AVG, maps.EXACT if name.endswith("ramp") else None)[0]


def qualified_and_forbidden(s):
    if hasattr(s, "L"):
        fams = ramp_min_max(s)
        return list(fams[s.L][0]), list(fams[0][1])
    return list(s.qualified_min), list(s.forbidden_max)


@pytest.mark.criterion(12)
@pytest.mark.parametrize("name", ["gamma1", "gamma2", "gamma3", "gamma3_sharp", "gamma4_ramp", "gamma5_ramp"])
def test_c12_split_combine(fixtures, name):
    s = fixtures[name]
    amap = e2e_map(name, s)
    mode = maps.RELAXED if name == "gamma5_ramp" else maps.EXACT
    qual, forb = qualified_and_forbidden(s)
    rng = random.Random(1200 + len(name))
    for k in range(20):
        secret = rng.randbytes(rng.randint(1, 64))
        bundles = scheme.distribute(secret, amap, s, rng=random.Random(k), mode=mode)
        for a in qual:
            chosen = [bundles[i] for i in range(s.n) if a >> i & 1]
            assert scheme.reconstruct(chosen, amap) == secret
        for b in forb:
            chosen = [bundles[i] for i in range(s.n) if b >> i & 1]
            with pytest.raises(ReconstructionRefused):
                scheme.reconstruct(chosen, amap)


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
