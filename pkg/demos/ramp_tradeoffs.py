"""Compare the ramp constructions on the two ramp examples and check leakage exactly.

Run with ``python3 demos/ramp_tradeoffs.py``.
"""

from multiassign import crypto, ilp, maps, scheme
from multiassign.cli import compare_rows, format_table
from multiassign.fixtures import load_fixture
from multiassign.lp import Status

for name in ("gamma4_ramp", "gamma5_ramp"):
    s = load_fixture(name)
    print(f"== {name} (n={s.n}, L={s.L})")
    print(format_table(compare_rows(s)))
    exact = ilp.solve_structure(s, ilp.AVG, maps.EXACT)
    mode = maps.EXACT if exact.status == Status.OPTIMAL else maps.RELAXED
    amap = ilp.optimal_map(s, ilp.AVG, mode)[0]
    rep = scheme.verify_scheme(amap, s, mode, prime=5)
    print(f"{mode} optimum passes the GF(5) entropy oracle: {rep.ok}\n")

print("leakage ladder of a (3, 2, 5) ramp scheme over GF(5):")
for w in range(5):
    ratio = crypto.entropy_oracle(5, 3, 2, range(1, w + 1))
    print(f"  {w} shares -> H(S | shares) / H(S) = {ratio}")
