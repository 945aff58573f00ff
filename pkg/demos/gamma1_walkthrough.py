"""Walk through the four-participant example: classify, construct, optimize, share.

Run with ``python3 demos/gamma1_walkthrough.py``.
"""

import random

from multiassign import ilp, maps, scheme
from multiassign.access import classify_participants
from multiassign.exceptions import ReconstructionRefused
from multiassign.fixtures import load_fixture

s = load_fixture("gamma1")
print("structure:")
print(s.format())
print("participants:", ", ".join(classify_participants(s)))

for label, amap in [("cumulative", maps.cumulative_map(s)),
                    ("modified cumulative", maps.modified_cumulative_map(s))]:
    r = maps.rates(amap)
    print(f"\n{label}: t={amap.t} m={amap.m} average={r.average} worst={r.worst}")
    print(amap.format(s.names))

amap, sol = ilp.optimal_map(s, ilp.AVG)
r = maps.rates(amap)
print(f"\ninteger program: objective {sol.objective} after {sol.node_count} nodes")
print(f"t={amap.t} m={amap.m} average={r.average} worst={r.worst}")
print(amap.format(s.names))

secret = b"launch code 0000"
bundles = scheme.distribute(secret, amap, s, rng=random.Random(2024))
print("\nV1 + V4 recover:", scheme.reconstruct([bundles[0], bundles[3]], amap))
try:
    scheme.reconstruct([bundles[0], bundles[1]], amap)
except ReconstructionRefused as exc:
    print("V1 + V2 refused:", exc)
