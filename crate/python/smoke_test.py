"""Smoke test for the vnchain Python extension.

Build the extension and put it on the path, e.g.

    cargo build --release -p vnchain-py
    cp target/release/libvnchain_py.so python/vnchain.so
    python3 python/smoke_test.py
"""

import json
import math

import vnchain


def check(cond, what):
    if not cond:
        raise SystemExit(f"FAIL: {what}")
    print(f"ok: {what}")


h = math.sqrt(0.5)
plus = vnchain.StateVector([("A", 2)], [h, h])
pm = vnchain.Premeasurement.ideal("A", [0.0, 1.0], "B", 2)
out = pm.evolve(plus)
check(out.labels == ["A", "B"], "evolved state lives on A+B")
check(abs(out.amplitudes[0] - h) < 1e-12 and abs(out.amplitudes[3] - h) < 1e-12, "CNOT-like branching")
check(abs(out.partial_trace(["B"]).purity() - 0.5) < 1e-12, "reduced object state is maximally mixed")
weights = dict(pm.branch_weights(plus))
check(abs(weights[0] - 0.5) < 1e-12 and abs(weights[1] - 0.5) < 1e-12, "Born weights")

rel = out.relative_state("B", [1, 0])
check(abs(abs(rel.amplitudes[0]) - 1) < 1e-12, "relative state of |0>_B is |0>_A")

dressed = vnchain.Premeasurement.random(7, 3, 4)
check(all(p for _, _, p in dressed.check_all(10, 1)), "dressed premeasurement conditions")
check(not all(p for _, _, p in dressed.phase_swapped().check_all(10, 1)), "phase swap is detected")

members = [
    (0.5, vnchain.StateVector([("A", 2), ("B", 2)], [1, 0, 0, 0])),
    (0.5, vnchain.StateVector([("A", 2), ("B", 2)], [0, 0, h, h])),
]
ens = vnchain.WeightedEnsemble(members)
new, occ, agg = ens.update("B", [1, 0])
check(abs(occ - 0.75) < 1e-12 and abs(new[0] - 2 / 3) < 1e-12, "exact ensemble update")
mc = ens.monte_carlo("B", [1, 0], 20000, 3)
check(abs(mc[0] - 2 / 3) < 0.02, "Monte Carlo update")
check(abs(agg.trace() - 1) < 1e-12, "aggregate state normalised")

check(set(vnchain.builtins()) >= {"stern-gerlach", "wigner-friend"}, "builtins listed")
report = json.loads(vnchain.run_scenario("stern-gerlach", seed=1))
table = report["sections"][0]["table"]
check(abs(table["rows"][0]["weight"] - 0.3) < 1e-10, "Stern-Gerlach weights")
check(vnchain.run_scenario(vnchain.emit("world-split")) == vnchain.run_scenario("world-split"), "emit round trip")

passed, summary = vnchain.verify(3, 3, 4, 0)
check(passed and json.loads(summary)["pass"], "verify passes")
passed, _ = vnchain.verify(3, 3, 4, 0, "phase")
check(not passed, "verify detects corruption")

try:
    vnchain.run_scenario('{"name": "x"}')
except ValueError as e:
    check("E001" in str(e), "validation errors raise ValueError")
print("python smoke test passed")
