"""Second moment of a 3-qubit, 2-gate brick-wall circuit, three ways.

Tensor-network contraction, dense oracle and a brute-force Haar average should
all agree on E[<000|U^dag Z1 U|000>^2] = 1/5.
"""

from momentnet import circuit_moment, exact_moment_small, hea_topology, pgate_u4_t2

top = hea_topology(3, 1)
print("gates:", [g.qubits for g in top.gates])
print("U(4) P-gate (basis 1, S per site):")
for row in pgate_u4_t2().exact:
    print("   ", "  ".join(f"{str(x):>4}" for x in row))

tn = circuit_moment(top, "000", "Z1")
dense = exact_moment_small(top, "000", "Z1")
haar = exact_moment_small(top, "000", "Z1", mode="sampled", n_samples=200_000, rng=1)
print(f"tensor network : {tn:.15f}")
print(f"dense oracle   : {dense:.15f}")
print(f"Haar average   : {haar.mean:.5f} +- {haar.stderr:.5f}")
