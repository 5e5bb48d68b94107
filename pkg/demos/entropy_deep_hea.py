"""Single-site entanglement of the evolved observable in a deep brick-wall circuit.

The deep limit has a closed-form single-site reduced state whose entropy
vanishes as n grows.
"""

from momentnet import deep_hea_reduced_state, entropy_scan, hea_topology
from momentnet.analysis import binary_entropy

for n in (4, 8, 16, 30):
    depth = 10 * n
    rows = entropy_scan(hea_topology(n, depth), "Z1", families=("Q",), measures=("S",), layers=[depth])
    closed = binary_entropy(deep_hea_reduced_state(n)[1])
    print(f"n={n:>2}  S(Q_1)={rows[0].value:.3e}  closed form={closed:.3e}")
