"""k-purity distribution of Z1 propagated through a 256-qubit QCNN.

Takes about 15 s. The weight of the measured operator spreads over many-body
Paulis with a peak well below the global-Haar peak at 3n/4.
"""

import numpy as np

from momentnet import haar_purities, k_purities, qcnn_topology

n = 256
dist = k_purities(qcnn_topology(n, conv="brick"), "Z1")
haar = haar_purities(n)
print(f"sum - 1    : {dist.total - 1:.2e}")
print(f"argmax k   : {dist.argmax}  (global Haar: {haar.argmax})")
print(f"p^(n)      : {dist.values[n]:.2e}")
print(f"max bond   : {dist.metadata['max_bond']}")
for k in np.linspace(1, n, 9).astype(int):
    print(f"  p^({k:3d}) = {dist.values[k]:.3e}")
