"""Monte Carlo k-purities against the exact tensor-network values.

For unitary gates the P-gate columns are probability vectors, so sampling is a
plain Markov chain. Orthogonal gates carry negative entries and the signed
estimator loses effective samples.
"""

import numpy as np

from momentnet import hea_topology, k_purities, kl_divergence, mc_sample_purities, sample_complexity_bound

for group in ("U4", "O4"):
    top = hea_topology(5, 3, group)
    tn = k_purities(top, "Z1").values
    print(f"{group}: exact {np.round(tn, 4)}")
    for n_s in (100, 1_000, 10_000, 100_000):
        res = mc_sample_purities(top, "Z1", n_s, seed=7)
        kl = kl_divergence(tn, res.estimates, n_s)
        print(f"  n_s={n_s:>6}  KL={kl:.2e}  ESS/n_s={res.ess / n_s:.3f}  negative={res.sign_fraction:.3f}")

for n in (4, 8, 12):
    print(f"samples to resolve 4^-{n}: {sample_complexity_bound(n):.3e}")
