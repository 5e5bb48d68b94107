"""Signed Monte Carlo estimates of k-purities from P-gate column transitions.

In Pauli-weight coordinates (see :func:`momentnet.analysis.weight_gauge`) every
column of a U(4) P-gate is a probability vector, so a Heisenberg evolution of a
Pauli observable becomes a Markov chain on per-site labels. Groups with signed
gates are handled by importance sampling proportional to ``|entry|``, carrying the
sign and the column 1-norm as a multiplicative weight.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .analysis import PurityDistribution, s_vectors, weight_gauge
from .circuits import PNet, Topology, build_pnet, parse_pauli, site_coordinates
from .commutant import PAULI

CHUNK = 16_384
NEG_TOL = 1e-14


@dataclass
class MCResult:
    """Monte Carlo k-purity estimates.

    Attributes:
        n_s: Number of trajectories.
        seed: Root seed.
        estimates: Estimated ``p^(k)`` for ``k = 0..n``.
        stderr: Standard error of every estimate.
        sign_fraction: Fraction of trajectories that ended with a negative sign.
        ess: Effective sample size ``(sum |w|)^2 / sum w^2``.
        metadata: Provenance.
    """

    n_s: int
    seed: int
    estimates: np.ndarray
    stderr: np.ndarray
    sign_fraction: float
    ess: float
    metadata: dict = field(default_factory=dict)

    @property
    def distribution(self) -> PurityDistribution:
        return PurityDistribution(self.estimates.size - 1, self.estimates, dict(self.metadata))

    def to_dict(self) -> dict:
        return {
            "n_s": self.n_s,
            "seed": self.seed,
            "estimates": [float(x) for x in self.estimates],
            "stderr": [float(x) for x in self.stderr],
            "sign_fraction": self.sign_fraction,
            "ess": self.ess,
            **self.metadata,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _chunk_rngs(seed: int, n_s: int) -> list[tuple[np.random.Generator, int]]:
    """One Philox substream per fixed-size chunk of trajectories."""
    n_chunks = -(-n_s // CHUNK)
    children = np.random.SeedSequence(seed).spawn(n_chunks)
    return [
        (np.random.Generator(np.random.Philox(c)), min(CHUNK, n_s - i * CHUNK))
        for i, c in enumerate(children)
    ]


def _sample_columns(cdf: np.ndarray, cols: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    u = rng.random(cols.size)
    out = (cdf[:, cols] < u[None, :]).sum(axis=0)
    return np.minimum(out, cdf.shape[0] - 1)


def mc_sample_purities(
    topology: Topology,
    pauli: str,
    n_s: int,
    seed: int = 0,
    pnet: PNet | None = None,
) -> MCResult:
    """Estimate k-purities by sampling label trajectories through the P-net.

    Each trajectory starts from a label configuration drawn proportionally to the
    observable's per-site weights and walks the gates in Heisenberg order, drawing
    the output labels of every gate proportionally to ``|column entry|``. The
    terminal bodyness is the number of non-identity labels.

    Args:
        topology: Circuit.
        pauli: Pauli observable.
        n_s: Number of trajectories.
        seed: Root seed; chunks of trajectories use spawned Philox substreams.
        pnet: Optional prebuilt P-net.

    Raises:
        ValueError: If ``n_s < 1`` or the observable is the identity.
    """
    if n_s < 1:
        raise ValueError("n_s must be positive")
    p = pnet if pnet is not None else build_pnet(topology)
    n = topology.n
    s = parse_pauli(pauli, n)
    if set(s) == {"I"}:
        raise ValueError("k-purities need a non-identity Pauli")
    group = p.basis.group
    r = weight_gauge(group, 1.0, p.t)
    r_inv = np.linalg.inv(r)
    r2, r2_inv = np.kron(r, r), np.kron(r_inv, r_inv)
    b = p.basis.dim
    non_identity = np.abs(r_inv.T @ s_vectors(group, p.t)[0]) < 0.5

    # Per-gate column transition data (shared by identical gates).
    tables = {}
    for g in p.gates:
        key = id(g)
        if key not in tables:
            m = r2 @ g.matrix @ r2_inv
            m[np.abs(m) < NEG_TOL] = 0.0
            a = np.abs(m)
            l1 = a.sum(axis=0)
            cdf = np.cumsum(a / np.where(l1 > 0, l1, 1.0), axis=0)
            tables[key] = (np.sign(m), l1, cdf)

    init = []
    for c in s:
        y = r @ site_coordinates(PAULI[c], p.basis)
        y[np.abs(y) < NEG_TOL] = 0.0
        init.append(y)

    weights = np.empty(n_s)
    ks = np.empty(n_s, dtype=np.int64)
    pos = 0
    for rng, size in _chunk_rngs(seed, n_s):
        labels = np.empty((size, n), dtype=np.int64)
        w = np.ones(size)
        for j, y in enumerate(init):
            a = np.abs(y)
            labels[:, j] = rng.choice(b, size=size, p=a / a.sum())
            w *= np.sign(y[labels[:, j]]) * a.sum()
        for gi in reversed(range(len(p.gates))):
            sign, l1, cdf = tables[id(p.gates[gi])]
            q0, q1 = (q - 1 for q in topology.gates[gi].qubits)
            cols = labels[:, q0] * b + labels[:, q1]
            out = _sample_columns(cdf, cols, rng)
            w *= sign[out, cols] * l1[cols]
            labels[:, q0], labels[:, q1] = out // b, out % b
        weights[pos:pos + size] = w
        ks[pos:pos + size] = non_identity[labels].sum(axis=1)
        pos += size

    est = np.zeros(n + 1)
    err = np.zeros(n + 1)
    for k in range(n + 1):
        x = np.where(ks == k, weights, 0.0)
        est[k] = x.mean()
        err[k] = x.std(ddof=1) / math.sqrt(n_s) if n_s > 1 else 0.0
    absw = np.abs(weights)
    sq = float((weights**2).sum())
    meta = {
        "n": n,
        "topology": topology.to_dict(),
        "topology_hash": topology.digest(),
        "observable": s,
        "basis": group,
        "gate_digests": p.metadata.get("gate_digests"),
        "rng": "Philox, SeedSequence-spawned substream per chunk",
        "chunk": CHUNK,
    }
    return MCResult(
        n_s=int(n_s),
        seed=int(seed),
        estimates=est,
        stderr=err,
        sign_fraction=float(np.mean(weights < 0)),
        ess=float(absw.sum() ** 2 / sq) if sq > 0 else 0.0,
        metadata=meta,
    )


def kl_divergence(p_true: Sequence[float], p_est: Sequence[float], n_s: int | None = None) -> float:
    """``sum p log(p / q)`` with ``q`` floored at ``1/(10 n_s)`` and renormalized.

    Without ``n_s`` no floor is applied, so empty bins under positive ``p`` give ``inf``.

    Raises:
        ValueError: If the arrays differ in length.
    """
    p = np.asarray(p_true, dtype=float)
    q = np.asarray(p_est, dtype=float)
    if p.shape != q.shape:
        raise ValueError("distributions must have the same support")
    if n_s is not None:
        q = np.maximum(q, 1.0 / (10.0 * n_s))
    q = q / q.sum()
    mask = p > 0
    with np.errstate(divide="ignore"):
        return float(np.sum(p[mask] * (np.log(p[mask]) - np.log(q[mask]))))


@dataclass(frozen=True)
class SignReport:
    """Sign structure of a P-gate in the element basis."""

    has_negative: bool
    min_entry: float
    column_l1_vs_sum: tuple[float, ...]

    def to_dict(self) -> dict:
        return {
            "has_negative": self.has_negative,
            "min_entry": self.min_entry,
            "column_l1_vs_sum": list(self.column_l1_vs_sum),
        }


def sign_problem_report(gate) -> SignReport:
    """Scan a P-gate (or a raw matrix) for negative transition weights.

    ``column_l1_vs_sum`` holds ``||col||_1 / |sum col|`` per column: 1 for columns
    without cancellations, ``inf`` when the column sums to zero but is nonzero.
    """
    m = gate.element_matrix() if hasattr(gate, "element_matrix") else np.asarray(gate, dtype=float)
    l1 = np.abs(m).sum(axis=0)
    tot = np.abs(m.sum(axis=0))
    ratios = tuple(
        1.0 if a == 0 else (math.inf if t <= NEG_TOL * a else float(a / t)) for a, t in zip(l1, tot)
    )
    return SignReport(bool(np.any(m < -NEG_TOL)), float(m.min()), ratios)


def sample_complexity_bound(n: int, epsilon: float | None = None, delta: float = 0.05) -> int:
    """Chernoff-type sample count ``ceil(epsilon**-2 * log(1/delta))``.

    ``epsilon`` defaults to ``4**-n``, the resolution needed to see exponentially
    small k-purities, which makes the bound grow as ``16**n``.

    Raises:
        ValueError: If ``delta`` is not in ``(0, 1]`` or ``epsilon`` is not positive.
    """
    if not 0 < delta <= 1:
        raise ValueError("delta must lie in (0, 1]")
    log_term = Fraction(math.log(1.0 / delta))
    if epsilon is None:
        inv_eps2 = Fraction(16) ** n
    else:
        if not epsilon > 0:
            raise ValueError("epsilon must be positive")
        inv_eps2 = 1 / Fraction(epsilon) ** 2
    return math.ceil(log_term * inv_eps2)
