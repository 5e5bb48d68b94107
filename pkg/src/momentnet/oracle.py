"""Brute-force reference computations for small circuits.

Everything here avoids the per-site Pauli forms used by the P-gate path: gate
commutants come from permutation and pairing matrices (or from the Lie algebra
for free-fermionic gates), and moments are evaluated on the full vectorized
``t``-copy space or by sampling explicit Haar circuits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import permutations
from typing import Sequence

import numpy as np

from .circuits import Topology, parse_bits, parse_pauli
from .commutant import normalize_group

MAX_QUBITS = 5

_P = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


class BasisIncompleteError(ValueError):
    """Raised when a candidate commutant basis yields a non-idempotent projector."""


def haar_sample(dim: int, group: str, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    """Haar-random group element(s).

    Args:
        dim: Matrix dimension.
        group: ``"U"`` (unitary), ``"O"`` (orthogonal, both components) or
            ``"FF_SO4"`` (two-qubit free-fermionic gates, ``dim`` must be 4).
        rng: Random generator.
        size: Optional batch size; the result then has shape ``(size, dim, dim)``.
    """
    g = str(group).upper()
    shape = (dim, dim) if size is None else (size, dim, dim)
    if g in ("U", "U4"):
        z = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / math.sqrt(2)
        q, r = np.linalg.qr(z)
        d = np.diagonal(r, axis1=-2, axis2=-1)
        return q * (d / np.abs(d))[..., None, :]
    if g in ("O", "O4"):
        q, r = np.linalg.qr(rng.standard_normal(shape))
        return q * np.sign(np.diagonal(r, axis1=-2, axis2=-1))[..., None, :]
    if normalize_group(g) == "FF_SO4":
        if dim != 4:
            raise ValueError("free-fermionic gates act on two qubits (dim 4)")
        b = 1 if size is None else size
        even, odd = _haar_su2(rng, b), _haar_su2(rng, b)
        v = np.zeros((b, 4, 4), dtype=complex)
        for sector, block in (([0, 3], even), ([1, 2], odd)):
            idx = np.array(sector)
            v[:, idx[:, None], idx[None, :]] = block
        return v[0] if size is None else v
    raise ValueError(f"unsupported group {group!r}")


def _haar_su2(rng: np.random.Generator, size: int) -> np.ndarray:
    u = haar_sample(2, "U", rng, size)
    det = np.linalg.det(u)
    return u / np.sqrt(det)[:, None, None]


def _to_site_layout(op: np.ndarray, n: int, t: int) -> np.ndarray:
    """Copy-major ``t``-copy operator on ``n`` qubits -> site-grouped vector."""
    a = np.asarray(op).reshape([2] * (2 * n * t))
    axes = []
    for q in range(n):
        axes += [c * n + q for c in range(t)] + [n * t + c * n + q for c in range(t)]
    return np.transpose(a, axes).reshape(-1)


def _copy_permutation(perm: Sequence[int], d: int) -> np.ndarray:
    """Operator permuting ``t`` tensor factors of ``C^d``: copy ``c`` goes to ``perm[c]``."""
    t = len(perm)
    size = d**t
    w = np.zeros((size, size))
    for idx in np.ndindex(*([d] * t)):
        out = [0] * t
        for c in range(t):
            out[perm[c]] = idx[c]
        w[np.ravel_multi_index(out, [d] * t), np.ravel_multi_index(idx, [d] * t)] = 1.0
    return w


def _pairing(d: int) -> np.ndarray:
    """``sum_{ij} |ii><jj|`` on ``C^d (x) C^d``."""
    phi = np.eye(d).reshape(-1)
    return np.outer(phi, phi)


# Quadratic Majorana monomials on two qubits.
_FF_ALGEBRA = ["ZI", "IZ", "XX", "YY", "XY", "YX"]


def _two_qubit_pauli(label: str) -> np.ndarray:
    return np.kron(_P[label[0]], _P[label[1]])


def _lie_commutant(generators: Sequence[np.ndarray], t: int) -> np.ndarray:
    """Rows spanning operators on ``t`` copies that commute with every ``h^{(t)}``."""
    dim = generators[0].shape[0] ** t
    rows = []
    for h in generators:
        ht = np.zeros((dim, dim), dtype=complex)
        for c in range(t):
            ht += np.kron(np.kron(np.eye(h.shape[0] ** c), h), np.eye(h.shape[0] ** (t - c - 1)))
        # row-major vec: [H, X] -> (H (x) I - I (x) H^T) vec X
        rows.append(np.kron(ht, np.eye(dim)) - np.kron(np.eye(dim), ht.T))
    _, s, vh = np.linalg.svd(np.vstack(rows))
    return vh[s < 1e-9 * s[0]].conj()


@lru_cache(maxsize=None)
def oracle_gate_commutant(group: str, t: int = 2) -> np.ndarray:
    """Commutant elements of a two-qubit gate group as rows in the two-site layout.

    U(4): copy permutations of ``C^4``; O(4): plus the pairing (``t = 2``);
    free-fermionic SO(4): null space of the commutator with its Lie algebra.
    """
    g = normalize_group(group)
    if g == "FF_SO4":
        gens = [_two_qubit_pauli(lbl) for lbl in _FF_ALGEBRA]
        ops = _lie_commutant(gens, t)
        return np.array([_to_site_layout(o.reshape(4**t, 4**t), 2, t) for o in ops])
    ops = [_copy_permutation(p, 4) for p in permutations(range(t))]
    if g == "O4" and t == 2:
        ops.append(_pairing(4))
    elif g == "O4" and t > 2:
        raise ValueError("O(4) oracle commutant implemented for t <= 2")
    return np.array([_to_site_layout(o, 2, t) for o in ops])


def exact_twirl_projector(basis, t: int = 2, tol: float = 1e-8) -> np.ndarray:
    """Moment operator ``sum W+_{nu mu} |P_nu>><<P_mu|`` from a spanning set.

    Args:
        basis: A :class:`~momentnet.commutant.CommutantBasis`, a group tag (its
            oracle commutant is used) or an array whose rows are vectorized elements.
        t: Moment order (used when ``basis`` is a group tag).
        tol: Idempotence tolerance.

    Raises:
        BasisIncompleteError: If the result is not idempotent within ``tol``.
    """
    if isinstance(basis, str):
        e = oracle_gate_commutant(basis, t)
    elif hasattr(basis, "elements"):
        e = np.asarray(basis.elements)
    else:
        e = np.atleast_2d(np.asarray(basis))
    gram = e.conj() @ e.T
    u, s, vh = np.linalg.svd(gram)
    keep = s > 1e-10 * s[0]
    winv = (vh[keep].conj().T / s[keep]) @ u[:, keep].conj().T
    tau = e.T @ winv @ e.conj()
    residual = float(np.max(np.abs(tau @ tau - tau)))
    if residual > tol:
        raise BasisIncompleteError(f"projector is not idempotent (residual {residual:.2e})")
    if np.max(np.abs(tau.imag), initial=0.0) < 1e-12:
        tau = tau.real
    return tau


def project_to_site_basis(tau: np.ndarray, site_rows: np.ndarray) -> np.ndarray:
    """``E2^dag tau E2`` for the product of an orthonormal per-site basis with itself."""
    e2 = np.array([np.kron(a, b) for a in site_rows for b in site_rows])
    p = e2.conj() @ tau @ e2.T
    return p.real if np.max(np.abs(np.imag(p)), initial=0.0) < 1e-12 else p


def _product(ops: Sequence[np.ndarray]) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for o in ops:
        out = np.kron(out, o)
    return out


def _dense_operator(op, n: int, kind: str) -> np.ndarray:
    if isinstance(op, np.ndarray) and op.shape == (2**n, 2**n):
        return op.astype(complex)
    if isinstance(op, str):
        s = op.strip().replace("proj:", "")
        if kind == "state" or s.startswith("|") or (set(s) <= set("01") and len(s) == n):
            bits = parse_bits(s)
            if len(bits) != n:
                raise ValueError(f"bitstring length {len(bits)} != n={n}")
            return _product([np.diag([1.0, 0.0]) if b == "0" else np.diag([0.0, 1.0]) for b in bits])
        return _product([_P[c] for c in parse_pauli(s, n)])
    ops = [np.asarray(o, dtype=complex) for o in op]
    if len(ops) != n:
        raise ValueError("expected one 2x2 factor per qubit")
    return _product(ops)


@lru_cache(maxsize=None)
def _gate_superoperator(group: str, t: int) -> np.ndarray:
    return exact_twirl_projector(oracle_gate_commutant(group, t))


@dataclass(frozen=True)
class SampledMoment:
    """Haar-sample estimate of a moment with its standard error."""

    mean: float
    stderr: float
    n_samples: int


def exact_moment_small(
    topology: Topology,
    rho,
    observable,
    t: int = 2,
    mode: str = "exact",
    n_samples: int = 10_000,
    rng: np.random.Generator | int | None = None,
    chunk: int = 50_000,
):
    """Reference value of ``E_U Tr[U rho U^dag O]^t``.

    In ``"exact"`` mode each gate's moment superoperator is applied matrix-free to
    ``vec(O^{(x)t})`` on the full ``4**(t n)``-dimensional space. In ``"sampled"``
    mode explicit Haar circuits are drawn and a :class:`SampledMoment` is returned.

    Raises:
        ValueError: If ``n > 5`` or ``t > 2``.
    """
    n = topology.n
    if n > MAX_QUBITS or t not in (1, 2):
        raise ValueError(f"oracle limited to n <= {MAX_QUBITS} and t in (1, 2)")
    rho_m = _dense_operator(rho, n, "state")
    obs_m = _dense_operator(observable, n, "observable")
    if mode == "exact":
        local = 4**t
        v = _to_site_layout(_product([obs_m] * t), n, t).reshape([local] * n)
        for g in reversed(topology.gates):
            tau = _gate_superoperator(g.group, t).reshape(local, local, local, local)
            i, j = g.qubits[0] - 1, g.qubits[1] - 1
            v = np.tensordot(tau, v, axes=([2, 3], [i, j]))
            v = np.moveaxis(v, [0, 1], [i, j])
        r = _to_site_layout(_product([rho_m] * t), n, t)
        return float(np.real(np.vdot(r, v.reshape(-1))))
    if mode != "sampled":
        raise ValueError("mode must be 'exact' or 'sampled'")
    rng = np.random.default_rng(rng)
    total, total_sq, done = 0.0, 0.0, 0
    dim = 2**n
    while done < n_samples:
        b = min(chunk, n_samples - done)
        u = np.broadcast_to(np.eye(dim, dtype=complex), (b, dim, dim)).copy()
        for g in topology.gates:
            v = haar_sample(4, g.group, rng, b)
            i, j = g.qubits[0] - 1, g.qubits[1] - 1
            w = u.reshape((b,) + (2,) * n + (dim,))
            w = np.moveaxis(w, [1 + i, 1 + j], [1, 2]).reshape(b, 4, -1)
            w = (v @ w).reshape((b, 2, 2) + (2,) * (n - 2) + (dim,))
            u = np.moveaxis(w, [1, 2], [1 + i, 1 + j]).reshape(b, dim, dim)
        vals = np.real(np.einsum("bij,jk,blk,li->b", u, rho_m, u.conj(), obs_m)) ** t
        total += float(vals.sum())
        total_sq += float((vals**2).sum())
        done += b
    mean = total / done
    var = max(total_sq / done - mean**2, 0.0)
    return SampledMoment(mean, math.sqrt(var / max(done - 1, 1)), done)
