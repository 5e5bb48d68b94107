"""Matrix product states with a multiplicative normalization ledger.

An :class:`MPS` represents ``prod(ledger) * contraction(sites)``. Site tensors are
indexed ``[left, physical, right]``. Compression keeps the tensors O(1) by moving
norms into the ledger; overlaps are accumulated in log space so that values far
below the double range of a plain contraction stay representable.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .tensor import DimensionError, NumericError, svd, truncated_svd

DEFAULT_CUTOFF = 1e-12


class NotNormalizedError(ValueError):
    """Raised when an entropy is requested for a vector that is not a unit state."""


@dataclass(frozen=True)
class NormLedger:
    """Positive factors whose product multiplies an MPS (or a contraction)."""

    factors: tuple[float, ...]

    def __post_init__(self):
        f = tuple(float(x) for x in self.factors)
        if not all(math.isfinite(x) and x > 0 for x in f):
            raise NumericError(f"ledger entries must be positive and finite: {f}")
        object.__setattr__(self, "factors", f)

    @classmethod
    def ones(cls, n: int) -> "NormLedger":
        return cls((1.0,) * n)

    def log_product(self) -> float:
        return float(sum(math.log(x) for x in self.factors))

    def product(self) -> float:
        return math.exp(self.log_product())

    def __len__(self) -> int:
        return len(self.factors)


class MPS:
    """Open-boundary matrix product state with a normalization ledger.

    Args:
        sites: Rank-3 tensors ``[left, physical, right]``.
        ledger: Positive per-site factors; defaults to all ones.
    """

    __slots__ = ("_sites", "ledger")

    def __init__(self, sites: Sequence[np.ndarray], ledger: NormLedger | Sequence[float] | None = None):
        sites = [np.array(a, dtype=float, copy=True) if not np.iscomplexobj(a) else np.array(a, copy=True)
                 for a in sites]
        if not sites:
            raise DimensionError("an MPS needs at least one site")
        for j, a in enumerate(sites):
            if a.ndim != 3:
                raise DimensionError(f"site {j} has rank {a.ndim}, expected 3")
            a.setflags(write=False)
        if sites[0].shape[0] != 1 or sites[-1].shape[2] != 1:
            raise DimensionError("boundary bonds must have extent 1")
        for j in range(len(sites) - 1):
            if sites[j].shape[2] != sites[j + 1].shape[0]:
                raise DimensionError(f"bond mismatch between sites {j} and {j + 1}")
        if ledger is None:
            ledger = NormLedger.ones(len(sites))
        elif not isinstance(ledger, NormLedger):
            ledger = NormLedger(tuple(ledger))
        if len(ledger) != len(sites):
            raise DimensionError("ledger length must equal the number of sites")
        self._sites = tuple(sites)
        self.ledger = ledger

    @property
    def sites(self) -> tuple[np.ndarray, ...]:
        return self._sites

    @property
    def n(self) -> int:
        return len(self._sites)

    @property
    def physical_dims(self) -> list[int]:
        return [a.shape[1] for a in self._sites]

    @property
    def bond_dims(self) -> list[int]:
        """Internal bond extents, length ``n - 1``."""
        return [a.shape[2] for a in self._sites[:-1]]

    def max_bond(self) -> int:
        return max(self.bond_dims, default=1)

    def to_dense(self) -> np.ndarray:
        """Full vector (row-major over sites); only for small chains."""
        v = self._sites[0].reshape(-1, self._sites[0].shape[2])
        for a in self._sites[1:]:
            v = (v @ a.reshape(a.shape[0], -1)).reshape(-1, a.shape[2])
        return v.reshape(-1) * self.ledger.product()

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "physical_dims": self.physical_dims,
            "tensors": [{"shape": list(a.shape), "data": a.reshape(-1).tolist()} for a in self._sites],
            "ledger": list(self.ledger.factors),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MPS":
        sites = [np.array(t["data"], dtype=float).reshape(t["shape"]) for t in d["tensors"]]
        return cls(sites, NormLedger(tuple(d["ledger"])))

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, s: str) -> "MPS":
        return cls.from_dict(json.loads(s))

    def __repr__(self) -> str:
        return f"MPS(n={self.n}, physical_dims={self.physical_dims}, max_bond={self.max_bond()})"


def max_bond(m: MPS) -> int:
    """Largest internal bond extent of ``m``."""
    return m.max_bond()


def product_mps(site_vectors: Sequence[np.ndarray], coefficient: float = 1.0) -> MPS:
    """Bond-1 MPS ``coefficient * v_1 (x) ... (x) v_n``.

    Each site vector is normalized and its norm moved into the ledger; the sign of
    ``coefficient`` is absorbed into the first tensor.

    Raises:
        ValueError: If a site vector is zero or ``coefficient`` is zero.
    """
    if coefficient == 0 or not math.isfinite(coefficient):
        raise ValueError("coefficient must be finite and nonzero")
    sites, ledger = [], []
    for j, v in enumerate(site_vectors):
        v = np.asarray(v, dtype=float).reshape(-1)
        nrm = float(np.linalg.norm(v))
        if nrm == 0:
            raise ValueError(f"site vector {j} is zero")
        sites.append((v / nrm).reshape(1, -1, 1))
        ledger.append(nrm)
    if not sites:
        raise DimensionError("need at least one site")
    ledger[0] *= abs(coefficient)
    if coefficient < 0:
        sites[0] = -sites[0]
    return MPS(sites, NormLedger(tuple(ledger)))


def _gate_tensor(gate) -> np.ndarray:
    g = gate.tensor() if hasattr(gate, "tensor") else np.asarray(gate, dtype=float)
    if g.ndim == 2:
        b = math.isqrt(g.shape[0])
        if b * b != g.shape[0] or g.shape[0] != g.shape[1]:
            raise DimensionError(f"gate matrix {g.shape} is not (b^2, b^2)")
        g = g.reshape(b, b, b, b)
    return g


def apply_pgate(m: MPS, gate, sites: tuple[int, int], rel_cutoff: float = DEFAULT_CUTOFF) -> MPS:
    """Apply a two-site gate to ``m``.

    Args:
        m: Input MPS.
        gate: :class:`~momentnet.commutant.PGate` or ``(b^2, b^2)`` matrix indexed
            ``[b*out1 + out2, b*in1 + in2]`` where leg 1 acts on ``sites[0]``.
        sites: 0-based site pair, in either order. Non-adjacent pairs are routed
            through an identity-extended MPO over the sites in between.
        rel_cutoff: Relative singular-value cutoff for the split of adjacent gates.

    Returns:
        New MPS holding the gate applied to the represented vector.
    """
    g = _gate_tensor(gate)
    i, j = int(sites[0]), int(sites[1])
    if i == j or not (0 <= i < m.n and 0 <= j < m.n):
        raise DimensionError(f"invalid site pair {sites} for n={m.n}")
    if i > j:
        g = g.transpose(1, 0, 3, 2)
        i, j = j, i
    dims = m.physical_dims
    if g.shape[2] != dims[i] or g.shape[3] != dims[j]:
        raise DimensionError(f"gate legs {g.shape} do not match physical dims ({dims[i]}, {dims[j]})")
    new = list(m.sites)
    if j == i + 1:
        a, b = new[i], new[j]
        theta = np.einsum("aib,bjc->aijc", a, b)
        theta = np.einsum("klij,aijc->aklc", g, theta)
        chi_l, d1, d2, chi_r = theta.shape
        u, s, vh = truncated_svd(theta.reshape(chi_l * d1, d2 * chi_r), rel_cutoff)
        new[i] = u.reshape(chi_l, d1, -1)
        new[j] = (s[:, None] * vh).reshape(-1, d2, chi_r)
        return MPS(new, m.ledger)
    b1, b2 = g.shape[0], g.shape[1]
    mat = g.transpose(0, 2, 1, 3).reshape(b1 * dims[i], b2 * dims[j])
    u, s, vh = truncated_svd(mat, rel_cutoff)
    r = s.size
    left = (u * np.sqrt(s)).T.reshape(r, b1, dims[i])
    right = (np.sqrt(s)[:, None] * vh).reshape(r, b2, dims[j])
    a = new[i]
    new[i] = np.einsum("rki,aib->akrb", left, a).reshape(a.shape[0], b1, r * a.shape[2])
    for k in range(i + 1, j):
        a = new[k]
        t = np.einsum("aib,rs->raisb", a, np.eye(r))
        new[k] = t.reshape(r * a.shape[0], a.shape[1], r * a.shape[2])
    a = new[j]
    new[j] = np.einsum("rlj,ajc->ralc", right, a).reshape(r * a.shape[0], b2, a.shape[2])
    return MPS(new, m.ledger)


def sweep_compress(m: MPS, rel_cutoff: float = DEFAULT_CUTOFF) -> MPS:
    """Lossless compression into left-canonical form with norms moved to the ledger.

    A right-to-left QR pass makes the tail right-canonical; a left-to-right SVD pass
    then truncates each bond at ``rel_cutoff * sigma_max`` of its Schmidt spectrum,
    normalizes the kept singular values and records their norm once in the ledger.
    All resulting site tensors are isometries except the last, which has unit norm.
    """
    if rel_cutoff < 0:
        raise ValueError("rel_cutoff must be non-negative")
    n = m.n
    a = [np.asarray(x) for x in m.sites]
    led = list(m.ledger.factors)
    zero = False
    for j in range(n - 1, 0, -1):
        chi_l, d, chi_r = a[j].shape
        q, r = np.linalg.qr(a[j].reshape(chi_l, d * chi_r).T)
        nrm = float(np.linalg.norm(r))
        if nrm == 0.0:
            zero = True
            break
        r = r / nrm
        led[j] *= nrm
        a[j] = q.T.reshape(-1, d, chi_r)
        a[j - 1] = np.tensordot(a[j - 1], r.T, axes=(2, 0))
    if zero:
        return _zero_mps(m.physical_dims)
    for j in range(n - 1):
        chi_l, d, chi_r = a[j].shape
        u, s, vh = truncated_svd(a[j].reshape(chi_l * d, chi_r), rel_cutoff)
        nrm = float(np.linalg.norm(s))
        if nrm == 0.0:
            return _zero_mps(m.physical_dims)
        s = s / nrm
        led[j] *= nrm
        a[j] = u.reshape(chi_l, d, -1)
        a[j + 1] = np.tensordot(s[:, None] * vh, a[j + 1], axes=(1, 0))
    nrm = float(np.linalg.norm(a[-1]))
    if nrm == 0.0:
        return _zero_mps(m.physical_dims)
    a[-1] = a[-1] / nrm
    led[-1] *= nrm
    return MPS(a, NormLedger(tuple(led)))


def _zero_mps(dims: Sequence[int]) -> MPS:
    return MPS([np.zeros((1, d, 1)) for d in dims])


@dataclass(frozen=True)
class InnerProduct:
    """Result of :func:`inner_product`.

    Attributes:
        value: The overlap as a float (may underflow to 0 for tiny magnitudes).
        sign: Sign of the overlap (0 for an exact zero).
        log_abs: Natural log of ``|value|`` (``-inf`` for an exact zero).
        trace_ledger: Per-site renormalization factors of the running contraction.
    """

    value: float
    sign: float
    log_abs: float
    trace_ledger: NormLedger

    def __iter__(self):
        yield self.value
        yield self.trace_ledger

    def __float__(self) -> float:
        return self.value


def inner_product(bra: MPS, ket: MPS) -> InnerProduct:
    """``<bra|ket>`` including both ledgers, contracted left to right.

    The running environment is renormalized after every site and its norm recorded
    in the trace ledger, so the result is assembled in log space.
    """
    if bra.n != ket.n or bra.physical_dims != ket.physical_dims:
        raise DimensionError("bra and ket must have equal length and physical dims")
    env = np.ones((1, 1))
    factors = []
    for a, b in zip(bra.sites, ket.sites):
        env = np.tensordot(env, a.conj(), axes=(0, 0))
        env = np.tensordot(env, b, axes=([0, 1], [0, 1]))
        nrm = float(np.linalg.norm(env))
        if nrm == 0.0 or not math.isfinite(nrm):
            if nrm == 0.0:
                ones = NormLedger.ones(bra.n)
                return InnerProduct(0.0, 0.0, -math.inf, ones)
            raise NumericError("overlap contraction overflowed")
        env = env / nrm
        factors.append(nrm)
    scalar = complex(env[0, 0]) if np.iscomplexobj(env) else float(env[0, 0])
    if scalar == 0:
        return InnerProduct(0.0, 0.0, -math.inf, NormLedger(tuple(factors)))
    trace = NormLedger(tuple(factors))
    log_abs = bra.ledger.log_product() + ket.ledger.log_product() + trace.log_product() + math.log(abs(scalar))
    sign = float(np.sign(np.real(scalar)))
    value = sign * math.exp(log_abs) if log_abs < 709 else sign * math.inf
    return InnerProduct(value, sign, log_abs, trace)


def norm(m: MPS) -> float:
    """Euclidean norm of the represented vector."""
    ip = inner_product(m, m)
    return math.exp(0.5 * ip.log_abs) if ip.sign != 0 else 0.0


def normalize_to_state(m: MPS, rel_cutoff: float = DEFAULT_CUTOFF) -> MPS:
    """Unit-norm, left-canonical copy of ``m`` with an all-ones ledger.

    Raises:
        ValueError: If ``m`` represents the zero vector.
    """
    c = sweep_compress(m, rel_cutoff)
    if any(not np.any(a) for a in c.sites):
        raise ValueError("cannot normalize the zero vector")
    return MPS(c.sites, NormLedger.ones(c.n))


def _right_canonicalize(sites: list[np.ndarray], stop: int) -> None:
    """In place: make sites ``stop+1 .. n-1`` right-isometric (norm pushed left)."""
    for j in range(len(sites) - 1, stop, -1):
        chi_l, d, chi_r = sites[j].shape
        q, r = np.linalg.qr(sites[j].reshape(chi_l, d * chi_r).T)
        sites[j] = q.T.reshape(-1, d, chi_r)
        sites[j - 1] = np.tensordot(sites[j - 1], r.T, axes=(2, 0))


def _left_canonicalize(sites: list[np.ndarray], stop: int) -> None:
    """In place: make sites ``0 .. stop-1`` left-isometric (norm pushed right)."""
    for j in range(stop):
        chi_l, d, chi_r = sites[j].shape
        q, r = np.linalg.qr(sites[j].reshape(chi_l * d, chi_r))
        sites[j] = q.reshape(chi_l, d, -1)
        sites[j + 1] = np.tensordot(r, sites[j + 1], axes=(1, 0))


def _check_normalized(m: MPS, tol: float = 1e-8) -> None:
    nv = norm(m)
    if abs(nv - 1.0) > tol:
        raise NotNormalizedError(f"entropies need a normalized state (norm {nv:.6g})")


def _region_bounds(m: MPS, region) -> tuple[int, int]:
    idx = sorted(set(int(i) for i in region))
    if not idx:
        raise ValueError("region must be non-empty")
    if idx[0] < 0 or idx[-1] >= m.n:
        raise ValueError(f"region {idx} out of range for n={m.n}")
    if idx != list(range(idx[0], idx[-1] + 1)):
        raise ValueError("only contiguous regions are supported")
    return idx[0], idx[-1]


def reduced_spectrum(m: MPS, region) -> np.ndarray:
    """Eigenvalues of the reduced density matrix of a contiguous 0-based region.

    The state is brought to mixed-canonical form around the region; the spectrum
    then follows from either the region block itself or the Gram matrix of its
    transfer operator, whichever is smaller.
    """
    _check_normalized(m)
    a, b = _region_bounds(m, region)
    sites = [np.array(x) for x in m.sites]
    _right_canonicalize(sites, b)
    _left_canonicalize(sites, a)
    block = sites[a:b + 1]
    chi_l, chi_r = block[0].shape[0], block[-1].shape[2]
    phys = int(np.prod([x.shape[1] for x in block], dtype=np.int64))
    if phys <= chi_l * chi_r:
        psi = block[0]
        for x in block[1:]:
            psi = np.tensordot(psi, x, axes=(psi.ndim - 1, 0))
        psi = np.moveaxis(psi, -1, 1).reshape(chi_l * chi_r, phys)
        s = svd(psi)[1]
        lam = s**2
    else:
        # Gram[(l, r), (l', r')] = sum_phys psi[l, phys, r] psi*[l', phys, r']
        gram = np.einsum("aib,cid->acbd", block[0], block[0].conj())
        for x in block[1:]:
            gram = np.einsum("acbd,bie,dif->acef", gram, x, x.conj())
        gram = gram.transpose(0, 2, 1, 3).reshape(chi_l * chi_r, chi_l * chi_r)
        lam = np.linalg.eigvalsh(0.5 * (gram + gram.conj().T))
    lam = np.clip(np.real(lam), 0.0, None)
    total = lam.sum()
    return np.sort(lam / total)[::-1] if total > 0 else lam


def entropy_vn(m: MPS, region) -> float:
    """Von Neumann entropy ``-Tr[rho log rho]`` (natural log) of a contiguous region."""
    lam = reduced_spectrum(m, region)
    lam = lam[lam > 1e-300]
    return float(max(0.0, -np.sum(lam * np.log(lam))))


def entropy_renyi2(m: MPS, region) -> float:
    """Second Renyi entropy in the convention ``-(1/2) log Tr[rho^2]``."""
    lam = reduced_spectrum(m, region)
    return float(max(0.0, -0.5 * math.log(float(np.sum(lam**2)))))
