"""Circuit topologies, P-net assembly and moment evaluation.

A circuit ``U = U_L ... U_1`` has moment operator ``tau = P_L ... P_1``. The
observable side is evolved in the Heisenberg picture, so gates act on
``|O^{(x)t}>>`` starting from the last one. P-gates are symmetric in the
orthonormal site basis, which lets the state side be evolved forward instead.
"""

from __future__ import annotations

import hashlib
import json
import math
import re
from dataclasses import dataclass, field
from typing import Iterator, Mapping, Sequence

import numpy as np

from .commutant import (
    BasisError,
    CommutantBasis,
    PAULI,
    PGate,
    normalize_group,
    pgate,
    site_basis,
)
from .mps import DEFAULT_CUTOFF, MPS, apply_pgate, inner_product, product_mps, sweep_compress


class TopologyError(ValueError):
    """Raised for malformed topologies or incompatible gate tables."""


@dataclass(frozen=True)
class GatePlacement:
    """A two-qubit gate on 1-based ``qubits`` drawn from ``group``.

    ``layer`` optionally tags the circuit layer the gate belongs to.
    """

    qubits: tuple[int, int]
    group: str = "U4"
    layer: int | None = None

    def __post_init__(self):
        q = tuple(int(x) for x in self.qubits)
        if len(q) != 2:
            raise TopologyError(f"gates act on exactly two qubits, got {q}")
        if q[0] == q[1]:
            raise TopologyError(f"gate qubits must be distinct, got {q}")
        object.__setattr__(self, "qubits", q)
        object.__setattr__(self, "group", normalize_group(self.group))


@dataclass(frozen=True)
class Topology:
    """Ordered gate placements on ``n`` qubits (gate 1 acts first)."""

    n: int
    gates: tuple[GatePlacement, ...] = ()
    name: str = "custom"

    def __post_init__(self):
        if int(self.n) < 1:
            raise TopologyError("n must be at least 1")
        object.__setattr__(self, "n", int(self.n))
        gates = tuple(g if isinstance(g, GatePlacement) else GatePlacement(*g) for g in self.gates)
        for g in gates:
            if not all(1 <= q <= self.n for q in g.qubits):
                raise TopologyError(f"gate {g.qubits} out of range for n={self.n}")
        object.__setattr__(self, "gates", gates)

    @property
    def groups(self) -> set[str]:
        return {g.group for g in self.gates}

    def touched(self) -> set[int]:
        """1-based qubits acted on by at least one gate."""
        return {q for g in self.gates for q in g.qubits}

    def to_dict(self) -> dict:
        gates = []
        for g in self.gates:
            d = {"qubits": list(g.qubits), "group": g.group}
            if g.layer is not None:
                d["layer"] = g.layer
            gates.append(d)
        return {"n": self.n, "gates": gates}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), separators=(",", ":"))

    @classmethod
    def from_dict(cls, d: Mapping, name: str = "file") -> "Topology":
        try:
            n = int(d["n"])
            gates = tuple(
                GatePlacement(tuple(g["qubits"]), g.get("group", "U4"), g.get("layer")) for g in d["gates"]
            )
        except (KeyError, TypeError) as exc:
            raise TopologyError(f"malformed topology JSON: {exc}") from exc
        return cls(n, gates, name)

    @classmethod
    def from_json(cls, s: str, name: str = "file") -> "Topology":
        return cls.from_dict(json.loads(s), name)

    def digest(self) -> str:
        return hashlib.sha256(self.to_json().encode()).hexdigest()[:16]

    def with_group(self, group: str) -> "Topology":
        return Topology(self.n, tuple(GatePlacement(g.qubits, group, g.layer) for g in self.gates), self.name)

    def reflected(self) -> "Topology":
        """Relabel qubits ``j -> n + 1 - j``."""
        r = lambda q: self.n + 1 - q  # noqa: E731
        gates = tuple(GatePlacement((r(g.qubits[0]), r(g.qubits[1])), g.group, g.layer) for g in self.gates)
        return Topology(self.n, gates, self.name)


QCNN_CONVS = ("pairs", "brick")


def hea_topology(n: int, n_layers: int, group: str = "U4") -> Topology:
    """Brick-wall hardware-efficient ansatz with open boundaries.

    Each layer applies gates on (1,2), (3,4), ... and then on (2,3), (4,5), ...

    Raises:
        TopologyError: If ``n < 2`` or ``n_layers < 0``.
    """
    if n < 2:
        raise TopologyError("the brick-wall ansatz needs n >= 2")
    if n_layers < 0:
        raise TopologyError("n_layers must be non-negative")
    gates = []
    for layer in range(n_layers):
        for start in (1, 2):
            gates += [GatePlacement((q, q + 1), group, layer) for q in range(start, n, 2)]
    return Topology(n, tuple(gates), f"hea(n={n},layers={n_layers})")


def qcnn_topology(n: int, group: str = "U4", conv: str = "pairs") -> Topology:
    """Convolutional pooling circuit with ``ceil(log2 n)`` layers.

    Each layer acts on the active qubits (all of them in layer 1) and then keeps
    every second active qubit (rounding up) until only qubit 1 remains active.

    Args:
        n: Number of qubits.
        group: Gate group of every placement.
        conv: ``"pairs"`` applies one gate per consecutive active pair (1,2), (3,4), ...;
            ``"brick"`` follows those with the shifted pairs (2,3), (4,5), ... so
            every layer is a brick of alternating pairs.

    Raises:
        TopologyError: If ``n < 2`` or ``conv`` is unknown.
    """
    if n < 2:
        raise TopologyError("the convolutional circuit needs n >= 2")
    if conv not in QCNN_CONVS:
        raise TopologyError(f"conv must be one of {QCNN_CONVS}")
    starts = (0,) if conv == "pairs" else (0, 1)
    active = list(range(1, n + 1))
    gates, layer = [], 0
    while len(active) > 1:
        for st in starts:
            gates += [GatePlacement((active[i], active[i + 1]), group, layer) for i in range(st, len(active) - 1, 2)]
        active = active[::2]
        layer += 1
    name = f"qcnn(n={n})" if conv == "pairs" else f"qcnn-brick(n={n})"
    return Topology(n, tuple(gates), name)


def random_topology(
    n: int, n_gates: int, rng: np.random.Generator, groups: Sequence[str] = ("U4", "O4")
) -> Topology:
    """Random placements of ``n_gates`` gates on arbitrary qubit pairs."""
    gates = []
    for _ in range(n_gates):
        i, j = rng.choice(n, size=2, replace=False) + 1
        gates.append(GatePlacement((int(i), int(j)), str(rng.choice(list(groups)))))
    return Topology(n, tuple(gates), "random")


def common_basis_group(groups: set[str]) -> str:
    """Smallest per-site basis shared by every gate group in a circuit.

    Raises:
        TopologyError: If free-fermionic gates are mixed with U(4)/O(4) gates.
    """
    if not groups or groups == {"U4"}:
        return "U4"
    if groups <= {"U4", "O4"}:
        return "O4"
    if groups == {"FF_SO4"}:
        return "FF_SO4"
    raise TopologyError(f"no common site basis for groups {sorted(groups)}")


@dataclass(frozen=True, eq=False)
class PNet:
    """Tensor network of P-gates mirroring a topology.

    Attributes:
        topology: Source circuit.
        t: Moment order.
        basis: Per-site basis shared by all gates.
        gates: One P-gate per placement, aligned with ``topology.gates``.
        blocks: Gate indices grouped into runs of non-overlapping gates (forward
            order); the MPS is compressed after each block.
        block_layer: Circuit layer index of every block.
    """

    topology: Topology
    t: int
    basis: CommutantBasis
    gates: tuple[PGate, ...]
    blocks: tuple[tuple[int, ...], ...]
    block_layer: tuple[int, ...]
    metadata: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.topology.n

    @property
    def n_layers(self) -> int:
        return len(set(self.block_layer))

    @property
    def leg_dim(self) -> int:
        return self.basis.dim


def _blocks(topology: Topology) -> tuple[tuple[tuple[int, ...], ...], tuple[int, ...]]:
    blocks, layers = [], []
    current, used, current_layer = [], set(), None
    auto_layer = 0
    for idx, g in enumerate(topology.gates):
        tag = g.layer
        boundary = bool(used & set(g.qubits)) or (current and tag != current_layer)
        if boundary:
            blocks.append(tuple(current))
            layers.append(current_layer if current_layer is not None else auto_layer)
            auto_layer += 1
            current, used = [], set()
        current.append(idx)
        used |= set(g.qubits)
        current_layer = tag
    if current:
        blocks.append(tuple(current))
        layers.append(current_layer if current_layer is not None else auto_layer)
    # Renumber layers consecutively in order of appearance.
    seen: dict = {}
    layers = [seen.setdefault(x, len(seen)) for x in layers]
    blocks = [tuple(sorted(b, key=lambda i: min(topology.gates[i].qubits))) for b in blocks]
    return tuple(blocks), tuple(layers)


def _qcnn_pairing(name: str) -> str | None:
    if name.startswith("qcnn-brick"):
        return "alternating pairs of active qubits, keep every second"
    if name.startswith("qcnn"):
        return "consecutive active pairs, keep every second"
    return None


def build_pnet(
    topology: Topology,
    gate_table: Mapping[str, PGate] | None = None,
    t: int = 2,
    basis_group: str | None = None,
) -> PNet:
    """Assemble the P-net of ``topology``.

    Args:
        topology: Circuit.
        gate_table: Optional map from group tag to P-gate; missing entries are
            built in the common site basis.
        t: Moment order (1 or 2).
        basis_group: Force a site basis (defaults to the smallest common one).

    Raises:
        TopologyError: If gates disagree on the site basis or order.
    """
    if t not in (1, 2):
        raise TopologyError("only t in {1, 2} is supported")
    groups = topology.groups
    bg = normalize_group(basis_group) if basis_group else common_basis_group(groups)
    if basis_group and groups - {bg} and common_basis_group(groups | {bg}) != bg:
        raise TopologyError(f"basis {bg} cannot host groups {sorted(groups)}")
    basis = site_basis(bg, t)
    table = dict(gate_table or {})
    for g in groups:
        if g not in table:
            table[g] = pgate(g, t, bg)
        gate = table[g]
        if gate.t != t or gate.basis.group != bg or gate.leg_dim != basis.dim:
            raise TopologyError(
                f"gate for {g} has t={gate.t}, basis {gate.basis.group}; expected t={t}, basis {bg}"
            )
    gates = tuple(table[g.group] for g in topology.gates)
    blocks, layers = _blocks(topology)
    meta = {
        "basis": bg,
        "gate_digests": {g: table[g].digest() for g in sorted(groups)},
        "qcnn_pairing": _qcnn_pairing(topology.name),
    }
    return PNet(topology, t, basis, gates, blocks, layers, meta)


def evolve_layers(
    p: PNet, m: MPS, picture: str = "heisenberg", rel_cutoff: float = DEFAULT_CUTOFF
) -> Iterator[tuple[int, MPS, int]]:
    """Apply the P-net layer by layer, compressing after every block.

    Yields:
        ``(layers_done, mps, max_bond_during_layer)`` after each circuit layer.
        In the Heisenberg picture layers are consumed from the last one.
    """
    if m.n != p.n or any(d != p.leg_dim for d in m.physical_dims):
        raise TopologyError("MPS physical dims do not match the P-net")
    if picture not in ("heisenberg", "schrodinger"):
        raise ValueError("picture must be 'heisenberg' or 'schrodinger'")
    order = list(range(len(p.blocks)))
    if picture == "heisenberg":
        order.reverse()
    done = 0
    chi = m.max_bond()
    for pos, b in enumerate(order):
        for gi in p.blocks[b]:
            q = p.topology.gates[gi].qubits
            m = apply_pgate(m, p.gates[gi], (q[0] - 1, q[1] - 1), rel_cutoff)
        m = sweep_compress(m, rel_cutoff)
        chi = max(chi, m.max_bond())
        last = pos == len(order) - 1 or p.block_layer[order[pos + 1]] != p.block_layer[b]
        if last:
            done += 1
            yield done, m, chi
            chi = m.max_bond()


def evolve(
    p: PNet, m: MPS, picture: str = "heisenberg", rel_cutoff: float = DEFAULT_CUTOFF
) -> tuple[MPS, list[int]]:
    """Apply the whole P-net.

    Returns:
        The evolved MPS and the maximum bond dimension seen in each layer.
    """
    profile = []
    for _, m, chi in evolve_layers(p, m, picture, rel_cutoff):
        profile.append(chi)
    return m, profile


def moment(
    p: PNet, rho_mps: MPS, obs_mps: MPS, picture: str = "heisenberg", rel_cutoff: float = DEFAULT_CUTOFF
) -> float:
    """``<<rho^{(x)t}|tau|O^{(x)t}>>`` for vectorized state and observable MPSs."""
    if picture == "heisenberg":
        evolved, _ = evolve(p, obs_mps, picture, rel_cutoff)
        return inner_product(rho_mps, evolved).value
    evolved, _ = evolve(p, rho_mps, picture, rel_cutoff)
    return inner_product(evolved, obs_mps).value


_COMPACT = re.compile(r"([IXYZ])(\d+)")


def parse_pauli(pauli: str, n: int | None = None) -> str:
    """Normalize a Pauli observable to a length-``n`` string over ``IXYZ``.

    Accepts full strings (``"ZIII"``) or compact 1-based forms (``"Z1"``, ``"X2Z5"``).
    """
    s = str(pauli).strip().upper()
    if s and set(s) <= set("IXYZ") and (n is None or len(s) == n):
        return s
    terms = _COMPACT.findall(s)
    if not terms or "".join(f"{p}{i}" for p, i in terms) != s:
        raise ValueError(f"cannot parse Pauli observable {pauli!r}")
    if n is None:
        n = max(int(i) for _, i in terms)
    out = ["I"] * n
    for p, i in terms:
        k = int(i)
        if not 1 <= k <= n:
            raise ValueError(f"qubit index {k} out of range for n={n}")
        out[k - 1] = p
    return "".join(out)


def parse_bits(bits: str) -> str:
    s = str(bits).strip().strip("|>").strip("<|")
    if not s or set(s) - set("01"):
        raise ValueError(f"expected a bitstring, got {bits!r}")
    return s


def _copies(op: np.ndarray, t: int) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for _ in range(t):
        out = np.kron(out, op)
    return out


def site_coordinates(op: np.ndarray, basis: CommutantBasis) -> np.ndarray:
    """Orthonormal coordinates of ``vec(op^{(x)t})`` projected onto a site basis.

    For an observable these are the expansion coefficients of its projection; for
    a state they are the overlaps ``<<e_a|rho^{(x)t}>>``. Both coincide because the
    site basis is orthonormal.
    """
    v = _copies(np.asarray(op), basis.t).reshape(-1)
    c = basis.orthonormal.conj() @ v
    if np.max(np.abs(np.imag(c)), initial=0.0) > 1e-12:
        raise BasisError("operator has a complex projection onto the site basis")
    return np.real(c)


def _resolve_basis(group_or_basis, t: int) -> CommutantBasis:
    if isinstance(group_or_basis, CommutantBasis):
        return group_or_basis
    return site_basis(group_or_basis, t)


def vectorize_pauli_obs(pauli: str, group_or_basis="U4", t: int = 2, n: int | None = None) -> MPS:
    """Bond-1 MPS of ``|P^{(x)t}>>`` projected onto the per-site commutant basis.

    The projection is exact on every site acted on by a gate, which is all the
    moment operator can see there.

    Raises:
        BasisError: If the projection vanishes on some site (the Pauli is not
            representable in the chosen basis).
    """
    basis = _resolve_basis(group_or_basis, t)
    s = parse_pauli(pauli, n)
    vecs = [site_coordinates(PAULI[c], basis) for c in s]
    for j, v in enumerate(vecs):
        if not np.any(np.abs(v) > 1e-14):
            raise BasisError(f"Pauli {s[j]} on site {j + 1} projects to zero in basis {basis.labels}")
    return product_mps(vecs)


def vectorize_product_state(bits: str, group_or_basis="U4", t: int = 2) -> MPS:
    """Bond-1 MPS of ``|rho^{(x)t}>>`` for a computational basis state, in site coordinates."""
    basis = _resolve_basis(group_or_basis, t)
    b = parse_bits(bits)
    projectors = {"0": np.diag([1.0, 0.0]), "1": np.diag([0.0, 1.0])}
    return product_mps([site_coordinates(projectors[c], basis) for c in b])


def _local_ops(op, n: int) -> list[np.ndarray]:
    """Per-site 2x2 factors of a product operator given as Pauli text, bits or matrices."""
    if isinstance(op, str):
        s = op.strip()
        if s.startswith("|") or s.startswith("proj:") or (set(s) <= set("01") and len(s) == n):
            bits = parse_bits(s.replace("proj:", ""))
            if len(bits) != n:
                raise ValueError(f"bitstring length {len(bits)} != n={n}")
            return [np.diag([1.0, 0.0]) if c == "0" else np.diag([0.0, 1.0]) for c in bits]
        return [PAULI[c] for c in parse_pauli(s, n)]
    ops = [np.asarray(o) for o in op]
    if len(ops) != n or any(o.shape != (2, 2) for o in ops):
        raise ValueError("expected n single-qubit 2x2 factors")
    return ops


def circuit_moment(
    topology: Topology,
    rho,
    observable,
    t: int = 2,
    rel_cutoff: float = DEFAULT_CUTOFF,
    picture: str = "heisenberg",
    pnet: PNet | None = None,
) -> float:
    """``E_U Tr[U rho U^dag O]^t`` for product ``rho`` and ``O``.

    Sites without gates contribute the exact factor ``Tr[rho_j O_j]^t``; the other
    sites are projected onto the per-site commutant basis.

    Args:
        topology: Circuit.
        rho: Bitstring or list of 2x2 single-qubit density matrices.
        observable: Pauli text (``"ZII"``, ``"Z1"``), projector bitstring
            (``"|010>"``) or list of 2x2 factors.
        t: Moment order.
        rel_cutoff: Compression cutoff.
        picture: Evolve the observable (``"heisenberg"``) or the state.
        pnet: Prebuilt P-net for ``topology``.
    """
    n = topology.n
    p = pnet or build_pnet(topology, t=t)
    rho_ops = _local_ops(rho if not isinstance(rho, str) else "|" + parse_bits(rho) + ">", n)
    obs_ops = _local_ops(observable, n)
    touched = topology.touched()
    basis = p.basis
    factor = 1.0
    rv, ov = [], []
    e0 = np.zeros(basis.dim)
    e0[0] = 1.0
    for j in range(n):
        if j + 1 in touched:
            rv.append(site_coordinates(rho_ops[j], basis))
            ov.append(site_coordinates(obs_ops[j], basis))
        else:
            f = np.trace(rho_ops[j] @ obs_ops[j]) ** t
            factor *= float(np.real(f))
            rv.append(e0)
            ov.append(e0)
    if factor == 0.0 or any(not np.any(np.abs(v) > 1e-15) for v in rv + ov):
        return 0.0
    rho_mps = product_mps(rv)
    obs_mps = product_mps(ov, coefficient=factor)
    return moment(p, rho_mps, obs_mps, picture, rel_cutoff)
