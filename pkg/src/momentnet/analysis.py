"""Derived quantities: k-purities, anticoncentration, deep-circuit closed forms, entropies."""

from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np

from .circuits import (
    PNet,
    Topology,
    build_pnet,
    circuit_moment,
    evolve,
    evolve_layers,
    parse_pauli,
    site_coordinates,
    vectorize_pauli_obs,
)
from .commutant import PAULI, normalize_group, site_basis
from .mps import DEFAULT_CUTOFF, MPS, entropy_renyi2, entropy_vn, inner_product, normalize_to_state


# k-purities need a tighter cutoff than plain moments: sectors differ by many decades.
PURITY_CUTOFF = 1e-15
DEFAULT_TILT = 1.5


class ShortcutWarning(UserWarning):
    """Emitted when the equiprobability shortcut for collision probabilities does not apply."""


@dataclass
class PurityDistribution:
    """k-purities ``p^(k)``, ``k = 0..n``, with provenance metadata."""

    n: int
    values: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.n + 1,):
            raise ValueError(f"expected {self.n + 1} values, got {self.values.shape}")

    @property
    def total(self) -> float:
        return float(self.values.sum())

    @property
    def argmax(self) -> int:
        return int(np.argmax(self.values))

    def to_dict(self) -> dict:
        out = {
            "n": self.n,
            "topology": self.metadata.get("topology"),
            "observable": self.metadata.get("observable"),
            "k_purities": [float(x) for x in self.values],
            "max_bond": self.metadata.get("max_bond"),
        }
        extra = {k: v for k, v in self.metadata.items() if k not in out}
        out.update(extra)
        return out


def s_vectors(group: str, t: int = 2) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal site coordinates of ``s_I`` and ``s_P``.

    They satisfy ``<<s_I|X>> = Tr[X]/4`` and ``<<s_P|X>> = Tr[(XX+YY+ZZ) X]/4`` for every
    ``X`` in the span of the site basis.
    """
    basis = site_basis(normalize_group(group), t)
    s_i = site_coordinates(PAULI["I"], basis) / 4.0
    swap_like = sum(np.kron(PAULI[p], PAULI[p]) for p in "XYZ").reshape(-1)
    s_p = np.real(basis.orthonormal.conj() @ swap_like) / 4.0
    return s_i, s_p


def phi_k_mps(n: int, k: int, s_i: np.ndarray, s_p: np.ndarray) -> MPS:
    """Sum over all placements of ``k`` copies of ``s_P`` and ``n - k`` copies of ``s_I``.

    The bond index counts how many ``s_P`` have been placed so far, restricted to
    the values from which ``k`` can still be reached, so the bond dimension never
    exceeds ``min(k, n - k) + 1``.

    Raises:
        ValueError: If ``k`` is outside ``0..n``.
    """
    if not 0 <= k <= n:
        raise ValueError(f"k={k} outside 0..{n}")
    s_i = np.asarray(s_i, dtype=float)
    s_p = np.asarray(s_p, dtype=float)
    d = s_i.size

    def window(j):  # feasible counts after j sites
        return max(0, k - (n - j)), min(j, k)

    sites = []
    for j in range(n):
        lo_l, hi_l = window(j)
        lo_r, hi_r = window(j + 1)
        a = np.zeros((hi_l - lo_l + 1, d, hi_r - lo_r + 1))
        for c in range(lo_l, hi_l + 1):
            if lo_r <= c <= hi_r:
                a[c - lo_l, :, c - lo_r] = s_i
            if lo_r <= c + 1 <= hi_r:
                a[c - lo_l, :, c + 1 - lo_r] = s_p
        sites.append(a)
    return MPS(sites)


def _ensure_pnet(topology: Topology, pnet: PNet | None, t: int = 2) -> PNet:
    return pnet if pnet is not None else build_pnet(topology, t=t)


def k_purities_from_mps(evolved: MPS, group: str, metadata: dict | None = None) -> PurityDistribution:
    """k-purities ``<<phi_k|evolved>>`` for an already evolved observable MPS in orthonormal coordinates."""
    n = evolved.n
    s_i, s_p = s_vectors(group)
    vals = np.array([inner_product(phi_k_mps(n, k, s_i, s_p), evolved).value for k in range(n + 1)])
    return PurityDistribution(n, vals, dict(metadata or {}))


def weight_gauge(group: str, tilt: float = 1.0, t: int = 2) -> np.ndarray:
    """Per-site map from orthonormal coordinates to tilted Pauli-weight coordinates.

    Coordinate ``a`` is the coefficient of basis element ``E_a`` times
    ``<<s_I|E_a>> + <<s_P|E_a>>`` (the number of Pauli pairs it contains), multiplied
    by ``tilt`` when ``E_a`` is traceless. In these coordinates ``s_I`` and ``s_P``
    become indicator functionals, U(4) gates are column-stochastic, and a sector with
    ``k`` non-identity sites is scaled by ``tilt**k``.

    Raises:
        ValueError: If ``tilt`` is not positive.
    """
    if not tilt > 0:
        raise ValueError("tilt must be positive")
    basis = site_basis(normalize_group(group), t)
    s_i, s_p = s_vectors(group, t)
    tmat = basis.change_of_basis
    weight_i, weight_p = s_i @ tmat, s_p @ tmat
    scale = np.where(np.abs(weight_i) > 0.5, weight_i, tilt * weight_p)
    return np.diag(np.real(scale)) @ np.linalg.inv(tmat)


def _map_sites(m: MPS, r: np.ndarray) -> MPS:
    return MPS([np.einsum("pq,aqb->apb", r, a) for a in m.sites], m.ledger)


def k_purities(
    topology: Topology,
    pauli: str,
    rel_cutoff: float = PURITY_CUTOFF,
    pnet: PNet | None = None,
    tilt: float = DEFAULT_TILT,
) -> PurityDistribution:
    """Circuit-averaged k-purities of a Pauli observable.

    One Heisenberg evolution of ``|O (x) O>>`` is shared by all ``k``. The evolution
    runs in tilted Pauli-weight coordinates (see :func:`weight_gauge`): the
    k-purities span many orders of magnitude, and tilting keeps the heavy sectors
    well conditioned under truncation.
    """
    start = time.perf_counter()
    p = _ensure_pnet(topology, pnet)
    s = parse_pauli(pauli, topology.n)
    if set(s) == {"I"}:
        raise ValueError("k-purities need a non-identity Pauli")
    n = topology.n
    r = weight_gauge(p.basis.group, tilt, p.t)
    r_inv = np.linalg.inv(r)
    r2, r2_inv = np.kron(r, r), np.kron(r_inv, r_inv)
    gauged = replace(p, gates=tuple(r2 @ g.matrix @ r2_inv for g in p.gates))
    obs = _map_sites(vectorize_pauli_obs(s, p.basis), r)
    evolved, profile = evolve(gauged, obs, rel_cutoff=rel_cutoff)
    s_i, s_p = s_vectors(p.basis.group, p.t)
    untilted = np.linalg.inv(weight_gauge(p.basis.group, 1.0, p.t)).T
    f_i, f_p = untilted @ s_i, untilted @ s_p
    vals = np.zeros(n + 1)
    for k in range(n + 1):
        ip = inner_product(phi_k_mps(n, k, f_i, f_p), evolved)
        if ip.sign != 0:
            vals[k] = ip.sign * math.exp(ip.log_abs - k * math.log(tilt))
    meta = {
        "topology": topology.to_dict(),
        "topology_hash": topology.digest(),
        "observable": s,
        "max_bond": int(max(profile, default=1)),
        "bond_profile": [int(x) for x in profile],
        "cutoff": rel_cutoff,
        "tilt": tilt,
        "basis": p.basis.group,
        "gate_digests": p.metadata.get("gate_digests"),
        "wall_time_s": time.perf_counter() - start,
    }
    return PurityDistribution(n, vals, meta)


def haar_purities(n: int) -> PurityDistribution:
    """Global-Haar k-purities ``3^k C(n, k) / (4^n - 1)`` for ``k >= 1`` and ``p^(0) = 0``."""
    if n < 1:
        raise ValueError("n must be at least 1")
    log_den = n * math.log(4.0) + math.log1p(-(4.0**-n))
    vals = [0.0]
    for k in range(1, n + 1):
        log_binom = math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)
        vals.append(math.exp(k * math.log(3.0) + log_binom - log_den))
    return PurityDistribution(n, np.array(vals), {"source": "haar closed form"})


def z_haar(n: int, group: str) -> float:
    """Global-Haar collision probability: ``3/(2^n+2)`` for O, ``2/(2^n+1)`` for U."""
    g = str(group).strip().upper()
    if g in ("O", "O4"):
        return 3.0 / (2.0**n + 2.0)
    if g in ("U", "U4"):
        return 2.0 / (2.0**n + 1.0)
    raise ValueError(f"unsupported group {group!r}; expected U or O")


def collision_probability(
    topology: Topology,
    exact: bool = False,
    rel_cutoff: float = DEFAULT_CUTOFF,
    pnet: PNet | None = None,
) -> float:
    """Circuit-averaged collision probability ``Z = 2^n E[p(0^n)^2]``.

    The shortcut assumes every outcome is equally likely, which holds when every
    qubit is acted on by some gate. If not, a :class:`ShortcutWarning` is emitted
    and the shortcut value is still returned. ``exact=True`` instead returns
    ``E[sum_x p(x)^2]``, which only counts the ``2^(touched qubits)`` reachable outcomes.

    Raises:
        ValueError: For free-fermionic circuits, whose computational-basis
            projectors leave the fixed-parity sector covered by the 9x9 gate.
    """
    if "FF_SO4" in topology.groups:
        raise ValueError("collision probabilities need the parity-mixing free-fermion sector")
    n = topology.n
    zeros = "0" * n
    m = circuit_moment(topology, zeros, "|" + zeros + ">", t=2, rel_cutoff=rel_cutoff, pnet=pnet)
    n_touched = len(topology.touched())
    if n_touched < n:
        if exact:
            return 2.0**n_touched * m
        warnings.warn(
            f"{n - n_touched} qubit(s) have no gate; outcomes are not equiprobable",
            ShortcutWarning,
            stacklevel=2,
        )
    return 2.0**n * m


def anticoncentration_curve(
    n: int, layers: Sequence[int], group: str, rel_cutoff: float = DEFAULT_CUTOFF
) -> list[tuple[int, float, int]]:
    """``Z(n_L)`` of the brick-wall ansatz for each requested depth.

    Identical layers let the Heisenberg evolution of ``|0^n><0^n|`` be reused: after
    ``L`` layers the MPS equals the full depth-``L`` result.

    Returns:
        ``(n_layers, Z, max_bond)`` tuples.
    """
    from .circuits import hea_topology, vectorize_product_state

    wanted = sorted(set(int(x) for x in layers))
    if not wanted or wanted[0] < 0:
        raise ValueError("layers must be non-negative")
    top = hea_topology(n, wanted[-1], group)
    p = build_pnet(top)
    rho = vectorize_product_state("0" * n, p.basis)
    out = []
    if 0 in wanted:
        out.append((0, 2.0**n * inner_product(rho, rho).value, 1))
    for done, m, chi in evolve_layers(p, rho, rel_cutoff=rel_cutoff):
        if done in wanted:
            out.append((done, 2.0**n * inner_product(rho, m).value, chi))
    return out


def deep_hea_reduced_state(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Single-site reduced state of the normalized deep-circuit MPS and its eigenvalues.

    Returns:
        ``(rho, (lambda_1, lambda_2))`` with ``lambda_1 >= lambda_2``.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    x = 4.0 ** (-(n - 1))
    y = 4.0**-n
    a = 0.25 * (1.0 - x) / (1.0 - y)  # (4^{n-1} - 1) / (4^n - 1)
    d = 0.75 / (1.0 - y)  # 3 4^{n-1} / (4^n - 1)
    off = math.sqrt(3.0) * a
    rho = np.array([[a, off], [off, d]])
    # det = 3 (4^{n-1} - 1) / (4^n - 1)^2, evaluated without cancellation
    det = 3.0 * a * y / (1.0 - y)
    disc = math.sqrt(max(0.25 - det, 0.0))
    lam1 = 0.5 + disc
    lam2 = det / lam1
    return rho, np.array([lam1, lam2])


def binary_entropy(lams: Iterable[float]) -> float:
    lams = np.asarray(list(lams), dtype=float)
    lams = lams[lams > 0]
    return float(-np.sum(lams * np.log(lams)))


def region_q(j: int) -> list[int]:
    """Single site ``{j}`` (1-based) as 0-based indices."""
    return [j - 1]


def region_e(j: int) -> list[int]:
    """Prefix ``{1..j}`` as 0-based indices."""
    return list(range(j))


def region_m(n: int, j: int) -> list[int]:
    """Centered block ``{n/2 - j, ..., n/2 + j}`` (1-based, ``n/2`` rounded down)."""
    c = n // 2
    if c - j < 1 or c + j > n:
        raise ValueError(f"M_{j} does not fit in n={n}")
    return list(range(c - j - 1, c + j))


def family_indices(n: int, family: str) -> list[int]:
    f = family.upper()
    if f == "Q":
        return list(range(1, n + 1))
    if f == "E":
        return list(range(1, n))
    if f == "M":
        c = n // 2
        return list(range(0, min(c - 1, n - c) + 1))
    raise ValueError(f"unknown region family {family!r}")


def family_region(n: int, family: str, j: int) -> list[int]:
    f = family.upper()
    return {"Q": lambda: region_q(j), "E": lambda: region_e(j), "M": lambda: region_m(n, j)}[f]()


@dataclass(frozen=True)
class EntropyRow:
    layer: int
    family: str
    index: int
    measure: str
    value: float | None


def entropy_scan(
    topology: Topology,
    observable: str,
    families: Sequence[str] = ("Q", "E", "M"),
    measures: Sequence[str] = ("S", "S2"),
    chi_budget: int = 64,
    rel_cutoff: float = DEFAULT_CUTOFF,
    indices: dict | None = None,
    layers: Iterable[int] | None = None,
) -> list[EntropyRow]:
    """Entanglement entropies of the normalized Heisenberg-evolved observable MPS.

    Entropies are evaluated at layer 0 and after each circuit layer, once the layer's
    compression has been done. ``S2`` cells are skipped (value ``None``) when the
    bond dimension exceeds ``chi_budget``.
    """
    p = build_pnet(topology)
    n = topology.n
    obs = vectorize_pauli_obs(observable, p.basis, n=n)
    keep = None if layers is None else set(int(x) for x in layers)
    rows: list[EntropyRow] = []

    def record(layer, m):
        state = normalize_to_state(m, rel_cutoff)
        chi = state.max_bond()
        for fam in families:
            idx = (indices or {}).get(fam, family_indices(n, fam))
            for j in idx:
                region = family_region(n, fam, j)
                for meas in measures:
                    if meas == "S":
                        rows.append(EntropyRow(layer, fam, j, "S", entropy_vn(state, region)))
                    elif meas == "S2":
                        val = entropy_renyi2(state, region) if chi <= chi_budget else None
                        rows.append(EntropyRow(layer, fam, j, "S2", val))
                    else:
                        raise ValueError(f"unknown measure {meas!r}")

    if keep is None or 0 in keep:
        record(0, obs)
    for done, m, _ in evolve_layers(p, obs, rel_cutoff=rel_cutoff):
        if keep is None or done in keep:
            record(done, m)
    return rows


def q02_mps(n: int) -> MPS:
    """Bond-3 MPS of ``sum_j Z_j + sum_{i<j} (X+Y)_i Z...Z (X+Y)_j`` in labels 0=1, 1=Z, 2=X+Y."""
    if n < 2:
        raise ValueError("n must be at least 2")
    e = np.eye(3)
    left = np.stack([e[0], e[1], e[2]], axis=1)[None]  # [1, phys, bond]
    bulk = np.zeros((3, 3, 3))
    bulk[0, :, 0], bulk[0, :, 1], bulk[0, :, 2] = e[0], e[1], e[2]
    bulk[1, :, 1] = e[0]
    bulk[2, :, 1], bulk[2, :, 2] = e[2], e[1]
    right = np.stack([e[1], e[0], e[2]], axis=0)[:, :, None]  # [bond, phys, 1]
    return MPS([left] + [bulk] * (n - 2) + [right])


def to_element_coordinates(m: MPS, group: str) -> MPS:
    """Re-express each site of an MPS from orthonormal to element-basis coordinates."""
    tinv = np.linalg.inv(site_basis(normalize_group(group)).change_of_basis)
    return MPS([np.einsum("pa,lar->lpr", tinv, a) for a in m.sites], m.ledger)
