"""Local commutant bases, Weingarten projectors and P-gates.

Vectorization convention: an operator ``X`` acting on ``t`` copies of a qubit is a
``2**t x 2**t`` matrix (copy 1 is the most significant factor) and
``vec(X) = X.reshape(-1)`` (row-major), so ``<<Y|X>> = Tr[Y^dag X] = vdot(vec Y, vec X)``
and ``X -> A X A^dag`` acts as ``kron(A, conj(A))``.

Multi-site vectors use the site-grouped layout: ``vec(X_1 (x) ... (x) X_n)`` is
``kron(vec X_1, ..., vec X_n)`` where each ``X_j`` collects the copies of qubit ``j``.

A P-gate is stored in an orthonormal per-site basis. The familiar non-orthogonal
basis (identity, swap-like ``S``, and for O(4) the Bell-like ``B``) is kept as the
"element" view, related by the change of basis ``T[a, mu] = <<e_hat_a|e_mu>>``:
orthonormal coordinates are ``x = T @ c`` and ``P_orth = T @ P_elem @ inv(T)``.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from typing import Callable, Sequence

import numpy as np

from .tensor import NumericError, svd

GROUPS = ("U4", "O4", "FF_SO4")

I2 = np.eye(2)
X = np.array([[0.0, 1.0], [1.0, 0.0]])
Y = np.array([[0.0, -1.0j], [1.0j, 0.0]])
Z = np.array([[1.0, 0.0], [0.0, -1.0]])
PAULI = {"I": I2, "X": X, "Y": Y, "Z": Z}

GRAM_RCOND = 1e-10


class BasisError(ValueError):
    """Raised when a basis does not close under a moment operator or is unsupported."""


class SamplingError(NumericError):
    """Raised when a sampled commutant fails the idempotence check."""


def normalize_group(group: str) -> str:
    """Map user spellings (``U``, ``u4``, ``O``, ``FF``) onto the canonical tags."""
    g = str(group).strip().upper().replace("(", "").replace(")", "")
    aliases = {"U": "U4", "U4": "U4", "O": "O4", "O4": "O4", "SO4": "O4",
               "FF": "FF_SO4", "FF_SO4": "FF_SO4", "FFSO4": "FF_SO4"}
    if g not in aliases:
        raise BasisError(f"unsupported group tag {group!r}; expected one of {GROUPS}")
    return aliases[g]


def copy_pauli(label: str, t: int) -> np.ndarray:
    """``sigma^{(x) t}`` on ``t`` copies of one qubit, as a ``2**t`` square matrix."""
    out = np.ones((1, 1), dtype=complex)
    for _ in range(t):
        out = np.kron(out, PAULI[label])
    return out


def vec(op: np.ndarray) -> np.ndarray:
    """Row-major vectorization; returns a real array when ``op`` is real."""
    v = np.asarray(op).reshape(-1)
    if np.iscomplexobj(v) and np.max(np.abs(v.imag), initial=0.0) < 1e-14:
        v = v.real.copy()
    return v


def copy_major_to_site(op: np.ndarray, n: int, t: int) -> np.ndarray:
    """Vectorize an operator on ``t`` copies of ``n`` qubits into the site-grouped layout.

    ``op`` has rows indexed by (copy 1: qubits 1..n), ..., (copy t: qubits 1..n).
    """
    legs = n * t
    a = np.asarray(op).reshape([2] * (2 * legs))
    perm = []
    for q in range(n):
        perm += [c * n + q for c in range(t)]
        perm += [legs + c * n + q for c in range(t)]
    return vec(np.transpose(a, perm).reshape(-1))


def _site_vec(terms: dict[str, float], t: int) -> np.ndarray:
    """Sum of ``coefficient * sigma^{(x) t}`` as a copy-pair vector."""
    return vec(sum(c * copy_pauli(p, t) for p, c in terms.items()))


# Per-site bases: (labels, element-basis elements, orthonormal elements), each element a Pauli sum.
_SITE_BASES: dict[tuple[str, int], tuple[tuple[str, ...], list[dict], list[dict]]] = {
    ("U4", 1): (("1",), [{"I": 1.0}], [{"I": 2**-0.5}]),
    ("O4", 1): (("1",), [{"I": 1.0}], [{"I": 2**-0.5}]),
    ("FF_SO4", 1): (("1", "Z"), [{"I": 1.0}, {"Z": 1.0}], [{"I": 2**-0.5}, {"Z": 2**-0.5}]),
    ("U4", 2): (
        ("1", "S"),
        [{"I": 1.0}, {"X": 1.0, "Y": 1.0, "Z": 1.0}],
        [{"I": 0.5}, {"X": 1 / (2 * math.sqrt(3)), "Y": 1 / (2 * math.sqrt(3)), "Z": 1 / (2 * math.sqrt(3))}],
    ),
    ("O4", 2): (
        ("1", "S", "B"),
        [{"I": 1.0}, {"X": 1.0, "Y": 1.0, "Z": 1.0}, {"X": 1.0, "Y": -1.0, "Z": 1.0}],
        [{"I": 0.5}, {"X": 1 / (2 * math.sqrt(2)), "Z": 1 / (2 * math.sqrt(2))}, {"Y": 0.5}],
    ),
    ("FF_SO4", 2): (
        ("1", "Z", "X+Y"),
        [{"I": 1.0}, {"Z": 1.0}, {"X": 1.0, "Y": 1.0}],
        [{"I": 0.5}, {"Z": 0.5}, {"X": 1 / (2 * math.sqrt(2)), "Y": 1 / (2 * math.sqrt(2))}],
    ),
}


@dataclass(frozen=True, eq=False)
class CommutantBasis:
    """A spanning set of a commutant together with its Gram/Weingarten data.

    Attributes:
        group: Group tag.
        t: Moment order.
        labels: Names of the elements.
        elements: ``(m, D)`` array; row ``mu`` is ``vec(P_mu)``.
        n_sites: Number of qubits the elements act on (1 for site bases, 2 for gates).
        orthonormal: ``(b, D)`` orthonormal rows spanning the same space; for site
            bases this is the fixed internal basis, otherwise derived by SVD.
    """

    group: str
    t: int
    labels: tuple[str, ...]
    elements: np.ndarray
    n_sites: int = 1
    orthonormal: np.ndarray | None = None
    gram: np.ndarray = field(init=False, repr=False)
    weingarten: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        e = np.atleast_2d(np.asarray(self.elements))
        object.__setattr__(self, "elements", e)
        gram = e.conj() @ e.T
        if np.max(np.abs(gram.imag), initial=0.0) < 1e-12:
            gram = gram.real
        object.__setattr__(self, "gram", gram)
        object.__setattr__(self, "weingarten", np.linalg.pinv(gram, rcond=GRAM_RCOND, hermitian=True))
        if self.orthonormal is None:
            u, s, vh = svd(e)
            rank = int(np.count_nonzero(s > GRAM_RCOND * s[0]))
            onb = vh[:rank]
            if np.max(np.abs(onb.imag) if np.iscomplexobj(onb) else 0.0, initial=0.0) < 1e-12:
                onb = onb.real
            object.__setattr__(self, "orthonormal", onb)

    @property
    def norms(self) -> np.ndarray:
        """Hilbert-Schmidt norms of the elements."""
        return np.sqrt(np.abs(np.diag(self.gram)))

    @property
    def dim(self) -> int:
        """Dimension of the spanned space (rank of the Gram matrix)."""
        return self.orthonormal.shape[0]

    @property
    def change_of_basis(self) -> np.ndarray:
        """``T[a, mu] = <<e_hat_a|e_mu>>``: element coordinates to orthonormal ones."""
        t = self.orthonormal.conj() @ self.elements.T
        return t.real if np.max(np.abs(np.imag(t)), initial=0.0) < 1e-12 else t

    def moment_operator(self) -> np.ndarray:
        """Orthogonal projector ``sum_{nu,mu} W+_{nu mu} |P_nu>><<P_mu|`` onto the span."""
        e = self.elements
        tau = e.T @ self.weingarten @ e.conj()
        if np.iscomplexobj(tau) and np.max(np.abs(tau.imag), initial=0.0) < 1e-12:
            tau = tau.real
        return tau

    def coordinates(self, v: np.ndarray) -> np.ndarray:
        """Orthonormal coordinates of the projection of ``v`` onto the span."""
        c = self.orthonormal.conj() @ np.asarray(v)
        if np.iscomplexobj(c) and np.max(np.abs(c.imag), initial=0.0) < 1e-12:
            c = c.real
        return c


@lru_cache(maxsize=None)
def site_basis(group: str, t: int = 2) -> CommutantBasis:
    """Per-site basis in which P-gates of ``group`` act.

    U(4): (1, S); O(4): (1, S, B); free-fermionic SO(4): (1, ZZ, XX+YY).
    At ``t = 1`` the U(4)/O(4) basis is the identity alone and the
    free-fermionic one adds the parity ``Z``.
    """
    group = normalize_group(group)
    if (group, t) not in _SITE_BASES:
        raise BasisError(f"no site basis for group {group} at t={t}")
    labels, raw, ortho = _SITE_BASES[(group, t)]
    elements = np.array([_site_vec(p, t) for p in raw])
    orthonormal = np.array([_site_vec(p, t) for p in ortho])
    return CommutantBasis(group, t, labels, elements, 1, orthonormal)


def basis_norms(group: str, t: int = 2) -> np.ndarray:
    """Diagonal matrix of Hilbert-Schmidt norms of the element-basis site elements."""
    return np.diag(site_basis(group, t).norms)


def _majoranas() -> list[np.ndarray]:
    # Jordan-Wigner on two qubits: X1, Y1, Z1 X2, Z1 Y2.
    return [np.kron(X, I2), np.kron(Y, I2), np.kron(Z, X), np.kron(Z, Y)]


def _majorana_product(s: Sequence[int]) -> np.ndarray:
    c = _majoranas()
    out = np.eye(4, dtype=complex)
    for i in s:
        out = out @ c[i]
    return out


@lru_cache(maxsize=None)
def gate_commutant(group: str, t: int = 2) -> CommutantBasis:
    """Commutant of the two-qubit gate group on ``t`` copies, in the two-site layout.

    U(4): the copy permutations; O(4): additionally the Brauer pairing ``Pi``;
    free-fermionic SO(4): ``Q0_k = sum_{|s|=k} c_s (x) c_s`` over Majorana monomials
    and their parity-twisted partners ``(P (x) 1) Q0_k``.
    """
    group = normalize_group(group)
    if t == 1:
        if group == "FF_SO4":
            ops = [np.kron(vec(I2), vec(I2)), np.kron(vec(Z), vec(Z))]
            return CommutantBasis(group, 1, ("1", "P"), np.array(ops), 2)
        return CommutantBasis(group, 1, ("1",), np.kron(vec(I2), vec(I2))[None, :], 2)
    if t != 2:
        raise BasisError("only t in {1, 2} is supported")
    one = _site_vec({"I": 1.0}, 2)
    swap = _site_vec({"I": 0.5, "X": 0.5, "Y": 0.5, "Z": 0.5}, 2)
    pair = _site_vec({"I": 0.5, "X": 0.5, "Y": -0.5, "Z": 0.5}, 2)
    if group == "U4":
        return CommutantBasis(group, 2, ("1", "SWAP"), np.array([np.kron(one, one), np.kron(swap, swap)]), 2)
    if group == "O4":
        ops = [np.kron(one, one), np.kron(swap, swap), np.kron(pair, pair)]
        return CommutantBasis(group, 2, ("1", "SWAP", "PI"), np.array(ops), 2)
    parity = np.kron(np.kron(Z, Z), np.eye(4))
    ops, labels = [], []
    q0 = []
    for k in range(5):
        acc = np.zeros((16, 16), dtype=complex)
        for s in combinations(range(4), k):
            c = _majorana_product(s)
            acc += np.kron(c, c)
        q0.append(acc)
    for k, q in enumerate(q0):
        ops.append(copy_major_to_site(q, 2, 2))
        labels.append(f"Q0_{k}")
    for k, q in enumerate(q0):
        ops.append(copy_major_to_site(parity @ q, 2, 2))
        labels.append(f"Q1_{k}")
    return CommutantBasis(group, 2, tuple(labels), np.array(ops), 2)


def restrict_to_site_basis(tau: np.ndarray, basis: CommutantBasis, tol: float = 1e-9) -> np.ndarray:
    """Matrix of a two-site moment operator in the orthonormal product site basis.

    Returns ``P[out, in] = <<e_out|tau|e_in>>`` with product index ``b * a1 + a2``.

    Raises:
        BasisError: If ``tau`` maps the product basis outside its own span.
    """
    e = basis.orthonormal
    e2 = np.array([np.kron(a, b) for a in e for b in e])
    image = tau @ e2.T
    p = e2.conj() @ image
    residual = np.linalg.norm(image - e2.T @ p)
    if residual > tol:
        raise BasisError(
            f"site basis {basis.labels} does not close under the moment operator (residual {residual:.2e})"
        )
    if np.iscomplexobj(p):
        if np.max(np.abs(p.imag), initial=0.0) > 1e-10:
            raise BasisError("moment operator is not real in the site basis")
        p = p.real
    return np.ascontiguousarray(p)


def _fraction_matrix(rows: Sequence[Sequence]) -> tuple[tuple[Fraction, ...], ...]:
    return tuple(tuple(Fraction(x) for x in row) for row in rows)


@dataclass(frozen=True, eq=False)
class PGate:
    """Moment operator of one two-qubit gate in a per-site commutant basis.

    Attributes:
        group: Gate group tag.
        t: Moment order.
        basis: Per-site basis the legs live in.
        matrix: ``(b**2, b**2)`` matrix in orthonormal coordinates, ``matrix[out, in]``.
        exact: Optional exact rational entries of the element-basis matrix.
        k: Number of sites the gate acts on.
    """

    group: str
    t: int
    basis: CommutantBasis
    matrix: np.ndarray
    exact: tuple[tuple[Fraction, ...], ...] | None = None
    k: int = 2

    @property
    def leg_dim(self) -> int:
        return self.basis.dim

    @property
    def labels(self) -> tuple[str, ...]:
        return self.basis.labels

    def element_matrix(self) -> np.ndarray:
        """Matrix in the element basis, ``P_elem = inv(T2) @ P @ T2`` with ``T2 = T (x) T``."""
        if self.exact is not None:
            return np.array([[float(x) for x in row] for row in self.exact])
        t = self.basis.change_of_basis
        t2 = np.kron(t, t)
        return np.linalg.solve(t2, self.matrix @ t2)

    def tensor(self) -> np.ndarray:
        """The gate as a rank-4 tensor ``[out1, out2, in1, in2]``."""
        b = self.leg_dim
        return self.matrix.reshape(b, b, b, b)

    def mpo_factors(self, rel_cutoff: float = 1e-12) -> tuple[np.ndarray, np.ndarray]:
        """Operator-Schmidt split ``P = sum_r L_r (x) R_r``.

        Returns:
            ``(L, R)`` with shapes ``(r, b, b)``, indexed ``[r, out, in]``.
        """
        b = self.leg_dim
        g = self.tensor().transpose(0, 2, 1, 3).reshape(b * b, b * b)
        u, s, vh = svd(g)
        r = max(1, int(np.count_nonzero(s > rel_cutoff * s[0])))
        left = (u[:, :r] * np.sqrt(s[:r])).T.reshape(r, b, b)
        right = (np.sqrt(s[:r])[:, None] * vh[:r]).reshape(r, b, b)
        return left, right

    @property
    def mpo_rank(self) -> int:
        return self.mpo_factors()[0].shape[0]

    def idempotence_residual(self) -> float:
        return float(np.max(np.abs(self.matrix @ self.matrix - self.matrix)))

    def to_dict(self) -> dict:
        out = {
            "group": self.group,
            "t": self.t,
            "basis": list(self.labels),
            "convention": "element",
            "index_order": "b*site1+site2, matrix[out][in]",
            "matrix": self.element_matrix().tolist(),
            "D": self.basis.norms.tolist(),
            "change_of_basis": self.basis.change_of_basis.tolist(),
            "orthonormal_matrix": self.matrix.tolist(),
        }
        if self.exact is not None:
            out["exact"] = [[str(x) for x in row] for row in self.exact]
        return out

    def digest(self) -> str:
        """Short content hash used for provenance records."""
        payload = json.dumps({"group": self.group, "t": self.t, "m": self.matrix.round(14).tolist()})
        return hashlib.sha256(payload.encode()).hexdigest()[:16]


def _exact_gate(group: str, rows) -> PGate:
    basis = site_basis(group, 2)
    exact = _fraction_matrix(rows)
    elem = np.array([[float(x) for x in row] for row in exact])
    t = basis.change_of_basis
    t2 = np.kron(t, t)
    matrix = t2 @ elem @ np.linalg.inv(t2)
    matrix = 0.5 * (matrix + matrix.T)
    return PGate(group, 2, basis, matrix, exact)


def _columns_to_rows(columns: dict[int, dict[int, Fraction]], size: int):
    rows = [[Fraction(0)] * size for _ in range(size)]
    for col, entries in columns.items():
        for row, value in entries.items():
            rows[row][col] = Fraction(value)
    return rows


@lru_cache(maxsize=None)
def pgate_u4_t2() -> PGate:
    """Second-moment P-gate of Haar U(4) in the basis (1, S) on each site.

    Built from the actions ``tau|11>> = |11>>``, ``tau|S1>> = tau|1S>> = A/5`` and
    ``tau|SS>> = 3A/5`` with ``A = |S1>> + |1S>> + |SS>>``.
    """
    f = Fraction
    a = {1: f(1), 2: f(1), 3: f(1)}
    cols = {0: {0: f(1)}, 1: {k: v / 5 for k, v in a.items()},
            2: {k: v / 5 for k, v in a.items()}, 3: {k: 3 * v / 5 for k, v in a.items()}}
    return _exact_gate("U4", _columns_to_rows(cols, 4))


@lru_cache(maxsize=None)
def pgate_o4_t2() -> PGate:
    """Second-moment P-gate of Haar O(4) in the basis (1, S, B) on each site.

    Columns follow the two-site actions on products of (1, S, B), expressed through
    ``A_S = |S1>> + |1S>> + |SS>>`` and ``A_B = |B1>> + |1B>> + |BB>>``.
    """
    f = Fraction
    a_s = (1, 3, 4)  # |1S>>, |S1>>, |SS>>
    a_b = (2, 6, 8)  # |1B>>, |B1>>, |BB>>

    def combo(cs, cb):
        out = {i: f(cs) for i in a_s}
        out.update({i: f(cb) for i in a_b})
        return out

    cols = {
        0: {0: f(1)},
        1: combo(f(7, 36), f(1, 36)), 3: combo(f(7, 36), f(1, 36)),
        2: combo(f(1, 36), f(7, 36)), 6: combo(f(1, 36), f(7, 36)),
        5: combo(f(1, 6), f(1, 6)), 7: combo(f(1, 6), f(1, 6)),
        4: combo(f(11, 18), f(-1, 18)),
        8: combo(f(-1, 18), f(11, 18)),
    }
    return _exact_gate("O4", _columns_to_rows(cols, 9))


@lru_cache(maxsize=None)
def pgate_ff_so4_t2() -> PGate:
    """Second-moment P-gate of free-fermionic SO(4) on the fixed-parity sector.

    The site basis is (1, ZZ, XX+YY). Only the parity-even commutant elements
    ``Q0_k`` overlap with inputs that carry the same Pauli on both copies, so the
    gate is exact for Pauli observables.
    """
    basis = site_basis("FF_SO4", 2)
    tau = gate_commutant("FF_SO4", 2).moment_operator()
    matrix = restrict_to_site_basis(tau, basis)
    matrix = 0.5 * (matrix + matrix.T)
    return PGate("FF_SO4", 2, basis, matrix)


@lru_cache(maxsize=None)
def pgate(group: str, t: int = 2, basis_group: str | None = None) -> PGate:
    """P-gate of ``group`` at order ``t`` acting in the site basis of ``basis_group``.

    The canonical gates are returned when the bases agree; otherwise the gate-level
    moment operator is projected into the requested site basis (used to lift U(4)
    gates into the O(4) basis for mixed circuits).
    """
    group = normalize_group(group)
    basis_group = normalize_group(basis_group or group)
    if t == 2 and basis_group == group:
        return {"U4": pgate_u4_t2, "O4": pgate_o4_t2, "FF_SO4": pgate_ff_so4_t2}[group]()
    basis = site_basis(basis_group, t)
    matrix = restrict_to_site_basis(gate_commutant(group, t).moment_operator(), basis)
    return PGate(group, t, basis, 0.5 * (matrix + matrix.T))


def twirl_superoperator(v: np.ndarray, t: int) -> np.ndarray:
    """``V^{(x) t} (x) conj(V)^{(x) t}`` for a two-qubit ``V``, in the two-site layout."""
    a = np.ones((1, 1), dtype=complex)
    for _ in range(t):
        a = np.kron(a, v)
    sup = np.kron(a, a.conj())
    perm = _copy_to_site_permutation(2, t)
    return sup[np.ix_(perm, perm)]


@lru_cache(maxsize=None)
def _copy_to_site_permutation(n: int, t: int) -> np.ndarray:
    idx = np.arange(4 ** (n * t)).reshape([2 ** (n * t)] * 2)
    return copy_major_to_site(idx, n, t).astype(np.int64)


def pgate_from_samples(
    sampler: Callable[[np.random.Generator], np.ndarray],
    t: int,
    basis: CommutantBasis,
    rng: np.random.Generator | int | None = None,
    n_samples: int = 6,
    group: str | None = None,
) -> PGate:
    """P-gate obtained from the commutant of a few sampled group elements.

    The commutant is the joint fixed space of ``V^{(x) t} (x) conj(V)^{(x) t}`` over
    the samples; the moment operator is then built from it with the Gram
    pseudo-inverse and restricted to ``basis``.

    Args:
        sampler: Draws one two-qubit group element from a generator.
        t: Moment order, 1 or 2.
        basis: Per-site basis for the legs.
        rng: Generator or seed.
        n_samples: Number of generic elements used to cut out the commutant.
        group: Tag recorded on the gate (defaults to the basis group).

    Raises:
        SamplingError: If the result is not idempotent within ``1e-6``.
    """
    if t not in (1, 2):
        raise BasisError("only t in {1, 2} is supported")
    rng = np.random.default_rng(rng)
    dim = 16**t
    stack = np.vstack([twirl_superoperator(sampler(rng), t) - np.eye(dim) for _ in range(n_samples)])
    _, s, vh = svd(stack)
    null = vh[s < 1e-8 * max(1.0, s[0])]
    if null.shape[0] == 0:
        raise SamplingError("sampled elements have a trivial commutant")
    comm = CommutantBasis(group or basis.group, t, tuple(f"N{i}" for i in range(len(null))), null.conj(), 2)
    matrix = restrict_to_site_basis(comm.moment_operator(), basis, tol=1e-6)
    gate = PGate(group or basis.group, t, basis, 0.5 * (matrix + matrix.T))
    residual = gate.idempotence_residual()
    if residual > 1e-6:
        raise SamplingError(f"sampled moment operator is not idempotent (residual {residual:.2e})")
    return gate


def _hook_dimension(partition: Sequence[int]) -> int:
    n = sum(partition)
    conj = [sum(1 for p in partition if p > j) for j in range(partition[0])] if partition else []
    hooks = 1
    for i, row in enumerate(partition):
        for j in range(row):
            hooks *= row - j + conj[j] - i - 1
    return math.factorial(n) // hooks


def _partitions(n: int, max_part: int | None = None):
    max_part = n if max_part is None else max_part
    if n == 0:
        yield ()
        return
    for first in range(min(n, max_part), 0, -1):
        for rest in _partitions(n - first, first):
            yield (first,) + rest


def commutant_dim_bound(group: str, t: int, d: int = 2, k: int = 1) -> int:
    """Upper bound on the per-site leg dimension of a ``t``-th moment P-gate.

    For U the bound is the number of independent permutation operators on
    ``(C^d)^{(x) t}``, ``sum over partitions of t with at most d rows of (f^lambda)^2``:
    ``t!`` once ``d >= t`` and the Catalan number ``C_t`` at ``d = 2``. For O and Sp
    it is the number of Brauer pairings ``(2t)! / (2^t t!)``. A gate on ``k`` sites
    has a ``bound**k`` square matrix.

    Raises:
        ValueError: For groups other than U, O, Sp or invalid sizes.
    """
    g = str(group).strip().upper()
    if t < 0 or d < 1 or k < 1:
        raise ValueError("need t >= 0, d >= 1, k >= 1")
    if g in ("U", "U4"):
        return sum(_hook_dimension(p) ** 2 for p in _partitions(t) if len(p) <= d)
    if g in ("O", "O4", "SP"):
        return math.factorial(2 * t) // (2**t * math.factorial(t))
    raise ValueError(f"unsupported group {group!r}; expected U, O or Sp")
