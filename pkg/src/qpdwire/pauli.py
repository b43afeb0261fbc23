"""Phase-tracked Pauli operators and the maximally commuting partition.

Index convention (fixed globally, the chi-matrix layout depends on it): an
n-qubit Pauli ``X_x Z_z`` is identified with the 2n-bit vector ``(x, z)``
and with the integer ``a = sum_i a_i 2**i`` over that concatenation, i.e.
bit ``i`` of ``a`` is ``x_i`` for ``i < n`` and ``z_{i-n}`` otherwise.

Qubit 0 is the left-most tensor factor, so the computational basis state
``|k_0 ... k_{n-1}>`` sits at row ``sum_i k_i 2**(n-1-i)``.

The *canonical* operator for index ``a`` is the Hermitian representative
``i**(x.z) X_x Z_z`` (``Y`` rather than ``XZ = -iY``). Channel
representations in this package are always expanded in the canonical basis.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

MAX_PARTITION_QUBITS = 3

_I2 = np.eye(2, dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)
_H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
_S = np.array([[1, 0], [0, 1j]], dtype=complex)

_LETTERS = {(0, 0): "I", (1, 0): "X", (0, 1): "Z", (1, 1): "Y"}
_BITS = {v: k for k, v in _LETTERS.items()}


def _dot(u: tuple[int, ...], v: tuple[int, ...]) -> int:
    return sum(a & b for a, b in zip(u, v))


@dataclass(frozen=True)
class PauliOperator:
    """The operator ``i**phase * X_x Z_z`` on ``n`` qubits."""

    n: int
    x: tuple[int, ...]
    z: tuple[int, ...]
    phase: int = 0

    def __post_init__(self):
        x = tuple(int(b) & 1 for b in self.x)
        z = tuple(int(b) & 1 for b in self.z)
        if len(x) != self.n or len(z) != self.n:
            raise ValueError(f"x and z must have length n={self.n}")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "phase", int(self.phase) % 4)

    # construction -------------------------------------------------------

    @classmethod
    def from_index(cls, a: int, n: int) -> PauliOperator:
        """Canonical (Hermitian) Pauli with integer index ``a``."""
        if not 0 <= a < 4**n:
            raise ValueError(f"index {a} out of range for n={n}")
        x = tuple((a >> i) & 1 for i in range(n))
        z = tuple((a >> (n + i)) & 1 for i in range(n))
        return cls(n, x, z, _dot(x, z))

    @classmethod
    def from_label(cls, label: str) -> PauliOperator:
        """Parse ``"XZ"``, ``"-iY"``, ``"+IX"`` style labels (qubit 0 first)."""
        sign = 0
        body = label
        for prefix, k in (("+i", 1), ("-i", 3), ("i", 1), ("+", 0), ("-", 2)):
            if label.startswith(prefix):
                sign, body = k, label[len(prefix):]
                break
        try:
            bits = [_BITS[ch] for ch in body.upper()]
        except KeyError:
            raise ValueError(f"invalid Pauli label {label!r}") from None
        x = tuple(b[0] for b in bits)
        z = tuple(b[1] for b in bits)
        return cls(len(bits), x, z, sign + _dot(x, z))

    @classmethod
    def identity(cls, n: int) -> PauliOperator:
        return cls(n, (0,) * n, (0,) * n, 0)

    # properties ---------------------------------------------------------

    @property
    def index(self) -> int:
        bits = self.x + self.z
        return sum(b << i for i, b in enumerate(bits))

    @property
    def label(self) -> str:
        letters = "".join(_LETTERS[(xi, zi)] for xi, zi in zip(self.x, self.z))
        rel = (self.phase - _dot(self.x, self.z)) % 4
        return ("", "i", "-", "-i")[rel] + letters

    @property
    def is_identity(self) -> bool:
        return not any(self.x) and not any(self.z)

    @property
    def is_hermitian(self) -> bool:
        return (self.phase - _dot(self.x, self.z)) % 2 == 0

    def canonical(self) -> PauliOperator:
        """Drop the phase: the projection onto the quotient group."""
        return PauliOperator(self.n, self.x, self.z, _dot(self.x, self.z))

    def matrix(self) -> np.ndarray:
        out = np.ones((1, 1), dtype=complex)
        for xi, zi in zip(self.x, self.z):
            factor = _I2
            if xi:
                factor = _X
            if zi:
                factor = factor @ _Z
            out = np.kron(out, factor)
        return (1j**self.phase) * out

    # algebra ------------------------------------------------------------

    def adjoint(self) -> PauliOperator:
        return PauliOperator(self.n, self.x, self.z, -self.phase + 2 * _dot(self.x, self.z))

    def __mul__(self, other: PauliOperator) -> PauliOperator:
        return pauli_product(self, other)

    def commutes_with(self, other: PauliOperator) -> bool:
        _check_same_n(self, other)
        return (_dot(self.x, other.z) + _dot(self.z, other.x)) % 2 == 0

    def conjugate(self, other: PauliOperator) -> PauliOperator:
        """Return ``self @ other @ self^dagger``."""
        return pauli_product(pauli_product(self, other), self.adjoint())

    def __str__(self):
        return self.label


def _check_same_n(p: PauliOperator, q: PauliOperator) -> None:
    if p.n != q.n:
        raise ValueError(f"qubit count mismatch: {p.n} != {q.n}")


def pauli_product(p: PauliOperator, q: PauliOperator) -> PauliOperator:
    """Phase-tracked product ``p @ q``.

    Uses ``Z_z X_x = (-1)**(z.x) X_x Z_z``.
    """
    _check_same_n(p, q)
    x = tuple(a ^ b for a, b in zip(p.x, q.x))
    z = tuple(a ^ b for a, b in zip(p.z, q.z))
    return PauliOperator(p.n, x, z, p.phase + q.phase + 2 * _dot(p.z, q.x))


def hs_inner(p: PauliOperator, q: PauliOperator) -> complex:
    """``tr[p @ q]``, evaluated symbolically."""
    prod = pauli_product(p, q)
    if not prod.is_identity:
        return 0j
    return complex(1j**prod.phase * 2**p.n)


def all_paulis(n: int) -> list[PauliOperator]:
    return [PauliOperator.from_index(a, n) for a in range(4**n)]


@lru_cache(maxsize=None)
def _basis(n: int) -> np.ndarray:
    mats = np.array([PauliOperator.from_index(a, n).matrix() for a in range(4**n)])
    mats.setflags(write=False)
    return mats


def pauli_basis(n: int) -> np.ndarray:
    """Canonical Pauli matrices stacked as ``(4**n, 2**n, 2**n)``, read-only."""
    return _basis(n)


def pauli_matrix(a: int, n: int) -> np.ndarray:
    return _basis(n)[a]


def pauli_decompose(op: np.ndarray) -> np.ndarray:
    """Coefficients ``c_a`` with ``op = sum_a c_a P_a`` (canonical basis)."""
    d = op.shape[0]
    n = d.bit_length() - 1
    basis = _basis(n)
    return np.einsum("aij,ji->a", basis, op) / d


def project_to_pauli(op: np.ndarray, atol: float = 1e-9) -> tuple[int, complex] | None:
    """If ``op`` is a scalar multiple of one canonical Pauli, return ``(a, scalar)``."""
    coeffs = pauli_decompose(op)
    nz = np.flatnonzero(np.abs(coeffs) > atol)
    if len(nz) != 1:
        return None
    return int(nz[0]), complex(coeffs[nz[0]])


# -- binary-vector helpers on integer indices ----------------------------


def _split(a: int, n: int) -> tuple[int, int]:
    mask = (1 << n) - 1
    return a & mask, a >> n


def symplectic_commute(a: int, b: int, n: int) -> bool:
    xa, za = _split(a, n)
    xb, zb = _split(b, n)
    return (bin(xa & zb).count("1") + bin(za & xb).count("1")) % 2 == 0


def _span(vectors) -> frozenset[int]:
    span = {0}
    for v in vectors:
        span |= {s ^ v for s in span}
    return frozenset(span)


# -- averages -------------------------------------------------------------


def full_pauli_average(rho: np.ndarray) -> np.ndarray:
    """``4**-n sum_{P in Q_n} P rho P``; equals ``tr(rho) I / 2**n``."""
    rho = np.asarray(rho)
    n = rho.shape[0].bit_length() - 1
    basis = _basis(n)
    return np.einsum("aij,jk,akl->il", basis, rho, basis) / 4**n


def z_average(rho: np.ndarray) -> np.ndarray:
    """``2**-n sum_a Z_a rho Z_a``: dephasing in the computational basis."""
    rho = np.asarray(rho)
    n = rho.shape[0].bit_length() - 1
    zs = _basis(n)[[z << n for z in range(2**n)]]
    return np.einsum("aij,jk,akl->il", zs, rho, zs) / 2**n


# -- maximally commuting partition ---------------------------------------


@dataclass(frozen=True)
class CommutingPartition:
    """``2**n + 1`` disjoint maximally commuting subsets of the non-identity Paulis.

    ``sets[j]`` lists canonical Pauli indices ordered by ``a = 1 .. 2**n - 1``
    (the bit vector of ``Z_a`` read little-endian), so that
    ``signs[j][a-1] * V_j Z_a V_j^dagger == P_{sets[j][a-1]}``.
    """

    n: int
    sets: tuple[tuple[int, ...], ...]
    diagonalizers: tuple[np.ndarray, ...]
    signs: tuple[tuple[int, ...], ...]

    def sign(self, j: int, a: int) -> int:
        return self.signs[j][a - 1]

    def member(self, j: int, a: int) -> int:
        return self.sets[j][a - 1]

    def operators(self, j: int) -> list[PauliOperator]:
        return [PauliOperator.from_index(a, self.n) for a in self.sets[j]]


def z_string(a: int, n: int) -> np.ndarray:
    """``Z_a`` for the little-endian bit vector ``a`` of length ``n``."""
    return pauli_matrix(a << n, n)


def _lagrangians(n: int) -> list[frozenset[int]]:
    nonzero = range(1, 4**n)
    seen: set[frozenset[int]] = set()
    for combo in itertools.combinations(nonzero, n):
        if not all(symplectic_commute(a, b, n) for a, b in itertools.combinations(combo, 2)):
            continue
        span = _span(combo)
        if len(span) == 2**n:
            seen.add(span)
    return sorted(seen, key=lambda s: sorted(s))


def _exact_cover(n: int) -> list[frozenset[int]]:
    z_space = frozenset(z << n for z in range(2**n))
    candidates = [s for s in _lagrangians(n) if s != z_space]
    universe = set(range(1, 4**n))

    def search(covered: set[int], chosen: list[frozenset[int]]):
        if len(covered) == len(universe):
            return chosen
        target = min(universe - covered)
        for cand in candidates:
            if target in cand and not (cand - {0}) & covered:
                found = search(covered | (cand - {0}), chosen + [cand])
                if found is not None:
                    return found
        return None

    result = search(set(z_space - {0}), [z_space])
    if result is None:  # pragma: no cover - spreads exist for every n
        raise RuntimeError(f"no commuting partition found for n={n}")
    return result


def _generators(space: frozenset[int]) -> list[int]:
    gens: list[int] = []
    for v in sorted(space - {0}):
        if v not in _span(gens):
            gens.append(v)
    return gens


def _joint_eigenbasis(gens: list[int], n: int) -> np.ndarray:
    """Columns ordered so that ``G_i v_k = (-1)**k_i v_k`` (``k_0`` most significant)."""
    d = 2**n
    mats = [pauli_matrix(g, n) for g in gens]
    eye = np.eye(d, dtype=complex)
    V = np.empty((d, d), dtype=complex)
    for row in range(d):
        k = [(row >> (n - 1 - i)) & 1 for i in range(n)]
        proj = eye
        for ki, G in zip(k, mats):
            proj = proj @ (eye + (-1) ** ki * G) / 2
        col = proj[:, np.argmax(np.linalg.norm(proj, axis=0))]
        col = col / np.linalg.norm(col)
        lead = col[np.flatnonzero(np.abs(col) > 1e-9)[0]]
        V[:, row] = col * (abs(lead) / lead)
    return V


def _signed_members(V: np.ndarray, space: frozenset[int], n: int, atol: float = 1e-10):
    members, signs = [], []
    candidates = sorted(space - {0})
    for a in range(1, 2**n):
        W = V @ z_string(a, n) @ V.conj().T
        for b in candidates:
            P = pauli_matrix(b, n)
            if np.max(np.abs(W - P)) < atol:
                members.append(b)
                signs.append(1)
                break
            if np.max(np.abs(W + P)) < atol:
                members.append(b)
                signs.append(-1)
                break
        else:
            raise ValueError(f"V Z_{a} V^dagger matches no element of the commuting set")
    return tuple(members), tuple(signs)


@lru_cache(maxsize=None)
def commuting_partition(n: int) -> CommutingPartition:
    """Partition of the non-identity Paulis into maximally commuting sets.

    For ``n == 1`` the diagonalizers are exactly ``I, H, SH`` for the sets
    ``{Z}, {X}, {Y}``. For ``n`` in ``{2, 3}`` the sets come from a
    deterministic exact-cover search over Lagrangian subspaces and each
    ``V_j`` is assembled from the rank-one joint eigenprojectors.
    """
    if not 1 <= n <= MAX_PARTITION_QUBITS:
        raise ValueError(f"commuting_partition supports 1 <= n <= {MAX_PARTITION_QUBITS}, got {n}")
    if n == 1:
        spaces = [frozenset({0, 2}), frozenset({0, 1}), frozenset({0, 3})]
        Vs = [np.eye(2, dtype=complex), _H.copy(), _S @ _H]
    else:
        spaces = _exact_cover(n)
        Vs = [_joint_eigenbasis(_generators(s), n) for s in spaces]
    sets, signs = [], []
    for V, space in zip(Vs, spaces):
        members, sgn = _signed_members(V, space, n)
        sets.append(members)
        signs.append(sgn)
        V.setflags(write=False)
    return CommutingPartition(n, tuple(sets), tuple(Vs), tuple(signs))
