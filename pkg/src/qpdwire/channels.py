"""Quantum channels held as column-stacking superoperators.

``vec(rho)`` stacks columns (``rho.reshape(-1, order="F")``), so
``vec(A rho B) = (B^T kron A) vec(rho)``. The Choi matrix is
``J = sum_ij |i><j| kron C(|i><j|)`` with the reference system first, and
the chi matrix satisfies ``C(rho) = sum_ab chi_ab P_a rho P_b`` in the
canonical Pauli basis of :mod:`qpdwire.pauli`.
"""

from __future__ import annotations

import json
from functools import cached_property, lru_cache
from pathlib import Path

import numpy as np

from .pauli import pauli_basis
from .states import DensityMatrix, max_entangled_vector, num_qubits, trace_distance

PSD_TOL = 1e-9
TP_TOL = 1e-9
KRAUS_CUTOFF = 1e-12
RANK_TOL = 1e-9


def vec(mat: np.ndarray) -> np.ndarray:
    return np.asarray(mat).reshape(-1, order="F")


def unvec(v: np.ndarray) -> np.ndarray:
    d = int(round(np.sqrt(v.shape[0])))
    return np.asarray(v).reshape(d, d, order="F")


def conjugation_superop(u: np.ndarray) -> np.ndarray:
    """Superoperator of ``rho -> u rho u^dagger``."""
    u = np.asarray(u, dtype=complex)
    return np.kron(u.conj(), u)


@lru_cache(maxsize=None)
def _choi_basis(n: int) -> np.ndarray:
    # columns are (I kron P_a)|Omega> with |Omega> = sum_i |ii>
    B = np.stack([p.T.reshape(-1) for p in pauli_basis(n)], axis=1)
    B.setflags(write=False)
    return B


@lru_cache(maxsize=None)
def _vec_basis(n: int) -> np.ndarray:
    B = np.stack([vec(p) for p in pauli_basis(n)], axis=1)
    B.setflags(write=False)
    return B


def superop_to_choi(S: np.ndarray) -> np.ndarray:
    d = int(round(np.sqrt(S.shape[0])))
    S4 = S.reshape(d, d, d, d, order="F")  # [o, o', i, j]
    return S4.transpose(2, 0, 3, 1).reshape(d * d, d * d)


def choi_to_superop(J: np.ndarray) -> np.ndarray:
    d = int(round(np.sqrt(J.shape[0])))
    J4 = J.reshape(d, d, d, d)  # [i, o, j, o']
    return J4.transpose(1, 3, 0, 2).reshape(d * d, d * d, order="F")


def chi_to_choi(chi: np.ndarray, n: int) -> np.ndarray:
    B = _choi_basis(n)
    return B @ chi @ B.conj().T


def choi_to_chi(J: np.ndarray, n: int) -> np.ndarray:
    B = _choi_basis(n)
    return B.conj().T @ J @ B / 4**n


class LinearMap:
    """A linear map on ``n``-qubit operators, not necessarily CPTP.

    Used for signed QPD combinations; :class:`Channel` adds validation.
    """

    def __init__(self, superop: np.ndarray, n: int | None = None):
        S = np.array(superop, dtype=complex)
        if S.ndim != 2 or S.shape[0] != S.shape[1]:
            raise ValueError(f"superoperator must be square, got {S.shape}")
        d = int(round(np.sqrt(S.shape[0])))
        if d * d != S.shape[0]:
            raise ValueError(f"superoperator size {S.shape[0]} is not a square")
        inferred = num_qubits(d)
        if n is not None and n != inferred:
            raise ValueError(f"superoperator acts on {inferred} qubits, not {n}")
        S.setflags(write=False)
        self._S = S
        self.n = inferred

    @property
    def dim(self) -> int:
        return 2**self.n

    @property
    def superop(self) -> np.ndarray:
        return self._S

    def apply(self, rho) -> np.ndarray:
        mat = rho.mat if isinstance(rho, DensityMatrix) else np.asarray(rho)
        return unvec(self._S @ vec(mat))

    def apply_extended(self, rho: np.ndarray) -> np.ndarray:
        """``(I kron C)(rho)`` for ``rho`` on reference (first) plus system."""
        d = self.dim
        S4 = self._S.reshape(d, d, d, d, order="F")
        r = np.asarray(rho).reshape(-1, d, rho.shape[0] // d, d)
        da = r.shape[0]
        out = np.einsum("pqst,asbt->apbq", S4, r.reshape(da, d, da, d))
        return out.reshape(da * d, da * d)

    @cached_property
    def choi(self) -> np.ndarray:
        J = superop_to_choi(self._S)
        J.setflags(write=False)
        return J

    @cached_property
    def chi(self) -> np.ndarray:
        chi = choi_to_chi(self.choi, self.n)
        chi.setflags(write=False)
        return chi

    @cached_property
    def ptm(self) -> np.ndarray:
        """``R_ij = tr[P_i C(P_j)] / 2**n``."""
        B = _vec_basis(self.n)
        R = B.conj().T @ self._S @ B / self.dim
        R.setflags(write=False)
        return R

    def entanglement_fidelity(self) -> float:
        phi = max_entangled_vector(self.n)
        return float(np.real(np.vdot(phi, self.choi @ phi))) / self.dim

    def compose(self, other: LinearMap) -> LinearMap:
        """``self o other`` (``other`` acts first)."""
        _check_n(self, other)
        return LinearMap(self._S @ other._S)

    def __add__(self, other: LinearMap) -> LinearMap:
        _check_n(self, other)
        return LinearMap(self._S + other._S)

    def __sub__(self, other: LinearMap) -> LinearMap:
        _check_n(self, other)
        return LinearMap(self._S - other._S)

    def __mul__(self, scalar: float) -> LinearMap:
        return LinearMap(scalar * self._S)

    __rmul__ = __mul__

    def max_abs_diff(self, other: LinearMap) -> float:
        _check_n(self, other)
        return float(np.max(np.abs(self._S - other._S)))

    def __repr__(self):
        return f"{type(self).__name__}(n={self.n})"


def _check_n(a: LinearMap, b: LinearMap) -> None:
    if a.n != b.n:
        raise ValueError(f"qubit count mismatch: {a.n} != {b.n}")


class Channel(LinearMap):
    """A CPTP map, validated on construction.

    Complete positivity is checked on Choi eigenvalues (``>= -PSD_TOL``) and
    trace preservation on the reduced Choi matrix (``Tr_out J = I``).
    """

    def __init__(self, superop: np.ndarray, n: int | None = None, *, _chi: np.ndarray | None = None):
        super().__init__(superop, n)
        J = self.choi
        lo = float(np.linalg.eigvalsh((J + J.conj().T) / 2).min())
        if lo < -PSD_TOL:
            raise ValueError(f"not completely positive: Choi eigenvalue {lo:.3e}")
        d = self.dim
        reduced = np.einsum("iojo->ij", J.reshape(d, d, d, d))
        err = float(np.max(np.abs(reduced - np.eye(d))))
        if err > TP_TOL:
            raise ValueError(f"not trace preserving: |Tr_out J - I| = {err:.3e}")
        if _chi is not None:
            self.__dict__["chi"] = _chi

    # constructors -------------------------------------------------------

    @classmethod
    def from_kraus(cls, kraus) -> Channel:
        ops = [np.asarray(k, dtype=complex) for k in kraus]
        return cls(sum(np.kron(k.conj(), k) for k in ops))

    @classmethod
    def from_choi(cls, J: np.ndarray) -> Channel:
        return cls(choi_to_superop(np.asarray(J, dtype=complex)))

    @classmethod
    def from_chi(cls, chi: np.ndarray, n: int | None = None) -> Channel:
        chi = np.array(chi, dtype=complex)
        m = chi.shape[0]
        n_chi = (m.bit_length() - 1) // 2
        if chi.shape != (4**n_chi, 4**n_chi):
            raise ValueError(f"chi must be 4^n x 4^n, got {chi.shape}")
        if n is not None and n != n_chi:
            raise ValueError(f"chi shape implies n={n_chi}, not {n}")
        if np.max(np.abs(chi - chi.conj().T)) > PSD_TOL:
            raise ValueError("invalid chi: not Hermitian")
        lo = float(np.linalg.eigvalsh(chi).min())
        if lo < -PSD_TOL:
            raise ValueError(f"invalid chi: not PSD (eigenvalue {lo:.3e})")
        P = pauli_basis(n_chi)
        # tr C(rho) = tr[(sum_ab chi_ab P_b P_a) rho]
        tp = np.einsum("ab,bij,ajk->ik", chi, P, P)
        if np.max(np.abs(tp - np.eye(2**n_chi))) > TP_TOL:
            raise ValueError("invalid chi: sum_ab chi_ab P_b P_a != I (not trace preserving)")
        chi.setflags(write=False)
        return cls(choi_to_superop(chi_to_choi(chi, n_chi)), _chi=chi)

    @classmethod
    def unitary(cls, u: np.ndarray) -> Channel:
        return cls(conjugation_superop(u))

    @classmethod
    def identity(cls, n: int) -> Channel:
        return cls(np.eye(4**n, dtype=complex))

    @classmethod
    def from_linear_map(cls, m: LinearMap) -> Channel:
        return cls(m.superop)

    # views --------------------------------------------------------------

    @cached_property
    def kraus(self) -> list[np.ndarray]:
        J = (self.choi + self.choi.conj().T) / 2
        vals, vecs = np.linalg.eigh(J)
        d = self.dim
        return [
            np.sqrt(lam) * vecs[:, k].reshape(d, d).T
            for k, lam in enumerate(vals)
            if lam > KRAUS_CUTOFF
        ][::-1]

    @cached_property
    def pauli_probabilities(self) -> np.ndarray:
        """Diagonal of chi; a probability vector for every CPTP map."""
        return np.real(np.diag(self.chi)).copy()

    def compose(self, other: LinearMap) -> LinearMap:
        out = super().compose(other)
        return Channel(out.superop) if isinstance(other, Channel) else out

    # serialization ------------------------------------------------------

    def to_json(self) -> str:
        chi = self.chi
        data = [[[float(v.real), float(v.imag)] for v in row] for row in chi]
        return json.dumps({"n": self.n, "representation": "chi", "data": data})

    @classmethod
    def from_json(cls, text: str) -> Channel:
        doc = json.loads(text)
        if doc.get("representation") != "chi":
            raise ValueError(f"unsupported representation {doc.get('representation')!r}")
        chi = np.array([[complex(re, im) for re, im in row] for row in doc["data"]])
        return cls.from_chi(chi, doc["n"])

    def save(self, path) -> None:
        Path(path).write_text(self.to_json())

    @classmethod
    def load(cls, path) -> Channel:
        return cls.from_json(Path(path).read_text())


# -- standard channels ----------------------------------------------------


def to_chi(c: LinearMap) -> np.ndarray:
    return c.chi


def from_chi(n: int, chi: np.ndarray) -> Channel:
    return Channel.from_chi(chi, n)


def entanglement_fidelity(c: LinearMap) -> float:
    return c.entanglement_fidelity()


def pauli_channel(probs) -> Channel:
    """``rho -> sum_a probs[a] P_a rho P_a`` with canonical Pauli indexing."""
    p = np.asarray(probs, dtype=float)
    if np.any(p < 0) or abs(p.sum() - 1) > 1e-12:
        raise ValueError("Pauli probabilities must be nonnegative and sum to 1")
    n = (p.shape[0].bit_length() - 1) // 2
    if p.shape[0] != 4**n:
        raise ValueError(f"expected 4^n probabilities, got {p.shape[0]}")
    S = sum(pa * np.kron(P.conj(), P) for pa, P in zip(p, pauli_basis(n)) if pa != 0)
    return Channel(S, _chi=np.diag(p).astype(complex))


def depolarizing(n: int, p: float) -> Channel:
    """``D_p``: identity with probability ``p``, else a uniform non-identity Pauli."""
    if not 0 <= p <= 1:
        raise ValueError(f"depolarizing parameter must lie in [0, 1], got {p}")
    probs = np.full(4**n, (1 - p) / (4**n - 1))
    probs[0] = p
    return pauli_channel(probs)


def replacement_channel(n: int) -> Channel:
    """``rho -> tr(rho) I / 2**n``."""
    d = 2**n
    return Channel(np.outer(vec(np.eye(d)), vec(np.eye(d))) / d)


def rotation(axis, theta: float) -> np.ndarray:
    """``exp(-i theta/2 (axis . sigma))``."""
    nx, ny, nz = np.asarray(axis, dtype=float)
    P = pauli_basis(1)
    gen = nx * P[1] + ny * P[3] + nz * P[2]
    return np.cos(theta / 2) * np.eye(2) - 1j * np.sin(theta / 2) * gen


def coherent_offdiag_sum(c: LinearMap) -> float:
    """``sum_{a != b} |chi_ab|``; an upper bound on the coherent error."""
    chi = c.chi
    return float(np.abs(chi).sum() - np.abs(np.diag(chi)).sum())


def choi_state(c: LinearMap) -> DensityMatrix:
    """``(I kron C)(Phi_n)``, the normalized Choi matrix."""
    return DensityMatrix(c.choi / c.dim)


def ptm_rank(c: LinearMap, tol: float = RANK_TOL) -> int:
    return int(np.sum(np.linalg.svd(c.ptm, compute_uv=False) > tol))


def diamond_lower_bound(c1: LinearMap, c2: LinearMap, rng: np.random.Generator, samples: int = 1000) -> float:
    """Max of ``||(I kron (C1 - C2))(psi)||_1`` over random pure inputs with ancilla.

    A sampled lower bound on the diamond distance; not the exact SDP value.
    """
    _check_n(c1, c2)
    diff = c1 - c2
    d = c1.dim
    best = 0.0
    for _ in range(samples):
        psi = rng.normal(size=d * d) + 1j * rng.normal(size=d * d)
        psi /= np.linalg.norm(psi)
        out = diff.apply_extended(np.outer(psi, psi.conj()))
        best = max(best, trace_distance(out, np.zeros_like(out)))
    return best
