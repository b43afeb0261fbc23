"""Density matrices, the maximally entangled state, and random state draws."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

STATE_TOL = 1e-10


def num_qubits(dim: int) -> int:
    n = dim.bit_length() - 1
    if dim < 1 or 2**n != dim:
        raise ValueError(f"dimension {dim} is not a power of two")
    return n


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """A validated ``2**n x 2**n`` density matrix.

    Construction checks hermiticity, unit trace and positivity, each to
    ``STATE_TOL``; the stored array is read-only.
    """

    mat: np.ndarray

    def __post_init__(self):
        mat = np.array(self.mat, dtype=complex)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValueError(f"density matrix must be square, got shape {mat.shape}")
        num_qubits(mat.shape[0])
        if np.max(np.abs(mat - mat.conj().T)) > STATE_TOL:
            raise ValueError("density matrix is not Hermitian")
        tr = np.trace(mat).real
        if abs(tr - 1) > STATE_TOL:
            raise ValueError(f"density matrix trace is {tr}, expected 1")
        lo = np.linalg.eigvalsh(mat).min()
        if lo < -STATE_TOL:
            raise ValueError(f"density matrix has negative eigenvalue {lo:.3e}")
        mat.setflags(write=False)
        object.__setattr__(self, "mat", mat)

    @property
    def n(self) -> int:
        return num_qubits(self.mat.shape[0])

    @property
    def dim(self) -> int:
        return self.mat.shape[0]

    def purity(self) -> float:
        return float(np.real(np.trace(self.mat @ self.mat)))

    def expectation(self, op: np.ndarray) -> float:
        """``Re tr[op rho]``; exact for Hermitian ``op``."""
        return float(np.real(np.trace(op @ self.mat)))

    def overlap(self, psi: np.ndarray) -> float:
        """``<psi|rho|psi>`` for a state vector ``psi``."""
        return float(np.real(np.vdot(psi, self.mat @ psi)))

    @classmethod
    def from_vector(cls, psi: np.ndarray) -> DensityMatrix:
        psi = np.asarray(psi, dtype=complex)
        psi = psi / np.linalg.norm(psi)
        return cls(np.outer(psi, psi.conj()))

    @classmethod
    def basis(cls, k: int, n: int) -> DensityMatrix:
        psi = np.zeros(2**n, dtype=complex)
        psi[k] = 1
        return cls.from_vector(psi)

    @classmethod
    def maximally_mixed(cls, n: int) -> DensityMatrix:
        return cls(np.eye(2**n, dtype=complex) / 2**n)


def max_entangled_vector(n: int) -> np.ndarray:
    """``|Phi_n> = 2**(-n/2) sum_k |k>|k>`` on ``2n`` qubits."""
    d = 2**n
    return np.eye(d, dtype=complex).reshape(-1) / np.sqrt(d)


def max_entangled(n: int) -> DensityMatrix:
    return DensityMatrix.from_vector(max_entangled_vector(n))


def haar_pure_state(n: int, rng: np.random.Generator) -> DensityMatrix:
    """Haar-random pure state from a normalized complex Gaussian vector."""
    d = 2**n
    psi = rng.normal(size=d) + 1j * rng.normal(size=d)
    return DensityMatrix.from_vector(psi)


def random_density_matrix(n: int, rng: np.random.Generator, rank: int | None = None) -> DensityMatrix:
    """Mixed state ``G G^dagger / tr`` from a Ginibre matrix of the given rank."""
    d = 2**n
    r = d if rank is None else rank
    g = rng.normal(size=(d, r)) + 1j * rng.normal(size=(d, r))
    rho = g @ g.conj().T
    rho = (rho + rho.conj().T) / 2
    return DensityMatrix(rho / np.trace(rho).real)


def trace_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Schatten 1-norm ``||a - b||_1`` (no factor 1/2), in ``[0, 2]`` for states."""
    diff = np.asarray(a) - np.asarray(b)
    diff = (diff + diff.conj().T) / 2
    return float(np.abs(np.linalg.eigvalsh(diff)).sum())
