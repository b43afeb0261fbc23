"""Noise models: Pauli noise followed by a coherent rotation, teleportation through
imperfect resource states, and repeated noisy SWAPs on a Bell pair."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .channels import Channel, conjugation_superop, depolarizing, pauli_channel, rotation
from .pauli import pauli_basis
from .states import DensityMatrix, max_entangled, max_entangled_vector, num_qubits

# canonical Pauli indices for n = 1
_IX, _IZ, _IY = 1, 2, 3


@dataclass(frozen=True)
class NoiseModelParams:
    """Pauli channel with error probability ``q`` split as ``(p_x, p_y, p_z)``, then ``exp(-i theta/2 axis.sigma)``."""

    q: float
    p: tuple[float, float, float]
    theta: float
    axis: tuple[float, float, float]

    def __post_init__(self):
        p = tuple(float(x) for x in self.p)
        axis = tuple(float(x) for x in self.axis)
        if not 0 <= self.q <= 1:
            raise ValueError(f"q must lie in [0, 1], got {self.q}")
        if len(p) != 3 or min(p) < 0 or abs(sum(p) - 1) > 1e-12:
            raise ValueError(f"Pauli error distribution must be 3 nonnegative values summing to 1, got {p}")
        if len(axis) != 3 or abs(np.linalg.norm(axis) - 1) > 1e-12:
            raise ValueError(f"rotation axis must be a unit 3-vector, got {axis}")
        object.__setattr__(self, "q", float(self.q))
        object.__setattr__(self, "theta", float(self.theta))
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "axis", axis)

    def fidelity(self) -> float:
        c2 = np.cos(self.theta / 2) ** 2
        s2 = np.sin(self.theta / 2) ** 2
        w = float(np.dot(self.p, np.square(self.axis)))
        return float((1 - self.q) * c2 + self.q * w * s2)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> NoiseModelParams:
        return cls(d["q"], tuple(d["p"]), d["theta"], tuple(d["axis"]))


def combes_channel(params: NoiseModelParams) -> Channel:
    """Single-qubit ``U o P``: Pauli errors first, then the coherent rotation."""
    probs = np.zeros(4)
    probs[0] = 1 - params.q
    px, py, pz = params.p
    probs[_IX], probs[_IY], probs[_IZ] = params.q * px, params.q * py, params.q * pz
    P = pauli_channel(probs)
    U = conjugation_superop(rotation(params.axis, params.theta))
    return Channel(U @ P.superop)


def _simplex_point(rng: np.random.Generator) -> tuple[float, float, float]:
    u = np.sort(rng.random(2))
    return (float(u[0]), float(u[1] - u[0]), float(1 - u[1]))


def _sphere_point(rng: np.random.Generator) -> tuple[float, float, float]:
    v = rng.normal(size=3)
    v = v / np.linalg.norm(v)
    return (float(v[0]), float(v[1]), float(v[2]))


class InfeasibleTargetError(ValueError):
    pass


def random_channel_targeting(
    F_target: float,
    theta_target: float,
    rng: np.random.Generator,
    max_retries: int = 1000,
) -> tuple[Channel, NoiseModelParams]:
    """Draw ``(p, axis)`` at random and solve the fidelity formula for ``q``.

    Draws whose ``q`` falls outside ``[0, 1]`` are rejected and redrawn.
    """
    c2 = np.cos(theta_target / 2) ** 2
    s2 = np.sin(theta_target / 2) ** 2
    qs = []
    for _ in range(max_retries):
        p = _simplex_point(rng)
        axis = _sphere_point(rng)
        w = float(np.dot(p, np.square(axis)))
        denom = c2 - w * s2
        if abs(denom) < 1e-15:
            continue
        q = (c2 - F_target) / denom
        qs.append(q)
        if 0 <= q <= 1:
            params = NoiseModelParams(q, p, theta_target, axis)
            return combes_channel(params), params
    lo, hi = (min(qs), max(qs)) if qs else (float("nan"), float("nan"))
    raise InfeasibleTargetError(
        f"no draw reached F={F_target} at theta={theta_target} in {max_retries} tries "
        f"(solved q ranged over [{lo:.4g}, {hi:.4g}], need [0, 1])"
    )


# -- resource states and teleportation --------------------------------------------


@dataclass(frozen=True, eq=False)
class ResourceState:
    """A shared state on ``2n`` qubits, sender half first."""

    n: int
    rho: DensityMatrix

    def __post_init__(self):
        rho = self.rho if isinstance(self.rho, DensityMatrix) else DensityMatrix(self.rho)
        if num_qubits(rho.dim) != 2 * self.n:
            raise ValueError(f"resource state must live on {2 * self.n} qubits")
        object.__setattr__(self, "rho", rho)

    def bell_fidelity(self) -> float:
        return self.rho.overlap(max_entangled_vector(self.n))


def bell_basis(n: int) -> np.ndarray:
    """Columns ``(P_a kron I)|Phi_n>`` in canonical Pauli order."""
    phi = max_entangled_vector(n)
    eye = np.eye(2**n)
    return np.stack([np.kron(P, eye) @ phi for P in pauli_basis(n)], axis=1)


def teleportation_channel(resource: ResourceState) -> Channel:
    """The Pauli channel ``phi -> sum_a <Phi^a|rho|Phi^a> P_a phi P_a``."""
    B = bell_basis(resource.n)
    probs = np.real(np.einsum("ia,ij,ja->a", B.conj(), resource.rho.mat, B))
    probs = np.clip(probs, 0.0, None)
    return pauli_channel(probs / probs.sum())


def swap_degraded_resource(k: int, per_swap_noise: float) -> ResourceState:
    """Bell pair after ``k`` noisy SWAPs, each an ideal SWAP then ``D_{1 - noise}`` on both qubits.

    A software emulation of SWAP-chain degradation, not a device model.
    """
    if k < 0:
        raise ValueError(f"k must be >= 0, got {k}")
    if not 0 <= per_swap_noise <= 1:
        raise ValueError(f"per_swap_noise must lie in [0, 1], got {per_swap_noise}")
    swap = np.eye(4, dtype=complex)[[0, 2, 1, 3]]
    step = depolarizing(2, 1 - per_swap_noise).superop @ conjugation_superop(swap)
    rho = max_entangled(1).mat.reshape(-1, order="F")
    for _ in range(k):
        rho = step @ rho
    mat = rho.reshape(4, 4, order="F")
    return ResourceState(1, DensityMatrix((mat + mat.conj().T) / 2))
