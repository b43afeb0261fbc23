"""Unitary ensembles and the channel twirl ``sum_i p_i U_i^dagger C(U_i . U_i^dagger) U_i``."""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .channels import Channel, LinearMap
from .pauli import pauli_basis, project_to_pauli

LABELS = ("two_design", "pauli_mixing", "trivial", "pauli_group", "custom")

_H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
_S = np.array([[1, 0], [0, 1j]], dtype=complex)


@dataclass(frozen=True, eq=False)
class UnitaryEnsemble:
    """Probability-weighted unitaries. Item order fixes the twirl summation order."""

    n: int
    probs: tuple[float, ...]
    unitaries: tuple[np.ndarray, ...]
    label: str = "custom"

    def __post_init__(self):
        if self.label not in LABELS:
            raise ValueError(f"unknown ensemble label {self.label!r}")
        if len(self.probs) != len(self.unitaries) or not self.probs:
            raise ValueError("ensemble needs matching, non-empty probs and unitaries")
        p = np.asarray(self.probs, dtype=float)
        if np.any(p < 0) or abs(p.sum() - 1) > 1e-12:
            raise ValueError(f"ensemble probabilities must be >= 0 and sum to 1 (sum={p.sum()!r})")
        d = 2**self.n
        us = []
        for u in self.unitaries:
            u = np.array(u, dtype=complex)
            if u.shape != (d, d):
                raise ValueError(f"unitary has shape {u.shape}, expected {(d, d)}")
            if np.max(np.abs(u.conj().T @ u - np.eye(d))) > 1e-10:
                raise ValueError("ensemble element is not unitary")
            u.setflags(write=False)
            us.append(u)
        object.__setattr__(self, "probs", tuple(float(x) for x in p))
        object.__setattr__(self, "unitaries", tuple(us))

    def __len__(self):
        return len(self.probs)

    def __iter__(self):
        return iter(zip(self.probs, self.unitaries))

    @classmethod
    def uniform(cls, unitaries, label: str = "custom") -> UnitaryEnsemble:
        us = list(unitaries)
        n = us[0].shape[0].bit_length() - 1
        return cls(n, (1 / len(us),) * len(us), tuple(us), label)

    def to_json(self) -> str:
        items = [
            {"p": p, "data": [[[float(v.real), float(v.imag)] for v in row] for row in u]}
            for p, u in self
        ]
        return json.dumps({"n": self.n, "label": self.label, "items": items})

    @classmethod
    def from_json(cls, text: str) -> UnitaryEnsemble:
        doc = json.loads(text)
        probs = tuple(item["p"] for item in doc["items"])
        us = tuple(np.array([[complex(a, b) for a, b in row] for row in item["data"]]) for item in doc["items"])
        return cls(doc["n"], probs, us, doc["label"])


def conjugated(c: LinearMap, pre: np.ndarray, post: np.ndarray) -> LinearMap:
    """``rho -> post C(pre rho pre^dagger) post^dagger``."""
    S = np.kron(post.conj(), post) @ c.superop @ np.kron(pre.conj(), pre)
    return Channel(S) if isinstance(c, Channel) else LinearMap(S)


def twirl(c: LinearMap, e: UnitaryEnsemble) -> LinearMap:
    if c.n != e.n:
        raise ValueError(f"channel acts on {c.n} qubits but ensemble on {e.n}")
    S = np.zeros_like(c.superop)
    for p, u in e:
        S = S + p * (np.kron(u.T, u.conj().T) @ c.superop @ np.kron(u.conj(), u))
    return Channel(S) if isinstance(c, Channel) else LinearMap(S)


# -- shipped ensembles ------------------------------------------------------


def trivial_ensemble(n: int) -> UnitaryEnsemble:
    return UnitaryEnsemble(n, (1.0,), (np.eye(2**n, dtype=complex),), "trivial")


def _mixing_1q() -> list[np.ndarray]:
    return [np.eye(2, dtype=complex), _H @ _S, _S @ _H]


def single_qubit_pauli_mixing() -> UnitaryEnsemble:
    """``{I, HS, SH}`` with weight 1/3."""
    return UnitaryEnsemble.uniform(_mixing_1q(), "pauli_mixing")


def single_qubit_two_design() -> UnitaryEnsemble:
    """``{AB | A in {I, HS, SH}, B in {I, X, Y, Z}}``; element ``4a + b``."""
    us = [a @ b for a in _mixing_1q() for b in pauli_basis(1)]
    return UnitaryEnsemble.uniform(us, "two_design")


def pauli_group_ensemble(n: int) -> UnitaryEnsemble:
    """Uniform over the ``4**n`` Paulis: the Pauli twirl, which projects onto Pauli channels."""
    return UnitaryEnsemble.uniform(list(pauli_basis(n)), "pauli_group")


def pauli_mixing(n: int) -> UnitaryEnsemble:
    if n == 1:
        return single_qubit_pauli_mixing()
    if n == 2:
        return UnitaryEnsemble.uniform(_two_qubit_mixing_set(), "pauli_mixing")
    raise ValueError(f"Pauli-mixing ensembles are shipped for n <= 2, got {n}")


def two_design(n: int) -> UnitaryEnsemble:
    """Pauli-mixing set times the Pauli group, element ``4**n * a + b``."""
    if n == 1:
        return single_qubit_two_design()
    mixing = pauli_mixing(n).unitaries
    return UnitaryEnsemble.uniform([a @ b for a in mixing for b in pauli_basis(n)], "two_design")


def ensemble_by_label(label: str, n: int) -> UnitaryEnsemble:
    makers = {
        "two_design": two_design,
        "pauli_mixing": pauli_mixing,
        "trivial": trivial_ensemble,
        "pauli_group": pauli_group_ensemble,
    }
    if label not in makers:
        raise ValueError(f"no shipped ensemble named {label!r}")
    return makers[label](n)


# -- two-qubit Clifford search ------------------------------------------------


def _unsigned_image(u: np.ndarray, a: int) -> int:
    P = pauli_basis(2)[a]
    hit = project_to_pauli(u.conj().T @ P @ u)
    if hit is None:
        raise ValueError("unitary does not normalize the Pauli group")
    return hit[0]


def _perm_from_generators(images: tuple[int, ...]) -> tuple[int, ...]:
    # images of the basis vectors 1, 2, 4, 8; conjugation is linear on (x, z)
    perm = [0] * 16
    for a in range(16):
        out = 0
        for bit in range(4):
            if a >> bit & 1:
                out ^= images[bit]
        perm[a] = out
    return tuple(perm)


@lru_cache(maxsize=None)
def _two_qubit_cliffords() -> tuple[tuple[tuple[int, ...], np.ndarray], ...]:
    """One representative unitary per class of Clifford / (Paulis, phases); 720 classes."""
    eye = np.eye(2, dtype=complex)
    cnot = np.eye(4, dtype=complex)[[0, 1, 3, 2]]
    gens = [np.kron(_H, eye), np.kron(eye, _H), np.kron(_S, eye), np.kron(eye, _S), cnot]
    start = np.eye(4, dtype=complex)
    key = _perm_from_generators(tuple(_unsigned_image(start, 1 << b) for b in range(4)))
    found = {key: start}
    frontier = [start]
    while frontier:
        nxt = []
        for u in frontier:
            for g in gens:
                v = g @ u
                k = _perm_from_generators(tuple(_unsigned_image(v, 1 << b) for b in range(4)))
                if k not in found:
                    found[k] = v
                    nxt.append(v)
        frontier = nxt
    return tuple(sorted(found.items()))


def _compose(p: tuple[int, ...], q: tuple[int, ...]) -> tuple[int, ...]:
    return tuple(p[q[i]] for i in range(len(q)))


def _closure(gens, limit: int) -> set | None:
    group = {tuple(range(16))}
    frontier = list(group)
    while frontier:
        nxt = []
        for h in frontier:
            for g in gens:
                k = _compose(g, h)
                if k not in group:
                    group.add(k)
                    if len(group) > limit:
                        return None
                    nxt.append(k)
        frontier = nxt
    return group


def _order(p: tuple[int, ...]) -> int:
    q, k = p, 1
    while q != tuple(range(16)):
        q, k = _compose(p, q), k + 1
    return k


@lru_cache(maxsize=None)
def _two_qubit_mixing_set() -> tuple[np.ndarray, ...]:
    """Smallest shipped n=2 Pauli-mixing set: a 60-element Clifford subgroup.

    Deterministic search: for the first order-5 class (sorted order) try
    companions in sorted order until the closure has exactly 60 elements and
    acts transitively on the 15 non-identity Paulis. Transitivity with uniform
    weights makes every output Pauli equally likely.
    """
    cliffords = _two_qubit_cliffords()
    reps = dict(cliffords)
    perms = [k for k, _ in cliffords]
    for g in (p for p in perms if _order(p) == 5):
        for h in perms:
            group = _closure([g, h], 60)
            if group is None or len(group) != 60:
                continue
            if len({k[1] for k in group}) == 15:  # orbit of P_1
                return tuple(reps[k] for k in sorted(group))
    return tuple(reps[k] for k in perms)  # pragma: no cover - full Clifford quotient


# -- verification ---------------------------------------------------------------


@dataclass(frozen=True)
class MixingReport:
    ok: bool
    message: str
    distribution: dict

    def __bool__(self):
        return self.ok


def verify_pauli_mixing(e: UnitaryEnsemble, atol: float = 1e-12) -> MixingReport:
    """Check that ``pi(U^dagger P U)`` is uniform over non-identity Paulis for each ``P``."""
    n = e.n
    basis = pauli_basis(n)
    target = 1 / (4**n - 1)
    dist: dict[int, dict[int, float]] = {}
    for a in range(1, 4**n):
        counts: dict[int, float] = {}
        for p, u in e:
            hit = project_to_pauli(u.conj().T @ basis[a] @ u)
            if hit is None:
                return MixingReport(False, f"element does not normalize the Pauli group (input P_{a})", dist)
            counts[hit[0]] = counts.get(hit[0], 0.0) + p
        dist[a] = counts
        for b in range(1, 4**n):
            if abs(counts.get(b, 0.0) - target) > atol:
                return MixingReport(
                    False,
                    f"Pr(P_{a} -> P_{b}) = {counts.get(b, 0.0):.6g}, expected {target:.6g}",
                    dist,
                )
    return MixingReport(True, "uniform over all non-identity Paulis", dist)


def is_pauli_channel(c: LinearMap, atol: float = 1e-10) -> bool:
    chi = c.chi
    return bool(np.max(np.abs(chi - np.diag(np.diag(chi)))) < atol)
