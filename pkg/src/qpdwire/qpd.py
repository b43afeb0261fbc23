"""Quasiprobability decomposition of the identity channel.

The identity is written as ``c1 * E(C) + c2 * D_0`` where ``E(C)`` is an
ensemble twirl of the physical channel and ``D_0`` is realised by
``2**n + 1`` rotated measure-and-prepare circuits. With ``c1 = 1/F`` and
``c2 = 1 - 1/F`` the overhead is ``kappa = 2/F - 1``.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

from .channels import Channel, LinearMap, vec
from .pauli import CommutingPartition, PauliOperator, commuting_partition
from .states import DensityMatrix
from .twirling import UnitaryEnsemble, twirl


# -- measure-and-prepare --------------------------------------------------------


@dataclass(frozen=True, eq=False)
class MeasurePrepareChannel:
    """Measure in the computational basis, then prepare a uniform mixture of the other basis states."""

    n: int

    @cached_property
    def channel(self) -> Channel:
        d = 2**self.n
        w = 1 / np.sqrt(d - 1)
        kraus = []
        for k in range(d):
            for l in range(d):
                if l != k:
                    K = np.zeros((d, d), dtype=complex)
                    K[l, k] = w
                    kraus.append(K)
        return Channel.from_kraus(kraus)

    def apply(self, rho) -> np.ndarray:
        return self.channel.apply(rho)


def mp_channel(n: int) -> MeasurePrepareChannel:
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return MeasurePrepareChannel(n)


def d0_ensemble(partition: CommutingPartition) -> UnitaryEnsemble:
    """Uniform ensemble over ``V_j^dagger``; twirling ``M`` with it yields ``D_0``."""
    vs = [v.conj().T for v in partition.diagonalizers]
    return UnitaryEnsemble.uniform(vs, "custom")


def build_d0(n: int, partition: CommutingPartition | None = None) -> Channel:
    partition = commuting_partition(n) if partition is None else partition
    if partition.n != n:
        raise ValueError(f"partition is for n={partition.n}, expected {n}")
    return twirl(mp_channel(n).channel, d0_ensemble(partition))


# -- plan -----------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Variant:
    """One executable circuit: ``post C(pre rho pre^dagger) post^dagger``."""

    variant_id: int
    kind: str  # "channel" or "mp"
    sign: int
    prob: float
    pre: np.ndarray
    post: np.ndarray
    physical: LinearMap

    @cached_property
    def superop(self) -> np.ndarray:
        S = np.kron(self.post.conj(), self.post) @ self.physical.superop @ np.kron(self.pre.conj(), self.pre)
        S.setflags(write=False)
        return S

    def output(self, rho) -> np.ndarray:
        mat = rho.mat if isinstance(rho, DensityMatrix) else np.asarray(rho)
        return (self.superop @ vec(mat)).reshape(mat.shape, order="F")


@dataclass(frozen=True, eq=False)
class QpdPlan:
    n: int
    channel: Channel
    ensemble: UnitaryEnsemble
    F: float
    c1: float
    c2: float
    partition: CommutingPartition = field(repr=False)

    @property
    def kappa(self) -> float:
        return abs(self.c1) + abs(self.c2)

    @property
    def q1(self) -> float:
        return abs(self.c1) / self.kappa

    @property
    def q2(self) -> float:
        return abs(self.c2) / self.kappa

    @cached_property
    def variants(self) -> tuple[Variant, ...]:
        s1 = 1 if self.c1 >= 0 else -1
        s2 = 1 if self.c2 > 0 else -1
        out = []
        for i, (p, u) in enumerate(self.ensemble):
            out.append(Variant(i, "channel", s1, self.q1 * p, u, u.conj().T, self.channel))
        m = mp_channel(self.n).channel
        k = len(self.partition.diagonalizers)
        for j, v in enumerate(self.partition.diagonalizers):
            out.append(Variant(len(self.ensemble) + j, "mp", s2, self.q2 / k, v.conj().T, v, m))
        return tuple(out)

    @property
    def channel_variants(self) -> tuple[Variant, ...]:
        return tuple(v for v in self.variants if v.kind == "channel")

    @property
    def mp_variants(self) -> tuple[Variant, ...]:
        return tuple(v for v in self.variants if v.kind == "mp")

    @property
    def probabilities(self) -> np.ndarray:
        return np.array([v.prob for v in self.variants])

    @property
    def signs(self) -> np.ndarray:
        return np.array([v.sign for v in self.variants])

    def with_coefficient(self, c: float) -> QpdPlan:
        """Same circuits with ``c1 = c``, ``c2 = 1 - c``; no fidelity range check."""
        return QpdPlan(self.n, self.channel, self.ensemble, self.F, float(c), 1.0 - float(c), self.partition)

    def observable_weights(self, observable: np.ndarray) -> np.ndarray:
        """Rows ``w_i`` with ``tr[O sigma_i] = w_i . vec(rho)`` for each variant."""
        o_row = vec(np.asarray(observable).T)
        return np.array([o_row @ v.superop for v in self.variants])

    def to_json(self) -> str:
        return json.dumps(
            {
                "n": self.n,
                "F": self.F,
                "c1": self.c1,
                "c2": self.c2,
                "channel": json.loads(self.channel.to_json()),
                "ensemble": json.loads(self.ensemble.to_json()),
            }
        )

    @classmethod
    def from_json(cls, text: str) -> QpdPlan:
        doc = json.loads(text)
        ch = Channel.from_json(json.dumps(doc["channel"]))
        ens = UnitaryEnsemble.from_json(json.dumps(doc["ensemble"]))
        return cls(doc["n"], ch, ens, doc["F"], doc["c1"], doc["c2"], commuting_partition(doc["n"]))


def check_fidelity(F: float, n: int) -> None:
    if F > 1:
        raise ValueError(f"fidelity {F} exceeds 1")
    if F <= 2.0**-n:
        raise ValueError(
            f"fidelity {F} <= 2^-{n}: no advantage over a classical wire cut in this regime"
        )


def build_plan(c: Channel, e: UnitaryEnsemble, F: float, partition: CommutingPartition | None = None) -> QpdPlan:
    if c.n != e.n:
        raise ValueError(f"channel acts on {c.n} qubits but ensemble on {e.n}")
    check_fidelity(F, c.n)
    partition = commuting_partition(c.n) if partition is None else partition
    return QpdPlan(c.n, c, e, float(F), 1 / F, -(1 / F - 1), partition)


def exact_implemented_channel(plan: QpdPlan) -> LinearMap:
    """``sum_i p_i kappa s_i C_i``, the map the sampler targets (not necessarily CPTP)."""
    S = np.zeros((4**plan.n, 4**plan.n), dtype=complex)
    for v in plan.variants:
        S = S + (plan.kappa * v.sign * v.prob) * v.superop
    return LinearMap(S)


# -- estimator ----------------------------------------------------------------


@dataclass(frozen=True)
class ShotRecord:
    variant_id: int
    sign: int
    outcome: int
    stream_id: int


SHOT_FIELDS = ("variant_id", "sign", "outcome", "stream_id")


def write_shot_records(path, records) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SHOT_FIELDS)
        for r in records:
            w.writerow([r.variant_id, r.sign, r.outcome, r.stream_id])


def read_shot_records(path) -> list[ShotRecord]:
    with open(path, newline="") as fh:
        return [ShotRecord(*(int(row[k]) for k in SHOT_FIELDS)) for row in csv.DictReader(fh)]


@dataclass(frozen=True)
class Estimate:
    estimate: float
    shots_used: int
    per_variant_counts: tuple[int, ...]
    records: tuple[ShotRecord, ...] | None = None


def allocate(probs: np.ndarray, N: int) -> np.ndarray:
    """Deterministic ``floor(p_i N)``; leftover shots are dropped."""
    # the small slack keeps p*N that is an integer up to rounding from losing a shot
    return np.floor(np.asarray(probs) * N + 1e-9).astype(np.int64)


def variant_rng(seed: int, variant_id: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(variant_id,)))


def _observable_matrix(observable) -> np.ndarray:
    if isinstance(observable, PauliOperator):
        if not observable.is_hermitian:
            raise ValueError(f"observable {observable.label} is not Hermitian")
        return observable.matrix()
    if isinstance(observable, str):
        return _observable_matrix(PauliOperator.from_label(observable))
    return np.asarray(observable, dtype=complex)


def variant_expectations(plan: QpdPlan, rho, observable) -> np.ndarray:
    """``tr[O sigma_i]`` for every variant output ``sigma_i``."""
    mat = rho.mat if isinstance(rho, DensityMatrix) else np.asarray(rho)
    W = plan.observable_weights(_observable_matrix(observable))
    return np.clip(np.real(W @ vec(mat)), -1.0, 1.0)


def estimate_expectation(
    plan: QpdPlan,
    rho,
    observable,
    N: int,
    seed: int,
    keep_records: bool = False,
) -> Estimate:
    """Monte Carlo estimate of ``tr[O I~(rho)]`` with ``floor(p_i N)`` shots per variant.

    Each shot is a Born-sampled +-1 eigenvalue of the Pauli observable on the
    variant output, scaled by ``kappa * sign``. Variant ``i`` draws from its
    own stream ``SeedSequence(seed, spawn_key=(i,))``.
    """
    if N <= 0:
        raise ValueError(f"shot count must be positive, got {N}")
    counts = allocate(plan.probabilities, N)
    ev = variant_expectations(plan, rho, observable)
    total = 0
    records = [] if keep_records else None
    for v, n_i, e in zip(plan.variants, counts, ev):
        if n_i == 0:
            continue
        rng = variant_rng(seed, v.variant_id)
        outcomes = np.where(rng.random(n_i) < (1 + e) / 2, 1, -1)
        total += v.sign * int(outcomes.sum())
        if records is not None:
            records.extend(ShotRecord(v.variant_id, v.sign, int(o), v.variant_id) for o in outcomes)
    used = int(counts.sum())
    est = plan.kappa * total / used if used else float("nan")
    return Estimate(est, used, tuple(int(c) for c in counts), None if records is None else tuple(records))


def estimate_from_records(kappa: float, records) -> float:
    records = list(records)
    return kappa * sum(r.sign * r.outcome for r in records) / len(records)


def estimator_mean(plan: QpdPlan, rho, observable) -> float:
    """Exact mean when each shot picks variant ``i`` with probability ``p_i``."""
    ev = variant_expectations(plan, rho, observable)
    return float(plan.kappa * np.sum(plan.probabilities * plan.signs * ev))


def allocated_mean(plan: QpdPlan, rho, observable, N: int) -> float:
    """Exact mean of :func:`estimate_expectation` under ``floor(p_i N)`` allocation."""
    counts = allocate(plan.probabilities, N)
    ev = variant_expectations(plan, rho, observable)
    return float(plan.kappa * np.sum(counts * plan.signs * ev) / counts.sum())


def hoeffding_shots(kappa: float, eps: float, delta: float) -> int:
    """Smallest ``N >= 2 (kappa/eps)**2 ln(2/delta)``, at least 1."""
    if not eps > 0:
        raise ValueError("eps must be positive")
    if not 0 < delta <= 1:
        raise ValueError("delta must lie in (0, 1]")
    if kappa < 1:
        raise ValueError("kappa must be >= 1")
    return max(1, math.ceil(2 * (kappa / eps) ** 2 * math.log(2 / delta)))


def bias_bound(opnorm_O: float, F_true: float, F_est: float, dnorm_Dp_err: float, dnorm_D0_err: float, n: int = 1) -> float:
    """Upper bound on ``|tr[O I~(rho)] - tr[O rho]|`` from twirl, D_0 and calibration errors."""
    if min(opnorm_O, F_true, dnorm_Dp_err, dnorm_D0_err) < 0:
        raise ValueError("bias_bound inputs must be nonnegative")
    if F_est <= 2.0**-n:
        raise ValueError(f"estimated fidelity {F_est} must exceed 2^-{n}")
    return opnorm_O * (dnorm_Dp_err / F_est + (1 / F_est - 1) * dnorm_D0_err + 2 * abs(F_true / F_est - 1))


def save_plan(plan: QpdPlan, path) -> None:
    Path(path).write_text(plan.to_json())
