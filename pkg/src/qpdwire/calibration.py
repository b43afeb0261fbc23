"""Entanglement-fidelity calibration from the all-zeros survival probability.

For a depolarizing channel ``D_F`` on ``n`` qubits the probability of
reading ``0...0`` after preparing ``0...0`` is ``P00 = F + (1 - F)/(d + 1)``,
so ``F = ((d + 1)/d) P00 - 1/d`` with ``d = 2**n``. Twirling first makes any
channel depolarizing with the same fidelity.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from .channels import LinearMap
from .twirling import UnitaryEnsemble, twirl


@dataclass(frozen=True)
class CalibrationResult:
    P00_hat: float
    F_hat: float
    shots: int
    stderr: float
    n: int = 1
    ensemble_label: str = "custom"

    CSV_FIELDS = ("F_hat", "stderr", "shots", "ensemble_label")

    def to_json(self) -> str:
        return json.dumps(asdict(self))

    @classmethod
    def from_json(cls, text: str) -> CalibrationResult:
        return cls(**json.loads(text))

    def csv_row(self) -> list:
        return [repr(self.F_hat), repr(self.stderr), self.shots, self.ensemble_label]


def fidelity_from_survival(P00: float, n: int) -> float:
    d = 2**n
    return (d + 1) / d * P00 - 1 / d


def survival_probabilities(c: LinearMap, e: UnitaryEnsemble) -> np.ndarray:
    """``<0|U^dagger C(U |0><0| U^dagger) U|0>`` for each ensemble element."""
    d = c.dim
    S = c.superop
    out = np.empty(len(e))
    for k, (_, u) in enumerate(e):
        col = u[:, 0]  # U|0>
        rho_in = np.outer(col, col.conj()).reshape(-1, order="F")
        rho_out = (S @ rho_in).reshape(d, d, order="F")
        out[k] = np.real(np.vdot(col, rho_out @ col))
    return np.clip(out, 0.0, 1.0)


def calibrate(c: LinearMap, e: UnitaryEnsemble, shots: int, seed: int | np.random.SeedSequence) -> CalibrationResult:
    """Sampled calibration: pick ensemble elements by their weights, then Born-sample zeros.

    The estimate is never clamped; out-of-range values are left for the
    plan builder to reject.
    """
    if shots < 1:
        raise ValueError(f"shots must be >= 1, got {shots}")
    if c.n != e.n:
        raise ValueError(f"channel acts on {c.n} qubits but ensemble on {e.n}")
    rng = np.random.default_rng(seed)
    per_element = rng.multinomial(shots, np.asarray(e.probs))
    surv = survival_probabilities(c, e)
    zeros = int(sum(rng.binomial(m, s) for m, s in zip(per_element, surv)))
    P = zeros / shots
    d = 2**c.n
    stderr = (d + 1) / d * math.sqrt(P * (1 - P) / shots)
    return CalibrationResult(P, fidelity_from_survival(P, c.n), shots, stderr, c.n, e.label)


def calibrate_exact(c: LinearMap, e: UnitaryEnsemble) -> float:
    """Infinite-shot calibration evaluated on the twirled superoperator."""
    tw = twirl(c, e)
    d = c.dim
    zero = np.zeros(d * d, dtype=complex)
    zero[0] = 1
    P00 = float(np.real((tw.superop @ zero)[0]))
    return fidelity_from_survival(P00, c.n)
