"""Invariant checks run by ``qpdwire verify``.

Each check returns a :class:`CheckResult`; inputs that a check compares
against (targets, fixtures) are parameters so a deliberately broken input
can be shown to fail.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .calibration import calibrate_exact
from .channels import Channel, LinearMap, coherent_offdiag_sum, choi_state, depolarizing, pauli_channel, ptm_rank
from .noise import (
    NoiseModelParams,
    ResourceState,
    combes_channel,
    swap_degraded_resource,
    teleportation_channel,
)
from .pauli import PauliOperator, commuting_partition, full_pauli_average, pauli_product, z_average
from .qpd import build_d0, build_plan, estimator_mean, exact_implemented_channel, mp_channel
from .states import haar_pure_state, random_density_matrix
from .twirling import (
    pauli_mixing,
    single_qubit_pauli_mixing,
    single_qubit_two_design,
    trivial_ensemble,
    twirl,
    two_design,
    verify_pauli_mixing,
)


@dataclass(frozen=True)
class CheckResult:
    name: str
    topic: str
    passed: bool
    detail: str


def random_channel(n: int, rng: np.random.Generator, rank: int = 2) -> Channel:
    """Channel from a Haar-like random isometry ``C^d -> C^d kron C^rank``."""
    d = 2**n
    g = rng.normal(size=(d * rank, d)) + 1j * rng.normal(size=(d * rank, d))
    q, _ = np.linalg.qr(g)
    return Channel.from_kraus([q[k * d:(k + 1) * d, :] for k in range(rank)])


def random_pauli_channel(n: int, rng: np.random.Generator) -> Channel:
    return pauli_channel(rng.dirichlet(np.ones(4**n)))


def near_identity_channel(n: int, rng: np.random.Generator, min_weight: float = 0.55) -> Channel:
    """Convex mix ``w I + (1 - w) R`` with ``w >= min_weight``, so ``F > 1/2``."""
    w = rng.uniform(min_weight, 1.0)
    R = random_channel(n, rng)
    return Channel(w * np.eye(4**n) + (1 - w) * R.superop)


def _result(name, topic, err, tol) -> CheckResult:
    return CheckResult(name, topic, bool(err < tol), f"max deviation {err:.2e} (tol {tol:.0e})")


def check_pauli_products(seed: int = 0) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for n in (1, 2, 3):
        for _ in range(200):
            a, b = (int(x) for x in rng.integers(0, 4**n, 2))
            p, q = PauliOperator.from_index(a, n), PauliOperator.from_index(b, n)
            worst = max(worst, float(np.max(np.abs(pauli_product(p, q).matrix() - p.matrix() @ q.matrix()))))
    return _result("pauli_products", "phase-tracked product matches matrices", worst, 1e-12)


def check_commuting_partition() -> CheckResult:
    for n in (1, 2, 3):
        part = commuting_partition(n)
        members = [a for s in part.sets for a in s]
        if sorted(members) != list(range(1, 4**n)):
            return CheckResult("commuting_partition", "disjoint cover", False, f"n={n}: sets do not partition")
        for j, s in enumerate(part.sets):
            ops = part.operators(j)
            if not all(p.commutes_with(q) for p, q in itertools.combinations(ops, 2)):
                return CheckResult("commuting_partition", "pairwise commuting", False, f"n={n} set {j}")
    return CheckResult("commuting_partition", "partition into maximally commuting sets", True, "n=1,2,3")


def check_pauli_averages(seed: int = 0) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for n in (1, 2):
        rho = random_density_matrix(n, rng).mat
        worst = max(worst, float(np.max(np.abs(full_pauli_average(rho) - np.eye(2**n) / 2**n))))
        worst = max(worst, float(np.max(np.abs(z_average(rho) - np.diag(np.diag(rho))))))
    return _result("pauli_averages", "Pauli and Z averages", worst, 1e-12)


def check_depolarizing(seed: int = 0) -> CheckResult:
    worst = 0.0
    for n in (1, 2):
        D0, D1 = depolarizing(n, 0.0), Channel.identity(n)
        for p in (0.0, 0.25, 0.5, 1.0):
            Dp = depolarizing(n, p)
            worst = max(worst, abs(Dp.entanglement_fidelity() - p))
            worst = max(worst, Dp.max_abs_diff(p * D1 + (1 - p) * D0))
    return _result("depolarizing", "D_p = p I + (1-p) D_0 and F(D_p) = p", worst, 1e-12)


def check_chi_roundtrip(seed: int = 0) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(20):
        c = random_channel(1, rng, rank=3)
        back = Channel.from_chi(c.chi)
        worst = max(worst, back.max_abs_diff(c), abs(c.entanglement_fidelity() - c.chi[0, 0].real))
        worst = max(worst, Channel.from_kraus(c.kraus).max_abs_diff(c))
    return _result("chi_roundtrip", "kraus/superop/chi round-trips and F = chi_00", worst, 1e-10)


def check_twirl_preserves_fidelity(seed: int = 0) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for e in (single_qubit_two_design(), single_qubit_pauli_mixing()):
        for _ in range(20):
            c = random_channel(1, rng)
            worst = max(worst, abs(twirl(c, e).entanglement_fidelity() - c.entanglement_fidelity()))
    return _result("twirl_fidelity", "twirling preserves entanglement fidelity", worst, 1e-10)


def check_mixing_depolarizes_pauli(
    seed: int = 0,
    target: Callable[[int, float], LinearMap] = depolarizing,
) -> CheckResult:
    """Pauli-mixing twirl of a Pauli channel equals ``target(n, chi_00)``."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(100):
        c = random_pauli_channel(1, rng)
        tw = twirl(c, single_qubit_pauli_mixing())
        worst = max(worst, tw.max_abs_diff(target(1, float(c.chi[0, 0].real))))
    return _result("mixing_depolarizes_pauli", "Pauli mixing turns Pauli channels depolarizing", worst, 1e-12)


def check_two_design_depolarizes(seed: int = 0) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(100):
        c = random_channel(1, rng)
        worst = max(worst, twirl(c, single_qubit_two_design()).max_abs_diff(depolarizing(1, c.entanglement_fidelity())))
    c2 = random_channel(2, rng)
    worst = max(worst, twirl(c2, two_design(2)).max_abs_diff(depolarizing(2, c2.entanglement_fidelity())))
    return _result("two_design_depolarizes", "two-design twirl of any channel is depolarizing", worst, 1e-10)


def check_pauli_mixing_ensembles() -> CheckResult:
    ok = all(verify_pauli_mixing(e) for e in (single_qubit_pauli_mixing(), single_qubit_two_design(), pauli_mixing(2)))
    ok = ok and not verify_pauli_mixing(trivial_ensemble(1))
    return CheckResult("pauli_mixing_ensembles", "uniform Pauli conjugation outputs", ok, "1q mixing, 1q two-design, 2q mixing")


def check_d0_construction() -> CheckResult:
    worst = 0.0
    detail = []
    ok = True
    for n in (1, 2):
        D0 = build_d0(n)
        worst = max(worst, D0.max_abs_diff(depolarizing(n, 0.0)))
        rank = ptm_rank(D0)
        ok = ok and rank == 4**n and len(commuting_partition(n).diagonalizers) == 2**n + 1
        detail.append(f"n={n}: rank {rank}")
    return CheckResult(
        "d0_from_measure_prepare",
        "rotated measure-and-prepare circuits give D_0",
        ok and worst < 1e-10,
        f"max deviation {worst:.2e}; " + ", ".join(detail),
    )


def check_identity_reconstruction(seed: int = 0) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(100):
        c = near_identity_channel(1, rng)
        F = c.entanglement_fidelity()
        plan = build_plan(c, single_qubit_two_design(), F)
        worst = max(worst, exact_implemented_channel(plan).max_abs_diff(Channel.identity(1)), abs(plan.kappa - (2 / F - 1)))
    return _result("identity_reconstruction", "signed combination equals the identity channel", worst, 1e-10)


def check_estimator_mean(seed: int = 0) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(20):
        c = near_identity_channel(1, rng)
        plan = build_plan(c, single_qubit_two_design(), c.entanglement_fidelity())
        rho = haar_pure_state(1, rng)
        for label in ("X", "Y", "Z"):
            O = PauliOperator.from_label(label).matrix()
            exact = float(np.real(np.trace(O @ exact_implemented_channel(plan).apply(rho))))
            worst = max(worst, abs(estimator_mean(plan, rho, label) - exact))
    return _result("estimator_mean", "estimator mean equals tr[O I~(rho)]", worst, 1e-12)


def check_calibration() -> CheckResult:
    worst = 0.0
    from .twirling import trivial_ensemble

    for n in (1, 2):
        for p in (0.0, 0.3, 1.0):
            worst = max(worst, abs(calibrate_exact(depolarizing(n, p), trivial_ensemble(n)) - p))
    params = NoiseModelParams(0.2, (0.2, 0.3, 0.5), 0.15, (0.0, 0.6, 0.8))
    c = combes_channel(params)
    worst = max(worst, abs(calibrate_exact(c, single_qubit_two_design()) - c.entanglement_fidelity()))
    return _result("calibration", "survival probability maps to fidelity", worst, 1e-12)


def check_combes_fidelity(seed: int = 0) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(200):
        u = np.sort(rng.random(2))
        axis = rng.normal(size=3)
        params = NoiseModelParams(rng.random(), (u[0], u[1] - u[0], 1 - u[1]), rng.uniform(0, np.pi), axis / np.linalg.norm(axis))
        worst = max(worst, abs(combes_channel(params).entanglement_fidelity() - params.fidelity()))
    return _result("noise_model_fidelity", "closed-form fidelity of Pauli-then-rotation noise", worst, 1e-10)


def check_teleportation_chain(seed: int = 0) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(100):
        c = random_channel(1, rng)
        T = teleportation_channel(ResourceState(1, choi_state(c)))
        worst = max(worst, abs(T.entanglement_fidelity() - c.entanglement_fidelity()), coherent_offdiag_sum(T))
    return _result("teleportation_chain", "Choi-state teleportation keeps F and is Pauli", worst, 1e-10)


def check_swap_degradation() -> CheckResult:
    fs = [swap_degraded_resource(k, 0.02).bell_fidelity() for k in range(0, 81, 4)]
    ok = all(b <= a + 1e-12 for a, b in zip(fs, fs[1:])) and fs[0] > 1 - 1e-12 and fs[-1] > 0.25
    return CheckResult("swap_degradation", "Bell fidelity non-increasing under noisy SWAPs", ok, f"F: {fs[0]:.3f} -> {fs[-1]:.3f}")


def check_mp_channel() -> CheckResult:
    from .states import DensityMatrix

    worst = 0.0
    for n in (1, 2):
        M = mp_channel(n)
        d = 2**n
        for k in range(d):
            expect = (np.eye(d) - np.diag(np.eye(d)[k])) / (d - 1)
            worst = max(worst, float(np.max(np.abs(M.apply(DensityMatrix.basis(k, n)) - expect))))
    return _result("measure_prepare", "basis state maps to mixture of the others", worst, 1e-12)


ALL_CHECKS = (
    check_pauli_products,
    check_commuting_partition,
    check_pauli_averages,
    check_depolarizing,
    check_chi_roundtrip,
    check_twirl_preserves_fidelity,
    check_pauli_mixing_ensembles,
    check_mixing_depolarizes_pauli,
    check_two_design_depolarizes,
    check_mp_channel,
    check_d0_construction,
    check_identity_reconstruction,
    check_estimator_mean,
    check_calibration,
    check_combes_fidelity,
    check_teleportation_chain,
    check_swap_degradation,
)


def run_all(seed: int = 0) -> list[CheckResult]:
    out = []
    for check in ALL_CHECKS:
        try:
            out.append(check(seed) if "seed" in check.__code__.co_varnames else check())
        except Exception as exc:  # a crashing check is a failed check
            out.append(CheckResult(check.__name__.removeprefix("check_"), "raised", False, repr(exc)))
    return out


def format_table(results: list[CheckResult]) -> str:
    width = max(len(r.name) for r in results)
    lines = [f"{'check':<{width}}  status  detail"]
    for r in results:
        lines.append(f"{r.name:<{width}}  {'PASS' if r.passed else 'FAIL':<6}  {r.topic}: {r.detail}")
    return "\n".join(lines)
