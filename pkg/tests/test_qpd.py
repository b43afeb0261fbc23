import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import X, Z, random_channel
from qpdwire.channels import Channel, coherent_offdiag_sum, depolarizing, ptm_rank, rotation
from qpdwire.pauli import commuting_partition
from qpdwire.qpd import (
    QpdPlan,
    allocate,
    allocated_mean,
    bias_bound,
    build_d0,
    build_plan,
    estimate_expectation,
    estimate_from_records,
    estimator_mean,
    exact_implemented_channel,
    hoeffding_shots,
    mp_channel,
    read_shot_records,
    save_plan,
    variant_expectations,
    write_shot_records,
)
from qpdwire.states import DensityMatrix, haar_pure_state, random_density_matrix, trace_distance
from qpdwire.twirling import pauli_mixing, single_qubit_pauli_mixing, single_qubit_two_design, trivial_ensemble, twirl

ZERO = np.diag([1, 0]).astype(complex)
PLUS = np.full((2, 2), 0.5, dtype=complex)


def depolarizing_plan(F, n=1):
    return build_plan(depolarizing(n, F), trivial_ensemble(n), F)


# -- measure and prepare --------------------------------------------------------


def test_mp_channel_examples():
    M = mp_channel(1).channel
    np.testing.assert_allclose(M.apply(ZERO), np.diag([0, 1]), atol=1e-15)
    np.testing.assert_allclose(M.apply(PLUS), np.eye(2) / 2, atol=1e-15)
    M2 = mp_channel(2).channel
    out = M2.apply(np.diag([1, 0, 0, 0]).astype(complex))
    np.testing.assert_allclose(out, np.diag([0, 1, 1, 1]) / 3, atol=1e-15)
    with pytest.raises(ValueError):
        mp_channel(0)


def test_mp_channel_matches_direct_sum(rng):
    # M(rho) = sum_k <k|rho|k> rho_k with rho_k uniform over the other basis states
    for n in (1, 2):
        d = 2**n
        rho = random_density_matrix(n, rng).mat
        oracle = sum(rho[k, k] * (np.eye(d) - np.diag(np.eye(d)[k])) / (d - 1) for k in range(d))
        np.testing.assert_allclose(mp_channel(n).apply(rho), oracle, atol=1e-14)


@pytest.mark.parametrize("n", [1, 2])
def test_build_d0_is_fully_depolarizing(n):
    D0 = build_d0(n)
    assert D0.max_abs_diff(depolarizing(n, 0.0)) < 1e-10
    assert ptm_rank(D0) == 4**n
    assert len(commuting_partition(n).diagonalizers) == 2**n + 1


def test_build_d0_rejects_wrong_partition():
    with pytest.raises(ValueError):
        build_d0(2, commuting_partition(1))


# -- plan --------------------------------------------------------------------------


@pytest.mark.parametrize(
    "F, kappa",
    [(1.0, 1.0), (0.5 + 1e-12, 3.0), (0.91, 1.1978021978), (0.7, 2 / 0.7 - 1)],
)
def test_plan_coefficients(F, kappa):
    plan = depolarizing_plan(F)
    assert abs(plan.kappa - kappa) < 1e-9
    assert abs(plan.c1 + plan.c2 - 1) < 1e-15
    assert abs(plan.q1 + plan.q2 - 1) < 1e-15
    assert abs(plan.probabilities.sum() - 1) < 1e-12


def test_classical_wire_cut_bound():
    for n in (1, 2):
        assert abs(2 / (2.0**-n) - 1 - (2 ** (n + 1) - 1)) == 0


def test_plan_at_unit_fidelity_has_no_mp_weight():
    plan = depolarizing_plan(1.0)
    assert plan.c2 == 0 and plan.q2 == 0
    counts = estimate_expectation(plan, ZERO, "Z", 1000, seed=1).per_variant_counts
    assert counts[0] == 1000 and sum(counts[1:]) == 0


def test_plan_fidelity_range():
    with pytest.raises(ValueError, match="no advantage"):
        depolarizing_plan(0.5)
    with pytest.raises(ValueError, match="no advantage"):
        build_plan(depolarizing(2, 0.2), trivial_ensemble(2), 0.25)
    with pytest.raises(ValueError, match="exceeds"):
        build_plan(depolarizing(1, 0.9), trivial_ensemble(1), 1.01)
    with pytest.raises(ValueError):
        build_plan(depolarizing(2, 0.9), trivial_ensemble(1), 0.9)


def test_plan_structure():
    c = depolarizing(1, 0.8)
    plan = build_plan(c, single_qubit_two_design(), 0.8)
    assert len(plan.channel_variants) == 12 and len(plan.mp_variants) == 3
    assert [v.variant_id for v in plan.variants] == list(range(15))
    assert all(v.sign == 1 for v in plan.channel_variants)
    assert all(v.sign == -1 for v in plan.mp_variants)
    for v in plan.mp_variants:
        assert abs(v.prob - plan.q2 / 3) < 1e-15


def test_plan_json_roundtrip(tmp_path, rng):
    plan = build_plan(random_channel(1, rng), single_qubit_pauli_mixing(), 0.8)
    save_plan(plan, tmp_path / "plan.json")
    back = QpdPlan.from_json((tmp_path / "plan.json").read_text())
    assert back.F == plan.F and back.c1 == plan.c1 and back.c2 == plan.c2
    assert np.array_equal(back.channel.chi, plan.channel.chi)
    np.testing.assert_array_equal(back.probabilities, plan.probabilities)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**31))
def test_identity_reconstruction_two_design(seed):
    c = random_channel(1, np.random.default_rng(seed))
    F = c.entanglement_fidelity()
    if F <= 0.5:
        return
    plan = build_plan(c, single_qubit_two_design(), F)
    assert exact_implemented_channel(plan).max_abs_diff(Channel.identity(1)) < 1e-10
    assert abs(plan.kappa - (2 / F - 1)) < 1e-12


def test_identity_reconstruction_two_qubits(rng):
    from qpdwire.checks import random_pauli_channel

    c = random_pauli_channel(2, rng)
    F = c.entanglement_fidelity()
    tw = twirl(c, pauli_mixing(2))
    S = (1 / F) * tw.superop - (1 / F - 1) * build_d0(2).superop
    assert np.abs(S - np.eye(16)).max() < 1e-10


def test_coherent_error_bias_bounded_by_offdiag_sum(rng):
    c = Channel.unitary(rotation((0, 0, 1), 0.6)).compose(depolarizing(1, 0.85))
    F = c.entanglement_fidelity()
    plan = build_plan(c, single_qubit_pauli_mixing(), F)
    implemented = exact_implemented_channel(plan)
    assert implemented.max_abs_diff(Channel.identity(1)) > 1e-3
    bound = coherent_offdiag_sum(c) / F
    worst = max(
        trace_distance(implemented.apply(psi.mat), psi.mat) for psi in (haar_pure_state(1, rng) for _ in range(200))
    )
    assert 0 < worst <= bound + 1e-12


def test_calibration_mismatch_bias():
    F, F_est = 0.9, 0.8
    plan = build_plan(depolarizing(1, F), trivial_ensemble(1), F_est)
    implemented = exact_implemented_channel(plan)
    # closed form: I~ - I = (F/F_est - 1)(I - D_0)
    expected = (F / F_est - 1) * (np.eye(4) - depolarizing(1, 0.0).superop)
    assert np.abs(implemented.superop - np.eye(4) - expected).max() < 1e-12
    bias = abs(np.trace(Z @ implemented.apply(ZERO)) - 1)
    assert abs(bias - 0.125 * 4 / 3) < 1e-12
    assert bias <= bias_bound(1.0, F, F_est, 0.0, 0.0)


# -- estimator --------------------------------------------------------------------------


def test_allocation_floor():
    np.testing.assert_array_equal(allocate(np.array([0.5, 0.3, 0.2]), 10), [5, 3, 2])
    np.testing.assert_array_equal(allocate(np.array([1 / 3] * 3), 10), [3, 3, 3])
    plan = build_plan(depolarizing(1, 0.7), single_qubit_two_design(), 0.7)
    est = estimate_expectation(plan, ZERO, "Z", 1000, seed=0)
    assert est.shots_used == sum(est.per_variant_counts) <= 1000


def test_estimator_rejects_nonpositive_shots():
    with pytest.raises(ValueError):
        estimate_expectation(depolarizing_plan(0.8), ZERO, "Z", 0, seed=0)


def test_estimator_rejects_non_hermitian_observable():
    with pytest.raises(ValueError):
        estimate_expectation(depolarizing_plan(0.8), ZERO, "iZ", 100, seed=0)


def test_estimator_is_deterministic():
    plan = build_plan(depolarizing(1, 0.7), single_qubit_two_design(), 0.7)
    a = estimate_expectation(plan, PLUS, "X", 5000, seed=42)
    b = estimate_expectation(plan, PLUS, "X", 5000, seed=42)
    c = estimate_expectation(plan, PLUS, "X", 5000, seed=43)
    assert a.estimate == b.estimate and a.estimate != c.estimate


def test_unit_fidelity_transfers_expectation(rng):
    rho = random_density_matrix(1, rng)
    plan = build_plan(Channel.identity(1), trivial_ensemble(1), 1.0)
    est = estimate_expectation(plan, rho, "Z", 400_000, seed=3)
    truth = rho.expectation(Z)
    assert abs(est.estimate - truth) < 5 * math.sqrt(1 / 400_000)


def test_mean_matches_implemented_channel(rng):
    for _ in range(20):
        c = random_channel(1, rng)
        F = max(c.entanglement_fidelity(), 0.6)
        plan = build_plan(c, single_qubit_pauli_mixing(), F)
        rho = random_density_matrix(1, rng)
        for O in (X, Z):
            truth = np.real(np.trace(O @ exact_implemented_channel(plan).apply(rho.mat)))
            assert abs(estimator_mean(plan, rho, O) - truth) < 1e-12


def test_exhaustive_outcome_enumeration():
    # 15 variants with one shot each: enumerate all 2^15 outcome strings
    plan = build_plan(depolarizing(1, 0.7), single_qubit_two_design(), 0.7)
    N = 16
    counts = allocate(plan.probabilities, N)
    assert list(counts) == [1] * 15
    ev = variant_expectations(plan, ZERO, Z)
    p_plus = (1 + ev) / 2
    outcomes = np.array(list(itertools.product((1, -1), repeat=15)))
    probs = np.prod(np.where(outcomes == 1, p_plus, 1 - p_plus), axis=1)
    values = plan.kappa * (outcomes * plan.signs).sum(axis=1) / 15
    mean = float(probs @ values)
    assert abs(mean - allocated_mean(plan, ZERO, Z, N)) < 1e-12


def test_iid_variant_choice_enumeration():
    # one shot: variant i with probability p_i, then a Born outcome; the mean is exactly tr[Z rho]
    plan = build_plan(depolarizing(1, 0.7), single_qubit_two_design(), 0.7)
    ev = variant_expectations(plan, ZERO, Z)
    mean = 0.0
    for p_i, s_i, e in zip(plan.probabilities, plan.signs, ev):
        for m in (1, -1):
            mean += p_i * (1 + m * e) / 2 * plan.kappa * s_i * m
    assert abs(mean - 1) < 1e-12
    assert abs(mean - estimator_mean(plan, ZERO, Z)) < 1e-12


def test_shot_records_roundtrip(tmp_path):
    plan = build_plan(depolarizing(1, 0.75), single_qubit_two_design(), 0.75)
    est = estimate_expectation(plan, ZERO, "Z", 300, seed=9, keep_records=True)
    assert len(est.records) == est.shots_used
    assert all(r.sign == plan.variants[r.variant_id].sign for r in est.records)
    path = tmp_path / "shots.csv"
    write_shot_records(path, est.records)
    back = read_shot_records(path)
    assert tuple(back) == est.records
    assert abs(estimate_from_records(plan.kappa, back) - est.estimate) < 1e-12
    assert path.read_text().splitlines()[0] == "variant_id,sign,outcome,stream_id"


def test_rms_scales_with_kappa():
    rms = {}
    for F in (0.55, 0.9):
        plan = depolarizing_plan(F)
        errs = [estimate_expectation(plan, PLUS, "Z", 10_000, seed=s).estimate for s in range(300)]
        rms[F] = math.sqrt(np.mean(np.square(errs)))
    ratio = rms[0.55] / rms[0.9]
    assert abs(ratio / ((2 / 0.55 - 1) / (2 / 0.9 - 1)) - 1) < 0.2


# -- bounds --------------------------------------------------------------------------


def test_hoeffding_examples():
    assert hoeffding_shots(1, 0.1, 0.05) == 738
    assert hoeffding_shots(3, 0.1, 0.05) == math.ceil(1800 * math.log(40)) == 6640
    assert hoeffding_shots(1, 1e9, 0.05) == 1
    for args in ((1, 0, 0.05), (1, 0.1, 0), (1, 0.1, 1.5), (0.5, 0.1, 0.05)):
        with pytest.raises(ValueError):
            hoeffding_shots(*args)


@settings(max_examples=100)
@given(st.floats(1, 10), st.floats(1e-3, 1), st.floats(1e-6, 1))
def test_hoeffding_is_smallest(kappa, eps, delta):
    N = hoeffding_shots(kappa, eps, delta)
    need = 2 * (kappa / eps) ** 2 * math.log(2 / delta)
    assert N >= need and (N - 1 < need or N == 1)


def test_bias_bound_examples():
    assert bias_bound(1, 0.9, 0.9, 0, 0) == 0
    assert abs(bias_bound(1, 0.9, 0.9, 0.1, 0) - 0.1 / 0.9) < 1e-12
    assert abs(bias_bound(1, 0.9, 0.8, 0, 0) - 0.25) < 1e-12
    with pytest.raises(ValueError):
        bias_bound(1, 0.9, 0.5, 0, 0)
    with pytest.raises(ValueError):
        bias_bound(-1, 0.9, 0.8, 0, 0)


def test_density_input_types():
    plan = depolarizing_plan(0.8)
    a = estimate_expectation(plan, DensityMatrix(ZERO), "Z", 100, seed=1)
    b = estimate_expectation(plan, ZERO, Z, 100, seed=1)
    assert a.estimate == b.estimate
