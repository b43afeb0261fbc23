import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import H, I2, S, X, Y, Z, random_channel, random_pauli_channel
from qpdwire.channels import Channel, depolarizing, rotation
from qpdwire.pauli import pauli_basis, project_to_pauli
from qpdwire.twirling import (
    UnitaryEnsemble,
    conjugated,
    ensemble_by_label,
    is_pauli_channel,
    pauli_group_ensemble,
    pauli_mixing,
    single_qubit_pauli_mixing,
    single_qubit_two_design,
    trivial_ensemble,
    twirl,
    verify_pauli_mixing,
)

SHIPPED_1Q = [trivial_ensemble(1), single_qubit_pauli_mixing(), single_qubit_two_design(), pauli_group_ensemble(1)]


def twirl_oracle(c, e):
    """Apply the twirl element by element on a density matrix."""
    return lambda rho: sum(p * u.conj().T @ c.apply(u @ rho @ u.conj().T) @ u for p, u in e)


def test_ensemble_validation():
    with pytest.raises(ValueError, match="sum to 1"):
        UnitaryEnsemble(1, (0.5, 0.4), (I2, X))
    with pytest.raises(ValueError, match="not unitary"):
        UnitaryEnsemble(1, (1.0,), (2 * I2,))
    with pytest.raises(ValueError, match="label"):
        UnitaryEnsemble(1, (1.0,), (I2,), "haar")
    with pytest.raises(ValueError, match="shape"):
        UnitaryEnsemble(1, (1.0,), (np.eye(4),))


def test_ensemble_json_roundtrip():
    e = single_qubit_two_design()
    back = UnitaryEnsemble.from_json(e.to_json())
    assert back.label == "two_design" and back.probs == e.probs
    assert all(np.array_equal(a, b) for a, b in zip(back.unitaries, e.unitaries))


def test_ensemble_sizes():
    assert len(single_qubit_two_design()) == 12
    assert len(single_qubit_pauli_mixing()) == 3
    assert set(single_qubit_two_design().probs) == {1 / 12}
    assert set(single_qubit_pauli_mixing().probs) == {1 / 3}
    assert len(pauli_mixing(2)) == 60
    assert len(ensemble_by_label("two_design", 2)) == 960


def test_two_design_element_order():
    e = single_qubit_two_design()
    mix = [I2, H @ S, S @ H]
    for a in range(3):
        for b in range(4):
            np.testing.assert_allclose(e.unitaries[4 * a + b], mix[a] @ pauli_basis(1)[b])


def test_twirl_matches_elementwise_oracle(rng):
    c = random_channel(1, rng)
    e = single_qubit_pauli_mixing()
    oracle = twirl_oracle(c, e)
    tw = twirl(c, e)
    for _ in range(5):
        rho = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        np.testing.assert_allclose(tw.apply(rho), oracle(rho), atol=1e-13)


def test_conjugated_order(rng):
    c = random_channel(1, rng)
    out = conjugated(c, H, S)
    rho = np.diag([1, 0]).astype(complex)
    np.testing.assert_allclose(out.apply(rho), S @ c.apply(H @ rho @ H.conj().T) @ S.conj().T, atol=1e-14)


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        twirl(Channel.identity(2), single_qubit_two_design())


def test_trivial_twirl_is_identity(rng):
    c = random_channel(1, rng)
    assert twirl(c, trivial_ensemble(1)).max_abs_diff(c) == 0


def test_pauli_channel_mixing_twirl_is_depolarizing(rng):
    for _ in range(20):
        c = random_pauli_channel(1, rng)
        out = twirl(c, single_qubit_pauli_mixing())
        assert out.max_abs_diff(depolarizing(1, c.entanglement_fidelity())) < 1e-12


def test_two_design_twirl_random_channel(rng):
    for _ in range(20):
        c = random_channel(1, rng, rank=3)
        F = float(c.chi[0, 0].real)
        assert twirl(c, single_qubit_two_design()).max_abs_diff(depolarizing(1, F)) < 1e-10


def test_two_design_twirl_of_rotation():
    c = Channel.unitary(rotation((0, 0, 1), 0.3))
    out = twirl(c, single_qubit_two_design())
    assert out.max_abs_diff(depolarizing(1, np.cos(0.15) ** 2)) < 1e-12


def test_mixing_twirl_keeps_coherent_part():
    # a rotation is not a Pauli channel, so the three-element ensemble leaves it non-depolarizing
    c = Channel.unitary(rotation((0, 0, 1), 0.3))
    out = twirl(c, single_qubit_pauli_mixing())
    assert out.max_abs_diff(depolarizing(1, np.cos(0.15) ** 2)) > 1e-3


@pytest.mark.parametrize("e", SHIPPED_1Q, ids=lambda e: e.label)
def test_depolarizing_is_fixed_point(e):
    D = depolarizing(1, 0.7)
    assert twirl(D, e).max_abs_diff(D) < 1e-14


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**31), st.sampled_from(range(len(SHIPPED_1Q))))
def test_twirl_preserves_fidelity(seed, k):
    c = random_channel(1, np.random.default_rng(seed), rank=3)
    assert abs(twirl(c, SHIPPED_1Q[k]).entanglement_fidelity() - c.entanglement_fidelity()) < 1e-10


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**31))
def test_twirl_preserves_fidelity_custom_ensemble(seed):
    rng = np.random.default_rng(seed)
    us = [np.linalg.qr(rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))[0] for _ in range(3)]
    w = rng.dirichlet(np.ones(3))
    e = UnitaryEnsemble(1, tuple(w / w.sum()), tuple(us))
    c = random_channel(1, rng)
    assert abs(twirl(c, e).entanglement_fidelity() - c.entanglement_fidelity()) < 1e-10


def test_pauli_group_twirl_gives_pauli_channel(rng):
    for n in (1, 2):
        c = random_channel(n, rng)
        assert not is_pauli_channel(c)
        assert is_pauli_channel(twirl(c, pauli_group_ensemble(n)))


# -- Pauli mixing ------------------------------------------------------------------


def test_conjugating_x_hits_each_pauli_once():
    outs = []
    for u in single_qubit_pauli_mixing().unitaries:
        idx, _ = project_to_pauli(u.conj().T @ X @ u)
        outs.append(idx)
    assert sorted(outs) == [1, 2, 3]
    # matrix oracle: the images are +-X, +-Y, +-Z
    imgs = [u.conj().T @ X @ u for u in single_qubit_pauli_mixing().unitaries]
    for P in (X, Y, Z):
        assert sum(min(np.abs(M - P).max(), np.abs(M + P).max()) < 1e-12 for M in imgs) == 1


def test_verify_pauli_mixing_examples():
    assert verify_pauli_mixing(single_qubit_pauli_mixing())
    assert verify_pauli_mixing(single_qubit_two_design())
    report = verify_pauli_mixing(trivial_ensemble(1))
    assert not report and "P_1 -> P_1" in report.message


def test_verify_pauli_mixing_two_qubits():
    assert verify_pauli_mixing(pauli_mixing(2))
    assert not verify_pauli_mixing(pauli_group_ensemble(2))


def test_two_design_exhaustive_table():
    # 12 x 3 conjugation table: each non-identity Pauli lands on each output 4 times
    table = np.zeros((4, 4), dtype=int)
    for u in single_qubit_two_design().unitaries:
        for a in (1, 2, 3):
            table[a, project_to_pauli(u.conj().T @ pauli_basis(1)[a] @ u)[0]] += 1
    assert np.array_equal(table[1:, 1:], np.full((3, 3), 4))


def test_verify_rejects_non_clifford():
    e = UnitaryEnsemble.uniform([I2, rotation((0, 0, 1), 0.3)])
    report = verify_pauli_mixing(e)
    assert not report and "normalize" in report.message


def test_two_qubit_twirls(rng):
    c = random_pauli_channel(2, rng)
    F = c.entanglement_fidelity()
    assert twirl(c, pauli_mixing(2)).max_abs_diff(depolarizing(2, F)) < 1e-12
    r = random_channel(2, rng)
    out = twirl(r, ensemble_by_label("two_design", 2))
    assert out.max_abs_diff(depolarizing(2, r.entanglement_fidelity())) < 1e-10


def test_unknown_label():
    with pytest.raises(ValueError):
        ensemble_by_label("haar", 1)
    with pytest.raises(ValueError):
        pauli_mixing(3)
