import pytest

from qpdwire import checks
from qpdwire.channels import depolarizing


def test_all_checks_pass():
    results = checks.run_all(seed=0)
    assert len(results) == len(checks.ALL_CHECKS)
    failed = [r for r in results if not r.passed]
    assert not failed, checks.format_table(failed)


def test_perturbed_fidelity_fails_mixing_check():
    ok = checks.check_mixing_depolarizes_pauli()
    broken = checks.check_mixing_depolarizes_pauli(target=lambda n, F: depolarizing(n, F - 1e-6))
    assert ok.passed and not broken.passed


def test_two_qubit_d0_check():
    assert checks.check_d0_construction().passed


def test_crashing_check_is_reported(monkeypatch):
    def boom():
        raise RuntimeError("fixture missing")

    monkeypatch.setattr(checks, "ALL_CHECKS", (boom,))
    (result,) = checks.run_all()
    assert not result.passed and "fixture missing" in result.detail


@pytest.mark.parametrize("seed", [1, 2])
def test_checks_pass_for_other_seeds(seed):
    assert all(r.passed for r in checks.run_all(seed))


def test_table_lists_every_check():
    table = checks.format_table(checks.run_all())
    assert table.count("PASS") == len(checks.ALL_CHECKS)
