import numpy as np

from app.services import validation_service


def test_all_checks_pass():
    results = validation_service.run_checks()
    failed = {k: v["detail"] for k, v in results["checks"].items() if not v["passed"]}
    assert failed == {}
    assert results["passed"] is True
    assert results["seed"] == 0
    expected = set(validation_service.CHECKS) | set(validation_service.SEEDED_CHECKS)
    assert set(results["checks"]) == expected


def test_seeded_checks_are_reproducible():
    check = validation_service.SEEDED_CHECKS["nn_random_no_burst"]
    first = check(np.random.default_rng(11))
    assert first[0] is True
    assert check(np.random.default_rng(11)) == first


def test_unexpected_error_counts_as_failure(monkeypatch):
    def broken():
        raise ValueError("roto")

    monkeypatch.setitem(validation_service.CHECKS, "dicke_g2_n4", broken)
    results = validation_service.run_checks()
    assert results["passed"] is False
    assert results["checks"]["dicke_g2_n4"] == {"passed": False, "detail": "ValueError: roto"}
