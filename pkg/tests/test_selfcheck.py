import pytest

from specden import selfcheck
from specden.oracle import ModelContext


def test_all_identities_pass():
    results = selfcheck.run_checks(seed=0)
    assert len(results) >= 10
    for r in results:
        assert r.passed(1e-9), f"{r.name}: residual {r.residual:.3e}"


def test_exact_identities_hit_machine_precision():
    exact = {"ladder commutators", "q-coefficient symmetries",
             "curvature commutation rule", "norm formulas"}
    for r in selfcheck.run_checks(seed=0):
        if r.name in exact:
            assert r.passed(1e-12)


def test_perturbed_moment_table_is_flagged(monkeypatch):
    # negative control: a corrupted moment table must trip the
    # quadrature cross-check
    orig = ModelContext.radial_moment

    def crooked(self, m, j):
        return orig(self, m, j) * (1.0 + 1e-6)

    monkeypatch.setattr(ModelContext, "radial_moment", crooked)
    results = {r.name: r for r in selfcheck.run_checks(seed=0)}
    assert not results["radial moments vs quadrature"].passed(1e-9)


def test_format_table_marks_failures():
    results = selfcheck.run_checks(seed=0)
    table = selfcheck.format_table(results, 1e-9)
    assert table.count("pass") == len(results)
    strict = selfcheck.format_table(results, 1e-30)
    assert "FAIL" in strict
