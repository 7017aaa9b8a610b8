import pytest

from ttmax.verify import SUITES, CheckResult, check_join, check_pair_count, run_suites


def test_check_result_bookkeeping():
    res = CheckResult("demo")
    assert not res.passed  # no cases run
    res.record(True, 1e-15)
    res.record(False, 0.5, "bad case")
    assert res.cases == 2 and res.failures == 1
    assert res.max_error == 0.5 and res.examples == ["bad case"]
    assert res.line().startswith("FAIL demo: 2 cases, 1 failures")


def test_small_suites_pass():
    for res in (check_join(n=2, max_extent=2), check_pair_count(max_size=2)):
        assert res.passed, res.examples
        assert res.seconds >= 0


def test_unknown_suite():
    with pytest.raises(ValueError):
        run_suites(["nope"])


@pytest.mark.slow
def test_all_suites_pass():
    results = run_suites()
    assert [r.name for r in results] == list(SUITES)
    for res in results:
        assert res.passed, res.line()


def test_seeded_suites_reproducible():
    a = run_suites(["quadratic-form", "trace-identities"], seed=3)
    b = run_suites(["quadratic-form", "trace-identities"], seed=3)
    assert [(r.cases, r.max_error) for r in a] == [(r.cases, r.max_error) for r in b]
