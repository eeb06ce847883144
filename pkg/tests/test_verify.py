import json

import pytest

from bcwitt.verify import CRITERIA, parse_suite, run_criterion, run_suite, SuiteOptions


@pytest.mark.parametrize("k", sorted(CRITERIA))
def test_reduced_criteria_pass(k):
    r = run_criterion(k, SuiteOptions(seed=0, reduced=True))
    assert r.passed, r.detail
    assert r.name == CRITERIA[k][0]


def test_parse_suite():
    assert parse_suite("all") == list(range(1, 11))
    assert parse_suite("1,3,5-7") == [1, 3, 5, 6, 7]
    assert parse_suite(" 2 , 2 ") == [2]
    with pytest.raises(ValueError):
        parse_suite("0")
    with pytest.raises(ValueError):
        parse_suite("a-b")


def test_suite_is_deterministic_and_ordered():
    a = run_suite([4, 1], seed=3, jobs=2, reduced=True)
    b = run_suite([1, 4], seed=3, jobs=1, reduced=True)
    assert [r.criterion for r in a] == [1, 4]
    dump = lambda rs: json.dumps([r.to_dict() for r in rs], sort_keys=True, default=str)
    assert dump(a) == dump(b)
    assert "seconds" not in a[0].to_dict()
