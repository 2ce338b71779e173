import itertools

import pytest

from pnspace.errors import HypothesisViolated
from pnspace.verify import admissible_theorem_3_1, admissible_theorem_3_2


def test_admissible_theorem_3_1_worked_cases():
    d = admissible_theorem_3_1(1, 1, 2)
    assert d.case == "iii" and d.threshold == pytest.approx(4 / 3, rel=1e-15)
    assert d.admits(4 / 3) and not d.admits(1.2)
    d = admissible_theorem_3_1(1, 2, 2)
    assert (d.case, d.relation, d.threshold) == ("i", ">", 2.0)
    assert not d.admits(2.0) and d.admits(2.0001)
    d = admissible_theorem_3_1(1, 3, 2)
    assert (d.case, d.relation, d.threshold) == ("ii", ">=", 3.0) and d.admits(3.0)


def test_admissible_theorem_3_2_worked_cases():
    d = admissible_theorem_3_2(1, 2, 3)
    assert (d.case, d.relation, d.threshold) == ("i", "<", 4.0)
    assert d.admits(1.0) and not d.admits(4.0) and not d.admits(0.9)
    d = admissible_theorem_3_2(1, 2, 4)
    assert d.case == "iii" and d.threshold == pytest.approx(48 / 13, rel=1e-15)
    d = admissible_theorem_3_2(1, 2, 2)
    assert (d.case, d.relation, d.threshold) == ("ii", "<=", 4.0) and d.admits(4.0)


@pytest.mark.parametrize("args", [(-1, 1, 2), (1, 0.5, 2), (1, 1, 0)])
def test_admissible_theorem_3_1_rejects(args):
    with pytest.raises(HypothesisViolated):
        admissible_theorem_3_1(*args)


@pytest.mark.parametrize("args", [(2, 2, 3), (1, 1.5, 3), (-1, 2, 3), (3, 2, 1)])
def test_admissible_theorem_3_2_rejects(args):
    with pytest.raises(HypothesisViolated):
        admissible_theorem_3_2(*args)


def test_case_labels_partition_parameter_grid():
    vals = [0, 0.5, 1, 2, 3]
    for a, b, n in itertools.product(vals, [1, 1.5, 2, 3, 4], [1, 2, 3]):
        d = admissible_theorem_3_1(a, b, n)
        expect = "i" if b == n else ("ii" if b > n else "iii")
        assert d.case == expect
    for a, b, n in itertools.product(vals, [2, 2.5, 3, 4], [1, 2, 3, 4, 5, 6]):
        if not b > a:
            continue
        d = admissible_theorem_3_2(a, b, n)
        s = a + b
        expect = "i" if s == n else ("ii" if s > n else "iii")
        assert d.case == expect
        assert d.threshold >= 1


def test_decision_serializes():
    d = admissible_theorem_3_1(1, 1, 2, p=1.2)
    out = d.to_dict()
    assert out["admissible"] is False and out["case"] == "iii"
    assert "p >= " in d.describe()
