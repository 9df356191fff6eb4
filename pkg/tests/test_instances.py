from pathlib import Path

import pytest

from dgkit.cli import serialize
from dgkit.dgcore import validate_category
from dgkit.exactla import prime_field
from dgkit.instances import (BadParam, category_instances, fixture_matrix,
                             make_quiver_path_category)

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


@pytest.mark.parametrize("name", ["point", "sphere2", "sphere3", "a2", "kronecker", "dga3"])
def test_instances_validate(name):
    assert validate_category(category_instances()[name]).ok


def test_tables_agree_over_a_large_prime():
    q, p = category_instances(), category_instances(prime_field(32003))
    for name, c in q.items():
        d = p[name]
        for x in c.objects:
            for y in c.objects:
                assert c.h_row(x, y) == d.h_row(x, y), (name, x, y)


def test_quiver_parameters():
    with pytest.raises(BadParam):
        make_quiver_path_category(["a"], [("f", "a", "b", 0)])
    with pytest.raises(BadParam):
        make_quiver_path_category(["a", "b"], [("f", "a", "b", 0), ("f", "a", "b", 1)])
    c = make_quiver_path_category(["a", "b", "c"], [("f", "a", "b", 0), ("g", "b", "c", 0)],
                                  relations=[{("f", "g"): 1}])
    assert validate_category(c).ok
    assert c.h_row("a", "c") == {}


def test_shipped_fixtures_are_current():
    docs = fixture_matrix()
    assert sorted(docs) == sorted(p.name for p in FIXTURES.iterdir())
    for name, x in docs.items():
        assert (FIXTURES / name).read_text(encoding="utf-8") == serialize(x), name
