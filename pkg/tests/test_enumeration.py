import math
from itertools import product

import pytest

from narylab.core.catalog import join, meet, projection
from narylab.core.models import NaryLabError, OpTable, derive, dual
from narylab.services.enumeration import (
    AIN,
    BudgetExceededError,
    ClassSpec,
    Enumerator,
)
from narylab.services.reduction import candidate_binary

BINARY_AIN = [
    OpTable.from_values(2, 2, [0, 0, 0, 1]),
    OpTable.from_values(2, 2, [0, 0, 1, 1]),
    OpTable.from_values(2, 2, [0, 1, 0, 1]),
    OpTable.from_values(2, 2, [0, 1, 1, 1]),
]

CROSS_CHECK_SPECS = [
    ClassSpec(),
    ClassSpec.of("assoc"),
    AIN,
    ClassSpec.of("symm", "quasitrivial"),
    ClassSpec.of("monotone"),
    ClassSpec.of("has-neutral"),
    ClassSpec.of("assoc", "symm", "nondecreasing"),
    ClassSpec.of("idem", "monotone", "has-neutral"),
]


def _brute_force(m: int, n: int, spec: ClassSpec) -> list[OpTable]:
    tables = (OpTable.from_values(m, n, v) for v in product(range(m), repeat=m**n))
    return [f for f in tables if spec.matches(f)]


def test_class_spec_parses_letters_and_names() -> None:
    assert ClassSpec.parse("a,i,d") == AIN
    assert ClassSpec.parse("assoc, idem ,nondecreasing") == AIN
    assert ClassSpec.parse("") == ClassSpec()
    assert ClassSpec.parse("e,s,a").letters == "a,s,e"
    assert "has-neutral" in ClassSpec.parse("e")
    with pytest.raises(NaryLabError, match="未知性质标记"):
        ClassSpec.parse("a,x")


def test_binary_ain_tables_on_two_chain() -> None:
    assert list(Enumerator().enumerate(2, 2, AIN)) == BINARY_AIN


def test_binary_associative_count() -> None:
    assert Enumerator().count(2, 2, ClassSpec.of("assoc")) == 8
    assert len(list(Enumerator().enumerate(2, 2, ClassSpec.of("assoc")))) == 8


def test_single_element_chain_has_one_table() -> None:
    assert Enumerator().count(1, 3, ClassSpec()) == 1


def test_ternary_ain_tables_are_derived_from_binary_ones() -> None:
    found = list(Enumerator().enumerate(2, 3, AIN))
    assert Enumerator().count(2, 3, AIN) == 4
    assert sorted(f.values for f in found) == sorted(derive(g, 3).values for g in BINARY_AIN)


@pytest.mark.parametrize(("m", "n"), [(2, 2), (2, 3), (3, 2)])
def test_enumeration_matches_brute_force_filter(m: int, n: int) -> None:
    enumerator = Enumerator()
    for spec in CROSS_CHECK_SPECS:
        assert list(enumerator.enumerate(m, n, spec)) == _brute_force(m, n, spec), spec.letters


@pytest.mark.parametrize(("m", "n"), [(2, 2), (2, 3), (2, 4), (3, 2), (3, 3), (3, 4)])
def test_ain_count_does_not_depend_on_arity(m: int, n: int) -> None:
    enumerator = Enumerator()
    binary = list(enumerator.enumerate(m, 2, AIN))
    nary = list(enumerator.enumerate(m, n, AIN))
    assert len(nary) == len(binary)
    assert sorted(derive(g, n).values for g in binary) == [f.values for f in nary]
    for f in nary:
        assert derive(candidate_binary(f), n) == f


def test_lattice_operations_are_enumerated() -> None:
    found = list(Enumerator().enumerate(3, 3, AIN | ClassSpec.of("symm")))
    assert meet(3, 3) in found
    assert join(3, 3) in found
    assert projection(3, 3, 1) not in found


@pytest.mark.parametrize(
    ("m", "n", "spec"),
    [(2, 3, ClassSpec.of("assoc")), (3, 2, ClassSpec.of("assoc", "idem")), (2, 2, ClassSpec())],
)
def test_dual_dedup_keeps_lex_least_of_each_pair(m: int, n: int, spec: ClassSpec) -> None:
    enumerator = Enumerator()
    full = list(enumerator.enumerate(m, n, spec))
    self_dual = sum(1 for f in full if dual(f) == f)
    kept = list(enumerator.enumerate(m, n, spec, dedup="dual"))
    assert len(kept) == math.ceil((len(full) + self_dual) / 2)
    assert all(f.values <= dual(f).values for f in kept)
    assert {f.values for f in kept} | {dual(f).values for f in kept} == {f.values for f in full}


@pytest.mark.parametrize(("m", "n", "spec"), [(3, 2, ClassSpec.of("assoc")), (2, 3, ClassSpec())])
def test_stream_does_not_depend_on_worker_count(m: int, n: int, spec: ClassSpec) -> None:
    serial = list(Enumerator(workers=1).enumerate(m, n, spec))
    parallel = list(Enumerator(workers=4).enumerate(m, n, spec))
    assert serial == parallel
    assert Enumerator(workers=4).count(m, n, spec) == len(serial)


def test_budget_is_checked_before_searching() -> None:
    enumerator = Enumerator(budget=81)
    with pytest.raises(BudgetExceededError) as info:
        enumerator.enumerate(3, 5, ClassSpec())
    assert info.value.cells == 243
    assert info.value.budget == 81
    with pytest.raises(BudgetExceededError):
        enumerator.count(4, 4, AIN)


def test_arity_below_two_is_rejected() -> None:
    with pytest.raises(NaryLabError):
        Enumerator().count(2, 1, ClassSpec())
