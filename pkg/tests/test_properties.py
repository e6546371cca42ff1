from itertools import product

import pytest
from hypothesis import given
from hypothesis import strategies as st

from narylab.core.catalog import (
    alternating_sum,
    floor_average,
    join,
    median,
    meet,
    parity,
    projection,
)
from narylab.core.models import OpTable, UnplacedElementError, dual
from narylab.services import properties
from narylab.services.properties import (
    PREDICATES,
    classify,
    holds,
    is_associative,
    is_idempotent,
    is_monotone,
    is_nondecreasing,
    is_quasitrivial,
    is_symmetric,
    neutral_elements,
    neutral_witness,
    witness_reproduces,
)
from narylab.services.reduction import adjoin_neutral_binary


@st.composite
def tables(draw: st.DrawFn, max_m: int = 3, max_n: int = 3) -> OpTable:
    m = draw(st.integers(1, max_m))
    n = draw(st.integers(2, max_n))
    values = draw(st.lists(st.integers(0, m - 1), min_size=m**n, max_size=m**n))
    return OpTable.from_values(m, n, values)


def _naive_associative(f: OpTable) -> bool:
    n = f.arity
    for x in product(range(f.m), repeat=2 * n - 1):
        results = {f.eval(x[:i] + (f.eval(x[i : i + n]),) + x[i + n :]) for i in range(n)}
        if len(results) > 1:
            return False
    return True


def test_parity_table_certificates() -> None:
    xor3 = parity(3)
    assert is_associative(xor3) is None
    assert is_idempotent(xor3) is None
    assert is_symmetric(xor3) is None
    assert is_quasitrivial(xor3) is None
    assert is_monotone(xor3) is None
    assert neutral_elements(xor3) == [0, 1]

    witness = is_nondecreasing(xor3)
    assert witness is not None
    assert witness.tuples == ((0, 0, 1), (1, 0, 1))
    assert witness.position == 1
    assert witness.values == (1, 0)


def test_median_associativity_witness_is_lex_least() -> None:
    witness = is_associative(median(3))
    assert witness is not None
    assert witness.tuples == ((0, 0, 0, 1, 1),)
    assert witness.position == 1
    assert witness.values == (1, 0)


def test_projection_symmetry_witness() -> None:
    witness = is_symmetric(projection(2, 3, 1))
    assert witness is not None
    assert witness.tuples == ((0, 1, 0), (1, 0, 0))
    assert witness.position == 1
    assert witness.values == (0, 1)


def test_floor_average_is_not_quasitrivial() -> None:
    f = floor_average(3)
    witness = is_quasitrivial(f)
    assert witness is not None
    assert witness.tuples == ((0, 2),)
    assert witness.values == (1,)
    assert is_associative(f) is not None
    assert is_nondecreasing(f) is None
    assert is_symmetric(f) is None


def test_idempotency_witness_names_element() -> None:
    witness = is_idempotent(parity(2))
    assert witness is not None
    assert witness.element == 1
    assert witness.tuples == ((1, 1),)


def test_monotone_witness_is_peak_of_section() -> None:
    bump = OpTable.from_function(3, 2, lambda x, y: 1 if x == 1 else 0)
    witness = is_monotone(bump)
    assert witness is not None
    assert witness.tuples == ((0, 0), (1, 0), (2, 0))
    assert witness.values == (0, 1, 0)
    assert witness.position == 1


def test_median_is_monotone_and_nondecreasing() -> None:
    assert is_monotone(median(3)) is None
    assert is_nondecreasing(median(3)) is None


def test_neutral_elements_of_lattice_operations() -> None:
    assert neutral_elements(meet(3, 3)) == [2]
    assert neutral_elements(join(3, 3)) == [0]
    assert neutral_elements(projection(3, 3, 1)) == []
    witness = neutral_witness(meet(3, 3), 0)
    assert witness is not None
    assert witness.tuples == ((1, 0, 0),)


def test_alternating_sum_is_associative_without_neutral_element() -> None:
    f = alternating_sum(3)
    assert is_associative(f) is None
    assert neutral_elements(f) == []
    assert not holds(f, "has-neutral")


def test_vectorized_associativity_agrees_with_naive_check() -> None:
    for values in product(range(2), repeat=4):
        f = OpTable.from_values(2, 2, values)
        assert (is_associative(f) is None) == _naive_associative(f)
    binary_associative = sum(
        is_associative(OpTable.from_values(2, 2, v)) is None for v in product(range(2), repeat=4)
    )
    assert binary_associative == 8


def test_order_dependent_predicates_reject_unplaced_element() -> None:
    ext = adjoin_neutral_binary(meet(2, 2))
    with pytest.raises(UnplacedElementError):
        is_nondecreasing(ext)
    with pytest.raises(UnplacedElementError):
        is_monotone(ext)
    assert is_associative(ext) is None
    assert neutral_elements(ext) == [2]
    report = classify(ext, ["assoc", "symm"])
    assert report.holds("assoc")
    assert report.holds("symm")


def test_classify_reports_every_predicate() -> None:
    report = classify(meet(2, 3))
    assert set(report.verdicts) == set(PREDICATES)
    assert all(report.holds(name) for name in PREDICATES)
    assert report.neutral == (1,)


@given(tables())
def test_witnesses_reproduce_on_their_table(f: OpTable) -> None:
    for check in PREDICATES.values():
        witness = check(f)
        if witness is not None:
            assert witness_reproduces(f, witness)
    for e in range(f.m):
        witness = neutral_witness(f, e)
        if witness is not None:
            assert witness_reproduces(f, witness)


@given(tables())
def test_dual_preserves_every_predicate(f: OpTable) -> None:
    g = dual(f)
    for name in PREDICATES:
        assert holds(f, name) == holds(g, name)
    assert len(neutral_elements(f)) == len(neutral_elements(g))


def test_dual_preserves_predicates_exhaustively_on_two_chain() -> None:
    for n in (2, 3):
        for values in product(range(2), repeat=2**n):
            f = OpTable.from_values(2, n, values)
            g = dual(f)
            for name in PREDICATES:
                assert holds(f, name) == holds(g, name)


@pytest.mark.parametrize(("m", "n"), [(2, 2), (2, 3), (3, 2)])
def test_property_implications_hold_exhaustively(m: int, n: int) -> None:
    for values in product(range(m), repeat=m**n):
        f = OpTable.from_values(m, n, values)
        if is_nondecreasing(f) is None:
            assert is_monotone(f) is None
        if is_quasitrivial(f) is None:
            assert is_idempotent(f) is None


def test_chunked_associativity_scan_keeps_lex_least_witness(
    monkeypatch: pytest.MonkeyPatch,
) -> None:
    samples = [
        median(3),
        floor_average(3),
        alternating_sum(3),
        meet(3, 3),
        projection(3, 3, 2),
        parity(3),
        OpTable.from_values(3, 2, [1, 2, 0, 0, 0, 2, 1, 1, 0]),
    ]
    expected = [is_associative(f) for f in samples]
    monkeypatch.setattr(properties, "_ASSOC_CHUNK", 4)
    assert [is_associative(f) for f in samples] == expected
    assert expected[0] is not None
    assert expected[0].tuples == ((0, 0, 0, 1, 1),)


def test_associativity_scan_of_wide_table_is_chunked() -> None:
    assert is_associative(meet(4, 6)) is None
    assert is_associative(join(3, 7)) is None
