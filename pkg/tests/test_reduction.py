import random
from itertools import islice, product

import pytest

from narylab.core.catalog import (
    constant,
    floor_average,
    join,
    median,
    meet,
    parity,
    parity_complement,
    projection,
)
from narylab.core.models import (
    InvalidArityError,
    NotAssociativeError,
    OpTable,
    derive,
    fold_table,
    restrict,
)
from narylab.services.enumeration import AIN, ClassSpec, Enumerator
from narylab.services.properties import is_associative, is_idempotent, neutral_elements
from narylab.services.reduction import (
    AckermanWitness,
    ArityReductionMismatchError,
    CandidateMismatchError,
    NotNeutralError,
    OracleCapError,
    ackerman_witness,
    adjoin_extension,
    adjoin_neutral_binary,
    arity_reduce,
    candidate_binary,
    extremal_witness,
    neutral_reduction,
    oracle_reduce,
    reduce,
)

XOR3 = parity(3)
XOR2 = parity(2)
XNOR2 = parity_complement()
PROJ_L2 = projection(2, 2, 1)


def _naive_reductions(f: OpTable, binary_associative: list[OpTable]) -> list[OpTable]:
    return [g for g in binary_associative if fold_table(g, f.arity) == f]


def _binary_associative(m: int) -> list[OpTable]:
    tables = (OpTable.from_values(m, 2, v) for v in product(range(m), repeat=m * m))
    return [g for g in tables if is_associative(g) is None]


def test_candidate_binary_of_meet() -> None:
    assert candidate_binary(meet(2, 3)) == meet(2, 2)
    assert candidate_binary(meet(3, 4)) == meet(3, 2)
    assert candidate_binary(derive(PROJ_L2, 3)) == PROJ_L2


def test_candidate_binary_returns_binary_input_unchanged() -> None:
    assert candidate_binary(floor_average(3)) == floor_average(3)


@pytest.mark.parametrize("m", [2, 3])
@pytest.mark.parametrize("n", [3, 4])
def test_candidate_binary_recovers_every_binary_ain_operation(m: int, n: int) -> None:
    for g in Enumerator().enumerate(m, 2, AIN):
        assert candidate_binary(derive(g, n)) == g


def test_candidate_binary_reports_lex_least_mismatch() -> None:
    with pytest.raises(CandidateMismatchError) as info:
        candidate_binary(XOR3)
    assert (info.value.a, info.value.c) == (0, 1)
    assert (info.value.left, info.value.right) == (0, 1)


def test_neutral_reduction() -> None:
    assert neutral_reduction(meet(3, 3), 2) == meet(3, 2)
    assert neutral_reduction(XOR3, 0) == XOR2
    assert neutral_reduction(XOR3, 1) == XNOR2
    with pytest.raises(NotNeutralError) as info:
        neutral_reduction(meet(3, 3), 0)
    assert info.value.e == 0


def test_adjoin_neutral_binary_flags_new_element() -> None:
    ext = adjoin_neutral_binary(PROJ_L2)
    assert ext.values == (0, 0, 0, 1, 1, 1, 0, 1, 2)
    assert ext.unplaced == frozenset({2})
    assert is_associative(ext) is None
    assert 2 in neutral_elements(adjoin_neutral_binary(meet(2, 2)))


def test_adjoin_neutral_binary_requires_associativity() -> None:
    with pytest.raises(NotAssociativeError):
        adjoin_neutral_binary(floor_average(3))
    with pytest.raises(InvalidArityError):
        adjoin_neutral_binary(meet(2, 3))


def test_adjoin_extension_restricts_back() -> None:
    f = projection(2, 3, 1)
    ext = adjoin_extension(f, PROJ_L2)
    assert ext == adjoin_neutral_binary(PROJ_L2)
    assert restrict(derive(ext, 3), 2) == f


def test_arity_reduce() -> None:
    assert arity_reduce(meet(2, 3)) == meet(2, 2)
    assert arity_reduce(derive(meet(2, 2), 4)) == meet(2, 3)
    assert arity_reduce(join(3, 3)) == join(3, 2)


def test_arity_reduce_reports_disagreeing_placements() -> None:
    with pytest.raises(ArityReductionMismatchError) as info:
        arity_reduce(XOR3)
    assert (info.value.i, info.value.j) == (1, 2)
    assert info.value.tuple == (0, 1)
    assert info.value.values == (1, 0)
    with pytest.raises(InvalidArityError):
        arity_reduce(meet(2, 2))


def test_ackerman_witness() -> None:
    assert ackerman_witness(XOR3) == AckermanWitness(0, 1)
    assert ackerman_witness(meet(2, 3)) is None
    assert ackerman_witness(parity(4)) is None
    assert ackerman_witness(parity(5)) == AckermanWitness(0, 1)


def test_oracle_reductions_of_parity() -> None:
    assert oracle_reduce(XOR3) == [XOR2, XNOR2]
    assert oracle_reduce(XOR3, ClassSpec.of("quasitrivial")) == []
    assert oracle_reduce(XOR3, ClassSpec.of("idem")) == []


def test_oracle_reductions_of_ain_tables() -> None:
    assert oracle_reduce(meet(2, 3)) == [meet(2, 2)]
    assert oracle_reduce(join(2, 3)) == [join(2, 2)]
    assert oracle_reduce(projection(2, 3, 1)) == [PROJ_L2]
    assert oracle_reduce(projection(2, 3, 3)) == [projection(2, 2, 2)]


@pytest.mark.parametrize("m", [2, 3])
def test_idempotent_reduction_of_ain_table_is_unique(m: int) -> None:
    for f in Enumerator().enumerate(m, 3, AIN):
        idempotent = oracle_reduce(f, ClassSpec.of("idem"))
        assert idempotent == [candidate_binary(f)]
        extras = [g for g in oracle_reduce(f) if g not in idempotent]
        assert all(is_idempotent(g) is not None for g in extras)


def test_oracle_of_non_associative_table_is_empty() -> None:
    assert oracle_reduce(median(3)) == []


def test_oracle_cap() -> None:
    with pytest.raises(OracleCapError) as info:
        oracle_reduce(meet(5, 3), cap=4)
    assert info.value.cap == 4
    assert oracle_reduce(meet(5, 2), cap=5) == [meet(5, 2)]


def test_oracle_agrees_with_naive_filter_on_two_chain() -> None:
    binary = _binary_associative(2)
    for values in product(range(2), repeat=8):
        f = OpTable.from_values(2, 3, values)
        assert oracle_reduce(f) == _naive_reductions(f, binary)


def test_oracle_agrees_with_naive_filter_on_three_chain() -> None:
    binary = _binary_associative(3)
    derived = {fold_table(g, 3).values for g in binary}
    associative = islice(Enumerator().enumerate(3, 3, ClassSpec.of("assoc")), 300)
    pool = sorted(derived | {f.values for f in associative})
    for values in random.Random(20).sample(pool, 100):
        f = OpTable.from_values(3, 3, values)
        assert oracle_reduce(f) == _naive_reductions(f, binary)
        assert oracle_reduce(f, workers=3) == oracle_reduce(f)


def test_reduce_prefers_candidate() -> None:
    result = reduce(meet(3, 3))
    assert result.outcome == "reduced"
    assert result.strategy == "candidate"
    assert result.g == meet(3, 2)
    assert result.verified


def test_reduce_parity_through_neutral_element() -> None:
    result = reduce(XOR3)
    assert result.strategy == "neutral"
    assert result.neutral == 0
    assert result.g == XOR2
    assert result.verified
    assert any(note.startswith("candidate") for note in result.notes)


def test_reduce_parity_through_oracle() -> None:
    result = reduce(XOR3, "oracle")
    assert result.strategy == "oracle"
    assert result.g == XOR2
    assert result.verified


def test_reduce_constant_table() -> None:
    result = reduce(constant(2, 3, 0))
    assert result.strategy == "candidate"
    assert result.g == constant(2, 2, 0)
    assert reduce(projection(2, 3, 1), "oracle").g == PROJ_L2


def test_reduce_median_is_irreducible() -> None:
    result = reduce(median(3))
    assert result.outcome == "irreducible"
    assert result.evidence == "oracle-exhaustion"
    assert result.ackerman is None
    assert result.g is None
    assert not result.verified


def test_restricted_reduce_attaches_ackerman_witness() -> None:
    result = reduce(XOR3, g_class=ClassSpec.of("quasitrivial"))
    assert result.outcome == "irreducible"
    assert result.ackerman == AckermanWitness(0, 1)


def test_explicit_strategy_failure_is_unresolved() -> None:
    assert reduce(XOR3, "candidate").outcome == "unresolved"
    assert reduce(projection(2, 3, 1), "neutral").outcome == "unresolved"


def test_reduce_adjoin_strategy_carries_extension() -> None:
    result = reduce(projection(2, 3, 1), "adjoin")
    assert result.strategy == "adjoin"
    assert result.g == PROJ_L2
    assert result.extension == adjoin_neutral_binary(PROJ_L2)
    assert result.extension is not None and result.extension.unplaced == frozenset({2})


def test_reduce_rejects_unary_table() -> None:
    with pytest.raises(InvalidArityError):
        reduce(OpTable.from_values(2, 1, [0, 1]))


def test_every_reduced_result_is_verified() -> None:
    for f in Enumerator().enumerate(2, 3, ClassSpec.of("assoc")):
        result = reduce(f)
        if result.outcome == "reduced":
            assert result.verified
            assert result.g is not None
            assert derive(result.g, 3) == f


def test_extremal_witness_global_mode() -> None:
    assert extremal_witness(meet(3, 3), "global") == meet(3, 2)
    assert extremal_witness(join(3, 4), "global") == join(3, 2)
    assert extremal_witness(XOR3, "global") is None


def test_extremal_witness_either_mode() -> None:
    assert extremal_witness(meet(3, 3)) == meet(3, 2)
    assert extremal_witness(projection(2, 3, 1)) == PROJ_L2
    assert extremal_witness(projection(2, 3, 1), "global") is None


def test_projection_on_three_chain_is_not_extremal() -> None:
    proj = projection(3, 3, 1)
    assert extremal_witness(proj, "either") is None
    assert extremal_witness(proj, "global") is None
