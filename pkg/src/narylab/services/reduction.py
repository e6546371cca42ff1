"""n 元运算到二元运算的约化、元数约化与不可约证据。"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from itertools import combinations, product
from typing import Literal

import numpy as np

from narylab.core.models import (
    InvalidArityError,
    NaryLabError,
    NotAssociativeError,
    OpTable,
    derive,
    fold_table,
    from_array,
    restrict,
)
from narylab.services.enumeration import (
    CellGrid,
    ClassSpec,
    DeriveConstraint,
    TableSearch,
    class_constraints,
    neutral_filter,
)
from narylab.services.properties import (
    ORDER_DEPENDENT,
    Witness,
    is_associative,
    neutral_elements,
    neutral_witness,
)

logger = logging.getLogger(__name__)

Strategy = Literal["candidate", "neutral", "adjoin", "oracle"]
RequestedStrategy = Literal["auto", "candidate", "neutral", "adjoin", "oracle"]
Outcome = Literal["reduced", "irreducible", "unresolved"]
ExtremalMode = Literal["either", "global"]


class CandidateMismatchError(NaryLabError):
    def __init__(self, a: int, c: int, left: int, right: int, arity: int) -> None:
        k = arity - 1
        super().__init__(
            f"候选二元运算不一致: F({a}, {k}·{c}) = {left} ≠ F({k}·{a}, {c}) = {right}"
        )
        self.a = a
        self.c = c
        self.left = left
        self.right = right


class ArityReductionMismatchError(NaryLabError):
    def __init__(self, i: int, j: int, t: tuple[int, ...], values: tuple[int, int]) -> None:
        super().__init__(
            f"元数约化不良定义: 在 {t} 处加倍第 {i} 位得 {values[0]}，加倍第 {j} 位得 {values[1]}"
        )
        self.i = i
        self.j = j
        self.tuple = t
        self.values = values


class NotNeutralError(NaryLabError):
    def __init__(self, e: int, witness: Witness) -> None:
        (t,) = witness.tuples
        super().__init__(f"{e} 不是中性元: F{t} = {witness.values[0]} ≠ {witness.values[1]}")
        self.e = e
        self.witness = witness


class OracleCapError(NaryLabError):
    def __init__(self, m: int, cap: int) -> None:
        super().__init__(f"链大小 {m} 超过约化搜索上限 {cap}，可用 NARYLAB_ORACLE_CAP 调整")
        self.m = m
        self.cap = cap


@dataclass(frozen=True, slots=True)
class AckermanWitness:
    b1: int
    b2: int

    def to_dict(self) -> dict[str, int]:
        return {"b1": self.b1, "b2": self.b2}


@dataclass(frozen=True, slots=True)
class ReductionResult:
    outcome: Outcome
    g: OpTable | None = None
    strategy: Strategy | None = None
    neutral: int | None = None
    extension: OpTable | None = None
    evidence: Literal["oracle-exhaustion"] | None = None
    ackerman: AckermanWitness | None = None
    verified: bool = False
    notes: tuple[str, ...] = field(default=())

    @property
    def reduced(self) -> bool:
        return self.outcome == "reduced"


def _require_arity(f: OpTable, minimum: int, operation: str) -> None:
    if f.arity < minimum:
        raise InvalidArityError(f"{operation} 要求元数 ≥ {minimum}，实际为 {f.arity}")


def candidate_binary(f: OpTable) -> OpTable:
    """G(a,c) = F(a,(n−1)·c)，并与 F((n−1)·a,c) 逐格比较；不检查 G 的结合律。"""
    _require_arity(f, 2, "candidate_binary")
    if f.arity == 2:
        return f
    k = f.arity - 1
    a, c = np.indices((f.m, f.m))
    arr = f.array
    left = arr[(a,) + (c,) * k]
    right = arr[(a,) * k + (c,)]
    hits = np.argwhere(left != right)
    if len(hits):
        x, y = (int(v) for v in hits[0])
        raise CandidateMismatchError(x, y, int(left[x, y]), int(right[x, y]), f.arity)
    return from_array(left, f.unplaced)


def neutral_reduction(f: OpTable, e: int) -> OpTable:
    """G(a,b) = F(a,(n−2)·e,b)。"""
    _require_arity(f, 2, "neutral_reduction")
    if not 0 <= e < f.m:
        raise NaryLabError(f"元素 {e} 不在链上")
    witness = neutral_witness(f, e)
    if witness is not None:
        raise NotNeutralError(e, witness)
    a, b = np.indices((f.m, f.m))
    fill = np.full_like(a, e)
    g = f.array[(a,) + (fill,) * (f.arity - 2) + (b,)]
    return from_array(g, f.unplaced)


def adjoin_neutral_binary(g: OpTable) -> OpTable:
    """添加新元素 m 作为中性元，新元素标记为未定位。"""
    if g.arity != 2:
        raise InvalidArityError(f"adjoin_neutral_binary 需要二元运算，实际元数为 {g.arity}")
    witness = is_associative(g)
    if witness is not None:
        raise NotAssociativeError("附加中性元要求原运算满足结合律", witness)
    e = g.m
    ext = np.empty((e + 1, e + 1), dtype=np.int64)
    ext[:e, :e] = g.array
    ext[e, :] = np.arange(e + 1)
    ext[:, e] = np.arange(e + 1)
    result = from_array(ext, g.unplaced | {e})
    recheck = is_associative(result)
    if recheck is not None:
        raise NotAssociativeError("附加中性元后结合律失效", recheck)
    logger.debug("已附加中性元 %s: m=%s → %s", e, g.m, result.m)
    return result


def arity_reduce(f: OpTable) -> OpTable:
    """H(x₁…xₙ₋₁) = F(x₁,x₁,x₂…xₙ₋₁)，并核对所有加倍位置给出同一个 H。"""
    _require_arity(f, 3, "arity_reduce")
    n = f.arity
    grid = np.indices((f.m,) * (n - 1))
    arr = f.array
    placements = np.stack(
        [arr[tuple(grid[: p + 1]) + (grid[p],) + tuple(grid[p + 1 :])] for p in range(n - 1)]
    )
    bad = placements[1:] != placements[0]
    hits = np.argwhere(bad.any(axis=0))
    if len(hits):
        t = tuple(int(v) for v in hits[0])
        j = int(np.argmax(bad[(slice(None),) + t])) + 2
        values = (int(placements[0][t]), int(placements[j - 1][t]))
        raise ArityReductionMismatchError(1, j, t, values)
    return from_array(placements[0], f.unplaced)


def ackerman_witness(f: OpTable) -> AckermanWitness | None:
    """字典序最小的 b₁<b₂，使 {b₁,b₂} 上的每个元组都取出现奇数次的那个元素。"""
    if f.arity % 2 == 0:
        return None
    for b1, b2 in combinations(range(f.m), 2):
        cube = product((b1, b2), repeat=f.arity)
        if all(f.eval(t) == (b1 if t.count(b1) % 2 else b2) for t in cube):
            return AckermanWitness(b1, b2)
    return None


def oracle_reduce(
    f: OpTable,
    g_class: ClassSpec = ClassSpec(),
    *,
    cap: int = 4,
    workers: int = 1,
) -> list[OpTable]:
    """穷举所有满足 g_class、结合且 derive(G, n) = F 的二元 G，按字典序。"""
    _require_arity(f, 2, "oracle_reduce")
    if f.m > cap:
        raise OracleCapError(f.m, cap)
    if g_class.flags & ORDER_DEPENDENT:
        f.require_placed("oracle_reduce")
    witness = is_associative(f)
    if witness is not None:
        logger.info("F 不满足结合律，不可能由二元运算导出: 反例 %s", witness.tuples[0])
        return []
    grid = CellGrid.build(f.m, 2)
    spec = g_class | ClassSpec.of("assoc")
    constraints = [DeriveConstraint(f), *class_constraints(grid, spec)]
    complete = neutral_filter(grid) if "has-neutral" in spec else None
    search = TableSearch(grid, constraints, complete)
    found = [
        OpTable.from_values(f.m, 2, values, f.unplaced) for values in search.run(workers)
    ]
    logger.debug(
        "约化搜索完成: m=%s n=%s class=%s 结果数=%s",
        f.m,
        f.arity,
        g_class.letters or "-",
        len(found),
    )
    return found


def _verifies(f: OpTable, g: OpTable, g_class: ClassSpec) -> bool:
    if is_associative(g) is not None:
        return False
    return fold_table(g, f.arity) == f and g_class.matches(g)


def adjoin_extension(f: OpTable, g: OpTable) -> OpTable:
    """构造 G′ = G 加中性元，并核对 derive(G′, n) 限制回原链即 F，且新元素给出的约化限制回 G。"""
    ext = adjoin_neutral_binary(g)
    e = g.m
    f_ext = derive(ext, f.arity)
    if restrict(f_ext, f.m) != f:
        raise NaryLabError("扩张后的 n 元运算限制到原链不等于 F")
    witness = neutral_witness(f_ext, e)
    if witness is not None:
        raise NotNeutralError(e, witness)
    if restrict(neutral_reduction(f_ext, e), f.m) != g:
        raise NaryLabError("扩张上的中性元约化限制到原链不等于 G")
    return ext


def _candidate_step(f: OpTable, g_class: ClassSpec, notes: list[str]) -> OpTable | None:
    try:
        g = candidate_binary(f)
    except CandidateMismatchError as exc:
        notes.append(f"candidate: {exc}")
        return None
    if _verifies(f, g, g_class):
        return g
    notes.append("candidate: 候选运算未能复现 F 或不属于指定类")
    return None


def _neutral_step(
    f: OpTable, g_class: ClassSpec, notes: list[str]
) -> tuple[OpTable, int] | None:
    verified = []
    for e in neutral_elements(f):
        g = neutral_reduction(f, e)
        if _verifies(f, g, g_class):
            verified.append((g.values, e, g))
    if not verified:
        notes.append("neutral: 无中性元或中性元约化未通过验证")
        return None
    _, e, g = min(verified)
    return g, e


def reduce(
    f: OpTable,
    strategy: RequestedStrategy = "auto",
    g_class: ClassSpec = ClassSpec(),
    *,
    cap: int = 4,
    workers: int = 1,
) -> ReductionResult:
    """依次尝试 candidate、中性元、穷举搜索；返回的 G 都经过完整 derive 比对。

    显式指定的非穷举策略失败时结果为 unresolved，不做不可约断言。
    """
    _require_arity(f, 2, "reduce")
    notes: list[str] = []

    if strategy in ("auto", "candidate"):
        g = _candidate_step(f, g_class, notes)
        if g is not None:
            return _reduced(f, g, "candidate", notes)
        if strategy == "candidate":
            return _unresolved(notes)

    if strategy in ("auto", "neutral"):
        hit = _neutral_step(f, g_class, notes)
        if hit is not None:
            g, e = hit
            return _reduced(f, g, "neutral", notes, neutral=e)
        if strategy == "neutral":
            return _unresolved(notes)

    if strategy == "adjoin":
        g = _candidate_step(f, g_class, notes)
        if g is None:
            found = oracle_reduce(f, g_class, cap=cap, workers=workers)
            g = found[0] if found else None
        if g is None:
            notes.append("adjoin: 没有可供扩张的二元约化")
            return _unresolved(notes)
        ext = adjoin_extension(f, g)
        return _reduced(f, g, "adjoin", notes, extension=ext)

    found = oracle_reduce(f, g_class, cap=cap, workers=workers)
    for g in found:
        if _verifies(f, g, g_class):
            return _reduced(f, g, "oracle", notes)

    witness = ackerman_witness(f)
    if witness is not None:
        notes.append(f"ackerman: 元素对 ({witness.b1}, {witness.b2}) 满足奇数次规则")
    logger.info("未找到二元约化: m=%s n=%s class=%s", f.m, f.arity, g_class.letters or "-")
    return ReductionResult(
        "irreducible",
        evidence="oracle-exhaustion",
        ackerman=witness,
        notes=tuple(notes),
    )


def _reduced(
    f: OpTable,
    g: OpTable,
    strategy: Strategy,
    notes: list[str],
    *,
    neutral: int | None = None,
    extension: OpTable | None = None,
) -> ReductionResult:
    if fold_table(g, f.arity) != f:
        raise NaryLabError(f"{strategy} 给出的二元运算未能复现 F")
    logger.info("约化成功: m=%s n=%s strategy=%s", f.m, f.arity, strategy)
    return ReductionResult(
        "reduced",
        g=g,
        strategy=strategy,
        neutral=neutral,
        extension=extension,
        verified=True,
        notes=tuple(notes),
    )


def _unresolved(notes: list[str]) -> ReductionResult:
    return ReductionResult("unresolved", notes=tuple(notes))


def extremal_witness(f: OpTable, mode: ExtremalMode = "either") -> OpTable | None:
    """寻找 G 使 F(t) 只经由 G(min t, max t)（either 模式下也可为 G(max t, min t)）确定。"""
    f.require_placed("extremal_witness")
    groups: dict[tuple[int, int], list[int]] = {}
    for t, value in zip(f.tuples(), f.values, strict=True):
        seen = groups.setdefault((min(t), max(t)), [])
        if value not in seen:
            seen.append(value)
    g = np.zeros((f.m, f.m), dtype=np.int64)
    for (lo, hi), seen in groups.items():
        if mode == "global" or lo == hi:
            if len(seen) != 1:
                return None
            g[lo, hi] = g[hi, lo] = seen[0]
            continue
        if len(seen) > 2:
            return None
        # 组内字典序最小元组的值占 G(lo,hi)，另一值（若有）占 G(hi,lo)
        g[lo, hi] = seen[0]
        g[hi, lo] = seen[-1]
    return from_array(g, f.unplaced)
