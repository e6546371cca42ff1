from __future__ import annotations

import logging
from collections.abc import Callable, Iterator, Sequence
from dataclasses import dataclass, field
from itertools import product
from typing import TYPE_CHECKING, NamedTuple

import numpy as np

if TYPE_CHECKING:
    from narylab.services.properties import Witness

logger = logging.getLogger(__name__)


class NaryLabError(ValueError):
    """所有领域错误的基类，CLI 统一映射为退出码 2（谓词失败类除外）。"""


class ArityMismatchError(NaryLabError):
    def __init__(self, expected: int, got: int) -> None:
        super().__init__(f"元数不匹配: 期望 {expected} 个坐标，实际 {got} 个")
        self.expected = expected
        self.got = got


class CoordinateOutOfRangeError(NaryLabError):
    def __init__(self, position: int, value: int, size: int) -> None:
        super().__init__(f"坐标越界: 第 {position} 个坐标为 {value}，链仅含 0..{size - 1}")
        self.position = position
        self.value = value


class InvalidArityError(NaryLabError):
    """运算元数不满足操作要求。"""


class NotAssociativeError(NaryLabError):
    def __init__(self, message: str, witness: Witness) -> None:
        super().__init__(message)
        self.witness = witness


class UnplacedElementError(NaryLabError):
    """表中含未定位的附加元素，依赖序的谓词不可用。"""


@dataclass(frozen=True, slots=True)
class Chain:
    """链 {0, …, m−1}，自然序。"""

    size: int

    def __post_init__(self) -> None:
        if self.size < 1:
            raise NaryLabError(f"链的大小必须为正整数，实际为 {self.size}")

    def reverse(self, x: int) -> int:
        return self.size - 1 - x


class TupleIndex(NamedTuple):
    coordinates: tuple[int, ...]
    flat: int

    @classmethod
    def from_coordinates(cls, m: int, coordinates: Sequence[int]) -> TupleIndex:
        return cls(tuple(coordinates), index_of(m, coordinates))

    @classmethod
    def from_flat(cls, m: int, n: int, flat: int) -> TupleIndex:
        return cls(unindex(m, n, flat), flat)


def index_of(m: int, coordinates: Sequence[int]) -> int:
    """行优先下标，x₁ 为最高位: Σ xᵢ·m^(n−i)。"""
    flat = 0
    for x in coordinates:
        flat = flat * m + x
    return flat


def unindex(m: int, n: int, flat: int) -> tuple[int, ...]:
    if not 0 <= flat < m**n:
        raise NaryLabError(f"下标 {flat} 超出 0..{m**n - 1}")
    digits = [0] * n
    for pos in range(n - 1, -1, -1):
        flat, digits[pos] = divmod(flat, m)
    return tuple(digits)


def all_tuples(m: int, n: int) -> Iterator[tuple[int, ...]]:
    """按行优先下标顺序（即字典序）遍历 n 元组。"""
    return product(range(m), repeat=n)


@dataclass(frozen=True, slots=True)
class OpTable:
    chain: Chain
    arity: int
    values: tuple[int, ...]
    # 附加的中性元在链上没有位置；相等性只比较 chain/arity/values
    unplaced: frozenset[int] = field(default=frozenset(), compare=False)

    def __post_init__(self) -> None:
        if self.arity < 1:
            raise InvalidArityError(f"元数必须 ≥ 1，实际为 {self.arity}")
        m = self.chain.size
        expected = m**self.arity
        if len(self.values) != expected:
            raise NaryLabError(f"表长度应为 {expected}，实际为 {len(self.values)}")
        for k, v in enumerate(self.values):
            if not 0 <= v < m:
                raise NaryLabError(f"表项 values[{k}] = {v} 超出 0..{m - 1}")
        for u in self.unplaced:
            if not 0 <= u < m:
                raise NaryLabError(f"未定位元素 {u} 不在链上")

    @classmethod
    def from_values(
        cls,
        m: int,
        n: int,
        values: Sequence[int],
        unplaced: frozenset[int] | None = None,
    ) -> OpTable:
        return cls(Chain(m), n, tuple(int(v) for v in values), unplaced or frozenset())

    @classmethod
    def from_function(cls, m: int, n: int, fn: Callable[..., int]) -> OpTable:
        return cls(Chain(m), n, tuple(fn(*t) for t in all_tuples(m, n)))

    @property
    def m(self) -> int:
        return self.chain.size

    @property
    def size(self) -> int:
        return len(self.values)

    @property
    def array(self) -> np.ndarray:
        """形状为 (m,)*n 的只读 numpy 视图，C 序与行优先布局一致。"""
        arr = np.asarray(self.values, dtype=np.int64).reshape((self.m,) * self.arity)
        arr.flags.writeable = False
        return arr

    def eval(self, t: Sequence[int]) -> int:
        if len(t) != self.arity:
            raise ArityMismatchError(self.arity, len(t))
        for pos, x in enumerate(t, start=1):
            if not 0 <= x < self.m:
                raise CoordinateOutOfRangeError(pos, x, self.m)
        return self.values[index_of(self.m, t)]

    def tuples(self) -> Iterator[tuple[int, ...]]:
        return all_tuples(self.m, self.arity)

    def require_placed(self, operation: str) -> None:
        if self.unplaced:
            raise UnplacedElementError(
                f"{operation} 依赖链序，但元素 {sorted(self.unplaced)} 尚未定位；请先指定其链上位置"
            )


def from_array(arr: np.ndarray, unplaced: frozenset[int] = frozenset()) -> OpTable:
    m = arr.shape[0]
    return OpTable(Chain(m), arr.ndim, tuple(int(v) for v in arr.reshape(-1)), unplaced)


def fold_table(g: OpTable, n: int) -> OpTable:
    """对二元表左折叠得到 n 元表，不检查结合律。"""
    if g.arity != 2:
        raise InvalidArityError(f"折叠需要二元运算，实际元数为 {g.arity}")
    if n < 2:
        raise InvalidArityError(f"导出的元数必须 ≥ 2，实际为 {n}")
    if n == 2:
        return g
    garr = g.array
    cols = np.arange(g.m)
    acc = cols
    for _ in range(n - 1):
        acc = garr[acc[..., np.newaxis], cols]
    return from_array(acc, g.unplaced)


def derive(g: OpTable, n: int) -> OpTable:
    """F(x₁…xₙ) = x₁∘…∘xₙ；表达式良定义当且仅当 G 满足结合律。"""
    # 延迟导入，properties 依赖本模块
    from narylab.services.properties import is_associative

    if g.arity != 2:
        raise InvalidArityError(f"derive 需要二元运算，实际元数为 {g.arity}")
    witness = is_associative(g)
    if witness is not None:
        raise NotAssociativeError("二元运算不满足结合律，无法导出 n 元运算", witness)
    return fold_table(g, n)


def dual(f: OpTable) -> OpTable:
    """序对偶: r(F(r(x₁)…r(xₙ)))，r(x) = m−1−x。"""
    f.require_placed("dual")
    # 各坐标取反后行优先下标恰好取补，故翻转整个值序列
    top = f.m - 1
    return OpTable(f.chain, f.arity, tuple(top - v for v in reversed(f.values)))


def place(f: OpTable, position: int) -> OpTable:
    """把唯一的未定位元素放到链上第 position 位，其余元素保序重标。"""
    if len(f.unplaced) != 1:
        raise NaryLabError(f"place 要求恰有一个未定位元素，实际为 {sorted(f.unplaced)}")
    if not 0 <= position < f.m:
        raise NaryLabError(f"位置 {position} 超出 0..{f.m - 1}")
    (u,) = f.unplaced
    others = [x for x in range(f.m) if x != u]
    relabel = [0] * f.m
    for new, old in enumerate(others[:position] + [u] + others[position:]):
        relabel[old] = new
    perm = np.asarray(relabel)
    inverse = np.argsort(perm)
    arr = f.array
    # new[π(x₁)…π(xₙ)] = π(F(x₁…xₙ))
    placed = perm[arr[np.ix_(*([inverse] * f.arity))]]
    logger.debug("已定位元素 %s → %s", u, position)
    return from_array(placed)


def restrict(f: OpTable, size: int) -> OpTable:
    """限制到前 size 个元素；要求子集对运算封闭。"""
    if not 1 <= size <= f.m:
        raise NaryLabError(f"限制大小 {size} 超出 1..{f.m}")
    sub = f.array[(slice(0, size),) * f.arity]
    if sub.size and int(sub.max()) >= size:
        raise NaryLabError(f"{{0..{size - 1}}} 对该运算不封闭")
    return from_array(sub, frozenset(u for u in f.unplaced if u < size))
