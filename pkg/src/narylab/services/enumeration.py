"""按性质合取穷举有限链上的运算表。

搜索按行优先下标逐格赋值，候选值升序，因此输出天然按表的字典序排列。
"""

from __future__ import annotations

import logging
from collections.abc import Callable, Iterator, Sequence
from dataclasses import dataclass
from itertools import pairwise, product
from typing import Literal

from narylab.core.models import (
    InvalidArityError,
    NaryLabError,
    OpTable,
    all_tuples,
    dual,
    index_of,
)
from narylab.core.ports import UNASSIGNED, CellConstraint
from narylab.services.properties import ALL_PROPERTIES, PropertyName, holds
from narylab.utils.parallel import ordered_map

logger = logging.getLogger(__name__)

FLAG_LETTERS: dict[str, PropertyName] = {
    "a": "assoc",
    "i": "idem",
    "s": "symm",
    "q": "quasitrivial",
    "d": "nondecreasing",
    "m": "monotone",
    "e": "has-neutral",
}
Dedup = Literal["none", "dual"]


class BudgetExceededError(NaryLabError):
    def __init__(self, cells: int, budget: int) -> None:
        super().__init__(f"表格规模 m^n = {cells} 超出可行性预算 {budget} 格，可用 --budget 调整")
        self.cells = cells
        self.budget = budget


@dataclass(frozen=True, slots=True)
class ClassSpec:
    """性质的合取。空集表示不加限制。"""

    flags: frozenset[PropertyName] = frozenset()

    @classmethod
    def of(cls, *names: PropertyName) -> ClassSpec:
        return cls(frozenset(names))

    @classmethod
    def parse(cls, text: str) -> ClassSpec:
        """解析逗号分隔的标记，单字母（a,i,s,q,d,m,e）与完整名称均可。"""
        flags: set[PropertyName] = set()
        for raw in text.split(","):
            token = raw.strip()
            if not token:
                continue
            name = FLAG_LETTERS.get(token, token)
            if name not in ALL_PROPERTIES:
                raise NaryLabError(
                    f"未知性质标记 {token!r}，可用: {','.join(FLAG_LETTERS)} "
                    f"或 {','.join(ALL_PROPERTIES)}"
                )
            flags.add(name)  # type: ignore[arg-type]
        return cls(frozenset(flags))

    @property
    def names(self) -> tuple[PropertyName, ...]:
        return tuple(name for name in ALL_PROPERTIES if name in self.flags)

    @property
    def letters(self) -> str:
        return ",".join(letter for letter, name in FLAG_LETTERS.items() if name in self.flags)

    def __contains__(self, name: object) -> bool:
        return name in self.flags

    def __or__(self, other: ClassSpec) -> ClassSpec:
        return ClassSpec(self.flags | other.flags)

    def matches(self, f: OpTable) -> bool:
        return all(holds(f, name) for name in self.names)


AIN = ClassSpec.of("assoc", "idem", "nondecreasing")


@dataclass(frozen=True, slots=True)
class CellGrid:
    m: int
    n: int
    tuples: tuple[tuple[int, ...], ...]

    @classmethod
    def build(cls, m: int, n: int) -> CellGrid:
        return cls(m, n, tuple(all_tuples(m, n)))

    @property
    def size(self) -> int:
        return len(self.tuples)

    def index(self, t: Sequence[int]) -> int:
        return index_of(self.m, t)


class IdempotentCells:
    """对角格 F(x,…,x) 固定为 x。"""

    def __init__(self, grid: CellGrid) -> None:
        self._fixed = {grid.index((x,) * grid.n): x for x in range(grid.m)}

    def narrow(self, values: Sequence[int], k: int, candidates: list[int]) -> list[int]:
        if k in self._fixed:
            return [v for v in candidates if v == self._fixed[k]]
        return candidates

    def accepts(self, values: Sequence[int], k: int) -> bool:
        return True


class QuasitrivialCells:
    def __init__(self, grid: CellGrid) -> None:
        self._allowed = [frozenset(t) for t in grid.tuples]

    def narrow(self, values: Sequence[int], k: int, candidates: list[int]) -> list[int]:
        return [v for v in candidates if v in self._allowed[k]]

    def accepts(self, values: Sequence[int], k: int) -> bool:
        return True


class SymmetricCells:
    """每格复制其坐标排序后的格；排序元组字典序不大于原元组，故已赋值。"""

    def __init__(self, grid: CellGrid) -> None:
        self._canonical = [grid.index(sorted(t)) for t in grid.tuples]

    def narrow(self, values: Sequence[int], k: int, candidates: list[int]) -> list[int]:
        source = self._canonical[k]
        if source == k:
            return candidates
        return [v for v in candidates if v == values[source]]

    def accepts(self, values: Sequence[int], k: int) -> bool:
        return True


class NondecreasingCells:
    """下界取所有单坐标减一邻格的最大值；幂等时值还夹在 [min t, max t] 之间。"""

    def __init__(self, grid: CellGrid, idempotent: bool = False) -> None:
        self._m = grid.m
        self._lower = [
            [grid.index(t[:j] + (t[j] - 1,) + t[j + 1 :]) for j in range(grid.n) if t[j] > 0]
            for t in grid.tuples
        ]
        self._bounds = [
            (min(t), max(t)) if idempotent else (0, grid.m - 1) for t in grid.tuples
        ]

    def narrow(self, values: Sequence[int], k: int, candidates: list[int]) -> list[int]:
        low, high = self._bounds[k]
        low = max([low] + [values[i] for i in self._lower[k]])
        return [v for v in candidates if low <= v <= high]

    def accepts(self, values: Sequence[int], k: int) -> bool:
        return True


class MonotoneCells:
    """每个单变量截面在已赋值前缀上不得同时出现升与降。"""

    def __init__(self, grid: CellGrid) -> None:
        self._sections = [
            [
                [grid.index(t[:j] + (x,) + t[j + 1 :]) for x in range(t[j] + 1)]
                for j in range(grid.n)
                if t[j] >= 2
            ]
            for t in grid.tuples
        ]

    def narrow(self, values: Sequence[int], k: int, candidates: list[int]) -> list[int]:
        return candidates

    def accepts(self, values: Sequence[int], k: int) -> bool:
        for section in self._sections[k]:
            up = down = False
            for a, b in pairwise(values[i] for i in section):
                up = up or b > a
                down = down or b < a
            if up and down:
                return False
        return True


class AssociativeCells:
    """n 元结合律的增量检查。

    新赋值的格要么是某个实例的内层窗口，要么是某个分组的外层格；
    两类实例全部枚举，凡已能算出的分组值必须一致。
    """

    def __init__(self, grid: CellGrid) -> None:
        self._grid = grid
        self._rests = list(product(range(grid.m), repeat=grid.n - 1))

    def narrow(self, values: Sequence[int], k: int, candidates: list[int]) -> list[int]:
        return candidates

    def accepts(self, values: Sequence[int], k: int) -> bool:
        return all(self._consistent(values, x) for x in self._instances(values, k))

    def _instances(self, values: Sequence[int], k: int) -> Iterator[tuple[int, ...]]:
        n = self._grid.n
        t = self._grid.tuples[k]
        for i in range(n):
            for rest in self._rests:
                yield rest[:i] + t + rest[i:]
        for i in range(n):
            for idx, value in enumerate(values):
                if value == t[i]:
                    yield t[:i] + self._grid.tuples[idx] + t[i + 1 :]

    def _consistent(self, values: Sequence[int], x: tuple[int, ...]) -> bool:
        n, index = self._grid.n, self._grid.index
        seen = UNASSIGNED
        for i in range(n):
            inner = values[index(x[i : i + n])]
            if inner == UNASSIGNED:
                continue
            outer = values[index(x[:i] + (inner,) + x[i + n :])]
            if outer == UNASSIGNED:
                continue
            if seen == UNASSIGNED:
                seen = outer
            elif outer != seen:
                return False
        return True


class DeriveConstraint:
    """二元表 G 的左折叠必须复现目标 n 元表 F；仅检查中间格都已赋值的折叠。"""

    def __init__(self, target: OpTable) -> None:
        self._target = target
        self._m = target.m
        self._tuples = list(target.tuples())

    def narrow(self, values: Sequence[int], k: int, candidates: list[int]) -> list[int]:
        if self._target.arity == 2:
            return [v for v in candidates if v == self._target.values[k]]
        return candidates

    def accepts(self, values: Sequence[int], k: int) -> bool:
        m = self._m
        for flat, x in enumerate(self._tuples):
            acc = x[0]
            for y in x[1:]:
                acc = values[acc * m + y]
                if acc == UNASSIGNED:
                    break
            else:
                if acc != self._target.values[flat]:
                    return False
        return True


def class_constraints(grid: CellGrid, spec: ClassSpec) -> list[CellConstraint]:
    """收窄类约束在前，剪枝类约束在后。has-neutral 不在此列，见 neutral_filter。"""
    constraints: list[CellConstraint] = []
    if "idem" in spec:
        constraints.append(IdempotentCells(grid))
    if "quasitrivial" in spec:
        constraints.append(QuasitrivialCells(grid))
    if "symm" in spec:
        constraints.append(SymmetricCells(grid))
    if "nondecreasing" in spec:
        constraints.append(NondecreasingCells(grid, idempotent="idem" in spec))
    if "monotone" in spec:
        constraints.append(MonotoneCells(grid))
    if "assoc" in spec:
        constraints.append(AssociativeCells(grid))
    return constraints


def neutral_filter(grid: CellGrid) -> Callable[[tuple[int, ...]], bool]:
    n = grid.n
    cells = {
        e: [
            (x, grid.index((e,) * pos + (x,) + (e,) * (n - pos - 1)))
            for x in range(grid.m)
            for pos in range(n)
        ]
        for e in range(grid.m)
    }

    def has_neutral(values: tuple[int, ...]) -> bool:
        return any(all(values[i] == x for x, i in cells[e]) for e in range(grid.m))

    return has_neutral


class TableSearch:
    """行优先逐格回溯：先由各约束 narrow 候选值，赋值后由 accepts 剪枝。"""

    def __init__(
        self,
        grid: CellGrid,
        constraints: Sequence[CellConstraint],
        complete: Callable[[tuple[int, ...]], bool] | None = None,
    ) -> None:
        self._grid = grid
        self._constraints = list(constraints)
        self._complete = complete

    def _domain(self, values: list[int], k: int) -> list[int]:
        candidates = list(range(self._grid.m))
        for constraint in self._constraints:
            candidates = constraint.narrow(values, k, candidates)
            if not candidates:
                break
        return candidates

    def _accepts(self, values: list[int], k: int) -> bool:
        return all(constraint.accepts(values, k) for constraint in self._constraints)

    def _viable(self, values: list[int], k: int) -> list[int]:
        viable = []
        for v in self._domain(values, k):
            values[k] = v
            if self._accepts(values, k):
                viable.append(v)
        values[k] = UNASSIGNED
        return viable

    def solutions(self, start: Sequence[int] | None = None) -> Iterator[tuple[int, ...]]:
        """从已赋值前缀 start 出发的全部解，按字典序。"""
        values = list(start) if start is not None else [UNASSIGNED] * self._grid.size
        k = values.index(UNASSIGNED) if UNASSIGNED in values else len(values)
        yield from self._extend(values, k)

    def _extend(self, values: list[int], k: int) -> Iterator[tuple[int, ...]]:
        if k == len(values):
            result = tuple(values)
            if self._complete is None or self._complete(result):
                yield result
            return
        for v in self._domain(values, k):
            values[k] = v
            if self._accepts(values, k):
                yield from self._extend(values, k + 1)
        values[k] = UNASSIGNED

    def split(self) -> list[list[int]]:
        """沿只有一个可行值的格前进，在第一个分叉格按候选值升序切分子树。"""
        values = [UNASSIGNED] * self._grid.size
        for k in range(self._grid.size):
            viable = self._viable(values, k)
            if len(viable) != 1:
                prefixes = []
                for v in viable:
                    prefix = list(values)
                    prefix[k] = v
                    prefixes.append(prefix)
                return prefixes
            values[k] = viable[0]
        return [values]

    def run(self, workers: int = 1) -> Iterator[tuple[int, ...]]:
        if workers <= 1:
            yield from self.solutions()
            return
        prefixes = self.split()
        logger.debug("搜索树切分为 %s 个子树，workers=%s", len(prefixes), workers)
        for chunk in ordered_map(lambda p: list(self.solutions(p)), prefixes, workers):
            yield from chunk


class Enumerator:
    def __init__(self, budget: int = 81, workers: int = 1) -> None:
        self._budget = budget
        self._workers = workers

    @property
    def workers(self) -> int:
        return self._workers

    def check_budget(self, m: int, n: int) -> None:
        if m < 1:
            raise NaryLabError(f"链的大小必须为正整数，实际为 {m}")
        if n < 2:
            raise InvalidArityError(f"穷举要求元数 ≥ 2，实际为 {n}")
        cells = m**n
        if cells > self._budget:
            raise BudgetExceededError(cells, self._budget)

    def _search(self, m: int, n: int, spec: ClassSpec) -> TableSearch:
        self.check_budget(m, n)
        grid = CellGrid.build(m, n)
        complete = neutral_filter(grid) if "has-neutral" in spec else None
        return TableSearch(grid, class_constraints(grid, spec), complete)

    def enumerate(
        self, m: int, n: int, spec: ClassSpec = ClassSpec(), dedup: Dedup = "none"
    ) -> Iterator[OpTable]:
        """按字典序产出满足 spec 的全部表；dedup="dual" 时每对 {F, dual(F)} 只留字典序较小者。"""
        search = self._search(m, n, spec)
        logger.debug(
            "开始穷举: m=%s n=%s class=%s dedup=%s workers=%s",
            m,
            n,
            spec.letters or "-",
            dedup,
            self._workers,
        )
        return self._stream(search, m, n, dedup)

    def _stream(self, search: TableSearch, m: int, n: int, dedup: Dedup) -> Iterator[OpTable]:
        for values in search.run(self._workers):
            table = OpTable.from_values(m, n, values)
            if dedup == "dual" and dual(table).values < table.values:
                continue
            yield table

    def count(self, m: int, n: int, spec: ClassSpec = ClassSpec()) -> int:
        total = sum(1 for _ in self._search(m, n, spec).run(self._workers))
        logger.info("计数完成: m=%s n=%s class=%s count=%s", m, n, spec.letters or "-", total)
        return total
