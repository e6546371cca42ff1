from collections.abc import Sequence
from typing import Protocol

UNASSIGNED = -1


class CellConstraint(Protocol):
    """回溯搜索中的单元约束。values 中未赋值的格为 UNASSIGNED，单元按行优先下标依次赋值。"""

    def narrow(self, values: Sequence[int], k: int, candidates: list[int]) -> list[int]:
        """在给第 k 格赋值前收窄候选值。"""

    def accepts(self, values: Sequence[int], k: int) -> bool:
        """第 k 格赋值后，检查所有已完全确定的实例是否仍成立。"""
