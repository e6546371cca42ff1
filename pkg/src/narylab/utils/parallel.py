import asyncio
from collections.abc import Callable, Sequence
from typing import TypeVar

T = TypeVar("T")
R = TypeVar("R")


def ordered_map(fn: Callable[[T], R], items: Sequence[T], workers: int) -> list[R]:
    """并行求值 fn(item)，结果顺序与 items 一致；workers ≤ 1 时就地串行执行。"""
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    return asyncio.run(_gather_limited(fn, items, workers))


async def _gather_limited(fn: Callable[[T], R], items: Sequence[T], workers: int) -> list[R]:
    semaphore = asyncio.Semaphore(workers)

    async def _run(item: T) -> R:
        async with semaphore:
            return await asyncio.to_thread(fn, item)

    # gather 按提交顺序返回，与完成先后无关
    return await asyncio.gather(*[_run(item) for item in items])
