"""常用的具名运算表，测试与审计共用。"""

from narylab.core.models import InvalidArityError, OpTable


def meet(m: int, n: int) -> OpTable:
    return OpTable.from_function(m, n, lambda *t: min(t))


def join(m: int, n: int) -> OpTable:
    return OpTable.from_function(m, n, lambda *t: max(t))


def projection(m: int, n: int, i: int = 1) -> OpTable:
    """第 i 个坐标的投影（i 从 1 开始）。"""
    if not 1 <= i <= n:
        raise InvalidArityError(f"投影坐标 {i} 超出 1..{n}")
    return OpTable.from_function(m, n, lambda *t: t[i - 1])


def parity(n: int) -> OpTable:
    """2-链上的 n 元异或。"""
    return OpTable.from_function(2, n, lambda *t: sum(t) % 2)


def parity_complement() -> OpTable:
    """2-链上的同或 x≡y，同样满足结合律。"""
    return OpTable.from_function(2, 2, lambda x, y: 1 - (x ^ y))


def constant(m: int, n: int, c: int) -> OpTable:
    return OpTable.from_function(m, n, lambda *t: c)


def median(m: int) -> OpTable:
    return OpTable.from_function(m, 3, lambda *t: sorted(t)[1])


def floor_average(m: int) -> OpTable:
    return OpTable.from_function(m, 2, lambda x, y: (x + y) // 2)


def alternating_sum(m: int) -> OpTable:
    """x − y + z (mod m)：满足结合律，但没有中性元。"""
    return OpTable.from_function(m, 3, lambda x, y, z: (x - y + z) % m)
