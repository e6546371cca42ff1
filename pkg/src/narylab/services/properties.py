"""性质谓词：成立返回 None，失败返回字典序最小的反例 Witness。"""

from __future__ import annotations

import logging
from collections.abc import Callable, Iterable
from dataclasses import dataclass
from itertools import product
from typing import Literal

import numpy as np

from narylab.core.models import OpTable, index_of, unindex

logger = logging.getLogger(__name__)

WitnessKind = Literal[
    "associativity",
    "idempotency",
    "symmetry",
    "quasitriviality",
    "nondecreasing",
    "monotonicity",
    "neutral",
]
PropertyName = Literal[
    "assoc", "idem", "symm", "quasitrivial", "nondecreasing", "monotone", "has-neutral"
]
ALL_PROPERTIES: tuple[PropertyName, ...] = (
    "assoc",
    "idem",
    "symm",
    "quasitrivial",
    "nondecreasing",
    "monotone",
    "has-neutral",
)
ORDER_DEPENDENT: frozenset[PropertyName] = frozenset({"nondecreasing", "monotone"})


@dataclass(frozen=True, slots=True)
class Witness:
    """反例。tuples/values 的含义随 kind 而定，position 为 1 起的位置编号。

    - associativity: tuples=(x,) 为 2n−1 元组，position=i，values=(最左分组值, 第 i 分组值)
    - idempotency: tuples=((x,…,x),)，values=(F 值,)
    - symmetry: tuples=(t, t 交换 i,i+1 后)，position=i，values=(F(t), F(t'))
    - quasitriviality: tuples=(t,)，values=(F(t),)
    - nondecreasing: tuples=(t, t+eⱼ)，position=j，values=(F(t), F(t+eⱼ))
    - monotonicity: tuples=(截面三点)，position=j，values=(三点的 F 值)
    - neutral: tuples=(t,)，position=x 所在位置，values=(F(t), x)
    """

    kind: WitnessKind
    tuples: tuple[tuple[int, ...], ...]
    values: tuple[int, ...]
    position: int | None = None
    element: int | None = None

    def to_dict(self) -> dict[str, object]:
        data: dict[str, object] = {
            "kind": self.kind,
            "tuples": [list(t) for t in self.tuples],
            "values": list(self.values),
        }
        if self.position is not None:
            data["position"] = self.position
        if self.element is not None:
            data["element"] = self.element
        return data


def _first_hit(mask: np.ndarray) -> tuple[int, ...] | None:
    hits = np.argwhere(mask)
    if len(hits) == 0:
        return None
    return tuple(int(v) for v in hits[0])


# 单块最多展开的 2n−1 元组个数
_ASSOC_CHUNK = 1 << 18


def _grouping(arr: np.ndarray, coords: list[np.ndarray], n: int, i: int) -> np.ndarray:
    inner = arr[tuple(coords[i : i + n])]
    return arr[tuple(coords[:i]) + (inner,) + tuple(coords[i + n :])]


def is_associative(f: OpTable) -> Witness | None:
    n, m = f.arity, f.m
    if n == 1:
        return None
    width = 2 * n - 1
    fixed = 0
    while fixed < width and m ** (width - fixed) > _ASSOC_CHUNK:
        fixed += 1
    arr = f.array
    grid = np.indices((m,) * (width - fixed))
    shape = grid.shape[1:]
    # 前缀按字典序遍历，首个含违反的块即给出字典序最小的反例
    for prefix in product(range(m), repeat=fixed):
        coords = [np.broadcast_to(np.intp(x), shape) for x in prefix]
        coords += [grid[k] for k in range(width - fixed)]
        leftmost = _grouping(arr, coords, n, 0)
        bad = np.stack([_grouping(arr, coords, n, i) for i in range(1, n)]) != leftmost
        hit = _first_hit(bad.any(axis=0))
        if hit is None:
            continue
        i = int(np.argmax(bad[(slice(None),) + hit])) + 1
        x = prefix + hit
        inner = f.eval(x[i : i + n])
        value = f.eval(x[:i] + (inner,) + x[i + n :])
        left = f.eval((f.eval(x[:n]),) + x[n:])
        return Witness("associativity", (x,), (left, value), position=i)
    return None


def is_idempotent(f: OpTable) -> Witness | None:
    for x in range(f.m):
        diag = (x,) * f.arity
        value = f.eval(diag)
        if value != x:
            return Witness("idempotency", (diag,), (value,), element=x)
    return None


def is_symmetric(f: OpTable) -> Witness | None:
    arr = f.array
    best: tuple[int, int] | None = None
    for j in range(f.arity - 1):
        hit = _first_hit(arr != np.swapaxes(arr, j, j + 1))
        if hit is None:
            continue
        candidate = (index_of(f.m, hit), j)
        if best is None or candidate < best:
            best = candidate
    if best is None:
        return None
    flat, j = best
    t = unindex(f.m, f.arity, flat)
    swapped = t[:j] + (t[j + 1], t[j]) + t[j + 2 :]
    return Witness(
        "symmetry", (t, swapped), (f.eval(t), f.eval(swapped)), position=j + 1
    )


def is_quasitrivial(f: OpTable) -> Witness | None:
    arr = f.array
    grid = np.indices(arr.shape)
    inside = np.zeros(arr.shape, dtype=bool)
    for k in range(f.arity):
        inside |= arr == grid[k]
    hit = _first_hit(~inside)
    if hit is None:
        return None
    return Witness("quasitriviality", (hit,), (f.eval(hit),))


def is_nondecreasing(f: OpTable) -> Witness | None:
    """只需检查单坐标加一不使值下降，与分量序定义等价。"""
    f.require_placed("nondecreasing")
    arr = f.array
    best: tuple[int, int] | None = None
    for j in range(f.arity):
        # diff 的位置即较小的那个元组 t
        hit = _first_hit(np.diff(arr, axis=j) < 0)
        if hit is None:
            continue
        candidate = (index_of(f.m, hit), j)
        if best is None or candidate < best:
            best = candidate
    if best is None:
        return None
    flat, j = best
    t = unindex(f.m, f.arity, flat)
    up = t[:j] + (t[j] + 1,) + t[j + 1 :]
    return Witness("nondecreasing", (t, up), (f.eval(t), f.eval(up)), position=j + 1)


def is_monotone(f: OpTable) -> Witness | None:
    """每个单变量截面须（非严格）保序或反序；常值截面两者皆算。"""
    f.require_placed("monotone")
    arr = f.array
    for j in range(f.arity):
        d = np.diff(arr, axis=j)
        bad = (d > 0).any(axis=j) & (d < 0).any(axis=j)
        fixed = _first_hit(bad)
        if fixed is None:
            continue
        section = [fixed[:j] + (x,) + fixed[j:] for x in range(f.m)]
        points = _peak_or_valley([f.eval(t) for t in section])
        triple = tuple(section[p] for p in points)
        return Witness(
            "monotonicity",
            triple,
            tuple(f.eval(t) for t in triple),
            position=j + 1,
        )
    return None


def _peak_or_valley(values: list[int]) -> tuple[int, int, int]:
    """字典序最小的 x<y<z，使 f(y) 严格高于或低于两侧。"""
    m = len(values)
    for x in range(m):
        for y in range(x + 1, m):
            for z in range(y + 1, m):
                a, b, c = values[x], values[y], values[z]
                if (a < b > c) or (a > b < c):
                    return x, y, z
    raise AssertionError("截面并非非单调")


def neutral_witness(f: OpTable, e: int) -> Witness | None:
    for x in range(f.m):
        for pos in range(f.arity):
            t = (e,) * pos + (x,) + (e,) * (f.arity - pos - 1)
            value = f.eval(t)
            if value != x:
                return Witness("neutral", (t,), (value, x), position=pos + 1, element=e)
    return None


def neutral_elements(f: OpTable) -> list[int]:
    return [e for e in range(f.m) if neutral_witness(f, e) is None]


PREDICATES: dict[PropertyName, Callable[[OpTable], Witness | None]] = {
    "assoc": is_associative,
    "idem": is_idempotent,
    "symm": is_symmetric,
    "quasitrivial": is_quasitrivial,
    "nondecreasing": is_nondecreasing,
    "monotone": is_monotone,
}


def holds(f: OpTable, prop: PropertyName) -> bool:
    if prop == "has-neutral":
        return bool(neutral_elements(f))
    return PREDICATES[prop](f) is None


@dataclass(frozen=True, slots=True)
class PropertyReport:
    verdicts: dict[PropertyName, Witness | None]
    neutral: tuple[int, ...]

    def holds(self, prop: PropertyName) -> bool:
        if prop == "has-neutral":
            return bool(self.neutral)
        return self.verdicts[prop] is None


def classify(f: OpTable, names: Iterable[PropertyName] | None = None) -> PropertyReport:
    """判定 names 中的谓词（默认全部）。依赖序的谓词只在被请求时才要求元素已定位。"""
    wanted = set(PREDICATES if names is None else names)
    verdicts = {name: check(f) for name, check in PREDICATES.items() if name in wanted}
    report = PropertyReport(verdicts, tuple(neutral_elements(f)))
    logger.debug(
        "分类完成: m=%s n=%s 成立=%s",
        f.m,
        f.arity,
        [name for name, w in verdicts.items() if w is None],
    )
    return report


def witness_reproduces(f: OpTable, w: Witness) -> bool:
    """在表上重算反例，确认记录的违反确实存在。"""
    match w.kind:
        case "associativity":
            (x,) = w.tuples
            n, i = f.arity, w.position or 0
            left = f.eval((f.eval(x[:n]),) + x[n:])
            value = f.eval(x[:i] + (f.eval(x[i : i + n]),) + x[i + n :])
            return (left, value) == w.values and left != value
        case "idempotency":
            (t,) = w.tuples
            return f.eval(t) == w.values[0] != t[0]
        case "symmetry":
            t, swapped = w.tuples
            return (f.eval(t), f.eval(swapped)) == w.values and w.values[0] != w.values[1]
        case "quasitriviality":
            (t,) = w.tuples
            return f.eval(t) == w.values[0] and w.values[0] not in t
        case "nondecreasing":
            t, up = w.tuples
            return (f.eval(t), f.eval(up)) == w.values and w.values[0] > w.values[1]
        case "monotonicity":
            vals = tuple(f.eval(t) for t in w.tuples)
            a, b, c = vals
            return vals == w.values and ((a < b > c) or (a > b < c))
        case "neutral":
            (t,) = w.tuples
            return f.eval(t) == w.values[0] != w.values[1]
    return False
