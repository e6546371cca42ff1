"""逐条定理的穷举审计。

每条检查由假设类（交给穷举模块产出实例）与可判定的结论组成。
hard 级别的检查出现任何违反即失败；report 级别的违反与随包发布的
预期差异清单比对，清单之外的新违反、或清单中未再现的条目都算失败。
"""

from __future__ import annotations

import json
import logging
import time
from collections.abc import Callable, Iterable
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Literal

from pydantic import BaseModel, Field, ValidationError

from narylab.core.catalog import projection
from narylab.core.models import NaryLabError, NotAssociativeError, OpTable, derive, fold_table
from narylab.services.enumeration import AIN, ClassSpec, Enumerator
from narylab.services.properties import (
    Witness,
    is_associative,
    is_idempotent,
    is_monotone,
    is_nondecreasing,
    is_quasitrivial,
    is_symmetric,
    neutral_elements,
    neutral_witness,
)
from narylab.services.reduction import (
    ArityReductionMismatchError,
    CandidateMismatchError,
    ackerman_witness,
    adjoin_extension,
    arity_reduce,
    candidate_binary,
    extremal_witness,
    neutral_reduction,
    oracle_reduce,
)
from narylab.utils.parallel import ordered_map

logger = logging.getLogger(__name__)

Tier = Literal["hard", "report"]

AIM = ClassSpec.of("assoc", "idem", "monotone")


class UnknownTheoremError(NaryLabError):
    def __init__(self, theorem_id: str) -> None:
        super().__init__(f"未知的定理编号 {theorem_id!r}，可用: {', '.join(THEOREMS)}")
        self.theorem_id = theorem_id


@dataclass(frozen=True, slots=True)
class Failure:
    detail: str
    witness: Witness | None = None


@dataclass(frozen=True, slots=True)
class CheckContext:
    oracle_cap: int = 4


Conclusion = Callable[[OpTable, CheckContext], Failure | None]


@dataclass(frozen=True, slots=True)
class TheoremCheck:
    id: str
    tier: Tier
    hypothesis: ClassSpec
    statement: str
    conclusion: Conclusion
    applies: Callable[[int, int], bool] = lambda m, n: True
    # 非空时审计固定的实例而非假设类
    instances: Callable[[int, int], list[OpTable]] | None = None


THEOREMS: dict[str, TheoremCheck] = {}


def theorem(
    theorem_id: str,
    tier: Tier,
    hypothesis: ClassSpec,
    statement: str,
    *,
    applies: Callable[[int, int], bool] | None = None,
    instances: Callable[[int, int], list[OpTable]] | None = None,
) -> Callable[[Conclusion], Conclusion]:
    def register(conclusion: Conclusion) -> Conclusion:
        THEOREMS[theorem_id] = TheoremCheck(
            theorem_id,
            tier,
            hypothesis,
            statement,
            conclusion,
            applies or (lambda m, n: True),
            instances,
        )
        return conclusion

    return register


def _ternary_or_more(m: int, n: int) -> bool:
    return n >= 3


def _candidate(f: OpTable) -> OpTable | Failure:
    try:
        return candidate_binary(f)
    except CandidateMismatchError as exc:
        return Failure(str(exc))


def _arity_reduced(f: OpTable) -> OpTable | Failure:
    try:
        return arity_reduce(f)
    except ArityReductionMismatchError as exc:
        return Failure(str(exc))


def _first_failure(
    g: OpTable, label: str, checks: Iterable[tuple[str, Callable[[OpTable], Witness | None]]]
) -> Failure | None:
    for name, check in checks:
        witness = check(g)
        if witness is not None:
            return Failure(f"{label} 不满足 {name}", witness)
    return None


@theorem("L41", "hard", AIN, "F(a,(n−1)·c) = F((n−1)·a,c)")
def _l41(f: OpTable, ctx: CheckContext) -> Failure | None:
    g = _candidate(f)
    return g if isinstance(g, Failure) else None


@theorem("R42", "hard", AIN, "F(k·a,(n−k)·c) 与 k 无关")
def _r42(f: OpTable, ctx: CheckContext) -> Failure | None:
    n = f.arity
    for a in range(f.m):
        for c in range(f.m):
            first = f.eval((a,) + (c,) * (n - 1))
            for k in range(2, n):
                value = f.eval((a,) * k + (c,) * (n - k))
                if value != first:
                    return Failure(
                        f"F({k}·{a},{n - k}·{c}) = {value} ≠ F(1·{a},{n - 1}·{c}) = {first}"
                    )
    return None


@theorem("L42G", "hard", AIN, "候选二元运算 G 结合、幂等、非降")
def _l42g(f: OpTable, ctx: CheckContext) -> Failure | None:
    g = _candidate(f)
    if isinstance(g, Failure):
        return g
    return _first_failure(
        g,
        "G",
        [("assoc", is_associative), ("idem", is_idempotent), ("nondecreasing", is_nondecreasing)],
    )


@theorem(
    "T44",
    "hard",
    AIN | ClassSpec.of("symm"),
    "对称情形下 F(x) = G(min x, max x)，且 G 即候选二元运算",
)
def _t44(f: OpTable, ctx: CheckContext) -> Failure | None:
    g = _candidate(f)
    if isinstance(g, Failure):
        return g
    w = extremal_witness(f, "global")
    if w is None:
        return Failure("F 不是（全局 min/max 形式的）极值运算")
    if w != g:
        return Failure(f"极值见证 {list(w.values)} ≠ 候选运算 {list(g.values)}")
    return None


@theorem(
    "T45",
    "hard",
    AIN,
    "n=3 时 G(a,c)=F(a,c,c)=F(a,a,c) 且 F(a,b,c)=G(G(a,b),c)",
    applies=lambda m, n: n == 3,
)
def _t45(f: OpTable, ctx: CheckContext) -> Failure | None:
    g = _candidate(f)
    if isinstance(g, Failure):
        return g
    for t in f.tuples():
        a, b, c = t
        folded = g.eval((g.eval((a, b)), c))
        if folded != f.eval(t):
            return Failure(f"G(G({a},{b}),{c}) = {folded} ≠ F{t} = {f.eval(t)}")
    return None


@theorem("L46", "hard", AIN, "加倍任意一个位置得到同一个 n−1 元运算", applies=_ternary_or_more)
def _l46(f: OpTable, ctx: CheckContext) -> Failure | None:
    h = _arity_reduced(f)
    return h if isinstance(h, Failure) else None


@theorem("C47", "hard", AIN, "约化后的 H 幂等且非降", applies=_ternary_or_more)
def _c47(f: OpTable, ctx: CheckContext) -> Failure | None:
    h = _arity_reduced(f)
    if isinstance(h, Failure):
        return h
    return _first_failure(h, "H", [("idem", is_idempotent), ("nondecreasing", is_nondecreasing)])


@theorem("L48", "hard", AIN, "约化后的 H 满足结合律", applies=_ternary_or_more)
def _l48(f: OpTable, ctx: CheckContext) -> Failure | None:
    h = _arity_reduced(f)
    if isinstance(h, Failure):
        return h
    return _first_failure(h, "H", [("assoc", is_associative)])


@theorem("T49", "hard", AIN, "F 由唯一的结合、幂等、非降二元运算导出")
def _t49(f: OpTable, ctx: CheckContext) -> Failure | None:
    g = _candidate(f)
    if isinstance(g, Failure):
        return g
    failure = _first_failure(
        g,
        "G",
        [("assoc", is_associative), ("idem", is_idempotent), ("nondecreasing", is_nondecreasing)],
    )
    if failure is not None:
        return failure
    try:
        derived = derive(g, f.arity)
    except NotAssociativeError as exc:
        return Failure(str(exc), exc.witness)
    if derived != f:
        return Failure("derive(G, n) ≠ F")
    h = f
    while h.arity > 2:
        step = _arity_reduced(h)
        if isinstance(step, Failure):
            return step
        h = step
    if h != g:
        return Failure(f"逐次元数约化得到 {list(h.values)} ≠ 候选运算 {list(g.values)}")
    return None


@theorem(
    "C410",
    "report",
    AIM,
    "结合、幂等、单调的 F 可约当且仅当 F 非降",
)
def _c410(f: OpTable, ctx: CheckContext) -> Failure | None:
    reducible = bool(oracle_reduce(f, cap=ctx.oracle_cap))
    witness = is_nondecreasing(f)
    if reducible and witness is not None:
        return Failure("可约但不非降", witness)
    if not reducible and witness is None:
        return Failure("非降但不可约")
    return None


@theorem(
    "T33QS",
    "hard",
    ClassSpec.of("assoc", "quasitrivial", "symm", "nondecreasing"),
    "G(x,y)=F((n−1)·x,y) 给出约化，且 F(x)=G(min x, max x)",
)
def _t33qs(f: OpTable, ctx: CheckContext) -> Failure | None:
    g = _candidate(f)
    if isinstance(g, Failure):
        return g
    if is_associative(g) is not None or fold_table(g, f.arity) != f:
        return Failure("候选运算未能导出 F")
    w = extremal_witness(f, "global")
    if w != g:
        return Failure("F 不是以候选运算为见证的极值运算")
    return None


@theorem(
    "T38QA",
    "report",
    ClassSpec.of("assoc", "quasitrivial", "nondecreasing"),
    "结合、拟平凡、非降的 F 可约",
)
def _t38qa(f: OpTable, ctx: CheckContext) -> Failure | None:
    if not oracle_reduce(f, cap=ctx.oracle_cap):
        return Failure("穷举搜索未找到二元约化")
    return None


@theorem(
    "T37AKK",
    "report",
    ClassSpec.of("assoc", "quasitrivial"),
    "存在奇数次规则的元素对时 F 不由二元运算导出",
)
def _t37akk(f: OpTable, ctx: CheckContext) -> Failure | None:
    witness = ackerman_witness(f)
    if witness is None:
        return None
    found = oracle_reduce(f, cap=ctx.oracle_cap)
    if found:
        return Failure(
            f"元素对 ({witness.b1}, {witness.b2}) 满足奇数次规则，"
            f"但 F 可由 {list(found[0].values)} 导出"
        )
    return None


@theorem(
    "DM34",
    "report",
    ClassSpec.of("assoc"),
    "F 可约当且仅当 F 有中性元或可附加中性元",
)
def _dm34(f: OpTable, ctx: CheckContext) -> Failure | None:
    found = oracle_reduce(f, cap=ctx.oracle_cap)
    neutral = neutral_elements(f)
    if not found:
        if neutral:
            return Failure(f"F 有中性元 {neutral} 但不可约")
        return None
    if neutral:
        for e in neutral:
            if fold_table(neutral_reduction(f, e), f.arity) != f:
                return Failure(f"中性元 {e} 给出的二元运算未能导出 F")
        return None
    try:
        adjoin_extension(f, found[0])
    except NaryLabError as exc:
        return Failure(f"附加中性元的扩张失败: {exc}")
    return None


@theorem(
    "P35",
    "report",
    AIM | ClassSpec.of("has-neutral"),
    "中性元约化 G 导出 F，且结合、幂等、单调并保留同一中性元",
)
def _p35(f: OpTable, ctx: CheckContext) -> Failure | None:
    for e in neutral_elements(f):
        g = neutral_reduction(f, e)
        label = f"中性元 {e} 的约化 G"
        if fold_table(g, f.arity) != f:
            return Failure(f"{label} 未能导出 F")
        failure = _first_failure(
            g,
            label,
            [("assoc", is_associative), ("idem", is_idempotent), ("monotone", is_monotone)],
        )
        if failure is not None:
            return failure
        witness = neutral_witness(g, e)
        if witness is not None:
            return Failure(f"{e} 不是 {label} 的中性元", witness)
    return None


@theorem(
    "C35ND",
    "report",
    AIM | ClassSpec.of("has-neutral"),
    "有中性元的结合、幂等、单调 F 非降",
)
def _c35nd(f: OpTable, ctx: CheckContext) -> Failure | None:
    witness = is_nondecreasing(f)
    return None if witness is None else Failure("F 不非降", witness)


@theorem(
    "OBS-SYM",
    "hard",
    AIM | ClassSpec.of("symm", "has-neutral"),
    "F 对称时中性元约化 G 也对称",
)
def _obs_sym(f: OpTable, ctx: CheckContext) -> Failure | None:
    for e in neutral_elements(f):
        witness = is_symmetric(neutral_reduction(f, e))
        if witness is not None:
            return Failure(f"中性元 {e} 的约化 G 不对称", witness)
    return None


@theorem(
    "L36NEQT",
    "report",
    AIM | ClassSpec.of("has-neutral"),
    "有中性元的结合、幂等、单调 F 拟平凡",
)
def _l36neqt(f: OpTable, ctx: CheckContext) -> Failure | None:
    witness = is_quasitrivial(f)
    return None if witness is None else Failure("F 不拟平凡", witness)


@theorem(
    "D51-PROJ",
    "hard",
    ClassSpec(),
    "第一坐标投影不是极值运算",
    applies=lambda m, n: m >= 3 and n >= 3,
    instances=lambda m, n: [projection(m, n, 1)],
)
def _d51_proj(f: OpTable, ctx: CheckContext) -> Failure | None:
    for mode in ("either", "global"):
        w = extremal_witness(f, mode)
        if w is not None:
            return Failure(f"{mode} 模式下找到极值见证 {list(w.values)}")
    return None


@theorem("P32", "report", AIM, "导出 F 的每个结合二元运算都幂等")
def _p32(f: OpTable, ctx: CheckContext) -> Failure | None:
    for g in oracle_reduce(f, cap=ctx.oracle_cap):
        witness = is_idempotent(g)
        if witness is not None:
            return Failure(f"约化 {list(g.values)} 不幂等", witness)
    return None


@theorem("C33U", "report", AIM, "导出 F 的结合二元运算至多一个")
def _c33u(f: OpTable, ctx: CheckContext) -> Failure | None:
    found = oracle_reduce(f, cap=ctx.oracle_cap)
    if len(found) > 1:
        return Failure(f"存在 {len(found)} 个约化: {[list(g.values) for g in found]}")
    return None


@theorem(
    "EXT-NE",
    "report",
    AIN | ClassSpec.of("has-neutral"),
    "有中性元的结合、幂等、非降 F 是极值运算",
)
def _ext_ne(f: OpTable, ctx: CheckContext) -> Failure | None:
    if extremal_witness(f, "either") is None:
        return Failure("F 不是极值运算")
    return None


class ExpectedDiscrepancy(BaseModel):
    theorem: str
    m: int = Field(ge=1)
    n: int = Field(ge=2)
    table: list[int]
    note: str = ""


class ExpectedDiscrepancies(BaseModel):
    entries: list[ExpectedDiscrepancy] = Field(default_factory=list)

    def for_run(self, theorem_id: str, m: int, n: int) -> list[ExpectedDiscrepancy]:
        return [e for e in self.entries if (e.theorem, e.m, e.n) == (theorem_id, m, n)]


def load_expected(path: str | Path | None = None) -> ExpectedDiscrepancies:
    """读取预期差异清单；未指定路径时使用随包发布的数据文件。"""
    if path is None:
        resource = resources.files("narylab").joinpath("data", "expected_discrepancies.json")
        text = resource.read_text(encoding="utf-8")
        source = "<package>"
    else:
        source = str(path)
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise NaryLabError(f"无法读取预期差异清单 {source}: {exc}") from exc
    try:
        return ExpectedDiscrepancies.model_validate(json.loads(text))
    except (json.JSONDecodeError, ValidationError) as exc:
        raise NaryLabError(f"预期差异清单 {source} 格式错误: {exc}") from exc


@dataclass(frozen=True, slots=True)
class AuditViolation:
    table: OpTable
    failure: Failure
    expected: bool = False


@dataclass(slots=True)
class AuditReport:
    theorem: str
    tier: Tier
    statement: str
    m: int
    n: int
    applicable: bool = True
    instances: int = 0
    violations: list[AuditViolation] = field(default_factory=list)
    missing_expected: list[ExpectedDiscrepancy] = field(default_factory=list)
    runtime: float = 0.0

    @property
    def unexpected(self) -> list[AuditViolation]:
        return [v for v in self.violations if not v.expected]

    @property
    def clean(self) -> bool:
        return not self.unexpected and not self.missing_expected


class AuditRunner:
    def __init__(
        self,
        enumerator: Enumerator,
        expected: ExpectedDiscrepancies | None = None,
        *,
        oracle_cap: int = 4,
    ) -> None:
        self._enumerator = enumerator
        self._expected = expected if expected is not None else ExpectedDiscrepancies()
        self._context = CheckContext(oracle_cap=oracle_cap)

    def run(self, theorem_id: str, m: int, n: int) -> AuditReport:
        check = THEOREMS.get(theorem_id)
        if check is None:
            raise UnknownTheoremError(theorem_id)
        self._enumerator.check_budget(m, n)
        report = AuditReport(check.id, check.tier, check.statement, m, n)
        if not check.applies(m, n):
            report.applicable = False
            logger.info("审计 %s 不适用于 m=%s n=%s", check.id, m, n)
            return report

        started = time.perf_counter()
        if check.instances is not None:
            tables = check.instances(m, n)
        else:
            tables = list(self._enumerator.enumerate(m, n, check.hypothesis))
        outcomes = ordered_map(
            lambda f: check.conclusion(f, self._context), tables, self._enumerator.workers
        )
        expected = self._expected.for_run(check.id, m, n) if check.tier == "report" else []
        expected_tables = {tuple(e.table) for e in expected}
        for table, failure in zip(tables, outcomes, strict=True):
            if failure is None:
                continue
            report.violations.append(
                AuditViolation(table, failure, expected=table.values in expected_tables)
            )
        seen = {v.table.values for v in report.violations}
        report.missing_expected = [e for e in expected if tuple(e.table) not in seen]
        report.instances = len(tables)
        report.runtime = time.perf_counter() - started

        logger.info(
            "审计 %s: m=%s n=%s 实例=%s 违反=%s 预期外=%s 耗时=%.3fs",
            check.id,
            m,
            n,
            report.instances,
            len(report.violations),
            len(report.unexpected),
            report.runtime,
        )
        for violation in report.unexpected:
            logger.warning(
                "审计 %s 出现预期外违反: table=%s %s",
                check.id,
                list(violation.table.values),
                violation.failure.detail,
            )
        for entry in report.missing_expected:
            logger.warning("审计 %s 未再现预期差异: table=%s", check.id, entry.table)
        return report

    def run_all(self, m: int, n: int) -> list[AuditReport]:
        return [self.run(theorem_id, m, n) for theorem_id in THEOREMS]
