import argparse
import json
import logging
import sys
from collections.abc import Callable, Sequence

from pydantic import ValidationError

from narylab.adapters.reports import (
    Report,
    audit_summary,
    check_report,
    reduction_report,
    render,
    table_dict,
)
from narylab.adapters.table_io import TableDocument, from_table, load_table, save_table, to_table
from narylab.config import Settings
from narylab.core.models import NaryLabError, NotAssociativeError, OpTable, derive, place
from narylab.services.audit import THEOREMS, AuditRunner, load_expected
from narylab.services.enumeration import ClassSpec, Enumerator
from narylab.services.properties import classify
from narylab.services.reduction import (
    ArityReductionMismatchError,
    arity_reduce,
    extremal_witness,
    oracle_reduce,
    reduce,
)
from narylab.utils.logging import setup_logging

logger = logging.getLogger(__name__)

Handler = Callable[[argparse.Namespace, Settings], Report]


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"需要正整数，实际为 {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"需要正整数，实际为 {value}")
    return value


def build_parser() -> argparse.ArgumentParser:
    # 公共选项在子命令前后均可出现；SUPPRESS 避免子解析器用默认值覆盖主解析器的值
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=["json", "text"], default=argparse.SUPPRESS)
    common.add_argument(
        "--threads",
        type=_positive_int,
        default=argparse.SUPPRESS,
        help="并行 worker 数（也可用 NARYLAB_THREADS）",
    )
    common.add_argument(
        "--budget", type=_positive_int, default=argparse.SUPPRESS, help="穷举预算（格数 m^n）"
    )
    common.add_argument(
        "--timings",
        action="store_true",
        default=argparse.SUPPRESS,
        help="在审计报告中附带耗时",
    )

    table_args = argparse.ArgumentParser(add_help=False)
    table_args.add_argument("file", help="运算表文件（JSON 或紧凑文本格式）")
    table_args.add_argument(
        "--place", type=int, default=None, help="把未定位的附加元素放到链上该位置"
    )
    output_args = argparse.ArgumentParser(add_help=False)
    output_args.add_argument(
        "--output", default=None, help="把结果表另存为文件（.json 为 JSON，其余为紧凑文本）"
    )

    parser = argparse.ArgumentParser(
        prog="narylab",
        description="有限链上 n 元运算的性质判定、二元约化与定理审计",
        parents=[common],
    )
    sub = parser.add_subparsers(dest="command", required=True)

    check = sub.add_parser("check", parents=[common, table_args], help="判定性质并给出反例")
    check.add_argument("--props", default="a,i,s,q,d,m,e", help="性质标记，如 a,i,d")

    red = sub.add_parser("reduce", parents=[common, table_args], help="寻找二元约化")
    red.add_argument(
        "--strategy",
        choices=["auto", "candidate", "neutral", "adjoin", "oracle"],
        default="auto",
    )
    red.add_argument("--g-class", default="", help="限制二元运算所属的类")

    der = sub.add_parser(
        "derive", parents=[common, table_args, output_args], help="由二元运算导出 n 元运算"
    )
    der.add_argument("--arity", type=int, required=True)

    sub.add_parser("arity-reduce", parents=[common, table_args, output_args], help="元数减一")

    ext = sub.add_parser("extremal", parents=[common, table_args], help="极值运算见证")
    ext.add_argument("--mode", choices=["either", "global"], default="either")

    enum = sub.add_parser("enumerate", parents=[common], help="穷举满足性质的运算表")
    enum.add_argument("--m", type=_positive_int, required=True)
    enum.add_argument("--n", type=int, required=True)
    enum.add_argument("--class", dest="class_flags", default="")
    enum.add_argument("--dedup", choices=["none", "dual"], default="none")
    enum.add_argument("--count-only", action="store_true")

    orc = sub.add_parser("oracle", parents=[common, table_args], help="穷举全部二元约化")
    orc.add_argument("--g-class", default="")

    aud = sub.add_parser("audit", parents=[common], help="在 (m, n) 上穷举审计定理")
    target = aud.add_mutually_exclusive_group(required=True)
    target.add_argument("--theorem", choices=list(THEOREMS))
    target.add_argument("--all", action="store_true")
    aud.add_argument("--m", type=_positive_int, required=True)
    aud.add_argument("--n", type=int, required=True)
    return parser


def _load(args: argparse.Namespace) -> tuple[OpTable, TableDocument]:
    doc = load_table(args.file)
    f = to_table(doc)
    if args.place is not None:
        f = place(f, args.place)
    return f, doc


def _cmd_check(args: argparse.Namespace, settings: Settings) -> Report:
    f, doc = _load(args)
    requested = ClassSpec.parse(args.props).names
    return check_report(f, classify(f, requested), requested, doc.labels)


def _cmd_reduce(args: argparse.Namespace, settings: Settings) -> Report:
    f, doc = _load(args)
    result = reduce(
        f,
        args.strategy,
        ClassSpec.parse(args.g_class),
        cap=settings.oracle_cap,
        workers=settings.threads,
    )
    return reduction_report(result, doc.labels)


def _table_result(
    command: str, f: OpTable, labels: Sequence[str] | None, output: str | None
) -> Report:
    doc = from_table(f, labels)
    if output is not None:
        save_table(doc, output)
    report: Report = {"command": command, "table": doc.model_dump(mode="json", exclude_none=True)}
    if output is not None:
        report["output"] = output
    report["ok"] = True
    return report


def _cmd_derive(args: argparse.Namespace, settings: Settings) -> Report:
    g, doc = _load(args)
    return _table_result("derive", derive(g, args.arity), doc.labels, args.output)


def _cmd_arity_reduce(args: argparse.Namespace, settings: Settings) -> Report:
    f, doc = _load(args)
    try:
        h = arity_reduce(f)
    except ArityReductionMismatchError as exc:
        return {
            "command": "arity-reduce",
            "mismatch": {
                "placements": [exc.i, exc.j],
                "tuple": list(exc.tuple),
                "values": list(exc.values),
            },
            "detail": str(exc),
            "ok": False,
        }
    return _table_result("arity-reduce", h, doc.labels, args.output)


def _cmd_extremal(args: argparse.Namespace, settings: Settings) -> Report:
    f, doc = _load(args)
    g = extremal_witness(f, args.mode)
    report: Report = {"command": "extremal", "mode": args.mode, "extremal": g is not None}
    if g is not None:
        report["g"] = table_dict(g, doc.labels)
    report["ok"] = g is not None
    return report


def _cmd_enumerate(args: argparse.Namespace, settings: Settings) -> Report:
    spec = ClassSpec.parse(args.class_flags)
    enumerator = Enumerator(budget=settings.budget, workers=settings.threads)
    report: Report = {
        "command": "enumerate",
        "m": args.m,
        "n": args.n,
        "class": spec.letters,
        "dedup": args.dedup,
    }
    if args.count_only and args.dedup == "none":
        report["count"] = enumerator.count(args.m, args.n, spec)
    else:
        tables = list(enumerator.enumerate(args.m, args.n, spec, args.dedup))
        report["count"] = len(tables)
        if not args.count_only:
            report["tables"] = [table_dict(f) for f in tables]
    report["ok"] = True
    return report


def _cmd_oracle(args: argparse.Namespace, settings: Settings) -> Report:
    f, doc = _load(args)
    found = oracle_reduce(
        f, ClassSpec.parse(args.g_class), cap=settings.oracle_cap, workers=settings.threads
    )
    return {
        "command": "oracle",
        "count": len(found),
        "tables": [table_dict(g, doc.labels) for g in found],
        "ok": bool(found),
    }


def _cmd_audit(args: argparse.Namespace, settings: Settings) -> Report:
    runner = AuditRunner(
        Enumerator(budget=settings.budget, workers=settings.threads),
        load_expected(settings.expected_discrepancies),
        oracle_cap=settings.oracle_cap,
    )
    if args.all:
        reports = runner.run_all(args.m, args.n)
    else:
        reports = [runner.run(args.theorem, args.m, args.n)]
    return audit_summary(reports, timings=getattr(args, "timings", False))


HANDLERS: dict[str, Handler] = {
    "check": _cmd_check,
    "reduce": _cmd_reduce,
    "derive": _cmd_derive,
    "arity-reduce": _cmd_arity_reduce,
    "extremal": _cmd_extremal,
    "enumerate": _cmd_enumerate,
    "oracle": _cmd_oracle,
    "audit": _cmd_audit,
}


def run(argv: Sequence[str] | None = None) -> int:
    """执行一条命令，报告写 stdout。

    退出码: 0 成立或找到，1 不成立或未找到，2 用法或输入错误。
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2

    try:
        settings = Settings()
    except ValidationError as exc:
        print(f"配置错误: {exc}", file=sys.stderr)
        return 2
    overrides = {key: getattr(args, key) for key in ("threads", "budget") if hasattr(args, key)}
    settings = settings.model_copy(update=overrides)
    setup_logging(settings.log_level)

    try:
        report = HANDLERS[args.command](args, settings)
    except NotAssociativeError as exc:
        witness = json.dumps(exc.witness.to_dict(), ensure_ascii=False)
        print(f"错误: {exc}\n结合律反例: {witness}", file=sys.stderr)
        return 2
    except NaryLabError as exc:
        logger.debug("命令失败: command=%s", args.command, exc_info=True)
        print(f"错误: {exc}", file=sys.stderr)
        return 2

    print(render(report, getattr(args, "format", "json")))
    return 0 if report["ok"] else 1


def main() -> None:
    try:
        code = run()
    except KeyboardInterrupt:
        logging.getLogger(__name__).info("收到中断信号，NaryLab 正在退出")
        code = 130
    sys.exit(code)


if __name__ == "__main__":
    main()
