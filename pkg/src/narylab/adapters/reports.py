"""把各子命令的结果组装成报告字典，并渲染为 JSON 或文本。"""

import json
from collections.abc import Sequence
from typing import Any, Literal

from narylab.adapters.table_io import from_table
from narylab.core.models import OpTable
from narylab.services.audit import AuditReport, AuditViolation
from narylab.services.properties import PropertyName, PropertyReport
from narylab.services.reduction import ReductionResult

OutputFormat = Literal["json", "text"]
Report = dict[str, Any]


def table_dict(f: OpTable, labels: Sequence[str] | None = None) -> Report:
    return from_table(f, labels).model_dump(mode="json", exclude_none=True)


def check_report(
    f: OpTable,
    report: PropertyReport,
    requested: Sequence[PropertyName],
    labels: Sequence[str] | None = None,
) -> Report:
    properties: Report = {}
    for name in requested:
        entry: Report = {"holds": report.holds(name)}
        if name == "has-neutral":
            entry["elements"] = list(report.neutral)
        elif report.verdicts[name] is not None:
            entry["witness"] = report.verdicts[name].to_dict()  # type: ignore[union-attr]
        properties[name] = entry
    return {
        "command": "check",
        "table": table_dict(f, labels),
        "properties": properties,
        "neutral_elements": list(report.neutral),
        "ok": all(report.holds(name) for name in requested),
    }


def reduction_report(result: ReductionResult, labels: Sequence[str] | None = None) -> Report:
    data: Report = {"command": "reduce", "outcome": result.outcome}
    if result.g is not None:
        data["strategy"] = result.strategy
        data["g"] = table_dict(result.g, labels)
    if result.neutral is not None:
        data["neutral"] = result.neutral
    if result.extension is not None:
        data["extension"] = table_dict(result.extension)
    if result.evidence is not None:
        data["evidence"] = result.evidence
    if result.ackerman is not None:
        data["ackerman"] = result.ackerman.to_dict()
    data["verified"] = result.verified
    data["notes"] = list(result.notes)
    data["ok"] = result.reduced
    return data


def _violation_dict(violation: AuditViolation) -> Report:
    data: Report = {
        "table": table_dict(violation.table),
        "detail": violation.failure.detail,
        "expected": violation.expected,
    }
    if violation.failure.witness is not None:
        data["witness"] = violation.failure.witness.to_dict()
    return data


def audit_report(report: AuditReport, timings: bool = False) -> Report:
    data: Report = {
        "theorem": report.theorem,
        "tier": report.tier,
        "statement": report.statement,
        "m": report.m,
        "n": report.n,
        "applicable": report.applicable,
        "instances": report.instances,
        "violations": [_violation_dict(v) for v in report.violations],
        "missing_expected": [e.model_dump(mode="json") for e in report.missing_expected],
        "clean": report.clean,
    }
    if timings:
        data["runtime_seconds"] = round(report.runtime, 6)
    return data


def audit_summary(reports: Sequence[AuditReport], timings: bool = False) -> Report:
    return {
        "command": "audit",
        "reports": [audit_report(r, timings) for r in reports],
        "ok": all(r.clean for r in reports),
    }


def _text_lines(value: Any, indent: int = 0) -> list[str]:
    pad = "  " * indent
    if isinstance(value, dict):
        lines = []
        for key, item in value.items():
            if isinstance(item, dict | list) and item and not _is_flat(item):
                lines.append(f"{pad}{key}:")
                lines.extend(_text_lines(item, indent + 1))
            else:
                lines.append(f"{pad}{key}: {_scalar(item)}")
        return lines
    if isinstance(value, list):
        lines = []
        for item in value:
            if not isinstance(item, dict) and (not isinstance(item, list) or _is_flat(item)):
                lines.append(f"{pad}- {_scalar(item)}")
                continue
            sub = _text_lines(item, indent + 1)
            lines.append(f"{pad}- {sub[0].strip()}" if sub else f"{pad}-")
            lines.extend(sub[1:])
        return lines
    return [f"{pad}{_scalar(value)}"]


def _is_flat(value: Any) -> bool:
    return isinstance(value, list) and all(not isinstance(v, dict | list) for v in value)


def _scalar(value: Any) -> str:
    if isinstance(value, list):
        return " ".join(_scalar(v) for v in value)
    if isinstance(value, bool):
        return "true" if value else "false"
    if value is None:
        return "-"
    return str(value)


def render(report: Report, fmt: OutputFormat = "json") -> str:
    if fmt == "json":
        return json.dumps(report, ensure_ascii=False, indent=2)
    return "\n".join(_text_lines(report))
