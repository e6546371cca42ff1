"""运算表的两种文件格式。

JSON: {"m": 2, "n": 2, "table": [0, 0, 0, 1]}，可选 "labels" 与 "unplaced"。
紧凑文本: 首行 "m n"，其后为 m^n 个空白分隔的整数（可跨行）；
可选的 "labels: …" 与 "unplaced: …" 行。
"""

import json
import logging
from collections.abc import Sequence
from pathlib import Path

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from narylab.core.models import NaryLabError, OpTable

logger = logging.getLogger(__name__)

_LABELS_PREFIX = "labels:"
_UNPLACED_PREFIX = "unplaced:"


class TableParseError(NaryLabError):
    def __init__(self, message: str, index: int | None = None) -> None:
        super().__init__(message)
        self.index = index


class TableDocument(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    m: int = Field(ge=1)
    n: int = Field(ge=1)
    table: tuple[int, ...]
    labels: tuple[str, ...] | None = None
    unplaced: tuple[int, ...] | None = None

    @model_validator(mode="after")
    def _check_shape(self) -> "TableDocument":
        expected = self.m**self.n
        if len(self.table) != expected:
            raise ValueError(f"期望 {expected} 个值，实际 {len(self.table)} 个")
        for k, v in enumerate(self.table):
            if not 0 <= v < self.m:
                raise ValueError(f"table[{k}] = {v} 超出 0..{self.m - 1}")
        if self.labels is not None:
            if len(self.labels) != self.m:
                raise ValueError(f"labels 应有 {self.m} 个，实际 {len(self.labels)} 个")
            if len(set(self.labels)) != self.m:
                raise ValueError("labels 不得重复")
            for k, label in enumerate(self.labels):
                if not label or any(ch.isspace() for ch in label):
                    raise ValueError(f"labels[{k}] 不得为空或含空白")
        if self.unplaced is not None:
            for u in self.unplaced:
                if not 0 <= u < self.m:
                    raise ValueError(f"未定位元素 {u} 超出 0..{self.m - 1}")
        return self


def _validation_message(exc: ValidationError) -> str:
    parts = []
    for err in exc.errors():
        cause = err.get("ctx", {}).get("error")
        if cause is not None:
            parts.append(str(cause))
        else:
            loc = ".".join(str(p) for p in err["loc"])
            parts.append(f"{loc}: {err['msg']}" if loc else err["msg"])
    return "; ".join(parts)


def _build(data: dict[str, object]) -> TableDocument:
    try:
        return TableDocument.model_validate(data)
    except ValidationError as exc:
        raise TableParseError(_validation_message(exc)) from exc


def _ints(tokens: Sequence[str], what: str) -> list[int]:
    values = []
    for k, token in enumerate(tokens):
        try:
            values.append(int(token))
        except ValueError:
            raise TableParseError(f"{what}[{k}] 不是整数: {token!r}", index=k) from None
    return values


def _parse_text(text: str) -> TableDocument:
    lines = [line.strip() for line in text.splitlines() if line.strip()]
    if not lines:
        raise TableParseError("输入为空")
    header = lines[0].split()
    if len(header) != 2:
        raise TableParseError(f"首行应为 'm n'，实际为 {lines[0]!r}")
    m, n = _ints(header, "header")
    labels: list[str] | None = None
    unplaced: list[int] | None = None
    tokens: list[str] = []
    for line in lines[1:]:
        if line.startswith(_LABELS_PREFIX):
            labels = line[len(_LABELS_PREFIX) :].split()
        elif line.startswith(_UNPLACED_PREFIX):
            unplaced = _ints(line[len(_UNPLACED_PREFIX) :].split(), "unplaced")
        else:
            tokens.extend(line.split())
    data: dict[str, object] = {"m": m, "n": n, "table": _ints(tokens, "table")}
    if labels is not None:
        data["labels"] = labels
    if unplaced is not None:
        data["unplaced"] = unplaced
    return _build(data)


def parse_table(text: str) -> TableDocument:
    if text.lstrip().startswith("{"):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise TableParseError(f"JSON 语法错误: {exc}") from exc
        if not isinstance(data, dict):
            raise TableParseError("JSON 顶层必须是对象")
        return _build(data)
    return _parse_text(text)


def load_table(path: str | Path) -> TableDocument:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise TableParseError(f"无法读取表格文件 {path}: {exc}") from exc
    doc = parse_table(text)
    logger.debug("已读取表格: path=%s m=%s n=%s", path, doc.m, doc.n)
    return doc


def serialize_json(doc: TableDocument) -> str:
    return doc.model_dump_json(exclude_none=True)


def serialize_text(doc: TableDocument) -> str:
    lines = [f"{doc.m} {doc.n}", " ".join(str(v) for v in doc.table)]
    if doc.labels is not None:
        lines.append(" ".join([_LABELS_PREFIX, *doc.labels]))
    if doc.unplaced is not None:
        lines.append(" ".join([_UNPLACED_PREFIX, *(str(u) for u in doc.unplaced)]))
    return "\n".join(lines) + "\n"


def save_table(doc: TableDocument, path: str | Path) -> None:
    """后缀为 .json 时写 JSON，否则写紧凑文本。"""
    target = Path(path)
    text = serialize_json(doc) + "\n" if target.suffix == ".json" else serialize_text(doc)
    try:
        target.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise NaryLabError(f"无法写入表格文件 {path}: {exc}") from exc
    logger.debug("已写出表格: path=%s m=%s n=%s", path, doc.m, doc.n)


def to_table(doc: TableDocument) -> OpTable:
    return OpTable.from_values(doc.m, doc.n, doc.table, frozenset(doc.unplaced or ()))


def from_table(f: OpTable, labels: Sequence[str] | None = None) -> TableDocument:
    """labels 仅在与链大小一致时保留。"""
    kept = tuple(labels) if labels is not None and len(labels) == f.m else None
    return TableDocument(
        m=f.m,
        n=f.arity,
        table=f.values,
        labels=kept,
        unplaced=tuple(sorted(f.unplaced)) if f.unplaced else None,
    )
