import logging

from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    threads: int = Field(default=1, ge=1, alias="NARYLAB_THREADS")
    budget: int = Field(
        default=81,
        ge=1,
        alias="NARYLAB_BUDGET",
        description="穷举可行性预算，按表格格数 m^n 计。",
    )
    oracle_cap: int = Field(default=4, ge=1, alias="NARYLAB_ORACLE_CAP")
    expected_discrepancies: str | None = Field(
        default=None,
        alias="NARYLAB_EXPECTED_DISCREPANCIES",
        description="预期差异清单路径；不设置时使用随包发布的清单。",
    )
    log_level: str = Field(default="WARNING", alias="LOG_LEVEL")

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
        populate_by_name=True,
    )

    @field_validator("log_level")
    @classmethod
    def _known_level(cls, value: str) -> str:
        level = value.strip().upper()
        if level not in logging.getLevelNamesMapping():
            raise ValueError(f"未知的日志级别 {value!r}")
        return level
