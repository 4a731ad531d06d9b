"""Scenario plumbing: spec parsing, result container, deterministic emission."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import ConfigError
from ..serialize import compact_json, spec_hash, write_csv, write_json
from ..tree import TreeStructure


def spec_from_dict(cls, data: dict):
    """Build a spec dataclass from a JSON dict; unknown keys are errors."""
    known = {f.name for f in dataclasses.fields(cls)}
    extra = set(data) - known - {"kind"}
    if extra:
        raise ConfigError(f"unknown config keys for {data.get('kind', cls.__name__)}: "
                          f"{sorted(extra)}")
    kwargs = {k: v for k, v in data.items() if k in known}
    try:
        spec = cls(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid config: {exc}") from exc
    spec.validate()
    return spec


def resolved_config(spec, kind: str) -> dict:
    out = {"kind": kind}
    out.update(dataclasses.asdict(spec))
    return out


@dataclass
class ScenarioResult:
    kind: str
    config: dict                       # fully resolved spec, defaults materialized
    columns: list[str]
    rows: list[tuple]
    summary: dict
    verdicts: dict[str, bool]
    tree: TreeStructure | None = None
    notes: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.verdicts.values())

    def stem(self) -> str:
        return f"{self.kind}-{spec_hash(self.config)}"

    def write(self, outdir: Path) -> tuple[Path, Path]:
        outdir = Path(outdir)
        csv_path = outdir / f"{self.stem()}.csv"
        json_path = outdir / f"{self.stem()}.json"
        write_csv(csv_path, self.columns, self.rows,
                  preamble=[f"config {compact_json(self.config)}"])
        payload = {
            "kind": self.kind,
            "config": self.config,
            "summary": self.summary,
            "verdicts": self.verdicts,
            "notes": self.notes,
        }
        if self.tree is not None:
            payload["tree"] = self.tree.to_dict()
        write_json(json_path, payload)
        return csv_path, json_path

    def verdict_lines(self) -> list[str]:
        width = max((len(k) for k in self.verdicts), default=0)
        return [f"[{'PASS' if ok else 'FAIL'}] {name.ljust(width)}"
                for name, ok in sorted(self.verdicts.items())]
