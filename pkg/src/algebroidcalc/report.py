"""Run reports: per-task verdicts, canonical residual rendering, two formats.

The machine format is versioned JSON with sorted keys; it never contains
timing so that identical inputs give byte-identical output.  Timing appears
in the human-readable text format only.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Dict, List, Optional

from .conventions import convention_hash

SCHEMA = "algebroidcalc-report/1"


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    residual_terms: int = 0
    detail: str = ""


@dataclass(frozen=True)
class TaskResult:
    name: str
    params: Dict[str, object]
    checks: tuple

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


@dataclass
class RunReport:
    seed: int
    tasks: List[TaskResult]
    timing_seconds: Optional[float] = field(default=None, compare=False)
    conventions: str = field(default_factory=convention_hash)
    schema: str = SCHEMA

    @property
    def passed(self) -> bool:
        return all(t.passed for t in self.tasks)

    def to_machine(self) -> str:
        doc = {
            "schema": self.schema,
            "conventions": self.conventions,
            "seed": self.seed,
            "passed": self.passed,
            "tasks": [
                {
                    "name": t.name,
                    "params": {k: t.params[k] for k in sorted(t.params)},
                    "passed": t.passed,
                    "checks": [
                        {"name": c.name, "passed": c.passed,
                         "residual_terms": c.residual_terms, "detail": c.detail}
                        for c in t.checks
                    ],
                }
                for t in self.tasks
            ],
        }
        return json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n"

    @staticmethod
    def from_machine(text: str) -> "RunReport":
        doc = json.loads(text)
        if doc.get("schema") != SCHEMA:
            raise ValueError(f"unsupported report schema {doc.get('schema')!r}")
        tasks = [
            TaskResult(
                name=t["name"],
                params=dict(t["params"]),
                checks=tuple(CheckResult(name=c["name"], passed=c["passed"],
                                         residual_terms=c["residual_terms"],
                                         detail=c["detail"])
                             for c in t["checks"]),
            )
            for t in doc["tasks"]
        ]
        return RunReport(seed=doc["seed"], tasks=tasks, conventions=doc["conventions"])

    def to_text(self) -> str:
        lines = [f"algebroidcalc report (seed {self.seed}, conventions {self.conventions})"]
        for t in self.tasks:
            shown = "" if not t.params else " " + " ".join(
                f"{k}={t.params[k]}" for k in sorted(t.params))
            lines.append(f"task {t.name}{shown}")
            for c in t.checks:
                mark = "✓" if c.passed else "✗"
                extra = ""
                if not c.passed and c.residual_terms:
                    extra = f" [{c.residual_terms} residual terms]"
                if c.detail:
                    extra += f" {c.detail}"
                lines.append(f"  {mark} {c.name}{extra}")
        lines.append("overall: " + ("PASS" if self.passed else "FAIL"))
        if self.timing_seconds is not None:
            lines.append(f"elapsed: {self.timing_seconds:.3f}s")
        return "\n".join(lines) + "\n"


def render(report: RunReport, fmt: str = "text") -> str:
    if fmt == "text":
        return report.to_text()
    if fmt == "machine":
        return report.to_machine()
    raise ValueError(f"unknown format {fmt!r}")
