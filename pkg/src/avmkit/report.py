"""Diagnostic findings shared by structural validation, the model checks, and the CLI."""

from dataclasses import dataclass

SEVERITIES = ("error", "warning", "info")
_SEVERITY_RANK = {name: rank for rank, name in enumerate(SEVERITIES)}


@dataclass(frozen=True)
class SourcePos:
    """1-based line/column location inside a model file."""

    line: int
    column: int

    def __str__(self) -> str:
        return f"line {self.line}, col {self.column}"


@dataclass(frozen=True)
class Finding:
    """One diagnostic: a severity, a stable code, the offending element, and detail text."""

    severity: str
    code: str
    subject: str
    detail: str
    position: SourcePos | None = None

    def format(self) -> str:
        where = f" ({self.position})" if self.position is not None else ""
        return f"[{self.severity}] {self.code} {self.subject}: {self.detail}{where}"

    def to_record(self) -> dict:
        pos = None
        if self.position is not None:
            pos = {"line": self.position.line, "column": self.position.column}
        return {
            "severity": self.severity,
            "code": self.code,
            "subject": self.subject,
            "detail": self.detail,
            "position": pos,
        }


def sort_findings(findings) -> list[Finding]:
    """Deterministic ordering: by position, then severity, code, subject."""

    def key(f: Finding):
        pos = (f.position.line, f.position.column) if f.position else (1 << 30, 0)
        return (pos, _SEVERITY_RANK.get(f.severity, 99), f.code, f.subject, f.detail)

    return sorted(findings, key=key)


@dataclass(frozen=True)
class CheckReport:
    """Outcome of one model check: named, with findings; passes iff no error finding."""

    name: str
    findings: tuple[Finding, ...] = ()

    @property
    def passed(self) -> bool:
        return all(f.severity != "error" for f in self.findings)

    @property
    def status(self) -> str:
        return "pass" if self.passed else "fail"

    def format(self, min_severity: str = "warning") -> str:
        rank = _SEVERITY_RANK[min_severity]
        lines = [f"{self.name}: {self.status}"]
        for f in self.findings:
            if _SEVERITY_RANK.get(f.severity, 99) <= rank:
                lines.append(f"  {f.format()}")
        return "\n".join(lines)

    def to_record(self) -> dict:
        return {
            "name": self.name,
            "status": self.status,
            "findings": [f.to_record() for f in self.findings],
        }


class ModelValidationError(Exception):
    """Raised when construction hits one or more error-severity findings."""

    def __init__(self, findings):
        self.findings: tuple[Finding, ...] = tuple(findings)
        errors = [f for f in self.findings if f.severity == "error"]
        head = errors[0] if errors else self.findings[0]
        super().__init__(f"{len(errors)} validation error(s); first: {head.format()}")
