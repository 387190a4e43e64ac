"""Pass/fail reports shared by the checkers and the CLI."""
from __future__ import annotations

from dataclasses import dataclass, field


@dataclass
class Check:
    """One measured quantity compared against a threshold.

    ``relation`` is ``"<="`` (value must not exceed threshold) or ``">"``
    (value must exceed threshold).
    """

    name: str
    value: float
    threshold: float
    relation: str = "<="

    @property
    def passed(self) -> bool:
        if self.relation == "<=":
            return bool(self.value <= self.threshold)
        if self.relation == ">":
            return bool(self.value > self.threshold)
        raise ValueError(f"unknown relation {self.relation!r}")

    def to_dict(self) -> dict:
        return {
            "value": float(self.value),
            "threshold": float(self.threshold),
            "relation": self.relation,
            "pass": self.passed,
        }


@dataclass
class Report:
    """Ordered collection of checks plus free-form informational values."""

    name: str
    checks: list = field(default_factory=list)
    info: dict = field(default_factory=dict)

    def add(self, name: str, value: float, threshold: float, relation: str = "<=") -> Check:
        c = Check(name, float(value), float(threshold), relation)
        self.checks.append(c)
        return c

    def extend(self, other: "Report", prefix: str = "") -> None:
        for c in other.checks:
            self.checks.append(Check(prefix + c.name, c.value, c.threshold, c.relation))
        for k, v in other.info.items():
            self.info[prefix + k] = v

    def __getitem__(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failures(self) -> list:
        return [c for c in self.checks if not c.passed]

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "pass": self.passed,
            "checks": {c.name: c.to_dict() for c in self.checks},
            "info": dict(self.info),
        }
