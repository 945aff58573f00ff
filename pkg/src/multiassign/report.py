from dataclasses import dataclass, field


@dataclass
class Report:
    """Outcome of a structural check: an empty violation list means the check passed."""

    violations: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    @property
    def ok(self):
        return not self.violations

    def __bool__(self):
        return self.ok

    def extend(self, other, prefix=""):
        self.violations.extend(prefix + v for v in other.violations)
        self.notes.extend(prefix + v for v in other.notes)
        return self

    def __str__(self):
        head = "ok" if self.ok else f"{len(self.violations)} violation(s)"
        lines = [head] + [f"  - {v}" for v in self.violations]
        lines += [f"  * {note}" for note in self.notes]
        return "\n".join(lines)
