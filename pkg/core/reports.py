"""
Report records shared by every verification suite
"""
from dataclasses import dataclass, field


@dataclass
class Report:
    """Outcome of a whole-matrix check such as the Yang-Baxter equation"""
    check: str
    N: int
    residual_nonzero_count: int
    elapsed_ms: float = 0.0
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.residual_nonzero_count == 0

    def as_dict(self, timing: bool = True) -> dict:
        data = {
            'check': self.check,
            'N': self.N,
            'residual_nonzero_count': self.residual_nonzero_count,
            'status': 'ok' if self.passed else 'failed',
            'details': self.details,
        }
        if timing:
            data['elapsed_ms'] = round(self.elapsed_ms, 3)
        return data


@dataclass
class RelationReport:
    """
    Outcome of one operator identity checked coefficient by coefficient.

    checked_dim counts the source states (or coefficients) that were compared,
    truncation_guard is the largest source degree at which the identity was asserted.
    """
    relation: str
    parameters: dict = field(default_factory=dict)
    residual_nonzero: int = 0
    checked_dim: int = 0
    truncation_guard: int = 0
    failures: list = field(default_factory=list)
    elapsed_ms: float = 0.0
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.residual_nonzero == 0

    def record_failure(self, description: str, limit: int = 20):
        self.residual_nonzero += 1
        if len(self.failures) < limit:
            self.failures.append(description)

    def note_capped(self, capped):
        """Records (limit, total) when the checked source states were cut at a limit"""
        if capped:
            self.details['states_capped'] = capped

    def as_dict(self, timing: bool = True) -> dict:
        data = {
            'relation': self.relation,
            'parameters': self.parameters,
            'residual_nonzero': self.residual_nonzero,
            'checked_dim': self.checked_dim,
            'truncation_guard': self.truncation_guard,
            'status': 'ok' if self.passed else 'failed',
            'failures': self.failures,
            'details': self.details,
        }
        if timing:
            data['elapsed_ms'] = round(self.elapsed_ms, 3)
        return data


def all_passed(reports) -> bool:
    return all(r.passed for r in reports)
