import json
import math
from dataclasses import dataclass, field


class DomainError(ValueError):
    """Raised when a formula is evaluated outside its domain."""


class TheoremId:
    """Tags for the bound families a :class:`BoundReport` can carry."""

    STEIN_UNIVARIATE = "stein_univariate"
    STEIN_MULTIVARIATE = "stein_multivariate"
    FIELD = "field_univariate"
    FIELD_MULTIVARIATE = "field_multivariate"
    VOTER = "voter_univariate"
    VOTER_MULTIVARIATE = "voter_multivariate"
    CONTACT = "contact_univariate"
    CONTACT_MULTIVARIATE = "contact_multivariate"

    ALL = (
        STEIN_UNIVARIATE,
        STEIN_MULTIVARIATE,
        FIELD,
        FIELD_MULTIVARIATE,
        VOTER,
        VOTER_MULTIVARIATE,
        CONTACT,
        CONTACT_MULTIVARIATE,
    )


@dataclass(frozen=True)
class BoundReport:
    """A bound value together with the range on which it is valid.

    ``at`` is the block side ``n`` (or window length ``t``) the bound was
    evaluated at; ``applicable`` is ``at >= valid_from``. A report that is not
    applicable must not be compared with an empirical distance.
    ``constant_tracked`` is False for families whose leading constant is
    unknown and was replaced by a caller-supplied value.
    """

    theorem_id: str
    value: float
    valid_from: float
    at: float
    inputs: dict = field(default_factory=dict)
    constant_tracked: bool = True

    def __post_init__(self):
        if self.theorem_id not in TheoremId.ALL:
            raise ValueError(f"unknown theorem id {self.theorem_id!r}")
        if not (self.value >= 0) or math.isnan(self.value):
            raise DomainError(f"bound value must be >= 0, got {self.value}")
        if not (self.valid_from >= 0):
            raise DomainError(f"valid_from must be >= 0, got {self.valid_from}")

    @property
    def applicable(self):
        return self.at >= self.valid_from

    def dominates(self, estimate, se=0.0, n_se=4.0):
        """True iff applicable and ``value >= estimate + n_se * se``."""
        return self.applicable and self.value >= estimate + n_se * se

    def to_dict(self):
        return {
            "theorem_id": self.theorem_id,
            "value": self.value,
            "valid_from": self.valid_from,
            "applicable": self.applicable,
            "constant_tracked": self.constant_tracked,
            "inputs": dict(self.inputs, at=self.at),
        }

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, record):
        inputs = dict(record["inputs"])
        at = inputs.pop("at")
        return cls(
            theorem_id=record["theorem_id"],
            value=record["value"],
            valid_from=record["valid_from"],
            at=at,
            inputs=inputs,
            constant_tracked=record["constant_tracked"],
        )
