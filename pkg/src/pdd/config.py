from __future__ import annotations

from dataclasses import asdict, dataclass

from pdd.association import FORMULAS

# two-sided normal quantiles
TAU_PRESETS = {"95%": 1.96, "85%": 1.44, "80%": 1.28}
SUBGROUP_MODES = ("components", "cliques")
FORMAT_VERSION = "1.0"


def parse_tau(text: str | float) -> float:
    """Accept a number or one of the named confidence presets ("95%", "85%", "80%")."""
    if isinstance(text, str) and text.strip() in TAU_PRESETS:
        return TAU_PRESETS[text.strip()]
    return float(text)


@dataclass(frozen=True)
class AnalysisConfig:
    tau: float = 1.96
    max_ds: int = 5
    formula: str = "standard"
    subgroups: str = "components"

    def __post_init__(self):
        if not self.tau > 0:
            raise ValueError(f"tau must be positive, got {self.tau}")
        if self.max_ds < 1:
            raise ValueError(f"max_ds must be >= 1, got {self.max_ds}")
        if self.formula not in FORMULAS:
            raise ValueError(f"formula must be one of {FORMULAS}")
        if self.subgroups not in SUBGROUP_MODES:
            raise ValueError(f"subgroups must be one of {SUBGROUP_MODES}")

    def to_dict(self) -> dict:
        return asdict(self)
