from enum import Enum
from pathlib import Path
from typing import Optional

from pydantic import BaseModel, Field, model_validator

from core.models import (
    ChiMode,
    CompileStats,
    ExponentialSeq,
    Gateset,
    GroupMode,
    GroupPartition,
    HamiltonianSpec,
    RMode,
    TSParams,
    VerificationResult,
)


class PipelineStage(str, Enum):
    PARSE = "parse"
    SORT = "sort"
    PARAMETERS = "parameters"
    TROTTER = "trotter"
    CIRCUIT = "circuit"
    SCHEDULE = "schedule"
    VERIFY = "verify"
    DONE = "done"


class RunConfig(BaseModel):
    """Validated options for one compile invocation; 0 for r or chi means automatic."""

    hamiltonian_path: Optional[Path] = None
    n: Optional[int] = Field(default=None, ge=1)
    t: float = Field(gt=0)
    epsilon: float = Field(gt=0)
    r: int = Field(default=0, ge=0)
    chi: int = Field(default=0, ge=0)
    gateset: Gateset = Gateset.CONTINUOUS
    group_mode: GroupMode = GroupMode.COMMUTING
    r_mode: RMode = RMode.RIGOROUS
    chi_mode: ChiMode = ChiMode.DEFAULT
    circuit_path: Optional[Path] = None
    stats_path: Optional[Path] = None
    seed: int = 0
    allow_zero: bool = False
    doubled_r: bool = False
    stats: bool = True
    verify: bool = False
    layered: bool = False
    record: bool = False
    sk_max_length: Optional[int] = Field(default=None, ge=1)

    @model_validator(mode="after")
    def _check_r_mode(self) -> "RunConfig":
        if self.r_mode is RMode.HEURISTIC and self.chi > 2:
            raise ValueError("heuristic r is only defined for chi in {1, 2}")
        return self


class CompileContext(BaseModel):
    # Config driving the run
    config: RunConfig

    # Stage tracking (used for log prefixes and error reports)
    stage: PipelineStage = PipelineStage.PARSE

    # Stage outputs
    spec: Optional[HamiltonianSpec] = None
    sorted_spec: Optional[HamiltonianSpec] = None
    partition: Optional[GroupPartition] = None
    params: Optional[TSParams] = None
    sequence: Optional[ExponentialSeq] = None
    sk_tolerance: Optional[float] = None
    verification: Optional[VerificationResult] = None
    stats: Optional[CompileStats] = None

    # User-visible warnings collected along the way (copied into the stats report)
    warnings: list[str] = Field(default_factory=list)

    def advance(self, stage: PipelineStage) -> None:
        self.stage = stage
