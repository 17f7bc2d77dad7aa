"""Validated configuration and report records."""

import math
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from . import config


# Quadrature and norm parameters
class QuadratureSpec(BaseModel):
    """Budgets for alpha-integrals, tensor quadrature and adaptive refinement."""

    model_config = ConfigDict(frozen=True)

    cutoff: float = 512.0
    nodes_per_unit: int = 16
    pv_exclusion: float = 0.0
    max_nodes: int = 4_000_000
    tensor_nodes: int = Field(default_factory=config.tensor_nodes)
    rtol: float = 1e-7

    @field_validator("cutoff")
    @classmethod
    def _positive_cutoff(cls, value: float) -> float:
        if not value > 0:
            raise ValueError("cutoff must be positive")
        return value

    @field_validator("nodes_per_unit", "tensor_nodes")
    @classmethod
    def _enough_nodes(cls, value: int) -> int:
        if value < 2:
            raise ValueError("node counts must be >= 2")
        return value

    @field_validator("pv_exclusion")
    @classmethod
    def _non_negative_exclusion(cls, value: float) -> float:
        if value < 0:
            raise ValueError("pv_exclusion must be non-negative")
        return value

    @field_validator("rtol")
    @classmethod
    def _positive_rtol(cls, value: float) -> float:
        if not 0 < value < 1:
            raise ValueError("rtol must lie in (0, 1)")
        return value


class NormParams(BaseModel):
    """Indices (s, p, q) of the dyadic norm; q may be ``inf``."""

    model_config = ConfigDict(frozen=True)

    s: float
    p: float = 1.0
    q: float = 4.0

    @field_validator("p", "q")
    @classmethod
    def _at_least_one(cls, value: float) -> float:
        if not value >= 1:
            raise ValueError("p and q must be >= 1")
        return value


class OracleSettings(BaseModel):
    """Tiny-data setup for the physical-space cross check."""

    center: int = 5
    weight: float = 1.0
    t: float = 0.1
    samples: int = 16
    x_range: float = 0.5
    tolerance: float = 1e-4
    window: float = 24.0
    time_nodes: int = 16


class ExperimentConfig(BaseModel):
    """Full description of a sweep; a pure function of this drives every report."""

    ell: int = 1
    p: float = 1.0
    q: float = 4.0
    epsilon: float = 0.1
    delta: float = 1.0
    M: int = 5
    sweep: list[int] = Field(default_factory=lambda: [4, 8, 16, 32])
    times: list[float] = Field(default_factory=list)
    time_factors: list[float] = Field(default_factory=lambda: [2.0, 4.0, 8.0])
    norms: Optional[NormParams] = None
    quadrature: QuadratureSpec = Field(default_factory=QuadratureSpec)
    time_nodes: int = Field(default_factory=config.time_nodes)
    exact_time: bool = True
    prefactor_mode: Literal["pi", "no_pi"] = Field(
        default_factory=config.prefactor_mode
    )
    max_tuples: int = Field(default_factory=config.max_tuples)
    strict_separation: bool = False
    gamma_samples: int = 200
    oracle: OracleSettings = Field(default_factory=OracleSettings)
    output_dir: str = Field(default_factory=config.output_dir)

    @field_validator("sweep")
    @classmethod
    def _nonempty_sweep(cls, value: list[int]) -> list[int]:
        if not value:
            raise ValueError("sweep must contain at least one N")
        if any(n < 1 for n in value):
            raise ValueError("sweep values must be positive")
        return value

    @field_validator("times", "time_factors")
    @classmethod
    def _positive_times(cls, value: list[float]) -> list[float]:
        if any(not t > 0 for t in value):
            raise ValueError("times must be positive")
        return value

    @model_validator(mode="after")
    def _family_constraints(self) -> "ExperimentConfig":
        if self.ell < 1:
            raise ValueError("ell must be >= 1")
        if not 0 < self.epsilon < self.q / (2 * self.ell + 1) - 1:
            raise ValueError("epsilon must satisfy 0 < epsilon < q/(2 ell + 1) - 1")
        if not self.M > 2 * self.ell + 2:
            raise ValueError("M must exceed 2 ell + 2")
        if not self.delta >= 0:
            raise ValueError("delta must be non-negative")
        return self

    @property
    def m(self) -> float:
        """Regularity index (2 ell - 1)/(2 ell + 1) of the supercritical space."""
        return (2 * self.ell - 1) / (2 * self.ell + 1)

    def norm_params(self) -> NormParams:
        """Norm indices, defaulting to s = m with the family's p and q."""
        return self.norms or NormParams(s=self.m, p=self.p, q=self.q)


# Report records
class ComponentSummary(BaseModel):
    """Measured norms of one assembled component f_k at time t."""

    k: int
    t: float
    status: Literal["OK", "CAPACITY"] = "OK"
    J_norm: float = math.nan
    HF_norm: float = math.nan
    HF1_norm: float = math.nan
    HF2_norm: float = math.nan
    f_norm: float = math.nan
    prefactor: float = math.nan
    sum_J: float = math.nan
    sum_L: float = math.nan
    sum_S4: float = math.nan
    J_ratio: float = math.nan
    f_lower: float = math.nan
    triangle_ok: bool = True
    time_window_ok: bool = True
    counts: dict[str, int] = Field(default_factory=dict)
    notes: list[str] = Field(default_factory=list)


class LedgerRow(BaseModel):
    """One (N, t) point of the I_1 ... I_6 ledger."""

    N: int
    t: float
    t_factor: float
    k_N: int
    status: Literal["OK", "CAPACITY"] = "OK"
    norm_phi: float = math.nan
    norm_phi_t: float = math.nan
    norm_EJ: list[float] = Field(default_factory=list)
    norm_HF: list[float] = Field(default_factory=list)
    norm_HF1: float = math.nan
    norm_HF2: float = math.nan
    norm_f_ell: float = math.nan
    f_lower: float = math.nan
    I1: float = math.nan
    I2: float = math.nan
    I3: float = math.nan
    I4: float = math.nan
    I5: float = math.nan
    I6: float = math.nan
    I1_measured: float = math.nan
    I2_measured: float = math.nan
    I3_measured: float = math.nan
    I4_measured: float = math.nan
    I5_measured: float = math.nan
    I6_measured: float = math.nan
    margin_b: float = math.nan
    J_ratio: float = math.nan
    phi_ratio: float = math.nan
    family_hash: str = ""
    components: list[ComponentSummary] = Field(default_factory=list)


class InflationDemo(BaseModel):
    """Outcome of the norm-inflation demonstration."""

    R_target: float
    label: Literal["ACHIEVED", "EXTRAPOLATED", "NOT_EXTRAPOLABLE"]
    best_ratio: float = math.nan
    witness_N: Optional[int] = None
    witness_t: Optional[float] = None
    slope: float = math.nan
    intercept: float = math.nan
    r_squared: float = math.nan
    extrapolated_N: Optional[int] = None


class InflationReport(BaseModel):
    """Rows of a sweep plus trend verdicts."""

    version: str
    ell: int
    config_hash: str
    status: Literal["OK", "FAILED"] = "OK"
    rows: list[LedgerRow] = Field(default_factory=list)
    failures: list[str] = Field(default_factory=list)
    notes: list[str] = Field(default_factory=list)
    demo: Optional[InflationDemo] = None
    timings: dict[str, float] = Field(default_factory=dict, exclude=True)
