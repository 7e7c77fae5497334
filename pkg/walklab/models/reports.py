"""Serializable check and run reports."""

from typing import Any

from pydantic import BaseModel, Field


class VarianceReport(BaseModel):
    """Monte Carlo variance report written by the simulate command."""

    K: int
    h: int
    n: int
    replicas: int
    seed: int
    estimate: float
    std_error: float
    exact_value_numerator: int
    exact_value_denominator: int


class CheckResult(BaseModel):
    """Outcome of one identity checked over a range of parameters."""

    name: str
    checked: int = 0
    passed: bool = True
    counterexample: dict[str, Any] | None = None
    error: str | None = None


class VerificationReport(BaseModel):
    K_max: int
    results: list[CheckResult] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(result.passed for result in self.results)

    @property
    def capacity_failure(self) -> bool:
        return any(result.error == "capacity" for result in self.results)


class GeneratorCheckReport(BaseModel):
    """Zero-drift check of the area under the walk's generator."""

    K: int
    h: int
    paths_checked: int
    violations: list[list[int]] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations


class StepVarianceReport(BaseModel):
    """Conditional second moment of twice the area change, per shape."""

    K: int
    h: int
    shapes_checked: int
    offsets: list[int]
    depends_on_shape_only: bool


class MartingaleCheckReport(BaseModel):
    K: int
    h: int
    n: int
    replicas: int
    coupling_violations: int
    coupling_bound: int
    mean_area_drift: float
    drift_tolerance: float

    @property
    def passed(self) -> bool:
        return self.coupling_violations == 0 and abs(self.mean_area_drift) <= self.drift_tolerance


class FrequencyCheckReport(BaseModel):
    """Chi-square comparison of simulated shape transitions with p(F, G)."""

    K: int
    h: int
    n: int
    statistic: float
    dof: int
    p_value: float
    threshold: float

    @property
    def passed(self) -> bool:
        return self.p_value >= self.threshold


class ErgodicityReport(BaseModel):
    states: int
    reachable: int
    has_self_loops: bool

    @property
    def irreducible(self) -> bool:
        return self.reachable == self.states

    @property
    def aperiodic(self) -> bool:
        return self.has_self_loops


class InequalityReport(BaseModel):
    """Strict inequality P[S_K=1] < P[S_K=0] over even K."""

    K_max: int
    checked: int
    violations: list[int] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations


class LowerBoundReport(BaseModel):
    """sigma^2_{K,0} > 2/(K+2) over even K, with u_K at checkpoints."""

    K_max: int
    first_K_holding: int | None
    violations: list[int] = Field(default_factory=list)
    u_table: dict[int, float] = Field(default_factory=dict)


class LLTConstantReport(BaseModel):
    """Empirical n^{3/2} sup-distance between S_n and its Gaussian approximation."""

    n_min: int
    n_max: int
    per_n: dict[int, float]
    maximum: float


class LimitReport(BaseModel):
    """Lazy-walk diagnostics written by the llt command."""

    llt_constant: LLTConstantReport
    upper_bound: InequalityReport
    lower_bound: LowerBoundReport
