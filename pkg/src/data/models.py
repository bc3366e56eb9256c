from enum import Enum
from typing import Any

from pydantic import BaseModel, ConfigDict, Field, model_validator

from core.model import default_t_max, optimal_c, variance_factor

SPEC_VERSION = "1.0"
UINT64_MAX = 2**64 - 1


class TimeMode(str, Enum):
    """Time model of the walk"""
    DISCRETE = "discrete"
    BROWNIAN = "brownian"


class StreamRole(str, Enum):
    """Independent noise substreams of one trial"""
    V = "V"
    W = "W"
    BRIDGE_X = "BRIDGE_X"
    BRIDGE_XHAT = "BRIDGE_XHAT"

    @property
    def index(self) -> int:
        return list(StreamRole).index(self)


class LowerBoundVariant(str, Enum):
    """Argument of Q in the lower bound: as printed, or with the proof's variance"""
    PRINTED = "printed"
    VARIANCE = "variance"


class Verdict(str, Enum):
    INSIDE_BRACKET = "inside_bracket"
    BELOW_LOWER = "below_lower"
    ABOVE_UPPER = "above_upper"
    INVALID_CENSORING = "invalid_censoring"
    NOT_APPLICABLE = "not_applicable"


class WalkParams(BaseModel):
    """Problem instance: drift s, noise scale eps, level l, time mode."""
    model_config = ConfigDict(frozen=True)

    s: float = Field(ge=0, allow_inf_nan=False)
    eps: float = Field(ge=0, allow_inf_nan=False)
    l: float = Field(ge=0, allow_inf_nan=False)
    mode: TimeMode = TimeMode.DISCRETE
    dt: float = Field(default=1.0, gt=0, allow_inf_nan=False)
    t_max: int = Field(ge=1)
    # Per-step bridge crossing draws in brownian mode
    bridge: bool = True

    @model_validator(mode="before")
    @classmethod
    def _resolve_step_and_horizon(cls, data: Any) -> Any:
        if not isinstance(data, dict):
            return data
        data = dict(data)
        mode = data.get("mode", TimeMode.DISCRETE)
        if mode in (TimeMode.DISCRETE, TimeMode.DISCRETE.value):
            # The discrete walk moves in unit steps whatever dt says
            data["dt"] = 1.0
        if data.get("t_max") is None:
            try:
                data["t_max"] = default_t_max(float(data["s"]), float(data["l"]), float(data.get("dt", 1.0)))
            except (KeyError, TypeError, ValueError, ZeroDivisionError):
                data.pop("t_max", None)
        return data

    @property
    def step(self) -> float:
        return self.dt

    @property
    def horizon(self) -> float:
        """Censoring sentinel time."""
        return self.t_max * self.dt


class EstimatorConfig(BaseModel):
    """Tracking coefficient c of X_hat^(c)_t = st + c(Y_t - st)."""
    model_config = ConfigDict(frozen=True)

    c: float = Field(ge=0, allow_inf_nan=False)
    eps: float = Field(ge=0, allow_inf_nan=False)

    @classmethod
    def optimal(cls, eps: float) -> "EstimatorConfig":
        return cls(c=optimal_c(eps), eps=eps)

    @property
    def c_bar(self) -> float:
        return optimal_c(self.eps)

    @property
    def variance(self) -> float:
        return variance_factor(self.c, self.eps)


class NoiseStream(BaseModel):
    """Address of one counter-based Gaussian substream."""
    model_config = ConfigDict(frozen=True)

    master_seed: int = Field(ge=0, le=UINT64_MAX)
    trial_index: int = Field(ge=0)
    role: StreamRole = StreamRole.V


class PathSpec(BaseModel):
    """Generic walk S_t = step_mean * t + step_std * sum(Z_i) and its crossing level."""
    model_config = ConfigDict(frozen=True)

    step_mean: float = Field(allow_inf_nan=False)
    step_std: float = Field(ge=0, allow_inf_nan=False)
    level: float = Field(ge=0, allow_inf_nan=False)


class PassageResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    time: float
    overshoot: float
    censored: bool
    steps: int


class TrialOutcome(BaseModel):
    """One paired simulation of (tau, eta) on a shared noise realization."""
    model_config = ConfigDict(frozen=True)

    trial_index: int
    tau: float
    eta: float
    overshoot_x: float = 0.0
    overshoot_xhat: float = 0.0
    censored_tau: bool = False
    censored_eta: bool = False

    @property
    def abs_dev(self) -> float:
        return abs(self.eta - self.tau)


class RegimeCheck(BaseModel):
    q: float
    drift_regime: float
    noise_regime: float
    ratio_ok: bool


class HypothesesOk(BaseModel):
    upper: bool = False
    lower: bool = False
    main_term: bool = False


class BoundReport(BaseModel):
    """Evaluated bounds for one parameter set; None where a theorem does not apply."""
    mode: TimeMode
    variant: LowerBoundVariant = LowerBoundVariant.PRINTED
    upper: float | None = None
    lower: float | None = None
    lower_best_n: int | None = None
    main_term: float | None = None
    hypotheses_ok: HypothesesOk = Field(default_factory=HypothesesOk)
    failures: list[str] = Field(default_factory=list)
    regime: RegimeCheck | None = None
    estimate_c0: float | None = None
    estimate_c1: float | None = None
    eta_minus_tau_floor: float | None = None


class ExperimentSummary(BaseModel):
    params: WalkParams
    c: float
    n_trials: int
    n_censored: int
    censored_fraction: float
    mean_abs_dev: float | None = None
    std_abs_dev: float | None = None
    ci_halfwidth_abs_dev: float | None = None
    mean_dev: float | None = None
    ci_halfwidth_mean_dev: float | None = None
    mean_pos_dev: float | None = None
    prob_eta_early: float | None = None
    mean_overshoot: float | None = None
    mean_sq_overshoot: float | None = None
    mean_tau: float | None = None
    bound_report: BoundReport
    verdict: Verdict


class SweepRow(BaseModel):
    row_index: int
    l: float
    s: float
    eps: float
    c: float | None = None
    mode: TimeMode = TimeMode.DISCRETE
    summary: ExperimentSummary | None = None
    ratio_to_main_term: float | None = None
    error: str | None = None


class TailCheckResult(BaseModel):
    h: float
    n_trials: int
    times: list[float]
    survival: list[float]
    survival_oracle: list[float]
    survival_se: list[float]
    within_3se: list[bool]
    slope: float
    slope_stderr: float
    fit_window: tuple[float, float]
    low_survivors: bool
    truncated_sqrt_mean: list[float]
    truncated_sqrt_oracle: list[float]


class OvershootSummary(BaseModel):
    spec: PathSpec
    n_trials: int
    n_censored: int
    mean_overshoot: float
    se_overshoot: float
    mean_sq_overshoot: float
    se_sq_overshoot: float
    mean_time: float
    se_time: float
    mean_bound: float
    moment_bound: float
    wald_bracket: tuple[float, float]
    mean_ok: bool
    moment_ok: bool
    wald_ok: bool
    # Lemma-type quantities on |s*mu - l|, (s*mu - l)_+ and (S_mu - s*mu)_+
    mean_abs_time_dev: float
    se_abs_time_dev: float
    mean_pos_time_dev: float
    se_pos_time_dev: float
    mean_pos_noise: float
    se_pos_noise: float
    lemma_bounds: tuple[float, float, float] | None = None
    lemma_ok: bool | None = None


class KsCheckResult(BaseModel):
    statistic: float
    n: int
    n_censored: int
    mean_tau: float
    oracle_mean: float


class RunConfig(BaseModel):
    """Resolved configuration of one CLI invocation."""
    s: float = Field(ge=0, allow_inf_nan=False)
    eps: float = Field(ge=0, allow_inf_nan=False)
    l: float = Field(ge=0, allow_inf_nan=False)
    mode: TimeMode = TimeMode.DISCRETE
    dt: float = Field(default=1.0, gt=0)
    t_max: int | None = Field(default=None, ge=1)
    bridge: bool = True
    c: float | str = "auto"
    n_trials: int = Field(default=10_000, ge=100)
    master_seed: int = Field(ge=0, le=UINT64_MAX)
    threads: int | None = Field(default=None, ge=1)
    lower_bound_variant: LowerBoundVariant = LowerBoundVariant.PRINTED
    output_dir: str | None = None
    summary_path: str | None = None
    per_trial_path: str | None = None

    @model_validator(mode="after")
    def _check_c(self) -> "RunConfig":
        if isinstance(self.c, str) and self.c != "auto":
            raise ValueError(f"c must be 'auto' or a real >= 0, got {self.c!r}")
        if isinstance(self.c, float) and self.c < 0:
            raise ValueError(f"c must be >= 0, got {self.c}")
        return self

    def walk_params(self) -> WalkParams:
        return WalkParams(s=self.s, eps=self.eps, l=self.l, mode=self.mode, dt=self.dt, t_max=self.t_max, bridge=self.bridge)

    def estimator(self) -> EstimatorConfig:
        if self.c == "auto":
            return EstimatorConfig.optimal(self.eps)
        return EstimatorConfig(c=float(self.c), eps=self.eps)
