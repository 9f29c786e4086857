import math
from enum import Enum
from typing import Dict, List, Literal, Optional

from models.array import ArrayConfig
from models.association import AssociationConfig
from models.filter import ImmConfig
from models.radio import RadioParams
from models.sensing import DetectorConfig, MeasurementNoiseConfig
from pydantic import BaseModel, ConfigDict, Field, model_validator

SegmentKind = Literal["straight", "arc"]


class Segment(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    kind: SegmentKind
    duration: float = Field(gt=0)
    speed: float = Field(ge=0)
    turn_rate: float = 0.0

    @model_validator(mode="after")
    def straight_has_no_turn(self):
        if self.kind == "straight" and self.turn_rate != 0.0:
            raise ValueError("straight segments cannot carry a turn_rate")
        return self


class InitialPose(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    x: float
    y: float
    heading: float = 0.0


class TrajectorySpec(BaseModel):
    """Piecewise straight / constant-turn path starting from an initial pose."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    initial: InitialPose
    segments: List[Segment] = Field(min_length=1)

    @property
    def duration(self) -> float:
        return sum(segment.duration for segment in self.segments)


class UserSpec(BaseModel):
    """A user follows either an inline trajectory spec or a trajectory CSV file."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    trajectory: Optional[TrajectorySpec] = None
    trajectory_file: Optional[str] = None

    @model_validator(mode="after")
    def exactly_one_source(self):
        if (self.trajectory is None) == (self.trajectory_file is None):
            raise ValueError("set exactly one of trajectory or trajectory_file")
        return self


class ClutterPlacement(BaseModel):
    """
    Where clutter vehicles sit relative to their user, in the user's heading frame.

    A vehicle in the user's own lane (lateral offset 0) keeps at least
    ``min_longitudinal_gap`` meters of headway.
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    lateral_offsets: List[float] = Field(default=[-3.5, 0.0, 3.5], min_length=1)
    longitudinal_range: float = Field(default=10.0, ge=0)
    min_longitudinal_gap: float = Field(default=5.0, ge=0)
    speed_jitter: float = Field(default=1.0, ge=0)

    @model_validator(mode="after")
    def gap_fits_range(self):
        if 0.0 in self.lateral_offsets and self.min_longitudinal_gap > self.longitudinal_range:
            raise ValueError("min_longitudinal_gap exceeds longitudinal_range for same-lane clutter")
        return self


class Scheme(str, Enum):
    IMM_PDA = "IMM-PDA"
    IMM_NN = "IMM-NN"
    CV_PDA = "CV-PDA"
    CV_NN = "CV-NN"
    GENIE = "GENIE"
    RANDOM = "RANDOM"
    IMM_PDA_FF = "IMM-PDA-FF"

    @property
    def tracked(self) -> bool:
        return self not in (Scheme.GENIE, Scheme.RANDOM)

    @property
    def single_model(self) -> bool:
        return self in (Scheme.CV_PDA, Scheme.CV_NN)

    @property
    def association(self) -> Optional[Literal["pda", "nn"]]:
        if not self.tracked:
            return None
        return "nn" if self in (Scheme.IMM_NN, Scheme.CV_NN) else "pda"

    @property
    def beam_mode(self) -> Literal["near", "far"]:
        return "far" if self == Scheme.IMM_PDA_FF else "near"


class ScenarioConfig(BaseModel):
    """
    Everything that determines a simulation run. Loaded from JSON; unknown keys are
    rejected at every level.
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    num_users: int = Field(default=3, ge=1)
    clutter_per_user: int = Field(default=3, ge=0)
    epoch_interval: float = Field(default=0.75, gt=0)
    duration: Optional[float] = Field(default=None, gt=0)

    array: ArrayConfig = Field(default_factory=ArrayConfig)
    radio: RadioParams = Field(default_factory=RadioParams)
    detector: DetectorConfig = Field(default_factory=DetectorConfig)
    noise: MeasurementNoiseConfig = Field(default_factory=MeasurementNoiseConfig)
    imm: ImmConfig = Field(default_factory=ImmConfig)
    association: AssociationConfig = Field(default_factory=AssociationConfig)
    clutter: ClutterPlacement = Field(default_factory=ClutterPlacement)

    users: Optional[List[UserSpec]] = None

    scheme: Scheme = Scheme.IMM_PDA
    seed: int = Field(default=0, ge=0, lt=2**64)
    num_trials: int = Field(default=1, ge=1)
    outage_threshold: float = Field(default=4.0, ge=0)
    # consecutive failed epochs (prediction-only or rate below outage_threshold) that
    # trigger re-acquisition from initial access; 0 never re-acquires
    beam_failure_epochs: int = Field(default=2, ge=0)

    @model_validator(mode="after")
    def users_match_count(self):
        if self.users is not None and len(self.users) != self.num_users:
            raise ValueError(f"num_users is {self.num_users} but {len(self.users)} users are given")
        return self


class EpochLog(BaseModel):
    """One row of epochs.csv: a single user at a single epoch of a single trial."""

    scheme: Scheme
    trial: int
    epoch: int
    time: float
    user: int
    maneuver: str

    true_x: float
    true_y: float
    true_vx: float
    true_vy: float
    true_omega: float

    pred_x: float
    pred_y: float
    est_x: float
    est_y: float

    distance_error: float
    angle_error: float

    measurement_count: int
    clutter_count: int
    beta: List[float] = []
    best_source: Optional[int] = None
    prediction_only: bool = False
    reacquired: bool = False
    gate_volume: Optional[float] = None

    rho_cv: Optional[float] = None
    rho_ct: Optional[float] = None

    snr: float
    rate: float


class SchemeMetrics(BaseModel):
    scheme: Scheme
    num_trials: int
    num_records: int

    distance_rmse: float
    angle_rmse: float
    arc_distance_rmse: Optional[float] = None
    arc_angle_rmse: Optional[float] = None

    mean_rate: float
    mean_sum_rate: float
    outage_threshold: float
    outage: float
    rate_quantiles: List[float]

    association_accuracy: Optional[float] = None
    prediction_only_fraction: float = 0.0
    clutter_density: Optional[float] = None

    times: List[float]
    distance_rmse_series: List[float]
    angle_rmse_series: List[float]
    mean_rate_series: List[float]


class MetricsReport(BaseModel):
    """Per-scheme aggregates written to summary.json."""

    seed: int
    num_trials: int
    schemes: Dict[str, SchemeMetrics]

    def mean_rates(self) -> Dict[str, float]:
        return {name: metrics.mean_rate for name, metrics in self.schemes.items()}


def default_epoch_count(duration: float, dt: float) -> int:
    """Number of epochs t = 0, dt, 2 dt, ... that fit within ``duration``."""
    return int(math.floor(duration / dt + 1e-9)) + 1
