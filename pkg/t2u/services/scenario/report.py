import logging
import math
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
from models.association import ClutterModel
from models.scenario import EpochLog, MetricsReport, ScenarioConfig, Scheme, SchemeMetrics
from services.beamforming.metrics import rate_statistics

logger = logging.getLogger(__name__)

CDF_POINTS = 101


def logs_frame(logs: Sequence[EpochLog]) -> pd.DataFrame:
    """Flat table of epoch logs; the beta vector becomes a ';'-joined string."""
    frame = pd.DataFrame([log.model_dump(mode="json") for log in logs])
    if not frame.empty:
        frame["beta"] = frame["beta"].map(lambda beta: ";".join(repr(float(b)) for b in beta))
    return frame


def _rmse(values: pd.Series) -> Optional[float]:
    if values.empty:
        return None
    return float(math.sqrt(float(np.mean(np.square(values.to_numpy(dtype=float))))))


def scheme_metrics(
    scheme: Scheme, logs: Sequence[EpochLog], outage_threshold: float
) -> SchemeMetrics:
    """
    Aggregates one scheme's epoch logs.

    @params
    scheme[Scheme]: Scheme the logs belong to.
    logs[Sequence[EpochLog]]: Every record of every trial.
    outage_threshold[float]: Rate (bps/Hz) below which an epoch counts as an outage.

    @return
    SchemeMetrics: RMSEs, rate statistics and per-epoch series.
    """
    frame = pd.DataFrame([log.model_dump(mode="json") for log in logs])
    stats = rate_statistics(frame["rate"].to_numpy())
    arc = frame[frame["maneuver"] == "arc"]

    associated = frame[frame["best_source"].notna()]
    accuracy = float((associated["best_source"] == 0).mean()) if not associated.empty else None

    volumes = frame[frame["gate_volume"].notna()]
    density = None
    # left empty when no clutter return was ever detected
    if not volumes.empty and volumes["gate_volume"].mean() > 0 and volumes["clutter_count"].mean() > 0:
        clutter = ClutterModel.from_expected_count(
            float(volumes["clutter_count"].mean()), float(volumes["gate_volume"].mean())
        )
        density = clutter.density

    by_epoch = frame.groupby("epoch", sort=True)
    series = by_epoch.agg(
        time=("time", "first"),
        distance_mse=("distance_error", lambda v: float(np.mean(np.square(v)))),
        angle_mse=("angle_error", lambda v: float(np.mean(np.square(v)))),
        mean_rate=("rate", "mean"),
    )

    return SchemeMetrics(
        scheme=scheme,
        num_trials=int(frame["trial"].nunique()),
        num_records=len(frame),
        distance_rmse=_rmse(frame["distance_error"]),
        angle_rmse=_rmse(frame["angle_error"]),
        arc_distance_rmse=_rmse(arc["distance_error"]),
        arc_angle_rmse=_rmse(arc["angle_error"]),
        mean_rate=stats.mean,
        mean_sum_rate=float(frame.groupby(["trial", "epoch"])["rate"].sum().mean()),
        outage_threshold=outage_threshold,
        outage=stats.outage(outage_threshold),
        rate_quantiles=[float(q) for q in stats.quantiles(CDF_POINTS)],
        association_accuracy=accuracy,
        prediction_only_fraction=float(frame["prediction_only"].mean()),
        clutter_density=density,
        times=[float(t) for t in series["time"]],
        distance_rmse_series=[math.sqrt(v) for v in series["distance_mse"]],
        angle_rmse_series=[math.sqrt(v) for v in series["angle_mse"]],
        mean_rate_series=[float(v) for v in series["mean_rate"]],
    )


def build_report(cfg: ScenarioConfig, logs: Dict[Scheme, List[EpochLog]]) -> MetricsReport:
    schemes = {
        scheme.value: scheme_metrics(scheme, scheme_logs, cfg.outage_threshold)
        for scheme, scheme_logs in logs.items()
    }

    for name, metrics in schemes.items():
        logger.info(
            f"{name}: mean rate {metrics.mean_rate:.3f} bps/Hz, "
            f"distance RMSE {metrics.distance_rmse:.3f} m, outage {metrics.outage:.4f}"
        )

    return MetricsReport(seed=cfg.seed, num_trials=cfg.num_trials, schemes=schemes)
