import io
import logging
from typing import Dict

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
from models.scenario import MetricsReport

logger = logging.getLogger(__name__)

matplotlib.rcParams["svg.hashsalt"] = "t2u"


def _to_svg(fig) -> str:
    buffer = io.StringIO()
    fig.savefig(buffer, format="svg", metadata={"Date": None})
    plt.close(fig)
    return buffer.getvalue()


def rmse_figure(report: MetricsReport) -> str:
    fig, (ax_d, ax_a) = plt.subplots(2, 1, figsize=(7, 6), sharex=True)

    for name, metrics in report.schemes.items():
        ax_d.plot(metrics.times, metrics.distance_rmse_series, label=name)
        ax_a.plot(metrics.times, np.degrees(metrics.angle_rmse_series), label=name)

    ax_d.set_ylabel("distance RMSE (m)")
    ax_a.set_ylabel("angle RMSE (deg)")
    ax_a.set_xlabel("time (s)")
    ax_d.legend(fontsize="small")
    ax_d.grid(True, alpha=0.3)
    ax_a.grid(True, alpha=0.3)
    fig.tight_layout()

    return _to_svg(fig)


def rate_figure(report: MetricsReport) -> str:
    fig, ax = plt.subplots(figsize=(7, 4))

    for name, metrics in report.schemes.items():
        ax.plot(metrics.times, metrics.mean_rate_series, label=name)

    ax.set_xlabel("time (s)")
    ax.set_ylabel("mean rate (bps/Hz)")
    ax.legend(fontsize="small")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()

    return _to_svg(fig)


def cdf_figure(report: MetricsReport) -> str:
    fig, ax = plt.subplots(figsize=(7, 4))

    for name, metrics in report.schemes.items():
        quantiles = metrics.rate_quantiles
        ax.step(quantiles, np.linspace(0.0, 1.0, len(quantiles)), where="post", label=name)

    threshold = next(iter(report.schemes.values())).outage_threshold
    ax.axvline(threshold, color="grey", linestyle="--", linewidth=0.8)
    ax.set_xlabel("achievable rate (bps/Hz)")
    ax.set_ylabel("CDF")
    ax.legend(fontsize="small")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()

    return _to_svg(fig)


def render_figures(report: MetricsReport) -> Dict[str, str]:
    """SVG documents keyed by file name."""
    figures = {
        "rmse.svg": rmse_figure(report),
        "rate.svg": rate_figure(report),
        "rate_cdf.svg": cdf_figure(report),
    }
    logger.debug(f"Rendered {len(figures)} figures")
    return figures
