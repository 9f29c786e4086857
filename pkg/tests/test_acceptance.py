import os

import pandas as pd
import pytest
from models.scenario import ScenarioConfig, Scheme
from services.scenario.report import build_report, logs_frame
from services.scenario.simulator import simulate_schemes

pytestmark = pytest.mark.slow

TRIALS = 200


@pytest.fixture(scope="module")
def default_run():
    cfg = ScenarioConfig(seed=2024, num_trials=TRIALS)
    logs = simulate_schemes(cfg, list(Scheme), workers=os.cpu_count() or 1)
    return logs, build_report(cfg, logs)


def test_mean_rate_ordering(default_run):
    _, report = default_run
    rate = report.mean_rates()
    ablations = (rate["IMM-NN"], rate["CV-PDA"])

    assert rate["GENIE"] > rate["IMM-PDA"] > max(ablations)
    assert min(ablations) > rate["CV-NN"] > rate["RANDOM"]
    assert all(rate["GENIE"] >= value for value in rate.values())


def test_imm_pda_approaches_genie(default_run):
    _, report = default_run
    rate = report.mean_rates()

    assert rate["IMM-PDA"] >= 0.7 * rate["GENIE"]


def test_imm_pda_tracks_the_arc_better_than_cv_nn(default_run):
    _, report = default_run
    imm, cv = report.schemes["IMM-PDA"], report.schemes["CV-NN"]

    assert imm.arc_distance_rmse < cv.arc_distance_rmse
    assert imm.arc_angle_rmse < cv.arc_angle_rmse


def test_near_field_beams_cut_outage(default_run):
    _, report = default_run
    assert report.schemes["IMM-PDA"].outage < report.schemes["IMM-PDA-FF"].outage


def test_no_epoch_beats_genie(default_run):
    logs, _ = default_run
    keys = ["trial", "epoch", "user"]
    genie = logs_frame(logs[Scheme.GENIE]).set_index(keys)["snr"]

    for scheme in Scheme:
        snr = logs_frame(logs[scheme]).set_index(keys)["snr"]
        ratio = pd.concat([snr, genie], axis=1, keys=["scheme", "genie"])
        assert (ratio["scheme"] <= ratio["genie"] * (1 + 1e-9)).all()
