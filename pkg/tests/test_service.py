import json
from pathlib import Path

import pandas as pd
import pytest
from common.errors import ConfigError
from models.scenario import ScenarioConfig, Scheme
from services.scenario.service import SimulationService, parse_schemes, report_json


def test_parse_schemes():
    assert parse_schemes("imm-pda, GENIE") == [Scheme.IMM_PDA, Scheme.GENIE]
    assert parse_schemes(["cv-nn"]) == [Scheme.CV_NN]

    with pytest.raises(ConfigError):
        parse_schemes("IMM-PDA,KALMAN")
    with pytest.raises(ConfigError):
        parse_schemes(" , ")


def test_with_overrides_revalidates():
    cfg = ScenarioConfig()

    assert SimulationService.with_overrides(cfg) is cfg
    assert SimulationService.with_overrides(cfg, seed=9, num_trials=None).seed == 9
    with pytest.raises(ConfigError):
        SimulationService.with_overrides(cfg, num_trials=0)


def test_load_config_errors(tmp_path):
    service = SimulationService(output_dir=str(tmp_path / "out"))
    bad = tmp_path / "bad.json"
    bad.write_text('{"num_users": 1, "colour": "red"}', encoding="utf-8")

    with pytest.raises(ConfigError):
        service.load_config(bad)
    with pytest.raises(ConfigError):
        service.load_config(tmp_path / "missing.json")


def test_load_config_returns_base_dir(tmp_path):
    path = tmp_path / "scenario.json"
    path.write_text(json.dumps({"seed": 4, "scheme": "CV-PDA"}), encoding="utf-8")

    cfg, base_dir = SimulationService(output_dir=str(tmp_path / "out")).load_config(path)

    assert cfg.seed == 4 and cfg.scheme == Scheme.CV_PDA
    assert base_dir == tmp_path.resolve()


def test_compare_writes_outputs(tmp_path, small_scenario):
    out = tmp_path / "out"
    service = SimulationService(output_dir=str(out))

    assert service.last_summary() == {}

    report = service.compare(small_scenario, [Scheme.GENIE, Scheme.IMM_PDA], workers=1, plot=True)

    frame = pd.read_csv(out / "epochs.csv")
    assert len(frame) == 2 * 7
    assert set(frame["scheme"]) == {"GENIE", "IMM-PDA"}
    assert b"\r\n" not in (out / "epochs.csv").read_bytes()

    summary = service.last_summary()
    assert summary == report_json(report)
    assert set(summary["schemes"]) == {"GENIE", "IMM-PDA"}
    assert (out / "rate_cdf.svg").exists()


def test_trajgen_writes_csv(tmp_path):
    spec = tmp_path / "spec.json"
    spec.write_text(
        json.dumps(
            {
                "initial": {"x": 0.0, "y": 10.0, "heading": 0.0},
                "segments": [{"kind": "straight", "duration": 1.5, "speed": 2.0}],
            }
        ),
        encoding="utf-8",
    )
    service = SimulationService(output_dir=str(tmp_path))

    traj = service.trajgen(spec, tmp_path / "traj.csv", dt=0.75)

    assert len(traj) == 3
    lines = (tmp_path / "traj.csv").read_text(encoding="utf-8").splitlines()
    assert lines[0] == "t,x,y,vx,vy,omega"
    assert lines[-1].startswith("1.5,3.0,10.0,2.0,0.0,")

    with pytest.raises(ConfigError):
        service.trajgen(spec, tmp_path / "traj.csv", dt=0.0)


def test_shipped_configs_are_valid(tmp_path):
    config_dir = Path(__file__).resolve().parents[1] / "config"
    service = SimulationService(output_dir=str(tmp_path))

    cfg, _ = service.load_config(config_dir / "default_scenario.json")
    traj = service.trajgen(config_dir / "trajectory_spec.json", tmp_path / "user.csv")

    assert cfg.num_users == 3 and cfg.seed == 2024
    assert len(traj) == 31


def test_repeated_runs_write_identical_bytes(tmp_path, small_scenario):
    outputs = []
    for name in ("first", "second"):
        out = tmp_path / name
        SimulationService(output_dir=str(out)).compare(
            small_scenario, [Scheme.IMM_PDA, Scheme.CV_NN, Scheme.RANDOM], workers=1
        )
        outputs.append(((out / "epochs.csv").read_bytes(), (out / "summary.json").read_bytes()))

    assert outputs[0] == outputs[1]
