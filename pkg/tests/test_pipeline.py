import json

import numpy as np
import pytest

from pavetex.errors import StageError
from pavetex.gridio import DepthMap
from pavetex.pipeline import PipelineConfig, condition, run_features
from pavetex.synth import SynthSpec, generate_texture


def test_config_roundtrip():
    cfg = PipelineConfig()
    assert PipelineConfig.from_json(cfg.to_json()) == cfg
    custom = cfg.with_overrides({"correction.mode": "surface", "seed": 4, "features.binarize.window": 21})
    assert PipelineConfig.from_dict(json.loads(custom.to_json())) == custom
    assert custom.correction.mode == "surface" and custom.features.binarize.window == 21


def test_config_rejects_unknown_keys():
    with pytest.raises(KeyError):
        PipelineConfig.from_dict({"filtr": {}})
    with pytest.raises(KeyError):
        PipelineConfig().with_overrides({"correction.nope": 1})


def test_overrides_ignore_none():
    assert PipelineConfig().with_overrides({"seed": None}) == PipelineConfig()


def test_condition_removes_tilt():
    spec = SynthSpec(width=96, height=96, n_particles=12, radius_range=(5, 9), tilt=(0.004, -0.003),
                     noise_sigma=0.005, seed=1)
    dmap, truth = generate_texture(spec)
    _, _, corrected, _, trend, _ = condition(dmap)
    planted = (truth.clean_map.values - truth.clean_map.values.min()) / np.ptp(truth.clean_map.values)
    assert np.mean(np.abs(corrected.values - planted)) < 0.02
    assert corrected.values.min() == 0 and corrected.values.max() == 1


def test_run_features_recovers_concavity():
    spec = SynthSpec(width=128, height=128, n_particles=20, radius_range=(6, 10), tilt=(0.002, 0.001),
                     noise_sigma=0.01, seed=6)
    dmap, truth = generate_texture(spec)
    res = run_features(dmap)
    assert abs(res.features.p - truth.concave_fraction) < 0.02
    assert len(res.particles) == 20


def test_stage_error_names_stage():
    with pytest.raises(StageError) as info:
        run_features(DepthMap(np.ones((16, 16))))
    assert info.value.stage == "normalize"
