import pathlib
import sys

import pytest

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parent))

import csimotion as cm

FIXTURES = pathlib.Path(__file__).resolve().parent / "fixtures"


@pytest.fixture(scope="session")
def fixtures_dir() -> pathlib.Path:
    return FIXTURES


@pytest.fixture(scope="session")
def golden3_pcap() -> bytes:
    return (FIXTURES / "golden3.pcap").read_bytes()


@pytest.fixture(scope="session")
def golden3_csicap() -> bytes:
    return (FIXTURES / "golden3.csicap").read_bytes()


@pytest.fixture(scope="session")
def smap80():
    return cm.default_subcarrier_map(80)


@pytest.fixture(scope="session")
def env_profile():
    """Base gain profile of the synthetic test environment."""
    return cm.synth.environment_profile(1)


def calibration_series(env_profile, smap, noise_floor=0.02, seed0=100, count=5):
    series = []
    for i in range(count):
        script = cm.SynthScript(
            duration_s=10.0,
            seed=seed0 + i,
            base_profile=env_profile,
            noise_floor=noise_floor,
        )
        capture, _ = cm.generate(script)
        series.append(cm.pcc_series(cm.preprocess_pipeline(capture, smap)))
    return series


@pytest.fixture(scope="session")
def calibration(env_profile, smap80):
    """Profile calibrated on five synthetic empty-room captures."""
    return cm.calibrate(calibration_series(env_profile, smap80), "synthetic-env-1")
