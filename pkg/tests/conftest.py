import json
import os
import time

import numpy as np
import pytest

from gmoments import ExperimentConfig, build_context, run_experiment
from gmoments.rng import derive_seed, normal_rows

CONFIG_DIR = os.path.join(os.path.dirname(__file__), os.pardir, "configs")

# wall time of the I_16 experiment fixture, for the acceptance runtime budget
I16_ELAPSED = [float("nan")]


def config_path(name: str) -> str:
    return os.path.join(CONFIG_DIR, name)


def load_config(name: str) -> ExperimentConfig:
    return ExperimentConfig.from_file(config_path(name))


def seeded_psd(seed: int, d: int, scale: float = 1.0) -> np.ndarray:
    """Deterministic random PSD matrix: A A^T / d from seeded normals."""
    a = normal_rows(seed, d, d)
    return scale * (a @ a.T) / d


def seeded_ints(seed: int, n: int, lo: int, hi: int) -> list[int]:
    """n deterministic integers in [lo, hi] from the counter-based stream."""
    u = normal_rows(seed, n, 1)[:, 0]
    span = hi - lo + 1
    return [lo + int(abs(x) * 1e6) % span for x in u]


@pytest.fixture(scope="session")
def i16_experiment():
    """The symmetric I_16 scaling experiment (shared across test modules)."""
    cfg = load_config("symmetric_i16_p4.json")
    t0 = time.perf_counter()
    ctx = build_context(cfg)
    records = run_experiment(cfg, context=ctx)
    I16_ELAPSED[0] = time.perf_counter() - t0
    return cfg, ctx, records


@pytest.fixture(scope="session")
def blocks4_experiment():
    """The asymmetric independent-blocks scaling experiment."""
    cfg = load_config("asymmetric_blocks4_p4.json")
    ctx = build_context(cfg)
    records = run_experiment(cfg, context=ctx)
    return cfg, ctx, records


def save_config(tmp_path, name: str, payload: dict) -> str:
    path = os.path.join(tmp_path, name)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh)
    return path


__all__ = [
    "config_path",
    "load_config",
    "save_config",
    "seeded_psd",
    "seeded_ints",
    "derive_seed",
]
