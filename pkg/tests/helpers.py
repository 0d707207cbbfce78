import copy
import json
from pathlib import Path
from typing import Callable, Dict, List, Sequence

import numpy as np

from src.core.models.corpus import FeatureSequence
from src.core.tensor import Tensor, no_grad

TINY_CONFIG: Dict = {
    "seed": 7,
    "synth": {
        "num_speakers": 4,
        "dev_seen_speakers": 1,
        "dev_new_speakers": 1,
        "eval_speakers": 2,
        "feature_dim": 6,
        "turn_frames_min": 20,
        "turn_frames_max": 30,
        "turns_per_recording": 4,
        "speakers_per_recording": 2,
        "train_recordings": 4,
        "dev_recordings": 2,
        "eval_recordings": 2,
        "sigma": 0.05,
    },
    "tdnn": {
        "layers": [
            {"context": [-1, 0, 1], "out_dim": 8},
            {"context": [0], "out_dim": 8},
        ],
        "projection_dim": 8,
    },
    "hornn": {"num_layers": 1, "state_dim": 6, "projection_dim": 8},
    "attention": {"heads": 2, "penalty": {"mu": 0.1, "n_smooth": 1}},
    "combiner": {"fusion_dim": 6, "bottleneck_dim": 4},
    "train": {
        "window_frames": 10,
        "window_shift": 5,
        "learning_rate": 0.01,
        "batch_size": 8,
        "epochs": 1,
        "pretrain_epochs": 1,
    },
    "clustering": {"threshold_grid": [0.3, 0.5, 0.7]},
    "systems": ["tdnn", "hornn", "cvector:consec2"],
}


def tiny_config_dict(**sections) -> Dict:
    """Копия маленькой конфигурации с переопределёнными разделами."""
    data = copy.deepcopy(TINY_CONFIG)
    for name, value in sections.items():
        if isinstance(value, dict) and isinstance(data.get(name), dict):
            data[name].update(value)
        else:
            data[name] = value
    return data


def write_config(path: Path, data: Dict) -> Path:
    path.write_text(json.dumps(data), encoding="utf-8")
    return path


def make_sequence(
    recording_id: str,
    runs: Sequence[tuple],
    dim: int = 4,
    seed: int = 0,
) -> FeatureSequence:
    """
    Запись из серий (диктор, число кадров) со случайными признаками.
    """
    labels: List[str] = [speaker for speaker, count in runs for _ in range(count)]
    features = np.random.default_rng(seed).normal(size=(len(labels), dim))
    return FeatureSequence(recording_id, features, labels)


def numeric_gradients(
    f: Callable[[], Tensor], params: Sequence[Tensor], step: float = 1e-5
) -> List[np.ndarray]:
    """Градиенты центральными разностями; f строит граф заново."""
    grads = []
    with no_grad():
        for p in params:
            flat = p.data.reshape(-1)
            grad = np.zeros_like(flat)
            for i in range(flat.size):
                original = flat[i]
                flat[i] = original + step
                plus = f().item()
                flat[i] = original - step
                minus = f().item()
                flat[i] = original
                grad[i] = (plus - minus) / (2.0 * step)
            grads.append(grad.reshape(p.shape))
    return grads


def assert_gradients_close(
    f: Callable[[], Tensor],
    params: Sequence[Tensor],
    rtol: float = 1e-4,
    atol: float = 1e-8,
) -> None:
    """Сравнить аналитические градиенты с численными поэлементно."""
    for p in params:
        p.zero_grad()
    f().backward()
    analytic = [
        np.zeros_like(p.data) if p.grad is None else p.grad.copy() for p in params
    ]
    for p in params:
        p.zero_grad()
    for a, n in zip(analytic, numeric_gradients(f, params)):
        np.testing.assert_allclose(a, n, rtol=rtol, atol=atol)
