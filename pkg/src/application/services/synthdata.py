"""
Детерминированный синтетический корпус нескольких дикторов.

Средние дикторов лежат на единичной сфере с минимальным попарным углом,
кадры x(t) = normalize(mean + ε(t)) с шумом AR(1)
ε(t) = ρ·ε(t−1) + √(1−ρ²)·η, η ~ N(0, σ²I).
"""

from typing import Dict, List

import numpy as np

from src.application.inputs.experiment import SynthConfig
from src.core.config import config
from src.core.exceptions import DataError
from src.core.logging import get_logger
from src.core.models.corpus import Corpus, CorpusSplit, FeatureSequence

logger = get_logger(__name__)

SPLITS = ("train", "dev", "eval")


def sample_speaker_means(
    count: int,
    dim: int,
    min_angle_deg: float,
    rng: np.random.Generator,
    max_rejections: int = 10000,
) -> np.ndarray:
    """
    Единичные векторы с попарным углом не меньше min_angle_deg.

    :raises DataError: если за max_rejections отказов набрать count
        векторов не удалось
    """
    max_cos = np.cos(np.deg2rad(min_angle_deg))
    means: List[np.ndarray] = []
    rejections = 0
    while len(means) < count:
        v = rng.standard_normal(dim)
        v /= np.linalg.norm(v)
        if all(float(v @ m) <= max_cos + 1e-12 for m in means):
            means.append(v)
            continue
        rejections += 1
        if rejections >= max_rejections:
            raise DataError(
                f"Не удалось разместить {count} дикторов в {dim} измерениях "
                f"с углом ≥ {min_angle_deg}° за {max_rejections} попыток"
            )
    return np.stack(means)


def _ar1_noise(
    frames: int, dim: int, sigma: float, rho: float, rng: np.random.Generator
) -> np.ndarray:
    eta = rng.standard_normal((frames, dim)) * sigma
    noise = np.empty_like(eta)
    noise[0] = eta[0]
    innovation = np.sqrt(1.0 - rho**2)
    for t in range(1, frames):
        noise[t] = rho * noise[t - 1] + innovation * eta[t]
    return noise


def synthesize_recording(
    recording_id: str,
    speakers: List[str],
    means: Dict[str, np.ndarray],
    cfg: SynthConfig,
    rng: np.random.Generator,
) -> FeatureSequence:
    """
    Запись из чередующихся реплик выбранных дикторов; соседние реплики
    принадлежат разным дикторам, если дикторов больше одного.
    """
    labels: List[str] = []
    previous = None
    for _ in range(cfg.turns_per_recording):
        candidates = [s for s in speakers if s != previous] or speakers
        speaker = candidates[int(rng.integers(len(candidates)))]
        length = int(rng.integers(cfg.turn_frames_min, cfg.turn_frames_max + 1))
        labels.extend([speaker] * length)
        previous = speaker

    clean = np.stack([means[label] for label in labels])
    frames = clean + _ar1_noise(len(labels), cfg.feature_dim, cfg.sigma, cfg.rho, rng)
    frames /= np.linalg.norm(frames, axis=1, keepdims=True)
    return FeatureSequence(
        recording_id=recording_id,
        features=frames,
        labels=labels,
        frame_period_s=config.FRAME_PERIOD_S,
    )


def _speaker_ids(start: int, count: int) -> List[str]:
    return [f"spk{i:03d}" for i in range(start, start + count)]


def generate_corpus(cfg: SynthConfig) -> Corpus:
    """
    Сгенерировать train/dev/eval.

    dev = dev_seen_speakers дикторов из train плюс dev_new_speakers новых;
    дикторы eval не встречаются ни в train, ни в dev.

    :param cfg: Параметры корпуса
    :return: Corpus
    """
    rng = np.random.default_rng(cfg.seed)
    train_ids = _speaker_ids(0, cfg.num_speakers)
    new_dev_ids = _speaker_ids(cfg.num_speakers, cfg.dev_new_speakers)
    eval_ids = _speaker_ids(cfg.num_speakers + cfg.dev_new_speakers, cfg.eval_speakers)
    all_ids = train_ids + new_dev_ids + eval_ids

    vectors = sample_speaker_means(
        len(all_ids), cfg.feature_dim, cfg.min_angle_deg, rng, cfg.max_rejections
    )
    means = dict(zip(all_ids, vectors))

    seen = sorted(
        rng.choice(train_ids, size=cfg.dev_seen_speakers, replace=False).tolist()
    )
    pools = {"train": train_ids, "dev": seen + new_dev_ids, "eval": eval_ids}
    counts = {
        "train": cfg.train_recordings,
        "dev": cfg.dev_recordings,
        "eval": cfg.eval_recordings,
    }

    splits = {}
    for name in SPLITS:
        pool = pools[name]
        per_recording = min(cfg.speakers_per_recording, len(pool))
        sequences = []
        for i in range(counts[name]):
            chosen = rng.choice(pool, size=per_recording, replace=False).tolist()
            sequences.append(
                synthesize_recording(f"{name}_{i:03d}", chosen, means, cfg, rng)
            )
        splits[name] = CorpusSplit(name=name, sequences=sequences)
        logger.info(
            f"Часть {name}: {len(sequences)} записей, "
            f"{len(splits[name].speakers)} дикторов"
        )
    return Corpus(
        splits=splits,
        feature_dim=cfg.feature_dim,
        frame_period_s=config.FRAME_PERIOD_S,
    )
