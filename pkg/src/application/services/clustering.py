"""
Спектральная кластеризация эмбеддингов окон: косинусная матрица сходства,
мягкое пороговое прореживание по квантилю строки, нормированный лапласиан,
выбор числа кластеров по наибольшему разрыву собственных значений и k-means.
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import eigh
from scipy.sparse.csgraph import laplacian as csgraph_laplacian
from sklearn.cluster import KMeans

from src.application.inputs.experiment import ClusteringConfig
from src.application.services.scoring import ser, windows_to_segments
from src.core.config import config
from src.core.exceptions import ConfigError, DataError
from src.core.logging import get_logger
from src.core.models.clustering import AffinityMatrix, ClusterResult
from src.core.models.embedding import EmbeddingSet
from src.core.models.segments import SegmentList
from src.core.types import WindowLabelRow

SOFT_THRESHOLD_SCALE = 0.01

logger = get_logger(__name__)


def cosine_affinity(embeddings: np.ndarray) -> AffinityMatrix:
    """
    S_ij = (cos(x_i, x_j) + 1) / 2, S_ii = 1.

    :raises DataError: для нулевого эмбеддинга (с номером окна)
    """
    X = np.asarray(embeddings, dtype=np.float64)
    norms = np.linalg.norm(X, axis=1)
    zero = np.flatnonzero(norms == 0.0)
    if zero.size:
        raise DataError(f"Нулевой эмбеддинг в окне {int(zero[0])}")
    unit = X / norms[:, None]
    S = np.clip((unit @ unit.T + 1.0) / 2.0, 0.0, 1.0)
    S = (S + S.T) / 2.0
    np.fill_diagonal(S, 1.0)
    return AffinityMatrix(S=S)


def refine_affinity(affinity: AffinityMatrix, threshold_p: float) -> AffinityMatrix:
    """
    В каждой строке значения ниже p-квантиля строки умножаются на 0.01,
    затем симметризация поэлементным максимумом и единичная диагональ.
    Матрица, уже прореженная с тем же p, возвращается без изменений:
    повтор распознаётся по метке refined_p, повторное умножение значений
    ниже квантиля дало бы другую матрицу.

    :raises ConfigError: если p вне (0, 1)
    """
    if not 0.0 < threshold_p < 1.0:
        raise ConfigError(f"threshold_p должен лежать в (0, 1), получено {threshold_p}")
    if affinity.refined_p == threshold_p:
        return AffinityMatrix(S=affinity.S.copy(), refined_p=threshold_p)
    S = affinity.S.copy()
    quantiles = np.quantile(S, threshold_p, axis=1, keepdims=True)
    S = np.where(S < quantiles, S * SOFT_THRESHOLD_SCALE, S)
    S = np.maximum(S, S.T)
    np.fill_diagonal(S, 1.0)
    return AffinityMatrix(S=S, refined_p=threshold_p)


def normalized_laplacian(S: np.ndarray) -> np.ndarray:
    """L = I − D^(−1/2)·S·D^(−1/2) (петли не учитываются в степенях)."""
    return csgraph_laplacian(np.asarray(S, dtype=np.float64), normed=True)


def laplacian_spectrum(S: np.ndarray):
    """Собственные значения по возрастанию и векторы (столбцы)."""
    values, vectors = eigh(normalized_laplacian(S))
    return values, vectors


def estimate_k(eigenvalues: Sequence[float], k_max: int) -> int:
    """
    Число кластеров по наибольшему разрыву λ_{i+1} − λ_i, i = 1..min(k_max, N−1).
    """
    values = np.sort(np.asarray(eigenvalues, dtype=np.float64))
    limit = min(k_max, values.size - 1)
    if limit < 1:
        return 1
    gaps = values[1 : limit + 1] - values[:limit]
    return int(np.argmax(gaps)) + 1


def canonical_labels(labels: Sequence[int]) -> np.ndarray:
    """Перенумеровать метки в порядке первого появления."""
    mapping: Dict[int, int] = {}
    for label in labels:
        mapping.setdefault(int(label), len(mapping))
    return np.array([mapping[int(label)] for label in labels], dtype=int)


def cluster(
    embeddings: np.ndarray,
    threshold_p: float,
    k_override: Optional[int] = None,
    k_max: Optional[int] = None,
    seed: int = 0,
) -> ClusterResult:
    """
    Спектральная кластеризация эмбеддингов окон.

    :param embeddings: N×d
    :param threshold_p: Квантиль мягкого порога
    :param k_override: Принудительное число кластеров
    :param k_max: Верхняя граница k при оценке по разрыву спектра
    :param seed: Зерно k-means
    :return: ClusterResult с каноническими метками
    """
    X = np.asarray(embeddings, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] == 0:
        raise DataError(f"Нет эмбеддингов для кластеризации, форма {X.shape}")
    N = X.shape[0]
    if N == 1:
        return ClusterResult(labels=np.zeros(1, dtype=int), k=1, eigenvalues=[0.0])

    affinity = refine_affinity(cosine_affinity(X), threshold_p)
    values, vectors = laplacian_spectrum(affinity.S)
    k = k_override or estimate_k(values, k_max or config.K_MAX)
    k = max(1, min(k, N))
    if k == 1:
        labels = np.zeros(N, dtype=int)
    else:
        spectral = vectors[:, :k]
        norms = np.linalg.norm(spectral, axis=1, keepdims=True)
        spectral = spectral / np.where(norms > 0, norms, 1.0)
        kmeans = KMeans(n_clusters=k, init="k-means++", n_init=10, random_state=seed)
        labels = canonical_labels(kmeans.fit_predict(spectral))
    return ClusterResult(
        labels=labels, k=int(labels.max()) + 1, eigenvalues=values.tolist()
    )


@dataclass
class TuningResult:
    """Выбранный на dev порог и SER для каждой точки сетки."""

    threshold_p: float
    ser_by_p: Dict[float, float] = field(default_factory=dict)

    def to_dict(self) -> Dict:
        return {
            "threshold_p": self.threshold_p,
            "grid": [{"p": p, "ser": s} for p, s in sorted(self.ser_by_p.items())],
        }


class ClusteringService:
    """Кластеризация записей и настройка порога на dev."""

    def __init__(self, cfg: ClusteringConfig, collar_s: Optional[float] = None):
        self.cfg = cfg
        self.collar_s = collar_s
        self.logger = get_logger(__name__)

    def label_windows(
        self,
        item: EmbeddingSet,
        threshold_p: float,
        k_override: Optional[int] = None,
    ) -> List[str]:
        """Метки кластеров окон записи вида <запись>_c<номер>."""
        if item.num_windows == 0:
            return []
        result = cluster(
            item.embeddings, threshold_p, k_override, self.cfg.k_max, self.cfg.seed or 0
        )
        self.logger.debug(f"{item.recording_id}: {item.num_windows} окон, k={result.k}")
        return [f"{item.recording_id}_c{label}" for label in result.labels]

    def diarize(
        self,
        item: EmbeddingSet,
        threshold_p: float,
        k_override: Optional[int] = None,
        duration_s: Optional[float] = None,
    ) -> SegmentList:
        """
        Гипотеза разметки одной записи.

        :param item: Эмбеддинги окон записи
        :param threshold_p: Квантиль мягкого порога
        :param k_override: Принудительное число дикторов
        :param duration_s: Длительность записи для продления последнего сегмента
        """
        durations = None if duration_s is None else {item.recording_id: duration_s}
        segments, _ = self.diarize_windows([item], threshold_p, k_override, durations)
        return segments

    def diarize_windows(
        self,
        items: Sequence[EmbeddingSet],
        threshold_p: float,
        k_override: Optional[int] = None,
        durations: Optional[Dict[str, float]] = None,
    ) -> Tuple[SegmentList, List[WindowLabelRow]]:
        """
        Гипотеза разметки и метки окон всех записей за один проход кластеризации.

        :return: (сегменты гипотезы, строки меток окон)
        """
        hypothesis = SegmentList()
        rows: List[WindowLabelRow] = []
        for item in items:
            labels = self.label_windows(item, threshold_p, k_override)
            if not labels:
                continue
            hypothesis.extend(
                windows_to_segments(
                    item.recording_id,
                    labels,
                    item.times(),
                    (durations or {}).get(item.recording_id),
                )
            )
            rows.extend(
                WindowLabelRow(
                    recording_id=item.recording_id,
                    window_id=i,
                    start=float(start),
                    end=float(end),
                    label=label,
                )
                for i, ((start, end), label) in enumerate(zip(item.times(), labels))
            )
        return hypothesis, rows

    def diarize_all(
        self,
        items: Sequence[EmbeddingSet],
        threshold_p: float,
        k_override: Optional[int] = None,
        durations: Optional[Dict[str, float]] = None,
    ) -> SegmentList:
        return self.diarize_windows(items, threshold_p, k_override, durations)[0]

    def tune_threshold(
        self,
        items: Sequence[EmbeddingSet],
        reference: SegmentList,
        grid: Optional[List[float]] = None,
        durations: Optional[Dict[str, float]] = None,
    ) -> TuningResult:
        """
        Перебор порога по сетке; выбирается минимальный SER на dev,
        при равенстве берётся наименьший p.
        """
        if len(reference) == 0:
            raise ConfigError("Для настройки порога нужна эталонная разметка dev")
        grid = sorted(grid or self.cfg.threshold_grid)
        ser_by_p: Dict[float, float] = {}
        for p in grid:
            hypothesis = self.diarize_all(items, p, durations=durations)
            ser_by_p[p] = ser(reference, hypothesis, self.collar_s).ser_percent
            self.logger.debug(f"p={p:.2f}: SER {ser_by_p[p]:.2f}%")
        best = min(grid, key=lambda p: (ser_by_p[p], p))
        self.logger.info(f"Выбран порог p={best:.2f}, SER на dev {ser_by_p[best]:.2f}%")
        return TuningResult(threshold_p=best, ser_by_p=ser_by_p)
