"""
Поведение голов внимания при разных λ: средние энтропия и максимальный вес
по окнам, выгрузка матриц внимания и кривая штрафа P(λ) для одной
обученной головы.
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np

from src.application.layers.attention import annotation_stats, penalty_curve
from src.application.networks import EmbeddingNetwork
from src.application.services.trainer import make_windows
from src.core.exceptions import ConfigError
from src.core.logging import get_logger
from src.core.models.corpus import FeatureSequence
from src.core.tensor import no_grad
from src.core.types import AnnotationRow, SweepRow

logger = get_logger(__name__)


@dataclass
class SweepResult:
    rows: List[SweepRow] = field(default_factory=list)
    annotations: Dict[int, List[AnnotationRow]] = field(default_factory=dict)
    curve: List[Dict[str, float]] = field(default_factory=list)


def attention_layer_name(network: EmbeddingNetwork, layer: Optional[str] = None) -> str:
    """Слой внимания для анализа: заданный или первый слой первой ступени."""
    names = list(network.attention_layers)
    if network.joint_attention is not None:
        names.append("joint")
    if network.stage2 is not None:
        names.append("stage2")
    if layer is None:
        if not names:
            raise ConfigError(f"В системе {network.system} нет слоёв внимания")
        return names[0]
    if layer not in names:
        raise ConfigError(f"Слой внимания '{layer}' отсутствует; доступны: {names}")
    return layer


def layer_lambdas(network: EmbeddingNetwork, name: str) -> List[float]:
    if name == "joint":
        return list(network.joint_attention.lambdas)
    if name == "stage2":
        return list(network.stage2.lambdas)
    return list(network.attention_layers[name].lambdas)


def summarize_network(
    network: EmbeddingNetwork,
    sequences: Sequence[FeatureSequence],
    window_frames: int,
    window_shift: int,
    layer: Optional[str] = None,
    max_windows: Optional[int] = None,
):
    """
    Пройти по окнам и собрать матрицы внимания выбранного слоя.

    :return: (имя слоя, λ голов, список матриц T×h)
    """
    name = attention_layer_name(network, layer)
    matrices = []
    with no_grad():
        for seq in sequences:
            for window in make_windows(
                seq, window_frames, window_shift, training=False
            ):
                if max_windows is not None and len(matrices) >= max_windows:
                    break
                output = network.embed(window.features)
                matrices.append(output.annotations[name].A.numpy())
    return name, layer_lambdas(network, name), matrices


def sweep(
    networks: Sequence[EmbeddingNetwork],
    sequences: Sequence[FeatureSequence],
    window_frames: int,
    window_shift: int,
    layer: Optional[str] = None,
    max_windows: Optional[int] = None,
    curve_points: int = 50,
) -> SweepResult:
    """
    Сводка по семейству сетей, обученных с разными λ.

    :param networks: Сети (по одной на настройку λ)
    :param sequences: Записи для оценки
    :param window_frames: Длина окна
    :param window_shift: Шаг окна
    :param layer: Имя слоя внимания
    :param max_windows: Ограничение числа окон на сеть
    :param curve_points: Число точек кривой P(λ) на [1/T, 1]
    :return: SweepResult; строк столько, сколько (сеть, голова)
    """
    result = SweepResult()
    for index, network in enumerate(networks):
        name, lambdas, matrices = summarize_network(
            network, sequences, window_frames, window_shift, layer, max_windows
        )
        if not matrices:
            logger.warning(f"{network.system}: нет окон для анализа внимания")
            continue
        stats = [annotation_stats(A) for A in matrices]
        for head, lam in enumerate(lambdas):
            result.rows.append(
                {
                    "lam": lam,
                    "head": head,
                    "mean_entropy": float(np.mean([s[head].entropy for s in stats])),
                    "mean_max_weight": float(
                        np.mean([s[head].max_weight for s in stats])
                    ),
                }
            )
        dump = result.annotations.setdefault(index, [])
        for window_id, A in enumerate(matrices):
            for head in range(A.shape[1]):
                for frame in range(A.shape[0]):
                    dump.append(
                        {
                            "window_id": window_id,
                            "head": head,
                            "frame": frame,
                            "weight": float(A[frame, head]),
                        }
                    )
        if not result.curve:
            a = matrices[0][:, 0]
            grid = np.linspace(1.0 / a.size, 1.0, curve_points)
            values = penalty_curve(a, grid)
            result.curve = [
                {"lam": float(lam), "penalty": float(p), "vertex": float(a @ a)}
                for lam, p in zip(grid, values)
            ]
        logger.info(
            f"{network.system}: слой {name}, λ={lambdas}, {len(matrices)} окон"
        )
    return result
