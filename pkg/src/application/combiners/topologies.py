"""
Топологии объединения k систем через двумерное самовнимание.

Все функции работают в строковой конвенции: векторы записываются строками,
матрица весов умножается справа.
"""

from typing import List, Sequence, Tuple, Union

from src.application.inputs.experiment import PenaltyConfig
from src.application.layers.attention import AttentionParams, self_atten
from src.core.exceptions import DataError, DimensionError
from src.core.tensor import Tensor
from src.core.tensor import functional as F


def _require_systems(items: Sequence[Tensor], what: str) -> None:
    if len(items) == 0:
        raise DataError(f"{what}: нужна хотя бы одна система (k ≥ 1)")


def stack_systems(hs: Sequence[Tensor]) -> Tensor:
    """
    Сложить покадровые выходы систем в матрицу kT×n (сначала все кадры
    первой системы, затем второй и т.д.).

    :raises DimensionError: при разных T или n
    """
    _require_systems(hs, "simultaneous")
    first = hs[0].shape
    for H in hs[1:]:
        if H.shape != first:
            raise DimensionError(
                f"simultaneous: формы систем различаются {first} и {H.shape}"
            )
    return hs[0] if len(hs) == 1 else F.concat(list(hs), axis=0)


def flatten_systems(es: Sequence[Tensor]) -> Tensor:
    """
    Развернуть выход каждой системы h×n в строку h·n и сложить в k×(h·n).

    :raises DimensionError: при разных формах E_i
    """
    _require_systems(es, "consec1")
    first = es[0].shape
    for E in es[1:]:
        if E.shape != first:
            raise DimensionError(f"consec1: формы E_i различаются {first} и {E.shape}")
    rows = [F.flatten(E) for E in es]
    return rows[0] if len(rows) == 1 else F.concat(rows, axis=0)


def stack_heads(heads: Sequence[Tensor]) -> Tensor:
    """
    Сложить векторы голов (или блоки h_i×n) всех систем в (Σh_i)×n.

    :raises DimensionError: при разной размерности n
    """
    _require_systems(heads, "consec2")
    blocks = [F.reshape(e, (1, e.size)) if e.ndim == 1 else e for e in heads]
    widths = {b.shape[1] for b in blocks}
    if len(widths) > 1:
        raise DimensionError(f"consec2: размерности голов различаются {sorted(widths)}")
    return blocks[0] if len(blocks) == 1 else F.concat(blocks, axis=0)


def combine_simultaneous(
    hs: Sequence[Tensor], params: AttentionParams, penalty_cfg: PenaltyConfig
) -> Tuple[Tensor, Tensor]:
    """
    Одно внимание по kT строкам всех систем.

    :return: (E h×n, штраф)
    """
    return self_atten(stack_systems(hs), params, penalty_cfg)


def combine_consec1(
    es: Sequence[Tensor], params: AttentionParams, penalty_cfg: PenaltyConfig
) -> Tuple[Tensor, Tensor]:
    """
    Внимание второй ступени над развёрнутыми выходами систем.

    :return: (строки h₂×(h·n), штраф)
    """
    return self_atten(flatten_systems(es), params, penalty_cfg)


def combine_consec2(
    heads: Sequence[Tensor], params: AttentionParams, penalty_cfg: PenaltyConfig
) -> Tuple[Tensor, Tensor]:
    """
    Внимание второй ступени на уровне отдельных голов; системы могут
    давать разное число голов.

    :return: (E h₂×n, штраф)
    """
    return self_atten(stack_heads(heads), params, penalty_cfg)


def fc_transform(E: Tensor, W: Tensor) -> Tensor:
    """E* = ReLU(E·W) для выхода одной системы h×n и W n×m."""
    if E.ndim != 2 or E.shape[1] != W.shape[0]:
        raise DimensionError(f"fc_transform: E {E.shape} не согласован с W {W.shape}")
    return F.relu(F.matmul(E, W))


def combine_consec_fc(es: Sequence[Tensor], W: Tensor, b: Tensor) -> Tensor:
    """
    Конкатенация развёрнутых E_i и один слой affine+ReLU, без внимания
    второй ступени и без штрафа.

    :return: 1×fusion_dim
    """
    _require_systems(es, "consec_fc")
    rows: List[Tensor] = [F.flatten(E) for E in es]
    joined = rows[0] if len(rows) == 1 else F.concat(rows, axis=1)
    if joined.shape[1] != W.shape[0]:
        raise DimensionError(
            f"consec_fc: вход {joined.shape} не согласован с W {W.shape}"
        )
    return F.relu(F.add(F.matmul(joined, W), b))


def bottleneck(
    combined: Union[Tensor, Sequence[Tensor]], W: Tensor, b: Tensor
) -> Tensor:
    """
    Аффинное отображение развёрнутого представления в пространство
    эмбеддингов. Список блоков (головы, конкатенируемые после внимания)
    разворачивается и склеивается по порядку.

    :return: c-vector 1×bottleneck_dim
    """
    if isinstance(combined, Tensor):
        flat = F.flatten(combined)
    else:
        rows = [F.flatten(x) for x in combined]
        flat = rows[0] if len(rows) == 1 else F.concat(rows, axis=1)
    if flat.shape[1] != W.shape[0]:
        raise DimensionError(
            f"bottleneck: вход {flat.shape} не согласован с W {W.shape}"
        )
    return F.add(F.matmul(flat, W), b)
