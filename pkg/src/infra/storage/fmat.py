"""
Бинарный формат FMAT: магия b"FMAT", u32 ранг, u32 размеры (little-endian),
затем f32 данные в построчном порядке.
"""

import struct
from pathlib import Path
from typing import Union

import numpy as np

from src.core.exceptions import DataError
from src.core.tensor import Tensor

MAGIC = b"FMAT"
_U32 = struct.Struct("<I")


def encode_fmat(array: Union[np.ndarray, Tensor]) -> bytes:
    """
    Закодировать массив; float64 усекается до float32.

    :param array: Массив любого ранга (включая 0)
    :return: Байты FMAT
    """
    data = array.numpy() if isinstance(array, Tensor) else np.asarray(array)
    header = MAGIC + _U32.pack(data.ndim)
    header += b"".join(_U32.pack(d) for d in data.shape)
    return header + np.ascontiguousarray(data, dtype="<f4").tobytes()


def decode_fmat(payload: bytes, source: str = "<bytes>") -> np.ndarray:
    """
    Декодировать FMAT в float64-массив.

    :param payload: Байты FMAT
    :param source: Имя источника для сообщений об ошибках
    :raises DataError: при неверной магии или длине
    """
    if payload[:4] != MAGIC:
        raise DataError(f"{source}: неверная сигнатура FMAT {payload[:4]!r}")
    offset = 4
    if len(payload) < offset + _U32.size:
        raise DataError(f"{source}: обрезанный заголовок FMAT")
    (rank,) = _U32.unpack_from(payload, offset)
    offset += _U32.size
    if len(payload) < offset + rank * _U32.size:
        raise DataError(f"{source}: обрезанный заголовок FMAT (ранг {rank})")
    shape = tuple(
        _U32.unpack_from(payload, offset + i * _U32.size)[0] for i in range(rank)
    )
    offset += rank * _U32.size
    expected = int(np.prod(shape)) * 4
    if len(payload) - offset != expected:
        raise DataError(
            f"{source}: ожидалось {expected} байт данных для формы {shape}, "
            f"получено {len(payload) - offset}"
        )
    values = np.frombuffer(payload, dtype="<f4", offset=offset)
    return values.astype(np.float64).reshape(shape)


def write_fmat(array: Union[np.ndarray, Tensor], path: Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(encode_fmat(array))


def read_fmat(path: Path) -> np.ndarray:
    path = Path(path)
    if not path.is_file():
        raise DataError(f"Файл FMAT не найден: {path}")
    return decode_fmat(path.read_bytes(), source=str(path))
