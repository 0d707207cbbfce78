"""
Чекпоинт хранится как каталог с header.json (эхо конфигурации, система,
дикторы, список тензоров) и файлом tensors/<имя>.fmat на каждый параметр.
"""

from pathlib import Path
from typing import Dict, Mapping, Tuple

import numpy as np

from src.core.exceptions import ConfigError, DataError
from src.core.logging import get_logger
from src.core.types import CheckpointHeader
from src.core.utils.json import dump_json, load_json
from src.infra.storage.fmat import read_fmat, write_fmat

FORMAT = "cvector-checkpoint/1"
HEADER_FILE = "header.json"
TENSOR_DIR = "tensors"

logger = get_logger(__name__)


def save_checkpoint(
    path: Path, header: CheckpointHeader, state: Mapping[str, np.ndarray]
) -> None:
    """
    Сохранить параметры модели (float32 на диске).

    :param path: Каталог чекпоинта
    :param header: Заголовок без списка тензоров
    :param state: Параметры по имени
    """
    path = Path(path)
    names = list(state)
    for name in names:
        write_fmat(state[name], path / TENSOR_DIR / f"{name}.fmat")
    dump_json({**header, "format": FORMAT, "tensors": names}, path / HEADER_FILE)
    logger.info(f"Чекпоинт {header['system']} сохранён: {path} ({len(names)} тензоров)")


def load_checkpoint(path: Path) -> Tuple[CheckpointHeader, Dict[str, np.ndarray]]:
    """
    Прочитать заголовок и параметры.

    :raises DataError: если каталога или тензора нет
    :raises ConfigError: если формат заголовка не поддерживается
    """
    path = Path(path)
    if not (path / HEADER_FILE).is_file():
        raise DataError(f"Чекпоинт не найден: {path}")
    header = load_json(path / HEADER_FILE)
    if header.get("format") != FORMAT:
        raise ConfigError(
            f"{path}: неподдерживаемый формат чекпоинта {header.get('format')}"
        )
    state = {
        name: read_fmat(path / TENSOR_DIR / f"{name}.fmat")
        for name in header["tensors"]
    }
    return header, state
