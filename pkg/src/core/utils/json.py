import json
from pathlib import Path
from typing import Any

import numpy as np

from src.core.exceptions import DataError


def _default(value: Any) -> Any:
    """Привести numpy-значения и пути к типам JSON."""
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, Path):
        return str(value)
    raise TypeError(f"Тип {type(value).__name__} не сериализуется в JSON")


def dumps_json(data: Any) -> str:
    """
    Детерминированная сериализация: отсортированные ключи, отступ 2.

    :param data: Данные (допускаются numpy-массивы и скаляры)
    :return: JSON-текст с переводом строки в конце
    """
    text = json.dumps(
        data, default=_default, ensure_ascii=False, indent=2, sort_keys=True
    )
    return text + "\n"


def dump_json(data: Any, path: Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps_json(data), encoding="utf-8")


def load_json(path: Path) -> Any:
    """
    Прочитать JSON-файл.

    :param path: Путь к файлу
    :return: Разобранные данные
    :raises DataError: если файла нет или он не является JSON
    """
    path = Path(path)
    if not path.is_file():
        raise DataError(f"Файл не найден: {path}")
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise DataError(f"{path}: некорректный JSON ({e})") from e
