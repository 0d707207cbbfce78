class DiarizationError(Exception):
    """Базовая ошибка пакета. exit_code используется CLI."""

    exit_code = 1


class ConfigError(DiarizationError, ValueError):
    """Ошибка конфигурации эксперимента."""

    exit_code = 2


class DataError(DiarizationError, ValueError):
    """Ошибка входных данных (файлы, сегменты, эмбеддинги)."""

    exit_code = 3


class DimensionError(DataError):
    """Несовпадение размерностей тензоров."""


class NumericError(DiarizationError, ArithmeticError):
    """Нечисловые значения (nan/inf) во входах или функции потерь."""

    exit_code = 4


class GraphError(DiarizationError, RuntimeError):
    """Некорректный вызов обратного прохода."""

    exit_code = 4
