import logging

from src.core.config import config
from src.core.exceptions import ConfigError

PACKAGE_LOGGER = "src"
LOG_FORMAT = "%(asctime)s | %(levelname)s | %(name)s | %(message)s"


def _package_logger() -> logging.Logger:
    logger = logging.getLogger(PACKAGE_LOGGER)
    if not logger.handlers:
        logger.setLevel(config.LOG_LEVEL)
        handler = logging.StreamHandler()
        handler.setFormatter(logging.Formatter(LOG_FORMAT))
        logger.addHandler(handler)
    return logger


def get_logger(name: str) -> logging.Logger:
    """
    Получить логгер модуля.

    Записи модулей пакета уходят в общий обработчик логгера "src",
    уровень задаётся LOG_LEVEL или флагом --log-level.

    :param name: Имя модуля (__name__)
    :return: Логгер
    """
    _package_logger()
    return logging.getLogger(name)


def set_log_level(level: str) -> None:
    """
    :param level: DEBUG, INFO, WARNING, ...
    :raises ConfigError: для неизвестного уровня
    """
    level = level.upper()
    if not isinstance(logging.getLevelName(level), int):
        raise ConfigError(f"Неизвестный уровень логирования: {level}")
    config.LOG_LEVEL = level
    _package_logger().setLevel(level)
