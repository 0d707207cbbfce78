import os

from dotenv import load_dotenv

load_dotenv()
if os.path.exists(".env.local"):
    load_dotenv(".env.local", override=True)


class Config:
    """
    Конфигурация процесса (переменные окружения).

    Параметры эксперимента задаются отдельно JSON-документом,
    см. src.application.inputs.experiment.
    """

    LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO").upper()

    JOBS = int(os.getenv("DIAR_JOBS", "1"))

    FRAME_PERIOD_S = float(os.getenv("DIAR_FRAME_PERIOD_S", "0.01"))
    COLLAR_S = float(os.getenv("DIAR_COLLAR_S", "0.25"))

    K_MAX = int(os.getenv("DIAR_K_MAX", "10"))

    GRAD_STEP = float(os.getenv("DIAR_GRAD_STEP", "1e-5"))


config = Config()
