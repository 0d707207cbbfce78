from dataclasses import dataclass
from pathlib import Path
from typing import List


def system_slug(system: str) -> str:
    """cvector:consec2 -> cvector-consec2 (имя каталога)."""
    return system.replace(":", "-")


@dataclass
class SystemLayout:
    """Артефакты одной системы внутри каталога прогона."""

    root: Path

    @property
    def checkpoint(self) -> Path:
        return self.root / "checkpoint"

    @property
    def loss_trace(self) -> Path:
        return self.root / "loss.csv"

    def embeddings(self, split: str) -> Path:
        return self.root / "embeddings" / split

    @property
    def tuning(self) -> Path:
        return self.root / "tuning.json"

    def hypothesis(self, split: str) -> Path:
        return self.root / f"hyp_{split}.rttm"

    def ser_report(self, split: str) -> Path:
        return self.root / f"ser_{split}.json"


@dataclass
class RunLayout:
    """
    Каталог прогона:

        corpus/                    синтетический корпус
        systems/<system>/          чекпоинт, эмбеддинги, гипотезы, SER
        report.json, report.txt    сводная таблица
    """

    root: Path

    def __post_init__(self):
        self.root = Path(self.root)

    @property
    def corpus(self) -> Path:
        return self.root / "corpus"

    def system(self, system: str) -> SystemLayout:
        return SystemLayout(self.root / "systems" / system_slug(system))

    def system_dirs(self) -> List[Path]:
        base = self.root / "systems"
        return sorted(p for p in base.iterdir() if p.is_dir()) if base.is_dir() else []

    @property
    def report_json(self) -> Path:
        return self.root / "report.json"

    @property
    def report_text(self) -> Path:
        return self.root / "report.txt"
