from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional

from src.core.logging import get_logger
from src.core.utils.json import load_json
from src.infra.storage.run_layout import RunLayout, SystemLayout

MISSING = "—"
REPORT_SPLITS = ("dev", "eval")


@dataclass
class SystemSummary:
    system: str
    param_count: Optional[int] = None
    ser: Dict[str, Optional[float]] = field(default_factory=dict)


class ReportService:
    """Сводная таблица SER по системам и частям корпуса."""

    def __init__(self, run_dir: Path):
        self.layout = RunLayout(run_dir)
        self.logger = get_logger(__name__)

    def _summarize(self, layout: SystemLayout) -> SystemSummary:
        header_path = layout.checkpoint / "header.json"
        system = layout.root.name
        param_count = None
        if header_path.is_file():
            header = load_json(header_path)
            system = header.get("system", system)
            param_count = header.get("param_count")
        summary = SystemSummary(system=system, param_count=param_count)
        for split in REPORT_SPLITS:
            path = layout.ser_report(split)
            if path.is_file():
                summary.ser[split] = float(load_json(path)["ser"])
            else:
                summary.ser[split] = None
                self.logger.warning(f"{system}: нет результата SER для {split}")
        return summary

    def collect(self) -> List[SystemSummary]:
        summaries = [
            self._summarize(SystemLayout(d)) for d in self.layout.system_dirs()
        ]
        if not summaries:
            self.logger.warning(f"В {self.layout.root} нет обученных систем")
        return summaries

    @staticmethod
    def to_dict(summaries: List[SystemSummary]) -> Dict:
        return {
            "systems": [
                {"system": s.system, "param_count": s.param_count, "ser": s.ser}
                for s in summaries
            ]
        }

    @staticmethod
    def format_table(summaries: List[SystemSummary]) -> str:
        """Столбец на систему; строки: число параметров, SER dev, SER eval."""

        def cell(value, fmt: str) -> str:
            return MISSING if value is None else format(value, fmt)

        names = [s.system for s in summaries]
        width = max([18] + [len(n) + 2 for n in names])
        lines = [f"{'':<14}" + "".join(f"{n:>{width}}" for n in names)]
        lines.append(
            f"{'#Params':<14}"
            + "".join(f"{_params(s.param_count):>{width}}" for s in summaries)
        )
        for split in REPORT_SPLITS:
            lines.append(
                f"{'SER ' + split + ', %':<14}"
                + "".join(
                    f"{cell(s.ser.get(split), '.2f'):>{width}}" for s in summaries
                )
            )
        return "\n".join(lines)


def _params(count: Optional[int]) -> str:
    return MISSING if count is None else f"{count / 1e6:.3f}M"
