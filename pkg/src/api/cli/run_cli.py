import argparse
import sys
from pathlib import Path
from typing import Dict, List, Optional

from pydantic import ValidationError

from src.application.inputs.experiment import ExperimentConfig
from src.application.services.experiment import ExperimentService
from src.application.services.scoring import format_report_table
from src.application.workflows.pipeline import PipelineWorkflow
from src.core.config import config
from src.core.exceptions import ConfigError, DiarizationError
from src.core.logging import get_logger, set_log_level
from src.core.utils.json import dumps_json
from src.core.validation.config_validator import parse_system


def _init_pair(value: str) -> tuple:
    name, sep, path = value.partition("=")
    if not sep or not name or not path:
        raise argparse.ArgumentTypeError(
            f"Ожидается <энкодер>=<чекпоинт>, получено {value!r}"
        )
    return name, Path(path)


def _system(value: str) -> str:
    try:
        parse_system(value)
    except ConfigError as e:
        raise argparse.ArgumentTypeError(str(e)) from e
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cvector", description="Диаризация дикторов на c-vector эмбеддингах"
    )
    parser.add_argument("--log-level", default=None, help="DEBUG, INFO, WARNING, ...")
    parser.add_argument(
        "--jobs",
        type=int,
        default=None,
        help="Потоки для извлечения эмбеддингов по записям (extract, pipeline); "
        "кластеризация и обучение идут в одном потоке",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    synth = sub.add_parser("synth", help="Сгенерировать синтетический корпус")
    synth.add_argument("--config", type=Path)
    synth.add_argument("--out", type=Path, required=True)
    synth.add_argument("--force", action="store_true", help="Перезаписать каталог")

    train = sub.add_parser("train", help="Обучить систему")
    train.add_argument("--config", type=Path)
    train.add_argument("--corpus", type=Path, required=True)
    train.add_argument("--system", type=_system, required=True)
    train.add_argument("--out", type=Path, required=True)
    train.add_argument(
        "--init",
        type=_init_pair,
        action="append",
        default=[],
        help="Инициализировать энкодер из чекпоинта d-vector: tdnn=<dir>",
    )

    extract = sub.add_parser("extract", help="Извлечь эмбеддинги окон")
    extract.add_argument("--checkpoint", type=Path, required=True)
    extract.add_argument("--corpus", type=Path, required=True)
    extract.add_argument("--split", default="eval")
    extract.add_argument("--out", type=Path, required=True)

    cluster = sub.add_parser("cluster", help="Кластеризовать эмбеддинги в RTTM")
    cluster.add_argument("--config", type=Path)
    cluster.add_argument("--embeddings", type=Path, required=True)
    cluster.add_argument("--out", type=Path, required=True)
    mode = cluster.add_mutually_exclusive_group()
    mode.add_argument("--threshold", type=float)
    mode.add_argument("--tune", action="store_true", help="Настроить порог по эталону")
    mode.add_argument("--threshold-from", type=Path, help="tuning.json с порогом")
    cluster.add_argument("--reference", type=Path, help="Эталонный RTTM для --tune")
    cluster.add_argument("--tuning-out", type=Path)
    cluster.add_argument("--k-override", type=int)

    score = sub.add_parser("score", help="Посчитать SER")
    score.add_argument("--reference", type=Path, required=True)
    score.add_argument("--hypothesis", type=Path, required=True)
    score.add_argument("--collar", type=float, default=config.COLLAR_S)
    score.add_argument("--out", type=Path)

    sweep = sub.add_parser("sweep-lambda", help="Поведение голов при разных λ")
    sweep.add_argument("--checkpoints", type=Path, nargs="+", required=True)
    sweep.add_argument("--corpus", type=Path, required=True)
    sweep.add_argument("--split", default="eval")
    sweep.add_argument("--layer")
    sweep.add_argument("--max-windows", type=int)
    sweep.add_argument("--out", type=Path, required=True)

    report = sub.add_parser("report", help="Сводная таблица прогона")
    report.add_argument("--run", type=Path, required=True)

    pipeline = sub.add_parser("pipeline", help="Полный прогон из одной конфигурации")
    pipeline.add_argument("--config", type=Path)
    pipeline.add_argument("--run", type=Path, required=True)
    pipeline.add_argument("--force", action="store_true")
    return parser


class CLIApplication:
    """Консольное приложение конвейера диаризации."""

    def __init__(self):
        self.logger = get_logger(__name__)

    @staticmethod
    def load_config(path: Optional[Path]) -> ExperimentConfig:
        """
        :raises ConfigError: при ошибке схемы или согласованности
        """
        if path is None:
            return ExperimentConfig()
        return ExperimentConfig.from_file(path)

    def dispatch(self, args: argparse.Namespace) -> None:
        cfg = self.load_config(getattr(args, "config", None))
        service = ExperimentService(cfg)

        if args.command == "synth":
            manifest = service.synth(args.out, force=args.force)
            print(manifest)
        elif args.command == "train":
            init: Dict[str, Path] = dict(args.init)
            result = service.train(args.corpus, args.system, args.out, init)
            if result.trace:
                last = result.trace[-1]
                print(
                    f"{args.system}: потеря {last['train_loss']:.4f}, "
                    f"точность на валидации {last['val_acc']:.3f}"
                )
        elif args.command == "extract":
            sets = service.extract(
                args.checkpoint, args.corpus, args.split, args.out, args.jobs
            )
            print(f"{sum(s.num_windows for s in sets)} эмбеддингов -> {args.out}")
        elif args.command == "cluster":
            service.cluster(
                args.embeddings,
                args.out,
                threshold_p=args.threshold,
                reference=args.reference,
                tune=args.tune,
                threshold_from=args.threshold_from,
                k_override=args.k_override,
                tuning_out=args.tuning_out,
            )
        elif args.command == "score":
            report = service.score(
                args.reference, args.hypothesis, args.collar, args.out
            )
            print(format_report_table(report))
            print(dumps_json(report.to_dict()), end="")
        elif args.command == "sweep-lambda":
            result = service.sweep_lambda(
                args.checkpoints,
                args.corpus,
                args.split,
                args.out,
                layer=args.layer,
                max_windows=args.max_windows,
            )
            print(f"{len(result.rows)} строк -> {args.out / 'sweep.csv'}")
        elif args.command == "report":
            print(service.report(args.run))
        elif args.command == "pipeline":
            state = PipelineWorkflow(service).execute(
                {"run_dir": args.run, "force": args.force, "jobs": args.jobs}
            )
            print(state["report"])

    def run(self, argv: Optional[List[str]] = None) -> int:
        """
        Разобрать аргументы и выполнить подкоманду.

        :return: Код выхода: 0 успех, 2 конфигурация, 3 данные, 4 численная ошибка
        """
        args = build_parser().parse_args(argv)
        if args.jobs:
            config.JOBS = args.jobs
        try:
            if args.log_level:
                set_log_level(args.log_level)
            self.dispatch(args)
        except ValidationError as e:
            self.logger.error(f"Ошибка конфигурации: {e}")
            return ConfigError.exit_code
        except DiarizationError as e:
            self.logger.error(f"{type(e).__name__}: {e}")
            return e.exit_code
        return 0


def main() -> None:
    """
    Точка входа CLI.
    """
    sys.exit(CLIApplication().run())


if __name__ == "__main__":
    main()
