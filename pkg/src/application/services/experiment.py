import shutil
from pathlib import Path
from typing import Dict, List, Optional, Sequence

from src.application.factories import NetworkFactory
from src.application.inputs.experiment import ExperimentConfig
from src.application.services.checkpoints import (
    init_encoder_from,
    load_network,
    save_network,
)
from src.application.services.clustering import ClusteringService, TuningResult
from src.application.services.extraction import ExtractionService
from src.application.services.lambda_sweep import SweepResult, sweep
from src.application.services.report import ReportService
from src.application.services.scoring import format_report_table, ser
from src.application.services.synthdata import generate_corpus
from src.application.services.trainer import TrainerService, TrainResult
from src.core.exceptions import ConfigError, DataError
from src.core.logging import get_logger
from src.core.models.embedding import EmbeddingSet
from src.core.models.segments import SegmentList, SerReport
from src.core.utils.json import dump_json, load_json
from src.infra.storage.corpus_store import read_corpus, reference_path, write_corpus
from src.infra.storage.csv_store import (
    LOSS_TRACE_FIELDS,
    SWEEP_FIELDS,
    export_annotations,
    export_window_labels,
    window_labels_path,
    write_rows,
)
from src.infra.storage.embedding_store import (
    read_embedding_index,
    read_embeddings,
    write_embeddings,
)
from src.infra.storage.rttm import read_rttm, write_rttm


class ExperimentService:
    """Шаги конвейера: корпус, обучение, извлечение, кластеризация, оценка."""

    def __init__(self, cfg: Optional[ExperimentConfig] = None):
        """
        :param cfg: Конфигурация эксперимента (по умолчанию значения схемы)
        """
        self.cfg = cfg or ExperimentConfig()
        self.logger = get_logger(__name__)

    def synth(self, out_dir: Path, force: bool = False) -> Path:
        """
        Сгенерировать корпус в out_dir.

        :raises DataError: если каталог не пуст и force не задан
        """
        out_dir = Path(out_dir)
        if out_dir.exists() and any(out_dir.iterdir()):
            if not force:
                raise DataError(f"Каталог {out_dir} не пуст; используйте --force")
            shutil.rmtree(out_dir)
        corpus = generate_corpus(self.cfg.synth)
        return write_corpus(corpus, out_dir, self.cfg.echo())

    def train(
        self,
        corpus_dir: Path,
        system: str,
        out_dir: Path,
        init: Optional[Dict[str, Path]] = None,
    ) -> TrainResult:
        """
        Обучить систему на train-части корпуса; записать чекпоинт и журнал.

        :param corpus_dir: Каталог корпуса
        :param system: tdnn | hornn | cvector:<topology>
        :param out_dir: Каталог системы (checkpoint/, loss.csv)
        :param init: Энкодер -> чекпоинт d-vector для инициализации
        """
        corpus = read_corpus(corpus_dir, splits=("train",))
        train = corpus.split("train")
        factory = NetworkFactory(self.cfg)
        network = factory.create(system, corpus.feature_dim, len(train.speakers))
        for name, path in (init or {}).items():
            init_encoder_from(network, name, path)

        result = TrainerService(self.cfg).fit(
            network, train.sequences, list(init or {})
        )
        out_dir = Path(out_dir)
        save_network(
            out_dir / "checkpoint",
            network,
            self.cfg,
            result.speakers,
            corpus.feature_dim,
        )
        write_rows(out_dir / "loss.csv", LOSS_TRACE_FIELDS, result.trace)
        for name, trace in result.pretrain_traces.items():
            write_rows(out_dir / f"pretrain_{name}.csv", LOSS_TRACE_FIELDS, trace)
        return result

    def extract(
        self,
        checkpoint: Path,
        corpus_dir: Path,
        split: str,
        out_dir: Path,
        jobs: Optional[int] = None,
    ) -> List[EmbeddingSet]:
        """
        Эмбеддинги окон всех записей части корпуса.

        :raises ConfigError: если размерность признаков не совпадает с чекпоинтом
        """
        network, header, cfg = load_network(checkpoint)
        corpus = read_corpus(corpus_dir, splits=(split,))
        if corpus.feature_dim != int(header["input_dim"]):
            raise ConfigError(
                f"Чекпоинт ожидает признаки размерности {header['input_dim']}, "
                f"в корпусе {corpus.feature_dim}"
            )
        sequences = corpus.split(split).sequences
        service = ExtractionService(
            network, cfg.train.window_frames, cfg.train.window_shift
        )
        sets = service.extract_all(sequences, jobs)
        write_embeddings(
            sets,
            out_dir,
            {
                "system": header["system"],
                "split": split,
                "embedding_dim": network.embedding_dim,
                "durations": {
                    seq.recording_id: round(seq.num_frames * seq.frame_period_s, 3)
                    for seq in sequences
                },
            },
        )
        return sets

    def cluster(
        self,
        embeddings_dir: Path,
        out_rttm: Path,
        threshold_p: Optional[float] = None,
        reference: Optional[Path] = None,
        tune: bool = False,
        threshold_from: Optional[Path] = None,
        k_override: Optional[int] = None,
        tuning_out: Optional[Path] = None,
    ) -> SegmentList:
        """
        Кластеризация с замороженным порогом или с его настройкой по эталону.
        Рядом с RTTM пишется CSV меток окон <имя>.labels.csv.

        :raises ConfigError: в режиме настройки без эталонной разметки
        """
        items = read_embeddings(embeddings_dir)
        durations = read_embedding_index(embeddings_dir).get("durations", {})
        service = ClusteringService(self.cfg.clustering, self.cfg.scoring.collar)

        if tune:
            if reference is None:
                raise ConfigError(
                    "Режим --tune требует эталонной разметки (--reference)"
                )
            tuning: TuningResult = service.tune_threshold(
                items, read_rttm(reference), durations=durations
            )
            threshold_p = tuning.threshold_p
            if tuning_out is not None:
                dump_json(tuning.to_dict(), tuning_out)
        elif threshold_from is not None:
            threshold_p = float(load_json(threshold_from)["threshold_p"])
        if threshold_p is None:
            threshold_p = self.cfg.clustering.threshold_p

        hypothesis, rows = service.diarize_windows(
            items, threshold_p, k_override, durations
        )
        write_rttm(hypothesis, out_rttm)
        export_window_labels(rows, window_labels_path(out_rttm))
        self.logger.info(
            f"Кластеризация {embeddings_dir}: p={threshold_p:.2f}, "
            f"{len(hypothesis)} сегментов -> {out_rttm}"
        )
        return hypothesis

    def score(
        self,
        reference: Path,
        hypothesis: Path,
        collar: Optional[float] = None,
        out_json: Optional[Path] = None,
    ) -> SerReport:
        collar = self.cfg.scoring.collar if collar is None else collar
        report = ser(read_rttm(reference), read_rttm(hypothesis), collar)
        self.logger.info(f"SER {report.ser_percent:.2f}% ({hypothesis})")
        self.logger.debug("\n" + format_report_table(report))
        if out_json is not None:
            dump_json(report.to_dict(), out_json)
        return report

    def sweep_lambda(
        self,
        checkpoints: Sequence[Path],
        corpus_dir: Path,
        split: str,
        out_dir: Path,
        layer: Optional[str] = None,
        max_windows: Optional[int] = None,
    ) -> SweepResult:
        """
        Сводка по семейству чекпоинтов, обученных с разными λ:
        sweep.csv, annotations_<i>.csv, penalty_curve.csv.
        """
        if not checkpoints:
            raise ConfigError("Не заданы чекпоинты для анализа λ")
        networks = []
        window = None
        for path in checkpoints:
            network, _, cfg = load_network(path)
            networks.append(network)
            window = window or (cfg.train.window_frames, cfg.train.window_shift)
        corpus = read_corpus(corpus_dir, splits=(split,))
        result = sweep(
            networks,
            corpus.split(split).sequences,
            window[0],
            window[1],
            layer=layer,
            max_windows=max_windows,
        )
        out_dir = Path(out_dir)
        write_rows(out_dir / "sweep.csv", SWEEP_FIELDS, result.rows)
        for index, rows in result.annotations.items():
            export_annotations(rows, out_dir / f"annotations_{index}.csv")
        write_rows(
            out_dir / "penalty_curve.csv", ("lam", "penalty", "vertex"), result.curve
        )
        return result

    def report(self, run_dir: Path) -> str:
        service = ReportService(run_dir)
        summaries = service.collect()
        table = service.format_table(summaries)
        dump_json(service.to_dict(summaries), service.layout.report_json)
        service.layout.report_text.write_text(table + "\n", encoding="utf-8")
        return table

    @staticmethod
    def reference_for(corpus_dir: Path, split: str) -> Path:
        path = reference_path(corpus_dir, split)
        if not path.is_file():
            raise DataError(f"Нет эталонной разметки {path}")
        return path
