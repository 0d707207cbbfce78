"""
Корпус на диске:

    <root>/manifest.json
    <root>/<split>/<recording>.fmat
    <root>/<split>/<recording>.labels.csv
    <root>/<split>/reference.rttm
"""

from pathlib import Path
from typing import Any, Dict, Optional

from src.core.exceptions import DataError
from src.core.logging import get_logger
from src.core.models.corpus import Corpus, CorpusSplit, FeatureSequence
from src.core.utils.json import dump_json, load_json
from src.infra.storage.csv_store import read_frame_labels, write_frame_labels
from src.infra.storage.fmat import read_fmat, write_fmat
from src.infra.storage.rttm import write_rttm

MANIFEST = "manifest.json"
REFERENCE = "reference.rttm"

logger = get_logger(__name__)


def reference_path(root: Path, split: str) -> Path:
    return Path(root) / split / REFERENCE


def write_corpus(
    corpus: Corpus, root: Path, config_echo: Optional[Dict[str, Any]] = None
) -> Path:
    """
    Записать признаки, метки, эталонный RTTM и манифест.

    :return: Путь к манифесту
    """
    root = Path(root)
    manifest = {
        "feature_dim": corpus.feature_dim,
        "frame_period_s": corpus.frame_period_s,
        "splits": {},
        "config": config_echo or {},
    }
    for name, split in corpus.splits.items():
        for seq in split.sequences:
            write_fmat(seq.features, root / name / f"{seq.recording_id}.fmat")
            write_frame_labels(
                root / name / f"{seq.recording_id}.labels.csv", seq.labels
            )
        write_rttm(split.reference(), reference_path(root, name))
        manifest["splits"][name] = {
            "recordings": [seq.recording_id for seq in split.sequences],
            "speakers": split.speakers,
        }
    dump_json(manifest, root / MANIFEST)
    logger.info(f"Корпус записан: {root}")
    return root / MANIFEST


def read_manifest(root: Path) -> Dict[str, Any]:
    path = Path(root) / MANIFEST
    if not path.is_file():
        raise DataError(f"Манифест корпуса не найден: {path}")
    manifest = load_json(path)
    for key in ("feature_dim", "frame_period_s", "splits"):
        if key not in manifest:
            raise DataError(f"{path}: в манифесте нет поля '{key}'")
    return manifest


def read_corpus(root: Path, splits: Optional[tuple] = None) -> Corpus:
    """
    Прочитать корпус (все части или только указанные).

    :raises DataError: при отсутствии файлов или несогласованных размерах
    """
    root = Path(root)
    manifest = read_manifest(root)
    feature_dim = int(manifest["feature_dim"])
    period = float(manifest["frame_period_s"])
    loaded = {}
    for name, entry in manifest["splits"].items():
        if splits is not None and name not in splits:
            continue
        sequences = []
        for recording_id in entry["recordings"]:
            features = read_fmat(root / name / f"{recording_id}.fmat")
            if features.ndim != 2 or features.shape[1] != feature_dim:
                raise DataError(
                    f"{recording_id}: форма признаков {features.shape}, "
                    f"ожидалась T×{feature_dim}"
                )
            labels = read_frame_labels(root / name / f"{recording_id}.labels.csv")
            sequences.append(FeatureSequence(recording_id, features, labels, period))
        loaded[name] = CorpusSplit(name=name, sequences=sequences)
    return Corpus(splits=loaded, feature_dim=feature_dim, frame_period_s=period)
