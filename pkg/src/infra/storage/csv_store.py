import csv
from pathlib import Path
from typing import Dict, Iterable, List, Sequence

from src.core.exceptions import DataError
from src.core.types import AnnotationRow, WindowLabelRow


def write_rows(path: Path, fieldnames: Sequence[str], rows: Iterable[Dict]) -> int:
    """
    Записать строки в CSV с заголовком.

    :param path: Путь к файлу
    :param fieldnames: Порядок столбцов
    :param rows: Строки-словари
    :return: Число записанных строк
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    count = 0
    with path.open("w", newline="", encoding="utf-8") as f:
        writer = csv.DictWriter(f, fieldnames=list(fieldnames))
        writer.writeheader()
        for row in rows:
            writer.writerow(row)
            count += 1
    return count


def read_rows(path: Path) -> List[Dict[str, str]]:
    path = Path(path)
    if not path.is_file():
        raise DataError(f"CSV не найден: {path}")
    with path.open(newline="", encoding="utf-8") as f:
        return list(csv.DictReader(f))


def write_frame_labels(path: Path, labels: Sequence[str]) -> None:
    """Покадровые метки дикторов: frame,speaker."""
    write_rows(
        path,
        ("frame", "speaker"),
        ({"frame": t, "speaker": label} for t, label in enumerate(labels)),
    )


def read_frame_labels(path: Path) -> List[str]:
    rows = read_rows(path)
    for expected, row in enumerate(rows):
        if int(row["frame"]) != expected:
            raise DataError(f"{path}: пропущен кадр {expected}")
    return [row["speaker"] for row in rows]


LOSS_TRACE_FIELDS = ("epoch", "train_loss", "val_acc")
ANNOTATION_FIELDS = ("window_id", "head", "frame", "weight")
SWEEP_FIELDS = ("lam", "head", "mean_entropy", "mean_max_weight")
WINDOW_LABEL_FIELDS = ("recording_id", "window_id", "start", "end", "label")


def export_annotations(rows: Iterable[AnnotationRow], path: Path) -> int:
    """Веса внимания по кадрам: window_id,head,frame,weight."""
    return write_rows(path, ANNOTATION_FIELDS, rows)


def export_window_labels(rows: Iterable[WindowLabelRow], path: Path) -> int:
    """Метки кластеров окон: recording_id,window_id,start,end,label."""
    return write_rows(path, WINDOW_LABEL_FIELDS, rows)


def read_window_labels(path: Path) -> List[WindowLabelRow]:
    """
    :raises DataError: для файла без нужных столбцов или с нечисловым временем
    """
    rows = read_rows(path)
    try:
        return [
            WindowLabelRow(
                recording_id=row["recording_id"],
                window_id=int(row["window_id"]),
                start=float(row["start"]),
                end=float(row["end"]),
                label=row["label"],
            )
            for row in rows
        ]
    except (KeyError, ValueError) as e:
        raise DataError(f"{path}: неверная строка меток окон ({e})") from e


def window_labels_path(rttm_path: Path) -> Path:
    """hyp.rttm -> hyp.labels.csv"""
    return Path(rttm_path).with_suffix(".labels.csv")
