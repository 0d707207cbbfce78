from pathlib import Path

from src.core.exceptions import DataError
from src.core.models.segments import Segment, SegmentList

NA = "<NA>"


def format_rttm_line(segment: Segment) -> str:
    """SPEAKER <rec> 1 <tbeg> <tdur> <NA> <NA> <label> <NA> <NA>."""
    return (
        f"SPEAKER {segment.recording_id} 1 {segment.start:.3f} "
        f"{segment.duration:.3f} {NA} {NA} {segment.speaker} {NA} {NA}"
    )


def parse_rttm_line(line: str, line_number: int) -> Segment:
    """
    Разобрать строку SPEAKER.

    :raises DataError: с номером строки при нарушении формата
    """
    fields = line.split()
    if len(fields) < 9 or fields[0] != "SPEAKER":
        raise DataError(
            f"RTTM строка {line_number}: ожидается запись SPEAKER: {line!r}"
        )
    try:
        start = round(float(fields[3]), 3)
        duration = round(float(fields[4]), 3)
    except ValueError as e:
        raise DataError(f"RTTM строка {line_number}: нечисловое время: {line!r}") from e
    try:
        return Segment(
            recording_id=fields[1],
            start=start,
            end=round(start + duration, 3),
            speaker=fields[7],
        )
    except DataError as e:
        raise DataError(f"RTTM строка {line_number}: {e}") from e


def write_rttm(segments: SegmentList, path: Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [format_rttm_line(s) for s in segments.sorted()]
    path.write_text("".join(f"{line}\n" for line in lines), encoding="utf-8")


def read_rttm(path: Path) -> SegmentList:
    """
    Прочитать RTTM; пустые строки и комментарии (;;) пропускаются.

    :param path: Путь к файлу
    :return: SegmentList
    """
    path = Path(path)
    if not path.is_file():
        raise DataError(f"Файл RTTM не найден: {path}")
    segments = []
    for number, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip() or line.startswith(";;"):
            continue
        segments.append(parse_rttm_line(line, number))
    return SegmentList(segments)
