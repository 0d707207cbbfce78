"""
Speaker error rate на ручной разметке: перекрывающиеся окна превращаются
в гипотезу, оценивается только время речи вне зоны ±collar вокруг
границ эталона и вне участков одновременной речи нескольких дикторов.

Все интервалы считаются в целых миллисекундах.
"""

from itertools import permutations
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import linear_sum_assignment

from src.core.config import config
from src.core.exceptions import DataError
from src.core.logging import get_logger
from src.core.models.segments import Segment, SegmentList, SerReport, to_ms

logger = get_logger(__name__)


def _merge_adjacent(
    recording_id: str, pieces: List[Tuple[int, int, str]]
) -> SegmentList:
    merged: List[List] = []
    for start, end, label in pieces:
        if merged and merged[-1][2] == label and merged[-1][1] == start:
            merged[-1][1] = end
        else:
            merged.append([start, end, label])
    return SegmentList(
        [Segment(recording_id, s / 1000.0, e / 1000.0, label) for s, e, label in merged]
    )


def windows_to_segments(
    recording_id: str,
    labels: Sequence,
    window_times: Sequence[Tuple[float, float]],
    extend_to: Optional[float] = None,
) -> SegmentList:
    """
    Разметка из решений по перекрывающимся окнам: каждый момент времени
    получает метку окна с ближайшим центром, соседние сегменты одного
    диктора сливаются.

    :param recording_id: Запись
    :param labels: Метка каждого окна
    :param window_times: (начало, конец) окон в секундах, по возрастанию начала
    :param extend_to: Продлить последний сегмент до этого времени (конец записи)
    :raises DataError: если окна не отсортированы или числа меток и окон различаются
    """
    if len(labels) != len(window_times):
        raise DataError(f"{len(labels)} меток для {len(window_times)} окон")
    if not window_times:
        return SegmentList()
    starts = np.array([to_ms(s) for s, _ in window_times])
    ends = np.array([to_ms(e) for _, e in window_times])
    if np.any(np.diff(starts) < 0):
        raise DataError(f"{recording_id}: окна не отсортированы по началу")
    centers = (starts + ends) / 2.0
    sorted_centers = np.sort(centers)
    midpoints = np.round((sorted_centers[:-1] + sorted_centers[1:]) / 2.0).astype(int)
    boundaries = np.unique(np.concatenate([starts, ends, midpoints]))

    pieces = []
    for a, b in zip(boundaries[:-1], boundaries[1:]):
        covering = np.flatnonzero((starts <= a) & (ends >= b))
        if covering.size == 0:
            continue
        middle = (a + b) / 2.0
        nearest = covering[np.argmin(np.abs(centers[covering] - middle))]
        pieces.append((int(a), int(b), str(labels[nearest])))

    segments = _merge_adjacent(recording_id, pieces)
    if extend_to is not None and segments.segments:
        last = segments.segments[-1]
        if extend_to > last.end:
            segments.segments[-1] = Segment(
                recording_id, last.start, round(extend_to, 3), last.speaker
            )
    return segments


def _active(segments: Sequence[Tuple[int, int, str]], a: int, b: int) -> List[str]:
    return sorted({label for s, e, label in segments if s <= a and e >= b})


def overlap_matrix(
    ref: SegmentList, hyp: SegmentList, collar: float
) -> Tuple[
    np.ndarray, List[str], List[str], int, List[Tuple[int, int, str, List[str]]]
]:
    """
    Матрица совпадения по времени (гипотеза × эталон) на оцениваемых участках
    одной записи.

    :return: (O в мс, метки гипотезы, метки эталона, оцениваемое время в мс,
        оцениваемые элементарные интервалы с активными метками гипотезы)
    """
    ref_segs = [(to_ms(s.start), to_ms(s.end), s.speaker) for s in ref]
    hyp_segs = [(to_ms(s.start), to_ms(s.end), s.speaker) for s in hyp]
    collar_ms = to_ms(collar)

    ref_bounds = sorted({t for s, e, _ in ref_segs for t in (s, e)})
    zones = [(max(0, t - collar_ms), t + collar_ms) for t in ref_bounds]
    points = set(ref_bounds)
    points.update(t for s, e, _ in hyp_segs for t in (s, e))
    points.update(t for zone in zones for t in zone)
    boundaries = sorted(points)

    ref_labels = sorted({label for _, _, label in ref_segs})
    hyp_labels = sorted({label for _, _, label in hyp_segs})
    r_index = {label: i for i, label in enumerate(ref_labels)}
    h_index = {label: i for i, label in enumerate(hyp_labels)}
    O = np.zeros((len(hyp_labels), len(ref_labels)), dtype=np.int64)

    scored = 0
    intervals = []
    for a, b in zip(boundaries[:-1], boundaries[1:]):
        active_ref = _active(ref_segs, a, b)
        if len(active_ref) != 1:
            continue
        if collar_ms > 0 and any(za <= a and b <= zb for za, zb in zones):
            continue
        duration = b - a
        scored += duration
        active_hyp = _active(hyp_segs, a, b)
        for label in active_hyp:
            O[h_index[label], r_index[active_ref[0]]] += duration
        intervals.append((a, b, active_ref[0], active_hyp))
    return O, hyp_labels, ref_labels, scored, intervals


def best_mapping(O: np.ndarray) -> Dict[int, int]:
    """Взаимно однозначное сопоставление гипотеза -> эталон с максимумом совпадения."""
    if O.size == 0:
        return {}
    rows, cols = linear_sum_assignment(O, maximize=True)
    return {int(r): int(c) for r, c in zip(rows, cols)}


def best_mapping_brute_force(O: np.ndarray) -> Tuple[Dict[int, int], int]:
    """
    Перебор всех взаимно однозначных сопоставлений.

    :return: (сопоставление гипотеза -> эталон, суммарное совпадение)
    """
    n_hyp, n_ref = O.shape
    best: Tuple[Dict[int, int], int] = ({}, 0)
    if n_hyp <= n_ref:
        for cols in permutations(range(n_ref), n_hyp):
            total = int(sum(O[h, c] for h, c in enumerate(cols)))
            if total > best[1] or not best[0]:
                best = ({h: c for h, c in enumerate(cols)}, total)
    else:
        for rows in permutations(range(n_hyp), n_ref):
            total = int(sum(O[r, c] for c, r in enumerate(rows)))
            if total > best[1] or not best[0]:
                best = ({r: c for c, r in enumerate(rows)}, total)
    return best


def score_recording(
    ref: SegmentList, hyp: SegmentList, collar: float
) -> Tuple[int, int, Dict[str, str]]:
    """
    :return: (оцениваемое время мс, ошибочное время мс, сопоставление меток)
    """
    O, hyp_labels, ref_labels, scored, intervals = overlap_matrix(ref, hyp, collar)
    mapping = best_mapping(O)
    named = {hyp_labels[h]: ref_labels[r] for h, r in mapping.items()}
    correct = 0
    for a, b, ref_label, active_hyp in intervals:
        if any(named.get(label) == ref_label for label in active_hyp):
            correct += b - a
    return scored, scored - correct, named


def ser(
    ref: SegmentList, hyp: SegmentList, collar_s: Optional[float] = None
) -> SerReport:
    """
    Speaker error rate по всем записям эталона; итог суммируется
    в порядке сортировки записей.

    :param ref: Эталонная разметка
    :param hyp: Гипотеза
    :param collar_s: Половина ширины зоны вокруг границ эталона (с)
    :raises DataError: для пустого эталона
    """
    collar = config.COLLAR_S if collar_s is None else collar_s
    if len(ref) == 0:
        raise DataError("Пустая эталонная разметка")
    total_scored = total_error = 0
    mapping: Dict[str, Dict[str, str]] = {}
    per_recording: Dict[str, Dict[str, float]] = {}
    for recording_id in ref.recordings():
        scored, error, named = score_recording(
            ref.for_recording(recording_id), hyp.for_recording(recording_id), collar
        )
        total_scored += scored
        total_error += error
        mapping[recording_id] = named
        per_recording[recording_id] = {
            "scored_time": scored / 1000.0,
            "error_time": error / 1000.0,
            "ser": 100.0 * error / scored if scored else 0.0,
        }
    if total_scored == 0:
        logger.warning("Нет оцениваемого времени: вся речь попала в зоны collar")
    return SerReport(
        scored_time_s=total_scored / 1000.0,
        speaker_error_time_s=total_error / 1000.0,
        ser_percent=100.0 * total_error / total_scored if total_scored else 0.0,
        mapping=mapping,
        per_recording=per_recording,
    )


def format_report_table(report: SerReport) -> str:
    """Таблица SER по записям и итог."""
    header = f"{'recording':<20} {'scored, s':>10} {'error, s':>10} {'SER, %':>8}"
    lines = [header, "-" * len(header)]
    for recording_id, row in sorted(report.per_recording.items()):
        lines.append(
            f"{recording_id:<20} {row['scored_time']:>10.3f} "
            f"{row['error_time']:>10.3f} {row['ser']:>8.2f}"
        )
    lines.append("-" * len(header))
    lines.append(
        f"{'TOTAL':<20} {report.scored_time_s:>10.3f} "
        f"{report.speaker_error_time_s:>10.3f} {report.ser_percent:>8.2f}"
    )
    return "\n".join(lines)
