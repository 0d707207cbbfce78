import numpy as np
import pytest

from src.application.services.scoring import (
    best_mapping,
    best_mapping_brute_force,
    format_report_table,
    overlap_matrix,
    ser,
    windows_to_segments,
)
from src.core.exceptions import DataError
from src.core.models.segments import Segment, SegmentList


def segments(*items, recording_id: str = "rec") -> SegmentList:
    return SegmentList([Segment(recording_id, s, e, spk) for s, e, spk in items])


@pytest.mark.unit
class TestWindowsToSegments:
    def test_single_window(self):
        expected = segments((0.0, 2.0, "A"))
        assert windows_to_segments("rec", ["A"], [(0.0, 2.0)]) == expected

    def test_same_label_windows_merge(self):
        result = windows_to_segments("rec", ["A", "A"], [(0.0, 2.0), (1.0, 3.0)])
        assert result == segments((0.0, 3.0, "A"))

    def test_overlap_is_split_at_center_midpoint(self):
        result = windows_to_segments("rec", ["A", "B"], [(0.0, 2.0), (1.0, 3.0)])
        assert result == segments((0.0, 1.5, "A"), (1.5, 3.0, "B"))

    def test_last_segment_is_extended(self):
        result = windows_to_segments("rec", ["A", "B"], [(0.0, 2.0), (1.0, 3.0)], 3.42)
        assert result.segments[-1] == Segment("rec", 1.5, 3.42, "B")

    def test_unsorted_windows(self):
        with pytest.raises(DataError):
            windows_to_segments("rec", ["A", "B"], [(1.0, 3.0), (0.0, 2.0)])

    def test_label_count_mismatch(self):
        with pytest.raises(DataError):
            windows_to_segments("rec", ["A"], [(0.0, 2.0), (1.0, 3.0)])

    def test_no_windows(self):
        assert len(windows_to_segments("rec", [], [])) == 0


@pytest.mark.unit
class TestSer:
    def test_identical_labelling(self):
        ref = segments((0.0, 4.0, "A"), (4.0, 7.5, "B"), (7.5, 9.0, "A"))
        report = ser(ref, ref, 0.25)
        assert report.ser_percent == 0.0
        assert report.speaker_error_time_s == 0.0

    def test_label_names_do_not_matter(self):
        ref = segments((0.0, 4.0, "A"), (4.0, 8.0, "B"))
        hyp = segments((0.0, 4.0, "rec_c1"), (4.0, 8.0, "rec_c0"))
        report = ser(ref, hyp, 0.25)
        assert report.ser_percent == 0.0
        assert report.mapping["rec"] == {"rec_c1": "A", "rec_c0": "B"}

    def test_hand_timeline(self):
        ref = segments((0.0, 10.0, "A"))
        hyp = segments((0.0, 6.0, "X"), (6.0, 10.0, "Y"))
        report = ser(ref, hyp, 0.25)
        assert report.scored_time_s == pytest.approx(9.5)
        assert report.speaker_error_time_s == pytest.approx(3.75)
        assert report.ser_percent == pytest.approx(100 * 3.75 / 9.5)
        assert round(report.ser_percent, 2) == 39.47
        assert report.mapping["rec"] == {"X": "A"}

    def test_reference_overlap_is_not_scored(self):
        ref = segments((0.0, 6.0, "A"), (4.0, 10.0, "B"))
        report = ser(ref, ref, 0.0)
        assert report.scored_time_s == pytest.approx(8.0)

    def test_missing_hypothesis_counts_as_error(self):
        ref = segments((0.0, 10.0, "A"))
        report = ser(ref, segments((0.0, 5.0, "X")), 0.0)
        assert report.ser_percent == pytest.approx(50.0)

    def test_recordings_are_summed(self):
        ref = SegmentList(
            segments((0.0, 10.0, "A"), recording_id="r1").segments
            + segments((0.0, 10.0, "B"), recording_id="r2").segments
        )
        hyp = SegmentList(
            segments((0.0, 5.0, "X"), (5.0, 10.0, "Y"), recording_id="r1").segments
            + segments((0.0, 10.0, "Z"), recording_id="r2").segments
        )
        report = ser(ref, hyp, 0.0)
        assert report.per_recording["r1"]["ser"] == pytest.approx(50.0)
        assert report.per_recording["r2"]["ser"] == 0.0
        assert report.ser_percent == pytest.approx(25.0)
        table = format_report_table(report)
        assert "TOTAL" in table and "r2" in table

    def test_empty_reference(self):
        with pytest.raises(DataError):
            ser(SegmentList(), segments((0.0, 1.0, "A")))

    def test_collar_never_increases_scored_time(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            cuts = np.sort(rng.choice(np.arange(1, 200), size=5, replace=False)) / 10.0
            bounds = [0.0, *cuts.tolist(), 20.0]
            ref = segments(
                *[
                    (a, b, "AB"[i % 2])
                    for i, (a, b) in enumerate(zip(bounds, bounds[1:]))
                ]
            )
            collars = (0.0, 0.1, 0.25, 0.5, 1.0)
            scored = [ser(ref, ref, c).scored_time_s for c in collars]
            assert all(x >= y for x, y in zip(scored, scored[1:]))


@pytest.mark.unit
class TestMapping:
    def test_overlap_matrix(self):
        ref = segments((0.0, 10.0, "A"))
        hyp = segments((0.0, 6.0, "X"), (6.0, 10.0, "Y"))
        O, hyp_labels, ref_labels, scored, _ = overlap_matrix(ref, hyp, 0.25)
        assert hyp_labels == ["X", "Y"] and ref_labels == ["A"]
        np.testing.assert_array_equal(O, [[5750], [3750]])
        assert scored == 9500

    def test_more_clusters_than_speakers(self):
        O = np.array([[1, 9], [8, 2], [5, 5]])
        assert best_mapping(O) == {0: 1, 1: 0}

    def test_hungarian_matches_brute_force(self):
        rng = np.random.default_rng(0)
        for _ in range(200):
            n_hyp, n_ref = (int(v) for v in rng.integers(1, 7, size=2))
            O = rng.integers(0, 1000, size=(n_hyp, n_ref))
            mapping = best_mapping(O)
            _, total = best_mapping_brute_force(O)
            assert sum(O[h, r] for h, r in mapping.items()) == total
            assert len(set(mapping.values())) == len(mapping) == min(n_hyp, n_ref)
