import numpy as np
import pytest
from scipy.optimize import linear_sum_assignment

from src.application.inputs.experiment import ClusteringConfig
from src.application.services.clustering import (
    ClusteringService,
    canonical_labels,
    cluster,
    cosine_affinity,
    estimate_k,
    laplacian_spectrum,
    normalized_laplacian,
    refine_affinity,
)
from src.application.services.synthdata import sample_speaker_means
from src.core.exceptions import ConfigError, DataError
from src.core.models.clustering import AffinityMatrix
from src.core.models.embedding import EmbeddingSet
from src.core.models.segments import Segment, SegmentList

ROW_EXAMPLE = np.array(
    [
        [1.0, 0.8, 0.2, 0.1],
        [0.8, 1.0, 0.3, 0.2],
        [0.2, 0.3, 1.0, 0.9],
        [0.1, 0.2, 0.9, 1.0],
    ]
)


def groups(rng, directions: np.ndarray, size: int, sigma: float) -> np.ndarray:
    points = np.repeat(directions, size, axis=0)
    points = points + sigma * rng.normal(size=points.shape)
    return points / np.linalg.norm(points, axis=1, keepdims=True)


def accuracy(truth: np.ndarray, labels: np.ndarray) -> float:
    confusion = np.zeros((labels.max() + 1, truth.max() + 1))
    for h, r in zip(labels, truth):
        confusion[h, r] += 1
    rows, cols = linear_sum_assignment(confusion, maximize=True)
    return confusion[rows, cols].sum() / truth.size


@pytest.mark.unit
class TestAffinity:
    def test_cosine_mapping(self):
        S = cosine_affinity(
            np.array([[1.0, 0.0], [2.0, 0.0], [0.0, 3.0], [-1.0, 0.0]])
        ).S
        assert S[0, 1] == pytest.approx(1.0)
        assert S[0, 2] == pytest.approx(0.5)
        assert S[0, 3] == pytest.approx(0.0)
        np.testing.assert_array_equal(np.diag(S), np.ones(4))
        np.testing.assert_array_equal(S, S.T)

    def test_zero_embedding_names_window(self):
        with pytest.raises(DataError, match="2"):
            cosine_affinity(np.array([[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]]))

    def test_refinement_row_example(self):
        refined = refine_affinity(AffinityMatrix(ROW_EXAMPLE), 0.5)
        np.testing.assert_allclose(refined.S[0], [1.0, 0.8, 0.002, 0.001])
        np.testing.assert_array_equal(refined.S, refined.S.T)
        assert refined.refined_p == 0.5

    def test_refinement_is_idempotent(self, rng):
        once = refine_affinity(cosine_affinity(rng.normal(size=(12, 4))), 0.6)
        twice = refine_affinity(once, 0.6)
        np.testing.assert_array_equal(twice.S, once.S)
        assert twice.refined_p == 0.6

    def test_untagged_matrix_is_refined_again(self, rng):
        once = refine_affinity(cosine_affinity(rng.normal(size=(12, 4))), 0.6)
        again = refine_affinity(AffinityMatrix(once.S), 0.6)
        assert again.S.sum() < once.S.sum()

    def test_refinement_keeps_unit_diagonal_and_range(self, rng):
        refined = refine_affinity(cosine_affinity(rng.normal(size=(10, 3))), 0.3)
        np.testing.assert_array_equal(np.diag(refined.S), np.ones(10))
        assert refined.S.min() >= 0.0 and refined.S.max() <= 1.0

    @pytest.mark.parametrize("p", [0.0, 1.0, -0.1, 1.5])
    def test_threshold_range(self, p):
        with pytest.raises(ConfigError):
            refine_affinity(AffinityMatrix(ROW_EXAMPLE), p)


@pytest.mark.unit
class TestSpectrum:
    def test_two_blocks(self):
        S = np.kron(np.eye(2), np.ones((4, 4)))
        values, _ = laplacian_spectrum(S)
        assert estimate_k(values, 10) == 2

    def test_all_ones(self):
        values, _ = laplacian_spectrum(np.ones((6, 6)))
        assert estimate_k(values, 10) == 1

    def test_laplacian_ignores_self_loops(self):
        S = np.array([[1.0, 0.5], [0.5, 1.0]])
        np.testing.assert_allclose(normalized_laplacian(S), [[1.0, -1.0], [-1.0, 1.0]])

    def test_eigenpairs_have_small_residual(self, rng):
        S = refine_affinity(cosine_affinity(rng.normal(size=(30, 5))), 0.7).S
        L = normalized_laplacian(S)
        values, vectors = laplacian_spectrum(S)
        for i, value in enumerate(values):
            v = vectors[:, i]
            assert np.linalg.norm(L @ v - value * v) <= 1e-8
            assert np.linalg.norm(v) == pytest.approx(1.0)

    def test_k_max_and_small_inputs(self):
        values = [0.0, 0.0, 0.0, 0.0, 0.9]
        assert estimate_k(values, 2) == 1
        assert estimate_k(values, 10) == 4
        assert estimate_k([0.0], 10) == 1

    def test_canonical_labels(self):
        labels = canonical_labels([2, 2, 0, 1, 0])
        np.testing.assert_array_equal(labels, [0, 0, 1, 2, 1])


@pytest.mark.unit
class TestCluster:
    def test_single_window(self):
        result = cluster(np.array([[0.3, 0.4]]), 0.5)
        assert result.k == 1
        np.testing.assert_array_equal(result.labels, [0])

    def test_antipodal_groups(self, rng):
        v = rng.normal(size=6)
        X = groups(rng, np.stack([v, -v]) / np.linalg.norm(v), 20, 0.05)
        result = cluster(X, 0.8, seed=0)
        assert result.k == 2
        np.testing.assert_array_equal(result.labels, [0] * 20 + [1] * 20)

    def test_scale_invariance(self, rng):
        X = groups(rng, np.eye(5)[:3], 10, 0.05)
        first = cluster(X, 0.8, seed=1)
        second = cluster(X * 7.5, 0.8, seed=1)
        np.testing.assert_array_equal(first.labels, second.labels)

    def test_forced_cluster_count(self, rng):
        X = groups(rng, np.eye(4)[:2], 10, 0.05)
        assert cluster(X, 0.8, k_override=3, seed=0).k == 3

    def test_empty_input(self):
        with pytest.raises(DataError):
            cluster(np.zeros((0, 3)), 0.5)


@pytest.mark.unit
class TestClusteringService:
    def antipodal_set(self) -> EmbeddingSet:
        v = np.array([1.0, 2.0, -1.0])
        embeddings = np.stack([v, v, v, -v, -v, -v])
        starts = [float(i) for i in range(6)]
        return EmbeddingSet("dev_000", embeddings, starts, [s + 1.0 for s in starts])

    def test_diarize_labels_are_recording_scoped(self):
        service = ClusteringService(ClusteringConfig(seed=0), collar_s=0.25)
        hyp = service.diarize(self.antipodal_set(), 0.5)
        assert hyp == SegmentList(
            [
                Segment("dev_000", 0.0, 3.0, "dev_000_c0"),
                Segment("dev_000", 3.0, 6.0, "dev_000_c1"),
            ]
        )

    def test_empty_recording(self):
        service = ClusteringService(ClusteringConfig(seed=0))
        empty = EmbeddingSet("rec", np.zeros((0, 3)))
        assert len(service.diarize(empty, 0.5)) == 0

    def test_window_labels_match_segments(self):
        service = ClusteringService(ClusteringConfig(seed=0), collar_s=0.25)
        hyp, rows = service.diarize_windows([self.antipodal_set()], 0.5)
        assert [row["window_id"] for row in rows] == list(range(6))
        assert [row["label"] for row in rows] == ["dev_000_c0"] * 3 + ["dev_000_c1"] * 3
        assert rows[4]["start"] == 4.0 and rows[4]["end"] == 5.0
        assert hyp == service.diarize(self.antipodal_set(), 0.5)

    def test_ties_pick_smallest_threshold(self):
        service = ClusteringService(ClusteringConfig(seed=0), collar_s=0.25)
        reference = SegmentList(
            [Segment("dev_000", 0.0, 3.0, "A"), Segment("dev_000", 3.0, 6.0, "B")]
        )
        result = service.tune_threshold(
            [self.antipodal_set()], reference, grid=[0.7, 0.3, 0.5]
        )
        assert result.ser_by_p == {0.3: 0.0, 0.5: 0.0, 0.7: 0.0}
        assert result.threshold_p == 0.3
        assert result.to_dict()["grid"][0] == {"p": 0.3, "ser": 0.0}

    def test_tuning_needs_reference(self):
        service = ClusteringService(ClusteringConfig(seed=0))
        with pytest.raises(ConfigError):
            service.tune_threshold([self.antipodal_set()], SegmentList())


@pytest.mark.slow
def test_three_groups_give_three_clusters():
    hits = 0
    for seed in range(100):
        rng = np.random.default_rng(seed)
        directions = sample_speaker_means(3, 8, 60.0, rng)
        X = groups(rng, directions, 30, 0.05)
        hits += int(cluster(X, 0.8, seed=seed).k == 3)
    assert hits >= 95


@pytest.mark.slow
def test_four_speakers_are_clustered_accurately():
    scores = []
    for seed in range(100):
        rng = np.random.default_rng(1000 + seed)
        directions = sample_speaker_means(4, 20, 60.0, rng)
        X = groups(rng, directions, 20, 0.05)
        truth = np.repeat(np.arange(4), 20)
        scores.append(accuracy(truth, cluster(X, 0.8, seed=seed).labels))
    assert np.mean(scores) >= 0.98


@pytest.mark.slow
def test_eigengap_finds_four_speakers():
    hits = 0
    for seed in range(100):
        rng = np.random.default_rng(2000 + seed)
        directions = sample_speaker_means(4, 20, 60.0, rng)
        X = groups(rng, directions, 20, 0.05)
        values, _ = laplacian_spectrum(refine_affinity(cosine_affinity(X), 0.8).S)
        hits += int(estimate_k(values, 10) == 4)
    assert hits >= 95
