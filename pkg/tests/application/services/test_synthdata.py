import numpy as np
import pytest

from src.application.inputs.experiment import SynthConfig
from src.application.services.synthdata import (
    generate_corpus,
    sample_speaker_means,
    synthesize_recording,
)
from src.core.exceptions import DataError


def number(speaker: str) -> int:
    return int(speaker[3:])


def small_synth(**overrides) -> SynthConfig:
    values = dict(
        num_speakers=5,
        dev_seen_speakers=1,
        dev_new_speakers=2,
        eval_speakers=3,
        feature_dim=8,
        turn_frames_min=10,
        turn_frames_max=20,
        turns_per_recording=5,
        speakers_per_recording=2,
        train_recordings=3,
        dev_recordings=2,
        eval_recordings=2,
        seed=11,
    )
    values.update(overrides)
    return SynthConfig(**values)


@pytest.mark.unit
class TestSpeakerMeans:
    def test_unit_norm_and_minimum_angle(self, rng):
        means = sample_speaker_means(6, 10, 60.0, rng)
        np.testing.assert_allclose(np.linalg.norm(means, axis=1), np.ones(6))
        cosines = means @ means.T
        off_diagonal = cosines[~np.eye(6, dtype=bool)]
        assert off_diagonal.max() <= np.cos(np.deg2rad(60.0)) + 1e-9

    def test_infeasible_angle(self, rng):
        with pytest.raises(DataError):
            sample_speaker_means(5, 2, 90.0, rng, max_rejections=100)


@pytest.mark.unit
class TestRecording:
    def test_noiseless_frames_equal_means(self, rng):
        cfg = small_synth(sigma=0.0)
        means = dict(zip(["a", "b"], sample_speaker_means(2, 8, 60.0, rng)))
        seq = synthesize_recording("rec", ["a", "b"], means, cfg, rng)
        expected = np.stack([means[label] for label in seq.labels])
        np.testing.assert_allclose(seq.features, expected, atol=1e-12)

    def test_adjacent_turns_change_speaker(self, rng):
        cfg = small_synth()
        means = dict(zip(["a", "b", "c"], sample_speaker_means(3, 8, 60.0, rng)))
        seq = synthesize_recording("rec", ["a", "b", "c"], means, cfg, rng)
        turns = seq.to_segments()
        assert len(turns) == cfg.turns_per_recording
        for segment in turns:
            frames = round(segment.duration / seq.frame_period_s)
            assert cfg.turn_frames_min <= frames <= cfg.turn_frames_max

    def test_frames_are_closest_to_own_mean(self, rng):
        cfg = small_synth(feature_dim=20, turn_frames_min=100, turn_frames_max=200)
        ids = ["a", "b", "c", "d"]
        vectors = sample_speaker_means(4, 20, 60.0, rng)
        seq = synthesize_recording("rec", ids, dict(zip(ids, vectors)), cfg, rng)
        nearest = np.argmax(seq.features @ vectors.T, axis=1)
        truth = np.array([ids.index(label) for label in seq.labels])
        assert np.mean(nearest == truth) >= 0.99


@pytest.mark.unit
class TestCorpus:
    def test_generation_is_deterministic(self):
        first, second = generate_corpus(small_synth()), generate_corpus(small_synth())
        for name in ("train", "dev", "eval"):
            for a, b in zip(first.split(name).sequences, second.split(name).sequences):
                assert a.recording_id == b.recording_id
                assert a.labels == b.labels
                np.testing.assert_array_equal(a.features, b.features)

    def test_speaker_sets(self):
        corpus = generate_corpus(small_synth())
        train = set(corpus.split("train").speakers)
        dev = set(corpus.split("dev").speakers)
        evaluation = set(corpus.split("eval").speakers)
        new_dev = {s for s in dev if number(s) >= 5}
        assert all(number(s) < 5 for s in train)
        assert new_dev <= {"spk005", "spk006"}
        assert len(dev - new_dev) <= 1
        assert all(number(s) >= 7 for s in evaluation)
        assert evaluation.isdisjoint(train | dev)

    def test_recording_ids_and_shapes(self):
        corpus = generate_corpus(small_synth())
        ids = [seq.recording_id for seq in corpus.split("dev").sequences]
        assert ids == ["dev_000", "dev_001"]
        assert corpus.feature_dim == 8
        for seq in corpus.split("eval").sequences:
            assert seq.features.shape[1] == 8
            assert len(set(seq.labels)) <= 2

    def test_reference_matches_labels(self):
        corpus = generate_corpus(small_synth())
        split = corpus.split("eval")
        reference = split.reference()
        for seq in split.sequences:
            frames = 0
            for segment in reference.for_recording(seq.recording_id):
                count = round(segment.duration / seq.frame_period_s)
                assert set(seq.labels[frames : frames + count]) == {segment.speaker}
                frames += count
            assert frames == seq.num_frames

    def test_invalid_config(self):
        with pytest.raises(ValueError):
            small_synth(turn_frames_min=30, turn_frames_max=20)
