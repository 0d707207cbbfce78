import numpy as np
import pytest

from src.application.combiners import (
    bottleneck,
    combine_consec1,
    combine_consec2,
    combine_consec_fc,
    combine_simultaneous,
    fc_transform,
    flatten_systems,
    stack_heads,
    stack_systems,
)
from src.application.inputs.experiment import PenaltyConfig
from src.application.layers.attention import (
    AttentionParams,
    compute_annotations,
    self_atten,
)
from src.core.exceptions import DataError, DimensionError
from src.core.tensor import Tensor

PENALTY = PenaltyConfig(mu=0.1, preset="original")


def params(rng, n: int, h: int, d_a: int = 3) -> AttentionParams:
    return AttentionParams(
        Tensor(rng.normal(size=(n, d_a))), Tensor(rng.normal(size=(d_a, h)))
    )


def uniform_params(rng, n: int, h: int, d_a: int = 3) -> AttentionParams:
    return AttentionParams(
        Tensor(rng.normal(size=(n, d_a))), Tensor(np.zeros((d_a, h)))
    )


@pytest.mark.unit
class TestSimultaneous:
    def test_single_system_is_plain_self_attention(self, rng):
        H = Tensor(rng.normal(size=(6, 4)))
        p = params(rng, 4, 2)
        E, P = combine_simultaneous([H], p, PENALTY)
        E_ref, P_ref = self_atten(H, p, PENALTY)
        np.testing.assert_array_equal(E.data, E_ref.data)
        assert P.item() == P_ref.item()

    def test_equal_systems_with_uniform_weights_give_column_mean(self, rng):
        H = rng.normal(size=(5, 3))
        E, _ = combine_simultaneous(
            [Tensor(H), Tensor(H.copy())], uniform_params(rng, 3, 2), PENALTY
        )
        np.testing.assert_allclose(E.data, np.tile(H.mean(axis=0), (2, 1)))

    def test_shapes(self, rng):
        hs = [Tensor(rng.normal(size=(200, 128))) for _ in range(2)]
        p = params(rng, 128, 5, d_a=16)
        assert compute_annotations(stack_systems(hs), p).A.shape == (400, 5)
        E, _ = combine_simultaneous(hs, p, PENALTY)
        assert E.shape == (5, 128)

    def test_rows_are_grouped_by_system(self, rng):
        first, second = rng.normal(size=(3, 2)), rng.normal(size=(3, 2))
        stacked = stack_systems([Tensor(first), Tensor(second)]).data
        np.testing.assert_array_equal(stacked, np.vstack([first, second]))

    def test_mismatched_systems(self, rng):
        with pytest.raises(DimensionError):
            stack_systems([Tensor(np.zeros((5, 3))), Tensor(np.zeros((4, 3)))])
        with pytest.raises(DataError):
            combine_simultaneous([], params(rng, 3, 2), PENALTY)


@pytest.mark.unit
class TestConsec1:
    def test_single_system_returns_flattened_output(self, rng):
        E1 = rng.normal(size=(2, 3))
        out, _ = combine_consec1([Tensor(E1)], params(rng, 6, 2), PENALTY)
        np.testing.assert_allclose(out.data, np.tile(E1.reshape(1, -1), (2, 1)))

    def test_equal_systems_give_flattened_output(self, rng):
        E1 = rng.normal(size=(2, 3))
        out, _ = combine_consec1(
            [Tensor(E1), Tensor(E1.copy())], params(rng, 6, 1), PENALTY
        )
        np.testing.assert_allclose(out.data, E1.reshape(1, -1), atol=1e-12)

    def test_three_systems_match_weighted_sum(self, rng):
        es = [rng.normal(size=(2, 3)) for _ in range(3)]
        p = params(rng, 6, 1)
        out, _ = combine_consec1([Tensor(e) for e in es], p, PENALTY)
        weights = compute_annotations(
            flatten_systems([Tensor(e) for e in es]), p
        ).A.data[:, 0]
        expected = np.zeros(6)
        for w, e in zip(weights, es):
            expected += w * e.reshape(-1)
        np.testing.assert_allclose(out.data[0], expected)

    def test_head_counts_must_match(self, rng):
        with pytest.raises(DimensionError):
            flatten_systems([Tensor(np.zeros((2, 3))), Tensor(np.zeros((3, 3)))])


@pytest.mark.unit
class TestConsec2:
    def test_one_system_one_head_repeats_vector(self, rng):
        e = rng.normal(size=4)
        out, _ = combine_consec2([Tensor(e)], params(rng, 4, 3), PENALTY)
        np.testing.assert_array_equal(out.data, np.tile(e, (3, 1)))

    def test_uniform_weights_give_mean_head(self, rng):
        blocks = [rng.normal(size=(2, 4)), rng.normal(size=(3, 4))]
        out, _ = combine_consec2(
            [Tensor(b) for b in blocks], uniform_params(rng, 4, 2), PENALTY
        )
        mean = np.vstack(blocks).mean(axis=0)
        np.testing.assert_allclose(out.data, np.tile(mean, (2, 1)))

    def test_unequal_head_counts_are_accepted(self, rng):
        blocks = [Tensor(rng.normal(size=(h, 4))) for h in (1, 2, 5)]
        assert stack_heads(blocks).shape == (8, 4)

    def test_shapes(self, rng):
        blocks = [Tensor(rng.normal(size=(5, 128))) for _ in range(2)]
        assert stack_heads(blocks).shape == (10, 128)
        out, _ = combine_consec2(blocks, params(rng, 128, 5, d_a=16), PENALTY)
        assert out.shape == (5, 128)

    def test_head_width_mismatch(self):
        with pytest.raises(DimensionError):
            stack_heads([Tensor(np.zeros((2, 4))), Tensor(np.zeros((2, 5)))])
        with pytest.raises(DataError):
            stack_heads([])


@pytest.mark.unit
class TestFcTransform:
    def test_identity_on_nonnegative_input(self, rng):
        E = np.abs(rng.normal(size=(3, 4)))
        out = fc_transform(Tensor(E), Tensor(np.eye(4)))
        np.testing.assert_array_equal(out.data, E)

    def test_zero_weights(self, rng):
        out = fc_transform(Tensor(rng.normal(size=(3, 4))), Tensor(np.zeros((4, 2))))
        np.testing.assert_array_equal(out.data, np.zeros((3, 2)))

    def test_matches_matmul_and_clamp(self, rng):
        E, W = rng.normal(size=(3, 4)), rng.normal(size=(4, 6))
        np.testing.assert_allclose(
            fc_transform(Tensor(E), Tensor(W)).data, np.maximum(E @ W, 0.0)
        )

    def test_dimension_mismatch(self, rng):
        with pytest.raises(DimensionError):
            fc_transform(Tensor(np.zeros((3, 4))), Tensor(np.zeros((5, 2))))


@pytest.mark.unit
class TestConsecFc:
    def test_single_system_identity(self, rng):
        E = np.abs(rng.normal(size=(2, 3)))
        out = combine_consec_fc(
            [Tensor(E)], Tensor(np.eye(6)), Tensor(np.zeros((1, 6)))
        )
        np.testing.assert_array_equal(out.data, E.reshape(1, -1))

    @pytest.mark.parametrize("k", [1, 2, 4])
    def test_output_width_and_oracle(self, rng, k):
        es = [rng.normal(size=(2, 3)) for _ in range(k)]
        W, b = rng.normal(size=(6 * k, 5)), rng.normal(size=(1, 5))
        out = combine_consec_fc([Tensor(e) for e in es], Tensor(W), Tensor(b))
        joined = np.concatenate([e.reshape(-1) for e in es])
        assert out.shape == (1, 5)
        np.testing.assert_allclose(out.data[0], np.maximum(joined @ W + b[0], 0.0))

    def test_errors(self):
        with pytest.raises(DataError):
            combine_consec_fc([], Tensor(np.zeros((6, 2))), Tensor(np.zeros((1, 2))))
        with pytest.raises(DimensionError):
            combine_consec_fc(
                [Tensor(np.zeros((2, 3)))],
                Tensor(np.zeros((5, 2))),
                Tensor(np.zeros((1, 2))),
            )


@pytest.mark.unit
class TestBottleneck:
    def test_heads_to_embedding(self, rng):
        out = bottleneck(
            Tensor(rng.normal(size=(5, 128))),
            Tensor(rng.normal(size=(640, 128))),
            Tensor(np.zeros((1, 128))),
        )
        assert out.shape == (1, 128)

    def test_zero_weights_and_bias(self, rng):
        out = bottleneck(
            Tensor(rng.normal(size=(2, 3))),
            Tensor(np.zeros((6, 4))),
            Tensor(np.zeros((1, 4))),
        )
        np.testing.assert_array_equal(out.data, np.zeros((1, 4)))

    def test_linear_without_bias(self, rng):
        W, b = Tensor(rng.normal(size=(6, 4))), Tensor(np.zeros((1, 4)))
        x, y = rng.normal(size=(2, 3)), rng.normal(size=(2, 3))
        combined = bottleneck(Tensor(2.0 * x - 3.0 * y), W, b).data
        separate = (
            2.0 * bottleneck(Tensor(x), W, b).data
            - 3.0 * bottleneck(Tensor(y), W, b).data
        )
        np.testing.assert_allclose(combined, separate, atol=1e-12)

    def test_list_of_blocks_is_concatenated_in_order(self, rng):
        blocks = [rng.normal(size=(2, 3)), rng.normal(size=(1, 3))]
        W = rng.normal(size=(9, 2))
        out = bottleneck(
            [Tensor(b) for b in blocks], Tensor(W), Tensor(np.zeros((1, 2)))
        )
        flat = np.concatenate([b.reshape(-1) for b in blocks])
        np.testing.assert_allclose(out.data[0], flat @ W)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            bottleneck(
                Tensor(np.zeros((2, 3))),
                Tensor(np.zeros((5, 4))),
                Tensor(np.zeros((1, 4))),
            )


@pytest.mark.unit
def test_random_shapes_are_consistent():
    rng = np.random.default_rng(11)
    for _ in range(50):
        k, T, n, h = (int(v) for v in rng.integers(1, 5, size=4))
        hs = [Tensor(rng.normal(size=(T, n))) for _ in range(k)]
        E, P = combine_simultaneous(hs, params(rng, n, h), PENALTY)
        assert E.shape == (h, n) and P.item() >= 0.0
        es = [Tensor(rng.normal(size=(h, n))) for _ in range(k)]
        out, _ = combine_consec1(es, params(rng, h * n, 2), PENALTY)
        assert out.shape == (2, h * n)
        heads = [
            Tensor(rng.normal(size=(int(rng.integers(1, 4)), n))) for _ in range(k)
        ]
        out2, _ = combine_consec2(heads, params(rng, n, h), PENALTY)
        assert out2.shape == (h, n)
