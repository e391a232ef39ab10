"""Tests for the tensor substrate: ops, gradients, optimizer and checkpoints."""

import math
import struct

import numpy as np
import pytest

from src.core.exceptions import (
    ContractError,
    DimensionError,
    DomainError,
    FormatError,
    TokenIndexError,
    ValidationError,
)
from src.diffcore import ops
from src.diffcore.checkpoint import decode_checkpoint, encode_checkpoint
from src.diffcore.gradcheck import check_gradients
from src.diffcore.losses import (
    bce_sum,
    binary_cross_entropy,
    cross_entropy_from_logits,
    sequence_cross_entropy,
)
from src.diffcore.nn import BiLSTM, Linear, LSTMCell, bilstm
from src.diffcore.optim import Adam, adam_step, clip_grad_norm
from src.diffcore.rng import SplitMix64
from src.diffcore.tensor import Parameter, Tensor, no_grad

TOLERANCE = 1e-4
SEEDS = range(20)


def leaf(rng: SplitMix64, *shape: int, low: float = -1.0, high: float = 1.0) -> Tensor:
    return Tensor(rng.uniform_range(low, high, shape), requires_grad=True)


def weighted_sum(out: Tensor, weights: np.ndarray) -> Tensor:
    return ops.total(ops.mul(out, Tensor(weights)))


class TestOps:
    """Forward values of the differentiable operations."""

    def test_matmul_identity(self) -> None:
        a = Tensor(np.eye(2))
        b = Tensor([[1.0, 2.0], [3.0, 4.0]])
        np.testing.assert_array_equal(ops.matmul(a, b).data, b.data)

    def test_matmul_zero_row(self) -> None:
        out = ops.matmul(Tensor([[1.0, 0.0]]), Tensor([[0.0], [5.0]]))
        np.testing.assert_array_equal(out.data, [[0.0]])

    def test_matmul_shape_mismatch_names_both_shapes(self) -> None:
        with pytest.raises(DimensionError) as exc_info:
            ops.matmul(Tensor(np.zeros((2, 3))), Tensor(np.zeros((2, 3))))
        assert "(2, 3) vs (2, 3)" in exc_info.value.message

    @pytest.mark.parametrize(
        ("values", "expected"),
        [
            ([0.0, 0.0], [0.5, 0.5]),
            ([7.0, 7.0, 7.0, 7.0], [0.25] * 4),
            ([math.log(1), math.log(2), math.log(3)], [1 / 6, 2 / 6, 3 / 6]),
        ],
    )
    def test_softmax_examples(self, values: list[float], expected: list[float]) -> None:
        out = ops.softmax(Tensor(values)).data
        np.testing.assert_allclose(out, expected, atol=1e-12)
        assert abs(out.sum() - 1.0) < 1e-12

    def test_softmax_is_stable_for_large_logits(self) -> None:
        out = ops.softmax(Tensor([1000.0, 1000.0])).data
        np.testing.assert_allclose(out, [0.5, 0.5])

    def test_softmax_empty_is_domain_error(self) -> None:
        with pytest.raises(DomainError):
            ops.softmax(Tensor(np.zeros(0)))

    def test_sigmoid_limits_and_monotonicity(self) -> None:
        xs = np.linspace(-50.0, 50.0, 101)
        out = ops.sigmoid(Tensor(xs)).data
        assert ops.sigmoid(Tensor(0.0)).item() == 0.5
        assert out[0] < 1e-20
        assert out[-1] > 1.0 - 1e-12
        assert np.all(np.diff(out) >= 0)

    def test_log_of_non_positive_is_domain_error(self) -> None:
        with pytest.raises(DomainError):
            ops.log(Tensor([1.0, 0.0]))

    def test_non_finite_result_is_domain_error(self) -> None:
        with pytest.raises(DomainError) as exc_info:
            ops.mul(Tensor([1e300]), Tensor([1e300]))
        assert exc_info.value.error_code == "NON_FINITE"

    def test_lstm_cell_with_zero_parameters_outputs_zero(self, rng: SplitMix64) -> None:
        cell = LSTMCell(3, 5, rng)
        cell.zero_()
        h, c = cell(Tensor(rng.normal((3,))), *cell.initial_state())
        np.testing.assert_array_equal(h.data, np.zeros(5))
        np.testing.assert_array_equal(c.data, np.zeros(5))

    def test_lstm_cell_shape_mismatch(self, rng: SplitMix64) -> None:
        cell = LSTMCell(3, 5, rng)
        with pytest.raises(DimensionError):
            cell(Tensor(np.zeros(4)), *cell.initial_state())

    def test_bilstm_shapes(self, rng: SplitMix64) -> None:
        net = BiLSTM(3, 4, rng)
        out = net(Tensor(rng.normal((6, 3))))
        assert out.outputs.shape == (6, 8)
        assert out.summary().shape == (16,)

    def test_bilstm_palindrome_with_shared_cell(self, rng: SplitMix64) -> None:
        cell = LSTMCell(3, 4, rng)
        a, b = rng.normal((3,)), rng.normal((3,))
        out = bilstm(Tensor(np.stack([a, b, a])), cell, cell)
        np.testing.assert_allclose(out.h_fwd.data, out.h_bwd.data, atol=1e-15)

    def test_bilstm_empty_sequence(self, rng: SplitMix64) -> None:
        with pytest.raises(DomainError):
            BiLSTM(3, 4, rng)(Tensor(np.zeros((0, 3))))

    def test_no_grad_records_nothing(self) -> None:
        x = Tensor([1.0, 2.0], requires_grad=True)
        with no_grad():
            y = ops.mul(x, 2.0)
        assert not y.requires_grad
        assert y.node is None


class TestLosses:
    """Loss values at hand-evaluated points."""

    def test_uniform_logits(self) -> None:
        loss = cross_entropy_from_logits(Tensor(np.zeros(4)), 2)
        assert loss.item() == pytest.approx(math.log(4))

    def test_confident_logit(self) -> None:
        logits = np.zeros(5)
        logits[1] = 30.0
        assert cross_entropy_from_logits(Tensor(logits), 1).item() < 1e-9

    def test_hand_evaluated_cross_entropy(self) -> None:
        expected = -math.log(math.e**3 / (math.e + math.e**2 + math.e**3))
        loss = cross_entropy_from_logits(Tensor([1.0, 2.0, 3.0]), 2)
        assert loss.item() == pytest.approx(expected, abs=1e-12)

    def test_target_out_of_range(self) -> None:
        with pytest.raises(TokenIndexError):
            cross_entropy_from_logits(Tensor(np.zeros(3)), 3)

    def test_sequence_cross_entropy_matches_rows(self, rng: SplitMix64) -> None:
        logits = rng.normal((4, 6))
        targets = [0, 5, 2, 2]
        expected = sum(
            cross_entropy_from_logits(Tensor(logits[t]), targets[t]).item()
            for t in range(4)
        )
        assert sequence_cross_entropy(Tensor(logits), targets).item() == pytest.approx(
            expected, abs=1e-12
        )

    def test_sequence_cross_entropy_misaligned(self) -> None:
        with pytest.raises(ContractError):
            sequence_cross_entropy(Tensor(np.zeros((2, 3))), [0])

    @pytest.mark.parametrize("label", [0, 1])
    def test_bce_at_half(self, label: int) -> None:
        assert binary_cross_entropy(0.5, label).item() == pytest.approx(math.log(2))

    def test_bce_perfect_prediction(self) -> None:
        assert binary_cross_entropy(1.0 - 1e-12, 1).item() < 1e-6

    def test_bce_hand_evaluated(self) -> None:
        assert binary_cross_entropy(0.8, 0).item() == pytest.approx(-math.log(0.2))

    def test_bce_sum_empty_is_zero(self) -> None:
        assert bce_sum([], []).item() == 0.0

    def test_bce_sum_rejects_non_binary_labels(self) -> None:
        with pytest.raises(ContractError):
            bce_sum(Tensor([0.5]), [2])


class TestGradients:
    """Analytic gradients against central finite differences."""

    @pytest.mark.parametrize("seed", SEEDS)
    def test_elementwise_and_matrix_ops(self, seed: int) -> None:
        rng = SplitMix64(seed)
        m, n, p = 1 + rng.integer(4), 1 + rng.integer(4), 1 + rng.integer(4)
        a, b = leaf(rng, m, n), leaf(rng, n, p)
        c = leaf(rng, m, p)
        w = rng.normal((m, p))

        def loss() -> Tensor:
            product = ops.matmul(a, b)
            gated = ops.mul(ops.tanh(product), c)
            mixed = ops.add(gated, ops.sigmoid(ops.sub(c, product)))
            return weighted_sum(mixed, w)

        assert max(check_gradients(loss, [a, b, c])) < TOLERANCE

    @pytest.mark.parametrize("seed", SEEDS)
    def test_softmax_family(self, seed: int) -> None:
        rng = SplitMix64(seed)
        n = 1 + rng.integer(8)
        x = leaf(rng, n, low=-3.0, high=3.0)
        w1, w2 = rng.normal((n,)), rng.normal((n,))

        def loss() -> Tensor:
            return ops.add(
                weighted_sum(ops.softmax(x), w1), weighted_sum(ops.log_softmax(x), w2)
            )

        assert max(check_gradients(loss, [x])) < TOLERANCE

    @pytest.mark.parametrize("seed", SEEDS)
    def test_structural_ops(self, seed: int) -> None:
        rng = SplitMix64(seed)
        rows, cols = 1 + rng.integer(5), 2 + rng.integer(5)
        x = leaf(rng, rows, cols)
        y = leaf(rng, cols)
        positive = leaf(rng, cols, low=0.5, high=2.0)
        table = leaf(rng, 6, cols)
        indices = [int(i) for i in rng.integers(6, 4)]
        w = rng.normal((3 * cols + 1,))

        def loss() -> Tensor:
            pooled = ops.mean_rows(ops.stack([ops.row(x, r) for r in range(rows)]))
            looked_up = ops.mean_rows(ops.embedding(table, indices))
            everything = ops.reshape(ops.total(x), (1,))
            joined = ops.concat(
                [pooled, ops.mul(looked_up, y), ops.log(positive), everything]
            )
            head = ops.slice_vector(joined, 0, joined.shape[0])
            return weighted_sum(ops.reshape(head, (1, joined.shape[0])), w[None, :])

        assert max(check_gradients(loss, [x, y, positive, table])) < TOLERANCE

    @pytest.mark.parametrize("x", [-2.0, 0.0, 3.0])
    def test_sigmoid_gradient(self, x: float) -> None:
        t = Tensor(x, requires_grad=True)
        ops.sigmoid(t).backward()
        s = 1.0 / (1.0 + math.exp(-x))
        assert t.grad is not None
        assert float(t.grad) == pytest.approx(s * (1.0 - s), rel=1e-12)
        assert max(check_gradients(lambda: ops.sigmoid(t), [t])) < TOLERANCE

    @pytest.mark.parametrize("seed", SEEDS)
    def test_lstm_cell_single_step(self, seed: int) -> None:
        rng = SplitMix64(seed)
        d, hidden = 1 + rng.integer(5), 1 + rng.integer(5)
        cell = LSTMCell(d, hidden, rng)
        x, h, c = leaf(rng, d), leaf(rng, hidden), leaf(rng, hidden)
        w1, w2 = rng.normal((hidden,)), rng.normal((hidden,))

        def loss() -> Tensor:
            h1, c1 = cell(x, h, c)
            return ops.add(weighted_sum(h1, w1), weighted_sum(c1, w2))

        errors = check_gradients(loss, [x, h, c, *cell.parameters()])
        assert max(errors) < TOLERANCE

    @pytest.mark.parametrize("seed", SEEDS)
    def test_lstm_two_step_unroll(self, seed: int) -> None:
        rng = SplitMix64(seed)
        cell = LSTMCell(3, 4, rng)
        x1, x2 = leaf(rng, 3), leaf(rng, 3)
        w = rng.normal((4,))

        def loss() -> Tensor:
            h, c = cell(x1, *cell.initial_state())
            h, c = cell(x2, h, c)
            return weighted_sum(h, w)

        assert max(check_gradients(loss, [x1, x2, *cell.parameters()])) < TOLERANCE

    @pytest.mark.parametrize("seed", SEEDS)
    def test_bilstm_sequence(self, seed: int) -> None:
        rng = SplitMix64(seed)
        net = BiLSTM(2, 3, rng)
        seq = leaf(rng, 3, 2)
        w_out, w_sum = rng.normal((3, 6)), rng.normal((12,))

        def loss() -> Tensor:
            out = net(seq)
            steps = weighted_sum(out.outputs, w_out)
            return ops.add(steps, weighted_sum(out.summary(), w_sum))

        assert max(check_gradients(loss, [seq, *net.parameters()])) < TOLERANCE

    @pytest.mark.parametrize("seed", SEEDS)
    def test_losses(self, seed: int) -> None:
        rng = SplitMix64(seed)
        steps, vocab = 1 + rng.integer(4), 2 + rng.integer(6)
        logits = leaf(rng, steps, vocab, low=-2.0, high=2.0)
        targets = [int(t) for t in rng.integers(vocab, steps)]
        probs = leaf(rng, 5, low=0.1, high=0.9)
        labels = [int(y) for y in rng.integers(2, 5)]

        def loss() -> Tensor:
            return ops.add(
                sequence_cross_entropy(logits, targets), bce_sum(probs, labels)
            )

        assert max(check_gradients(loss, [logits, probs])) < TOLERANCE

    def test_shared_input_accumulates(self) -> None:
        x = Tensor([2.0], requires_grad=True)
        ops.total(ops.mul(x, x)).backward()
        assert x.grad is not None
        assert float(x.grad[0]) == pytest.approx(4.0)

    @pytest.mark.parametrize("seed", SEEDS)
    def test_reused_node_matches_duplicated_graph(self, seed: int) -> None:
        """One intermediate feeding three consumers equals three rebuilt copies."""
        rng = SplitMix64(seed)
        a, b = leaf(rng, 2, 3), leaf(rng, 3, 2)
        w = rng.normal((2, 2))

        def hidden() -> Tensor:
            return ops.tanh(ops.matmul(a, b))

        def build(first: Tensor, second: Tensor, third: Tensor) -> Tensor:
            gated = ops.total(ops.mul(first, ops.sigmoid(second)))
            return ops.add(gated, weighted_sum(third, w))

        shared = hidden()
        build(shared, shared, shared).backward()
        assert a.grad is not None and b.grad is not None
        reused = (a.grad.copy(), b.grad.copy())

        a.zero_grad()
        b.zero_grad()
        build(hidden(), hidden(), hidden()).backward()
        np.testing.assert_allclose(a.grad, reused[0], rtol=1e-12, atol=1e-15)
        np.testing.assert_allclose(b.grad, reused[1], rtol=1e-12, atol=1e-15)
        assert max(check_gradients(lambda: build(*[hidden()] * 3), [a, b])) < TOLERANCE


class TestOptimizer:
    """Adam updates, freezing and clipping."""

    def test_zero_gradient_leaves_parameter(self) -> None:
        p = Parameter([1.5, -2.0])
        p.grad = np.zeros(2)
        adam_step([p], lr=0.1)
        np.testing.assert_array_equal(p.data, [1.5, -2.0])

    def test_frozen_parameter_is_not_updated(self) -> None:
        p = Parameter([1.0], frozen=True)
        p.grad = np.array([3.0])
        adam_step([p], lr=0.1)
        np.testing.assert_array_equal(p.data, [1.0])

    def test_unit_gradient_moves_by_learning_rate(self) -> None:
        p = Parameter(0.0)
        p.grad = np.array(1.0)
        adam_step([p], lr=0.01)
        assert float(p.data) == pytest.approx(-0.01, rel=1e-6)

    def test_step_zeroes_gradients(self) -> None:
        p = Parameter([1.0])
        p.grad = np.array([1.0])
        optimizer = Adam([p], lr=0.1)
        optimizer.step()
        assert p.grad is None
        assert optimizer.steps == 1

    def test_clip_grad_norm(self) -> None:
        a, b = Parameter([3.0]), Parameter([0.0])
        a.grad, b.grad = np.array([3.0]), np.array([4.0])
        norm = clip_grad_norm([a, b], max_norm=1.0)
        assert norm == pytest.approx(5.0)
        assert float(a.gradient[0]) == pytest.approx(0.6)
        assert float(b.gradient[0]) == pytest.approx(0.8)

    def test_clip_skips_small_norms(self) -> None:
        p = Parameter([0.0])
        p.grad = np.array([0.5])
        clip_grad_norm([p], max_norm=5.0)
        assert float(p.gradient[0]) == 0.5


class TestDeterminism:
    def test_splitmix_reference_output(self) -> None:
        assert int(SplitMix64(0).next_u64(1)[0]) == 0xE220A8397B1DCDAF

    def test_same_seed_same_draws(self) -> None:
        a, b = SplitMix64(99), SplitMix64(99)
        np.testing.assert_array_equal(a.normal((10,)), b.normal((10,)))
        np.testing.assert_array_equal(a.permutation(20), b.permutation(20))

    def test_uniform_range(self) -> None:
        draws = SplitMix64(5).uniform(10_000)
        assert draws.min() >= 0.0
        assert draws.max() < 1.0

    def test_training_is_bit_identical(self) -> None:
        def train() -> bytes:
            rng = SplitMix64(11)
            layer = Linear(3, 2, rng)
            optimizer = Adam(layer.parameters(), lr=0.05)
            x = Tensor(rng.normal((4, 3)))
            for _ in range(5):
                ops.total(ops.mul(layer(x), layer(x))).backward()
                optimizer.step()
            return encode_checkpoint(layer.state_dict())

        assert train() == train()


class TestCheckpoint:
    """Binary checkpoint format."""

    def state(self) -> dict[str, np.ndarray]:
        rng = SplitMix64(3)
        return {"layer.weight": rng.normal((3, 2)), "layer.bias": rng.normal((2,))}

    def test_round_trip_is_bit_exact(self) -> None:
        state = self.state()
        blob = encode_checkpoint(state)
        restored = decode_checkpoint(blob)
        assert list(restored) == list(state)
        for name, values in state.items():
            assert restored[name].tobytes() == values.tobytes()
        assert encode_checkpoint(restored) == blob

    def test_bad_magic(self) -> None:
        blob = b"XXXX" + encode_checkpoint(self.state())[4:]
        with pytest.raises(FormatError) as exc_info:
            decode_checkpoint(blob)
        assert exc_info.value.offset == 0

    def test_unsupported_version(self) -> None:
        blob = bytearray(encode_checkpoint(self.state()))
        blob[4:8] = struct.pack("<I", 9)
        with pytest.raises(FormatError) as exc_info:
            decode_checkpoint(bytes(blob))
        assert exc_info.value.offset == 4

    @pytest.mark.parametrize("cut", [3, 11, 20, 40])
    def test_truncation(self, cut: int) -> None:
        with pytest.raises(FormatError):
            decode_checkpoint(encode_checkpoint(self.state())[:cut])

    def test_trailing_bytes(self) -> None:
        with pytest.raises(FormatError):
            decode_checkpoint(encode_checkpoint(self.state()) + b"\x00")

    def test_dimension_overflow(self) -> None:
        blob = bytearray(encode_checkpoint({"w": np.zeros(2)}))
        # header(12) + name length(2) + name(1) + rank(1) -> first dimension
        blob[16:20] = struct.pack("<I", 2**31)
        with pytest.raises(FormatError):
            decode_checkpoint(bytes(blob))

    def test_missing_parameters_are_listed(self) -> None:
        layer = Linear(3, 2, SplitMix64(0))
        state = layer.state_dict("layer.")
        del state["layer.bias"]
        with pytest.raises(ValidationError) as exc_info:
            layer.load_state_dict(state, "layer.")
        assert exc_info.value.details == [{"field": "layer.bias", "message": "missing"}]
