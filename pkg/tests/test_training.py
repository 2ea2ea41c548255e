import math

import numpy as np
import pytest

from milvad.errors import NumericError
from milvad.fusion import FusedBag, fuse_bag
from milvad.head import init_head_parameters
from milvad.pooling import topk_pool
from milvad.synthetic import SynthConfig, generate
from milvad.training import TrainConfig, _epoch_rng, score_video, train


def small_dataset(seed=5, normal=12, anomalous=12, num_segments=8, i3d=4, tsf=4, shift=2.0):
    config = SynthConfig(
        seed=seed,
        num_normal=normal,
        num_anomalous=anomalous,
        num_segments=num_segments,
        i3d_dim=i3d,
        tsf_dim=tsf,
        anomalous_segments_per_video=2,
        signal_shift=shift,
    )
    bags, masks = generate(config)
    return [fuse_bag(b) for b in bags], masks, config


def small_train_config(**overrides):
    defaults = dict(
        k=2, epochs=3, batch_pairs=4, seed=11, hidden_sizes=(8, 8, 4), learning_rate=1e-3
    )
    defaults.update(overrides)
    return TrainConfig(**defaults)


def test_same_seed_gives_identical_runs():
    bags, _, _ = small_dataset()
    config = small_train_config()
    first = train(bags, bags, config)
    second = train(bags, bags, config)
    assert first.train_losses == second.train_losses
    assert first.val_aucs == second.val_aucs
    for w1, w2 in zip(first.parameters.weights, second.parameters.weights):
        assert np.array_equal(w1, w2)
    for b1, b2 in zip(first.parameters.biases, second.parameters.biases):
        assert np.array_equal(b1, b2)


def test_different_seed_changes_run():
    bags, _, _ = small_dataset()
    first = train(bags, None, small_train_config(seed=1))
    second = train(bags, None, small_train_config(seed=2))
    assert first.train_losses != second.train_losses


def test_zero_learning_rate_leaves_parameters_bitwise_unchanged():
    bags, _, _ = small_dataset()
    config = small_train_config(learning_rate=0.0, epochs=4)
    record = train(bags, None, config)
    init = init_head_parameters(
        bags[0].feature_dim,
        config.hidden_sizes,
        config.leaky_slope,
        rng=np.random.default_rng(config.seed),
    )
    for w_trained, w_init in zip(record.parameters.weights, init.weights):
        assert np.array_equal(w_trained, w_init)
    for b_trained, b_init in zip(record.parameters.biases, init.biases):
        assert np.array_equal(b_trained, b_init)
    # Balanced classes mean every epoch sees each video exactly once; with
    # frozen parameters the mean loss is constant up to summation order.
    for loss in record.train_losses:
        assert loss == pytest.approx(record.train_losses[0], rel=1e-12)


def test_single_adam_step_descends_at_tiny_learning_rate():
    bags, _, _ = small_dataset(normal=4, anomalous=4)
    config = small_train_config(batch_pairs=4, epochs=2, learning_rate=1e-6)
    record = train(bags, None, config)
    # One batch per epoch: each epoch's mean loss is evaluated before that
    # epoch's single update, so epoch 2 reflects exactly one step.
    assert record.train_losses[1] < record.train_losses[0]


def test_learns_separable_synthetic_data():
    # Wider layers than the other fixtures: Adam moves each parameter by
    # roughly lr per step, so a (8, 8, 4) head cannot reach confident logits
    # within 30 short epochs no matter how clean the data is.
    bags, masks, synth = small_dataset(normal=40, anomalous=40, i3d=12, tsf=20)
    train_bags, _, val_bags, val_masks = _split(bags, masks, 30, 30)
    config = small_train_config(
        epochs=30, batch_pairs=8, learning_rate=5e-3, hidden_sizes=(64, 32, 16)
    )
    record = train(train_bags, val_bags, config)
    assert len(record.train_losses) == 30
    assert all(math.isfinite(loss) for loss in record.train_losses)
    assert record.train_losses[-1] < 0.1
    assert record.val_aucs[-1] >= 0.95
    # Planted segments should dominate their videos' scores.
    hits = 0
    anomalous = [bag for bag in val_bags if bag.label == 1]
    for bag in anomalous:
        _, scores = score_video(bag, record.parameters, config.k)
        top = set(
            topk_pool(scores, synth.anomalous_segments_per_video).selected_indices
        )
        if top == set(val_masks[bag.video_id]):
            hits += 1
    assert hits / len(anomalous) >= 0.9


def _split(bags, masks, first_normal, first_anomalous):
    normals = [b for b in bags if b.label == 0]
    anomalous = [b for b in bags if b.label == 1]
    head = normals[:first_normal] + anomalous[:first_anomalous]
    tail = normals[first_normal:] + anomalous[first_anomalous:]
    tail_masks = {b.video_id: masks[b.video_id] for b in tail if b.label == 1}
    return head, masks, tail, tail_masks


def test_epoch_shuffle_is_pure_function_of_seed_and_epoch():
    a = _epoch_rng(5, 3).permutation(10)
    b = _epoch_rng(5, 3).permutation(10)
    c = _epoch_rng(5, 4).permutation(10)
    d = _epoch_rng(6, 3).permutation(10)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)
    assert not np.array_equal(a, d)


def test_score_video_shapes_and_zero_params():
    bags, _, _ = small_dataset(normal=2, anomalous=2)
    config = small_train_config()
    record = train(bags, None, small_train_config(epochs=1))
    probability, scores = score_video(bags[0], record.parameters, config.k)
    assert scores.shape == (bags[0].num_segments,)
    assert 0.0 <= probability <= 1.0
    from milvad.head import HeadParameters

    sizes = (bags[0].feature_dim, 4, 3, 2, 1)
    zero = HeadParameters(
        [np.zeros((a, b)) for a, b in zip(sizes[:-1], sizes[1:])],
        [np.zeros(b) for b in sizes[1:]],
    )
    assert score_video(bags[0], zero, 3)[0] == 0.5


def test_train_config_validation():
    with pytest.raises(ValueError):
        TrainConfig(k=0)
    with pytest.raises(ValueError):
        TrainConfig(epochs=0)
    with pytest.raises(ValueError):
        TrainConfig(batch_pairs=0)
    with pytest.raises(ValueError):
        TrainConfig(learning_rate=-1e-3)
    with pytest.raises(ValueError):
        TrainConfig(moment_decay_1=1.0)
    with pytest.raises(ValueError):
        TrainConfig(moment_decay_2=0.0)
    with pytest.raises(ValueError):
        TrainConfig(epsilon=0.0)
    with pytest.raises(ValueError):
        TrainConfig(seed=-1)
    with pytest.raises(ValueError):
        TrainConfig(seed=2**64)
    with pytest.raises(ValueError):
        TrainConfig(hidden_sizes=(4, 4))
    TrainConfig(seed=2**64 - 1)
    TrainConfig(learning_rate=0.0)


def test_train_input_validation():
    bags, _, _ = small_dataset(normal=3, anomalous=3)
    with pytest.raises(ValueError):
        train([], None, small_train_config())
    with pytest.raises(ValueError):
        train([b for b in bags if b.label == 0], None, small_train_config())
    with pytest.raises(ValueError):
        train(bags, None, small_train_config(k=100))
    ragged = bags + [FusedBag("odd", 1, np.zeros((3, bags[0].feature_dim)))]
    with pytest.raises(ValueError):
        train(ragged, None, small_train_config())
    with pytest.raises(ValueError):
        train(bags, [FusedBag("odd", 1, np.zeros((3, 2)))], small_train_config())


def test_non_finite_features_raise_numeric_error_naming_video():
    bags, _, _ = small_dataset(normal=3, anomalous=3)
    # FusedBag does not revalidate payloads; the trainer must still turn the
    # resulting non-finite scores into a numeric failure, not a crash.
    bad = FusedBag("blowup", 1, np.full((8, 8), np.nan))
    with pytest.raises(NumericError, match="blowup"):
        train(bags + [bad], None, small_train_config(epochs=1))


def test_on_epoch_callback_sees_history():
    bags, _, _ = small_dataset(normal=4, anomalous=4)
    seen = []
    record = train(
        bags,
        bags,
        small_train_config(epochs=2),
        on_epoch=lambda epoch, loss, auc: seen.append((epoch, loss, auc)),
    )
    assert [s[0] for s in seen] == [1, 2]
    assert [s[1] for s in seen] == record.train_losses
    assert [s[2] for s in seen] == record.val_aucs
