"""Objective terms: cross-entropy, distance family, spectral consistency."""

import math

import numpy as np
import pytest

import oracles
from freqrec import Tensor, cross_entropy, distance, frequency_loss, total_loss
from freqrec.errors import ConfigError, ShapeError
from freqrec.gradcheck import assert_gradients_close, finite_diff_grad


def test_uniform_logits_gives_log_v():
    item_count = 7
    table = Tensor(np.random.default_rng(0).normal(size=(item_count + 1, 4)))
    hidden = Tensor(np.zeros((1, 2, 4)))  # zero hidden -> all logits equal
    targets = np.array([[3, 5]])
    mask = np.ones((1, 2), dtype=bool)
    loss = cross_entropy(hidden, table, targets, mask)
    assert loss.item() == pytest.approx(math.log(item_count), rel=1e-12)


def test_confident_target_drives_loss_to_zero():
    table = Tensor(np.vstack([np.zeros(3), np.eye(3)]))  # items 1..3 are basis vectors
    hidden = Tensor(np.zeros((1, 1, 3)))
    hidden.data[0, 0, 1] = 100.0  # hugely aligned with item 2
    loss = cross_entropy(hidden, table, np.array([[2]]), np.ones((1, 1), dtype=bool))
    assert loss.item() < 1e-12


def test_cross_entropy_matches_direct_oracle():
    rng = np.random.default_rng(1)
    table = Tensor(rng.normal(size=(4, 5)))  # 3 items + padding row
    hidden = Tensor(rng.normal(size=(1, 2, 5)))
    targets = np.array([[2, 3]])
    mask = np.ones((1, 2), dtype=bool)
    loss = cross_entropy(hidden, table, targets, mask)
    expected = oracles.cross_entropy_loop(hidden.data, table.data, targets, mask)
    assert loss.item() == pytest.approx(expected, rel=1e-12)


def test_cross_entropy_skips_masked_positions():
    rng = np.random.default_rng(2)
    table = Tensor(rng.normal(size=(6, 4)))
    hidden = Tensor(rng.normal(size=(2, 3, 4)))
    targets = np.array([[0, 2, 4], [0, 0, 1]])
    mask = targets != 0
    loss = cross_entropy(hidden, table, targets, mask)
    expected = oracles.cross_entropy_loop(hidden.data, table.data, targets, mask)
    assert loss.item() == pytest.approx(expected, rel=1e-12)


def test_cross_entropy_errors():
    table = Tensor(np.zeros((4, 3)))
    hidden = Tensor(np.zeros((1, 2, 3)))
    with pytest.raises(ValueError, match="no valid"):
        cross_entropy(hidden, table, np.zeros((1, 2), dtype=int), np.zeros((1, 2), dtype=bool))
    with pytest.raises(IndexError):
        cross_entropy(hidden, table, np.array([[9, 1]]), np.ones((1, 2), dtype=bool))


def test_distance_definitions():
    rng = np.random.default_rng(3)
    p = Tensor(rng.normal(size=(2, 3)))
    for kind in ("l1", "l2", "mix"):
        assert distance(p, p, kind).item() == 0.0
    t = Tensor(p.data - 0.7)
    assert distance(p, t, "l1").item() == pytest.approx(0.7)
    assert distance(p, t, "l2").item() == pytest.approx(0.49)
    assert distance(p, t, "mix").item() == pytest.approx((0.7 + 0.49) / 2)


def test_mix_is_mean_of_l1_and_l2():
    rng = np.random.default_rng(4)
    p = Tensor(rng.normal(size=(3, 4)))
    t = Tensor(rng.normal(size=(3, 4)))
    mix = distance(p, t, "mix").item()
    assert mix == pytest.approx(0.5 * (distance(p, t, "l1").item() + distance(p, t, "l2").item()))


def test_distance_errors():
    with pytest.raises(ShapeError):
        distance(Tensor(np.zeros((2, 2))), Tensor(np.zeros((2, 3))), "l1")
    with pytest.raises(ConfigError):
        distance(Tensor(np.zeros(2)), Tensor(np.zeros(2)), "euclid")


def test_frequency_loss_zero_iff_equal():
    rng = np.random.default_rng(5)
    p = rng.normal(size=(2, 4, 3))
    for kind in ("l1", "l2", "mix"):
        assert frequency_loss(Tensor(p), Tensor(p.copy()), kind).item() == 0.0
    bumped = p.copy()
    bumped[1, 2, 0] += 1e-3
    for kind in ("l1", "l2", "mix"):
        assert frequency_loss(Tensor(p), Tensor(bumped), kind).item() > 1e-12


def test_frequency_loss_symmetry():
    rng = np.random.default_rng(6)
    p = Tensor(rng.normal(size=(2, 5, 3)))
    t = Tensor(rng.normal(size=(2, 5, 3)))
    for kind in ("l1", "l2"):
        assert frequency_loss(p, t, kind).item() == pytest.approx(
            frequency_loss(t, p, kind).item(), rel=1e-12
        )


def test_single_element_difference_matches_loop_oracle():
    rng = np.random.default_rng(7)
    p = rng.normal(size=(1, 4, 2))
    t = p.copy()
    t[0, 1, 1] += 0.37
    for kind in ("l1", "l2", "mix"):
        got = frequency_loss(Tensor(p), Tensor(t), kind).item()
        assert got == pytest.approx(oracles.frequency_loss_loop(p, t, kind), rel=1e-10)


def test_l2_kind_ties_to_two_sided_parseval_weights():
    # the one-sided coefficient sum relates to the full two-sided spectrum by
    # doubling interior bins; both reduce to L * time-domain MSE via Parseval
    rng = np.random.default_rng(8)
    batch, length, dim = 2, 6, 3
    p = rng.normal(size=(batch, length, dim))
    t = rng.normal(size=(batch, length, dim))
    k_count = length // 2 + 1
    loss = frequency_loss(Tensor(p), Tensor(t), "l2").item()
    one_sided_sum = loss * batch * k_count * dim

    two_sided_sum = 0.0
    edge_sum = 0.0
    for b in range(batch):
        for d in range(dim):
            coeffs = oracles.dft_full_loop(p[b, :, d] - t[b, :, d])
            two_sided_sum += float(np.sum(np.abs(coeffs) ** 2))
            edge_sum += abs(coeffs[0]) ** 2
            if length % 2 == 0:
                edge_sum += abs(coeffs[length // 2]) ** 2
    assert one_sided_sum == pytest.approx((two_sided_sum + edge_sum) / 2.0, rel=1e-9)
    time_energy = float(np.sum((p - t) ** 2))
    assert two_sided_sum == pytest.approx(length * time_energy, rel=1e-9)


def test_frequency_loss_gradients():
    rng = np.random.default_rng(9)
    p0 = rng.uniform(-1, 1, size=(2, 4, 3))
    t = Tensor(rng.uniform(-1, 1, size=(2, 4, 3)))
    for kind in ("l1", "l2", "mix"):
        p = Tensor(p0, requires_grad=True)
        frequency_loss(p, t, kind).backward()
        numeric = finite_diff_grad(
            lambda v, k=kind: frequency_loss(Tensor(v), t, k).item(), p0
        )
        assert_gradients_close(p.grad, numeric, label=f"frequency_loss {kind}")


def test_total_loss_blend():
    ce = Tensor(np.array(2.0))
    lf = Tensor(np.array(1.0))
    assert total_loss(ce, lf, 1.0).item() == 2.0
    assert total_loss(ce, lf, 0.0).item() == 1.0
    assert total_loss(ce, lf, 0.6).item() == pytest.approx(1.6)
    with pytest.raises(ConfigError):
        total_loss(ce, lf, 1.2)


def test_total_loss_gradient_reaches_both_terms():
    rng = np.random.default_rng(10)
    p0 = rng.uniform(-1, 1, size=(1, 4, 2))
    t = Tensor(rng.uniform(-1, 1, size=(1, 4, 2)))

    def scalar(v):
        pt = Tensor(v)
        ce_term = (pt * pt).mean()
        return total_loss(ce_term, frequency_loss(pt, t, "mix"), 0.6).item()

    p = Tensor(p0, requires_grad=True)
    total_loss((p * p).mean(), frequency_loss(p, t, "mix"), 0.6).backward()
    assert_gradients_close(p.grad, finite_diff_grad(scalar, p0), label="total_loss")
