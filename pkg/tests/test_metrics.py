import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from oracles import betti_by_flood_fill
from topoloss.metrics import (
    betti_error,
    cl_dice,
    dice_and_accuracy,
    evaluate_batch,
    metric_records,
    metric_table,
    thin,
)
from topoloss.persistence import betti_numbers


def blob(shape, r0, r1, c0, c1):
    m = np.zeros(shape, dtype=bool)
    m[r0:r1, c0:c1] = True
    return m


class TestBettiError:
    def test_identical(self):
        m = blob((8, 8), 2, 5, 2, 5)
        assert betti_error(m, m) == (0, 0)

    def test_component_count_difference(self):
        one = blob((8, 8), 2, 4, 2, 4)
        two = one | blob((8, 8), 5, 7, 5, 7)
        assert betti_error(two, one) == (1, 0)

    def test_loop_difference(self):
        solid = blob((6, 6), 1, 5, 1, 5)
        ring = solid.copy()
        ring[2:4, 2:4] = False
        assert betti_error(solid, ring) == (0, 1)

    def test_symmetric(self):
        a = blob((8, 8), 0, 3, 0, 3)
        b = blob((8, 8), 4, 8, 4, 8) | blob((8, 8), 0, 2, 5, 7)
        assert betti_error(a, b) == betti_error(b, a)


class TestDiceAccuracy:
    def test_equal_masks(self):
        m = blob((6, 6), 1, 4, 1, 4)
        assert dice_and_accuracy(m, m) == (1.0, 1.0)

    def test_disjoint(self):
        a = blob((6, 6), 0, 2, 0, 2)
        b = blob((6, 6), 4, 6, 4, 6)
        dice, _ = dice_and_accuracy(a, b)
        assert dice == 0.0

    def test_partial_overlap(self):
        t = blob((4, 4), 1, 2, 0, 4)  # 4 pixels in a row
        p = blob((4, 4), 1, 2, 0, 2)  # the 2 left ones
        dice, _ = dice_and_accuracy(p, t)
        assert dice == pytest.approx(2 * 2 / (2 + 4))

    def test_both_empty(self):
        e = np.zeros((4, 4), dtype=bool)
        dice, acc = dice_and_accuracy(e, e)
        assert (dice, acc) == (1.0, 1.0)

    def test_symmetric(self):
        a = blob((6, 6), 0, 3, 0, 4)
        b = blob((6, 6), 2, 5, 1, 5)
        assert dice_and_accuracy(a, b)[0] == dice_and_accuracy(b, a)[0]


class TestThin:
    def test_skeleton_inside_mask(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            m = rng.random((12, 12)) > 0.55
            s = thin(m)
            assert not (s & ~m).any()

    def test_nonempty_stays_nonempty(self):
        # a 2x2 block would vanish under unguarded parallel thinning
        m = blob((6, 6), 2, 4, 2, 4)
        s = thin(m)
        assert s.any() and not (s & ~m).any()

    def test_thick_bar_reduces_to_line(self):
        m = blob((9, 16), 3, 6, 2, 14)  # 3 rows thick
        s = thin(m)
        assert s.sum() < m.sum()
        rows = {r for r, c in np.argwhere(s)}
        assert rows == {4}  # the centerline row survives

    @settings(max_examples=30, deadline=None)
    @given(arrays(np.bool_, (8, 8), elements=st.booleans()))
    def test_subset_and_nonempty_properties(self, m):
        s = thin(m)
        assert not (s & ~m).any()
        if m.any():
            assert s.any()


class TestClDice:
    def test_equal_masks_score_one(self):
        m = blob((8, 8), 2, 6, 2, 6)
        assert cl_dice(m, m) == 1.0

    def test_two_by_two_block_guarded(self):
        m = blob((6, 6), 2, 4, 2, 4)
        assert cl_dice(m, m) == 1.0

    def test_disjoint_masks_score_zero(self):
        a = blob((8, 8), 0, 2, 0, 2)
        b = blob((8, 8), 5, 7, 5, 7)
        assert cl_dice(a, b) == 0.0

    def test_empty_conventions(self):
        e = np.zeros((5, 5), dtype=bool)
        m = blob((5, 5), 1, 3, 1, 3)
        assert cl_dice(e, e) == 1.0
        assert cl_dice(m, e) == 0.0
        assert cl_dice(e, m) == 0.0

    def test_centerline_of_straight_bar(self):
        # target = the computed skeleton of the thick bar: a straight
        # 1-pixel line, so the thinning oracle pins the score at 1
        p = blob((9, 16), 3, 6, 2, 14)
        t = thin(p)
        assert t.sum() > 1
        assert cl_dice(p, t) == 1.0


class TestEvaluateBatch:
    def test_single_pair_equals_individual(self):
        p = blob((8, 8), 2, 5, 2, 5)
        t = blob((8, 8), 2, 5, 3, 6)
        rep = evaluate_batch([(p, t)])
        dice, acc = dice_and_accuracy(p, t)
        assert rep.dice == dice and rep.accuracy == acc
        assert rep.n_patches == 1

    def test_mean_of_betti_errors(self):
        base = blob((8, 8), 2, 4, 2, 4)
        one_extra = base | blob((8, 8), 5, 7, 5, 7)
        three_extra = one_extra | blob((8, 8), 0, 1, 6, 8) | blob((8, 8), 6, 8, 0, 2)
        rep = evaluate_batch([(one_extra, base), (three_extra, base)])
        assert rep.betti0_err == pytest.approx(2.0)

    def test_repetition_idempotent(self):
        p = blob((8, 8), 1, 4, 1, 4)
        t = blob((8, 8), 2, 5, 2, 5)
        once = evaluate_batch([(p, t)])
        four = evaluate_batch([(p, t)] * 4)  # power-of-two count: division exact
        assert (once.accuracy, once.dice, once.cldice) == (four.accuracy, four.dice, four.cldice)
        five = evaluate_batch([(p, t)] * 5)
        for a, b in [(once.accuracy, five.accuracy), (once.dice, five.dice)]:
            assert a == pytest.approx(b, rel=1e-15)

    def test_empty_batch_rejected(self):
        with pytest.raises(ValueError, match="empty"):
            evaluate_batch([])

    def test_table_and_records(self):
        p = blob((8, 8), 1, 4, 1, 4)
        rep = evaluate_batch([(p, p)])
        assert metric_records(rep)["schema"] == 1
        assert "accuracy" in metric_table(rep)


class TestEulerPersistenceAgreement:
    def test_loop_counts_agree_on_random_masks(self):
        from topoloss.persistence import diagram_of_mask

        rng = np.random.default_rng(3)
        for _ in range(200):
            m = rng.random((16, 16)) > rng.uniform(0.3, 0.7)
            b0, b1 = betti_numbers(m)
            assert (b0, b1) == betti_by_flood_fill(m)
            d = diagram_of_mask(m, pad=False)
            assert len(d.pairs_of_dim(0)) == b0
            assert len(d.pairs_of_dim(1)) == b1
