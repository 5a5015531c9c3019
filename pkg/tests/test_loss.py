import math

import numpy as np
import pytest

from topoloss.loss import (
    PairTerm,
    bce_loss_and_grad,
    frozen_terms,
    frozen_topo_value,
    gradient_from_terms,
    loss_records,
    loss_report,
    topo_gradient,
)
from topoloss.raster import pad_border


def term(dim=0, weight=1.0, birth=0.6, death=0.4, tb=None, td=None,
         creator=(1, 1), destroyer=(2, 2), essential=False):
    if tb is None:
        mid = 0.5 * (birth + death)
        tb, td = mid, mid
    return PairTerm(
        dim=dim, l_index=0, target=None if tb == td else 0, weight=weight,
        birth=birth, death=death, target_birth=tb, target_death=td,
        creator_pixel=creator, destroyer_pixel=destroyer, essential=essential,
    )


class TestContributionArithmetic:
    def test_weighted_real_match(self):
        t = term(weight=0.05, birth=0.9, death=0.1, tb=1.0, td=0.0)
        assert t.contribution == 0.05 * ((0.9 - 1.0) ** 2 + (0.1 - 0.0) ** 2)

    def test_diagonal_target_midpoint(self):
        t = term(weight=1.0, birth=0.6, death=0.4)
        assert t.contribution == (0.6 - 0.5) ** 2 + (0.4 - 0.5) ** 2

    def test_gradient_signs_for_matched_pair(self):
        t = term(weight=0.05, birth=0.9, death=0.1, tb=1.0, td=0.0, creator=(0, 0), destroyer=(3, 3))
        g = gradient_from_terms((t,), (4, 4), pad=False)
        assert g[0, 0] == 2 * 0.05 * (0.9 - 1.0)  # descent raises the creator
        assert g[3, 3] == 2 * 0.05 * (0.1 - 0.0)

    def test_gradient_for_diagonal_pair(self):
        t = term(weight=1.0, birth=0.6, death=0.4, creator=(0, 0), destroyer=(3, 3))
        g = gradient_from_terms((t,), (4, 4), pad=False)
        assert g[0, 0] == pytest.approx(0.2)  # descent shortens the persistence
        assert g[3, 3] == pytest.approx(-0.2)

    def test_essential_term_creator_only(self):
        t = term(weight=1.0, birth=0.8, death=0.0, tb=0.4, td=0.4,
                 creator=(1, 2), destroyer=None, essential=True)
        g = gradient_from_terms((t,), (4, 4), pad=False)
        assert g[1, 2] != 0.0
        assert np.count_nonzero(g) == 1


class TestLossReport:
    def test_perfect_prediction_zero_topo(self):
        mask = np.zeros((8, 8), dtype=bool)
        mask[2:5, 2:5] = True
        for mode in ("vanilla", "spatial"):
            rep = loss_report(mask.astype(float), mask, lam=0.5, mode=mode)
            assert rep.topo_loss == 0.0
            assert rep.total == rep.pixel_loss

    def test_total_affine_in_lambda(self):
        rng = np.random.default_rng(4)
        img = rng.random((10, 10))
        mask = rng.random((10, 10)) > 0.5
        for lam in (0.0, 0.3, 2.0):
            rep = loss_report(img, mask, lam=lam, mode="spatial")
            assert rep.total == rep.pixel_loss + lam * rep.topo_loss

    def test_topo_equals_sum_of_contributions(self):
        rng = np.random.default_rng(5)
        img = rng.random((9, 9))
        mask = rng.random((9, 9)) > 0.6
        rep = loss_report(img, mask, mode="spatial")
        assert rep.topo_loss == math.fsum(t.contribution for t in rep.terms)
        assert all(t.contribution >= 0 for t in rep.terms)

    def test_mode_agreement_with_floor_at_coincident_creators(self):
        # likelihood = dimmed target: every creator coincides with its match
        mask = np.zeros((10, 10), dtype=bool)
        mask[2:5, 2:5] = True
        mask[6:9, 6:9] = True
        img = mask.astype(float) * 0.9
        rep_v = loss_report(img, mask, mode="vanilla")
        rep_s = loss_report(img, mask, mode="spatial")
        tv = {(t.dim, t.l_index): t for t in rep_v.terms}
        for t in rep_s.terms:
            v = tv[(t.dim, t.l_index)]
            assert t.target == v.target
            if t.target is not None:
                assert t.weight == 0.05
                assert t.contribution == 0.05 * v.contribution

    def test_negative_lambda_rejected(self):
        with pytest.raises(ValueError, match="lambda"):
            loss_report(np.zeros((4, 4)), np.zeros((4, 4), dtype=bool), lam=-1.0)

    def test_shape_mismatch_rejected(self):
        with pytest.raises(ValueError, match="shape mismatch"):
            loss_report(np.zeros((4, 4)), np.zeros((4, 5), dtype=bool))

    def test_records_schema(self):
        rng = np.random.default_rng(6)
        rep = loss_report(rng.random((8, 8)), rng.random((8, 8)) > 0.5)
        rec = loss_records(rep)
        assert rec["schema"] == 1
        assert rec["total"] == rec["pixel_loss"] + rec["lambda"] * rec["topo_loss"]["total"]


class TestGradient:
    def test_zero_gradient_at_perfect_prediction(self):
        mask = np.zeros((8, 8), dtype=bool)
        mask[3:6, 2:7] = True
        g = topo_gradient(mask.astype(float), mask, mode="spatial")
        assert (g == 0).all()

    def test_support_subset_of_critical_pixels(self):
        rng = np.random.default_rng(8)
        img = rng.random((12, 12))
        mask = rng.random((12, 12)) > 0.5
        terms, _, _, _ = frozen_terms(img, mask, mode="spatial", pad=True)
        allowed = set()
        for t in terms:
            for px in (t.creator_pixel, t.destroyer_pixel):
                if px is not None:
                    allowed.add((px[0] - 1, px[1] - 1))  # back to unpadded frame
        g = topo_gradient(img, mask, mode="spatial", pad=True)
        support = {tuple(idx) for idx in np.argwhere(g != 0)}
        assert support <= allowed

    def test_frozen_finite_differences_small(self):
        rng = np.random.default_rng(12)
        values = rng.permutation(np.linspace(0.05, 0.95, 64)).reshape(8, 8)
        mask = rng.random((8, 8)) > 0.5
        terms, _, dl, _ = frozen_terms(values, mask, mode="spatial", pad=True)
        grad = gradient_from_terms(terms, dl.shape, pad=True)
        h = 1e-4
        padded = pad_border(values, 1.0)
        for t in terms:
            for px in (t.creator_pixel, t.destroyer_pixel):
                if px is None:
                    continue
                r, c = px
                if r == 0 or c == 0 or r == padded.shape[0] - 1 or c == padded.shape[1] - 1:
                    continue  # ring pixels carry no reported gradient
                up, dn = padded.copy(), padded.copy()
                up[r, c] += h
                dn[r, c] -= h
                fd = (frozen_topo_value(terms, up) - frozen_topo_value(terms, dn)) / (2 * h)
                assert grad[r - 1, c - 1] == pytest.approx(fd, rel=1e-3, abs=1e-9)


class TestBce:
    def test_perfect_binary_prediction(self):
        mask = np.zeros((5, 5), dtype=bool)
        mask[1:3, 1:3] = True
        loss, grad = bce_loss_and_grad(mask.astype(float), mask)
        assert loss <= 1e-6

    def test_half_confidence_closed_form(self):
        loss, grad = bce_loss_and_grad(np.array([[0.5]]), np.array([[1.0]]))
        assert loss == pytest.approx(math.log(2))
        assert grad[0, 0] == pytest.approx(-2.0)

    def test_gradient_matches_finite_differences(self):
        rng = np.random.default_rng(14)
        img = rng.uniform(0.2, 0.8, (6, 6))
        mask = rng.random((6, 6)) > 0.5
        _, grad = bce_loss_and_grad(img, mask)
        h = 1e-6
        for r, c in [(0, 0), (2, 3), (5, 5)]:
            up, dn = img.copy(), img.copy()
            up[r, c] += h
            dn[r, c] -= h
            fd = (bce_loss_and_grad(up, mask)[0] - bce_loss_and_grad(dn, mask)[0]) / (2 * h)
            assert grad[r, c] == pytest.approx(fd, rel=1e-4)
