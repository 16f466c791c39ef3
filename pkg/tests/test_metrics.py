import numpy as np
import pytest

from voxarch.grids import VoxelGrid
from voxarch.metrics import (
    MAX_POINTS,
    chamfer,
    cov_mmd_1nna,
    grid_to_points,
    novelty_histogram,
    pairwise_chamfer,
    tmd,
    uhd,
)

from _oracles import chamfer_brute


def cloud(seed, n=64):
    return np.random.default_rng(seed).random((n, 3)) - 0.5


def random_grid(seed, r=16, density=0.2):
    rng = np.random.default_rng(seed)
    return VoxelGrid((rng.random((r, r, r)) < density).astype(np.uint8))


class TestGridToPoints:
    def test_centers_in_unit_cube(self):
        g = random_grid(0)
        pts = grid_to_points(g)
        assert pts.shape[1] == 3
        assert (pts > -0.5).all() and (pts < 0.5).all()

    def test_center_formula(self):
        occ = np.zeros((4, 4, 4), dtype=np.uint8)
        occ[0, 1, 3] = 1
        pts = grid_to_points(VoxelGrid(occ))
        np.testing.assert_allclose(pts[0], [(0.5 / 4) - 0.5, (1.5 / 4) - 0.5, (3.5 / 4) - 0.5])

    def test_subsample_cap_and_determinism(self):
        g = random_grid(1, r=32, density=0.5)
        assert g.count() > MAX_POINTS
        a = grid_to_points(g, seed=7)
        b = grid_to_points(g, seed=7)
        c = grid_to_points(g, seed=8)
        assert a.shape[0] == MAX_POINTS
        np.testing.assert_array_equal(a, b)
        assert not np.array_equal(a, c)

    def test_empty_grid_rejected(self):
        with pytest.raises(ValueError):
            grid_to_points(VoxelGrid.empty(8))


class TestChamfer:
    def test_matches_brute_force(self):
        for seed in range(8):
            p, q = cloud(seed, 40), cloud(seed + 100, 60)
            assert chamfer(p, q) == pytest.approx(chamfer_brute(p, q), abs=1e-9)

    def test_identical_is_zero(self):
        p = cloud(3)
        assert chamfer(p, p) == 0.0

    def test_symmetric(self):
        p, q = cloud(5), cloud(6)
        assert chamfer(p, q) == pytest.approx(chamfer(q, p), abs=1e-12)

    def test_known_value(self):
        p = np.array([[0.0, 0.0, 0.0]])
        q = np.array([[1.0, 0.0, 0.0], [0.0, 2.0, 0.0]])
        # p->q nearest is distance^2 1; q->p mean is (1 + 4) / 2
        assert chamfer(p, q) == pytest.approx(1.0 + 2.5)

    def test_pairwise_matches_scalar(self):
        gens = [cloud(i, 30) for i in range(3)]
        refs = [cloud(i + 50, 25) for i in range(4)]
        d = pairwise_chamfer(gens, refs)
        assert d.shape == (3, 4)
        for i in range(3):
            for j in range(4):
                assert d[i, j] == pytest.approx(chamfer(gens[i], refs[j]), abs=1e-9)


class TestGenerationMetrics:
    def brute(self, gen, ref):
        """COV / MMD / 1-NNA straight from the definitions."""
        dgr = np.array([[chamfer_brute(g, r) for r in ref] for g in gen])
        cov = len(set(dgr.argmin(axis=1))) / len(ref)
        mmd = dgr.min(axis=0).mean()
        dgg = np.array([[chamfer_brute(a, b) for b in gen] for a in gen])
        drr = np.array([[chamfer_brute(a, b) for b in ref] for a in ref])
        full = np.block([[dgg, dgr], [dgr.T, drr]])
        np.fill_diagonal(full, np.inf)
        labels = np.array([True] * len(gen) + [False] * len(ref))
        correct = labels[full.argmin(axis=1)] == labels
        return cov, mmd, correct.mean()

    def test_matches_brute_force(self):
        gen = [cloud(i, 20) for i in range(6)]
        ref = [cloud(i + 30, 20) for i in range(6)]
        cov, mmd, nna = cov_mmd_1nna(gen, ref)
        bcov, bmmd, bnna = self.brute(gen, ref)
        assert cov == pytest.approx(bcov, abs=1e-9)
        assert mmd == pytest.approx(bmmd, abs=1e-9)
        assert nna == pytest.approx(bnna, abs=1e-9)

    def test_identical_sets_degenerate_values(self):
        pts = [cloud(i, 25) for i in range(5)]
        cov, mmd, nna = cov_mmd_1nna(pts, [p.copy() for p in pts])
        assert cov == 1.0
        assert mmd == 0.0
        # every sample's nearest neighbour is its duplicate in the other set,
        # so the 1-NN classifier is at chance-defeating 0 accuracy
        assert nna == 0.0

    def test_cov_range(self):
        gen = [cloud(0, 20)] * 4  # all generated collapse to one mode
        ref = [cloud(i + 10, 20) for i in range(4)]
        cov, _, _ = cov_mmd_1nna(gen, ref)
        assert cov == 0.25


class TestCompletionMetrics:
    def test_uhd_known_value(self):
        partial = np.array([[0.0, 0.0, 0.0]])
        comp_near = np.array([[0.0, 0.0, 0.1]])
        comp_far = np.array([[0.0, 0.0, 0.3]])
        # unsquared max-min distance per completion, averaged
        assert uhd(partial, [comp_near, comp_far]) == pytest.approx(0.2)

    def test_uhd_zero_for_subset(self):
        partial = cloud(0, 30)
        assert uhd(partial, [partial.copy()]) == pytest.approx(0.0)

    def test_tmd_known_value(self):
        a = np.array([[0.0, 0.0, 0.0]])
        b = np.array([[1.0, 0.0, 0.0]])
        c = np.array([[2.0, 0.0, 0.0]])
        # pairwise chamfer: (a,b)=2, (a,c)=8, (b,c)=2 -> per-sample means
        # a:(2+8)/2=5, b:(2+2)/2=2, c:(8+2)/2=5 -> sum 12
        assert tmd([a, b, c]) == pytest.approx(12.0)

    def test_tmd_zero_for_identical(self):
        p = cloud(2)
        assert tmd([p, p.copy(), p.copy()]) == pytest.approx(0.0)


class TestNovelty:
    def test_per_shape_rows_and_histogram(self):
        gen = [cloud(i, 20) for i in range(4)]
        train = [cloud(i, 20) for i in range(2)] + [cloud(i + 90, 20) for i in range(3)]
        top, counts, edges = novelty_histogram(gen, train, top_n=2, bins=10)
        assert top.shape == (4, 2)
        assert counts.sum() == 4  # histogram over per-shape nearest distances
        assert len(edges) == 11
        # gen 0 and 1 duplicate training shapes: nearest distance exactly 0
        assert top[0, 0] == 0.0 and top[1, 0] == 0.0
        assert (top[:, 0] <= top[:, 1]).all()  # rows sorted ascending

    def test_subset_of_training_all_zero_nearest(self):
        train = [cloud(i, 20) for i in range(5)]
        top, _, _ = novelty_histogram(train[:3], train, top_n=1)
        np.testing.assert_array_equal(top[:, 0], np.zeros(3))

    def test_top_n_clamped_with_warning(self):
        gen = [cloud(i, 20) for i in range(2)]
        train = [cloud(i + 10, 20) for i in range(2)]
        with pytest.warns(UserWarning):
            top, _, _ = novelty_histogram(gen, train, top_n=5)
        assert top.shape == (2, 2)
