import numpy as np
import pytest

from voxarch.grids import VoxelGrid
from voxarch.patches import CoverageError, FoldAccumulator, LayoutError, PatchLayout, fold, unfold

from _oracles import fold_brute


def random_grid(seed, r=16, density=0.3):
    rng = np.random.default_rng(seed)
    return VoxelGrid((rng.random((r, r, r)) < density).astype(np.uint8))


class TestPatchLayout:
    def test_no_overlap_positions(self):
        lay = PatchLayout(resolution=16, patch_size=8, overlap=0)
        assert list(lay.positions) == [0, 8]
        assert lay.n_patches() == 8

    def test_half_overlap_positions(self):
        lay = PatchLayout(resolution=16, patch_size=8, overlap=4)
        assert list(lay.positions) == [0, 4, 8]
        assert lay.n_patches() == 27

    def test_clamped_final_position(self):
        # stride 5 over 16 leaves a tail: last window clamps to r - p
        lay = PatchLayout(resolution=16, patch_size=8, overlap=3)
        assert list(lay.positions) == [0, 5, 8]
        assert lay.positions[-1] + lay.patch_size == 16

    def test_full_coverage_every_axis(self):
        for r, p, o in ((16, 8, 0), (16, 8, 4), (16, 8, 2), (64, 8, 4), (32, 8, 6)):
            lay = PatchLayout(r, p, o)
            covered = np.zeros(r, dtype=bool)
            for s in lay.positions:
                covered[s:s + p] = True
            assert covered.all(), (r, p, o)

    def test_triples_x_fastest(self):
        lay = PatchLayout(resolution=16, patch_size=8, overlap=0)
        trips = lay.start_triples()
        assert trips[0] == (0, 0, 0)
        assert trips[1] == (8, 0, 0)  # x advances fastest
        assert trips[2] == (0, 8, 0)
        assert len(trips) == 8

    def test_invalid_layouts(self):
        with pytest.raises(LayoutError):
            PatchLayout(16, 8, 8)  # overlap == patch size
        with pytest.raises(LayoutError):
            PatchLayout(16, 8, -1)
        with pytest.raises(LayoutError):
            PatchLayout(4, 8, 0)  # patch larger than grid


class TestUnfoldFold:
    def test_unfold_shapes_and_positions(self):
        g = random_grid(0, r=16)
        lay = PatchLayout(16, 8, 4)
        patches = unfold(g, lay)
        assert len(patches) == 27
        for values, pos in patches:
            assert values.shape == (8, 8, 8)
            x, y, z = pos
            np.testing.assert_array_equal(values, g.occupancy[x:x + 8, y:y + 8, z:z + 8])

    def test_unfold_copies(self):
        g = random_grid(1, r=16)
        patches = unfold(g, PatchLayout(16, 8, 0))
        patches[0][0][:] = 7
        assert g.occupancy.max() <= 1

    def test_fold_unfold_identity_binary(self):
        # binary grids survive mean-fold exactly: k * (1/k) == 1.0 in floats
        for r in (16, 64):
            for o in (0, 2, 4):
                g = random_grid(r + o, r=r)
                lay = PatchLayout(r, 8, o)
                patches = [(v.astype(np.float32), pos) for v, pos in unfold(g, lay)]
                out = fold(patches, r, voxel_size=g.voxel_size, origin=g.origin)
                np.testing.assert_array_equal(out.values, g.occupancy.astype(np.float32))

    def test_fold_matches_brute_force_mean(self):
        rng = np.random.default_rng(3)
        lay = PatchLayout(12, 4, 2)
        patches = [(rng.random((4, 4, 4)).astype(np.float32), pos)
                   for pos in lay.start_triples()]
        out = fold(patches, 12, voxel_size=1.0, origin=np.zeros(3))
        expected = fold_brute(patches, 12)
        np.testing.assert_allclose(out.values, expected, atol=1e-6)

    def test_fold_rejects_uncovered(self):
        acc = FoldAccumulator(8)
        acc.add(np.ones((4, 4, 4), dtype=np.float32), (0, 0, 0))
        with pytest.raises(CoverageError):
            acc.resolve()

    def test_accumulator_streaming_matches_batch(self):
        g = random_grid(5, r=16)
        lay = PatchLayout(16, 8, 4)
        acc = FoldAccumulator(16)
        for v, pos in unfold(g, lay):
            acc.add(v.astype(np.float32), pos)
        out = acc.resolve()
        np.testing.assert_array_equal(out.values, g.occupancy.astype(np.float32))

    def test_accumulator_memory_is_two_arrays(self):
        acc = FoldAccumulator(64)
        # float32 sums + uint16 counts = 6 bytes per voxel
        assert acc.nbytes == 64 ** 3 * 6

    def test_add_out_of_bounds(self):
        acc = FoldAccumulator(8)
        with pytest.raises(ValueError):
            acc.add(np.ones((4, 4, 4), dtype=np.float32), (6, 0, 0))
