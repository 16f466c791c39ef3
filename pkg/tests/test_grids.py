import numpy as np
import pytest

from voxarch.grids import (
    GridFormatError,
    OccupancyField,
    VoxelGrid,
    binarize,
    clean_up,
    iou,
    parse_vxg1,
    project_2_5d,
    read_vxf1,
    read_vxg1,
    subdivide,
    variation_contribution,
    write_vxf1,
    write_vxg1,
)

from _oracles import vc_brute


def random_grid(seed, r=16, density=0.3):
    rng = np.random.default_rng(seed)
    return VoxelGrid((rng.random((r, r, r)) < density).astype(np.uint8))


class TestVariationContribution:
    def test_matches_brute_force(self):
        for seed in range(5):
            g = random_grid(seed, r=10)
            v = variation_contribution(g)
            ax, ay, az = vc_brute(g.occupancy)
            np.testing.assert_array_equal(v.axis_x, ax)
            np.testing.assert_array_equal(v.axis_y, ay)
            np.testing.assert_array_equal(v.axis_z, az)

    def test_single_voxel(self):
        occ = np.zeros((5, 5, 5), dtype=np.uint8)
        occ[2, 2, 2] = 1
        v = variation_contribution(occ)
        assert v.total[2, 2, 2] == 6
        assert v.axis_x[2, 2, 2] == 2
        # each face neighbour of the voxel differs from exactly one neighbour
        assert v.total[1, 2, 2] == 1 and v.axis_x[1, 2, 2] == 1

    def test_boundary_has_no_phantom_neighbours(self):
        occ = np.ones((4, 4, 4), dtype=np.uint8)
        v = variation_contribution(occ)
        assert v.total.max() == 0  # uniform grid, borders contribute nothing

    def test_range(self):
        g = random_grid(3, r=12, density=0.5)
        v = variation_contribution(g)
        for a in (v.axis_x, v.axis_y, v.axis_z):
            assert a.min() >= 0 and a.max() <= 2
        assert v.total.max() <= 6


class TestCleanUp:
    def test_floater_removed(self):
        occ = np.zeros((8, 8, 8), dtype=np.uint8)
        occ[4, 4, 4] = 1  # isolated voxel, V_c = 6
        out = clean_up(VoxelGrid(occ))
        assert out.occupancy.sum() == 0

    def test_sticker_removed(self):
        # solid slab with a single voxel stuck on top: V_c = 5
        occ = np.zeros((8, 8, 8), dtype=np.uint8)
        occ[:, :, 3] = 1
        occ[4, 4, 4] = 1
        out = clean_up(VoxelGrid(occ))
        assert out.occupancy[4, 4, 4] == 0
        assert out.occupancy[:, :, 3].all()  # slab untouched

    def test_anchored_column_protected(self):
        # 1x1 column spanning two slabs: interior scores {2, 2, 0}, ends
        # touch the slabs, so every column voxel survives.
        occ = np.zeros((8, 8, 8), dtype=np.uint8)
        occ[:, :, 0] = 1
        occ[:, :, 7] = 1
        occ[4, 4, 1:7] = 1
        out = clean_up(VoxelGrid(occ))
        assert out.occupancy[4, 4, 1:7].all()
        assert out.occupancy.sum() == occ.sum()

    def test_floating_column_erodes_from_ends(self):
        # a free strut's end voxels score x:2 y:2 z:1 = 5 (unprotected), so
        # each pass eats both ends until nothing remains
        occ = np.zeros((8, 8, 8), dtype=np.uint8)
        occ[4, 4, 1:7] = 1
        out = clean_up(VoxelGrid(occ))
        assert out.occupancy.sum() == 0

    def test_thin_wall_preserved(self):
        occ = np.zeros((8, 8, 8), dtype=np.uint8)
        occ[:, 4, :] = 1  # 1-voxel-thick wall: V_c = 2 inside
        out = clean_up(VoxelGrid(occ))
        np.testing.assert_array_equal(out.occupancy, occ)

    def test_output_subset_of_input(self):
        for seed in range(5):
            g = random_grid(seed, r=12, density=0.4)
            out = clean_up(g)
            assert not np.any((out.occupancy == 1) & (g.occupancy == 0))

    def test_idempotent(self):
        for seed in range(3):
            g = random_grid(seed + 10, r=12, density=0.4)
            once = clean_up(g)
            twice = clean_up(once)
            np.testing.assert_array_equal(once.occupancy, twice.occupancy)

    def test_zero_iterations_is_identity(self):
        g = random_grid(0, r=8)
        np.testing.assert_array_equal(clean_up(g, iterations=0).occupancy, g.occupancy)

    def test_solid_block_unchanged(self):
        occ = np.zeros((10, 10, 10), dtype=np.uint8)
        occ[2:8, 2:8, 2:8] = 1  # corners have V_c = 3, faces less
        out = clean_up(VoxelGrid(occ))
        np.testing.assert_array_equal(out.occupancy, occ)


class TestProjection:
    def test_shapes_and_values(self):
        occ = np.zeros((4, 4, 4), dtype=np.uint8)
        occ[1, 2, :] = 1  # full z-column
        xy, yz, xz = project_2_5d(VoxelGrid(occ))
        assert xy.shape == (4, 4)
        assert xy[1, 2] == 1.0 and xy.sum() == 1.0
        assert yz[2, :].sum() == pytest.approx(1.0)  # column spread over x-mean

    def test_conservation_exact(self):
        # power-of-two resolutions make k/R exact in binary floating point
        for seed in range(20):
            g = random_grid(seed, r=16, density=0.37)
            for m in project_2_5d(g):
                assert m.sum() * 16 == float(g.count())

    def test_field_input(self):
        f = OccupancyField(np.full((4, 4, 4), 0.25, dtype=np.float32))
        xy, _, _ = project_2_5d(f)
        assert xy == pytest.approx(np.full((4, 4), 0.25))


class TestSubdivideBinarize:
    def test_subdivide_replicates(self):
        occ = np.zeros((2, 2, 2), dtype=np.uint8)
        occ[1, 0, 1] = 1
        up = subdivide(VoxelGrid(occ, voxel_size=1.0), 2)
        assert up.resolution == 4
        assert up.voxel_size == 0.5
        assert up.occupancy[2:4, 0:2, 2:4].all()
        assert up.occupancy.sum() == 8

    def test_binarize_threshold_rule(self):
        vals = np.array([[[0.49, 0.5], [0.51, 0.0]], [[1.0, 0.25], [0.75, 0.5]]],
                        dtype=np.float32)
        g = binarize(OccupancyField(vals), threshold=0.5)
        np.testing.assert_array_equal(
            g.occupancy, np.array([[[0, 1], [1, 0]], [[1, 0], [1, 1]]], dtype=np.uint8))

    def test_binarize_rejects_bad_threshold(self):
        f = OccupancyField(np.zeros((2, 2, 2), dtype=np.float32))
        with pytest.raises(ValueError):
            binarize(f, threshold=0.0)
        with pytest.raises(ValueError):
            binarize(f, threshold=1.0)

    def test_binarize_idempotent_on_grids(self):
        g = random_grid(4, r=8)
        out = binarize(g)
        np.testing.assert_array_equal(out.occupancy, g.occupancy)


class TestVxg1:
    def test_round_trip(self, tmp_path):
        for seed, r in ((0, 8), (1, 16), (2, 64)):
            g = random_grid(seed, r=r)
            g.voxel_size = 0.75
            g.origin = np.array([1.0, -2.0, 3.5], dtype=np.float32)
            p = tmp_path / f"g{r}.vxg"
            write_vxg1(p, g)
            back = read_vxg1(p)
            np.testing.assert_array_equal(back.occupancy, g.occupancy)
            assert back.voxel_size == pytest.approx(0.75)
            np.testing.assert_allclose(back.origin, g.origin)

    def test_header_layout(self, tmp_path):
        # 24-byte header: magic, u32 resolution, f32 voxel size, 3x f32 origin
        g = VoxelGrid.empty(8)
        p = tmp_path / "h.vxg"
        write_vxg1(p, g)
        raw = p.read_bytes()
        assert raw[:4] == b"VXG1"
        assert int.from_bytes(raw[4:8], "little") == 8
        assert len(raw) == 24 + 8 ** 3 // 8

    def test_bit_order_x_fastest_lsb_first(self, tmp_path):
        occ = np.zeros((8, 8, 8), dtype=np.uint8)
        occ[3, 0, 0] = 1  # flat index 3 -> bit 3 of byte 0
        p = tmp_path / "b.vxg"
        write_vxg1(p, VoxelGrid(occ))
        raw = p.read_bytes()
        assert raw[24] == 1 << 3
        occ2 = np.zeros((8, 8, 8), dtype=np.uint8)
        occ2[0, 1, 0] = 1  # flat index 8 -> bit 0 of byte 1
        write_vxg1(p, VoxelGrid(occ2))
        assert p.read_bytes()[25] == 1

    def test_bad_magic(self):
        with pytest.raises(GridFormatError):
            parse_vxg1(b"NOPE" + bytes(64))

    def test_truncated(self):
        with pytest.raises(GridFormatError):
            parse_vxg1(b"VXG1\x08")
        good = b"VXG1" + (8).to_bytes(4, "little") + bytes(12)
        with pytest.raises(GridFormatError):
            parse_vxg1(good + bytes(10))  # payload needs 64 bytes

    def test_non_multiple_of_eight_resolution(self, tmp_path):
        g = random_grid(7, r=5)
        p = tmp_path / "odd.vxg"
        write_vxg1(p, g)
        np.testing.assert_array_equal(read_vxg1(p).occupancy, g.occupancy)


class TestVxf1:
    def test_round_trip(self, tmp_path):
        rng = np.random.default_rng(0)
        f = OccupancyField(rng.random((8, 8, 8)).astype(np.float32), voxel_size=0.375)
        p = tmp_path / "f.vxf"
        write_vxf1(p, f)
        back = read_vxf1(p)
        np.testing.assert_array_equal(back.values, f.values)
        assert back.voxel_size == pytest.approx(0.375)


class TestIou:
    def test_identical(self):
        g = random_grid(0)
        assert iou(g, g) == 1.0

    def test_disjoint(self):
        a = np.zeros((4, 4, 4), dtype=np.uint8)
        b = np.zeros((4, 4, 4), dtype=np.uint8)
        a[0, 0, 0] = 1
        b[1, 1, 1] = 1
        assert iou(VoxelGrid(a), VoxelGrid(b)) == 0.0

    def test_empty_pair(self):
        assert iou(VoxelGrid.empty(4), VoxelGrid.empty(4)) == 1.0

    def test_resolution_mismatch(self):
        with pytest.raises(ValueError):
            iou(VoxelGrid.empty(4), VoxelGrid.empty(8))


class TestVoxelGridValidation:
    def test_rejects_non_cubic(self):
        with pytest.raises(ValueError):
            VoxelGrid(np.zeros((2, 3, 2), dtype=np.uint8))

    def test_rejects_bad_voxel_size(self):
        with pytest.raises(ValueError):
            VoxelGrid(np.zeros((2, 2, 2), dtype=np.uint8), voxel_size=0.0)
