"""voxarch: two-stage voxel generation for building-scale models.

Stage 1 autoencodes 64 cube grids patch-wise through a vector-quantized
codebook and models token grids autoregressively; stage 2 detailises grids
through a hierarchy of conditional diffusion upsamplers.
"""

from .grids import (
    GridFormatError,
    OccupancyField,
    VariationScores,
    VoxelGrid,
    binarize,
    clean_up,
    dump_vxg1,
    iou,
    parse_vxg1,
    # noqa: F401 re-exports
    project_2_5d,
    read_vxf1,
    read_vxg1,
    subdivide,
    subdivide_field,
    variation_contribution,
    write_vxf1,
    write_vxg1,
)
from .patches import CoverageError, FoldAccumulator, LayoutError, PatchLayout, fold, unfold

__version__ = "0.1.0"
