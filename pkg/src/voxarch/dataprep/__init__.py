from .manifest import DatasetManifest, ModelEntry, prep_dataset
from .mesh import FILTERED_LABELS, PART_LABELS, HouseMesh, filter_parts, read_obj, write_obj
from .sampling import CHUNK_EDGE, CHUNK_RESOLUTIONS, ChunkSet, crop_chunk, crop_chunks, poisson_sample_surface
from .synth import SynthHouse, synth_corpus, synth_house
from .voxelize import points_in_element, surface_occupancy, voxelize

__all__ = [
    "CHUNK_EDGE", "CHUNK_RESOLUTIONS", "ChunkSet", "DatasetManifest", "FILTERED_LABELS",
    "HouseMesh", "ModelEntry", "PART_LABELS", "SynthHouse", "crop_chunk", "crop_chunks",
    "filter_parts", "points_in_element", "poisson_sample_surface", "prep_dataset",
    "read_obj", "surface_occupancy", "synth_corpus", "synth_house", "voxelize", "write_obj",
]
