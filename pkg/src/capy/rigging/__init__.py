from .embed import EmbeddedSkeleton, EmbeddingFailed, embed_skeleton, verify_embedding
from .mapper import RiggedCharacter, map_skeleton
from .mesh import (
    MeshFormatError,
    PreprocessReport,
    TriMesh,
    load_glb,
    load_mesh,
    load_obj,
    obj_bytes,
    preprocess_mesh,
    save_glb,
    save_obj,
)
from .pipeline import PreprocessFailed, rig
from .skeleton import (
    RIGGING_SKELETON_ID,
    TRACKING_SKELETON_ID,
    MapEntry,
    Skeleton,
    SkeletonMap,
    default_skeleton_map,
    rigging_skeleton,
    tracking_skeleton,
)
from .voxel import InteriorGraph, MeshTooThin, VoxelGrid, build_interior_graph, voxelize
from .weights import SkinWeights, SolverFailure, compute_skin_weights, verify_partition_of_unity

__all__ = [
    "EmbeddedSkeleton",
    "EmbeddingFailed",
    "InteriorGraph",
    "MapEntry",
    "MeshFormatError",
    "MeshTooThin",
    "PreprocessFailed",
    "PreprocessReport",
    "RIGGING_SKELETON_ID",
    "RiggedCharacter",
    "Skeleton",
    "SkeletonMap",
    "SkinWeights",
    "SolverFailure",
    "TRACKING_SKELETON_ID",
    "TriMesh",
    "VoxelGrid",
    "build_interior_graph",
    "compute_skin_weights",
    "default_skeleton_map",
    "embed_skeleton",
    "load_glb",
    "load_mesh",
    "load_obj",
    "map_skeleton",
    "obj_bytes",
    "preprocess_mesh",
    "rig",
    "rigging_skeleton",
    "save_glb",
    "save_obj",
    "tracking_skeleton",
    "verify_embedding",
    "verify_partition_of_unity",
    "voxelize",
]
