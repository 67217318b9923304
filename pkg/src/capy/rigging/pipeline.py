"""End-to-end auto-rigging: preprocess, interior graph, embed, skin, map.

The pipeline is pure given its inputs; callers run it on a worker thread
and observe progress through the callback. A mesh that is not closed and
connected fails fast with the preprocess report attached.
"""
from __future__ import annotations

from typing import Callable

from .mapper import RiggedCharacter, map_skeleton
from .mesh import PreprocessReport, TriMesh, preprocess_mesh
from .skeleton import SkeletonMap, rigging_skeleton
from .voxel import build_interior_graph
from .embed import embed_skeleton
from .weights import compute_skin_weights, verify_partition_of_unity

ProgressFn = Callable[[str, float], None]

STAGES = (
    ("preprocess", 0.05),
    ("interior_graph", 0.35),
    ("embed", 0.70),
    ("skin_weights", 0.90),
    ("map_skeleton", 1.00),
)


class PreprocessFailed(ValueError):
    def __init__(self, report: PreprocessReport):
        super().__init__(report.summary())
        self.report = report


def rig(
    mesh: TriMesh,
    voxel_resolution: int = 64,
    skeleton_map: SkeletonMap | None = None,
    progress: ProgressFn | None = None,
) -> RiggedCharacter:
    def report(stage: str, fraction: float) -> None:
        if progress is not None:
            progress(stage, fraction)

    report("preprocess", 0.0)
    pre = preprocess_mesh(mesh)
    if not pre.ok:
        raise PreprocessFailed(pre)
    report("interior_graph", STAGES[0][1])
    graph = build_interior_graph(mesh, voxel_resolution)
    report("embed", STAGES[1][1])
    embedded = embed_skeleton(graph, rigging_skeleton())
    report("skin_weights", STAGES[2][1])
    weights = compute_skin_weights(mesh, embedded, graph.grid)
    verify_partition_of_unity(weights)
    report("map_skeleton", STAGES[3][1])
    rigged = map_skeleton(mesh, embedded, weights, skeleton_map)
    verify_partition_of_unity(rigged.weights)
    report("done", 1.0)
    return rigged
