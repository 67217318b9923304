"""Heat-equilibrium skin weights.

Per bone, weights solve the sparse system (L + H) w = H p: L is the
clamped cotangent surface Laplacian, H carries area-weighted heat-transfer
terms 1/d^2 anchored at each vertex's nearest visible bone, and p spreads
the unit boundary condition softly over bones at comparable distance so
the equilibrium stays smooth where several bones meet. Because L
annihilates constants and the operator is an M-matrix, weights sum to one
and stay non-negative up to solver tolerance. The result is cut to the
four strongest influences per vertex, seams the cut introduces are relaxed
by local averaging until adjacent weight vectors differ by less than 0.45
in L1, and disconnected islands of per-bone support are pruned.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import splu

from .embed import EmbeddedSkeleton
from .mesh import TriMesh
from .voxel import VoxelGrid

MAX_INFLUENCES = 4
HEAT_DISTANCE_FLOOR = 0.02  # fraction of height
SOFT_ASSIGN_SIGMA = 0.6  # width of the relative-distance kernel
VISIBILITY_SAMPLES = 7
SEAM_THRESHOLD = 0.45  # max adjacent L1 difference after relaxation
SEAM_MAX_PASSES = 400
PARTITION_TOLERANCE = 1e-6


class SolverFailure(RuntimeError):
    pass


@dataclass
class SkinWeights:
    bone_names: list[str]
    indices: np.ndarray  # (N, MAX_INFLUENCES) int32, -1 padding
    values: np.ndarray  # (N, MAX_INFLUENCES) float64

    def vertex_weights(self, vertex: int) -> list[tuple[str, float]]:
        out = []
        for slot in range(MAX_INFLUENCES):
            bone = int(self.indices[vertex, slot])
            if bone >= 0 and self.values[vertex, slot] > 0:
                out.append((self.bone_names[bone], float(self.values[vertex, slot])))
        return out

    def dense(self) -> np.ndarray:
        """(N, B) dense weight matrix."""
        n = len(self.indices)
        dense = np.zeros((n, len(self.bone_names)))
        rows = np.repeat(np.arange(n), MAX_INFLUENCES)
        cols = self.indices.ravel()
        vals = self.values.ravel()
        keep = cols >= 0
        dense[rows[keep], cols[keep]] += vals[keep]
        return dense

    def bone_weight(self, vertex: int, bone_name: str) -> float:
        bone = self.bone_names.index(bone_name)
        mask = self.indices[vertex] == bone
        return float(self.values[vertex][mask].sum())

    @staticmethod
    def from_dense(bone_names: list[str], dense: np.ndarray) -> "SkinWeights":
        indices, values = _truncate_top4(dense)
        return SkinWeights(bone_names=bone_names, indices=indices, values=values)


def point_segment_distance(points: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    ab = b - a
    denom = float(ab @ ab)
    if denom <= 1e-18:
        return np.linalg.norm(points - a, axis=1)
    t = np.clip(((points - a) @ ab) / denom, 0.0, 1.0)
    closest = a + t[:, None] * ab
    return np.linalg.norm(points - closest, axis=1)


def _closest_points_on_segment(points: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    ab = b - a
    denom = float(ab @ ab)
    if denom <= 1e-18:
        return np.broadcast_to(a, points.shape).copy()
    t = np.clip(((points - a) @ ab) / denom, 0.0, 1.0)
    return a + t[:, None] * ab


def cotangent_laplacian(mesh: TriMesh) -> sparse.csr_matrix:
    """Clamped cotangent Laplacian (positive semi-definite M-matrix)."""
    n = len(mesh.vertices)
    tris = mesh.triangles
    verts = mesh.vertices
    rows: list[np.ndarray] = []
    cols: list[np.ndarray] = []
    vals: list[np.ndarray] = []
    for corner in range(3):
        i = tris[:, corner]
        j = tris[:, (corner + 1) % 3]
        k = tris[:, (corner + 2) % 3]
        u = verts[i] - verts[k]
        v = verts[j] - verts[k]
        cross = np.linalg.norm(np.cross(u, v), axis=1)
        cross = np.maximum(cross, 1e-12)
        cot = (u * v).sum(axis=1) / cross
        w = np.maximum(cot, 0.0) * 0.5
        rows.extend((i, j))
        cols.extend((j, i))
        vals.extend((w, w))
    adjacency = sparse.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n)
    ).tocsr()
    degree = np.asarray(adjacency.sum(axis=1)).ravel()
    return sparse.diags(degree) - adjacency


def _vertex_areas(mesh: TriMesh) -> np.ndarray:
    areas = mesh.triangle_areas() / 3.0
    out = np.zeros(len(mesh.vertices))
    for corner in range(3):
        np.add.at(out, mesh.triangles[:, corner], areas)
    return out


def _unique_edges(mesh: TriMesh) -> np.ndarray:
    tris = mesh.triangles
    edges = np.concatenate(
        [tris[:, (0, 1)], tris[:, (1, 2)], tris[:, (2, 0)]], axis=0
    )
    edges = np.sort(edges, axis=1)
    return np.unique(edges, axis=0)


def _truncate_top4(weights: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    n, b = weights.shape
    keep = min(MAX_INFLUENCES, b)
    order = np.argsort(-weights, axis=1, kind="stable")[:, :keep]
    picked = np.take_along_axis(weights, order, axis=1)
    indices = np.full((n, MAX_INFLUENCES), -1, dtype=np.int32)
    values = np.zeros((n, MAX_INFLUENCES))
    indices[:, :keep] = order
    values[:, :keep] = picked
    values[values < 1e-12] = 0.0
    indices[values == 0.0] = -1
    totals = values.sum(axis=1, keepdims=True)
    if (totals.ravel() <= 0).any():
        raise SolverFailure("a vertex lost all weight during truncation")
    values /= totals
    return indices, values


def _dense_top4(weights: np.ndarray) -> np.ndarray:
    order = np.argsort(-weights, axis=1, kind="stable")[:, :MAX_INFLUENCES]
    out = np.zeros_like(weights)
    np.put_along_axis(out, order, np.take_along_axis(weights, order, axis=1), axis=1)
    return out / np.maximum(out.sum(axis=1, keepdims=True), 1e-15)


def _relax_seams(dense: np.ndarray, edges: np.ndarray) -> np.ndarray:
    """Average the endpoints of edges whose weight vectors differ too much."""
    for _ in range(SEAM_MAX_PASSES):
        gaps = np.abs(dense[edges[:, 0]] - dense[edges[:, 1]]).sum(axis=1)
        bad = np.nonzero(gaps > SEAM_THRESHOLD)[0]
        if len(bad) == 0:
            break
        for edge_index in bad:
            u, v = int(edges[edge_index, 0]), int(edges[edge_index, 1])
            mean = _dense_top4((0.5 * (dense[u] + dense[v]))[None, :])[0]
            dense[u] = mean
            dense[v] = mean
    return dense


def compute_skin_weights(
    mesh: TriMesh, embedded: EmbeddedSkeleton, grid: VoxelGrid | None = None
) -> SkinWeights:
    segments = embedded.bone_segments()
    bone_names = list(segments.keys())
    verts = mesh.vertices
    n = len(verts)
    b = len(bone_names)
    height = float(verts[:, 1].max() - verts[:, 1].min()) or 1.0

    distances = np.stack(
        [point_segment_distance(verts, a, bpos) for a, bpos in segments.values()], axis=1
    )  # (N, B)

    visible = np.ones((n, b), dtype=bool)
    if grid is not None:
        fractions = np.arange(1, VISIBILITY_SAMPLES + 1) / (VISIBILITY_SAMPLES + 1)
        for bi, (a, bpos) in enumerate(segments.values()):
            targets = _closest_points_on_segment(verts, a, bpos)
            samples = verts[:, None, :] + fractions[None, :, None] * (
                targets[:, None, :] - verts[:, None, :]
            )
            inside = grid.contains_points(samples, dilation=1)
            visible[:, bi] = inside.all(axis=1)

    masked = np.where(visible, distances, np.inf)
    nearest_dist = masked.min(axis=1)
    occluded = ~np.isfinite(nearest_dist)
    if occluded.any():
        masked[occluded] = distances[occluded]
        nearest_dist = masked.min(axis=1)
    nearest = masked.argmin(axis=1)
    floored = np.maximum(nearest_dist, HEAT_DISTANCE_FLOOR * height)

    # soft boundary condition: bones at comparable distance share the anchor
    kernel = np.exp(-((masked / floored[:, None]) ** 2 - 1.0) / SOFT_ASSIGN_SIGMA**2)
    kernel[~np.isfinite(kernel)] = 0.0
    anchors = kernel / kernel.sum(axis=1, keepdims=True)

    # area weighting balances the heat term against the unitless cotangent
    # Laplacian so the equilibrium diffuses instead of snapping to the
    # nearest-bone partition
    areas = _vertex_areas(mesh)
    heat = areas / floored**2

    system = (cotangent_laplacian(mesh) + sparse.diags(heat)).tocsc()
    try:
        solver = splu(system)
    except RuntimeError as exc:
        raise SolverFailure(f"heat system factorization failed: {exc}") from exc

    weights = np.zeros((n, b))
    for bi in range(b):
        solution = solver.solve(heat * anchors[:, bi])
        if not np.all(np.isfinite(solution)):
            raise SolverFailure(f"heat solve diverged for bone {bone_names[bi]}")
        weights[:, bi] = solution
    np.clip(weights, 0.0, None, out=weights)
    totals = weights.sum(axis=1, keepdims=True)
    if (totals.ravel() <= 0).any():
        raise SolverFailure("a vertex received no weight from any bone")
    weights /= totals

    dense = _dense_top4(weights)
    dense = _relax_seams(dense, _unique_edges(mesh))
    indices, values = _truncate_top4(dense)
    skin = SkinWeights(bone_names=bone_names, indices=indices, values=values)
    _prune_disconnected_support(mesh, skin, nearest)
    return skin


def _prune_disconnected_support(mesh: TriMesh, skin: SkinWeights, nearest: np.ndarray) -> None:
    """Keep only the largest connected island of each bone's support."""
    n = len(mesh.vertices)
    neighbor_lists: list[set[int]] = [set() for _ in range(n)]
    for tri in mesh.triangles:
        a, b, c = (int(v) for v in tri)
        neighbor_lists[a].update((b, c))
        neighbor_lists[b].update((a, c))
        neighbor_lists[c].update((a, b))

    for bi in range(len(skin.bone_names)):
        support = np.nonzero((skin.indices == bi) & (skin.values > 0))[0]
        support_set = set(int(v) for v in support)
        if not support_set:
            continue
        components: list[set[int]] = []
        unseen = set(support_set)
        while unseen:
            seed = min(unseen)
            comp = {seed}
            stack = [seed]
            unseen.discard(seed)
            while stack:
                for nb in neighbor_lists[stack.pop()]:
                    if nb in unseen:
                        unseen.discard(nb)
                        comp.add(nb)
                        stack.append(nb)
            components.append(comp)
        if len(components) <= 1:
            continue
        components.sort(key=lambda comp: (-len(comp), min(comp)))
        for comp in components[1:]:
            for vi in comp:
                mask = skin.indices[vi] == bi
                skin.values[vi][mask] = 0.0
                skin.indices[vi][mask] = -1
                total = skin.values[vi].sum()
                if total > 0:
                    skin.values[vi] /= total
                else:
                    skin.indices[vi, 0] = nearest[vi]
                    skin.values[vi, 0] = 1.0


def verify_partition_of_unity(skin: SkinWeights) -> None:
    sums = skin.values.sum(axis=1)
    if not np.allclose(sums, 1.0, atol=PARTITION_TOLERANCE):
        worst = float(np.abs(sums - 1.0).max())
        raise SolverFailure(f"weights do not sum to 1 (worst deviation {worst})")
    if skin.values.min() < 0:
        raise SolverFailure("negative weight after clamping")
