"""Interior volume analysis: voxelization, distance field, sphere graph.

The mesh is rasterized onto a cubic voxel grid (parity fill along +X rows),
an interior distance field is computed, and maximal spheres are packed
greedily largest-first, skipping any candidate already inside an accepted
sphere. Intersecting spheres form the interior graph that the skeleton
embeds into. Everything is ordered with explicit tie-breaking so results
are machine-independent.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .mesh import TriMesh

# irrational-ish grid offset so mesh vertices don't sit exactly on row centers
# rows are cast along +X, so only the row coordinates (y, z) need the
# anti-alignment jitter; keeping x centered on the mesh makes voxelization
# mirror-stable about the YZ plane
_GRID_JITTER = np.array([0.0, 0.0234567891, 0.0345678912])
MAX_SPHERES = 128
MIN_SPHERE_RADIUS_VOX = 1.0


class MeshTooThin(ValueError):
    """No interior voxel at the chosen resolution."""


@dataclass
class VoxelGrid:
    origin: np.ndarray  # world coords of the center of voxel (0,0,0)
    voxel_size: float
    inside: np.ndarray  # (nx, ny, nz) bool

    def world_to_index(self, point) -> tuple[int, int, int]:
        rel = (np.asarray(point, dtype=float) - self.origin) / self.voxel_size
        idx = np.rint(rel).astype(int)
        return int(idx[0]), int(idx[1]), int(idx[2])

    def index_to_world(self, index) -> np.ndarray:
        return self.origin + np.asarray(index, dtype=float) * self.voxel_size

    def contains_point(self, point, dilation: int = 0) -> bool:
        i, j, k = self.world_to_index(point)
        grid = self.inside if dilation == 0 else self._dilated(dilation)
        if 0 <= i < grid.shape[0] and 0 <= j < grid.shape[1] and 0 <= k < grid.shape[2]:
            return bool(grid[i, j, k])
        return False

    def contains_points(self, points: np.ndarray, dilation: int = 0) -> np.ndarray:
        """Vectorized inside test over an (..., 3) array of world points."""
        grid = self.inside if dilation == 0 else self._dilated(dilation)
        pts = np.asarray(points, dtype=float)
        idx = np.rint((pts - self.origin) / self.voxel_size).astype(int)
        shape = grid.shape
        valid = (
            (idx[..., 0] >= 0) & (idx[..., 0] < shape[0])
            & (idx[..., 1] >= 0) & (idx[..., 1] < shape[1])
            & (idx[..., 2] >= 0) & (idx[..., 2] < shape[2])
        )
        clipped = np.clip(idx, 0, np.array(shape) - 1)
        result = grid[clipped[..., 0], clipped[..., 1], clipped[..., 2]]
        return result & valid

    def _dilated(self, steps: int) -> np.ndarray:
        cache = getattr(self, "_dilate_cache", None)
        if cache is None:
            cache = {}
            self._dilate_cache = cache
        if steps not in cache:
            cache[steps] = ndimage.binary_dilation(self.inside, iterations=steps)
        return cache[steps]

    def segment_inside(self, a, b, samples: int = 9, dilation: int = 1) -> bool:
        """Sampled containment of the open segment a-b."""
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        for step in range(1, samples + 1):
            t = step / (samples + 1)
            if not self.contains_point(a + t * (b - a), dilation=dilation):
                return False
        return True


def voxelize(mesh: TriMesh, resolution: int = 64) -> VoxelGrid:
    """Inside/outside mask by parity counting along +X voxel rows."""
    lo, hi = mesh.bounds()
    extent = (hi - lo).max()
    if extent <= 0:
        raise MeshTooThin("mesh has no volume")
    voxel = float(extent) / resolution
    pad = 2
    origin = lo - voxel * pad + _GRID_JITTER * voxel
    shape = np.ceil((hi - origin) / voxel).astype(int) + pad + 1
    nx, ny, nz = (int(v) for v in shape)
    # center the x axis on the mesh so mirrored meshes voxelize mirrored
    center_x = (lo[0] + hi[0]) / 2.0
    origin[0] = center_x - voxel * (nx - 1) / 2.0

    tris = mesh.vertices[mesh.triangles]  # (M, 3, 3)
    crossings: dict[tuple[int, int], list[float]] = {}
    for p0, p1, p2 in tris:
        y0, z0 = p0[1], p0[2]
        y1, z1 = p1[1], p1[2]
        y2, z2 = p2[1], p2[2]
        denom = (y1 - y0) * (z2 - z0) - (z1 - z0) * (y2 - y0)
        if denom == 0.0:
            continue  # projects to a line; neighbors cover the parity
        ymin = min(y0, y1, y2)
        ymax = max(y0, y1, y2)
        zmin = min(z0, z1, z2)
        zmax = max(z0, z1, z2)
        j0 = max(0, int(np.ceil((ymin - origin[1]) / voxel)))
        j1 = min(ny - 1, int(np.floor((ymax - origin[1]) / voxel)))
        k0 = max(0, int(np.ceil((zmin - origin[2]) / voxel)))
        k1 = min(nz - 1, int(np.floor((zmax - origin[2]) / voxel)))
        if j0 > j1 or k0 > k1:
            continue
        ys = origin[1] + np.arange(j0, j1 + 1) * voxel
        zs = origin[2] + np.arange(k0, k1 + 1) * voxel
        yy, zz = np.meshgrid(ys, zs, indexing="ij")
        b1 = ((yy - y0) * (z2 - z0) - (zz - z0) * (y2 - y0)) / denom
        b2 = ((y1 - y0) * (zz - z0) - (z1 - z0) * (yy - y0)) / denom
        inside = (b1 >= 0.0) & (b2 >= 0.0) & (b1 + b2 <= 1.0)
        if not inside.any():
            continue
        xs = p0[0] + b1 * (p1[0] - p0[0]) + b2 * (p2[0] - p0[0])
        jj, kk = np.nonzero(inside)
        for a, b in zip(jj, kk):
            crossings.setdefault((j0 + int(a), k0 + int(b)), []).append(float(xs[a, b]))

    inside_mask = np.zeros((nx, ny, nz), dtype=bool)
    x_centers = origin[0] + np.arange(nx) * voxel
    for (j, k), xs in crossings.items():
        xs.sort()
        pairs = len(xs) // 2
        for p in range(pairs):
            x_in, x_out = xs[2 * p], xs[2 * p + 1]
            i0 = int(np.searchsorted(x_centers, x_in, side="left"))
            i1 = int(np.searchsorted(x_centers, x_out, side="right"))
            if i0 < i1:
                inside_mask[i0:i1, j, k] = True
    return VoxelGrid(origin=origin, voxel_size=voxel, inside=inside_mask)


@dataclass
class InteriorGraph:
    centers: np.ndarray  # (V, 3) world coords
    radii: np.ndarray  # (V,) world units
    edges: list[tuple[int, int]]
    grid: VoxelGrid
    height: float  # Y extent of the interior volume, for scale normalization

    @property
    def vertex_count(self) -> int:
        return len(self.centers)

    def neighbors(self) -> list[list[int]]:
        adj: list[list[int]] = [[] for _ in range(self.vertex_count)]
        for a, b in self.edges:
            adj[a].append(b)
            adj[b].append(a)
        return adj

    def is_connected(self) -> bool:
        if self.vertex_count == 0:
            return False
        seen = {0}
        stack = [0]
        adj = self.neighbors()
        while stack:
            for n in adj[stack.pop()]:
                if n not in seen:
                    seen.add(n)
                    stack.append(n)
        return len(seen) == self.vertex_count


def build_interior_graph(mesh: TriMesh, voxel_resolution: int = 64) -> InteriorGraph:
    """Distance-field sphere packing over the mesh interior.

    Spheres are centered on local maxima of the interior distance field,
    accepted greedily largest-first when not inside an already accepted
    sphere; intersecting spheres are connected, and remaining components
    are stitched through their closest sphere pairs so a connected mesh
    yields a connected graph.
    """
    grid = voxelize(mesh, voxel_resolution)
    if not grid.inside.any():
        raise MeshTooThin(f"no interior voxels at resolution {voxel_resolution}")
    dist_vox = ndimage.distance_transform_edt(grid.inside)
    dist = dist_vox * grid.voxel_size

    candidates = np.argwhere(dist_vox >= MIN_SPHERE_RADIUS_VOX)
    if len(candidates) == 0:
        raise MeshTooThin("interior too thin to pack any sphere")
    values = dist[tuple(candidates.T)]
    shape = grid.inside.shape
    flat = candidates[:, 0] * shape[1] * shape[2] + candidates[:, 1] * shape[2] + candidates[:, 2]
    # ties prefer voxels near the x center (mirror-stable), then low index
    x_offset = np.abs(2 * candidates[:, 0] - (shape[0] - 1))
    order = np.lexsort((flat, x_offset, -values))

    covered = np.zeros(shape, dtype=bool)
    centers: list[np.ndarray] = []
    radii: list[float] = []
    for idx in order:
        if len(centers) >= MAX_SPHERES:
            break
        ci, cj, ck = (int(v) for v in candidates[idx])
        if covered[ci, cj, ck]:
            continue
        radius = float(values[idx])
        centers.append(grid.index_to_world(candidates[idx]))
        radii.append(radius)
        # stamp most of the accepted ball; the margin keeps candidates alive
        # in pinch regions (necks, wrists) that big neighbors would swallow
        r_vox = 0.75 * radius / grid.voxel_size
        span = int(np.floor(r_vox))
        i0, i1 = max(0, ci - span), min(shape[0], ci + span + 1)
        j0, j1 = max(0, cj - span), min(shape[1], cj + span + 1)
        k0, k1 = max(0, ck - span), min(shape[2], ck + span + 1)
        ii, jj, kk = np.mgrid[i0:i1, j0:j1, k0:k1]
        ball = (ii - ci) ** 2 + (jj - cj) ** 2 + (kk - ck) ** 2 < r_vox**2
        covered[i0:i1, j0:j1, k0:k1] |= ball
    if not centers:
        raise MeshTooThin("interior too thin to pack any sphere")

    centers_arr = np.array(centers)
    radii_arr = np.array(radii)
    edges: list[tuple[int, int]] = []
    v = len(centers)
    for i in range(v):
        for j in range(i + 1, v):
            gap = float(np.linalg.norm(centers_arr[i] - centers_arr[j]))
            if gap < radii_arr[i] + radii_arr[j]:
                edges.append((i, j))

    # stitch components through closest pairs (deterministic order)
    parent = list(range(v))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in edges:
        parent[find(a)] = find(b)
    while True:
        roots = {find(i) for i in range(v)}
        if len(roots) <= 1:
            break
        best: tuple[float, int, int] | None = None
        for i in range(v):
            for j in range(i + 1, v):
                if find(i) == find(j):
                    continue
                gap = float(np.linalg.norm(centers_arr[i] - centers_arr[j]))
                if best is None or (gap, i, j) < best:
                    best = (gap, i, j)
        _, i, j = best
        edges.append((i, j))
        parent[find(i)] = find(j)

    ys = np.nonzero(grid.inside.any(axis=(0, 2)))[0]
    height = float((ys.max() - ys.min() + 1) * grid.voxel_size) if len(ys) else 0.0
    return InteriorGraph(
        centers=centers_arr, radii=radii_arr, edges=edges, grid=grid, height=height
    )
