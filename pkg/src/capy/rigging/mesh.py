"""Triangle meshes: OBJ / binary-glTF loading and structural preprocessing.

The rigging pipeline requires a closed, connected mesh; preprocess_mesh
reports connectivity, closedness, and the offending elements without
mutating the input.
"""
from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


class MeshFormatError(ValueError):
    pass


@dataclass
class TriMesh:
    vertices: np.ndarray  # (N, 3) float64
    triangles: np.ndarray  # (M, 3) int64

    def __post_init__(self) -> None:
        self.vertices = np.asarray(self.vertices, dtype=np.float64).reshape(-1, 3)
        self.triangles = np.asarray(self.triangles, dtype=np.int64).reshape(-1, 3)
        if self.triangles.size and (
            self.triangles.min() < 0 or self.triangles.max() >= len(self.vertices)
        ):
            raise MeshFormatError("triangle index out of range")

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, TriMesh)
            and np.array_equal(self.vertices, other.vertices)
            and np.array_equal(self.triangles, other.triangles)
        )

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        return self.vertices.min(axis=0), self.vertices.max(axis=0)

    def triangle_areas(self) -> np.ndarray:
        p = self.vertices[self.triangles]
        return 0.5 * np.linalg.norm(
            np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]), axis=1
        )

    def edge_counts(self) -> dict[tuple[int, int], int]:
        counts: dict[tuple[int, int], int] = {}
        for tri in self.triangles:
            a, b, c = int(tri[0]), int(tri[1]), int(tri[2])
            for u, v in ((a, b), (b, c), (c, a)):
                key = (u, v) if u < v else (v, u)
                counts[key] = counts.get(key, 0) + 1
        return counts

    def mirrored_x(self) -> "TriMesh":
        verts = self.vertices.copy()
        verts[:, 0] = -verts[:, 0]
        tris = self.triangles[:, ::-1].copy()  # flip winding to keep orientation
        return TriMesh(verts, tris)


@dataclass
class PreprocessReport:
    connected: bool
    closed: bool
    components: int
    boundary_edges: list[tuple[int, int]] = field(default_factory=list)
    non_manifold_edges: list[tuple[int, int]] = field(default_factory=list)
    degenerate_triangles: list[int] = field(default_factory=list)
    vertex_count: int = 0
    triangle_count: int = 0

    @property
    def ok(self) -> bool:
        return self.connected and self.closed

    def summary(self) -> str:
        if self.ok:
            return (
                f"mesh ok: {self.vertex_count} vertices, "
                f"{self.triangle_count} triangles, closed and connected"
            )
        problems = []
        if not self.connected:
            problems.append(f"{self.components} components (needs 1)")
        if not self.closed:
            problems.append(f"{len(self.boundary_edges)} boundary edges")
            if self.non_manifold_edges:
                problems.append(f"{len(self.non_manifold_edges)} non-manifold edges")
        return "mesh not riggable: " + ", ".join(problems)

    def to_obj(self) -> dict:
        return {
            "connected": self.connected,
            "closed": self.closed,
            "components": self.components,
            "boundary_edges": len(self.boundary_edges),
            "non_manifold_edges": len(self.non_manifold_edges),
            "degenerate_triangles": len(self.degenerate_triangles),
            "vertex_count": self.vertex_count,
            "triangle_count": self.triangle_count,
            "summary": self.summary(),
        }


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[rb] = ra


def preprocess_mesh(mesh: TriMesh) -> PreprocessReport:
    """Check whether the mesh is a single closed surface."""
    n = len(mesh.vertices)
    uf = _UnionFind(n)
    referenced = np.zeros(n, dtype=bool)
    for tri in mesh.triangles:
        a, b, c = int(tri[0]), int(tri[1]), int(tri[2])
        referenced[[a, b, c]] = True
        uf.union(a, b)
        uf.union(a, c)
    roots = {uf.find(i) for i in range(n) if referenced[i]}
    components = len(roots) if roots.union(set()) else 0
    counts = mesh.edge_counts()
    boundary = sorted(e for e, k in counts.items() if k == 1)
    non_manifold = sorted(e for e, k in counts.items() if k > 2)
    areas = mesh.triangle_areas()
    degenerate = [int(i) for i in np.nonzero(areas == 0.0)[0]]
    return PreprocessReport(
        connected=components == 1,
        closed=bool(counts) and not boundary and not non_manifold,
        components=components,
        boundary_edges=boundary,
        non_manifold_edges=non_manifold,
        degenerate_triangles=degenerate,
        vertex_count=int(referenced.sum()),
        triangle_count=len(mesh.triangles),
    )


# --- OBJ ------------------------------------------------------------------------


def load_obj(path: str | Path) -> TriMesh:
    vertices: list[list[float]] = []
    triangles: list[list[int]] = []
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if parts[0] == "v":
                if len(parts) < 4:
                    raise MeshFormatError(f"line {line_no}: vertex needs 3 coordinates")
                vertices.append([float(parts[1]), float(parts[2]), float(parts[3])])
            elif parts[0] == "f":
                ids = []
                for token in parts[1:]:
                    idx = int(token.split("/")[0])
                    ids.append(idx - 1 if idx > 0 else len(vertices) + idx)
                if len(ids) < 3:
                    raise MeshFormatError(f"line {line_no}: face needs at least 3 vertices")
                for k in range(1, len(ids) - 1):  # fan triangulation
                    triangles.append([ids[0], ids[k], ids[k + 1]])
    if not vertices or not triangles:
        raise MeshFormatError("OBJ has no geometry")
    return TriMesh(np.array(vertices), np.array(triangles))


def save_obj(mesh: TriMesh, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(obj_bytes(mesh).decode("ascii"))


def obj_bytes(mesh: TriMesh) -> bytes:
    lines = []
    for v in mesh.vertices:
        lines.append(f"v {v[0]:.9g} {v[1]:.9g} {v[2]:.9g}")
    for t in mesh.triangles:
        lines.append(f"f {t[0] + 1} {t[1] + 1} {t[2] + 1}")
    return ("\n".join(lines) + "\n").encode("ascii")


# --- binary glTF (positions + indices subset) -------------------------------------

_GLB_MAGIC = 0x46546C67
_CHUNK_JSON = 0x4E4F534A
_CHUNK_BIN = 0x004E4942
_COMPONENT_DTYPES = {5121: np.uint8, 5123: np.uint16, 5125: np.uint32, 5126: np.float32}


def load_glb(path: str | Path) -> TriMesh:
    data = Path(path).read_bytes()
    if len(data) < 12:
        raise MeshFormatError("not a GLB file")
    magic, version, _length = struct.unpack_from("<III", data, 0)
    if magic != _GLB_MAGIC or version != 2:
        raise MeshFormatError("not a glTF 2.0 binary file")
    offset = 12
    doc = None
    binary = b""
    while offset + 8 <= len(data):
        chunk_len, chunk_type = struct.unpack_from("<II", data, offset)
        offset += 8
        chunk = data[offset : offset + chunk_len]
        offset += chunk_len + (-chunk_len % 4 if chunk_type == _CHUNK_JSON else 0)
        if chunk_type == _CHUNK_JSON:
            doc = json.loads(chunk.decode("utf-8"))
        elif chunk_type == _CHUNK_BIN:
            binary = chunk
    if doc is None:
        raise MeshFormatError("GLB missing JSON chunk")
    try:
        primitive = doc["meshes"][0]["primitives"][0]
        positions = _read_accessor(doc, binary, primitive["attributes"]["POSITION"])
        indices = _read_accessor(doc, binary, primitive["indices"])
    except (KeyError, IndexError) as exc:
        raise MeshFormatError(f"GLB missing mesh data: {exc}") from exc
    return TriMesh(positions.astype(np.float64), indices.reshape(-1, 3).astype(np.int64))


def _read_accessor(doc: dict, binary: bytes, accessor_index: int) -> np.ndarray:
    accessor = doc["accessors"][accessor_index]
    view = doc["bufferViews"][accessor["bufferView"]]
    dtype = _COMPONENT_DTYPES.get(accessor["componentType"])
    if dtype is None:
        raise MeshFormatError(f"unsupported component type {accessor['componentType']}")
    components = {"SCALAR": 1, "VEC2": 2, "VEC3": 3, "VEC4": 4}[accessor["type"]]
    start = view.get("byteOffset", 0) + accessor.get("byteOffset", 0)
    count = accessor["count"] * components
    array = np.frombuffer(binary, dtype=dtype, count=count, offset=start)
    return array.reshape(accessor["count"], components) if components > 1 else array


def save_glb(mesh: TriMesh, path: str | Path) -> None:
    positions = mesh.vertices.astype(np.float32)
    indices = mesh.triangles.astype(np.uint32).ravel()
    pos_bytes = positions.tobytes()
    idx_bytes = indices.tobytes()
    pad = -len(pos_bytes) % 4
    binary = pos_bytes + b"\x00" * pad + idx_bytes
    doc = {
        "asset": {"version": "2.0"},
        "scenes": [{"nodes": [0]}],
        "scene": 0,
        "nodes": [{"mesh": 0}],
        "meshes": [{"primitives": [{"attributes": {"POSITION": 0}, "indices": 1, "mode": 4}]}],
        "accessors": [
            {
                "bufferView": 0,
                "componentType": 5126,
                "count": len(positions),
                "type": "VEC3",
                "min": positions.min(axis=0).tolist(),
                "max": positions.max(axis=0).tolist(),
            },
            {
                "bufferView": 1,
                "componentType": 5125,
                "count": len(indices),
                "type": "SCALAR",
            },
        ],
        "bufferViews": [
            {"buffer": 0, "byteOffset": 0, "byteLength": len(pos_bytes)},
            {"buffer": 0, "byteOffset": len(pos_bytes) + pad, "byteLength": len(idx_bytes)},
        ],
        "buffers": [{"byteLength": len(binary)}],
    }
    json_bytes = json.dumps(doc, separators=(",", ":")).encode("utf-8")
    json_bytes += b" " * (-len(json_bytes) % 4)
    binary += b"\x00" * (-len(binary) % 4)
    total = 12 + 8 + len(json_bytes) + 8 + len(binary)
    with open(path, "wb") as fh:
        fh.write(struct.pack("<III", _GLB_MAGIC, 2, total))
        fh.write(struct.pack("<II", len(json_bytes), _CHUNK_JSON))
        fh.write(json_bytes)
        fh.write(struct.pack("<II", len(binary), _CHUNK_BIN))
        fh.write(binary)


def load_mesh(path: str | Path) -> TriMesh:
    suffix = Path(path).suffix.lower()
    if suffix == ".obj":
        return load_obj(path)
    if suffix in (".glb", ".gltf"):
        return load_glb(path)
    raise MeshFormatError(f"unsupported mesh format {suffix!r}")
