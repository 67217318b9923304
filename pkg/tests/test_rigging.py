import time

import numpy as np
import pytest

from capy.procgen import (
    HumanoidParams,
    capybara_mesh,
    humanoid_mesh,
    mesh_from_sdf,
    open_test_mesh,
    prop_mesh,
)
from capy.rigging import (
    EmbeddingFailed,
    MeshTooThin,
    PreprocessFailed,
    TriMesh,
    build_interior_graph,
    compute_skin_weights,
    default_skeleton_map,
    embed_skeleton,
    load_obj,
    map_skeleton,
    preprocess_mesh,
    rig,
    rigging_skeleton,
    save_glb,
    save_obj,
    tracking_skeleton,
    verify_partition_of_unity,
)
from capy.rigging.mapper import RiggedCharacter
from capy.rigging.mesh import load_glb

from .oracles import point_in_mesh_parity

TEST_RESOLUTION = 32


@pytest.fixture(scope="module")
def humanoid():
    return humanoid_mesh(resolution=56)


@pytest.fixture(scope="module")
def humanoid_graph(humanoid):
    return build_interior_graph(humanoid, TEST_RESOLUTION)


@pytest.fixture(scope="module")
def humanoid_embedding(humanoid_graph):
    return embed_skeleton(humanoid_graph, rigging_skeleton())


@pytest.fixture(scope="module")
def humanoid_rig(humanoid):
    return rig(humanoid, voxel_resolution=TEST_RESOLUTION)


# --- mesh / preprocess -----------------------------------------------------------


def unit_cube() -> TriMesh:
    v = np.array(
        [[0, 0, 0], [1, 0, 0], [0, 1, 0], [1, 1, 0], [0, 0, 1], [1, 0, 1], [0, 1, 1], [1, 1, 1]],
        dtype=float,
    )
    f = np.array(
        [
            [0, 2, 1], [1, 2, 3],
            [4, 5, 6], [5, 7, 6],
            [0, 1, 4], [1, 5, 4],
            [2, 6, 3], [3, 6, 7],
            [0, 4, 2], [2, 4, 6],
            [1, 3, 5], [3, 7, 5],
        ]
    )
    return TriMesh(v, f)


def test_unit_cube_closed_connected():
    report = preprocess_mesh(unit_cube())
    assert report.connected and report.closed
    assert report.components == 1
    assert report.triangle_count == 12


def test_disjoint_tetrahedra_two_components():
    tet_v = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1]], dtype=float)
    tet_f = np.array([[0, 1, 2], [0, 3, 1], [0, 2, 3], [1, 3, 2]])
    mesh = TriMesh(
        np.vstack([tet_v, tet_v + 5.0]),
        np.vstack([tet_f, tet_f + 4]),
    )
    report = preprocess_mesh(mesh)
    assert not report.connected
    assert report.components == 2
    assert report.closed  # both shells are watertight


def test_cube_missing_face_has_boundary():
    cube = unit_cube()
    mesh = TriMesh(cube.vertices, cube.triangles[:-2])  # drop one quad (2 tris)
    report = preprocess_mesh(mesh)
    assert not report.closed
    assert len(report.boundary_edges) == 4


def test_obj_roundtrip(tmp_path, humanoid):
    path = tmp_path / "mesh.obj"
    save_obj(humanoid, path)
    loaded = load_obj(path)
    assert len(loaded.vertices) == len(humanoid.vertices)
    assert np.array_equal(loaded.triangles, humanoid.triangles)
    assert np.allclose(loaded.vertices, humanoid.vertices, atol=1e-7)


def test_glb_roundtrip(tmp_path):
    cube = unit_cube()
    path = tmp_path / "mesh.glb"
    save_glb(cube, path)
    loaded = load_glb(path)
    assert np.allclose(loaded.vertices, cube.vertices)
    assert np.array_equal(loaded.triangles, cube.triangles)


def test_procedural_corpus_is_closed_and_connected():
    for mesh in (humanoid_mesh(resolution=40), capybara_mesh(40), prop_mesh(3, 32)):
        report = preprocess_mesh(mesh)
        assert report.ok, report.summary()


def test_open_test_mesh_fails_preprocess():
    report = preprocess_mesh(open_test_mesh())
    assert not report.closed


# --- interior graph ----------------------------------------------------------------


def test_sphere_packs_one_dominant_sphere():
    def sdf(points):
        return np.linalg.norm(points, axis=1) - 0.5

    mesh = mesh_from_sdf(sdf, (-0.7, -0.7, -0.7), (0.7, 0.7, 0.7), 48)
    graph = build_interior_graph(mesh, 32)
    assert abs(float(graph.radii.max()) - 0.5) < 2 * graph.grid.voxel_size


def test_capsule_packs_connected_chain():
    def sdf(points):
        a = np.array([0.0, -0.4, 0.0])
        b = np.array([0.0, 0.4, 0.0])
        ab = b - a
        t = np.clip(((points - a) @ ab) / (ab @ ab), 0, 1)
        return np.linalg.norm(points - (a + t[:, None] * ab), axis=1) - 0.1

    mesh = mesh_from_sdf(sdf, (-0.25, -0.6, -0.25), (0.25, 0.6, 0.25), 40)
    graph = build_interior_graph(mesh, 32)
    assert graph.vertex_count >= 3
    assert graph.is_connected()
    # the dominant spheres hug the medial axis and span the capsule
    big = graph.radii >= 0.5 * graph.radii.max()
    chain = graph.centers[big]
    radii = graph.radii[big]
    assert len(chain) >= 3
    assert np.abs(chain[:, [0, 2]]).max() < 2 * graph.grid.voxel_size
    assert chain[:, 1].max() > 0.25
    assert chain[:, 1].min() < -0.25
    # and their mutual-intersection graph is one connected chain component
    n = len(chain)
    adjacency = [
        [j for j in range(n) if j != i
         and np.linalg.norm(chain[i] - chain[j]) < radii[i] + radii[j]]
        for i in range(n)
    ]
    seen = {0}
    stack = [0]
    while stack:
        for j in adjacency[stack.pop()]:
            if j not in seen:
                seen.add(j)
                stack.append(j)
    assert seen == set(range(n))


def test_thin_sheet_raises():
    v = np.array([[0, 0, 0], [1, 0, 0], [0, 0, 1], [1, 0, 1]], dtype=float)
    f = np.array([[0, 1, 2], [1, 3, 2]])
    with pytest.raises(MeshTooThin):
        build_interior_graph(TriMesh(v, f), 16)


def test_graph_determinism(humanoid):
    g1 = build_interior_graph(humanoid, TEST_RESOLUTION)
    g2 = build_interior_graph(humanoid, TEST_RESOLUTION)
    assert np.array_equal(g1.centers, g2.centers)
    assert np.array_equal(g1.radii, g2.radii)
    assert g1.edges == g2.edges


# --- embedding ------------------------------------------------------------------------


def test_embedding_extremities(humanoid_embedding):
    pos = humanoid_embedding.positions
    assert pos["head"][1] > pos["chest"][1] > pos["pelvis"][1]
    assert pos["foot.L"][1] < pos["knee.L"][1] < pos["hip.L"][1]
    assert pos["foot.L"][1] < 0.2
    assert pos["hand.L"][0] > 0.25
    assert pos["hand.R"][0] < -0.25


def test_embedding_left_right_bone_symmetry(humanoid_embedding, humanoid):
    height = float(humanoid.vertices[:, 1].max() - humanoid.vertices[:, 1].min())
    pos = humanoid_embedding.positions
    for chain in (("shoulder", "elbow"), ("elbow", "hand"), ("hip", "knee"), ("knee", "foot")):
        left = np.linalg.norm(pos[f"{chain[1]}.L"] - pos[f"{chain[0]}.L"])
        right = np.linalg.norm(pos[f"{chain[1]}.R"] - pos[f"{chain[0]}.R"])
        assert abs(left - right) < 0.05 * height, chain


def test_embedding_joints_inside_mesh(humanoid_embedding, humanoid):
    for name, pos in humanoid_embedding.positions.items():
        assert point_in_mesh_parity(humanoid, pos), f"{name} outside mesh"


def test_mirrored_mesh_gives_mirrored_embedding(humanoid, humanoid_embedding, humanoid_graph):
    mirrored = humanoid.mirrored_x()
    graph = build_interior_graph(mirrored, TEST_RESOLUTION)
    embedding = embed_skeleton(graph, rigging_skeleton())
    swap = {"L": "R", "R": "L"}

    def mirror_name(name):
        if name[-2:] in (".L", ".R"):
            return name[:-1] + swap[name[-1]]
        return name

    tolerance = 2 * humanoid_graph.grid.voxel_size
    for name, pos in humanoid_embedding.positions.items():
        expected = pos.copy()
        expected[0] = -expected[0]
        actual = embedding.positions[mirror_name(name)]
        assert np.linalg.norm(expected - actual) <= tolerance, name


def test_embedding_fails_with_too_few_vertices():
    def sdf(points):
        return np.linalg.norm(points, axis=1) - 0.5

    mesh = mesh_from_sdf(sdf, (-0.7, -0.7, -0.7), (0.7, 0.7, 0.7), 32)
    graph = build_interior_graph(mesh, 4)
    assert graph.vertex_count < 17
    with pytest.raises(EmbeddingFailed):
        embed_skeleton(graph, rigging_skeleton())


# --- skin weights ------------------------------------------------------------------------


@pytest.fixture(scope="module")
def humanoid_weights(humanoid, humanoid_embedding, humanoid_graph):
    return compute_skin_weights(humanoid, humanoid_embedding, humanoid_graph.grid)


def test_weights_partition_of_unity(humanoid_weights):
    verify_partition_of_unity(humanoid_weights)
    sums = humanoid_weights.values.sum(axis=1)
    assert np.abs(sums - 1.0).max() <= 1e-6
    assert humanoid_weights.values.min() >= 0.0


def test_weights_max_four_influences(humanoid_weights):
    assert humanoid_weights.indices.shape[1] == 4
    assert ((humanoid_weights.values > 0).sum(axis=1) <= 4).all()


def test_hand_tip_dominated_by_hand_bone(humanoid, humanoid_weights):
    tip = int(np.argmax(humanoid.vertices[:, 0]))
    assert humanoid_weights.bone_weight(tip, "hand.L") > 0.9
    tip_r = int(np.argmin(humanoid.vertices[:, 0]))
    assert humanoid_weights.bone_weight(tip_r, "hand.R") > 0.9


def test_weights_smooth_across_edges(humanoid, humanoid_weights):
    dense = humanoid_weights.dense()
    tris = humanoid.triangles
    worst = max(
        float(np.abs(dense[tris[:, a]] - dense[tris[:, b]]).sum(axis=1).max())
        for a, b in ((0, 1), (1, 2), (2, 0))
    )
    assert worst < 0.5


def test_weights_support_connected(humanoid, humanoid_weights):
    dense = humanoid_weights.dense()
    neighbors = [set() for _ in range(len(humanoid.vertices))]
    for tri in humanoid.triangles:
        a, b, c = (int(v) for v in tri)
        neighbors[a].update((b, c))
        neighbors[b].update((a, c))
        neighbors[c].update((a, b))
    for bi in range(dense.shape[1]):
        support = set(np.nonzero(dense[:, bi] > 0)[0].tolist())
        if not support:
            continue
        seed = min(support)
        seen = {seed}
        stack = [seed]
        while stack:
            for nb in neighbors[stack.pop()]:
                if nb in support and nb not in seen:
                    seen.add(nb)
                    stack.append(nb)
        assert seen == support, humanoid_weights.bone_names[bi]


# --- mapping ---------------------------------------------------------------------------


def test_map_places_shared_joints_identically(humanoid_embedding, humanoid, humanoid_weights):
    rigged = map_skeleton(humanoid, humanoid_embedding, humanoid_weights)
    for rig_name, tracking_name in (
        ("pelvis", "hips"),
        ("chest", "chest"),
        ("elbow.L", "elbow.L"),
        ("hand.R", "hand.R"),
        ("knee.L", "knee.L"),
    ):
        i = rigged.joint_names.index(tracking_name)
        assert np.allclose(
            rigged.joint_positions[i], humanoid_embedding.positions[rig_name]
        ), tracking_name


def test_map_interpolates_wrist(humanoid_embedding, humanoid, humanoid_weights):
    rigged = map_skeleton(humanoid, humanoid_embedding, humanoid_weights)
    skeleton_map = default_skeleton_map()
    entry = skeleton_map.entries["wrist.L"]
    elbow = humanoid_embedding.positions["elbow.L"]
    hand = humanoid_embedding.positions["hand.L"]
    expected = elbow + entry.weight * (hand - elbow)
    i = rigged.joint_names.index("wrist.L")
    assert np.allclose(rigged.joint_positions[i], expected)


def test_map_conserves_weight_mass(humanoid_embedding, humanoid, humanoid_weights):
    rigged = map_skeleton(humanoid, humanoid_embedding, humanoid_weights)
    sums = rigged.weights.values.sum(axis=1)
    assert np.abs(sums - 1.0).max() <= 1e-6


def test_skeleton_map_hierarchy_consistent():
    skeleton_map = default_skeleton_map()
    skeleton_map.validate()
    assert set(skeleton_map.entries) == set(tracking_skeleton().names)


# --- pipeline ----------------------------------------------------------------------------


def test_rig_end_to_end(humanoid_rig, humanoid):
    assert humanoid_rig.skeleton_id == "tracking-28"
    assert len(humanoid_rig.joint_names) == 28
    verify_partition_of_unity(humanoid_rig.weights)
    for i in range(len(humanoid_rig.joint_names)):
        assert point_in_mesh_parity(humanoid, humanoid_rig.joint_positions[i]), (
            humanoid_rig.joint_names[i]
        )


def test_rig_rejects_open_mesh():
    with pytest.raises(PreprocessFailed) as exc_info:
        rig(open_test_mesh(), voxel_resolution=16)
    assert not exc_info.value.report.closed
    assert "boundary" in exc_info.value.report.summary()


def test_rig_progress_monotone(humanoid):
    fractions = []
    rig(humanoid, voxel_resolution=TEST_RESOLUTION, progress=lambda s, f: fractions.append(f))
    assert fractions == sorted(fractions)
    assert fractions[-1] == 1.0


def test_rig_sidecar_roundtrip(tmp_path, humanoid_rig):
    path = tmp_path / "rig.json"
    humanoid_rig.save(path)
    loaded = RiggedCharacter.load(path)
    assert loaded.skeleton_id == humanoid_rig.skeleton_id
    assert loaded.joint_names == humanoid_rig.joint_names
    assert np.allclose(loaded.joint_positions, humanoid_rig.joint_positions)
    assert np.array_equal(loaded.weights.indices, humanoid_rig.weights.indices)
    assert np.allclose(loaded.weights.values, humanoid_rig.weights.values)


def test_rig_determinism(humanoid):
    a = rig(humanoid, voxel_resolution=TEST_RESOLUTION)
    b = rig(humanoid, voxel_resolution=TEST_RESOLUTION)
    assert np.array_equal(a.joint_positions, b.joint_positions)
    assert np.array_equal(a.weights.indices, b.weights.indices)
    assert np.array_equal(a.weights.values, b.weights.values)
