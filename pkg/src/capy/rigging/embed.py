"""Discrete skeleton embedding into the interior sphere graph.

Joints are assigned to graph vertices in tree order (parents first) by a
best-first search over partial assignments. The cost of an assignment sums
bone-length distortion against the reference proportions, bone-direction
deviation from the reference pose, a weak position prior from the
reference pose scaled into the interior volume, left/right bone-length
asymmetry, and a proximity penalty for unrelated joints landing too close.
The heuristic adds, for every unassigned joint, the minimum cost any
vertex could give it, so it never overestimates; graphs under ten vertices
are searched completely, larger ones carry a node budget with a
deterministic beam-search fallback. Orderings tie on (cost, lowest index).
"""
from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass

import numpy as np

from .skeleton import Skeleton
from .voxel import InteriorGraph

W_LENGTH = 1.2
W_DIRECTION = 0.8
W_PRIOR = 0.5
W_SYMMETRY = 1.0
W_PROXIMITY = 0.4
PROXIMITY_RADIUS = 0.06  # fraction of height
EXHAUSTIVE_VERTEX_LIMIT = 10
NODE_BUDGET = 120_000
CANDIDATES_PER_EXPANSION = 24
BEAM_WIDTH = 512
INFINITY = float("inf")


class EmbeddingFailed(RuntimeError):
    """No assignment satisfied the containment invariants.

    Callers should surface this as "retry with a different model".
    """


@dataclass
class EmbeddedSkeleton:
    skeleton: Skeleton
    positions: dict[str, np.ndarray]
    vertex_assignment: dict[str, int]
    cost: float

    def parent_map(self) -> dict[str, str | None]:
        return {j.name: j.parent for j in self.skeleton.joints}

    def bone_segments(self) -> dict[str, tuple[np.ndarray, np.ndarray]]:
        """Bone name (distal joint) -> (proximal position, distal position)."""
        return {
            child: (self.positions[parent], self.positions[child])
            for parent, child in self.skeleton.bones()
        }

    def to_obj(self) -> dict:
        return {
            "skeleton_id": self.skeleton.skeleton_id,
            "joints": [
                {
                    "name": j.name,
                    "parent": j.parent,
                    "position": [float(v) for v in self.positions[j.name]],
                }
                for j in self.skeleton.joints
            ],
        }


class _Problem:
    def __init__(self, graph: InteriorGraph, skeleton: Skeleton):
        self.graph = graph
        self.skeleton = skeleton
        self.order = skeleton.topological_order()
        self.order_index = {name: i for i, name in enumerate(self.order)}
        self.centers = graph.centers
        self.vertex_count = graph.vertex_count
        self.height = graph.height if graph.height > 0 else 1.0

        inside = np.argwhere(graph.grid.inside)
        lo = graph.grid.index_to_world(inside.min(axis=0))
        hi = graph.grid.index_to_world(inside.max(axis=0))
        scale = hi[1] - lo[1]
        center_x = (lo[0] + hi[0]) / 2.0
        center_z = (lo[2] + hi[2]) / 2.0
        refs = skeleton.reference_positions()
        self.expected = {
            name: np.array(
                [center_x + ref[0] * scale, lo[1] + ref[1] * scale, center_z + ref[2] * scale]
            )
            for name, ref in refs.items()
        }

        self.parent_slot: list[int | None] = []
        self.ref_len: list[float] = []
        self.ref_dir: list[np.ndarray | None] = []
        for name in self.order:
            parent = skeleton.parent_of(name)
            self.parent_slot.append(None if parent is None else self.order_index[parent])
            if parent is None:
                self.ref_len.append(0.0)
                self.ref_dir.append(None)
            else:
                delta = refs[name] - refs[parent]
                length = float(np.linalg.norm(delta))
                self.ref_len.append(length)
                self.ref_dir.append(delta / length if length > 0 else None)

        self.pair_slot: list[int | None] = [None] * len(self.order)
        for a, b in skeleton.symmetry_pairs:
            ia, ib = self.order_index[a], self.order_index[b]
            self.pair_slot[max(ia, ib)] = min(ia, ib)

        diff = self.centers[:, None, :] - self.centers[None, :, :]
        self.pair_dist = np.linalg.norm(diff, axis=2)
        self.prox_radius = PROXIMITY_RADIUS * self.height
        # prior cost per (slot, vertex)
        self.prior = np.stack(
            [
                W_PRIOR
                * np.linalg.norm(self.centers - self.expected[name], axis=1)
                / self.height
                for name in self.order
            ]
        )
        self._edge_cache: dict[tuple[int, int], np.ndarray] = {}
        self._segment_cache: dict[tuple[int, int], bool] = {}

        # admissible per-joint lower bounds
        joint_count = len(self.order)
        lower = np.zeros(joint_count)
        lower[0] = float(self.prior[0].min())
        for slot in range(1, joint_count):
            best = INFINITY
            for pv in range(self.vertex_count):
                total = self.edge_costs(slot, pv) + self.prior[slot]
                best = min(best, float(total.min()))
            lower[slot] = best
        self.suffix_bound = np.zeros(joint_count + 1)
        for slot in range(joint_count - 1, -1, -1):
            self.suffix_bound[slot] = self.suffix_bound[slot + 1] + lower[slot]

    def edge_costs(self, slot: int, parent_vertex: int) -> np.ndarray:
        key = (slot, parent_vertex)
        cached = self._edge_cache.get(key)
        if cached is not None:
            return cached
        lengths = self.pair_dist[parent_vertex]
        cost = W_LENGTH * np.abs(lengths / self.height - self.ref_len[slot])
        direction = self.ref_dir[slot]
        if direction is not None:
            deltas = self.centers - self.centers[parent_vertex]
            norms = np.maximum(lengths, 1e-12)
            cosine = (deltas @ direction) / norms
            dir_cost = np.where(lengths <= 1e-12, 1.0, 1.0 - cosine)
            cost = cost + W_DIRECTION * dir_cost
        self._edge_cache[key] = cost
        return cost

    def segment_ok(self, a: int, b: int) -> bool:
        if a == b:
            return True
        key = (a, b) if a < b else (b, a)
        cached = self._segment_cache.get(key)
        if cached is None:
            cached = self.graph.grid.segment_inside(self.centers[key[0]], self.centers[key[1]])
            self._segment_cache[key] = cached
        return cached

    def candidate_costs(self, assigned: tuple[int, ...], slot: int) -> np.ndarray:
        """Incremental cost of each vertex for the next joint (no containment)."""
        parent = self.parent_slot[slot]
        if parent is None:
            cost = self.prior[slot].copy()
        else:
            cost = self.edge_costs(slot, assigned[parent]) + self.prior[slot]
        pair = self.pair_slot[slot]
        if pair is not None and parent is not None:
            partner_parent = self.parent_slot[pair]
            len_there = self.pair_dist[assigned[partner_parent], assigned[pair]]
            cost = cost + W_SYMMETRY * np.abs(
                self.pair_dist[assigned[parent]] - len_there
            ) / self.height
        if assigned:
            d = self.pair_dist[list(assigned)]  # (n_assigned, V)
            close = d < self.prox_radius
            if parent is not None:
                close[parent] = False
            penalty = np.where(close, 1.0 - d / self.prox_radius, 0.0).sum(axis=0)
            cost = cost + W_PROXIMITY * penalty
        return cost


def embed_skeleton(graph: InteriorGraph, skeleton: Skeleton) -> EmbeddedSkeleton:
    joint_count = len(skeleton.joints)
    if graph.vertex_count < joint_count:
        raise EmbeddingFailed(
            f"interior graph has {graph.vertex_count} vertices, "
            f"fewer than {joint_count} joints"
        )
    if not graph.is_connected():
        raise EmbeddingFailed("interior graph is not connected")

    problem = _Problem(graph, skeleton)
    exhaustive = graph.vertex_count < EXHAUSTIVE_VERTEX_LIMIT
    budget = None if exhaustive else NODE_BUDGET
    beam = graph.vertex_count if exhaustive else min(graph.vertex_count, CANDIDATES_PER_EXPANSION)

    counter = itertools.count()
    heap: list[tuple[float, int, float, tuple[int, ...]]] = []
    heapq.heappush(heap, (float(problem.suffix_bound[0]), next(counter), 0.0, ()))
    pops = 0
    while heap:
        _, _, g, assigned = heapq.heappop(heap)
        pops += 1
        slot = len(assigned)
        if slot == joint_count:
            return _finish(problem, assigned, g)
        if budget is not None and pops > budget:
            break
        costs = problem.candidate_costs(assigned, slot)
        order = np.lexsort((np.arange(len(costs)), costs))
        parent = problem.parent_slot[slot]
        taken = 0
        for vertex in order:
            if taken >= beam:
                break
            vertex = int(vertex)
            if parent is not None and not problem.segment_ok(assigned[parent], vertex):
                continue
            child_g = g + float(costs[vertex])
            child_f = child_g + float(problem.suffix_bound[slot + 1])
            heapq.heappush(heap, (child_f, next(counter), child_g, assigned + (vertex,)))
            taken += 1

    return _beam_search(problem)


def _beam_search(problem: _Problem) -> EmbeddedSkeleton:
    """Deterministic fixed-width completion when the exact search hits budget."""
    joint_count = len(problem.order)
    states: list[tuple[float, tuple[int, ...]]] = [(0.0, ())]
    for slot in range(joint_count):
        expanded: list[tuple[float, tuple[int, ...]]] = []
        parent = problem.parent_slot[slot]
        for g, assigned in states:
            costs = problem.candidate_costs(assigned, slot)
            order = np.lexsort((np.arange(len(costs)), costs))
            taken = 0
            for vertex in order:
                if taken >= 8:
                    break
                vertex = int(vertex)
                if parent is not None and not problem.segment_ok(assigned[parent], vertex):
                    continue
                expanded.append((g + float(costs[vertex]), assigned + (vertex,)))
                taken += 1
        if not expanded:
            raise EmbeddingFailed("no vertex satisfies segment containment")
        expanded.sort(key=lambda item: (item[0], item[1]))
        states = expanded[:BEAM_WIDTH]
    g, assigned = states[0]
    return _finish(problem, assigned, g)


def _finish(problem: _Problem, assigned: tuple[int, ...], cost: float) -> EmbeddedSkeleton:
    positions = {
        name: problem.centers[assigned[i]].copy() for i, name in enumerate(problem.order)
    }
    embedded = EmbeddedSkeleton(
        skeleton=problem.skeleton,
        positions=positions,
        vertex_assignment={name: int(assigned[i]) for i, name in enumerate(problem.order)},
        cost=cost,
    )
    verify_embedding(problem.graph, embedded)
    return embedded


def verify_embedding(graph: InteriorGraph, embedded: EmbeddedSkeleton) -> None:
    for name, pos in embedded.positions.items():
        if not graph.grid.contains_point(pos):
            raise EmbeddingFailed(f"joint {name} not strictly inside the mesh")
    for parent, child in embedded.skeleton.bones():
        if not graph.grid.segment_inside(embedded.positions[parent], embedded.positions[child]):
            raise EmbeddingFailed(f"bone {parent}->{child} exits the mesh")
