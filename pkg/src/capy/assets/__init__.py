"""Bundled example programs, scenes, and clip locations."""
from __future__ import annotations

from pathlib import Path

ASSETS_DIR = Path(__file__).parent

EXAMPLE_RUNS = {
    "getting_ready": ("programs/getting_ready.blk", "scenes/desk.json"),
    "alphabet": ("programs/alphabet.blk", "scenes/zones.json"),
    "pingpong": ("programs/pingpong.blk", "scenes/table.json"),
}


def program_path(name: str) -> Path:
    return ASSETS_DIR / EXAMPLE_RUNS[name][0]


def scene_path(name: str) -> Path:
    return ASSETS_DIR / EXAMPLE_RUNS[name][1]
