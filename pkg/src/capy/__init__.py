"""capy: a deterministic, headless engine for a block-programmable AR character.

Subpackages:

- blocklang: the block language (AST, parser, printer, JSON codec, validation)
- interpreter: tick-based VM executing programs against a scene
- scene: the simulated physical world, perception, and collision
- rigging: auto-rigging pipeline (interior graph, skeleton embedding, skin weights)
- animation: clip recording, persistence, replay, and retargeting
- gateway: moderated text-to-3D generation and the asset library
- service: HTTP/JSON API
"""

__version__ = "0.1.0"
