"""AST for the block language.

Programs are trees of scripts and blocks. Equality is structural: source
spans are carried for diagnostics but never compared, so a parsed program
equals its pretty-printed-and-reparsed twin.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field

LEAF_KINDS = frozenset(
    ["forward", "turn", "start_trail", "stop_trail", "start_wear", "stop_wear", "start_animation"]
)
CONTAINER_KINDS = frozenset(["repeat", "forever", "if_cond"])
BLOCK_KINDS = LEAF_KINDS | CONTAINER_KINDS
MOTION_KINDS = frozenset(["forward", "turn"])

CONDITION_KINDS = frozenset(["touches_object", "touches_zone"])

MAX_STEPS = 1000
MAX_DEGREES = 360
MAX_REPEAT = 100
MAX_NESTING_DEPTH = 32
MAX_SOURCE_BYTES = 1 << 20

# Asset names may contain interior spaces ("cowboy hat", "dining table") but
# must start and end on a word character.
IDENTIFIER_RE = re.compile(r"^[A-Za-z0-9_][A-Za-z0-9_\- ]*$")
ZONE_LABEL_RE = re.compile(r"^[A-Z]$")


def is_identifier(name: str) -> bool:
    return bool(IDENTIFIER_RE.match(name)) and not name.endswith(" ")


@dataclass(frozen=True)
class Span:
    """Half-open [start, end) offsets plus 1-based line/col of the start."""

    start: int = 0
    end: int = 0
    line: int = 1
    col: int = 1

    def __repr__(self) -> str:
        return f"Span({self.line}:{self.col})"


@dataclass
class Condition:
    kind: str  # touches_object | touches_zone
    target: str
    span: Span = field(default_factory=Span, compare=False, repr=False)

    def __post_init__(self) -> None:
        if self.kind not in CONDITION_KINDS:
            raise ValueError(f"unknown condition kind {self.kind!r}")


@dataclass
class Block:
    kind: str
    steps: int | None = None
    degrees: int | None = None
    accessory: str | None = None
    clip: str | None = None
    count: int | None = None
    condition: Condition | None = None
    children: list["Block"] = field(default_factory=list)
    span: Span = field(default_factory=Span, compare=False, repr=False)

    def __post_init__(self) -> None:
        if self.kind not in BLOCK_KINDS:
            raise ValueError(f"unknown block kind {self.kind!r}")

    @property
    def is_container(self) -> bool:
        return self.kind in CONTAINER_KINDS

    @property
    def is_motion(self) -> bool:
        return self.kind in MOTION_KINDS


@dataclass
class Script:
    event: str = "when_touched"
    body: list[Block] = field(default_factory=list)
    span: Span = field(default_factory=Span, compare=False, repr=False)


@dataclass
class BlockProgram:
    scripts: list[Script] = field(default_factory=list)
    metadata: dict[str, str] = field(default_factory=dict)

    def walk(self):
        """Yield (script_index, block) over every block, depth-first."""
        for si, script in enumerate(self.scripts):
            stack = list(reversed(script.body))
            while stack:
                block = stack.pop()
                yield si, block
                stack.extend(reversed(block.children))

    def condition_targets(self) -> list[tuple[str, str]]:
        """Distinct (kind, target) pairs of every condition, in first-use order."""
        seen: list[tuple[str, str]] = []
        for _, block in self.walk():
            if block.condition is not None:
                pair = (block.condition.kind, block.condition.target)
                if pair not in seen:
                    seen.append(pair)
        return seen

    def nesting_depth(self) -> int:
        def depth(blocks: list[Block]) -> int:
            if not blocks:
                return 0
            return 1 + max((depth(b.children) for b in blocks), default=0)

        return max((depth(s.body) for s in self.scripts), default=0)


def forward(steps: int, **kw) -> Block:
    return Block("forward", steps=steps, **kw)


def turn(degrees: int, **kw) -> Block:
    return Block("turn", degrees=degrees, **kw)


def repeat(count: int, children: list[Block], **kw) -> Block:
    return Block("repeat", count=count, children=children, **kw)


def forever(children: list[Block], **kw) -> Block:
    return Block("forever", children=children, **kw)


def if_cond(condition: Condition, children: list[Block], **kw) -> Block:
    return Block("if_cond", condition=condition, children=children, **kw)
