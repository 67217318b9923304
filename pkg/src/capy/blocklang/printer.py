"""Canonical pretty-printer: 2-space indent, one block per line.

print_program(parse_program(t)) is a fixed point of parse/print for any
valid source t.
"""
from __future__ import annotations

from .ast import Block, BlockProgram, Condition


def _print_condition(cond: Condition) -> str:
    noun = "object" if cond.kind == "touches_object" else "zone"
    return f'touches {noun} "{cond.target}"'


def _print_block(block: Block, indent: int, out: list[str]) -> None:
    pad = "  " * indent
    k = block.kind
    if k == "forward":
        out.append(f"{pad}forward {block.steps}")
    elif k == "turn":
        out.append(f"{pad}turn {block.degrees}")
    elif k == "start_trail":
        out.append(f"{pad}start trail")
    elif k == "stop_trail":
        out.append(f"{pad}stop trail")
    elif k == "start_wear":
        out.append(f'{pad}start wear "{block.accessory}"')
    elif k == "stop_wear":
        out.append(f'{pad}stop wear "{block.accessory}"')
    elif k == "start_animation":
        out.append(f'{pad}start animation "{block.clip}"')
    else:
        if k == "repeat":
            head = f"repeat {block.count}"
        elif k == "forever":
            head = "forever"
        else:
            head = f"if {_print_condition(block.condition)}"
        if block.children:
            out.append(f"{pad}{head} {{")
            for child in block.children:
                _print_block(child, indent + 1, out)
            out.append(f"{pad}}}")
        else:
            out.append(f"{pad}{head} {{ }}")


def print_program(program: BlockProgram) -> str:
    out: list[str] = []
    for script in program.scripts:
        if script.body:
            out.append("when touched {")
            for block in script.body:
                _print_block(block, 1, out)
            out.append("}")
        else:
            out.append("when touched { }")
    if not out:
        return ""
    return "\n".join(out) + "\n"
