from .ast import (
    BLOCK_KINDS,
    CONDITION_KINDS,
    CONTAINER_KINDS,
    LEAF_KINDS,
    MOTION_KINDS,
    Block,
    BlockProgram,
    Condition,
    Script,
    Span,
    forever,
    forward,
    if_cond,
    is_identifier,
    repeat,
    turn,
)
from .errors import BlockSyntaxError, LimitExceeded, SchemaError
from .jsoncodec import decode_json, encode_json, program_from_obj, program_to_obj
from .parser import parse_program
from .printer import print_program
from .validate import Diagnostic, ValidationReport, validate

__all__ = [
    "BLOCK_KINDS",
    "CONDITION_KINDS",
    "CONTAINER_KINDS",
    "LEAF_KINDS",
    "MOTION_KINDS",
    "Block",
    "BlockProgram",
    "BlockSyntaxError",
    "Condition",
    "Diagnostic",
    "LimitExceeded",
    "SchemaError",
    "Script",
    "Span",
    "ValidationReport",
    "decode_json",
    "encode_json",
    "forever",
    "forward",
    "if_cond",
    "is_identifier",
    "parse_program",
    "print_program",
    "program_from_obj",
    "program_to_obj",
    "repeat",
    "turn",
    "validate",
]
