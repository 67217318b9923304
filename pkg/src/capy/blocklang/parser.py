"""Recursive-descent parser for the textual block language.

Grammar:

    program   := script* ;
    script    := "when" "touched" blockseq ;
    blockseq  := "{" block* "}" ;
    block     := "forward" INT | "turn" INT
               | "start" "trail" | "stop" "trail"
               | "start" "wear" STR | "stop" "wear" STR
               | "start" "animation" STR
               | "repeat" INT blockseq | "forever" blockseq
               | "if" cond blockseq ;
    cond      := "touches" "object" STR | "touches" "zone" STR ;
    INT       := ["-"] [0-9]+ ;  STR := '"' [^"]* '"' ;

Parameter ranges (steps 0..1000, degrees -360..360, count 0..100) and
identifier syntax inside STR are enforced here so every returned AST
satisfies the structural invariants.
"""
from __future__ import annotations

from dataclasses import dataclass

from .ast import (
    MAX_DEGREES,
    MAX_NESTING_DEPTH,
    MAX_REPEAT,
    MAX_SOURCE_BYTES,
    MAX_STEPS,
    Block,
    BlockProgram,
    Condition,
    Script,
    Span,
    is_identifier,
)
from .errors import BlockSyntaxError, LimitExceeded

KEYWORDS = frozenset(
    ["when", "touched", "forward", "turn", "start", "stop", "trail", "wear",
     "animation", "repeat", "forever", "if", "touches", "object", "zone"]
)


@dataclass(frozen=True)
class Token:
    kind: str  # "word" | "int" | "string" | "lbrace" | "rbrace" | "eof"
    text: str
    span: Span


def _tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    i = 0
    line = 1
    line_start = 0
    n = len(text)

    def span(start: int, end: int) -> Span:
        return Span(start, end, line, start - line_start + 1)

    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            i += 1
            line_start = i
            continue
        if ch in " \t\r":
            i += 1
            continue
        if ch == "#":  # comment to end of line
            while i < n and text[i] != "\n":
                i += 1
            continue
        if ch == "{":
            tokens.append(Token("lbrace", "{", span(i, i + 1)))
            i += 1
            continue
        if ch == "}":
            tokens.append(Token("rbrace", "}", span(i, i + 1)))
            i += 1
            continue
        if ch == '"':
            j = i + 1
            while j < n and text[j] != '"':
                if text[j] == "\n":
                    raise BlockSyntaxError("unterminated string", span(i, j), ('"',))
                j += 1
            if j >= n:
                raise BlockSyntaxError("unterminated string", span(i, n), ('"',))
            tokens.append(Token("string", text[i + 1 : j], span(i, j + 1)))
            i = j + 1
            continue
        if ch == "-" or ch.isdigit():
            j = i + 1 if ch == "-" else i
            if j >= n or not text[j].isdigit():
                raise BlockSyntaxError("lone '-'", span(i, i + 1), ("integer",))
            while j < n and text[j].isdigit():
                j += 1
            tokens.append(Token("int", text[i:j], span(i, j)))
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(Token("word", text[i:j], span(i, j)))
            i = j
            continue
        raise BlockSyntaxError(f"unexpected character {ch!r}", span(i, i + 1), ())
    tokens.append(Token("eof", "", span(n, n)))
    return tokens


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    @property
    def cur(self) -> Token:
        return self.tokens[self.pos]

    def _fail(self, expected: tuple[str, ...]) -> BlockSyntaxError:
        tok = self.cur
        got = "end of input" if tok.kind == "eof" else repr(tok.text)
        return BlockSyntaxError(f"unexpected {got}", tok.span, expected)

    def expect_word(self, word: str) -> Token:
        tok = self.cur
        if tok.kind != "word" or tok.text != word:
            raise self._fail((word,))
        self.pos += 1
        return tok

    def expect_int(self, lo: int, hi: int, what: str) -> tuple[int, Span]:
        tok = self.cur
        if tok.kind != "int":
            raise self._fail(("integer",))
        value = int(tok.text)
        if not lo <= value <= hi:
            raise BlockSyntaxError(f"{what} {value} out of range [{lo}, {hi}]", tok.span, ())
        self.pos += 1
        return value, tok.span

    def expect_name(self, what: str) -> tuple[str, Span]:
        tok = self.cur
        if tok.kind != "string":
            raise self._fail(("quoted name",))
        if not is_identifier(tok.text):
            raise BlockSyntaxError(f"invalid {what} name {tok.text!r}", tok.span, ())
        self.pos += 1
        return tok.text, tok.span

    def parse_program(self) -> BlockProgram:
        scripts: list[Script] = []
        while self.cur.kind != "eof":
            scripts.append(self.parse_script())
        return BlockProgram(scripts=scripts)

    def parse_script(self) -> Script:
        start = self.expect_word("when")
        self.expect_word("touched")
        body = self.parse_blockseq(depth=1)
        return Script(event="when_touched", body=body, span=start.span)

    def parse_blockseq(self, depth: int) -> list[Block]:
        if depth > MAX_NESTING_DEPTH:
            raise LimitExceeded(f"block nesting deeper than {MAX_NESTING_DEPTH}")
        if self.cur.kind != "lbrace":
            raise self._fail(("{",))
        self.pos += 1
        blocks: list[Block] = []
        while self.cur.kind != "rbrace":
            if self.cur.kind == "eof":
                raise self._fail(("}", "block"))
            blocks.append(self.parse_block(depth))
        self.pos += 1
        return blocks

    def parse_block(self, depth: int) -> Block:
        tok = self.cur
        if tok.kind != "word":
            raise self._fail(("block keyword",))
        kw = tok.text
        self.pos += 1
        if kw == "forward":
            steps, _ = self.expect_int(0, MAX_STEPS, "steps")
            return Block("forward", steps=steps, span=tok.span)
        if kw == "turn":
            degrees, _ = self.expect_int(-MAX_DEGREES, MAX_DEGREES, "degrees")
            return Block("turn", degrees=degrees, span=tok.span)
        if kw == "start":
            return self._parse_start_stop(tok.span, stop=False)
        if kw == "stop":
            return self._parse_start_stop(tok.span, stop=True)
        if kw == "repeat":
            count, _ = self.expect_int(0, MAX_REPEAT, "count")
            children = self.parse_blockseq(depth + 1)
            return Block("repeat", count=count, children=children, span=tok.span)
        if kw == "forever":
            children = self.parse_blockseq(depth + 1)
            return Block("forever", children=children, span=tok.span)
        if kw == "if":
            cond = self.parse_cond()
            children = self.parse_blockseq(depth + 1)
            return Block("if_cond", condition=cond, children=children, span=tok.span)
        self.pos -= 1
        raise self._fail(("forward", "turn", "start", "stop", "repeat", "forever", "if"))

    def _parse_start_stop(self, span: Span, stop: bool) -> Block:
        tok = self.cur
        if tok.kind != "word":
            raise self._fail(("trail", "wear") if stop else ("trail", "wear", "animation"))
        self.pos += 1
        prefix = "stop" if stop else "start"
        if tok.text == "trail":
            return Block(f"{prefix}_trail", span=span)
        if tok.text == "wear":
            name, _ = self.expect_name("accessory")
            return Block(f"{prefix}_wear", accessory=name, span=span)
        if tok.text == "animation" and not stop:
            name, _ = self.expect_name("animation clip")
            return Block("start_animation", clip=name, span=span)
        self.pos -= 1
        raise self._fail(("trail", "wear") if stop else ("trail", "wear", "animation"))

    def parse_cond(self) -> Condition:
        start = self.expect_word("touches")
        tok = self.cur
        if tok.kind != "word" or tok.text not in ("object", "zone"):
            raise self._fail(("object", "zone"))
        self.pos += 1
        target, _ = self.expect_name("zone" if tok.text == "zone" else "object class")
        kind = "touches_object" if tok.text == "object" else "touches_zone"
        return Condition(kind=kind, target=target, span=start.span)


def parse_program(text: str) -> BlockProgram:
    """Parse source text into a BlockProgram.

    Raises BlockSyntaxError on malformed input and LimitExceeded when the
    source is over 1 MiB or blocks nest deeper than 32 levels.
    """
    if len(text.encode("utf-8")) > MAX_SOURCE_BYTES:
        raise LimitExceeded(f"source larger than {MAX_SOURCE_BYTES} bytes")
    return _Parser(_tokenize(text)).parse_program()
