import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from capy.blocklang import (
    Block,
    BlockProgram,
    BlockSyntaxError,
    Condition,
    LimitExceeded,
    SchemaError,
    Script,
    decode_json,
    encode_json,
    forever,
    forward,
    if_cond,
    parse_program,
    print_program,
    repeat,
    turn,
    validate,
)


class FakeLibrary:
    def __init__(self, accessories=(), clips=()):
        self.accessories = set(accessories)
        self.clips = set(clips)


class FakeScene:
    def __init__(self, labels=()):
        self.zones = [type("Z", (), {"label": l})() for l in labels]


def test_parse_single_forward():
    program = parse_program("when touched { forward 10 }")
    assert len(program.scripts) == 1
    body = program.scripts[0].body
    assert body == [forward(10)]


def test_parse_nested_repeat():
    program = parse_program("when touched { repeat 4 { forward 10 turn 90 } }")
    body = program.scripts[0].body
    assert body == [repeat(4, [forward(10), turn(90)])]
    assert len(body[0].children) == 2


def test_parse_missing_steps_is_syntax_error():
    with pytest.raises(BlockSyntaxError) as exc_info:
        parse_program("when touched { forward }")
    err = exc_info.value
    assert "integer" in err.expected
    # The offending token is the closing brace.
    assert err.span.col == "when touched { forward }".index("}") + 1


def test_parse_spans_retained():
    program = parse_program('when touched {\n  forward 3\n  if touches zone "A" { }\n}')
    fwd, cond_block = program.scripts[0].body
    assert fwd.span.line == 2
    assert cond_block.span.line == 3
    assert cond_block.condition.span.line == 3


@pytest.mark.parametrize(
    "source",
    [
        "when touched { forward 1001 }",
        "when touched { forward -1 }",
        "when touched { turn 361 }",
        "when touched { turn -361 }",
        "when touched { repeat 101 { } }",
        'when touched { start wear "" }',
        'when touched { start wear " pad" }',
    ],
)
def test_parse_rejects_out_of_range_params(source):
    with pytest.raises(BlockSyntaxError):
        parse_program(source)


def test_parse_depth_limit():
    src = "when touched " + "{ forever " * 33 + "{ }" + " }" * 33
    with pytest.raises(LimitExceeded):
        parse_program(src)
    ok_src = "when touched " + "{ forever " * 31 + "{ }" + " }" * 31
    parse_program(ok_src)


def test_parse_size_limit():
    big = "when touched { }" + " " * (1 << 20)
    with pytest.raises(LimitExceeded):
        parse_program(big)


def test_print_canonical_form():
    program = parse_program("when touched{forward 1}")
    assert print_program(program) == "when touched {\n  forward 1\n}\n"


def test_print_empty_program():
    assert print_program(BlockProgram()) == ""


PINGPONG = """
when touched {
  forever {
    forward 10
    if touches zone "A" {
      turn 180
      forward 30
    }
    if touches zone "B" {
      turn 180
      forward 30
    }
  }
}
"""


def test_roundtrip_fixed_point_pingpong():
    program = parse_program(PINGPONG)
    once = print_program(program)
    twice = print_program(parse_program(once))
    assert once == twice
    assert parse_program(once) == program


CORPUS = [
    "",
    "when touched { }",
    "when touched { forward 0 }",
    "when touched { turn -360 }",
    'when touched { start trail stop trail start wear "hat" stop wear "hat" }',
    'when touched { start animation "wave" }',
    "when touched { repeat 0 { forward 10 } }",
    'when touched { forever { if touches object "banana" { start animation "wave" } } }',
    "when touched { forward 1 } when touched { turn 5 }",
    PINGPONG,
]


@pytest.mark.parametrize("source", CORPUS)
def test_roundtrip_corpus(source):
    program = parse_program(source)
    printed = print_program(program)
    assert parse_program(printed) == program
    assert print_program(parse_program(printed)) == printed


@pytest.mark.parametrize("source", CORPUS)
def test_json_roundtrip_corpus(source):
    program = parse_program(source)
    data = encode_json(program)
    assert decode_json(data) == program
    assert encode_json(decode_json(data)) == data


def test_decode_empty_scripts():
    assert decode_json(b'{"scripts": []}') == BlockProgram()


def test_decode_unknown_kind_reports_pointer():
    doc = {"scripts": [{"event": "when_touched", "body": [{"kind": "fly"}]}]}
    with pytest.raises(SchemaError) as exc_info:
        decode_json(json.dumps(doc))
    assert exc_info.value.pointer == "/scripts/0/body/0/kind"


def test_decode_out_of_range_param():
    doc = {"scripts": [{"event": "when_touched", "body": [{"kind": "forward", "steps": 9999}]}]}
    with pytest.raises(SchemaError) as exc_info:
        decode_json(json.dumps(doc))
    assert "/steps" in exc_info.value.pointer


def test_decode_rejects_bool_as_int():
    doc = {"scripts": [{"event": "when_touched", "body": [{"kind": "forward", "steps": True}]}]}
    with pytest.raises(SchemaError):
        decode_json(json.dumps(doc))


def test_validate_known_object_ok():
    program = parse_program('when touched { if touches object "banana" { } }')
    report = validate(program, FakeScene(), FakeLibrary())
    assert report.ok


def test_validate_two_letter_zone_label():
    program = parse_program('when touched { if touches zone "AA" { } }')
    report = validate(program, FakeScene(["A"]), FakeLibrary())
    assert not report.ok
    assert report.errors()[0].code == "E_ZONE_LABEL"


def test_validate_unknown_zone():
    program = parse_program('when touched { if touches zone "Q" { } }')
    report = validate(program, FakeScene(["A", "B"]), FakeLibrary())
    assert [d.code for d in report.errors()] == ["E_UNKNOWN_ZONE"]


def test_validate_unknown_clip():
    program = parse_program('when touched { start animation "ghost" }')
    report = validate(program, FakeScene(), FakeLibrary())
    assert [d.code for d in report.errors()] == ["E_UNKNOWN_CLIP"]


def test_validate_unknown_object_and_accessory():
    program = parse_program(
        'when touched { start wear "crown" if touches object "dragon" { } }'
    )
    report = validate(program, FakeScene(), FakeLibrary(accessories={"hat"}))
    codes = {d.code for d in report.errors()}
    assert codes == {"E_UNKNOWN_ACCESSORY", "E_UNKNOWN_OBJECT"}


def test_validate_warns_unreachable_after_forever():
    program = parse_program("when touched { forever { forward 1 } turn 90 }")
    report = validate(program, FakeScene(), FakeLibrary())
    assert report.ok
    warnings = [d for d in report.diagnostics if d.severity == "warning"]
    assert len(warnings) == 1 and warnings[0].code == "W_UNREACHABLE"


def test_validation_soundness_ok_means_assets_exist():
    program = parse_program(
        'when touched { start wear "hat" start animation "wave"'
        ' if touches zone "A" { } if touches object "laptop" { } }'
    )
    report = validate(program, FakeScene(["A"]), FakeLibrary({"hat"}, {"wave"}))
    assert report.ok


# --- property tests -------------------------------------------------------

_names = st.sampled_from(["hat", "apple", "cowboy hat", "wave", "b2", "x_y"])


def _blocks(depth: int):
    leaf = st.one_of(
        st.builds(forward, st.integers(0, 1000)),
        st.builds(turn, st.integers(-360, 360)),
        st.sampled_from(["start_trail", "stop_trail"]).map(Block),
        st.builds(lambda n: Block("start_wear", accessory=n), _names),
        st.builds(lambda n: Block("stop_wear", accessory=n), _names),
        st.builds(lambda n: Block("start_animation", clip=n), _names),
    )
    if depth <= 0:
        return leaf
    child_seq = st.lists(_blocks(depth - 1), max_size=3)
    cond = st.builds(
        Condition,
        st.sampled_from(["touches_object", "touches_zone"]),
        st.sampled_from(["banana", "laptop", "A", "B"]),
    )
    return st.one_of(
        leaf,
        st.builds(repeat, st.integers(0, 100), child_seq),
        st.builds(forever, child_seq),
        st.builds(if_cond, cond, child_seq),
    )


programs = st.builds(
    lambda bodies: BlockProgram(scripts=[Script(body=b) for b in bodies]),
    st.lists(st.lists(_blocks(2), max_size=4), max_size=3),
)


@settings(max_examples=200, deadline=None)
@given(programs)
def test_property_print_parse_roundtrip(program):
    printed = print_program(program)
    assert parse_program(printed) == program


@settings(max_examples=200, deadline=None)
@given(programs)
def test_property_json_roundtrip(program):
    assert decode_json(encode_json(program)) == program


@settings(max_examples=300, deadline=None)
@given(st.text(max_size=200))
def test_parser_totality_arbitrary_text(text):
    try:
        parse_program(text)
    except (BlockSyntaxError, LimitExceeded):
        pass


@settings(max_examples=300, deadline=None)
@given(
    st.lists(
        st.sampled_from(
            list("{}\"-0123456789") + ["when", "touched", "forward", "turn", "repeat",
                                       "forever", "if", "touches", "zone", "object",
                                       "start", "stop", "wear", "trail", "animation",
                                       '"A"', '"banana"', "10", "-5"]
        ),
        max_size=60,
    )
)
def test_parser_totality_token_soup(soup):
    text = " ".join(soup)
    try:
        parse_program(text)
    except (BlockSyntaxError, LimitExceeded):
        pass
