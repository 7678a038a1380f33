"""IR text rendering and parsing."""

import pytest

from bnnpipe import (
    RMT32,
    IRParseError,
    compile,
    parse_ir_text,
    random_model,
    render_ir_text,
    validate_program,
)

MINIMAL = """\
profile rmt32 elements=32 phv=4096 pps=960000000
field a 0 8
field b 8 8
input a
output b
element 0
  copy b <- a
"""


def test_minimal_round_trip():
    prog = parse_ir_text(MINIMAL)
    assert render_ir_text(prog) == MINIMAL
    assert parse_ir_text(render_ir_text(prog)) == prog


def test_rendering_is_deterministic(flagship_model):
    a = render_ir_text(compile(flagship_model, RMT32))
    b = render_ir_text(compile(flagship_model, RMT32))
    assert a == b


def test_compiled_single_neuron_has_expected_blocks():
    prog = compile(random_model(0, [(16, 1)]), RMT32)
    text = render_ir_text(prog)
    assert text.count("\nelement ") == 11
    assert parse_ir_text(text) == prog


@pytest.mark.parametrize(
    "shape,profile_name",
    [
        ([(32, 64), (64, 32)], "rmt32"),
        ([(8, 300)], "rmt32"),
        ([(2048, 1)], "rmt32"),
        ([(2048, 1)], "rmt32-popcnt"),
        ([(64, 16), (16, 5)], "rmt32-popcnt"),
    ],
)
def test_round_trip_compiled_programs(shape, profile_name):
    from bnnpipe import PROFILES

    prog = compile(random_model(11, shape), PROFILES[profile_name])
    assert parse_ir_text(render_ir_text(prog)) == prog


def test_unknown_opcode_reports_line():
    text = MINIMAL.replace("copy b <- a", "MUL b <- a")
    with pytest.raises(IRParseError, match="unknown opcode MUL at line 7"):
        parse_ir_text(text)


def test_popcnt_under_base_profile_fails_validation_not_parsing():
    text = MINIMAL.replace("copy b <- a", "popcnt b[0:4] <- a")
    prog = parse_ir_text(text)
    report = validate_program(prog)
    assert any("popcnt not available" in e for e in report.errors)


def test_syntax_errors_name_the_line():
    with pytest.raises(IRParseError, match="at line 2"):
        parse_ir_text("profile p elements=1 phv=8 pps=1\nwhatever\n")
    with pytest.raises(IRParseError, match="at line 3"):
        parse_ir_text(
            "profile p elements=1 phv=8 pps=1\nfield a 0 8\nfield a 0 8\n"
        )


def test_unknown_field_in_op():
    text = MINIMAL.replace("copy b <- a", "copy b <- zzz")
    with pytest.raises(IRParseError, match="unknown field zzz at line 7"):
        parse_ir_text(text)


def test_immediate_width_checked():
    text = MINIMAL.replace("copy b <- a", "xnorc b <- a, 0xFFFF")
    with pytest.raises(IRParseError, match="expected 2 for width 8"):
        parse_ir_text(text)


def test_element_indices_must_be_sequential():
    text = MINIMAL.replace("element 0", "element 3")
    with pytest.raises(IRParseError, match="out of order"):
        parse_ir_text(text)


def test_missing_profile():
    with pytest.raises(IRParseError, match="missing profile"):
        parse_ir_text("field a 0 8\ninput a\noutput a\n")


def test_missing_io():
    with pytest.raises(IRParseError, match="missing input or output"):
        parse_ir_text("profile p elements=1 phv=8 pps=1\nfield a 0 8\n")


def test_comments_and_blank_lines_ignored():
    text = "# header\n\n" + MINIMAL
    assert parse_ir_text(text) == parse_ir_text(MINIMAL)


def test_profile_popcnt_flag_round_trips():
    text = MINIMAL.replace(
        "profile rmt32 elements=32 phv=4096 pps=960000000",
        "profile rmt32-popcnt elements=32 phv=4096 pps=960000000 popcnt=32",
    )
    prog = parse_ir_text(text)
    assert prog.profile.native_popcnt
    assert prog.profile.popcnt_width == 32
    assert render_ir_text(prog) == text


def test_metadata_not_compared():
    prog = compile(random_model(1, [(16, 2)]), RMT32)
    assert prog.metadata is not None
    parsed = parse_ir_text(render_ir_text(prog))
    assert parsed.metadata is None
    assert parsed == prog
