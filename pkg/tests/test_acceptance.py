"""Acceptance suite: one test per release criterion, each printing a
PASS line with the measured numbers (run with -s to see them live).

Every check here is exact; there are no tolerances to tune. Programs
compiled along the way are collected so the final round-trip criterion
covers all of them.
"""

import json
import random
import time

import pytest

from bnnpipe import (
    RMT32,
    RMT32_POPCNT,
    BitVector,
    ElementProgram,
    FieldRef,
    Phv,
    compile,
    parse_ir_text,
    random_model,
    reference_forward,
    render_ir_text,
    render_model,
    run_packets,
    schedule_popcount_tree,
    step_element,
    validate_program,
)
from bnnpipe.cli import main
from bnnpipe.ir import PipelineProgram, andc, copy as copy_op, popcnt as popcnt_op

TABLE_N = (16, 32, 64, 128, 256, 512, 1024, 2048)
EXPECTED_PARALLEL = (128, 64, 32, 16, 8, 4, 2, 1)
EXPECTED_ELEMENTS = (12, 14, 16, 18, 20, 22, 24, 25)

COMPILED: list[PipelineProgram] = []


def _compile(model, profile):
    prog = compile(model, profile)
    COMPILED.append(prog)
    return prog


def _flagship():
    return random_model(7, [(32, 64), (64, 32)])


def test_c1_capacity_table(tmp_path, capsys):
    started = time.monotonic()
    json_path = tmp_path / "table.json"
    assert main(["report", "--table1", "--json", str(json_path)]) == 0
    capsys.readouterr()
    rows = json.loads(json_path.read_text())["table"]
    got = [(r["activations"], r["parallel"], r["elements"]) for r in rows]
    expected = list(zip(TABLE_N, EXPECTED_PARALLEL, EXPECTED_ELEMENTS))
    assert got == expected
    elapsed = time.monotonic() - started
    assert elapsed < 1.0
    print(f"\nACCEPTANCE 1 capacity table: PASS (16/16 values, {elapsed:.3f}s)")


def test_c2_element_count_formula():
    for n, expected_full in zip(TABLE_N, EXPECTED_ELEMENTS):
        single = _compile(random_model(1, [(n, 1)]), RMT32)
        assert len(single.elements) == 3 + 2 * (n.bit_length() - 1)
        full_p = (4096 // 2) // n
        full = _compile(random_model(1, [(n, full_p)]), RMT32)
        assert len(full.elements) == expected_full
    assert len(_compile(random_model(1, [(32, 1)]), RMT32).elements) == 13
    assert len(_compile(random_model(1, [(32, 64)]), RMT32).elements) == 14
    print("ACCEPTANCE 2 element-count formula: PASS (8 widths, P=1 and P=max)")


def test_c3_flagship_model(tmp_path, capsys):
    started = time.monotonic()
    model = _flagship()
    prog = _compile(model, RMT32)
    assert len(prog.elements) == 30 <= 32
    model_file = tmp_path / "flagship.json"
    model_file.write_text(render_model(model))
    code = main(
        ["verify", "--model", str(model_file), "--packets", "1000", "--seed", "1"]
    )
    out = capsys.readouterr().out
    assert code == 0
    assert "1000/1000 match" in out
    elapsed = time.monotonic() - started
    assert elapsed < 10.0
    print(f"ACCEPTANCE 3 flagship model: PASS (30 elements, 1000/1000, {elapsed:.2f}s)")


def _tree_program_elements(n: int) -> tuple[list[ElementProgram], FieldRef]:
    slot = FieldRef("pair", 0, 2 * n)
    return schedule_popcount_tree(n, [slot]), slot


def _run_tree(elements, slot, n, value) -> int:
    phv = Phv(2 * n, value | value << n)
    for elem in elements:
        phv = step_element(phv, elem)
    return phv.read(0, n)


def test_c4_popcount_schedule_oracle():
    started = time.monotonic()
    # exhaustive at n = 16, on the tree elements sliced out of a compiled program
    n = 16
    prog = _compile(random_model(2, [(n, 1)]), RMT32)
    tree = list(prog.elements[1:9])  # after the xnor element, before sign
    slot = prog.fields[1]
    assert all(
        op.opcode in ("andc", "shrandc", "add") for e in tree for op in e.ops
    )
    width = prog.profile.phv_bits
    for value in range(1 << n):
        phv = Phv(width, value | value << n)
        for elem in tree:
            phv = step_element(phv, elem)
        assert phv.read(slot.offset, n) == value.bit_count()
    # random sampling at the larger widths, against the scheduler directly
    rng = random.Random(4)
    for n in (64, 256, 2048):
        elements, slot = _tree_program_elements(n)
        for _ in range(10_000):
            value = rng.getrandbits(n)
            assert _run_tree(elements, slot, n, value) == value.bit_count()
    elapsed = time.monotonic() - started
    assert elapsed < 60.0
    print(f"ACCEPTANCE 4 popcount schedule: PASS (65536 exhaustive + 3x10^4 random, {elapsed:.1f}s)")


def _fuzz_cases(count: int):
    """Deterministic (shape, profile, seed) cases covering every valid
    width, both profiles, multi-layer chains, and multi-batch layers."""
    rng = random.Random(0x5EED)
    profiles = (RMT32, RMT32_POPCNT)
    cases = []
    base_shapes = []
    for n in (8, 16, 32, 64, 128, 256, 512, 1024, 2048):
        cap = (4096 // 2) // n
        base_shapes.append([(n, 1)])
        base_shapes.append([(n, max(1, min(cap, 13)))])
        base_shapes.append([(n, cap)])
    multi = [
        [(32, 64), (64, 32)],
        [(8, 8), (8, 8), (8, 8)],
        [(16, 16), (16, 3)],
        [(64, 16), (16, 30)],
        [(128, 8), (8, 100)],
        [(256, 8), (8, 8)],
    ]
    extra = {
        RMT32: [[(8, 300)], [(8, 500)], [(16, 200)]],
        RMT32_POPCNT: [[(512, 8), (8, 4)], [(8, 600)], [(16, 300)], [(32, 150)]],
    }
    pool = {p: base_shapes + multi + extra[p] for p in profiles}
    i = 0
    while len(cases) < count:
        profile = profiles[i % 2]
        shape = pool[profile][(i // 2) % len(pool[profile])]
        cases.append((profile, shape, rng.getrandbits(30)))
        i += 1
    return cases


def test_c5_differential_fuzz():
    started = time.monotonic()
    cases = _fuzz_cases(1000)
    rng = random.Random(0xD1FF)
    compiled = {}
    checked = 0
    for profile, shape, seed in cases:
        key = (profile.name, tuple(map(tuple, shape)), seed)
        if key not in compiled:
            model = random_model(seed, shape)
            compiled[key] = (model, _compile(model, profile))
        model, prog = compiled[key]
        x = BitVector.random(rng, model.input_width)
        (got,) = run_packets(prog, [x])
        assert got == reference_forward(model, x), key
        checked += 1
    assert checked >= 1000
    elapsed = time.monotonic() - started
    assert elapsed < 120.0
    print(f"ACCEPTANCE 5 differential fuzz: PASS ({checked} cases, {elapsed:.1f}s)")


def test_c6_native_popcount_endpoints():
    small = _compile(random_model(3, [(16, 4)]), RMT32_POPCNT)
    assert len(small.elements) == 5
    large = _compile(random_model(3, [(2048, 1)]), RMT32_POPCNT)
    assert len(large.elements) == 10
    print("ACCEPTANCE 6 native popcount endpoints: PASS (5 and 10 elements)")


def test_c7_throughput_model(tmp_path, capsys):
    single = random_model(4, [(2048, 1)])
    single_file = tmp_path / "single.json"
    single_file.write_text(render_model(single))
    json_path = tmp_path / "single_report.json"
    assert main(["report", "--model", str(single_file), "--json", str(json_path)]) == 0
    doc = json.loads(json_path.read_text())
    assert doc["throughput"]["neurons_per_second"] == 960_000_000

    flagship_file = tmp_path / "flagship.json"
    flagship_file.write_text(render_model(_flagship()))
    json_path = tmp_path / "flagship_report.json"
    assert main(["report", "--model", str(flagship_file), "--json", str(json_path)]) == 0
    doc = json.loads(json_path.read_text())
    assert doc["throughput"]["inferences_per_second"] == 960_000_000
    capsys.readouterr()
    print("ACCEPTANCE 7 throughput model: PASS (960M neurons/s and inferences/s)")


def test_c8_validation_suite():
    f0 = FieldRef("f0", 0, 32)
    f1 = FieldRef("f1", 32, 32)
    elem = ElementProgram((copy_op(f1.whole(), f0.whole()),))

    def program(elements, profile=RMT32):
        return PipelineProgram(
            profile=profile, fields=(f0, f1), input_field=f0, output_field=f1,
            elements=tuple(elements),
        )

    over = validate_program(program([elem] * 33))
    assert any("elements 33 > 32" in e for e in over.errors)

    double = validate_program(
        program([ElementProgram((copy_op(f1.whole(), f0.whole()),
                                 andc(f1.whole(), f0.whole(), 0)))])
    )
    assert any("double write" in e for e in double.errors)

    gated = validate_program(
        program([ElementProgram((popcnt_op(f1.part(0, 6), f0.whole()),))])
    )
    assert any("popcnt not available in profile rmt32" in e for e in gated.errors)

    assert not (set(over.errors) & set(double.errors))
    assert not (set(double.errors) & set(gated.errors))

    big0 = FieldRef("big0", 0, 2048)
    big1 = FieldRef("big1", 2048, 2048)
    wide = ElementProgram(
        tuple(copy_op(big1.part(i, 1), big0.part(0, 1)) for i in range(256))
    )
    busy = validate_program(
        PipelineProgram(
            profile=RMT32, fields=(big0, big1), input_field=big0,
            output_field=big1, elements=(wide,),
        )
    )
    assert busy.errors == []
    assert any("ops 256 > 224" in w for w in busy.warnings)
    print("ACCEPTANCE 8 validation suite: PASS (3 distinct errors + 1 warning)")


def test_c9_ir_round_trip():
    programs = list(COMPILED)
    if len(programs) < 10:  # keep the criterion meaningful standalone
        programs = [
            compile(_flagship(), RMT32),
            compile(random_model(1, [(2048, 1)]), RMT32),
            compile(random_model(1, [(16, 128)]), RMT32),
            compile(random_model(1, [(2048, 1)]), RMT32_POPCNT),
            compile(random_model(1, [(8, 300)]), RMT32),
        ]
    for prog in programs:
        assert parse_ir_text(render_ir_text(prog)) == prog
    print(f"ACCEPTANCE 9 IR round trip: PASS ({len(programs)} programs)")
