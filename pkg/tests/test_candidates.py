import pytest

from emrec.candidates import (
    check_extractable,
    enumerate_candidates,
    make_fragment,
    remaining_statements,
)
from emrec.javamodel import parse_source

import javafixtures as fx


def brute_force_candidates(method, min_statements):
    """Independent enumeration: walk the block tree breadth-first and test
    every contiguous range with the extractability checker."""
    found = []
    queue = [method.body]
    while queue:
        block = queue.pop(0)
        for stmt in block.statements:
            queue.extend(stmt.child_blocks)
        n = len(block.statements)
        for end in range(n):
            for start in range(end + 1):
                frag = make_fragment(method, block.path, start, end)
                if check_extractable(method, frag, min_statements).extractable:
                    found.append((frag.block_path, frag.start_index, frag.end_index))
    return sorted(found)


def first_method(src, name=None):
    unit = parse_source(src)
    if name is None:
        return unit.methods[0]
    return unit.find_method(name)


def test_three_flat_statements_min_one():
    m = first_method(fx.THREE_FLAT)
    frags = enumerate_candidates(m, 1)
    spans = [(f.start_index, f.end_index) for f in frags]
    # All contiguous ranges except the full body.
    assert spans == [(0, 0), (0, 1), (1, 1), (1, 2), (2, 2)]


def test_single_statement_method_has_no_candidates():
    m = first_method(fx.SINGLE_STATEMENT)
    assert enumerate_candidates(m, 1) == []


def test_print_owing_pair_is_candidate_but_body_is_not():
    m = first_method(fx.PRINT_OWING)
    frags = enumerate_candidates(m, 2)
    spans = {(f.start_index, f.end_index) for f in frags}
    assert (1, 2) in spans
    assert (0, 2) not in spans


@pytest.mark.parametrize("min_statements", [1, 2, 3])
@pytest.mark.parametrize("name", sorted(fx.ORACLE_SOURCES))
def test_enumeration_matches_brute_force(name, min_statements):
    unit = parse_source(fx.ORACLE_SOURCES[name], name)
    for method in unit.methods:
        got = [
            (f.block_path, f.start_index, f.end_index)
            for f in enumerate_candidates(method, min_statements)
        ]
        assert got == brute_force_candidates(method, min_statements)


@pytest.mark.parametrize("name", sorted(fx.ORACLE_SOURCES))
def test_candidates_recheck_extractable(name):
    unit = parse_source(fx.ORACLE_SOURCES[name], name)
    for method in unit.methods:
        for frag in enumerate_candidates(method, 2):
            assert check_extractable(method, frag, 2).extractable


def test_two_live_out_rejected():
    m = first_method(fx.TWO_LIVE_OUT)
    # Statements 0..1 declare a and b; both are read afterwards.
    frag = make_fragment(m, (), 0, 1)
    report = check_extractable(m, frag, 1)
    assert not report.extractable
    assert report.violations == ("multiple_live_out",)


def test_nested_write_counts_toward_live_out():
    m = first_method(fx.TEN_STATEMENTS)
    if_stmt = m.body.statements[3]
    assert if_stmt.kind == "if"
    # The if-block writes b, which is read after the if.
    from emrec.candidates import live_out_locals

    frag = make_fragment(m, (), 3, 3)
    live = live_out_locals(m, frag)
    assert len(live) == 1
    assert live[0].startswith("local:b@")
    assert check_extractable(m, frag, 1).extractable


def test_suffix_with_return_is_extractable():
    m = first_method(fx.RETURN_TAIL)
    n = len(m.body.statements)
    frag = make_fragment(m, (), 2, n - 1)
    report = check_extractable(m, frag, 1)
    assert report.extractable


def test_interior_return_rejected():
    m = first_method(fx.RETURN_TAIL)
    # Range ending at the return's predecessor is fine; a nested-return
    # range that stops short of the body's end is not.
    src = """\
class T {
    int pick(int n) {
        if (n > 0) {
            return n;
        }
        log(n);
        return 0;
    }
}
"""
    m = first_method(src)
    frag = make_fragment(m, (), 0, 1)  # if..return plus log, not the tail
    report = check_extractable(m, frag, 1)
    assert "interior_return" in report.violations


def test_break_without_loop_rejected():
    m = first_method(fx.BREAK_IN_LOOP)
    while_stmt = m.body.statements[1]
    inner_if = while_stmt.child_blocks[0].statements[2]
    assert inner_if.kind == "if"
    # The if-block holding the break, extracted alone, severs the loop.
    frag = make_fragment(m, (1, 0, 2, 0), 0, 0)
    report = check_extractable(m, frag, 1)
    assert "broken_jump" in report.violations
    # Extracting the whole loop keeps the jump target inside.
    frag = make_fragment(m, (), 1, 1)
    assert check_extractable(m, frag, 1).extractable


def test_whole_method_variants():
    m = first_method(fx.THREE_FLAT)
    frag = make_fragment(m, (), 0, 2)
    report = check_extractable(m, frag, 1)
    assert report.violations == ("whole_method",)
    small = make_fragment(m, (), 0, 1)
    assert check_extractable(m, small, 3).violations == ("below_min_size",)


def test_remaining_statements_complement():
    for name, src in fx.ORACLE_SOURCES.items():
        unit = parse_source(src, name)
        for method in unit.methods:
            total = sum(1 for _ in method.statements())
            for frag in enumerate_candidates(method, 1):
                inside = sum(1 for _ in frag.statements())
                remaining = remaining_statements(method, frag)
                assert inside + len(remaining) == total


def test_remaining_keeps_ancestor_headers():
    m = first_method(fx.REPORT_IF)
    frag = make_fragment(m, (1, 0), 0, 2)
    remaining = remaining_statements(m, frag)
    kinds = [s.kind for s in remaining]
    assert "if" in kinds  # the header statement stays
    assert len(remaining) == 3


def test_last_statement_complement():
    src = """\
class C {
    void four() {
        one();
        two();
        three();
        four();
    }
}
"""
    m = first_method(src)
    frag = make_fragment(m, (), 0, 2)
    remaining = remaining_statements(m, frag)
    assert len(remaining) == 1
    assert remaining[0].start_line == m.body.statements[3].start_line


def test_enumeration_is_deterministic():
    m = first_method(fx.TEN_STATEMENTS)
    a = [(f.block_path, f.start_index, f.end_index) for f in enumerate_candidates(m, 2)]
    b = [(f.block_path, f.start_index, f.end_index) for f in enumerate_candidates(m, 2)]
    assert a == b
    assert a == sorted(a)


def test_min_statements_validated():
    m = first_method(fx.THREE_FLAT)
    with pytest.raises(ValueError):
        enumerate_candidates(m, 0)
