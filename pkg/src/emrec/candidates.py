"""Enumeration of extractable statement sequences.

A candidate fragment is a contiguous run of statements inside one block.
A fragment is extractable when it has at most one live-out local, breaks
no jump target, contains no interior return, meets the minimum size and
is not the entire method body.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .javamodel import MethodModel, Statement

DEFAULT_MIN_STATEMENTS = 3

VIOLATION_KINDS = (
    "multiple_live_out",
    "broken_jump",
    "interior_return",
    "below_min_size",
    "whole_method",
)


@dataclass(frozen=True)
class Fragment:
    """A contiguous statement range within one block of a method."""

    method: MethodModel = field(compare=False, repr=False)
    block_path: tuple[int, ...]
    start_index: int
    end_index: int
    start_line: int
    end_line: int
    loc: int

    @property
    def statement_count(self) -> int:
        """Number of statements in the fragment, nested ones included."""
        return sum(1 for _ in self.statements())

    def statements(self):
        block = self.method.block_at(self.block_path)
        for stmt in block.statements[self.start_index : self.end_index + 1]:
            yield from stmt.walk()

    def top_statements(self) -> list[Statement]:
        block = self.method.block_at(self.block_path)
        return block.statements[self.start_index : self.end_index + 1]


@dataclass(frozen=True)
class ExtractabilityReport:
    extractable: bool
    violations: tuple[str, ...]


def make_fragment(method: MethodModel, block_path: tuple[int, ...], start: int, end: int) -> Fragment:
    block = method.block_at(block_path)
    if not (0 <= start <= end < len(block.statements)):
        raise IndexError(
            f"fragment [{start}, {end}] out of range for block of size {len(block.statements)}"
        )
    stmts = block.statements[start : end + 1]
    lines: set[int] = set()
    for stmt in stmts:
        for s in stmt.walk():
            lines.update(s.own_lines)
    return Fragment(
        method=method,
        block_path=tuple(block_path),
        start_index=start,
        end_index=end,
        start_line=stmts[0].start_line,
        end_line=stmts[-1].end_line,
        loc=len(lines),
    )


def _parent_map(method: MethodModel) -> dict[int, Statement]:
    """Map id(statement) -> enclosing statement (None for top level)."""
    parents: dict[int, Statement] = {}

    def visit(stmt: Statement):
        for block in stmt.child_blocks:
            for child in block.statements:
                parents[id(child)] = stmt
                visit(child)

    for stmt in method.body.statements:
        visit(stmt)
    return parents


def _local_declarations(method: MethodModel) -> dict[str, tuple[int, int]]:
    """Map local element id -> (token position, declarator index) of its
    declaration. Parameters sort before every body declaration."""
    decls: dict[str, tuple[int, int]] = {}
    for i, (pname, _ptype) in enumerate(method.parameters):
        decls[f"local:{pname}@{method.start_line}"] = (-1, i)
    for stmt in method.statements():
        for j, (name, _type, line) in enumerate(stmt.declared_locals):
            decls.setdefault(f"local:{name}@{line}", (stmt.token_start, j))
    return decls


def live_out_locals(method: MethodModel, fragment: Fragment) -> list[str]:
    """Local element ids written inside the fragment and read after it,
    ordered by declaration position."""
    inside = {id(s) for s in fragment.statements()}
    last_token = max(s.token_end for s in fragment.top_statements())
    written: set[str] = set()
    for stmt in fragment.statements():
        for ref in stmt.refs:
            if ref.kind == "local_variable" and ref.access == "write":
                written.add(ref.id)
    read_after: set[str] = set()
    for stmt in method.statements():
        if id(stmt) in inside:
            continue
        # A statement counts as "after" when it starts past the fragment.
        # An enclosing statement spanning the fragment (a do-while trailer,
        # a try's finally header) counts per reference line instead.
        follows = stmt.token_start > last_token
        spans = stmt.token_start <= last_token < stmt.token_end
        for ref in stmt.refs:
            if ref.kind != "local_variable" or ref.access != "read" or ref.id not in written:
                continue
            if follows or (spans and ref.line > fragment.end_line):
                read_after.add(ref.id)
    order = _local_declarations(method)
    return sorted(read_after, key=lambda eid: order.get(eid, (1 << 30, 0)))


def check_extractable(
    method: MethodModel,
    fragment: Fragment,
    min_statements: int = DEFAULT_MIN_STATEMENTS,
) -> ExtractabilityReport:
    violations: list[str] = []

    if len(live_out_locals(method, fragment)) > 1:
        violations.append("multiple_live_out")

    inside = {id(s) for s in fragment.statements()}
    parents = _parent_map(method)
    for stmt in fragment.statements():
        if stmt.kind not in ("break", "continue"):
            continue
        target = parents.get(id(stmt))
        while target is not None:
            if stmt.kind == "continue" and target.kind in ("for", "while"):
                break
            if stmt.kind == "break" and target.kind in ("for", "while", "switch"):
                break
            target = parents.get(id(target))
        if target is None or id(target) not in inside:
            violations.append("broken_jump")
            break

    is_body_suffix = fragment.block_path == () and fragment.end_index == len(
        method.body.statements
    ) - 1
    if any(s.kind == "return" for s in fragment.statements()) and not is_body_suffix:
        violations.append("interior_return")

    if fragment.statement_count < min_statements:
        violations.append("below_min_size")

    if (
        fragment.block_path == ()
        and fragment.start_index == 0
        and fragment.end_index == len(method.body.statements) - 1
    ):
        violations.append("whole_method")

    return ExtractabilityReport(extractable=not violations, violations=tuple(violations))


def enumerate_candidates(
    method: MethodModel, min_statements: int = DEFAULT_MIN_STATEMENTS
) -> list[Fragment]:
    """All extractable fragments, ordered by (block_path, start, end)."""
    if min_statements < 1:
        raise ValueError("min_statements must be >= 1")
    out: list[Fragment] = []
    for path, block in method.blocks():
        n = len(block.statements)
        for start in range(n):
            for end in range(start, n):
                frag = make_fragment(method, path, start, end)
                if check_extractable(method, frag, min_statements).extractable:
                    out.append(frag)
    out.sort(key=lambda f: (f.block_path, f.start_index, f.end_index))
    return out


def remaining_statements(method: MethodModel, fragment: Fragment) -> list[Statement]:
    """Statements of the method outside the fragment, in source order.

    Ancestors of the fragment's block stay in; everything inside the
    fragment, nested blocks included, is out.
    """
    inside = {id(s) for s in fragment.statements()}
    return [s for s in method.statements() if id(s) not in inside]
