"""Statement-level model of a Java subset.

Parses classes, fields and method bodies into a tree of blocks and
statements, recording per-statement element references (locals, fields,
methods, types, typed elements, packages) with read/write/call access.
The subset covers the usual imperative statement kinds; generics without
bounded wildcards are accepted, lambdas / anonymous classes / body
annotations are not.

Counting conventions used throughout the package:

* a statement's "own" tokens are the tokens it consumes directly,
  excluding statements nested in its child blocks (an ``if`` owns its
  header, braces and ``else``, not the branch bodies);
* literal counts are literal tokens among own tokens (``case 0:`` labels
  count toward the switch);
* invocation counts are call expressions (``new`` is not an invocation);
* assignment counts are ``=`` and compound-assignment expressions
  (declaration initializers and ``++``/``--`` are not);
* a compound-assignment or increment target yields both a read and a
  write reference, a plain ``=`` target only a write;
* member access on an object-typed receiver records only the receiver
  (no classpath is available); static access on a resolvable type records
  a field reference qualified by the type.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field


class JavaParseError(Exception):
    """Raised on source outside the supported subset, with position."""

    def __init__(self, message: str, line: int = 0, column: int = 0):
        super().__init__(f"{message} (line {line}, column {column})")
        self.message = message
        self.line = line
        self.column = column


KEYWORDS = frozenset(
    """abstract assert boolean break byte case catch char class const continue
    default do double else enum extends final finally float for goto if
    implements import instanceof int interface long native new package private
    protected public return short static strictfp super switch synchronized
    this throw throws transient try void volatile while true false null""".split()
)

PRIMITIVES = frozenset(
    "boolean byte char double float int long short void".split()
)

MODIFIERS = frozenset(
    "public private protected static final abstract synchronized native transient volatile strictfp".split()
)

# Lexical fallback for unimported names resolved against java.lang.
JAVA_LANG_TYPES = frozenset(
    """Boolean Byte Character CharSequence Class Comparable Double Exception
    Error Float Integer Iterable Long Math Number Object Runnable Runtime
    RuntimeException Short String StringBuffer StringBuilder System Thread
    Throwable Void IllegalArgumentException IllegalStateException
    IndexOutOfBoundsException NullPointerException UnsupportedOperationException
    ArithmeticException ClassCastException""".split()
)

LITERAL_TOKEN_KINDS = frozenset({"int", "float", "string", "char"})
LITERAL_KEYWORDS = frozenset({"true", "false", "null"})


@dataclass(frozen=True)
class Token:
    kind: str  # ident | keyword | int | float | string | char | op
    text: str
    line: int
    col: int

    @property
    def is_literal(self) -> bool:
        return self.kind in LITERAL_TOKEN_KINDS or (
            self.kind == "keyword" and self.text in LITERAL_KEYWORDS
        )


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<line_comment>//[^\n]*)
  | (?P<block_comment>/\*.*?\*/)
  | (?P<float>(?:\d[\d_]*\.[\d_]*(?:[eE][+-]?\d+)?|\.\d[\d_]*(?:[eE][+-]?\d+)?|\d[\d_]*[eE][+-]?\d+)[fFdD]?|\d[\d_]*[fFdD])
  | (?P<int>0[xX][0-9a-fA-F_]+[lL]?|\d[\d_]*[lL]?)
  | (?P<string>"(?:\\.|[^"\\\n])*")
  | (?P<char>'(?:\\.|[^'\\\n])')
  | (?P<ident>[A-Za-z_$][A-Za-z0-9_$]*)
  | (?P<op>>>>=|>>>|<<=|>>=|->|\+\+|--|&&|\|\||<<|>>|<=|>=|==|!=|[+\-*/%&|^!~]=?|=|[?:.,;(){}\[\]<>@])
    """,
    re.VERBOSE | re.DOTALL,
)


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    pos = 0
    line = 1
    line_start = 0
    n = len(text)
    while pos < n:
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            col = pos - line_start + 1
            raise JavaParseError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        raw = m.group()
        col = pos - line_start + 1
        if kind in ("ws", "line_comment", "block_comment"):
            nl = raw.count("\n")
            if nl:
                line += nl
                line_start = pos + raw.rindex("\n") + 1
        elif kind == "ident":
            tok_kind = "keyword" if raw in KEYWORDS else "ident"
            tokens.append(Token(tok_kind, raw, line, col))
        else:
            tokens.append(Token(kind, raw, line, col))
        pos = m.end()
    return tokens


@dataclass(frozen=True)
class ElementRef:
    """A reference to a program element at a source line."""

    kind: str  # local_variable | field | method | type | typed_element | package
    id: str
    line: int
    access: str  # read | write | call


@dataclass
class Block:
    statements: list["Statement"] = field(default_factory=list)
    depth: int = 0
    path: tuple[int, ...] = ()


@dataclass
class Statement:
    kind: str
    start_line: int
    end_line: int
    token_start: int
    token_end: int  # inclusive
    start_col: int = 1
    end_col_after: int = 1  # column just past the last token
    child_blocks: list[Block] = field(default_factory=list)
    refs: list[ElementRef] = field(default_factory=list)
    literals: int = 0
    invocations: int = 0
    conditionals: int = 0
    assignments: int = 0
    declared_locals: list[tuple[str, str, int]] = field(default_factory=list)
    own_lines: frozenset[int] = frozenset()

    def source_text(self, file_lines: tuple[str, ...]) -> str:
        """Exact source slice of this statement, delimiter to delimiter."""
        if self.start_line == self.end_line:
            line = file_lines[self.start_line - 1]
            return line[self.start_col - 1 : self.end_col_after - 1]
        parts = [file_lines[self.start_line - 1][self.start_col - 1 :]]
        parts.extend(file_lines[self.start_line : self.end_line - 1])
        parts.append(file_lines[self.end_line - 1][: self.end_col_after - 1])
        return "\n".join(parts)

    def walk(self):
        """Yield this statement and all statements nested in child blocks."""
        yield self
        for block in self.child_blocks:
            for stmt in block.statements:
                yield from stmt.walk()


@dataclass
class MethodModel:
    name: str
    parameters: list[tuple[str, str]]  # (identifier, type name)
    body: Block
    start_line: int
    end_line: int
    loc: int
    return_type: str = "void"
    body_identifiers: tuple[str, ...] = ()
    source_lines: tuple[str, ...] = ()

    def statements(self):
        """All statements of the body in source order, nested included."""
        for stmt in self.body.statements:
            yield from stmt.walk()

    def block_at(self, path: tuple[int, ...]) -> Block:
        """Resolve a block path: () is the body, then alternating
        (statement index, child block index) pairs."""
        block = self.body
        i = 0
        while i < len(path):
            stmt = block.statements[path[i]]
            block = stmt.child_blocks[path[i + 1]]
            i += 2
        return block

    def blocks(self):
        """All (path, block) pairs in depth-first source order."""

        def visit(block: Block):
            yield block.path, block
            for si, stmt in enumerate(block.statements):
                for bi, child in enumerate(stmt.child_blocks):
                    yield from visit(child)

        yield from visit(self.body)


@dataclass
class SourceUnit:
    path: str
    text: str
    package: str
    imports: list[str]
    methods: list[MethodModel]

    def find_method(self, name: str, start_line: int | None = None) -> MethodModel | None:
        hits = [m for m in self.methods if m.name == name]
        if start_line is not None:
            hits = [m for m in hits if m.start_line == start_line]
        if len(hits) == 1:
            return hits[0]
        if len(hits) > 1:
            raise JavaParseError(
                f"method name {name!r} is ambiguous; pass its start line", 0, 0
            )
        return None


# --------------------------------------------------------------------------
# Expression mini-AST. Only what reference and count extraction needs.


@dataclass
class _Name:
    parts: list[tuple[str, int]]  # (identifier, line)


@dataclass
class _FieldAcc:
    target: object
    name: str
    line: int


@dataclass
class _Call:
    receiver: object | None
    name: str
    line: int
    args: list


@dataclass
class _Index:
    target: object
    index: object


@dataclass
class _New:
    type_parts: list[tuple[str, int]]
    args: list


@dataclass
class _Cast:
    type_parts: list[tuple[str, int]]
    operand: object


@dataclass
class _Unary:
    op: str
    operand: object
    writes: bool  # ++/--


@dataclass
class _Binary:
    left: object
    right: object


@dataclass
class _InstanceOf:
    operand: object
    type_parts: list[tuple[str, int]]


@dataclass
class _Ternary:
    cond: object
    then: object
    other: object


@dataclass
class _Assign:
    op: str
    lhs: object
    rhs: object


@dataclass
class _Lit:
    line: int


@dataclass
class _This:
    line: int


@dataclass
class _ArrayInit:
    items: list


class _ExprStats:
    __slots__ = ("invocations", "conditionals", "assignments")

    def __init__(self):
        self.invocations = 0
        self.conditionals = 0
        self.assignments = 0


class _Scope:
    """Lexical scope chain mapping local names to (type, decl line, order)."""

    def __init__(self, parent: "_Scope | None" = None):
        self.parent = parent
        self.names: dict[str, tuple[str, int, int]] = {}

    def declare(self, name: str, type_name: str, line: int, order: int):
        self.names[name] = (type_name, line, order)

    def lookup(self, name: str) -> tuple[str, int, int] | None:
        scope: _Scope | None = self
        while scope is not None:
            if name in scope.names:
                return scope.names[name]
            scope = scope.parent
        return None


class _Parser:
    def __init__(self, tokens: list[Token], path: str):
        self.tokens = tokens
        self.path = path
        self.pos = 0
        self.package = ""
        self.imports: dict[str, str] = {}  # simple name -> package
        self.import_list: list[str] = []
        self.class_names: set[str] = set()
        self.fields: dict[str, str] = {}  # current class: field name -> type
        self._fields_by_span: dict[tuple[int, int], dict[str, str]] = {}
        self._decl_order = 0

    # -- token helpers ----------------------------------------------------

    def peek(self, offset: int = 0) -> Token | None:
        i = self.pos + offset
        return self.tokens[i] if i < len(self.tokens) else None

    def at(self, text: str, offset: int = 0) -> bool:
        tok = self.peek(offset)
        return tok is not None and tok.text == text

    def advance(self) -> Token:
        tok = self.peek()
        if tok is None:
            last = self.tokens[-1] if self.tokens else Token("op", "", 0, 0)
            raise JavaParseError("unexpected end of input", last.line, last.col)
        self.pos += 1
        return tok

    def expect(self, text: str) -> Token:
        tok = self.peek()
        if tok is None or tok.text != text:
            got = tok.text if tok else "end of input"
            line = tok.line if tok else (self.tokens[-1].line if self.tokens else 0)
            col = tok.col if tok else 0
            raise JavaParseError(f"expected {text!r}, found {got!r}", line, col)
        return self.advance()

    def expect_ident(self) -> Token:
        tok = self.peek()
        if tok is None or tok.kind != "ident":
            got = tok.text if tok else "end of input"
            line = tok.line if tok else 0
            col = tok.col if tok else 0
            raise JavaParseError(f"expected identifier, found {got!r}", line, col)
        return self.advance()

    def error(self, message: str) -> JavaParseError:
        tok = self.peek()
        line = tok.line if tok else (self.tokens[-1].line if self.tokens else 0)
        col = tok.col if tok else 0
        return JavaParseError(message, line, col)

    # -- compilation unit --------------------------------------------------

    def parse_unit(self, text: str) -> SourceUnit:
        source_lines = tuple(text.splitlines())
        if self.at("package"):
            self.advance()
            self.package = self._qualified_name()
            self.expect(";")
        while self.at("import"):
            self.advance()
            static = self.at("static")
            if static:
                self.advance()
            name = self._qualified_name(allow_star=True)
            self.expect(";")
            if not static:
                self.import_list.append(name)
                if not name.endswith(".*") and "." in name:
                    pkg, simple = name.rsplit(".", 1)
                    self.imports[simple] = pkg

        # First pass over class bodies: collect class names and fields so
        # method bodies can resolve them regardless of declaration order.
        class_spans = self._scan_classes()
        methods: list[MethodModel] = []
        for body_start, body_end in class_spans:
            self.fields = self._fields_by_span.get((body_start, body_end), {})
            methods.extend(self._parse_class_body(body_start, body_end, source_lines))
        methods.sort(key=lambda m: m.start_line)
        return SourceUnit(
            path=self.path,
            text=text,
            package=self.package,
            imports=list(self.import_list),
            methods=methods,
        )

    def _qualified_name(self, allow_star: bool = False) -> str:
        parts = [self.expect_ident().text]
        while self.at("."):
            self.advance()
            if allow_star and self.at("*"):
                self.advance()
                parts.append("*")
                break
            parts.append(self.expect_ident().text)
        return ".".join(parts)

    def _scan_classes(self) -> list[tuple[int, int]]:
        """Find class body token ranges and pre-collect field declarations."""
        spans: list[tuple[int, int]] = []
        while self.peek() is not None:
            while self.peek() is not None and not self.at("class"):
                tok = self.advance()
                if tok.text in ("interface", "enum"):
                    raise JavaParseError(
                        f"unsupported declaration {tok.text!r}", tok.line, tok.col
                    )
            if self.peek() is None:
                break
            self.advance()  # class
            self.class_names.add(self.expect_ident().text)
            while not self.at("{"):
                self.advance()
            open_tok = self.pos
            depth = 0
            i = self.pos
            while i < len(self.tokens):
                t = self.tokens[i]
                if t.text == "{":
                    depth += 1
                elif t.text == "}":
                    depth -= 1
                    if depth == 0:
                        break
                i += 1
            if depth != 0:
                raise JavaParseError("unbalanced braces in class body", 0, 0)
            spans.append((open_tok + 1, i))  # tokens strictly inside the braces
            self.pos = i + 1
        for start, end in spans:
            self.fields = {}
            self._scan_fields(start, end)
            self._fields_by_span[(start, end)] = self.fields
        return spans

    def _scan_fields(self, start: int, end: int):
        # Walk member by member: one ending in ';' before any '(' or '{'
        # is a field declaration; anything else has a body to skip.
        i = start
        while i < end:
            member_start = i
            saw_paren = False
            while i < end:
                t = self.tokens[i]
                if t.text == "(" and not saw_paren:
                    saw_paren = True
                if t.text == ";":
                    break
                if t.text == "{":
                    break
                i += 1
            if i >= end:
                break
            if self.tokens[i].text == ";" and not saw_paren:
                self._record_field(member_start, i)
                i += 1
            else:
                # Skip a method/constructor/initializer body.
                if self.tokens[i].text == ";":  # abstract-style; unsupported body
                    i += 1
                    continue
                depth = 0
                while i < end:
                    t = self.tokens[i]
                    if t.text == "{":
                        depth += 1
                    elif t.text == "}":
                        depth -= 1
                        if depth == 0:
                            break
                    i += 1
                i += 1

    def _record_field(self, start: int, end: int):
        saved = self.pos
        self.pos = start
        try:
            while self.peek() and self.peek().text in MODIFIERS and self.pos < end:
                self.advance()
            type_name = self._parse_type_text()
            while self.pos < end:
                name = self.expect_ident().text
                self.fields[name] = type_name
                # Skip initializer up to ',' or the end of the member.
                depth = 0
                while self.pos < end:
                    t = self.peek()
                    if t.text in "([":
                        depth += 1
                    elif t.text in ")]":
                        depth -= 1
                    elif t.text == "," and depth == 0:
                        self.advance()
                        break
                    self.advance()
                else:
                    break
        except JavaParseError:
            pass
        finally:
            self.pos = saved

    # -- types -------------------------------------------------------------

    def _looks_like_type(self) -> int | None:
        """Return the token position right after a type at the cursor, or
        None if the cursor is not at a type."""
        saved = self.pos
        try:
            self._parse_type_text()
            after = self.pos
            return after
        except JavaParseError:
            return None
        finally:
            self.pos = saved

    def _parse_type_text(self) -> str:
        """Parse a type and return its source text (normalized spacing)."""
        tok = self.peek()
        if tok is None:
            raise self.error("expected type")
        parts: list[str] = []
        if tok.kind == "keyword" and tok.text in PRIMITIVES:
            parts.append(self.advance().text)
        elif tok.kind == "ident":
            parts.append(self.advance().text)
            while self.at(".") and (p := self.peek(1)) is not None and p.kind == "ident":
                self.advance()
                parts.append("." + self.advance().text)
            if self.at("<"):
                parts.append(self._parse_type_args())
        else:
            raise self.error(f"expected type, found {tok.text!r}")
        while self.at("[") and self.at("]", 1):
            self.advance()
            self.advance()
            parts.append("[]")
        return "".join(parts)

    def _parse_type_args(self) -> str:
        self.expect("<")
        inner: list[str] = []
        while not self.at(">"):
            if inner:
                self.expect(",")
                inner.append(", ")
            if self.at("?"):
                raise self.error("wildcard type arguments are not supported")
            inner.append(self._parse_type_text())
        self.expect(">")
        return "<" + "".join(inner) + ">"

    # -- class members -----------------------------------------------------

    def _parse_class_body(self, start: int, end: int, source_lines) -> list[MethodModel]:
        methods: list[MethodModel] = []
        self.pos = start
        while self.pos < end:
            while self.pos < end and self.peek().text in MODIFIERS:
                self.advance()
            if self.pos >= end:
                break
            if self.at(";"):
                self.advance()
                continue
            if self.at("{"):  # instance/static initializer: skip
                self._skip_balanced_block(end)
                continue
            first = self.peek()
            # Constructor: ClassName '('
            if (
                first.kind == "ident"
                and first.text in self.class_names
                and self.at("(", 1)
            ):
                methods.append(self._parse_method("void", end, source_lines))
                continue
            type_text = self._parse_type_text()
            name_tok = self.peek()
            if name_tok is None or self.pos >= end:
                break
            if name_tok.kind != "ident":
                raise self.error("expected member name")
            if self.at("(", 1):
                methods.append(self._parse_method(type_text, end, source_lines))
            else:
                # Field: skip to ';' at depth 0 (already recorded in pre-scan).
                depth = 0
                while self.pos < end:
                    t = self.advance()
                    if t.text in "([{":
                        depth += 1
                    elif t.text in ")]}":
                        depth -= 1
                    elif t.text == ";" and depth == 0:
                        break
        return methods

    def _skip_balanced_block(self, end: int):
        depth = 0
        while self.pos < end + 1:
            t = self.advance()
            if t.text == "{":
                depth += 1
            elif t.text == "}":
                depth -= 1
                if depth == 0:
                    return

    def _parse_method(self, return_type: str, end: int, source_lines) -> MethodModel:
        name_tok = self.expect_ident()
        start_line = name_tok.line
        self.expect("(")
        params: list[tuple[str, str]] = []
        scope = _Scope()
        self._decl_order = 0
        while not self.at(")"):
            if params:
                self.expect(",")
            while self.peek().text in ("final",):
                self.advance()
            ptype = self._parse_type_text()
            pname = self.expect_ident().text
            while self.at("[") and self.at("]", 1):
                self.advance()
                self.advance()
                ptype += "[]"
            params.append((pname, ptype))
            scope.declare(pname, ptype, start_line, self._next_order())
        self.expect(")")
        if self.at("throws"):
            self.advance()
            self._qualified_name()
            while self.at(","):
                self.advance()
                self._qualified_name()
        if self.at(";"):  # abstract method: no body, no model
            self.advance()
            return MethodModel(
                name=name_tok.text, parameters=params, body=Block(),
                start_line=start_line, end_line=name_tok.line, loc=1,
                return_type=return_type, source_lines=source_lines,
            )
        body_open_idx = self.pos
        body_open = self.expect("{")
        body = Block(depth=0, path=())
        body_scope = _Scope(scope)
        while not self.at("}"):
            if self.peek() is None:
                raise JavaParseError("unterminated method body", body_open.line, body_open.col)
            body.statements.append(self._parse_statement(body_scope, body, ()))
        body_close_idx = self.pos
        close = self.expect("}")
        self._assign_paths(body, ())
        self._finish_lines(body)
        all_lines: set[int] = set()
        for stmt in body.statements:
            for s in stmt.walk():
                all_lines.update(s.own_lines)
        # Body identifier tokens, in order, feed name-model corpora.
        idents = [
            t.text
            for t in self.tokens[body_open_idx + 1 : body_close_idx]
            if t.kind == "ident"
        ]
        return MethodModel(
            name=name_tok.text,
            parameters=params,
            body=body,
            start_line=start_line,
            end_line=close.line,
            loc=max(1, len(all_lines)),
            return_type=return_type,
            body_identifiers=tuple(idents),
            source_lines=source_lines,
        )

    def _next_order(self) -> int:
        self._decl_order += 1
        return self._decl_order

    def _assign_paths(self, block: Block, path: tuple[int, ...]):
        block.path = path
        for si, stmt in enumerate(block.statements):
            for bi, child in enumerate(stmt.child_blocks):
                child.depth = block.depth + 1
                self._assign_paths(child, path + (si, bi))

    def _finish_lines(self, block: Block):
        for stmt in block.statements:
            self._finish_stmt_lines(stmt)

    def _finish_stmt_lines(self, stmt: Statement):
        child_ranges = []
        for b in stmt.child_blocks:
            for s in b.statements:
                child_ranges.append((s.token_start, s.token_end))
                self._finish_stmt_lines(s)
        own = set()
        for i in range(stmt.token_start, stmt.token_end + 1):
            if any(lo <= i <= hi for lo, hi in child_ranges):
                continue
            own.add(self.tokens[i].line)
        stmt.own_lines = frozenset(own)
        stmt.literals = sum(
            1
            for i in range(stmt.token_start, stmt.token_end + 1)
            if self.tokens[i].is_literal
            and not any(lo <= i <= hi for lo, hi in child_ranges)
        )

    # -- statements ----------------------------------------------------------

    def _parse_statement(self, scope: _Scope, block: Block, path) -> Statement:
        tok = self.peek()
        if tok is None:
            raise self.error("expected statement")
        start = self.pos
        text = tok.text

        if text == "{":
            return self._stmt_block(scope, start)
        if text == ";":
            self.advance()
            return self._mk("expression", start)
        if text == "if":
            return self._stmt_if(scope, start)
        if text == "switch":
            return self._stmt_switch(scope, start)
        if text == "for":
            return self._stmt_for(scope, start)
        if text == "while":
            return self._stmt_while(scope, start)
        if text == "do":
            return self._stmt_do(scope, start)
        if text == "return":
            self.advance()
            stmt = self._mk("return", start)
            if not self.at(";"):
                expr = self._parse_expression()
                self._resolve(expr, scope, stmt)
            self.expect(";")
            return self._close(stmt)
        if text in ("break", "continue"):
            self.advance()
            if self.peek() and self.peek().kind == "ident":
                self.advance()  # label (target resolution not modeled)
            self.expect(";")
            return self._close(self._mk(text, start))
        if text == "assert":
            self.advance()
            stmt = self._mk("assert", start)
            expr = self._parse_expression()
            self._resolve(expr, scope, stmt)
            if self.at(":"):
                self.advance()
                expr = self._parse_expression()
                self._resolve(expr, scope, stmt)
            self.expect(";")
            return self._close(stmt)
        if text == "throw":
            self.advance()
            stmt = self._mk("throw", start)
            expr = self._parse_expression()
            self._resolve(expr, scope, stmt)
            self.expect(";")
            return self._close(stmt)
        if text == "try":
            return self._stmt_try(scope, start)
        if text in ("synchronized",):
            raise self.error(f"unsupported statement {text!r}")

        # Declaration vs expression statement.
        decl = self._try_declaration(scope, start)
        if decl is not None:
            return decl
        stmt = self._mk("expression", start)
        expr = self._parse_expression()
        if isinstance(expr, _Assign):
            stmt.kind = "assignment"
        self._resolve(expr, scope, stmt)
        self.expect(";")
        return self._close(stmt)

    def _mk(self, kind: str, start: int) -> Statement:
        tok = self.tokens[start]
        return Statement(
            kind=kind,
            start_line=tok.line,
            end_line=tok.line,
            token_start=start,
            token_end=start,
            start_col=tok.col,
            end_col_after=tok.col + len(tok.text),
        )

    def _close(self, stmt: Statement) -> Statement:
        stmt.token_end = self.pos - 1
        last = self.tokens[stmt.token_end]
        stmt.end_line = last.line
        stmt.end_col_after = last.col + len(last.text)
        return stmt

    def _nested_block(self, scope: _Scope) -> Block:
        """Parse a brace block, or wrap a single statement in an implicit block."""
        child = Block()
        inner = _Scope(scope)
        if self.at("{"):
            self.advance()
            while not self.at("}"):
                child.statements.append(self._parse_statement(inner, child, ()))
            self.expect("}")
        else:
            child.statements.append(self._parse_statement(inner, child, ()))
        return child

    def _stmt_block(self, scope: _Scope, start: int) -> Statement:
        stmt = self._mk("block", start)
        stmt.child_blocks.append(self._nested_block(scope))
        return self._close(stmt)

    def _stmt_if(self, scope: _Scope, start: int) -> Statement:
        self.advance()
        stmt = self._mk("if", start)
        self.expect("(")
        cond = self._parse_expression()
        self.expect(")")
        self._resolve(cond, scope, stmt)
        stmt.child_blocks.append(self._nested_block(scope))
        if self.at("else"):
            self.advance()
            stmt.child_blocks.append(self._nested_block(scope))
        return self._close(stmt)

    def _stmt_while(self, scope: _Scope, start: int) -> Statement:
        self.advance()
        stmt = self._mk("while", start)
        self.expect("(")
        cond = self._parse_expression()
        self.expect(")")
        self._resolve(cond, scope, stmt)
        stmt.child_blocks.append(self._nested_block(scope))
        return self._close(stmt)

    def _stmt_do(self, scope: _Scope, start: int) -> Statement:
        self.advance()
        stmt = self._mk("while", start)
        stmt.child_blocks.append(self._nested_block(scope))
        self.expect("while")
        self.expect("(")
        cond = self._parse_expression()
        self.expect(")")
        self._resolve(cond, scope, stmt)
        self.expect(";")
        return self._close(stmt)

    def _stmt_for(self, scope: _Scope, start: int) -> Statement:
        self.advance()
        stmt = self._mk("for", start)
        header = _Scope(scope)
        self.expect("(")
        # Enhanced for: Type ident : expr
        after_type = self._looks_like_type()
        enhanced = False
        if after_type is not None:
            save = self.pos
            try:
                ttext = self._parse_type_text()
                if self.peek() and self.peek().kind == "ident" and self.at(":", 1):
                    name_tok = self.expect_ident()
                    self.expect(":")
                    self._declare_local(stmt, header, name_tok.text, ttext, name_tok.line)
                    self._emit_type_refs_from_text(ttext, name_tok.line, stmt)
                    iterable = self._parse_expression()
                    self._resolve(iterable, header, stmt)
                    enhanced = True
                else:
                    self.pos = save
            except JavaParseError:
                self.pos = save
        if not enhanced:
            if not self.at(";"):
                decl = self._try_declaration(header, self.pos, inline_in=stmt)
                if decl is None:
                    expr = self._parse_expression()
                    self._resolve(expr, header, stmt)
                    while self.at(","):
                        self.advance()
                        expr = self._parse_expression()
                        self._resolve(expr, header, stmt)
                    self.expect(";")
            else:
                self.expect(";")
            if not self.at(";"):
                cond = self._parse_expression()
                self._resolve(cond, header, stmt)
            self.expect(";")
            if not self.at(")"):
                upd = self._parse_expression()
                self._resolve(upd, header, stmt)
                while self.at(","):
                    self.advance()
                    upd = self._parse_expression()
                    self._resolve(upd, header, stmt)
        self.expect(")")
        stmt.child_blocks.append(self._nested_block(header))
        return self._close(stmt)

    def _stmt_switch(self, scope: _Scope, start: int) -> Statement:
        self.advance()
        stmt = self._mk("switch", start)
        self.expect("(")
        sel = self._parse_expression()
        self.expect(")")
        self._resolve(sel, scope, stmt)
        self.expect("{")
        current: Block | None = None
        inner = _Scope(scope)
        while not self.at("}"):
            if self.at("case"):
                self.advance()
                # Constant labels only; expressions beyond literals/names are
                # outside the subset but tolerated up to ':'.
                while not self.at(":"):
                    self.advance()
                self.expect(":")
                if current is None or current.statements:
                    current = Block()
                    stmt.child_blocks.append(current)
                inner = _Scope(scope)
            elif self.at("default"):
                self.advance()
                self.expect(":")
                if current is None or current.statements:
                    current = Block()
                    stmt.child_blocks.append(current)
                inner = _Scope(scope)
            else:
                if current is None:
                    raise self.error("statement before first switch label")
                current.statements.append(self._parse_statement(inner, current, ()))
        self.expect("}")
        return self._close(stmt)

    def _stmt_try(self, scope: _Scope, start: int) -> Statement:
        self.advance()
        stmt = self._mk("try", start)
        if self.at("("):
            raise self.error("try-with-resources is not supported")
        stmt.child_blocks.append(self._nested_block(scope))
        saw_handler = False
        while self.at("catch"):
            saw_handler = True
            self.advance()
            self.expect("(")
            while self.peek().text in ("final",):
                self.advance()
            etype = self._parse_type_text()
            ename = self.expect_ident()
            self.expect(")")
            handler_scope = _Scope(scope)
            self._declare_local(stmt, handler_scope, ename.text, etype, ename.line)
            self._emit_type_refs_from_text(etype, ename.line, stmt)
            stmt.child_blocks.append(self._nested_block(handler_scope))
        if self.at("finally"):
            saw_handler = True
            self.advance()
            stmt.child_blocks.append(self._nested_block(scope))
        if not saw_handler:
            raise self.error("try requires catch or finally")
        return self._close(stmt)

    def _try_declaration(self, scope: _Scope, start: int, inline_in: Statement | None = None):
        """Parse a local declaration if the cursor is at one, else None."""
        save = self.pos
        while self.peek() and self.peek().text == "final":
            self.advance()
        tok = self.peek()
        if tok is None or (tok.kind != "ident" and not (tok.kind == "keyword" and tok.text in PRIMITIVES)):
            self.pos = save
            return None
        try:
            type_text = self._parse_type_text()
        except JavaParseError:
            self.pos = save
            return None
        nxt = self.peek()
        if nxt is None or nxt.kind != "ident":
            self.pos = save
            return None
        follow = self.peek(1)
        if follow is None or follow.text not in ("=", ";", ",", "["):
            self.pos = save
            return None
        stmt = inline_in if inline_in is not None else self._mk("declaration", start)
        first = True
        while True:
            name_tok = self.expect_ident()
            var_type = type_text
            while self.at("[") and self.at("]", 1):
                self.advance()
                self.advance()
                var_type += "[]"
            if first:
                self._emit_type_refs_from_text(type_text, name_tok.line, stmt)
                first = False
            self._declare_local(stmt, scope, name_tok.text, var_type, name_tok.line)
            if self.at("="):
                self.advance()
                init = self._parse_init_expression()
                self._resolve(init, scope, stmt)
            if self.at(","):
                self.advance()
                continue
            break
        self.expect(";")
        if inline_in is not None:
            return inline_in
        return self._close(stmt)

    def _parse_init_expression(self):
        if self.at("{"):
            self.advance()
            items = []
            while not self.at("}"):
                items.append(self._parse_init_expression())
                if self.at(","):
                    self.advance()
            self.expect("}")
            return _ArrayInit(items)
        return self._parse_expression()

    def _declare_local(self, stmt: Statement, scope: _Scope, name: str, type_name: str, line: int):
        scope.declare(name, type_name, line, self._next_order())
        stmt.declared_locals.append((name, type_name, line))
        elem_id = f"local:{name}@{line}"
        stmt.refs.append(ElementRef("local_variable", elem_id, line, "write"))
        stmt.refs.append(ElementRef("typed_element", f"typed:{elem_id}", line, "write"))

    # -- expressions ---------------------------------------------------------

    def _parse_expression(self):
        return self._parse_assignment()

    _ASSIGN_OPS = frozenset(
        {"=", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<=", ">>=", ">>>="}
    )

    def _parse_assignment(self):
        lhs = self._parse_ternary()
        tok = self.peek()
        if tok is not None and tok.text in self._ASSIGN_OPS:
            op = self.advance().text
            rhs = self._parse_assignment()
            return _Assign(op, lhs, rhs)
        return lhs

    def _parse_ternary(self):
        cond = self._parse_binary(0)
        if self.at("?"):
            self.advance()
            then = self._parse_expression()
            self.expect(":")
            other = self._parse_ternary()
            return _Ternary(cond, then, other)
        return cond

    _BINARY_LEVELS = [
        {"||"},
        {"&&"},
        {"|"},
        {"^"},
        {"&"},
        {"==", "!="},
        {"<", ">", "<=", ">=", "instanceof"},
        {"<<", ">>", ">>>"},
        {"+", "-"},
        {"*", "/", "%"},
    ]

    def _parse_binary(self, level: int):
        if level >= len(self._BINARY_LEVELS):
            return self._parse_unary()
        ops = self._BINARY_LEVELS[level]
        left = self._parse_binary(level + 1)
        while True:
            tok = self.peek()
            if tok is None or tok.text not in ops:
                return left
            if tok.text == ">" and self.at(">", 1):
                # '>' '>' from generics never reaches here in the subset;
                # treat as shift handled at its own level.
                pass
            if tok.text == "instanceof":
                self.advance()
                tparts = self._type_parts_for_ref()
                left = _InstanceOf(left, tparts)
                continue
            self.advance()
            right = self._parse_binary(level + 1)
            left = _Binary(left, right)

    def _type_parts_for_ref(self) -> list[tuple[str, int]]:
        parts = []
        tok = self.peek()
        if tok and tok.kind == "keyword" and tok.text in PRIMITIVES:
            self.advance()
            while self.at("[") and self.at("]", 1):
                self.advance()
                self.advance()
            return []
        t = self.expect_ident()
        parts.append((t.text, t.line))
        while self.at(".") and self.peek(1) and self.peek(1).kind == "ident":
            self.advance()
            t = self.advance()
            parts.append((t.text, t.line))
        if self.at("<"):
            self._parse_type_args()
        while self.at("[") and self.at("]", 1):
            self.advance()
            self.advance()
        return parts

    def _parse_unary(self):
        tok = self.peek()
        if tok is None:
            raise self.error("expected expression")
        if tok.text in ("+", "-", "!", "~"):
            self.advance()
            return _Unary(tok.text, self._parse_unary(), writes=False)
        if tok.text in ("++", "--"):
            self.advance()
            return _Unary(tok.text, self._parse_unary(), writes=True)
        if tok.text == "(":
            cast = self._try_cast()
            if cast is not None:
                return cast
        return self._parse_postfix()

    def _try_cast(self):
        save = self.pos
        self.expect("(")
        tok = self.peek()
        is_primitive = tok is not None and tok.kind == "keyword" and tok.text in PRIMITIVES
        looks_ref_type = tok is not None and tok.kind == "ident" and tok.text[:1].isupper()
        if not (is_primitive or looks_ref_type):
            self.pos = save
            return None
        try:
            tparts: list[tuple[str, int]] = []
            if is_primitive:
                self._parse_type_text()
            else:
                tparts = self._type_parts_for_ref()
            if not self.at(")"):
                self.pos = save
                return None
            nxt = self.peek(1)
            if nxt is None or not (
                nxt.kind in ("ident", "int", "float", "string", "char")
                or nxt.text in ("(", "!", "~", "this", "new")
                or (nxt.kind == "keyword" and nxt.text in LITERAL_KEYWORDS)
            ):
                self.pos = save
                return None
            self.expect(")")
            operand = self._parse_unary()
            return _Cast(tparts, operand)
        except JavaParseError:
            self.pos = save
            return None

    def _parse_postfix(self):
        expr = self._parse_primary()
        while True:
            if self.at("."):
                nxt = self.peek(1)
                if nxt is None or nxt.kind != "ident":
                    if nxt is not None and nxt.text == "class":
                        self.advance()
                        self.advance()
                        continue
                    raise self.error("expected member name after '.'")
                self.advance()
                name_tok = self.advance()
                if self.at("("):
                    args = self._parse_args()
                    expr = _Call(expr, name_tok.text, name_tok.line, args)
                elif isinstance(expr, _Name):
                    expr.parts.append((name_tok.text, name_tok.line))
                else:
                    expr = _FieldAcc(expr, name_tok.text, name_tok.line)
            elif self.at("["):
                self.advance()
                idx = self._parse_expression()
                self.expect("]")
                expr = _Index(expr, idx)
            elif self.at("++") or self.at("--"):
                op = self.advance().text
                expr = _Unary(op, expr, writes=True)
            else:
                return expr

    def _parse_args(self) -> list:
        self.expect("(")
        args = []
        while not self.at(")"):
            if args:
                self.expect(",")
            args.append(self._parse_expression())
        self.expect(")")
        return args

    def _parse_primary(self):
        tok = self.peek()
        if tok is None:
            raise self.error("expected expression")
        if tok.is_literal:
            self.advance()
            return _Lit(tok.line)
        if tok.text == "(":
            self.advance()
            inner = self._parse_expression()
            self.expect(")")
            return inner
        if tok.text == "this":
            self.advance()
            return _This(tok.line)
        if tok.text == "super":
            self.advance()
            self.expect(".")
            name_tok = self.expect_ident()
            if self.at("("):
                return _Call(None, name_tok.text, name_tok.line, self._parse_args())
            return _Name([(name_tok.text, name_tok.line)])
        if tok.text == "new":
            self.advance()
            tparts = self._type_parts_for_ref()
            if self.at("("):
                args = self._parse_args()
                if self.at("{"):
                    raise self.error("anonymous classes are not supported")
                return _New(tparts, args)
            if self.at("["):
                dims = []
                while self.at("["):
                    self.advance()
                    if not self.at("]"):
                        dims.append(self._parse_expression())
                    self.expect("]")
                if self.at("{"):
                    init = self._parse_init_expression()
                    dims.append(init)
                return _New(tparts, dims)
            raise self.error("expected constructor arguments or array dimensions")
        if tok.text == "->":
            raise self.error("lambdas are not supported")
        if tok.kind == "ident":
            self.advance()
            if self.at("("):
                return _Call(None, tok.text, tok.line, self._parse_args())
            return _Name([(tok.text, tok.line)])
        raise self.error(f"unexpected token {tok.text!r} in expression")

    # -- reference resolution --------------------------------------------------

    def _resolve(self, expr, scope: _Scope, stmt: Statement):
        stats = _ExprStats()
        self._resolve_expr(expr, scope, stmt, "read", stats)
        stmt.invocations += stats.invocations
        stmt.conditionals += stats.conditionals
        stmt.assignments += stats.assignments

    def _resolve_expr(self, expr, scope, stmt, access, stats):
        if expr is None or isinstance(expr, (_Lit, _This)):
            return
        if isinstance(expr, _Name):
            self._resolve_name(expr, scope, stmt, access)
            return
        if isinstance(expr, _FieldAcc):
            if isinstance(expr.target, _This):
                self._emit_field(expr.name, expr.line, stmt, access, own=True)
            else:
                self._resolve_expr(expr.target, scope, stmt, "read", stats)
            return
        if isinstance(expr, _Call):
            stats.invocations += 1
            stmt.refs.append(ElementRef("method", f"method:{expr.name}", expr.line, "call"))
            if expr.receiver is not None:
                self._resolve_expr(expr.receiver, scope, stmt, "read", stats)
            for a in expr.args:
                self._resolve_expr(a, scope, stmt, "read", stats)
            return
        if isinstance(expr, _Index):
            self._resolve_expr(expr.target, scope, stmt, "read", stats)
            self._resolve_expr(expr.index, scope, stmt, "read", stats)
            return
        if isinstance(expr, _New):
            if expr.type_parts:
                self._emit_type_ref(expr.type_parts, stmt)
            for a in expr.args:
                self._resolve_expr(a, scope, stmt, "read", stats)
            return
        if isinstance(expr, _Cast):
            if expr.type_parts:
                self._emit_type_ref(expr.type_parts, stmt)
            self._resolve_expr(expr.operand, scope, stmt, access, stats)
            return
        if isinstance(expr, _Unary):
            if expr.writes:
                self._resolve_expr(expr.operand, scope, stmt, "readwrite", stats)
            else:
                self._resolve_expr(expr.operand, scope, stmt, "read", stats)
            return
        if isinstance(expr, _Binary):
            self._resolve_expr(expr.left, scope, stmt, "read", stats)
            self._resolve_expr(expr.right, scope, stmt, "read", stats)
            return
        if isinstance(expr, _InstanceOf):
            self._resolve_expr(expr.operand, scope, stmt, "read", stats)
            if expr.type_parts:
                self._emit_type_ref(expr.type_parts, stmt)
            return
        if isinstance(expr, _Ternary):
            stats.conditionals += 1
            self._resolve_expr(expr.cond, scope, stmt, "read", stats)
            self._resolve_expr(expr.then, scope, stmt, "read", stats)
            self._resolve_expr(expr.other, scope, stmt, "read", stats)
            return
        if isinstance(expr, _Assign):
            stats.assignments += 1
            target_access = "write" if expr.op == "=" else "readwrite"
            self._resolve_expr(expr.lhs, scope, stmt, target_access, stats)
            self._resolve_expr(expr.rhs, scope, stmt, "read", stats)
            return
        if isinstance(expr, _ArrayInit):
            for item in expr.items:
                self._resolve_expr(item, scope, stmt, "read", stats)
            return
        raise TypeError(f"unhandled expression node {type(expr).__name__}")

    def _resolve_name(self, name: _Name, scope: _Scope, stmt: Statement, access: str):
        head, line = name.parts[0]
        rest = name.parts[1:]
        local = scope.lookup(head)
        if local is not None:
            _, decl_line, _ = local
            # A qualified target (x.f = ...) only mutates the object x refers
            # to; the variable itself is read.
            eff = access if not rest else "read"
            self._emit_local(head, decl_line, line, stmt, eff)
            return
        if head in self.fields:
            eff = access if not rest else "read"
            self._emit_field(head, line, stmt, eff, own=True)
            return
        resolved = self._resolve_type_name(head)
        if resolved is not None:
            self._emit_type_ref([(head, line)], stmt)
            if rest:
                fname, fline = rest[0]
                fid = f"field:{resolved}.{fname}"
                self._emit_field_id(fid, fline, stmt, access if len(rest) == 1 else "read")
            return
        # Qualified type like java.util.List used inline: lowercase prefix
        # followed by an uppercase simple name.
        if rest and head[:1].islower():
            for i, (part, pline) in enumerate(rest):
                if part[:1].isupper():
                    pkg = ".".join([head] + [p for p, _ in rest[:i]])
                    self._emit_known_type(part, pkg, pline, stmt)
                    after = rest[i + 1 :]
                    if after:
                        fname, fline = after[0]
                        fid = f"field:{pkg}.{part}.{fname}"
                        self._emit_field_id(fid, fline, stmt, access if len(after) == 1 else "read")
                    return
        if head[:1].isupper():
            self._emit_type_ref([(head, line)], stmt)
            if rest:
                resolved = self._resolve_type_name(head) or self._default_qualified(head)
                fname, fline = rest[0]
                fid = f"field:{resolved}.{fname}"
                self._emit_field_id(fid, fline, stmt, access if len(rest) == 1 else "read")
        # Anything else is outside lexical reach; no reference recorded.

    def _emit_local(self, name: str, decl_line: int, line: int, stmt: Statement, access: str):
        elem_id = f"local:{name}@{decl_line}"
        accesses = ("read", "write") if access == "readwrite" else (access,)
        for a in accesses:
            stmt.refs.append(ElementRef("local_variable", elem_id, line, a))
            stmt.refs.append(ElementRef("typed_element", f"typed:{elem_id}", line, a))

    def _emit_field(self, name: str, line: int, stmt: Statement, access: str, own: bool):
        self._emit_field_id(f"field:{name}", line, stmt, access)

    def _emit_field_id(self, elem_id: str, line: int, stmt: Statement, access: str):
        accesses = ("read", "write") if access == "readwrite" else (access,)
        for a in accesses:
            stmt.refs.append(ElementRef("field", elem_id, line, a))
            stmt.refs.append(ElementRef("typed_element", f"typed:{elem_id}", line, a))

    def _resolve_type_name(self, simple: str) -> str | None:
        if simple in self.imports:
            return f"{self.imports[simple]}.{simple}"
        if simple in self.class_names:
            return self._default_qualified(simple)
        if simple in JAVA_LANG_TYPES:
            return f"java.lang.{simple}"
        return None

    def _default_qualified(self, simple: str) -> str:
        return f"{self.package}.{simple}" if self.package else simple

    def _emit_type_ref(self, parts: list[tuple[str, int]], stmt: Statement):
        simple, line = parts[0]
        resolved = self._resolve_type_name(simple)
        if resolved is None:
            if simple[:1].isupper():
                resolved = self._default_qualified(simple)
            else:
                return
        pkg = resolved.rsplit(".", 1)[0] if "." in resolved else ""
        stmt.refs.append(ElementRef("type", f"type:{resolved}", line, "read"))
        stmt.refs.append(ElementRef("package", f"package:{pkg}", line, "read"))

    def _emit_known_type(self, simple: str, pkg: str, line: int, stmt: Statement):
        stmt.refs.append(ElementRef("type", f"type:{pkg}.{simple}", line, "read"))
        stmt.refs.append(ElementRef("package", f"package:{pkg}", line, "read"))

    def _emit_type_refs_from_text(self, type_text: str, line: int, stmt: Statement):
        """Emit a type/package ref for the base type of a declaration."""
        base = type_text.split("<", 1)[0].replace("[]", "").strip()
        if not base or base in PRIMITIVES:
            pass
        else:
            simple = base.rsplit(".", 1)[-1]
            if "." in base:
                pkg = base.rsplit(".", 1)[0]
                self._emit_known_type(simple, pkg, line, stmt)
            else:
                self._emit_type_ref([(simple, line)], stmt)
        # Generic arguments also reference their types.
        if "<" in type_text:
            inner = type_text[type_text.index("<") + 1 : type_text.rindex(">")]
            for arg in _split_type_args(inner):
                self._emit_type_refs_from_text(arg, line, stmt)


def _split_type_args(text: str) -> list[str]:
    parts, depth, cur = [], 0, []
    for ch in text:
        if ch == "<":
            depth += 1
        elif ch == ">":
            depth -= 1
        if ch == "," and depth == 0:
            parts.append("".join(cur).strip())
            cur = []
        else:
            cur.append(ch)
    if cur:
        parts.append("".join(cur).strip())
    return [p for p in parts if p]


def parse_source(text: str, path: str = "<memory>") -> SourceUnit:
    """Parse Java source text into a SourceUnit.

    Raises JavaParseError with line/column on anything outside the subset.
    """
    if text.startswith("﻿"):
        text = text[1:]
    tokens = tokenize(text)
    parser = _Parser(tokens, path)
    return parser.parse_unit(text)


def parse_file(path) -> SourceUnit:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return parse_source(text, str(path))
