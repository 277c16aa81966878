"""Front-end for the kernel synchronous language: lexer, parser, validator.

The surface syntax covers the eight kernel statements (signal declaration,
nothing, pause, emit, sequencing, loop, if-else, abort, synchronous parallel)
plus boolean signal expressions.  `validate` produces a `CheckedAst` that the
interpreter and the FSM builder both consume.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional, Union


# ---------------------------------------------------------------------------
# source spans and diagnostics

@dataclass(frozen=True)
class SourceSpan:
    """Byte range plus line/column of its start, attached to AST nodes."""

    start: int
    end: int
    line: int
    col: int

    def __post_init__(self):
        assert self.start <= self.end


DUMMY_SPAN = SourceSpan(0, 0, 1, 1)


@dataclass(frozen=True)
class Diagnostic:
    code: str
    message: str
    span: SourceSpan
    severity: str = "error"

    def render(self, filename: str = "<input>") -> str:
        return f"{filename}:{self.span.line}:{self.span.col}: {self.severity}: {self.message}"


class LexError(Exception):
    def __init__(self, message: str, span: SourceSpan):
        super().__init__(message)
        self.span = span


class ParseError(Exception):
    def __init__(self, message: str, span: SourceSpan):
        super().__init__(message)
        self.span = span


class ValidationError(Exception):
    """Raised by validate(); carries the ordered diagnostics."""

    def __init__(self, diagnostics: list[Diagnostic]):
        super().__init__("; ".join(d.message for d in diagnostics))
        self.diagnostics = diagnostics


# ---------------------------------------------------------------------------
# signal expressions

@dataclass(frozen=True)
class Ref:
    name: str


@dataclass(frozen=True)
class Not:
    arg: SigExpr


@dataclass(frozen=True)
class And:
    left: SigExpr
    right: SigExpr


@dataclass(frozen=True)
class Or:
    left: SigExpr
    right: SigExpr


SigExpr = Union[Ref, Not, And, Or]


def expr_signals(e: SigExpr) -> set[str]:
    match e:
        case Ref(name):
            return {name}
        case Not(arg):
            return expr_signals(arg)
        case And(a, b) | Or(a, b):
            return expr_signals(a) | expr_signals(b)
    raise TypeError(e)


def format_expr(e: SigExpr, parent: int = 0) -> str:
    """Render with minimal parentheses; `!` binds tighter than `&` than `|`."""
    match e:
        case Ref(name):
            return name
        case Not(arg):
            return "!" + format_expr(arg, 3)
        case And(a, b):
            s = f"{format_expr(a, 2)} & {format_expr(b, 3)}"
            return f"({s})" if parent >= 3 else s
        case Or(a, b):
            s = f"{format_expr(a, 1)} | {format_expr(b, 2)}"
            return f"({s})" if parent >= 2 else s
    raise TypeError(e)


# ---------------------------------------------------------------------------
# AST

SIGNAL_KINDS = ("input", "output", "local")


@dataclass(frozen=True)
class SignalDecl:
    kind: str  # input | output | local
    names: tuple[str, ...]
    span: SourceSpan = DUMMY_SPAN


@dataclass(frozen=True)
class Nothing:
    span: SourceSpan = DUMMY_SPAN


@dataclass(frozen=True)
class Pause:
    label: Optional[str] = None
    span: SourceSpan = DUMMY_SPAN


@dataclass(frozen=True)
class Emit:
    signal: str
    span: SourceSpan = DUMMY_SPAN


@dataclass(frozen=True)
class Seq:
    first: Ast
    second: Ast
    span: SourceSpan = DUMMY_SPAN


@dataclass(frozen=True)
class Loop:
    body: Ast
    span: SourceSpan = DUMMY_SPAN


@dataclass(frozen=True)
class IfElse:
    cond: SigExpr
    then: Ast
    orelse: Ast
    span: SourceSpan = DUMMY_SPAN


@dataclass(frozen=True)
class Abort:
    cond: SigExpr
    body: Ast
    span: SourceSpan = DUMMY_SPAN
    # Residual-only marker: true once the body has paused inside this abort,
    # so the next resumption checks the pre-emption condition first.
    resumed: bool = False


@dataclass(frozen=True)
class Par:
    arms: tuple[Ast, ...]
    span: SourceSpan = DUMMY_SPAN

    def __post_init__(self):
        assert len(self.arms) >= 2, "parallel requires at least two arms"


Ast = Union[SignalDecl, Nothing, Pause, Emit, Seq, Loop, IfElse, Abort, Par]


def ast_size(node: Ast) -> int:
    """Number of statement nodes in the tree."""
    match node:
        case Seq(a, b):
            return 1 + ast_size(a) + ast_size(b)
        case Loop(body) | Abort(_, body):
            return 1 + ast_size(body)
        case IfElse(_, t, e):
            return 1 + ast_size(t) + ast_size(e)
        case Par(arms):
            return 1 + sum(ast_size(a) for a in arms)
        case _:
            return 1


def count_pars(node: Ast) -> int:
    match node:
        case Seq(a, b):
            return count_pars(a) + count_pars(b)
        case Loop(body) | Abort(_, body):
            return count_pars(body)
        case IfElse(_, t, e):
            return count_pars(t) + count_pars(e)
        case Par(arms):
            return 1 + sum(count_pars(a) for a in arms)
        case _:
            return 0


# ---------------------------------------------------------------------------
# lexer

KEYWORDS = {
    "input", "output", "signal", "nothing", "pause", "emit",
    "loop", "if", "else", "abort", "not", "and", "or",
}

# multi-char puncts first for maximal munch
PUNCTS = ["||", ";", "{", "}", "(", ")", ",", ":", "!", "&", "|"]

IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")


@dataclass(frozen=True)
class Token:
    kind: str  # keyword name, punct text, 'ident', or 'eof'
    text: str
    span: SourceSpan


def tokenize(source: str) -> list[Token]:
    tokens: list[Token] = []
    pos = 0
    line = 1
    line_start = 0
    n = len(source)
    while pos < n:
        ch = source[pos]
        if ch == "\n":
            line += 1
            pos += 1
            line_start = pos
            continue
        if ch in " \t\r":
            pos += 1
            continue
        if source.startswith("//", pos):
            nl = source.find("\n", pos)
            pos = n if nl < 0 else nl
            continue
        col = pos - line_start + 1
        m = IDENT_RE.match(source, pos)
        if m:
            text = m.group()
            span = SourceSpan(pos, m.end(), line, col)
            kind = text if text in KEYWORDS else "ident"
            tokens.append(Token(kind, text, span))
            pos = m.end()
            continue
        for p in PUNCTS:
            if source.startswith(p, pos):
                span = SourceSpan(pos, pos + len(p), line, col)
                tokens.append(Token(p, p, span))
                pos += len(p)
                break
        else:
            raise LexError(f"unrecognized character {ch!r}", SourceSpan(pos, pos + 1, line, col))
    tokens.append(Token("eof", "", SourceSpan(n, n, line, n - line_start + 1)))
    return tokens


# ---------------------------------------------------------------------------
# parser (recursive descent)

class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self, ahead: int = 0) -> Token:
        i = min(self.pos + ahead, len(self.tokens) - 1)
        return self.tokens[i]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def expect(self, kind: str) -> Token:
        tok = self.peek()
        if tok.kind != kind:
            raise ParseError(f"expected {kind!r}, found {tok.text or 'end of input'!r}", tok.span)
        return self.advance()

    # program := stmt-sequence eof
    def parse_program(self) -> Ast:
        stmt = self.parse_sequence(("eof",))
        self.expect("eof")
        return stmt

    # sequence := stmt (';' stmt)* [';']    folded right-associatively
    def parse_sequence(self, stop: tuple[str, ...]) -> Ast:
        first_tok = self.peek()
        stmts = list(self.parse_statement())
        while self.peek().kind == ";":
            self.advance()
            if self.peek().kind in stop:
                break  # trailing semicolon
            stmts.extend(self.parse_statement())
        if self.peek().kind not in stop:
            tok = self.peek()
            raise ParseError(f"expected ';' or end of block, found {tok.text!r}", tok.span)
        out = stmts[-1]
        for s in reversed(stmts[:-1]):
            out = Seq(s, out, span=first_tok.span)
        return out

    # yields one node per statement; multi-name declarations desugar into a
    # run of single declarations spliced into the enclosing sequence
    def parse_statement(self) -> list[Ast]:
        tok = self.peek()
        if tok.kind in ("input", "output", "signal"):
            return self.parse_decl()
        return [self.parse_simple_statement()]

    def parse_simple_statement(self) -> Ast:
        tok = self.peek()
        match tok.kind:
            case "nothing":
                self.advance()
                return Nothing(span=tok.span)
            case "pause":
                self.advance()
                return Pause(span=tok.span)
            case "emit":
                self.advance()
                name = self.expect("ident")
                return Emit(name.text, span=tok.span)
            case "loop":
                self.advance()
                body = self.parse_block()
                return Loop(body, span=tok.span)
            case "if":
                self.advance()
                self.expect("(")
                cond = self.parse_expr()
                self.expect(")")
                then = self.parse_block()
                self.expect("else")
                orelse = self.parse_block()
                return IfElse(cond, then, orelse, span=tok.span)
            case "abort":
                self.advance()
                self.expect("(")
                cond = self.parse_expr()
                self.expect(")")
                body = self.parse_block()
                return Abort(cond, body, span=tok.span)
            case "{":
                return self.parse_par_or_group()
            case "ident":
                if self.peek(1).kind == ":":
                    self.advance()
                    self.advance()
                    self.expect("pause")
                    return Pause(label=tok.text, span=tok.span)
                raise ParseError(f"unexpected identifier {tok.text!r}", tok.span)
            case _:
                raise ParseError(f"expected a statement, found {tok.text or 'end of input'!r}", tok.span)

    # decl := ('input'|'output') 'signal' names | 'signal' names
    def parse_decl(self) -> list[Ast]:
        tok = self.advance()
        if tok.kind in ("input", "output"):
            kind = tok.kind
            self.expect("signal")
        else:
            kind = "local"
        names = [self.expect("ident")]
        while self.peek().kind == ",":
            self.advance()
            names.append(self.expect("ident"))
        return [SignalDecl(kind, (t.text,), span=t.span) for t in names]

    def parse_block(self) -> Ast:
        self.expect("{")
        body = self.parse_sequence(("}",))
        self.expect("}")
        return body

    # '{' stmt '}' ('||' '{' stmt '}')*  -- two or more arms make a Par,
    # a lone braced block is plain grouping
    def parse_par_or_group(self) -> Ast:
        tok = self.peek()
        arms = [self.parse_block()]
        while self.peek().kind == "||":
            self.advance()
            arms.append(self.parse_block())
        if len(arms) == 1:
            return arms[0]
        return Par(tuple(arms), span=tok.span)

    # expr := expr or term | term ; term := term and factor | factor
    # factor := not factor | '(' expr ')' | IDENT
    def parse_expr(self) -> SigExpr:
        left = self.parse_term()
        while self.peek().kind in ("or", "|"):
            self.advance()
            left = Or(left, self.parse_term())
        return left

    def parse_term(self) -> SigExpr:
        left = self.parse_factor()
        while self.peek().kind in ("and", "&"):
            self.advance()
            left = And(left, self.parse_factor())
        return left

    def parse_factor(self) -> SigExpr:
        tok = self.peek()
        if tok.kind in ("not", "!"):
            self.advance()
            return Not(self.parse_factor())
        if tok.kind == "(":
            self.advance()
            e = self.parse_expr()
            self.expect(")")
            return e
        if tok.kind == "ident":
            self.advance()
            return Ref(tok.text)
        raise ParseError(f"expected a signal expression, found {tok.text or 'end of input'!r}", tok.span)


def parse(tokens: list[Token]) -> Ast:
    return _Parser(tokens).parse_program()


def parse_source(source: str) -> Ast:
    return parse(tokenize(source))


# ---------------------------------------------------------------------------
# validation

@dataclass(frozen=True)
class CheckedAst:
    """Validated program: every pause labelled, all references resolved."""

    ast: Ast
    signals: dict[str, str]  # name -> kind of first declaration
    labels: tuple[str, ...]  # pause labels in source order

    def __hash__(self):
        return hash((self.ast, self.labels))


def _is_instantaneous(node: Ast) -> bool:
    """True if some control path through `node` reaches the end without a pause."""
    match node:
        case Pause():
            return False
        case Seq(a, b):
            return _is_instantaneous(a) and _is_instantaneous(b)
        case IfElse(_, t, e):
            return _is_instantaneous(t) or _is_instantaneous(e)
        case Abort(_, body):
            return _is_instantaneous(body)
        case Par(arms):
            return all(_is_instantaneous(a) for a in arms)
        case Loop():
            # loops are infinite: control never falls through instantly
            return False
        case _:
            return True


def _never_terminates(node: Ast) -> bool:
    """True if control can never fall out of `node` (loops are infinite)."""
    match node:
        case Loop():
            return True
        case Seq(a, b):
            return _never_terminates(a) or _never_terminates(b)
        case IfElse(_, t, e):
            return _never_terminates(t) and _never_terminates(e)
        case Par(arms):
            # the join waits for every arm
            return any(_never_terminates(a) for a in arms)
        case _:
            # aborts can always be pre-empted out of their body
            return False


class _Validator:
    def __init__(self):
        self.diagnostics: list[Diagnostic] = []
        self.signals: dict[str, str] = {}
        self.user_labels: list[tuple[str, SourceSpan]] = []
        self.unlabeled: list[Pause] = []

    def error(self, code: str, message: str, span: SourceSpan):
        self.diagnostics.append(Diagnostic(code, message, span))

    def warn(self, code: str, message: str, span: SourceSpan):
        self.diagnostics.append(Diagnostic(code, message, span, severity="warning"))

    def check_expr(self, e: SigExpr, scope: dict[str, str], span: SourceSpan):
        for name in sorted(expr_signals(e)):
            if name not in scope:
                self.error("UndeclaredSignal", f"signal '{name}' is not declared", span)

    def visit(self, node: Ast, scope: dict[str, str]) -> dict[str, str]:
        """Walk in execution order; returns the scope seen by what follows."""
        match node:
            case SignalDecl(kind, names, span):
                for name in names:
                    if name not in self.signals:
                        self.signals[name] = kind
                    scope = {**scope, name: kind}
                return scope
            case Nothing():
                return scope
            case Pause(label, span):
                if label is None:
                    self.unlabeled.append(node)
                else:
                    self.user_labels.append((label, span))
                return scope
            case Emit(name, span):
                if name not in scope:
                    self.error("UndeclaredSignal", f"signal '{name}' is not declared", span)
                elif scope[name] == "input":
                    self.error("EmitOnInput", f"cannot emit input signal '{name}'", span)
                return scope
            case Seq(a, b):
                scope = self.visit(a, scope)
                if _never_terminates(a):
                    self.warn("UnreachableCode",
                              "statement is unreachable after an infinite loop",
                              b.span)
                return self.visit(b, scope)
            case Loop(body, span):
                if _is_instantaneous(body):
                    self.error("InstantaneousLoop",
                               "loop body must contain a pause on every path", span)
                self.visit(body, scope)
                return scope
            case IfElse(cond, t, e, span):
                self.check_expr(cond, scope, span)
                self.visit(t, scope)
                self.visit(e, scope)
                return scope
            case Abort(cond, body, span):
                self.check_expr(cond, scope, span)
                self.visit(body, scope)
                return scope
            case Par(arms):
                for arm in arms:
                    self.visit(arm, scope)
                return scope
        raise TypeError(node)


def _assign_labels(ast: Ast, taken: set[str], counter: list[int]) -> tuple[Ast, list[str]]:
    """Fill unlabeled pauses with generated S<n> labels, in source order."""
    labels: list[str] = []

    def rec(node: Ast) -> Ast:
        match node:
            case Pause(label, span):
                if label is None:
                    while f"S{counter[0]}" in taken:
                        counter[0] += 1
                    label = f"S{counter[0]}"
                    counter[0] += 1
                labels.append(label)
                return Pause(label, span)
            case Seq(a, b, span):
                return Seq(rec(a), rec(b), span)
            case Loop(body, span):
                return Loop(rec(body), span)
            case IfElse(cond, t, e, span):
                return IfElse(cond, rec(t), rec(e), span)
            case Abort(cond, body, span, resumed):
                return Abort(cond, rec(body), span, resumed)
            case Par(arms, span):
                return Par(tuple(rec(a) for a in arms), span)
            case _:
                return node

    relabeled = rec(ast)
    return relabeled, labels


def _run_validator(ast: Ast) -> _Validator:
    v = _Validator()
    v.visit(ast, {})
    seen: dict[str, SourceSpan] = {}
    for label, span in v.user_labels:
        if label in seen:
            v.error("DuplicateLabel", f"pause label '{label}' is already used", span)
        else:
            seen[label] = span
    return v


def collect_diagnostics(ast: Ast) -> list[Diagnostic]:
    """All diagnostics (errors and warnings), in deterministic order."""
    return _run_validator(ast).diagnostics


def validate(ast: Ast) -> CheckedAst:
    """Check the program; returns a CheckedAst or raises ValidationError."""
    v = _run_validator(ast)
    if any(d.severity == "error" for d in v.diagnostics):
        raise ValidationError(v.diagnostics)

    user = {label for label, _ in v.user_labels}
    start = 0
    for label in user:
        m = re.fullmatch(r"S(\d+)", label)
        if m:
            start = max(start, int(m.group(1)) + 1)
    relabeled, labels = _assign_labels(ast, user, [start])
    return CheckedAst(relabeled, dict(v.signals), tuple(labels))


def check_source(source: str) -> list[Diagnostic]:
    """Lex+parse+validate, mapping all failures to diagnostics (CLI helper)."""
    try:
        return collect_diagnostics(parse_source(source))
    except LexError as e:
        return [Diagnostic("LexError", str(e), e.span)]
    except ParseError as e:
        return [Diagnostic("ParseError", str(e), e.span)]


# ---------------------------------------------------------------------------
# pretty printer

def _stmt_lines(node: Ast, indent: str) -> list[str]:
    match node:
        case SignalDecl(kind, names, _):
            head = {"input": "input signal", "output": "output signal", "local": "signal"}[kind]
            return [f"{indent}{head} {', '.join(names)}"]
        case Nothing():
            return [f"{indent}nothing"]
        case Pause(label, _):
            return [f"{indent}{label}: pause" if label else f"{indent}pause"]
        case Emit(name, _):
            return [f"{indent}emit {name}"]
        case Seq():
            parts: list[Ast] = []
            cur: Ast = node
            while isinstance(cur, Seq):
                parts.append(cur.first)
                cur = cur.second
            parts.append(cur)
            out: list[str] = []
            for i, p in enumerate(parts):
                if isinstance(p, Seq):
                    # a sequence in first position needs braces to survive
                    # the right-associative reparse
                    lines = [f"{indent}{{", *_stmt_lines(p, indent + "  "), f"{indent}}}"]
                else:
                    lines = _stmt_lines(p, indent)
                if i < len(parts) - 1:
                    lines[-1] += ";"
                out.extend(lines)
            return out
        case Loop(body, _):
            return [f"{indent}loop {{", *_stmt_lines(body, indent + "  "), f"{indent}}}"]
        case IfElse(cond, t, e, _):
            return [
                f"{indent}if({format_expr(cond)}) {{",
                *_stmt_lines(t, indent + "  "),
                f"{indent}}} else {{",
                *_stmt_lines(e, indent + "  "),
                f"{indent}}}",
            ]
        case Abort(cond, body, _, _):
            return [f"{indent}abort({format_expr(cond)}) {{",
                    *_stmt_lines(body, indent + "  "), f"{indent}}}"]
        case Par(arms, _):
            out = []
            for i, arm in enumerate(arms):
                out.append(f"{indent}{{" if i == 0 else f"{indent}|| {{")
                out.extend(_stmt_lines(arm, indent + "  "))
                out.append(f"{indent}}}")
            return out
    raise TypeError(node)


def format_program(node: Union[Ast, CheckedAst]) -> str:
    if isinstance(node, CheckedAst):
        node = node.ast
    return "\n".join(_stmt_lines(node, "")) + "\n"
