"""Plain-text network definitions (``.pgm.txt``).

Line-oriented grammar; ``#`` starts a comment and blank lines are ignored::

    network <ident>
    var <ident> <chance|decision|utility> { <label>+ } [<- <parent>+]
    cpt <ident> [| <parent>=<label> (, <parent>=<label>)*] : <label>=<prob> (, <label>=<prob>)*

``<prob>`` is ``p/q`` or a decimal literal, converted exactly (``0.5`` is 1/2,
``.33`` is 33/100). Outcomes omitted from a CPT row are 0.

All problems in a document are collected and raised together in one
:class:`ModelParseError`.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction

from .model import (
    Cpt,
    MontyError,
    Network,
    UsageError,
    Variable,
    VariableKind,
    parent_space,
    to_rational,
    validate_network,
)

EXTENSION = ".pgm.txt"

_TOKEN_RE = re.compile(r"\s*(?:(<-)|([{}:,=|])|([A-Za-z0-9_./]+))")
_IDENT_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")
_LABEL_RE = re.compile(r"^[A-Za-z0-9_]+$")
_KINDS = {k.value: k for k in VariableKind}


@dataclass(frozen=True)
class Diagnostic:
    line: int
    column: int
    message: str
    token: str = ""
    kind: str = "syntax"

    def __str__(self) -> str:
        near = f" near {self.token!r}" if self.token else ""
        return f"{self.line}:{self.column}: {self.kind} error: {self.message}{near}"


class ModelParseError(MontyError):
    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = list(diagnostics)
        super().__init__("\n".join(str(d) for d in self.diagnostics))


@dataclass(frozen=True)
class Token:
    text: str
    line: int
    column: int


@dataclass
class VarStatement:
    name: Token
    kind: VariableKind
    labels: list[Token]
    parents: list[Token]


@dataclass
class CptStatement:
    name: Token
    key: list[tuple[Token, Token]]
    values: list[tuple[Token, Token, Fraction]]


@dataclass
class ModelDocument:
    name: str
    declarations: list = field(default_factory=list)
    name_token: Token | None = None


class _LineParser:
    def __init__(self, tokens: list[Token], line: int, end_col: int, diags: list[Diagnostic]):
        self.tokens = tokens
        self.pos = 0
        self.line = line
        self.end_col = end_col
        self.diags = diags

    def peek(self) -> Token | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def next(self) -> Token | None:
        tok = self.peek()
        if tok is not None:
            self.pos += 1
        return tok

    def fail(self, message: str, tok: Token | None = None) -> None:
        if tok is None:
            self.diags.append(Diagnostic(self.line, self.end_col, message, "end of line"))
        else:
            self.diags.append(Diagnostic(tok.line, tok.column, message, tok.text))
        raise _Abort

    def expect(self, text: str) -> Token:
        tok = self.next()
        if tok is None or tok.text != text:
            self.fail(f"expected {text!r}", tok)
        return tok

    def ident(self, what: str) -> Token:
        tok = self.next()
        if tok is None or not _IDENT_RE.match(tok.text):
            self.fail(f"expected {what}", tok)
        return tok

    def label(self) -> Token:
        tok = self.next()
        if tok is None or not _LABEL_RE.match(tok.text):
            self.fail("expected outcome label", tok)
        return tok

    def done(self) -> None:
        tok = self.peek()
        if tok is not None:
            self.fail("unexpected trailing token", tok)


class _Abort(Exception):
    pass


def _tokenize(line: str, lineno: int, diags: list[Diagnostic]) -> list[Token] | None:
    tokens = []
    pos = 0
    stripped = line.rstrip()
    while pos < len(stripped):
        m = _TOKEN_RE.match(stripped, pos)
        if not m or m.end() == pos:
            col = pos + 1
            while col <= len(stripped) and stripped[col - 1].isspace():
                col += 1
            diags.append(
                Diagnostic(lineno, col, "unexpected character", stripped[col - 1 : col])
            )
            return None
        text = m.group(1) or m.group(2) or m.group(3)
        start = m.start(1) if m.group(1) else m.start(2) if m.group(2) else m.start(3)
        tokens.append(Token(text, lineno, start + 1))
        pos = m.end()
    return tokens


def _parse_statement(p: _LineParser, doc: ModelDocument, first: bool) -> None:
    head = p.next()
    if head.text == "network":
        tok = p.ident("network name")
        p.done()
        if not first:
            p.fail("'network' header must be the first statement", head)
        doc.name = tok.text
        doc.name_token = tok
        return
    if first:
        p.diags.append(Diagnostic(head.line, head.column, "expected 'network <name>' header", head.text))
    if head.text == "var":
        name = p.ident("variable name")
        kind_tok = p.next()
        if kind_tok is None or kind_tok.text not in _KINDS:
            p.fail("expected variable kind (chance, decision or utility)", kind_tok)
        p.expect("{")
        labels = []
        while p.peek() is not None and p.peek().text != "}":
            labels.append(p.label())
        p.expect("}")
        if not labels:
            p.fail("domain needs at least one label", p.tokens[p.pos - 1])
        parents = []
        if p.peek() is not None:
            p.expect("<-")
            parents.append(p.ident("parent name"))
            while p.peek() is not None:
                parents.append(p.ident("parent name"))
        doc.declarations.append(VarStatement(name, _KINDS[kind_tok.text], labels, parents))
        return
    if head.text == "cpt":
        name = p.ident("variable name")
        key = []
        if p.peek() is not None and p.peek().text == "|":
            p.next()
            while True:
                parent = p.ident("parent name")
                p.expect("=")
                key.append((parent, p.label()))
                if p.peek() is not None and p.peek().text == ",":
                    p.next()
                    continue
                break
        p.expect(":")
        values = []
        while True:
            label = p.label()
            p.expect("=")
            prob_tok = p.next()
            if prob_tok is None:
                p.fail("expected probability")
            try:
                prob = to_rational(prob_tok.text)
            except UsageError:
                p.fail("malformed probability (use p/q or a decimal)", prob_tok)
            values.append((label, prob_tok, prob))
            if p.peek() is None:
                break
            p.expect(",")
        doc.declarations.append(CptStatement(name, key, values))
        return
    p.fail("expected 'network', 'var' or 'cpt'", head)


def parse_document(text: str) -> tuple[ModelDocument, list[Diagnostic]]:
    """Syntax pass only: tokens to statements, with locations."""
    diags: list[Diagnostic] = []
    doc = ModelDocument(name="network")
    first = True
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue
        tokens = _tokenize(line, lineno, diags)
        if tokens is None:
            first = False
            continue
        try:
            _parse_statement(_LineParser(tokens, lineno, len(line.rstrip()) + 1, diags), doc, first)
        except _Abort:
            pass
        first = False
    if first:
        diags.append(Diagnostic(1, 1, "empty document; expected 'network <name>' header"))
    return doc, diags


def _semantic(doc: ModelDocument, diags: list[Diagnostic]) -> Network:
    def err(tok: Token, message: str) -> None:
        diags.append(Diagnostic(tok.line, tok.column, message, tok.text, kind="semantic"))

    var_stmts: dict[str, VarStatement] = {}
    variables: list[Variable] = []
    for st in doc.declarations:
        if not isinstance(st, VarStatement):
            continue
        if st.name.text in var_stmts:
            err(st.name, f"variable {st.name.text} declared twice")
            continue
        labels = [t.text for t in st.labels]
        for i, t in enumerate(st.labels):
            if t.text in labels[:i]:
                err(t, f"duplicate outcome label {t.text} in {st.name.text}")
        var_stmts[st.name.text] = st
        variables.append(
            Variable(st.name.text, st.kind, tuple(dict.fromkeys(labels)), tuple(t.text for t in st.parents))
        )
    index = {v.name: v for v in variables}

    rows: dict[str, dict[tuple[str, ...], dict[str, Fraction]]] = {}
    row_loc: dict[tuple[str, tuple[str, ...]], Token] = {}
    for st in doc.declarations:
        if not isinstance(st, CptStatement):
            continue
        var = index.get(st.name.text)
        if var is None:
            err(st.name, f"cpt for undeclared variable {st.name.text}")
            continue
        bound: dict[str, str] = {}
        bad = False
        for parent, label in st.key:
            if parent.text not in var.parents:
                err(parent, f"{parent.text} is not a parent of {var.name}")
                bad = True
            elif parent.text in bound:
                err(parent, f"parent {parent.text} bound twice")
                bad = True
            else:
                pvar = index.get(parent.text)
                if pvar is not None and label.text not in pvar.domain:
                    err(label, f"{label.text} is not an outcome of {parent.text}")
                    bad = True
                bound[parent.text] = label.text
        unbound = [p for p in var.parents if p not in bound]
        if unbound and not bad:
            err(st.name, f"cpt row for {var.name} leaves parent(s) unbound: {', '.join(unbound)}")
            bad = True
        dist: dict[str, Fraction] = {}
        for label, prob_tok, prob in st.values:
            if label.text not in var.domain:
                err(label, f"{label.text} is not an outcome of {var.name}")
                bad = True
            elif label.text in dist:
                err(label, f"outcome {label.text} given twice")
                bad = True
            else:
                dist[label.text] = prob
        if bad:
            continue
        key = tuple(bound[p] for p in var.parents)
        table = rows.setdefault(var.name, {})
        if key in table:
            err(st.name, f"duplicate cpt row for {var.name} | {','.join(key) or '(root)'}")
            continue
        table[key] = {o: dist.get(o, Fraction(0)) for o in var.domain}
        row_loc[(var.name, key)] = st.name

    cpts = {name: Cpt(name, index[name].parents, table) for name, table in rows.items()}
    net = Network(tuple(variables), cpts, name=doc.name)

    for v in validate_network(net).violations:
        tok = None
        if v.row is not None:
            tok = row_loc.get((v.variable, v.row))
        if tok is None and v.variable in var_stmts:
            tok = var_stmts[v.variable].name
        message = v.detail if v.reason == "row sum ≠ 1" else str(v)
        if v.reason == "missing CPT row":
            message = f"missing cpt row {v.variable} | {','.join(v.row)}"
        if tok is None:
            diags.append(Diagnostic(0, 0, message, kind="semantic"))
        else:
            err(tok, message)
    return net


def parse_model(text: str) -> Network:
    """Parse and validate a document; raise :class:`ModelParseError` listing every problem."""
    doc, diags = parse_document(text)
    net = _semantic(doc, diags)
    if diags:
        diags.sort(key=lambda d: (d.line, d.column))
        raise ModelParseError(diags)
    return net


def load_model(path) -> Network:
    with open(path, encoding="utf-8") as fh:
        return parse_model(fh.read())


def serialize(net: Network) -> str:
    """Canonical text form; equal networks give identical bytes."""
    lines = [f"network {net.name}"]
    for v in net.variables:
        line = f"var {v.name} {v.kind.value} {{ {' '.join(v.domain)} }}"
        if v.parents:
            line += " <- " + " ".join(v.parents)
        lines.append(line)
    for v in net.variables:
        cpt = net.cpts[v.name]
        for key in parent_space(net, v.parents):
            row = cpt.rows[key]
            values = ", ".join(f"{o}={Fraction(row.get(o, 0))}" for o in v.domain)
            if v.parents:
                cond = ", ".join(f"{p}={k}" for p, k in zip(v.parents, key))
                lines.append(f"cpt {v.name} | {cond} : {values}")
            else:
                lines.append(f"cpt {v.name} : {values}")
    return "\n".join(lines) + "\n"


def networks_equal(a: Network, b: Network) -> bool:
    """Semantic equality: same name, variables, domains, parents and CPT values."""
    if a.name != b.name or a.variables != b.variables:
        return False
    if set(a.cpts) != set(b.cpts):
        return False
    for name, ca in a.cpts.items():
        cb = b.cpts[name]
        if ca.parents != cb.parents or set(ca.rows) != set(cb.rows):
            return False
        domain = a.variable(name).domain
        for key, row in ca.rows.items():
            other = cb.rows[key]
            if any(row.get(o, 0) != other.get(o, 0) for o in domain):
                return False
    return True
