"""Candidate-model files: flat ``key = expression`` text.

Expression grammar (recursive descent, no code execution)::

    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/') unary)*
    unary   := '-' unary | primary
    primary := NUMBER | scalar-name | call | '(' expr ')'
    call    := 'dot' '(' vector ',' vector ')'
             | 'sgn' '(' expr ')' | 'indicator' '(' expr ')'
    vector  := vector-name | '[' expr ',' expr ',' expr ']'

``indicator(x)`` is 1 for x > 0 and 0 otherwise; ``sgn(x)`` is +1 for
x >= 0 and -1 otherwise.  Which names are legal depends on the key being
defined (see ``ONE_SPIN_KEYS`` and ``TP_KEYS``); anything else is an error.
Vector names always available: ``ex``, ``ey``, ``ez``; scalar: ``pi``.

A one-spin model file::

    kind = one-spin
    name = hemisphere-cosine
    density = (1 + sgn(dot(u, n))) / (2*pi) * dot(u, n)
    response = sgn(dot(u, a))

A three-particle candidate file::

    kind = tp
    name = shipped
    rho1 = 1 / (4*pi)
    rho23 = 1 / (16*pi*pi)
    Pi = indicator(dot(u, ez)) * indicator(dot(v, ez))
    C = sgn(dot(u, c))
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np

from .errors import CandidateParseError
from .hv_models import DensityS2, HvModel, ResponseFn, TpCandidate
from .spinor_core import Direction, as_direction
from .teleport import BellLabel

CONST_VECTORS = {
    "ex": np.array([1.0, 0.0, 0.0]),
    "ey": np.array([0.0, 1.0, 0.0]),
    "ez": np.array([0.0, 0.0, 1.0]),
}
CONST_SCALARS = {"pi": math.pi}

HIDDEN = ("u", "v")

# key -> (vector names, scalar names)
ONE_SPIN_KEYS = {
    "density": (("u", "n"), ()),
    "response": (("u", "a", "n"), ()),
}
TP_KEYS = {
    "rho1": (("u", "n"), ()),
    "rho23": (("u", "v"), ()),
    "Pi": (("u", "v"), ("beta", "beta_bar")),
    "C": (("u", "c"), ()),
}

_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+\.\d*(?:[eE][-+]?\d+)?|\.\d+(?:[eE][-+]?\d+)?|\d+(?:[eE][-+]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*/(),\[\]]))"
)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    pos: int


def tokenize(text: str) -> list[Token]:
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise CandidateParseError(f"unexpected character {text[pos:].strip()[0]!r}", column=pos + 1)
        kind = m.lastgroup
        tokens.append(Token(kind, m.group(kind), m.start(kind)))
        pos = m.end()
    tokens.append(Token("end", "", len(text)))
    return tokens


# AST nodes are tuples: ("num", v) ("scalar", name) ("vec", name) ("vlit", a, b, c)
# ("neg", x) ("bin", op, x, y) ("dot", p, q) ("sgn", x) ("ind", x)


class _Parser:
    def __init__(self, text, vectors, scalars):
        self.tokens = tokenize(text)
        self.i = 0
        self.vectors = set(vectors) | set(CONST_VECTORS)
        self.scalars = set(scalars) | set(CONST_SCALARS)

    def peek(self):
        return self.tokens[self.i]

    def take(self, text=None):
        tok = self.tokens[self.i]
        if text is not None and tok.text != text:
            want = text or "end of expression"
            got = tok.text or "end of expression"
            raise CandidateParseError(f"expected {want!r}, found {got!r}", column=tok.pos + 1)
        self.i += 1
        return tok

    def parse(self):
        node = self.expr()
        if self.peek().kind != "end":
            tok = self.peek()
            raise CandidateParseError(f"unexpected {tok.text!r}", column=tok.pos + 1)
        return node

    def expr(self):
        node = self.term()
        while self.peek().text in ("+", "-"):
            op = self.take().text
            node = ("bin", op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.peek().text in ("*", "/"):
            op = self.take().text
            node = ("bin", op, node, self.unary())
        return node

    def unary(self):
        if self.peek().text == "-":
            self.take()
            return ("neg", self.unary())
        if self.peek().text == "+":
            self.take()
            return self.unary()
        return self.primary()

    def primary(self):
        tok = self.peek()
        if tok.kind == "num":
            self.take()
            return ("num", float(tok.text))
        if tok.text == "(":
            self.take()
            node = self.expr()
            self.take(")")
            return node
        if tok.kind == "name":
            self.take()
            name = tok.text
            if name in ("dot", "sgn", "indicator"):
                self.take("(")
                if name == "dot":
                    p = self.vector()
                    self.take(",")
                    q = self.vector()
                    node = ("dot", p, q)
                else:
                    node = ("sgn" if name == "sgn" else "ind", self.expr())
                self.take(")")
                return node
            if name in self.scalars:
                return ("scalar", name)
            if name in self.vectors:
                raise CandidateParseError(
                    f"vector {name!r} used as a scalar (wrap it in dot(...))", column=tok.pos + 1
                )
            raise CandidateParseError(f"unknown identifier {name!r}", column=tok.pos + 1)
        raise CandidateParseError(
            f"unexpected {tok.text or 'end of expression'!r}", column=tok.pos + 1
        )

    def vector(self):
        tok = self.peek()
        if tok.text == "[":
            self.take()
            comps = [self.expr()]
            for _ in range(2):
                self.take(",")
                comps.append(self.expr())
            self.take("]")
            for c in comps:
                if _uses_hidden(c):
                    raise CandidateParseError("vector literals must be constant", column=tok.pos + 1)
            return ("vlit", *comps)
        if tok.kind == "name" and tok.text in self.vectors:
            self.take()
            return ("vec", tok.text)
        if tok.kind == "name":
            raise CandidateParseError(f"unknown vector {tok.text!r}", column=tok.pos + 1)
        raise CandidateParseError(f"expected a vector, found {tok.text!r}", column=tok.pos + 1)


def _uses_hidden(node) -> bool:
    if node[0] == "vec":
        return node[1] in HIDDEN
    return any(_uses_hidden(c) for c in node[1:] if isinstance(c, tuple))


def _eval(node, env):
    kind = node[0]
    if kind == "num":
        return node[1]
    if kind == "scalar":
        return env[node[1]] if node[1] in env else CONST_SCALARS[node[1]]
    if kind == "vec":
        return env[node[1]] if node[1] in env else CONST_VECTORS[node[1]]
    if kind == "vlit":
        return np.array([float(_eval(c, env)) for c in node[1:]])
    if kind == "neg":
        return -_eval(node[1], env)
    if kind == "bin":
        x, y = _eval(node[2], env), _eval(node[3], env)
        op = node[1]
        if op == "+":
            return x + y
        if op == "-":
            return x - y
        if op == "*":
            return x * y
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.divide(x, y)
    if kind == "dot":
        return np.sum(_eval(node[1], env) * _eval(node[2], env), axis=-1)
    if kind == "sgn":
        return np.where(np.asarray(_eval(node[1], env)) >= 0.0, 1.0, -1.0)
    if kind == "ind":
        return np.where(np.asarray(_eval(node[1], env)) > 0.0, 1.0, 0.0)
    raise AssertionError(kind)


@dataclass(frozen=True)
class Expression:
    """A parsed expression; call with keyword bindings for its free names."""

    text: str
    tree: tuple

    def __call__(self, **env):
        return _eval(self.tree, env)

    def boundary_vectors(self, **env) -> list[np.ndarray]:
        """Non-hidden vectors dotted with a hidden variable (possible jump normals)."""
        out = []

        def walk(node):
            if node[0] == "dot":
                p, q = node[1], node[2]
                for h, other in ((p, q), (q, p)):
                    if h[0] == "vec" and h[1] in HIDDEN and not _uses_hidden(other):
                        out.append(np.asarray(_eval(other, env), dtype=float))
            for c in node[1:]:
                if isinstance(c, tuple):
                    walk(c)

        walk(self.tree)
        return out


def parse_expression(text: str, vectors=(), scalars=()) -> Expression:
    """Parse ``text`` allowing the given free vector and scalar names."""
    return Expression(text, _Parser(text, vectors, scalars).parse())


def _parse_lines(text: str) -> tuple[dict, dict]:
    entries, lines = {}, {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise CandidateParseError("expected 'key = value'", line=lineno)
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise CandidateParseError("empty key", line=lineno)
        if key in entries:
            raise CandidateParseError(f"duplicate key {key!r}", line=lineno)
        entries[key] = value
        lines[key] = lineno
    return entries, lines


def _compile(entries, lines, table):
    exprs = {}
    for key, (vectors, scalars) in table.items():
        if key not in entries:
            raise CandidateParseError(f"missing required key {key!r}")
        try:
            exprs[key] = parse_expression(entries[key], vectors, scalars)
        except CandidateParseError as exc:
            raise CandidateParseError(f"{key}: {exc}", line=lines[key]) from None
    return exprs


def _unit_boundaries(vectors) -> tuple:
    out = []
    for v in vectors:
        norm = float(np.linalg.norm(v))
        if norm > 0 and math.isfinite(norm):
            out.append(Direction.from_vector(v / norm, normalize=True))
    return tuple(out)


def _as_rows(x, n):
    return np.broadcast_to(np.asarray(x, dtype=float), (n,))


def _one_spin_model(name, exprs) -> HvModel:
    dens, resp = exprs["density"], exprs["response"]
    state_dependent = any(node == ("vec", "n") for node in _nodes(resp.tree))

    def density(n):
        n = as_direction(n)
        nv = n.vec

        def fn(lam):
            return _as_rows(dens(u=lam, n=nv), lam.shape[0])

        bounds = _unit_boundaries(dens.boundary_vectors(n=nv))
        return DensityS2(fn, name, {"n": list(nv)}, support_axis=bounds[0] if bounds else None)

    def response(a, n=None):
        a = as_direction(a)
        av = a.vec
        nv = as_direction(n).vec if n is not None else np.array([0.0, 0.0, 1.0])

        def fn(lam):
            return _as_rows(resp(u=lam, a=av, n=nv), lam.shape[0])

        dep = {"n": list(nv)} if state_dependent else {}
        bounds = _unit_boundaries(resp.boundary_vectors(a=av, n=nv))
        return ResponseFn(fn, a, dep, boundaries=bounds)

    return HvModel(name, density, response, state_dependent)


def _nodes(tree):
    yield tree
    for c in tree[1:]:
        if isinstance(c, tuple):
            yield from _nodes(c)


def _tp_candidate(name, exprs) -> TpCandidate:
    e1, e23, epi, ec = exprs["rho1"], exprs["rho23"], exprs["Pi"], exprs["C"]

    def rho1(n):
        n = as_direction(n)
        nv = n.vec

        def fn(lam):
            return _as_rows(e1(u=lam, n=nv), lam.shape[0])

        return DensityS2(fn, f"{name}.rho1", {"n": list(nv)})

    def rho23(u, v):
        return _as_rows(e23(u=u, v=v), u.shape[0])

    def Pi(u, v, label):
        label = BellLabel.of(label)
        return _as_rows(epi(u=u, v=v, beta=label.beta, beta_bar=label.beta_bar), u.shape[0])

    def C(u, c):
        return _as_rows(ec(u=u, c=as_direction(c).vec), u.shape[0])

    bounds = []
    for e in (e23, epi):
        bounds += e.boundary_vectors(beta=1, beta_bar=1)
    return TpCandidate(name, rho1, rho23, Pi, C, boundaries=_unit_boundaries(bounds))


def loads_candidate(text: str) -> Union[HvModel, TpCandidate]:
    """Parse candidate-file text into an HvModel (one-spin) or TpCandidate (tp)."""
    entries, lines = _parse_lines(text)
    kind = entries.pop("kind", None)
    name = entries.pop("name", "file")
    if kind == "one-spin":
        table = ONE_SPIN_KEYS
    elif kind == "tp":
        table = TP_KEYS
    else:
        raise CandidateParseError(f"'kind' must be 'one-spin' or 'tp', got {kind!r}")
    unknown = sorted(set(entries) - set(table))
    if unknown:
        raise CandidateParseError(f"unknown key {unknown[0]!r}", line=lines[unknown[0]])
    exprs = _compile(entries, lines, table)
    if kind == "one-spin":
        return _one_spin_model(name, exprs)
    return _tp_candidate(name, exprs)


def load_candidate(path) -> Union[HvModel, TpCandidate]:
    return loads_candidate(Path(path).read_text(encoding="utf-8"))
