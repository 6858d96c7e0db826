"""A tiny expression language for user-supplied functions of ``x``.

Grammar (``^`` is right-associative and binds tighter than unary minus,
so ``-x^2`` is ``-(x^2)`` and ``2^-x`` is ``2^(-x)``)::

    expr    := term (('+' | '-') term)*
    term    := factor (('*' | '/') factor)*
    factor  := '-' factor | power
    power   := primary ('^' factor)?
    primary := number | 'x' | func '(' expr ')' | '(' expr ')'
    func    := 'exp' | 'log' | 'sqrt' | 'abs'

Numbers accept the usual decimal and exponent forms (``2``, ``.5``,
``1e-3``).  There is no implicit multiplication.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, FnSyntaxError, UnknownFunction
from .functions import ConvexFn, Interval, ProbeResult
from .functions import convexity_probe as _probe

__all__ = [
    "Node",
    "Domain",
    "FUNCTIONS",
    "parse_fnspec",
    "eval_fnspec",
    "to_text",
    "natural_domain",
    "convexity_probe",
    "fn_from_text",
]

FUNCTIONS = ("exp", "log", "sqrt", "abs")
MAX_DEPTH = 200

_BINARY = {"+": "add", "-": "sub", "*": "mul", "/": "div"}
_SYMBOL = {v: k for k, v in _BINARY.items()}
_SYMBOL["pow"] = "^"

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^()])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Node:
    """Immutable expression node.

    kind is one of const, var, add, sub, mul, div, pow, neg, exp, log,
    sqrt, abs; ``value`` is set for constants only.
    """

    kind: str
    children: tuple = ()
    value: float | None = None

    def __str__(self):
        return to_text(self)


@dataclass(frozen=True)
class _Token:
    kind: str  # num, name, op, end
    text: str
    pos: int


def _tokenize(src: str) -> list[_Token]:
    tokens = []
    pos = 0
    while pos < len(src):
        m = _TOKEN.match(src, pos)
        if m is None:
            raise FnSyntaxError(f"unexpected character {src[pos]!r}", pos,
                                ("number", "'x'", "function", "operator"))
        kind = m.lastgroup
        if kind != "ws":
            tokens.append(_Token(kind, m.group(), pos))
        pos = m.end()
    tokens.append(_Token("end", "", len(src)))
    return tokens


class _Parser:
    def __init__(self, src: str):
        self.tokens = _tokenize(src)
        self.i = 0
        self.depth = 0

    @property
    def tok(self) -> _Token:
        return self.tokens[self.i]

    def advance(self) -> _Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, text: str):
        if self.tok.text != text or self.tok.kind != "op":
            raise FnSyntaxError(f"unexpected {self._describe()}", self.tok.pos, (repr(text),))
        self.advance()

    def _describe(self):
        return "end of input" if self.tok.kind == "end" else repr(self.tok.text)

    def _enter(self):
        self.depth += 1
        if self.depth > MAX_DEPTH:
            raise FnSyntaxError("expression nested too deeply", self.tok.pos)

    def parse(self) -> Node:
        node = self.expr()
        if self.tok.kind != "end":
            raise FnSyntaxError(f"unexpected {self._describe()}", self.tok.pos,
                                ("operator", "end of input"))
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.tok.kind == "op" and self.tok.text in "+-":
            op = _BINARY[self.advance().text]
            node = Node(op, (node, self.term()))
        return node

    def term(self) -> Node:
        node = self.factor()
        while self.tok.kind == "op" and self.tok.text in "*/":
            op = _BINARY[self.advance().text]
            node = Node(op, (node, self.factor()))
        return node

    def factor(self) -> Node:
        self._enter()
        try:
            if self.tok.kind == "op" and self.tok.text == "-":
                self.advance()
                return Node("neg", (self.factor(),))
            return self.power()
        finally:
            self.depth -= 1

    def power(self) -> Node:
        base = self.primary()
        if self.tok.kind == "op" and self.tok.text == "^":
            self.advance()
            return Node("pow", (base, self.factor()))
        return base

    def primary(self) -> Node:
        tok = self.tok
        if tok.kind == "num":
            self.advance()
            value = float(tok.text)
            if not math.isfinite(value):
                raise FnSyntaxError(f"constant {tok.text} is not finite", tok.pos)
            return Node("const", value=value)
        if tok.kind == "name":
            self.advance()
            if tok.text == "x":
                return Node("var")
            is_call = self.tok.kind == "op" and self.tok.text == "("
            if tok.text not in FUNCTIONS:
                if is_call:
                    raise UnknownFunction(tok.text, tok.pos, FUNCTIONS)
                raise FnSyntaxError(f"unknown name {tok.text!r}", tok.pos, ("'x'",))
            self.expect("(")
            self._enter()
            try:
                arg = self.expr()
            finally:
                self.depth -= 1
            self.expect(")")
            return Node(tok.text, (arg,))
        if tok.kind == "op" and tok.text == "(":
            self.advance()
            self._enter()
            try:
                node = self.expr()
            finally:
                self.depth -= 1
            self.expect(")")
            return node
        raise FnSyntaxError(f"unexpected {self._describe()}", tok.pos,
                            ("number", "'x'", "function", "'('"))


def parse_fnspec(src: str) -> Node:
    """Parse ``src`` into an expression tree; raises FnSyntaxError."""
    if not isinstance(src, str):
        raise TypeError("function source must be text")
    if not src.strip():
        raise FnSyntaxError("empty expression", 0, ("expression",))
    return _Parser(src).parse()


# ---------------------------------------------------------------------------
# pretty printing

_PREC = {"add": 1, "sub": 1, "mul": 2, "div": 2, "neg": 3, "pow": 4}


def _prec(node: Node) -> int:
    if node.kind == "const" and (node.value < 0 or math.copysign(1.0, node.value) < 0):
        return 3
    return _PREC.get(node.kind, 5)


def _wrap(node: Node, parens: bool) -> str:
    text = to_text(node)
    return f"({text})" if parens else text


def to_text(node: Node) -> str:
    """Render with the minimum parentheses needed to reparse the same tree."""
    kind = node.kind
    if kind == "const":
        return repr(float(node.value))
    if kind == "var":
        return "x"
    if kind in FUNCTIONS:
        return f"{kind}({to_text(node.children[0])})"
    if kind == "neg":
        child = node.children[0]
        return "-" + _wrap(child, _prec(child) < 3)
    left, right = node.children
    if kind == "pow":
        return f"{_wrap(left, _prec(left) <= 4)}^{_wrap(right, _prec(right) < 3)}"
    p = _PREC[kind]
    return f"{_wrap(left, _prec(left) < p)}{_SYMBOL[kind]}{_wrap(right, _prec(right) <= p)}"


# ---------------------------------------------------------------------------
# evaluation


def _fail(node, x, mask, why):
    bad = float(np.broadcast_to(x, mask.shape)[mask].flat[0])
    raise DomainError(f"{why} in {to_text(node)} at x = {bad!r}", node=node, x=bad)


def _eval(node: Node, x: np.ndarray) -> np.ndarray:
    kind = node.kind
    if kind == "const":
        return np.full_like(x, node.value)
    if kind == "var":
        return x
    args = [_eval(c, x) for c in node.children]
    with np.errstate(all="ignore"):
        if kind == "neg":
            out = -args[0]
        elif kind == "add":
            out = args[0] + args[1]
        elif kind == "sub":
            out = args[0] - args[1]
        elif kind == "mul":
            out = args[0] * args[1]
        elif kind == "div":
            zero = args[1] == 0.0
            if np.any(zero):
                _fail(node, x, zero, "division by zero")
            out = args[0] / args[1]
        elif kind == "pow":
            base, expo = args
            bad = ((base < 0) & (expo != np.round(expo))) | ((base == 0) & (expo < 0))
            if np.any(bad):
                _fail(node, x, bad, "power outside its domain")
            out = np.power(base, expo)
        elif kind == "exp":
            out = np.exp(args[0])
        elif kind == "log":
            bad = args[0] <= 0
            if np.any(bad):
                _fail(node, x, bad, "log of a non-positive value")
            out = np.log(args[0])
        elif kind == "sqrt":
            bad = args[0] < 0
            if np.any(bad):
                _fail(node, x, bad, "sqrt of a negative value")
            out = np.sqrt(args[0])
        elif kind == "abs":
            out = np.abs(args[0])
        else:  # pragma: no cover - constructed nodes only
            raise ValueError(f"unknown node kind {kind!r}")
    finite = np.isfinite(out)
    if not np.all(finite):
        _fail(node, x, ~finite, "non-finite result")
    return out


def eval_fnspec(ast: Node, x):
    """Evaluate at a scalar or array ``x``; raises DomainError, never returns
    a non-finite value."""
    arr = np.asarray(x, dtype=float)
    out = _eval(ast, np.atleast_1d(arr).astype(float))
    return float(out[0]) if arr.ndim == 0 else out.reshape(arr.shape)


# ---------------------------------------------------------------------------
# natural domain


@dataclass(frozen=True)
class Domain:
    """Result of the domain analysis.

    ``interval`` is None when the expression is defined nowhere.
    ``singularities`` lists isolated points (zeros of denominators) inside
    the interval.  ``exact`` is False when some constraint could not be
    resolved symbolically; evaluation then still guards every point.
    """

    interval: Interval | None
    singularities: tuple[float, ...] = ()
    exact: bool = True


def _affine(node: Node):
    """(slope, intercept) if node is affine in x, else None."""
    kind = node.kind
    if kind == "const":
        return 0.0, node.value
    if kind == "var":
        return 1.0, 0.0
    if kind == "neg":
        inner = _affine(node.children[0])
        return None if inner is None else (-inner[0], -inner[1])
    if kind in ("add", "sub"):
        left, right = (_affine(c) for c in node.children)
        if left is None or right is None:
            return None
        sign = 1.0 if kind == "add" else -1.0
        return left[0] + sign * right[0], left[1] + sign * right[1]
    if kind in ("mul", "div"):
        left, right = (_affine(c) for c in node.children)
        if left is None or right is None:
            return None
        if kind == "mul":
            if left[0] == 0.0:
                return left[1] * right[0], left[1] * right[1]
            if right[0] == 0.0:
                return right[1] * left[0], right[1] * left[1]
            return None
        if right[0] == 0.0 and right[1] != 0.0:
            return left[0] / right[1], left[1] / right[1]
    return None


def _enclose(node: Node, lo: float, hi: float):
    """Interval-arithmetic enclosure of the node's range over [lo, hi]."""
    whole = (-math.inf, math.inf)
    kind = node.kind
    if kind == "const":
        return node.value, node.value
    if kind == "var":
        return lo, hi
    parts = [_enclose(c, lo, hi) for c in node.children]
    with np.errstate(all="ignore"):
        if kind == "neg":
            a, b = parts[0]
            return -b, -a
        if kind in ("add", "sub"):
            (a, b), (c, d) = parts
            out = (a + c, b + d) if kind == "add" else (a - d, b - c)
        elif kind in ("mul", "div"):
            (a, b), (c, d) = parts
            if kind == "div":
                if c <= 0.0 <= d:
                    return whole
                c, d = 1.0 / d, 1.0 / c
            prods = [p * q for p in (a, b) for q in (c, d) if not (p == 0 or q == 0)]
            prods += [0.0] * (4 - len(prods))
            out = (min(prods), max(prods))
        elif kind == "exp":
            a, b = parts[0]
            out = (math.exp(min(a, 709.0)), math.exp(min(b, 709.0)) if b < 709 else math.inf)
        elif kind == "log":
            a, b = parts[0]
            if b <= 0:
                return whole
            out = (math.log(a) if a > 0 else -math.inf, math.log(b) if math.isfinite(b) else math.inf)
        elif kind == "sqrt":
            a, b = parts[0]
            out = (math.sqrt(max(a, 0.0)), math.sqrt(b) if b >= 0 else 0.0)
        elif kind == "abs":
            a, b = parts[0]
            if a >= 0:
                out = (a, b)
            elif b <= 0:
                out = (-b, -a)
            else:
                out = (0.0, max(-a, b))
        elif kind == "pow":
            (a, b), (c, d) = parts
            if c == d and float(c).is_integer():
                p = int(c)
                if p % 2 == 0 and a < 0 < b:
                    lo_abs, hi_abs = 0.0, max(-a, b)
                elif p % 2 == 0 and b <= 0:
                    lo_abs, hi_abs = -b, -a
                else:
                    lo_abs, hi_abs = a, b
                if p < 0 and lo_abs <= 0.0 <= hi_abs:
                    return whole
                vals = [_safe_pow(lo_abs, p), _safe_pow(hi_abs, p)]
                out = (min(vals), max(vals))
            elif c == d and a >= 0:
                vals = [_safe_pow(a, c), _safe_pow(b, c)]
                out = (min(vals), max(vals))
            elif a == b and a > 0:
                vals = [_safe_pow(a, c), _safe_pow(a, d)]
                out = (min(vals), max(vals))
            else:
                return whole
        else:
            return whole
    if any(math.isnan(v) for v in out):
        return whole
    return out


def _safe_pow(base, p):
    try:
        return math.pow(base, p)
    except (OverflowError, ValueError, ZeroDivisionError):
        return math.inf


def _collect(node: Node, out: list):
    """Gather (kind, expression, threshold) constraints: expression > threshold
    ('pos') or expression != 0 ('nonzero')."""
    kind = node.kind
    for child in node.children:
        _collect(child, out)
    if kind in ("log", "sqrt"):
        out.append(("pos", node.children[0], 0.0))
    elif kind == "div":
        out.append(("nonzero", node.children[1], 0.0))
    elif kind == "pow":
        base, expo = node.children
        if expo.kind == "const" and float(expo.value).is_integer():
            if expo.value < 0:
                out.append(("nonzero", base, 0.0))
        elif not (base.kind == "const" and base.value > 0):
            out.append(("pos", base, 0.0))


def _reduce(kind, g, threshold):
    """Rewrite g > threshold through monotone outer functions."""
    while kind == "pos":
        if g.kind == "log":
            g, threshold = g.children[0], math.exp(threshold)
        elif g.kind == "exp" and threshold > 0:
            g, threshold = g.children[0], math.log(threshold)
        elif g.kind == "sqrt" and threshold >= 0:
            g, threshold = g.children[0], threshold * threshold
        else:
            break
    return g, threshold


def natural_domain(ast: Node) -> Domain:
    """Largest open interval on which the expression is defined, as far as
    affine sign analysis and interval arithmetic can tell."""
    constraints: list = []
    _collect(ast, constraints)
    lo, hi = -math.inf, math.inf
    roots: list[float] = []
    pending = []
    for kind, g, threshold in constraints:
        g, threshold = _reduce(kind, g, threshold)
        aff = _affine(g)
        if aff is None:
            pending.append((kind, g, threshold))
            continue
        slope, icpt = aff
        if slope == 0.0:
            ok = icpt > threshold if kind == "pos" else icpt != 0.0
            if not ok:
                return Domain(None, (), True)
            continue
        root = (threshold - icpt) / slope
        if kind == "nonzero":
            roots.append(root)
        elif slope > 0:
            lo = max(lo, root)
        else:
            hi = min(hi, root)
    if not lo < hi:
        return Domain(None, (), True)
    exact = True
    for kind, g, threshold in pending:
        a, b = _enclose(g, lo, hi)
        if kind == "pos" and a > threshold:
            continue
        if kind == "nonzero" and (a > 0 or b < 0):
            continue
        exact = False
    inside = tuple(sorted({r for r in roots if lo < r < hi}))
    return Domain(Interval(lo, hi), inside, exact)


def convexity_probe(ast: Node, interval: Interval, trials: int = 10_000,
                    seed: int = 0) -> ProbeResult:
    """Random secant test of the expression on ``interval``."""
    return _probe(lambda v: eval_fnspec(ast, v), interval, trials, seed)


def fn_from_text(src: str, interval: Interval | None = None) -> ConvexFn:
    """Build a ConvexFn from source text.

    The domain is the natural domain, optionally narrowed to ``interval``;
    a denominator zero inside the result is rejected.
    """
    ast = parse_fnspec(src)
    dom = natural_domain(ast)
    if dom.interval is None:
        raise DomainError(f"{src!r} is defined nowhere")
    region = dom.interval if interval is None else dom.interval.intersect(interval)
    inside = [s for s in dom.singularities if region.contains(s)]
    if inside:
        raise DomainError(f"{src!r} is singular at {inside[0]!r}; restrict to one side")
    return ConvexFn(lambda v: eval_fnspec(ast, v), region, to_text(ast))
