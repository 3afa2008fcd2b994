"""Concrete syntax: tokenizer, parsers and printers for formulas,
structures, contexts and sequents.

The grammar is non-associative: binary connectives carry no precedence and
nested applications must be parenthesised.  A single unparenthesised binary
application (or top-level comma) is tolerated per level, so strings like
``(a*b)*!a1.c |- a*(b*!a1.c)`` parse.
"""

from __future__ import annotations

from typing import Optional

from . import formulas as F
from . import structures as S

KEYWORDS = {"bot": F.BOT, "top": F.TOP}
BINOPS = {"*": F.tensor, "|": F.par, "+": F.plus, "&": F.with_, "->": F.rimp, "<-": F.limp}


class ParseError(ValueError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {message}")
        self.line = line
        self.col = col


class _Token:
    __slots__ = ("kind", "text", "line", "col")

    def __init__(self, kind, text, line, col):
        self.kind = kind
        self.text = text
        self.line = line
        self.col = col

    def __repr__(self):  # pragma: no cover
        return f"{self.kind}:{self.text!r}"


def _tokenize(text: str):
    toks = []
    line, col = 1, 1
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch.isspace():
            i += 1
            col += 1
            continue
        start_line, start_col = line, col
        if ch.islower():
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            word = text[i:j]
            toks.append(_Token("word", word, start_line, start_col))
            col += j - i
            i = j
            continue
        if ch in "01":
            toks.append(_Token("unit", ch, start_line, start_col))
            i += 1
            col += 1
            continue
        if ch == "|" and i + 1 < n and text[i + 1] == "-":
            toks.append(_Token("turnstile", "|-", start_line, start_col))
            i += 2
            col += 2
            continue
        if ch == "-" and i + 1 < n and text[i + 1] == ">":
            toks.append(_Token("op", "->", start_line, start_col))
            i += 2
            col += 2
            continue
        if ch == "<" and i + 1 < n and text[i + 1] == "-":
            toks.append(_Token("op", "<-", start_line, start_col))
            i += 2
            col += 2
            continue
        if ch in "*|+&":
            toks.append(_Token("op", ch, start_line, start_col))
            i += 1
            col += 1
            continue
        if ch in "~!?.(),_":
            kind = {"~": "neg", "!": "bang", "?": "quest", ".": "dot",
                    "(": "lpar", ")": "rpar", ",": "comma", "_": "hole"}[ch]
            toks.append(_Token(kind, ch, start_line, start_col))
            i += 1
            col += 1
            continue
        raise ParseError(f"unexpected character {ch!r}", line, col)
    toks.append(_Token("eof", "", line, col))
    return toks


class _Parser:
    def __init__(self, text: str, allow_holes: bool = False):
        self.toks = _tokenize(text)
        self.pos = 0
        self.allow_holes = allow_holes

    def peek(self) -> _Token:
        return self.toks[self.pos]

    def next(self) -> _Token:
        tok = self.toks[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind: str) -> _Token:
        tok = self.next()
        if tok.kind != kind:
            raise ParseError(f"expected {kind}, found {tok.text!r}", tok.line, tok.col)
        return tok

    def error(self, message: str):
        tok = self.peek()
        raise ParseError(message, tok.line, tok.col)

    # formulas ------------------------------------------------------------

    def formula(self) -> F.Formula:
        left = self.funit()
        if self.peek().kind == "op":
            op = self.next().text
            right = self.funit()
            return BINOPS[op](left, right)
        return left

    def funit(self) -> F.Formula:
        tok = self.peek()
        if tok.kind == "word":
            self.next()
            if tok.text in KEYWORDS:
                return KEYWORDS[tok.text]
            return F.atom(tok.text)
        if tok.kind == "unit":
            self.next()
            return F.ONE if tok.text == "1" else F.ZERO
        if tok.kind == "neg":
            self.next()
            name = self.expect("word")
            if name.text in KEYWORDS:
                raise ParseError("~ applies to atoms only", name.line, name.col)
            return F.negatom(name.text)
        if tok.kind in ("bang", "quest"):
            self.next()
            lab = self.expect("word")
            if self.peek().kind == "dot":
                self.next()
            body = self.funit()
            ctor = F.bang if tok.kind == "bang" else F.quest
            return ctor(lab.text, body)
        if tok.kind == "lpar":
            self.next()
            inner = self.formula()
            self.expect("rpar")
            return inner
        self.error(f"expected a formula, found {tok.text!r}")

    # structures ----------------------------------------------------------

    def structure(self) -> S.Structure:
        tok = self.peek()
        if tok.kind == "hole":
            if not self.allow_holes:
                self.error("holes are only allowed in contexts")
            self.next()
            return S.leaf(S.HOLE)
        if tok.kind == "lpar":
            save = self.pos
            self.next()
            if self.peek().kind == "rpar":
                self.next()
                return S.EMPTY
            try:
                first = self.structure()
            except ParseError:
                self.pos = save
                return S.leaf(self.formula())
            if self.peek().kind == "comma":
                self.next()
                second = self.structure()
                self.expect("rpar")
                return S.pair(first, second)
            if self.peek().kind == "rpar":
                # plain parentheses around a single element
                self.pos = save
                try:
                    return S.leaf(self.formula())
                except ParseError:
                    self.pos = save + 1
                    inner = self.structure()
                    self.expect("rpar")
                    return inner
            self.pos = save
            return S.leaf(self.formula())
        return S.leaf(self.formula())

    def structure_top(self) -> S.Structure:
        """A structure, allowing one level of bare top-level commas."""
        out = self.structure()
        while self.peek().kind == "comma":
            self.next()
            out = S.pair(out, self.structure())
        return out

    def done(self):
        tok = self.peek()
        if tok.kind != "eof":
            raise ParseError(f"trailing input {tok.text!r}", tok.line, tok.col)


def parse_formula(text: str) -> F.Formula:
    p = _Parser(text)
    out = p.formula()
    p.done()
    return out


def parse_structure(text: str) -> S.Structure:
    p = _Parser(text)
    out = p.structure_top()
    p.done()
    return out


def parse_context(text: str) -> S.Context:
    p = _Parser(text, allow_holes=True)
    out = p.structure_top()
    p.done()
    return S.Context(out)


def parse_sequent(text: str):
    """Parse either '|- S' / bare 'S' (one-sided) or 'G |- f' (two-sided).

    Returns a calculus.Sequent.
    """
    from . import calculus

    p = _Parser(text)
    if p.peek().kind == "turnstile":
        p.next()
        s = p.structure_top()
        p.done()
        return calculus.OneSided(s)
    left = p.structure_top()
    if p.peek().kind == "turnstile":
        p.next()
        succ = p.formula()
        p.done()
        return calculus.TwoSided(left, succ)
    p.done()
    return calculus.OneSided(left)


# -- printers ---------------------------------------------------------------


def fmt_formula(f: F.Formula) -> str:
    if isinstance(f, F.Atom):
        return f.name
    if isinstance(f, F.NegAtom):
        return "~" + f.name
    if isinstance(f, F.Unit):
        return f.tag
    if isinstance(f, F.Bang):
        return f"!{f.label}.{fmt_formula(f.body)}"
    if isinstance(f, F.Quest):
        return f"?{f.label}.{fmt_formula(f.body)}"
    ops = {F.Tensor: "*", F.Par: "|", F.Plus: "+", F.With: "&", F.RImp: "->", F.LImp: "<-"}
    op = ops[type(f)]
    return f"({fmt_formula(f.left)}{op}{fmt_formula(f.right)})"


def fmt_structure(s: S.Structure) -> str:
    if s is S.EMPTY:
        return "()"
    if isinstance(s, S.Leaf):
        if s.value is S.HOLE:
            return "_"
        if isinstance(s.value, F.Formula):
            return fmt_formula(s.value)
        return repr(s.value)
    return f"({fmt_structure(s.left)}, {fmt_structure(s.right)})"


def fmt_sequent(seq) -> str:
    from . import calculus

    if isinstance(seq, calculus.OneSided):
        return "|- " + fmt_structure(seq.structure)
    return f"{fmt_structure(seq.antecedent)} |- {fmt_formula(seq.succedent)}"
