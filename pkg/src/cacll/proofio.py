"""S-expression serialization for proofs.

Grammar: ``(proof <rule> (seq "<sequent text>") (data <field>...) <child>...)``
where each data field is ``(<key> <value>...)``.  Positions are words over
l/r (``-`` for the root), formulas and structures reuse the text grammar.
"""

from __future__ import annotations

from . import calculus as C
from . import formulas as F
from . import structures as S
from . import syntax


class SexprError(ValueError):
    pass


# -- generic sexpr reader ----------------------------------------------------


def _tokenize(text: str):
    toks = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch in "()":
            toks.append(ch)
            i += 1
            continue
        if ch == '"':
            j = i + 1
            buf = []
            while j < n and text[j] != '"':
                if text[j] == "\\" and j + 1 < n:
                    buf.append(text[j + 1])
                    j += 2
                else:
                    buf.append(text[j])
                    j += 1
            if j >= n:
                raise SexprError("unterminated string")
            toks.append(('"', "".join(buf)))
            i = j + 1
            continue
        j = i
        while j < n and not text[j].isspace() and text[j] not in "()":
            j += 1
        toks.append(("a", text[i:j]))
        i = j
    return toks


def _read(toks, at=0):
    if at >= len(toks):
        raise SexprError("unexpected end of input")
    tok = toks[at]
    if tok == "(":
        items = []
        at += 1
        while at < len(toks) and toks[at] != ")":
            item, at = _read(toks, at)
            items.append(item)
        if at >= len(toks):
            raise SexprError("missing )")
        return items, at + 1
    if tok == ")":
        raise SexprError("unexpected )")
    return tok, at + 1


def read_sexpr(text: str):
    toks = _tokenize(text)
    expr, at = _read(toks, 0)
    if at != len(toks):
        raise SexprError("trailing input after s-expression")
    return expr


def _quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


# -- data field encoding -----------------------------------------------------


def _pos_word(pos) -> str:
    return "".join("l" if step == 0 else "r" for step in pos) or "-"


def _pos_parse(word: str):
    if word == "-":
        return ()
    if not all(ch in "lr" for ch in word):
        raise SexprError(f"bad position {word!r}")
    return tuple(0 if ch == "l" else 1 for ch in word)


_POS_KEYS = {"pos", "src", "dst"}
_POSLIST_KEYS = {"others"}
_STRUCT_KEYS = {"gamma", "delta"}
_FORMULA_KEYS = {"formula"}
_STR_KEYS = {"side", "label", "dir"}
_GENS_KEYS = {"gens"}
_ERASED_KEYS = {"erased"}


def _field_to_sexpr(key: str, value) -> str:
    if key in _POS_KEYS:
        return f"({key} {_pos_word(value)})"
    if key in _POSLIST_KEYS:
        inner = " ".join(_pos_word(p) for p in value)
        return f"({key} {inner})".replace(" )", ")")
    if key in _STRUCT_KEYS:
        return f"({key} {_quote(syntax.fmt_structure(value))})"
    if key in _FORMULA_KEYS:
        return f"({key} {_quote(syntax.fmt_formula(value))})"
    if key in _STR_KEYS:
        return f"({key} {value})"
    if key in _GENS_KEYS:
        inner = " ".join(value)
        return f"({key} {inner})".replace(" )", ")")
    if key in _ERASED_KEYS:
        inner = " ".join(
            f"({_pos_word(p)} {_quote(syntax.fmt_formula(v))})" for p, v in value
        )
        return f"({key} {inner})".replace(" )", ")")
    raise SexprError(f"unknown data key {key!r}")


def _atom_text(item) -> str:
    if isinstance(item, tuple) and item[0] in ('"', "a"):
        return item[1]
    raise SexprError(f"expected an atom, found {item!r}")


def _field_from_sexpr(item):
    if not isinstance(item, list) or not item:
        raise SexprError("bad data field")
    key = _atom_text(item[0])
    args = item[1:]
    if key in _POS_KEYS:
        return key, _pos_parse(_atom_text(args[0]))
    if key in _POSLIST_KEYS:
        return key, tuple(_pos_parse(_atom_text(a)) for a in args)
    if key in _STRUCT_KEYS:
        return key, syntax.parse_structure(_atom_text(args[0]))
    if key in _FORMULA_KEYS:
        return key, syntax.parse_formula(_atom_text(args[0]))
    if key in _STR_KEYS:
        return key, _atom_text(args[0])
    if key in _GENS_KEYS:
        return key, tuple(_atom_text(a) for a in args)
    if key in _ERASED_KEYS:
        out = []
        for entry in args:
            if not isinstance(entry, list) or len(entry) != 2:
                raise SexprError("bad erased entry")
            pos = _pos_parse(_atom_text(entry[0]))
            val = syntax.parse_formula(_atom_text(entry[1]))
            out.append((pos, val))
        return key, tuple(out)
    raise SexprError(f"unknown data key {key!r}")


# -- proofs ------------------------------------------------------------------


def proof_to_sexpr(p: C.Proof, indent: int = 0) -> str:
    pad = "  " * indent
    seq = _quote(syntax.fmt_sequent(p.conclusion))
    fields = " ".join(_field_to_sexpr(k, v) for k, v in p.data.items)
    head = f"{pad}(proof {p.rule} (seq {seq}) (data{' ' + fields if fields else ''})"
    if not p.premises:
        return head + ")"
    kids = "\n".join(proof_to_sexpr(q, indent + 1) for q in p.premises)
    return f"{head}\n{kids}{')'}"


def proof_from_sexpr(text: str) -> C.Proof:
    return _proof_from_list(read_sexpr(text))


def _proof_from_list(expr) -> C.Proof:
    if not isinstance(expr, list) or not expr or _atom_text(expr[0]) != "proof":
        raise SexprError("expected (proof ...)")
    if len(expr) < 3:
        raise SexprError("proof needs a rule and a sequent")
    rule = _atom_text(expr[1])
    seq_item = expr[2]
    if not isinstance(seq_item, list) or _atom_text(seq_item[0]) != "seq":
        raise SexprError("expected (seq \"...\")")
    conclusion = syntax.parse_sequent(_atom_text(seq_item[1]))
    rest = expr[3:]
    data = C.NO_DATA
    if rest and isinstance(rest[0], list) and rest[0] and _atom_text(rest[0][0]) == "data":
        fields = dict(_field_from_sexpr(f) for f in rest[0][1:])
        data = C.Step(**fields)
        rest = rest[1:]
    premises = tuple(_proof_from_list(e) for e in rest)
    return C.Proof(conclusion, rule, data, premises)
