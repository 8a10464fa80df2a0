"""Algebra definition files and deterministic report serialization.

Documents are UTF-8 JSON.  Rational coefficients are strings "p/q" (or plain
integers); generator references are names; structure constants are triples
[[input names...], output name, coefficient].  Emitted JSON uses a fixed key
order, canonical sorting of every list, and str(Fraction) for coefficients,
so identical inputs always produce byte-identical output.
"""

from __future__ import annotations

import hashlib
import json
from fractions import Fraction

from .errors import DocumentError, StructureError
from .graded import AltMap, GradedSpace, SymMap, TensorMap
from .coalgebra import REDUCED, Coderivation
from .prelie import PreLieAlgebra

__all__ = [
    "AlgebraDocument",
    "load",
    "loads",
    "parse_rational",
    "document_from_prelie",
    "document_from_dgla",
    "document_from_tower",
    "dump_document",
]

KINDS = ("prelie-left", "prelie-right", "dgla", "linfty")


def parse_rational(text, where):
    """Exact rational from "p/q" or integer notation; rejects zero denominators."""
    if isinstance(text, bool):
        raise DocumentError("coefficient %r is not a rational" % (text,), entity=where)
    if isinstance(text, int):
        return Fraction(text)
    if isinstance(text, str):
        try:
            return Fraction(text)
        except (ValueError, ZeroDivisionError) as exc:
            raise DocumentError(
                "bad rational coefficient %r at %s: %s" % (text, where, exc),
                entity=where) from None
    raise DocumentError("coefficient %r is not a rational" % (text,), entity=where)


class AlgebraDocument:
    """Parsed algebra definition: a graded space plus kind-specific payload."""

    def __init__(self, kind, space, *, product=None, bracket=None,
                 differential=None, taylor=None, exact=False, max_arity=None,
                 name=None, path=None, digest=None):
        self.kind = kind
        self.space = space
        self.product = product
        self.bracket = bracket
        self.differential = differential
        self.taylor = taylor
        self.exact = exact
        self.max_arity = max_arity
        self.name = name
        self.path = path
        self.digest = digest

    def prelie(self):
        if self.kind not in ("prelie-left", "prelie-right"):
            raise DocumentError("document is not a pre-Lie algebra", entity=self.kind)
        chirality = "left" if self.kind == "prelie-left" else "right"
        return PreLieAlgebra(self.space, self.product, chirality, self.differential)


def _index(space, name, where):
    try:
        return space.index(name)
    except StructureError:
        raise DocumentError("undeclared generator %r at %s" % (name, where),
                            entity=name) from None


def _load_triples(space, entries, target, where):
    for k, entry in enumerate(entries):
        spot = "%s[%d]" % (where, k)
        try:
            inputs, out, coeff = entry
        except (TypeError, ValueError):
            raise DocumentError("malformed structure constant at %s" % spot,
                                entity=spot) from None
        idx = tuple(_index(space, n, spot) for n in inputs)
        g = _index(space, out, spot)
        c = parse_rational(coeff, spot)
        try:
            target.add_term(idx, g, c)
        except (StructureError, ValueError) as exc:
            raise DocumentError("bad entry at %s: %s" % (spot, exc),
                                entity=spot) from None


def loads(text, path=None):
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentError("JSON parse error: %s" % exc.msg,
                            line=exc.lineno, column=exc.colno) from None
    if not isinstance(raw, dict):
        raise DocumentError("document must be a JSON object")
    kind = raw.get("kind")
    if kind not in KINDS:
        raise DocumentError("unknown document kind %r" % (kind,), entity="kind")
    gens = raw.get("generators")
    if not isinstance(gens, list) or not all(
            isinstance(g, list) and len(g) == 2 for g in gens):
        raise DocumentError("generators must be a list of [name, degree] pairs",
                            entity="generators")
    try:
        space = GradedSpace((str(n), int(d)) for n, d in gens)
    except StructureError as exc:
        raise DocumentError(str(exc), entity="generators") from None

    differential = None
    if raw.get("differential") is not None:
        differential = SymMap(space, space, 1, 1)
        for k, entry in enumerate(raw["differential"]):
            spot = "differential[%d]" % k
            try:
                src, combo = entry
            except (TypeError, ValueError):
                raise DocumentError("malformed differential entry at %s" % spot,
                                    entity=spot) from None
            i = _index(space, src, spot)
            for name, coeff in combo:
                g = _index(space, name, spot)
                try:
                    differential.add_term((i,), g, parse_rational(coeff, spot))
                except StructureError as exc:
                    raise DocumentError("bad entry at %s: %s" % (spot, exc),
                                        entity=spot) from None
        if differential.is_zero():
            differential = None

    product = bracket = taylor = None
    exact = bool(raw.get("exact", False))
    max_arity = raw.get("max_arity")
    if kind in ("prelie-left", "prelie-right"):
        product = TensorMap(space, space, 2, 0)
        _load_triples(space, raw.get("product", []), product, "product")
    elif kind == "dgla":
        bracket = AltMap(space, space, 2, 0)
        _load_triples(space, raw.get("brackets", []), bracket, "brackets")
    else:
        taylor = {}
        raw_taylor = raw.get("taylor", {})
        if not isinstance(raw_taylor, dict):
            raise DocumentError("taylor must map arities to entry lists",
                                entity="taylor")
        degree = raw.get("degree", 1)
        for key in sorted(raw_taylor, key=lambda s: int(s)):
            n = int(key)
            if n < 1:
                raise DocumentError("taylor arities start at 1", entity=str(key))
            m = SymMap(space, space, n, int(degree))
            _load_triples(space, raw_taylor[key], m, "taylor[%s]" % key)
            if not m.is_zero():
                taylor[n] = m
        if max_arity is None and not exact:
            max_arity = max(taylor, default=1)

    doc = AlgebraDocument(
        kind, space, product=product, bracket=bracket,
        differential=differential, taylor=taylor, exact=exact,
        max_arity=None if exact else max_arity,
        name=raw.get("name"), path=path)
    return doc


def load(path):
    with open(path, "rb") as fh:
        data = fh.read()
    doc = loads(data.decode("utf-8"), path=str(path))
    doc.digest = hashlib.sha256(data).hexdigest()
    return doc


def linfty_coderivation(doc):
    """The coderivation declared by a linfty document."""
    cap = None if doc.exact else (doc.max_arity or 1)
    return Coderivation(doc.space, 1, REDUCED, None, doc.taylor, cap)


# ---------------------------------------------------------------------------
# canonical emission


def _fmt_triples(space, m):
    triples = []
    for mono, g, c in m.sorted_terms():
        triples.append([[space.name(i) for i in mono], space.name(g), str(c)])
    return triples


def _space_json(space):
    return [[name, deg] for name, deg in space.generators]


def document_from_prelie(L, differential=None, name=None):
    out = {
        "kind": "prelie-%s" % L.chirality,
        "generators": _space_json(L.space),
        "product": _fmt_triples(L.space, L.product),
    }
    d = differential if differential is not None else L.differential
    if d is not None and not d.is_zero():
        out["differential"] = [
            [L.space.name(i), [[L.space.name(g), str(c)]
                               for g, c in sorted(combo.items())]]
            for (i,), combo in sorted(d.entries.items())
        ]
    if name:
        out["name"] = name
    return out


def document_from_dgla(space, d, bracket, name=None):
    out = {
        "kind": "dgla",
        "generators": _space_json(space),
        "brackets": _fmt_triples(space, bracket),
    }
    if d is not None and not d.is_zero():
        out["differential"] = [
            [space.name(i), [[space.name(g), str(c)]
                             for g, c in sorted(combo.items())]]
            for (i,), combo in sorted(d.entries.items())
        ]
    if name:
        out["name"] = name
    return out


def document_from_tower(Q, name=None):
    """A reduced degree-1 coderivation as a linfty document."""
    space = Q.space
    out = {
        "kind": "linfty",
        "generators": _space_json(space),
        "taylor": {str(n): _fmt_triples(space, Q.taylor[n])
                   for n in sorted(Q.taylor)},
        "exact": Q.max_arity is None,
    }
    if Q.max_arity is not None:
        out["max_arity"] = Q.max_arity
    if name:
        out["name"] = name
    return out


def dump_document(obj):
    """Canonical byte form of a document or report dict."""
    return json.dumps(obj, indent=2, ensure_ascii=True) + "\n"
