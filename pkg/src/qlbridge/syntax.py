"""Formulas of the one-variable language over state and property predicates.

Two alphabets are supported. The *classical* one has states, properties and
the connectives ``~ & | ->``. The *contextual* one replaces properties by
contextual properties ``E[c](x)`` (a property measured in a microscopic
context) and drops implication.

Concrete grammar (binary connectives left associative, ``~`` binds tightest,
then ``&``, ``|``, ``->``)::

    wff  := atom | "~" wff | "(" wff ")" | wff bin wff
    bin  := "&" | "|" | "->"
    atom := ident "(" "x" ")" | ident "[" ident "]" "(" "x" ")"

>>> sig = Signature(states=["S1"], properties=["E1", "E2"])
>>> to_text(parse("S1(x) & ~E1(x) | E2(x)", sig))
'((S1(x) & ~E1(x)) | E2(x))'
"""

from __future__ import annotations

import enum
import re
from collections import Counter
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Iterator, Mapping, Union

from .errors import FragmentError, InputError, UnknownIdentifierError, WffSyntaxError

IDENT_RE = re.compile(r"[A-Za-z][A-Za-z0-9_]*")


class Fragment(enum.Enum):
    CLASSICAL = "classical"
    CONTEXTUAL = "contextual"


@dataclass(frozen=True)
class Signature:
    """Alphabet of predicates plus the measurement bookkeeping attached to it.

    ``procedures`` maps each property to its set of measurement procedures.
    A property without an entry gets a single procedure named after itself.
    ``observable_tags`` maps a property to ``(observable, values)``, the
    classical reading of a property as "observable A has a value in Delta".
    """

    states: tuple = ()
    properties: tuple = ()
    mu_contexts: tuple = ()
    procedures: Mapping[str, frozenset] = field(default_factory=dict)
    observables: Mapping[str, tuple] = field(default_factory=dict)
    observable_tags: Mapping[str, tuple] = field(default_factory=dict)

    def __post_init__(self):
        set_ = object.__setattr__
        set_(self, "states", tuple(self.states))
        set_(self, "properties", tuple(self.properties))
        set_(self, "mu_contexts", tuple(self.mu_contexts))
        for name in (*self.states, *self.properties, *self.mu_contexts):
            if not isinstance(name, str) or not IDENT_RE.fullmatch(name):
                raise InputError(f"invalid identifier {name!r}")
        for kind, names in (("state", self.states), ("property", self.properties),
                            ("mu-context", self.mu_contexts)):
            dup = [n for n, c in Counter(names).items() if c > 1]
            if dup:
                raise InputError(f"duplicate {kind} {dup[0]!r}")
        clash = set(self.states) & set(self.properties)
        if clash:
            raise InputError(f"states and properties must be disjoint: {sorted(clash)}")

        procs = {}
        for prop in self.properties:
            ms = frozenset(self.procedures.get(prop, (prop,)))
            if not ms:
                raise InputError(f"property {prop!r} has no measurement procedure")
            procs[prop] = ms
        for prop in self.procedures:
            if prop not in procs:
                raise UnknownIdentifierError(prop, "property")
        set_(self, "procedures", MappingProxyType(procs))

        obs = {name: tuple(dom) for name, dom in self.observables.items()}
        tags = {}
        for prop, (observable, values) in self.observable_tags.items():
            if prop not in procs:
                raise UnknownIdentifierError(prop, "property")
            if observable not in obs:
                raise UnknownIdentifierError(observable, "observable")
            values = frozenset(values)
            if not values <= set(obs[observable]):
                raise InputError(
                    f"tag of {prop!r}: values {sorted(values - set(obs[observable]), key=repr)} "
                    f"outside the domain of {observable!r}")
            tags[prop] = (observable, values)
        set_(self, "observables", MappingProxyType(obs))
        set_(self, "observable_tags", MappingProxyType(tags))

    def atoms(self):
        """Every atomic formula of the signature, in declaration order."""
        out = [StateAtom(s) for s in self.states]
        out += [PropertyAtom(e) for e in self.properties]
        out += [ContextualAtom(e, c) for e in self.properties for c in self.mu_contexts]
        return out

    def all_procedures(self):
        return sorted(set().union(*self.procedures.values())) if self.procedures else []

    @classmethod
    def from_dict(cls, doc):
        tags = {p: (t["observable"], t["values"]) for p, t in doc.get("observable_tags", {}).items()}
        return cls(
            states=doc.get("states", ()),
            properties=doc.get("properties", ()),
            mu_contexts=doc.get("mu_contexts", ()),
            procedures={p: frozenset(ms) for p, ms in doc.get("procedures", {}).items()},
            observables=doc.get("observables", {}),
            observable_tags=tags,
        )

    def to_dict(self):
        return {
            "states": list(self.states),
            "properties": list(self.properties),
            "mu_contexts": list(self.mu_contexts),
            "procedures": {p: sorted(ms) for p, ms in self.procedures.items()},
            "observables": {o: list(d) for o, d in self.observables.items()},
            "observable_tags": {p: {"observable": o, "values": sorted(v, key=repr)}
                                for p, (o, v) in self.observable_tags.items()},
        }


# -- abstract syntax --------------------------------------------------------

@dataclass(frozen=True)
class StateAtom:
    name: str

    def __str__(self):
        return to_text(self)


@dataclass(frozen=True)
class PropertyAtom:
    name: str

    def __str__(self):
        return to_text(self)


@dataclass(frozen=True)
class ContextualAtom:
    prop: str
    context: str

    def __str__(self):
        return to_text(self)


@dataclass(frozen=True)
class Not:
    arg: "Wff"

    def __str__(self):
        return to_text(self)


@dataclass(frozen=True)
class And:
    left: "Wff"
    right: "Wff"

    def __str__(self):
        return to_text(self)


@dataclass(frozen=True)
class Or:
    left: "Wff"
    right: "Wff"

    def __str__(self):
        return to_text(self)


@dataclass(frozen=True)
class Implies:
    left: "Wff"
    right: "Wff"

    def __str__(self):
        return to_text(self)


Atom = Union[StateAtom, PropertyAtom, ContextualAtom]
Wff = Union[StateAtom, PropertyAtom, ContextualAtom, Not, And, Or, Implies]
ATOM_TYPES = (StateAtom, PropertyAtom, ContextualAtom)
BINARY_TYPES = (And, Or, Implies)
_SYMBOL = {And: "&", Or: "|", Implies: "->"}


def to_text(w: Wff) -> str:
    """Canonical rendering; every binary node is parenthesized."""
    if isinstance(w, StateAtom):
        return f"{w.name}(x)"
    if isinstance(w, PropertyAtom):
        return f"{w.name}(x)"
    if isinstance(w, ContextualAtom):
        return f"{w.prop}[{w.context}](x)"
    if isinstance(w, Not):
        return "~" + to_text(w.arg)
    if isinstance(w, BINARY_TYPES):
        return f"({to_text(w.left)} {_SYMBOL[type(w)]} {to_text(w.right)})"
    raise TypeError(f"not a wff: {w!r}")


def atoms(w: Wff) -> Iterator[Atom]:
    """Atom occurrences, left to right (with repetition)."""
    stack = [w]
    while stack:
        node = stack.pop()
        if isinstance(node, ATOM_TYPES):
            yield node
        elif isinstance(node, Not):
            stack.append(node.arg)
        else:
            stack.append(node.right)
            stack.append(node.left)


def map_atoms(w: Wff, fn) -> Wff:
    if isinstance(w, ATOM_TYPES):
        return fn(w)
    if isinstance(w, Not):
        return Not(map_atoms(w.arg, fn))
    return type(w)(map_atoms(w.left, fn), map_atoms(w.right, fn))


def rebind_context(w: Wff, context: str) -> Wff:
    """Move every contextual atom of ``w`` into ``context``."""
    return map_atoms(w, lambda a: ContextualAtom(a.prop, context)
                     if isinstance(a, ContextualAtom) else a)


def has_implication(w: Wff) -> bool:
    if isinstance(w, ATOM_TYPES):
        return False
    if isinstance(w, Not):
        return has_implication(w.arg)
    return isinstance(w, Implies) or has_implication(w.left) or has_implication(w.right)


@dataclass(frozen=True)
class FragmentInfo:
    in_phi: bool          # no state symbol occurs
    contextual: bool      # some contextual property occurs
    implication: bool
    atoms: Counter

    @property
    def alphabets(self):
        """The alphabets in which the formula is expressible."""
        kinds = set(map(type, self.atoms))
        out = []
        if ContextualAtom not in kinds:
            out.append(Fragment.CLASSICAL)
        if PropertyAtom not in kinds and not self.implication:
            out.append(Fragment.CONTEXTUAL)
        return out

    def to_dict(self):
        return {
            "in_phi": self.in_phi,
            "contextual": self.contextual,
            "implication": self.implication,
            "alphabets": [f.value for f in self.alphabets],
            "atoms": {to_text(a): n for a, n in sorted(self.atoms.items(), key=lambda kv: to_text(kv[0]))},
        }


def fragment_of(w: Wff) -> FragmentInfo:
    counts = Counter(atoms(w))
    return FragmentInfo(
        in_phi=not any(isinstance(a, StateAtom) for a in counts),
        contextual=any(isinstance(a, ContextualAtom) for a in counts),
        implication=has_implication(w),
        atoms=counts,
    )


# -- parser -----------------------------------------------------------------

_TOKEN_RE = re.compile(r"\s*(?:(->)|([~&|()\[\]])|([A-Za-z][A-Za-z0-9_]*))")


def _tokenize(text):
    tokens = []
    pos = 0
    n = len(text)
    while pos < n:
        if text[pos:].strip() == "":
            break
        m = _TOKEN_RE.match(text, pos)
        if not m:
            start = pos + len(text[pos:]) - len(text[pos:].lstrip())
            raise WffSyntaxError(f"unexpected character {text[start]!r}", start, text)
        kind = "ident" if m.group(3) else "sym"
        value = m.group(m.lastindex)
        tokens.append((kind, value, m.start(m.lastindex)))
        pos = m.end()
    tokens.append(("end", None, len(text)))
    return tokens


class _Parser:
    def __init__(self, text, sig, fragment):
        self.text = text
        self.sig = sig
        self.fragment = fragment
        self.toks = _tokenize(text)
        self.i = 0
        self._states = set(sig.states)
        self._props = set(sig.properties)
        self._contexts = set(sig.mu_contexts)

    def peek(self):
        return self.toks[self.i]

    def take(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        kind, val, pos = self.take()
        if val != value or kind == "end":
            found = "end of input" if kind == "end" else repr(val)
            raise WffSyntaxError(f"expected {value!r}, found {found}", pos, self.text)

    def parse(self):
        w = self.implication()
        kind, val, pos = self.peek()
        if kind != "end":
            raise WffSyntaxError(f"unexpected {val!r}", pos, self.text)
        return w

    def implication(self):
        left = self.disjunction()
        while self.peek()[1] == "->" and self.peek()[0] == "sym":
            _, _, pos = self.take()
            if self.fragment is Fragment.CONTEXTUAL:
                raise FragmentError(
                    f"'->' is not a connective of the contextual alphabet (position {pos})")
            left = Implies(left, self.disjunction())
        return left

    def disjunction(self):
        left = self.conjunction()
        while self.peek()[:2] == ("sym", "|"):
            self.take()
            left = Or(left, self.conjunction())
        return left

    def conjunction(self):
        left = self.unary()
        while self.peek()[:2] == ("sym", "&"):
            self.take()
            left = And(left, self.unary())
        return left

    def unary(self):
        kind, val, pos = self.peek()
        if (kind, val) == ("sym", "~"):
            self.take()
            return Not(self.unary())
        if (kind, val) == ("sym", "("):
            self.take()
            w = self.implication()
            self.expect(")")
            return w
        if kind == "ident":
            return self.atom()
        found = "end of input" if kind == "end" else repr(val)
        raise WffSyntaxError(f"expected a formula, found {found}", pos, self.text)

    def atom(self):
        _, name, pos = self.take()
        context = None
        if self.peek()[:2] == ("sym", "["):
            self.take()
            kind, context, cpos = self.take()
            if kind != "ident":
                raise WffSyntaxError("expected a mu-context identifier", cpos, self.text)
            self.expect("]")
        self.expect("(")
        kind, var, vpos = self.take()
        if var != "x":
            raise WffSyntaxError("the only individual variable is 'x'", vpos, self.text)
        self.expect(")")

        if context is not None:
            if name not in self._props:
                raise UnknownIdentifierError(name, "property")
            if context not in self._contexts:
                raise UnknownIdentifierError(context, "mu-context")
            if self.fragment is Fragment.CLASSICAL:
                raise FragmentError(
                    f"contextual property {name}[{context}] outside the contextual alphabet "
                    f"(position {pos})")
            return ContextualAtom(name, context)
        if name in self._states:
            return StateAtom(name)
        if name in self._props:
            if self.fragment is Fragment.CONTEXTUAL:
                raise FragmentError(
                    f"bare property {name!r} at position {pos}: the contextual alphabet "
                    f"only has contextual properties E[c](x)")
            return PropertyAtom(name)
        raise UnknownIdentifierError(name)


def parse(text: str, sig: Signature, fragment: Fragment = Fragment.CLASSICAL) -> Wff:
    """Parse ``text`` against ``sig`` within the given alphabet."""
    if isinstance(fragment, str):
        fragment = Fragment(fragment)
    return _Parser(text, sig, fragment).parse()


def check_signature(w: Wff, sig: Signature):
    """Raise if ``w`` mentions a predicate or context absent from ``sig``."""
    for a in set(atoms(w)):
        if isinstance(a, StateAtom) and a.name not in sig.states:
            raise UnknownIdentifierError(a.name, "state")
        if isinstance(a, PropertyAtom) and a.name not in sig.properties:
            raise UnknownIdentifierError(a.name, "property")
        if isinstance(a, ContextualAtom):
            if a.prop not in sig.properties:
                raise UnknownIdentifierError(a.prop, "property")
            if a.context not in sig.mu_contexts:
                raise UnknownIdentifierError(a.context, "mu-context")
