"""Assertive formulas, justification values and the quantum pragmatic fragment.

Radical formulas are ordinary formulas over property atoms and can be true,
false or (under a partial truth assignment) without value. Assertive
formulas prefix radicals with the assertion sign and combine them with the
pragmatic connectives N, K, A, C, E; they are justified or unjustified.

In the quantum fragment an evaluation point is a pure state S and a property
atom E(x) is proved true at S iff born(S, P_E) = 1 and proved false iff it
is 0. Justification sets are then finite unions of subspaces (as sets of
rays), which gives an exact analytic handle on the continuum of states:
a subspace lies inside a finite union of subspaces iff it lies inside one
of them.

The pragmatic rules used by default:

* ``|-(r)`` is justified iff ``r`` is proved true at the point;
* ``N d`` is justified iff ``d`` can never be justified there, i.e. the
  point is orthogonal to every state justifying ``d``;
* ``K``/``A`` are justified iff both/either argument is;
* ``C(d1, d2)`` is justified iff at every admissible point justifying ``d1``,
  ``d2`` is justified as well (a global condition); ``E`` is ``C`` both ways.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .errors import BudgetExhausted, InputError, PreconditionError, StructureError, \
    UnknownIdentifierError, WffSyntaxError
from .hilbert import DEFAULT_TOL, Projection, QuantumState, born, join, meet, ortho
from .lattice import OrthoStructure
from .syntax import (
    And, ATOM_TYPES, Implies, Not, Or, PropertyAtom, Signature, Wff, atoms, parse, to_text,
)


# -- syntax -----------------------------------------------------------------

@dataclass(frozen=True)
class Assert:
    radical: Wff


@dataclass(frozen=True)
class N:
    arg: "AssertiveFormula"


@dataclass(frozen=True)
class K:
    left: "AssertiveFormula"
    right: "AssertiveFormula"


@dataclass(frozen=True)
class A:
    left: "AssertiveFormula"
    right: "AssertiveFormula"


@dataclass(frozen=True)
class C:
    left: "AssertiveFormula"
    right: "AssertiveFormula"


@dataclass(frozen=True)
class E:
    left: "AssertiveFormula"
    right: "AssertiveFormula"


AssertiveFormula = Union[Assert, N, K, A, C, E]
_BINARY = {"K": K, "A": A, "C": C, "E": E}


def af_to_text(d) -> str:
    if isinstance(d, Assert):
        return f"|-({to_text(d.radical)})"
    if isinstance(d, N):
        return "N" + af_to_text(d.arg)
    for sym, cls in _BINARY.items():
        if isinstance(d, cls):
            return f"{sym}({af_to_text(d.left)}, {af_to_text(d.right)})"
    raise TypeError(f"not an assertive formula: {d!r}")


def af_depth(d) -> int:
    if isinstance(d, Assert):
        return 1
    if isinstance(d, N):
        return 1 + af_depth(d.arg)
    return 1 + max(af_depth(d.left), af_depth(d.right))


def af_radicals(d):
    if isinstance(d, Assert):
        yield d.radical
    elif isinstance(d, N):
        yield from af_radicals(d.arg)
    else:
        yield from af_radicals(d.left)
        yield from af_radicals(d.right)


def parse_af(text: str, sig: Signature):
    """Parse ``|-(wff)``, ``N af``, ``K(af, af)``, ``A(..)``, ``C(..)``, ``E(..)``."""
    pos = 0

    def skip():
        nonlocal pos
        while pos < len(text) and text[pos].isspace():
            pos += 1

    def expect(ch):
        nonlocal pos
        skip()
        if not text.startswith(ch, pos):
            found = text[pos] if pos < len(text) else "end of input"
            raise WffSyntaxError(f"expected {ch!r}, found {found!r}", pos, text)
        pos += len(ch)

    def formula():
        nonlocal pos
        skip()
        if text.startswith("|-", pos):
            pos += 2
            expect("(")
            start = pos
            depth = 1
            while pos < len(text) and depth:
                depth += {"(": 1, ")": -1}.get(text[pos], 0)
                pos += 1
            if depth:
                raise WffSyntaxError("unbalanced parentheses after '|-'", start, text)
            try:
                radical = parse(text[start:pos - 1], sig)
            except WffSyntaxError as exc:
                raise WffSyntaxError(f"in radical formula: {exc.args[0]}",
                                     None if exc.position is None else start + exc.position,
                                     text) from None
            return Assert(radical)
        if pos < len(text) and text[pos] == "N":
            pos += 1
            return N(formula())
        if pos < len(text) and text[pos] in _BINARY:
            cls = _BINARY[text[pos]]
            pos += 1
            expect("(")
            left = formula()
            expect(",")
            right = formula()
            expect(")")
            return cls(left, right)
        found = text[pos] if pos < len(text) else "end of input"
        raise WffSyntaxError(f"expected an assertive formula, found {found!r}", pos, text)

    d = formula()
    skip()
    if pos != len(text):
        raise WffSyntaxError(f"unexpected {text[pos]!r}", pos, text)
    return d


# -- radicals under partial truth assignments -------------------------------

def radical_truth(r: Wff, assignment) -> bool | None:
    """Classical value of ``r`` if every atom is assigned, else ``None``."""
    if isinstance(r, ATOM_TYPES):
        return assignment.get(r.name if isinstance(r, PropertyAtom) else to_text(r))
    if isinstance(r, Not):
        v = radical_truth(r.arg, assignment)
        return None if v is None else not v
    left = radical_truth(r.left, assignment)
    right = radical_truth(r.right, assignment)
    if left is None or right is None:
        return None
    if isinstance(r, And):
        return left and right
    if isinstance(r, Or):
        return left or right
    if isinstance(r, Implies):
        return (not left) or right
    raise TypeError(f"not a radical formula: {r!r}")


# -- justification sets -----------------------------------------------------

class JustSet:
    """A finite union of subspaces, read as the set of pure states (rays) inside them."""

    def __init__(self, components, dim, tol=DEFAULT_TOL):
        self.dim = dim
        self.tol = tol
        kept = []
        for p in components:
            if p.rank == 0:
                continue
            if any(p.leq(q, tol) for q in kept):
                continue
            kept = [q for q in kept if not q.leq(p, tol)]
            kept.append(p)
        self.components = tuple(kept)

    @classmethod
    def empty(cls, dim, tol=DEFAULT_TOL):
        return cls((), dim, tol)

    @classmethod
    def everything(cls, dim, tol=DEFAULT_TOL):
        return cls((Projection(np.eye(dim), tol),), dim, tol)

    def span(self) -> Projection:
        out = Projection(np.zeros((self.dim, self.dim)), self.tol, check=False)
        for p in self.components:
            out = join(out, p)
        return out

    def is_subspace(self):
        return len(self.components) <= 1

    def contains(self, state: QuantumState) -> bool:
        return any(born(state, p) >= 1 - self.tol * 10 for p in self.components)

    def __and__(self, other):
        return JustSet([meet(p, q) for p in self.components for q in other.components],
                       self.dim, self.tol)

    def __or__(self, other):
        return JustSet(self.components + other.components, self.dim, self.tol)

    def __le__(self, other):
        return all(any(p.leq(q, self.tol) for q in other.components) for p in self.components)

    def same(self, other):
        return self <= other and other <= self

    def __repr__(self):
        return f"JustSet(ranks={[p.rank for p in self.components]})"


class QuantumOracle:
    """Empirical proof in the quantum fragment: certainty under the Born rule."""

    def __init__(self, bindings, tol=DEFAULT_TOL):
        if not bindings:
            self.dim = None
        else:
            dims = {p.dim for p in bindings.values()}
            if len(dims) != 1:
                raise PreconditionError("bound projections have different dimensions")
            self.dim = dims.pop()
        self.bindings = dict(bindings)
        self.tol = tol
        self.signature = Signature(properties=list(self.bindings))

    def projection(self, name) -> Projection:
        try:
            return self.bindings[name]
        except KeyError:
            raise UnknownIdentifierError(name, "property without a projection binding") from None

    def radical_value(self, name, point: QuantumState) -> bool | None:
        p = born(point, self.projection(name))
        proved_true = p >= 1 - self.tol * 10
        proved_false = p <= self.tol * 10
        if proved_true and proved_false:
            raise PreconditionError(f"oracle proves {name} both true and false")
        return True if proved_true else False if proved_false else None

    def assignment(self, point, names):
        out = {}
        for name in names:
            v = self.radical_value(name, point)
            if v is not None:
                out[name] = v
        return out

    def proves(self, radical: Wff, point) -> bool:
        names = self._atom_names(radical)
        return radical_truth(radical, self.assignment(point, names)) is True

    def truth_set(self, radical: Wff) -> JustSet:
        """States at which ``radical`` is proved true: a union over satisfying valuations."""
        names = self._atom_names(radical)
        comps = []
        for values in itertools.product((True, False), repeat=len(names)):
            valuation = dict(zip(names, values))
            if radical_truth(radical, valuation) is not True:
                continue
            p = Projection(np.eye(self.dim), self.tol, check=False)
            for name, v in valuation.items():
                q = self.projection(name)
                p = meet(p, q if v else ortho(q))
            comps.append(p)
        return JustSet(comps, self.dim, self.tol)

    def _atom_names(self, radical):
        names = []
        for a in atoms(radical):
            if not isinstance(a, PropertyAtom):
                raise InputError(f"{to_text(a)} is not a property atom of the quantum fragment")
            self.projection(a.name)
            if a.name not in names:
                names.append(a.name)
        return names


class StandardRules:
    """The default pragmatic rules. Subclass and override to plug in another system."""

    def justification_set(self, d, oracle: QuantumOracle) -> JustSet:
        dim, tol = oracle.dim, oracle.tol
        if isinstance(d, Assert):
            return oracle.truth_set(d.radical)
        if isinstance(d, N):
            span = self.justification_set(d.arg, oracle).span()
            return JustSet([ortho(span)], dim, tol)
        if isinstance(d, K):
            return self.justification_set(d.left, oracle) & self.justification_set(d.right, oracle)
        if isinstance(d, A):
            return self.justification_set(d.left, oracle) | self.justification_set(d.right, oracle)
        if isinstance(d, C):
            held = self.justification_set(d.left, oracle) <= self.justification_set(d.right, oracle)
            return JustSet.everything(dim, tol) if held else JustSet.empty(dim, tol)
        if isinstance(d, E):
            return self.justification_set(K(C(d.left, d.right), C(d.right, d.left)), oracle)
        raise TypeError(f"not an assertive formula: {d!r}")

    def justify_at(self, d, point, oracle: QuantumOracle) -> bool:
        """Pointwise evaluation, recursing on the formula at a single state."""
        if isinstance(d, Assert):
            return oracle.proves(d.radical, point)
        if isinstance(d, N):
            span = self.justification_set(d.arg, oracle).span()
            return born(point, span) <= oracle.tol * 10
        if isinstance(d, K):
            return self.justify_at(d.left, point, oracle) and self.justify_at(d.right, point, oracle)
        if isinstance(d, A):
            return self.justify_at(d.left, point, oracle) or self.justify_at(d.right, point, oracle)
        if isinstance(d, C):
            return self.justification_set(d.left, oracle) <= self.justification_set(d.right, oracle)
        if isinstance(d, E):
            return self.justify_at(K(C(d.left, d.right), C(d.right, d.left)), point, oracle)
        raise TypeError(f"not an assertive formula: {d!r}")


DEFAULT_RULES = StandardRules()


def justify(d, point: QuantumState, oracle: QuantumOracle, rules=DEFAULT_RULES) -> bool:
    """Justification value of ``d`` at ``point`` (True means justified)."""
    return rules.justify_at(d, point, oracle)


def pragmatic_preorder(d1, d2, oracle: QuantumOracle, points=None, rules=DEFAULT_RULES) -> bool:
    """``d1`` precedes ``d2`` iff wherever ``d1`` is justified so is ``d2``.

    With ``points=None`` the family is all pure states, decided analytically;
    otherwise the finite list of states is checked one by one.
    """
    if points is None:
        return rules.justification_set(d1, oracle) <= rules.justification_set(d2, oracle)
    return all(not justify(d1, s, oracle, rules) or justify(d2, s, oracle, rules) for s in points)


def pragmatic_equivalent(d1, d2, oracle, points=None, rules=DEFAULT_RULES) -> bool:
    return (pragmatic_preorder(d1, d2, oracle, points, rules)
            and pragmatic_preorder(d2, d1, oracle, points, rules))


def analytic_disagreements(formulas, points, oracle, rules=DEFAULT_RULES):
    """(formula, point index) pairs where pointwise and set-membership evaluation differ."""
    out = []
    for d in formulas:
        jset = rules.justification_set(d, oracle)
        for k, s in enumerate(points):
            if justify(d, s, oracle, rules) != jset.contains(s):
                out.append((af_to_text(d), k))
    return out


# -- the quantum fragment as an order structure -----------------------------

@dataclass
class FragmentStructure:
    structure: OrthoStructure
    subspaces: list
    representatives: list
    candidates: int
    depth: int
    notes: list = field(default_factory=list)

    def to_dict(self):
        return {"depth": self.depth, "candidates_examined": self.candidates,
                "classes": len(self.subspaces),
                "ranks": [p.rank for p in self.subspaces],
                "structure": self.structure.to_dict(), "notes": self.notes}


def quantum_fragment_structure(bindings, depth: int, budget: int = 200_000,
                               tol=DEFAULT_TOL, rules=DEFAULT_RULES) -> FragmentStructure:
    """Quotient of the N/K assertive formulas over ``bindings`` up to ``depth``.

    Elementary formulas ``|-(E(x))`` have depth 1. The absurd and trivial
    classes (the bounds) are always present, so zero atoms give two classes.
    Formulas are generated from class representatives, which yields the same
    classes as generating every formula since N and K only see justification
    sets. ``budget`` caps the number of candidate formulas examined.
    """
    if depth < 0:
        raise InputError("depth must be nonnegative")
    if not bindings:
        dim = 1
        oracle = None
    else:
        oracle = QuantumOracle(bindings, tol)
        dim = oracle.dim
    bottom = Projection(np.zeros((dim, dim)), tol, check=False)
    top = Projection(np.eye(dim), tol, check=False)
    subspaces = [bottom, top]
    reps = [None, None]
    labels = ["0", "1"]

    def classify(p, formula):
        for k, q in enumerate(subspaces):
            if q.isclose(p, tol):
                return k, False
        subspaces.append(p)
        reps.append(formula)
        labels.append(af_to_text(formula))
        return len(subspaces) - 1, True

    def subspace_of(d):
        jset = rules.justification_set(d, oracle)
        if not jset.is_subspace():
            raise StructureError(f"{af_to_text(d)} has a non-subspace justification set")
        return jset.components[0] if jset.components else bottom

    candidates = 0
    if depth >= 1 and oracle is not None:
        for name in bindings:
            d = Assert(PropertyAtom(name))
            candidates += 1
            classify(subspace_of(d), d)
    for _ in range(2, depth + 1):
        pool = [d for d in reps if d is not None]
        fresh = []
        for d in pool:
            cand = [N(d)] + [K(d, e) for e in pool]
            candidates += len(cand)
            if candidates > budget:
                raise BudgetExhausted(
                    f"more than {budget} candidate formulas at depth {depth}")
            for c in cand:
                _, new = classify(subspace_of(c), c)
                if new:
                    fresh.append(c)
        if not fresh:
            break

    ortho_index = []
    for k, p in enumerate(subspaces):
        target = ortho(p)
        match = [j for j, q in enumerate(subspaces) if q.isclose(target, tol)]
        if not match:
            raise StructureError(
                f"class {labels[k]!r} has no N-complement among formulas of depth <= {depth}")
        ortho_index.append(match[0])
    order = sorted(range(len(subspaces)), key=lambda k: (subspaces[k].rank, k))
    pos = {k: i for i, k in enumerate(order)}
    subspaces = [subspaces[k] for k in order]
    leq = [[p.leq(q, tol) for q in subspaces] for p in subspaces]
    structure = OrthoStructure([labels[k] for k in order], leq,
                               [pos[ortho_index[k]] for k in order])
    return FragmentStructure(structure, subspaces, [reps[k] for k in order], candidates, depth)
