"""Classical finite-model semantics, C-truth, and the concrete logic.

An interpretation of the single variable ``x`` is just the choice of an
object of the universe, so the set of interpretations is identified with the
universe itself. Extensions are stored as integer bitmasks over the universe
(bit ``i`` is object ``universe[i]``).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

from .errors import InputError, PreconditionError, StructureError, UnknownIdentifierError
from .lattice import OrthoStructure
from .syntax import (
    ATOM_TYPES, And, ContextualAtom, Implies, Not, Or, PropertyAtom, Signature, StateAtom,
    Wff, check_signature, fragment_of, to_text,
)


def atom_from_key(key, sig: Signature):
    """Read an atom written as ``"S1"``, ``"E1"`` or ``"E1[c1]"``."""
    if isinstance(key, ATOM_TYPES):
        return key
    key = key.strip()
    if key.endswith("(x)"):
        key = key[:-3]
    if "[" in key:
        prop, _, rest = key.partition("[")
        if not rest.endswith("]"):
            raise InputError(f"bad atom key {key!r}")
        atom = ContextualAtom(prop, rest[:-1])
    elif key in sig.states:
        atom = StateAtom(key)
    elif key in sig.properties:
        atom = PropertyAtom(key)
    else:
        raise UnknownIdentifierError(key, "atom")
    check_signature(atom, sig)
    return atom


def atom_key(atom) -> str:
    return to_text(atom)[:-3]


def _as_fraction(value) -> Fraction:
    if isinstance(value, float):
        return Fraction(str(value))
    return Fraction(value)


class ClassicalModel:
    """A finite universe, atom extensions and a probability weight per object."""

    def __init__(self, signature: Signature, universe: Iterable, extensions: Mapping,
                 weights: Mapping | None = None):
        self.signature = signature
        self.universe = tuple(universe)
        if not self.universe:
            raise InputError("the universe must not be empty")
        if len(set(self.universe)) != len(self.universe):
            raise InputError("duplicate objects in the universe")
        self.index = {u: i for i, u in enumerate(self.universe)}
        self.full = (1 << len(self.universe)) - 1

        masks = {a: 0 for a in signature.atoms()}
        for key, objs in extensions.items():
            atom = atom_from_key(key, signature)
            if isinstance(objs, int):
                if objs & ~self.full or objs < 0:
                    raise InputError(f"extension of {atom_key(atom)} has bits outside the universe")
                masks[atom] = objs
                continue
            mask = 0
            for u in objs:
                if u not in self.index:
                    raise InputError(f"extension of {atom_key(atom)} names unknown object {u!r}")
                mask |= 1 << self.index[u]
            masks[atom] = mask
        self.masks = masks

        n = len(self.universe)
        if weights is None:
            self.weights = (Fraction(1, n),) * n
            self.uniform = True
        else:
            unknown = set(weights) - set(self.universe)
            if unknown:
                raise InputError(f"weights for unknown objects {sorted(map(str, unknown))}")
            ws = tuple(_as_fraction(weights.get(u, 0)) for u in self.universe)
            if any(w < 0 for w in ws):
                raise InputError("object weights must be nonnegative")
            if sum(ws) != 1:
                raise InputError(f"object weights sum to {sum(ws)}, not 1")
            self.weights = ws
            self.uniform = len(set(ws)) == 1

    def __repr__(self):
        return f"ClassicalModel({len(self.universe)} objects, {len(self.masks)} atoms)"

    def mask(self, atom) -> int:
        try:
            return self.masks[atom]
        except KeyError:
            raise UnknownIdentifierError(to_text(atom), "atom") from None

    def objects(self, mask: int) -> frozenset:
        return frozenset(u for i, u in enumerate(self.universe) if mask >> i & 1)

    def measure(self, mask: int) -> Fraction:
        if self.uniform:
            return Fraction(mask.bit_count(), len(self.universe))
        total = Fraction(0)
        while mask:
            low = mask & -mask
            total += self.weights[low.bit_length() - 1]
            mask ^= low
        return total

    @classmethod
    def from_dict(cls, doc, signature=None):
        sig = signature or Signature.from_dict(doc["signature"])
        weights = doc.get("weights")
        return cls(sig, doc["universe"], doc.get("extensions", {}), weights)

    def to_dict(self):
        ext = {}
        for atom, mask in self.masks.items():
            if mask:
                ext[atom_key(atom)] = [u for i, u in enumerate(self.universe) if mask >> i & 1]
        doc = {"signature": self.signature.to_dict(), "universe": list(self.universe),
               "extensions": ext}
        if not self.uniform:
            doc["weights"] = {u: str(w) for u, w in zip(self.universe, self.weights)}
        return doc


# -- truth ------------------------------------------------------------------

def extension_mask(w: Wff, m: ClassicalModel) -> int:
    if isinstance(w, ATOM_TYPES):
        return m.mask(w)
    if isinstance(w, Not):
        return m.full & ~extension_mask(w.arg, m)
    left = extension_mask(w.left, m)
    right = extension_mask(w.right, m)
    if isinstance(w, And):
        return left & right
    if isinstance(w, Or):
        return left | right
    if isinstance(w, Implies):
        return (m.full & ~left) | right
    raise TypeError(f"not a wff: {w!r}")


def extension(w: Wff, m: ClassicalModel) -> frozenset:
    """The set of objects satisfying ``w``."""
    return m.objects(extension_mask(w, m))


def evaluate(w: Wff, m: ClassicalModel, obj) -> bool:
    """Truth value of ``w`` under the interpretation sending ``x`` to ``obj``."""
    if obj not in m.index:
        raise InputError(f"unknown object {obj!r}")
    return bool(extension_mask(w, m) >> m.index[obj] & 1)


def logical_preorder(a: Wff, b: Wff, m: ClassicalModel) -> bool:
    return extension_mask(a, m) & ~extension_mask(b, m) == 0


def logically_equivalent(a: Wff, b: Wff, m: ClassicalModel) -> bool:
    return extension_mask(a, m) == extension_mask(b, m)


class CTruth(enum.Enum):
    CERTAINLY_TRUE = "certainly-true"
    CERTAINLY_FALSE = "certainly-false"
    INDETERMINATE = "indeterminate"
    VACUOUS = "vacuous"  # empty state: certainly true and certainly false at once


def _require_phi(w: Wff):
    if not fragment_of(w).in_phi:
        raise PreconditionError(f"{to_text(w)} contains a state symbol")


def _state_mask(state: str, m: ClassicalModel) -> int:
    if state not in m.signature.states:
        raise UnknownIdentifierError(state, "state")
    return m.masks[StateAtom(state)]


def c_truth(a: Wff, state: str, m: ClassicalModel) -> CTruth:
    _require_phi(a)
    s = _state_mask(state, m)
    ext = extension_mask(a, m)
    if s == 0:
        return CTruth.VACUOUS
    if s & ~ext == 0:
        return CTruth.CERTAINLY_TRUE
    if s & ext == 0:
        return CTruth.CERTAINLY_FALSE
    return CTruth.INDETERMINATE


def certainly_true(a: Wff, state: str, m: ClassicalModel) -> bool:
    return c_truth(a, state, m) in (CTruth.CERTAINLY_TRUE, CTruth.VACUOUS)


def certainly_false(a: Wff, state: str, m: ClassicalModel) -> bool:
    return c_truth(a, state, m) in (CTruth.CERTAINLY_FALSE, CTruth.VACUOUS)


def physical_preorder(a: Wff, b: Wff, m: ClassicalModel) -> bool:
    """``a`` precedes ``b`` iff every state making ``a`` certainly true does so for ``b``."""
    _require_phi(a)
    _require_phi(b)
    ea, eb = extension_mask(a, m), extension_mask(b, m)
    for state in m.signature.states:
        s = m.masks[StateAtom(state)]
        if s & ~ea == 0 and s & ~eb != 0:
            return False
    return True


def physically_equivalent(a: Wff, b: Wff, m: ClassicalModel) -> bool:
    return physical_preorder(a, b, m) and physical_preorder(b, a, m)


def verifiable_wffs(candidates, m: ClassicalModel, include=(), exclude=()):
    """Candidates logically equivalent to some elementary state-free formula.

    ``include``/``exclude`` override the criterion for theories whose
    testability is narrower (or wider) than this default.
    """
    elementary = {mask for atom, mask in m.masks.items() if not isinstance(atom, StateAtom)}
    include, exclude = set(include), set(exclude)
    out = []
    for w in candidates:
        _require_phi(w)
        if w in exclude:
            continue
        if w in include or extension_mask(w, m) in elementary:
            out.append(w)
    return out


@dataclass
class ConcreteLogic:
    structure: OrthoStructure
    violations: list

    @property
    def valid(self):
        return not self.violations

    def to_dict(self):
        return {"valid": self.valid, "structure": self.structure.to_dict(),
                "violations": [{"axiom": ax, "witness": list(w)} for ax, w in self.violations]}


def concrete_logic(m: ClassicalModel, phi_v, ortho) -> ConcreteLogic:
    """Verifiable formulas under the physical preorder with a supplied ortho map.

    ``ortho`` maps each formula of ``phi_v`` to a formula of ``phi_v``
    (a mapping or a callable). Axiom failures are returned, not raised.
    """
    phi_v = list(phi_v)
    pos = {}
    for i, w in enumerate(phi_v):
        _require_phi(w)
        pos.setdefault(w, i)
    get = ortho.__getitem__ if hasattr(ortho, "__getitem__") else ortho
    images = []
    for w in phi_v:
        try:
            image = get(w)
        except KeyError:
            raise StructureError(f"ortho map undefined on {to_text(w)}") from None
        if image not in pos:
            raise StructureError(f"ortho({to_text(w)}) = {to_text(image)} is not in phi_V")
        images.append(pos[image])

    masks = [extension_mask(w, m) for w in phi_v]
    states = [m.masks[StateAtom(s)] for s in m.signature.states]
    # certainly-true profile of each formula: the set of states including it
    profile = [sum(1 << k for k, s in enumerate(states) if s & ~e == 0) for e in masks]
    leq = [[p & ~q == 0 for q in profile] for p in profile]
    structure = OrthoStructure([to_text(w) for w in phi_v], leq, images)
    return ConcreteLogic(structure, structure.weak_ortho_violations())
