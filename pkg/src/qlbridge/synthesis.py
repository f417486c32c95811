"""Finite mu-context models whose Q-probabilities reproduce Born probabilities.

Each state S contributes ``resolution`` objects ``S_0 .. S_{R-1}`` of equal
weight. All properties use the same ring of mu-contexts ``c0 .. c{R-1}``
with uniform weights, and in context ``c_i`` the object ``S_j`` has E
exactly when ``(j - i) mod R < k``, where ``k/R`` is the Born probability
rounded to the grid. Every context then shows E on exactly ``k`` of the
``R`` objects of S, so the mean conditional probability is ``k/R`` exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

import numpy as np

from .errors import InputError, PreconditionError
from .hilbert import HilbertSpace, Projection, QuantumState, born
from .probability import LatticeSpec, MuContextModel, ProcedureContexts
from .semantics import ClassicalModel
from .syntax import ContextualAtom, Signature, StateAtom


class SynthesisError(PreconditionError):
    """The grid cannot represent a requested probability within tolerance."""

    def __init__(self, message, worst):
        super().__init__(message)
        self.worst = worst


@dataclass
class SynthesisInfo:
    resolution: int
    targets: dict        # (property, state) -> Born probability
    grid: dict           # (property, state) -> Fraction actually realized
    projections: dict
    complements: dict    # property -> earlier property it complements

    @property
    def deviations(self):
        return {key: abs(float(self.grid[key]) - t) for key, t in self.targets.items()}

    @property
    def max_deviation(self):
        return max(self.deviations.values(), default=0.0)

    def to_dict(self):
        return {"resolution": self.resolution, "max_deviation": self.max_deviation,
                "pairs": [{"property": e, "state": s, "born": t, "grid": str(self.grid[e, s])}
                          for (e, s), t in self.targets.items()]}


def _rotated_run(k: int, shift: int, r: int) -> int:
    """Bits ``j`` of an r-bit word with ``(j - shift) mod r < k``."""
    run = (1 << k) - 1
    if shift == 0 or k in (0, r):
        return run
    word = (1 << r) - 1
    return ((run << shift) | (run >> (r - shift))) & word


def born_model_synthesize(hs: HilbertSpace, states, properties: Mapping,
                          resolution: int, tolerance: float | None = None) -> MuContextModel:
    """Build a finite model with ``q_probability(E, S) = born(S, P_E)`` up to the grid.

    ``states`` is a mapping name -> QuantumState (a list gets names S0, S1, ...).
    A property whose projection is the complement of an earlier one gets the
    complementary extensions, so ``P_S(E) + P_S(E') = 1`` holds exactly.
    The returned model carries a :class:`SynthesisInfo` as ``.synthesis``.
    """
    if resolution < 1:
        raise InputError("resolution must be a positive integer")
    if not isinstance(states, Mapping):
        states = {f"S{i}": s for i, s in enumerate(states)}
    if not states or not properties:
        raise InputError("at least one state and one property are required")
    for name, s in states.items():
        if not isinstance(s, QuantumState) or s.dim != hs.dim:
            raise InputError(f"state {name!r} is not a state of dimension {hs.dim}")
    for name, p in properties.items():
        if not isinstance(p, Projection) or p.dim != hs.dim:
            raise InputError(f"property {name!r} is not a projection of dimension {hs.dim}")
    tol = 1.0 / resolution if tolerance is None else tolerance
    r = resolution

    state_names = list(states)
    prop_names = list(properties)
    contexts = tuple(f"c{i}" for i in range(r))
    sig = Signature(states=state_names, properties=prop_names, mu_contexts=contexts,
                    procedures={e: {f"M_{e}"} for e in prop_names})
    universe = [f"{s}_{j}" for s in state_names for j in range(r)]

    identity = np.eye(hs.dim)
    complements = {}
    for i, e in enumerate(prop_names):
        for f in prop_names[:i]:
            if f not in complements and np.allclose(
                    properties[e].matrix, identity - properties[f].matrix, atol=hs.tolerance):
                complements[e] = f
                break

    targets, grid, ks = {}, {}, {}
    for e in prop_names:
        for s in state_names:
            t = born(states[s], properties[e])
            targets[e, s] = t
            if e in complements:
                ks[e, s] = r - ks[complements[e], s]
            else:
                ks[e, s] = min(r, max(0, round(t * r)))
            grid[e, s] = Fraction(ks[e, s], r)
    info = SynthesisInfo(r, targets, grid, dict(properties), complements)
    if info.max_deviation > tol:
        worst = max(info.deviations.items(), key=lambda kv: kv[1])
        raise SynthesisError(
            f"resolution {r} misses born({worst[0][1]}, {worst[0][0]}) by {worst[1]:.3g}"
            f" (tolerance {tol:.3g})", worst)

    extensions = {}
    block = (1 << r) - 1
    for b, s in enumerate(state_names):
        extensions[StateAtom(s)] = block << (b * r)
    for e in prop_names:
        for i, c in enumerate(contexts):
            mask = 0
            for b, s in enumerate(state_names):
                mask |= _rotated_run(ks[e, s], i, r) << (b * r)
            extensions[ContextualAtom(e, c)] = mask
    base = ClassicalModel(sig, universe, extensions)
    q = (Fraction(1, r),) * r
    pcs = {f"M_{e}": ProcedureContexts(f"C_{e}", contexts, q) for e in prop_names}
    model = MuContextModel(base, pcs)
    model.synthesis = info
    return model


def synthesized_lattice_spec(model: MuContextModel) -> LatticeSpec:
    """Ortho map, unit and disjoint joins read off the projections of a synthesized model.

    The ortho partner of E is the property with projection I - P_E, the unit
    is the property with projection I, and (E, F, G) is a declared join when
    P_E P_F = 0 and P_G = P_E + P_F.
    """
    info = getattr(model, "synthesis", None)
    if info is None:
        raise PreconditionError("model was not produced by born_model_synthesize")
    projs = info.projections
    names = list(projs)
    dim = next(iter(projs.values())).dim
    tol = next(iter(projs.values())).tol
    close = lambda a, b: np.allclose(a, b, atol=tol * 10)
    ortho = {}
    for e in names:
        partner = [f for f in names if close(projs[f].matrix, np.eye(dim) - projs[e].matrix)]
        if not partner:
            raise PreconditionError(f"no orthocomplement of {e} among the properties")
        ortho[e] = partner[0]
    units = [e for e in names if close(projs[e].matrix, np.eye(dim))]
    if not units:
        raise PreconditionError("no property with the identity projection")
    joins = []
    for i, e in enumerate(names):
        for f in names[i + 1:]:
            if not close(projs[e].matrix @ projs[f].matrix, np.zeros((dim, dim))):
                continue
            total = projs[e].matrix + projs[f].matrix
            for g in names:
                if close(projs[g].matrix, total):
                    joins.append((e, f, g))
                    break
    return LatticeSpec(names, ortho, units[0], joins)
