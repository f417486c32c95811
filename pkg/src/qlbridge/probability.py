"""Classical probability over contextual properties and the derived Q-probability.

A :class:`MuContextModel` is a classical model whose atoms include
contextual properties ``E[c](x)``, together with, for every measurement
procedure M, the microscopic contexts underlying M and a distribution over
them. All probabilities are exact fractions; floats only appear in reports.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

import numpy as np

from .errors import (
    InputError, NotTestableError, PreconditionError, TPrimeViolation, UnknownIdentifierError,
    ZeroMeasureError,
)
from .lattice import OrthoStructure, lattice_diagnostics
from .semantics import ClassicalModel, _as_fraction, extension_mask
from .syntax import (
    And, ContextualAtom, PropertyAtom, Signature, StateAtom, Wff, atoms, rebind_context, to_text,
)

DEFAULT_TOLERANCE = 1e-9


@dataclass(frozen=True)
class ProcedureContexts:
    """Macroscopic context of a procedure, its mu-contexts and their weights."""

    macro_context: str
    contexts: tuple
    q: tuple

    def __post_init__(self):
        object.__setattr__(self, "contexts", tuple(self.contexts))
        object.__setattr__(self, "q", tuple(_as_fraction(x) for x in self.q))
        if not self.contexts:
            raise InputError(f"procedure context {self.macro_context!r} has no mu-contexts")
        if len(self.q) != len(self.contexts):
            raise InputError(f"{self.macro_context!r}: one weight per mu-context required")
        if any(x < 0 for x in self.q) or sum(self.q) != 1:
            raise InputError(f"{self.macro_context!r}: weights must be nonnegative and sum to 1")

    def items(self):
        return zip(self.contexts, self.q)


class MuContextModel:
    def __init__(self, base: ClassicalModel, procedure_contexts: Mapping,
                 tolerance: float = DEFAULT_TOLERANCE):
        self.base = base
        self.signature: Signature = base.signature
        self.tolerance = tolerance
        pcs = {}
        for proc, pc in procedure_contexts.items():
            if not isinstance(pc, ProcedureContexts):
                pc = ProcedureContexts(pc.get("macro_context", f"C_{proc}"),
                                       pc["mu_contexts"], pc["q"])
            unknown = set(pc.contexts) - set(self.signature.mu_contexts)
            if unknown:
                raise UnknownIdentifierError(sorted(unknown)[0], "mu-context")
            pcs[proc] = pc
        missing = set(self.signature.all_procedures()) - set(pcs)
        if missing:
            raise InputError(f"no mu-contexts declared for procedure {sorted(missing)[0]!r}")
        self.procedure_contexts = pcs
        self.synthesis = None

    def __repr__(self):
        return (f"MuContextModel({len(self.base.universe)} objects, "
                f"{len(self.procedure_contexts)} procedures)")

    def procedures_of(self, prop):
        try:
            return sorted(self.signature.procedures[prop])
        except KeyError:
            raise UnknownIdentifierError(prop, "property") from None

    def placeholder_context(self):
        if not self.signature.mu_contexts:
            raise PreconditionError("the model declares no mu-contexts")
        return self.signature.mu_contexts[0]

    @classmethod
    def from_dict(cls, doc):
        base = ClassicalModel.from_dict(doc)
        return cls(base, doc.get("contexts", {}), float(doc.get("tolerance", DEFAULT_TOLERANCE)))

    def to_dict(self):
        doc = self.base.to_dict()
        doc["contexts"] = {m: {"macro_context": pc.macro_context, "mu_contexts": list(pc.contexts),
                               "q": [str(x) for x in pc.q]}
                           for m, pc in self.procedure_contexts.items()}
        doc["tolerance"] = self.tolerance
        return doc


def _base(m):
    return m.base if isinstance(m, MuContextModel) else m


def measure(w: Wff, m) -> Fraction:
    base = _base(m)
    return base.measure(extension_mask(w, base))


def cond_prob(a: Wff, b: Wff, m) -> Fraction:
    """mu(ext(a) & ext(b)) / mu(ext(b)); ``b`` must have positive measure."""
    base = _base(m)
    eb = extension_mask(b, base)
    mb = base.measure(eb)
    if mb == 0:
        raise ZeroMeasureError(f"{to_text(b)} has measure zero")
    return base.measure(extension_mask(a, base) & eb) / mb


# -- testability ------------------------------------------------------------

def _properties(w: Wff):
    out = set()
    for a in atoms(w):
        if isinstance(a, ContextualAtom):
            out.add(a.prop)
        elif isinstance(a, PropertyAtom):
            out.add(a.name)
    return out


def compatibility(e: str, f: str, m: MuContextModel) -> bool:
    """Two properties are compatible iff they share a measurement procedure."""
    return bool(set(m.procedures_of(e)) & set(m.procedures_of(f)))


def compatibility_matrix(m: MuContextModel):
    props = list(m.signature.properties)
    return props, [[compatibility(e, f, m) for f in props] for e in props]


def common_procedures(w: Wff, m: MuContextModel):
    """Procedures shared by every property of ``w`` (all procedures if none occur)."""
    props = _properties(w)
    if not props:
        return sorted(m.procedure_contexts)
    shared = set.intersection(*(set(m.procedures_of(p)) for p in sorted(props)))
    return sorted(shared)


def testable(w: Wff, m: MuContextModel) -> bool:
    """One mu-context for every contextual atom, one procedure shared by every property."""
    contexts = {a.context for a in atoms(w) if isinstance(a, ContextualAtom)}
    if len(contexts) > 1:
        return False
    if not _properties(w):
        return True
    return bool(common_procedures(w, m))


def jointly_testable(a: Wff, b: Wff, m: MuContextModel) -> bool:
    return testable(And(a, b), m)


# -- mean conditional probability -------------------------------------------

@dataclass
class ProbabilityReport:
    value: Fraction
    per_procedure: dict
    spread: Fraction
    tolerance: float

    @property
    def consistent(self):
        """False when the average depends on the procedure beyond tolerance."""
        return self.spread <= self.tolerance

    def to_dict(self):
        return {"value": float(self.value), "exact": str(self.value),
                "per_procedure": {k: {"value": float(v), "exact": str(v)}
                                  for k, v in self.per_procedure.items()},
                "spread": float(self.spread), "tolerance": self.tolerance,
                "consistent": self.consistent}


def procedure_average(a: Wff, b: Wff, proc: str, m: MuContextModel) -> Fraction:
    """q-weighted average over the mu-contexts of ``proc`` of p(a@C | b@C)."""
    total = Fraction(0)
    base = m.base
    for ctx, weight in m.procedure_contexts[proc].items():
        bc = extension_mask(rebind_context(b, ctx), base)
        mb = base.measure(bc)
        if mb == 0:
            raise ZeroMeasureError(
                f"{to_text(rebind_context(b, ctx))} has measure zero (procedure {proc})")
        if weight:
            total += weight * base.measure(extension_mask(rebind_context(a, ctx), base) & bc) / mb
    return total


def mean_cond_prob(a: Wff, b: Wff, m: MuContextModel) -> ProbabilityReport:
    if not jointly_testable(a, b, m):
        raise NotTestableError(f"{to_text(a)} and {to_text(b)} are not jointly testable")
    procs = common_procedures(And(a, b), m)
    per = {proc: procedure_average(a, b, proc, m) for proc in procs}
    values = list(per.values())
    return ProbabilityReport(values[0], per, max(values) - min(values), m.tolerance)


def q_probability(prop: str, state: str, m: MuContextModel) -> Fraction:
    """Mean conditional probability of the contextual property given the state."""
    if prop not in m.signature.properties:
        raise UnknownIdentifierError(prop, "property")
    if state not in m.signature.states:
        raise UnknownIdentifierError(state, "state")
    report = mean_cond_prob(ContextualAtom(prop, m.placeholder_context()), StateAtom(state), m)
    if not report.consistent:
        raise TPrimeViolation(
            f"P_{state}({prop}) depends on the procedure (spread {float(report.spread):.3g})",
            report)
    return report.value


def q_table(m: MuContextModel, props=None, states=None):
    props = list(props or m.signature.properties)
    states = list(states or m.signature.states)
    return {(e, s): q_probability(e, s, m) for e in props for s in states}


def property_preorder(m: MuContextModel, props=None, table=None):
    """E below F iff P_S(E) <= P_S(F) for every state S."""
    props = list(props or m.signature.properties)
    table = table or q_table(m, props)
    states = m.signature.states
    return [[all(table[e, s] <= table[f, s] for s in states) for f in props] for e in props]


# -- generalized probability measure ----------------------------------------

@dataclass
class LatticeSpec:
    """Which properties form (E, <, ortho): elements, ortho map, unit, declared joins."""

    elements: list
    ortho: dict
    unit: str
    joins: list = field(default_factory=list)   # (E, F, join-of-E-and-F)

    @classmethod
    def from_dict(cls, doc):
        return cls(list(doc["elements"]), dict(doc["ortho"]), doc["unit"],
                   [tuple(j) for j in doc.get("joins", [])])

    def to_dict(self):
        return {"elements": self.elements, "ortho": self.ortho, "unit": self.unit,
                "joins": [list(j) for j in self.joins]}


@dataclass
class MeasureReport:
    passed: bool
    failures: list
    inconsistencies: list
    lattice: object

    def to_dict(self):
        return {"passed": self.passed, "failures": self.failures,
                "inconsistencies": self.inconsistencies,
                "boolean": None if self.lattice is None else self.lattice.boolean,
                "lattice": None if self.lattice is None else self.lattice.to_dict()}


def generalized_measure_check(m: MuContextModel, spec: LatticeSpec) -> MeasureReport:
    """Check that every P_S is a generalized probability measure on the declared lattice."""
    names = list(spec.elements)
    for name in names + [spec.unit] + list(spec.ortho.values()):
        if name not in m.signature.properties:
            raise UnknownIdentifierError(name, "property")
    if set(spec.ortho) != set(names) or not set(spec.ortho.values()) <= set(names):
        raise InputError("the ortho map must send every element to an element")
    table = q_table(m, names + [spec.unit] * (spec.unit not in names))
    leq = property_preorder(m, names, table)
    idx = {e: i for i, e in enumerate(names)}
    tol = m.tolerance

    inconsistencies = []
    for e in names:
        oe = spec.ortho[e]
        if spec.ortho.get(oe) != e:
            inconsistencies.append({"check": "involution", "witness": [e, oe]})
    for e in names:
        for f in names:
            if leq[idx[e]][idx[f]] and not leq[idx[spec.ortho[f]]][idx[spec.ortho[e]]]:
                inconsistencies.append({"check": "antitone", "witness": [e, f]})
    for e, f, j in spec.joins:
        if not leq[idx[e]][idx[spec.ortho[f]]]:
            inconsistencies.append({"check": "disjoint", "witness": [e, f]})
        if not (leq[idx[e]][idx[j]] and leq[idx[f]][idx[j]]):
            inconsistencies.append({"check": "upper-bound", "witness": [e, f, j]})

    failures = []
    for s in m.signature.states:
        if abs(table[spec.unit, s] - 1) > tol:
            failures.append({"check": "unit", "state": s, "witness": [spec.unit],
                             "value": float(table[spec.unit, s])})
        for e in names:
            if abs(table[spec.ortho[e], s] - (1 - table[e, s])) > tol:
                failures.append({"check": "complement", "state": s, "witness": [e, spec.ortho[e]],
                                 "value": float(table[spec.ortho[e], s])})
        for e, f, j in spec.joins:
            if abs(table[j, s] - (table[e, s] + table[f, s])) > tol:
                failures.append({"check": "additivity", "state": s, "witness": [e, f, j],
                                 "value": float(table[j, s]),
                                 "expected": float(table[e, s] + table[f, s])})

    lattice = None
    try:
        structure = OrthoStructure(names, leq, [idx[spec.ortho[e]] for e in names])
        lattice = lattice_diagnostics(structure)
    except Exception as exc:  # ill-defined ortho on classes
        inconsistencies.append({"check": "structure", "witness": [str(exc)]})
    return MeasureReport(not failures and not inconsistencies, failures, inconsistencies, lattice)


# -- conditional Q-probability ----------------------------------------------

@dataclass
class ConditionalQResult:
    value: Fraction
    comparator: Fraction | None
    comparator_kind: str | None
    meet: str | None
    per_pair: dict
    spread: Fraction

    @property
    def bayes_gap(self):
        return None if self.comparator is None else abs(self.value - self.comparator)

    def to_dict(self):
        gap = self.bayes_gap
        return {"value": float(self.value), "exact": str(self.value),
                "comparator": None if self.comparator is None else float(self.comparator),
                "comparator_kind": self.comparator_kind, "meet": self.meet,
                "bayes_gap": None if gap is None else float(gap),
                "per_pair": {k: float(v) for k, v in self.per_pair.items()},
                "spread": float(self.spread)}


def _scaled(fracs):
    """Integer numerators over a common denominator."""
    den = math.lcm(*(f.denominator for f in fracs))
    return [int(f * den) for f in fracs], den


def _two_stage(e, f, state, proc_e, proc_f, m, shared_draw):
    # exact: every weight is scaled to integers over a common denominator
    base = m.base
    n = len(base.universe)
    pc_f, pc_e = m.procedure_contexts[proc_f], m.procedure_contexts[proc_e]
    w_num, w_den = _scaled(base.weights)
    qf_num, qf_den = _scaled(pc_f.q)
    qe_num, qe_den = _scaled(pc_e.q)
    dtype = np.int64 if qf_den * w_den * qe_den * max(n, 1) < 2 ** 62 else object
    w = np.array(w_num, dtype=dtype)
    qf = np.array(qf_num, dtype=dtype)

    s_bits = _bits(base.masks[StateAtom(state)], n)
    f_sel = np.array([_bits(base.masks[ContextualAtom(f, c)], n) for c in pc_f.contexts]) & s_bits
    den = qf @ (f_sel.astype(dtype) @ w)
    if den == 0:
        raise ZeroMeasureError(f"no object in state {state} shows {f} in any mu-context")
    if shared_draw:
        e_bits = np.array([_bits(base.masks[ContextualAtom(e, c)], n) for c in pc_f.contexts])
        num = qf @ ((f_sel & e_bits).astype(dtype) @ w)
        return Fraction(int(num), int(den))
    e_bits = np.array([_bits(base.masks[ContextualAtom(e, c)], n) for c in pc_e.contexts])
    propensity = np.array(qe_num, dtype=dtype) @ e_bits.astype(dtype)
    num = qf @ (f_sel.astype(dtype) @ (w * propensity))
    return Fraction(int(num), int(den) * qe_den)


def _meet_property(e, f, m):
    props = list(m.signature.properties)
    leq = property_preorder(m, props)
    i, j = props.index(e), props.index(f)
    lower = [k for k in range(len(props)) if leq[k][i] and leq[k][j]]
    greatest = [k for k in lower if all(leq[x][k] for x in lower)]
    return props[greatest[0]] if greatest else None


def conditional_q_prob(e: str, f: str, state: str, m: MuContextModel,
                       shared_draw: bool = False) -> ConditionalQResult:
    """Probability of ``e`` after ``f`` was observed on an object prepared in ``state``.

    First stage: a mu-context C' of the F-procedure and an object in the state
    are drawn; the pair is kept when the object has F in C'. Second stage:
    a mu-context C of the E-procedure is drawn (independently, or C = C'
    with ``shared_draw``) and E is read off. The Bayes comparator is
    <p(E_C & F_C | S)> / P_S(F) when E and F are compatible, and otherwise
    P_S(meet(E, F)) / P_S(F) with the meet taken in the property preorder.
    """
    for p in (e, f):
        if p not in m.signature.properties:
            raise UnknownIdentifierError(p, "property")
    if state not in m.signature.states:
        raise UnknownIdentifierError(state, "state")
    if m.base.measure(m.base.masks[StateAtom(state)]) == 0:
        raise ZeroMeasureError(f"state {state} has measure zero")
    per = {}
    for pf in m.procedures_of(f):
        for pe in m.procedures_of(e):
            per[f"{pf}->{pe}"] = _two_stage(e, f, state, pe, pf, m, shared_draw)
    values = list(per.values())
    value = values[0]

    c0 = m.placeholder_context()
    p_f = q_probability(f, state, m)
    comparator = kind = meet_name = None
    joint = And(ContextualAtom(e, c0), ContextualAtom(f, c0))
    if jointly_testable(joint, StateAtom(state), m):
        comparator = mean_cond_prob(joint, StateAtom(state), m).value / p_f
        kind = "joint"
    else:
        meet_name = _meet_property(e, f, m)
        if meet_name is not None:
            comparator = q_probability(meet_name, state, m) / p_f
            kind = "meet"
    return ConditionalQResult(value, comparator, kind, meet_name, per,
                              max(values) - min(values))


# -- degenerate (classical) limit --------------------------------------------

def collapse_contexts(m: MuContextModel, context: str | None = None) -> MuContextModel:
    """Keep one mu-context and a single procedure shared by every property.

    Truth assignments then no longer depend on mu-contexts and every pair of
    properties is compatible.
    """
    context = context or m.placeholder_context()
    if context not in m.signature.mu_contexts:
        raise UnknownIdentifierError(context, "mu-context")
    sig = m.signature
    new_sig = Signature(states=sig.states, properties=sig.properties, mu_contexts=(context,),
                        procedures={p: frozenset({"M_all"}) for p in sig.properties},
                        observables=sig.observables,
                        observable_tags={p: t for p, t in sig.observable_tags.items()})
    masks = {}
    for atom, mask in m.base.masks.items():
        if isinstance(atom, ContextualAtom) and atom.context != context:
            continue
        masks[atom] = mask
    base = ClassicalModel(new_sig, m.base.universe, masks,
                          dict(zip(m.base.universe, m.base.weights)))
    pcs = {"M_all": ProcedureContexts("C_all", (context,), (1,))}
    return MuContextModel(base, pcs, m.tolerance)


# -- simulated mean probability measurement ---------------------------------

@dataclass
class SampleReport:
    frequency: float
    hits: int
    trials: int
    procedure: str
    expected: Fraction
    seed: int

    def to_dict(self):
        return {"frequency": self.frequency, "hits": self.hits, "trials": self.trials,
                "procedure": self.procedure, "expected": float(self.expected),
                "expected_exact": str(self.expected), "seed": self.seed}


def _bits(mask: int, n: int) -> np.ndarray:
    raw = np.frombuffer(mask.to_bytes((n + 7) // 8 or 1, "little"), dtype=np.uint8)
    return np.unpackbits(raw, bitorder="little")[:n].astype(bool)


def mean_probability_measurement(a: Wff, b: Wff, m: MuContextModel, trials: int,
                                 seed: int = 0, procedure: str | None = None,
                                 batch_size: int = 10_000) -> SampleReport:
    """Monte Carlo run of a procedure shared by ``a`` and ``b``.

    Each trial draws a mu-context from the procedure's distribution and an
    object from the weights conditioned on ``b`` in that context, and records
    whether ``a`` holds. Trials run in fixed-size batches whose generators
    are spawned from ``seed``, so the result does not depend on scheduling.
    """
    if trials < 1:
        raise PreconditionError("trials must be at least 1")
    report = mean_cond_prob(a, b, m)
    proc = procedure or next(iter(report.per_procedure))
    if proc not in report.per_procedure:
        raise PreconditionError(f"{proc} is not shared by both formulas")
    pc = m.procedure_contexts[proc]
    base = m.base
    n = len(base.universe)
    weights = np.array([float(w) for w in base.weights])
    q = np.array([float(x) for x in pc.q])
    q = q / q.sum()

    cache = {}

    def context_data(k):
        if k not in cache:
            ctx = pc.contexts[k]
            b_bits = _bits(extension_mask(rebind_context(b, ctx), base), n)
            a_bits = _bits(extension_mask(rebind_context(a, ctx), base), n)
            support = np.flatnonzero(b_bits)
            p = weights[support]
            cache[k] = (support, p / p.sum(), a_bits)
        return cache[k]

    sizes = [batch_size] * (trials // batch_size)
    if trials % batch_size:
        sizes.append(trials % batch_size)
    hits = 0
    for size, child in zip(sizes, np.random.SeedSequence(seed).spawn(len(sizes))):
        rng = np.random.default_rng(child)
        counts = np.bincount(rng.choice(len(q), size=size, p=q), minlength=len(q))
        for k in np.flatnonzero(counts):
            support, p, a_bits = context_data(int(k))
            drawn = rng.choice(support, size=int(counts[k]), p=p)
            hits += int(a_bits[drawn].sum())
    return SampleReport(hits / trials, hits, trials, proc, report.value, seed)
