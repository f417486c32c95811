"""Value assignments to observables under laws bound to measurement contexts.

Two ways of reading a law are compared. Under MCP a single assignment of
values to all observables, fixed in advance of any measurement, has to make
every law true at once. Under MGP a law only has to hold in the context
where it can be checked, so each law is satisfied on its own.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import BudgetExhausted, InputError

FORMS = ("sum", "product", "table")
AUDIT_LIMIT = 1_000_000


@dataclass(frozen=True)
class Law:
    """A constraint on the observables of one context.

    ``sum``: the values add up to ``target``; ``product``: they multiply to
    ``target``; ``table``: the value tuple is one of ``allowed``.
    """

    name: str
    context: str
    observables: tuple
    form: str
    target: int | None = None
    allowed: frozenset | None = None

    def __post_init__(self):
        object.__setattr__(self, "observables", tuple(self.observables))
        if self.form not in FORMS:
            raise InputError(f"law {self.name!r}: unknown form {self.form!r}")
        if self.form == "table":
            if self.allowed is None:
                raise InputError(f"law {self.name!r}: table form needs 'allowed'")
            rows = frozenset(tuple(r) for r in self.allowed)
            if any(len(r) != len(self.observables) for r in rows):
                raise InputError(f"law {self.name!r}: table rows must match the observables")
            object.__setattr__(self, "allowed", rows)
        elif self.target is None:
            raise InputError(f"law {self.name!r}: {self.form} form needs a target")

    def holds(self, values) -> bool:
        values = tuple(values)
        if self.form == "sum":
            return sum(values) == self.target
        if self.form == "product":
            return math.prod(values) == self.target
        return values in self.allowed

    def to_dict(self):
        doc = {"name": self.name, "context": self.context, "observables": list(self.observables),
               "form": self.form}
        if self.form == "table":
            doc["allowed"] = [list(r) for r in sorted(self.allowed)]
        else:
            doc["target"] = self.target
        return doc


class ObservableConstraintSystem:
    def __init__(self, observables, contexts, laws):
        self.observables = {name: tuple(dom) for name, dom in observables.items()}
        for name, dom in self.observables.items():
            if not dom:
                raise InputError(f"observable {name!r} has an empty domain")
            if len(set(dom)) != len(dom):
                raise InputError(f"observable {name!r} repeats a value")
        self.contexts = {name: tuple(obs) for name, obs in contexts.items()}
        for ctx, obs in self.contexts.items():
            for o in obs:
                if o not in self.observables:
                    raise InputError(f"context {ctx!r} names unknown observable {o!r}")
        self.laws = list(laws)
        names = [law.name for law in self.laws]
        if len(set(names)) != len(names):
            raise InputError("law names must be unique")
        for law in self.laws:
            if law.context not in self.contexts:
                raise InputError(f"law {law.name!r} is bound to unknown context {law.context!r}")
            outside = [o for o in law.observables if o not in self.contexts[law.context]]
            if outside:
                raise InputError(
                    f"law {law.name!r} uses {outside[0]!r}, which is not in context {law.context!r}")
            if law.form == "table":
                for row in law.allowed:
                    for o, v in zip(law.observables, row):
                        if v not in self.observables[o]:
                            raise InputError(f"law {law.name!r}: {v} is outside the domain of {o}")

    def __repr__(self):
        return (f"ObservableConstraintSystem({len(self.observables)} observables, "
                f"{len(self.laws)} laws)")

    def law(self, name) -> Law:
        for law in self.laws:
            if law.name == name:
                return law
        raise InputError(f"no law named {name!r}")

    def with_target(self, name, target) -> "ObservableConstraintSystem":
        laws = [replace(law, target=target) if law.name == name else law for law in self.laws]
        self.law(name)
        return ObservableConstraintSystem(self.observables, self.contexts, laws)

    @classmethod
    def from_dict(cls, doc):
        try:
            contexts = doc["contexts"]
            laws = []
            for i, ld in enumerate(doc.get("laws", [])):
                ctx = ld["context"]
                laws.append(Law(ld.get("name", f"law{i}"), ctx,
                                ld.get("observables", contexts.get(ctx, ())), ld["form"],
                                ld.get("target"), ld.get("allowed")))
            return cls(doc["observables"], contexts, laws)
        except KeyError as exc:
            raise InputError(f"constraint system is missing key {exc.args[0]!r}") from None

    def to_dict(self):
        return {"observables": {k: list(v) for k, v in self.observables.items()},
                "contexts": {k: list(v) for k, v in self.contexts.items()},
                "laws": [law.to_dict() for law in self.laws]}


def check_law(assignment, law: Law, system: ObservableConstraintSystem | None = None) -> bool:
    """Evaluate ``law`` on an assignment covering its observables."""
    values = []
    for o in law.observables:
        if o not in assignment:
            raise InputError(f"assignment has no value for {o!r}")
        v = assignment[o]
        if system is not None and v not in system.observables[o]:
            raise InputError(f"{v} is outside the domain of {o!r}")
        values.append(v)
    return law.holds(values)


@dataclass
class SolveResult:
    mode: str
    status: str                      # SAT, UNSAT or INCONCLUSIVE
    assignment: dict | None = None
    nodes: int = 0
    audit: dict | None = None
    per_law: list = field(default_factory=list)

    @property
    def sat(self):
        return self.status == "SAT"

    def to_dict(self):
        return {"mode": self.mode, "status": self.status, "assignment": self.assignment,
                "nodes": self.nodes, "audit": self.audit, "per_law": self.per_law}


# -- MCP: one global assignment ----------------------------------------------

def brute_force_audit(system: ObservableConstraintSystem, limit: int = AUDIT_LIMIT):
    """Count all global assignments and those satisfying every law, by enumeration."""
    names = list(system.observables)
    doms = [system.observables[o] for o in names]
    total = math.prod(len(d) for d in doms)
    if total > limit:
        return None
    grids = np.meshgrid(*[np.array(d, dtype=np.int64) for d in doms], indexing="ij")
    table = np.stack([g.ravel() for g in grids], axis=1) if names else np.zeros((1, 0), np.int64)
    col = {o: i for i, o in enumerate(names)}
    ok = np.ones(len(table), dtype=bool)
    for law in system.laws:
        vals = table[:, [col[o] for o in law.observables]]
        if law.form == "sum":
            ok &= vals.sum(axis=1) == law.target
        elif law.form == "product":
            ok &= vals.prod(axis=1) == law.target
        else:
            allowed = np.array(sorted(law.allowed), dtype=np.int64).reshape(-1, len(law.observables))
            hit = np.zeros(len(table), dtype=bool)
            for row in allowed:
                hit |= (vals == row).all(axis=1)
            ok &= hit
    return {"total": int(total), "satisfying": int(ok.sum())}


def _supported(law, var, value, domains, assigned):
    """Does some completion of ``law`` with ``var = value`` satisfy it?"""
    pools = []
    for o in law.observables:
        if o == var:
            pools.append((value,))
        elif o in assigned:
            pools.append((assigned[o],))
        else:
            pools.append(domains[o])
    return any(law.holds(t) for t in itertools.product(*pools))


def mcp_solve(system: ObservableConstraintSystem, budget: int = 1_000_000,
              audit: bool = True) -> SolveResult:
    """Search one assignment of all observables satisfying every law.

    Backtracking with forward checking; the next variable is the one with the
    fewest remaining values (ties: most laws, then declaration order) and
    values are tried in domain order. ``budget`` caps the number of value
    trials; running out gives status INCONCLUSIVE, never UNSAT.
    """
    names = list(system.observables)
    order = {o: i for i, o in enumerate(names)}
    laws_of = {o: [law for law in system.laws if o in law.observables] for o in names}
    nodes = 0

    def propagate(var, domains, assigned):
        """Prune the domains of unassigned neighbours; None on a wipe-out."""
        new = dict(domains)
        queue = [law for law in laws_of[var]]
        while queue:
            law = queue.pop(0)
            for o in law.observables:
                if o in assigned:
                    continue
                keep = tuple(v for v in new[o] if _supported(law, o, v, new, assigned))
                if not keep:
                    return None
                if len(keep) < len(new[o]):
                    new[o] = keep
                    queue.extend(l for l in laws_of[o] if l is not law and l not in queue)
        return new

    def search(domains, assigned):
        nonlocal nodes
        free = [o for o in names if o not in assigned]
        if not free:
            return dict(assigned)
        var = min(free, key=lambda o: (len(domains[o]), -len(laws_of[o]), order[o]))
        for value in domains[var]:
            nodes += 1
            if nodes > budget:
                raise BudgetExhausted(f"search budget of {budget} nodes exhausted")
            assigned[var] = value
            trial = dict(domains)
            trial[var] = (value,)
            if all(law.holds(tuple(assigned[o] for o in law.observables))
                   for law in laws_of[var] if all(o in assigned for o in law.observables)):
                pruned = propagate(var, trial, assigned)
                if pruned is not None:
                    found = search(pruned, assigned)
                    if found is not None:
                        return found
            del assigned[var]
        return None

    domains = dict(system.observables)
    # laws with no observables are constants
    if any(not law.observables and not law.holds(()) for law in system.laws):
        found = None
    else:
        try:
            found = search(domains, {})
        except BudgetExhausted:
            report = brute_force_audit(system) if audit else None
            return SolveResult("MCP", "INCONCLUSIVE", None, nodes, report)
    report = brute_force_audit(system) if audit else None
    if found is None:
        return SolveResult("MCP", "UNSAT", None, nodes, report)
    return SolveResult("MCP", "SAT", {o: found[o] for o in names}, nodes, report)


# -- MGP: each law in its own context ----------------------------------------

def mgp_check(system: ObservableConstraintSystem) -> SolveResult:
    """Find, for every law, a satisfying assignment of its context's observables."""
    per_law = []
    nodes = 0
    for law in system.laws:
        ctx = system.contexts[law.context]
        witness = None
        for values in itertools.product(*(system.observables[o] for o in ctx)):
            nodes += 1
            a = dict(zip(ctx, values))
            if law.holds(tuple(a[o] for o in law.observables)):
                witness = a
                break
        per_law.append({"law": law.name, "context": law.context,
                        "satisfiable": witness is not None, "witness": witness})
    status = "SAT" if all(p["satisfiable"] for p in per_law) else "UNSAT"
    return SolveResult("MGP", status, None, nodes, None, per_law)


# -- the proof scheme --------------------------------------------------------

CLASS_CONTEXTUAL = "contextual under R, noncontextual-value-assignable per-law under MGP"
CLASS_CONSISTENT = "no contradiction under either mode"
CLASS_VACUOUS = "vacuously satisfiable"
CLASS_BOTH = "contradiction under both modes"
CLASS_INCONCLUSIVE = "inconclusive under R (search budget exhausted)"


@dataclass
class ContextualityReport:
    classification: str
    mcp: SolveResult
    mgp: SolveResult
    steps: list

    def to_dict(self):
        return {"classification": self.classification, "mcp": self.mcp.to_dict(),
                "mgp": self.mgp.to_dict(), "steps": self.steps}


def contextuality_report(system: ObservableConstraintSystem,
                         budget: int = 1_000_000) -> ContextualityReport:
    mcp = mcp_solve(system, budget)
    mgp = mgp_check(system)
    if not system.laws:
        label = CLASS_VACUOUS
    elif mcp.status == "INCONCLUSIVE":
        label = CLASS_INCONCLUSIVE
    elif mgp.status == "UNSAT":
        label = CLASS_BOTH
    elif mcp.status == "UNSAT":
        label = CLASS_CONTEXTUAL
    else:
        label = CLASS_CONSISTENT

    laws = [f"{law.name}: {law.form} over {', '.join(law.observables)} in context {law.context}"
            + (f" = {law.target}" if law.form != "table" else f" ({len(law.allowed)} allowed tuples)")
            for law in system.laws]
    if mcp.status == "UNSAT":
        audit = mcp.audit
        clash = ("every global assignment violates some law"
                 + (f" ({audit['satisfying']} of {audit['total']} satisfy all)" if audit else ""))
    elif mcp.status == "SAT":
        clash = "a global assignment satisfies every law"
    else:
        clash = "undecided within the search budget"
    if label == CLASS_CONTEXTUAL:
        conclusion = ("values cannot be fixed independently of the context under R; "
                      "dropping R, each law holds in its own context, so no contradiction remains")
    elif label == CLASS_BOTH:
        failing = [p["law"] for p in mgp.per_law if not p["satisfiable"]]
        conclusion = f"law {failing[0]} cannot hold even in its own context"
    elif label == CLASS_INCONCLUSIVE:
        conclusion = "no conclusion"
    else:
        conclusion = "no contextuality shown"
    steps = [
        {"step": "laws", "items": laws},
        {"step": "assumption", "text": "R: each observable has one value, the same in every "
                                        "context, and every law holds for these values"},
        {"step": "contradiction", "text": clash, "mcp_status": mcp.status},
        {"step": "conclusion", "text": conclusion, "mgp_status": mgp.status},
    ]
    return ContextualityReport(label, mcp, mgp, steps)
