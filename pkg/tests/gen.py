"""Seeded random generators for models, formulas and constraint systems."""

import itertools
import random
from fractions import Fraction

from qlbridge.contextuality import Law, ObservableConstraintSystem
from qlbridge.probability import MuContextModel, ProcedureContexts
from qlbridge.semantics import ClassicalModel
from qlbridge.syntax import (
    And, ContextualAtom, Implies, Not, Or, PropertyAtom, Signature, StateAtom,
)


def random_weights(rng, universe):
    raw = [rng.randint(0, 4) for _ in universe]
    if sum(raw) == 0:
        raw[0] = 1
    total = sum(raw)
    return {u: Fraction(r, total) for u, r in zip(universe, raw)}


def random_model(rng, max_u=8, max_s=4, max_e=5, weighted=False):
    n_u = rng.randint(1, max_u)
    sig = Signature(states=[f"S{i}" for i in range(rng.randint(1, max_s))],
                    properties=[f"E{i}" for i in range(rng.randint(1, max_e))])
    universe = [f"u{i}" for i in range(n_u)]
    ext = {}
    for name in (*sig.states, *sig.properties):
        ext[name] = [u for u in universe if rng.random() < 0.5]
    weights = random_weights(rng, universe) if weighted else None
    return ClassicalModel(sig, universe, ext, weights)


def random_wff(rng, atoms, depth, implication=True):
    if depth <= 0 or rng.random() < 0.3:
        return rng.choice(atoms)
    kinds = [Not, And, Or] + ([Implies] if implication else [])
    kind = rng.choice(kinds)
    if kind is Not:
        return Not(random_wff(rng, atoms, depth - 1, implication))
    return kind(random_wff(rng, atoms, depth - 1, implication),
                random_wff(rng, atoms, depth - 1, implication))


def property_atoms(model):
    return [PropertyAtom(e) for e in model.signature.properties]


def all_atoms(model):
    return [StateAtom(s) for s in model.signature.states] + property_atoms(model)


def random_mu_model(rng, max_u=8, n_props=3, n_ctx=3, n_procs=2):
    """A small model where every property has one or two procedures."""
    contexts = [f"c{i}" for i in range(rng.randint(1, n_ctx))]
    procs = [f"M{i}" for i in range(rng.randint(1, n_procs))]
    props = [f"E{i}" for i in range(rng.randint(1, n_props))]
    proc_map = {e: rng.sample(procs, rng.randint(1, len(procs))) for e in props}
    sig = Signature(states=["S0", "S1"], properties=props, mu_contexts=contexts,
                    procedures=proc_map)
    universe = [f"u{i}" for i in range(rng.randint(1, max_u))]
    ext = {}
    for s in sig.states:
        ext[s] = [u for u in universe if rng.random() < 0.6]
    for e in props:
        for c in contexts:
            ext[f"{e}[{c}]"] = [u for u in universe if rng.random() < 0.5]
    base = ClassicalModel(sig, universe, ext, random_weights(rng, universe))
    pcs = {}
    used = sorted(set().union(*map(set, proc_map.values())))
    for m in used:
        cs = rng.sample(contexts, rng.randint(1, len(contexts)))
        raw = [rng.randint(1, 3) for _ in cs]
        pcs[m] = ProcedureContexts(f"C_{m}", cs, [Fraction(r, sum(raw)) for r in raw])
    return MuContextModel(base, pcs)


def contextual_atoms(model, context):
    return [ContextualAtom(e, context) for e in model.signature.properties]


def random_system(rng, max_obs=5, max_laws=4):
    """Small systems with {+1,-1} or {0,1} observables and random laws."""
    n = rng.randint(1, max_obs)
    names = [f"o{i}" for i in range(n)]
    binary = rng.random() < 0.5
    dom = [0, 1] if binary else [1, -1]
    observables = {o: dom for o in names}
    contexts, laws = {}, []
    for k in range(rng.randint(0, max_laws)):
        obs = rng.sample(names, rng.randint(1, min(3, n)))
        ctx = f"k{k}"
        contexts[ctx] = obs
        form = rng.choice(["sum" if binary else "product", "table"])
        if form == "table":
            rows = [r for r in itertools.product(dom, repeat=len(obs)) if rng.random() < 0.4]
            laws.append(Law(f"L{k}", ctx, obs, "table", allowed=rows))
        elif form == "sum":
            laws.append(Law(f"L{k}", ctx, obs, "sum", target=rng.randint(0, len(obs))))
        else:
            laws.append(Law(f"L{k}", ctx, obs, "product", target=rng.choice([1, -1])))
    return ObservableConstraintSystem(observables, contexts, laws)


def rng_for(seed):
    return random.Random(seed)
