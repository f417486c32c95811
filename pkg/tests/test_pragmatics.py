import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from qlbridge.errors import BudgetExhausted, InputError, UnknownIdentifierError, WffSyntaxError
from qlbridge.hilbert import Projection, QuantumState, born, c2_lattice, haar_states, qubit_vectors
from qlbridge.lattice import lattice_diagnostics, order_isomorphic, powerset_structure
from qlbridge.pragmatics import (
    A, Assert, C, E, K, N, QuantumOracle, af_depth, af_to_text, analytic_disagreements,
    justify, parse_af, pragmatic_equivalent, pragmatic_preorder, quantum_fragment_structure,
    radical_truth,
)
from qlbridge.syntax import And, Implies, Not, Or, PropertyAtom

V = qubit_vectors()
P0, PP = Projection.onto(V["z0"]), Projection.onto(V["xp"])
ORACLE = QuantumOracle({"E": P0, "F": PP})
dE, dF = Assert(PropertyAtom("E")), Assert(PropertyAtom("F"))
KET = {k: QuantumState.pure(v) for k, v in V.items()}


def test_certain_truth_is_justified():
    assert justify(dE, KET["z0"], ORACLE)


def test_n_is_not_j_functional():
    one, plus = KET["z1"], KET["xp"]
    assert justify(dE, one, ORACLE) == justify(dE, plus, ORACLE) is False
    assert justify(N(dE), one, ORACLE) and not justify(N(dE), plus, ORACLE)


def test_excluded_middle_fails_at_justification_level():
    assert not justify(A(dE, N(dE)), KET["xp"], ORACLE)
    assert justify(A(dE, N(dE)), KET["z1"], ORACLE)


def test_preorder_examples():
    assert pragmatic_preorder(dE, dE, ORACLE)
    assert pragmatic_preorder(K(dE, dF), dE, ORACLE)
    assert not pragmatic_preorder(dE, K(dE, dF), ORACLE)
    assert pragmatic_equivalent(N(N(dE)), dE, ORACLE)
    # the finite point family agrees
    pts = list(KET.values())
    assert pragmatic_equivalent(N(N(dE)), dE, ORACLE, pts)


def test_c_and_e_are_global():
    # E(x) never entails F(x) as a subspace, so C is unjustified everywhere
    for s in KET.values():
        assert not justify(C(dE, dF), s, ORACLE)
        assert justify(C(K(dE, dF), dF), s, ORACLE)
        assert justify(E(dE, N(N(dE))), s, ORACLE)


def test_undefined_radicals_are_never_justified():
    compound = Assert(Or(PropertyAtom("E"), Not(PropertyAtom("E"))))
    assert not justify(compound, KET["xp"], ORACLE)
    assert justify(compound, KET["z1"], ORACLE)
    assert radical_truth(And(PropertyAtom("E"), PropertyAtom("F")), {"E": False}) is None
    assert radical_truth(Implies(PropertyAtom("E"), PropertyAtom("F")),
                         {"E": False, "F": True}) is True


def test_errors():
    with pytest.raises(UnknownIdentifierError):
        justify(Assert(PropertyAtom("G")), KET["z0"], ORACLE)
    with pytest.raises(InputError):
        quantum_fragment_structure({"E": P0}, -1)
    with pytest.raises(BudgetExhausted):
        quantum_fragment_structure({"E": P0, "F": PP}, 4, budget=10)


def test_parse_and_print():
    d = parse_af("K(|-(E(x)), N|-(F(x) | E(x)))", ORACLE.signature)
    assert d == K(dE, N(Assert(Or(PropertyAtom("F"), PropertyAtom("E")))))
    assert parse_af(af_to_text(d), ORACLE.signature) == d
    assert af_depth(d) == 3
    with pytest.raises(WffSyntaxError):
        parse_af("K(|-(E(x))", ORACLE.signature)


def test_single_atom_structure():
    fs = quantum_fragment_structure({"E": P0}, 2)
    assert len(fs.structure) == 4
    assert order_isomorphic(fs.structure, powerset_structure(2)).found


def test_two_atom_structure_matches_c2():
    fs = quantum_fragment_structure({"Z0": P0, "Xp": PP}, 3)
    assert order_isomorphic(fs.structure, c2_lattice()).found
    assert lattice_diagnostics(fs.structure).orthomodular


def test_zero_atoms_two_classes():
    fs = quantum_fragment_structure({}, 3)
    assert list(fs.structure.labels) == ["0", "1"]


def test_structure_is_deterministic():
    a = quantum_fragment_structure({"Z0": P0, "Xp": PP}, 3).to_dict()
    b = quantum_fragment_structure({"Z0": P0, "Xp": PP}, 3).to_dict()
    assert a == b


# -- invariants on sampled states ---------------------------------------------

def _formulas(base, depth):
    layer = list(base)
    out = list(base)
    for _ in range(depth):
        layer = [N(d) for d in layer] + [f(a, b) for a, b in itertools.product(layer, repeat=2)
                                          for f in (K, A)]
        out += layer[:40]
        layer = layer[:8]
    return out


STATES = haar_states(2, 200, seed=7) + list(KET.values())


def test_invariants_on_sampled_states():
    forms = _formulas([dE, dF], 2)
    assert analytic_disagreements(forms, STATES, ORACLE) == []
    for s in STATES:
        e, f = justify(dE, s, ORACLE), justify(dF, s, ORACLE)
        assert not (e and justify(N(dE), s, ORACLE))
        assert justify(K(dE, dF), s, ORACLE) == (e and f)
        assert justify(A(dE, dF), s, ORACLE) == (e or f)
        # independent route for N on atoms
        assert justify(N(dE), s, ORACLE) == (born(s, P0) <= 1e-8)


@given(st.integers(0, 2 ** 32 - 1), st.integers(2, 4))
def test_random_projections_mutual_exclusion(seed, dim):
    rng = np.random.default_rng(seed)
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    basis, _ = np.linalg.qr(z)
    k = int(rng.integers(1, dim))
    p = Projection.from_basis(basis[:, :k])
    oracle = QuantumOracle({"E": p})
    # points inside, orthogonal to, and generic relative to the range
    pts = [QuantumState.pure(basis[:, 0]), QuantumState.pure(basis[:, -1])]
    pts += haar_states(dim, 5, seed=seed)
    for s in pts:
        assert not (justify(dE, s, oracle) and justify(N(dE), s, oracle))
        assert justify(N(N(dE)), s, oracle) == justify(dE, s, oracle)
    assert analytic_disagreements([dE, N(dE), A(dE, N(dE))], pts, oracle) == []


@given(st.lists(st.sampled_from([True, False, None]), min_size=2, max_size=2),
       st.sampled_from([And, Or, Implies]))
def test_radical_t_functionality(values, op):
    assignment = {n: v for n, v in zip("EF", values) if v is not None}
    r = op(PropertyAtom("E"), PropertyAtom("F"))
    got = radical_truth(r, assignment)
    if None in values:
        assert got is None
    else:
        a, b = values
        expect = {And: a and b, Or: a or b, Implies: (not a) or b}[op]
        assert got == expect
