import ast
import re

import pytest
from hypothesis import given, strategies as st

from qlbridge.errors import FragmentError, InputError, UnknownIdentifierError, WffSyntaxError
from qlbridge.syntax import (
    And, ContextualAtom, Fragment, Implies, Not, Or, PropertyAtom, Signature, StateAtom,
    fragment_of, parse, rebind_context, to_text,
)

SIG = Signature(states=["S1", "S2"], properties=["E1", "E2", "E3"], mu_contexts=["c1", "c2"])

classical_atoms = st.sampled_from([StateAtom("S1"), StateAtom("S2"), PropertyAtom("E1"),
                                   PropertyAtom("E2"), PropertyAtom("E3")])
contextual_atoms = st.sampled_from([StateAtom("S1"), ContextualAtom("E1", "c1"),
                                    ContextualAtom("E2", "c2"), ContextualAtom("E3", "c1")])


def trees(leaves, implication=True):
    binary = [And, Or] + ([Implies] if implication else [])
    return st.recursive(leaves, lambda sub: st.one_of(
        sub.map(Not),
        st.tuples(st.sampled_from(binary), sub, sub).map(lambda t: t[0](t[1], t[2]))),
        max_leaves=12)


def test_elementary_state():
    assert parse("S1(x)", SIG) == StateAtom("S1")


def test_contextual_conjunction():
    w = parse("E1[c1](x) & ~E2[c1](x)", SIG, Fragment.CONTEXTUAL)
    assert w == And(ContextualAtom("E1", "c1"), Not(ContextualAtom("E2", "c1")))


def test_implication_forbidden_in_contextual_alphabet():
    with pytest.raises(FragmentError):
        parse("E1[c1](x) -> E2[c1](x)", SIG, Fragment.CONTEXTUAL)
    with pytest.raises(FragmentError):
        parse("E1(x) -> E2(x)", SIG, Fragment.CONTEXTUAL)


def test_contextual_atom_forbidden_in_classical_alphabet():
    with pytest.raises(FragmentError):
        parse("E1[c1](x)", SIG)


def test_printer_examples():
    assert to_text(StateAtom("S1")) == "S1(x)"
    assert to_text(Not(PropertyAtom("E1"))) == "~E1(x)"
    w = And(PropertyAtom("E1"), Or(PropertyAtom("E2"), PropertyAtom("E3")))
    assert to_text(w) == "(E1(x) & (E2(x) | E3(x)))"


def test_precedence_and_associativity():
    assert parse("E1(x) | E2(x) & E3(x)", SIG) == Or(PropertyAtom("E1"),
                                                      And(PropertyAtom("E2"), PropertyAtom("E3")))
    assert parse("E1(x) -> E2(x) -> E3(x)", SIG) == Implies(
        Implies(PropertyAtom("E1"), PropertyAtom("E2")), PropertyAtom("E3"))
    assert parse("~E1(x) & E2(x)", SIG) == And(Not(PropertyAtom("E1")), PropertyAtom("E2"))
    assert parse("E1(x) | E2(x) -> E3(x)", SIG) == Implies(
        Or(PropertyAtom("E1"), PropertyAtom("E2")), PropertyAtom("E3"))


def test_fragment_examples():
    assert fragment_of(parse("E1(x) | E2(x)", SIG)).in_phi
    assert not fragment_of(parse("S1(x) & E1(x)", SIG)).in_phi
    info = fragment_of(parse("E1[c1](x)", SIG, Fragment.CONTEXTUAL))
    assert info.in_phi and info.contextual


def test_errors_carry_detail():
    with pytest.raises(UnknownIdentifierError) as exc:
        parse("E1(x) & E9(x)", SIG)
    assert exc.value.name == "E9"
    with pytest.raises(WffSyntaxError) as exc:
        parse("E1(x) & ", SIG)
    assert exc.value.position is not None
    with pytest.raises(WffSyntaxError):
        parse("E1(y)", SIG)


def test_rebind_context():
    w = parse("E1[c1](x) & ~E2[c1](x) | S1(x)", SIG, Fragment.CONTEXTUAL)
    moved = rebind_context(w, "c2")
    assert to_text(moved) == "((E1[c2](x) & ~E2[c2](x)) | S1(x))"


def test_signature_invariants():
    with pytest.raises(InputError):
        Signature(states=["A"], properties=["A"])
    with pytest.raises(InputError):
        Signature(properties=["E"], procedures={"E": []})
    with pytest.raises(InputError):
        Signature(properties=["E"], observables={"A": (1, 2)}, observable_tags={"E": ("A", {3})})
    sig = Signature(properties=["E"], observables={"A": (1, 2)}, observable_tags={"E": ("A", {1})})
    assert Signature.from_dict(sig.to_dict()) == sig
    assert sig.procedures["E"] == frozenset({"E"})


@given(trees(classical_atoms))
def test_round_trip_classical(w):
    assert parse(to_text(w), SIG) == w


@given(trees(contextual_atoms, implication=False))
def test_round_trip_contextual(w):
    assert parse(to_text(w), SIG, Fragment.CONTEXTUAL) == w


@given(trees(classical_atoms))
def test_fragment_soundness(w):
    def has_state(node):
        if isinstance(node, StateAtom):
            return True
        if isinstance(node, (PropertyAtom, ContextualAtom)):
            return False
        if isinstance(node, Not):
            return has_state(node.arg)
        return has_state(node.left) or has_state(node.right)
    assert fragment_of(w).in_phi == (not has_state(w))


# -- mutation fuzz against an independent recognizer -------------------------

_ALT_TOKEN = re.compile(r"\s+|->|[~&|()\[\]]|[A-Za-z][A-Za-z0-9_]*|.", re.S)


def recognizes(text):
    """Grammar membership via token rewriting and the Python expression grammar."""
    toks = [t for t in _ALT_TOKEN.findall(text) if not t.isspace()]
    out, i = [], 0
    names = set(SIG.states) | set(SIG.properties)
    while i < len(toks):
        t = toks[i]
        if re.fullmatch(r"[A-Za-z][A-Za-z0-9_]*", t):
            if toks[i + 1:i + 4] == ["(", "x", ")"] and t in names:
                out.append("A")
                i += 4
                continue
            return False
        mapping = {"~": "-", "&": "&", "|": "|", "->": ">>", "(": "(", ")": ")"}
        if t not in mapping:
            return False
        out.append(mapping[t])
        i += 1
    try:
        tree = ast.parse(" ".join(out), mode="eval")
    except SyntaxError:
        return False
    allowed = (ast.Expression, ast.BinOp, ast.UnaryOp, ast.Name, ast.USub, ast.BitAnd,
               ast.BitOr, ast.RShift, ast.Load)
    return all(isinstance(node, allowed) for node in ast.walk(tree))


@given(trees(classical_atoms), st.data())
def test_mutation_fuzz(w, data):
    text = to_text(w)
    pos = data.draw(st.integers(0, len(text)))
    op = data.draw(st.sampled_from(["delete", "insert", "replace"]))
    ch = data.draw(st.sampled_from(list("()~&|->[]x E1S2 ")))
    if op == "delete" and pos < len(text):
        mutated = text[:pos] + text[pos + 1:]
    elif op == "replace" and pos < len(text):
        mutated = text[:pos] + ch + text[pos + 1:]
    else:
        mutated = text[:pos] + ch + text[pos:]
    try:
        parsed = parse(mutated, SIG)
        accepted = True
    except InputError:
        accepted = False
    assert accepted == recognizes(mutated), mutated
    if accepted:
        assert parse(to_text(parsed), SIG) == parsed
