import pytest
from hypothesis import given, strategies as st

from gen import random_system, rng_for
from oracles import mcp_bruteforce, mgp_bruteforce
from qlbridge.cli import load_document
from qlbridge.contextuality import (
    CLASS_BOTH, CLASS_CONSISTENT, CLASS_CONTEXTUAL, CLASS_INCONCLUSIVE, CLASS_VACUOUS, Law,
    ObservableConstraintSystem, brute_force_audit, check_law, contextuality_report, mcp_solve,
    mgp_check,
)
from qlbridge.errors import InputError


def system(name):
    return ObservableConstraintSystem.from_dict(load_document(name))


MP = system("mermin_peres")
GHZ = system("ghz_mermin")
PM_LAWS = ["row1", "row2", "row3", "col1", "col2", "col3"]


def test_check_law_examples():
    law = Law("p", "k", ["a", "b", "c"], "product", target=1)
    assert check_law({"a": 1, "b": 1, "c": 1}, law)
    col3 = MP.law("col3")
    assert not check_law({"A13": 1, "A23": 1, "A33": 1}, col3, MP)
    triad = Law("t", "k", ["a", "b", "c"], "sum", target=2)
    assert check_law({"a": 1, "b": 1, "c": 0}, triad)


def test_check_law_errors():
    col3 = MP.law("col3")
    with pytest.raises(InputError):
        check_law({"A13": 1, "A23": 1}, col3, MP)
    with pytest.raises(InputError):
        check_law({"A13": 1, "A23": 1, "A33": 2}, col3, MP)


def test_mermin_peres_mcp_unsat_with_audit():
    res = mcp_solve(MP)
    assert res.status == "UNSAT" and res.assignment is None
    assert res.audit == {"total": 512, "satisfying": 0}
    total, sat, _ = mcp_bruteforce(load_document("mermin_peres"))
    assert (total, sat) == (512, 0)


def test_mermin_peres_mgp_sat():
    res = mgp_check(MP)
    assert res.status == "SAT"
    assert [p["law"] for p in res.per_law] == PM_LAWS
    doc = load_document("mermin_peres")
    assert [p["witness"] for p in res.per_law] == mgp_bruteforce(doc)
    col3 = res.per_law[-1]["witness"]
    assert col3 == {"A13": 1, "A23": 1, "A33": -1}
    for p in res.per_law:
        assert check_law(p["witness"], MP.law(p["law"]), MP)


def test_ghz():
    res = mcp_solve(GHZ)
    assert res.status == "UNSAT" and res.audit == {"total": 64, "satisfying": 0}
    assert mcp_bruteforce(load_document("ghz_mermin"))[:2] == (64, 0)
    assert mgp_check(GHZ).status == "SAT"


def test_flip_to_plus_one_gives_all_plus():
    res = mcp_solve(MP.with_target("col3", 1))
    assert res.status == "SAT"
    assert set(res.assignment.values()) == {1}


@pytest.mark.parametrize("law", PM_LAWS)
def test_every_single_flip_is_sat(law):
    flipped = MP.with_target(law, -MP.law(law).target)
    res = mcp_solve(flipped)
    assert res.status == "SAT"
    assert all(check_law(res.assignment, l, flipped) for l in flipped.laws)
    total, sat, first = mcp_bruteforce(flipped.to_dict())
    assert (total, sat) == (512, 16) and res.audit == {"total": 512, "satisfying": 16}


def test_empty_table_unsat_in_both_modes():
    s = ObservableConstraintSystem({"a": [0, 1]}, {"k": ["a"]},
                                   [Law("never", "k", ["a"], "table", allowed=[])])
    assert mcp_solve(s).status == "UNSAT"
    assert mgp_check(s).status == "UNSAT"
    assert contextuality_report(s).classification == CLASS_BOTH


def test_spin1_triads_sat():
    s = system("spin1_triads_demo")
    res = mcp_solve(s)
    assert res.status == "SAT"
    assert all(check_law(res.assignment, law, s) for law in s.laws)
    total, sat, first = mcp_bruteforce(load_document("spin1_triads_demo"))
    assert res.audit == {"total": total, "satisfying": sat} == {"total": 128, "satisfying": 8}


def test_budget_gives_inconclusive():
    res = mcp_solve(MP, budget=3)
    assert res.status == "INCONCLUSIVE"
    assert res.audit == {"total": 512, "satisfying": 0}
    assert contextuality_report(MP, budget=3).classification == CLASS_INCONCLUSIVE


def test_report_classifications():
    rep = contextuality_report(MP)
    assert rep.classification == CLASS_CONTEXTUAL
    assert [s["step"] for s in rep.steps] == ["laws", "assumption", "contradiction", "conclusion"]
    assert "0 of 512" in rep.steps[2]["text"]
    assert contextuality_report(GHZ).classification == CLASS_CONTEXTUAL
    assert contextuality_report(system("spin1_triads_demo")).classification == CLASS_CONSISTENT
    empty = ObservableConstraintSystem({"a": [1]}, {}, [])
    assert contextuality_report(empty).classification == CLASS_VACUOUS


def test_validation():
    with pytest.raises(InputError):
        ObservableConstraintSystem({"a": []}, {}, [])
    with pytest.raises(InputError):
        ObservableConstraintSystem({"a": [1, 1]}, {}, [])
    with pytest.raises(InputError):
        ObservableConstraintSystem({"a": [1]}, {"k": ["b"]}, [])
    with pytest.raises(InputError):
        ObservableConstraintSystem({"a": [1], "b": [1]}, {"k": ["a"]},
                                   [Law("L", "k", ["b"], "sum", target=1)])
    with pytest.raises(InputError):
        ObservableConstraintSystem({"a": [1]}, {"k": ["a"]},
                                   [Law("L", "k", ["a"], "table", allowed=[[5]])])
    with pytest.raises(InputError):
        Law("L", "k", ["a"], "xor", target=1)
    with pytest.raises(InputError):
        Law("L", "k", ["a"], "sum")
    with pytest.raises(InputError):
        ObservableConstraintSystem.from_dict({"observables": {}})


def test_round_trip():
    for s in (MP, GHZ, system("spin1_triads_demo")):
        again = ObservableConstraintSystem.from_dict(s.to_dict())
        assert again.to_dict() == s.to_dict()


def test_audit_limit():
    big = ObservableConstraintSystem({f"o{k}": [0, 1] for k in range(21)}, {}, [])
    assert brute_force_audit(big) is None


# -- properties on random systems -------------------------------------------------

seeds = st.integers(0, 2 ** 32 - 1)


@given(seeds)
def test_solver_agrees_with_enumeration(seed):
    s = random_system(rng_for(seed))
    doc = s.to_dict()
    total, sat, first = mcp_bruteforce(doc)
    res = mcp_solve(s)
    assert res.audit == {"total": total, "satisfying": sat}
    assert res.sat == (sat > 0)
    if res.sat:
        assert all(check_law(res.assignment, law, s) for law in s.laws)
    mgp = mgp_check(s)
    assert [p["witness"] for p in mgp.per_law] == mgp_bruteforce(doc)
    # monotonicity
    if res.sat:
        assert mgp.sat


@given(seeds)
def test_determinism(seed):
    s = random_system(rng_for(seed))
    a, b = mcp_solve(s), mcp_solve(ObservableConstraintSystem.from_dict(s.to_dict()))
    assert a.to_dict() == b.to_dict()
    assert contextuality_report(s).to_dict() == contextuality_report(s).to_dict()
