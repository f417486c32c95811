"""Regenerate the JSON fixtures bundled in src/qlbridge/fixtures."""

import json
from pathlib import Path


from qlbridge import hilbert as hb
from qlbridge.synthesis import born_model_synthesize, synthesized_lattice_spec

OUT = Path(__file__).resolve().parents[1] / "src" / "qlbridge" / "fixtures"


def write(name, doc):
    (OUT / f"{name}.json").write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def pm_square(targets=(1, 1, 1, 1, 1, -1)):
    obs = {f"A{i}{j}": [1, -1] for i in range(1, 4) for j in range(1, 4)}
    contexts, laws = {}, []
    for i in range(1, 4):
        contexts[f"row{i}"] = [f"A{i}{j}" for j in range(1, 4)]
    for j in range(1, 4):
        contexts[f"col{j}"] = [f"A{i}{j}" for i in range(1, 4)]
    for name, target in zip(contexts, targets):
        laws.append({"name": name, "context": name, "form": "product", "target": target})
    return {"observables": obs, "contexts": contexts, "laws": laws}


def ghz():
    obs = {f"{a}{k}": [1, -1] for a in "XY" for k in (1, 2, 3)}
    contexts = {"XYY": ["X1", "Y2", "Y3"], "YXY": ["Y1", "X2", "Y3"],
                "YYX": ["Y1", "Y2", "X3"], "XXX": ["X1", "X2", "X3"]}
    targets = {"XYY": 1, "YXY": 1, "YYX": 1, "XXX": -1}
    laws = [{"name": c, "context": c, "form": "product", "target": t} for c, t in targets.items()]
    return {"observables": obs, "contexts": contexts, "laws": laws}


def spin1_triads():
    # squared spin components along seven directions, three triads sharing two of them
    obs = {f"d{k}": [0, 1] for k in range(1, 8)}
    contexts = {"T1": ["d1", "d2", "d3"], "T2": ["d3", "d4", "d5"], "T3": ["d5", "d6", "d7"]}
    laws = [{"name": t, "context": t, "form": "sum", "target": 2} for t in contexts]
    return {"observables": obs, "contexts": contexts, "laws": laws}


def witness_model():
    # E1 is physically below E2 (S1 makes both certain) but not logically: u2 has E1 only
    return {
        "signature": {"states": ["S1"], "properties": ["E1", "E2"]},
        "universe": ["u1", "u2"],
        "extensions": {"S1": ["u1"], "E1": ["u1", "u2"], "E2": ["u1"]},
        "concrete_logic": {
            "candidates": ["E1(x)", "E2(x)", "~E1(x)", "~E2(x)"],
            "include": ["~E1(x)", "~E2(x)"],
            "ortho": {"E1(x)": "~E1(x)", "~E1(x)": "E1(x)",
                      "E2(x)": "~E2(x)", "~E2(x)": "E2(x)"},
        },
    }


def demo_model():
    return {
        "signature": {"states": ["S1", "S2"], "properties": ["a", "b", "c"]},
        "universe": ["u1", "u2", "u3", "u4"],
        "extensions": {"S1": ["u1", "u2"], "S2": ["u3", "u4"],
                       "a": ["u1", "u2"], "b": ["u2", "u3"], "c": ["u1", "u2", "u3"]},
        "concrete_logic": {
            "candidates": ["a(x)", "~a(x)", "b(x)", "~b(x)", "a(x) & b(x)"],
            "include": ["~a(x)", "~b(x)"],
            "ortho": {"a(x)": "~a(x)", "~a(x)": "a(x)", "b(x)": "~b(x)", "~b(x)": "b(x)"},
        },
    }


def compat_nontransitive():
    return {
        "signature": {"states": ["S"], "properties": ["E1", "E2", "E3"],
                      "mu_contexts": ["c1", "c2"],
                      "procedures": {"E1": ["M1"], "E2": ["M1", "M2"], "E3": ["M2"]}},
        "universe": ["u1", "u2", "u3", "u4"],
        "extensions": {"S": ["u1", "u2", "u3", "u4"],
                       "E1[c1]": ["u1"], "E1[c2]": ["u1", "u2"],
                       "E2[c1]": ["u1", "u2"], "E2[c2]": ["u1", "u2"],
                       "E3[c1]": ["u3"], "E3[c2]": ["u3", "u4"]},
        "contexts": {"M1": {"macro_context": "C1", "mu_contexts": ["c1"], "q": ["1"]},
                     "M2": {"macro_context": "C2", "mu_contexts": ["c2"], "q": ["1"]}},
    }


def tprime_violation():
    # E has two procedures whose averages over S differ: 1/2 via M1, 7/10 via M2
    universe = [f"u{k}" for k in range(10)]
    return {
        "signature": {"states": ["S"], "properties": ["E"], "mu_contexts": ["c1", "c2"],
                      "procedures": {"E": ["M1", "M2"]}},
        "universe": universe,
        "extensions": {"S": universe, "E[c1]": universe[:5], "E[c2]": universe[:7]},
        "contexts": {"M1": {"macro_context": "C1", "mu_contexts": ["c1"], "q": ["1"]},
                     "M2": {"macro_context": "C2", "mu_contexts": ["c2"], "q": ["1"]}},
    }


def qubit_system():
    v = hb.qubit_vectors()

    def vec(x):
        return [[float(z.real), float(z.imag)] for z in x]

    return {
        "dim": 2,
        "resolution": 1000,
        "states": {"S0": {"vector": vec(v["z0"])}, "S1": {"vector": vec(v["z1"])},
                   "Sp": {"vector": vec(v["xp"])}, "Sm": {"vector": vec(v["xm"])}},
        "properties": {"O": {"matrix": [[0, 0], [0, 0]]},
                       "Ez": {"span": [vec(v["z0"])]}, "Ezp": {"span": [vec(v["z1"])]},
                       "Ex": {"span": [vec(v["xp"])]}, "Exp": {"span": [vec(v["xm"])]},
                       "One": {"matrix": [[1, 0], [0, 1]]}},
    }


def qubit_model(resolution=4):
    doc = qubit_system()
    hs = hb.HilbertSpace(2)
    states = {k: hb.state_from_dict(s) for k, s in doc["states"].items()}
    props = {k: hb.projection_from_dict(p) for k, p in doc["properties"].items()}
    model = born_model_synthesize(hs, states, props, resolution)
    out = model.to_dict()
    out["property_lattice"] = synthesized_lattice_spec(model).to_dict()
    return out


def main():
    OUT.mkdir(exist_ok=True)
    write("mermin_peres", pm_square())
    write("ghz_mermin", ghz())
    write("spin1_triads_demo", spin1_triads())
    write("witness_model", witness_model())
    write("demo_model", demo_model())
    write("compat_nontransitive", compat_nontransitive())
    write("tprime_violation", tprime_violation())
    write("qubit_system", qubit_system())
    write("qubit_model", qubit_model())
    write("c2_lattice", hb.c2_lattice().to_dict())
    write("boolean8", hb.diagonal_lattice(3).to_dict())


if __name__ == "__main__":
    main()
