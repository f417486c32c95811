"""Finite preordered sets with an orthocomplement-candidate map.

Everything here is purely order theoretic: elements are indices, the order
is a boolean matrix. Projection lattices, concrete logics and pragmatic
structures are all converted to :class:`OrthoStructure` before being
diagnosed or compared.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import StructureError


class OrthoStructure:
    """A finite preorder ``leq`` on labelled elements plus a self-map ``ortho``.

    ``leq[i][j]`` is true iff element ``i`` lies below element ``j``.
    Reflexivity and transitivity are checked on construction.
    """

    def __init__(self, labels, leq, ortho, *, check=True):
        self.labels = tuple(str(s) for s in labels)
        self.leq = np.array(leq, dtype=bool)
        self.leq.setflags(write=False)
        self.ortho = tuple(int(k) for k in ortho)
        n = len(self.labels)
        if self.leq.shape != (n, n) or len(self.ortho) != n:
            raise StructureError("labels, order matrix and ortho map disagree in size")
        if any(not 0 <= k < n for k in self.ortho):
            raise StructureError("ortho map leaves the element set")
        if check:
            self._check_preorder()

    def _check_preorder(self):
        n = len(self)
        for i in range(n):
            if not self.leq[i, i]:
                raise StructureError(f"order is not reflexive at {self.labels[i]!r}")
        # i <= j and j <= k must give i <= k
        composed = (self.leq.astype(np.int64) @ self.leq.astype(np.int64)) > 0
        bad = np.argwhere(composed & ~self.leq)
        if len(bad):
            i, k = bad[0]
            j = int(np.flatnonzero(self.leq[i] & self.leq[:, k])[0])
            raise StructureError(
                "order is not transitive: "
                f"{self.labels[i]} <= {self.labels[j]} <= {self.labels[k]}")

    def __len__(self):
        return len(self.labels)

    def __repr__(self):
        return f"OrthoStructure({len(self)} elements)"

    def index(self, label):
        return self.labels.index(label)

    def equivalent(self, i, j):
        return bool(self.leq[i, j] and self.leq[j, i])

    def classes(self):
        """Equivalence classes of mutual order, each listed by index."""
        seen = set()
        out = []
        for i in range(len(self)):
            if i in seen:
                continue
            cls = [j for j in range(len(self)) if self.equivalent(i, j)]
            seen.update(cls)
            out.append(cls)
        return out

    def weak_ortho_violations(self):
        """Failures of x'' ~ x and of antitonicity, as (axiom, witness) pairs."""
        out = []
        n = len(self)
        for i in range(n):
            if not self.equivalent(self.ortho[self.ortho[i]], i):
                out.append(("involution", (self.labels[i],)))
        for i in range(n):
            for j in range(n):
                if self.leq[i, j] and not self.leq[self.ortho[j], self.ortho[i]]:
                    out.append(("antitone", (self.labels[i], self.labels[j])))
        return out

    def quotient(self):
        """Collapse mutual-order classes; the label of a class is its first member's.

        Raises :class:`StructureError` when ``ortho`` does not respect the
        equivalence, since the induced map would be ill defined.
        """
        classes = self.classes()
        owner = {}
        for c, members in enumerate(classes):
            for i in members:
                owner[i] = c
        ortho = []
        for members in classes:
            images = {owner[self.ortho[i]] for i in members}
            if len(images) != 1:
                raise StructureError(
                    f"ortho map is not constant on the class of {self.labels[members[0]]!r}")
            ortho.append(images.pop())
        reps = [members[0] for members in classes]
        leq = self.leq[np.ix_(reps, reps)]
        q = OrthoStructure([self.labels[r] for r in reps], leq, ortho, check=False)
        q.members = [[self.labels[i] for i in members] for members in classes]
        return q

    def to_dict(self):
        return {
            "labels": list(self.labels),
            "order": [[self.labels[j] for j in np.flatnonzero(self.leq[i])]
                      for i in range(len(self))],
            "ortho": {self.labels[i]: self.labels[k] for i, k in enumerate(self.ortho)},
        }


def as_structure(obj) -> OrthoStructure:
    if isinstance(obj, OrthoStructure):
        return obj
    if hasattr(obj, "to_ortho_structure"):
        return obj.to_ortho_structure()
    raise TypeError(f"cannot view {type(obj).__name__} as an order structure")


# -- lattice diagnostics ----------------------------------------------------

@dataclass
class LatticeReport:
    size: int
    classes: int
    is_lattice: bool
    lattice_witness: tuple | None = None
    orthocomplemented: bool | None = None
    ortho_witness: tuple | None = None
    orthomodular: bool | None = None
    orthomodular_witness: tuple | None = None
    distributive: bool | None = None
    distributive_witness: tuple | None = None
    distributive_failures: int | None = None
    boolean: bool | None = None
    labels: list = field(default_factory=list)

    def to_dict(self):
        d = dict(self.__dict__)
        for key, val in d.items():
            if isinstance(val, tuple):
                d[key] = list(val)
        return d


class _FiniteLattice:
    """Meet/join tables of a finite poset, or the first pair lacking one."""

    def __init__(self, poset: OrthoStructure):
        self.p = poset
        self.n = len(poset)
        leq = poset.leq
        self.witness = None
        self.meet = np.full((self.n, self.n), -1, dtype=np.int64)
        self.join = np.full((self.n, self.n), -1, dtype=np.int64)
        for a in range(self.n):
            for b in range(a, self.n):
                lower = np.flatnonzero(leq[:, a] & leq[:, b])
                glb = [c for c in lower if leq[lower, c].all()]
                upper = np.flatnonzero(leq[a, :] & leq[b, :])
                lub = [c for c in upper if leq[c, upper].all()]
                if not glb and self.witness is None:
                    self.witness = ("meet", poset.labels[a], poset.labels[b])
                if not lub and self.witness is None:
                    self.witness = ("join", poset.labels[a], poset.labels[b])
                if glb:
                    self.meet[a, b] = self.meet[b, a] = glb[0]
                if lub:
                    self.join[a, b] = self.join[b, a] = lub[0]
        bottoms = [c for c in range(self.n) if leq[c, :].all()]
        tops = [c for c in range(self.n) if leq[:, c].all()]
        if self.witness is None and not (bottoms and tops):
            self.witness = ("bound", "bottom" if not bottoms else "top")
        self.bottom = bottoms[0] if bottoms else None
        self.top = tops[0] if tops else None

    @property
    def ok(self):
        return self.witness is None


def lattice_diagnostics(obj) -> LatticeReport:
    """Check lattice-ness, orthocomplementation, orthomodularity and distributivity.

    Works on the quotient by mutual order, so preordered inputs are fine.
    Witnesses are reported with the labels of class representatives, first
    failure in index order.
    """
    s = as_structure(obj)
    q = s.quotient()
    names = q.labels
    lat = _FiniteLattice(q)
    report = LatticeReport(size=len(s), classes=len(q), is_lattice=lat.ok,
                           lattice_witness=lat.witness, labels=list(names))
    if not lat.ok:
        return report

    n, meet, join, o, leq = lat.n, lat.meet, lat.join, q.ortho, q.leq

    report.orthocomplemented = True
    for a in range(n):
        problem = None
        if o[o[a]] != a:
            problem = "involution"
        elif meet[a, o[a]] != lat.bottom or join[a, o[a]] != lat.top:
            problem = "complement"
        else:
            for b in range(n):
                if leq[a, b] and not leq[o[b], o[a]]:
                    problem = "antitone"
                    break
        if problem:
            report.orthocomplemented = False
            report.ortho_witness = (problem, names[a])
            break

    report.orthomodular = True
    for a, b in itertools.product(range(n), repeat=2):
        if leq[a, b] and join[a, meet[o[a], b]] != b:
            report.orthomodular = False
            report.orthomodular_witness = (names[a], names[b])
            break

    failures = 0
    for a, b, c in itertools.product(range(n), repeat=3):
        if meet[a, join[b, c]] != join[meet[a, b], meet[a, c]]:
            if failures == 0:
                report.distributive_witness = (names[a], names[b], names[c])
            failures += 1
    report.distributive = failures == 0
    report.distributive_failures = failures
    report.boolean = bool(report.distributive and report.orthocomplemented)
    return report


# -- isomorphism ------------------------------------------------------------

@dataclass
class IsoResult:
    mapping: dict | None
    certificate: dict | None = None

    @property
    def found(self):
        return self.mapping is not None

    def to_dict(self):
        return {"isomorphic": self.found, "mapping": self.mapping,
                "certificate": self.certificate}


def _signature(q: OrthoStructure, i):
    return int(q.leq[:, i].sum()), int(q.leq[i, :].sum())


def order_isomorphic(a, b) -> IsoResult:
    """Search an order- and ortho-preserving bijection between the quotients.

    The mapping sends class representatives of ``a`` to those of ``b``.
    When none exists the certificate names the first invariant that differs,
    or records that the exhaustive search came up empty.
    """
    qa = as_structure(a).quotient()
    qb = as_structure(b).quotient()
    if len(qa) != len(qb):
        return IsoResult(None, {"reason": "cardinality", "sizes": [len(qa), len(qb)]})
    n = len(qa)
    sig_a = [(_signature(qa, i), _signature(qa, qa.ortho[i])) for i in range(n)]
    sig_b = [(_signature(qb, j), _signature(qb, qb.ortho[j])) for j in range(n)]
    if sorted(sig_a) != sorted(sig_b):
        return IsoResult(None, {"reason": "degree-sequence",
                                "a": sorted(map(list, (s[0] for s in sig_a))),
                                "b": sorted(map(list, (s[0] for s in sig_b)))})

    candidates = [[j for j in range(n) if sig_b[j] == sig_a[i]] for i in range(n)]
    f = [-1] * n
    used = [False] * n

    def consistent(i, j):
        for k in range(i):
            fk = f[k]
            if qa.leq[i, k] != qb.leq[j, fk] or qa.leq[k, i] != qb.leq[fk, j]:
                return False
        oi = qa.ortho[i]
        if oi < i and f[oi] != qb.ortho[j]:
            return False
        if oi == i and qb.ortho[j] != j:
            return False
        for k in range(i):
            if qa.ortho[k] == i and qb.ortho[f[k]] != j:
                return False
        return True

    def search(i):
        if i == n:
            return True
        for j in candidates[i]:
            if not used[j] and consistent(i, j):
                f[i], used[j] = j, True
                if search(i + 1):
                    return True
                f[i], used[j] = -1, False
        return False

    if search(0):
        return IsoResult({qa.labels[i]: qb.labels[f[i]] for i in range(n)})
    return IsoResult(None, {"reason": "search-exhausted", "size": n})


# -- stock structures -------------------------------------------------------

def powerset_structure(n_atoms: int) -> OrthoStructure:
    """The Boolean lattice of subsets of an ``n_atoms``-element set."""
    masks = list(range(1 << n_atoms))
    full = (1 << n_atoms) - 1
    labels = ["{" + ",".join(str(k) for k in range(n_atoms) if m >> k & 1) + "}" for m in masks]
    leq = [[(x & ~y) == 0 for y in masks] for x in masks]
    return OrthoStructure(labels, leq, [full ^ m for m in masks])


def benzene_structure() -> OrthoStructure:
    """The hexagon ortholattice: 0 < a < b < 1 and 0 < b' < a' < 1."""
    labels = ["0", "a", "b", "b'", "a'", "1"]
    below = {"0": {"0"}, "a": {"0", "a"}, "b": {"0", "a", "b"}, "b'": {"0", "b'"},
             "a'": {"0", "b'", "a'"}, "1": set(labels)}
    leq = [[x in below[y] for y in labels] for x in labels]
    ortho = [labels.index(s) for s in ["1", "a'", "b'", "b", "a", "0"]]
    return OrthoStructure(labels, leq, ortho)
