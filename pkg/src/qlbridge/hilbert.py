"""Projections on a finite-dimensional complex Hilbert space.

This is the reference quantum logic that the classical and pragmatic
constructions are compared against. Matrices are dense numpy arrays;
every comparison goes through an explicit tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError, InvariantError, PreconditionError, StructureError
from .lattice import OrthoStructure
from .syntax import IDENT_RE, Signature

DEFAULT_TOL = 1e-9


@dataclass(frozen=True)
class HilbertSpace:
    dim: int
    tolerance: float = DEFAULT_TOL

    def __post_init__(self):
        if self.dim < 1:
            raise InputError("dimension must be at least 1")
        if not self.tolerance > 0:
            raise InputError("tolerance must be positive")

    def zero(self):
        return Projection(np.zeros((self.dim, self.dim)), self.tolerance)

    def identity(self):
        return Projection(np.eye(self.dim), self.tolerance)

    def basis_state(self, k):
        v = np.zeros(self.dim, dtype=complex)
        v[k] = 1
        return QuantumState.pure(v, self.tolerance)


class Projection:
    """An orthogonal projection, validated as Hermitian and idempotent."""

    def __init__(self, matrix, tol=DEFAULT_TOL, *, check=True):
        mat = np.array(matrix, dtype=complex)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise InvariantError(f"projection must be a square matrix, got shape {mat.shape}")
        self.tol = tol
        if check:
            if not np.allclose(mat, mat.conj().T, atol=tol, rtol=0):
                raise InvariantError("projection is not Hermitian")
            if not np.allclose(mat @ mat, mat, atol=max(tol, 1e-12) * 10, rtol=0):
                raise InvariantError("projection is not idempotent")
        mat.setflags(write=False)
        self.matrix = mat

    @classmethod
    def onto(cls, *vectors, tol=DEFAULT_TOL):
        """Projection onto the span of the given vectors."""
        a = np.array(vectors, dtype=complex).T
        if a.ndim == 1:
            a = a[:, None]
        u, s, _ = np.linalg.svd(a, full_matrices=False)
        basis = u[:, s > tol]
        return cls(basis @ basis.conj().T, tol)

    @classmethod
    def from_basis(cls, basis, tol=DEFAULT_TOL):
        """Projection onto the span of orthonormal columns."""
        basis = np.asarray(basis, dtype=complex)
        return cls(basis @ basis.conj().T, tol, check=False)

    @property
    def dim(self):
        return self.matrix.shape[0]

    @property
    def rank(self):
        return int(round(np.trace(self.matrix).real))

    def range_basis(self):
        """Orthonormal basis (as columns) of the range."""
        vals, vecs = np.linalg.eigh(self.matrix)
        return vecs[:, vals > 0.5]

    def isclose(self, other, tol=None):
        tol = self.tol if tol is None else tol
        return self.dim == other.dim and np.allclose(self.matrix, other.matrix, atol=tol * 10, rtol=0)

    def leq(self, other, tol=None):
        """Range inclusion: ``P <= Q`` iff ``PQ = P``."""
        tol = self.tol if tol is None else tol
        return np.allclose(self.matrix @ other.matrix, self.matrix, atol=tol * 10, rtol=0)

    def __repr__(self):
        return f"Projection(dim={self.dim}, rank={self.rank})"


class QuantumState:
    """A density matrix: Hermitian, positive semidefinite, unit trace."""

    def __init__(self, density, tol=DEFAULT_TOL, *, check=True):
        rho = np.array(density, dtype=complex)
        if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
            raise InvariantError(f"density must be a square matrix, got shape {rho.shape}")
        self.tol = tol
        if check:
            if not np.allclose(rho, rho.conj().T, atol=tol, rtol=0):
                raise InvariantError("density matrix is not Hermitian")
            if abs(np.trace(rho) - 1) > tol * 10:
                raise InvariantError(f"density matrix has trace {np.trace(rho).real:.6g}, not 1")
            if np.linalg.eigvalsh((rho + rho.conj().T) / 2).min() < -tol * 10:
                raise InvariantError("density matrix is not positive semidefinite")
        rho.setflags(write=False)
        self.density = rho

    @classmethod
    def pure(cls, vector, tol=DEFAULT_TOL):
        v = np.asarray(vector, dtype=complex).ravel()
        norm = np.linalg.norm(v)
        if norm < tol:
            raise InvariantError("state vector is zero")
        v = v / norm
        return cls(np.outer(v, v.conj()), tol, check=False)

    @property
    def dim(self):
        return self.density.shape[0]

    def vector(self):
        """State vector of a pure state (phase fixed by the largest component)."""
        vals, vecs = np.linalg.eigh(self.density)
        if abs(vals[-1] - 1) > self.tol * 10:
            raise PreconditionError("state is not pure")
        v = vecs[:, -1]
        k = int(np.argmax(np.abs(v)))
        return v * (abs(v[k]) / v[k])

    def __repr__(self):
        return f"QuantumState(dim={self.dim})"


def _same_dim(p, q):
    if p.dim != q.dim:
        raise PreconditionError(f"dimension mismatch: {p.dim} vs {q.dim}")


def ortho(p: Projection) -> Projection:
    return Projection(np.eye(p.dim) - p.matrix, p.tol, check=False)


def meet(p: Projection, q: Projection) -> Projection:
    """Projection onto range(P) intersected with range(Q)."""
    _same_dim(p, q)
    tol = max(p.tol, q.tol)
    basis = p.range_basis()
    if basis.shape[1] == 0:
        return Projection(np.zeros((p.dim, p.dim)), tol, check=False)
    # vectors B c of range(P) with (I - Q) B c = 0
    residual = (np.eye(p.dim) - q.matrix) @ basis
    _, s, vh = np.linalg.svd(residual)
    s = np.concatenate([s, np.zeros(basis.shape[1] - len(s))])
    null = vh[s <= tol].conj().T
    v = basis @ null
    return Projection.from_basis(v, tol)


def join(p: Projection, q: Projection) -> Projection:
    return ortho(meet(ortho(p), ortho(q)))


def born(s: QuantumState, p: Projection) -> float:
    """Born-rule probability tr(rho P)."""
    _same_dim(s, p)
    value = float(np.real(np.trace(s.density @ p.matrix)))
    tol = max(s.tol, p.tol) * 10
    if value < -tol or value > 1 + tol:
        raise InvariantError(f"Born probability {value} outside [0, 1]")
    return min(1.0, max(0.0, value))


def haar_states(dim, count, seed=0, tol=DEFAULT_TOL):
    """``count`` Haar-random pure states (normalized complex Gaussians)."""
    rng = np.random.default_rng(seed)
    z = rng.normal(size=(count, dim)) + 1j * rng.normal(size=(count, dim))
    return [QuantumState.pure(v, tol) for v in z]


class ProjectionLattice:
    """An explicit finite family of projections containing 0 and I, closed under ortho."""

    def __init__(self, elements, labels=None, tol=DEFAULT_TOL):
        self.elements = list(elements)
        if not self.elements:
            raise StructureError("empty projection lattice")
        n = self.elements[0].dim
        for p in self.elements:
            if p.dim != n:
                raise PreconditionError("projections of different dimensions")
        self.tol = tol
        self.dim = n
        self.labels = [str(s) for s in labels] if labels is not None else \
            [f"P{i}" for i in range(len(self.elements))]
        if len(self.labels) != len(self.elements):
            raise InputError("one label per element required")
        if len(set(self.labels)) != len(self.labels):
            raise InputError("labels must be distinct")
        if self.find(HilbertSpace(n, tol).zero()) is None:
            raise StructureError("lattice does not contain the zero projection")
        if self.find(HilbertSpace(n, tol).identity()) is None:
            raise StructureError("lattice does not contain the identity")
        self.ortho_index = []
        for label, p in zip(self.labels, self.elements):
            k = self.find(ortho(p))
            if k is None:
                raise StructureError(f"lattice is not closed under ortho at {label!r}")
            self.ortho_index.append(k)
        self._order = None

    def find(self, p):
        for i, q in enumerate(self.elements):
            if q.isclose(p, self.tol):
                return i
        return None

    def __len__(self):
        return len(self.elements)

    def __getitem__(self, label):
        return self.elements[self.labels.index(label)]

    @property
    def order(self):
        if self._order is None:
            self._order = np.array([[p.leq(q, self.tol) for q in self.elements]
                                    for p in self.elements], dtype=bool)
        return self._order

    def to_ortho_structure(self) -> OrthoStructure:
        return OrthoStructure(self.labels, self.order, self.ortho_index)

    @classmethod
    def generate(cls, generators, labels=None, tol=DEFAULT_TOL, max_elements=256):
        """Close ``generators`` (plus 0 and I) under meet and ortho.

        New elements are labelled ``g<k>``; the result is ordered by rank,
        then by discovery.
        """
        generators = list(generators)
        if not generators:
            raise InputError("at least one generator is needed to fix the dimension")
        dim = generators[0].dim
        hs = HilbertSpace(dim, tol)
        labels = list(labels) if labels is not None else [f"G{i}" for i in range(len(generators))]
        found, names = [], []

        def add(p, name):
            for q in found:
                if q.isclose(p, tol):
                    return False
            if len(found) >= max_elements:
                raise StructureError(f"closure exceeds {max_elements} elements")
            found.append(p)
            names.append(name)
            return True

        add(hs.zero(), "0")
        add(hs.identity(), "1")
        for p, name in zip(generators, labels):
            add(p, name)
        counter = 0
        changed = True
        while changed:
            changed = False
            for p in list(found):
                if add(ortho(p), f"g{counter}"):
                    counter += 1
                    changed = True
            current = list(found)
            for i, p in enumerate(current):
                for q in current[i + 1:]:
                    if add(meet(p, q), f"g{counter}"):
                        counter += 1
                        changed = True
        order = sorted(range(len(found)), key=lambda k: (found[k].rank, k))
        return cls([found[k] for k in order], [names[k] for k in order], tol)

    def to_dict(self):
        return {"dim": self.dim, "tolerance": self.tol,
                "elements": [{"label": label, "matrix": encode_matrix(p.matrix)}
                             for label, p in zip(self.labels, self.elements)]}


def qubit_vectors():
    """The z and x eigenvectors of a qubit: |0>, |1>, |+>, |->."""
    r = 1 / np.sqrt(2)
    return {"z0": np.array([1, 0], complex), "z1": np.array([0, 1], complex),
            "xp": np.array([r, r], complex), "xm": np.array([r, -r], complex)}


def c2_lattice(tol=DEFAULT_TOL) -> ProjectionLattice:
    """The six-element lattice {0, |0>, |+>, |->, |1>, I} of subspaces of C^2."""
    v = qubit_vectors()
    hs = HilbertSpace(2, tol)
    elements = [hs.zero(), Projection.onto(v["z0"], tol=tol), Projection.onto(v["xp"], tol=tol),
                Projection.onto(v["xm"], tol=tol), Projection.onto(v["z1"], tol=tol), hs.identity()]
    return ProjectionLattice(elements, ["O", "Z0", "Xp", "Xm", "Z1", "I"], tol)


def diagonal_lattice(dim, tol=DEFAULT_TOL) -> ProjectionLattice:
    """All coordinate projections of C^dim: a Boolean lattice with 2^dim elements."""
    elements, labels = [], []
    for mask in range(1 << dim):
        elements.append(Projection(np.diag([(mask >> k) & 1 for k in range(dim)]), tol))
        labels.append("D" + "".join(str((mask >> k) & 1) for k in range(dim)))
    return ProjectionLattice(elements, labels, tol)


# -- export to a classical model --------------------------------------------

@dataclass
class ExportedModel:
    model: object
    phi_v: list
    ortho: dict
    state_vectors: dict


def export_classical_model(lattice: ProjectionLattice):
    """Build a classical model whose concrete logic reproduces ``lattice``.

    States are the basis vectors of the ranges of the lattice elements. Each
    state is carried by two objects; a property holds on both when the Born
    probability is 1, on neither when it is 0, and on exactly one otherwise,
    so certain truth tracks range membership. An element and its ortho get
    complementary extensions.
    """
    from .semantics import ClassicalModel
    from .syntax import PropertyAtom

    vectors = []
    for p in lattice.elements:
        for v in p.range_basis().T:
            proj = Projection.onto(v, tol=lattice.tol)
            if not any(Projection.onto(w, tol=lattice.tol).isclose(proj) for w in vectors):
                vectors.append(v)
    state_names = [f"S{i}" for i in range(len(vectors))]
    props = [label if IDENT_RE.fullmatch(label) else f"E{i}"
             for i, label in enumerate(lattice.labels)]
    sig = Signature(states=state_names, properties=props)
    universe = [f"u{i}_{k}" for i in range(len(vectors)) for k in (0, 1)]
    ext = {s: [f"u{i}_0", f"u{i}_1"] for i, s in enumerate(state_names)}
    states = [QuantumState.pure(v, lattice.tol) for v in vectors]
    for i, name in enumerate(props):
        j = lattice.ortho_index[i]
        if j < i:
            comp = set(ext[props[j]])
            ext[name] = [u for u in universe if u not in comp]
            continue
        members = []
        for k, s in enumerate(states):
            prob = born(s, lattice.elements[i])
            if prob > 1 - lattice.tol * 10:
                members += [f"u{k}_0", f"u{k}_1"]
            elif prob > lattice.tol * 10:
                members.append(f"u{k}_0")
        ext[name] = members
    model = ClassicalModel(sig, universe, ext)
    phi_v = [PropertyAtom(p) for p in props]
    ortho_map = {PropertyAtom(props[i]): PropertyAtom(props[j])
                 for i, j in enumerate(lattice.ortho_index)}
    return ExportedModel(model, phi_v, ortho_map,
                         {n: v for n, v in zip(state_names, vectors)})


# -- (de)serialization ------------------------------------------------------

def encode_matrix(mat):
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(mat)]


def decode_matrix(rows):
    """Rows of entries, each entry a number or a ``[re, im]`` pair."""
    def entry(z):
        if isinstance(z, (list, tuple)):
            if len(z) != 2:
                raise InputError(f"complex entry must be [re, im], got {z!r}")
            return complex(float(z[0]), float(z[1]))
        return complex(z)
    try:
        return np.array([[entry(z) for z in row] for row in rows], dtype=complex)
    except (TypeError, ValueError) as exc:
        raise InputError(f"bad matrix: {exc}") from None


def decode_vector(entries):
    return decode_matrix([entries])[0]


def state_from_dict(doc, tol=DEFAULT_TOL) -> QuantumState:
    if "vector" in doc:
        return QuantumState.pure(decode_vector(doc["vector"]), tol)
    if "density" in doc:
        return QuantumState(decode_matrix(doc["density"]), tol)
    raise InputError("a state needs a 'vector' or a 'density'")


def projection_from_dict(doc, tol=DEFAULT_TOL) -> Projection:
    if isinstance(doc, list):
        return Projection(decode_matrix(doc), tol)
    if "matrix" in doc:
        return Projection(decode_matrix(doc["matrix"]), tol)
    if "span" in doc:
        return Projection.onto(*[decode_vector(v) for v in doc["span"]], tol=tol)
    raise InputError("a projection needs a 'matrix' or a 'span'")


def lattice_from_dict(doc) -> ProjectionLattice:
    tol = float(doc.get("tolerance", DEFAULT_TOL))
    if "generators" in doc:
        gens = doc["generators"]
        return ProjectionLattice.generate([projection_from_dict(g, tol) for g in gens],
                                          [g.get("label", f"G{i}") for i, g in enumerate(gens)],
                                          tol)
    elements = doc["elements"]
    return ProjectionLattice([projection_from_dict(e, tol) for e in elements],
                             [e.get("label", f"P{i}") for i, e in enumerate(elements)], tol)
