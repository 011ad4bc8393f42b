"""Crystal lattices as periodic graphs with force-constant matrices.

A crystal is described by its quotient graph: one vertex per atom of the
unit cell and one oriented edge class per bond direction.  Edge classes are
always stored in reversal pairs ``(e, ē)`` laid out consecutively, which is
what lets :func:`serialize` emit each bond once and :func:`parse_crystal`
rebuild the identical object.

The lattice-spec document is JSON::

    {
      "name": "cubic",
      "basis": [[1, 0, 0], [0, 1, 0], [0, 0, 1]],
      "vertices": [{"id": "A", "position": [0, 0, 0], "mass": 1.0}],
      "bonds": [{"from": "A", "to": "A", "shift": [1, 0, 0],
                 "matrix": [[1, 0, 0], [0, 1, 0], [0, 0, 1]]}]
    }

``basis`` rows are the translation vectors; ``shift`` counts translations
in that basis; ``matrix`` is the force-constant matrix for the stated
orientation.  The reverse edge is generated automatically.
"""

from collections import deque
from dataclasses import dataclass
from functools import cached_property
import json

import numpy as np

SYMMETRY_TOL = 1e-12
BIORTHOGONALITY_TOL = 1e-12
ADMISSIBILITY_TOL = 1e-9


class LatticeError(ValueError):
    """A lattice-spec document or crystal violates a structural invariant."""


def _vec(values, length, what):
    try:
        out = tuple(float(v) for v in values)
    except (TypeError, ValueError):
        raise LatticeError(f"{what}: expected {length} numbers") from None
    if len(out) != length or not all(np.isfinite(out)):
        raise LatticeError(f"{what}: expected {length} finite numbers")
    return out


def _mat(values, what):
    try:
        rows = tuple(_vec(r, 3, what) for r in values)
    except TypeError:
        raise LatticeError(f"{what}: expected a 3x3 matrix") from None
    if len(rows) != 3:
        raise LatticeError(f"{what}: expected a 3x3 matrix")
    return rows


@dataclass(frozen=True)
class LatticeBasis:
    """Translation lattice L; rows of `vectors` are the basis vectors."""

    vectors: tuple

    def __post_init__(self):
        b = self.matrix
        det = np.linalg.det(b)
        if not np.isfinite(det) or abs(det) <= 1e-12 * max(np.abs(b).max(), 1e-300) ** 3:
            raise LatticeError("singular basis")
        resid = np.abs(b @ self.dual_matrix.T - np.eye(3)).max()
        if resid > BIORTHOGONALITY_TOL:
            raise LatticeError(f"dual basis not biorthogonal (residual {resid:.3g})")

    @cached_property
    def matrix(self):
        return np.array(self.vectors, dtype=float)

    @property
    def volume(self):
        return abs(float(np.linalg.det(self.matrix)))

    @cached_property
    def dual_matrix(self):
        """Rows b*_i with b_i . b*_j = delta_ij (the dual lattice L*)."""
        return np.linalg.inv(self.matrix).T

    @property
    def dual_vectors(self):
        return tuple(tuple(r) for r in self.dual_matrix)


@dataclass(frozen=True)
class VertexClass:
    id: str
    position: tuple
    mass: float


@dataclass(frozen=True)
class EdgeClass:
    origin: str
    terminus: str
    shift: tuple
    force_matrix: tuple

    @cached_property
    def matrix(self):
        return np.array(self.force_matrix, dtype=float)

    def reversed(self):
        return EdgeClass(self.terminus, self.origin,
                         tuple(-s for s in self.shift),
                         tuple(zip(*self.force_matrix)))


@dataclass(frozen=True)
class CrystalSpec:
    """Quotient graph of a crystal lattice with masses and force matrices.

    `edges` holds reversal pairs in consecutive slots: ``edges[2k+1]`` is
    the reverse of ``edges[2k]``.
    """

    name: str
    basis: LatticeBasis
    vertices: tuple
    edges: tuple

    @property
    def n(self):
        return len(self.vertices)

    @property
    def volume(self):
        return self.basis.volume

    @cached_property
    def index(self):
        return {v.id: i for i, v in enumerate(self.vertices)}

    @cached_property
    def masses(self):
        return np.array([v.mass for v in self.vertices])

    @property
    def total_mass(self):
        return float(self.masses.sum())

    @cached_property
    def positions(self):
        return np.array([v.position for v in self.vertices], dtype=float)

    @cached_property
    def origins(self):
        return np.array([self.index[e.origin] for e in self.edges], dtype=int)

    @cached_property
    def termini(self):
        return np.array([self.index[e.terminus] for e in self.edges], dtype=int)

    @cached_property
    def shifts(self):
        return np.array([e.shift for e in self.edges], dtype=int).reshape(-1, 3)

    @cached_property
    def force_matrices(self):
        return np.array([e.force_matrix for e in self.edges], dtype=float).reshape(-1, 3, 3)

    @cached_property
    def bond_vectors(self):
        """v(e) = position(te) + shift @ basis - position(oe), one row per edge."""
        pos = self.positions
        return pos[self.termini] + self.shifts @ self.basis.matrix - pos[self.origins]

    def with_force_matrices(self, matrices):
        """Copy with the force matrices replaced (no validation)."""
        edges = tuple(EdgeClass(e.origin, e.terminus, e.shift,
                                tuple(tuple(float(x) for x in row) for row in m))
                      for e, m in zip(self.edges, np.asarray(matrices)))
        return CrystalSpec(self.name, self.basis, self.vertices, edges)

    def with_masses(self, masses):
        vertices = tuple(VertexClass(v.id, v.position, float(m))
                         for v, m in zip(self.vertices, masses))
        return CrystalSpec(self.name, self.basis, vertices, self.edges)


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------

def _check_force_matrix(m, what):
    a = np.array(m, dtype=float)
    scale = np.abs(a).max()
    if np.abs(a - a.T).max() > SYMMETRY_TOL * max(scale, 1.0):
        raise LatticeError(f"{what}: force matrix is not symmetric")
    w = np.linalg.eigvalsh(0.5 * (a + a.T))
    if scale == 0 or w.min() <= 1e-12 * scale:
        raise LatticeError(f"{what}: force matrix is not positive definite")


def _check_quotient_connected(crystal):
    if crystal.n == 0:
        raise LatticeError("crystal has no vertices")
    adj = {i: set() for i in range(crystal.n)}
    for o, t in zip(crystal.origins, crystal.termini):
        adj[o].add(t)
        adj[t].add(o)
    seen = {0}
    todo = deque([0])
    while todo:
        for nb in adj[todo.popleft()]:
            if nb not in seen:
                seen.add(nb)
                todo.append(nb)
    if len(seen) != crystal.n:
        raise LatticeError("quotient graph is not connected")


def validate_structure(crystal):
    """Check the parse-time invariants; raises LatticeError on failure."""
    ids = [v.id for v in crystal.vertices]
    if len(set(ids)) != len(ids):
        raise LatticeError("duplicate vertex ids")
    for v in crystal.vertices:
        if not v.mass > 0:
            raise LatticeError(f"vertex {v.id!r}: nonpositive mass")
    frac = crystal.positions @ np.linalg.inv(crystal.basis.matrix)
    for i in range(crystal.n):
        for j in range(i):
            d = frac[i] - frac[j]
            if np.abs(d - np.round(d)).max() < 1e-9:
                raise LatticeError(
                    f"vertices {ids[j]!r} and {ids[i]!r} coincide modulo the lattice")
    if len(crystal.edges) % 2:
        raise LatticeError("edge list is not closed under reversal")
    seen = set()
    for k, e in enumerate(crystal.edges):
        for end in (e.origin, e.terminus):
            if end not in crystal.index:
                raise LatticeError(f"dangling edge endpoint {end!r}")
        _check_force_matrix(e.force_matrix, f"bond {e.origin}->{e.terminus} {e.shift}")
        if e.origin == e.terminus and not any(e.shift):
            raise LatticeError("bond joins a vertex to itself in the same cell")
        key = (e.origin, e.terminus, e.shift)
        if key in seen:
            raise LatticeError(f"bond {e.origin}->{e.terminus} {e.shift} declared twice")
        seen.add(key)
        if k % 2 == 1:
            fwd = crystal.edges[k - 1]
            rev = fwd.reversed()
            if (e.origin, e.terminus, e.shift) != (rev.origin, rev.terminus, rev.shift) \
                    or np.abs(e.matrix - fwd.matrix.T).max() > 0:
                raise LatticeError("edge list is not closed under reversal")
    if np.any(np.linalg.norm(crystal.bond_vectors, axis=1) == 0):
        raise LatticeError("bond joins a vertex to itself in the same cell")
    _check_quotient_connected(crystal)


def rotation_invariance_tensor(crystal):
    """Per-vertex tensor sum_{e in E_x} A(e)_ij v(e)_k, shape (n, 3, 3, 3)."""
    terms = np.einsum("eij,ek->eijk", crystal.force_matrices, crystal.bond_vectors)
    out = np.zeros((crystal.n, 3, 3, 3))
    np.add.at(out, crystal.origins, terms)
    return out


def validate_rotation_invariance(crystal):
    """Largest entry of the rotation-invariance tensor over all vertices.

    The crystal is admissible when this is at most ``ADMISSIBILITY_TOL``.
    """
    return float(np.abs(rotation_invariance_tensor(crystal)).max())


def is_admissible(crystal, tol=ADMISSIBILITY_TOL):
    return validate_rotation_invariance(crystal) <= tol


# ---------------------------------------------------------------------------
# document I/O
# ---------------------------------------------------------------------------

_TOP_KEYS = {"name", "basis", "vertices", "bonds"}
_VERTEX_KEYS = {"id", "position", "mass"}
_BOND_KEYS = {"from", "to", "shift", "matrix"}


def _require_keys(obj, keys, what):
    if not isinstance(obj, dict):
        raise LatticeError(f"{what}: expected an object")
    extra = set(obj) - keys
    if extra:
        raise LatticeError(f"{what}: unknown field(s) {sorted(extra)}")
    missing = keys - set(obj)
    if missing:
        raise LatticeError(f"{what}: missing field(s) {sorted(missing)}")


def _int_shift(values, what):
    try:
        out = tuple(values)
    except TypeError:
        raise LatticeError(f"{what}: shift must be 3 integers") from None
    if len(out) != 3 or not all(isinstance(s, int) and not isinstance(s, bool) for s in out):
        raise LatticeError(f"{what}: shift must be 3 integers")
    return out


def crystal_from_dict(doc):
    """Build and validate a CrystalSpec from a decoded lattice-spec document."""
    _require_keys(doc, _TOP_KEYS, "document")
    if not isinstance(doc["name"], str):
        raise LatticeError("document: name must be a string")
    basis = LatticeBasis(_mat(doc["basis"], "basis"))
    if not isinstance(doc["vertices"], list) or not isinstance(doc["bonds"], list):
        raise LatticeError("document: vertices and bonds must be lists")
    vertices = []
    for k, v in enumerate(doc["vertices"]):
        _require_keys(v, _VERTEX_KEYS, f"vertex #{k}")
        if not isinstance(v["id"], str):
            raise LatticeError(f"vertex #{k}: id must be a string")
        mass = _vec([v["mass"]], 1, f"vertex {v['id']!r} mass")[0]
        vertices.append(VertexClass(v["id"], _vec(v["position"], 3, f"vertex {v['id']!r}"), mass))
    edges = []
    for k, b in enumerate(doc["bonds"]):
        _require_keys(b, _BOND_KEYS, f"bond #{k}")
        e = EdgeClass(str(b["from"]), str(b["to"]), _int_shift(b["shift"], f"bond #{k}"),
                      _mat(b["matrix"], f"bond #{k} matrix"))
        edges.extend([e, e.reversed()])
    crystal = CrystalSpec(doc["name"], basis, tuple(vertices), tuple(edges))
    validate_structure(crystal)
    return crystal


def parse_crystal(text):
    """Parse a lattice-spec document (JSON text) into a validated CrystalSpec."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise LatticeError(f"malformed document: {exc}") from None
    return crystal_from_dict(doc)


def load_crystal(path):
    with open(path, encoding="utf-8") as fh:
        return parse_crystal(fh.read())


def crystal_to_dict(crystal):
    return {
        "name": crystal.name,
        "basis": [list(r) for r in crystal.basis.vectors],
        "vertices": [{"id": v.id, "position": list(v.position), "mass": v.mass}
                     for v in crystal.vertices],
        "bonds": [{"from": e.origin, "to": e.terminus, "shift": list(e.shift),
                   "matrix": [list(r) for r in e.force_matrix]}
                  for e in crystal.edges[0::2]],
    }


def serialize(crystal):
    """Lattice-spec document text; inverse of :func:`parse_crystal`."""
    doc = crystal_to_dict(crystal)
    one = lambda obj: json.dumps(obj, separators=(", ", ": "))
    items = lambda xs: ",\n".join("    " + one(x) for x in xs)
    return ("{\n"
            f'  "name": {one(doc["name"])},\n'
            f'  "basis": {one(doc["basis"])},\n'
            f'  "vertices": [\n{items(doc["vertices"])}\n  ],\n'
            f'  "bonds": [\n{items(doc["bonds"])}\n  ]\n'
            "}\n")


# ---------------------------------------------------------------------------
# builders
# ---------------------------------------------------------------------------

def _scalar(stiffness):
    s = float(stiffness)
    return ((s, 0.0, 0.0), (0.0, s, 0.0), (0.0, 0.0, s))


def _build(name, basis, vertices, bonds):
    edges = []
    for o, t, shift, m in bonds:
        e = EdgeClass(o, t, shift, m)
        edges.extend([e, e.reversed()])
    crystal = CrystalSpec(name, LatticeBasis(basis), tuple(vertices), tuple(edges))
    validate_structure(crystal)
    return crystal


def build_cubic(mass=1.0, stiffness=1.0):
    """Simple cubic lattice Z^3 with nearest-neighbour scalar springs.

    The quotient is the 3-bouquet graph: one vertex, three loops.
    """
    if not (mass > 0 and stiffness > 0):
        raise LatticeError("mass and stiffness must be positive")
    eye = ((1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0))
    a = _scalar(stiffness)
    bonds = [("A", "A", (1, 0, 0), a), ("A", "A", (0, 1, 0), a), ("A", "A", (0, 0, 1), a)]
    return _build("cubic", eye, [VertexClass("A", (0.0, 0.0, 0.0), float(mass))], bonds)


def build_diamond(masses=(1.0, 1.0), stiffness=1.0):
    """Diamond lattice with scalar springs on the four tetrahedral bonds.

    L is spanned by e1+e2, e2+e3, e3+e1; the second atom sits at
    (1/2, 1/2, 1/2).  The quotient graph is two vertices joined by four
    edges.
    """
    m1, m2 = masses
    if not (m1 > 0 and m2 > 0 and stiffness > 0):
        raise LatticeError("masses and stiffness must be positive")
    basis = ((1.0, 1.0, 0.0), (0.0, 1.0, 1.0), (1.0, 0.0, 1.0))
    a = _scalar(stiffness)
    # shifts chosen so the bond vectors are (1/2)(+-1, +-1, +-1) with an
    # even number of minus signs
    bonds = [("A", "B", (0, 0, 0), a),
             ("A", "B", (0, -1, 0), a),
             ("A", "B", (0, 0, -1), a),
             ("A", "B", (-1, 0, 0), a)]
    vertices = [VertexClass("A", (0.0, 0.0, 0.0), float(m1)),
                VertexClass("B", (0.5, 0.5, 0.5), float(m2))]
    return _build("diamond", basis, vertices, bonds)
