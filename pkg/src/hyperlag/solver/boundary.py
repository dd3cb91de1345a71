"""
Boundary conditions of the nodal solver.

Traction conditions add an external force to the nodal momentum balance.
Kinematic conditions (wall, prescribed velocity, symmetry, fixed point) are
linear constraints d.v_p = g on the node velocity, enforced with Lagrange
multipliers and accepted in hierarchy order: a lower rank is applied first,
ties are broken by the smallest face id. A dependent constraint that agrees
with the accepted ones is skipped; one that disagrees is relaxed if its rank
is lower priority and is an error otherwise.
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum, IntEnum
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from hyperlag.errors import BoundaryConditionError, ConfigurationError, SolverError
from hyperlag.mesh.topology import MeshTopology
from hyperlag.solver.nodal import NodalBalance, solve_2x2

logger = logging.getLogger(__name__)

DEPENDENCE_TOLERANCE = 1e-8
CONSISTENCY_TOLERANCE = 1e-9
VELOCITY_FLOOR = 1e-12

VelocityData = Union[Sequence[float], Callable[[np.ndarray, float], np.ndarray]]
TractionData = Union[Sequence[Sequence[float]], Callable[[np.ndarray, float], np.ndarray]]


class BcKind(Enum):
    """Boundary condition kinds"""
    FREE_TRACTION = "free_traction"
    PRESCRIBED_TRACTION = "prescribed_traction"
    PRESCRIBED_VELOCITY = "prescribed_velocity"
    SYMMETRY_PLANE = "symmetry_plane"
    SYMMETRY_LINE = "symmetry_line"
    FIXED_POINT = "fixed_point"
    EVOLVING_CONTACT = "evolving_contact"

    @property
    def rank(self) -> int:
        """Hierarchy rank; lower is applied first."""
        return _RANKS[self]


_RANKS = {
    BcKind.FIXED_POINT: 1,
    BcKind.EVOLVING_CONTACT: 1,
    BcKind.PRESCRIBED_VELOCITY: 2,
    BcKind.PRESCRIBED_TRACTION: 2,
    BcKind.SYMMETRY_PLANE: 3,
    BcKind.SYMMETRY_LINE: 3,
    BcKind.FREE_TRACTION: 4,
}


class ContactState(IntEnum):
    """State of an evolving contact node"""
    FREE = 0
    WALL = 1


@dataclass
class BcDescriptor:
    """One boundary condition block, attached to a face tag."""
    kind: BcKind
    velocity: Optional[VelocityData] = None
    normal_only: bool = False
    traction: Optional[TractionData] = None
    direction: Optional[Sequence[float]] = None
    wall_point: Sequence[float] = (0.0, 0.0)
    wall_normal: Optional[Sequence[float]] = None
    threshold: float = 1e-12

    def __post_init__(self):
        if isinstance(self.kind, str):
            try:
                self.kind = BcKind(self.kind)
            except ValueError as e:
                raise ConfigurationError(f"Unknown boundary condition kind '{self.kind}'") from e
        if self.kind == BcKind.PRESCRIBED_VELOCITY and self.velocity is None:
            raise ConfigurationError("prescribed_velocity needs a velocity")
        if self.kind == BcKind.PRESCRIBED_TRACTION and self.traction is None:
            raise ConfigurationError("prescribed_traction needs a traction tensor")
        if self.kind == BcKind.SYMMETRY_LINE:
            self.direction = _unit(self.direction, "symmetry_line direction")
        if self.kind == BcKind.EVOLVING_CONTACT:
            self.wall_normal = _unit(self.wall_normal, "evolving_contact wall_normal")
            self.wall_point = np.asarray(self.wall_point, dtype=float)
            if not self.threshold > 0.0:
                raise ConfigurationError(f"Contact threshold must be positive, got {self.threshold}")

    @property
    def rank(self) -> int:
        return self.kind.rank

    def velocity_at(self, x: np.ndarray, t: float) -> np.ndarray:
        """Prescribed velocity at positions (k, 2)."""
        if callable(self.velocity):
            return np.asarray(self.velocity(x, t), dtype=float).reshape(x.shape)
        return np.broadcast_to(np.asarray(self.velocity, dtype=float), x.shape)

    def traction_at(self, x: np.ndarray, t: float) -> np.ndarray:
        """Prescribed boundary stress at positions (k, 2), shape (k, 2, 2)."""
        if callable(self.traction):
            return np.asarray(self.traction(x, t), dtype=float).reshape(x.shape[:1] + (2, 2))
        return np.broadcast_to(np.asarray(self.traction, dtype=float), x.shape[:1] + (2, 2))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": self.kind.value,
            "rank": self.rank,
            "normal_only": self.normal_only,
            "velocity": "callable" if callable(self.velocity) else self.velocity,
            "traction": "callable" if callable(self.traction) else self.traction,
            "direction": None if self.direction is None else list(self.direction),
            "wall_normal": None if self.wall_normal is None else list(self.wall_normal),
            "threshold": self.threshold,
        }


FREE = BcDescriptor(BcKind.FREE_TRACTION)


def _unit(vec, what: str) -> np.ndarray:
    if vec is None:
        raise ConfigurationError(f"{what} is required")
    v = np.asarray(vec, dtype=float)
    norm = np.linalg.norm(v)
    if v.shape != (2,) or not norm > 0.0:
        raise ConfigurationError(f"{what} must be a non-zero 2-vector, got {vec}")
    return v / norm


def evolve_bc(state: ContactState, distance: float, velocity, free_velocity, wall_normal,
              dt: float, threshold: float = 1e-12) -> Tuple[ContactState, float]:
    """
    Contact state machine of one node.

    Args:
        state: current state
        distance: signed distance to the wall at t^n (positive on the body side)
        velocity: node velocity used to move the node over the step
        free_velocity: node velocity the balance gives without the wall constraint
        wall_normal: unit wall normal pointing into the body
        dt: proposed time step
        threshold: contact tolerance

    Returns:
        (new state, possibly clipped dt). A free node about to cross the wall
        gets the time step that lands it on the wall; a wall node whose free
        motion opens the gap beyond ``threshold`` within ``dt`` gets the time
        step that ends at that detachment instant.
    """
    n = np.asarray(wall_normal, dtype=float)
    if state == ContactState.FREE:
        u = -float(np.dot(velocity, n))
        if distance < threshold and u > 0.0:
            return ContactState.WALL, dt
        if u > 0.0 and dt * u - distance > threshold:
            return ContactState.FREE, distance / u
        return ContactState.FREE, dt
    w = float(np.dot(free_velocity, n))
    if w > 0.0:
        t_detach = max(threshold - distance, 0.0) / w
        if t_detach < dt:
            return ContactState.FREE, t_detach
    return ContactState.WALL, dt


@dataclass
class ConstraintRows:
    """Kinematic constraints d.v = g per constrained node, padded to S slots."""
    nodes: np.ndarray   # (nb,)
    d: np.ndarray       # (nb, S, 2)
    g: np.ndarray       # (nb, S)
    rank: np.ndarray    # (nb, S)
    active: np.ndarray  # (nb, S)

    @property
    def n_slots(self) -> int:
        return int(self.d.shape[1])


def select_constraints(rows: ConstraintRows) -> Tuple[np.ndarray, np.ndarray, np.ndarray, int]:
    """
    Accept constraints slot by slot in hierarchy order.

    Returns:
        (D (nb, 2, 2), g (nb, 2), accepted count (nb,), number of relaxed rows)

    Raises:
        BoundaryConditionError: conflicting constraints of equal rank at a node
    """
    nb = rows.nodes.shape[0]
    D = np.zeros((nb, 2, 2))
    G = np.zeros((nb, 2))
    R = np.zeros((nb, 2), dtype=np.int64)
    count = np.zeros(nb, dtype=np.int64)
    relaxed = 0
    all_nodes = np.arange(nb)

    for j in range(rows.n_slots):
        act = rows.active[:, j]
        d = rows.d[:, j]
        g = rows.g[:, j]
        r = rows.rank[:, j]
        dnorm = np.linalg.norm(d, axis=1)
        act = act & (dnorm > 0.0)

        c1 = act & (count == 1)
        d0 = D[:, 0]
        with np.errstate(invalid="ignore", divide="ignore"):
            coef = np.where(c1, np.einsum("nd,nd->n", d, d0) / np.maximum(np.einsum("nd,nd->n", d0, d0), 1e-300), 0.0)
        resid = np.linalg.norm(d - coef[:, None] * d0, axis=1)
        independent1 = resid > DEPENDENCE_TOLERANCE * dnorm

        c2 = act & (count == 2)
        det = D[:, 0, 0] * D[:, 1, 1] - D[:, 0, 1] * D[:, 1, 0]
        safe = np.where(c2, det, 1.0)
        # d = a0 D0 + a1 D1
        a0 = (d[:, 0] * D[:, 1, 1] - d[:, 1] * D[:, 1, 0]) / safe
        a1 = (D[:, 0, 0] * d[:, 1] - D[:, 0, 1] * d[:, 0]) / safe
        implied2 = a0 * G[:, 0] + a1 * G[:, 1]
        contrib = np.where(np.abs(a1) > VELOCITY_FLOOR, np.maximum(R[:, 0], R[:, 1]), R[:, 0])

        dependent = (c1 & ~independent1) | c2
        implied = np.where(c1, coef * G[:, 0], implied2)
        source_rank = np.where(c1, R[:, 0], contrib)
        consistent = np.abs(g - implied) <= CONSISTENCY_TOLERANCE * (np.abs(g) + np.abs(implied)) + VELOCITY_FLOOR
        bad = dependent & ~consistent
        conflict = bad & (source_rank >= r)
        if conflict.any():
            k = int(np.flatnonzero(conflict)[0])
            raise BoundaryConditionError(int(rows.nodes[k]),
                                         f"conflicting kinematic conditions of rank {int(r[k])} "
                                         f"(prescribed {g[k]:.6e}, implied {implied[k]:.6e})")
        relax = bad & ~conflict
        if relax.any():
            relaxed += int(relax.sum())
            logger.debug(f"Relaxed lower-priority constraints at nodes {rows.nodes[relax][:10].tolist()}")

        accept = (act & (count == 0)) | (c1 & independent1)
        idx = all_nodes[accept]
        slot = count[accept]
        D[idx, slot] = d[accept] / dnorm[accept, None]
        G[idx, slot] = g[accept] / dnorm[accept]
        R[idx, slot] = r[accept]
        count[accept] += 1
    return D, G, count, relaxed


def solve_constrained(M: np.ndarray, rhs: np.ndarray, D: np.ndarray, g: np.ndarray,
                      count: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Batched KKT solve [[M, D^T], [D, 0]] [v, lambda] = [rhs, g], unused slots padded with identity.

    Returns:
        (velocities (nb, 2), multipliers (nb, 2))
    """
    nb = M.shape[0]
    finite = np.isfinite(M).all(axis=(1, 2)) & np.isfinite(rhs).all(axis=1)
    K = np.zeros((nb, 4, 4))
    K[:, :2, :2] = np.where(finite[:, None, None], M, np.eye(2))
    b = np.zeros((nb, 4))
    b[:, :2] = np.where(finite[:, None], rhs, 0.0)
    for i in range(2):
        used = count > i
        K[:, :2, 2 + i] = np.where(used[:, None], D[:, i], 0.0)
        K[:, 2 + i, :2] = np.where(used[:, None], D[:, i], 0.0)
        K[:, 2 + i, 2 + i] = np.where(used, 0.0, 1.0)
        b[:, 2 + i] = np.where(used, g[:, i], 0.0)
    try:
        sol = np.linalg.solve(K, b[..., None])[..., 0]
    except np.linalg.LinAlgError as e:
        raise SolverError(f"Singular constrained nodal system: {e}") from e
    v = np.where(finite[:, None], sol[:, :2], np.nan)
    return v, sol[:, 2:]


class BoundaryConditions:
    """
    Boundary condition wiring of a mesh: static constraint tables built once,
    evaluated on the current node positions at each nodal solve.
    """

    AXIS, NORMAL, FIXED_DIRECTION, CONTACT = range(4)

    def __init__(self, topology: MeshTopology, descriptors: Optional[Dict[int, BcDescriptor]] = None):
        self.topology = topology
        self.descriptors: Dict[int, BcDescriptor] = dict(descriptors or {})
        known = set(topology.tags())
        for tag in self.descriptors:
            if tag not in known:
                logger.warning(f"Boundary condition for tag {tag} matches no boundary face")
        self._build()

    def descriptor(self, tag: int) -> BcDescriptor:
        return self.descriptors.get(int(tag), FREE)

    def _build(self) -> None:
        topo = self.topology
        bfaces = topo.boundary_faces
        self.traction_faces: Dict[int, List[int]] = {}
        groups: Dict[Tuple[int, int], List[int]] = {}
        for f in bfaces:
            tag = int(topo.face_tags[f])
            desc = self.descriptor(tag)
            if desc.kind == BcKind.FREE_TRACTION:
                continue
            if desc.kind == BcKind.PRESCRIBED_TRACTION:
                self.traction_faces.setdefault(tag, []).append(int(f))
                continue
            for p in topo.faces[f]:
                groups.setdefault((int(p), tag), []).append(int(f))

        contact_nodes, contact_tags = [], []
        rows = []  # (node, rank, min_face, comp, type, faces, tag, direction, contact index)
        for (p, tag), faces in groups.items():
            desc = self.descriptor(tag)
            pair = (faces + [-1, -1])[:2]
            key = (p, desc.rank, min(faces))
            if desc.kind == BcKind.FIXED_POINT or (desc.kind == BcKind.PRESCRIBED_VELOCITY and not desc.normal_only):
                for comp in range(2):
                    rows.append(key + (comp, self.AXIS, pair, tag, np.eye(2)[comp], -1))
            elif desc.kind in (BcKind.PRESCRIBED_VELOCITY, BcKind.SYMMETRY_PLANE):
                rows.append(key + (0, self.NORMAL, pair, tag, np.zeros(2), -1))
            elif desc.kind == BcKind.SYMMETRY_LINE:
                t = desc.direction
                rows.append(key + (0, self.FIXED_DIRECTION, pair, tag, np.array([-t[1], t[0]]), -1))
            elif desc.kind == BcKind.EVOLVING_CONTACT:
                rows.append(key + (0, self.CONTACT, pair, tag, np.asarray(desc.wall_normal), len(contact_nodes)))
                contact_nodes.append(p)
                contact_tags.append(tag)
        rows.sort(key=lambda r: r[:4])

        self.contact_nodes = np.asarray(contact_nodes, dtype=np.int64)
        self.contact_tags = np.asarray(contact_tags, dtype=np.int64)
        self.contact_state = np.zeros(len(contact_nodes), dtype=np.int8)

        n = len(rows)
        self._row_node = np.array([r[0] for r in rows], dtype=np.int64)
        self._row_rank = np.array([r[1] for r in rows], dtype=np.int64)
        self._row_type = np.array([r[4] for r in rows], dtype=np.int64)
        self._row_faces = np.array([r[5] for r in rows], dtype=np.int64).reshape(n, 2)
        self._row_tag = np.array([r[6] for r in rows], dtype=np.int64)
        self._row_dir = np.array([r[7] for r in rows], dtype=float).reshape(n, 2)
        self._row_contact = np.array([r[8] for r in rows], dtype=np.int64)

        self.constrained_nodes, inverse = np.unique(self._row_node, return_inverse=True)
        slot = np.zeros(n, dtype=np.int64)
        for i in range(1, n):
            slot[i] = slot[i - 1] + 1 if self._row_node[i] == self._row_node[i - 1] else 0
        self._row_index = inverse.reshape(-1)
        self._row_slot = slot
        self._n_slots = int(slot.max()) + 1 if n else 0
        logger.debug(f"Boundary conditions: {n} constraint rows on {self.constrained_nodes.size} nodes, "
                     f"{len(contact_nodes)} contact nodes, {sum(len(v) for v in self.traction_faces.values())} traction faces")

    @property
    def has_contact(self) -> bool:
        return self.contact_nodes.size > 0

    def _face_vectors(self, coords: np.ndarray, faces: np.ndarray) -> np.ndarray:
        a = coords[self.topology.faces[faces, 0]]
        b = coords[self.topology.faces[faces, 1]]
        return np.column_stack([b[:, 1] - a[:, 1], a[:, 0] - b[:, 0]])

    def traction_force(self, coords: np.ndarray, t: float) -> np.ndarray:
        """External nodal forces sum over boundary half faces of (l/2) T_bc n."""
        force = np.zeros((self.topology.n_nodes, 2))
        for tag, faces in sorted(self.traction_faces.items()):
            faces = np.asarray(faces, dtype=np.int64)
            w = 0.5 * self._face_vectors(coords, faces)
            nodes = self.topology.faces[faces]
            for end in range(2):
                T = self.descriptor(tag).traction_at(coords[nodes[:, end]], t)
                np.add.at(force, nodes[:, end], np.einsum("kij,kj->ki", T, w))
        return force

    def constraint_rows(self, coords: np.ndarray, t: float) -> ConstraintRows:
        """Evaluate every constraint row on the current configuration."""
        n = self._row_node.shape[0]
        d = self._row_dir.copy()
        normal = self._row_type == self.NORMAL
        if normal.any():
            faces = self._row_faces[normal]
            w = np.zeros((faces.shape[0], 2))
            for end in range(2):
                has = faces[:, end] >= 0
                w[has] += self._face_vectors(coords, faces[has, end])
            norm = np.linalg.norm(w, axis=1)
            d[normal] = np.where(norm[:, None] > 0.0, w / np.where(norm > 0.0, norm, 1.0)[:, None], 0.0)

        g = np.zeros(n)
        for tag in np.unique(self._row_tag):
            desc = self.descriptor(tag)
            if desc.kind != BcKind.PRESCRIBED_VELOCITY:
                continue
            sel = self._row_tag == tag
            v = desc.velocity_at(coords[self._row_node[sel]], t)
            g[sel] = np.einsum("kd,kd->k", v, d[sel])

        active = np.ones(n, dtype=bool)
        contact = self._row_contact >= 0
        active[contact] = self.contact_state[self._row_contact[contact]] == ContactState.WALL

        nb = self.constrained_nodes.shape[0]
        S = self._n_slots
        out = ConstraintRows(
            nodes=self.constrained_nodes,
            d=np.zeros((nb, S, 2)),
            g=np.zeros((nb, S)),
            rank=np.full((nb, S), 99, dtype=np.int64),
            active=np.zeros((nb, S), dtype=bool),
        )
        out.d[self._row_index, self._row_slot] = d
        out.g[self._row_index, self._row_slot] = g
        out.rank[self._row_index, self._row_slot] = self._row_rank
        out.active[self._row_index, self._row_slot] = active
        return out

    def resolve(self, balance: NodalBalance, coords: np.ndarray, t: float) -> NodalBalance:
        """
        Add boundary tractions and solve the nodal systems under the kinematic constraints.

        Fills ``velocity`` and ``free_velocity`` (the solution without constraints).
        """
        balance.external_force = self.traction_force(coords, t)
        free = solve_2x2(balance.M, balance.rhs + balance.external_force)
        balance.free_velocity = free
        velocity = free.copy()
        if self.constrained_nodes.size:
            rows = self.constraint_rows(coords, t)
            D, G, count, relaxed = select_constraints(rows)
            nodes = rows.nodes
            v, lam = solve_constrained(balance.M[nodes], (balance.rhs + balance.external_force)[nodes], D, G, count)
            velocity[nodes] = v
            balance.relaxed = relaxed
            balance.multipliers = lam
        balance.velocity = velocity
        return balance

    def contact_distance(self, coords: np.ndarray) -> np.ndarray:
        """Signed wall distance of each contact node."""
        out = np.empty(self.contact_nodes.shape[0])
        for i, (p, tag) in enumerate(zip(self.contact_nodes, self.contact_tags)):
            desc = self.descriptor(tag)
            out[i] = float(np.dot(coords[p] - desc.wall_point, desc.wall_normal))
        return out


def apply_bc(balance: NodalBalance, boundary: BoundaryConditions, coords: np.ndarray, t: float) -> np.ndarray:
    """Resolve node velocities of an assembled balance under ``boundary``."""
    return boundary.resolve(balance, coords, t).velocity


@dataclass
class ContactEvent:
    """A contact or detachment of a boundary block."""
    step: int
    time: float
    tag: int
    event: str
    nodes: List[int] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return {"step": self.step, "time": self.time, "tag": self.tag, "event": self.event, "nodes": self.nodes}


class ContactTracker:
    """
    Runs the contact state machine over all contact nodes and records events
    per boundary block: a block touches when its first node reaches the wall
    and detaches when its last node leaves it.
    """

    def __init__(self, boundary: BoundaryConditions):
        self.boundary = boundary
        self.events: List[ContactEvent] = []
        self._detached = np.zeros(boundary.contact_nodes.shape[0], dtype=bool)
        self.release = 0.0

    def begin_step(self) -> None:
        self._detached[:] = False

    def evolve(self, coords: np.ndarray, velocity: np.ndarray, free_velocity: np.ndarray,
               dt: float) -> Tuple[np.ndarray, float, bool]:
        """
        Run the state machine on a candidate step.

        Nodes that detached during the current step cannot touch again within it.
        ``release`` keeps the earliest detachment instant, relative to t^n, of a
        node leaving the wall.

        Returns:
            (proposed states, earliest landing time s/u of an approaching free
            node or inf, whether that node lands within its threshold at ``dt``)
        """
        bc = self.boundary
        distance = bc.contact_distance(coords)
        states = bc.contact_state.copy()
        landing = math.inf
        settled = True
        release = math.inf
        for i, (p, tag) in enumerate(zip(bc.contact_nodes, bc.contact_tags)):
            desc = bc.descriptor(tag)
            state, clipped = evolve_bc(ContactState(int(states[i])), distance[i], velocity[p],
                                       free_velocity[p], desc.wall_normal, dt, desc.threshold)
            if state == ContactState.WALL and self._detached[i] and states[i] == ContactState.FREE:
                continue
            if states[i] == ContactState.WALL and state == ContactState.FREE:
                release = min(release, clipped)
            states[i] = state
            u = -float(np.dot(velocity[p], desc.wall_normal))
            if state == ContactState.FREE and u > 0.0 and distance[i] >= desc.threshold:
                hit = distance[i] / u
                if hit < landing:
                    landing = hit
                    settled = abs(dt * u - distance[i]) <= desc.threshold
        self.release = release if math.isfinite(release) else 0.0
        return states, landing, settled

    def apply(self, states: np.ndarray, step: int, time: float) -> bool:
        """Commit new states, logging block-level events. Returns True when anything changed."""
        bc = self.boundary
        old = bc.contact_state
        changed = states != old
        if not changed.any():
            return False
        for i in np.flatnonzero(changed):
            logger.debug(f"Contact node {int(bc.contact_nodes[i])} -> {ContactState(int(states[i])).name} at t={time:.6e}")
        self._detached |= changed & (states == ContactState.FREE)
        for tag in np.unique(bc.contact_tags[changed]):
            sel = bc.contact_tags == tag
            was = (old[sel] == ContactState.WALL).any()
            now = (states[sel] == ContactState.WALL).any()
            nodes = bc.contact_nodes[sel & changed].tolist()
            if not was and now:
                self.events.append(ContactEvent(step, time, int(tag), "contact", nodes))
                logger.info(f"Boundary {int(tag)} in contact with the wall at t={time:.6e} (step {step})")
            elif was and not now:
                self.events.append(ContactEvent(step, time + self.release, int(tag), "detachment", nodes))
                logger.info(f"Boundary {int(tag)} detached from the wall at t={time + self.release:.6e} (step {step})")
        bc.contact_state = states.astype(np.int8)
        return True
