"""Projective t-designs in dimension 4: Clifford orbits and numerical optimization.

A design is a finite set of unit vectors; quality is measured by the t-th
frame potential, whose lower bound 1/D_t is attained exactly for t-designs.
The Clifford-orbit construction starts from a product fiducial state whose
second-qubit Bloch vector satisfies r1^4 + r2^4 + r3^4 = 5/7.
"""

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DesignFormatError, InfeasibleDesignError
from .linalg import TensorSpace, symmetric_dimension, symmetric_projector

QUARTIC_SUM = 5.0 / 7.0
DEDUP_OVERLAP = 1.0 - 1e-8


@dataclass(frozen=True)
class FiducialAngles:
    alpha: float
    theta: float
    phi: float
    branch: str


@dataclass
class StateDesign:
    """K unit vectors in dimension d, stored as columns of `states` (d x K)."""

    dim: int
    t: int
    states: np.ndarray
    provenance: str = "custom"
    metadata: dict = field(default_factory=dict)

    @property
    def size(self):
        return self.states.shape[1]

    def validate(self):
        norms = np.linalg.norm(self.states, axis=0)
        bad = np.flatnonzero(np.abs(norms - 1.0) > 1e-10)
        if bad.size:
            raise DesignFormatError(f"state {bad[0]} is not unit norm")
        return self


def fiducial_angles(alpha, branch="+"):
    """Spherical angles (theta, phi) whose Bloch vector meets the quartic condition.

    cos(4 phi) = 4 alpha - 3 and
    cos(2 theta) = (alpha - 1 +/- (2/sqrt(7)) sqrt(5 - 2 alpha)) / (alpha + 1),
    for alpha in [1/2, 1].  Both sign branches satisfy
    r1^4 + r2^4 + r3^4 = 5/7.
    """
    if not 0.5 <= alpha <= 1.0:
        raise ValueError(f"alpha={alpha} outside [1/2, 1]")
    if branch not in ("+", "-"):
        raise ValueError("branch must be '+' or '-'")
    phi = math.acos(4 * alpha - 3) / 4
    sign = 1.0 if branch == "+" else -1.0
    c2t = (alpha - 1 + sign * (2 / math.sqrt(7)) * math.sqrt(5 - 2 * alpha)) / (
        alpha + 1
    )
    if not -1.0 <= c2t <= 1.0:
        # the '-' sign choice only defines an angle for alpha >= 5/7
        raise ValueError(f"branch '{branch}' undefined at alpha={alpha}")
    theta = math.acos(c2t) / 2
    return FiducialAngles(alpha=alpha, theta=theta, phi=phi, branch=branch)


def angles_to_bloch(angles):
    st, ct = math.sin(angles.theta), math.cos(angles.theta)
    return np.array([st * math.cos(angles.phi), st * math.sin(angles.phi), ct])


def bloch_to_state(r):
    """Unit Bloch vector -> qubit pure state with real non-negative |0> amplitude."""
    r = np.asarray(r, dtype=float)
    if abs(np.linalg.norm(r) - 1.0) > 1e-10:
        raise ValueError("Bloch vector must be unit norm for a pure state")
    theta = math.acos(np.clip(r[2], -1.0, 1.0))
    a0 = math.cos(theta / 2)
    a1 = math.sin(theta / 2)
    if a1 > 1e-15:
        a1 = a1 * np.exp(1j * math.atan2(r[1], r[0]))
    return np.array([a0, a1], dtype=complex)


def fiducial_bloch_second_qubit():
    """Second-qubit Bloch vector of the alpha=1 fiducial state (as printed, r1 < 0)."""
    c = math.sqrt(3.0 / 7.0)
    return np.array([-math.sqrt(0.5 - 0.5 * c), 0.0, math.sqrt(0.5 + 0.5 * c)])


def fiducial_state():
    """Product fiducial ququad whose restricted-Clifford orbit is a 4-design."""
    q1 = bloch_to_state(np.array([1.0, 1.0, 1.0]) / math.sqrt(3))
    q2 = bloch_to_state(fiducial_bloch_second_qubit())
    return np.kron(q1, q2)


def _canonical_state(v):
    pivot = v[np.argmax(np.abs(v) > 1e-8)]
    return v * (abs(pivot) / pivot)


def _state_key(v):
    return np.rint(np.stack([v.real, v.imag]) * 1e6).astype(np.int64).tobytes()


def orbit(group, psi, t=4):
    """Group orbit of |psi>, deduplicated modulo global phase."""
    psi = np.asarray(psi, dtype=complex)
    seen = {}
    for u in group:
        v = _canonical_state(u @ psi)
        seen.setdefault(_state_key(v), v)
    states = np.array(list(seen.values())).T
    return StateDesign(
        dim=psi.size,
        t=t,
        states=states,
        provenance="clifford_orbit",
        metadata={"group_order": len(group), "orbit_length": states.shape[1]},
    )


def clifford_design(restricted_group):
    """The 960-state Clifford 4-design: restricted-Clifford orbit of the fiducial state."""
    return orbit(restricted_group, fiducial_state(), t=4)


def frame_potential(design, t):
    """Phi_t = (1/K^2) sum_{j,k} |<psi_j|psi_k>|^{2t}."""
    if design.size == 0:
        raise ValueError("frame potential of an empty design")
    if t < 1:
        raise ValueError("t must be >= 1")
    G = np.abs(design.states.conj().T @ design.states) ** 2
    return float((G**t).sum()) / design.size**2


def frame_potential_gradient(states, t):
    """Conjugate (Wirtinger) gradient of Phi_t with respect to each <psi_j|.

    Columns of the result give (2t/K^2) sum_k |<psi_j|psi_k>|^{2(t-1)}
    <psi_k|psi_j> |psi_k>.
    """
    K = states.shape[1]
    G = states.conj().T @ states
    W = (np.abs(G) ** (2 * (t - 1))) * G
    return (2 * t / K**2) * (states @ W)


_sym_basis_cache = {}


def _symmetric_basis(d, t):
    """Orthonormal columns spanning the symmetric subspace of (C^d)^{x t}."""
    if (d, t) not in _sym_basis_cache:
        P, _ = symmetric_projector(TensorSpace(d, t))
        w, v = np.linalg.eigh(P)
        _sym_basis_cache[d, t] = v[:, w > 0.5]
    return _sym_basis_cache[d, t]


def moment_operator(design, t):
    """Sum_j (|psi_j><psi_j|)^{x t} and its symmetric-subspace eigenvalue ratio.

    Returns (M, ratio) where ratio = smallest/largest eigenvalue of M
    restricted to the range of the symmetric projector P_t; an exact
    t-design gives ratio 1 and M = (K/D_t) P_t.
    """
    d = design.dim
    if d**t > 1024:
        raise ValueError(f"d^t = {d**t} exceeds the supported size")
    A = design.states[:, :].T  # K x d
    lifted = A
    for _ in range(t - 1):
        lifted = np.einsum("ka,kb->kab", lifted, A).reshape(A.shape[0], -1)
    M = lifted.T @ lifted.conj()
    basis = _symmetric_basis(d, t)
    ws = np.linalg.eigvalsh(basis.conj().T @ M @ basis)
    ratio = float(ws[0] / ws[-1])
    return M, ratio


def optimize_design(K, d, t, seed, max_iters=100000, step=1.0, target=None):
    """Minimize Phi_t over K unit vectors by projected gradient descent.

    States start Haar-random from the seeded generator.  Each step moves
    against the conjugate gradient, renormalizes, and backtracks (halving the
    step) until Phi_t decreases; an accepted step grows the step length.
    Stops at max_iters, at `target`, or when no decrease is possible.
    """
    Dt = symmetric_dimension(d, t)
    if K < Dt:
        raise InfeasibleDesignError(
            f"K={K} < D_t={Dt}: the frame-potential bound is unreachable"
        )
    if max_iters < 1:
        raise ValueError("max_iters must be >= 1")
    rng = np.random.default_rng(seed)
    V = rng.standard_normal((d, K)) + 1j * rng.standard_normal((d, K))
    V /= np.linalg.norm(V, axis=0)

    def phi(states):
        G = np.abs(states.conj().T @ states) ** 2
        return float((G**t).sum()) / K**2

    f = phi(V)
    eta = step
    iters = 0
    trace = [f]
    goal = -np.inf if target is None else target
    while iters < max_iters and f > goal:
        iters += 1
        grad = frame_potential_gradient(V, t)
        while True:
            Vn = V - eta * grad
            Vn /= np.linalg.norm(Vn, axis=0)
            fn = phi(Vn)
            if fn < f or eta < 1e-18:
                break
            eta *= 0.5
        if fn >= f:
            break  # stalled: no descent direction at float precision
        V, f = Vn, fn
        trace.append(f)
        eta *= 1.3
    return StateDesign(
        dim=d,
        t=t,
        states=V,
        provenance="numerical",
        metadata={
            "phi_t": f,
            "iterations": iters,
            "seed": seed,
            "target": target,
            "phi_trace": trace,
            "reached_target": bool(target is not None and f <= target),
        },
    )


# ---------------------------------------------------------------------------
# design files: JSON (structured) and CSV (flat) renderings

def _header(design):
    return {
        "format_version": 1,
        "dim": design.dim,
        "t": design.t,
        "K": design.size,
        "provenance": design.provenance,
        "phi_t": frame_potential(design, design.t),
    }


def save_design(design, path):
    path = str(path)
    if path.endswith(".csv"):
        _save_csv(design, path)
    else:
        _save_json(design, path)


def _save_json(design, path):
    data = _header(design)
    data["metadata"] = {
        k: v for k, v in design.metadata.items() if _json_safe(v)
    }
    data["states"] = [
        [f"{x:.17g}" for pair in zip(col.real, col.imag) for x in pair]
        for col in design.states.T
    ]
    with open(path, "w") as fh:
        json.dump(data, fh, indent=1)


def _save_csv(design, path):
    hdr = _header(design)
    with open(path, "w") as fh:
        for k, v in hdr.items():
            fh.write(f"# {k}={v}\n")
        cols = ",".join(f"re{i},im{i}" for i in range(design.dim))
        fh.write(cols + "\n")
        for col in design.states.T:
            fh.write(
                ",".join(
                    f"{x:.17g}" for pair in zip(col.real, col.imag) for x in pair
                )
                + "\n"
            )


def _json_safe(v):
    return isinstance(v, (int, float, str, bool, type(None)))


def load_design(path):
    path = str(path)
    if path.endswith(".csv"):
        return _load_csv(path)
    return _load_json(path)


def _states_from_rows(rows, dim):
    states = []
    for i, row in enumerate(rows):
        if len(row) != 2 * dim:
            raise DesignFormatError(f"state {i}: expected {2*dim} floats, got {len(row)}")
        col = np.array(row[0::2]) + 1j * np.array(row[1::2])
        states.append(col)
    return np.array(states).T


def _load_json(path):
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DesignFormatError(f"{path}: invalid JSON at line {exc.lineno}") from exc
    for key in ("format_version", "dim", "t", "K", "states"):
        if key not in data:
            raise DesignFormatError(f"{path}: missing field '{key}'")
    if data["format_version"] != 1:
        raise DesignFormatError(f"unsupported format_version {data['format_version']}")
    rows = [[float(x) for x in rec] for rec in data["states"]]
    if len(rows) != data["K"]:
        raise DesignFormatError(f"expected K={data['K']} states, found {len(rows)}")
    design = StateDesign(
        dim=data["dim"],
        t=data["t"],
        states=_states_from_rows(rows, data["dim"]),
        provenance=data.get("provenance", "file"),
        metadata=dict(data.get("metadata", {}), phi_t=data.get("phi_t")),
    )
    return design.validate()


def _load_csv(path):
    header = {}
    rows = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                k, _, v = line[1:].strip().partition("=")
                header[k.strip()] = v.strip()
            elif line.startswith("re0"):
                continue
            else:
                try:
                    rows.append([float(x) for x in line.split(",")])
                except ValueError as exc:
                    raise DesignFormatError(f"{path}:{lineno}: bad float") from exc
    for key in ("dim", "t", "K"):
        if key not in header:
            raise DesignFormatError(f"{path}: missing header field '{key}'")
    dim, t, K = int(header["dim"]), int(header["t"]), int(header["K"])
    if len(rows) != K:
        raise DesignFormatError(f"expected K={K} states, found {len(rows)}")
    design = StateDesign(
        dim=dim,
        t=t,
        states=_states_from_rows(rows, dim),
        provenance=header.get("provenance", "file"),
        metadata={"phi_t": float(header["phi_t"])} if "phi_t" in header else {},
    )
    return design.validate()
