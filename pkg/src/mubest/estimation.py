"""Q operators, optimal estimators, and exact N-copy estimation fidelities.

For an effect A on N copies, Q(A) = (N+1)! tr_{1..N}[ P_{N+1} (A x 1) ] acting
on the extra copy; the estimation fidelity of a product measurement is
sum over outcomes of ||Q|| / ((N+1)! D_{N+1}), attained by any estimator
supported in the top eigenspace of Q.  Non-ideal designs replace P_{N+1} by
the rescaled moment operator P'.
"""

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ContractViolationError, DimensionMismatchError
from .linalg import TensorSpace, hermitian_eig, symmetric_projector

DEGENERACY_TOL = 1e-9


@lru_cache(maxsize=None)
def _sym_projector_reshaped(d, t):
    """P_t reshaped to (d^{t-1}, d, d^{t-1}, d) for leading partial traces."""
    P, D = symmetric_projector(TensorSpace(d, t))
    return P.reshape(d ** (t - 1), d, d ** (t - 1), d), D


def _contract(P_reshaped, effect, N):
    # Q[a,b] = (N+1)! * sum_{x,y} P[x,a,y,b] effect[y,x]
    return math.factorial(N + 1) * np.einsum("xayb,yx->ab", P_reshaped, effect)


@dataclass(frozen=True)
class QOperator:
    matrix: np.ndarray
    outcome_label: tuple
    norm: float


@dataclass(frozen=True)
class Estimator:
    density: np.ndarray
    support_dim: int
    gap: float


@dataclass
class EstimationReport:
    fidelity: float
    per_outcome: list  # (outcome_label, ||Q||, Estimator)
    n_copies: int
    design_mode: str


def q_operator(effect, N, d):
    """Q(A) for an effect on (C^d)^{x N} with the exact symmetric projector."""
    effect = np.asarray(effect, dtype=complex)
    if N not in (1, 2, 3):
        raise ValueError("N must be 1, 2, or 3")
    if effect.shape != (d**N, d**N):
        raise DimensionMismatchError(
            f"effect has shape {effect.shape}, expected {(d**N, d**N)}"
        )
    Pr, _ = _sym_projector_reshaped(d, N + 1)
    m = _contract(Pr, effect, N)
    w = np.linalg.eigvalsh(m)
    return QOperator(matrix=m, outcome_label=(), norm=float(w[-1]))


def empirical_projector(design, t):
    """P' = (D_t / K) sum_j (|psi_j><psi_j|)^{x t}, the design's stand-in for P_t."""
    from .designs import moment_operator
    from .linalg import symmetric_dimension

    M, _ = moment_operator(design, t)
    return symmetric_dimension(design.dim, t) / design.size * M


def q_operator_empirical(effect, N, design):
    """Q'(A): same contraction with the design moment operator instead of P_{N+1}."""
    effect = np.asarray(effect, dtype=complex)
    d = design.dim
    if effect.shape != (d**N, d**N):
        raise DimensionMismatchError(
            f"effect has shape {effect.shape}, expected {(d**N, d**N)}"
        )
    if design.t < N + 1:
        warnings.warn(
            f"design strength t={design.t} < N+1={N+1}; Q' may be inaccurate",
            stacklevel=2,
        )
    Pp = empirical_projector(design, N + 1)
    Pr = Pp.reshape(d**N, d, d**N, d)
    m = _contract(Pr, effect, N)
    w = np.linalg.eigvalsh(m)
    return QOperator(matrix=m, outcome_label=(), norm=float(w[-1]))


def optimal_estimator(q, degeneracy_tol=DEGENERACY_TOL):
    """Normalized projector onto the top eigenspace of Q.

    Eigenvalues within degeneracy_tol * ||Q|| of the maximum are grouped, which
    keeps the estimator well defined at symmetric parameter points.
    """
    w, v = hermitian_eig(q.matrix)
    top = w[-1]
    if top <= degeneracy_tol:
        raise ContractViolationError("Q operator is numerically zero")
    members = w >= top - degeneracy_tol * top
    support = int(members.sum())
    vs = v[:, members]
    density = (vs @ vs.conj().T) / support
    below = w[~members]
    gap = float(top - below[-1]) if below.size else 0.0
    return Estimator(density=density, support_dim=support, gap=gap)


def _check_complete(measurements):
    for m in measurements:
        total = sum(m.effects)
        if np.max(np.abs(total - np.eye(m.dim))) > 1e-10:
            raise ContractViolationError("measurement effects do not sum to identity")


def estimation_fidelity(
    measurements,
    mode="ideal",
    design=None,
    estimator_source="matched",
    degeneracy_tol=DEGENERACY_TOL,
):
    """Estimation fidelity of a product of rank-1 projective measurements.

    Enumerates all d^N outcome tuples, builds each product effect, computes
    Q (ideal mode) or Q' (empirical mode, from `design`), and sums the top
    eigenvalues.  With estimator_source="ideal" in empirical mode, the
    estimator comes from the ideal Q's top eigenspace but is scored against
    Q' (the "standard estimator": suboptimal, hence a slightly lower value).
    """
    N = len(measurements)
    if N not in (1, 2, 3):
        raise ValueError("need 1 to 3 measurements")
    d = measurements[0].dim
    _check_complete(measurements)
    if mode == "empirical":
        if design is None:
            raise ValueError("empirical mode requires a design")
        Pp = empirical_projector(design, N + 1)
        P_emp = Pp.reshape(d**N, d, d**N, d)
    elif mode != "ideal":
        raise ValueError(f"unknown mode {mode!r}")
    Pr, D = _sym_projector_reshaped(d, N + 1)

    per_outcome = []
    total = 0.0
    for label in np.ndindex(*(len(m) for m in measurements)):
        effect = measurements[0].effects[label[0]]
        for i in range(1, N):
            effect = np.kron(effect, measurements[i].effects[label[i]])
        if mode == "ideal":
            m = _contract(Pr, effect, N)
            q = QOperator(m, tuple(label), float(np.linalg.eigvalsh(m)[-1]))
            est = optimal_estimator(q, degeneracy_tol)
            value = q.norm
        else:
            m = _contract(P_emp, effect, N)
            q = QOperator(m, tuple(label), float(np.linalg.eigvalsh(m)[-1]))
            if estimator_source == "ideal":
                m_ideal = _contract(Pr, effect, N)
                q_ideal = QOperator(
                    m_ideal, tuple(label), float(np.linalg.eigvalsh(m_ideal)[-1])
                )
                est = optimal_estimator(q_ideal, degeneracy_tol)
                value = float(np.trace(q.matrix @ est.density).real)
            else:
                est = optimal_estimator(q, degeneracy_tol)
                value = q.norm
        per_outcome.append((tuple(label), value, est))
        total += value
    fidelity = total / (math.factorial(N + 1) * D)
    return EstimationReport(
        fidelity=fidelity, per_outcome=per_outcome, n_copies=N, design_mode=mode
    )


def triple_measurements(triple):
    from .mub import measurement_of

    return [measurement_of(b) for b in triple.bases]


def triple_fidelity(triple, mode="ideal", design=None, estimator_source="matched"):
    """Three-copy estimation fidelity F_MUB of a triple of bases."""
    return estimation_fidelity(
        triple_measurements(triple),
        mode=mode,
        design=design,
        estimator_source=estimator_source,
    ).fidelity


def fidelity_scan(x, y_values, z_values, mode="ideal", design=None,
                  estimator_source="matched", threads=1):
    """F_MUB over a (y, z) grid at fixed x.  Returns rows (x, y, z, F).

    Grid points are independent; `threads` > 1 evaluates them in a thread
    pool, with results assembled in grid order regardless of worker count.
    """
    from concurrent.futures import ThreadPoolExecutor

    from .mub import mub_triple

    points = [(y, z) for y in y_values for z in z_values]

    def one(point):
        y, z = point
        return triple_fidelity(
            mub_triple(x, y, z),
            mode=mode,
            design=design,
            estimator_source=estimator_source,
        )

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            values = list(pool.map(one, points))
    else:
        values = [one(p) for p in points]
    return [(x, y, z, f) for (y, z), f in zip(points, values)]
