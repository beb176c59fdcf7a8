"""Seeded Monte-Carlo emulation of the three-copy estimation protocol.

For every design state the three measurements are sampled independently
(inverse-CDF on the 4-outcome Born distributions), the precomputed optimal
estimator for the joint outcome is looked up, and tr(rho rhohat) is averaged
over states and repetitions.  All randomness flows through substreams derived
deterministically from (seed, measurement role, state index, block index), so
results are reproducible and independent of execution order; with
share_ab_outcomes the streams for bases A and B depend only on their own
parameters and are therefore shared across triples that share those bases.
"""

import hashlib
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ContractViolationError
from .estimation import (
    estimation_fidelity,
    triple_fidelity,
    triple_measurements,
)
from .linalg import symmetric_dimension
from .mub import controlled_phase, haar_random_unitary, mub_triple, transform_triple


@dataclass(frozen=True)
class SimConfig:
    seed: int
    m_block: int = 10000
    blocks: int = 10
    share_ab_outcomes: bool = True

    def __post_init__(self):
        if self.m_block < 1 or self.blocks < 1:
            raise ValueError("m_block and blocks must be >= 1")


@dataclass
class SimReport:
    config: SimConfig
    triple_params: tuple
    mean_fidelity: float
    per_block_fidelities: np.ndarray
    std: float  # standard deviation over blocks
    counts: np.ndarray  # (K, blocks, n_outcomes) joint outcome counts per state
    per_state_fidelity: np.ndarray  # (K,) per-state average of tr(rho rhohat)
    outcome_shape: tuple

    @property
    def std_of_mean(self):
        return self.std / math.sqrt(self.config.blocks)

    def to_dict(self, include_counts=False):
        data = {
            "seed": self.config.seed,
            "m_block": self.config.m_block,
            "blocks": self.config.blocks,
            "share_ab_outcomes": self.config.share_ab_outcomes,
            "triple_params": list(self.triple_params),
            "mean_fidelity": self.mean_fidelity,
            "per_block_fidelities": self.per_block_fidelities.tolist(),
            "std": self.std,
        }
        if include_counts:
            data["counts"] = self.counts.tolist()
        return data


@dataclass(frozen=True)
class DeviationSummary:
    maximal: float
    minimal: float
    average: float
    std: float
    max_deviation: float


_estimator_cache = {}


def _design_fingerprint(design):
    return hashlib.blake2b(
        np.ascontiguousarray(design.states).tobytes(), digest_size=8
    ).hexdigest()


def estimator_tables(triple, design, mode="ideal", estimator_source="matched"):
    """Per-outcome estimator densities and the (K, 64) fidelity lookup table.

    f_table[i, o] = <psi_i| rhohat_o |psi_i> for joint outcome o = 16 j + 4 k + l.
    Cached by (x, y, z, mode, estimator source, design identity).
    """
    key = (
        round(triple.x, 12),
        round(triple.y, 12),
        round(triple.z, 12),
        mode,
        estimator_source,
        _design_fingerprint(design),
    )
    if key in _estimator_cache:
        return _estimator_cache[key]
    report = estimation_fidelity(
        triple_measurements(triple),
        mode=mode,
        design=design if mode == "empirical" else None,
        estimator_source=estimator_source,
    )
    densities = [est.density for _, _, est in report.per_outcome]
    V = design.states  # d x K
    f_table = np.empty((design.size, len(densities)))
    for o, rho in enumerate(densities):
        f_table[:, o] = np.einsum("ik,ij,jk->k", V.conj(), rho, V).real
    _estimator_cache[key] = (densities, f_table)
    return densities, f_table


def _born_probabilities(basis, states):
    # (K, 4) outcome distribution per state for a rank-1 projective basis
    p = np.abs(basis.vectors.conj().T @ states) ** 2  # 4 x K
    p = p.T
    sums = p.sum(axis=1)
    if np.max(np.abs(sums - 1.0)) > 1e-9:
        raise ContractViolationError("outcome probabilities do not sum to 1")
    return p / sums[:, None]


def _param_key(role, triple, cfg):
    if cfg.share_ab_outcomes:
        params = {0: (), 1: (triple.x,), 2: (triple.y, triple.z)}[role]
    else:
        params = (triple.x, triple.y, triple.z)
    raw = b"".join(np.float64(round(p, 12)).tobytes() for p in params)
    return int.from_bytes(hashlib.blake2b(raw, digest_size=4).digest(), "big")


def _substream(seed, role, param_key, state, block):
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(role, param_key, state, block))
    return np.random.Generator(np.random.PCG64(ss))


def simulate_protocol(triple, design, cfg, mode="ideal", estimator_source="matched"):
    """Run the sampled three-copy protocol and average per Eq.-(6)-style weights.

    Returns per-block and overall estimation fidelities plus the full joint
    outcome count table, which downstream reprocessing (two-copy, random
    subsets) reuses without fresh sampling.
    """
    _, f_table = estimator_tables(triple, design, mode, estimator_source)
    K = design.size
    probs = [_born_probabilities(b, design.states) for b in triple.bases]
    cdfs = [np.cumsum(p, axis=1)[:, :3] for p in probs]
    param_keys = [_param_key(role, triple, cfg) for role in range(3)]

    counts = np.zeros((K, cfg.blocks, 64), dtype=np.int64)
    for state in range(K):
        for block in range(cfg.blocks):
            outcomes = []
            for role in range(3):
                rng = _substream(cfg.seed, role, param_keys[role], state, block)
                u = rng.random(cfg.m_block)
                outcomes.append(np.searchsorted(cdfs[role][state], u))
            joint = (outcomes[0] * 16 + outcomes[1] * 4 + outcomes[2]).astype(np.int64)
            counts[state, block] = np.bincount(joint, minlength=64)

    per_block = (
        np.einsum("kbo,ko->b", counts.astype(float), f_table) / (K * cfg.m_block)
    )
    per_state = counts.sum(axis=1).astype(float)
    per_state_fid = (per_state * f_table).sum(axis=1) / (cfg.m_block * cfg.blocks)
    return SimReport(
        config=cfg,
        triple_params=(triple.x, triple.y, triple.z),
        mean_fidelity=float(per_block.mean()),
        per_block_fidelities=per_block,
        std=float(per_block.std(ddof=1)) if cfg.blocks > 1 else 0.0,
        counts=counts,
        per_state_fidelity=per_state_fid,
        outcome_shape=(4, 4, 4),
    )


def exact_protocol_fidelity(triple, design, mode="ideal", estimator_source="matched"):
    """Infinite-M limit: exact Born probabilities instead of sampled frequencies."""
    _, f_table = estimator_tables(triple, design, mode, estimator_source)
    probs = [_born_probabilities(b, design.states) for b in triple.bases]
    joint = np.einsum("kj,kl,km->kjlm", *probs).reshape(design.size, 64)
    return float((joint * f_table).sum() / design.size)


def reprocess_two_copy(report, pair, design, mode="ideal", estimator_source="matched"):
    """Two-copy estimation fidelity from an existing run's outcome counts.

    `pair` selects two of the three measurements by index (0=A, 1=B, 2=C);
    counts are marginalized over the third measurement, then scored against
    the two-copy optimal estimators from Q on the chosen product effects.
    """
    from .mub import measurement_of

    i1, i2 = pair
    if not (0 <= i1 < i2 <= 2):
        raise ValueError("pair must be two distinct measurement indices in order")
    triple = mub_triple(*report.triple_params)
    measurements = [measurement_of(b) for b in triple.bases]
    sub = estimation_fidelity(
        [measurements[i1], measurements[i2]],
        mode=mode,
        design=design if mode == "empirical" else None,
        estimator_source=estimator_source,
    )
    densities = [est.density for _, _, est in sub.per_outcome]
    V = design.states
    f_table = np.empty((design.size, 16))
    for o, rho in enumerate(densities):
        f_table[:, o] = np.einsum("ik,ij,jk->k", V.conj(), rho, V).real

    K = design.size
    cfg = report.config
    counts3 = report.counts.reshape(K, cfg.blocks, 4, 4, 4)
    drop_axis = ({0, 1, 2} - {i1, i2}).pop()
    counts2 = counts3.sum(axis=2 + drop_axis).reshape(K, cfg.blocks, 16)
    per_block = (
        np.einsum("kbo,ko->b", counts2.astype(float), f_table) / (K * cfg.m_block)
    )
    per_state = (counts2.sum(axis=1) * f_table).sum(axis=1) / (
        cfg.m_block * cfg.blocks
    )
    return SimReport(
        config=cfg,
        triple_params=report.triple_params,
        mean_fidelity=float(per_block.mean()),
        per_block_fidelities=per_block,
        std=float(per_block.std(ddof=1)) if cfg.blocks > 1 else 0.0,
        counts=counts2,
        per_state_fidelity=per_state,
        outcome_shape=(4, 4),
    )


def equivalence_scan_phase(
    phi_grid, base_triple, design, cfg=None, mode="ideal", estimator_source="matched"
):
    """Controlled-phase family: exact (and optionally simulated) F for each phase.

    Returns rows (phi, exact_F, simulated_F or None, std or None).
    """
    rows = []
    for phi in phi_grid:
        triple = transform_triple(base_triple, controlled_phase(phi))
        exact = triple_fidelity(
            triple, mode=mode, design=design if mode == "empirical" else None,
            estimator_source=estimator_source,
        )
        if cfg is not None:
            rep = simulate_protocol(triple, design, cfg, mode, estimator_source)
            rows.append((phi, exact, rep.mean_fidelity, rep.std_of_mean))
        else:
            rows.append((phi, exact, None, None))
    return rows


def _summary(values, reference):
    values = np.asarray(values, dtype=float)
    return DeviationSummary(
        maximal=float(values.max()),
        minimal=float(values.min()),
        average=float(values.mean()),
        std=float(values.std(ddof=1)) if values.size > 1 else 0.0,
        max_deviation=float(np.max(np.abs(values - reference))),
    )


def equivalence_scan_random(
    n_unitaries,
    base_triple,
    design,
    cfg=None,
    mode="ideal",
    estimator_source="matched",
    unitary_seed=0,
):
    """Haar-random unitary transformations of the triple; Table-style statistics.

    Returns (exact_summary, simulated_summary or None); deviations are with
    respect to the untransformed triple's exact fidelity in the same mode.
    """
    if n_unitaries < 1:
        raise ValueError("n_unitaries must be >= 1")
    rng = np.random.default_rng(unitary_seed)
    reference = triple_fidelity(
        base_triple, mode=mode, design=design if mode == "empirical" else None,
        estimator_source=estimator_source,
    )
    exact_vals, sim_vals = [], []
    for _ in range(n_unitaries):
        u = haar_random_unitary(design.dim, rng)
        triple = transform_triple(base_triple, u)
        exact_vals.append(
            triple_fidelity(
                triple, mode=mode, design=design if mode == "empirical" else None,
                estimator_source=estimator_source,
            )
        )
        if cfg is not None:
            rep = simulate_protocol(triple, design, cfg, mode, estimator_source)
            sim_vals.append(rep.mean_fidelity)
    exact_summary = _summary(exact_vals, reference)
    sim_summary = _summary(sim_vals, reference) if sim_vals else None
    return exact_summary, sim_summary


def random_subset_analysis(report, subset_sizes, trials=30, seed=0):
    """Re-average the run over random state subsets; (mean, std) per subset size.

    Each trial draws `size` distinct states and averages their per-state
    fidelity contributions, mirroring the resampling analysis of the count
    data.  std is over the `trials` draws (0 when size equals K).
    """
    K = report.per_state_fidelity.size
    rng = np.random.default_rng(seed)
    results = {}
    for size in subset_sizes:
        if not 1 <= size <= K:
            raise ValueError(f"subset size {size} out of range 1..{K}")
        if size == K:
            results[size] = (float(report.per_state_fidelity.mean()), 0.0)
            continue
        means = np.array(
            [
                report.per_state_fidelity[
                    rng.choice(K, size=size, replace=False)
                ].mean()
                for _ in range(trials)
            ]
        )
        results[size] = (float(means.mean()), float(means.std(ddof=1)))
    return results
