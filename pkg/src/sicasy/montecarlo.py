"""Monte Carlo simulation of SIC and capture-only decoding.

Replications are grouped into fixed-size blocks, and block ``b`` draws from
its own Philox stream keyed by ``(master_seed, b)``. Block size depends only
on ``n``, so results are bit-identical whatever the number of worker threads.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .fading import FadingModel, Rayleigh, make_rayleigh, parse_model, sample_gain_matrix
from .sic_exact import SystemConfig, thread_count

__all__ = [
    "SimulationPlan",
    "SimulationReport",
    "VjMarginals",
    "EquivalenceCheck",
    "ConvergenceRow",
    "run",
    "sample_vj_marginals",
    "vj_from_spacings",
    "spacings_from_order_statistics",
    "sic_success",
    "capture_success",
    "decoding_rule_equivalence",
    "convergence_study",
    "transition_width",
    "plan_from_dict",
]

_BLOCK_ELEMENTS = 2_000_000
BOUNDARY_SLACK = 1e-9


def _block_size(n: int) -> int:
    return max(1, _BLOCK_ELEMENTS // n)


def _stream(master_seed, block: int) -> np.random.Generator:
    entropy = master_seed if master_seed is not None else 0
    ss = np.random.SeedSequence(entropy, spawn_key=(block,))
    return np.random.Generator(np.random.Philox(ss))


@dataclass(frozen=True)
class SimulationPlan:
    config: SystemConfig
    model: FadingModel = field(default_factory=make_rayleigh)
    replications: int = 10_000
    master_seed: int = 0
    mode: str = "sic"

    def __post_init__(self):
        if int(self.replications) != self.replications or self.replications < 1:
            raise ValueError("replications must be a positive integer")
        if self.mode not in ("sic", "capture"):
            raise ValueError(f"mode must be 'sic' or 'capture', got {self.mode!r}")
        if self.model.name != self.config.threshold.model:
            raise ValueError(
                f"threshold was calibrated for {self.config.threshold.model!r}, "
                f"not {self.model.name!r}")


@dataclass
class SimulationReport:
    plan: SimulationPlan
    decoded_count_histogram: np.ndarray
    mean_decoded: float
    mean_decoded_se: float
    per_rank_success_freq: np.ndarray
    marginal_vj_freq: Optional[np.ndarray]
    seed: int
    wall_time: float

    @property
    def replications(self) -> int:
        return int(self.decoded_count_histogram.sum())

    @property
    def sum_rate(self) -> float:
        return math.log1p(self.plan.config.gamma) / math.log(2.0) * self.mean_decoded

    def to_dict(self) -> dict:
        cfg = self.plan.config
        return {
            "mode": self.plan.mode,
            "model": self.plan.model.name,
            "n": cfg.n,
            "gamma": cfg.gamma,
            "alpha": cfg.alpha,
            "xi": cfg.xi,
            "epsilon": cfg.epsilon,
            "replications": self.replications,
            "seed": self.seed,
            "mean_decoded": self.mean_decoded,
            "mean_decoded_se": self.mean_decoded_se,
            "sum_rate": self.sum_rate,
            "decoded_count_histogram": self.decoded_count_histogram.tolist(),
        }


def sic_success(y: np.ndarray, gamma: float, xi: float, c: float) -> np.ndarray:
    """Per-rank SIC test on descending gains (rows are replications).

    Rank ``j`` passes when ``Y_(j) / (c/gamma + sum_{r>j} Y_(r) + xi sum_{r<j} Y_(r)) >= gamma``,
    written multiplicatively to avoid the division.
    """
    after = np.cumsum(y[..., ::-1], axis=-1)[..., ::-1]
    after = np.concatenate([after[..., 1:], np.zeros(y.shape[:-1] + (1,))], axis=-1)
    before = np.cumsum(y, axis=-1) - y
    return y >= c + gamma * (after + xi * before)


def capture_success(y: np.ndarray, gamma: float, c: float) -> np.ndarray:
    """Per-packet test with every other packet as interference."""
    total = y.sum(axis=-1, keepdims=True)
    return y >= c + gamma * (total - y)


def _decoded_count(ok: np.ndarray) -> np.ndarray:
    """Ranks decoded before the first failure."""
    n = ok.shape[-1]
    fail = ~ok
    first = np.argmax(fail, axis=-1)
    return np.where(fail.any(axis=-1), first, n)


def spacings_from_order_statistics(y: np.ndarray) -> np.ndarray:
    """Inverse of ``Y_(k) = sum_{j>=k} X_j / j``: ``X_k = k (Y_(k) - Y_(k+1))``."""
    n = y.shape[-1]
    nxt = np.concatenate([y[..., 1:], np.zeros(y.shape[:-1] + (1,))], axis=-1)
    return np.arange(1, n + 1) * (y - nxt)


def vj_from_spacings(x: np.ndarray, gamma: float, xi: float) -> np.ndarray:
    """``V_j = sum_k b_jk X_k`` for all ``j`` at once, O(n) per row."""
    n = x.shape[-1]
    k = np.arange(1, n + 1, dtype=float)
    tail_w = np.cumsum((x / k)[..., ::-1], axis=-1)[..., ::-1]
    tail = np.cumsum(x[..., ::-1], axis=-1)[..., ::-1]
    head = np.cumsum(x, axis=-1) - x
    lead = 1.0 + gamma * (xi + (1.0 - xi) * k)
    return lead * tail_w - gamma * tail - gamma * xi * head


def _simulate_block(plan: SimulationPlan, block: int, size: int, want_marginals: bool):
    cfg = plan.config
    n = cfg.n
    rng = _stream(plan.master_seed, block)
    y = sample_gain_matrix(plan.model, n, size, rng)
    if plan.mode == "sic":
        ok = sic_success(y, cfg.gamma, cfg.xi, cfg.c)
        m = _decoded_count(ok)
        decoded_by_rank = np.bincount(m, minlength=n + 1)
    else:
        ok = capture_success(y, cfg.gamma, cfg.c)
        m = ok.sum(axis=-1)
        decoded_by_rank = np.append(ok.sum(axis=0), 0)
    hist = np.bincount(m, minlength=n + 1)
    marg = None
    if want_marginals:
        v = vj_from_spacings(spacings_from_order_statistics(y), cfg.gamma, cfg.xi)
        marg = (v >= cfg.c).sum(axis=0)
    return hist, decoded_by_rank, marg


def run(plan: SimulationPlan, workers: Optional[int] = None) -> SimulationReport:
    """Simulate ``plan.replications`` slots.

    SIC mode walks ranks strongest-first and stops at the first failure.
    Capture mode tests every packet independently. For Rayleigh fading the
    empirical ``P(V_j >= c)`` is also collected from the same draws.
    """
    t0 = time.perf_counter()
    n = plan.config.n
    bs = _block_size(n)
    nblocks = -(-plan.replications // bs)
    sizes = [min(bs, plan.replications - b * bs) for b in range(nblocks)]
    want_marg = isinstance(plan.model, Rayleigh)

    def work(b):
        return _simulate_block(plan, b, sizes[b], want_marg)

    cap = thread_count()
    nw = min(cap, workers or cap, nblocks)
    if nw <= 1:
        parts = [work(b) for b in range(nblocks)]
    else:
        with ThreadPoolExecutor(max_workers=nw) as pool:
            parts = list(pool.map(work, range(nblocks)))

    hist = np.zeros(n + 1, dtype=np.int64)
    by_rank = np.zeros(n + 1, dtype=np.int64)
    marg = np.zeros(n, dtype=np.int64) if want_marg else None
    for h, d, mg in parts:
        hist += h
        by_rank += d
        if want_marg:
            marg += mg
    R = plan.replications
    counts = np.arange(n + 1)
    mean = float(counts @ hist) / R
    var = float((counts - mean) ** 2 @ hist) / max(R - 1, 1)
    if plan.mode == "sic":
        # rank j is decoded whenever M >= j
        per_rank = np.cumsum(by_rank[::-1])[::-1][1:] / R
    else:
        per_rank = by_rank[:n] / R
    return SimulationReport(
        plan=plan,
        decoded_count_histogram=hist,
        mean_decoded=mean,
        mean_decoded_se=math.sqrt(var / R),
        per_rank_success_freq=per_rank,
        marginal_vj_freq=marg / R if want_marg else None,
        seed=plan.master_seed,
        wall_time=time.perf_counter() - t0,
    )


@dataclass(frozen=True)
class VjMarginals:
    ranks: np.ndarray
    freq: np.ndarray
    replications: int

    @property
    def se(self) -> np.ndarray:
        p = self.freq
        return np.sqrt(p * (1.0 - p) / self.replications)


def sample_vj_marginals(config: SystemConfig, replications: int, seed,
                        ranks: Optional[Sequence[int]] = None) -> VjMarginals:
    """Empirical ``P(V_j >= c)`` from exponential spacings.

    Every replication draws one vector ``X_1..X_n`` and evaluates all
    ``V_j`` from it. Only meaningful for Rayleigh fading.
    """
    if config.threshold.model != "rayleigh":
        raise ValueError("V_j marginals are defined for Rayleigh fading only")
    n = config.n
    ranks = np.arange(1, n + 1) if ranks is None else np.asarray(ranks, dtype=int)
    if ranks.size and (ranks.min() < 1 or ranks.max() > n):
        raise ValueError(f"ranks must lie in 1..{n}")
    bs = _block_size(n)
    hits = np.zeros(ranks.size, dtype=np.int64)
    done, b = 0, 0
    while done < replications:
        size = min(bs, replications - done)
        rng = _stream(seed, b)
        x = -np.log1p(-rng.random((size, n)))
        v = vj_from_spacings(x, config.gamma, config.xi)[:, ranks - 1]
        hits += (v >= config.c).sum(axis=0)
        done += size
        b += 1
    return VjMarginals(ranks, hits / replications, replications)


@dataclass(frozen=True)
class EquivalenceCheck:
    replications: int
    mismatches: int
    boundary_cases: int
    max_count: int


def decoding_rule_equivalence(config: SystemConfig, replications: int, seed) -> EquivalenceCheck:
    """Compare decoded counts from the SNIR test and from ``V_j >= c``.

    Both are evaluated on the same Rayleigh draws. A replication whose
    deciding ``V_j`` lies within relative ``1e-9`` of ``c`` is put in the
    boundary band and left out of the mismatch count.
    """
    n = config.n
    bs = _block_size(n)
    mismatches = boundary = 0
    max_m = 0
    done, b = 0, 0
    c = config.c
    while done < replications:
        size = min(bs, replications - done)
        rng = _stream(seed, b)
        x = -np.log1p(-rng.random((size, n)))
        k = np.arange(1, n + 1)
        y = np.cumsum((x / k)[:, ::-1], axis=1)[:, ::-1]
        m_snir = _decoded_count(sic_success(y, config.gamma, config.xi, c))
        v = vj_from_spacings(x, config.gamma, config.xi)
        m_v = _decoded_count(v >= c)
        # ranks that decide either count: 1..max(M)+1
        upto = np.minimum(np.maximum(m_snir, m_v) + 1, n)
        near = np.abs(v - c) <= BOUNDARY_SLACK * max(c, 1.0)
        in_band = (near & (k[None, :] <= upto[:, None])).any(axis=1)
        diff = m_snir != m_v
        mismatches += int(np.sum(diff & ~in_band))
        boundary += int(np.sum(in_band))
        max_m = max(max_m, int(m_snir.max()))
        done += size
        b += 1
    return EquivalenceCheck(replications, mismatches, boundary, max_m)


def _crossing(x: np.ndarray, freq: np.ndarray, level: float) -> float:
    """First ``x`` where the nonincreasing ``freq`` drops below ``level`` (interpolated)."""
    below = np.flatnonzero(freq < level)
    if below.size == 0:
        return 1.0
    i = below[0]
    x0, f0 = (0.0, 1.0) if i == 0 else (x[i - 1], freq[i - 1])
    x1, f1 = x[i], freq[i]
    if f0 == f1:
        return float(x1)
    return float(x0 + (f0 - level) * (x1 - x0) / (f0 - f1))


def transition_width(freq: np.ndarray, hi: float = 0.9, lo: float = 0.1) -> float:
    """Width in ``j/n`` over which the per-rank success frequency falls from ``hi`` to ``lo``."""
    n = len(freq)
    x = np.arange(1, n + 1) / n
    return _crossing(x, freq, lo) - _crossing(x, freq, hi)


@dataclass(frozen=True)
class ConvergenceRow:
    n: int
    mean_fraction: float
    mean_fraction_se: float
    sharpness: float


def convergence_study(alpha: float, xi: float, n_list: Sequence[int], replications: int,
                      seed, epsilon: float = 0.1,
                      model: Optional[FadingModel] = None) -> list[ConvergenceRow]:
    """Decoded fraction and transition width for each ``n`` (``gamma = 1/(alpha n)``)."""
    n_list = list(n_list)
    if any(b <= a for a, b in zip(n_list, n_list[1:])):
        raise ValueError("n_list must be strictly ascending")
    model = model or make_rayleigh()
    rows = []
    for n in n_list:
        cfg = SystemConfig.scaled(n, alpha, xi, epsilon, model)
        rep = run(SimulationPlan(cfg, model, replications, [int(seed), int(n)], "sic"))
        rows.append(ConvergenceRow(n, rep.mean_decoded / n, rep.mean_decoded_se / n,
                                   transition_width(rep.per_rank_success_freq)))
    return rows


def plan_from_dict(d: dict) -> SimulationPlan:
    """Build a plan from a flag-style mapping (e.g. a parsed JSON config).

    Keys: ``n``, ``alpha`` or ``gamma``, ``xi``, ``epsilon``, ``model``,
    ``replications``, ``seed``, ``mode``.
    """
    known = {"n", "alpha", "gamma", "xi", "epsilon", "model", "replications", "seed", "mode"}
    extra = set(d) - known
    if extra:
        raise ValueError(f"unknown plan keys: {sorted(extra)}")
    if "n" not in d:
        raise ValueError("plan needs 'n'")
    if ("alpha" in d) == ("gamma" in d):
        raise ValueError("plan needs exactly one of 'alpha' or 'gamma'")
    model = parse_model(d.get("model", "rayleigh"))
    xi = float(d.get("xi", 0.0))
    eps = float(d.get("epsilon", 0.1))
    n = int(d["n"])
    if "alpha" in d:
        cfg = SystemConfig.scaled(n, float(d["alpha"]), xi, eps, model)
    else:
        cfg = SystemConfig.with_gamma(n, float(d["gamma"]), xi, eps, model)
    return SimulationPlan(cfg, model, int(d.get("replications", 10_000)),
                          int(d.get("seed", 0)), d.get("mode", "sic"))
