"""Rank-proximal particle transport: the sliced dynamics (project, soft-rank,
prox in rank space, quantile match, lift) and the slice-free center-outward
variant, with the linear annealing schedules used by the 2D toy runs.

The prox objective is minimized in its sample-size-scaled form
N * D_f(Q(U) || U_K) + ||U - U0||^2 / (2 eta), for which the documented
stability condition inner_lr <= eta holds (the quadratic term has curvature
1/eta). Energy diagnostics are computed from hard (tau = 0) ranks so they are
comparable across the temperature annealing.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .divergence import discrete_f_divergence
from .entropy import NON_DIFFERENTIABLE, EntropySpec, derivative, eval_f
from .kernels import bernstein_hist, bernstein_weighted_diff, logistic_cdf
from .sliced import SampleSet, sample_directions
from .univariate import empirical_cdf, empirical_quantile

__all__ = [
    "TransportConfig",
    "CoRptConfig",
    "ParticleState",
    "rank_energy",
    "rank_energy_gradient",
    "rank_prox",
    "rpt_step",
    "co_rpt_step",
    "run_transport",
    "toy_target_samples",
    "TOY_TARGETS",
]

_RANK_CLAMP = 1e-4  # keeps quantile inversion away from the extreme order stats
_CENTER_JITTER = 1e-9


# ---------------------------------------------------------------------------
# configuration and state
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TransportConfig:
    n_slices: int = 10
    k_schedule: tuple[int, int] = (80, 128)
    tau_schedule: tuple[float, float] = (0.30, 0.10)
    eps_schedule: tuple[float, float] = (0.20, 0.15)
    eta: float = 0.5
    inner_steps: int = 5
    inner_lr: float | None = None  # defaults to 0.1 * eta
    clip_cap: float | None = None
    generator: EntropySpec = field(default_factory=lambda: EntropySpec.from_name("kl"))
    total_steps: int = 400
    monotone_coupling: bool = True

    def __post_init__(self):
        if min(self.k_schedule) < 1:
            raise ValueError("K schedule endpoints must be >= 1")
        if min(self.tau_schedule) < 0 or min(self.eps_schedule) <= 0:
            raise ValueError("schedule endpoints must be positive (tau may be 0)")
        if self.eta <= 0 or self.inner_steps < 1:
            raise ValueError("need eta > 0 and inner_steps >= 1")

    def lr(self) -> float:
        return 0.1 * self.eta if self.inner_lr is None else self.inner_lr


@dataclass(frozen=True)
class CoRptConfig:
    k_schedule: tuple[int, int] = (96, 224)
    tau_schedule: tuple[float, float] = (0.30, 0.07)
    eps_schedule: tuple[float, float] = (0.16, 0.10)
    eta: float = 0.5
    inner_steps: int = 5
    inner_lr: float | None = None
    clip_cap: float | None = 0.30
    generator: EntropySpec = field(default_factory=lambda: EntropySpec.from_name("kl"))
    total_steps: int = 400
    beta: float = 0.5
    whiten: bool = True

    def __post_init__(self):
        if not 0.0 <= self.beta <= 1.0:
            raise ValueError("beta must lie in [0, 1]")
        if min(self.k_schedule) < 1 or self.eta <= 0 or self.inner_steps < 1:
            raise ValueError("invalid CO-RPT config")

    def lr(self) -> float:
        return 0.1 * self.eta if self.inner_lr is None else self.inner_lr


@dataclass
class ParticleState:
    """Particle positions plus per-step diagnostics; immutable between steps."""

    positions: np.ndarray
    step_index: int = 0
    seed: int = 0
    energy: float | None = None
    mean_displacement: float | None = None
    max_correction: float | None = None

    def __post_init__(self):
        self.positions = np.asarray(self.positions, dtype=np.float64)
        if self.positions.ndim != 2:
            raise ValueError("positions must be N x d")
        if not np.all(np.isfinite(self.positions)):
            raise ValueError("positions must be finite")


def _schedule(start: float, end: float, t: int, total: int) -> float:
    if total <= 1:
        return float(start)
    return float(start + (end - start) * t / (total - 1))


def _schedule_k(ks: tuple[int, int], t: int, total: int) -> int:
    return int(round(_schedule(ks[0], ks[1], t, total)))


# ---------------------------------------------------------------------------
# rank energy, gradient, prox
# ---------------------------------------------------------------------------


def rank_energy(U: np.ndarray, K: int, spec: EntropySpec) -> float:
    """D_f of the Bernstein-smoothed histogram of U against uniform."""
    U = np.clip(np.asarray(U, dtype=np.float64).ravel(), 0.0, 1.0)
    Q = bernstein_hist(U, K)
    return float(np.mean(eval_f(spec, (K + 1.0) * Q)))


def rank_energy_gradient(U: np.ndarray, K: int, spec: EntropySpec) -> np.ndarray:
    """dE/dU_i = (1/N) sum_n f'((K+1) Q(n)) b'_{n,K}(U_i)."""
    if spec.kind in NON_DIFFERENTIABLE:
        raise ValueError(
            f"{spec.kind.value} has no classical derivative; use a smooth generator (kl, js, chi2, ...)"
        )
    U = np.clip(np.asarray(U, dtype=np.float64).ravel(), 0.0, 1.0)
    Q = bernstein_hist(U, K)
    w = np.asarray(derivative(spec, (K + 1.0) * Q))
    return bernstein_weighted_diff(U, K, np.diff(w)) / U.size


def rank_prox(
    U0: np.ndarray,
    K: int,
    spec: EntropySpec,
    eta: float,
    inner_steps: int = 5,
    inner_lr: float | None = None,
) -> np.ndarray:
    """Approximate prox: gradient descent on N*E(U) + ||U-U0||^2/(2 eta).

    The objective is monitored and the step halved on any increase, so it is
    nonincreasing across inner steps; iterates stay clamped inside
    [1e-4, 1 - 1e-4]. eta -> 0 returns U0 (the quadratic dominates).
    """
    if eta <= 0:
        raise ValueError("eta must be positive")
    lr = 0.1 * eta if inner_lr is None else inner_lr
    u = np.clip(np.asarray(U0, dtype=np.float64).ravel(), _RANK_CLAMP, 1.0 - _RANK_CLAMP)
    anchor = u.copy()
    n = u.size

    def objective(v):
        return n * rank_energy(v, K, spec) + float(np.sum((v - anchor) ** 2)) / (2.0 * eta)

    current = objective(u)
    for _ in range(inner_steps):
        g = n * rank_energy_gradient(u, K, spec) + (u - anchor) / eta
        if not np.all(np.isfinite(g)):
            raise RuntimeError(
                f"NaN in prox gradient (K={K}, kind={spec.kind.value}, "
                f"U range [{u.min():.3e}, {u.max():.3e}])"
            )
        step = lr
        for _ in range(8):
            candidate = np.clip(u - step * g, _RANK_CLAMP, 1.0 - _RANK_CLAMP)
            value = objective(candidate)
            if value <= current:
                u, current = candidate, value
                break
            step *= 0.5
    return u


# ---------------------------------------------------------------------------
# the two dynamics
# ---------------------------------------------------------------------------


def _step_rng(seed: int, step_index: int, salt: int = 0) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, salt, step_index]))


def _soft_ranks(xs: np.ndarray, ys: np.ndarray, tau: float) -> np.ndarray:
    if tau > 0.0:
        return logistic_cdf(xs, ys, tau)
    return empirical_cdf(ys, xs)


def rpt_step(
    state: ParticleState, reference: SampleSet, cfg: TransportConfig, step_index: int
) -> ParticleState:
    """One outer step of the sliced rank-proximal transport update."""
    X = state.positions
    Y = reference.matrix
    if X.shape[1] != Y.shape[1]:
        raise ValueError("particles and reference must share one dimension")
    d = X.shape[1]
    K = _schedule_k(cfg.k_schedule, step_index, cfg.total_steps)
    tau = _schedule(*cfg.tau_schedule, step_index, cfg.total_steps)
    eps = _schedule(*cfg.eps_schedule, step_index, cfg.total_steps)
    rng = _step_rng(state.seed, step_index)
    dirs = sample_directions(d, cfg.n_slices, int(rng.integers(2**63)))
    accum = np.zeros_like(X)
    energies = np.empty(cfg.n_slices)
    for i, s in enumerate(dirs.vectors):
        xs = X @ s
        ys = Y @ s
        ys_sorted = np.sort(ys, kind="stable")
        energies[i] = discrete_f_divergence(
            bernstein_hist(np.searchsorted(ys_sorted, xs, side="right") / ys.size, K),
            cfg.generator,
        )
        u0 = _soft_ranks(xs, ys, tau)
        u1 = rank_prox(u0, K, cfg.generator, cfg.eta, cfg.inner_steps, cfg.lr())
        if cfg.monotone_coupling:
            order = np.argsort(xs, kind="stable")
            reordered = np.empty_like(u1)
            reordered[order] = np.sort(u1, kind="stable")
            u1 = reordered
        delta = empirical_quantile(ys_sorted, u1) - xs
        if cfg.clip_cap is not None:
            delta = np.clip(delta, -cfg.clip_cap, cfg.clip_cap)
        accum += delta[:, None] * s[None, :]
    new_positions = X + eps * (d / cfg.n_slices) * accum
    if not np.all(np.isfinite(new_positions)):
        raise RuntimeError(f"non-finite particle positions after step {step_index}")
    return ParticleState(
        positions=new_positions,
        step_index=step_index + 1,
        seed=state.seed,
        energy=float(np.mean(energies)),
        mean_displacement=float(np.abs(new_positions - X).mean()),
    )


def _zca_transform(Y_centered: np.ndarray) -> np.ndarray:
    cov = np.cov(Y_centered, rowvar=False)
    cov = np.atleast_2d(cov)
    ridge = 1e-3 * float(np.mean(np.diag(cov)))
    vals, vecs = np.linalg.eigh(cov + ridge * np.eye(cov.shape[0]))
    if np.any(vals <= 0):
        raise np.linalg.LinAlgError("singular covariance in whitening despite ridge")
    return (vecs * (1.0 / np.sqrt(vals))) @ vecs.T


def co_rpt_step(
    state: ParticleState, reference: SampleSet, cfg: CoRptConfig, step_index: int
) -> ParticleState:
    """One center-outward RPT update: radial rank-prox + cosine angular blend."""
    X = state.positions
    Y = reference.matrix
    if X.shape[1] != Y.shape[1]:
        raise ValueError("particles and reference must share one dimension")
    K = _schedule_k(cfg.k_schedule, step_index, cfg.total_steps)
    tau = _schedule(*cfg.tau_schedule, step_index, cfg.total_steps)
    eps = _schedule(*cfg.eps_schedule, step_index, cfg.total_steps)
    rng = _step_rng(state.seed, step_index, salt=1)

    center = Y.mean(axis=0)
    Xc = X - center
    Yc = Y - center
    if cfg.whiten:
        W = _zca_transform(Yc)
        W_inv = np.linalg.inv(W)
        Xc = Xc @ W.T
        Yc = Yc @ W.T

    r_x = np.linalg.norm(Xc, axis=1)
    jitter = r_x < _CENTER_JITTER
    if np.any(jitter):
        rand_dirs = rng.normal(size=(int(jitter.sum()), Xc.shape[1]))
        rand_dirs /= np.linalg.norm(rand_dirs, axis=1, keepdims=True)
        Xc[jitter] = _CENTER_JITTER * rand_dirs
        r_x = np.linalg.norm(Xc, axis=1)
    u_x = Xc / r_x[:, None]

    r_y = np.linalg.norm(Yc, axis=1)
    safe = r_y >= _CENTER_JITTER
    u_y = Yc[safe] / r_y[safe][:, None]

    r_y_sorted = np.sort(r_y, kind="stable")
    energy = discrete_f_divergence(
        bernstein_hist(np.searchsorted(r_y_sorted, r_x, side="right") / r_y.size, K),
        cfg.generator,
    )
    u0 = _soft_ranks(r_x, r_y, tau)
    u1 = rank_prox(u0, K, cfg.generator, cfg.eta, cfg.inner_steps, cfg.lr())
    r_star = empirical_quantile(r_y_sorted, u1)

    match = np.argmax(u_x @ u_y.T, axis=1)  # argmax takes the lowest index on ties
    blended = (1.0 - cfg.beta) * u_x + cfg.beta * u_y[match]
    norms = np.linalg.norm(blended, axis=1, keepdims=True)
    norms[norms == 0] = 1.0
    u_star = blended / norms

    correction = r_star[:, None] * u_star - Xc
    corr_norm = np.linalg.norm(correction, axis=1)
    if cfg.clip_cap is not None:
        scale = np.minimum(1.0, cfg.clip_cap / np.maximum(corr_norm, 1e-300))
        correction = correction * scale[:, None]
        corr_norm = np.linalg.norm(correction, axis=1)
    Xc_new = Xc + eps * correction

    if cfg.whiten:
        Xc_new = Xc_new @ W_inv.T
    new_positions = Xc_new + center
    if not np.all(np.isfinite(new_positions)):
        raise RuntimeError(f"non-finite particle positions after CO-RPT step {step_index}")
    return ParticleState(
        positions=new_positions,
        step_index=step_index + 1,
        seed=state.seed,
        energy=float(energy),
        mean_displacement=float(np.abs(new_positions - X).mean()),
        max_correction=float(corr_norm.max()),
    )


# ---------------------------------------------------------------------------
# driver
# ---------------------------------------------------------------------------


def run_transport(
    initial: ParticleState,
    reference: SampleSet,
    cfg,
    snapshots: list[int] | None = None,
    out_dir=None,
    tag: str = "run",
    algo: str = "rpt",
):
    """Iterate the dynamics for cfg.total_steps, returning snapshot states.

    Snapshot index t is the state after t steps (t = 0 is the initial state).
    With out_dir set, writes `<tag>_step_<t>.csv` per snapshot and an energy
    trace `<tag>_trace.csv` with columns step, K, tau, eps, energy.
    """
    step_fn = {"rpt": rpt_step, "co-rpt": co_rpt_step}.get(algo)
    if step_fn is None:
        raise ValueError(f"unknown algo {algo!r}; expected 'rpt' or 'co-rpt'")
    snapshots = sorted(set(snapshots if snapshots is not None else [0, cfg.total_steps]))
    if snapshots and snapshots[-1] > cfg.total_steps:
        raise ValueError("snapshot indices must not exceed total_steps")
    if any(t < 0 for t in snapshots):
        raise ValueError("snapshot indices must be nonnegative")

    collected: list[ParticleState] = []
    trace: list[tuple] = []
    state = initial
    if 0 in snapshots:
        collected.append(state)
    for t in range(cfg.total_steps):
        state = step_fn(state, reference, cfg, t)
        trace.append(
            (
                t,
                _schedule_k(cfg.k_schedule, t, cfg.total_steps),
                _schedule(*cfg.tau_schedule, t, cfg.total_steps),
                _schedule(*cfg.eps_schedule, t, cfg.total_steps),
                state.energy,
            )
        )
        if state.step_index in snapshots:
            collected.append(state)

    if out_dir is not None:
        from pathlib import Path

        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        for snap in collected:
            path = out / f"{tag}_step_{snap.step_index:03d}.csv"
            with open(path, "w", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerows(snap.positions.tolist())
        with open(out / f"{tag}_trace.csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["step", "K", "tau", "eps", "energy"])
            writer.writerows(trace)
    return collected


# ---------------------------------------------------------------------------
# 2D toy targets
# ---------------------------------------------------------------------------


def _two_blobs(n, rng):
    signs = rng.integers(0, 2, n) * 4.0 - 2.0
    out = rng.normal(0.0, 1.0, (n, 2))
    out[:, 0] += signs
    return out


def _gaussian_mix(n, rng):
    angles = rng.integers(0, 8, n) * (2 * math.pi / 8)
    centers = 2.0 * np.stack([np.cos(angles), np.sin(angles)], axis=1)
    return centers + rng.normal(0.0, 0.35, (n, 2))

def _ring(n, rng):
    theta = rng.uniform(0.0, 2 * math.pi, n)
    radius = 2.0 + rng.normal(0.0, 0.2, n)
    return np.stack([radius * np.cos(theta), radius * np.sin(theta)], axis=1)


def _spirals(n, rng):
    arm = rng.integers(0, 2, n)
    t = np.sqrt(rng.uniform(0.0, 1.0, n)) * 3.0 * math.pi
    sign = np.where(arm == 0, 1.0, -1.0)
    x = sign * t * np.cos(t) / (3.0 * math.pi) * 2.5
    y = sign * t * np.sin(t) / (3.0 * math.pi) * 2.5
    return np.stack([x, y], axis=1) + rng.normal(0.0, 0.12, (n, 2))


def _checkerboard(n, rng):
    cells = [(i, j) for i in range(4) for j in range(4) if (i + j) % 2 == 0]
    idx = rng.integers(0, len(cells), n)
    cell = np.asarray(cells, dtype=np.float64)[idx]
    return cell - 2.0 + rng.uniform(0.0, 1.0, (n, 2))


TOY_TARGETS = {
    "two-blobs": _two_blobs,
    "gaussian-mix": _gaussian_mix,
    "ring": _ring,
    "spirals": _spirals,
    "checkerboard": _checkerboard,
}


def toy_target_samples(name: str, n: int, seed: int) -> SampleSet:
    """Reference draws from one of the named 2D toy targets."""
    try:
        sampler = TOY_TARGETS[name]
    except KeyError:
        raise ValueError(f"unknown target {name!r}; expected one of {sorted(TOY_TARGETS)}") from None
    rng = np.random.default_rng(seed)
    return SampleSet(sampler(n, rng), seed=seed)
