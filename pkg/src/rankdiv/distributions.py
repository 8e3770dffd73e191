"""Benchmark distribution families: samplers, densities, CDFs/quantiles,
quantile-domain density ratios, and the analytic / quadrature / Monte Carlo
reference divergences they admit.

All reference values are in the f-divergence conventions used by the
estimators: KL in nats, JS = (1/2)KL(p||m) + (1/2)KL(q||m) in [0, log 2],
squared Hellinger = 1 - BC in [0, 1], TV in the l1 form integral |p - q|
(twice the sup-form) matching the |t - 1| generator.
"""

from __future__ import annotations

import json
import math
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import integrate, optimize, stats
from scipy.special import ndtr

from .sliced import SampleSet
from .univariate import Samples1D

_LOG2 = math.log(2.0)

__all__ = [
    "Gaussian",
    "Laplace",
    "StudentT",
    "UniformInterval",
    "GaussMix2",
    "IsoGaussian",
    "DiagGaussian",
    "TruncGaussianBox",
    "UniformBox",
    "FactorLaplace",
    "StudentTProduct",
    "GaussMix2ND",
    "QuantileDensityRatio",
    "quantile_density_ratio",
    "sample",
    "kl_gaussian",
    "hellinger2_gaussian",
    "tv_gaussian",
    "js_reference_quadrature",
    "js_gaussian_proxy",
    "MCReference",
    "mc_reference",
    "kl_truncgauss_vs_uniform",
    "ReferenceCache",
]


# ---------------------------------------------------------------------------
# one-dimensional families
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Gaussian:
    mean: float = 0.0
    std: float = 1.0

    def __post_init__(self):
        if self.std <= 0:
            raise ValueError("std must be positive")

    def sample(self, n, rng):
        return rng.normal(self.mean, self.std, n)

    def logpdf(self, x):
        return stats.norm.logpdf(x, self.mean, self.std)

    def pdf(self, x):
        return stats.norm.pdf(x, self.mean, self.std)

    def cdf(self, x):
        return stats.norm.cdf(x, self.mean, self.std)

    def ppf(self, u):
        return stats.norm.ppf(u, self.mean, self.std)

    def support(self):
        return (-math.inf, math.inf)


@dataclass(frozen=True)
class Laplace:
    loc: float = 0.0
    scale: float = 1.0

    def __post_init__(self):
        if self.scale <= 0:
            raise ValueError("scale must be positive")

    def sample(self, n, rng):
        return rng.laplace(self.loc, self.scale, n)

    def logpdf(self, x):
        return stats.laplace.logpdf(x, self.loc, self.scale)

    def pdf(self, x):
        return stats.laplace.pdf(x, self.loc, self.scale)

    def cdf(self, x):
        return stats.laplace.cdf(x, self.loc, self.scale)

    def ppf(self, u):
        return stats.laplace.ppf(u, self.loc, self.scale)

    def support(self):
        return (-math.inf, math.inf)


@dataclass(frozen=True)
class StudentT:
    df: float = 3.0

    def __post_init__(self):
        if self.df <= 0:
            raise ValueError("df must be positive")

    def sample(self, n, rng):
        return rng.standard_t(self.df, n)

    def logpdf(self, x):
        return stats.t.logpdf(x, self.df)

    def pdf(self, x):
        return stats.t.pdf(x, self.df)

    def cdf(self, x):
        return stats.t.cdf(x, self.df)

    def ppf(self, u):
        return stats.t.ppf(u, self.df)

    def support(self):
        return (-math.inf, math.inf)


@dataclass(frozen=True)
class UniformInterval:
    lo: float = 0.0
    hi: float = 1.0

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError("need lo < hi")

    def sample(self, n, rng):
        return rng.uniform(self.lo, self.hi, n)

    def logpdf(self, x):
        x = np.asarray(x, dtype=np.float64)
        out = np.full(x.shape, -np.inf)
        inside = (x >= self.lo) & (x <= self.hi)
        out[inside] = -math.log(self.hi - self.lo)
        return out if out.ndim else float(out)

    def pdf(self, x):
        return np.exp(self.logpdf(x))

    def cdf(self, x):
        return np.clip((np.asarray(x, dtype=np.float64) - self.lo) / (self.hi - self.lo), 0.0, 1.0)

    def ppf(self, u):
        return self.lo + (self.hi - self.lo) * np.asarray(u, dtype=np.float64)

    def support(self):
        return (self.lo, self.hi)


@dataclass(frozen=True)
class GaussMix2:
    """Symmetric two-component mixture (1/2) N(-delta, std^2) + (1/2) N(+delta, std^2)."""

    delta: float
    std: float = 1.0

    def __post_init__(self):
        if self.std <= 0:
            raise ValueError("std must be positive")

    def sample(self, n, rng):
        signs = rng.integers(0, 2, n) * 2.0 - 1.0
        return rng.normal(signs * self.delta, self.std)

    def logpdf(self, x):
        a = stats.norm.logpdf(x, -self.delta, self.std)
        b = stats.norm.logpdf(x, self.delta, self.std)
        return np.logaddexp(a, b) - _LOG2

    def pdf(self, x):
        return np.exp(self.logpdf(x))

    def cdf(self, x):
        return 0.5 * (stats.norm.cdf(x, -self.delta, self.std) + stats.norm.cdf(x, self.delta, self.std))

    def ppf(self, u):
        u_arr = np.atleast_1d(np.asarray(u, dtype=np.float64))
        lo = stats.norm.ppf(u_arr, -self.delta, self.std)
        hi = stats.norm.ppf(u_arr, self.delta, self.std)
        out = np.empty_like(u_arr)
        for i, (ui, a, b) in enumerate(zip(u_arr, lo, hi)):
            if not 0.0 < ui < 1.0:
                out[i] = -math.inf if ui <= 0 else math.inf
                continue
            out[i] = optimize.brentq(lambda x: self.cdf(x) - ui, a - 1e-9, b + 1e-9, xtol=1e-12)
        return out if np.asarray(u).ndim else float(out[0])

    def support(self):
        return (-math.inf, math.inf)


# ---------------------------------------------------------------------------
# d-dimensional families
# ---------------------------------------------------------------------------


def _box_array(box) -> np.ndarray:
    arr = np.asarray(box, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[1] != 2 or arr.shape[0] < 1:
        raise ValueError("box must be a sequence of (lo, hi) pairs")
    if not np.all(arr[:, 0] < arr[:, 1]):
        raise ValueError("each box interval needs lo < hi")
    return arr


@dataclass(frozen=True)
class IsoGaussian:
    mean: tuple
    std: float = 1.0

    def __post_init__(self):
        if self.std <= 0:
            raise ValueError("std must be positive")

    @property
    def dim(self):
        return len(self.mean)

    def sample(self, n, rng):
        return rng.normal(np.asarray(self.mean), self.std, (n, self.dim))

    def logpdf(self, x):
        x = np.atleast_2d(x)
        z = (x - np.asarray(self.mean)) / self.std
        return -0.5 * np.sum(z * z, axis=1) - self.dim * (0.5 * math.log(2 * math.pi) + math.log(self.std))


@dataclass(frozen=True)
class DiagGaussian:
    mean: tuple
    stds: tuple

    def __post_init__(self):
        if len(self.mean) != len(self.stds):
            raise ValueError("mean and stds must have equal length")
        if any(s <= 0 for s in self.stds):
            raise ValueError("stds must be positive")

    @property
    def dim(self):
        return len(self.mean)

    def sample(self, n, rng):
        return rng.normal(np.asarray(self.mean), np.asarray(self.stds), (n, self.dim))

    def logpdf(self, x):
        x = np.atleast_2d(x)
        z = (x - np.asarray(self.mean)) / np.asarray(self.stds)
        return (
            -0.5 * np.sum(z * z, axis=1)
            - 0.5 * self.dim * math.log(2 * math.pi)
            - np.sum(np.log(self.stds))
        )


@dataclass(frozen=True)
class TruncGaussianBox:
    """Standard Gaussian truncated (and renormalized) to an axis-aligned box.

    The box indicator and the isotropic density both factorize, so sampling is
    per-coordinate accept-reject; the joint law is identical to rejecting
    whole d-dimensional draws, with acceptance rate per coordinate instead of
    the product over coordinates.
    """

    box: tuple

    def __post_init__(self):
        object.__setattr__(self, "box", tuple(map(tuple, _box_array(self.box))))

    @property
    def dim(self):
        return len(self.box)

    def coordinate_acceptance(self) -> np.ndarray:
        arr = _box_array(self.box)
        return ndtr(arr[:, 1]) - ndtr(arr[:, 0])

    def sample(self, n, rng, max_batches: int = 10_000):
        accept = self.coordinate_acceptance()
        if np.any(accept < 1e-6):
            raise ValueError("degenerate box: coordinate acceptance rate below 1e-6")
        out = np.empty((n, self.dim))
        for j, (a, b) in enumerate(self.box):
            have = 0
            for _ in range(max_batches):
                need = n - have
                if need == 0:
                    break
                batch = rng.normal(0.0, 1.0, max(1024, int(need / accept[j] * 1.2)))
                batch = batch[(batch >= a) & (batch <= b)]
                take = min(batch.size, need)
                out[have : have + take, j] = batch[:take]
                have += take
            else:
                raise RuntimeError("accept-reject iteration cap exceeded")
        return out

    def logpdf(self, x):
        x = np.atleast_2d(x)
        arr = _box_array(self.box)
        log_z = np.log(self.coordinate_acceptance()).sum()
        inside = np.all((x >= arr[:, 0]) & (x <= arr[:, 1]), axis=1)
        base = -0.5 * np.sum(x * x, axis=1) - 0.5 * self.dim * math.log(2 * math.pi)
        return np.where(inside, base - log_z, -np.inf)


@dataclass(frozen=True)
class UniformBox:
    box: tuple

    def __post_init__(self):
        object.__setattr__(self, "box", tuple(map(tuple, _box_array(self.box))))

    @property
    def dim(self):
        return len(self.box)

    def sample(self, n, rng):
        arr = _box_array(self.box)
        return rng.uniform(arr[:, 0], arr[:, 1], (n, self.dim))

    def logpdf(self, x):
        x = np.atleast_2d(x)
        arr = _box_array(self.box)
        inside = np.all((x >= arr[:, 0]) & (x <= arr[:, 1]), axis=1)
        log_vol = np.log(arr[:, 1] - arr[:, 0]).sum()
        return np.where(inside, -log_vol, -np.inf)


@dataclass(frozen=True)
class FactorLaplace:
    dim: int
    scale: float = 1.0

    def sample(self, n, rng):
        return rng.laplace(0.0, self.scale, (n, self.dim))

    def logpdf(self, x):
        x = np.atleast_2d(x)
        return np.sum(stats.laplace.logpdf(x, 0.0, self.scale), axis=1)


@dataclass(frozen=True)
class StudentTProduct:
    df: float
    dim: int

    def sample(self, n, rng):
        return rng.standard_t(self.df, (n, self.dim))

    def logpdf(self, x):
        x = np.atleast_2d(x)
        return np.sum(stats.t.logpdf(x, self.df), axis=1)


@dataclass(frozen=True)
class GaussMix2ND:
    """(1/2) N(-delta e_1, I) + (1/2) N(+delta e_1, I)."""

    delta: float
    dim: int

    def _means(self):
        m = np.zeros((2, self.dim))
        m[0, 0] = -self.delta
        m[1, 0] = self.delta
        return m

    def sample(self, n, rng):
        comp = rng.integers(0, 2, n)
        return rng.normal(0.0, 1.0, (n, self.dim)) + self._means()[comp]

    def logpdf(self, x):
        x = np.atleast_2d(x)
        means = self._means()
        logs = [
            -0.5 * np.sum((x - m) ** 2, axis=1) - 0.5 * self.dim * math.log(2 * math.pi)
            for m in means
        ]
        return np.logaddexp(logs[0], logs[1]) - _LOG2


def sample(dist, n: int, seed: int):
    """Draw n i.i.d. points; returns Samples1D (1-d families) or SampleSet."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed)
    values = dist.sample(n, rng)
    values = np.asarray(values, dtype=np.float64)
    if values.ndim == 1:
        return Samples1D(values, seed=seed)
    return SampleSet(values, seed=seed)


# ---------------------------------------------------------------------------
# quantile-domain density ratio
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class QuantileDensityRatio:
    """u -> (pdf_mu / pdf_nu)(Q_nu(u)), clamped to [clamp, 1-clamp]."""

    mu: object
    nu: object
    clamp: float = 1e-15

    def __call__(self, u):
        u = np.clip(np.asarray(u, dtype=np.float64), self.clamp, 1.0 - self.clamp)
        x = self.nu.ppf(u)
        return np.exp(self.mu.logpdf(x) - self.nu.logpdf(x))


def quantile_density_ratio(mu, nu) -> QuantileDensityRatio:
    """Build the ratio after checking absolute continuity (support inclusion)."""
    mu_lo, mu_hi = mu.support()
    nu_lo, nu_hi = nu.support()
    if mu_lo < nu_lo or mu_hi > nu_hi:
        raise ValueError("mu is not absolutely continuous w.r.t. nu (support mismatch)")
    return QuantileDensityRatio(mu, nu)


# ---------------------------------------------------------------------------
# reference divergences
# ---------------------------------------------------------------------------


def kl_gaussian(m0: float, s0: float, m1: float, s1: float) -> float:
    """Closed-form KL(N(m0,s0^2) || N(m1,s1^2)) in nats."""
    if s0 <= 0 or s1 <= 0:
        raise ValueError("scales must be positive")
    return math.log(s1 / s0) + (s0 * s0 + (m0 - m1) ** 2) / (2.0 * s1 * s1) - 0.5


def hellinger2_gaussian(m0: float, s0: float, m1: float, s1: float) -> float:
    """Squared Hellinger 1 - BC between two univariate Gaussians, in [0, 1]."""
    if s0 <= 0 or s1 <= 0:
        raise ValueError("scales must be positive")
    den = s0 * s0 + s1 * s1
    return 1.0 - math.sqrt(2.0 * s0 * s1 / den) * math.exp(-((m0 - m1) ** 2) / (4.0 * den))


def tv_gaussian(m0: float, s0: float, m1: float, s1: float) -> float:
    """l1 total variation integral |p - q| between two Gaussians (closed form).

    Densities cross where log p = log q, a quadratic in x; the signed integral
    over each crossing segment is a difference of Gaussian CDFs.
    """
    if s0 <= 0 or s1 <= 0:
        raise ValueError("scales must be positive")
    if m0 == m1 and s0 == s1:
        return 0.0
    a = 0.5 * (1.0 / (s1 * s1) - 1.0 / (s0 * s0))
    b = m0 / (s0 * s0) - m1 / (s1 * s1)
    c = 0.5 * (m1 * m1 / (s1 * s1) - m0 * m0 / (s0 * s0)) + math.log(s1 / s0)
    if abs(a) < 1e-300:
        roots = [] if b == 0 else [-c / b]
    else:
        disc = b * b - 4.0 * a * c
        roots = [] if disc < 0 else sorted({(-b - math.sqrt(disc)) / (2 * a), (-b + math.sqrt(disc)) / (2 * a)})
    edges = [-math.inf, *roots, math.inf]
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        seg = (ndtr((hi - m0) / s0) - ndtr((lo - m0) / s0)) - (
            ndtr((hi - m1) / s1) - ndtr((lo - m1) / s1)
        )
        total += abs(seg)
    return total


_JS_WINDOW = 300.0  # all benchmark families have |mean| <= 2, scale <= 2


def _js_expectation(log_self, log_other) -> float:
    """E_self[log(2 p_self / (p_self + p_other))] by adaptive quadrature.

    Log-domain integrand with an underflow guard: where the self density has
    underflowed to zero the contribution is exactly zero (avoids 0 * -inf).
    """

    def integrand(x):
        ls = float(log_self(x))
        if ls < -700.0:
            return 0.0
        lo = float(log_other(x))
        return math.exp(ls) * (_LOG2 + ls - np.logaddexp(ls, lo))

    val, err = integrate.quad(
        integrand, -_JS_WINDOW, _JS_WINDOW, points=[0.0], limit=400, epsabs=1e-12, epsrel=1e-10
    )
    if not math.isfinite(val) or err > 1e-6:
        raise RuntimeError(f"JS quadrature did not converge (value {val}, error estimate {err:.2e})")
    return val


def js_reference_quadrature(mu, nu, quad_points: int | None = None) -> float:
    """JS(mu, nu) in [0, log 2] via the two-term log-domain expectation identity."""
    e_mu = _js_expectation(mu.logpdf, nu.logpdf)
    e_nu = _js_expectation(nu.logpdf, mu.logpdf)
    val = 0.5 * (e_mu + e_nu)
    return min(max(val, 0.0), _LOG2)


def js_gaussian_proxy(mean0, cov_diag0, mean1, cov_diag1) -> float:
    """Moment-matched Gaussian JS proxy (labeled approximation, never a truth
    reference): the mixture is replaced by the Gaussian matching its first two
    moments and JS by (1/2)KL(p||M) + (1/2)KL(q||M)."""
    m0 = np.asarray(mean0, dtype=np.float64)
    m1 = np.asarray(mean1, dtype=np.float64)
    v0 = np.asarray(cov_diag0, dtype=np.float64)
    v1 = np.asarray(cov_diag1, dtype=np.float64)
    mm = 0.5 * (m0 + m1)
    vm = 0.5 * (v0 + v1) + 0.25 * (m0 - m1) ** 2

    def kl_diag(ma, va, mb, vb):
        return 0.5 * float(np.sum(np.log(vb / va) + (va + (ma - mb) ** 2) / vb - 1.0))

    return 0.5 * kl_diag(m0, v0, mm, vm) + 0.5 * kl_diag(m1, v1, mm, vm)


@dataclass(frozen=True)
class MCReference:
    """Plug-in Monte Carlo reference with its standard error and skip count."""

    value: float
    stderr: float
    kind: str
    n_used: int
    n_skipped: int
    seed: int


def _mc_terms(kind: str, lp_self, lp_other):
    if kind == "kl":
        return lp_self - lp_other
    if kind == "tv":
        return np.abs(1.0 - np.exp(lp_other - lp_self))
    if kind == "hellinger2":
        return np.exp(0.5 * (lp_other - lp_self))
    if kind == "js":
        return _LOG2 + lp_self - np.logaddexp(lp_self, lp_other)
    raise ValueError(f"mc_reference does not support kind {kind!r}")


def mc_reference(mu, nu, kind: str, n_ref: int, seed: int) -> MCReference:
    """High-sample plug-in reference from known log-densities.

    kl: E_mu[log p - log q]; js: two-term identity; tv: E_mu|1 - q/p| (l1 form);
    hellinger2: 1 - E_mu[sqrt(q/p)]. Log-domain throughout; samples where a
    log-density ratio is non-finite are skipped and counted.
    """
    kind = kind.lower()
    if n_ref < 100_000:
        raise ValueError("n_ref must be >= 1e5")
    rng = np.random.default_rng(seed)
    x_mu = mu.sample(n_ref, rng)
    terms_mu = _mc_terms(kind, np.asarray(mu.logpdf(x_mu)), np.asarray(nu.logpdf(x_mu)))
    pieces = [terms_mu]
    if kind == "js":
        x_nu = nu.sample(n_ref, rng)
        pieces.append(_mc_terms(kind, np.asarray(nu.logpdf(x_nu)), np.asarray(mu.logpdf(x_nu))))
    vals, errs, skipped, used = [], [], 0, 0
    for terms in pieces:
        ok = np.isfinite(terms)
        skipped += int(np.count_nonzero(~ok))
        used += int(np.count_nonzero(ok))
        kept = terms[ok]
        vals.append(kept.mean())
        errs.append(kept.std(ddof=1) / math.sqrt(kept.size))
    if kind == "js":
        value = 0.5 * (vals[0] + vals[1])
        stderr = 0.5 * math.hypot(errs[0], errs[1])
    elif kind == "hellinger2":
        value = 1.0 - vals[0]
        stderr = errs[0]
    else:
        value, stderr = vals[0], errs[0]
    return MCReference(float(value), float(stderr), kind, used, skipped, seed)


def kl_truncgauss_vs_uniform(box) -> float:
    """Exact KL between the box-truncated standard Gaussian and the uniform law
    on the same box; additive over product coordinates."""
    arr = _box_array(box)
    total = 0.0
    for a, b in arr:
        z = ndtr(b) - ndtr(a)
        phi_a = math.exp(-0.5 * a * a) / math.sqrt(2 * math.pi)
        phi_b = math.exp(-0.5 * b * b) / math.sqrt(2 * math.pi)
        second_moment = 1.0 + (a * phi_a - b * phi_b) / z
        total += -0.5 * math.log(2 * math.pi) - 0.5 * second_moment - math.log(z) + math.log(b - a)
    return total


# ---------------------------------------------------------------------------
# on-disk reference cache
# ---------------------------------------------------------------------------


class ReferenceCache:
    """JSON map from canonical reference key to {value, n_ref, seed, route}.

    Single-writer, many-reader: writes go through a temp file + atomic rename.
    Path resolution order: explicit argument, RANKDIV_CACHE env var, default
    under ~/.cache/rankdiv/.
    """

    def __init__(self, path: str | os.PathLike | None = None):
        if path is None:
            path = os.environ.get("RANKDIV_CACHE")
        if path is None:
            path = Path.home() / ".cache" / "rankdiv" / "references.json"
        self.path = Path(path)

    def _load(self) -> dict:
        if not self.path.exists():
            return {}
        return json.loads(self.path.read_text())

    def get(self, key: str):
        entry = self._load().get(key)
        return None if entry is None else entry["value"]

    def put(self, key: str, value: float, n_ref: int | None, seed: int | None, route: str):
        data = self._load()
        data[key] = {"value": float(value), "n_ref": n_ref, "seed": seed, "route": route}
        self.path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=self.path.parent, suffix=".tmp")
        with os.fdopen(fd, "w") as fh:
            json.dump(data, fh, indent=0, sort_keys=True)
        os.replace(tmp, self.path)

    def get_or_compute(self, key: str, compute, n_ref=None, seed=None, route="computed"):
        cached = self.get(key)
        if cached is not None:
            return cached
        value = float(compute())
        if not math.isfinite(value):
            raise RuntimeError(f"refusing to cache non-finite reference for {key!r}")
        self.put(key, value, n_ref, seed, route)
        return value
