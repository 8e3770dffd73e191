"""Command-line harness: seeded benchmark experiments with machine-readable
CSV outputs.

Subcommands: bench1d, bench-sliced, kl-vs-n, rates, bounds, transport,
estimate. Every output file starts with a one-line JSON header comment holding
the fully resolved configuration and the package version; no timestamps, so
reruns with one seed are byte-identical. RANKDIV_CACHE overrides the
reference-cache path.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .distributions import (
    Gaussian,
    GaussMix2,
    GaussMix2ND,
    FactorLaplace,
    IsoGaussian,
    Laplace,
    ReferenceCache,
    StudentTProduct,
    TruncGaussianBox,
    UniformBox,
    hellinger2_gaussian,
    js_gaussian_proxy,
    js_reference_quadrature,
    kl_gaussian,
    kl_truncgauss_vs_uniform,
    mc_reference,
    quantile_density_ratio,
    tv_gaussian,
)
from .divergence import (
    continuous_f_divergence,
    discrete_f_divergence,
    rank_divergence_exact,
    theory_bounds,
)
from .entropy import EntropySpec
from .kernels import bernstein_hist
from .sliced import SampleSet
from .transport import CoRptConfig, ParticleState, TransportConfig, run_transport, toy_target_samples
from .univariate import empirical_cdf

BOX_2 = ((0.1, 2.0), (-1.0, 0.0))
BOX_5 = BOX_2 + ((2.0, 3.0), (-2.0, -1.5), (-1.0, 1.0))
BOX_10 = BOX_5 + BOX_5
BOXES = {2: BOX_2, 5: BOX_5, 10: BOX_10}

DEFAULT_BENCH1D_ROWS = (
    "mean_shift:js:0.5,mean_shift:js:1.0,mean_shift:js:2.0,"
    "mean_shift:kl:0.5,mean_shift:kl:1.0,mean_shift:kl:2.0,"
    "mean_shift:tv:1.0,"
    "scale:kl:1.2,scale:kl:1.5,scale:kl:2.0,"
    "scale:hellinger2:1.2,scale:hellinger2:1.5,scale:hellinger2:2.0,"
    "multimodal:js:0.5,multimodal:js:1.0,multimodal:js:2.0,"
    "heavy_tail:js:0"
)


# ---------------------------------------------------------------------------
# shared plumbing
# ---------------------------------------------------------------------------


def _run_seeds(base_seed: int, count: int):
    """One spawned SeedSequence per run (index 0 reserved for directions)."""
    return np.random.SeedSequence(base_seed).spawn(count)


def _write_csv(path, config: dict, columns, rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    header = {"version": f"rankdiv-{__version__}", "config": config}
    with open(path, "w", newline="") as fh:
        fh.write("# " + json.dumps(header, sort_keys=True) + "\n")
        writer = csv.writer(fh)
        writer.writerow(columns)
        writer.writerows(rows)


def _fmt(x):
    if isinstance(x, float):
        return f"{x:.10g}"
    return x


def _pair_1d(family: str, param: float):
    """(mu, nu) for the univariate benchmark families."""
    if family == "mean_shift":
        return Gaussian(0.0, 1.0), Gaussian(param, 1.0)
    if family == "scale":
        return Gaussian(0.0, 1.0), Gaussian(0.0, param)
    if family == "multimodal":
        return GaussMix2(param, 1.0), Gaussian(0.0, 1.0)
    if family == "heavy_tail":
        return Laplace(0.0, 1.0), Gaussian(0.0, 1.0)
    raise ValueError(f"unknown 1d family {family!r}")


def reference_1d(family: str, kind: str, param: float, cache: ReferenceCache) -> tuple[float, str]:
    """Reference divergence and its route for a univariate benchmark row.

    Closed forms where they exist; JS by quadrature; the remaining rows by a
    cached 1e7-sample Monte Carlo plug-in (computed once, reused).
    """
    mu, nu = _pair_1d(family, param)
    if family in ("mean_shift", "scale"):
        m0, s0, m1, s1 = mu.mean, mu.std, nu.mean, nu.std
        if kind == "kl":
            return kl_gaussian(m0, s0, m1, s1), "closed_form"
        if kind == "hellinger2":
            return hellinger2_gaussian(m0, s0, m1, s1), "closed_form"
        if kind == "tv":
            return tv_gaussian(m0, s0, m1, s1), "closed_form"
    if kind == "js":
        key = f"js|{family}|{param}"
        value = cache.get_or_compute(
            key, lambda: js_reference_quadrature(mu, nu), route="quadrature"
        )
        return value, "quadrature"
    key = f"{kind}|{family}|{param}|mc1e7"
    value = cache.get_or_compute(
        key,
        lambda: mc_reference(mu, nu, kind, 10_000_000, seed=777).value,
        n_ref=10_000_000,
        seed=777,
        route="mc",
    )
    return value, "mc_1e7"


# ---------------------------------------------------------------------------
# experiments
# ---------------------------------------------------------------------------


def run_bench1d(
    rows: str = DEFAULT_BENCH1D_ROWS,
    k_grid=(32, 64, 128, 256, 512),
    n: int = 10_000,
    runs: int = 10,
    seed: int = 0,
    cache_path=None,
    out=None,
):
    """Univariate ratio benchmark: mean/std of estimate/reference per K.

    Samples are drawn once per run and swept over the K grid (the estimate is
    a deterministic function of the samples once K is fixed).
    """
    if runs < 1 or not k_grid or not rows:
        raise ValueError("need runs >= 1 and nonempty rows / K grid")
    cache = ReferenceCache(cache_path)
    spec_cache: dict[str, EntropySpec] = {}
    agg_rows, detail_rows = [], []
    seeds = _run_seeds(seed, runs + 1)[1:]
    for token in rows.split(","):
        family, kind, param_s = token.strip().split(":")
        param = float(param_s)
        mu, nu = _pair_1d(family, param)
        spec = spec_cache.setdefault(kind, EntropySpec.from_name(kind))
        ref, ref_route = reference_1d(family, kind, param, cache)
        ratios = {K: [] for K in k_grid}
        for run_idx, run_ss in enumerate(seeds):
            rng = np.random.default_rng(run_ss)
            x = mu.sample(n, rng)
            y = nu.sample(n, rng)
            u = empirical_cdf(y, x)
            for K in k_grid:
                est = discrete_f_divergence(bernstein_hist(u, K), spec)
                ratios[K].append(est / ref)
                detail_rows.append(
                    [family, kind, param, K, n, n, run_idx, _fmt(est), _fmt(ref), _fmt(est / ref)]
                )
        for K in k_grid:
            arr = np.asarray(ratios[K])
            agg_rows.append(
                [
                    family,
                    kind,
                    param,
                    K,
                    _fmt(float(arr.mean())),
                    _fmt(float(arr.std(ddof=1))),
                    _fmt(ref),
                    ref_route,
                    n,
                    runs,
                ]
            )
    config = {
        "experiment": "bench1d",
        "rows": rows,
        "k_grid": list(k_grid),
        "n": n,
        "runs": runs,
        "seed": seed,
    }
    if out:
        _write_csv(
            out,
            config,
            ["family", "kind", "param", "K", "mean_ratio", "std_ratio", "reference", "ref_route", "n", "runs"],
            agg_rows,
        )
        _write_csv(
            Path(out).with_name(Path(out).stem + "_detail.csv"),
            config,
            ["family", "kind", "param", "K", "n_mu", "n_nu", "seed", "estimate", "reference", "ratio"],
            detail_rows,
        )
    return agg_rows


def _pair_nd(family: str, param: float, dim: int):
    if family == "mean_shift_iso":
        mean = tuple([param] + [0.0] * (dim - 1))
        return IsoGaussian(tuple([0.0] * dim), 1.0), IsoGaussian(mean, 1.0)
    if family == "scale_iso":
        return IsoGaussian(tuple([0.0] * dim), 1.0), IsoGaussian(tuple([0.0] * dim), param)
    if family == "laplace_vs_gauss":
        return FactorLaplace(dim), IsoGaussian(tuple([0.0] * dim), 1.0)
    if family == "student_vs_gauss":
        return StudentTProduct(param, dim), IsoGaussian(tuple([0.0] * dim), 1.0)
    if family == "mixture_vs_gauss":
        return GaussMix2ND(param, dim), IsoGaussian(tuple([0.0] * dim), 1.0)
    raise ValueError(f"unknown nd family {family!r}")


def reference_nd(family: str, kind: str, param: float, dim: int, cache: ReferenceCache):
    """Reference for the sliced benchmarks (closed form, proxy, or cached MC)."""
    if family in ("mean_shift_iso", "scale_iso"):
        m0, s0 = 0.0, 1.0
        m1 = param if family == "mean_shift_iso" else 0.0
        s1 = 1.0 if family == "mean_shift_iso" else param
        if kind == "kl":
            if family == "mean_shift_iso":
                return param * param / 2.0, "closed_form"
            return dim * kl_gaussian(0.0, 1.0, 0.0, param), "closed_form"
        if kind == "hellinger2":
            if family == "mean_shift_iso":
                return 1.0 - math.exp(-param * param / 8.0), "closed_form"
            bc_1d = math.sqrt(2.0 * s0 * s1 / (s0 * s0 + s1 * s1))
            return 1.0 - bc_1d**dim, "closed_form"
        if kind == "js":
            mean1 = [m1] + [0.0] * (dim - 1)
            val = js_gaussian_proxy(
                [0.0] * dim, [1.0] * dim, mean1, [s1 * s1] * dim
            )
            return val, "gaussian_proxy"
    mu, nu = _pair_nd(family, param, dim)
    key = f"{kind}|{family}|{param}|d{dim}|mc1e6"
    value = cache.get_or_compute(
        key,
        lambda: mc_reference(mu, nu, kind, 1_000_000, seed=778).value,
        n_ref=1_000_000,
        seed=778,
        route="mc",
    )
    return value, "mc_1e6"


def run_bench_sliced(
    family: str = "mean_shift_iso",
    kind: str = "kl",
    param: float = 1.0,
    dim: int = 5,
    K: int = 64,
    L: int = 128,
    n: int = 10_000,
    runs: int = 10,
    seed: int = 0,
    cache_path=None,
    out=None,
    per_slice_out=None,
):
    """Sliced benchmark: d-scaled ratio to the reference, directions fixed once.

    The direction set is drawn once per experiment from the first spawned
    child of the base seed and shared by all runs, so run-to-run scatter
    reflects data noise only.
    """
    cache = ReferenceCache(cache_path)
    spec = EntropySpec.from_name(kind)
    mu, nu = _pair_nd(family, param, dim)
    ref, ref_route = reference_nd(family, kind, param, dim, cache)
    children = _run_seeds(seed, runs + 1)
    dir_rng = np.random.default_rng(children[0])
    dirs = dir_rng.normal(size=(L, dim))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    rows, slice_rows = [], []
    for run_idx, run_ss in enumerate(children[1:]):
        rng = np.random.default_rng(run_ss)
        x = mu.sample(n, rng)
        y = nu.sample(n, rng)
        per_slice = np.empty(L)
        for i, s in enumerate(dirs):
            u = empirical_cdf(y @ s, x @ s)
            per_slice[i] = discrete_f_divergence(bernstein_hist(u, K), spec)
            slice_rows.append([run_idx, i, _fmt(float(per_slice[i]))])
        est = float(per_slice.mean())
        rows.append(
            [
                family,
                kind,
                param,
                dim,
                K,
                L,
                n,
                run_idx,
                _fmt(est),
                _fmt(dim * est),
                _fmt(ref),
                ref_route,
                _fmt(dim * est / ref),
            ]
        )
    config = {
        "experiment": "bench-sliced",
        "family": family,
        "kind": kind,
        "param": param,
        "dim": dim,
        "K": K,
        "L": L,
        "n": n,
        "runs": runs,
        "seed": seed,
    }
    columns = [
        "family", "kind", "param", "dim", "K", "L", "n", "seed",
        "estimate", "d_scaled", "reference", "ref_route", "d_scaled_ratio",
    ]
    if out:
        _write_csv(out, config, columns, rows)
    if per_slice_out:
        _write_csv(per_slice_out, config, ["run", "direction_index", "slice_value"], slice_rows)
    return rows


def _sample_trunc_and_uniform(box, n: int, rng):
    mu = TruncGaussianBox(box)
    nu = UniformBox(box)
    return mu.sample(n, rng), nu.sample(n, rng)


def run_kl_vs_n(
    dim: int = 2,
    n_grid=(10_000, 20_000, 40_000, 80_000, 160_000, 320_000, 640_000),
    K: int = 64,
    runs: int = 10,
    seed: int = 0,
    out=None,
):
    """Axis-corrected KL of the truncated Gaussian against the uniform box,
    per sample size, with the analytic truth alongside."""
    box = BOXES[dim]
    truth = kl_truncgauss_vs_uniform(box)
    spec = EntropySpec.from_name("kl")
    seeds = _run_seeds(seed, runs + 1)[1:]
    rows = []
    for n in n_grid:
        estimates = []
        for run_idx, run_ss in enumerate(seeds):
            rng = np.random.default_rng(run_ss)
            x, y = _sample_trunc_and_uniform(box, n, rng)
            total = 0.0
            for j in range(dim):
                u = empirical_cdf(y[:, j], x[:, j])
                total += discrete_f_divergence(bernstein_hist(u, K), spec)
            estimates.append(total)
        arr = np.asarray(estimates)
        rows.append(
            [dim, n, K, runs, _fmt(float(arr.mean())), _fmt(float(arr.std(ddof=1))), _fmt(truth)]
        )
    config = {
        "experiment": "kl-vs-n",
        "dim": dim,
        "n_grid": list(n_grid),
        "K": K,
        "runs": runs,
        "seed": seed,
    }
    if out:
        _write_csv(out, config, ["dim", "n", "K", "runs", "mean_estimate", "std_estimate", "truth"], rows)
    return rows


RATE_PAIRS = {
    "scale_chi2": ("chi2", Gaussian(0.0, 1.0), Gaussian(0.0, 2.0)),
    "heavy_tail_js": ("js", Laplace(0.0, 1.0), Gaussian(0.0, 1.0)),
    "mean_shift_kl": ("kl", Gaussian(0.0, 1.0), Gaussian(1.0, 1.0)),
}


def run_rates(
    pairs=("scale_chi2", "heavy_tail_js", "mean_shift_kl"),
    k_grid=(8, 16, 32, 64, 128, 256, 512, 1024),
    out=None,
):
    """Quadrature-exact K-convergence: per-K gap D - D^(K) and the log-log
    slope fitted after dropping the two smallest K (pre-asymptotic bias)."""
    rows, slopes = [], {}
    for name in pairs:
        kind, mu, nu = RATE_PAIRS[name]
        spec = EntropySpec.from_name(kind)
        ratio = quantile_density_ratio(mu, nu)
        d_cont = continuous_f_divergence(ratio, spec)
        gaps = []
        for K in k_grid:
            dk = rank_divergence_exact(ratio, K, spec).value
            gap = d_cont - dk
            gaps.append(gap)
            rows.append([name, kind, K, _fmt(dk), _fmt(d_cont), _fmt(gap), _fmt(abs(gap / d_cont))])
        fit_k = np.asarray(k_grid[2:], dtype=float)
        fit_g = np.asarray(gaps[2:], dtype=float)
        slope = float(np.polyfit(np.log(fit_k), np.log(fit_g), 1)[0])
        slopes[name] = slope
        rows.append([name, kind, "slope", _fmt(slope), "", "", ""])
    config = {"experiment": "rates", "pairs": list(pairs), "k_grid": list(k_grid)}
    if out:
        _write_csv(out, config, ["pair", "kind", "K", "d_k", "d_continuous", "gap", "rel_gap"], rows)
    return rows, slopes


def run_bounds(
    kind: str = "tv",
    K: int = 8,
    n: int = 1000,
    m: int = 1000,
    trials: int = 200,
    delta: float = 0.05,
    seed: int = 0,
    out=None,
):
    """Empirical validation of the finite-sample and concentration bounds on
    the self-comparison mu = nu = N(0,1) (true value 0)."""
    spec = EntropySpec.from_name(kind)
    bounds = theory_bounds(spec, K, n, m)
    seeds = _run_seeds(seed, trials + 1)[1:]
    values = np.empty(trials)
    for i, trial_ss in enumerate(seeds):
        rng = np.random.default_rng(trial_ss)
        x = rng.normal(0.0, 1.0, n)
        y = rng.normal(0.0, 1.0, m)
        values[i] = discrete_f_divergence(bernstein_hist(empirical_cdf(y, x), K), spec)
    mean_err = float(np.abs(values).mean())  # true D^(K) is 0 at mu = nu
    radius = bounds.concentration_radius(delta)
    coverage = float(np.mean(np.abs(values - values.mean()) <= radius))
    report = [
        ["trial_mean_abs_error", _fmt(mean_err)],
        ["finite_sample_mean_bound", _fmt(bounds.finite_sample_mean_bound)],
        ["mean_bound_satisfied", int(mean_err <= bounds.finite_sample_mean_bound)],
        ["delta", _fmt(delta)],
        ["concentration_radius", _fmt(radius)],
        ["empirical_coverage", _fmt(coverage)],
        ["coverage_satisfied", int(coverage >= 1.0 - delta)],
        ["lipschitz_constant", _fmt(bounds.lipschitz)],
    ]
    config = {
        "experiment": "bounds",
        "kind": kind,
        "K": K,
        "n": n,
        "m": m,
        "trials": trials,
        "delta": delta,
        "seed": seed,
    }
    if out:
        _write_csv(out, config, ["metric", "value"], report)
    return dict(report)


def run_transport_cli(
    target: str = "two-blobs",
    algo: str = "rpt",
    steps: int = 400,
    n_particles: int = 1000,
    n_reference: int = 1000,
    seed: int = 0,
    snapshots=(0, 1, 5, 10, 20, 40, 100, 200, 400),
    out_dir=None,
    tag=None,
    **cfg_overrides,
):
    """Run a toy transport experiment and write snapshots plus the energy trace."""
    snapshots = [t for t in snapshots if t <= steps]
    reference = toy_target_samples(target, n_reference, seed=seed + 1)
    rng = np.random.default_rng(np.random.SeedSequence([seed, 2]))
    initial = ParticleState(rng.normal(0.0, 1.0, (n_particles, 2)), seed=seed)
    if algo == "rpt":
        cfg = TransportConfig(total_steps=steps, **cfg_overrides)
    elif algo == "co-rpt":
        cfg = CoRptConfig(total_steps=steps, **cfg_overrides)
    else:
        raise ValueError(f"unknown algo {algo!r}")
    tag = tag or f"{algo}_{target}"
    states = run_transport(initial, reference, cfg, snapshots, out_dir=out_dir, tag=tag, algo=algo)
    return states


def run_estimate(
    mu_csv,
    nu_csv,
    kind: str = "kl",
    K: int = 64,
    route: str = "smoothed",
    tau: float = 0.0,
    L: int = 128,
    axis: bool = False,
    seed: int = 0,
):
    """One-shot estimation from two CSV sample files (rows are samples,
    columns are coordinates)."""
    from .divergence import rank_divergence
    from .sliced import axis_corrected_divergence, sample_directions, sliced_rank_divergence

    x = np.loadtxt(mu_csv, delimiter=",", ndmin=2)
    y = np.loadtxt(nu_csv, delimiter=",", ndmin=2)
    spec = EntropySpec.from_name(kind)
    if x.shape[1] != y.shape[1]:
        raise ValueError("sample files must have the same number of columns")
    if x.shape[1] == 1:
        est = rank_divergence(x[:, 0], y[:, 0], K, spec, route=route, seed=seed, tau=tau)
    elif axis:
        est = axis_corrected_divergence(SampleSet(x), SampleSet(y), K, spec, route=route, tau=tau, seed=seed)
    else:
        dirs = sample_directions(x.shape[1], L, seed=seed)
        est = sliced_rank_divergence(
            SampleSet(x), SampleSet(y), K, spec, dirs, route=route, tau=tau, seed=seed
        )
    return {
        "value": est.value,
        "K": est.K,
        "kind": kind,
        "route": est.route,
        "n_mu": est.n_mu,
        "n_nu": est.n_nu,
        "seed": seed,
        "dim": int(x.shape[1]),
    }


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def _parse_int_list(text: str):
    return tuple(int(v) for v in text.split(",") if v.strip())


def _load_config_file(path):
    """Flat key=value file; values typed by literal inference."""
    values = {}
    for raw in Path(path).read_text().splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, _, val = line.partition("=")
        key = key.strip().replace("-", "_")
        val = val.strip()
        if val.lower() in ("true", "false"):
            values[key] = val.lower() == "true"
            continue
        for cast in (int, float):
            try:
                values[key] = cast(val)
                break
            except ValueError:
                continue
        else:
            values[key] = val
    return values


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rankdiv", description=__doc__)
    parser.add_argument("--config", help="flat key=value config file (flags override)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bench1d", help="univariate ratio benchmark (Table-style)")
    p.add_argument("--rows", default=DEFAULT_BENCH1D_ROWS, help="family:kind:param triplets, comma separated")
    p.add_argument("--k-grid", default="32,64,128,256,512")
    p.add_argument("--n", type=int, default=10_000)
    p.add_argument("--runs", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--cache")
    p.add_argument("--out", required=True)

    p = sub.add_parser("bench-sliced", help="sliced estimator benchmark in d dimensions")
    p.add_argument("--family", default="mean_shift_iso")
    p.add_argument("--kind", default="kl")
    p.add_argument("--param", type=float, default=1.0)
    p.add_argument("--dim", type=int, default=5)
    p.add_argument("--k", type=int, default=64)
    p.add_argument("--slices", type=int, default=128)
    p.add_argument("--n", type=int, default=10_000)
    p.add_argument("--runs", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--cache")
    p.add_argument("--per-slice-out")
    p.add_argument("--out", required=True)

    p = sub.add_parser("kl-vs-n", help="axis-corrected truncated-Gaussian KL vs sample size")
    p.add_argument("--dim", type=int, choices=(2, 5, 10), default=2)
    p.add_argument("--n-grid", default="10000,20000,40000,80000,160000,320000,640000")
    p.add_argument("--k", type=int, default=64)
    p.add_argument("--runs", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)

    p = sub.add_parser("rates", help="quadrature-exact K-convergence slopes")
    p.add_argument("--pairs", default="scale_chi2,heavy_tail_js,mean_shift_kl")
    p.add_argument("--k-grid", default="8,16,32,64,128,256,512,1024")
    p.add_argument("--out", required=True)

    p = sub.add_parser("bounds", help="finite-sample / concentration bound harness")
    p.add_argument("--kind", default="tv")
    p.add_argument("--k", type=int, default=8)
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--m", type=int, default=1000)
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--delta", type=float, default=0.05)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)

    p = sub.add_parser("transport", help="rank-proximal transport on a 2D toy target")
    p.add_argument("--target", choices=("checkerboard", "ring", "spirals", "two-blobs", "gaussian-mix"), default="two-blobs")
    p.add_argument("--algo", choices=("rpt", "co-rpt"), default="rpt")
    p.add_argument("--steps", type=int, default=400)
    p.add_argument("--n-particles", type=int, default=1000)
    p.add_argument("--n-reference", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--snapshots", default="0,1,5,10,20,40,100,200,400")
    p.add_argument("--slices", type=int, default=10)
    p.add_argument("--eta", type=float, default=0.5)
    p.add_argument("--k-start", type=int, default=80)
    p.add_argument("--k-end", type=int, default=128)
    p.add_argument("--tau-start", type=float, default=0.30)
    p.add_argument("--tau-end", type=float, default=0.10)
    p.add_argument("--eps-start", type=float, default=0.20)
    p.add_argument("--eps-end", type=float, default=0.15)
    p.add_argument("--inner-steps", type=int, default=5)
    p.add_argument("--clip-cap", type=float, default=None)
    p.add_argument("--beta", type=float, default=0.5)
    p.add_argument("--no-whiten", action="store_true")
    p.add_argument("--kind", default="kl")
    p.add_argument("--tag")
    p.add_argument("--out-dir", required=True)

    p = sub.add_parser("estimate", help="one-shot estimation from two CSV sample files")
    p.add_argument("mu_csv")
    p.add_argument("nu_csv")
    p.add_argument("--kind", default="kl")
    p.add_argument("--k", type=int, default=64)
    p.add_argument("--route", choices=("smoothed", "counted"), default="smoothed")
    p.add_argument("--tau", type=float, default=0.0)
    p.add_argument("--slices", type=int, default=128)
    p.add_argument("--axis", action="store_true", help="axis-corrected sum instead of slicing")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")

    return parser


def _apply_config_defaults(parser: argparse.ArgumentParser, values: dict) -> None:
    """Override matching option defaults on the parser and every subparser;
    explicit command-line flags still win over config-file values."""
    parsers = [parser]
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            parsers.extend(action.choices.values())
    for p in parsers:
        for action in p._actions:
            if action.dest in values:
                action.default = values[action.dest]
                action.required = False


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    if "--config" in argv:
        cfg_path = argv[argv.index("--config") + 1]
        _apply_config_defaults(parser, _load_config_file(cfg_path))
    args = parser.parse_args(argv)

    if args.command == "bench1d":
        run_bench1d(
            rows=args.rows,
            k_grid=_parse_int_list(args.k_grid),
            n=args.n,
            runs=args.runs,
            seed=args.seed,
            cache_path=args.cache,
            out=args.out,
        )
    elif args.command == "bench-sliced":
        run_bench_sliced(
            family=args.family,
            kind=args.kind,
            param=args.param,
            dim=args.dim,
            K=args.k,
            L=args.slices,
            n=args.n,
            runs=args.runs,
            seed=args.seed,
            cache_path=args.cache,
            out=args.out,
            per_slice_out=args.per_slice_out,
        )
    elif args.command == "kl-vs-n":
        run_kl_vs_n(
            dim=args.dim,
            n_grid=_parse_int_list(args.n_grid),
            K=args.k,
            runs=args.runs,
            seed=args.seed,
            out=args.out,
        )
    elif args.command == "rates":
        run_rates(pairs=tuple(args.pairs.split(",")), k_grid=_parse_int_list(args.k_grid), out=args.out)
    elif args.command == "bounds":
        run_bounds(
            kind=args.kind,
            K=args.k,
            n=args.n,
            m=args.m,
            trials=args.trials,
            delta=args.delta,
            seed=args.seed,
            out=args.out,
        )
    elif args.command == "transport":
        overrides = dict(
            eta=args.eta,
            k_schedule=(args.k_start, args.k_end),
            tau_schedule=(args.tau_start, args.tau_end),
            eps_schedule=(args.eps_start, args.eps_end),
            inner_steps=args.inner_steps,
            clip_cap=args.clip_cap,
            generator=EntropySpec.from_name(args.kind),
        )
        if args.algo == "rpt":
            overrides["n_slices"] = args.slices
        else:
            overrides["beta"] = args.beta
            overrides["whiten"] = not args.no_whiten
        run_transport_cli(
            target=args.target,
            algo=args.algo,
            steps=args.steps,
            n_particles=args.n_particles,
            n_reference=args.n_reference,
            seed=args.seed,
            snapshots=_parse_int_list(args.snapshots),
            out_dir=args.out_dir,
            tag=args.tag,
            **overrides,
        )
    elif args.command == "estimate":
        result = run_estimate(
            args.mu_csv,
            args.nu_csv,
            kind=args.kind,
            K=args.k,
            route=args.route,
            tau=args.tau,
            L=args.slices,
            axis=args.axis,
            seed=args.seed,
        )
        text = json.dumps(result, sort_keys=True)
        if args.out:
            Path(args.out).write_text(text + "\n")
        print(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
