"""Reproducible experiment driver.

Subcommands: ``place`` (greedy vs random sensor stability), ``mconv``
(error convergence in the number of sensors per update generator),
``xi-sweep`` (holdout MSE and true error across the regularization grid),
and ``validate`` (runs all three studies plus an end-to-end property suite).

Every command is a pure function of (config, seeds): identical inputs yield
byte-identical CSVs. Floats are written with 17 significant digits and every
file starts with a comment line carrying the config hash.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import sys
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import analysis, synthetic
from .errors import ConfigError, NumericalFailure, PBDWError
from .estimator import assemble, inf_sup, solve, solve_constrained
from .hilbert import DiscreteSpace, inner, norm, project
from .observation import NoiseModel, build_functionals, measure
from .placement import GreedyConfig, random_place, sgreedy_place
from .reduction import BackgroundSpace, pod, strong_greedy
from .synthetic import ManifoldSpec, training_snapshots
from .update import (
    CSRBF,
    INVERSE_MULTIQUADRIC,
    VARIATIONAL,
    Generator,
    build_update,
    lebesgue_constant,
    modified_inner,
)

DEFAULT_XI_GRID = [float(x) for x in np.logspace(-8.0, 2.0, 16)]

DEFAULT_CONFIG: dict = {
    "grid_shape": [65, 65],
    "manifold": {
        "family": "FourierMix",
        "parameter_range": [2.0, 6.0],
        "bias_amplitude": 1.0,
    },
    "n_train": 20,
    "n_test": 10,
    "n_background": 6,
    "reduction": "pod",
    "generator": {"kind": "variational"},
    "r_w": 0.01,
    "tol": 0.6,
    "m_values": [6, 10, 14, 20, 26],
    "snr_values": [0.0],
    "xi_grid": DEFAULT_XI_GRID,
    "seeds": {"master": 20240811},
    "n_random_trials": 35,
    "exact_recovery": False,
    "mconv_generators": [
        {"kind": "variational"},
        {"kind": "inverse_multiquadric", "scale": 1.0, "exponent": 2},
        {"kind": "csrbf", "scale": 2.0},
    ],
    "xi_sweep": {
        "m_sensors": 60,
        "n_validation": 30,
        "snr_values": [0.0, 0.05, 0.3],
        "tol": 0.3,
        "generator": {"kind": "inverse_multiquadric", "scale": 1.0, "exponent": 2},
        "mu_fraction": 0.95,
    },
    "output_dir": "out",
}


@dataclass(frozen=True)
class XiSweepConfig:
    m_sensors: int
    n_validation: int
    snr_values: tuple[float, ...]
    tol: float
    generator: Generator
    mu_fraction: float


@dataclass(frozen=True)
class ExperimentConfig:
    grid_shape: tuple[int, ...]
    manifold: ManifoldSpec
    n_train: int
    n_test: int
    n_background: int
    reduction: str
    generator: Generator
    r_w: float
    tol: float
    m_values: tuple[int, ...]
    snr_values: tuple[float, ...]
    xi_grid: tuple[float, ...]
    seed: int
    n_random_trials: int
    exact_recovery: bool
    mconv_generators: tuple[Generator, ...]
    xi_sweep: XiSweepConfig
    output_dir: str


# -- config parsing ----------------------------------------------------------


def _generator_from_dict(d: dict, where: str) -> Generator:
    try:
        kind = d["kind"]
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"{where}: generator spec needs a 'kind'") from exc
    try:
        if kind == VARIATIONAL:
            return Generator.variational(d.get("filter_width"))
        if kind == INVERSE_MULTIQUADRIC:
            return Generator.inverse_multiquadric(
                float(d.get("scale", 1.0)), int(d.get("exponent", 2))
            )
        if kind == CSRBF:
            return Generator.csrbf(float(d.get("scale", 2.0)))
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from exc
    raise ConfigError(f"{where}: unknown generator kind {kind!r}")


def _generator_to_dict(gen: Generator) -> dict:
    d: dict = {"kind": gen.kind}
    if gen.kind == INVERSE_MULTIQUADRIC:
        d["scale"] = gen.scale
        d["exponent"] = gen.exponent
    elif gen.kind == CSRBF:
        d["scale"] = gen.scale
    elif gen.filter_width is not None:
        d["filter_width"] = gen.filter_width
    return d


def generator_label(gen: Generator) -> str:
    if gen.kind == VARIATIONAL:
        return "variational"
    if gen.kind == INVERSE_MULTIQUADRIC:
        return f"imq{gen.exponent}"
    return "csrbf"


def config_from_dict(raw: dict) -> ExperimentConfig:
    """Validate a plain-dict config, raising ConfigError naming bad fields."""
    data = dict(DEFAULT_CONFIG)
    unknown = set(raw) - set(DEFAULT_CONFIG)
    if unknown:
        raise ConfigError(f"unknown config fields: {sorted(unknown)}")
    data.update(raw)

    def fail(field: str, why: str) -> ConfigError:
        return ConfigError(f"config field '{field}': {why}")

    try:
        grid_shape = tuple(int(s) for s in data["grid_shape"])
        if len(grid_shape) not in (1, 2) or any(s < 3 for s in grid_shape):
            raise fail("grid_shape", "need 1 or 2 axes with at least 3 nodes each")
        mraw = data["manifold"]
        try:
            manifold = ManifoldSpec(
                family=mraw.get("family", "FourierMix"),
                parameter_range=tuple(float(x) for x in mraw["parameter_range"]),
                bias_amplitude=float(mraw.get("bias_amplitude", 1.0)),
            )
        except (ValueError, KeyError, TypeError) as exc:
            raise fail("manifold", str(exc))
        n_train = int(data["n_train"])
        n_test = int(data["n_test"])
        n_background = int(data["n_background"])
        if not 1 <= n_background <= n_train:
            raise fail("n_background", "must lie in 1..n_train")
        if n_test < 1:
            raise fail("n_test", "must be positive")
        reduction = data["reduction"]
        if reduction not in ("pod", "greedy"):
            raise fail("reduction", "must be 'pod' or 'greedy'")
        r_w = float(data["r_w"])
        if r_w <= 0:
            raise fail("r_w", "must be positive")
        tol = float(data["tol"])
        if not 0.0 <= tol <= 1.0:
            raise fail("tol", "must lie in [0, 1]")
        m_values = tuple(int(m) for m in data["m_values"])
        if not m_values or any(m < 1 for m in m_values) or list(m_values) != sorted(m_values):
            raise fail("m_values", "need a nonempty ascending list of positive ints")
        snr_values = tuple(float(s) for s in data["snr_values"])
        if any(s < 0 for s in snr_values):
            raise fail("snr_values", "must be nonnegative")
        xi_grid = tuple(sorted(float(x) for x in data["xi_grid"]))
        if not xi_grid or any(x < 0 for x in xi_grid):
            raise fail("xi_grid", "need a nonempty list of nonnegative reals")
        seeds = data["seeds"]
        if "master" not in seeds:
            raise fail("seeds", "needs a 'master' entry")
        seed = int(seeds["master"])
        n_random_trials = int(data["n_random_trials"])
        if n_random_trials < 1:
            raise fail("n_random_trials", "must be positive")
        exact_recovery = bool(data["exact_recovery"])
        gens = tuple(
            _generator_from_dict(g, "mconv_generators") for g in data["mconv_generators"]
        )
        if not gens:
            raise fail("mconv_generators", "need at least one generator")
        xs = data["xi_sweep"]
        xi_sweep = XiSweepConfig(
            m_sensors=int(xs["m_sensors"]),
            n_validation=int(xs["n_validation"]),
            snr_values=tuple(float(s) for s in xs["snr_values"]),
            tol=float(xs["tol"]),
            generator=_generator_from_dict(xs["generator"], "xi_sweep.generator"),
            mu_fraction=float(xs.get("mu_fraction", 0.95)),
        )
        if xi_sweep.m_sensors < n_background:
            raise fail("xi_sweep.m_sensors", "must be at least n_background")
        if not 0.0 < xi_sweep.mu_fraction < 1.0:
            raise fail("xi_sweep.mu_fraction", "must lie in (0, 1)")
        return ExperimentConfig(
            grid_shape=grid_shape,
            manifold=manifold,
            n_train=n_train,
            n_test=n_test,
            n_background=n_background,
            reduction=reduction,
            generator=_generator_from_dict(data["generator"], "generator"),
            r_w=r_w,
            tol=tol,
            m_values=m_values,
            snr_values=snr_values,
            xi_grid=xi_grid,
            seed=seed,
            n_random_trials=n_random_trials,
            exact_recovery=exact_recovery,
            mconv_generators=gens,
            xi_sweep=xi_sweep,
            output_dir=str(data["output_dir"]),
        )
    except ConfigError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"malformed config: {exc}") from exc


def config_to_dict(cfg: ExperimentConfig) -> dict:
    """Plain-dict form; round-trips through config_from_dict."""
    return {
        "grid_shape": list(cfg.grid_shape),
        "manifold": {
            "family": cfg.manifold.family,
            "parameter_range": list(cfg.manifold.parameter_range),
            "bias_amplitude": cfg.manifold.bias_amplitude,
        },
        "n_train": cfg.n_train,
        "n_test": cfg.n_test,
        "n_background": cfg.n_background,
        "reduction": cfg.reduction,
        "generator": _generator_to_dict(cfg.generator),
        "r_w": cfg.r_w,
        "tol": cfg.tol,
        "m_values": list(cfg.m_values),
        "snr_values": list(cfg.snr_values),
        "xi_grid": list(cfg.xi_grid),
        "seeds": {"master": cfg.seed},
        "n_random_trials": cfg.n_random_trials,
        "exact_recovery": cfg.exact_recovery,
        "mconv_generators": [_generator_to_dict(g) for g in cfg.mconv_generators],
        "xi_sweep": {
            "m_sensors": cfg.xi_sweep.m_sensors,
            "n_validation": cfg.xi_sweep.n_validation,
            "snr_values": list(cfg.xi_sweep.snr_values),
            "tol": cfg.xi_sweep.tol,
            "generator": _generator_to_dict(cfg.xi_sweep.generator),
            "mu_fraction": cfg.xi_sweep.mu_fraction,
        },
        "output_dir": cfg.output_dir,
    }


def load_config(path: str | Path) -> ExperimentConfig:
    try:
        raw = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config document must be a JSON object")
    return config_from_dict(raw)


def config_hash(cfg: ExperimentConfig) -> str:
    blob = json.dumps(config_to_dict(cfg), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _child_seed(master: int, *tags: int) -> int:
    ss = np.random.SeedSequence([master, *tags])
    return int(ss.generate_state(1, np.uint64)[0])


# -- shared pipeline pieces --------------------------------------------------


def build_context(cfg: ExperimentConfig):
    """Space, background space, and manifold spec shared by all studies."""
    space = DiscreteSpace(cfg.grid_shape)
    snaps = training_snapshots(cfg.manifold, space, cfg.n_train)
    reduce_fn = pod if cfg.reduction == "pod" else strong_greedy
    background = reduce_fn(snaps, cfg.n_background)
    return space, background


def _beta_for_centers(background, space, centers, r_w, gen) -> float:
    fs = build_functionals(space, centers, r_w)
    us = build_update(space, fs, gen)
    return inf_sup(background, us, fs, space)


def _greedy_centers(cfg: ExperimentConfig, background, space, gen, tol, m_target):
    gcfg = GreedyConfig(m_target=m_target, tol=tol, generator=gen)
    result = sgreedy_place(
        background, space, lambda c: build_functionals(space, c, cfg.r_w), gcfg
    )
    return result


def _write_csv(path: Path, header: list[str], rows: list[list], tag: str) -> None:
    lines = [f"# config_hash={tag}", ",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n")


def _fmt(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format(float(v), ".17g")


# -- studies -----------------------------------------------------------------


def cmd_place(cfg: ExperimentConfig, out_dir: Path) -> Path:
    """Greedy vs random sensor stability: per-m inf-sup constants."""
    space, background = build_context(cfg)
    m_max = max(cfg.m_values)
    greedy = _greedy_centers(cfg, background, space, cfg.generator, cfg.tol, m_max)

    rows = []
    random_runs = [
        random_place(space, m_max, _child_seed(cfg.seed, 1, t)).centers
        for t in range(cfg.n_random_trials)
    ]
    for m in cfg.m_values:
        beta_g = _beta_for_centers(background, space, greedy.centers[:m], cfg.r_w, cfg.generator)
        betas_r = []
        for centers in random_runs:
            try:
                betas_r.append(
                    _beta_for_centers(background, space, centers[:m], cfg.r_w, cfg.generator)
                )
            except NumericalFailure:
                betas_r.append(0.0)  # unisolvency breakdown counts as unstable
        betas_r = np.array(betas_r)
        rows.append(
            [
                m,
                beta_g,
                float(np.median(betas_r)),
                float(np.quantile(betas_r, 0.25)),
                float(np.quantile(betas_r, 0.75)),
            ]
        )
    path = out_dir / "placement.csv"
    _write_csv(
        path,
        ["m", "beta_greedy", "beta_random_median", "beta_random_q25", "beta_random_q75"],
        rows,
        config_hash(cfg),
    )
    return path


def _noisy_measurements(fs_train, fs_val, u_true, snr, seed_train, seed_val):
    """Training and validation data sharing the training noise scale."""
    noise = NoiseModel(snr=snr, seed=seed_train)
    y_train = measure(fs_train, u_true, noise)
    sigma = noise.sigma
    y_val = fs_val.apply(u_true)
    if sigma > 0.0:
        rng = np.random.default_rng(seed_val)
        y_val = y_val + sigma * rng.standard_normal(y_val.size)
    return y_train, y_val, sigma


def _uniform_centers(space, count, seed):
    return random_place(space, count, seed).centers


def cmd_mconv(cfg: ExperimentConfig, out_dir: Path) -> Path:
    """Error convergence in the sensor count, per update generator."""
    space, background = build_context(cfg)
    mus = synthetic.parameter_grid(cfg.manifold, cfg.n_test)
    m_max = max(cfg.m_values)

    rows = []
    for gi, gen in enumerate(cfg.mconv_generators):
        label = generator_label(gen)
        greedy = _greedy_centers(cfg, background, space, gen, cfg.tol, m_max)
        for m in cfg.m_values:
            centers = greedy.centers[:m]
            fs = build_functionals(space, centers, cfg.r_w)
            us = build_update(space, fs, gen)
            beta = inf_sup(background, us, fs, space)
            leb = lebesgue_constant(us, fs, space)
            for si, snr in enumerate(cfg.snr_values):
                e_l2 = e_h1 = 0.0
                for ti, mu in enumerate(mus):
                    u_true = synthetic.true_field(cfg.manifold, space, mu)
                    if cfg.exact_recovery:
                        u_true = project(space, u_true, background.basis, "H1")
                    if snr == 0.0:
                        est = solve_constrained(assemble(background, us, fs, 0.0), fs.apply(u_true))
                    else:
                        n_val = max(m // 2, 1)
                        fs_val = build_functionals(
                            space,
                            _uniform_centers(space, n_val, _child_seed(cfg.seed, 2, gi, m, si)),
                            cfg.r_w,
                        )
                        y_train, y_val, _ = _noisy_measurements(
                            fs,
                            fs_val,
                            u_true,
                            snr,
                            _child_seed(cfg.seed, 3, gi, m, si, ti),
                            _child_seed(cfg.seed, 4, gi, m, si, ti),
                        )
                        report = analysis.holdout_select_xi(
                            (fs, y_train), (fs_val, y_val), background, us, np.array(cfg.xi_grid)
                        )
                        est = solve(assemble(background, us, fs, report.xi_star), y_train)
                    e_l2 += analysis.relative_error(u_true, est.state, "L2")
                    e_h1 += analysis.relative_error(u_true, est.state, "H1")
                rows.append(
                    [label, m, snr, e_l2 / len(mus), e_h1 / len(mus), beta, leb]
                )
    path = out_dir / "mconv.csv"
    _write_csv(
        path,
        ["generator", "M", "snr", "err_l2", "err_h1", "beta", "lebesgue"],
        rows,
        config_hash(cfg),
    )
    return path


def cmd_xi_sweep(cfg: ExperimentConfig, out_dir: Path) -> Path:
    """Holdout MSE and true L2 error across the regularization grid."""
    space, background = build_context(cfg)
    xs = cfg.xi_sweep
    greedy = _greedy_centers(cfg, background, space, xs.generator, xs.tol, xs.m_sensors)
    fs_train = build_functionals(space, greedy.centers, cfg.r_w)
    us = build_update(space, fs_train, xs.generator)
    fs_val = build_functionals(
        space, _uniform_centers(space, xs.n_validation, _child_seed(cfg.seed, 5)), cfg.r_w
    )
    lo, hi = cfg.manifold.parameter_range
    mu_true = lo + xs.mu_fraction * (hi - lo)

    rows = []
    for bi, bias in enumerate([0.0, cfg.manifold.bias_amplitude]):
        spec = replace(cfg.manifold, bias_amplitude=bias)
        u_true = synthetic.true_field(spec, space, mu_true)
        for si, snr in enumerate(xs.snr_values):
            y_train, y_val, sigma = _noisy_measurements(
                fs_train,
                fs_val,
                u_true,
                snr,
                _child_seed(cfg.seed, 6, bi, si),
                _child_seed(cfg.seed, 7, bi, si),
            )
            for xi in cfg.xi_grid:
                est = solve(assemble(background, us, fs_train, xi), y_train)
                mse_hat = float(np.mean((y_val - fs_val.apply(est.state)) ** 2))
                gap = u_true - est.state
                true_err = inner(space, gap, gap, "L2") + sigma**2
                rows.append([bias, snr, xi, mse_hat, true_err])
    path = out_dir / "xi_sweep.csv"
    _write_csv(
        path, ["bias", "snr", "xi", "mse_hat", "true_err"], rows, config_hash(cfg)
    )
    return path


# -- validate ----------------------------------------------------------------


def _property_suite(cfg: ExperimentConfig, report) -> bool:
    """End-to-end spot checks of the formulation's defining identities."""
    space, background = build_context(cfg)
    rng = np.random.default_rng(_child_seed(cfg.seed, 8))
    m = max(min(12, max(cfg.m_values)), cfg.n_background + 2)
    centers = _uniform_centers(space, m, _child_seed(cfg.seed, 9))
    fs = build_functionals(space, centers, max(cfg.r_w, 2.0 * max(space.spacings)))
    ok = True

    def check(name: str, cond: bool) -> None:
        nonlocal ok
        report(f"{'ok  ' if cond else 'FAIL'} {name}")
        ok = ok and cond

    one = space.ones()
    check("quadrature exact on constants", abs(inner(space, one, one, "L2") - 1.0) < 1e-12)
    check(
        "stiffness annihilates constants",
        float(np.max(np.abs(space.stiffness_matrix @ one.values))) < 1e-12,
    )

    us_var = build_update(space, fs, Generator.variational())
    u = space.field(rng.standard_normal(space.node_count))
    v = space.field(rng.standard_normal(space.node_count))
    lhs = modified_inner(us_var, fs, u, v)
    rhs = inner(space, u, v, "H1")
    check("variational update induces the ambient product", abs(lhs - rhs) <= 1e-9 * (1 + abs(rhs)))
    check(
        "variational Lebesgue constant is one",
        abs(lebesgue_constant(us_var, fs, space) - 1.0) <= 1e-8,
    )

    us_k = build_update(space, fs, Generator.csrbf())
    linv = np.linalg.inv(us_k.l_eta)
    W = linv.T @ linv
    lu, lv = fs.apply(u), fs.apply(v)
    from .update import interpolate

    iu, iv = interpolate(us_k, fs, u), interpolate(us_k, fs, v)
    alg = inner(space, u - iu, v - iv, "H1") + float(lu @ W @ lv)
    direct = modified_inner(us_k, fs, u, v)
    check("algebraic form of the induced product", abs(alg - direct) <= 1e-9 * (1 + abs(direct)))

    sys0 = assemble(background, us_k, fs, 0.0)
    y = fs.apply(synthetic.true_field(cfg.manifold, space, sum(cfg.manifold.parameter_range) / 2))
    est = solve_constrained(sys0, y)
    resid = np.max(np.abs(fs.apply(est.state) - y))
    check("constrained solve matches observations", resid <= 1e-9 * (np.max(np.abs(y)) + 1e-300))
    check(
        "update unknown orthogonal to background block",
        float(np.linalg.norm(sys0.l_z.T @ est.eta_tilde))
        <= 1e-9 * max(float(np.linalg.norm(est.eta_tilde)), 1e-300),
    )

    u_true = synthetic.true_field(cfg.manifold, space, sum(cfg.manifold.parameter_range) / 2)
    bound = analysis.noise_free_bound(background, us_k, fs, space, u_true)
    y_t = fs.apply(u_true)
    actual = norm(space, u_true - solve_constrained(sys0, y_t).state, "H1")
    check("noise-free bound dominates the realized error", actual <= bound * (1 + 1e-9))

    sys_xi = assemble(background, us_k, fs, 1e-3)
    eps = 0.01 * rng.standard_normal(m)
    res = analysis.verify_link_identity(sys_xi, solve_constrained(sys0, y_t).coeff_vector, eps)
    check("clean/noisy linking identity", res <= 1e-8 * (np.linalg.norm(y_t) + 1.0))
    return ok


def cmd_validate(cfg: ExperimentConfig, out_dir: Path, report=print) -> bool:
    """Run all three studies, then the end-to-end property suite."""
    report(f"writing studies to {out_dir}")
    report(f"place:    {cmd_place(cfg, out_dir)}")
    report(f"mconv:    {cmd_mconv(cfg, out_dir)}")
    report(f"xi-sweep: {cmd_xi_sweep(cfg, out_dir)}")
    ok = _property_suite(cfg, report)
    report("validate: all checks passed" if ok else "validate: FAILURES detected")
    return ok


# -- entry point --------------------------------------------------------------


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="pbdw", description="state-estimation experiment driver"
    )
    parser.add_argument("command", choices=["place", "mconv", "xi-sweep", "validate"])
    parser.add_argument("--config", type=str, default=None, help="JSON config path")
    parser.add_argument("--out", type=str, default=None, help="output directory")
    parser.add_argument("--seed", type=int, default=None, help="override the master seed")
    parser.add_argument(
        "--threads",
        type=int,
        default=1,
        help="worker cap (runs are serial; BLAS threading is unaffected)",
    )
    args = parser.parse_args(argv)

    try:
        if args.threads < 1:
            raise ConfigError("--threads must be at least 1")
        cfg = load_config(args.config) if args.config else config_from_dict({})
        if args.seed is not None:
            cfg = dataclasses.replace(cfg, seed=int(args.seed))
        out_dir = Path(args.out) if args.out else Path(cfg.output_dir)

        if args.command == "place":
            print(cmd_place(cfg, out_dir))
        elif args.command == "mconv":
            print(cmd_mconv(cfg, out_dir))
        elif args.command == "xi-sweep":
            print(cmd_xi_sweep(cfg, out_dir))
        else:
            if not cmd_validate(cfg, out_dir):
                return 3
        return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except NumericalFailure as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except PBDWError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
