"""Experiment runners behind the `chaoskit` command-line tool.

Each experiment consumes a JSON config, runs deterministically for a fixed
seed, writes `report.json` and `report.csv` into the output directory, and
reports pass/fail through the returned `RunResult`.  Work across an n-grid is
parallelized over threads (bounded by CHAOSKIT_THREADS); output assembly is
single-threaded in grid order so results are byte-identical regardless of
thread count.
"""

from __future__ import annotations

import itertools
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import moments, montecarlo, sequences, spectral, wiener
from .basis import BasisKind
from .moments import CSV_COLUMNS, GaussianTarget
from .sequences import SequenceSpec
from .spectral import SpectralFn, inner, product_space

EXPERIMENTS = (
    "chaos-check",
    "fmt-verify",
    "joint-verify",
    "bound-check",
    "thm33-check",
    "product-formula-check",
)

DEFAULT_TOLERANCES = {
    "closed_form": 1e-9,
    "chaos": 1e-8,
    "thm33": 1e-8,
    "product_formula": 1e-10,
}


class ConfigError(ValueError):
    """Invalid experiment configuration (exit code 2)."""


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    seed: int
    out: Path
    tolerances: dict
    sequence: SequenceSpec | None = None
    n_grid: tuple[int, ...] = ()
    n_samples: int = 100_000
    vectors: tuple[dict, ...] = ()
    t_axis: tuple[float, ...] = (0.25, 0.5, 1.0, 2.0)
    t_max: float = 3.0
    count: int = 0
    families: tuple[BasisKind, ...] = ()
    max_coords: int = 2
    max_degree: int = 6
    raw: dict = field(default_factory=dict)


@dataclass
class RunResult:
    passed: bool
    failures: list[str]
    report_json: Path
    report_csv: Path


def _require(obj: dict, key: str):
    if key not in obj:
        raise ConfigError(f"config is missing required field {key!r}")
    return obj[key]


def parse_config(obj: dict, seed_override: int | None = None,
                 out_override: str | None = None) -> ExperimentConfig:
    if not isinstance(obj, dict):
        raise ConfigError("config must be a JSON object")
    experiment = _require(obj, "experiment")
    if experiment not in EXPERIMENTS:
        raise ConfigError(
            f"unknown experiment {experiment!r}; expected one of {EXPERIMENTS}"
        )
    seed = int(obj.get("seed", 0)) if seed_override is None else int(seed_override)
    if seed < 0:
        raise ConfigError("seed must be nonnegative")
    out = Path(out_override if out_override is not None else obj.get("out", f"reports/{experiment}"))

    tol = dict(DEFAULT_TOLERANCES)
    tol.update(obj.get("tolerances", {}))
    for name, value in tol.items():
        if not value > 0:
            raise ConfigError(f"tolerance {name!r} must be positive, got {value}")

    kwargs: dict = {}
    if experiment in ("chaos-check", "fmt-verify", "joint-verify"):
        try:
            spec = SequenceSpec.from_json(_require(obj, "sequence"))
        except (KeyError, ValueError) as exc:
            raise ConfigError(f"bad sequence spec: {exc}") from exc
        grid = tuple(int(n) for n in _require(obj, "n_grid"))
        if not grid or any(n < 1 for n in grid):
            raise ConfigError("n_grid must be a nonempty list of integers >= 1")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ConfigError("n_grid must be strictly increasing")
        if experiment == "fmt-verify" and spec.family != "spread":
            raise ConfigError("fmt-verify needs a spread sequence")
        if experiment == "joint-verify" and spec.family != "pair_mixed":
            raise ConfigError("joint-verify needs a pair_mixed sequence")
        kwargs.update(sequence=spec, n_grid=grid)
    elif experiment == "bound-check":
        vectors = tuple(_require(obj, "vectors"))
        if not vectors:
            raise ConfigError("bound-check needs at least one test vector")
        for v in vectors:
            vtype = v.get("type")
            if vtype == "eigenfunction":
                missing = {"degree"} - set(v)
            elif vtype == "pair_mixed":
                missing = {"p1", "p2", "n"} - set(v)
            else:
                raise ConfigError(f"bad vector spec {v!r}")
            if missing:
                raise ConfigError(f"vector spec {v!r} is missing {sorted(missing)}")
        n_samples = int(obj.get("n_samples", 100_000))
        if n_samples < 1:
            raise ConfigError("n_samples must be >= 1")
        t_axis = tuple(float(t) for t in obj.get("t_axis", (0.25, 0.5, 1.0, 2.0)))
        kwargs.update(
            vectors=vectors, n_samples=n_samples, t_axis=t_axis,
            t_max=float(obj.get("t_max", 3.0)),
        )
    else:
        count = int(obj.get("count", 1500 if experiment == "thm33-check" else 200))
        if count < 1:
            raise ConfigError("count must be >= 1")
        fams = obj.get(
            "families",
            [{"kind": "hermite", "params": []},
             {"kind": "laguerre", "params": [0.0]},
             {"kind": "jacobi", "params": [2.0, 2.0]}],
        )
        try:
            families = tuple(BasisKind.from_json(k) for k in fams)
        except (KeyError, ValueError) as exc:
            raise ConfigError(f"bad basis kind: {exc}") from exc
        max_coords = int(obj.get("max_coords", 2))
        max_degree = int(obj.get("max_degree", 6))
        if experiment == "product-formula-check":
            max_degree = int(obj.get("p_max", 3))
            max_coords = int(obj.get("m_max", 4))
        if max_coords < 1 or max_degree < 1:
            raise ConfigError("dimension and degree limits must be >= 1")
        kwargs.update(
            count=count, families=families,
            max_coords=max_coords, max_degree=max_degree,
        )

    return ExperimentConfig(
        experiment=experiment, seed=seed, out=out, tolerances=tol, raw=dict(obj),
        **kwargs,
    )


def load_config(path: str | Path, seed_override: int | None = None,
                out_override: str | None = None) -> ExperimentConfig:
    try:
        with open(path) as fh:
            obj = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    return parse_config(obj, seed_override, out_override)


# -- report assembly ---------------------------------------------------------


def _fmt_cell(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.17g}"
    return str(v)


def _write_reports(cfg: ExperimentConfig, columns: list[str], rows: list[list],
                   summary: dict, passed: bool, failures: list[str]) -> RunResult:
    cfg.out.mkdir(parents=True, exist_ok=True)
    jpath = cfg.out / "report.json"
    cpath = cfg.out / "report.csv"
    payload = {
        "experiment": cfg.experiment,
        "seed": cfg.seed,
        "config": cfg.raw,
        "columns": columns,
        "rows": rows,
        "summary": summary,
        "passed": passed,
        "failures": failures,
    }
    with open(jpath, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    lines = [",".join(columns)]
    lines.extend(",".join(_fmt_cell(v) for v in row) for row in rows)
    cpath.write_text("\n".join(lines) + "\n")
    return RunResult(passed, failures, jpath, cpath)


def _grid_map(fn, grid, threads: int | None = None):
    """Apply fn over the grid, possibly in parallel; results in grid order."""
    if threads is None:
        env = os.environ.get("CHAOSKIT_THREADS", "")
        threads = int(env) if env.isdigit() and int(env) > 0 else (os.cpu_count() or 1)
    threads = max(1, min(threads, len(grid)))
    if threads == 1:
        return [fn(n) for n in grid]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, grid))


# -- individual experiments --------------------------------------------------


def _run_chaos_check(cfg: ExperimentConfig) -> RunResult:
    spec = cfg.sequence
    tol = cfg.tolerances["chaos"]
    columns = ["n", "component", "eigenvalue", "chaotic", "n_offending", "max_mass"]

    def one(n: int):
        built = spec.build(n)
        fs = (built,) if isinstance(built, SpectralFn) else tuple(built)
        rows = []
        ok_all = True
        for idx, f in enumerate(fs):
            chk = spectral.is_chaotic(f, tol)
            rows.append([
                n, f"F{idx + 1}" if len(fs) > 1 else "F", chk.eigenvalue,
                chk.ok, len(chk.offenders),
                max((m for _, m in chk.offenders), default=0.0),
            ])
            ok_all = ok_all and chk.ok
        if len(fs) > 1:
            vec = spectral.is_chaotic_vector(fs, tol)
            worst = 0.0
            n_off = 0
            for _, _, chk in vec.pairs:
                n_off += len(chk.offenders)
                worst = max(worst, max((m for _, m in chk.offenders), default=0.0))
            rows.append([n, "vector", math.nan, vec.ok, n_off, worst])
            ok_all = ok_all and vec.ok
        return rows, ok_all

    results = _grid_map(one, cfg.n_grid)
    rows: list[list] = []
    failures = []
    for n, (chunk, ok) in zip(cfg.n_grid, results):
        rows.extend(chunk)
        if not ok:
            failures.append(f"chaos-check: not chaotic at n={n}")
    passed = not failures
    summary = {"tol": tol, "all_chaotic": passed}
    return _write_reports(cfg, columns, rows, summary, passed, failures)


def _spread_reference(spec: SequenceSpec) -> tuple[float, float]:
    """Single-coordinate moment4 and Var Gamma of the normalized eigenfunction."""
    space = product_space(spec.kind, 2 * spec.p, 1)
    g = space.basis_fn((spec.p,))
    return moments.moment4(g), moments.var_gamma(g, g)


def _run_fmt_verify(cfg: ExperimentConfig) -> RunResult:
    spec = cfg.sequence
    tol = cfg.tolerances["closed_form"]
    g_m4, g_vg = _spread_reference(spec)
    columns = [
        "n", "m2", "m4", "m4_expected", "m4_abs_err",
        "var_gamma", "var_gamma_expected", "var_gamma_abs_err",
        "chaotic", "centered",
    ]

    def one(n: int):
        rep = moments.fmt_report(spec.build(n), cfg.tolerances["chaos"])
        m4_exp = 3.0 + (g_m4 - 3.0) / n
        vg_exp = g_vg / n
        return [
            n, rep.m2, rep.m4, m4_exp, abs(rep.m4 - m4_exp),
            rep.var_gamma, vg_exp, abs(rep.var_gamma - vg_exp),
            rep.chaotic, rep.centered,
        ]

    rows = _grid_map(one, cfg.n_grid)
    failures = []
    for row in rows:
        n = row[0]
        if row[4] > tol:
            failures.append(f"fmt-verify: |m4 - expected| = {row[4]:.3e} at n={n}")
        if row[7] > tol:
            failures.append(f"fmt-verify: |var_gamma - expected| = {row[7]:.3e} at n={n}")
        if not row[8]:
            failures.append(f"fmt-verify: sequence element not chaotic at n={n}")
        if not row[9]:
            failures.append(f"fmt-verify: sequence element not centered at n={n}")
    summary = {
        "single_coordinate_m4": g_m4,
        "single_coordinate_var_gamma": g_vg,
        "m4_sup": max(row[2] for row in rows),
    }
    passed = not failures
    return _write_reports(cfg, columns, rows, summary, passed, failures)


def _run_joint_verify(cfg: ExperimentConfig) -> RunResult:
    spec = cfg.sequence
    tol = cfg.tolerances["closed_form"]
    chaos_tol = cfg.tolerances["chaos"]
    ref_space = product_space(spec.kind, 2 * max(spec.p1, spec.p2), 1)
    g_m4 = moments.moment4(ref_space.basis_fn((spec.p1,)))
    columns = ["n"] + list(CSV_COLUMNS)

    def one(n: int):
        f1, f2 = spec.build(n)
        cov = np.array([
            [inner(f1, f1), inner(f1, f2)],
            [inner(f2, f1), inner(f2, f2)],
        ])
        rep = moments.joint_report((f1, f2), GaussianTarget(cov), chaos_tol)
        vec = spectral.is_chaotic_vector((f1, f2), chaos_tol)
        rho_n = float(cov[0, 1])
        if spec.p1 == spec.p2:
            m22_exp = 1.0 + 2.0 * rho_n**2 + rho_n * (g_m4 - 3.0) / n
        else:
            m22_exp = float("nan")
        gap = np.abs(rep.mixed22 - rep.isserlis)
        info = {
            "n": n,
            "rho_requested": spec.rho,
            "rho_realized": rho_n,
            "rho_achieved": bool(abs(rho_n - spec.rho) <= 1e-12),
            "prop31": rep.prop31,
            "r_max": float(np.abs(rep.r_matrix).max()),
            "mixed22_gap_max": float(gap.max()),
            "mixed22_closed_form_err": (
                abs(rep.mixed22[0, 1] - m22_exp) if spec.p1 == spec.p2 else None
            ),
            "chaotic_vector": vec.ok,
        }
        rows = [[n] + row for row in rep.csv_rows()]
        return rows, info

    results = _grid_map(one, cfg.n_grid)
    rows: list[list] = []
    per_n = []
    failures = []
    for chunk, info in results:
        rows.extend(chunk)
        per_n.append(info)
        n = info["n"]
        if not info["chaotic_vector"]:
            failures.append(f"joint-verify: vector not jointly chaotic at n={n}")
        err = info["mixed22_closed_form_err"]
        if err is not None and err > tol:
            failures.append(
                f"joint-verify: mixed22 closed-form error {err:.3e} at n={n}"
            )
    for key in ("r_max", "prop31", "mixed22_gap_max"):
        vals = [info[key] for info in per_n]
        if any(b >= a for a, b in zip(vals, vals[1:])):
            failures.append(f"joint-verify: {key} not strictly decreasing over n_grid")
    summary = {"per_n": per_n}
    passed = not failures
    return _write_reports(cfg, columns, rows, summary, passed, failures)


def build_test_vector(v: dict) -> tuple[tuple[SpectralFn, ...], GaussianTarget, str]:
    """Construct a named test vector and its exact covariance from a config entry."""
    vtype = v.get("type")
    if vtype == "eigenfunction":
        kind = BasisKind.from_json(v.get("kind", {"kind": "hermite"}))
        p = int(v["degree"])
        scale = float(v.get("scale", 1.0))
        space = product_space(kind, 2 * p, 1)
        f = space.basis_fn((p,), coeff=scale)
        fs: tuple[SpectralFn, ...] = (f,)
        name = v.get("name", f"{kind.label()}-Q{p}")
    elif vtype == "pair_mixed":
        kind = BasisKind.from_json(v.get("kind", {"kind": "hermite"}))
        f1, f2 = sequences.pair_mixed(
            int(v["p1"]), int(v["p2"]), float(v.get("rho", 0.0)), int(v["n"]),
            kind=kind,
        )
        fs = (f1, f2)
        name = v.get("name", f"pair({v['p1']},{v['p2']},{v.get('rho', 0.0)},{v['n']})")
    else:
        raise ConfigError(f"unknown test-vector type {vtype!r}")
    d = len(fs)
    cov = np.array([[inner(fs[i], fs[j]) for j in range(d)] for i in range(d)])
    return fs, GaussianTarget(cov), str(name)


def t_grid(axis: tuple[float, ...], dim: int, t_max: float) -> list[np.ndarray]:
    """Cartesian grid axis^dim restricted to the ball ||t|| <= t_max."""
    grids = [np.array(t) for t in _cartesian(axis, dim)]
    return [t for t in grids if float(np.linalg.norm(t)) <= t_max]


def _cartesian(axis, dim):
    if dim == 1:
        return [(t,) for t in axis]
    return [(t, *rest) for t in axis for rest in _cartesian(axis, dim - 1)]


def _run_bound_check(cfg: ExperimentConfig) -> RunResult:
    columns = ["vector", "t", "t_norm", "gap", "stderr", "prop31", "rhs", "pass"]
    rows: list[list] = []
    failures: list[str] = []
    for v in cfg.vectors:
        fs, target, name = build_test_vector(v)
        bound = moments.prop31_bound(fs, target)
        batch = montecarlo.sample(fs[0].space, cfg.n_samples, cfg.seed)
        for t in t_grid(cfg.t_axis, len(fs), cfg.t_max):
            gap, stderr = montecarlo.cf_gap(fs, target, t, batch)
            tn = float(np.linalg.norm(t))
            rhs = tn * tn * bound + 3.0 * stderr
            ok = gap <= rhs
            rows.append([
                name, ";".join(f"{x:g}" for x in t), tn, gap, stderr, bound, rhs, ok,
            ])
            if not ok:
                failures.append(
                    f"bound-check: vector {name}, t = {t.tolist()}: "
                    f"gap {gap:.6g} > bound {rhs:.6g}"
                )
    summary = {"n_samples": cfg.n_samples, "n_rows": len(rows)}
    passed = not failures
    return _write_reports(cfg, columns, rows, summary, passed, failures)


def random_span_function(space, rng: np.random.Generator,
                         max_terms: int = 6) -> SpectralFn:
    """Random sparse function over the space's multi-indices (test helper)."""
    n_terms = int(rng.integers(1, max_terms + 1))
    coeffs = {}
    for _ in range(n_terms):
        alpha = tuple(
            int(rng.integers(0, b.max_degree + 1)) for b in space.coords
        )
        coeffs[alpha] = float(rng.uniform(-1.0, 1.0))
    return SpectralFn(space, coeffs)


def _run_thm33_check(cfg: ExperimentConfig) -> RunResult:
    tol = cfg.tolerances["thm33"]
    columns = [
        "instance", "family", "dim", "support", "lambda_max", "eta",
        "lhs", "rhs", "margin", "violation",
    ]
    rng = np.random.default_rng(cfg.seed)
    spaces = {}
    rows: list[list] = []
    failures: list[str] = []
    for i in range(cfg.count):
        kind = cfg.families[i % len(cfg.families)]
        d = int(rng.integers(1, cfg.max_coords + 1))
        key = (kind, d)
        if key not in spaces:
            spaces[key] = product_space(kind, cfg.max_degree, d)
        space = spaces[key]
        f = random_span_function(space, rng)
        lam_max = max(space.eigenvalue(a) for a in f.support())
        eta = lam_max if i % 5 == 0 else lam_max * (1.0 + float(rng.uniform(0, 1)))
        lhs, rhs = moments.thm33_sides(f, eta)
        scale = max(1.0, abs(lhs), abs(rhs))
        bad = lhs > rhs + tol * scale
        rows.append([
            i, kind.label(), d, len(f.coeffs), lam_max, eta, lhs, rhs,
            rhs - lhs, bad,
        ])
        if bad:
            failures.append(
                f"thm33-check: instance {i} ({kind.label()}): "
                f"lhs {lhs:.6g} > rhs {rhs:.6g}"
            )
    summary = {"count": cfg.count, "violations": len(failures)}
    passed = not failures
    return _write_reports(cfg, columns, rows, summary, passed, failures)


def random_sym_tensor(dim: int, order: int, rng: np.random.Generator) -> wiener.SymTensor:
    """Dense random symmetric tensor with entries uniform in [-1, 1]."""
    entries = {}
    for key in itertools.combinations_with_replacement(range(dim), order):
        entries[key] = float(rng.uniform(-1.0, 1.0))
    return wiener.SymTensor(dim, order, entries)


def _run_product_formula_check(cfg: ExperimentConfig) -> RunResult:
    tol = cfg.tolerances["product_formula"]
    columns = ["instance", "p", "m", "lhs", "rhs", "abs_err", "allowed", "pass"]
    rng = np.random.default_rng(cfg.seed)
    rows: list[list] = []
    failures: list[str] = []
    p_max, m_max = cfg.max_degree, cfg.max_coords
    for i in range(cfg.count):
        p = int(rng.integers(1, p_max + 1))
        m = int(rng.integers(1, m_max + 1))
        f = random_sym_tensor(m, p, rng)
        g = random_sym_tensor(m, p, rng)
        lhs, rhs = wiener.product_formula_check(f, g)
        err = abs(lhs - rhs)
        allowed = tol * (1.0 + abs(lhs))
        ok = err <= allowed
        rows.append([i, p, m, lhs, rhs, err, allowed, ok])
        if not ok:
            failures.append(
                f"product-formula-check: instance {i} (p={p}, m={m}): "
                f"|lhs - rhs| = {err:.3e} > {allowed:.3e}"
            )
    summary = {"count": cfg.count, "violations": len(failures)}
    passed = not failures
    return _write_reports(cfg, columns, rows, summary, passed, failures)


_RUNNERS = {
    "chaos-check": _run_chaos_check,
    "fmt-verify": _run_fmt_verify,
    "joint-verify": _run_joint_verify,
    "bound-check": _run_bound_check,
    "thm33-check": _run_thm33_check,
    "product-formula-check": _run_product_formula_check,
}


def run(cfg: ExperimentConfig) -> RunResult:
    """Run one experiment; writes report.json / report.csv under cfg.out."""
    return _RUNNERS[cfg.experiment](cfg)
