"""Experiment runner: strict JSON configs in, seeded CSV/JSON artifacts out.

Every run writes ``manifest.json`` (the fully resolved configuration, its
hash, and the package version) and ``summary.json`` with the headline numbers
of the experiment; CSV files carry the same provenance in ``#`` header lines.
Identical config and seed give byte-identical outputs.

Exit codes: 0 success, 2 configuration error, 3 numerical abort.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from .analytic import landscape_grid, optimal_dt
from .circuit import build_ansatz
from .collision import CollisionConfig, collision_channel
from .hamiltonian import (
    RandomHamiltonianSpec,
    hf_dissipators,
    load_pauli_file,
    random_hamiltonian,
)
from .lindblad import (
    ChannelSpec,
    ConvexChannelSpec,
    decay_to_one_channel,
    decay_to_zero_channel,
    uniform_dissipators,
)
from .training import ModelSpec, TrainConfig, TrainingDivergedError, gradient_descent
from .variance import (
    VarianceExperiment,
    best_dt_points,
    default_dt_grid,
    run_experiment,
    unitary_points,
)

OUTPUT_DIR_ENV = "DISSIPVQE_OUTPUT_DIR"

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


class ConfigError(ValueError):
    """Configuration file problem, reported with the offending key path."""


def default_fixture_path() -> str:
    return str(resources.files("dissipvqe") / "data" / "h2_sto3g_0p74.txt")


# Schema entries: key -> (type or tuple of types, default).  ``REQUIRED`` as
# the default marks a mandatory key.
REQUIRED = object()

_COMMON_SCHEMA = {
    "experiment": (str, REQUIRED),
    "seed": (int, 0),
    "output_dir": (str, "out"),
    "params": (dict, {}),
}

_PARAM_SCHEMAS = {
    "warmup-landscape": {
        "kind": (str, "ed"),
        "n": (int, 20),
        "p": (float, 0.5),
        "dt": ((int, float, str), "optimal"),
        "theta_min": (float, -np.pi),
        "theta_max": (float, np.pi),
        "points": (int, 201),
        "fixed_angle": (float, 0.0),
    },
    "variance-scaling": {
        "source": (str, "random"),
        "target": (str, "theta"),
        "n_values": (list, [5, 6, 7, 8]),
        "depth_values": (list, [5]),
        "dt_values": (list, list(default_dt_grid())),
        "samples": (int, 1000),
        "include_unitary": (bool, True),
        "hamiltonian_file": ((str, type(None)), None),
    },
    "dt-sweep": {
        "source": (str, "random"),
        "target": (str, "theta"),
        "n_values": (list, [5, 8]),
        "depth_values": (list, [5]),
        "dt_values": (list, list(default_dt_grid())),
        "samples": (int, 1000),
        "include_unitary": (bool, True),
        "hamiltonian_file": ((str, type(None)), None),
    },
    "train-random": {
        "n": (int, 6),
        "depth": (int, 5),
        "dt": (float, 1.0),
        "seeds": (int, 10),
        "eta": (float, 0.1),
        "iterations": (int, 1000),
        "switch": ((int, type(None)), 500),
        "sigma_init": ((float, type(None)), 0.0),
        "variants": (list, ["dissipative", "unitary", "hybrid"]),
    },
    "train-h2": {
        "fixture": ((str, type(None)), None),
        "depth": (int, 20),
        "dt": (float, 0.5),
        "eta_dissipative": (float, 1.0),
        "eta_unitary": (float, 0.1),
        "eta_hybrid": (float, 1.0),
        "eta_hybrid_after": (float, 0.1),
        "iterations": (int, 300),
        "switch": (int, 150),
        "seeds": (int, 10),
        "variants": (list, ["dissipative", "unitary", "hybrid"]),
    },
    "collision-check": {
        "n": (int, 1),
        "alpha": (float, float(np.pi)),
        "phi": (float, 0.0),
        "dt": (float, 1.0),
        "m_values": (list, [8, 16, 32, 64, 128, 256, 512]),
        "state_seed": (int, 0),
    },
}


def _check_type(key: str, value, expected) -> None:
    kinds = expected if isinstance(expected, tuple) else (expected,)
    if bool not in kinds and isinstance(value, bool):
        raise ConfigError(f"key {key!r}: expected {kinds}, got bool")
    if isinstance(value, int) and float in kinds and int not in kinds:
        return  # ints are acceptable floats
    if not isinstance(value, kinds):
        names = "/".join(getattr(k, "__name__", str(k)) for k in kinds)
        raise ConfigError(f"key {key!r}: expected {names}, got {type(value).__name__}")


def _apply_schema(data: dict, schema: dict, prefix: str = "") -> dict:
    unknown = set(data) - set(schema)
    if unknown:
        raise ConfigError(
            f"unknown key(s) {sorted(unknown)} under {prefix or 'top level'}; "
            f"valid keys: {sorted(schema)}"
        )
    out = {}
    for key, (expected, default) in schema.items():
        if key in data:
            _check_type(prefix + key, data[key], expected)
            out[key] = data[key]
        elif default is REQUIRED:
            raise ConfigError(f"missing required key {prefix + key!r}")
        else:
            out[key] = default
    return out


def resolve_config(path: str) -> dict:
    """Parse and validate a config file, filling documented defaults."""
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON ({exc})")
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be an object")
    cfg = _apply_schema(raw, _COMMON_SCHEMA)
    kind = cfg["experiment"]
    if kind not in _PARAM_SCHEMAS:
        raise ConfigError(
            f"unknown experiment kind {kind!r}; valid kinds: {sorted(_PARAM_SCHEMAS)}"
        )
    cfg["params"] = _apply_schema(cfg["params"], _PARAM_SCHEMAS[kind], "params.")
    _validate_values(kind, cfg["params"])
    if os.environ.get(OUTPUT_DIR_ENV):
        cfg["output_dir"] = os.environ[OUTPUT_DIR_ENV]
    return cfg


def _validate_values(kind: str, p: dict) -> None:
    if kind == "warmup-landscape":
        if p["kind"] not in ("u", "n", "ed"):
            raise ConfigError("params.kind must be one of u/n/ed")
        if not 0.0 <= p["p"] <= 1.0:
            raise ConfigError("params.p must lie in [0, 1]")
        if isinstance(p["dt"], str) and p["dt"] != "optimal":
            raise ConfigError("params.dt must be a number or 'optimal'")
    if kind in ("variance-scaling", "dt-sweep"):
        if p["source"] not in ("random", "warmup", "file"):
            raise ConfigError("params.source must be random/warmup/file")
        if p["target"] not in ("theta", "sigma"):
            raise ConfigError("params.target must be theta/sigma")
        if p["samples"] < 2:
            raise ConfigError("params.samples must be >= 2")
        if (p["source"] == "file") != (p["hamiltonian_file"] is not None):
            raise ConfigError("params.hamiltonian_file goes with source='file'")
    if kind in ("train-random", "train-h2"):
        for key in [k for k in p if k.startswith("eta")]:
            if p[key] is not None and p[key] <= 0:
                raise ConfigError(f"params.{key} must be > 0")
        if p["iterations"] < 1:
            raise ConfigError("params.iterations must be >= 1")
        if p["switch"] is not None and not 0 <= p["switch"] <= p["iterations"]:
            raise ConfigError("params.switch must lie in [0, iterations]")
        bad = set(p["variants"]) - {"dissipative", "unitary", "hybrid"}
        if bad:
            raise ConfigError(f"unknown variant(s) {sorted(bad)}")
    if kind == "collision-check":
        if p["dt"] < 0:
            raise ConfigError("params.dt must be >= 0")
        if any(int(m) < 1 for m in p["m_values"]):
            raise ConfigError("params.m_values must be >= 1")


def config_hash(cfg: dict) -> str:
    canon = json.dumps(cfg, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()[:16]


def _fmt(x) -> str:
    if isinstance(x, float):
        return repr(x)
    return str(x)


class _RunContext:
    def __init__(self, cfg: dict):
        self.cfg = cfg
        self.hash = config_hash(cfg)
        self.outdir = Path(cfg["output_dir"])
        self.outdir.mkdir(parents=True, exist_ok=True)

    def header_lines(self) -> list[str]:
        return [
            f"# artifact=dissipvqe {__version__}",
            f"# config_hash={self.hash}",
            f"# seed={self.cfg['seed']}",
        ]

    def write_csv(self, name: str, columns: list[str], rows, extra_header=()) -> None:
        lines = self.header_lines() + [f"# {h}" for h in extra_header]
        lines.append(",".join(columns))
        for row in rows:
            lines.append(",".join(_fmt(x) for x in row))
        (self.outdir / name).write_text("\n".join(lines) + "\n", encoding="utf-8")

    def write_json(self, name: str, payload: dict) -> None:
        payload = {
            "artifact": f"dissipvqe {__version__}",
            "config_hash": self.hash,
            **payload,
        }
        (self.outdir / name).write_text(
            json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )


def _run_warmup_landscape(ctx: _RunContext) -> dict:
    p = ctx.cfg["params"]
    dt = p["dt"]
    if p["kind"] == "ed" and (dt == "optimal" or dt is None):
        dt = optimal_dt(p["n"])
    dt_val = float(dt) if p["kind"] == "ed" else None
    ax1, ax2, grid = landscape_grid(
        p["kind"],
        p["n"],
        theta_min=p["theta_min"],
        theta_max=p["theta_max"],
        points=p["points"],
        fixed_value=p["fixed_angle"],
        p=p["p"],
        dt=dt_val,
    )
    rows = [
        (ax1[i], ax2[j], grid[i, j])
        for i in range(len(ax1))
        for j in range(len(ax2))
    ]
    extra = [f"kind={p['kind']} n={p['n']}"]
    if p["kind"] == "ed":
        extra.append(f"dt={dt_val!r}")
    if p["kind"] == "n":
        extra.append(f"p={p['p']!r}")
    ctx.write_csv("landscape.csv", ["theta1", "theta2", "cost"], rows, extra)
    imin = np.unravel_index(np.argmin(grid), grid.shape)
    return {
        "kind": p["kind"],
        "n": p["n"],
        "dt": dt_val,
        "grid_min": float(grid[imin]),
        "grid_min_at": [float(ax1[imin[0]]), float(ax2[imin[1]])],
    }


def _variance_experiment(ctx: _RunContext) -> VarianceExperiment:
    p = ctx.cfg["params"]
    ham = None
    if p["source"] == "file":
        ham = load_pauli_file(p["hamiltonian_file"])
    return VarianceExperiment(
        n_values=tuple(p["n_values"]),
        depth_values=tuple(p["depth_values"]),
        dt_values=tuple(float(x) for x in p["dt_values"]),
        samples=p["samples"],
        target=p["target"],
        source=p["source"],
        base_seed=ctx.cfg["seed"],
        include_unitary=p["include_unitary"],
        hamiltonian=ham,
    )


def _run_variance(ctx: _RunContext) -> dict:
    exp = _variance_experiment(ctx)
    points = run_experiment(exp)
    cols = ["n", "depth", "dt", "target", "variance", "std_error", "samples"]
    ctx.write_csv(
        "variance.csv",
        cols,
        [
            (q.n, q.depth, q.dt, q.target, q.estimate, q.std_error, q.samples)
            for q in points
        ],
    )
    best = best_dt_points(points)
    ctx.write_csv(
        "best_dt.csv",
        cols,
        [(q.n, q.depth, q.dt, q.target, q.estimate, q.std_error, q.samples) for q in best],
    )
    summary: dict = {
        "best_dt": {f"n={q.n},depth={q.depth}": q.dt for q in best},
    }
    unify = unitary_points(points)
    if len(exp.n_values) >= 2:
        for label, rows in (
            ("unitary", [unify.get((n, d)) for n in exp.n_values for d in exp.depth_values]),
            ("best_dt", best),
        ):
            rows = [q for q in rows if q is not None and q.estimate > 0]
            if len(rows) >= 2:
                ns = np.array([q.n for q in rows])
                logv = np.log([q.estimate for q in rows])
                slope = float(np.polyfit(ns, logv, 1)[0])
                summary[f"log_variance_slope_{label}"] = slope
    if unify:
        summary["unitary_variance"] = {
            f"n={k[0]},depth={k[1]}": q.estimate for k, q in unify.items()
        }
    return summary


def _train_variants(ctx: _RunContext, model_for_seed, etas: dict, p: dict) -> dict:
    seeds = list(range(p["seeds"]))
    traces: dict[str, list] = {v: [] for v in p["variants"]}
    for seed in seeds:
        model = model_for_seed(seed)
        for variant in p["variants"]:
            if variant == "unitary":
                m, switch, eta, eta2 = model.without_channel(), None, etas["unitary"], None
            elif variant == "dissipative":
                m, switch, eta, eta2 = model, None, etas["dissipative"], None
            else:
                m, switch = model, p["switch"]
                eta, eta2 = etas["hybrid"], etas.get("hybrid_after")
            cfg = TrainConfig(
                eta=eta,
                iterations=p["iterations"],
                hybrid_switch=switch,
                seed=seed,
                sigma_init=p.get("sigma_init"),
                eta_after_switch=eta2,
            )
            trace = gradient_descent(m, cfg)
            traces[variant].append(trace)
            ctx.write_csv(
                f"trace_{variant}_seed{seed}.csv",
                ["iter", "cost"],
                list(enumerate(trace.costs)),
                [
                    f"seed={seed}, eta={eta!r}, dt={p['dt']!r}, "
                    f"switch={switch}, eta_after_switch={eta2!r}"
                ],
            )
    return traces


def _run_train_random(ctx: _RunContext) -> dict:
    p = ctx.cfg["params"]
    n, depth, dt = p["n"], p["depth"], p["dt"]

    def model_for_seed(seed: int) -> ModelSpec:
        rng = np.random.default_rng(seed)
        ansatz = build_ansatz(n, depth, rng)
        ham = random_hamiltonian(RandomHamiltonianSpec(n=n), rng).matrix
        channel = ConvexChannelSpec(
            branches=(decay_to_zero_channel(n, dt), decay_to_one_channel(n, dt)),
            sigma=0.0,
        )
        return ModelSpec(ansatz=ansatz, hamiltonian=ham, channel=channel)

    etas = {"dissipative": p["eta"], "unitary": p["eta"], "hybrid": p["eta"]}
    traces = _train_variants(ctx, model_for_seed, etas, p)
    ground = -1.1
    summary: dict = {"ground_energy": ground, "n": n, "depth": depth, "dt": dt}
    for variant, runs in traces.items():
        finals = np.array([t.costs[-1] for t in runs])
        rel = np.abs(finals - ground) / abs(ground)
        summary[variant] = {
            "mean_final_cost": float(finals.mean()),
            "mean_relative_error": float(rel.mean()),
            "mean_cost_at_200": float(
                np.mean([t.costs[min(200, len(t.costs) - 1)] for t in runs])
            ),
        }
    return summary


def _run_train_h2(ctx: _RunContext) -> dict:
    p = ctx.cfg["params"]
    fixture = p["fixture"] or default_fixture_path()
    pauli = load_pauli_file(fixture)
    meta = pauli.metadata_dict()
    ham = pauli.to_dense()
    exact = float(np.linalg.eigvalsh(ham)[0])
    channel = ChannelSpec(hf_dissipators(meta["hf_bits"]), dt=p["dt"])
    depth = p["depth"]

    def model_for_seed(seed: int) -> ModelSpec:
        rng = np.random.default_rng(seed)
        ansatz = build_ansatz(pauli.n, depth, rng)
        return ModelSpec(ansatz=ansatz, hamiltonian=ham, channel=channel)

    etas = {
        "dissipative": p["eta_dissipative"],
        "unitary": p["eta_unitary"],
        "hybrid": p["eta_hybrid"],
        "hybrid_after": p["eta_hybrid_after"],
    }
    traces = _train_variants(ctx, model_for_seed, etas, p)
    summary: dict = {
        "fixture": str(fixture),
        "exact_ground_energy": exact,
        "reference_ground_energy": float(meta["reference_ground_energy_hartree"]),
        "chemical_accuracy": 0.00159,
    }
    for variant, runs in traces.items():
        finals = np.array([t.costs[-1] for t in runs])
        gaps = finals - exact
        summary[variant] = {
            "mean_final_energy": float(finals.mean()),
            "mean_gap_to_exact": float(gaps.mean()),
            "mean_cost_at_50": float(
                np.mean([t.costs[min(50, len(t.costs) - 1)] for t in runs])
            ),
            "seeds_within_chemical_accuracy": int((gaps <= 0.00159).sum()),
        }
    return summary


def _run_collision_check(ctx: _RunContext) -> dict:
    p = ctx.cfg["params"]
    n = p["n"]
    liou = uniform_dissipators(n, alpha=p["alpha"], phi=p["phi"])
    rng = np.random.default_rng(p["state_seed"])
    mat = rng.normal(size=(2**n, 2**n)) + 1j * rng.normal(size=(2**n, 2**n))
    rho = mat @ mat.conj().T
    rho = rho / np.trace(rho)
    rows = []
    eps_list = []
    for m in [int(x) for x in p["m_values"]]:
        cfg = CollisionConfig(liouvillian=liou, dt=p["dt"], steps=m)
        res = collision_channel(rho, cfg)
        rows.append((m, p["dt"], res.epsilon, res.epsilon_kind, res.state_error))
        eps_list.append((m, res.epsilon))
    ctx.write_csv(
        "collision.csv",
        ["M", "dt", "epsilon", "epsilon_kind", "state_error"],
        rows,
    )
    summary = {"n": n, "dt": p["dt"]}
    if len(eps_list) >= 2 and all(e > 0 for _, e in eps_list):
        x = np.log([1.0 / m for m, _ in eps_list])
        y = np.log([e for _, e in eps_list])
        summary["loglog_slope"] = float(np.polyfit(x, y, 1)[0])
    summary["epsilon"] = {str(m): e for m, e in eps_list}
    return summary


_RUNNERS = {
    "warmup-landscape": _run_warmup_landscape,
    "variance-scaling": _run_variance,
    "dt-sweep": _run_variance,
    "train-random": _run_train_random,
    "train-h2": _run_train_h2,
    "collision-check": _run_collision_check,
}


def run(config_path: str) -> int:
    """Execute an experiment config; returns the process exit code."""
    try:
        cfg = resolve_config(config_path)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    ctx = _RunContext(cfg)
    ctx.write_json("manifest.json", {"config": cfg, "seed": cfg["seed"]})
    try:
        summary = _RUNNERS[cfg["experiment"]](ctx)
    except TrainingDivergedError as exc:
        print(f"numerical abort: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except FloatingPointError as exc:
        print(f"numerical abort: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    ctx.write_json("summary.json", {"experiment": cfg["experiment"], **summary})
    print(f"wrote outputs to {ctx.outdir}")
    return EXIT_OK


def validate(config_path: str) -> int:
    """Schema-check a config without executing; prints the resolved values."""
    try:
        cfg = resolve_config(config_path)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(json.dumps(cfg, indent=2, sort_keys=True))
    return EXIT_OK


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="dissipvqe",
        description="Density-matrix experiments with engineered dissipation",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="execute an experiment config")
    p_run.add_argument("config")
    p_val = sub.add_parser("validate", help="check a config and print resolved values")
    p_val.add_argument("config")
    sub.add_parser("version", help="print the package version")
    args = parser.parse_args(argv)
    if args.command == "version":
        print(__version__)
        return EXIT_OK
    if args.command == "run":
        return run(args.config)
    return validate(args.config)


if __name__ == "__main__":
    sys.exit(main())
