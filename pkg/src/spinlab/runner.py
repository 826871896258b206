"""Batch experiment runner: a JSON config (or CLI flags) in, reproducible
JSON/CSV artifacts out.

Subcommands: thresholds, optimize, chi, concentration, branching, sandwich,
embed, pde, selftest.  Re-running a config byte-reproduces every numeric
payload; timestamps live only under the "meta" key.
"""

import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from jsonschema import Draft202012Validator

from . import rng
from .ensembles import CorrelationLadder, OverlapLadder, TreeShape, chi_align, sample_ensemble
from .errors import ArgumentError
from .hamiltonian import sample_hamiltonian
from .mixture import Mixture
from .ogp import (
    check_chi_properties,
    constrained_grand_max,
    estimate_chi,
    overlap_concentration,
    run_branching_experiment,
)
from .optimizers import (
    AmpSpec,
    amp,
    export_trajectory_csv,
    gradient_ascent,
    langevin,
    subag_ascent,
)
from .parisi import (
    PiecewiseZeta,
    alg_is_numeric,
    alg_sp,
    interpolation_bound_sp,
    opt_sp_numeric,
    parisi_is,
    solve_parisi_pde,
)
from .points import sphere_point
from .ultrametric import embed_energy_greedy, embedding_to_csv, tree_from_json, validate_embedding

SUBCOMMANDS = (
    "thresholds",
    "optimize",
    "chi",
    "concentration",
    "branching",
    "sandwich",
    "embed",
    "pde",
    "selftest",
)

SCHEMA = {
    "type": "object",
    "required": ["subcommand"],
    "properties": {
        "subcommand": {"enum": list(SUBCOMMANDS)},
        "mixture": {
            "oneOf": [
                {"type": "string"},
                {
                    "type": "object",
                    "required": ["gammas"],
                    "properties": {
                        "gammas": {"type": "object"},
                        "h": {"type": "number", "minimum": 0},
                    },
                },
            ]
        },
        "n": {"type": "integer", "minimum": 1},
        "seed": {"type": "integer"},
        "seeds": {"type": "array", "items": {"type": "integer"}},
        "out": {"type": "string"},
        "workers": {"type": "integer", "minimum": 1},
        "alg": {"type": "object"},
        "delta": {"type": "number"},
        "eta": {"type": "number"},
        "reps": {"type": "integer", "minimum": 1},
        "p": {"type": "number"},
        "p_grid": {"type": "array", "items": {"type": "number"}},
        "lambda": {"type": "number"},
        "ks": {"type": "array", "items": {"type": "integer", "minimum": 1}},
        "pladder": {"type": "array", "items": {"type": "number"}},
        "qladder": {"type": "array", "items": {"type": "number"}},
        "zeta": {
            "type": "object",
            "required": ["breaks", "values"],
            "properties": {
                "breaks": {"type": "array", "items": {"type": "number"}},
                "values": {"type": "array", "items": {"type": "number"}},
            },
        },
        "beta": {"type": "number"},
        "a": {"type": "number"},
        "grid": {"type": "array", "items": {"type": "number"}},
        "knots": {"type": "integer", "minimum": 8},
        "ising": {"type": "boolean"},
        "tree": {"type": ["object", "string"]},
        "restarts": {"type": "integer", "minimum": 1},
        "C": {"type": "number"},
        "B": {"type": "number"},
        "criteria": {"type": "array"},
        "steps": {"type": "integer"},
        "lr": {"type": "number"},
        "horizon": {"type": "number"},
        "dt": {"type": "number"},
        "r": {"type": "number"},
        "chi": {"type": "string"},
    },
}


@dataclass
class RunResult:
    status: int
    payload: dict
    artifacts: list = field(default_factory=list)


def parse_mixture(spec) -> Mixture:
    """"p4" -> pure quartic; "p2+p4" sums; dict {"gammas": {...}, "h": ...}."""
    if isinstance(spec, Mixture):
        return spec
    if isinstance(spec, str):
        gammas = {}
        for term in spec.split("+"):
            term = term.strip()
            if "*" in term:
                coef, name = term.split("*")
                coef = float(coef)
            else:
                coef, name = 1.0, term
            if not name.startswith("p"):
                raise ArgumentError(f"bad mixture term {term!r} (want e.g. 'p4' or '0.5*p2')")
            gammas[int(name[1:])] = gammas.get(int(name[1:]), 0.0) + coef
        return Mixture(gammas)
    gammas = {int(p): float(g) for p, g in spec["gammas"].items()}
    return Mixture(gammas, h=float(spec.get("h", 0.0)))


def _dump17(obj, indent=0):
    """JSON text with floats at 17 significant digits (bit-faithful)."""
    pad = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [
            f'{pad}  {json.dumps(str(k))}: {_dump17(v, indent + 1)}' for k, v in obj.items()
        ]
        return "{\n" + ",\n".join(items) + f"\n{pad}}}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [f"{pad}  {_dump17(v, indent + 1)}" for v in obj]
        return "[\n" + ",\n".join(items) + f"\n{pad}]"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, (np.floating, float)):
        return format(float(obj), ".17g")
    if isinstance(obj, (np.integer, int)):
        return str(int(obj))
    if obj is None:
        return "null"
    return json.dumps(str(obj))


def write_run_json(path, config, results):
    payload = {
        "config": config,
        "results": results,
        "meta": {"timestamp": time.strftime("%Y-%m-%dT%H:%M:%S")},
    }
    with open(path, "w") as f:
        f.write(_dump17(payload) + "\n")


def _matrix_csv(path, mat):
    np.savetxt(path, np.asarray(mat), delimiter=",", fmt="%.17g")


def map_replicas(fn, seeds, workers: int = 1):
    """Apply fn(seed) over replica seeds; results reduced in input order, so
    the output is identical whatever the worker count."""
    if workers <= 1:
        return [fn(s) for s in seeds]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, seeds))


def build_algorithm(spec: dict):
    """Algorithm table for the experiment subcommands."""
    name = spec.get("name")
    if name == "gradient_ascent":
        steps = int(spec.get("steps", 10))
        lr = float(spec.get("lr", 0.05))
        start_scale = float(spec.get("start_scale", 0.5))

        def alg(h, seed):
            x0 = sphere_point(rng.stream(seed, "ga-x0").standard_normal(h.n)) * start_scale
            return gradient_ascent(h, x0, steps, lr).final

        return alg
    if name == "subag":
        delta = float(spec.get("delta", 0.125))
        mode = spec.get("mode", "top_eig")
        return lambda h, seed: subag_ascent(h, delta, mode, seed=seed).final
    if name == "langevin":
        return lambda h, seed: langevin(
            h,
            float(spec.get("beta", 1.0)),
            float(spec.get("horizon", 0.5)),
            float(spec.get("dt", 0.01)),
            r=float(spec.get("r", 1.0)),
            seed=seed,
        ).final
    if name == "constant":
        value = float(spec.get("value", 0.5))
        return lambda h, seed: np.full(h.n, value)
    if name == "coef_linear":
        scale = float(spec.get("scale", 0.8))
        return lambda h, seed: scale * h.coefficients[: h.n]
    raise ArgumentError(f"unknown algorithm {name!r}")


def _alg_trajectory(spec: dict, h, seed):
    name = spec.get("name")
    if name == "gradient_ascent":
        x0 = sphere_point(rng.stream(seed, "ga-x0").standard_normal(h.n)) * float(
            spec.get("start_scale", 0.5)
        )
        return gradient_ascent(h, x0, int(spec.get("steps", 10)), float(spec.get("lr", 0.05)))
    if name == "subag":
        return subag_ascent(h, float(spec.get("delta", 0.125)), spec.get("mode", "top_eig"), seed=seed)
    if name == "langevin":
        return langevin(
            h,
            float(spec.get("beta", 1.0)),
            float(spec.get("horizon", 0.5)),
            float(spec.get("dt", 0.01)),
            r=float(spec.get("r", 1.0)),
            seed=seed,
        )
    if name == "amp":
        spec_amp = AmpSpec(
            fs=[lambda *xs: xs[-1]] * int(spec.get("horizon", 2)),
            lipschitz=[1.0] * int(spec.get("horizon", 2)),
            horizon=int(spec.get("horizon", 2)),
        )
        return amp(h, spec_amp, seed=seed)
    raise ArgumentError(f"unknown trajectory algorithm {name!r}")


def _chi_fn(name: str):
    table = {
        "identity": lambda p: p,
        "square": lambda p: p * p,
        "linear_scaled": lambda p: 0.64 * p,
    }
    if name not in table:
        raise ArgumentError(f"unknown chi function {name!r}")
    return table[name]


def validate_config(config: dict):
    validator = Draft202012Validator(SCHEMA)
    errors = sorted(validator.iter_errors(config), key=lambda e: e.path)
    if errors:
        err = errors[0]
        path = "/".join(str(p) for p in err.path) or "<root>"
        raise ArgumentError(f"config field {path}: {err.message}")


def run(config: dict, out_dir=None) -> RunResult:
    """Dispatch a validated config; returns exit status plus the payload."""
    validate_config(config)
    sub = config["subcommand"]
    out = out_dir or config.get("out") or f"runs/{sub}"
    os.makedirs(out, exist_ok=True)
    handler = {
        "thresholds": _run_thresholds,
        "optimize": _run_optimize,
        "chi": _run_chi,
        "concentration": _run_concentration,
        "branching": _run_branching,
        "sandwich": _run_sandwich,
        "embed": _run_embed,
        "pde": _run_pde,
        "selftest": _run_selftest,
    }[sub]
    return handler(config, out)


def _run_thresholds(config, out):
    m = parse_mixture(config.get("mixture", "p4"))
    value, regime, q_hat = alg_sp(m)
    results = {
        "alg_sp": {"value": value, "regime": regime, "q_hat": q_hat},
        "opt_sp_numeric": opt_sp_numeric(m),
        "mixture": {"gammas": m.gammas, "h": m.h},
    }
    if config.get("ising"):
        results["alg_is_numeric"] = alg_is_numeric(m, knots=int(config.get("knots", 8)))
    path = os.path.join(out, "run.json")
    write_run_json(path, config, results)
    return RunResult(0, results, [path])


def _run_optimize(config, out):
    m = parse_mixture(config.get("mixture", "p4"))
    n = int(config.get("n", 64))
    seeds = config.get("seeds") or [int(config.get("seed", 0))]
    alg_spec = config.get("alg", {"name": "subag", "delta": 0.125})
    workers = int(config.get("workers", 1))

    def one(seed):
        h = sample_hamiltonian(m, n, rng.derive_seed(seed, "optimize"))
        traj = _alg_trajectory(alg_spec, h, seed)
        return seed, traj

    artifacts = []
    summary = []
    for seed, traj in map_replicas(one, seeds, workers):
        csv_path = os.path.join(out, f"trajectory_seed{seed}.csv")
        export_trajectory_csv(traj, csv_path)
        artifacts.append(csv_path)
        summary.append(
            {"seed": seed, "final_energy_per_n": traj.final_energy / n, "steps": len(traj.iterates)}
        )
    results = {"algorithm": alg_spec, "n": n, "runs": summary}
    path = os.path.join(out, "run.json")
    write_run_json(path, config, results)
    return RunResult(0, results, artifacts + [path])


def _run_chi(config, out):
    m = parse_mixture(config.get("mixture", "p2"))
    n = int(config.get("n", 48))
    alg = build_algorithm(config.get("alg", {"name": "gradient_ascent"}))
    p_grid = tuple(config.get("p_grid", (0.0, 0.25, 0.5, 0.75, 1.0)))
    est = estimate_chi(
        alg, m, n, p_grid, int(config.get("reps", 20)), int(config.get("seed", 0)),
        algorithm_id=str(config.get("alg", {}).get("name", "")),
    )
    report = check_chi_properties(est)
    results = {
        "p_grid": list(est.p_grid),
        "chi_hat": list(est.chi_hat),
        "se": list(est.se),
        "classification": report.classification,
        "flags": report.flags,
    }
    csv_path = os.path.join(out, "chi.csv")
    _matrix_csv(csv_path, np.stack([est.p_grid, est.chi_hat, est.se]))
    path = os.path.join(out, "run.json")
    write_run_json(path, config, results)
    return RunResult(0, results, [csv_path, path])


def _run_concentration(config, out):
    m = parse_mixture(config.get("mixture", "p2"))
    alg = build_algorithm(config.get("alg", {"name": "gradient_ascent"}))
    rep = overlap_concentration(
        alg,
        m,
        int(config.get("n", 48)),
        float(config.get("p", 0.5)),
        int(config.get("reps", 30)),
        float(config.get("lambda", 0.2)),
        int(config.get("seed", 0)),
    )
    results = {
        "mean": rep.mean,
        "sd": rep.sd,
        "fraction": rep.fraction,
        "wilson": list(rep.wilson),
        "lambda": rep.lam,
        "reps": rep.reps,
    }
    path = os.path.join(out, "run.json")
    write_run_json(path, config, results)
    return RunResult(0, results, [path])


def _parse_ladders(config, m):
    shape = TreeShape(tuple(config.get("ks", (2, 2))))
    qladder = OverlapLadder(tuple(config.get("qladder", (0.0, 0.5, 1.0))))
    if "pladder" in config:
        pladder = CorrelationLadder(tuple(config["pladder"]))
    else:
        pladder = chi_align(_chi_fn(config.get("chi", "identity")), qladder)
    return shape, pladder, qladder


def _run_branching(config, out):
    m = parse_mixture(config.get("mixture", "p2"))
    n = int(config.get("n", 64))
    shape, pladder, qladder = _parse_ladders(config, m)
    alg = build_algorithm(config.get("alg", {"name": "gradient_ascent"}))
    reports = run_branching_experiment(
        alg,
        m,
        n,
        shape,
        pladder,
        qladder,
        float(config.get("eta", 0.1)),
        int(config.get("reps", 1)),
        int(config.get("seed", 0)),
    )
    artifacts = []
    rows = []
    for i, rep in enumerate(reports):
        rpath = os.path.join(out, f"overlap_rep{i}.csv")
        qpath = os.path.join(out, f"target_rep{i}.csv")
        _matrix_csv(rpath, rep.overlap_matrix)
        _matrix_csv(qpath, rep.target_matrix)
        artifacts.extend([rpath, qpath])
        rows.append(
            {
                "seed": rep.seed,
                "max_deviation": rep.max_deviation,
                "grand_energy_per_n": rep.grand_energy / n,
                "leaf_energies_per_n": {str(k): v / n for k, v in rep.leaf_energies.items()},
            }
        )
    results = {"ks": list(shape.ks), "pladder": list(pladder.ps), "qladder": list(qladder.qs), "reps": rows}
    path = os.path.join(out, "run.json")
    write_run_json(path, config, results)
    return RunResult(0, results, artifacts + [path])


def _run_sandwich(config, out):
    m = parse_mixture(config.get("mixture", "p2"))
    n = int(config.get("n", 48))
    shape, pladder, qladder = _parse_ladders(config, m)
    ens = sample_ensemble(m, n, shape, pladder, int(config.get("seed", 0)))
    from .ensembles import target_overlap_matrix

    q_mat = target_overlap_matrix(shape, qladder)
    anchor = np.zeros(n) if qladder.qs[0] == 0 else sphere_point(
        rng.stream(config.get("seed", 0), "anchor").standard_normal(n)
    ) * math.sqrt(qladder.qs[0])
    eta = float(config.get("eta", 0.2))
    primal = constrained_grand_max(
        ens, q_mat, anchor, eta, int(config.get("restarts", 3)), int(config.get("seed", 0))
    )
    beta = float(config.get("beta", 4.0))
    b_val = float(config.get("B", math.sqrt(max(m.xi(1.0, 2), 1.0))))
    levels = np.linspace(0.2, 0.8, qladder.depth)
    zeta = PiecewiseZeta(
        (0.0, *qladder.qs[:-1]) if qladder.qs[0] > 0 else qladder.qs[:-1],
        ((0.0, *levels) if qladder.qs[0] > 0 else tuple(levels)),
    )
    bound = interpolation_bound_sp(
        b_val,
        PiecewiseZeta.zero(),
        zeta,
        beta,
        eta,
        shape,
        pladder,
        qladder,
        m,
        float(config.get("C", 1.0)),
        n,
    )
    results = {
        "primal_grand_energy_per_n": primal.best_energy,
        "primal_feasible": primal.feasible,
        "bound_per_n": bound / shape.n_leaves,
        "bound_total": bound,
        "sandwich_holds": (primal.best_energy is None)
        or (primal.best_energy <= bound / shape.n_leaves),
    }
    path = os.path.join(out, "run.json")
    write_run_json(path, config, results)
    return RunResult(0, results, [path])


def _run_embed(config, out):
    m = parse_mixture(config.get("mixture", "p2"))
    n = int(config.get("n", 96))
    tree_cfg = config.get("tree", {"star": 3})
    if isinstance(tree_cfg, str):
        with open(tree_cfg) as f:
            tree = tree_from_json(f.read())
    elif "star" in tree_cfg:
        from .ultrametric import star_tree

        tree = star_tree(int(tree_cfg["star"]))
    elif "binary" in tree_cfg:
        from .ultrametric import full_binary_tree

        tree = full_binary_tree(int(tree_cfg["binary"]))
    else:
        from .ultrametric import DatedRootedTree

        tree = DatedRootedTree(
            {v["id"]: v["parent"] for v in tree_cfg["vertices"]},
            {v["id"]: v["height"] for v in tree_cfg["vertices"]},
        )
    h = sample_hamiltonian(m, n, int(config.get("seed", 0)))
    emb, energies, profile = embed_energy_greedy(
        h, tree, float(config.get("delta", 0.125)), seed=int(config.get("seed", 0))
    )
    ok, (worst, label) = validate_embedding(tree, emb, tol=1e-6)
    csv_path = os.path.join(out, "embedding.csv")
    embedding_to_csv(emb, csv_path)
    results = {
        "validated": ok,
        "worst_violation": worst,
        "worst_constraint": label,
        "energies_per_n": {str(v): e / n for v, e in energies.items()},
        "threshold_profile": {str(v): p for v, p in profile.items()},
    }
    path = os.path.join(out, "run.json")
    write_run_json(path, config, results)
    return RunResult(0 if ok else 4, results, [csv_path, path])


def _run_pde(config, out):
    m = parse_mixture(config.get("mixture", "p2"))
    zcfg = config.get("zeta", {"breaks": [0.0], "values": [0.0]})
    zeta = PiecewiseZeta(tuple(zcfg["breaks"]), tuple(zcfg["values"]))
    beta = float(config.get("beta", math.inf)) if config.get("beta") else math.inf
    a = float(config.get("a", 0.0))
    grid = tuple(config["grid"]) if config.get("grid") else None
    sol = solve_parisi_pde(m, zeta, a=a, beta=beta, grid=grid, center=m.h)
    results = {
        "phi_at_0_h": float(sol.eval(0.0, m.h)),
        "parisi_is": parisi_is(zeta, m, grid=grid) if a == 0.0 and math.isinf(beta) else None,
        "diagnostics": {
            "grid_points": int(len(sol.grid)),
            "gh_nodes": sol.meta["gh_nodes"],
            "self_check_delta": sol.meta.get("self_check_delta"),
            "times": list(sol.times),
        },
    }
    path = os.path.join(out, "run.json")
    write_run_json(path, config, results)
    return RunResult(0, results, [path])


def _run_selftest(config, out):
    from .acceptance import run_all

    results = run_all(names=config.get("criteria"), verbose=True)
    payload = {
        "criteria": [
            {"name": r.name, "passed": r.passed, "detail": r.detail, "seconds": r.seconds}
            for r in results
        ],
        "all_passed": all(r.passed for r in results),
    }
    path = os.path.join(out, "run.json")
    write_run_json(path, config, payload)
    return RunResult(0 if payload["all_passed"] else 5, payload, [path])
