"""Command-line orchestration: config parsing, runs, CSV/JSON artifacts.

Subcommands: ``rb``, ``rbsv``, ``irbgs``, ``compare``, ``plan`` and
``verify-synthesis``.  Every run writes a per-length CSV and a summary JSON
with a reproducibility block (seed, config hash, version).  ``RBSV_LOG``
sets the log level.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
import time

import numpy as np

from . import __version__
from .channels import NoiseModel, SpamModel, channel_from_spec
from .fitting import DecayFit
from .irbgs import IRBGSConfig, builtin_recipes, load_recipes, run_irbgs, verify_synthesis
from .rb import RBConfig, RBData, fit_rb_data, run_standard_rb
from .rbsv import RBSVConfig, RBSVResult, RPolicy, run_rbsv
from .resources import ResourcePlan
from .seeding import seed_plan

__all__ = ["main", "load_config", "build_rb_config", "build_rbsv_config",
           "build_irbgs_config", "seed_plan"]

log = logging.getLogger("rbsim")

DEFAULT_LENGTHS = tuple(range(5, 51, 5))


class ConfigError(ValueError):
    """Invalid experiment configuration; message names the offending field."""


def _setup_logging():
    level = os.environ.get("RBSV_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(asctime)s %(name)s %(levelname)s %(message)s")


def load_config(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc


def _field(cfg: dict, name: str, default=None, required: bool = False):
    if name in cfg:
        return cfg[name]
    if required:
        raise ConfigError(f"missing required config field {name!r}")
    return default


def _noise_model(cfg: dict, n: int) -> NoiseModel:
    spec = _field(cfg, "noise", required=True)
    if not isinstance(spec, dict):
        raise ConfigError("field 'noise' must be an object")
    try:
        gate = channel_from_spec(spec.get("gate", {"kind": "ideal"}), n)
        prep = channel_from_spec(spec.get("prep"), n)
        meas = channel_from_spec(spec.get("meas"), n)
        p_meas = float(spec.get("p_meas", 0.0))
    except ValueError as exc:
        raise ConfigError(f"field 'noise': {exc}") from exc
    model = NoiseModel(gate=gate, spam=SpamModel(prep=prep, meas=meas, meas_flip=p_meas))
    try:
        model.validate()
    except ValueError as exc:
        raise ConfigError(f"field 'noise': {exc}") from exc
    return model


def _common_rb_fields(cfg: dict, overrides) -> dict:
    n = int(_field(cfg, "n", 2))
    fields = dict(
        n=n,
        lengths=tuple(_field(cfg, "lengths", DEFAULT_LENGTHS)),
        k_m=int(_field(cfg, "K_m", 100)),
        shots=int(_field(cfg, "shots", 100)),
        exact=bool(_field(cfg, "mode", "sampled") == "exact"),
        noise=_noise_model(cfg, n),
        mode=str(_field(cfg, "rb_mode", "clifford")),
        generator_block=int(_field(cfg, "b", 10)),
        seed=int(_field(cfg, "seed", 0)),
        fit_strategy=str(_field(cfg, "fit_strategy", "auto")),
    )
    if overrides.seed is not None:
        fields["seed"] = overrides.seed
    if overrides.exact:
        fields["exact"] = True
    return fields


def build_rb_config(cfg: dict, overrides) -> RBConfig:
    try:
        return RBConfig(**_common_rb_fields(cfg, overrides))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def build_rbsv_config(cfg: dict, overrides) -> RBSVConfig:
    fields = _common_rb_fields(cfg, overrides)
    policy_spec = _field(cfg, "R_policy", {"kind": "optimal"})
    if not isinstance(policy_spec, dict):
        raise ConfigError("field 'R_policy' must be an object")
    try:
        policy = RPolicy(
            kind=str(policy_spec.get("kind", "optimal")),
            fixed=float(policy_spec.get("R", 100.0)),
            cap=float(policy_spec.get("cap", 1.0e4)),
        )
        return RBSVConfig(
            **fields,
            n_m=int(_field(cfg, "N_m", 100)),
            r_policy=policy,
            include_identity_stabilizer=bool(
                _field(cfg, "include_identity_stabilizer", True)),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _resolve_recipe(cfg: dict):
    spec = _field(cfg, "recipe", "cnot")
    if isinstance(spec, str):
        for recipe in builtin_recipes():
            if recipe.name == spec or recipe.target_name == spec:
                return recipe
        raise ConfigError(f"unknown built-in recipe {spec!r}")
    if isinstance(spec, dict) and "path" in spec:
        recipes = load_recipes(spec["path"])
        index = int(spec.get("index", 0))
        if not 0 <= index < len(recipes):
            raise ConfigError(f"recipe index {index} out of range")
        return recipes[index]
    raise ConfigError("field 'recipe' must be a built-in name or {path, index}")


def build_irbgs_config(cfg: dict, overrides) -> IRBGSConfig:
    n = int(_field(cfg, "n", 2))
    noise = _noise_model(cfg, n)
    try:
        noise_n = channel_from_spec(_field(cfg, "noise_n", {"kind": "ideal"}), n)
    except ValueError as exc:
        raise ConfigError(f"field 'noise_n': {exc}") from exc
    seed = int(_field(cfg, "seed", 0))
    if overrides.seed is not None:
        seed = overrides.seed
    try:
        return IRBGSConfig(
            lengths=tuple(_field(cfg, "lengths", DEFAULT_LENGTHS)),
            k_m=int(_field(cfg, "K_m", 30)),
            seed=seed,
            noise=noise,
            noise_n=noise_n,
            recipe=_resolve_recipe(cfg),
            n=n,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


# ---------------------------------------------------------------------------
# Artifact emission
# ---------------------------------------------------------------------------


def _config_hash(cfg: dict) -> str:
    canonical = json.dumps(cfg, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()


def _repro_block(cfg: dict, seed: int) -> dict:
    return {"seed": seed, "config_hash": _config_hash(cfg), "version": __version__}


def _write_text(path: str, text: str):
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)
    log.info("wrote %s", path)


def rb_csv(data: RBData) -> str:
    lines = ["m,P_m,stderr,K_m,shots"]
    for m, pm, se in zip(data.lengths, data.p_m, data.stderr):
        lines.append(f"{int(m)},{float(pm)!r},{float(se)!r},{data.k_m},{data.shots}")
    return "\n".join(lines) + "\n"


def rbsv_csv(result: RBSVResult) -> str:
    lines = ["m,F_bar_m,mean_p_acc,mean_R,n_saturated"]
    for m, fb, pa, rr, ns in zip(result.lengths, result.f_bar, result.mean_p_acc,
                                 result.mean_copies, result.n_saturated):
        lines.append(f"{int(m)},{float(fb)!r},{float(pa)!r},{float(rr)!r},{int(ns)}")
    return "\n".join(lines) + "\n"


def _fit_summary(fit: DecayFit, r_name: str, r_value: float) -> dict:
    return {
        r_name: r_value,
        "A0": fit.a0,
        "B0": fit.b0,
        "p": fit.p,
        "fit_residual": fit.residual_rms,
        "converged": fit.converged,
        "degenerate": fit.degenerate,
        "at_boundary": fit.at_boundary,
    }


def _emit_json(path: str, payload: dict):
    _write_text(path, json.dumps(payload, indent=1, sort_keys=True) + "\n")


# ---------------------------------------------------------------------------
# Subcommand runners
# ---------------------------------------------------------------------------


def _cmd_rb(cfg: dict, args) -> int:
    config = build_rb_config(cfg, args)
    t0 = time.perf_counter()
    data = run_standard_rb(config, threads=args.threads)
    fit, r_rb = fit_rb_data(data, 2 ** config.n, coefficient_bounds=config.fit_bounds)
    wall = time.perf_counter() - t0
    out = args.out or "."
    _write_text(os.path.join(out, "rb.csv"), rb_csv(data))
    summary = _fit_summary(fit, "r_rb", r_rb)
    summary.update(wall_time_s=wall, reproducibility=_repro_block(cfg, config.seed))
    _emit_json(os.path.join(out, "rb_summary.json"), summary)
    print(f"r_rb = {r_rb!r} (p = {fit.p!r})")
    return 0


def _cmd_rbsv(cfg: dict, args) -> int:
    config = build_rbsv_config(cfg, args)
    t0 = time.perf_counter()
    result = run_rbsv(config, threads=args.threads)
    wall = time.perf_counter() - t0
    out = args.out or "."
    _write_text(os.path.join(out, "rbsv.csv"), rbsv_csv(result))
    summary = _fit_summary(result.fit, "r_rbsv", result.r_rbsv)
    summary.update(
        wall_time_s=wall,
        n_saturated_total=int(np.sum(result.n_saturated)),
        reproducibility=_repro_block(cfg, config.seed),
    )
    _emit_json(os.path.join(out, "rbsv_summary.json"), summary)
    print(f"r_rbsv = {result.r_rbsv!r} (p = {result.fit.p!r})")
    return 0


def _cmd_compare(cfg: dict, args) -> int:
    rb_config = build_rb_config(cfg, args)
    rbsv_config = build_rbsv_config(cfg, args)
    t0 = time.perf_counter()
    data = run_standard_rb(rb_config, threads=args.threads)
    fit, r_rb = fit_rb_data(data, 2 ** rb_config.n, coefficient_bounds=rb_config.fit_bounds)
    result = run_rbsv(rbsv_config, threads=args.threads)
    wall = time.perf_counter() - t0
    out = args.out or "."
    _write_text(os.path.join(out, "rb.csv"), rb_csv(data))
    _write_text(os.path.join(out, "rbsv.csv"), rbsv_csv(result))
    summary = {
        "rb": _fit_summary(fit, "r_rb", r_rb),
        "rbsv": _fit_summary(result.fit, "r_rbsv", result.r_rbsv),
        "r_rb": r_rb,
        "r_rbsv": result.r_rbsv,
        "ratio_rbsv_over_rb": (result.r_rbsv / r_rb) if r_rb else None,
        "wall_time_s": wall,
        "reproducibility": _repro_block(cfg, rb_config.seed),
    }
    _emit_json(os.path.join(out, "compare_summary.json"), summary)
    print(f"r_rb = {r_rb!r}  r_rbsv = {result.r_rbsv!r}")
    return 0


def _cmd_irbgs(cfg: dict, args) -> int:
    config = build_irbgs_config(cfg, args)
    t0 = time.perf_counter()
    estimate = run_irbgs(config, threads=args.threads)
    wall = time.perf_counter() - t0
    out = args.out or "."
    _write_text(os.path.join(out, "irbgs_baseline.csv"), rb_csv(estimate.baseline_data))
    _write_text(os.path.join(out, "irbgs_interleaved.csv"), rb_csv(estimate.interleaved_data))
    summary = {
        "p": estimate.p,
        "p_bar_c": estimate.p_bar_c,
        "d": estimate.d,
        "nonclifford_count": estimate.nonclifford_count,
        "r_c_est": estimate.r_c_est,
        "r_n_est": estimate.r_n_est,
        "error_bound": estimate.bound,
        "noise_class": estimate.noise_class,
        "recipe": config.recipe.name,
        "wall_time_s": wall,
        "reproducibility": _repro_block(cfg, config.seed),
    }
    _emit_json(os.path.join(out, "irbgs_summary.json"), summary)
    print(f"r_n_est = {estimate.r_n_est!r} (bound {estimate.bound!r}, "
          f"class {estimate.noise_class})")
    return 0


def _cmd_plan(cfg: dict, args) -> int:
    try:
        plan = ResourcePlan.from_dict(cfg)
        values = plan.evaluate()
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"resource plan: {exc}") from exc
    width = max(len(k) for k in values)
    for key, val in values.items():
        print(f"{key:<{width}}  {val}")
    if args.out:
        _emit_json(os.path.join(args.out, "plan.json"), values)
    return 0


def _cmd_verify_synthesis(args) -> int:
    recipes = load_recipes(args.recipes) if args.recipes else builtin_recipes()
    failures = 0
    for recipe in recipes:
        report = verify_synthesis(recipe)
        status = "pass" if report.passed else "FAIL"
        print(f"{recipe.name:<26s} {status}  max_deviation={report.max_deviation:.3e}  "
              f"L={recipe.nonclifford_count}")
        failures += 0 if report.passed else 1
    return 0 if failures == 0 else 1


# ---------------------------------------------------------------------------


def _add_common(parser: argparse.ArgumentParser, config_required=True):
    parser.add_argument("--config", required=config_required, help="JSON config path")
    parser.add_argument("--seed", type=int, default=None, help="override master seed")
    parser.add_argument("--threads", type=int, default=1)
    parser.add_argument("--out", default=None, help="artifact directory")
    parser.add_argument("--exact", action="store_true", help="force exact mode")


def main(argv=None) -> int:
    _setup_logging()
    parser = argparse.ArgumentParser(
        prog="rbsim",
        description="Clifford benchmarking simulator: plain, verification-based "
                    "and interleaved protocols plus resource planning.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("rb", "rbsv", "compare", "irbgs", "plan"):
        _add_common(sub.add_parser(name))
    vs = sub.add_parser("verify-synthesis")
    vs.add_argument("--recipes", default=None, help="recipe JSON (default: bundled)")
    args = parser.parse_args(argv)

    try:
        if args.command == "verify-synthesis":
            return _cmd_verify_synthesis(args)
        cfg = load_config(args.config)
        if args.command == "plan":
            return _cmd_plan(cfg, args)
        protocol = cfg.get("protocol", args.command)
        if protocol != args.command and args.command != "compare":
            raise ConfigError(
                f"config 'protocol' is {protocol!r} but subcommand is {args.command!r}")
        handler = {"rb": _cmd_rb, "rbsv": _cmd_rbsv,
                   "compare": _cmd_compare, "irbgs": _cmd_irbgs}[args.command]
        return handler(cfg, args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
