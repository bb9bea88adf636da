"""Command-line pipeline: generate, export, retarget, calibrate, eval.

Every subcommand reads an optional ``engrasp-run/1`` YAML config whose
relative paths resolve against the config file's directory; explicit
flags override config values. Logs and summaries go to stderr, data goes
to files or stdout, and runs are deterministic for a fixed seed.

Exit codes: 0 success, 2 configuration error, 3 I/O error, 4 data
integrity error.
"""

from __future__ import annotations

import json
import os
import sys
from pathlib import Path

import click
import numpy as np
import yaml

from .errors import (
    CalibrationError,
    ConfigError,
    HashMismatchError,
    IntegrityError,
    InvalidConfig,
    InvalidInput,
    InvalidMesh,
    InvalidPulse,
    InvalidRegion,
    InvalidTemplate,
    MeshFormatError,
    StreamError,
    VersionError,
)
from .evaluation.perturb import PerturbationSpec
from .evaluation.report import format_table, run_trials, save_report
from .geometry.meshio import load_mesh
from .hand.description import load_hand
from .retarget.calibration import (
    load_calibration,
    record_calibration,
    save_calibration,
)
from .retarget.stream import (
    frame_from_record,
    process_stream,
    read_frames,
    result_to_record,
)
from .synthesis.pipeline import SynthesisParams, synthesize
from .synthesis.sampling import SamplingRegion
from .templates.export import export_scene
from .templates.store import build_set, load, normalize_and_color, save

RUN_SCHEMA = "engrasp-run/1"

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_DATA = 4

_CONFIG_ERRORS = (
    InvalidConfig,
    ConfigError,
    InvalidInput,
    InvalidMesh,
    InvalidRegion,
    InvalidPulse,
    CalibrationError,
)
_DATA_ERRORS = (VersionError, HashMismatchError, IntegrityError,
                StreamError, InvalidTemplate)


def _log(ctx_obj: dict, message: str) -> None:
    if not ctx_obj.get("quiet"):
        click.echo(message, err=True)


def _load_run_config(path: str | None, section: str) -> dict:
    """Read one section of a run config; paths stay relative to the file."""
    if path is None:
        return {}
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    with open(path, encoding="utf-8") as fh:
        try:
            doc = yaml.safe_load(fh)
        except yaml.YAMLError as exc:
            raise ConfigError(f"{path}: not valid YAML: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: expected a mapping document")
    schema = doc.get("schema")
    if schema != RUN_SCHEMA:
        raise ConfigError(
            f"{path}: unsupported run config schema {schema!r} "
            f"(expected {RUN_SCHEMA!r})"
        )
    values = doc.get(section, {})
    if values is None:
        values = {}
    if not isinstance(values, dict):
        raise ConfigError(f"{path}: section {section!r} must be a mapping")
    out = dict(values)
    out["_dir"] = path.parent
    return out


def _setting(flags: dict, cfg: dict, key: str, default=None):
    """Precedence: explicit flag, then config value, then default."""
    value = flags.get(key)
    if value is not None:
        return value
    return cfg.get(key, default)


def _path_setting(flags, cfg, key, *, required=False, must_exist=False):
    """Resolve a path option; config-sourced paths anchor at the config."""
    value = flags.get(key)
    if value is not None:
        resolved = Path(value)
    elif cfg.get(key) is not None:
        resolved = Path(cfg["_dir"]) / str(cfg[key])
    elif required:
        raise ConfigError(f"missing required setting {key!r}")
    else:
        return None
    if must_exist and not resolved.is_file():
        raise ConfigError(f"{key}: no such file: {resolved}")
    return resolved


@click.group()
@click.option("--seed", type=int, default=None,
              help="Override every seed in the run config.")
@click.option("--jobs", type=int, default=1, show_default=True,
              help="Worker processes for parallel sections.")
@click.option("--quiet", is_flag=True, help="Suppress log output.")
@click.pass_context
def cli(ctx, seed, jobs, quiet):
    """Affordance-template toolkit for enveloping grasps."""
    ctx.obj = {"seed": seed, "jobs": max(1, jobs), "quiet": quiet}


@cli.command()
@click.option("--config", "config_path", type=str, default=None)
@click.option("--object", "object_path", type=str, default=None)
@click.option("--hand", "hand_path", type=str, default=None)
@click.option("--out", "out_path", type=str, default=None)
@click.option("--n", type=int, default=None)
@click.option("--seed", type=int, default=None)
@click.option("--step", type=float, default=None)
@click.option("--delta", type=float, default=None)
@click.option("--standoff", type=float, default=None)
@click.option("--spin", type=int, default=None)
@click.pass_obj
def generate(obj, config_path, **flags):
    """Synthesize, rank, and save an affordance template set."""
    cfg = _load_run_config(config_path, "generate")
    object_path = _path_setting(
        {"object": flags["object_path"]}, cfg, "object",
        required=True, must_exist=True)
    hand_path = _path_setting(
        {"hand": flags["hand_path"]}, cfg, "hand",
        required=True, must_exist=True)
    out_path = _path_setting(
        {"out": flags["out_path"]}, cfg, "out", required=True)

    seed = obj["seed"]
    if seed is None:
        seed = _setting(flags, cfg, "seed", 0)
    params = SynthesisParams(
        n=int(_setting(flags, cfg, "n", 100)),
        seed=int(seed),
        step=float(_setting(flags, cfg, "step", 0.005)),
        delta=float(_setting(flags, cfg, "delta", 0.002)),
    )

    model = load_hand(hand_path)
    target = load_mesh(object_path)
    environment = tuple(
        load_mesh(Path(cfg["_dir"]) / str(p)) for p in cfg.get("environment", ())
    )
    patch = cfg.get("patch")
    region = SamplingRegion(
        target=target,
        patch=tuple(patch) if patch is not None else None,
        standoff=float(_setting(flags, cfg, "standoff", 0.002)),
        spin=int(_setting(flags, cfg, "spin", 1)),
        environment=environment,
    )

    templates = synthesize(model, region, params, jobs=obj["jobs"])

    out_path.parent.mkdir(parents=True, exist_ok=True)
    try:
        stored_object = os.path.relpath(object_path.resolve(),
                                        out_path.resolve().parent)
    except ValueError:  # different drive on Windows
        stored_object = str(object_path.resolve())
    tset = build_set(templates, target.volume_centroid(), stored_object,
                     target.content_hash(), params.as_dict())
    if len(tset) > 0:
        tset = normalize_and_color(tset)
        save(tset, out_path)
        lo = min(t.d_h for t in tset.templates)
        hi = max(t.d_h for t in tset.templates)
        _log(obj, f"generated {len(tset)} templates, "
                  f"d_h range [{lo:.6f}, {hi:.6f}] -> {out_path}")
    else:
        save(tset, out_path)
        _log(obj, f"warning: no caged grasp found; wrote empty set -> {out_path}")


@cli.command()
@click.option("--config", "config_path", type=str, default=None)
@click.option("--templates", "templates_path", type=str, default=None)
@click.option("--hand", "hand_path", type=str, default=None)
@click.option("--out-dir", "out_dir", type=str, default=None)
@click.pass_obj
def export(obj, config_path, **flags):
    """Write one colored scene PLY per template, plus an index."""
    cfg = _load_run_config(config_path, "export")
    templates_path = _path_setting(
        {"templates": flags["templates_path"]}, cfg, "templates",
        required=True, must_exist=True)
    hand_path = _path_setting(
        {"hand": flags["hand_path"]}, cfg, "hand",
        required=True, must_exist=True)
    out_dir = _path_setting(
        {"out_dir": flags["out_dir"]}, cfg, "out_dir", required=True)

    tset = load(templates_path, strict=True)
    model = load_hand(hand_path)
    object_mesh = load_mesh(_object_path_of(tset, templates_path))
    written = export_scene(tset, model, object_mesh, out_dir)
    _log(obj, f"exported {len(written) - 1} scenes -> {out_dir}")


def _object_path_of(tset, templates_path: Path) -> Path:
    object_path = Path(tset.object_path)
    if not object_path.is_absolute():
        object_path = Path(templates_path).parent / object_path
    return object_path


@cli.command()
@click.option("--config", "config_path", type=str, default=None)
@click.option("--hand", "hand_path", type=str, default=None)
@click.option("--in", "in_path", type=str, default=None)
@click.option("--out", "out_path", type=str, default=None)
@click.pass_obj
def calibrate(obj, config_path, **flags):
    """Build per-channel calibration tables from a (pulse, frame) stream."""
    cfg = _load_run_config(config_path, "calibrate")
    hand_path = _path_setting(
        {"hand": flags["hand_path"]}, cfg, "hand",
        required=True, must_exist=True)
    in_path = _path_setting(
        {"in": flags["in_path"]}, cfg, "in", required=True, must_exist=True)
    out_path = _path_setting(
        {"out": flags["out_path"]}, cfg, "out", required=True)

    model = load_hand(hand_path)
    samples = []
    with open(in_path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise StreamError(
                    f"{in_path}: line {lineno}: invalid JSON: {exc}") from exc
            if not isinstance(record, dict) or "pulse" not in record:
                raise StreamError(
                    f"{in_path}: line {lineno}: expected an object with 'pulse'")
            try:
                pulse = int(record["pulse"])
            except (TypeError, ValueError) as exc:
                raise StreamError(
                    f"{in_path}: line {lineno}: bad pulse value "
                    f"{record['pulse']!r}") from exc
            samples.append((pulse, frame_from_record(record)))

    tables = record_calibration(samples)
    for table in tables.values():
        table.validate_against(model)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    save_calibration(tables, out_path)
    _log(obj, f"calibrated {len(tables)} channels "
              f"({len(samples)} samples) -> {out_path}")


@cli.command()
@click.option("--config", "config_path", type=str, default=None)
@click.option("--calibration", "calibration_path", type=str, default=None)
@click.option("--in", "in_path", type=str, default=None,
              help="Frame JSONL file, or - for stdin.")
@click.option("--out", "out_path", type=str, default=None,
              help="Pulse JSONL file, or - for stdout.")
@click.pass_obj
def retarget(obj, config_path, **flags):
    """Map a human hand-frame stream to 7-channel pulse vectors."""
    cfg = _load_run_config(config_path, "retarget")
    calibration_path = _path_setting(
        {"calibration": flags["calibration_path"]}, cfg, "calibration",
        required=True, must_exist=True)
    in_value = _setting({"in": flags["in_path"]}, cfg, "in")
    out_value = _setting({"out": flags["out_path"]}, cfg, "out")
    if in_value is None:
        raise ConfigError("missing required setting 'in'")
    if out_value is None:
        raise ConfigError("missing required setting 'out'")

    tables = load_calibration(calibration_path)

    def run(fin, fout) -> int:
        n = 0
        for result in process_stream(tables, read_frames(fin)):
            fout.write(json.dumps(result_to_record(result),
                                  separators=(",", ":")))
            fout.write("\n")
            n += 1
        return n

    if str(in_value) == "-":
        fin_ctx = None
        in_path = None
    else:
        in_path = _path_setting({"in": flags["in_path"]}, cfg, "in",
                                required=True, must_exist=True)

    if str(out_value) == "-":
        out_path = None
    else:
        out_path = _path_setting({"out": flags["out_path"]}, cfg, "out",
                                 required=True)
        out_path.parent.mkdir(parents=True, exist_ok=True)

    fin = sys.stdin if in_path is None else open(in_path, encoding="utf-8")
    try:
        if out_path is None:
            n = run(fin, sys.stdout)
        else:
            with open(out_path, "w", encoding="utf-8") as fout:
                n = run(fin, fout)
    finally:
        if in_path is not None:
            fin.close()
    _log(obj, f"retargeted {n} frames"
              + (f" -> {out_path}" if out_path is not None else ""))


@cli.command(name="eval")
@click.option("--config", "config_path", type=str, default=None)
@click.option("--templates", "templates_path", type=str, default=None)
@click.option("--hand", "hand_path", type=str, default=None)
@click.option("--out", "out_path", type=str, default=None)
@click.option("--table", "table_path", type=str, default=None)
@click.option("--sigma-t", type=float, default=None)
@click.option("--sigma-r", type=float, default=None)
@click.option("--trials", type=int, default=None)
@click.option("--seed", type=int, default=None)
@click.pass_obj
def eval_cmd(obj, config_path, **flags):
    """Run perturbation trials and write the trial report."""
    cfg = _load_run_config(config_path, "eval")
    templates_path = _path_setting(
        {"templates": flags["templates_path"]}, cfg, "templates",
        required=True, must_exist=True)
    hand_path = _path_setting(
        {"hand": flags["hand_path"]}, cfg, "hand",
        required=True, must_exist=True)
    out_path = _path_setting(
        {"out": flags["out_path"]}, cfg, "out", required=True)
    table_path = _path_setting(
        {"table": flags["table_path"]}, cfg, "table")

    seed = obj["seed"]
    if seed is None:
        seed = _setting(flags, cfg, "seed", 0)
    spec = PerturbationSpec(
        sigma_t=float(_setting(flags, cfg, "sigma_t", 0.0)),
        sigma_r=float(_setting(flags, cfg, "sigma_r", 0.0)),
        trials=int(_setting(flags, cfg, "trials", 10)),
        seed=int(seed),
    )
    force = cfg.get("force")
    if force is not None:
        force = np.asarray([float(v) for v in force])

    tset = load(templates_path, strict=True)
    model = load_hand(hand_path)
    object_mesh = load_mesh(_object_path_of(tset, templates_path))

    report = run_trials(tset, object_mesh, model, spec, force=force,
                        jobs=obj["jobs"])
    out_path.parent.mkdir(parents=True, exist_ok=True)
    save_report(report, out_path)
    text = format_table(report)
    if table_path is not None:
        table_path.parent.mkdir(parents=True, exist_ok=True)
        tmp = f"{table_path}.tmp"
        with open(tmp, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, table_path)
    if not obj.get("quiet"):
        click.echo(text, nl=False)
    _log(obj, f"report -> {out_path}")


def main(argv=None) -> int:
    """Entry point with the uniform exit-code mapping."""
    try:
        cli(args=argv, standalone_mode=False)
        return EXIT_OK
    except click.exceptions.Exit as exc:
        return int(exc.exit_code)
    except click.ClickException as exc:
        exc.show()
        return EXIT_CONFIG
    except click.Abort:
        click.echo("aborted", err=True)
        return EXIT_CONFIG
    except _CONFIG_ERRORS as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_CONFIG
    except MeshFormatError as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_IO
    except OSError as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_IO
    except _DATA_ERRORS as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
