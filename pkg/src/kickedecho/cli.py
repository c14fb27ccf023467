"""Command line front end producing deterministic CSV and JSON artifacts.

Subcommands cover every capability of the library: classical phase
portraits, single fidelity series, classified sweeps, eigenstate extent
spectra, decay-law fits, rate-scaling runs, and canned figure bundles.
Runs are configured by flags, a JSON config file, or both (flags win), and
every output embeds the resolved configuration so a run can be reproduced
from its own artifact.  Outputs are byte-identical across reruns except for
the timestamp line.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .echo import detect_recurrences, fidelity_series, sweep_rotor, sweep_top
from .fitting import (
    DecayClassification,
    DecayFit,
    classify_decay,
    fit_exponential,
    fit_gaussian,
    fit_power_law,
    scaling_exponent,
)
from .numerics import EigenConvergenceError
from .spectral import extent_spectrum, top_eigensystem
from .spin import grid_state_location, spin_coherent_state
from .systems import (
    DEFAULT_SEED,
    default_portrait_seeds,
    generate_portrait,
    rotor_floquet,
    sphere_angles,
    top_floquet,
    torus_coherent_state,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_IO = 4

_MODELS = ("gaussian", "power_law", "exponential", "classify")
_RATE_KEY = {"gaussian": "gamma", "power_law": "prefactor", "exponential": "rate"}


class ConfigError(ValueError):
    """Invalid or contradictory run configuration."""


class _Parser(argparse.ArgumentParser):
    # argparse prints usage and exits on its own; route everything through
    # the single error channel instead so stderr stays machine readable.
    def error(self, message):
        raise ConfigError(message)


def _fmt(value) -> str:
    """One CSV cell: floats at 17 significant digits, everything else str."""
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def _timestamp() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _config_echo(config: dict) -> str:
    return json.dumps({k: v for k, v in config.items() if v is not None}, sort_keys=True)


def _write_csv(path, command: str, config: dict, columns, rows) -> None:
    lines = [
        f"# kickedecho {command}",
        f"# timestamp {_timestamp()}",
        f"# config {_config_echo(config)}",
        ",".join(columns),
    ]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _write_json(path, command: str, config: dict, payload: dict) -> None:
    doc = {
        "tool": "kickedecho",
        "command": command,
        "timestamp": _timestamp(),
        "config": {k: v for k, v in config.items() if v is not None},
    }
    doc.update(payload)
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def read_artifact_config(path) -> dict:
    """Recover the resolved run configuration embedded in an output file.

    CSV artifacts carry it on a ``# config`` header line, JSON artifacts
    under the ``config`` key.  The returned dict can be written back out as
    a ``--config`` file to reproduce the run.
    """
    text = Path(path).read_text(encoding="utf-8")
    stripped = text.lstrip()
    if stripped.startswith("{"):
        return json.loads(stripped)["config"]
    for line in text.splitlines():
        if line.startswith("# config "):
            return json.loads(line[len("# config "):])
    raise ValueError(f"no embedded config found in {path}")


def read_series_csv(path) -> np.ndarray:
    """Fidelity column of a two-column t,fidelity CSV written by `evolve`."""
    values = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        cells = line.split(",")
        try:
            row = [float(c) for c in cells]
        except ValueError:
            continue  # header row
        if len(row) < 2:
            raise ValueError(f"expected t,fidelity rows in {path}")
        values.append((row[0], row[1]))
    if not values:
        raise ValueError(f"no data rows found in {path}")
    values.sort(key=lambda pair: pair[0])
    return np.asarray([f for _, f in values])


def _fit_dict(fit: DecayFit) -> dict:
    return {
        "model": fit.model,
        "params": {k: float(v) for k, v in fit.params.items()},
        "window": [int(fit.window[0]), int(fit.window[1])],
        "r_squared": float(fit.r_squared),
    }


def _classification_dict(label_obj: DecayClassification) -> dict:
    return {
        "label": label_obj.label,
        "stages": [_fit_dict(f) for f in label_obj.stages],
        "breakpoint": None if label_obj.breakpoint is None else int(label_obj.breakpoint),
        "saturation": {
            "value": float(label_obj.saturation.value),
            "reliable": bool(label_obj.saturation.reliable),
        },
        "recurrence_times": [int(t) for t in label_obj.recurrence_times],
    }


# ---------------------------------------------------------------------------
# configuration


def _as_list(value, name: str, kind):
    if value is None:
        return None
    if isinstance(value, (list, tuple)):
        out = []
        for v in value:
            out.append(_coerce(v, name, kind))
        return out
    return [_coerce(value, name, kind)]


def _coerce(value, name: str, kind):
    try:
        coerced = kind(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{name} must be {kind.__name__}, got {value!r}") from None
    if kind is float and not math.isfinite(coerced):
        raise ConfigError(f"{name} must be finite, got {value!r}")
    return coerced


def _parse_pair(value, name: str):
    if isinstance(value, str):
        parts = value.split(",")
    elif isinstance(value, (list, tuple)):
        parts = list(value)
    else:
        raise ConfigError(f"{name} must be a pair 'a,b', got {value!r}")
    if len(parts) != 2:
        raise ConfigError(f"{name} must have exactly two components, got {value!r}")
    return (_coerce(parts[0], name, float), _coerce(parts[1], name, float))


def resolve_config(command: str, args: argparse.Namespace) -> dict:
    """Merge config file values with command line flags; flags win.

    Returns the resolved, JSON-serializable configuration dict that the
    output artifacts echo verbatim.
    """
    base: dict = {}
    if args.config is not None:
        try:
            loaded = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {args.config} is not valid JSON: {exc}") from None
        if not isinstance(loaded, dict):
            raise ConfigError(f"config file {args.config} must hold a JSON object")
        base.update(loaded)
    if base.get("command") not in (None, command):
        raise ConfigError(
            f"config file is for command {base['command']!r}, invoked as {command!r}"
        )
    for key, value in vars(args).items():
        if key == "config" or value is None:
            continue
        base[key] = value
    base["command"] = command

    cfg = {"command": command}
    system = base.get("system", "top")
    if system not in ("top", "rotor"):
        raise ConfigError(f"system must be 'top' or 'rotor', got {system!r}")
    cfg["system"] = system

    spins = _as_list(base.get("spin"), "spin", float)
    if spins is not None:
        for j in spins:
            if j < 1 or abs(2 * j - round(2 * j)) > 1e-9:
                raise ConfigError(f"spin must be an integer or half-integer >= 1, got {j}")
        cfg["spin"] = spins[0] if len(spins) == 1 else spins
    if base.get("dim") is not None:
        dim = _coerce(base["dim"], "dim", int)
        if dim < 2:
            raise ConfigError(f"dim must be at least 2, got {dim}")
        cfg["dim"] = dim
    if base.get("kick") is not None:
        kick = _coerce(base["kick"], "kick", float)
        if kick <= 0:
            raise ConfigError(f"kick strength must be positive, got {kick}")
        cfg["kick"] = kick
    deltas = _as_list(base.get("delta"), "delta", float)
    if deltas is not None:
        for d in deltas:
            if d < 0:
                raise ConfigError(f"delta must be non-negative, got {d}")
        cfg["delta"] = deltas[0] if len(deltas) == 1 else deltas
    grid = _as_list(base.get("grid_state"), "grid_state", int)
    if grid is not None:
        for g in grid:
            if not 1 <= g <= 100:
                raise ConfigError(f"grid state index must be in 1..100, got {g}")
        cfg["grid_state"] = grid
    if base.get("point") is not None:
        raw = base["point"]
        if isinstance(raw, (list, tuple)) and raw and isinstance(raw[0], (list, tuple, str)):
            pairs = [_parse_pair(p, "point") for p in raw]
        else:
            pairs = [_parse_pair(raw, "point")]
        cfg["point"] = [[a, b] for a, b in pairs]
    horizons = _as_list(base.get("horizon"), "horizon", int)
    if horizons is not None:
        for t in horizons:
            if t < 1:
                raise ConfigError(f"horizon must be a positive integer, got {t}")
        cfg["horizon"] = horizons[0] if len(horizons) == 1 else horizons
    for key, low in (("steps", 1), ("orbits", 1), ("jobs", 1), ("figure", 1)):
        if base.get(key) is not None:
            value = _coerce(base[key], key, int)
            if value < low:
                raise ConfigError(f"{key} must be at least {low}, got {value}")
            cfg[key] = value
    if base.get("seed") is not None:
        cfg["seed"] = _coerce(base["seed"], "seed", int)
    if base.get("model") is not None:
        if base["model"] not in _MODELS:
            raise ConfigError(f"model must be one of {_MODELS}, got {base['model']!r}")
        cfg["model"] = base["model"]
    if base.get("window") is not None:
        a, b = _parse_pair(base["window"], "window")
        a, b = int(a), int(b)
        if not 0 <= a < b:
            raise ConfigError(f"window must satisfy 0 <= start < end, got ({a}, {b})")
        cfg["window"] = [a, b]
    if base.get("mode") is not None:
        if base["mode"] not in ("delta", "spin"):
            raise ConfigError(f"mode must be 'delta' or 'spin', got {base['mode']!r}")
        cfg["mode"] = base["mode"]
    for key in ("input", "output", "out_dir", "cache_dir"):
        if base.get(key) is not None:
            cfg[key] = str(base[key])
    return cfg


def _require(cfg: dict, *keys):
    for key in keys:
        if key not in cfg:
            raise ConfigError(f"{cfg['command']} requires --{key.replace('_', '-')}")


def _single_delta(cfg: dict) -> float:
    delta = cfg.get("delta")
    if delta is None:
        raise ConfigError(f"{cfg['command']} requires --delta")
    if isinstance(delta, list):
        raise ConfigError(f"{cfg['command']} takes exactly one delta, got {len(delta)}")
    return delta


def _single_horizon(cfg: dict) -> int:
    horizon = cfg.get("horizon")
    if horizon is None:
        raise ConfigError(f"{cfg['command']} requires --horizon")
    if isinstance(horizon, list):
        raise ConfigError(f"{cfg['command']} takes exactly one horizon, got {len(horizon)}")
    return horizon


def _single_spin(cfg: dict) -> float:
    spin = cfg.get("spin")
    if spin is None:
        raise ConfigError(f"{cfg['command']} requires --spin")
    if isinstance(spin, list):
        raise ConfigError(f"{cfg['command']} takes exactly one spin, got {len(spin)}")
    return spin


def _states_for(cfg: dict, single: bool) -> list[tuple[str, np.ndarray]]:
    """Initial states named by their selector, built for the configured system."""
    labels: list[tuple[str, np.ndarray]] = []
    if cfg["system"] == "top":
        j = _single_spin(cfg)
        for index in cfg.get("grid_state", []):
            theta, phi = grid_state_location(index)
            labels.append((str(index), spin_coherent_state(j, theta, phi)))
        for theta, phi in cfg.get("point", []):
            labels.append((f"{theta:.6g};{phi:.6g}", spin_coherent_state(j, theta, phi)))
    else:
        _require(cfg, "dim")
        if cfg.get("grid_state"):
            raise ConfigError("grid states index the top's sphere grid; rotor states are --point q,p")
        for q0, p0 in cfg.get("point", []):
            labels.append((f"{q0:.6g};{p0:.6g}", torus_coherent_state(cfg["dim"], q0, p0)))
    if not labels:
        raise ConfigError(f"{cfg['command']} requires at least one --grid-state or --point")
    if single and len(labels) != 1:
        raise ConfigError(f"{cfg['command']} takes exactly one initial state, got {len(labels)}")
    return labels


def _propagator_pair(cfg: dict, delta: float):
    if cfg["system"] == "top":
        j = _single_spin(cfg)
        return top_floquet(j, cfg["kick"]), top_floquet(j, cfg["kick"] + delta)
    _require(cfg, "dim")
    return (
        rotor_floquet(cfg["dim"], cfg["kick"]),
        rotor_floquet(cfg["dim"], cfg["kick"] + delta),
    )


# ---------------------------------------------------------------------------
# commands


def cmd_portrait(cfg: dict) -> None:
    _require(cfg, "kick", "output")
    system = cfg["system"]
    count = cfg.get("orbits", 25 if system == "top" else 30)
    steps = cfg.get("steps", 1000)
    seed = cfg.get("seed", DEFAULT_SEED)
    cfg.setdefault("orbits", count)
    cfg.setdefault("steps", steps)
    cfg.setdefault("seed", seed)
    seeds = default_portrait_seeds(system, count, seed)
    orbits = generate_portrait(system, cfg["kick"], seeds, steps)
    rows = []
    if system == "top":
        columns = ("orbit_id", "step", "phi", "theta")
        for i, orbit in enumerate(orbits):
            theta, phi = sphere_angles(orbit)
            for t in range(orbit.shape[0]):
                rows.append((i, t, phi[t], theta[t]))
    else:
        columns = ("orbit_id", "step", "q", "p")
        for i, orbit in enumerate(orbits):
            for t in range(orbit.shape[0]):
                rows.append((i, t, orbit[t, 0], orbit[t, 1]))
    _write_csv(cfg["output"], "portrait", cfg, columns, rows)


def cmd_evolve(cfg: dict) -> None:
    _require(cfg, "kick", "output")
    delta = _single_delta(cfg)
    horizon = _single_horizon(cfg)
    (_, state), = _states_for(cfg, single=True)
    u, u_pert = _propagator_pair(cfg, delta)
    series = fidelity_series(u, u_pert, state, horizon)
    rows = [(t, series[t]) for t in range(series.size)]
    _write_csv(cfg["output"], "evolve", cfg, ("t", "fidelity"), rows)


def cmd_sweep(cfg: dict) -> None:
    _require(cfg, "kick", "output")
    delta = _single_delta(cfg)
    horizon = _single_horizon(cfg)
    jobs = cfg.get("jobs")
    if cfg["system"] == "top":
        if not cfg.get("grid_state") and not cfg.get("point"):
            cfg["grid_state"] = list(range(1, 101))
        if cfg.get("point"):
            raise ConfigError("sweep over the top runs on --grid-state indices")
        records = sweep_top(
            _single_spin(cfg), cfg["kick"], delta, cfg["grid_state"], horizon, jobs
        )
    else:
        _require(cfg, "dim")
        if not cfg.get("point"):
            raise ConfigError("rotor sweep requires at least one --point q,p")
        records = sweep_rotor(cfg["dim"], cfg["kick"], delta, cfg["point"], horizon, jobs)
    payload = []
    for rec in records:
        entry = {"state": rec.state if isinstance(rec.state, int) else list(rec.state)}
        entry["location"] = [float(rec.location[0]), float(rec.location[1])]
        entry.update(_classification_dict(rec.classification))
        payload.append(entry)
    _write_json(cfg["output"], "sweep", cfg, {"records": payload})


def cmd_spectrum(cfg: dict) -> None:
    _require(cfg, "kick", "output")
    if cfg["system"] != "top":
        raise ConfigError("extent spectra are defined for the top's J_z observable")
    states = _states_for(cfg, single=False)
    eig = top_eigensystem(_single_spin(cfg), cfg["kick"], cfg.get("cache_dir"))
    rows = []
    for label, state in states:
        spectrum = extent_spectrum(state, eig)
        for extent, amplitude in zip(spectrum.extents, spectrum.amplitudes):
            rows.append((label, extent, amplitude))
    stats = {"decompositions": 0 if eig.from_cache else 1}
    path = cfg["output"]
    _write_csv(path, "spectrum", cfg, ("state", "extent", "amplitude"), rows)
    # cache stats ride on an extra header line so reruns against a warm cache
    # differ from cold runs only here and in the timestamp
    text = Path(path).read_text(encoding="utf-8").splitlines()
    text.insert(3, f"# cache {json.dumps(stats, sort_keys=True)}")
    Path(path).write_text("\n".join(text) + "\n", encoding="utf-8")


def cmd_fit(cfg: dict) -> None:
    _require(cfg, "input", "output")
    model = cfg.get("model", "classify")
    cfg.setdefault("model", model)
    series = read_series_csv(cfg["input"])
    window = tuple(cfg["window"]) if cfg.get("window") else None
    if model == "classify":
        result = _classification_dict(classify_decay(series))
    elif model == "gaussian":
        result = _fit_dict(fit_gaussian(series, window))
    elif model == "power_law":
        result = _fit_dict(fit_power_law(series, window))
    else:
        result = _fit_dict(fit_exponential(series, window))
    _write_json(cfg["output"], "fit", cfg, {"fit": result})


def _scaling_rates(cfg: dict, xs, deltas, horizons, model: str):
    points = []
    rates = []
    for x, delta, horizon in zip(xs, deltas, horizons):
        if cfg["mode"] == "spin":
            u = top_floquet(x, cfg["kick"])
            u_pert = top_floquet(x, cfg["kick"] + delta)
            theta, phi = _scaling_location(cfg)
            state = spin_coherent_state(x, theta, phi)
        else:
            u, u_pert = _propagator_pair(cfg, delta)
            (_, state), = _states_for(cfg, single=True)
        series = fidelity_series(u, u_pert, state, horizon)
        fit = {"gaussian": fit_gaussian, "power_law": fit_power_law, "exponential": fit_exponential}[
            model
        ](series)
        rate = float(fit.params[_RATE_KEY[model]])
        rates.append(rate)
        points.append(
            {
                "x": float(x),
                "delta": float(delta),
                "horizon": int(horizon),
                "rate": rate,
                "window": [int(fit.window[0]), int(fit.window[1])],
                "r_squared": float(fit.r_squared),
            }
        )
    return rates, points


def _scaling_location(cfg: dict) -> tuple[float, float]:
    grid = cfg.get("grid_state")
    points = cfg.get("point")
    if grid and not points and len(grid) == 1:
        return grid_state_location(grid[0])
    if points and not grid and len(points) == 1:
        return points[0][0], points[0][1]
    raise ConfigError("scaling takes exactly one initial state")


def _broadcast(values, n: int, name: str) -> list:
    if not isinstance(values, list):
        values = [values]
    if len(values) == 1:
        return values * n
    if len(values) != n:
        raise ConfigError(f"{name} must have 1 or {n} entries, got {len(values)}")
    return values


def cmd_scaling(cfg: dict) -> None:
    _require(cfg, "kick", "output", "mode")
    model = cfg.get("model", "gaussian")
    cfg.setdefault("model", model)
    if model == "classify":
        raise ConfigError("scaling requires a specific decay model, not 'classify'")
    if cfg.get("horizon") is None:
        raise ConfigError("scaling requires --horizon")
    if cfg["mode"] == "delta":
        if cfg["system"] != "top":
            _require(cfg, "dim")
        deltas = cfg.get("delta")
        if not isinstance(deltas, list) or len(deltas) < 3:
            raise ConfigError("delta-mode scaling needs at least three delta values")
        horizons = _broadcast(cfg["horizon"], len(deltas), "horizon")
        rates, points = _scaling_rates(cfg, deltas, deltas, horizons, model)
        fit = scaling_exponent(deltas, rates, mode="log")
    else:
        if cfg["system"] != "top":
            raise ConfigError("spin-mode scaling is defined for the top")
        spins = cfg.get("spin")
        if not isinstance(spins, list) or len(spins) < 3:
            raise ConfigError("spin-mode scaling needs at least three spin values")
        delta = _single_delta(cfg)
        horizons = _broadcast(cfg["horizon"], len(spins), "horizon")
        rates, points = _scaling_rates(cfg, spins, [delta] * len(spins), horizons, model)
        fit = scaling_exponent(spins, rates, mode="linear")
    payload = {
        "scaling": {
            "mode": fit.mode,
            "exponent": float(fit.exponent),
            "prefactor": float(fit.prefactor),
            "intercept": float(fit.intercept),
            "r_squared": float(fit.r_squared),
            "points": points,
        }
    }
    _write_json(cfg["output"], "scaling", cfg, payload)


# ---------------------------------------------------------------------------
# figure bundles


def _figure_portraits(out: Path, system: str, kicks, orbits: int, steps: int) -> list[str]:
    seeds = default_portrait_seeds(system, orbits, DEFAULT_SEED)
    files = []
    for kick in kicks:
        sub = {
            "command": "portrait",
            "system": system,
            "kick": kick,
            "orbits": orbits,
            "steps": steps,
            "seed": DEFAULT_SEED,
        }
        data = generate_portrait(system, kick, seeds, steps)
        rows = []
        if system == "top":
            columns = ("orbit_id", "step", "phi", "theta")
            for i, orbit in enumerate(data):
                theta, phi = sphere_angles(orbit)
                for t in range(orbit.shape[0]):
                    rows.append((i, t, phi[t], theta[t]))
        else:
            columns = ("orbit_id", "step", "q", "p")
            for i, orbit in enumerate(data):
                for t in range(orbit.shape[0]):
                    rows.append((i, t, orbit[t, 0], orbit[t, 1]))
        name = f"portrait_{system}_k{kick:g}.csv"
        _write_csv(out / name, "portrait", sub, columns, rows)
        files.append(name)
    return files


def _figure_series(
    out: Path,
    name: str,
    system: str,
    size,
    kick: float,
    delta: float,
    selector: dict,
    state: np.ndarray,
    horizon: int,
) -> tuple[str, np.ndarray]:
    if system == "top":
        u, u_pert = top_floquet(size, kick), top_floquet(size, kick + delta)
        sub = {"command": "evolve", "system": system, "spin": size}
    else:
        u, u_pert = rotor_floquet(size, kick), rotor_floquet(size, kick + delta)
        sub = {"command": "evolve", "system": system, "dim": size}
    sub.update({"kick": kick, "delta": delta, "horizon": horizon})
    sub.update(selector)
    series = fidelity_series(u, u_pert, state, horizon)
    _write_csv(out / name, "evolve", sub, ("t", "fidelity"), [(t, series[t]) for t in range(series.size)])
    return name, series


_DELTA_LADDER = (1e-4, 3.1622776601683794e-4, 1e-3, 3.1622776601683794e-3, 1e-2)
_DELTA_HORIZONS = (4000, 2000, 1000, 400, 300)


def _figure_1(out: Path, cfg: dict) -> tuple[list[str], dict]:
    files = _figure_portraits(out, "top", (1.1, 1.3), orbits=25, steps=1000)
    reference = {
        "stable_fixed_points": [[-math.pi / 2, math.pi / 2], [0.0, math.pi / 2]],
        "note": "same seeds at both kick strengths; tori around (-pi/2, pi/2) barely move",
    }
    return files, reference


def _figure_2(out: Path, cfg: dict) -> tuple[list[str], dict]:
    j, kick, delta = 500.0, 1.1, 1e-3
    files = []
    fits = {}
    for index, model in ((52, "gaussian"), (56, "power_law")):
        theta, phi = grid_state_location(index)
        name, series = _figure_series(
            out, f"series_state{index}.csv", "top", j, kick, delta,
            {"grid_state": [index]}, spin_coherent_state(j, theta, phi), 2000,
        )
        files.append(name)
        fit = fit_gaussian(series) if model == "gaussian" else fit_power_law(series)
        fits[f"state{index}"] = _fit_dict(fit)
    for index, model in ((52, "gaussian"), (56, "power_law")):
        theta, phi = grid_state_location(index)
        rates = []
        points = []
        for delta_k, horizon in zip(_DELTA_LADDER, _DELTA_HORIZONS):
            u, u_pert = top_floquet(j, kick), top_floquet(j, kick + delta_k)
            series = fidelity_series(u, u_pert, spin_coherent_state(j, theta, phi), horizon)
            fit = fit_gaussian(series) if model == "gaussian" else fit_power_law(series)
            rate = float(fit.params[_RATE_KEY[model]])
            rates.append(rate)
            points.append({"delta": delta_k, "horizon": horizon, "rate": rate})
        scaling = scaling_exponent(list(_DELTA_LADDER), rates, mode="log")
        name = f"scaling_state{index}_{model}.json"
        _write_json(
            out / name,
            "scaling",
            {"command": "scaling", "system": "top", "spin": j, "kick": kick, "mode": "delta"},
            {
                "scaling": {
                    "mode": scaling.mode,
                    "exponent": float(scaling.exponent),
                    "prefactor": float(scaling.prefactor),
                    "intercept": float(scaling.intercept),
                    "r_squared": float(scaling.r_squared),
                    "points": points,
                }
            },
        )
        files.append(name)
    name = "fits.json"
    _write_json(out / name, "fit", {"command": "fit", "figure": 2}, {"fits": fits})
    files.append(name)
    reference = {
        "gamma_gaussian_state52": 4.5e-6,
        "power_exponent_state56": 1.15,
        "power_prefactor_state56": 950.0,
        "gamma_delta_exponent": 2.0,
        "prefactor_delta_families": [[0.85, -1.0], [0.35, -1.15], [0.85, -1.3]],
    }
    return files, reference


def _figure_3(out: Path, cfg: dict) -> tuple[list[str], dict]:
    files = _figure_portraits(out, "rotor", (0.3, 0.35), orbits=30, steps=1000)
    reference = {
        "stable_fixed_point": [-0.5, 0.0],
        "unstable_fixed_point": [0.0, 0.0],
    }
    return files, reference


def _figure_4(out: Path, cfg: dict) -> tuple[list[str], dict]:
    n, kick, delta = 500, 0.3, 2e-3
    files = []
    specs = [
        ("square", (-0.4, 0.1), 5000),
        ("diamond", (-0.1, 0.1), 2000),
        ("triangle", (-0.1, -0.4), 2000),
    ]
    fits = {}
    for tag, (q0, p0), horizon in specs:
        name, series = _figure_series(
            out, f"series_{tag}.csv", "rotor", n, kick, delta,
            {"point": [[q0, p0]]}, torus_coherent_state(n, q0, p0), horizon,
        )
        files.append(name)
        if tag in ("square", "triangle"):
            fits[tag] = _fit_dict(fit_gaussian(series))
        if tag == "square":
            fits["square_recurrences"] = [int(t) for t in detect_recurrences(series)]
    name = "fits.json"
    _write_json(out / name, "fit", {"command": "fit", "figure": 4}, {"fits": fits})
    files.append(name)
    reference = {
        "gamma_gaussian_square": 6e-4,
        "recurrence_period_square": 2300,
        "gamma_gaussian_triangle": 5e-7,
        "power_comparison_exponent": 1.0,
    }
    return files, reference


def _spectrum_csv(out: Path, name: str, j: float, kick: float, labels, cache_dir) -> tuple[str, int]:
    eig = top_eigensystem(j, kick, cache_dir)
    rows = []
    for label, state in labels:
        spectrum = extent_spectrum(state, eig)
        for extent, amplitude in zip(spectrum.extents, spectrum.amplitudes):
            rows.append((label, extent, amplitude))
    sub = {"command": "spectrum", "system": "top", "spin": j, "kick": kick}
    _write_csv(out / name, "spectrum", sub, ("state", "extent", "amplitude"), rows)
    return name, (0 if eig.from_cache else 1)


def _figure_5(out: Path, cfg: dict) -> tuple[list[str], dict]:
    j, kick = 500.0, 1.1
    cache_dir = cfg.get("cache_dir")
    files = []
    decompositions = 0
    for name, indices in (("extent_main.csv", range(52, 57)), ("extent_inset.csv", range(64, 68))):
        labels = []
        for index in indices:
            theta, phi = grid_state_location(index)
            labels.append((str(index), spin_coherent_state(j, theta, phi)))
        written, count = _spectrum_csv(out, name, j, kick, labels, cache_dir)
        files.append(written)
        decompositions += count
    reference = {
        "gaussian_spectrum_states": [52, 53, 54, 55],
        "high_extent_only_state": 56,
        "inset_states": [64, 65, 66, 67],
        "decompositions": decompositions,
    }
    return files, reference


def _figure_6(out: Path, cfg: dict) -> tuple[list[str], dict]:
    kick, delta = 1.1, 5e-3
    files = []
    theta, phi = grid_state_location(56)
    for j in (100.0, 300.0, 500.0):
        name, _ = _figure_series(
            out, f"series_state56_J{j:g}.csv", "top", j, kick, delta,
            {"grid_state": [56]}, spin_coherent_state(j, theta, phi), 2000,
        )
        files.append(name)
    theta, phi = grid_state_location(52)
    spins = [100.0, 200.0, 300.0, 400.0, 500.0]
    rates = []
    points = []
    for j in spins:
        u, u_pert = top_floquet(j, kick), top_floquet(j, kick + delta)
        series = fidelity_series(u, u_pert, spin_coherent_state(j, theta, phi), 600)
        fit = fit_gaussian(series)
        rate = float(fit.params["gamma"])
        rates.append(rate)
        points.append({"spin": j, "rate": rate})
    scaling = scaling_exponent(spins, rates, mode="linear")
    name = "scaling_state52_spin.json"
    _write_json(
        out / name,
        "scaling",
        {"command": "scaling", "system": "top", "kick": kick, "delta": delta, "mode": "spin"},
        {
            "scaling": {
                "mode": scaling.mode,
                "exponent": float(scaling.exponent),
                "prefactor": float(scaling.prefactor),
                "intercept": float(scaling.intercept),
                "r_squared": float(scaling.r_squared),
                "points": points,
            }
        },
    )
    files.append(name)
    reference = {
        "gamma_spin_slopes": [2.3e-7, 5.5e-7, 6.7e-7, 1e-6],
        "series_spins": [100, 300, 500],
    }
    return files, reference


def _figure_7(out: Path, cfg: dict) -> tuple[list[str], dict]:
    j, kick, delta = 500.0, 1.1, 1e-3
    theta = 4 * math.pi / 5
    files = []
    for num in (1, 3, 5, 6, 7, 9):
        phi = num * math.pi / 100
        name, _ = _figure_series(
            out, f"series_phi{num}pi100.csv", "top", j, kick, delta,
            {"point": [[theta, phi]]}, spin_coherent_state(j, theta, phi), 2000,
        )
        files.append(name)
    labels = []
    for num in (3, 6, 9):
        phi = num * math.pi / 100
        labels.append((f"phi{num}pi100", spin_coherent_state(j, theta, phi)))
    written, _ = _spectrum_csv(out, "extent_inset.csv", j, kick, labels, cfg.get("cache_dir"))
    files.append(written)
    reference = {
        "theta": theta,
        "phi_values": [n * math.pi / 100 for n in (1, 3, 5, 6, 7, 9)],
        "note": "decay transitions smoothly from gaussian to power law with phi",
    }
    return files, reference


def _figure_8(out: Path, cfg: dict) -> tuple[list[str], dict]:
    j, kick, delta = 500.0, 1.1, 1e-3
    files = []
    for num in (0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10):
        theta = math.pi / 2 + num * math.pi / 100
        name, _ = _figure_series(
            out, f"series_theta{num}pi100.csv", "top", j, kick, delta,
            {"point": [[theta, 0.0]]}, spin_coherent_state(j, theta, 0.0), 2000,
        )
        files.append(name)
    reference = {
        "power_exponent_theta2": 1.0,
        "power_exponent_theta3": 1.7,
        "second_stage_gamma_theta3": 8e-8,
        "inset_gamma": 3.9e-6,
        "inset_power_exponents": [1.05, 1.15],
    }
    return files, reference


def _figure_9(out: Path, cfg: dict) -> tuple[list[str], dict]:
    n, kick, delta = 1000, 0.3, 1.4e-3
    points = [(-0.45, 0.0), (-0.3, 0.1), (0.0, 0.05), (-0.1, 0.2), (0.3, 0.4)]
    files = []
    for q0, p0 in points:
        tag = f"q{q0:g}_p{p0:g}".replace("-", "m").replace(".", "p")
        name, _ = _figure_series(
            out, f"series_{tag}.csv", "rotor", n, kick, delta,
            {"point": [[q0, p0]]}, torus_coherent_state(n, q0, p0), 2000,
        )
        files.append(name)
    reference = {
        "note": "initial exponential decay for some states; gaussian onset with "
        "exponential tail or freezing for others",
    }
    return files, reference


def _figure_10(out: Path, cfg: dict) -> tuple[list[str], dict]:
    j, kick = 500.0, 1.1
    files = []
    theta, phi = grid_state_location(54)
    state54 = spin_coherent_state(j, theta, phi)
    for delta in (1e-2, 7.5e-3, 5e-3, 2.5e-3, 1e-3):
        name, _ = _figure_series(
            out, f"series_state54_delta{delta:g}.csv", "top", j, kick, delta,
            {"grid_state": [54]}, state54, 1000,
        )
        files.append(name)
    classifications = {}
    for index in (53, 54, 55, 74):
        theta, phi = grid_state_location(index)
        name, series = _figure_series(
            out, f"series_state{index}_delta0.01.csv", "top", j, kick, 1e-2,
            {"grid_state": [index]}, spin_coherent_state(j, theta, phi), 1000,
        )
        files.append(name)
        classifications[f"state{index}"] = _classification_dict(classify_decay(series))
    name = "classifications.json"
    _write_json(out / name, "fit", {"command": "fit", "figure": 10}, {"fits": classifications})
    files.append(name)
    reference = {
        "exponential_stage_by_delta": {
            "0.01": [12.0, 0.035],
            "0.0075": [0.025, 0.00115],
            "0.005": [7.0, 0.052],
        },
        "exponential_stage_by_state": {
            "53": [1.0, 0.055],
            "54": [10.0, 0.0345],
            "55": [0.175, 0.012],
            "74": [0.06, 0.00011],
        },
    }
    return files, reference


_FIGURES = {
    1: _figure_1,
    2: _figure_2,
    3: _figure_3,
    4: _figure_4,
    5: _figure_5,
    6: _figure_6,
    7: _figure_7,
    8: _figure_8,
    9: _figure_9,
    10: _figure_10,
}


def reproduce_figure(figure_id: int, out_dir, cache_dir=None) -> dict:
    """Regenerate the data behind one figure into `out_dir`.

    Writes the underlying CSV/JSON artifacts plus a ``manifest.json`` naming
    every file and listing reference values to compare against.  Returns the
    manifest dict.
    """
    if figure_id not in _FIGURES:
        raise ConfigError(f"figure must be in 1..10, got {figure_id}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    cfg = {"command": "figure", "figure": figure_id, "out_dir": str(out_dir)}
    if cache_dir is not None:
        cfg["cache_dir"] = str(cache_dir)
    files, reference = _FIGURES[figure_id](out, cfg)
    manifest = {"figure": figure_id, "files": files, "reference": reference}
    _write_json(out / "manifest.json", "figure", cfg, manifest)
    return manifest


def cmd_figure(cfg: dict) -> None:
    _require(cfg, "figure", "out_dir")
    reproduce_figure(cfg["figure"], cfg["out_dir"], cfg.get("cache_dir"))


# ---------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="kickedecho", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, help_text: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="JSON config file; flags override its values")
        p.add_argument("--system", choices=("top", "rotor"))
        p.add_argument("--spin", "-J", action="append", type=float, help="spin J (repeatable)")
        p.add_argument("--dim", "-N", type=int, help="rotor Hilbert space dimension")
        p.add_argument("--kick", "-k", type=float, help="kick strength")
        p.add_argument("--delta", "-d", action="append", type=float, help="perturbation (repeatable)")
        p.add_argument(
            "--grid-state", "-g", action="append", type=int, dest="grid_state",
            help="numbered state on the 10x10 sphere grid (repeatable)",
        )
        p.add_argument(
            "--point", action="append",
            help="initial state center 'theta,phi' (top) or 'q,p' (rotor), repeatable",
        )
        p.add_argument("--horizon", "-T", action="append", type=int, help="evolution steps (repeatable)")
        p.add_argument("--cache-dir", dest="cache_dir", help="eigensystem cache directory")
        p.add_argument("--jobs", type=int, help="worker threads for sweeps")
        p.add_argument("--output", "-o", help="output file path")
        return p

    p = add("portrait", "classical phase portrait as orbit CSV")
    p.add_argument("--orbits", type=int, help="number of orbits")
    p.add_argument("--steps", type=int, help="map iterations per orbit")
    p.add_argument("--seed", type=int, help="seed RNG for orbit starting points")

    add("evolve", "fidelity series of one initial state as t,fidelity CSV")
    add("sweep", "classify fidelity decay over many initial states (JSON)")
    add("spectrum", "eigenstate extent spectra of initial states (CSV)")

    p = add("fit", "fit or classify a stored fidelity series (JSON)")
    p.add_argument("--input", help="t,fidelity CSV to read")
    p.add_argument("--model", choices=_MODELS, help="decay model, or 'classify'")
    p.add_argument("--window", help="fit window 'start,end' (half-open)")

    p = add("scaling", "decay-rate scaling against delta or spin (JSON)")
    p.add_argument("--mode", choices=("delta", "spin"))
    p.add_argument("--model", choices=_MODELS, help="decay model fitted at each point")

    p = add("figure", "regenerate one figure's data files plus manifest")
    p.add_argument("--figure", "--id", type=int, dest="figure", help="figure number, 1..10")
    p.add_argument("--out-dir", dest="out_dir", help="directory for the bundle")
    return parser


_DISPATCH = {
    "portrait": cmd_portrait,
    "evolve": cmd_evolve,
    "sweep": cmd_sweep,
    "spectrum": cmd_spectrum,
    "fit": cmd_fit,
    "scaling": cmd_scaling,
    "figure": cmd_figure,
}


def _fail(code: int, kind: str, message: str) -> int:
    print(json.dumps({"error": kind, "message": str(message)}), file=sys.stderr)
    return code


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except ConfigError as exc:
        return _fail(EXIT_CONFIG, "config", exc)
    try:
        cfg = resolve_config(args.command, args)
        _DISPATCH[args.command](cfg)
    except ConfigError as exc:
        return _fail(EXIT_CONFIG, "config", exc)
    except OSError as exc:
        return _fail(EXIT_IO, "io", exc)
    except EigenConvergenceError as exc:
        return _fail(EXIT_NUMERIC, "numeric", exc)
    except (ValueError, ArithmeticError) as exc:
        # parameters were validated up front, so a ValueError out of the
        # library marks a numerical failure (degenerate fit window, halted
        # convergence, non-finite intermediate), not a config mistake
        return _fail(EXIT_NUMERIC, "numeric", exc)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
