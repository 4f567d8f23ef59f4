"""Command-line front end: synthesize, simulate, diagnose, convergence.

Runs are driven by a flat key-value config file with dotted sections
(grid.T, kernel.kind, target.kind, ...).  Every artifact embeds the tool
version and a sha256 of the resolved config, carries no timestamps, and is
byte-reproducible for identical configs.

Exit codes: 0 success, 2 invalid config, 3 numerical failure, 4
verification failure (target missed beyond tolerance).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

from . import __version__
from .control import ControlSignal, cascade_check, hard_zero_end, integrate_density
from .errors import (ConfigError, IllConditionedError, InstabilityError,
                     InternalConsistencyError, InvalidArgumentError,
                     MeanZeroViolationError, WavesteerError)
from .kernel import (ExponentialKernel, KernelSpec, TabulatedKernel, TimeGrid,
                     ZeroKernel, build_kernel, make_grid)
from .moment import (MomentSystem, build_family, gram, quadratic_closeness,
                     riesz_diagnostics, solve_min_norm, steering_rhs)
from .simulator import formula_modes, step_modes, verify
from .spectral import StateSnapshot, Target, coefficients_from_function, \
    reconstruct, target_from_coefficients
from .volterra import convergence_order, solve_all_modes

_CONVERTERS: dict[str, Callable[[str], object]] = {}
_DEFAULTS: dict[str, object] = {}


def _key(name: str, default: object, conv: Callable[[str], object]) -> None:
    _DEFAULTS[name] = default
    _CONVERTERS[name] = conv


def _as_bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _as_int(text: str) -> int:
    return int(text.strip())


def _as_float(text: str) -> float:
    return float(text.strip())


def _as_str(text: str) -> str:
    return text.strip()


_key("grid.T", 7.0, _as_float)
_key("grid.K", 4096, _as_int)
_key("run.n_max", 16, _as_int)
_key("run.tol_T", 1e-6, _as_float)
_key("run.pipeline_tol", 1e-2, _as_float)
_key("run.ridge", 0.0, _as_float)
_key("run.hard_zero_end", False, _as_bool)
_key("kernel.kind", "zero", _as_str)
_key("kernel.alpha", 1.0, _as_float)
_key("kernel.beta", 1.0, _as_float)
_key("kernel.path", "", _as_str)
_key("target.kind", "zero", _as_str)
_key("target.xi", "", _as_str)
_key("target.eta", "", _as_str)
_key("target.amp", 1.0, _as_float)
_key("target.path", "", _as_str)
_key("output.dir", ".", _as_str)
_key("output.control", "control.csv", _as_str)
_key("output.state", "state.csv", _as_str)
_key("output.report", "report.json", _as_str)
_key("output.gram", "", _as_str)
_key("output.snapshots", 0, _as_int)
_key("simulate.control", "", _as_str)
_key("convergence.K_list", "1024,2048,4096", _as_str)
_key("convergence.n_max_list", "", _as_str)
_key("diagnose.sweep", "", _as_str)
_key("diagnose.orders_n", "1,4", _as_str)


@dataclass(frozen=True)
class RunConfig:
    """Resolved configuration: typed values plus the canonical echo text."""

    values: dict
    text: str
    sha256: str

    def __getitem__(self, key: str):
        return self.values[key]


def _canonical(values: dict) -> str:
    lines = []
    for key in sorted(values):
        val = values[key]
        if isinstance(val, bool):
            rendered = "true" if val else "false"
        elif isinstance(val, float):
            rendered = repr(val)
        else:
            rendered = str(val)
        lines.append(f"{key} = {rendered}")
    return "\n".join(lines) + "\n"


def load_config(path: Optional[str], overrides: Optional[dict] = None) -> RunConfig:
    """Read a key-value config file, apply overrides, validate, and hash."""
    values = dict(_DEFAULTS)
    if path is not None:
        raw = Path(path).read_text()
        for lineno, line in enumerate(raw.splitlines(), start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            if "=" not in stripped:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
            key, _, text = stripped.partition("=")
            key = key.strip()
            if key not in _CONVERTERS:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            try:
                values[key] = _CONVERTERS[key](text)
            except ValueError as exc:
                raise ConfigError(f"{path}:{lineno}: bad value for {key}: {exc}")
    for key, text in (overrides or {}).items():
        if key not in _CONVERTERS:
            raise ConfigError(f"unknown config key {key!r}")
        if isinstance(text, str):
            try:
                values[key] = _CONVERTERS[key](text)
            except ValueError as exc:
                raise ConfigError(f"bad value for {key}: {exc}")
        else:
            values[key] = text

    _validate(values)
    text = _canonical(values)
    sha = hashlib.sha256(text.encode()).hexdigest()
    return RunConfig(values=values, text=text, sha256=sha)


def _validate(values: dict) -> None:
    if values["grid.T"] <= 0 or not np.isfinite(values["grid.T"]):
        raise ConfigError("grid.T must be positive and finite")
    if values["grid.K"] < 2:
        raise ConfigError("grid.K must be >= 2")
    if values["run.n_max"] < 1:
        raise ConfigError("run.n_max must be >= 1")
    if values["run.tol_T"] <= 0 or values["run.pipeline_tol"] <= 0:
        raise ConfigError("tolerances must be positive")
    if values["run.ridge"] < 0:
        raise ConfigError("run.ridge must be >= 0")
    if values["kernel.kind"] not in ("zero", "exponential", "tabulated"):
        raise ConfigError(f"unknown kernel.kind {values['kernel.kind']!r}")
    if values["target.kind"] not in ("zero", "coeffs", "sine", "polynomial", "csv"):
        raise ConfigError(f"unknown target.kind {values['target.kind']!r}")
    if values["kernel.kind"] == "tabulated" and not values["kernel.path"]:
        raise ConfigError("tabulated kernel needs kernel.path")
    if values["target.kind"] == "csv" and not values["target.path"]:
        raise ConfigError("csv target needs target.path")
    for key in ("kernel.path", "target.path", "simulate.control"):
        if values[key] and not Path(values[key]).exists():
            raise ConfigError(f"{key} refers to a missing file: {values[key]}")


def _parse_int_list(text: str, key: str) -> list[int]:
    if not text.strip():
        return []
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise ConfigError(f"{key} must be a comma-separated integer list")


def _parse_mode_list(text: str, n_max: int, key: str) -> np.ndarray:
    """Parse 'n:value,n:value' into a length-n_max coefficient array."""
    out = np.zeros(n_max)
    if not text.strip():
        return out
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        try:
            n_text, _, val_text = part.partition(":")
            n = int(n_text)
            val = float(val_text)
        except ValueError:
            raise ConfigError(f"{key}: bad entry {part!r}, expected 'n:value'")
        if not 1 <= n <= n_max:
            raise ConfigError(f"{key}: mode {n} outside 1..{n_max}")
        out[n - 1] += val
    return out


def _load_table(path: str) -> np.ndarray:
    """Numeric CSV rows, skipping # comments and an optional header row."""
    with open(path) as fh:
        rows = [ln for ln in fh
                if ln.strip() and not ln.lstrip().startswith("#")]
    if rows:
        try:
            float(rows[0].split(",")[0])
        except ValueError:
            rows = rows[1:]
    if not rows:
        raise ConfigError(f"no data rows in {path}")
    return np.loadtxt(rows, delimiter=",", ndmin=2)


def kernel_from_config(config: RunConfig, grid: TimeGrid) -> KernelSpec:
    kind_name = config["kernel.kind"]
    if kind_name == "zero":
        return build_kernel(ZeroKernel(), grid)
    if kind_name == "exponential":
        return build_kernel(
            ExponentialKernel(alpha=config["kernel.alpha"],
                              beta=config["kernel.beta"]), grid)
    data = _load_table(config["kernel.path"])
    if data.shape[1] not in (2, 3):
        raise ConfigError("tabulated kernel CSV needs columns t,M[,Mprime]")
    Mprime = data[:, 2] if data.shape[1] == 3 else None
    return build_kernel(TabulatedKernel(t=data[:, 0], M=data[:, 1], Mprime=Mprime),
                        grid)


def target_from_config(config: RunConfig) -> Target:
    kind = config["target.kind"]
    n_max = config["run.n_max"]
    if kind == "zero":
        return target_from_coefficients(np.zeros(n_max), np.zeros(n_max),
                                        provenance="zero")
    if kind == "coeffs":
        xi = _parse_mode_list(config["target.xi"], n_max, "target.xi")
        eta = _parse_mode_list(config["target.eta"], n_max, "target.eta")
        return target_from_coefficients(xi, eta, provenance="coeffs")
    if kind == "sine":
        # amplitudes of plain sin(n x) terms; exact basis coefficients
        amp_xi = _parse_mode_list(config["target.xi"], n_max, "target.xi")
        amp_eta = _parse_mode_list(config["target.eta"], n_max, "target.eta")
        modes = np.arange(1, n_max + 1)
        scale = np.sqrt(np.pi / 2.0)
        return target_from_coefficients(modes * amp_xi * scale, amp_eta * scale,
                                        provenance="sine")
    if kind == "polynomial":
        # xi(x) = amp * x * (pi - x); odd-mode closed-form coefficients
        modes = np.arange(1, n_max + 1)
        a = np.where(modes % 2 == 1,
                     config["target.amp"] * np.sqrt(2.0 / np.pi) * 4.0 / modes ** 3,
                     0.0)
        target = target_from_coefficients(modes * a, np.zeros(n_max),
                                          provenance="polynomial")
        tail_modes = np.arange(n_max + 1, 100001)
        tail = np.sum(np.where(
            tail_modes % 2 == 1,
            (config["target.amp"] * np.sqrt(2.0 / np.pi) * 4.0 / tail_modes ** 2) ** 2,
            0.0))
        return Target(n_max=target.n_max, xi=target.xi, eta=target.eta,
                      provenance="polynomial", tail_energy=float(tail))
    data = _load_table(config["target.path"])
    if data.shape[1] not in (2, 3):
        raise ConfigError("csv target needs columns x,xi[,eta]")
    x_s, xi_s = data[:, 0], data[:, 1]
    eta_s = data[:, 2] if data.shape[1] == 3 else None
    xi_fn = lambda x: np.interp(x, x_s, xi_s)
    eta_fn = None if eta_s is None else (lambda x: np.interp(x, x_s, eta_s))
    return coefficients_from_function(xi_fn, eta_fn, n_max,
                                      Q=max(2048, 8 * n_max))


def _fmt(x: float) -> str:
    return f"{float(x):.17g}"


def _artifact_header(config: RunConfig) -> list[str]:
    lines = [f"# wavesteer {__version__}", f"# config sha256 {config.sha256}"]
    lines.extend(f"# {line}" for line in config.text.strip().splitlines())
    return lines


def _write_lines(path: Path, lines: Sequence[str]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n")


def write_control_csv(path: Path, config: RunConfig, signal: ControlSignal) -> None:
    lines = _artifact_header(config)
    lines.append("t,g,f,f_phys")
    for k in range(signal.grid.K + 1):
        lines.append(",".join(_fmt(v) for v in
                              (signal.grid.t[k], signal.g[k], signal.f[k],
                               signal.f_phys[k])))
    _write_lines(path, lines)


def write_state_csv(path: Path, config: RunConfig, target: Target,
                    final: StateSnapshot) -> None:
    lines = _artifact_header(config)
    lines.append("n,a_n,b_n,xi_n_over_n,eta_n,res_pos,res_vel")
    for i in range(target.n_max):
        n = i + 1
        lines.append(",".join([str(n)] + [_fmt(v) for v in (
            final.a[i], final.b[i], target.xi[i] / n, target.eta[i],
            n * final.a[i] - target.xi[i], final.b[i] - target.eta[i])]))
    _write_lines(path, lines)


def write_gram_csv(path: Path, config: RunConfig, system: MomentSystem) -> None:
    """Gram matrix as CSV with re,im interleaved per column."""
    lines = _artifact_header(config)
    idx = [str(n) for n in system.indices]
    lines.append("n," + ",".join(f"re_{m},im_{m}" for m in idx))
    for i, n in enumerate(idx):
        row = []
        for j in range(len(idx)):
            row.append(_fmt(system.G[i, j].real))
            row.append(_fmt(system.G[i, j].imag))
        lines.append(f"{n}," + ",".join(row))
    _write_lines(path, lines)


def write_snapshots_csv(path: Path, config: RunConfig, result, grid: TimeGrid,
                        count: int, resolution: int = 128) -> None:
    lines = _artifact_header(config)
    lines.append("t,x,w")
    if result.modes is None:
        raise InternalConsistencyError("snapshots requested but trajectories absent")
    n_max = len(result.modes)
    picks = np.unique(np.linspace(0, grid.K, count).round().astype(int))
    for j in picks:
        snap = StateSnapshot(n_max=n_max,
                             a=np.array([m.w[j] for m in result.modes]),
                             b=np.array([m.dw[j] for m in result.modes]),
                             t=float(grid.t[j]))
        x, values = reconstruct(snap, resolution)
        for xi_, wi in zip(x, values):
            lines.append(f"{_fmt(grid.t[j])},{_fmt(xi_)},{_fmt(wi)}")
    _write_lines(path, lines)


def _json_ready(obj):
    if isinstance(obj, np.ndarray):
        return [_json_ready(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, dict):
        return {k: _json_ready(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_ready(v) for v in obj]
    return obj


def write_report_json(path: Path, config: RunConfig, payload: dict) -> None:
    body = {"version": __version__, "config_sha256": config.sha256,
            "config": _json_ready(config.values)}
    body.update(_json_ready(payload))
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(body, indent=2, sort_keys=True) + "\n")


def _out_path(config: RunConfig, key: str) -> Path:
    return Path(config["output.dir"]) / config[key]


def _success(e_total: float, target_norm: float, tol: float) -> bool:
    if target_norm > 0:
        return e_total <= tol * target_norm
    return e_total <= tol


def _run_pipeline(config: RunConfig, T: float, K: int, n_max: int):
    """kernel -> modes -> family -> Gram -> density -> control -> stepping."""
    grid = make_grid(T, K)
    kernel = kernel_from_config(config, grid)
    target = target_from_config(config)
    if target.n_max != n_max:
        target = target_from_coefficients(
            _resized(target.xi, n_max), _resized(target.eta, n_max),
            provenance=target.provenance)
    modes = solve_all_modes(n_max, kernel, grid)
    family = build_family(modes, grid)
    system = gram(family, grid)
    system.c = steering_rhs(target)
    density = solve_min_norm(system, family, grid, ridge=config["run.ridge"])
    signal = integrate_density(density.g, grid, tol_T=config["run.tol_T"])
    if config["run.hard_zero_end"]:
        signal = hard_zero_end(signal)
    return grid, kernel, target, modes, family, system, density, signal


def _resized(values: np.ndarray, n_max: int) -> np.ndarray:
    out = np.zeros(n_max)
    keep = min(values.size, n_max)
    out[:keep] = values[:keep]
    return out


def cmd_synthesize(config: RunConfig) -> int:
    """Full pipeline plus verification; exit 0 iff the target is hit."""
    n_max = config["run.n_max"]
    if config["grid.T"] <= 2.0 * np.pi:
        print(f"warning: T = {config['grid.T']:g} is at or below the critical "
              f"horizon {2 * np.pi:.6f}; the moment family loses the Riesz "
              f"property", file=sys.stderr)
    grid, kernel, target, modes, family, system, density, signal = _run_pipeline(
        config, config["grid.T"], config["grid.K"], n_max)

    cascade = cascade_check(signal)
    keep = config["output.snapshots"] > 0
    result = step_modes(signal, kernel, grid, n_max, keep_trajectories=keep)
    report = verify(target, result)
    formula = formula_modes(signal, modes, kernel, grid)
    formula_gap = max(float(np.max(np.abs(formula.final.a - result.final.a))),
                      float(np.max(np.abs(formula.final.b - result.final.b))))
    diag = riesz_diagnostics(system)

    f_max = float(np.max(np.abs(signal.f)))
    payload = {
        "command": "synthesize",
        "e_h1": report.e_h1, "e_l2": report.e_l2, "e_total": report.e_total,
        "target_norm": target.norm(),
        "success": _success(report.e_total, target.norm(),
                            config["run.pipeline_tol"]),
        "norm_g": signal.norm_g, "norm_f_h1": signal.norm_f_h1,
        "f_end_residual": float(signal.f[-1]),
        "f_end_relative": abs(float(signal.f[-1])) / f_max if f_max > 0 else 0.0,
        "gram": {"min_eig": diag.min_eig, "max_eig": diag.max_eig,
                 "cond": diag.cond, "frame_lower": diag.frame_lower,
                 "frame_upper": diag.frame_upper},
        "moment_solve": {"residual": density.residual,
                         "moment_defect": density.moment_defect,
                         "imag_ratio": density.imag_ratio},
        "cascade": {"mean_value": cascade.mean_value, "mean_ok": cascade.mean_ok,
                    "endpoint_value": cascade.endpoint_value,
                    "endpoint_ok": cascade.endpoint_ok,
                    "max_derivative_residual": cascade.max_derivative_residual,
                    "passed": cascade.passed},
        "formula_vs_stepping": formula_gap,
        "per_mode": [{"n": i + 1, "a": float(result.final.a[i]),
                      "b": float(result.final.b[i]),
                      "res_pos": float(report.residual_pos[i]),
                      "res_vel": float(report.residual_vel[i])}
                     for i in range(n_max)],
    }

    write_control_csv(_out_path(config, "output.control"), config, signal)
    write_state_csv(_out_path(config, "output.state"), config, target,
                    result.final)
    write_report_json(_out_path(config, "output.report"), config, payload)
    if config["output.gram"]:
        write_gram_csv(_out_path(config, "output.gram"), config, system)
    if keep:
        write_snapshots_csv(Path(config["output.dir"]) / "snapshots.csv",
                            config, result, grid, config["output.snapshots"])
    return 0 if payload["success"] else 4


def cmd_simulate(config: RunConfig) -> int:
    """Re-run a stored control CSV through the stepping simulator."""
    if not config["simulate.control"]:
        raise ConfigError("simulate needs simulate.control = path to control CSV")
    data = _load_table(config["simulate.control"])
    grid = make_grid(config["grid.T"], config["grid.K"])
    if data.shape[0] != grid.K + 1 or data.shape[1] < 2:
        raise ConfigError(
            f"stored control has shape {data.shape}, expected "
            f"({grid.K + 1}, >=2) for the configured grid")
    if np.max(np.abs(data[:, 0] - grid.t)) > 1e-10 * max(1.0, grid.T):
        raise ConfigError("stored control was sampled on a different grid")
    kernel = kernel_from_config(config, grid)
    target = target_from_config(config)
    signal = integrate_density(data[:, 1], grid, tol_T=config["run.tol_T"])
    result = step_modes(signal, kernel, grid, config["run.n_max"])
    report = verify(target, result)
    payload = {
        "command": "simulate",
        "e_h1": report.e_h1, "e_l2": report.e_l2, "e_total": report.e_total,
        "target_norm": target.norm(),
        "success": _success(report.e_total, target.norm(),
                            config["run.pipeline_tol"]),
    }
    write_state_csv(_out_path(config, "output.state"), config, target,
                    result.final)
    write_report_json(_out_path(config, "output.report"), config, payload)
    return 0 if payload["success"] else 4


def cmd_diagnose(config: RunConfig) -> int:
    """Riesz diagnostics: Gram spectrum, closeness sums, convergence orders."""
    grid = make_grid(config["grid.T"], config["grid.K"])
    kernel = kernel_from_config(config, grid)
    n_max = config["run.n_max"]
    sweep = _parse_int_list(config["diagnose.sweep"], "diagnose.sweep") or [n_max]
    top = max(max(sweep), n_max)

    modes = solve_all_modes(top, kernel, grid)
    sweep_rows = []
    for m in sorted(set(sweep)):
        family_m = build_family(modes[:m], grid)
        diag_m = riesz_diagnostics(gram(family_m, grid))
        sweep_rows.append({"n_max": m, "min_eig": diag_m.min_eig,
                           "max_eig": diag_m.max_eig, "cond": diag_m.cond})

    family = build_family(modes[:n_max], grid)
    system = gram(family, grid)
    diag = riesz_diagnostics(system)
    closeness = quadratic_closeness(family, kernel, grid)

    orders = []
    if not isinstance(kernel.kind, TabulatedKernel):
        for n in _parse_int_list(config["diagnose.orders_n"], "diagnose.orders_n"):
            orders.append({"n": n,
                           "order": convergence_order(n, kernel.kind, grid.T)})

    payload = {
        "command": "diagnose",
        "gram_spectrum": diag.eigenvalues,
        "min_eig": diag.min_eig, "max_eig": diag.max_eig, "cond": diag.cond,
        "frame_lower": diag.frame_lower, "frame_upper": diag.frame_upper,
        "sweep": sweep_rows,
        "closeness": {
            "N": closeness.N, "gamma": closeness.gamma,
            "per_term_literal": closeness.per_term_literal,
            "per_term_swapped": closeness.per_term_swapped,
            "S_literal": closeness.S_literal,
            "S_swapped": closeness.S_swapped,
            "literal_saturates": closeness.literal_saturates,
            "swapped_saturates": closeness.swapped_saturates,
        },
        "convergence_orders": orders,
    }
    write_report_json(_out_path(config, "output.report"), config, payload)
    if config["output.gram"]:
        write_gram_csv(_out_path(config, "output.gram"), config, system)
    return 0


def cmd_convergence(config: RunConfig) -> int:
    """Sweep (K, n_max) cells and tabulate the verified steering error."""
    k_list = _parse_int_list(config["convergence.K_list"], "convergence.K_list")
    n_list = _parse_int_list(config["convergence.n_max_list"],
                             "convergence.n_max_list") or [config["run.n_max"]]
    if not k_list:
        raise ConfigError("convergence.K_list must not be empty")

    rows = []
    for n_max in n_list:
        for K in k_list:
            grid, kernel, target, modes, family, system, density, signal = \
                _run_pipeline(config, config["grid.T"], K, n_max)
            result = step_modes(signal, kernel, grid, n_max)
            report = verify(target, result)
            rows.append({"K": K, "n_max": n_max, "e_h1": report.e_h1,
                         "e_l2": report.e_l2, "e_total": report.e_total})

    monotone = True
    for n_max in n_list:
        cells = [r for r in rows if r["n_max"] == n_max]
        cells.sort(key=lambda r: r["K"])
        errs = [r["e_total"] for r in cells]
        if any(b > a for a, b in zip(errs, errs[1:])):
            monotone = False

    payload = {"command": "convergence", "rows": rows, "monotone_in_K": monotone}
    write_report_json(_out_path(config, "output.report"), config, payload)
    lines = _artifact_header(config)
    lines.append("K,n_max,e_h1,e_l2,e_total")
    for r in rows:
        lines.append(f"{r['K']},{r['n_max']},{_fmt(r['e_h1'])},"
                     f"{_fmt(r['e_l2'])},{_fmt(r['e_total'])}")
    _write_lines(Path(config["output.dir"]) / "convergence.csv", lines)
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wavesteer",
        description="Boundary steering-control synthesis for the 1D wave "
                    "equation with memory")
    parser.add_argument("--version", action="version",
                        version=f"wavesteer {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
            ("synthesize", "solve the moment problem and synthesize a control"),
            ("simulate", "re-run a stored control through the simulator"),
            ("diagnose", "Gram spectrum, closeness sums, convergence orders"),
            ("convergence", "error table over (K, n_max) sweeps")):
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("config", nargs="?", default=None,
                         help="key-value config file (defaults used if omitted)")
        cmd.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                         help="override any config key")
        cmd.add_argument("--out-dir", default=None, help="artifact directory")
        if name == "synthesize":
            cmd.add_argument("--out-control", default=None)
            cmd.add_argument("--out-state", default=None)
            cmd.add_argument("--dump-gram", action="store_true",
                             help="also write the Gram matrix as CSV")
            cmd.add_argument("--snapshots", type=int, default=None, metavar="k",
                             help="emit reconstructed w(x,t) at k times")
            cmd.add_argument("--hard-zero-end", action="store_true",
                             help="post-hoc linear correction forcing f(T)=0")
            cmd.add_argument("--ridge", type=float, default=None,
                             help="ridge parameter for the Gram solve")
        if name == "simulate":
            cmd.add_argument("--control", default=None,
                             help="stored control CSV (overrides simulate.control)")
        if name == "diagnose":
            cmd.add_argument("--dump-gram", action="store_true")
            cmd.add_argument("--sweep", default=None,
                             help="comma list of n_max values for the eig sweep")
    return parser


def _overrides_from_args(args: argparse.Namespace) -> dict:
    overrides: dict = {}
    for item in args.set:
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        overrides[key.strip()] = value.strip()
    if args.out_dir is not None:
        overrides["output.dir"] = args.out_dir
    if getattr(args, "out_control", None) is not None:
        overrides["output.control"] = args.out_control
    if getattr(args, "out_state", None) is not None:
        overrides["output.state"] = args.out_state
    if getattr(args, "dump_gram", False):
        overrides["output.gram"] = "gram.csv"
    if getattr(args, "snapshots", None) is not None:
        overrides["output.snapshots"] = args.snapshots
    if getattr(args, "hard_zero_end", False):
        overrides["run.hard_zero_end"] = True
    if getattr(args, "ridge", None) is not None:
        overrides["run.ridge"] = args.ridge
    if getattr(args, "control", None) is not None:
        overrides["simulate.control"] = args.control
    if getattr(args, "sweep", None) is not None:
        overrides["diagnose.sweep"] = args.sweep
    return overrides


_COMMANDS = {"synthesize": cmd_synthesize, "simulate": cmd_simulate,
             "diagnose": cmd_diagnose, "convergence": cmd_convergence}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        config = load_config(args.config, _overrides_from_args(args))
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        return _COMMANDS[args.command](config)
    except (ConfigError, InvalidArgumentError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (InstabilityError, IllConditionedError, MeanZeroViolationError,
            InternalConsistencyError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except WavesteerError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
