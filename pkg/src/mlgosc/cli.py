"""Command-line harness: ``mlgosc <command> [options]``.

Exit status: 0 success, 2 usage or configuration error, 3 numerical failure.
Options may also come from a ``key=value`` file (``--config``); flags given on
the command line take precedence.
"""
from __future__ import annotations

import argparse
import dataclasses
import math
import sys
import warnings
from dataclasses import dataclass, fields

import numpy as np

from .correlators import (DwellMethod, dwell_time_sq, f12sq_expectation, f12sq_p1_closed,
                          p1_closed_dwell, standard_correlator_map)
from .coupling import CouplingSpec, TimeWindow, matrix_elements
from .errors import DomainError, MlgError, SeriesError, TruncationError, ZeroNormError
from .inequalities import (InequalityFamily, lg2_two_time_delta, mlg3_for_state, mlg4_for_state,
                           stationary_kernels)
from .io import dump_json, write_csv
from .optimizer import SWEEP_HEADER, SearchDomain, sweep_grid
from .oscillator import (OscillatorConfig, TruncationPolicy, alpha_from_phase_space,
                         coherent_amplitudes, fock_state, momentum_state, required_level)
from .sca import oscillatory_part

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3
COMMANDS = ("correlator", "inequalities", "optimize", "dwell", "gaussian-table")
FAMILIES = ("mlg3", "mlg4", "stationary", "lg2")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str = "correlator"
    coupling: str = "delta"
    omega: float = 1.0
    state: str = "fock:0"
    convention: str = "quadrature"
    grid_start: float = 0.0
    grid_stop: float = 2 * math.pi
    grid_points: int = 201
    omega_tau: tuple[float, ...] = ()
    t1: float = 0.0
    family: str = "mlg3"
    sigmas: tuple[float, ...] = ()
    max_level: int = 40
    tail_tol: float = 1e-8
    k_max: int | None = None
    k_cap: int = 1 << 22
    dwell_method: str = "spectral"
    oscillatory: bool = False
    standard: bool = False
    x0_range: tuple[float, ...] = (-4.0, 4.0)
    p0_range: tuple[float, ...] = (-4.0, 4.0)
    search_grid: int = 41
    refine_tol: float = 1e-8
    size: int = 16
    output: str = "-"
    format: str = "csv"

    # -- serialization -----------------------------------------------------

    def to_text(self) -> str:
        lines = []
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, tuple):
                text = ",".join(repr(float(x)) for x in v)
            elif v is None:
                text = "none"
            elif isinstance(v, float):
                text = repr(v)
            else:
                text = str(v).lower() if isinstance(v, bool) else str(v)
            lines.append(f"{f.name}={text}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "RunConfig":
        return cls(**parse_pairs(text))

    def validate(self) -> "RunConfig":
        if self.command not in COMMANDS:
            raise ConfigError(f"command: unknown {self.command!r}")
        if self.format not in ("csv", "json"):
            raise ConfigError(f"format: expected csv or json, got {self.format!r}")
        if self.family not in FAMILIES:
            raise ConfigError(f"family: expected one of {FAMILIES}, got {self.family!r}")
        if self.grid_points < 1 and not self.omega_tau:
            raise ConfigError("grid_points: the omega*tau grid is empty")
        if not (self.omega > 0 and math.isfinite(self.omega)):
            raise ConfigError(f"omega: must be finite and > 0, got {self.omega}")
        return self


_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _convert(name: str, text: str):
    kind = _FIELD_TYPES.get(name)
    if kind is None:
        raise ConfigError(f"unknown config key {name!r}")
    text = text.strip()
    try:
        if kind.startswith("tuple"):
            return tuple(float(x) for x in text.split(",") if x.strip())
        if kind == "bool":
            if text.lower() not in ("true", "false", "1", "0", "yes", "no"):
                raise ValueError(text)
            return text.lower() in ("true", "1", "yes")
        if kind == "int | None":
            return None if text.lower() in ("", "none") else int(text)
        if kind == "int":
            return int(text)
        if kind == "float":
            return float(text)
    except ValueError as exc:
        raise ConfigError(f"{name}: cannot parse {text!r}") from exc
    return text


def parse_pairs(text: str) -> dict:
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"config line {lineno}: expected key=value, got {raw!r}")
        key = key.strip().replace("-", "_")
        out[key] = _convert(key, value)
    return out


# ---------------------------------------------------------------------------
# building blocks from a RunConfig
# ---------------------------------------------------------------------------

def oscillator_config(run: RunConfig, max_level: int | None = None) -> OscillatorConfig:
    try:
        pol = TruncationPolicy(max_level=max_level or run.max_level, tail_tol=run.tail_tol,
                               k_max=run.k_max, k_cap=run.k_cap)
        return OscillatorConfig(run.omega, pol)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def coupling_of(run: RunConfig) -> CouplingSpec:
    try:
        return CouplingSpec.parse(run.coupling)
    except ValueError as exc:
        raise ConfigError(f"coupling: {exc}") from exc


def build_state(run: RunConfig):
    """(label, StateVector, OscillatorConfig) from ``fock:n``, ``coherent:x0,p0`` or ``pstate:n``."""
    kind, _, arg = run.state.partition(":")
    try:
        if kind == "fock":
            n = int(arg)
            if n < 0:
                raise ValueError
            config = oscillator_config(run, max(run.max_level, n))
            return run.state, fock_state(n, config.truncation), config
        if kind == "pstate":
            n = int(arg)
            if n < 0:
                raise ValueError
            config = oscillator_config(run, max(run.max_level, n + 1))
            return run.state, momentum_state(n, config.truncation, config), config
        if kind == "coherent":
            x0, p0 = (float(v) for v in arg.split(","))
            alpha = alpha_from_phase_space(x0, p0, run.omega, run.convention)
            level = max(run.max_level, required_level(abs(alpha), run.tail_tol))
            config = oscillator_config(run, level)
            return run.state, coherent_amplitudes(alpha, config.truncation), config
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"state: cannot parse {run.state!r}") from exc
    raise ConfigError(f"state: expected fock:n, coherent:x0,p0 or pstate:n, got {run.state!r}")


def omega_tau_grid(run: RunConfig) -> np.ndarray:
    if run.omega_tau:
        grid = np.array(run.omega_tau, dtype=float)
    else:
        grid = np.linspace(run.grid_start, run.grid_stop, run.grid_points)
    if grid.size == 0:
        raise ConfigError("grid_points: the omega*tau grid is empty")
    if np.any(grid < 0) or not np.all(np.isfinite(grid)):
        raise ConfigError("omega_tau: values must be finite and >= 0")
    return grid


# ---------------------------------------------------------------------------
# commands; each returns (header, rows, extra JSON fields)
# ---------------------------------------------------------------------------

def cmd_correlator(run: RunConfig):
    label, state, config = build_state(run)
    coupling = coupling_of(run)
    grid = omega_tau_grid(run)
    w = config.omega
    header = ["omega_tau", "value", "tail_estimate"]
    if run.oscillatory and not label.startswith("fock:"):
        raise ConfigError("oscillatory: only defined for fock:n states")
    values = [f12sq_expectation(state, TimeWindow(run.t1, run.t1 + x / w), coupling, config)
              for x in grid]
    cols = [grid, [v.value for v in values], [v.tail_estimate for v in values]]
    dwell = dwell_time_sq(state, coupling, config, run.dwell_method)
    if run.oscillatory:
        curve = oscillatory_part(int(label[5:]), grid / w, coupling, config)
        header.append("oscillatory")
        cols.append(curve.values)
    if run.standard:
        header.append("c12")
        cols.append([standard_correlator_map(v, dwell) for v in values])
    if label == "pstate:1" and coupling.is_delta:
        closed = [f12sq_p1_closed(x / w, config).value for x in grid]
        header += ["closed_form", "c12_exact", "c12_closed"]
        cols += [closed, [standard_correlator_map(v, dwell) for v in values],
                 [standard_correlator_map(c, p1_closed_dwell(config)) for c in closed]]
    return header, list(zip(*cols)), {"tau_d_sq": dwell.tau_d_sq}


def _inequality_rows(run: RunConfig, coupling: CouplingSpec):
    label, state, config = build_state(run)
    w = config.omega
    rows = []
    for x in omega_tau_grid(run):
        tau = x / w
        if run.family == "stationary":
            if not label.startswith("fock:"):
                raise ConfigError("family: stationary kernels need a fock:n state")
            rep = stationary_kernels(int(label[5:]), tau, coupling, config)
        elif run.family == "lg2":
            dwell = dwell_time_sq(state, coupling, config, run.dwell_method)
            f12 = f12sq_expectation(state, TimeWindow(run.t1, run.t1 + tau), coupling, config)
            try:
                k = lg2_two_time_delta(f12, dwell)
            except MlgError as exc:
                raise ConfigError(f"coupling: {exc}") from exc
            rows.append([x, k, k < 0, math.nan, dwell.tau_d_sq])
            continue
        else:
            fn = mlg3_for_state if run.family == "mlg3" else mlg4_for_state
            dwell = dwell_time_sq(state, coupling, config, run.dwell_method)
            rep = fn(state, tau, coupling, config, t1=run.t1, dwell=dwell)
        scale = rep.luders_scale if isinstance(rep.luders_scale, tuple) else (rep.luders_scale,)
        rows.append([x, *rep.kernels, *[int(v) for v in rep.violated], *scale, rep.tau_d_sq])
    return rows


def _inequality_header(family: str) -> list[str]:
    count = {"mlg3": 4, "mlg4": 4, "stationary": 2, "lg2": 1}[family]
    ks = [f"kernel_{i + 1}" for i in range(count)]
    vs = [f"violated_{i + 1}" for i in range(count)]
    scale = ["luders_lower", "luders_upper"] if family == "mlg4" else ["luders_scale"]
    return ["omega_tau", *ks, *vs, *scale, "tau_d_sq"]


def cmd_inequalities(run: RunConfig):
    header = _inequality_header(run.family)
    if not run.sigmas:
        return header, _inequality_rows(run, coupling_of(run)), {"family": run.family}
    rows = []
    for s in run.sigmas:
        try:
            coupling = CouplingSpec.gaussian(s)
        except ValueError as exc:
            raise ConfigError(f"sigmas: {exc}") from exc
        rows += [[s, *r] for r in _inequality_rows(run, coupling)]
    return ["sigma", *header], rows, {"family": run.family}


def cmd_optimize(run: RunConfig):
    grid = omega_tau_grid(run)
    if np.any(grid <= 0):
        raise ConfigError("omega_tau: optimization needs omega*tau > 0")
    if run.family not in ("mlg3", "mlg4"):
        raise ConfigError("family: optimize supports mlg3 and mlg4")
    try:
        domain = SearchDomain(tuple(run.x0_range), tuple(run.p0_range),
                              (run.search_grid, run.search_grid), run.refine_tol, run.convention)
    except DomainError as exc:
        raise ConfigError(f"domain: {exc}") from exc
    config = oscillator_config(run)
    family = InequalityFamily.MLG3 if run.family == "mlg3" else InequalityFamily.MLG4
    sweep = sweep_grid(grid / config.omega, family, domain, coupling_of(run), config)
    rows = [r.csv_row() for r in sweep.rows]
    for tau, msg in sweep.errors:
        print(f"tau={tau!r}: {msg}", file=sys.stderr)
    extra = {"errors": [[t, m] for t, m in sweep.errors], "convention": run.convention}
    if sweep.errors:
        raise _PartialFailure(SWEEP_HEADER, rows, extra)
    return SWEEP_HEADER, rows, extra


def cmd_dwell(run: RunConfig):
    label, state, config = build_state(run)
    coupling = coupling_of(run)
    rows = []
    for method in DwellMethod:
        d = dwell_time_sq(state, coupling, config, method, t1=run.t1)
        rows.append([method.value, d.tau_d_sq, d.tail_estimate])
    if label == "pstate:1" and coupling.is_delta:
        rows.append(["p1-closed", p1_closed_dwell(config).tau_d_sq, 0.0])
    return ["method", "tau_d_sq", "tail_estimate"], rows, {}


def cmd_gaussian_table(run: RunConfig):
    coupling = coupling_of(run)
    if run.size < 1:
        raise ConfigError(f"size: must be >= 1, got {run.size}")
    table = matrix_elements(coupling, oscillator_config(run), run.size)
    rows = [[n, k, float(table[n, k])] for n in range(run.size) for k in range(run.size)]
    return ["n", "k", "M"], rows, {"coupling": coupling.label}


class _PartialFailure(Exception):
    def __init__(self, header, rows, extra):
        super().__init__("some rows failed")
        self.payload = (header, rows, extra)


HANDLERS = {
    "correlator": cmd_correlator,
    "inequalities": cmd_inequalities,
    "optimize": cmd_optimize,
    "dwell": cmd_dwell,
    "gaussian-table": cmd_gaussian_table,
}


def emit(run: RunConfig, header, rows, extra) -> None:
    fh = sys.stdout if run.output == "-" else open(run.output, "w", newline="")
    try:
        if run.format == "csv":
            write_csv(fh, header, rows)
        else:
            dump_json({"command": run.command, "config": dataclasses.asdict(run),
                       "dwell_method": run.dwell_method, "columns": header,
                       "rows": [list(r) for r in rows], **extra}, fh)
    finally:
        if fh is not sys.stdout:
            fh.close()


def execute(run: RunConfig) -> int:
    try:
        run.validate()
        with warnings.catch_warnings():
            warnings.simplefilter("always")
            header, rows, extra = HANDLERS[run.command](run)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except _PartialFailure as exc:
        emit(run, *exc.payload)
        return EXIT_NUMERIC
    except (TruncationError, SeriesError, ZeroNormError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (MlgError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    emit(run, header, rows, extra)
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _optional_int(text: str):
    return None if text.lower() == "none" else int(text)


def build_parser() -> argparse.ArgumentParser:
    S = argparse.SUPPRESS
    common = argparse.ArgumentParser(add_help=False, argument_default=S)
    common.add_argument("--config", help="key=value file; flags override it")
    common.add_argument("--coupling", help="delta or gaussian:<sigma>")
    common.add_argument("--omega", type=float)
    common.add_argument("--state", help="fock:n | coherent:x0,p0 | pstate:n")
    common.add_argument("--convention", choices=["quadrature", "canonical"])
    common.add_argument("--grid-start", type=float, help="first omega*tau")
    common.add_argument("--grid-stop", type=float, help="last omega*tau")
    common.add_argument("--grid-points", type=int)
    common.add_argument("--omega-tau", type=_floats, help="explicit omega*tau list")
    common.add_argument("--t1", type=float, help="window start")
    common.add_argument("--family", choices=FAMILIES)
    common.add_argument("--sigmas", type=_floats, help="Gaussian widths to sweep")
    common.add_argument("--max-level", type=int)
    common.add_argument("--tail-tol", type=float)
    common.add_argument("--k-max", type=_optional_int)
    common.add_argument("--k-cap", type=int)
    common.add_argument("--dwell-method", choices=[m.value for m in DwellMethod])
    common.add_argument("--oscillatory", action="store_true")
    common.add_argument("--standard", action="store_true", help="add the mapped C12 column")
    common.add_argument("--x0-range", type=_floats)
    common.add_argument("--p0-range", type=_floats)
    common.add_argument("--search-grid", type=int)
    common.add_argument("--refine-tol", type=float)
    common.add_argument("--size", type=int, help="table size for gaussian-table")
    common.add_argument("-o", "--output", help="output path, '-' for stdout")
    common.add_argument("--format", choices=["csv", "json"])

    parser = argparse.ArgumentParser(prog="mlgosc", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def config_from_args(argv) -> RunConfig:
    args = vars(build_parser().parse_args(argv))
    values = {}
    path = args.pop("config", None)
    if path is not None:
        try:
            with open(path) as fh:
                values.update(parse_pairs(fh.read()))
        except OSError as exc:
            raise ConfigError(f"config: {exc}") from exc
    values.update(args)
    try:
        return RunConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def main(argv=None) -> int:
    try:
        run = config_from_args(argv)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return execute(run)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
