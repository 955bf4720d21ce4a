"""Command-line harness: dynamics, sensitivity, params and verify subcommands.

Settings are layered: preset file, then ``--config`` file, then explicit flags.
Exit codes: 0 success, 1 verification failure, 2 tolerance breach, 64 config error.
"""

from __future__ import annotations

import argparse
import configparser
import io
import json
import sys
import warnings
from dataclasses import asdict, dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__, analytic, dynamics, physparams, verification
from .model import ModelParams

EXIT_OK = 0
EXIT_VERIFY = 1
EXIT_TOLERANCE = 2
EXIT_CONFIG = 64

CSV_VERSION = "fourwell-csv v1"
SCENARIOS = ("dynamics", "sensitivity", "params", "verify")
PRESETS = ("fig2-top", "fig2-mid", "fig2-bottom", "fig3", "dy164")
DEFAULT_N = {"dynamics": 16, "sensitivity": 16, "params": 16, "verify": 8}


class ConfigError(ValueError):
    pass


def fmt(x: float) -> str:
    return f"{float(x):.12g}"


@dataclass(frozen=True)
class GridSpec:
    start: float
    stop: float
    steps: int

    @classmethod
    def parse(cls, text: str) -> "GridSpec":
        parts = text.split(":")
        if len(parts) != 3:
            raise ConfigError(f"grid must be start:stop:steps, got {text!r}")
        try:
            return cls(float(parts[0]), float(parts[1]), int(parts[2])).checked()
        except ValueError as exc:
            raise ConfigError(f"bad grid {text!r}: {exc}") from None

    def checked(self) -> "GridSpec":
        if self.steps < 1:
            raise ConfigError("grid needs at least one step")
        if self.steps > 1 and not self.stop > self.start:
            raise ConfigError("grid must be strictly increasing (stop > start)")
        return self

    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.steps)


@dataclass(frozen=True)
class RunConfig:
    scenario: str
    u: float = 6.01
    j: float = 8.16
    n: int | None = None
    zeta: float | None = None
    zeta_fraction: float | None = None
    grid: GridSpec | None = None
    units: str = "tau"
    out: Path | None = None
    preset: str | None = None
    numeric: bool = True
    n_sweep: tuple[int, ...] = ()
    n_sweep_method: str = "analytic"
    species: str = "dy164"
    model_hopping: float | None = physparams.DY164_TABLE_HOPPING
    table_format: str = "csv"
    mutate_current: bool = False

    @property
    def total_n(self) -> int:
        return DEFAULT_N[self.scenario] if self.n is None else self.n

    def params(self) -> ModelParams:
        base = ModelParams(u=self.u, j=self.j, zeta=0.0, total_n=self.total_n)
        if self.zeta_fraction is not None:
            return base.with_zeta(self.zeta_fraction * analytic.resonant_constants(base).zeta_max)
        return base.with_zeta(self.zeta or 0.0)

    def validate(self) -> "RunConfig":
        if self.scenario not in SCENARIOS:
            raise ConfigError(f"unknown scenario {self.scenario!r}")
        if self.zeta is not None and self.zeta_fraction is not None:
            raise ConfigError("give either zeta or zeta_fraction, not both")
        if self.units not in ("s", "tau"):
            raise ConfigError(f"units must be 's' or 'tau', got {self.units!r}")
        if self.total_n < 2:
            raise ConfigError("N must be at least 2")
        if self.total_n > 24:
            raise ConfigError("N above 24 is outside the supported desk scale")
        if self.u <= 0 or self.j <= 0:
            raise ConfigError("u and j must be positive")
        if self.scenario == "params":
            if self.species != "dy164":
                raise ConfigError(f"unknown species {self.species!r}")
            return self
        zmax = analytic.resonant_constants(self.params()).zeta_max
        zeta = self.params().zeta
        if not 0.0 <= zeta <= zmax * (1 + 1e-12):
            raise ConfigError(f"zeta={zeta:.6g} Hz outside the operating interval [0, {zmax:.6g}]")
        if self.scenario == "sensitivity" and self.grid is not None:
            if self.grid.start < 0 or self.grid.stop > 1 + 1e-12:
                raise ConfigError("sensitivity grid is zeta/zeta_max and must lie in [0, 1]")
        if self.n_sweep_method not in ("analytic", "numeric"):
            raise ConfigError(f"unknown n_sweep_method {self.n_sweep_method!r}")
        if any(n < 2 or n > 24 for n in self.n_sweep):
            raise ConfigError("n_sweep values must lie in 2..24")
        return self


# --- config ingestion --------------------------------------------------------


def _preset_text(name: str) -> str:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")
    return resources.files("fourwell").joinpath("presets", f"{name}.ini").read_text()


def _read_ini(text: str, source: str) -> dict:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: {exc}") from None
    out: dict = {}
    try:
        if parser.has_section("run"):
            if parser.has_option("run", "scenario"):
                out["scenario"] = parser.get("run", "scenario")
        if parser.has_section("model"):
            m = parser["model"]
            for key in ("u", "j", "zeta", "zeta_fraction"):
                if key in m:
                    out[key] = m.getfloat(key)
            if "n" in m:
                out["n"] = m.getint("n")
        if parser.has_section("grid"):
            g = parser["grid"]
            out["grid"] = GridSpec(g.getfloat("start"), g.getfloat("stop"), g.getint("steps")).checked()
            if "units" in g:
                out["units"] = g["units"]
        if parser.has_section("sensitivity"):
            s = parser["sensitivity"]
            if "numeric" in s:
                out["numeric"] = s.getboolean("numeric")
            if "n_sweep" in s:
                out["n_sweep"] = tuple(int(x) for x in s["n_sweep"].split(",") if x.strip())
            if "n_sweep_method" in s:
                out["n_sweep_method"] = s["n_sweep_method"]
        if parser.has_section("params"):
            p = parser["params"]
            if "species" in p:
                out["species"] = p["species"]
            if "model_hopping" in p:
                out["model_hopping"] = p.getfloat("model_hopping")
            if "n" in p:
                out["n"] = p.getint("n")
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"{source}: {exc}") from None
    known = {"run", "model", "grid", "sensitivity", "params"}
    extra = set(parser.sections()) - known
    if extra:
        raise ConfigError(f"{source}: unknown sections {sorted(extra)}")
    return out


def _parse_zeta(text: str) -> dict:
    try:
        if text.startswith("frac:"):
            return {"zeta_fraction": float(text[5:]), "zeta": None}
        return {"zeta": float(text), "zeta_fraction": None}
    except ValueError:
        raise ConfigError(f"bad --zeta {text!r}; use a value in Hz or frac:<x>") from None


def build_config(args: argparse.Namespace) -> RunConfig:
    settings: dict = {}
    if args.preset:
        settings.update(_read_ini(_preset_text(args.preset), f"preset {args.preset}"))
        settings["preset"] = args.preset
    if args.config:
        path = Path(args.config)
        if not path.is_file():
            raise ConfigError(f"config file {path} not found")
        layer = _read_ini(path.read_text(), str(path))
        if "zeta" in layer or "zeta_fraction" in layer:
            settings.pop("zeta", None)
            settings.pop("zeta_fraction", None)
        settings.update(layer)
    declared = settings.pop("scenario", args.command)
    if declared != args.command:
        raise ConfigError(f"configuration is for {declared!r}, not {args.command!r}")
    if args.n is not None:
        settings["n"] = args.n
    if args.zeta is not None:
        settings.update(_parse_zeta(args.zeta))
    if args.grid is not None:
        settings["grid"] = GridSpec.parse(args.grid)
    if args.units is not None:
        settings["units"] = args.units
    if args.out is not None:
        settings["out"] = Path(args.out)
    if getattr(args, "format", None):
        settings["table_format"] = args.format
    if getattr(args, "n_sweep", None):
        settings["n_sweep"] = tuple(int(x) for x in args.n_sweep.split(","))
    settings["mutate_current"] = bool(getattr(args, "inject_current_flip", False))
    try:
        return RunConfig(scenario=args.command, **settings).validate()
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


# --- output helpers ----------------------------------------------------------


def _csv(kind: str, header: list[str], rows, footer: list[str] = ()) -> str:
    buf = io.StringIO()
    buf.write(f"# {CSV_VERSION} {kind} fourwell {__version__}\n")
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(fmt(x) for x in row) + "\n")
    for line in footer:
        buf.write(f"# {line}\n")
    return buf.getvalue()


def _emit(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text)


# --- commands ----------------------------------------------------------------

DYNAMICS_HEADER = [
    "t",
    "n1_frac",
    "n2_frac",
    "n3_frac",
    "n4_frac",
    "n1_analytic",
    "n2_analytic",
    "n3_analytic",
    "entropy",
    "q2",
    "q3",
    "current",
]


def cmd_dynamics(cfg: RunConfig) -> int:
    p = cfg.params()
    consts = analytic.resonant_constants(p)
    grid = cfg.grid or GridSpec(0.0, 2.0, 201)
    axis = grid.values()
    times = axis * consts.tau if cfg.units == "tau" else axis
    table = dynamics.trajectory(p, times)
    fracs = table.fractions()
    ana = analytic.populations_analytic(p, times) / p.total_n
    rows = np.column_stack([axis, fracs, ana, table.entropy, table.q2, table.q3, table.current])
    _emit(_csv(f"dynamics units={cfg.units}", DYNAMICS_HEADER, rows), cfg.out)
    if cfg.out is not None:
        meta = {
            "format": CSV_VERSION,
            "u": p.u,
            "j": p.j,
            "zeta": p.zeta,
            "n": p.total_n,
            "xi": consts.xi,
            "tau": consts.tau,
            "zeta_max": consts.zeta_max,
            "resonance_ratio": consts.resonance_ratio,
            "time_units": cfg.units,
            "preset": cfg.preset,
        }
        cfg.out.with_suffix(".json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return EXIT_OK


SENSITIVITY_HEADER = [
    "zeta_over_J",
    "imbalance_mean",
    "imbalance_std",
    "delta_alpha_analytic",
    "delta_alpha_numeric",
    "imbalance_mean_exact",
    "imbalance_std_exact",
]


def cmd_sensitivity(cfg: RunConfig) -> int:
    p = cfg.params()
    consts = analytic.resonant_constants(p)
    grid = cfg.grid or GridSpec(0.0, 1.0, 21)
    zetas = grid.values() * consts.zeta_max
    curve = analytic.sensitivity_curve(p, zetas)
    rows = []
    for i, z in enumerate(zetas):
        q = p.with_zeta(z)
        num = mean_x = std_x = float("nan")
        if cfg.numeric:
            mean_x, var_x = dynamics.imbalance_exact(q, consts.tau)
            std_x = float(np.sqrt(var_x))
            try:
                num = dynamics.delta_alpha_numeric(p, at_zeta=z)
            except ArithmeticError:
                num = float("inf")
        rows.append(
            [z / p.j, curve.imbalance_mean[i], curve.imbalance_std[i], curve.delta_alpha[i], num, mean_x, std_x]
        )
    footer = [f"u={fmt(p.u)} j={fmt(p.j)} n={p.total_n} tau={fmt(consts.tau)} zeta_max={fmt(consts.zeta_max)}"]
    if cfg.n_sweep:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            fit = dynamics.scaling_exponent(p.with_zeta(0.0), cfg.n_sweep, method=cfg.n_sweep_method)
        footer.append(f"n_sweep method={cfg.n_sweep_method}")
        footer += [f"n_sweep N={n} delta_alpha={fmt(v)}" for n, v in zip(fit.n_values, fit.delta_alpha)]
        footer.append(f"fitted_slope={fmt(fit.slope)}")
        footer += [f"warning {w.message}" for w in caught]
    _emit(_csv("sensitivity", SENSITIVITY_HEADER, rows, footer), cfg.out)
    return EXIT_OK


def cmd_params(cfg: RunConfig) -> int:
    table = physparams.preset_dy164(model_hopping=cfg.model_hopping, total_n=cfg.total_n)
    if cfg.table_format == "text":
        text = f"# {CSV_VERSION} params fourwell {__version__}\n" + physparams.table_text(table)
    else:
        text = f"# {CSV_VERSION} params fourwell {__version__}\n" + physparams.table_csv(table)
    _emit(text, cfg.out)
    bad = table.breaches()
    if bad:
        for r in bad:
            print(
                f"tolerance breach: {r.name} ({r.symbol}) computed {fmt(r.computed)} {r.unit}, "
                f"reference {fmt(r.reference)}, rel_dev {r.rel_dev:.3g} > {r.tolerance:g}",
                file=sys.stderr,
            )
        return EXIT_TOLERANCE
    return EXIT_OK


def cmd_verify(cfg: RunConfig) -> int:
    p = cfg.params()
    results = verification.run_all(p, mutate_current=cfg.mutate_current)
    failing = [name for r in results for name in r.failing()]
    report = {
        "format": CSV_VERSION,
        "params": asdict(p),
        "groups": {r.group: r.as_dict() for r in results},
        "failing": failing,
        "pass": not failing,
    }
    _emit(json.dumps(report, indent=2, sort_keys=True) + "\n", cfg.out)
    if failing:
        print("verification failed: " + ", ".join(failing), file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


COMMANDS = {
    "dynamics": cmd_dynamics,
    "sensitivity": cmd_sensitivity,
    "params": cmd_params,
    "verify": cmd_verify,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fourwell", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"fourwell {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    helps = {
        "dynamics": "population dynamics CSV (+ JSON sidecar with --out)",
        "sensitivity": "imbalance and delta-alpha sweep over zeta/zeta_max",
        "params": "164Dy parameter table",
        "verify": "run the invariant suites",
    }
    for name in SCENARIOS:
        sp = sub.add_parser(name, help=helps[name])
        sp.add_argument("--preset", choices=PRESETS)
        sp.add_argument("--config", help="INI file with [run]/[model]/[grid]/[sensitivity]/[params]")
        sp.add_argument("--out", help="output path (default: stdout)")
        sp.add_argument("--n", type=int, help="particle number N")
        sp.add_argument("--zeta", help="rotation coupling in Hz, or frac:<x> for x * zeta_max")
        sp.add_argument("--grid", help="start:stop:steps (time for dynamics, zeta/zeta_max for sensitivity)")
        sp.add_argument("--units", choices=("s", "tau"), help="time units of the dynamics grid")
        if name == "params":
            sp.add_argument("--format", choices=("csv", "text"))
        if name == "sensitivity":
            sp.add_argument("--n-sweep", help="comma-separated N values for the scaling fit")
        if name == "verify":
            sp.add_argument("--inject-current-flip", action="store_true", help=argparse.SUPPRESS)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = build_config(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return COMMANDS[args.command](cfg)


if __name__ == "__main__":
    sys.exit(main())
