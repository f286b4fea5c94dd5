"""Batch front door: run configured pipelines and emit data series.

A run takes one experiment (mode configuration, engine selection, time grid,
weight model) and writes flat files: one CSV per engine with header
``tau,pe[,channel_<s>...]``, a JSON comparison report per analytic engine
when the oracle also ran, and an echo of the configuration that reloads to
an equal experiment.  Formatting is fixed so identical configurations give
byte-identical outputs.

Exit codes: 0 success, 2 configuration/validation error, 3 oracle validity
failure (leakage gate; partial outputs are kept).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .cascade import ModeConfig, run_cascade
from .closed_forms import WeakFieldConfig, two_mode_u0, weak_field_uge
from .field_state import gamma_weights, weighted_pe
from .oracle import build_hamiltonian, compare, evolve
from .propagator import PeSeries, excitation_probability, undress

__all__ = [
    "ConfigError",
    "Experiment",
    "PRESETS",
    "preset_experiments",
    "load_experiment",
    "experiment_to_dict",
    "run",
    "report",
    "main",
]

ENGINES = ("cascade", "two_mode", "weak_field", "oracle", "all")


class ConfigError(ValueError):
    """Invalid or inconsistent experiment description."""


@dataclass(frozen=True)
class Experiment:
    """One batch unit: a configuration plus how to run and emit it."""

    name: str
    config: ModeConfig
    engine: str = "all"
    tau: tuple[float, float, int] = (0.0, 4.0 * math.pi, 1000)
    weights: tuple[complex, ...] | None = None  # None = flat; else gaussian alphas
    weight_window: int = 60
    window: int = 200  # oracle lattice halfwidth
    channels: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.engine not in ENGINES:
            raise ConfigError(f"unknown engine {self.engine!r}")
        start, stop, count = self.tau
        if count < 2:
            raise ConfigError("tau grid needs at least 2 points")
        if not stop > start:
            raise ConfigError("tau stop must exceed start")
        for eng in self.engines():
            _check_engine(eng, self.config)
        if self.weights is not None and self.engine == "weak_field":
            raise ConfigError("gaussian weights are not defined for the weak_field engine")

    def engines(self) -> tuple[str, ...]:
        if self.engine != "all":
            return (self.engine,)
        out = ["cascade"]
        if self.config.n_modes == 2:
            out.append("two_mode")
        if _uniform_spacing(self.config) is not None and self.weights is None:
            out.append("weak_field")
        out.append("oracle")
        return tuple(out)

    def taugrid(self) -> np.ndarray:
        start, stop, count = self.tau
        return np.linspace(start, stop, count)


def _uniform_spacing(cfg: ModeConfig) -> int | None:
    if cfg.n_modes == 1:
        return 1
    gaps = {b - a for a, b in zip(cfg.m, cfg.m[1:])}
    return gaps.pop() if len(gaps) == 1 else None


def _check_engine(engine: str, cfg: ModeConfig) -> None:
    if engine == "two_mode" and cfg.n_modes != 2:
        raise ConfigError("two_mode engine requires exactly 2 modes")
    if engine == "weak_field" and _uniform_spacing(cfg) is None:
        raise ConfigError("weak_field engine requires a uniformly spaced comb")


# -- presets -------------------------------------------------------------------


def preset_experiments(name: str) -> tuple[Experiment, ...]:
    """Shipped figure-reproduction presets.

    ``fig1``: two modes at offsets 0 and 2, both at coupling 1/2, detuning 1,
    with the three transition channels resolved.  ``fig3a``: three adjacent
    modes at coupling 1/7 for three detunings.  ``fig3bcd``: ten-mode combs
    at couplings 1/7, 1/11, 1/15, each followed over one full cycle of its
    resonant oscillation (the grid stop is 2*pi over the coupling).
    """
    if name == "fig1":
        return (
            Experiment(
                name="fig1",
                config=ModeConfig(j=1, m=(0, 2), omega=(0.5, 0.5), delta0=1.0),
                engine="all",
                tau=(0.0, 4.0 * math.pi, 1000),
                channels=(1, 3, -1),
            ),
        )
    if name == "fig3a":
        out = []
        for tag, d0 in (("d2", 2.0), ("d13_7", 13.0 / 7.0), ("d6_7", 6.0 / 7.0)):
            out.append(
                Experiment(
                    name=f"fig3a_{tag}",
                    config=ModeConfig(
                        j=1, m=(0, 1, 2), omega=(1 / 7, 1 / 7, 1 / 7), delta0=d0
                    ),
                    engine="all",
                    tau=(0.0, 4.0 * math.pi, 1000),
                )
            )
        return tuple(out)
    if name == "fig3bcd":
        out = []
        for tag, om in (("fig3b", 1 / 7), ("fig3c", 1 / 11), ("fig3d", 1 / 15)):
            out.append(
                Experiment(
                    name=tag,
                    config=ModeConfig(
                        j=1, m=tuple(range(10)), omega=(om,) * 10, delta0=9.0
                    ),
                    engine="all",
                    tau=(0.0, 2.0 * math.pi / om, 1000),
                )
            )
        return tuple(out)
    raise ConfigError(f"unknown preset {name!r}")


PRESETS = ("fig1", "fig3a", "fig3bcd")


# -- config (de)serialization ---------------------------------------------------


def _complex_pair(x) -> complex:
    if isinstance(x, (list, tuple)) and len(x) == 2:
        return complex(float(x[0]), float(x[1]))
    if isinstance(x, (int, float)):
        return complex(x)
    raise ConfigError(f"expected [re, im] pair, got {x!r}")


def load_experiment(doc: dict) -> Experiment:
    """Build an Experiment from its JSON document form."""
    try:
        cfg = doc["config"]
        mode = ModeConfig(
            j=int(cfg["j"]),
            m=tuple(int(x) for x in cfg["m"]),
            omega=tuple(_complex_pair(x) for x in cfg["omega"]),
            delta0=float(cfg["delta0"]),
        )
        tau = doc.get("tau", {})
        weights = doc.get("weights", {"kind": "flat"})
        if weights.get("kind", "flat") == "flat":
            alphas = None
            wwin = 60
        elif weights["kind"] == "gaussian":
            alphas = tuple(_complex_pair(x) for x in weights["alpha"])
            wwin = int(weights.get("window", 60))
        else:
            raise ConfigError(f"unknown weights kind {weights.get('kind')!r}")
        channels = doc.get("channels")
        return Experiment(
            name=str(doc.get("name", "run")),
            config=mode,
            engine=str(doc.get("engine", "all")),
            tau=(
                float(tau.get("start", 0.0)),
                float(tau.get("stop", 4.0 * math.pi)),
                int(tau.get("count", 1000)),
            ),
            weights=alphas,
            weight_window=wwin,
            window=int(doc.get("window", 200)),
            channels=tuple(int(s) for s in channels) if channels else None,
        )
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"bad experiment document: {exc}") from exc


def experiment_to_dict(exp: Experiment) -> dict:
    doc = {
        "name": exp.name,
        "config": {
            "j": exp.config.j,
            "m": list(exp.config.m),
            "omega": [[x.real, x.imag] for x in exp.config.omega],
            "delta0": exp.config.delta0,
        },
        "engine": exp.engine,
        "tau": {"start": exp.tau[0], "stop": exp.tau[1], "count": exp.tau[2]},
        "window": exp.window,
    }
    if exp.weights is None:
        doc["weights"] = {"kind": "flat"}
    else:
        doc["weights"] = {
            "kind": "gaussian",
            "alpha": [[a.real, a.imag] for a in exp.weights],
            "window": exp.weight_window,
        }
    if exp.channels is not None:
        doc["channels"] = list(exp.channels)
    return doc


# -- series IO ------------------------------------------------------------------


def _fmt(x: float) -> str:
    return repr(float(x))


def write_series_csv(path: Path, series: PeSeries, channel_order=None) -> None:
    cols = []
    if series.channels:
        cols = list(channel_order) if channel_order else sorted(series.channels)
    with open(path, "w") as fh:
        header = "tau,pe" + "".join(f",channel_{s}" for s in cols)
        fh.write(header + "\n")
        for i, t in enumerate(series.tau):
            row = [_fmt(t), _fmt(series.values[i])]
            row += [_fmt(series.channels[s][i]) for s in cols]
            fh.write(",".join(row) + "\n")


def read_series_csv(path: Path) -> PeSeries:
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        if header[:2] != ["tau", "pe"]:
            raise ConfigError(f"{path}: not a series file")
        chan_names = [int(h.removeprefix("channel_")) for h in header[2:]]
        data = np.array(
            [[float(x) for x in line.split(",")] for line in fh if line.strip()]
        )
    channels = (
        {s: data[:, 2 + i] for i, s in enumerate(chan_names)} if chan_names else None
    )
    return PeSeries(tau=data[:, 0], values=data[:, 1], channels=channels)


# -- pipelines --------------------------------------------------------------------


@dataclass
class RunResult:
    """What one experiment produced and whether the oracle run was valid."""

    files: list[Path] = field(default_factory=list)
    oracle_valid: bool = True


def _analytic_series(exp: Experiment, engine: str, taus: np.ndarray) -> PeSeries:
    cfg = exp.config
    if engine == "weak_field":
        amp = weak_field_uge(WeakFieldConfig.from_mode_config(cfg), taus)
        return PeSeries(tau=taus, values=np.abs(amp) ** 2)
    u0 = two_mode_u0(cfg) if engine == "two_mode" else undress(run_cascade(cfg))
    full = excitation_probability(u0, taus, channels=exp.channels)
    if exp.weights is not None:
        weighted = weighted_pe(u0, gamma_weights(exp.weights, exp.weight_window), taus)
        return PeSeries(tau=taus, values=weighted.values, channels=full.channels)
    return full


def run(exp: Experiment, outdir: Path) -> RunResult:
    """Execute one experiment and write its artifacts under ``outdir``."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    taus = exp.taugrid()
    result = RunResult()

    echo = outdir / f"{exp.name}_config.json"
    echo.write_text(json.dumps(experiment_to_dict(exp), indent=2, sort_keys=True) + "\n")
    result.files.append(echo)

    produced: dict[str, PeSeries] = {}
    for engine in exp.engines():
        if engine == "oracle":
            h, basis = build_hamiltonian(exp.config, exp.window)
            orun = evolve(h, basis, taus, channels=exp.channels)
            if exp.weights is not None:
                weighted = weighted_pe(
                    orun, gamma_weights(exp.weights, exp.weight_window), taus
                )
                series = PeSeries(
                    tau=taus, values=weighted.values, channels=orun.pe.channels
                )
            else:
                series = orun.pe
            result.oracle_valid = orun.valid
            produced[engine] = series
        else:
            produced[engine] = _analytic_series(exp, engine, taus)
        path = outdir / f"{exp.name}_{engine}.csv"
        write_series_csv(path, produced[engine], channel_order=exp.channels)
        result.files.append(path)

    if "oracle" in produced:
        for engine, series in produced.items():
            if engine == "oracle":
                continue
            rep = compare(series, produced["oracle"])
            path = outdir / f"{exp.name}_compare_{engine}.json"
            path.write_text(json.dumps(rep.as_dict(), indent=2, sort_keys=True) + "\n")
            result.files.append(path)
    return result


def report(analytic_path, oracle_path, out_path=None) -> dict:
    """Compare two emitted series files; optionally write the report as JSON."""
    a = read_series_csv(Path(analytic_path))
    b = read_series_csv(Path(oracle_path))
    rep = compare(a, b).as_dict()
    if out_path is not None:
        Path(out_path).write_text(json.dumps(rep, indent=2, sort_keys=True) + "\n")
    return rep


# -- entry point -------------------------------------------------------------------


def _parse_tau(spec: str) -> tuple[float, float, int]:
    try:
        start, stop, count = spec.split(":")
        return (float(start), float(stop), int(count))
    except ValueError as exc:
        raise ConfigError(f"bad tau spec {spec!r}, expected start:stop:count") from exc


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="polyrabi",
        description="Run comb-driven spin-half pipelines and emit data series.",
    )
    parser.add_argument("--preset", choices=PRESETS, help="run a shipped preset batch")
    parser.add_argument("--config", type=Path, help="experiment JSON document")
    parser.add_argument("--engine", choices=ENGINES, help="override the engine selection")
    parser.add_argument("--tau", help="grid override start:stop:count")
    parser.add_argument("--out", type=Path, default=Path("."), help="output directory")
    parser.add_argument("--window", type=int, help="oracle lattice halfwidth override")
    parser.add_argument("--seed", type=int, default=0,
                        help="seed for randomized sweeps (reserved; presets are deterministic)")
    args = parser.parse_args(argv)

    try:
        if (args.preset is None) == (args.config is None):
            raise ConfigError("give exactly one of --preset or --config")
        if args.preset:
            experiments = preset_experiments(args.preset)
        else:
            doc = json.loads(Path(args.config).read_text())
            experiments = (load_experiment(doc),)
        patched = []
        for exp in experiments:
            kw = {}
            if args.engine:
                kw["engine"] = args.engine
            if args.tau:
                kw["tau"] = _parse_tau(args.tau)
            if args.window:
                kw["window"] = args.window
            if kw:
                exp = replace(exp, **kw)
            patched.append(exp)
    except (ConfigError, ValueError, OSError, json.JSONDecodeError) as exc:
        print(json.dumps({"error": str(exc), "kind": "validation"}), file=sys.stderr)
        return 2

    all_valid = True
    for exp in patched:
        try:
            result = run(exp, args.out)
        except (ConfigError, ValueError) as exc:
            print(json.dumps({"error": str(exc), "kind": "validation"}), file=sys.stderr)
            return 2
        if not result.oracle_valid:
            print(
                json.dumps(
                    {
                        "error": f"{exp.name}: oracle leakage gate failed; "
                        "outputs retained but flagged",
                        "kind": "oracle-validity",
                    }
                ),
                file=sys.stderr,
            )
            all_valid = False
    return 0 if all_valid else 3


if __name__ == "__main__":
    sys.exit(main())
