"""Command-line front end.

Every command runs the stages it depends on, writes each stage's artifacts as
soon as the stage finishes, and ends with a ``manifest.json`` that records the
resolved configuration, seeds and library versions. A failing stage leaves the
earlier artifacts in place, writes ``error.json`` and exits with status 2.
"""

from __future__ import annotations

import argparse
import hashlib
import logging
import platform
import sys
from dataclasses import asdict, dataclass, field
from importlib import metadata
from pathlib import Path
from typing import Optional

from . import io
from .errors import MalformedInput, TvEffError
from .events import EventSpec, event_study
from .series import align_panel, describe, impute_gaps
from .stability import hansen_lc
from .synth import ScenarioSpec, generate
from .tvvar import fit_tvvar, null_bands, select_weight
from .unitroot import adf_gls
from .var import fit_var, select_lag_bic

log = logging.getLogger("tveff")

BAND_REPS = 5000
EVENT_REPS = 1000

PIPELINES = {
    "impute": ("impute",),
    "unit-root": ("impute", "unit-root"),
    "fit-var": ("impute", "fit-var"),
    "fit-tvvar": ("impute", "fit-var", "fit-tvvar"),
    "efficiency": ("impute", "fit-var", "fit-tvvar", "efficiency"),
    "event-study": ("impute", "event-study"),
    "run": ("impute", "unit-root", "fit-var", "fit-tvvar", "efficiency", "event-study"),
    "simulate": ("simulate",),
}


def substream_seed(base: int, name: str) -> int:
    """Independent seed for a named consumer of randomness."""
    digest = hashlib.sha256(f"{int(base)}/{name}".encode()).digest()
    return int.from_bytes(digest[:8], "big") >> 1


@dataclass
class RunConfig:
    command: str
    input: str
    seasonal_period: int = 12
    impute_log: bool = True
    p_max: int = 8
    weight: str = "auto"
    reps: Optional[int] = None
    event_reps: Optional[int] = None
    level: float = 0.95
    seed: int = 0
    events: Optional[str] = None
    estimation_window: int = 24
    lead: int = 3
    lag: int = 3
    case: str = "constant+trend"
    input_sha256: str = field(default="", repr=False)

    def __post_init__(self):
        if self.command not in PIPELINES:
            raise ValueError(f"unknown command {self.command!r}")
        if self.command == "event-study" and self.reps is not None and self.event_reps is None:
            self.event_reps, self.reps = self.reps, None
        if self.reps is None:
            self.reps = BAND_REPS
        if self.event_reps is None:
            self.event_reps = EVENT_REPS
        if self.reps < 100 or self.event_reps < 100:
            raise ValueError("replications must be at least 100")
        if not 0.5 < self.level < 1:
            raise ValueError("level must lie in (0.5, 1)")
        if self.weight != "auto":
            self.weight = repr(float(self.weight))

    @property
    def seeds(self) -> dict:
        return {
            "band_bootstrap": substream_seed(self.seed, "band_bootstrap"),
            "event_bootstrap": substream_seed(self.seed, "event_bootstrap"),
            "simulation": substream_seed(self.seed, "simulation"),
        }


def _versions() -> dict:
    out = {"python": platform.python_version()}
    for dist in ("artifact", "numpy", "scipy", "pandas", "statsmodels"):
        try:
            out[dist] = metadata.version(dist)
        except metadata.PackageNotFoundError:
            out[dist] = None
    return out


def _sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


class Run:
    """State shared by the stages of one invocation."""

    def __init__(self, config: RunConfig, out: Path):
        self.config = config
        self.out = out
        self.stages: list[dict] = []
        self.series = None
        self.panel = None
        self.var_fit = None
        self.tv_fit = None

    def emit(self, name: str) -> Path:
        self.stages[-1]["outputs"].append(name)
        return self.out / name

    # stages -------------------------------------------------------------

    def impute(self):
        cfg = self.config
        raw = io.read_prices(cfg.input)
        self.series = [impute_gaps(s, cfg.seasonal_period, log=cfg.impute_log) for s in raw]
        io.write_prices(self.emit("imputed_prices.csv"), self.series)
        self.panel = align_panel(self.series)

    def unit_root(self):
        stats = describe(self.panel)
        report = {}
        for j, m in enumerate(self.panel.markets):
            res = adf_gls(self.panel.matrix[:, j], self.config.case)
            report[m] = {"descriptive": stats[m], **res.to_dict()}
        io.write_json(self.emit("unit_root.json"), report)

    def fit_var(self):
        p = select_lag_bic(self.panel, self.config.p_max)
        self.var_fit = fit_var(self.panel, p)
        record = self.var_fit.to_dict()
        record["p_max"] = self.config.p_max
        record["constancy"] = hansen_lc(self.var_fit).to_dict()
        io.write_json(self.emit("var_fit.json"), record)

    def _weight(self) -> tuple[float, Optional[dict]]:
        if self.config.weight == "auto":
            choice = select_weight(self.panel, self.var_fit.p)
            return choice.weight, choice.to_dict()
        return float(self.config.weight), None

    def fit_tvvar(self):
        weight, choice = self._weight()
        self.tv_fit = fit_tvvar(self.panel, self.var_fit.p, weight)
        names = self.var_fit.coef_names()
        rows = []
        for t, period in enumerate(self.tv_fit.periods):
            for i, m in enumerate(self.tv_fit.markets):
                rows.append([str(period), m, *self.tv_fit.coef[t, :, i]])
        io.write_rows(self.emit("tvvar_coefficients.csv"), ["period", "equation", *names], rows)
        io.write_json(
            self.emit("tvvar_fit.json"),
            {"p": self.tv_fit.p, "smoothness_weight": weight, "weight_selection": choice},
        )

    def efficiency(self):
        cfg = self.config
        path = null_bands(
            self.panel,
            self.tv_fit.p,
            self.tv_fit.smoothness_weight,
            replications=cfg.reps,
            level=cfg.level,
            seed=cfg.seeds["band_bootstrap"],
        )
        io.write_frame(self.emit("efficiency.csv"), path.to_frame())
        io.write_json(
            self.emit("efficiency.json"),
            {
                "replications": path.replications,
                "attempts": path.attempts,
                "level": path.level,
                "exceedance_rate": path.exceedance_rate(),
                "unstable_periods": int((~path.stable).sum()),
            },
        )

    def event_study(self):
        cfg = self.config
        if cfg.events is None:
            if cfg.command == "event-study":
                raise MalformedInput("event-study needs --events")
            self.stages.pop()
            return
        summary = {}
        for event_id, period in io.read_events(cfg.events):
            spec = EventSpec(period, cfg.estimation_window, cfg.lead, cfg.lag)
            seed = substream_seed(cfg.seeds["event_bootstrap"], event_id)
            res = event_study(self.panel, spec, replications=cfg.event_reps, level=cfg.level, seed=seed)
            io.write_frame(self.emit(f"event_study_{event_id}.csv"), res.to_frame())
            summary[event_id] = {
                "period": str(period),
                "estimation_window": cfg.estimation_window,
                "event_window": [-cfg.lead, cfg.lag],
                "n_series": len(res.labels),
                "exact_enumeration": res.exact,
                "replications": res.replications,
                "significant_at_event": res.significant_at_event,
            }
        io.write_json(self.emit("event_study.json"), summary)

    def simulate(self):
        spec_dict = io.read_json(self.config.input)
        spec_dict["seed"] = self.config.seeds["simulation"]
        spec = ScenarioSpec.from_dict(spec_dict)
        series, zeta = generate(spec)
        io.write_prices(self.emit("prices.csv"), series)
        periods = [str(spec.start_period + t) for t in range(1, spec.T + 1)]
        io.write_rows(self.emit("true_zeta.csv"), ["period", "zeta"], zip(periods, zeta))
        if spec.planted_events:
            io.write_events(
                self.emit("events.csv"),
                [(f"e{i + 1}", spec.event_period(t)) for i, (t, _) in enumerate(spec.planted_events)],
            )
        io.write_json(self.emit("scenario.json"), spec.to_dict())

    # driver -------------------------------------------------------------

    def execute(self) -> int:
        stage: Optional[str] = None
        (self.out / "error.json").unlink(missing_ok=True)
        try:
            for stage in PIPELINES[self.config.command]:
                log.info("stage %s", stage)
                self.stages.append({"name": stage, "outputs": []})
                getattr(self, stage.replace("-", "_"))()
            status = 0
            error = None
        except TvEffError as exc:
            status, error = 2, {"error": exc.code, "message": str(exc), "stage": stage}
        except (ValueError, OSError) as exc:
            status, error = 2, {"error": type(exc).__name__, "message": str(exc), "stage": stage}
        if error is not None:
            self.stages.pop()
            io.write_json(self.out / "error.json", error)
            print(io.dumps(error).strip())
        io.write_json(self.out / "manifest.json", self.manifest(error))
        return status

    def manifest(self, error) -> dict:
        cfg = asdict(self.config)
        return {
            "tool": "tveff",
            "config": cfg,
            "seeds": self.config.seeds,
            "versions": _versions(),
            "stages": self.stages,
            "status": "ok" if error is None else "error",
            "error": error,
        }


def _common(parser: argparse.ArgumentParser, needs_input: bool = True) -> None:
    parser.add_argument("--input", required=needs_input, help="price CSV (scenario JSON for simulate)")
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--seed", type=int, default=0, help="base seed for all random streams")
    parser.add_argument("-v", "--verbose", action="store_true")


def _analysis(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seasonal-period", type=int, default=12)
    parser.add_argument("--impute-levels", action="store_true", help="impute on price levels, not logs")
    parser.add_argument("--p-max", type=int, default=8)
    parser.add_argument("--weight", default="auto", help="smoothness weight or 'auto'")
    parser.add_argument("--reps", type=int, default=None, help="bootstrap replications")
    parser.add_argument("--event-reps", type=int, default=None)
    parser.add_argument("--level", type=float, default=0.95)
    parser.add_argument("--events", default=None, help="event list CSV (event_id,period)")
    parser.add_argument("--estimation-window", type=int, default=24)
    parser.add_argument("--lead", type=int, default=3)
    parser.add_argument("--lag", type=int, default=3)
    parser.add_argument("--case", default="constant+trend", choices=["constant", "constant+trend"])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tveff", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in PIPELINES:
        p = sub.add_parser(name)
        _common(p)
        if name != "simulate":
            _analysis(p)
    replay = sub.add_parser("replay", help="re-run the configuration stored in a manifest")
    replay.add_argument("--manifest", required=True)
    replay.add_argument("--out", required=True)
    replay.add_argument("-v", "--verbose", action="store_true")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    if args.command == "replay":
        stored = dict(io.read_json(args.manifest)["config"])
        digest = stored.pop("input_sha256", "")
        cfg = RunConfig(**stored)
        if digest and _sha256(cfg.input) != digest:
            raise MalformedInput(f"{cfg.input} changed since the manifest was written")
        cfg.input_sha256 = digest
        return cfg
    extra = {}
    if args.command != "simulate":
        extra = dict(
            seasonal_period=args.seasonal_period,
            impute_log=not args.impute_levels,
            p_max=args.p_max,
            weight=args.weight,
            reps=args.reps,
            event_reps=args.event_reps,
            level=args.level,
            events=str(Path(args.events).resolve()) if args.events else None,
            estimation_window=args.estimation_window,
            lead=args.lead,
            lag=args.lag,
            case=args.case,
        )
    cfg = RunConfig(command=args.command, input=str(Path(args.input).resolve()), seed=args.seed, **extra)
    cfg.input_sha256 = _sha256(cfg.input)
    return cfg


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    try:
        cfg = config_from_args(args)
    except TvEffError as exc:
        error = {"error": exc.code, "message": str(exc), "stage": None}
    except (ValueError, OSError, KeyError, TypeError) as exc:
        error = {"error": type(exc).__name__, "message": str(exc), "stage": None}
    else:
        return Run(cfg, out).execute()
    io.write_json(out / "error.json", error)
    print(io.dumps(error).strip())
    return 2


if __name__ == "__main__":
    sys.exit(main())
