"""Command-line entry points.

    passive-bb84 keyrate --config run.json [--mode M] [--baseline B] [--out PATH] [--pulses N]
    passive-bb84 mc-validate --config run.json [--out PATH] [--pulses N]

Exit codes: 0 success, 1 I/O failure, 2 invalid configuration,
3 a statistical check failed (mc-validate only).

Config document (every section optional)::

    {
      "protocol": {"N": 1e10, "p_Z": 0.9, ..., "delta_mis": 0.03},
      "security": {"eps": 6.944e-23, "eps_c": 5e-11, "xi": 71},
      "sweep": {"eta_min": 1e-5, "eta_max": 1.0, "points": 20, "log_spacing": true},
      "optimization": {"pz_range": [0.55, 0.99], "mu_s_range": [0.06, 1.0],
                       "grid_resolution": 21, "refine_iterations": 6},
      "mode": "finite", "baseline": "passive", "optimize_each": true,
      "output_path": "curve.csv",
      "montecarlo": {"seed": 1, "trials": 200, "pulses": 100000, "eta": 0.3,
                     "validate_bounds": true, "validate_channel": true,
                     "channel_pulses": 1000000, "channel_etas": [0.3]}
    }
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile
from dataclasses import dataclass, field

import numpy as np

from .keyrate import BASELINES, MODES, SecurityParams
from .montecarlo import validate_bounds, validate_channel_model
from .optimize import OptimizationSpec, sweep
from .protocol import ChannelParams, InvalidParamsError, ProtocolParams, validate_params

CSV_HEADER = ["eta", "rate", "key_length", "n_z1_lower", "n_ph1_upper", "e_bit",
              "p_z", "mu_s", "mode", "baseline"]

EXIT_OK, EXIT_IO, EXIT_CONFIG, EXIT_STAT = 0, 1, 2, 3


class ConfigError(Exception):
    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


@dataclass
class SweepConfig:
    eta_min: float = 1e-5
    eta_max: float = 1.0
    points: int = 20
    log_spacing: bool = True

    def grid(self):
        if self.points == 1:
            return [self.eta_max]
        if self.log_spacing:
            return list(np.logspace(np.log10(self.eta_min), np.log10(self.eta_max), self.points))
        return list(np.linspace(self.eta_min, self.eta_max, self.points))


@dataclass
class MonteCarloConfig:
    seed: int = 1
    trials: int = 200
    pulses: int = 100_000
    eta: float = 0.3
    validate_bounds: bool = True
    validate_channel: bool = True
    channel_pulses: int = 1_000_000
    channel_etas: list = field(default_factory=lambda: [0.3])


@dataclass
class RunConfig:
    protocol: ProtocolParams = field(default_factory=ProtocolParams)
    security: SecurityParams = field(default_factory=SecurityParams)
    sweep: SweepConfig = field(default_factory=SweepConfig)
    optimization: OptimizationSpec = field(default_factory=OptimizationSpec)
    mode: str = "finite"
    baseline: str = "passive"
    optimize_each: bool = True
    output_path: str | None = None
    montecarlo: MonteCarloConfig = field(default_factory=MonteCarloConfig)


def _section(cls, data, name):
    if data is None:
        return cls()
    if not isinstance(data, dict):
        raise ConfigError([f"{name} must be an object"])
    try:
        return cls(**data)
    except TypeError as exc:
        raise ConfigError([f"{name}: {exc}"]) from None


def parse_config(doc):
    """Build a RunConfig from a decoded JSON document; raises ConfigError."""
    if not isinstance(doc, dict):
        raise ConfigError(["config root must be a JSON object"])
    known = {"protocol", "security", "sweep", "optimization", "mode", "baseline",
             "optimize_each", "output_path", "montecarlo"}
    unknown = sorted(set(doc) - known)
    if unknown:
        raise ConfigError([f"unknown config key {k!r}" for k in unknown])
    try:
        protocol = ProtocolParams.from_dict(doc.get("protocol") or {})
    except InvalidParamsError as exc:
        raise ConfigError(exc.violations) from None
    except TypeError as exc:
        raise ConfigError([f"protocol: {exc}"]) from None
    try:
        security = _section(SecurityParams, doc.get("security"), "security")
    except ValueError as exc:
        raise ConfigError([f"security: {exc}"]) from None
    opt = dict(doc.get("optimization") or {})
    for key in ("pz_range", "mu_s_range"):
        if key in opt:
            opt[key] = tuple(opt[key])
    cfg = RunConfig(
        protocol=protocol,
        security=security,
        sweep=_section(SweepConfig, doc.get("sweep"), "sweep"),
        optimization=_section(OptimizationSpec, opt, "optimization"),
        mode=doc.get("mode", "finite"),
        baseline=doc.get("baseline", "passive"),
        optimize_each=bool(doc.get("optimize_each", True)),
        output_path=doc.get("output_path"),
        montecarlo=_section(MonteCarloConfig, doc.get("montecarlo"), "montecarlo"),
    )
    return cfg


def validate_config(cfg):
    """Every problem with a RunConfig, one message each."""
    v = list(validate_params(cfg.protocol))
    s = cfg.sweep
    if not (0 < s.eta_min <= 1 and 0 < s.eta_max <= 1):
        v.append(f"sweep: eta_min and eta_max must lie in (0,1], got {s.eta_min}, {s.eta_max}")
    if not s.eta_min <= s.eta_max:
        v.append(f"sweep: eta_min must not exceed eta_max, got {s.eta_min} > {s.eta_max}")
    if not (isinstance(s.points, int) and s.points >= 1):
        v.append(f"sweep: points must be a positive integer, got {s.points}")
    if cfg.mode not in MODES:
        v.append(f"mode must be one of {', '.join(MODES)}, got {cfg.mode!r}")
    if cfg.baseline not in BASELINES:
        v.append(f"baseline must be one of {', '.join(BASELINES)}, got {cfg.baseline!r}")
    if cfg.optimize_each:
        try:
            cfg.optimization.validate(cfg.protocol.mu_D)
        except ValueError as exc:
            v.append(f"optimization: {exc}")
    return v


def load_config(path):
    """Read and validate a config file.

    Raises:
        OSError: unreadable file.
        ConfigError: malformed JSON or invalid contents.
    """
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError([f"malformed JSON: {exc}"]) from None
    return parse_config(doc)


def atomic_write(path, text):
    """Write ``text`` to ``path`` via a temporary file and rename."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _fmt(x):
    return format(float(x), ".17g")


def render_csv(rows, mode, baseline):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for row in rows:
        res = row.result
        w.writerow([
            _fmt(row.eta),
            _fmt(row.rate),
            _fmt(res.key_length if res else float("-inf")),
            _fmt(res.n_z1_lower if res else 0.0),
            _fmt(res.n_ph1_upper if res else 0.0),
            _fmt(res.e_bit if res else float("nan")),
            _fmt(row.params.p_Z),
            _fmt(row.params.mu_S),
            mode,
            baseline,
        ])
    return buf.getvalue()


def _apply_overrides(cfg, args):
    if getattr(args, "mode", None):
        cfg.mode = args.mode
    if getattr(args, "baseline", None):
        cfg.baseline = args.baseline
    if getattr(args, "out", None):
        cfg.output_path = args.out
    return cfg


def _report_violations(violations):
    for line in violations:
        print(line, file=sys.stderr)
    return EXIT_CONFIG


def cmd_keyrate(args):
    try:
        cfg = _apply_overrides(load_config(args.config), args)
        if args.pulses is not None:
            cfg.protocol = cfg.protocol.replace(N=args.pulses)
    except OSError as exc:
        print(f"cannot read config: {exc}", file=sys.stderr)
        return EXIT_IO
    except ConfigError as exc:
        return _report_violations(exc.violations)
    violations = validate_config(cfg)
    if violations:
        return _report_violations(violations)

    rows = sweep(cfg.protocol, cfg.security, cfg.sweep.grid(), cfg.mode, cfg.baseline,
                 cfg.optimize_each, cfg.optimization)
    text = render_csv(rows, cfg.mode, cfg.baseline)
    if cfg.output_path:
        try:
            atomic_write(cfg.output_path, text)
        except OSError as exc:
            print(f"cannot write output: {exc}", file=sys.stderr)
            return EXIT_IO
    else:
        sys.stdout.write(text)
    return EXIT_OK


def run_mc_validation(cfg):
    """Run the configured Monte-Carlo checks; returns the JSON-ready report."""
    mc = cfg.montecarlo
    report = {"seed": mc.seed, "checks": {}}
    passed = True
    if mc.validate_bounds:
        params = cfg.protocol.replace(N=mc.pulses)
        rep = validate_bounds(params, ChannelParams(mc.eta), cfg.security, mc.trials, mc.seed)
        report["checks"]["bounds"] = rep.to_dict()
        passed &= rep.passed
    if mc.validate_channel:
        reps = []
        for k, eta in enumerate(mc.channel_etas):
            rep = validate_channel_model(cfg.protocol, ChannelParams(eta), mc.channel_pulses,
                                         (mc.seed, k))
            d = rep.to_dict()
            d["eta"] = eta
            reps.append(d)
            passed &= rep.passed
        report["checks"]["channel"] = reps
    report["passed"] = bool(passed)
    return report


def cmd_mc_validate(args):
    try:
        cfg = _apply_overrides(load_config(args.config), args)
    except OSError as exc:
        print(f"cannot read config: {exc}", file=sys.stderr)
        return EXIT_IO
    except ConfigError as exc:
        return _report_violations(exc.violations)
    if args.pulses is not None:
        cfg.montecarlo.pulses = args.pulses
    violations = list(validate_params(cfg.protocol))
    mc = cfg.montecarlo
    if mc.validate_channel and cfg.protocol.delta_mis != 0:
        violations.append("channel validation requires delta_mis = 0")
    for eta in [mc.eta, *mc.channel_etas]:
        if not 0 <= eta <= 1:
            violations.append(f"montecarlo: eta must lie in [0,1], got {eta}")
    if mc.trials < 1 or mc.pulses < 1 or mc.channel_pulses < 1:
        violations.append("montecarlo: trials, pulses and channel_pulses must be positive")
    if violations:
        return _report_violations(violations)

    report = run_mc_validation(cfg)
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if cfg.output_path:
        try:
            atomic_write(cfg.output_path, text)
        except OSError as exc:
            print(f"cannot write output: {exc}", file=sys.stderr)
            return EXIT_IO
    else:
        sys.stdout.write(text)
    return EXIT_OK if report["passed"] else EXIT_STAT


def build_parser():
    parser = argparse.ArgumentParser(prog="passive-bb84", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    kr = sub.add_parser("keyrate", help="key rate along a transmission grid, as CSV")
    kr.add_argument("--config", required=True)
    kr.add_argument("--mode", choices=MODES)
    kr.add_argument("--baseline", choices=BASELINES)
    kr.add_argument("--out")
    kr.add_argument("--pulses", type=float, help="override protocol.N")
    kr.set_defaults(func=cmd_keyrate)

    mc = sub.add_parser("mc-validate", help="Monte-Carlo checks of the model and bounds, as JSON")
    mc.add_argument("--config", required=True)
    mc.add_argument("--out")
    mc.add_argument("--pulses", type=int, help="override montecarlo.pulses")
    mc.set_defaults(func=cmd_mc_validate)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
