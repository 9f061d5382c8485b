"""
Module: cli.py

Command-line front end. A run is described by a flat JSON object (read from
--config) whose keys can be overridden by flags of the same name:

    dewet simulate --config run.json --out out/ --stride 10
    dewet cauchy --scheme bdf3 --path-c 0.01 --path-alpha 0.6667 \\
        --tau0 0.0025 --times 0.25,0.5 --theta-deg 150

Commands:
    simulate     evolve to time T, write diagnostics.csv and curve snapshots
    equilibrium  evolve until the energy stops decreasing
    cauchy       Cauchy-type temporal convergence study
    wulff        convergence of equilibria to the Wulff shape
    angles       convergence of the equilibrium contact angle in h

The log level is read from the DEWET_PFEM_LOG environment variable.
"""
import argparse
import json
import logging
import math
import os
import sys
from dataclasses import dataclass
from typing import Optional, Tuple

from . import scheme_type
from .curve import ShapeSpec, from_shape, write_curve_csv
from .exceptions import ConfigError, Error, ParameterError, TrajectoryError
from .harness import (
    DEFAULT_EPSILON,
    DEFAULT_MAX_STEPS,
    DEFAULT_N_REF,
    StudySpec,
    angle_convergence_study,
    cauchy_study,
    evolve,
    evolve_to_equilibrium,
    wulff_study,
)
from .metrics import write_reports_csv
from .schemes import DEFAULT_ETA, SchemeParams


logger = logging.getLogger(__name__)

LOG_ENV = 'DEWET_PFEM_LOG'
FAILED_MARKER = 'FAILED'

SIMULATE = 'simulate'
EQUILIBRIUM = 'equilibrium'
CAUCHY = 'cauchy'
WULFF = 'wulff'
ANGLES = 'angles'
COMMANDS = (SIMULATE, EQUILIBRIUM, CAUCHY, WULFF, ANGLES)

INT_KEYS = ('N', 'stride', 'n_levels', 'n_ref', 'workers', 'max_steps')
FLOAT_KEYS = ('a', 'b', 'area', 'tau', 'T', 'theta_deg', 'theta_rad', 'eta', 'epsilon',
              'path_c', 'path_alpha', 'tau0')
STR_KEYS = ('command', 'shape', 'path', 'scheme', 'out')
LIST_KEYS = {'levels': int, 'times': float}
BOOL_KEYS = ('dry_run',)
KEYS = INT_KEYS + FLOAT_KEYS + STR_KEYS + tuple(LIST_KEYS) + BOOL_KEYS


@dataclass(frozen=True)
class RunConfig:  # pylint: disable=too-many-instance-attributes
    """Validated run configuration; theta_young is in radians."""
    command: str = SIMULATE
    shape: str = scheme_type.SEMI_ELLIPSE
    a: float = 2.0
    b: float = 1.0
    area: Optional[float] = None
    path: Optional[str] = None
    N: int = 128  # pylint: disable=invalid-name
    tau: float = 0.01
    T: float = 1.0  # pylint: disable=invalid-name
    scheme: str = scheme_type.PC
    theta_young: float = 5.0 * math.pi / 6.0
    eta: float = DEFAULT_ETA
    epsilon: float = DEFAULT_EPSILON
    max_steps: int = DEFAULT_MAX_STEPS
    out: str = 'out'
    stride: int = 1
    path_c: Optional[float] = None
    path_alpha: Optional[float] = None
    levels: Tuple[int, ...] = ()
    tau0: Optional[float] = None
    n_levels: int = 4
    times: Tuple[float, ...] = ()
    n_ref: int = DEFAULT_N_REF
    workers: int = 1
    dry_run: bool = False

    @property
    def sigma(self):
        return math.cos(self.theta_young)

    def shape_spec(self):
        if self.shape == scheme_type.SEMI_ELLIPSE:
            return ShapeSpec.semi_ellipse(self.a, self.b)
        if self.shape == scheme_type.FLOWER:
            return ShapeSpec.flower()
        if self.shape == scheme_type.WULFF:
            return ShapeSpec.wulff(self.area, self.theta_young)
        return ShapeSpec.from_file(self.path)

    def scheme_params(self):
        return SchemeParams(tau=self.tau, theta_young=self.theta_young, eta=self.eta)

    def study_spec(self):
        return StudySpec(
            scheme=self.scheme,
            shape=self.shape_spec(),
            theta_young=self.theta_young,
            eta=self.eta,
            path_c=self.path_c,
            path_alpha=self.path_alpha,
            levels=self.levels,
            tau0=self.tau0,
            n_levels=self.n_levels,
            tau=self.tau if self.command == ANGLES else None,
            times=self.times,
            epsilon=self.epsilon,
            max_steps=self.max_steps,
            n_ref=self.n_ref,
            workers=self.workers,
        )


def _as_int(key, value):
    if isinstance(value, bool):
        raise ConfigError(f"expected an integer, got {value!r}", key)
    if isinstance(value, float) and value.is_integer():
        return int(value)
    if not isinstance(value, int):
        raise ConfigError(f"expected an integer, got {value!r}", key)
    return value


def _as_float(key, value):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"expected a number, got {value!r}", key)
    value = float(value)
    if not math.isfinite(value):
        raise ConfigError(f"expected a finite number, got {value!r}", key)
    return value


def _as_list(key, value, convert):
    if isinstance(value, str):
        value = [item for item in value.split(',') if item.strip()]
        try:
            value = [convert(item) for item in value]
        except ValueError:
            raise ConfigError(f"cannot parse list {value!r}", key) from None
    if not isinstance(value, (list, tuple)):
        raise ConfigError(f"expected a list, got {value!r}", key)
    check = _as_int if convert is int else _as_float
    return tuple(check(f"{key}[{i}]", item) for i, item in enumerate(value))


def _coerce(key, value):
    # pylint: disable=too-many-return-statements
    if key in INT_KEYS:
        return _as_int(key, value)
    if key in FLOAT_KEYS:
        return _as_float(key, value)
    if key in LIST_KEYS:
        return _as_list(key, value, LIST_KEYS[key])
    if key in BOOL_KEYS:
        if not isinstance(value, bool):
            raise ConfigError(f"expected true or false, got {value!r}", key)
        return value
    if not isinstance(value, str):
        raise ConfigError(f"expected a string, got {value!r}", key)
    return value


def _theta(values):
    given = [key for key in ('theta_deg', 'theta_rad') if key in values]
    if len(given) > 1:
        raise ConfigError("give exactly one of theta_deg and theta_rad", 'theta_deg')
    if not given:
        return None
    key = given[0]
    value = values.pop(key)
    if key == 'theta_deg':
        if not 0.0 < value < 180.0:
            raise ConfigError(f"theta out of (0,180): {value}", key)
        return math.radians(value)
    if not 0.0 < value < math.pi:
        raise ConfigError(f"theta out of (0,pi): {value}", key)
    return value


def _check_domains(config):
    # pylint: disable=too-many-branches
    positive = {'tau': config.tau, 'eta': config.eta, 'epsilon': config.epsilon,
                'a': config.a, 'b': config.b}
    for key, value in positive.items():
        if not value > 0:
            raise ConfigError(f"must be positive, got {value}", key)
    for key in ('path_c', 'path_alpha', 'tau0', 'area'):
        value = getattr(config, key)
        if value is not None and not value > 0:
            raise ConfigError(f"must be positive, got {value}", key)
    if config.N < 3:
        raise ConfigError(f"must be at least 3, got {config.N}", 'N')
    if config.T < 0:
        raise ConfigError(f"must be nonnegative, got {config.T}", 'T')
    for key in ('stride', 'workers', 'max_steps'):
        if getattr(config, key) < 1:
            raise ConfigError(f"must be at least 1, got {getattr(config, key)}", key)
    if config.command not in COMMANDS:
        raise ConfigError(f"unknown command {config.command!r}", 'command')
    if config.scheme not in scheme_type.SCHEMES:
        raise ConfigError(f"unknown scheme {config.scheme!r}", 'scheme')
    if config.shape not in scheme_type.SHAPES:
        raise ConfigError(f"unknown shape {config.shape!r}", 'shape')
    if config.shape == scheme_type.WULFF and config.area is None:
        raise ConfigError("wulff shape needs an area", 'area')
    if config.shape == scheme_type.FILE and not config.path:
        raise ConfigError("file shape needs a path", 'path')
    for T in config.times:  # pylint: disable=invalid-name
        if not T > 0:
            raise ConfigError(f"times must be positive, got {T}", 'times')
    if config.command == CAUCHY and not config.times:
        raise ConfigError("cauchy study needs times", 'times')

    if config.command in (CAUCHY, WULFF, ANGLES):
        try:
            config.study_spec().resolve_levels()
        except ParameterError as exc:
            raise ConfigError(str(exc), 'levels') from exc


def parse_config(text, overrides=None):
    """
    Parse a flat JSON object into a RunConfig. Entries of `overrides` whose
    value is not None replace the file values. Unknown keys are rejected.
    """
    try:
        data = json.loads(text) if text and text.strip() else {}
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("configuration must be a JSON object")

    overrides = {key: value for key, value in (overrides or {}).items() if value is not None}
    if any(key in overrides for key in ('theta_deg', 'theta_rad')):
        data.pop('theta_deg', None)
        data.pop('theta_rad', None)
    data.update(overrides)

    for key in data:
        if key not in KEYS:
            raise ConfigError("unknown key", key)
    values = {key: _coerce(key, value) for key, value in data.items()}

    theta = _theta(values)
    if theta is not None:
        values['theta_young'] = theta
    config = RunConfig(**values)
    _check_domains(config)
    return config


def _summary_simulate(config):
    curve0 = from_shape(config.shape_spec(), config.N)
    record = evolve(curve0, config.scheme, config.scheme_params(), config.T, stride=config.stride)
    record.write(config.out)
    last = record.rows[-1]
    return (f"{config.scheme}: t = {last.t:g}, W/W0 = {last.energy / record.rows[0].energy:.10f}, "
            f"dA/A0 = {last.area_change:.3e}, Psi = {last.mesh_ratio:.6f}, "
            f"theta = ({last.theta_left:.6f}, {last.theta_right:.6f})")


def _summary_equilibrium(config):
    curve0 = from_shape(config.shape_spec(), config.N)
    curve, record = evolve_to_equilibrium(
        curve0, config.scheme, config.scheme_params(), epsilon=config.epsilon,
        max_steps=config.max_steps, stride=config.stride)
    record.write(config.out)
    write_curve_csv(os.path.join(config.out, 'curve_equilibrium.csv'), curve)
    last = record.rows[-1]
    return (f"{config.scheme}: equilibrium at t = {last.t:g} ({record.steps} steps), "
            f"Psi = {last.mesh_ratio:.6f}, theta = ({last.theta_left:.6f}, "
            f"{last.theta_right:.6f}), residual = {record.equilibrium_residual:.3e}")


def _summary_cauchy(config):
    reports = cauchy_study(config.study_spec())
    write_reports_csv(os.path.join(config.out, 'report.csv'), reports)
    with open(os.path.join(config.out, 'report.json'), 'w', encoding='utf-8') as f_json:
        json.dump([report.as_dict() for report in reports], f_json, indent=2)
    return "\n\n".join(report.format_table() for report in reports)


def _summary_report(study):
    def summary(config):
        report = study(config.study_spec())
        report.to_csv(os.path.join(config.out, 'report.csv'))
        report.to_json(os.path.join(config.out, 'report.json'))
        return report.format_table()
    return summary


DISPATCH = {
    SIMULATE: _summary_simulate,
    EQUILIBRIUM: _summary_equilibrium,
    CAUCHY: _summary_cauchy,
    WULFF: _summary_report(wulff_study),
    ANGLES: _summary_report(angle_convergence_study),
}


def _mark_failed(config, exc):
    try:
        with open(os.path.join(config.out, FAILED_MARKER), 'w', encoding='utf-8') as f_marker:
            f_marker.write(f"{type(exc).__name__}: {exc}\n")
        if isinstance(exc, TrajectoryError):
            if exc.record is not None:
                exc.record.write(config.out)
            if exc.last_curve is not None:
                write_curve_csv(os.path.join(config.out, 'curve_last.csv'), exc.last_curve)
    except OSError as marker_exc:
        logger.error("cannot write failure marker: %s", marker_exc)


def run(config):
    """Execute a validated configuration; return the process exit status."""
    if config.dry_run:
        print(f"{config.command}: configuration valid (dry run)")
        return 0
    try:
        os.makedirs(config.out, exist_ok=True)
    except OSError as exc:
        print(f"{config.out}: {exc}", file=sys.stderr)
        return 1

    try:
        summary = DISPATCH[config.command](config)
    except (Error, OSError) as exc:
        logger.error("%s failed: %s", config.command, exc)
        _mark_failed(config, exc)
        print(f"{config.command} failed: {exc} (output in {config.out})", file=sys.stderr)
        return 1
    print(summary)
    return 0


def _build_parser():
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument('--config', help="JSON configuration file")
    common.add_argument('--out', help="output directory")
    common.add_argument('--stride', type=int, help="diagnostics sampling stride")
    common.add_argument('--dry-run', dest='dry_run', action='store_true',
                        help="validate the configuration and exit")
    common.add_argument('--shape', choices=scheme_type.SHAPES)
    common.add_argument('--a', type=float, help="semi-ellipse x semi-axis")
    common.add_argument('--b', type=float, help="semi-ellipse y semi-axis")
    common.add_argument('--area', type=float, help="Wulff shape area")
    common.add_argument('--path', help="node file for the file shape")
    common.add_argument('-N', '--N', dest='N', type=int, help="number of segments")
    common.add_argument('--tau', type=float, help="time step")
    common.add_argument('-T', '--T', dest='T', type=float, help="final time")
    common.add_argument('--scheme', choices=scheme_type.SCHEMES)
    common.add_argument('--theta-deg', dest='theta_deg', type=float,
                        help="Young's angle in degrees")
    common.add_argument('--theta-rad', dest='theta_rad', type=float,
                        help="Young's angle in radians")
    common.add_argument('--eta', type=float, help="contact line mobility")
    common.add_argument('--epsilon', type=float, help="equilibrium threshold")
    common.add_argument('--max-steps', dest='max_steps', type=int)
    common.add_argument('--path-c', dest='path_c', type=float, help="tau = c h^alpha")
    common.add_argument('--path-alpha', dest='path_alpha', type=float)
    common.add_argument('--levels', help="comma separated list of N")
    common.add_argument('--tau0', type=float, help="coarsest time step of a halving study")
    common.add_argument('--n-levels', dest='n_levels', type=int)
    common.add_argument('--times', help="comma separated list of T")
    common.add_argument('--n-ref', dest='n_ref', type=int, help="Wulff reference resolution")
    common.add_argument('--workers', type=int, help="processes for study levels")

    parser = argparse.ArgumentParser(
        prog='dewet', description="Solid-state dewetting simulations with parametric FEM")
    subparsers = parser.add_subparsers(dest='command', required=True)
    for command in COMMANDS:
        subparsers.add_parser(command, parents=[common])
    return parser


def _configure_logging():
    level_name = os.environ.get(LOG_ENV, 'WARNING').upper()
    level = getattr(logging, level_name, None)
    if not isinstance(level, int):
        level = logging.WARNING
    logging.basicConfig(level=level,
                        format='%(asctime)s %(levelname)s %(name)s: %(message)s')


def main(argv=None):
    """Console entry point; returns the exit status."""
    _configure_logging()
    args = vars(_build_parser().parse_args(argv))
    config_path = args.pop('config', None)

    text = ''
    if config_path is not None:
        try:
            with open(config_path, 'r', encoding='utf-8') as f_config:
                text = f_config.read()
        except OSError as exc:
            print(f"{config_path}: {exc}", file=sys.stderr)
            return 2
    try:
        config = parse_config(text, args)
    except ConfigError as exc:
        print(f"{config_path or 'arguments'}: {exc}", file=sys.stderr)
        return 2
    return run(config)


if __name__ == '__main__':
    sys.exit(main())
