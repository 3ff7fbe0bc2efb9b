"""Command-line front end tying the analysis modules together.

Every subcommand resolves its parameters from a flat key=value config file
(optional) overridden by command-line flags, runs seeded and deterministic,
and writes one report table in csv, json-lines, or text format.

Exit codes: 0 success, 1 usage error, 2 computation error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass

from . import concentration, recovery, reporting, rip, transforms
from .linalg import ENSEMBLE_KINDS, EnsembleSpec, draw_ensemble, read_matrix

COMMANDS = (
    "ric",
    "concentration",
    "transform-left",
    "transform-right",
    "dict-bound",
    "dict-experiment",
    "recover",
    "dimension",
)


class UsageError(Exception):
    """Bad invocation: missing/unknown parameters, malformed config."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


@dataclass(frozen=True)
class Param:
    """One typed parameter of a subcommand."""

    name: str
    kind: str  # int | float | str | choice
    required: bool = False
    default: object = None
    choices: tuple = ()
    help: str = ""

    @property
    def dest(self) -> str:
        return self.name.replace("-", "_")


_COMMON = [
    Param("output", "str", default="-", help="output file path ('-' for stdout)"),
    Param("format", "choice", default="csv", choices=reporting.FORMATS, help="output format"),
]

_ENSEMBLE = [
    Param("ensemble", "choice", choices=ENSEMBLE_KINDS, help="random ensemble kind"),
    Param("rows", "int", help="ensemble row count n"),
    Param("cols", "int", help="ensemble column count N"),
]

COMMAND_PARAMS: dict[str, list[Param]] = {
    "ric": [
        Param("matrix", "str", help="matrix file to analyze"),
        *_ENSEMBLE,
        Param("order", "int", required=True, help="isometry order k"),
        Param("seed", "int", default=0, help="seed for ensemble draw / sampling"),
        Param("trials", "int", help="switch to sampled lower bound with this many trials"),
        Param("budget", "int", default=rip.DEFAULT_SUPPORT_BUDGET, help="max supports to enumerate"),
        Param("workers", "int", default=1, help="parallel workers for enumeration"),
    ],
    "concentration": [
        Param("ensemble", "choice", required=True, choices=ENSEMBLE_KINDS),
        Param("rows", "int", required=True),
        Param("cols", "int", required=True),
        Param("epsilon", "float", required=True, help="tail level in (0, 1)"),
        Param("trials", "int", required=True),
        Param("seed", "int", default=0),
        Param("plot-data", "str", help="also write a series,x,y CSV here"),
    ],
    "transform-left": [
        Param("matrix", "str", required=True, help="left factor matrix file"),
        Param("order", "int", required=True),
        Param("delta", "float", help="isometry constant of the sensing matrix"),
        Param("phi", "str", help="sensing matrix file: verify the envelope per support"),
        Param("budget", "int", default=rip.DEFAULT_SUPPORT_BUDGET),
        Param("workers", "int", default=1),
    ],
    "transform-right": [
        Param("matrix", "str", required=True, help="right factor (dictionary) matrix file"),
        Param("order", "int", required=True),
        Param("delta", "float", required=True),
        Param("budget", "int", default=rip.DEFAULT_SUPPORT_BUDGET),
        Param("workers", "int", default=1),
    ],
    "dict-bound": [
        Param("delta-b", "float", required=True, help="dictionary isometry constant"),
        Param("delta-phi", "float", required=True, help="sensing isometry constant"),
        Param("q", "int", help="dictionary width for the union probability"),
        Param("k", "int", help="order for the union probability"),
        Param("p", "float", help="per-event probability (default derived from rows/epsilon)"),
        Param("rows", "int", help="rows n for the default per-event probability"),
        Param("epsilon", "float", help="epsilon for the default per-event probability"),
    ],
    "dict-experiment": [
        Param("b-matrix", "str", required=True, help="dictionary matrix file"),
        *_ENSEMBLE,
        Param("order", "int", required=True),
        Param("trials", "int", required=True),
        Param("seed", "int", default=0),
        Param("budget", "int", default=rip.DEFAULT_SUPPORT_BUDGET),
        Param("workers", "int", default=1),
    ],
    "recover": [
        Param("rows", "int", required=True),
        Param("cols", "int", required=True),
        Param("sparsity", "int", required=True),
        Param("trials", "int", required=True),
        Param("seed", "int", default=0),
        Param("tol", "float", default=1e-7, help="primal/dual relative tolerance"),
        Param("max-iters", "int", default=5000),
        Param("rho", "float", default=1.0, help="splitting penalty parameter"),
        Param("ensemble", "choice", default="gaussian", choices=ENSEMBLE_KINDS),
    ],
    "dimension": [
        Param("N", "int", required=True, help="signal length"),
        Param("n", "int", help="row count: compute the largest feasible order"),
        Param("c1", "float", default=0.5, help="order constant (illustrative default)"),
        Param("k", "int", help="sparsity: compute the required row count"),
        Param("delta", "float", help="target isometry constant"),
        Param("t", "float", default=1.0, help="tail parameter"),
        Param("C", "float", default=1.0, help="row-count constant (illustrative default)"),
    ],
}

for _params in COMMAND_PARAMS.values():
    _params.extend(_COMMON)


@dataclass(frozen=True)
class ExperimentConfig:
    """Fully resolved invocation of one subcommand."""

    command: str
    parameters: dict
    seed: int
    output_path: str
    format: str


def _convert(param: Param, raw, source: str):
    if not isinstance(raw, str):
        return raw
    try:
        if param.kind == "int":
            return int(raw)
        if param.kind == "float":
            return float(raw)
    except ValueError:
        raise UsageError(f"{source}: parameter '{param.name}' expects a {param.kind}, got {raw!r}") from None
    if param.kind == "choice" and raw not in param.choices:
        raise UsageError(f"{source}: parameter '{param.name}' must be one of {param.choices}, got {raw!r}")
    return raw


def _read_config_file(path: str) -> dict[str, str]:
    try:
        with open(path) as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc}") from None
    values: dict[str, str] = {}
    for lineno, line in enumerate(lines, start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise UsageError(f"{path}:{lineno}: expected key=value, got {stripped!r}")
        key, _, value = stripped.partition("=")
        key = key.strip()
        value = value.strip()
        if not key or not value:
            raise UsageError(f"{path}:{lineno}: empty key or value")
        values[key] = value
    return values


def _build_parser() -> _Parser:
    parser = _Parser(prog="ripkit", description=__doc__)
    sub = parser.add_subparsers(dest="command", metavar="command")
    for command, params in COMMAND_PARAMS.items():
        p = sub.add_parser(command, add_help=True)
        p.add_argument("--config", default=None, help="key=value config file (flags override)")
        for param in params:
            p.add_argument(f"--{param.name}", dest=param.dest, default=None, help=param.help)
    return parser


def _cross_validate(command: str, resolved: dict) -> None:
    if command == "ric":
        has_matrix = "matrix" in resolved
        has_ensemble = all(key in resolved for key in ("ensemble", "rows", "cols"))
        if not has_matrix and not has_ensemble:
            raise UsageError("ric: provide --matrix or --ensemble with --rows and --cols")
        if has_matrix and "ensemble" in resolved:
            raise UsageError("ric: --matrix and --ensemble are mutually exclusive")
    elif command == "transform-left":
        if "phi" not in resolved and "delta" not in resolved:
            raise UsageError("transform-left: provide --delta (analysis) or --phi (verification)")
    elif command == "dict-bound":
        wants_union = "q" in resolved or "k" in resolved
        if wants_union:
            if not ("q" in resolved and "k" in resolved):
                raise UsageError("dict-bound: the union probability needs both --q and --k")
            if "p" not in resolved and not ("rows" in resolved and "epsilon" in resolved):
                raise UsageError("dict-bound: provide --p, or --rows with --epsilon to derive it")
    elif command == "dimension":
        if ("n" in resolved) == ("k" in resolved):
            raise UsageError("dimension: provide exactly one of --n (max order) or --k (required rows)")
        if "k" in resolved and "delta" not in resolved:
            raise UsageError("dimension: required-rows mode needs --delta")


def parse_config(argv=None) -> ExperimentConfig:
    """Resolve command, config file, and flags into an ExperimentConfig.

    Precedence: flags override config-file values, which override defaults.
    Unknown config keys are rejected; missing required parameters are
    reported by name.
    """
    parser = _build_parser()
    ns = parser.parse_args(argv)
    if ns.command is None:
        raise UsageError(f"missing command; expected one of {COMMANDS}")
    schema = COMMAND_PARAMS[ns.command]
    known = {param.name for param in schema}
    file_values = _read_config_file(ns.config) if ns.config else {}
    unknown = sorted(set(file_values) - known)
    if unknown:
        raise UsageError(f"{ns.config}: unknown parameter(s) {', '.join(unknown)}")
    resolved = {}
    for param in schema:
        raw = getattr(ns, param.dest)
        source = "command line"
        if raw is None and param.name in file_values:
            raw = file_values[param.name]
            source = ns.config
        if raw is None:
            if param.required:
                raise UsageError(f"{ns.command}: missing required parameter --{param.name}")
            if param.default is not None:
                resolved[param.name] = param.default
            continue
        resolved[param.name] = _convert(param, raw, source)
    _cross_validate(ns.command, resolved)
    return ExperimentConfig(
        command=ns.command,
        parameters=resolved,
        seed=int(resolved.get("seed", 0)),
        output_path=str(resolved["output"]),
        format=str(resolved["format"]),
    )


def _ric_matrix(params: dict):
    if "matrix" in params:
        return read_matrix(params["matrix"])
    spec = EnsembleSpec(params["ensemble"], params["rows"], params["cols"], params.get("seed", 0))
    return draw_ensemble(spec)


def _run_ric(params: dict):
    m = _ric_matrix(params)
    if "trials" in params:
        est = rip.estimate_ric(m, params["order"], params["trials"], params.get("seed", 0))
        columns = ["order", "delta_lower_bound", "trials", "seed"]
        return columns, [[est.order, est.delta_lower_bound, est.trials, est.seed]]
    report = rip.exact_ric(m, params["order"], budget=params["budget"], workers=params["workers"])
    return list(rip.RIP_CSV_COLUMNS), [report.to_csv_row()]


def _run_concentration(params: dict):
    spec = EnsembleSpec(params["ensemble"], params["rows"], params["cols"], params["seed"])
    est = concentration.estimate_tail(spec, params["epsilon"], params["trials"], params["seed"])
    columns = [
        "epsilon",
        "rows",
        "trials",
        "failures",
        "empirical_probability",
        "theoretical_bound",
        "seed",
    ]
    row = [
        est.epsilon,
        est.rows,
        est.trials,
        est.failures,
        est.empirical_probability,
        est.theoretical_bound,
        est.seed,
    ]
    if "plot-data" in params:
        reporting.emit_plot_data(
            {
                "empirical": [(est.rows, est.empirical_probability)],
                "bound": [(est.rows, est.theoretical_bound)],
            },
            params["plot-data"],
        )
    return columns, [row]


def _run_transform_left(params: dict):
    a = read_matrix(params["matrix"])
    if "phi" in params:
        phi = read_matrix(params["phi"])
        check = transforms.verify_left_envelope(
            a, phi, params["order"], budget=params["budget"], workers=params["workers"]
        )
        columns = [
            "order",
            "delta_phi",
            "sigma_min",
            "sigma_max",
            "lower",
            "upper",
            "worst_slack",
            "witness",
            "passed",
            "supports_examined",
        ]
        row = [
            check.order,
            check.delta_phi,
            check.sigma_min,
            check.sigma_max,
            check.lower,
            check.upper,
            check.worst_slack,
            rip.format_support(check.witness),
            check.passed,
            check.supports_examined,
        ]
        return columns, [row]
    analysis = transforms.analyze_left_product(a, params["delta"], params["order"])
    env = analysis.envelope
    columns = [
        "order",
        "sigma_min",
        "sigma_max",
        "full_column_rank",
        "lower",
        "upper",
        "rescale_c",
        "delta_effective",
        "rip_valid",
        "failure_mode",
    ]
    row = [
        env.order,
        float(analysis.gram_spectrum[-1]),
        float(analysis.gram_spectrum[0]),
        analysis.full_column_rank,
        env.lower,
        env.upper,
        env.rescale_c,
        env.delta_effective,
        env.rip_valid,
        analysis.failure_mode or "",
    ]
    return columns, [row]


def _run_transform_right(params: dict):
    b = read_matrix(params["matrix"])
    res = transforms.analyze_right_product(
        b, params["delta"], params["order"], budget=params["budget"], workers=params["workers"]
    )
    env = res.envelope
    columns = [
        "order",
        "lambda_min",
        "lambda_max",
        "lower",
        "upper",
        "rescale_c",
        "delta_effective",
        "rip_valid",
        "supports_examined",
    ]
    row = [
        res.order,
        res.per_support_lambda_min,
        res.per_support_lambda_max,
        env.lower,
        env.upper,
        env.rescale_c,
        env.delta_effective,
        env.rip_valid,
        res.supports_examined,
    ]
    return columns, [row]


def _run_dict_bound(params: dict):
    db = transforms.dictionary_bound(params["delta-b"], params["delta-phi"])
    columns = ["delta_b", "delta_phi", "bound", "admissible"]
    row = [db.delta_b, db.delta_phi, db.bound, db.admissible]
    if "q" in params:
        p = params.get("p")
        if p is None:
            p = concentration.rip_event_probability(params["rows"], params["epsilon"])
        ub = transforms.union_probability(params["q"], params["k"], p)
        columns += ["q", "k", "p", "union_bound", "union_clamped", "vacuous"]
        row += [ub.q, ub.k, ub.p, ub.bound, ub.clamped, ub.vacuous]
    return columns, [row]


def _run_dict_experiment(params: dict):
    b = read_matrix(params["b-matrix"])
    spec = EnsembleSpec(params["ensemble"], params["rows"], params["cols"], params["seed"])
    res = transforms.dictionary_experiment(
        spec,
        b,
        params["order"],
        params["trials"],
        params["seed"],
        budget=params["budget"],
        workers=params["workers"],
    )
    columns = [
        "trial",
        "delta_b",
        "delta_phi",
        "delta_phi_b",
        "bound",
        "holds",
        "pass_fraction",
        "half_width",
    ]
    rows = [
        [r.trial, res.delta_b, r.delta_phi, r.delta_phi_b, r.bound, r.holds, res.pass_fraction, res.half_width]
        for r in res.records
    ]
    return columns, rows


def _run_recover(params: dict):
    spec = EnsembleSpec(params["ensemble"], params["rows"], params["cols"], params["seed"])
    config = recovery.SolverConfig(
        penalty_parameter=params["rho"],
        max_iterations=params["max-iters"],
        primal_tolerance=params["tol"],
        dual_tolerance=params["tol"],
    )
    stats = recovery.run_recovery_trials(
        spec, params["cols"], params["sparsity"], params["trials"], params["seed"], config
    )
    columns = ["trial", "success", "l2_error", "sigma_k", "iterations", "residual"]
    rows = [
        [r.trial, r.success, r.l2_error, r.sigma_k, r.iterations, r.residual]
        for r in stats.records
    ]
    return columns, rows


def _run_dimension(params: dict):
    if "n" in params:
        value = concentration.max_order(params["n"], params["N"], params["c1"])
        return ["n", "N", "c1", "max_order"], [[params["n"], params["N"], params["c1"], value]]
    dims = concentration.DimensioningParams(
        big_n=params["N"],
        k=params["k"],
        delta=params["delta"],
        t=params["t"],
        c_cap=params["C"],
    )
    req = concentration.required_rows(dims)
    columns = ["N", "k", "delta", "t", "C", "rows", "rows_unweighted_variant"]
    row = [dims.big_n, dims.k, dims.delta, dims.t, dims.c_cap, req.rows, req.rows_unweighted_variant]
    return columns, [row]


_HANDLERS = {
    "ric": _run_ric,
    "concentration": _run_concentration,
    "transform-left": _run_transform_left,
    "transform-right": _run_transform_right,
    "dict-bound": _run_dict_bound,
    "dict-experiment": _run_dict_experiment,
    "recover": _run_recover,
    "dimension": _run_dimension,
}


def run(config: ExperimentConfig) -> reporting.ReportEnvelope:
    """Execute a resolved config and write its report. Returns the envelope."""
    handler = _HANDLERS[config.command]
    columns, rows = handler(config.parameters)
    echo = {"command": config.command}
    echo.update({k: v for k, v in config.parameters.items()})
    envelope = reporting.ReportEnvelope.build(echo, columns, rows)
    reporting.write_report(envelope, config.output_path, config.format)
    return envelope


def main(argv=None) -> int:
    try:
        config = parse_config(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    try:
        run(config)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, ArithmeticError) as exc:
        print(f"{config.command}: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"{config.command}: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
