"""Command-line front end: ``damcmc run | diagnose | verify | adda-report``.

Exit codes: 0 success, 1 invalid input (config, data, trace), 2 failure
while sampling, 3 a verification check failed.
"""

import argparse
import csv
import hashlib
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .adda import AddaConfig, CompletionSchedule, LatencyModel, adda_run, adda_wall_clock_report
from .core import run_chain
from .diagnostics import diagnose
from .errors import ConfigError, DAMCMCError, InvalidParameterError
from .models import (
    ElasticNetModel,
    LassoModel,
    LogisticModel,
    ProbitGlmmModel,
    QuantRegModel,
    RobitModel,
    elastic_net_da_step,
    lasso_da_step,
    pg_logistic_da_step,
    probit_glmm_da_step,
    probit_haar_pxda_step,
    quantreg_two_block_pxda_step,
    quantreg_two_block_step,
    robit_da_step,
)
from .rng import RngStream
from .verification import SUITES, run_suites

__all__ = ["main", "load_config", "build_model", "run_config", "read_trace", "THREADS_ENV"]

EXIT_OK, EXIT_INVALID, EXIT_RUNTIME, EXIT_CHECK_FAILED = 0, 1, 2, 3
THREADS_ENV = "DAMCMC_THREADS"

TOP_KEYS = {"model", "kernel", "iterations", "burn_in", "seed", "chains", "data", "output", "adda"}
REQUIRED_TOP = {"model", "kernel", "iterations", "data"}
DATA_KEYS = {"path", "response", "trials", "random_effects", "design"}
ADDA_KEYS = {"k", "r", "epsilon", "schedule", "latency"}
LATENCY_KEYS = {"item_mean", "speeds", "manager_cost"}

# family -> (allowed parameters, kernels)
FAMILIES = {
    "lasso": ({"lambda", "alpha", "xi", "standardize"}, {"da", "adda"}),
    "elastic-net": ({"lambda1", "lambda2", "alpha", "xi", "standardize"}, {"da", "adda"}),
    "logistic": ({"mu0", "prior_precision", "assume_proper"}, {"da"}),
    "probit-glmm": ({"beta", "blocks"}, {"da", "haar-pxda", "adda"}),
    "robit": ({"nu", "beta_a", "sigma_a"}, {"da"}),
    "quantreg": ({"alpha", "beta0", "b0", "n0", "t0"},
                 {"two-block", "two-block-pxda:1", "two-block-pxda:2"}),
}


def _reject_unknown(section, allowed, where):
    unknown = set(section) - set(allowed)
    if unknown:
        raise ConfigError(f"unknown key(s) in {where}: {', '.join(sorted(unknown))}")


def _positive_int(value, name, allow_zero=False):
    if isinstance(value, bool) or not isinstance(value, int) or value < (0 if allow_zero else 1):
        raise ConfigError(f"{name} must be an integer >= {0 if allow_zero else 1}")
    return value


def load_config(path):
    """Read and validate a JSON run configuration; relative paths resolve against its directory."""
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from exc
    try:
        cfg = json.loads(raw)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    _reject_unknown(cfg, TOP_KEYS, "config")
    missing = REQUIRED_TOP - set(cfg)
    if missing:
        raise ConfigError(f"missing key(s): {', '.join(sorted(missing))}")
    model = cfg["model"]
    if not isinstance(model, dict) or model.get("family") not in FAMILIES:
        raise ConfigError(f"model.family must be one of {', '.join(FAMILIES)}")
    allowed, kernels = FAMILIES[model["family"]]
    _reject_unknown({k for k in model if k != "family"}, allowed, f"model ({model['family']})")
    if cfg["kernel"] not in kernels:
        raise ConfigError(f"kernel {cfg['kernel']!r} is not available for {model['family']} "
                          f"(choose from {', '.join(sorted(kernels))})")
    _positive_int(cfg["iterations"], "iterations")
    _positive_int(cfg.get("burn_in", 0), "burn_in", allow_zero=True)
    _positive_int(cfg.get("seed", 0), "seed", allow_zero=True)
    _positive_int(cfg.get("chains", 1), "chains")
    data = cfg["data"]
    if not isinstance(data, dict) or "path" not in data or "response" not in data:
        raise ConfigError("data needs 'path' and 'response'")
    _reject_unknown(data, DATA_KEYS, "data")
    if cfg["kernel"] == "adda":
        adda = cfg.get("adda")
        if not isinstance(adda, dict) or "k" not in adda:
            raise ConfigError("kernel 'adda' needs an 'adda' section with at least 'k'")
        _reject_unknown(adda, ADDA_KEYS, "adda")
        if "latency" in adda:
            _reject_unknown(adda["latency"], LATENCY_KEYS, "adda.latency")
    elif "adda" in cfg:
        raise ConfigError("an 'adda' section requires kernel 'adda'")
    cfg["_base"] = str(path.resolve().parent)
    return cfg


def config_hash(cfg):
    public = {k: v for k, v in cfg.items() if not k.startswith("_")}
    return hashlib.sha256(json.dumps(public, sort_keys=True, separators=(",", ":")).encode()).hexdigest()


def _resolve(cfg, name):
    p = Path(name)
    return p if p.is_absolute() else Path(cfg["_base"]) / p


def read_table(path):
    """Header row plus numeric rows -> (names, array)."""
    try:
        with open(path, newline="") as fh:
            rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
    except OSError as exc:
        raise ConfigError(f"cannot read data file {path}: {exc.strerror}") from exc
    if len(rows) < 2:
        raise ConfigError(f"{path} needs a header row and at least one data row")
    names = [c.strip() for c in rows[0]]
    try:
        values = np.array([[float(v) for v in r] for r in rows[1:]])
    except ValueError as exc:
        raise ConfigError(f"{path} has a non-numeric entry: {exc}") from exc
    if values.shape[1] != len(names):
        raise ConfigError(f"{path} rows do not match the header width")
    return names, values


def _columns(names, values, wanted, what):
    idx = []
    for c in wanted:
        if c not in names:
            raise ConfigError(f"{what} column {c!r} not found in data")
        idx.append(names.index(c))
    return values[:, idx]


def build_model(cfg):
    """Model instance, column labels for the state vector and the initial state."""
    data = cfg["data"]
    names, values = read_table(_resolve(cfg, data["path"]))
    special = {data["response"], data.get("trials")} | set(data.get("random_effects", []))
    design_names = data.get("design") or [n for n in names if n not in special]
    if not design_names:
        raise ConfigError("no design columns left after removing the response")
    z = _columns(names, values, [data["response"]], "response")[:, 0]
    w = _columns(names, values, design_names, "design")
    m = dict(cfg["model"])
    family = m.pop("family")
    try:
        if family in ("lasso", "elastic-net"):
            standardize = m.get("standardize", False)
            common = dict(alpha=m.get("alpha", 0.0), xi=m.get("xi", 0.0), standardize=standardize)
            if family == "lasso":
                model = LassoModel(w, z, m["lambda"], **common)
            else:
                model = ElasticNetModel(w, z, m["lambda1"], m["lambda2"], **common)
            return model, design_names + ["sigma2"], model.initial_state()
        if family == "logistic":
            trials = _columns(names, values, [data["trials"]], "trials")[:, 0] if "trials" in data else None
            model = LogisticModel(w, z, trials, m.get("mu0"), m.get("prior_precision"),
                                  m.get("assume_proper", False))
            return model, design_names, np.zeros(model.p)
        if family == "probit-glmm":
            effects = data.get("random_effects")
            if not effects:
                raise ConfigError("probit-glmm needs data.random_effects")
            v = _columns(names, values, effects, "random-effect")
            blocks = [(b["lambda"], b["r"]) for b in m["blocks"]]
            model = ProbitGlmmModel(w, v, m["beta"], blocks, z)
            return model, list(effects), np.zeros(model.q)
        if family == "robit":
            model = RobitModel(w, z, m["nu"], m.get("beta_a"), m.get("sigma_a"))
            return model, design_names, np.zeros(model.p)
        model = QuantRegModel(w, z, m["alpha"], m.get("beta0"), m.get("b0"), m.get("n0", 1.0), m.get("t0", 1.0))
        labels = design_names + [f"R{i + 1}" for i in range(model.n)] + ["sigma"]
        return model, labels, model.initial_state()
    except KeyError as exc:
        raise ConfigError(f"model ({family}) is missing parameter {exc.args[0]!r}") from exc
    except (TypeError, InvalidParameterError) as exc:
        raise ConfigError(f"invalid {family} model: {exc}") from exc


_STEPS = {
    ("lasso", "da"): lasso_da_step,
    ("elastic-net", "da"): elastic_net_da_step,
    ("logistic", "da"): pg_logistic_da_step,
    ("probit-glmm", "da"): probit_glmm_da_step,
    ("probit-glmm", "haar-pxda"): probit_haar_pxda_step,
    ("robit", "da"): robit_da_step,
    ("quantreg", "two-block"): quantreg_two_block_step,
}


def _kernel(family, kernel, model):
    if kernel.startswith("two-block-pxda:"):
        variant = int(kernel.rsplit(":", 1)[1])
        return lambda x, rng: quantreg_two_block_pxda_step(model, variant, x, rng)
    step = _STEPS[(family, kernel)]
    return lambda x, rng: step(model, x, rng)


def _adda_parts(cfg, model):
    sub = cfg["adda"]
    try:
        config = AddaConfig(sub["k"], sub.get("r", 1.0), sub.get("epsilon", 1.0))
        blocked = model.blocked_model(config.k)
    except InvalidParameterError as exc:
        raise ConfigError(f"invalid adda section: {exc}") from exc
    schedule = latency = None
    if "schedule" in sub:
        try:
            arrivals = json.loads(_resolve(cfg, sub["schedule"]).read_text())
            schedule = CompletionSchedule(orders=arrivals["orders"], truncations=arrivals.get("truncations")).check(config.k)
        except (OSError, ValueError, KeyError, TypeError, InvalidParameterError) as exc:
            raise ConfigError(f"cannot load adda schedule: {exc}") from exc
    if "latency" in sub:
        lat = sub["latency"]
        try:
            latency = LatencyModel(lat.get("item_mean", 1.0), tuple(lat["speeds"]) if "speeds" in lat else None,
                                   lat.get("manager_cost", 0.0))
        except (TypeError, InvalidParameterError) as exc:
            raise ConfigError(f"invalid adda latency: {exc}") from exc
    return blocked, config, schedule, latency


def _run_one(cfg, model, x0, chain):
    seed = cfg.get("seed", 0)
    rng = RngStream(seed, chain).generator()
    n, burn_in = cfg["iterations"], cfg.get("burn_in", 0)
    family, kernel = cfg["model"]["family"], cfg["kernel"]
    if kernel == "adda":
        blocked, config, schedule, latency = _adda_parts(cfg, model)
        return adda_run(blocked, config, n, x0, rng, schedule=schedule, latency=latency, burn_in=burn_in,
                        seed=seed).draws
    return run_chain(_kernel(family, kernel, model), x0, n, rng, burn_in=burn_in, seed=seed).draws


def run_config(cfg, threads=1):
    """All chains of a validated config; returns (labels, list of draws arrays)."""
    model, labels, x0 = build_model(cfg)
    if cfg["kernel"] == "adda":
        labels = labels + [f"y{i + 1}" for i in range(model.blocked_model(cfg["adda"]["k"]).y_dim)]
    chains = cfg.get("chains", 1)
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        draws = list(pool.map(lambda c: _run_one(cfg, model, x0, c), range(chains)))
    return labels, draws


def _fmt(v):
    return format(float(v), ".17g")


def write_trace(path, cfg, labels, draws):
    meta = [
        ("format", "damcmc-trace"),
        ("version", __version__),
        ("seed", cfg.get("seed", 0)),
        ("config_sha256", config_hash(cfg)),
        ("model", cfg["model"]["family"]),
        ("kernel", cfg["kernel"]),
        ("iterations", cfg["iterations"]),
        ("burn_in", cfg.get("burn_in", 0)),
        ("chains", len(draws)),
    ]
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        for key, value in meta:
            fh.write(f"# {key}: {value}\n")
        writer = csv.writer(fh, lineterminator="\n")
        multi = len(draws) > 1
        writer.writerow((["chain"] if multi else []) + list(labels))
        for c, d in enumerate(draws):
            for row in d:
                writer.writerow(([c] if multi else []) + [_fmt(v) for v in row])


def read_trace(path):
    """(metadata dict, column names, draws array) from a trace CSV."""
    meta = {}
    body = []
    try:
        with open(path, newline="") as fh:
            for line in fh:
                if line.startswith("#"):
                    key, _, value = line[1:].partition(":")
                    meta[key.strip()] = value.strip()
                elif line.strip():
                    body.append(line)
    except OSError as exc:
        raise ConfigError(f"cannot read trace {path}: {exc.strerror}") from exc
    rows = list(csv.reader(body))
    if len(rows) < 2:
        raise ConfigError(f"trace {path} has no draws")
    try:
        values = np.array([[float(v) for v in r] for r in rows[1:]])
    except ValueError as exc:
        raise ConfigError(f"trace {path} has a non-numeric entry: {exc}") from exc
    return meta, rows[0], values


def _threads(arg):
    if arg is not None:
        return arg
    env = os.environ.get(THREADS_ENV)
    if env is None:
        return 1
    try:
        return max(1, int(env))
    except ValueError:
        raise ConfigError(f"{THREADS_ENV} must be an integer") from None


def cmd_run(args):
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg["seed"] = args.seed
    out = args.out or (cfg.get("output") and str(_resolve(cfg, cfg["output"])))
    if not out:
        raise ConfigError("no output path (use --out or the 'output' key)")
    labels, draws = run_config(cfg, _threads(args.threads))
    write_trace(out, cfg, labels, draws)
    return EXIT_OK


def cmd_diagnose(args):
    meta, names, values = read_trace(args.trace)
    if names and names[0] == "chain":
        chain = values[:, 0]
        if np.unique(chain).size > 1:
            values = values[chain == chain[0]]
        names, values = names[1:], values[:, 1:]
    wanted = args.columns.split(",") if args.columns else names
    for c in wanted:
        if c not in names:
            raise ConfigError(f"trace has no column {c!r}")
    lags = [int(v) for v in args.lags.split(",")]
    report = diagnose(values[:, [names.index(c) for c in wanted]], wanted, lags, args.batches)
    text = []
    for key in ("config_sha256", "seed", "kernel", "model"):
        if key in meta:
            text.append(f"# {key}: {meta[key]}\n")
    rows = report.to_csv_rows()
    lines = [",".join(rows[0]) + "\n"]
    for r in rows[1:]:
        lines.append(",".join([r[0]] + [_fmt(v) if v != "" else "" for v in r[1:]]) + "\n")
    output = "".join(text + lines)
    if args.out:
        Path(args.out).write_text(output)
    else:
        sys.stdout.write(output)
    return EXIT_OK


def cmd_verify(args):
    names = args.suite or ["all"]
    for n in names:
        if n != "all" and n not in SUITES:
            raise ConfigError(f"unknown suite {n!r} (choose from all, {', '.join(SUITES)})")
    checks = run_suites(names, seed=args.seed or 0, mutate=args.mutate)
    report = {
        "version": __version__,
        "seed": args.seed or 0,
        "mutated": args.mutate,
        "passed": all(c.passed for c in checks),
        "checks": [c.to_dict() for c in checks],
    }
    text = json.dumps(report, indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK if report["passed"] else EXIT_CHECK_FAILED


def _parse_pairs(text):
    pairs = []
    for item in text.split(","):
        try:
            r, eps = item.split(":")
            pairs.append((float(r), float(eps)))
        except ValueError:
            raise ConfigError(f"bad (r, epsilon) pair {item!r}; expected r:epsilon") from None
    return pairs


def cmd_adda_report(args):
    cfg = load_config(args.config)
    if cfg["kernel"] != "adda":
        raise ConfigError("adda-report needs a config with kernel 'adda'")
    if args.seed is not None:
        cfg["seed"] = args.seed
    model, _, x0 = build_model(cfg)
    blocked, config, _, latency = _adda_parts(cfg, model)
    pairs = _parse_pairs(args.configs) if args.configs else [(config.r, config.epsilon), (1.0, 1.0)]
    for r, eps in pairs:
        try:
            AddaConfig(config.k, r, eps)
        except InvalidParameterError as exc:
            raise ConfigError(str(exc)) from exc
    report = adda_wall_clock_report(blocked, pairs, cfg["iterations"], x0, cfg.get("seed", 0),
                                    latency=latency or LatencyModel(), burn_in=cfg.get("burn_in", 0))
    text = f"# config_sha256: {config_hash(cfg)}\n# seed: {cfg.get('seed', 0)}\n" + report.to_csv()
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="damcmc", description="Data-augmentation MCMC runs and checks.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run the chain(s) described by a JSON config")
    p.add_argument("config")
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.add_argument("--threads", type=int, help=f"concurrent chains (default: ${THREADS_ENV} or 1)")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("diagnose", help="summaries of a trace file")
    p.add_argument("trace")
    p.add_argument("--lags", default="1,5,10")
    p.add_argument("--batches", type=int)
    p.add_argument("--columns")
    p.add_argument("--out")
    p.set_defaults(func=cmd_diagnose)

    p = sub.add_parser("verify", help="exact-kernel oracle checks")
    p.add_argument("--suite", action="append", help="suite name (repeatable; default all)")
    p.add_argument("--mutate", action="store_true", help="perturb a live conditional; checks must fail")
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("adda-report", help="cost/ESS table across (r, epsilon) settings")
    p.add_argument("config")
    p.add_argument("--configs", help="comma-separated r:epsilon pairs")
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_adda_report)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, InvalidParameterError) as exc:
        print(f"damcmc: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except DAMCMCError as exc:
        print(f"damcmc: runtime failure: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
