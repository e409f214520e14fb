"""Experiment configs and the ``clt`` pipeline.

A config is a JSON document with ``schema_version`` 1 naming generators,
a measure over them, walk parameters, output paths and pass thresholds;
``experiments/`` holds complete examples. Loading errors are ConfigErrors
that name the offending field path, e.g. ``measure.atoms[1].weight``.
"""

import json
import math
import os
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Optional

import numpy as np
import pandas as pd
from flask import current_app

from ..algebra.cremona import compose
from ..algebra.expr_parser import parse_polynomial
from ..app_config import (
    CONFIG_SCHEMA_VERSION,
    DEFAULT_OUTPUTS,
    EXIT_CHECKS_FAILED,
    EXIT_IO_ERROR,
    EXIT_OK,
    EXIT_PARSE_ERROR,
    FAMILY_CONSTRUCTORS,
    FAMILY_TAGS,
)
from ..errors import (
    BackendError,
    ConfigError,
    CremonaError,
    DegreeCapExceeded,
    DegreeMismatchError,
    FamilyError,
    MapConstructionError,
    MeasureError,
    ParseError,
    SingularMatrixError,
)
from ..utils import atomic_outputs, json_text
from . import families
from .dyndeg import estimate, lambda1_fekete
from .families import Family, fast_compose, fast_initial, fast_kind
from .limitlaw import (
    FITTED_CAVEAT,
    LawKind,
    check_checkpoint,
    estimate_parameters,
    histogram,
    normalize,
    predict,
    sigma_vanishes,
    trend_check,
)
from .walk import Atom, Measure, WalkConfig, resolve_backend, run_trials, to_frame

TOP_LEVEL_KEYS = frozenset(
    (
        "schema_version",
        "name",
        "description",
        "generators",
        "measure",
        "walk",
        "outputs",
        "thresholds",
    )
)
ROOT = "<root>"


@dataclass(frozen=True)
class Thresholds:
    ks: float
    ks_fitted: float
    dirac_tolerance: float
    degree_cap: Optional[int]
    histogram_bins: int

    def as_dict(self):
        return {
            "ks": self.ks,
            "ks_fitted": self.ks_fitted,
            "dirac_tolerance": self.dirac_tolerance,
            "degree_cap": self.degree_cap,
            "histogram_bins": self.histogram_bins,
        }


@dataclass(frozen=True)
class Experiment:
    name: str
    source: str
    generators: Dict[str, families.Generator]
    measure: Measure
    walk: WalkConfig
    outputs: Dict[str, str]
    thresholds: Thresholds


@dataclass
class ExperimentOutcome:
    status: int
    summary: dict
    written: list = field(default_factory=list)


# --- field readers ------------------------------------------------------------


def _path(parent, key):
    if isinstance(key, int):
        return f"{parent}[{key}]"
    return f"{parent}.{key}" if parent and parent != ROOT else key


def _object(value, path):
    if not isinstance(value, dict):
        raise ConfigError(path, "expected an object")
    return value


def _get(raw, key, parent, required=True, default=None):
    _object(raw, parent)
    if key not in raw:
        if required:
            raise ConfigError(_path(parent, key), "is required")
        return default
    return raw[key]


def _reject_unknown(raw, allowed, parent):
    unknown = sorted(set(raw) - set(allowed))
    if unknown:
        raise ConfigError(_path(parent, unknown[0]), "unknown key")


def _int(value, path, minimum=None):
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(path, f"expected an integer, got {value!r}")
    if minimum is not None and value < minimum:
        raise ConfigError(path, f"must be >= {minimum}")
    return value


def _float(value, path):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(path, f"expected a number, got {value!r}")
    if not math.isfinite(value) or value < 0:
        raise ConfigError(path, "must be a finite nonnegative number")
    return float(value)


def _fraction(value, path):
    if isinstance(value, bool) or not isinstance(value, (int, float, str)):
        raise ConfigError(path, f"expected a rational number, got {value!r}")
    try:
        return Fraction(str(value).strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(path, f"not a rational number: {value!r}") from exc


def _polynomial(value, path):
    if isinstance(value, bool) or not isinstance(value, (int, str)):
        raise ConfigError(path, f"expected a polynomial expression, got {value!r}")
    try:
        return parse_polynomial(str(value))
    except ParseError as exc:
        raise ConfigError(path, str(exc)) from exc


def _name(value, path):
    if not isinstance(value, str) or not value.strip():
        raise ConfigError(path, "expected a nonempty name")
    return value.strip()


def _names(value, path, count=None):
    if not isinstance(value, list):
        raise ConfigError(path, "expected a list of names")
    if count is not None and len(value) != count:
        raise ConfigError(path, f"expected {count} names")
    return [_name(v, _path(path, i)) for i, v in enumerate(value)]


def _matrix(value, path, size, entry):
    if not isinstance(value, list) or len(value) != size:
        raise ConfigError(path, f"expected a {size}x{size} matrix")
    rows = []
    for i, row in enumerate(value):
        if not isinstance(row, list) or len(row) != size:
            raise ConfigError(_path(path, i), f"expected a row of {size} entries")
        rows.append([entry(v, f"{path}[{i}][{j}]") for j, v in enumerate(row)])
    return rows


def _tag(value, path):
    if value not in FAMILY_TAGS:
        expected = ", ".join(FAMILY_TAGS)
        raise ConfigError(path, f"unknown family tag {value!r}; expected one of {expected}")
    return Family(value)


def _optional_lambda(params, path):
    value = params.get("lambda")
    return None if value is None else _fraction(value, _path(path, "lambda"))


# --- generators ----------------------------------------------------------------


def _build_henon(decl, params, path):
    name = _name(_get(decl, "name", path), _path(path, "name"))
    P = _polynomial(_get(params, "P", _path(path, "params")), _path(path, "params.P"))
    h, h_inv = families.henon(P, name)
    return [h, h_inv]


def _build_henon_system(decl, params, path):
    polys_raw = _get(params, "polynomials", _path(path, "params"))
    ppath = _path(path, "params.polynomials")
    if not isinstance(polys_raw, list) or not polys_raw:
        raise ConfigError(ppath, "expected a nonempty list of polynomials")
    polys = [_polynomial(p, _path(ppath, i)) for i, p in enumerate(polys_raw)]
    names = decl.get("names")
    if names is not None:
        names = _names(names, _path(path, "names"), len(polys))
    out = []
    for pair in families.henon_system(polys, names):
        out.extend(pair)
    return out


def _build_jonquiere(decl, params, path):
    name = _name(_get(decl, "name", path), _path(path, "name"))
    ppath = _path(path, "params")
    a = _fraction(_get(params, "a", ppath), _path(ppath, "a"))
    b = _fraction(_get(params, "b", ppath, required=False, default=0), _path(ppath, "b"))
    polys = [
        _polynomial(_get(params, key, ppath), _path(ppath, key))
        for key in ("alpha", "beta", "gamma", "delta")
    ]
    g = families.jonquiere(a, b, *polys, name=name)
    return [g, g.inverse]


def _build_monomial(decl, params, path):
    name = _name(_get(decl, "name", path), _path(path, "name"))
    ppath = _path(path, "params")
    rows = _matrix(_get(params, "matrix", ppath), _path(ppath, "matrix"), 2, _int)
    tag = _tag(params.get("tag", Family.NONELEMENTARY_FREE.value), _path(ppath, "tag"))
    g = families.monomial(rows, tag, name, _optional_lambda(params, ppath))
    return [g] if g.inverse is None else [g, g.inverse]


def _build_linear(decl, params, path):
    name = _name(_get(decl, "name", path), _path(path, "name"))
    ppath = _path(path, "params")
    rows = _matrix(_get(params, "matrix", ppath), _path(ppath, "matrix"), 3, _fraction)
    g = families.linear(rows, name)
    return [g, g.inverse]


def _build_affine(decl, params, path):
    name = _name(_get(decl, "name", path), _path(path, "name"))
    ppath = _path(path, "params")
    p = _polynomial(_get(params, "p", ppath), _path(ppath, "p"))
    q = _polynomial(_get(params, "q", ppath), _path(ppath, "q"))
    tag = _tag(_get(params, "tag", ppath), _path(ppath, "tag"))
    return [families.affine(p, q, tag, name, _optional_lambda(params, ppath))]


def _build_arithmetic_pair(decl, params, path):
    ppath = _path(path, "params")
    names = decl.get("names", ["F", "G"])
    names = _names(names, _path(path, "names"), 2)
    P1 = _polynomial(_get(params, "P1", ppath), _path(ppath, "P1"))
    P2 = _polynomial(_get(params, "P2", ppath), _path(ppath, "P2"))
    return list(families.arithmetic_pair(P1, P2, tuple(names)))


_BUILDERS = {
    "henon": _build_henon,
    "henon_system": _build_henon_system,
    "jonquiere": _build_jonquiere,
    "monomial": _build_monomial,
    "linear": _build_linear,
    "affine": _build_affine,
    "arithmetic_pair": _build_arithmetic_pair,
}

_CONSTRUCTION_ERRORS = (
    FamilyError,
    MapConstructionError,
    SingularMatrixError,
    DegreeMismatchError,
    DegreeCapExceeded,
)


def build_generators(decls):
    """Build every declared generator; inverses are registered as ``name^-1``."""
    if not isinstance(decls, list) or not decls:
        raise ConfigError("generators", "expected a nonempty list")
    registry = {}
    for i, decl in enumerate(decls):
        path = _path("generators", i)
        _object(decl, path)
        _reject_unknown(decl, ("name", "names", "family", "params"), path)
        family = _get(decl, "family", path)
        builder = _BUILDERS.get(family)
        if builder is None:
            raise ConfigError(
                _path(path, "family"),
                f"unknown family {family!r}; expected one of {', '.join(FAMILY_CONSTRUCTORS)}",
            )
        params = _object(decl.get("params", {}), _path(path, "params"))
        try:
            built = builder(decl, params, path)
        except _CONSTRUCTION_ERRORS as exc:
            raise ConfigError(path, str(exc)) from exc
        for g in built:
            if g.name in registry:
                raise ConfigError(path, f"duplicate generator name {g.name!r}")
            registry[g.name] = g
    return registry


# --- measure, walk, outputs, thresholds ----------------------------------------------


def parse_measure(raw, generators):
    _reject_unknown(_object(raw, "measure"), ("atoms", "free_basis", "group_type"), "measure")
    atoms_raw = _get(raw, "atoms", "measure")
    if not isinstance(atoms_raw, list) or not atoms_raw:
        raise ConfigError("measure.atoms", "expected a nonempty list")
    atoms = []
    for i, item in enumerate(atoms_raw):
        path = _path("measure.atoms", i)
        _reject_unknown(_object(item, path), ("generator", "weight"), path)
        name = _get(item, "generator", path)
        if name not in generators:
            raise ConfigError(_path(path, "generator"), f"unknown generator {name!r}")
        weight = _fraction(_get(item, "weight", path), _path(path, "weight"))
        if weight <= 0:
            raise ConfigError(_path(path, "weight"), "must be positive")
        atoms.append(Atom(generators[name], weight))
    total = sum((atom.weight for atom in atoms), Fraction(0))
    if total != 1:
        raise ConfigError("measure.atoms", f"weights sum to {total}, not 1")

    free_basis = raw.get("free_basis", False)
    if not isinstance(free_basis, bool):
        raise ConfigError("measure.free_basis", "expected true or false")
    group_type = raw.get("group_type")
    if group_type is not None:
        group_type = _tag(group_type, "measure.group_type")
    try:
        return Measure(tuple(atoms), free_basis, group_type)
    except MeasureError as exc:
        raise ConfigError("measure", str(exc)) from exc


def _checkpoints(raw, length, overridden):
    if raw is None:
        return [length]
    if not isinstance(raw, list) or not raw:
        raise ConfigError("walk.checkpoints", "expected a nonempty list of steps")
    steps = [_int(c, _path("walk.checkpoints", i), 0) for i, c in enumerate(raw)]
    if overridden:
        steps = [c for c in steps if c < length] + [length]
    return steps


def parse_walk(raw, measure, overrides, thresholds, settings):
    _reject_unknown(
        _object(raw, "walk"),
        ("length", "checkpoints", "trials", "seed", "backend", "workers"),
        "walk",
    )
    length = overrides.get("length")
    if length is None:
        length = _int(_get(raw, "length", "walk"), "walk.length", 0)
    checkpoints = _checkpoints(raw.get("checkpoints"), length, "length" in overrides)
    trials = overrides.get("trials") or _int(_get(raw, "trials", "walk"), "walk.trials", 1)
    seed = overrides.get("seed")
    if seed is None:
        seed = _int(_get(raw, "seed", "walk"), "walk.seed", 0)
    backend = overrides.get("backend") or raw.get("backend", "auto")
    workers = overrides.get("workers") or _int(
        raw.get("workers", settings["WORKERS"]), "walk.workers", 1
    )
    try:
        resolve_backend(measure, backend)
    except BackendError as exc:
        raise ConfigError("walk.backend", str(exc)) from exc
    try:
        return WalkConfig(
            measure,
            length,
            tuple(checkpoints),
            trials,
            seed,
            backend,
            thresholds.degree_cap,
            workers,
            settings["TRIAL_CHUNK"],
        )
    except ValueError as exc:
        raise ConfigError("walk", str(exc)) from exc


def parse_thresholds(raw, settings):
    raw = {} if raw is None else _object(raw, "thresholds")
    _reject_unknown(
        raw, ("ks", "ks_fitted", "dirac_tolerance", "degree_cap", "histogram_bins"), "thresholds"
    )
    cap = settings["DEGREE_CAP"]
    if "degree_cap" in raw:
        cap = raw["degree_cap"]
        if cap is not None:
            cap = _int(cap, "thresholds.degree_cap", 1)
    return Thresholds(
        _float(raw.get("ks", settings["KS_THRESHOLD"]), "thresholds.ks"),
        _float(raw.get("ks_fitted", settings["KS_THRESHOLD_FITTED"]), "thresholds.ks_fitted"),
        _float(
            raw.get("dirac_tolerance", settings["DIRAC_TOLERANCE"]),
            "thresholds.dirac_tolerance",
        ),
        cap,
        _int(
            raw.get("histogram_bins", settings["HISTOGRAM_BINS"]),
            "thresholds.histogram_bins",
            1,
        ),
    )


def parse_outputs(raw, base_dir, out_dir, default_dir):
    """Absolute output paths; ``out_dir`` (from ``--out``) replaces every directory."""
    raw = {} if raw is None else _object(raw, "outputs")
    _reject_unknown(raw, DEFAULT_OUTPUTS, "outputs")
    paths = {}
    for key, default_name in DEFAULT_OUTPUTS.items():
        value = raw.get(key)
        if value is not None and (not isinstance(value, str) or not value.strip()):
            raise ConfigError(_path("outputs", key), "expected a file path")
        if out_dir:
            path = os.path.join(out_dir, os.path.basename(value) if value else default_name)
        elif value:
            path = os.path.join(base_dir, value)
        else:
            path = os.path.join(default_dir, default_name)
        paths[key] = os.path.abspath(path)
    if len(set(paths.values())) != len(paths):
        raise ConfigError("outputs", "output paths must be distinct")
    return paths


def read_config(path):
    """Parsed JSON of ``path``; OSError propagates, malformed JSON is a ConfigError."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(ROOT, f"invalid JSON: {exc.msg} (line {exc.lineno})") from exc
    _object(raw, ROOT)
    _reject_unknown(raw, TOP_LEVEL_KEYS, ROOT)
    version = _get(raw, "schema_version", ROOT)
    if version != CONFIG_SCHEMA_VERSION:
        raise ConfigError(
            "schema_version", f"unsupported version {version!r}, expected {CONFIG_SCHEMA_VERSION}"
        )
    return raw


def parse_experiment(raw, source, base_dir, overrides, settings):
    name = raw.get("name") or os.path.splitext(os.path.basename(source))[0]
    if not isinstance(name, str):
        raise ConfigError("name", "expected a string")
    thresholds = parse_thresholds(raw.get("thresholds"), settings)
    generators = build_generators(_get(raw, "generators", ROOT))
    measure = parse_measure(_get(raw, "measure", ROOT), generators)
    walk = parse_walk(_get(raw, "walk", ROOT), measure, overrides, thresholds, settings)
    outputs = parse_outputs(
        raw.get("outputs"),
        base_dir,
        overrides.get("out"),
        os.path.join(settings["OUTPUT_DIR"], name),
    )
    return Experiment(
        name, os.path.basename(source), generators, measure, walk, outputs, thresholds
    )


def load_experiment(path, overrides=None, settings=None):
    """Read and validate an experiment config; ``overrides`` come from CLI flags."""
    settings = current_app.config if settings is None else settings
    overrides = {k: v for k, v in (overrides or {}).items() if v is not None}
    raw = read_config(path)
    base_dir = os.path.dirname(os.path.abspath(path))
    return parse_experiment(raw, path, base_dir, overrides, settings)


def load_generators(path):
    return build_generators(_get(read_config(path), "generators", ROOT))


# --- evaluation -----------------------------------------------------------------


def _record(check, values, n, gating):
    record = check.as_dict()
    record.update(
        {
            "gating": gating,
            "samples": int(values.size),
            "mean_log_deg": float(values.mean()),
            "std_log_deg": float(values.std()),
            "mean_log_deg_over_sqrt_n": float(values.mean() / math.sqrt(n)),
        }
    )
    return record


def evaluate(experiment, result):
    """Summary dict and histogram table for a finished ensemble."""
    thresholds = experiment.thresholds
    prediction = predict(experiment.measure)
    steps = [n for n in experiment.walk.checkpoints if n > 0]
    parabolic = prediction.group_type is Family.PARABOLIC
    # Exact laws hold at every step; KS laws only gate the last checkpoint.
    exact = prediction.law is LawKind.DIRAC and not parabolic
    check_args = (thresholds.ks, thresholds.ks_fitted, thresholds.dirac_tolerance)

    fitted = None
    if prediction.estimated and steps and len(result.samples) >= 2:
        fitted = estimate_parameters(result.values_at(steps[-1]), steps[-1])

    records, gates = [], []
    for n in steps:
        values = result.values_at(n)
        if values.size == 0 or (prediction.estimated and fitted is None):
            continue
        if prediction.estimated:
            ell_hat = fitted[0]
            sigma_n = float(np.std(normalize(values, ell_hat, n), ddof=1))
            check = check_checkpoint(prediction, values, n, *check_args, fitted=(ell_hat, sigma_n))
            gating = n == steps[-1]
        else:
            check = check_checkpoint(prediction, values, n, *check_args)
            gating = exact or (not parabolic and n == steps[-1])
        record = _record(check, values, n, gating)
        if prediction.law is LawKind.DIRAC and not prediction.estimated:
            record["max_abs_deviation"] = float(np.abs(values - n * prediction.ell).max())
        lambdas = result.lambda1_at(n)
        if lambdas is not None and not (prediction.estimated and lambdas.size < 2):
            record["lambda1_statistic"] = check_checkpoint(
                prediction, lambdas, n, *check_args
            ).statistic
        records.append(record)
        if gating:
            gates.append(check.passed)

    trend = None
    if parabolic:
        means = {r["step"]: r["mean_log_deg_over_sqrt_n"] for r in records}
        if len(means) >= 2:
            trend = trend_check(means)
            gates.append(trend["passed"])

    estimates = None
    if fitted is not None:
        estimates = {
            "step": steps[-1],
            "ell_hat": fitted[0],
            "sigma_hat": fitted[1],
            "ell_hat_positive": fitted[0] > 0,
        }
        gates.append(fitted[0] > 0)

    passed = all(gates) and not result.failures
    summary = {
        "schema_version": CONFIG_SCHEMA_VERSION,
        "experiment": experiment.name,
        "config": experiment.source,
        "backend": result.backend,
        "seed": experiment.walk.seed,
        "trials": experiment.walk.trials,
        "length": experiment.walk.length,
        "checkpoints": list(experiment.walk.checkpoints),
        "prediction": prediction.as_dict(),
        "sigma_vanishes": sigma_vanishes(prediction),
        "estimates": estimates,
        "checks": records,
        "trend": trend,
        "thresholds": thresholds.as_dict(),
        "failed_trials": len(result.failures),
        "failures": [
            {"trial": f.trial, "step": f.step, "message": f.message} for f in result.failures
        ],
        "caveat": FITTED_CAVEAT if prediction.estimated else None,
        "passed": passed,
    }
    return summary, _final_histogram(prediction, fitted, result, steps, thresholds)


def _final_histogram(prediction, fitted, result, steps, thresholds):
    if not steps or not result.samples:
        return pd.DataFrame(columns=["count", "left_edge", "width"])
    n = steps[-1]
    ell = fitted[0] if prediction.estimated and fitted else prediction.ell
    if ell is None:
        return pd.DataFrame(columns=["count", "left_edge", "width"])
    return histogram(normalize(result.values_at(n), ell, n), thresholds.histogram_bins)


def write_outputs(outputs, frame, summary, hist):
    """Write CSV, summary and histogram together; nothing is left behind on error."""
    paths = [outputs["csv"], outputs["summary"], outputs["histogram"]]
    with atomic_outputs(paths) as staged:
        frame.to_csv(staged[outputs["csv"]], index=False)
        with open(staged[outputs["summary"]], "w", encoding="utf-8", newline="") as fh:
            fh.write(json_text(summary))
        hist.to_csv(staged[outputs["histogram"]], index=False)
    return paths


def run_experiment(config_path, overrides=None):
    """Run trials, compare with the predicted law and write the three output files."""
    experiment = load_experiment(config_path, overrides)
    current_app.logger.info(
        f"Experiment {experiment.name}: {experiment.walk.trials} trials, "
        f"length {experiment.walk.length}, seed {experiment.walk.seed}"
    )
    result = run_trials(experiment.walk)
    summary, hist = evaluate(experiment, result)
    written = write_outputs(experiment.outputs, to_frame(result), summary, hist)
    status = EXIT_OK if summary["passed"] else EXIT_CHECKS_FAILED
    if status != EXIT_OK:
        current_app.logger.warning(
            f"Experiment {experiment.name} failed its checks "
            f"({summary['failed_trials']} failed trials)"
        )
    return ExperimentOutcome(status, summary, written)


def run_walk(config_path, overrides=None):
    """Trajectories only: ``(experiment, DataFrame)``."""
    experiment = load_experiment(config_path, overrides)
    result = run_trials(experiment.walk)
    if result.failures:
        current_app.logger.warning(f"{len(result.failures)} trials failed")
    return experiment, to_frame(result), result


def dynamical_degree(generators, word, budget, max_degree):
    """Estimate for a space-separated word of generator names (a single name is a word)."""
    names = word.split()
    if not names:
        raise ConfigError("word", "expected at least one generator name")
    unknown = [n for n in names if n not in generators]
    if unknown:
        raise ConfigError("word", f"unknown generator {unknown[0]!r}")
    chosen = [generators[n] for n in names]
    if len(chosen) == 1:
        return estimate(chosen[0], budget, max_degree)
    kinds = {fast_kind(g) for g in chosen}
    if len(kinds) == 1 and None not in kinds:
        bases = {g.basis for g in chosen}
        if kinds != {"free"} or len(bases) == 1:
            state = fast_initial(kinds.pop())
            for g in chosen:
                state = fast_compose(state, g)
            return estimate(state, budget, max_degree)
    f = chosen[0].map
    for g in chosen[1:]:
        f = compose(f, g.map, max_degree)
    return lambda1_fekete(f, budget, max_degree)


def exit_status(exc):
    """Exit status for an exception escaping a command, or None if it is unexpected."""
    if isinstance(exc, DegreeCapExceeded):
        return EXIT_CHECKS_FAILED
    if isinstance(exc, CremonaError):
        return EXIT_PARSE_ERROR
    if isinstance(exc, OSError):
        return EXIT_IO_ERROR
    return None
