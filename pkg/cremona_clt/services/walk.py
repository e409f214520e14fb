"""Seeded random walks ``f_n = g_1 ∘ g_2 ∘ ... ∘ g_n`` over a finite measure.

Trial ``t`` draws its uniforms from a Philox stream keyed by ``(seed, t)``;
the uniform for step ``s`` is the ``s``-th double of that stream, so a trial's
letters never depend on how trials are split across blocks or workers.
"""

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Optional, Tuple

import numpy as np
import pandas as pd

from ..algebra.cremona import compose, identity
from ..app_config import BACKENDS, DEFAULT_DEGREE_CAP, TRIAL_CHUNK
from ..errors import BackendError, DegreeCapExceeded, MeasureError
from .dyndeg import log_lambda1_letters, log_spectral_radius
from .families import (
    Family,
    FreeLetter,
    FreeWord,
    MatrixState,
    fast_compose,
    fast_degree,
    fast_initial,
    fast_kind,
)

logger = logging.getLogger(__name__)

SEED_LIMIT = 2**64


@dataclass(frozen=True)
class Atom:
    generator: object
    weight: Fraction


@dataclass(frozen=True)
class Measure:
    """Finite probability measure on generators with exact rational weights."""

    atoms: Tuple[Atom, ...]
    free_basis: bool = False
    group_type: Optional[Family] = None

    def __post_init__(self):
        atoms = tuple(self.atoms)
        object.__setattr__(self, "atoms", atoms)
        if not atoms:
            raise MeasureError("a measure needs at least one atom")
        for i, atom in enumerate(atoms):
            if atom.weight <= 0:
                raise MeasureError(f"atoms[{i}] ({atom.generator.name}) has nonpositive weight")
        total = sum((atom.weight for atom in atoms), Fraction(0))
        if total != 1:
            raise MeasureError(f"weights sum to {total}, not 1")
        if self.group_type is not None:
            object.__setattr__(self, "group_type", Family(self.group_type))
        if self.free_basis:
            letters = [atom.generator.fast for atom in atoms]
            if not all(isinstance(letter, FreeLetter) for letter in letters):
                raise MeasureError("free_basis requires every atom to carry a free letter")
            bases = {letter.basis for letter in letters}
            if len(bases) != 1:
                raise MeasureError(
                    f"free_basis requires one certified basis, found {sorted(bases)}"
                )

    @classmethod
    def from_weights(cls, generators, weights, free_basis=False, group_type=None):
        generators = list(generators)
        weights = [Fraction(w) for w in weights]
        if len(generators) != len(weights):
            raise MeasureError("one weight per generator is required")
        return cls(
            tuple(Atom(g, w) for g, w in zip(generators, weights)), free_basis, group_type
        )

    @classmethod
    def uniform(cls, generators, free_basis=False, group_type=None):
        generators = list(generators)
        n = len(generators)
        return cls.from_weights(generators, [Fraction(1, n)] * n, free_basis, group_type)

    @property
    def generators(self):
        return [atom.generator for atom in self.atoms]

    @cached_property
    def cumulative(self):
        """Float cumulative weights; each entry is the rounding of an exact partial sum."""
        partial = Fraction(0)
        out = []
        for atom in self.atoms:
            partial += atom.weight
            out.append(float(partial))
        return np.array(out)

    def backend_kind(self):
        """Common fast kind of all atoms, or None."""
        kinds = {fast_kind(g) for g in self.generators}
        if len(kinds) == 1:
            return kinds.pop()
        return None

    def families(self):
        return {g.family for g in self.generators}


def sample_letter(measure, uniform):
    """Inverse-CDF sampling with right-open intervals."""
    index = int(np.searchsorted(measure.cumulative, uniform, side="right"))
    return min(index, len(measure.atoms) - 1)


def trial_uniforms(seed, trial, n):
    rng = np.random.Generator(
        np.random.Philox(key=np.array([seed, trial], dtype=np.uint64))
    )
    return rng.random(n)


def letters_for_trial(measure, seed, trial, n):
    index = np.searchsorted(measure.cumulative, trial_uniforms(seed, trial, n), side="right")
    return np.minimum(index, len(measure.atoms) - 1)


def resolve_backend(measure, requested):
    """Return ``"symbolic"``, ``"free"`` or ``"matrix"``."""
    if requested not in BACKENDS:
        raise BackendError(f"unknown backend {requested!r}")
    if requested == "symbolic":
        return "symbolic"
    kind = measure.backend_kind()
    if kind == "free" and not measure.free_basis:
        if requested == "fast":
            raise BackendError("free-letter backend requires a free_basis measure")
        kind = None
    if kind is None:
        if requested == "fast":
            raise BackendError("fast backend needs every atom to share one fast representation")
        return "symbolic"
    return kind


@dataclass(frozen=True)
class WalkConfig:
    measure: Measure
    length: int
    checkpoints: Tuple[int, ...]
    trials: int
    seed: int
    backend: str = "auto"
    degree_cap: Optional[int] = DEFAULT_DEGREE_CAP
    workers: int = 1
    chunk: int = TRIAL_CHUNK

    def __post_init__(self):
        checkpoints = tuple(int(c) for c in self.checkpoints)
        object.__setattr__(self, "checkpoints", checkpoints)
        if self.length < 0:
            raise ValueError("walk length must be >= 0")
        if not checkpoints:
            raise ValueError("checkpoints must be nonempty")
        if list(checkpoints) != sorted(set(checkpoints)):
            raise ValueError("checkpoints must be strictly increasing")
        if checkpoints[0] < 0 or checkpoints[-1] != self.length:
            raise ValueError("checkpoints must lie in [0, length] and end at length")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not 0 <= self.seed < SEED_LIMIT:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.backend not in BACKENDS:
            raise ValueError(f"backend must be one of {', '.join(BACKENDS)}")
        if self.workers < 1 or self.chunk < 1:
            raise ValueError("workers and chunk must be >= 1")


@dataclass(frozen=True)
class WalkSample:
    trial: int
    steps: Tuple[int, ...]
    log_degrees: Tuple[float, ...]
    log_lambda1: Optional[Tuple[float, ...]] = None

    def at(self, step):
        return self.log_degrees[self.steps.index(step)]


@dataclass(frozen=True)
class TrialFailure:
    trial: int
    step: int
    message: str


@dataclass
class WalkResult:
    samples: list
    failures: list = field(default_factory=list)
    backend: str = "symbolic"

    def values_at(self, step):
        return np.array([s.at(step) for s in self.samples], dtype=float)

    def lambda1_at(self, step):
        if not self.samples or self.samples[0].log_lambda1 is None:
            return None
        idx = self.samples[0].steps.index(step)
        return np.array([s.log_lambda1[idx] for s in self.samples], dtype=float)


def apply_letters(
    measure,
    letters,
    checkpoints,
    backend="symbolic",
    max_degree=DEFAULT_DEGREE_CAP,
    trial=0,
):
    """Compose the atoms named by ``letters`` left to right and record checkpoints.

    ``backend`` is ``"symbolic"``, ``"fast"`` (the measure's kind) or a kind.
    """
    checkpoints = tuple(checkpoints)
    wanted = set(checkpoints)
    generators = measure.generators
    if backend == "fast":
        backend = measure.backend_kind()
        if backend is None:
            raise BackendError("measure atoms do not share a fast representation")
    logs, lambdas = [], []

    if backend == "symbolic":
        f = identity()
        if 0 in wanted:
            logs.append(0.0)
        for step, index in enumerate(letters, 1):
            try:
                f = compose(f, generators[index].map, max_degree)
            except DegreeCapExceeded as exc:
                exc.step = step
                raise
            if step in wanted:
                logs.append(math.log(f.degree))
        return WalkSample(trial, checkpoints, tuple(logs))

    state = fast_initial(backend)
    if 0 in wanted:
        logs.append(0.0)
        lambdas.append(0.0)
    for step, index in enumerate(letters, 1):
        state = fast_compose(state, generators[index])
        if step in wanted:
            logs.append(math.log(fast_degree(state)))
            lambdas.append(_log_lambda1(state))
    return WalkSample(trial, checkpoints, tuple(logs), tuple(lambdas))


def _log_lambda1(state):
    if isinstance(state, FreeWord):
        return log_lambda1_letters(state.letters)
    if isinstance(state, MatrixState):
        return log_spectral_radius(state.matrix)
    raise BackendError(f"not a fast state: {state!r}")


def _run_block(args):
    config, backend, start, stop = args
    if backend == "free":
        from .fast_walk import run_free_block

        return (
            run_free_block(
                config.measure, config.seed, start, stop, config.length, config.checkpoints
            ),
            [],
        )
    samples, failures = [], []
    for trial in range(start, stop):
        letters = letters_for_trial(config.measure, config.seed, trial, config.length)
        try:
            samples.append(
                apply_letters(
                    config.measure,
                    letters,
                    config.checkpoints,
                    backend,
                    config.degree_cap,
                    trial,
                )
            )
        except DegreeCapExceeded as exc:
            step = getattr(exc, "step", None)
            logger.warning(f"Trial {trial} failed at step {step}: {exc}")
            failures.append(TrialFailure(trial, step, str(exc)))
    return samples, failures


def run_trials(config):
    """Run ``config.trials`` independent walks; output is ordered by trial index."""
    backend = resolve_backend(config.measure, config.backend)
    blocks = [
        (config, backend, start, min(start + config.chunk, config.trials))
        for start in range(0, config.trials, config.chunk)
    ]
    logger.info(
        f"Running {config.trials} trials of length {config.length} "
        f"({backend} backend, {len(blocks)} blocks, {config.workers} workers)"
    )
    if config.workers > 1 and len(blocks) > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            parts = list(pool.map(_run_block, blocks))
    else:
        parts = [_run_block(block) for block in blocks]

    samples, failures = [], []
    for block_samples, block_failures in parts:
        samples.extend(block_samples)
        failures.extend(block_failures)
    if failures:
        logger.warning(f"{len(failures)} of {config.trials} trials failed")
    return WalkResult(samples, failures, backend)


def to_frame(result):
    """Long-format trajectories with the CSV columns ``trial, step, log_deg``."""
    rows = [
        (sample.trial, step, value)
        for sample in result.samples
        for step, value in zip(sample.steps, sample.log_degrees)
    ]
    return pd.DataFrame(rows, columns=["trial", "step", "log_deg"])
