"""Vectorized free-word walks for measures on a certified free basis.

A block of trials is advanced together: each row keeps its freely reduced
word as a stack of signed letter codes (``+-(symbol index + 1)``) together with
integer per-symbol letter counts, so the degree of ``f_n`` is the exact
integer ``prod d_s ** count_s``.
"""

import logging
import math

import numpy as np

from .walk import WalkSample, letters_for_trial

logger = logging.getLogger(__name__)


def _letter_tables(measure):
    letters = [atom.generator.fast for atom in measure.atoms]
    symbols = sorted({letter.symbol for letter in letters})
    index = {symbol: i for i, symbol in enumerate(symbols)}
    degrees = [0] * len(symbols)
    for letter in letters:
        degrees[index[letter.symbol]] = letter.degree
    codes = np.array(
        [(index[letter.symbol] + 1) * letter.sign for letter in letters], dtype=np.int32
    )
    return codes, degrees


class _LogCache:
    """``log(prod d_s ** c_s)`` computed from the exact integer, memoized by counts."""

    def __init__(self, degrees):
        self.degrees = degrees
        self.values = {}

    def __call__(self, counts):
        key = tuple(counts)
        value = self.values.get(key)
        if value is None:
            value = math.log(math.prod(d**c for d, c in zip(self.degrees, key)))
            self.values[key] = value
        return value


def _cyclic_counts(stack, depth, counts):
    """Per-symbol counts of each row's cyclically reduced word."""
    cyclic = counts.copy()
    offset = np.zeros(len(depth), dtype=np.int64)
    active = np.nonzero(depth >= 2)[0]
    while active.size:
        i = offset[active]
        j = depth[active] - 1 - i
        left = stack[active, i]
        right = stack[active, j]
        ok = (i < j) & (left == -right)
        hit = active[ok]
        cyclic[hit, np.abs(left[ok]) - 1] -= 2
        offset[hit] += 1
        active = hit
    return cyclic


def _power_word_counts(codes, checkpoints):
    """Single-symbol measures: the reduced word is ``s^m`` with ``m`` the signed sum."""
    signed = np.cumsum(np.sign(codes), axis=1)
    out = {}
    for c in checkpoints:
        m = np.zeros(codes.shape[0], dtype=np.int64) if c == 0 else np.abs(signed[:, c - 1])
        counts = m.reshape(-1, 1)
        out[c] = (counts, counts)
    return out


def _stack_word_counts(codes, checkpoints, nsymbols):
    rows_n, length = codes.shape
    rows = np.arange(rows_n)
    stack = np.zeros((rows_n, length + 1), dtype=np.int32)
    depth = np.zeros(rows_n, dtype=np.int64)
    counts = np.zeros((rows_n, nsymbols), dtype=np.int64)
    wanted = set(checkpoints)
    out = {}
    if 0 in wanted:
        out[0] = (counts.copy(), counts.copy())
    for t in range(length):
        code = codes[:, t]
        top = stack[rows, np.maximum(depth - 1, 0)]
        cancel = (depth > 0) & (top == -code)
        push = np.nonzero(~cancel)[0]
        stack[push, depth[push]] = code[push]
        delta = np.where(cancel, -1, 1)
        depth += delta
        counts[rows, np.abs(code) - 1] += delta
        if t + 1 in wanted:
            out[t + 1] = (counts.copy(), _cyclic_counts(stack, depth, counts))
    return out


def run_free_block(measure, seed, start, stop, length, checkpoints):
    """Walk trials ``start..stop-1`` together; returns WalkSamples in trial order."""
    code_table, degrees = _letter_tables(measure)
    trials = range(start, stop)
    if length:
        index = np.stack(
            [letters_for_trial(measure, seed, trial, length) for trial in trials]
        )
        codes = code_table[index]
    else:
        codes = np.zeros((len(trials), 0), dtype=np.int32)

    if len(degrees) == 1:
        by_step = _power_word_counts(codes, checkpoints)
    else:
        by_step = _stack_word_counts(codes, checkpoints, len(degrees))

    log_of = _LogCache(degrees)
    per_step = {
        c: (
            [log_of(row) for row in counts.tolist()],
            [log_of(row) for row in cyclic.tolist()],
        )
        for c, (counts, cyclic) in by_step.items()
    }
    samples = []
    for r, trial in enumerate(trials):
        samples.append(
            WalkSample(
                trial,
                tuple(checkpoints),
                tuple(per_step[c][0][r] for c in checkpoints),
                tuple(per_step[c][1][r] for c in checkpoints),
            )
        )
    logger.debug(f"Free-word block {start}..{stop} done ({len(log_of.values)} distinct degrees)")
    return samples
