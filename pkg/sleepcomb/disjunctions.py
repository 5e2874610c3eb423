"""Disjunctions over n boolean variables and labeled streams.

A disjunction is given by disjoint index sets P and N over 1..n and evaluates
to 1 iff some x(i) = 1 for i in P or some x(i) = 0 for i in N. The empty
disjunction is the constant 0.

Text syntax: ``x1|~x3`` (``0`` for the empty disjunction).

Stream file format, one round per line: n space-separated bits, then the label
bit. Blank lines and lines starting with ``#`` are skipped.
"""

from dataclasses import dataclass
from itertools import product
from typing import FrozenSet, Iterable, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from sleepcomb import config
from sleepcomb.errors import InvalidInstance, TooLarge
from sleepcomb.logging import get_logger

logger = get_logger(__name__)

Bits = Tuple[int, ...]


@dataclass(frozen=True)
class Disjunction:
    n: int
    positive: FrozenSet[int] = frozenset()
    negative: FrozenSet[int] = frozenset()

    def __post_init__(self) -> None:
        object.__setattr__(self, "positive", frozenset(self.positive))
        object.__setattr__(self, "negative", frozenset(self.negative))
        if self.n < 0:
            raise InvalidInstance(f"n must be >= 0, got {self.n}")
        if self.positive & self.negative:
            raise InvalidInstance("P and N must be disjoint")
        if any(not 1 <= i <= self.n for i in self.positive | self.negative):
            raise InvalidInstance(f"Disjunction indices must lie in 1..{self.n}")

    @property
    def relevant(self) -> Tuple[int, ...]:
        return tuple(sorted(self.positive | self.negative))

    def key(self) -> Tuple[Tuple[int, ...], Tuple[int, ...]]:
        return tuple(sorted(self.positive)), tuple(sorted(self.negative))

    def __call__(self, x: Sequence[int]) -> int:
        return evaluate(self, x)

    def __str__(self) -> str:
        literals = []
        for i in self.relevant:
            literals.append(f"x{i}" if i in self.positive else f"~x{i}")
        return "|".join(literals) if literals else "0"


def _check_input(phi: Disjunction, x: Sequence[int]) -> None:
    if len(x) != phi.n:
        raise InvalidInstance(f"Input has {len(x)} bits, disjunction expects {phi.n}")


def evaluate(phi: Disjunction, x: Sequence[int]) -> int:
    """phi(x) as 0 or 1."""
    _check_input(phi, x)
    if any(x[i - 1] for i in phi.positive):
        return 1
    return int(any(not x[i - 1] for i in phi.negative))


def parse_disjunction(text: str, n: int) -> Disjunction:
    text = text.strip()
    if text in ("", "0"):
        return Disjunction(n)
    positive, negative = set(), set()
    for literal in text.split("|"):
        literal = literal.strip()
        target = negative if literal.startswith("~") else positive
        body = literal.lstrip("~")
        if not body.startswith("x") or not body[1:].isdigit():
            raise InvalidInstance(f"Not a literal: {literal!r}")
        target.add(int(body[1:]))
    return Disjunction(n, frozenset(positive), frozenset(negative))


def enumerate_disjunctions(n: int, max_n: Optional[int] = None) -> Iterator[Disjunction]:
    """All 3^n disjunctions, each index absent, positive or negative in turn.

    Raises:
        TooLarge: If n exceeds the configured limit.
    """
    limit = config.current().disjunction_max_n if max_n is None else max_n
    if n > limit:
        raise TooLarge(f"3^{n} disjunctions exceed the limit n <= {limit}", limit)
    for codes in product((0, 1, 2), repeat=n):
        yield Disjunction(
            n,
            frozenset(i for i, code in enumerate(codes, start=1) if code == 1),
            frozenset(i for i, code in enumerate(codes, start=1) if code == 2),
        )


def random_disjunction(n: int, rng: np.random.Generator) -> Disjunction:
    codes = rng.integers(0, 3, size=n)
    return Disjunction(
        n,
        frozenset(i + 1 for i in range(n) if codes[i] == 1),
        frozenset(i + 1 for i in range(n) if codes[i] == 2),
    )


@dataclass(frozen=True)
class LabeledStream:
    """Rounds of (x, y) with x in {0,1}^n and y a bit.

    ``source`` records how the stream was produced, for run summaries.
    """

    n: int
    inputs: Tuple[Bits, ...]
    labels: Tuple[int, ...]
    source: str = "inline"

    def __post_init__(self) -> None:
        inputs = tuple(tuple(int(b) for b in x) for x in self.inputs)
        labels = tuple(int(y) for y in self.labels)
        object.__setattr__(self, "inputs", inputs)
        object.__setattr__(self, "labels", labels)
        if len(inputs) != len(labels):
            raise InvalidInstance("Stream needs one label per input")
        for x in inputs:
            if len(x) != self.n:
                raise InvalidInstance(f"Stream input of length {len(x)}, expected {self.n}")
            if any(b not in (0, 1) for b in x):
                raise InvalidInstance("Stream inputs must be bits")
        if any(y not in (0, 1) for y in labels):
            raise InvalidInstance("Stream labels must be bits")

    def __len__(self) -> int:
        return len(self.labels)

    def __iter__(self) -> Iterator[Tuple[Bits, int]]:
        return iter(zip(self.inputs, self.labels))

    def arrays(self) -> Tuple[np.ndarray, np.ndarray]:
        xs = np.array(self.inputs, dtype=bool).reshape(len(self), self.n)
        return xs, np.array(self.labels, dtype=bool)

    def head(self, rounds: int) -> "LabeledStream":
        return LabeledStream(self.n, self.inputs[:rounds], self.labels[:rounds], self.source)


def _draw_inputs(
    n: int, rounds: int, rng: np.random.Generator, probabilities: Optional[Sequence[float]]
) -> np.ndarray:
    probs = np.full(n, 0.5) if probabilities is None else np.asarray(probabilities, dtype=float)
    if probs.shape != (n,) or np.any(probs < 0) or np.any(probs > 1):
        raise InvalidInstance("Need one probability in [0, 1] per coordinate")
    return (rng.random((rounds, n)) < probs).astype(int)


def iid_realizable(
    phi: Disjunction,
    rounds: int,
    seed: int,
    probabilities: Optional[Sequence[float]] = None,
) -> LabeledStream:
    """Inputs drawn i.i.d. from a Bernoulli product, labeled by ``phi``."""
    return iid_noisy(phi, rounds, 0.0, seed, probabilities)


def iid_noisy(
    phi: Disjunction,
    rounds: int,
    flip: float,
    seed: int,
    probabilities: Optional[Sequence[float]] = None,
) -> LabeledStream:
    """Like ``iid_realizable`` with each label flipped with probability ``flip``.

    Raises:
        InvalidInstance: If ``flip`` is outside [0, 1/2).
    """
    if not 0.0 <= flip < 0.5:
        raise InvalidInstance(f"Flip probability must lie in [0, 1/2), got {flip}")
    rng = np.random.default_rng(seed)
    xs = _draw_inputs(phi.n, rounds, rng, probabilities)
    flips = rng.random(rounds) < flip
    labels = [evaluate(phi, x) ^ int(f) for x, f in zip(xs.tolist(), flips)]
    kind = "iid-realizable" if flip == 0.0 else f"iid-noisy:{flip}"
    source = f"{kind}(phi={phi},seed={seed})"
    return LabeledStream(phi.n, tuple(map(tuple, xs.tolist())), tuple(labels), source)


def predictions(phi: Disjunction, stream: LabeledStream) -> np.ndarray:
    """phi on every round, vectorized."""
    xs, _ = stream.arrays()
    out = np.zeros(len(stream), dtype=bool)
    if phi.positive:
        out |= xs[:, [i - 1 for i in sorted(phi.positive)]].any(axis=1)
    if phi.negative:
        out |= (~xs[:, [i - 1 for i in sorted(phi.negative)]]).any(axis=1)
    return out


def mistakes(phi: Disjunction, stream: LabeledStream) -> int:
    _, ys = stream.arrays()
    return int(np.count_nonzero(predictions(phi, stream) != ys))


def best_disjunction(stream: LabeledStream) -> Tuple[Disjunction, int]:
    """The disjunction with fewest mistakes; ties go to the smallest (P, N) key.

    Raises:
        TooLarge: If n exceeds the configured limit.
    """
    best: Optional[Tuple[int, Tuple, Disjunction]] = None
    for phi in enumerate_disjunctions(stream.n):
        candidate = (mistakes(phi, stream), phi.key(), phi)
        if best is None or candidate[:2] < best[:2]:
            best = candidate
    assert best is not None
    logger.debug("Best disjunction %s with %d mistakes", best[2], best[0])
    return best[2], best[0]


def parse_stream(lines: Iterable[str], source: str = "inline") -> LabeledStream:
    inputs: List[Bits] = []
    labels: List[int] = []
    n: Optional[int] = None
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        try:
            bits = [int(token) for token in line.split()]
        except ValueError:
            raise InvalidInstance(f"Line {lineno}: expected bits, got {line!r}") from None
        if n is None:
            n = len(bits) - 1
        if len(bits) != n + 1 or n < 0:
            raise InvalidInstance(f"Line {lineno}: expected {n} input bits and a label")
        inputs.append(tuple(bits[:-1]))
        labels.append(bits[-1])
    if n is None:
        raise InvalidInstance("Stream is empty")
    return LabeledStream(n, tuple(inputs), tuple(labels), source)


def load_stream(path: str) -> LabeledStream:
    logger.debug("Loading stream from %s", path)
    with open(path, "r", encoding="utf-8") as f:
        return parse_stream(f, source=f"file:{path}")


def save_stream(stream: LabeledStream, path: str) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for x, y in stream:
            f.write(" ".join(str(b) for b in x + (y,)) + "\n")
