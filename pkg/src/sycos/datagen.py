"""Synthetic relation families and scenario series with known correlated blocks."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .core import ConfigError, DomainError, TimeSeriesPair, Window

# family -> default x range; the independent family draws x and y from normals
RELATIONS: dict[str, Optional[tuple[float, float]]] = {
    "independent": None,
    "linear": (0.0, 10.0),
    "exponential": (-10.0, 10.0),
    "quadratic": (-4.0, 4.0),
    "diamond": (4.0, 8.0),
    "circle": (-3.0, 3.0),
    "sine": (0.0, 10.0),
    "cross": (-5.0, 5.0),
    "quartic": (-1.0, 3.0),
    "sqrt": (0.0, 25.0),
}


@dataclass(frozen=True)
class RelationSpec:
    kind: str
    n: int = 1000
    x_range: Optional[tuple[float, float]] = None
    noise: float = 1.0
    seed: int = 0
    sort_x: bool = True


def _rng(seed: int, tag: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(tag,)))


def generate_relation(spec: RelationSpec) -> TimeSeriesPair:
    """Draw ``n`` samples of one relation family.

    ``u`` is uniform on ``[0, noise)``. Multi-branch families pick a branch
    per sample at random. x is sorted so the pair reads as a sweep over x.
    """
    if spec.kind not in RELATIONS:
        raise ConfigError(f"unknown relation {spec.kind!r}; choose from {sorted(RELATIONS)}")
    if spec.n < 2:
        raise ConfigError("a relation needs at least two samples")
    rng = _rng(spec.seed, 1)
    n = spec.n
    if spec.kind == "independent":
        x = rng.normal(3.0, 5.0, n)
        y = rng.normal(0.0, 1.0, n)
        return TimeSeriesPair(x, y)

    lo, hi = spec.x_range if spec.x_range is not None else RELATIONS[spec.kind]
    if not lo < hi:
        raise DomainError(f"empty x range [{lo}, {hi}]")
    if spec.kind == "sqrt" and lo < 0:
        raise DomainError("sqrt needs x >= 0")
    if spec.kind == "circle" and (lo < -3 or hi > 3):
        raise DomainError("circle needs x within [-3, 3]")
    x = rng.uniform(lo, hi, n)
    if spec.sort_x:
        x.sort()
    u = rng.uniform(0.0, 1.0, n) * spec.noise
    sign = np.where(rng.integers(0, 2, n) == 1, 1.0, -1.0)

    kind = spec.kind
    if kind == "linear":
        y = 2 * x + u
    elif kind == "exponential":
        y = 0.01 ** (x + u)
    elif kind == "quadratic":
        y = x ** 2 + u
    elif kind == "diamond":
        branch = rng.integers(0, 4, n)
        y = np.choose(branch, [x + u, 8 - x + u, -4 + x + u, 12 - x + u])
    elif kind == "circle":
        y = sign * np.sqrt(np.maximum(9 - x ** 2 + u, 0.0))
    elif kind == "sine":
        y = 2 * np.sin(x) + u
    elif kind == "cross":
        y = sign * x + u
    elif kind == "quartic":
        y = x ** 4 - 4 * x ** 3 + 4 * x ** 2 + x + u
    else:  # sqrt is noise-free
        y = np.sqrt(x)
    return TimeSeriesPair(x, y)


@dataclass(frozen=True)
class Block:
    position: int
    length: int
    relation: str = "linear"

    @property
    def window(self) -> Window:
        return Window(self.position, self.position + self.length)


@dataclass(frozen=True)
class ScenarioSpec:
    total_length: int
    blocks: tuple[Block, ...] = ()
    noise: float = 1.0
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "blocks", tuple(sorted(self.blocks, key=lambda b: b.position)))
        for b in self.blocks:
            if b.position < 0 or b.length < 2 or b.position + b.length > self.total_length:
                raise ConfigError(f"block {b} does not fit in {self.total_length} samples")
        for a, b in zip(self.blocks, self.blocks[1:]):
            if a.position + a.length > b.position:
                raise ConfigError(f"blocks {a} and {b} overlap")


def generate_scenario(spec: ScenarioSpec) -> tuple[TimeSeriesPair, list[Window]]:
    """Independent background with relation blocks spliced in.

    Each block is rescaled to the background's mean and spread on both axes so
    it cannot be spotted from amplitude alone.
    """
    rng = _rng(spec.seed, 2)
    n = spec.total_length
    x = rng.normal(0.0, 1.0, n)
    y = rng.normal(0.0, 1.0, n)
    truth = []
    for i, b in enumerate(spec.blocks):
        rel = generate_relation(RelationSpec(b.relation, b.length, noise=spec.noise,
                                             seed=spec.seed * 1_000_003 + i + 1))
        sl = slice(b.position, b.position + b.length)
        x[sl] = _match(rel.x, x)
        y[sl] = _match(rel.y, y)
        truth.append(b.window)
    return TimeSeriesPair(x, y), truth


def _match(v: np.ndarray, ref: np.ndarray) -> np.ndarray:
    s = v.std()
    z = (v - v.mean()) / s if s > 0 else v - v.mean()
    return z * ref.std() + ref.mean()


def dense_scenario(seed: int = 0, relation: str = "linear") -> tuple[TimeSeriesPair, list[Window]]:
    """Three long blocks covering most of 4000 samples."""
    blocks = (Block(200, 800, relation), Block(1500, 800, relation), Block(2900, 800, relation))
    return generate_scenario(ScenarioSpec(4000, blocks, seed=seed))


def sparse_scenario(seed: int = 0, relation: str = "linear") -> tuple[TimeSeriesPair, list[Window]]:
    """Five short blocks scattered over 6000 samples."""
    blocks = tuple(Block(p, 60, relation) for p in (700, 1900, 3100, 4300, 5500))
    return generate_scenario(ScenarioSpec(6000, blocks, seed=seed))


def embedded_block(seed: int = 0, n: int = 4000, start: int = 1000, length: int = 400,
                   relation: str = "linear") -> tuple[TimeSeriesPair, list[Window]]:
    """One correlated block inside an independent background."""
    return generate_scenario(ScenarioSpec(n, (Block(start, length, relation),), seed=seed))
