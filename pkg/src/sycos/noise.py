"""Noise predicate for adjacent windows.

A short segment ``ext`` next to a window ``base`` is treated as noise when it
carries almost no dependence on its own and appending it drags the MI of the
combined window below that of ``base``. Mixing a dependent pair with
independent contaminants scales the MI by the mixing weights, which is what
makes the drop a useful signal.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .core import ContractError, DomainError, InsufficientSamplesError, TimeSeriesPair, Window
from .engine import Evaluator


@dataclass(frozen=True)
class NoiseVerdict:
    is_noise: bool
    i_candidate: float
    i_base: float
    i_mixture: float
    tau: float


def verdict(i_candidate: float, i_base: float, i_mixture: float, tau: float) -> NoiseVerdict:
    """Apply the predicate to precomputed normalized MI values.

    The base gate is ``i_base > tau``: a base that is itself below the noise
    level cannot vouch for anything else.
    """
    is_noise = i_candidate < tau and i_mixture < i_base and i_base > tau
    return NoiseVerdict(is_noise, i_candidate, i_base, i_mixture, tau)


def check_noise(pair: TimeSeriesPair, base: Window, ext: Window, tau: float, k: int = 4,
                evaluator: Optional[Evaluator] = None, lazy: bool = True) -> NoiseVerdict:
    """Normalized-MI noise test of ``ext`` against the adjacent ``base``.

    With an evaluator, ``base`` and the mixture go through it (cached and
    possibly incremental) while the short ``ext`` is estimated from scratch.
    With ``lazy`` the conjunction stops at the first failing term; values
    that were never needed are reported as NaN.
    """
    if base.end == ext.start:
        mixture = Window(base.start, ext.end)
    elif ext.end == base.start:
        mixture = Window(ext.start, base.end)
    else:
        raise ContractError(f"{base} and {ext} are not adjacent")
    if base.size <= k or ext.size <= k:
        raise InsufficientSamplesError(f"both windows need more than k={k} samples")
    ev = evaluator if evaluator is not None else Evaluator(pair, k, incremental=False)
    ev.stats.noise_checks += 1
    nan = float("nan")
    i_base = ev.evaluate(base).normalized
    if lazy and not i_base > tau:
        return NoiseVerdict(False, nan, i_base, nan, tau)
    i_mix = ev.evaluate(mixture).normalized
    if lazy and not i_mix < i_base:
        return NoiseVerdict(False, nan, i_base, i_mix, tau)
    i_ext = ev.evaluate(ext, scratch=True).normalized
    return verdict(i_ext, i_base, i_mix, tau)


def mixture_mi_prediction(i_xy: float, theta: float, eta: float) -> float:
    """MI of the mixture when X is kept with probability theta and Y with eta."""
    for name, v in (("theta", theta), ("eta", eta)):
        if not 0.0 <= v <= 1.0:
            raise DomainError(f"{name} must lie in [0, 1], got {v}")
    return theta * eta * i_xy
