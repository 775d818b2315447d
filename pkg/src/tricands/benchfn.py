"""Deterministic synthetic objectives on coded inputs in the unit box.

Standard global-optimization test functions in their usual forms (see e.g.
https://www.sfu.ca/~ssurjano/optimization.html), wrapped so that every
benchmark takes coded inputs in [0,1]^d and decodes to its native domain
internally.  Known minima are recorded in coded units so best-observed-value
traces are directly comparable across strategies.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DimensionMismatch


@dataclass(frozen=True)
class Benchmark:
    """A named objective with its dimension and (if known) global minimum."""

    name: str
    d: int
    evaluate: Callable
    known_min_location: np.ndarray | None = None
    known_min_value: float | None = None

    def __call__(self, x) -> float:
        x = np.asarray(x, dtype=float).ravel()
        if x.shape[0] != self.d:
            raise DimensionMismatch(
                f"{self.name} expects d={self.d}, got {x.shape[0]}"
            )
        return float(self.evaluate(x))


def _decode(x, lo: float, hi: float) -> np.ndarray:
    return lo + (hi - lo) * np.asarray(x, dtype=float)


def goldstein_price_raw(x) -> float:
    """Goldstein-Price on coded [0,1]^2, native domain [-2,2]^2 (min 3)."""
    x1, x2 = _decode(x, -2.0, 2.0)
    a = 1.0 + (x1 + x2 + 1.0) ** 2 * (
        19.0 - 14.0 * x1 + 3.0 * x1**2 - 14.0 * x2 + 6.0 * x1 * x2 + 3.0 * x2**2
    )
    b = 30.0 + (2.0 * x1 - 3.0 * x2) ** 2 * (
        18.0 - 32.0 * x1 + 12.0 * x1**2 + 48.0 * x2 - 36.0 * x1 * x2 + 27.0 * x2**2
    )
    return float(a * b)


def goldstein_price(x) -> float:
    """Log-rescaled Goldstein-Price, the variant common in BO benchmarking.

    (log f - 8.693) / 2.427 tames the ten-orders-of-magnitude output range;
    the global minimum moves to (log 3 - 8.693) / 2.427 at coded (0.5, 0.25).
    """
    return (np.log(goldstein_price_raw(x)) - 8.693) / 2.427


_HARTMANN6_ALPHA = np.array([1.0, 1.2, 3.0, 3.2])
_HARTMANN6_A = np.array(
    [
        [10.0, 3.0, 17.0, 3.5, 1.7, 8.0],
        [0.05, 10.0, 17.0, 0.1, 8.0, 14.0],
        [3.0, 3.5, 1.7, 10.0, 17.0, 8.0],
        [17.0, 8.0, 0.05, 10.0, 0.1, 14.0],
    ]
)
_HARTMANN6_P = 1e-4 * np.array(
    [
        [1312, 1696, 5569, 124, 8283, 5886],
        [2329, 4135, 8307, 3736, 1004, 9991],
        [2348, 1451, 3522, 2883, 3047, 6650],
        [4047, 8828, 8732, 5743, 1091, 381],
    ]
)


def hartmann6(x) -> float:
    """Six-dimensional Hartmann function; native domain is already [0,1]^6."""
    x = np.asarray(x, dtype=float)
    inner = (_HARTMANN6_A * (x[None, :] - _HARTMANN6_P) ** 2).sum(axis=1)
    return float(-(_HARTMANN6_ALPHA * np.exp(-inner)).sum())


def michalewicz(x, m: int = 10) -> float:
    """Michalewicz function (steepness m=10), native domain [0, pi]^d."""
    z = _decode(x, 0.0, np.pi)
    i = np.arange(1, z.size + 1)
    return float(-(np.sin(z) * np.sin(i * z**2 / np.pi) ** (2 * m)).sum())


def levy(x) -> float:
    """Levy function in arbitrary dimension, native domain [-10, 10]^d."""
    z = _decode(x, -10.0, 10.0)
    w = 1.0 + (z - 1.0) / 4.0
    head = np.sin(np.pi * w[0]) ** 2
    mid = ((w[:-1] - 1.0) ** 2 * (1.0 + 10.0 * np.sin(np.pi * w[:-1] + 1.0) ** 2)).sum()
    tail = (w[-1] - 1.0) ** 2 * (1.0 + np.sin(2.0 * np.pi * w[-1]) ** 2)
    return float(head + mid + tail)


def gramacy_lee_2d(x) -> float:
    """2d Gramacy & Lee function x1*exp(-x1^2-x2^2), native [-2, 6]^2.

    Flat almost everywhere; a local max and the global min sit together in
    the low-x1 quadrant.
    """
    x1, x2 = _decode(x, -2.0, 6.0)
    return float(x1 * np.exp(-x1**2 - x2**2))


_REGISTRY = {
    "goldstein-price": Benchmark(
        name="goldstein-price",
        d=2,
        evaluate=goldstein_price,
        known_min_location=np.array([0.5, 0.25]),
        known_min_value=(np.log(3.0) - 8.693) / 2.427,
    ),
    "goldstein-price-raw": Benchmark(
        name="goldstein-price-raw",
        d=2,
        evaluate=goldstein_price_raw,
        known_min_location=np.array([0.5, 0.25]),
        known_min_value=3.0,
    ),
    "hartmann6": Benchmark(
        name="hartmann6",
        d=6,
        evaluate=hartmann6,
        known_min_location=np.array(
            [0.20169, 0.150011, 0.476874, 0.275332, 0.311652, 0.6573]
        ),
        known_min_value=-3.32237,
    ),
    "michalewicz4": Benchmark(
        name="michalewicz4",
        d=4,
        evaluate=michalewicz,
        known_min_location=None,
        known_min_value=None,
    ),
    "levy5": Benchmark(
        name="levy5",
        d=5,
        evaluate=levy,
        known_min_location=np.full(5, 0.55),
        known_min_value=0.0,
    ),
    "gramacy-lee-2d": Benchmark(
        name="gramacy-lee-2d",
        d=2,
        evaluate=gramacy_lee_2d,
        known_min_location=np.array([(2.0 - np.sqrt(0.5)) / 8.0, 0.25]),
        known_min_value=-np.sqrt(0.5) * np.exp(-0.5),
    ),
}


def get_benchmark(name: str) -> Benchmark:
    try:
        return _REGISTRY[name]
    except KeyError:
        raise KeyError(
            f"unknown benchmark {name!r}; known: {', '.join(sorted(_REGISTRY))}"
        ) from None


def list_benchmarks() -> list:
    return sorted(_REGISTRY)
