"""Domain types, dataset validation, and the seeded random-stream registry.

All types are immutable after construction and safe to share across
concurrent prediction workers. Every random draw anywhere in the package
flows from a single 64-bit master seed through keyed stream splitting
(`spawn_rng`), so any experiment cell is reproducible from its labels.
"""

import hashlib
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Dataset",
    "Neighborhood",
    "KernelParams",
    "BoundaryParams",
    "Posterior",
    "validate_dataset",
    "derive_seed",
    "spawn_rng",
    "DimensionMismatchError",
    "NonFiniteValueError",
    "EmptyDatasetError",
    "KOutOfRangeError",
    "NotPositiveDefiniteError",
    "OptimizationFailedError",
    "EmptySameSideWarning",
]


class DimensionMismatchError(ValueError):
    """Array shapes are inconsistent with each other or with p."""


class NonFiniteValueError(ValueError):
    """A value that must be finite is NaN or infinite."""


class EmptyDatasetError(ValueError):
    """A dataset with zero observations was supplied."""


class KOutOfRangeError(ValueError):
    """Requested neighborhood size violates 1 <= k <= N."""


class NotPositiveDefiniteError(np.linalg.LinAlgError):
    """Covariance matrix failed Cholesky even after the jitter policy."""


class OptimizationFailedError(RuntimeError):
    """The objective was non-finite at the starting point or every probe."""


class EmptySameSideWarning(RuntimeWarning):
    """Boundary left no neighbors on the test point's side; prior used."""


@dataclass(frozen=True)
class Dataset:
    """Training corpus: N input points in R^p with scalar noisy responses.

    Parameters
    ----------
    inputs : array, shape (N, p)
        Input coordinates, one row per observation.
    responses : array, shape (N,)
        Observed scalar responses.
    """

    inputs: np.ndarray
    responses: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "inputs", np.asarray(self.inputs))
        object.__setattr__(self, "responses", np.asarray(self.responses))

    @property
    def n(self) -> int:
        return self.inputs.shape[0]

    @property
    def p(self) -> int:
        return self.inputs.shape[1] if self.inputs.ndim == 2 else 0


@dataclass(frozen=True)
class Neighborhood:
    """A test location with the indices of its k nearest training points.

    `indices` index into a `Dataset` and are ordered by ascending distance
    to `center`, ties broken by ascending dataset index.
    """

    center: np.ndarray
    indices: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float))
        object.__setattr__(self, "indices", np.asarray(self.indices, dtype=np.intp))

    @property
    def k(self) -> int:
        return self.indices.shape[0]


@dataclass(frozen=True)
class KernelParams:
    """Parameters of one stationary GP component.

    `signal_variance` and `noise_variance` are in squared response units,
    `lengthscales` (one per input dimension) in input units, and `mean` is
    the constant process mean in response units.
    """

    signal_variance: float
    lengthscales: np.ndarray
    noise_variance: float
    mean: float = 0.0

    def __post_init__(self):
        ls = np.atleast_1d(np.asarray(self.lengthscales, dtype=float))
        object.__setattr__(self, "lengthscales", ls)
        object.__setattr__(self, "signal_variance", float(self.signal_variance))
        object.__setattr__(self, "noise_variance", float(self.noise_variance))
        object.__setattr__(self, "mean", float(self.mean))

    @property
    def p(self) -> int:
        return self.lengthscales.shape[0]

    def validate(self):
        vals = [self.signal_variance, self.noise_variance, self.mean]
        if not np.all(np.isfinite(vals)) or not np.all(np.isfinite(self.lengthscales)):
            raise NonFiniteValueError("kernel parameters must be finite")
        if self.signal_variance <= 0:
            raise ValueError("signal_variance must be positive")
        if np.any(self.lengthscales <= 0):
            raise ValueError("every lengthscale must be positive")
        if self.noise_variance < 0:
            raise ValueError("noise_variance must be non-negative")


@dataclass(frozen=True)
class BoundaryParams:
    """Coefficients of the local linear boundary beta[0] + x . beta[1:] = 0.

    beta[0] is the intercept; beta[1:] is the normal direction.
    """

    beta: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "beta", np.asarray(self.beta, dtype=float))

    @property
    def p(self) -> int:
        return self.beta.shape[0] - 1

    def validate(self):
        if not np.all(np.isfinite(self.beta)):
            raise NonFiniteValueError("boundary coefficients must be finite")
        if not np.any(self.beta[1:] != 0.0):
            raise ValueError("boundary normal direction must be nonzero")


@dataclass(frozen=True)
class Posterior:
    """Predictive distribution of the latent value at one test location."""

    mean: float
    variance: float

    @property
    def sd(self) -> float:
        return float(np.sqrt(self.variance))


def validate_dataset(d: Dataset) -> None:
    """Raise unless `d` satisfies all dataset invariants.

    Raises
    ------
    DimensionMismatchError
        Inputs are not a 2-D numeric array of consistent width, or the
        number of responses differs from the number of input rows.
    EmptyDatasetError
        The dataset has no observations.
    NonFiniteValueError
        Any coordinate or response is NaN or infinite.
    """
    x, y = d.inputs, d.responses
    if x.ndim != 2 or x.dtype == object:
        raise DimensionMismatchError(
            "inputs must be a 2-D array with one fixed-width row per point"
        )
    if y.ndim != 1 or y.dtype == object:
        raise DimensionMismatchError("responses must be a 1-D numeric array")
    if x.shape[0] != y.shape[0]:
        raise DimensionMismatchError(
            f"{x.shape[0]} input rows but {y.shape[0]} responses"
        )
    if x.shape[0] == 0:
        raise EmptyDatasetError("dataset has no observations")
    if not np.all(np.isfinite(x)):
        raise NonFiniteValueError("non-finite value in inputs")
    if not np.all(np.isfinite(y)):
        raise NonFiniteValueError("non-finite value in responses")


def derive_seed(master_seed: int, *tags) -> int:
    """Derive a 64-bit child seed from a master seed and a label path.

    Tags may be ints, floats, or strings; they are canonicalized before
    hashing, so the same (seed, labels) pair yields the same child seed on
    every platform and run.
    """
    h = hashlib.blake2b(digest_size=8)
    h.update(b"seed:" + str(int(master_seed)).encode())
    for t in tags:
        if isinstance(t, (bool, np.bool_)):
            part = b"b:" + (b"1" if t else b"0")
        elif isinstance(t, (int, np.integer)):
            part = b"i:" + str(int(t)).encode()
        elif isinstance(t, (float, np.floating)):
            part = b"f:" + repr(float(t)).encode()
        elif isinstance(t, str):
            part = b"s:" + t.encode()
        else:
            raise TypeError(f"unsupported seed tag type: {type(t)!r}")
        h.update(b"\x00" + part)
    return int.from_bytes(h.digest(), "little")


def spawn_rng(master_seed: int, *tags) -> np.random.Generator:
    """Independent counter-based random stream for the given label path."""
    key = derive_seed(master_seed, *tags)
    return np.random.Generator(np.random.Philox(key=key))
