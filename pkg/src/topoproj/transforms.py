"""Random projection operators and their target-dimension formulas.

Two operator families are provided:

* dense Gaussian matrices, with entry scale either ``1/E_m`` (the expected
  norm of an m-dimensional standard Gaussian; the default) or ``1/sqrt(m)``;
* subsampled orthonormal-with-random-signs (SORS) operators built from the
  orthonormal Hadamard transform, applied in ``O(d log d)`` via an in-place
  fast Walsh-Hadamard butterfly.

Target dimensions are computed from the Gaussian width of the normalized
difference set of the data, not from the number of points.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .core import (
    DimensionMismatch,
    NotPowerOfTwo,
    ParamOutOfRange,
    PointCloud,
    RngSeed,
    substream,
)

GAUSSIAN_DENSE = "gaussian"
SORS = "sors"

INVERSE_EM = "inverse_em"
INVERSE_SQRT_M = "inverse_sqrt_m"

# Stream tags keep operator coefficients independent of other sampling
# done with the same user seed.
_GAUSS_TAG = 0x6741
_SORS_TAG = 0x5350


def em_constant(m: int) -> float:
    """Expected Euclidean norm of a standard Gaussian vector in R^m.

    Computed through log-gamma differences so it does not overflow for
    large m. Satisfies ``m/sqrt(m+1) <= E_m <= sqrt(m)``.
    """
    if m < 1:
        raise ParamOutOfRange(f"m must be >= 1, got {m}")
    return math.sqrt(2.0) * math.exp(math.lgamma((m + 1) / 2.0) - math.lgamma(m / 2.0))


def target_dim_gaussian(width: float, eps: float, delta: float) -> int:
    """Smallest m with m >= (width + sqrt(2 ln(2/delta)))^2 / eps^2 + 1.

    ``width`` is the Gaussian width of the normalized difference set of the
    data; with this m, a Gaussian operator preserves all pairwise distances
    within a 1 +/- eps factor with probability at least 1 - delta.
    """
    if width < 0 or not np.isfinite(width):
        raise ParamOutOfRange(f"width must be finite and >= 0, got {width}")
    if not 0 < eps < 1:
        raise ParamOutOfRange(f"eps must lie in (0,1), got {eps}")
    if not 0 < delta < 1:
        raise ParamOutOfRange(f"delta must lie in (0,1), got {delta}")
    rhs = (width + math.sqrt(2.0 * math.log(2.0 / delta))) ** 2 / eps**2 + 1.0
    return max(1, math.ceil(rhs))


@dataclass(frozen=True)
class SorsParams:
    """Knobs of the SORS dimension bound.

    ``delta_bound`` is the entry bound of the underlying unitary times
    sqrt(d) (1 for the Hadamard matrix); ``rip_constant`` is the leading
    constant of the bound, which the theory leaves unspecified.
    """

    delta_bound: float = 1.0
    rip_constant: float = 1.0

    def __post_init__(self) -> None:
        if self.delta_bound <= 0 or self.rip_constant <= 0:
            raise ParamOutOfRange("delta_bound and rip_constant must be positive")


class SorsDim(NamedTuple):
    m: int
    saturated: bool
    formula_m: int  # the unclamped ceiling, before saturating at d


def target_dim_sors(
    width: float, eps: float, delta: float, d: float, params: SorsParams | None = None
) -> SorsDim:
    """Target dimension for a SORS operator.

    Evaluates ``C * Delta^2 * (1 + ln(1/delta))^2 * ln(d)^4 * width^2 / eps^2``
    and returns its ceiling, floored at 1. A result above d is clamped to d
    and flagged as saturated (projecting cannot use more rows than exist).
    ``d`` may be fractional; only its logarithm enters the formula.
    """
    if params is None:
        params = SorsParams()
    if width < 0 or not np.isfinite(width):
        raise ParamOutOfRange(f"width must be finite and >= 0, got {width}")
    if not 0 < eps < 1:
        raise ParamOutOfRange(f"eps must lie in (0,1), got {eps}")
    if not 0 < delta < 1:
        raise ParamOutOfRange(f"delta must lie in (0,1), got {delta}")
    if d < 2:
        raise ParamOutOfRange(f"d must be >= 2, got {d}")
    rhs = (
        params.rip_constant
        * params.delta_bound**2
        * (1.0 + math.log(1.0 / delta)) ** 2
        * math.log(d) ** 4
        * width**2
        / eps**2
    )
    m = max(1, math.ceil(rhs))
    if m > d:
        return SorsDim(int(d), True, m)
    return SorsDim(m, False, m)


def is_power_of_two(d: int) -> bool:
    return d >= 1 and (d & (d - 1)) == 0


def next_power_of_two(d: int) -> int:
    if d < 1:
        raise ParamOutOfRange(f"d must be >= 1, got {d}")
    return 1 << (d - 1).bit_length()


def fwht_in_place(v: np.ndarray) -> np.ndarray:
    """Orthonormal fast Walsh-Hadamard transform, in place.

    Replaces ``v`` with ``H v`` where H is the orthonormal Hadamard matrix,
    using O(d log2 d) butterfly operations. H is symmetric and orthogonal,
    so applying the transform twice recovers the input. Requires a length
    that is a power of two.
    """
    v = np.asarray(v)
    if v.dtype != np.float64:
        raise ParamOutOfRange("fwht_in_place operates on float64 arrays")
    d = v.shape[-1]
    if not is_power_of_two(d):
        raise NotPowerOfTwo(f"length must be a power of two, got {d}")
    _butterfly(v.reshape(-1, d))
    v *= 1.0 / math.sqrt(d)
    return v


def _butterfly(rows: np.ndarray) -> None:
    # Unnormalized in-place butterflies over the last axis of an (r, d) array.
    d = rows.shape[1]
    h = 1
    while h < d:
        blocks = rows.reshape(rows.shape[0], -1, 2, h)
        a = blocks[:, :, 0, :].copy()
        b = blocks[:, :, 1, :]
        blocks[:, :, 0, :] = a + b
        blocks[:, :, 1, :] = a - b
        h *= 2


@dataclass(frozen=True)
class ProjectionOperator:
    """A tagged random projection, reconstructible from its descriptor.

    Coefficient data (the Gaussian matrix, or the SORS sign vector and row
    subset) is derived deterministically from ``(variant, m, d, seed)`` and
    never serialized. Operators are immutable and safe to share.
    """

    variant: str
    m: int
    d: int
    seed: RngSeed
    scale_mode: str | None = None
    _gauss: np.ndarray | None = field(default=None, repr=False, compare=False)
    _signs: np.ndarray | None = field(default=None, repr=False, compare=False)
    _rows: np.ndarray | None = field(default=None, repr=False, compare=False)

    def to_json(self) -> str:
        return json.dumps(
            {
                "variant": self.variant,
                "m": self.m,
                "d": self.d,
                "seed": int(self.seed),
                "scale_mode": self.scale_mode,
            }
        )

    @staticmethod
    def from_json(doc: str) -> "ProjectionOperator":
        spec = json.loads(doc)
        if spec["variant"] == GAUSSIAN_DENSE:
            return make_gaussian_op(spec["m"], spec["d"], spec["seed"], spec["scale_mode"])
        if spec["variant"] == SORS:
            return make_sors_op(spec["m"], spec["d"], spec["seed"])
        raise ParamOutOfRange(f"unknown operator variant {spec['variant']!r}")


def make_gaussian_op(
    m: int, d: int, seed: RngSeed, scale_mode: str = INVERSE_EM
) -> ProjectionOperator:
    """Dense m x d Gaussian operator, deterministic in (m, d, seed).

    Entries are i.i.d. normal with standard deviation ``1/E_m`` under
    ``inverse_em`` (default) or ``1/sqrt(m)`` under ``inverse_sqrt_m``.
    m may exceed d: the width-based sizing formulas are independent of the
    ambient dimension and can legitimately ask for more rows than columns.
    """
    if m < 1 or d < 1:
        raise ParamOutOfRange(f"need m >= 1 and d >= 1, got m={m}, d={d}")
    if scale_mode not in (INVERSE_EM, INVERSE_SQRT_M):
        raise ParamOutOfRange(f"unknown scale_mode {scale_mode!r}")
    sigma = 1.0 / em_constant(m) if scale_mode == INVERSE_EM else 1.0 / math.sqrt(m)
    rng = substream(seed, _GAUSS_TAG, m, d)
    coeffs = rng.standard_normal((m, d)) * sigma
    coeffs.setflags(write=False)
    return ProjectionOperator(GAUSSIAN_DENSE, m, d, seed, scale_mode, _gauss=coeffs)


def make_sors_op(m: int, d: int, seed: RngSeed) -> ProjectionOperator:
    """SORS operator: random signs, Hadamard transform, m uniformly sampled rows.

    Rows are sampled without replacement. Requires d to be a power of two;
    deterministic in (m, d, seed). With m = d the operator is an isometry.
    """
    if not is_power_of_two(d):
        raise NotPowerOfTwo(f"SORS requires a power-of-two dimension, got {d}")
    if not 1 <= m <= d:
        raise ParamOutOfRange(f"need 1 <= m <= d, got m={m}, d={d}")
    rng = substream(seed, _SORS_TAG, m, d)
    signs = (rng.integers(0, 2, size=d) * 2 - 1).astype(np.float64)
    rows = np.sort(rng.choice(d, size=m, replace=False))
    signs.setflags(write=False)
    rows.setflags(write=False)
    return ProjectionOperator(SORS, m, d, seed, None, _signs=signs, _rows=rows)


def sors_dense_matrix(op: ProjectionOperator) -> np.ndarray:
    """Explicit m x d matrix of a SORS operator (test/debug oracle; O(m d^2))."""
    if op.variant != SORS:
        raise ParamOutOfRange("not a SORS operator")
    eye = np.eye(op.d)
    return np.stack([apply_op(op, eye[j]) for j in range(op.d)], axis=1)


def _apply_rows(op: ProjectionOperator, rows: np.ndarray) -> np.ndarray:
    if op.variant == GAUSSIAN_DENSE:
        return rows @ op._gauss.T
    flipped = rows * op._signs
    _butterfly(flipped)
    flipped *= 1.0 / math.sqrt(op.d)
    return flipped[:, op._rows] * math.sqrt(op.d / op.m)


def apply_op(op: ProjectionOperator, x: np.ndarray) -> np.ndarray:
    """Apply the operator to one vector of length op.d.

    Dense Gaussian costs O(md); SORS costs O(d log d) through the butterfly,
    followed by gathering the sampled rows and rescaling by sqrt(d/m).
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] != op.d:
        raise DimensionMismatch(f"expected a vector of length {op.d}, got shape {x.shape}")
    return _apply_rows(op, x.reshape(1, -1).copy())[0]


def project_cloud(op: ProjectionOperator, cloud: PointCloud) -> PointCloud:
    """Project every point of the cloud; preserves point count and labels.

    For SORS operators whose dimension is the next power of two above the
    cloud's, points are zero-padded first; padding leaves norms and pairwise
    distances unchanged.
    """
    pts = cloud.points
    if cloud.d != op.d:
        if op.variant == SORS and op.d == next_power_of_two(cloud.d) and op.d > cloud.d:
            padded = np.zeros((cloud.n, op.d))
            padded[:, : cloud.d] = pts
            pts = padded
        else:
            raise DimensionMismatch(
                f"cloud dimension {cloud.d} does not match operator dimension {op.d}"
            )
    return PointCloud(_apply_rows(op, np.array(pts, dtype=np.float64)), labels=cloud.labels)
