"""Fusion-center reconstruction from (location, bit) pairs.

The coefficient estimate for basis function j is the importance-weighted
bit average  (c/n) * sum_i conj(phi_j(X_i)) * B_i / p_X(X_i).  It touches
only the sensor locations, the transmitted bits, and the known dynamic
range c — never the raw samples, the noise law, or the thresholds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import ClassVar

import numpy as np

from .fields import Basis, synthesize
from .sensing import Deployment, SensorBatch

_CHUNK = 1 << 16


class EstimationError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# truncation schedules
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TruncationSchedule:
    """Rule m(n) mapping sensor count to reconstruction dimension.

    kinds: fixed (constant m), finite_dim (m = k), bv (m = ceil(sqrt(n))),
    sobolev (m = ceil(n^(1/(2s+1)))), power (m = ceil(n^psi)).
    """

    schedule_kind: str
    param: float | None = None

    _KINDS: ClassVar[tuple[str, ...]] = ("fixed", "finite_dim", "bv", "sobolev", "power")

    def __post_init__(self):
        if self.schedule_kind not in self._KINDS:
            raise ValueError(f"unknown schedule kind {self.schedule_kind!r}")
        if self.schedule_kind == "bv":
            if self.param is not None:
                raise ValueError("bv schedule takes no parameter")
        elif self.schedule_kind in ("fixed", "finite_dim"):
            if self.param is None or self.param < 1 or self.param != int(self.param):
                raise ValueError("need a positive integer parameter")
        elif self.schedule_kind == "sobolev":
            if self.param is None or self.param <= 0.5:
                raise ValueError("smoothness order must exceed 1/2")
        elif self.schedule_kind == "power":
            if self.param is None or not 0.0 < self.param <= 1.0:
                raise ValueError("exponent must lie in (0, 1]")

    @classmethod
    def fixed(cls, m: int) -> "TruncationSchedule":
        return cls("fixed", m)

    @classmethod
    def finite_dim(cls, k: int) -> "TruncationSchedule":
        return cls("finite_dim", k)

    @classmethod
    def bv(cls) -> "TruncationSchedule":
        return cls("bv")

    @classmethod
    def sobolev(cls, s: float) -> "TruncationSchedule":
        return cls("sobolev", s)

    @classmethod
    def power(cls, psi: float) -> "TruncationSchedule":
        return cls("power", psi)

    def resolve(self, n: int) -> int:
        if n < 1:
            raise ValueError("sensor count must be >= 1")
        if self.schedule_kind in ("fixed", "finite_dim"):
            return int(self.param)
        if self.schedule_kind == "bv":
            exponent = 0.5
        elif self.schedule_kind == "sobolev":
            exponent = 1.0 / (2.0 * self.param + 1.0)
        else:
            exponent = self.param
        # round before ceil: n**(1/3) can land at 3.0000000000000004
        return max(1, math.ceil(round(n ** exponent, 9)))

    def to_json(self) -> dict:
        doc = {"kind": self.schedule_kind}
        if self.param is not None:
            key = {"fixed": "m", "finite_dim": "k", "sobolev": "s", "power": "psi"}
            doc[key[self.schedule_kind]] = self.param
        return doc

    @classmethod
    def from_json(cls, doc: dict) -> "TruncationSchedule":
        kind = doc["kind"]
        param = doc.get("m", doc.get("k", doc.get("s", doc.get("psi"))))
        return cls(kind, param)


def truncation_schedule(schedule: TruncationSchedule, n: int) -> int:
    """Resolved truncation point m(n)."""
    return schedule.resolve(n)


# ---------------------------------------------------------------------------
# coefficient estimation and synthesis
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EstimatorConfig:
    """Everything the fusion center knows: basis, deployment density
    evaluator, dynamic range, and the truncation rule."""

    basis: Basis
    density: Deployment
    c: float
    schedule: TruncationSchedule

    def __post_init__(self):
        if self.c <= 0:
            raise ValueError("dynamic range must be positive")


@dataclass(frozen=True, eq=False)
class ReconstructionCoefficients:
    values: np.ndarray
    n_used: int

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=np.complex128))

    def __len__(self) -> int:
        return len(self.values)

    def to_json(self) -> dict:
        return {"n_used": self.n_used,
                "values": [[v.real, v.imag] for v in self.values]}


def weighted_basis_sums(basis: Basis, m: int, x: np.ndarray,
                        w: np.ndarray) -> np.ndarray:
    """sum_i w_i * conj(phi_j(x_i)) for j < m, compensated across chunks.

    Chunk partials come from the basis's dedicated reduction (or a BLAS
    product as fallback); a Kahan correction across chunk totals keeps
    the accumulated rounding O(1) in n.
    """
    fast = getattr(basis, "weighted_conj_sums", None)
    chunk = _CHUNK if fast else max(1, min(_CHUNK, (1 << 21) // max(m, 1)))
    acc = np.zeros(m, dtype=np.complex128)
    comp = np.zeros(m, dtype=np.complex128)
    for lo in range(0, len(x), chunk):
        xs, ws = x[lo:lo + chunk], w[lo:lo + chunk]
        if fast is not None:
            part = fast(m, xs, ws)
        elif np.iscomplexobj(ws):
            part = ws @ np.conj(basis.block(m, xs))
        else:
            part = np.conj(ws @ basis.block(m, xs))
        y = part - comp
        t = acc + y
        comp = (t - acc) - y
        acc = t
    return acc


def estimate_coefficients(batch: SensorBatch, cfg: EstimatorConfig,
                          m: int) -> ReconstructionCoefficients:
    """First m coefficient estimates from one sensor batch."""
    if m < 1:
        raise ValueError("need at least one coefficient")
    if batch.n < 1:
        raise ValueError("empty batch")
    p = np.asarray(cfg.density.pdf(batch.x), dtype=float)
    if np.any(p <= 0.0):
        where = batch.x[np.argmax(p <= 0.0)]
        raise EstimationError(
            f"deployment density vanishes at observed location x={where!r}")
    sums = weighted_basis_sums(cfg.basis, m, batch.x, batch.bits / p)
    return ReconstructionCoefficients(values=(cfg.c / batch.n) * sums,
                                      n_used=batch.n)


def reconstruct(coeffs: ReconstructionCoefficients, basis: Basis, x):
    """Field estimate sum_{j<m} alpha_hat_j phi_j(x); complex-valued."""
    return synthesize(basis, coeffs.values, np.asarray(x, dtype=float))
