"""Behaviour of the measures under white-noise fuzzification.

The Luders measures obey exact lambda-scaling laws and are monotone for every
observable.  For the instrument-independent measures the scaling law picks up
an additive ``gamma(A, lambda)`` and monotonicity holds exactly when the
smallest eigenvalue of the X-matrix (or its normalised trace, for the
averaged measure) clears a threshold; :func:`sigma_report` computes those
quantities.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import NamedTuple, Sequence

import numpy as np

from . import measures
from .linalg import lambda_min
from .observables import Povm, fuzzify_white_noise

MONOTONE_TOL = 1e-12


def _check_lambda(lam: float) -> float:
    lam = float(lam)
    if not 0.0 <= lam <= 1.0:
        raise ValueError(f"lambda must lie in [0, 1], got {lam!r}")
    return lam


def gamma(povm: Povm, lam: float) -> float:
    """Additive shift in ``I - X`` after mixing in white noise at weight ``1 - lam``.

    ``((1 - lam) / n) * ((n - 1) + lam * (n - sum_i ||A_i||))``; non-negative
    because every effect norm is at most one.
    """
    lam = _check_lambda(lam)
    n = povm.n
    total = float(np.sum(measures.effect_norms(povm)))
    return (1.0 - lam) / n * ((n - 1) + lam * (n - total))


class ScalingResiduals(NamedTuple):
    eL: float
    eLprime: float
    e: float
    eprime: float


def scaling_law_residuals(povm: Povm, lam: float) -> ScalingResiduals:
    """Compare measure-after-fuzzify against the closed-form lambda laws."""
    lam = _check_lambda(lam)
    fuzzy = fuzzify_white_noise(povm, lam)
    bound = 1.0 - 1.0 / povm.n
    lam2 = lam * lam
    g = gamma(povm, lam)
    return ScalingResiduals(
        eL=abs(measures.el(fuzzy) - (lam2 * measures.el(povm) + (1.0 - lam2) * bound)),
        eLprime=abs(measures.elprime(fuzzy) - (lam2 * measures.elprime(povm) + (1.0 - lam2) * bound)),
        e=abs(measures.e(fuzzy) - (lam2 * measures.e(povm) + g)),
        eprime=abs(measures.eprime(fuzzy) - (lam2 * measures.eprime(povm) + g)),
    )


@dataclass(frozen=True)
class SigmaReport:
    """Threshold quantities deciding monotonicity of ``e`` and ``eprime``.

    ``sigma1 - lambda * sigma2`` (times ``1 - lambda``) is the change in ``e``
    when white noise of weight ``1 - lambda`` is added; the primed version does
    the same for ``eprime``.
    """

    sigma1: float
    sigma2: float
    sigma_min: float
    sigma1p: float
    sigma2p: float
    sigma_min_p: float
    x_min: float
    sum_effect_norms: float

    def to_dict(self) -> dict:
        return asdict(self)


def sigma_report(povm: Povm) -> SigmaReport:
    n, d = povm.n, povm.dim
    x = measures.x_matrix(povm)
    x_min = lambda_min(x, trusted=True)
    x_avg = float(np.trace(x).real) / d
    total = float(np.sum(measures.effect_norms(povm)))
    s1 = x_min - 1.0 / n
    s2 = total / n - x_min
    s1p = x_avg - 1.0 / n
    s2p = total / n - x_avg
    return SigmaReport(
        sigma1=s1,
        sigma2=s2,
        sigma_min=s1 - s2,
        sigma1p=s1p,
        sigma2p=s2p,
        sigma_min_p=s1p - s2p,
        x_min=x_min,
        sum_effect_norms=total,
    )


def monotone_under_noise(povm: Povm, tol: float = MONOTONE_TOL) -> tuple[bool, bool]:
    """Whether ``e`` and ``eprime`` are non-decreasing under white noise, for all lambda."""
    sr = sigma_report(povm)
    return sr.sigma_min >= -tol, sr.sigma_min_p >= -tol


# Two-outcome qubit observables {W, I - W} with W = diag(w1, w2), w1 >= w2.

def _sigma_min_case_one(w1: float, w2: float) -> float:
    # w1 + w2 >= 1: the smaller X eigenvalue is w1*w2 + (1 - w2)^2.
    return 1.0 - 4.0 * w2 + 2.0 * w2 * w2 + 2.0 * w1 * w2 - (w1 - w2) / 2.0


def _sigma_min_case_two(w1: float, w2: float) -> float:
    # w1 + w2 <= 1: the smaller X eigenvalue is w1^2 + (1 - w1)(1 - w2).
    return 1.0 + 2.0 * w1 * w1 + 2.0 * w1 * w2 - 2.0 * (w1 + w2) - (w1 - w2) / 2.0


def _sigma_min_prime(w1: float, w2: float) -> float:
    return w1 * w1 + w1 * w2 + (1.0 - w2) * (2.0 - w1 - w2) - 1.0 - (w1 - w2) / 2.0


class DichotomicSigma(NamedTuple):
    sigma_min: float
    sigma_min_prime: float
    case: str


def dichotomic_sigma_closed_form(omega1: float, omega2: float) -> DichotomicSigma:
    """Closed-form thresholds for ``W = diag(omega1, omega2)``, ``omega1 >= omega2``."""
    w1, w2 = float(omega1), float(omega2)
    if not 0.0 <= w2 <= w1 <= 1.0:
        raise ValueError(f"need 0 <= omega2 <= omega1 <= 1, got ({w1!r}, {w2!r})")
    if w1 + w2 >= 1.0:
        return DichotomicSigma(_sigma_min_case_one(w1, w2), _sigma_min_prime(w1, w2), "I")
    return DichotomicSigma(_sigma_min_case_two(w1, w2), _sigma_min_prime(w1, w2), "II")


def dichotomic_povm(omega1: float, omega2: float, basis=None) -> Povm:
    """``{W, I - W}`` with ``W`` having eigenvalues ``omega1, omega2``.

    ``basis`` (a 2x2 unitary) rotates the eigenvectors away from the
    computational basis.
    """
    w = np.diag([float(omega1), float(omega2)]).astype(np.complex128)
    if basis is not None:
        u = np.asarray(basis, dtype=np.complex128)
        w = u @ w @ u.conj().T
    return Povm([w, np.eye(2) - w])


class GridPoint(NamedTuple):
    omega1: float
    omega2: float
    sigma_min: float
    sigma_min_prime: float
    case: str


@dataclass(frozen=True)
class GridScan:
    resolution: int
    points: tuple[GridPoint, ...]
    min_sigma_min: float
    min_sigma_min_prime: float
    argmin_sigma_min: tuple[float, float]
    argmin_sigma_min_prime: tuple[float, float]
    seam_max_gap: float


def dichotomic_grid_scan(resolution: int) -> GridScan:
    """Evaluate the closed forms on a uniform grid of ``0 <= omega2 <= omega1 <= 1``.

    Points on the seam ``omega1 + omega2 = 1`` are evaluated with both case
    formulas; ``seam_max_gap`` is their largest disagreement.
    """
    r = int(resolution)
    if r < 2:
        raise ValueError("resolution must be at least 2")
    top = r - 1
    points = []
    seam_gap = 0.0
    for i in range(r):
        w1 = i / top
        for j in range(i + 1):
            w2 = j / top
            sp = _sigma_min_prime(w1, w2)
            if i + j >= top:
                sm, case = _sigma_min_case_one(w1, w2), "I"
                if i + j == top:
                    seam_gap = max(seam_gap, abs(sm - _sigma_min_case_two(w1, w2)))
            else:
                sm, case = _sigma_min_case_two(w1, w2), "II"
            points.append(GridPoint(w1, w2, sm, sp, case))
    k = min(range(len(points)), key=lambda t: points[t].sigma_min)
    kp = min(range(len(points)), key=lambda t: points[t].sigma_min_prime)
    return GridScan(
        resolution=r,
        points=tuple(points),
        min_sigma_min=points[k].sigma_min,
        min_sigma_min_prime=points[kp].sigma_min_prime,
        argmin_sigma_min=(points[k].omega1, points[k].omega2),
        argmin_sigma_min_prime=(points[kp].omega1, points[kp].omega2),
        seam_max_gap=seam_gap,
    )


@dataclass(frozen=True)
class SweepRecord:
    lam: float
    eL: float
    eLprime: float
    e: float
    eprime: float
    gamma: float

    def to_dict(self) -> dict:
        # "lambda" is the public column name.
        d = asdict(self)
        d["lambda"] = d.pop("lam")
        return {k: d[k] for k in SWEEP_COLUMNS}


SWEEP_COLUMNS = ("lambda", "eL", "eLprime", "e", "eprime", "gamma")
GRID_COLUMNS = ("omega1", "omega2", "sigma_min", "sigma_min_prime")


def lambda_sweep(povm: Povm, lambdas: Sequence[float]) -> list[SweepRecord]:
    """Measures of the fuzzified observable for each ``lambda``, largest first."""
    lams = sorted((_check_lambda(x) for x in lambdas), reverse=True)
    out = []
    for lam in lams:
        fuzzy = fuzzify_white_noise(povm, lam)
        out.append(
            SweepRecord(
                lam=lam,
                eL=measures.el(fuzzy),
                eLprime=measures.elprime(fuzzy),
                e=measures.e(fuzzy),
                eprime=measures.eprime(fuzzy),
                gamma=gamma(povm, lam),
            )
        )
    return out


def sweep_decreases(records: Sequence[SweepRecord], field: str, tol: float = 1e-10) -> list[float]:
    """Lambdas at which ``field`` dropped by more than ``tol`` relative to the previous record.

    Records are ordered by decreasing lambda, so a monotone measure never drops.
    """
    drops = []
    for prev, cur in zip(records, records[1:]):
        if getattr(cur, field) < getattr(prev, field) - tol:
            drops.append(cur.lam)
    return drops
