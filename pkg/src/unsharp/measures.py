"""Unsharpness measures and the matrices that generate them.

Notation used in names:

* ``e_matrix``  -- sum of squared effects; ``Tr[rho E]`` is the Luders repeat probability.
* ``x_matrix``  -- sum of ``||A_i|| A_i``; ``Tr[rho X]`` is the best repeat probability
  over all compatible instruments.
* ``el``/``elprime`` -- worst-case and state-averaged never-repeat probability with
  the Luders instrument; ``e``/``eprime`` -- the same with the instrument optimised.
* ``f_matrix`` -- the n x n noise matrix of the uncertainty-based approach; ``luo_f``
  is its entrywise l1 norm at the maximally mixed state.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import NamedTuple

import numpy as np

from .linalg import EQ_TOL, lambda_max, lambda_min, trace_norm
from .observables import Povm, density_matrix, is_pvm, maximally_mixed

BOUND_SLACK = 1e-9


class BoundViolationError(RuntimeError):
    """A computed report broke one of the proven inequalities."""


def _check_dims(povm: Povm, rho: np.ndarray) -> np.ndarray:
    rho = density_matrix(rho)
    if rho.shape[0] != povm.dim:
        raise ValueError(f"state has dimension {rho.shape[0]}, POVM has {povm.dim}")
    return rho


def _expect(rho: np.ndarray, m: np.ndarray) -> float:
    return float(np.trace(rho @ m).real)


def _canonical(mats):
    # Summing in a label-independent order keeps every measure exactly
    # invariant under outcome permutations.
    return sorted(mats, key=lambda m: m.tobytes())


def effect_norms(povm: Povm) -> np.ndarray:
    """Operator norm (largest eigenvalue) of every effect."""
    return np.array([lambda_max(a, trusted=True) for a in povm])


def e_matrix(povm: Povm) -> np.ndarray:
    e = sum(_canonical([a @ a for a in povm]))
    return 0.5 * (e + e.conj().T)


def x_matrix(povm: Povm) -> np.ndarray:
    x = sum(_canonical([w * a for w, a in zip(effect_norms(povm), povm)]))
    return 0.5 * (x + x.conj().T)


def el_rho(povm: Povm, rho) -> float:
    """Probability that a Luders measurement outcome does not repeat on ``rho``."""
    rho = _check_dims(povm, rho)
    return 1.0 - _expect(rho, e_matrix(povm))


def el(povm: Povm) -> float:
    """Worst-case never-repeat probability, ``1 - lambda_min(E)``."""
    return 1.0 - lambda_min(e_matrix(povm), trusted=True)


def elprime(povm: Povm) -> float:
    return 1.0 - float(np.trace(e_matrix(povm)).real) / povm.dim


def e_rho(povm: Povm, rho) -> float:
    rho = _check_dims(povm, rho)
    return 1.0 - _expect(rho, x_matrix(povm))


def e(povm: Povm) -> float:
    """Instrument-independent measure ``||I - X|| = 1 - lambda_min(X)``."""
    return 1.0 - lambda_min(x_matrix(povm), trusted=True)


def eprime(povm: Povm) -> float:
    return 1.0 - float(np.trace(x_matrix(povm)).real) / povm.dim


def f_matrix(povm: Povm, rho) -> np.ndarray:
    """Real symmetric ``n x n`` matrix
    ``F_ij = delta_ij Tr[rho A_i] - Tr[rho (A_i A_j + A_j A_i) / 2]``.
    """
    rho = _check_dims(povm, rho)
    n = povm.n
    f = np.empty((n, n))
    for i, ai in enumerate(povm):
        for j in range(i, n):
            aj = povm[j]
            v = -0.5 * _expect(rho, ai @ aj + aj @ ai)
            if i == j:
                v += _expect(rho, ai)
            f[i, j] = f[j, i] = v
    return f


def luo_f(povm: Povm) -> float:
    f = f_matrix(povm, maximally_mixed(povm.dim))
    return math.fsum(np.abs(f).ravel())


class CrossResiduals(NamedTuple):
    trace_vs_el_rho: float
    trace_norm_vs_elprime: float

    def ok(self, tol: float = EQ_TOL) -> bool:
        return max(self) <= tol


def cross_identities(povm: Povm, rho) -> CrossResiduals:
    """Residuals of ``Tr F_rho = el_rho`` and ``||F_{I/d}||_tr = elprime``."""
    f_rho = f_matrix(povm, rho)
    f_mix = f_matrix(povm, maximally_mixed(povm.dim))
    return CrossResiduals(
        abs(float(np.trace(f_rho)) - el_rho(povm, rho)),
        abs(trace_norm(f_mix) - elprime(povm)),
    )


@dataclass(frozen=True)
class MeasureReport:
    n: int
    d: int
    eL: float
    eLprime: float
    e: float
    eprime: float
    luo_f: float
    upper_bound: float
    is_pvm: bool

    def check(self, slack: float = BOUND_SLACK) -> None:
        """Raise :class:`BoundViolationError` if the bound chain is broken."""
        for name in ("eL", "eLprime", "e", "eprime"):
            val = getattr(self, name)
            if not -slack <= val <= self.upper_bound + slack:
                raise BoundViolationError(f"{name}={val!r} outside [0, {self.upper_bound!r}]")
        if self.luo_f < 0:
            raise BoundViolationError("luo_f is negative")
        if self.e > self.eL + slack:
            raise BoundViolationError(f"e={self.e!r} exceeds eL={self.eL!r}")
        if self.eprime > self.e + slack or self.eLprime > self.eL + slack:
            raise BoundViolationError("state average exceeds worst case")

    def to_dict(self) -> dict:
        return asdict(self)


REPORT_KEYS = ("n", "d", "eL", "eLprime", "e", "eprime", "luo_f", "upper_bound", "is_pvm")


def measure_report(povm: Povm) -> MeasureReport:
    report = MeasureReport(
        n=povm.n,
        d=povm.dim,
        eL=el(povm),
        eLprime=elprime(povm),
        e=e(povm),
        eprime=eprime(povm),
        luo_f=luo_f(povm),
        upper_bound=1.0 - 1.0 / povm.n,
        is_pvm=is_pvm(povm),
    )
    report.check()
    return report
