"""Random observables, states and unitaries, and the noise-monotonicity scanner."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .io import povm_from_dict, povm_to_dict
from .linalg import PsdViolationError, psd_inv_sqrt
from .monotonicity import SigmaReport, sigma_report
from .observables import Povm, density_matrix
from .rng import substream

VIOLATION_TOL = 1e-9
BOUNDARY_MIX_RATE = 0.1


def _ginibre(d: int, rng: np.random.Generator) -> np.ndarray:
    return (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2.0)


def random_density(d: int, rng: np.random.Generator) -> np.ndarray:
    """``G G^dagger / Tr[G G^dagger]`` for a complex Ginibre matrix ``G``."""
    g = _ginibre(d, rng)
    rho = g @ g.conj().T
    rho = rho / np.trace(rho).real
    return density_matrix(0.5 * (rho + rho.conj().T))


def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary from the QR decomposition of a Ginibre matrix.

    Each column is rotated so its first nonzero entry is real and positive,
    which makes the output a deterministic representative of ``U T`` for
    diagonal phases ``T``.  Conjugating an observable by ``U`` does not see
    the column phases' effect on spectra.
    """
    q, _ = np.linalg.qr(_ginibre(d, rng))
    for k in range(d):
        col = q[:, k]
        nz = np.flatnonzero(np.abs(col) > 1e-300)
        ph = col[nz[0]] / abs(col[nz[0]])
        q[:, k] = col / ph
        q[nz[0], k] = abs(q[nz[0], k])
    return q


def random_povm(n: int, d: int, rng: np.random.Generator) -> Povm:
    """``A_i = S^{-1/2} G_i S^{-1/2}`` with ``G_i`` Wishart and ``S = sum_i G_i``."""
    if n < 1 or d < 1:
        raise ValueError("n and d must be positive")
    for _attempt in range(2):
        gs = []
        for _ in range(n):
            m = _ginibre(d, rng)
            gs.append(m @ m.conj().T)
        try:
            t = psd_inv_sqrt(sum(gs))
        except PsdViolationError:
            continue
        effects = [t @ g @ t for g in gs]
        return Povm([0.5 * (a + a.conj().T) for a in effects])
    raise PsdViolationError("sum of sampled Wishart matrices was singular twice")


def random_pvm(n: int, d: int, rng: np.random.Generator) -> Povm:
    """PVM with ``n`` outcomes built from the columns of a random unitary.

    With ``n >= d`` the ``d`` rank-one projectors land on random outcomes and the
    rest are zero; with ``n < d`` basis vectors are dealt out so every outcome
    gets at least one.
    """
    u = random_unitary(d, rng)
    if n >= d:
        owners = rng.permutation(n)[:d]
    else:
        owners = rng.permutation(np.arange(d) % n)
    effects = [np.zeros((d, d), dtype=np.complex128) for _ in range(n)]
    for k in range(d):
        effects[owners[k]] += np.outer(u[:, k], u[:, k].conj())
    return Povm(effects)


def scan_sample(n: int, d: int, rng: np.random.Generator) -> Povm:
    """One scanner draw; a fraction of draws is pulled toward a random PVM."""
    povm = random_povm(n, d, rng)
    if rng.random() < BOUNDARY_MIX_RATE:
        w = rng.random()
        pvm = random_pvm(n, d, rng)
        povm = Povm([w * p + (1.0 - w) * a for p, a in zip(pvm, povm)])
    return povm


@dataclass(frozen=True)
class Counterexample:
    n: int
    trial: int
    povm: dict
    sigma: dict


@dataclass
class ScanReport:
    trials: int
    n_values: list[int]
    d: int
    seed: int
    min_sigma_min: float
    min_sigma_min_prime: float
    counterexamples: list[Counterexample] = field(default_factory=list)
    marginal: list[Counterexample] = field(default_factory=list)
    per_n: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "trials": self.trials,
            "n_values": list(self.n_values),
            "d": self.d,
            "seed": self.seed,
            "min_sigma_min": self.min_sigma_min,
            "min_sigma_min_prime": self.min_sigma_min_prime,
            "n_counterexamples": len(self.counterexamples),
            "counterexamples": [c.__dict__ for c in self.counterexamples],
            "marginal": [c.__dict__ for c in self.marginal],
            "per_n": {str(k): v for k, v in self.per_n.items()},
        }


def _scan_chunk(args) -> list[tuple[int, SigmaReport, Povm | None]]:
    seed, n, d, start, stop = args
    out = []
    for t in range(start, stop):
        povm = scan_sample(n, d, substream(seed, n, t))
        sr = sigma_report(povm)
        keep = povm if min(sr.sigma_min, sr.sigma_min_p) < 0.0 else None
        out.append((t, sr, keep))
    return out


def conjecture_scan(
    n_values: Sequence[int],
    trials: int,
    seed: int,
    d: int = 2,
    workers: int = 1,
    chunk: int = 2048,
) -> ScanReport:
    """Sample random observables and report any with a negative monotonicity threshold.

    Trial ``t`` for outcome count ``n`` draws from ``substream(seed, n, t)``, so the
    report does not depend on ``workers``.  Trials whose smaller threshold is in
    ``[-VIOLATION_TOL, 0)`` are listed as ``marginal`` instead of as violations.
    """
    if trials < 1:
        raise ValueError("trials must be positive")
    n_values = [int(n) for n in n_values]
    jobs = [
        (seed, n, d, s, min(s + chunk, trials)) for n in n_values for s in range(0, trials, chunk)
    ]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_scan_chunk, jobs))
    else:
        results = [_scan_chunk(j) for j in jobs]

    report = ScanReport(
        trials=trials, n_values=n_values, d=d, seed=seed,
        min_sigma_min=float("inf"), min_sigma_min_prime=float("inf"),
    )
    for n in n_values:
        report.per_n[n] = {
            "min_sigma_min": float("inf"),
            "min_sigma_min_prime": float("inf"),
            "violations": 0,
            "marginal": 0,
        }
    for (_, n, _, _, _), rows in zip(jobs, results):
        stats = report.per_n[n]
        for t, sr, povm in rows:
            stats["min_sigma_min"] = min(stats["min_sigma_min"], sr.sigma_min)
            stats["min_sigma_min_prime"] = min(stats["min_sigma_min_prime"], sr.sigma_min_p)
            if povm is None:
                continue
            entry = Counterexample(n=n, trial=t, povm=povm_to_dict(povm), sigma=sr.to_dict())
            if sr.sigma_min < -VIOLATION_TOL or sr.sigma_min_p < -VIOLATION_TOL:
                report.counterexamples.append(entry)
                stats["violations"] += 1
            else:
                report.marginal.append(entry)
                stats["marginal"] += 1
    report.min_sigma_min = min(s["min_sigma_min"] for s in report.per_n.values())
    report.min_sigma_min_prime = min(s["min_sigma_min_prime"] for s in report.per_n.values())
    return report


def reverify(entry: Counterexample) -> SigmaReport:
    """Recompute the thresholds of a logged observable from its serialisation."""
    return sigma_report(povm_from_dict(entry.povm))
