"""Quantum instruments, sequential-measurement simulation and qubit estimation.

Two instruments are provided for an observable ``A``:

* ``LUDER``: post-state ``sqrt(A_i) rho sqrt(A_i) / Tr[rho A_i]``.  Measuring
  twice repeats the outcome with probability ``Tr[rho E]``.
* ``JMAX``: post-state ``|a_i><a_i|`` where ``a_i`` is a top eigenvector of
  ``A_i``.  Repeat probability is ``Tr[rho X]``, the best any instrument
  compatible with ``A`` can do.

Sampling draws uniforms from :func:`unsharp.rng.substream` in fixed-size shot
blocks, each with its own sub-seed, so counts never depend on how blocks are
scheduled.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .linalg import eig_trusted, psd_sqrt
from .measures import e_matrix, x_matrix
from .observables import Povm, density_matrix
from .rng import substream

ZERO_PROB = 1e-15
SHOT_BLOCK = 1 << 16
# Eigenvalues this close to the top one count as tied for JMax.
TIE_TOL = 1e-12

PROBE_LABELS = ("z+", "z-", "x+", "x-", "y+", "y-")
_S = 1.0 / math.sqrt(2.0)
PROBE_VECTORS = {
    "z+": np.array([1.0, 0.0], dtype=np.complex128),
    "z-": np.array([0.0, 1.0], dtype=np.complex128),
    "x+": np.array([_S, _S], dtype=np.complex128),
    "x-": np.array([_S, -_S], dtype=np.complex128),
    "y+": np.array([_S, 1j * _S], dtype=np.complex128),
    "y-": np.array([_S, -1j * _S], dtype=np.complex128),
}


class InstrumentKind(str, enum.Enum):
    LUDER = "luder"
    JMAX = "jmax"


def _kind(kind) -> InstrumentKind:
    try:
        return InstrumentKind(kind)
    except ValueError:
        raise ValueError(f"unknown instrument {kind!r}; choose 'luder' or 'jmax'") from None


def top_eigenvector(a: np.ndarray) -> np.ndarray:
    """Unit eigenvector of the largest eigenvalue of ``a``.

    When the top eigenvalue is degenerate, the tied eigenvector at the lowest
    position of the ascending decomposition is returned.
    """
    vals, vecs = eig_trusted(np.asarray(a))
    k = int(np.flatnonzero(vals >= vals[-1] - TIE_TOL)[0])
    return vecs[:, k].copy()


def _post_state_unchecked(povm: Povm, i: int, rho: np.ndarray, kind: InstrumentKind):
    a = povm[i]
    p = float(np.real(np.trace(rho @ a)))
    if p <= ZERO_PROB:
        return p, None
    if kind is InstrumentKind.LUDER:
        r = psd_sqrt(a)
        out = r @ rho @ r / p
        return p, 0.5 * (out + out.conj().T)
    v = top_eigenvector(a)
    return p, np.outer(v, v.conj())


def post_state(povm: Povm, i: int, rho, kind=InstrumentKind.LUDER):
    """Probability of outcome ``i`` and the state it leaves behind.

    Returns
    -------
    (float, ndarray or None)
        ``Tr[rho A_i]`` and the normalised post-state; the state is ``None``
        when the probability is at most ``ZERO_PROB``.
    """
    kind = _kind(kind)
    if not 0 <= int(i) < povm.n:
        raise IndexError(f"outcome {i} out of range for {povm.n} outcomes")
    rho = density_matrix(rho)
    return _post_state_unchecked(povm, int(i), rho, kind)


def transition_matrix(povm: Povm, rho, kind=InstrumentKind.LUDER) -> tuple[np.ndarray, np.ndarray]:
    """First-outcome probabilities ``p`` and conditional second-outcome table ``Q``.

    ``Q[i, j]`` is the probability of ``j`` on the post-state of ``i``.  Rows for
    outcomes with ``p_i <= ZERO_PROB`` are left at zero; those outcomes are
    never sampled.
    """
    kind = _kind(kind)
    rho = density_matrix(rho)
    n = povm.n
    p = np.zeros(n)
    q = np.zeros((n, n))
    for i in range(n):
        pi, post = _post_state_unchecked(povm, i, rho, kind)
        if post is None:
            continue
        p[i] = pi
        q[i] = [float(np.real(np.trace(post @ a))) for a in povm]
    # Round-off below ZERO_PROB becomes an exact zero, so sharp observables
    # repeat with certainty rather than with probability 1 - 1e-17.
    q[q <= ZERO_PROB] = 0.0
    return p, q


def repeat_probability_exact(povm: Povm, rho, kind=InstrumentKind.LUDER) -> float:
    """``Tr[rho E]`` for Luder, ``Tr[rho X]`` for JMax."""
    kind = _kind(kind)
    rho = density_matrix(rho)
    m = e_matrix(povm) if kind is InstrumentKind.LUDER else x_matrix(povm)
    return float(np.real(np.trace(rho @ m)))


def _cdf(weights: np.ndarray) -> np.ndarray:
    c = np.cumsum(weights)
    # Force an exact top; zero-weight outcomes keep zero-width intervals.
    return c / c[-1]


@dataclass
class SequentialSample:
    """Counts from ``shots`` double measurements.

    ``joint[i, j]`` counts shots with first outcome ``i`` and second ``j``.
    """

    shots: int
    repeat_count: int
    joint: np.ndarray

    @property
    def first_counts(self) -> np.ndarray:
        return self.joint.sum(axis=1)

    @property
    def frequency(self) -> float:
        return self.repeat_count / self.shots


def _sample_block(p_cdf, q_cdf, n, size, rng) -> np.ndarray:
    u = rng.random((2, size))
    first = np.minimum(np.searchsorted(p_cdf, u[0], side="right"), n - 1)
    rows = q_cdf[first]
    second = np.minimum((u[1][:, None] >= rows).sum(axis=1), n - 1)
    return np.bincount(first * n + second, minlength=n * n).reshape(n, n)


def sample_sequential(
    povm: Povm,
    rho,
    kind=InstrumentKind.LUDER,
    shots: int = 1,
    seed: int = 0,
    *,
    stream_key: tuple[int, ...] = (),
    workers: int = 1,
) -> SequentialSample:
    """Simulate ``shots`` pairs of successive measurements on fresh copies of ``rho``.

    Both outcomes are drawn by inverse-CDF over the ordered outcome list.
    Block ``b`` of ``SHOT_BLOCK`` shots uses ``substream(seed, *stream_key, b)``;
    ``workers`` only changes how blocks are scheduled, never the counts.
    """
    shots = int(shots)
    if shots < 1:
        raise ValueError("shots must be at least 1")
    p, q = transition_matrix(povm, rho, kind)
    n = povm.n
    p_cdf = _cdf(p)
    q_cdf = np.ones((n, n))
    for i in range(n):
        if q[i].sum() > 0.0:
            q_cdf[i] = _cdf(q[i])

    sizes = [SHOT_BLOCK] * (shots // SHOT_BLOCK)
    if shots % SHOT_BLOCK:
        sizes.append(shots % SHOT_BLOCK)

    def run(b: int) -> np.ndarray:
        return _sample_block(p_cdf, q_cdf, n, sizes[b], substream(seed, *stream_key, b))

    if workers > 1 and len(sizes) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, range(len(sizes))))
    else:
        parts = [run(b) for b in range(len(sizes))]
    joint = np.sum(parts, axis=0)
    return SequentialSample(shots=shots, repeat_count=int(np.trace(joint)), joint=joint)


@dataclass
class ExperimentRecord:
    """Outcome of the six-probe qubit protocol.

    The reconstructed matrix is ``[[a, conj(c)], [c, b]]``: the E-matrix for
    the Luder instrument, the X-matrix for JMax.  Only the matching pair of
    ``estimated_*`` fields is set.
    """

    instrument: str
    seed: int
    shots_per_state: dict[str, tuple[int, int]]
    reconstructed_a: float
    reconstructed_b: float
    reconstructed_c: complex
    estimated_eL: Optional[float] = None
    estimated_eLprime: Optional[float] = None
    estimated_e: Optional[float] = None
    estimated_eprime: Optional[float] = None
    extra: dict = field(default_factory=dict)

    def matrix(self) -> np.ndarray:
        a, b, c = self.reconstructed_a, self.reconstructed_b, self.reconstructed_c
        return np.array([[a, np.conj(c)], [c, b]], dtype=np.complex128)

    def to_dict(self) -> dict:
        out = {
            "instrument": self.instrument,
            "seed": self.seed,
            "shots_per_state": {
                k: {"n_shots": n, "repeat_count": r} for k, (n, r) in self.shots_per_state.items()
            },
            "reconstructed_a": self.reconstructed_a,
            "reconstructed_b": self.reconstructed_b,
            "reconstructed_c_re": float(self.reconstructed_c.real),
            "reconstructed_c_im": float(self.reconstructed_c.imag),
        }
        for name in ("estimated_eL", "estimated_eLprime", "estimated_e", "estimated_eprime"):
            value = getattr(self, name)
            if value is not None:
                out[name] = value
        return out


def reconstruct_2x2(freq: dict[str, float]) -> tuple[float, float, complex]:
    """Matrix entries from repeat frequencies on the z+, z-, x+ and y+ probes.

    For ``M = [[a, conj(c)], [c, b]]`` the repeat probabilities are
    ``<z+|M|z+> = a``, ``<z-|M|z-> = b``, ``<x+|M|x+> = (a + b)/2 + Re c`` and
    ``<y+|M|y+> = (a + b)/2 + Im c``.
    """
    a, b = freq["z+"], freq["z-"]
    mid = (a + b) / 2.0
    return a, b, complex(freq["x+"] - mid, freq["y+"] - mid)


def worst_and_average(a: float, b: float, c: complex) -> tuple[float, float]:
    """``1 - lambda_min`` and ``1 - trace/2`` of ``[[a, conj(c)], [c, b]]``."""
    disc = math.sqrt((a - b) ** 2 + 4.0 * abs(c) ** 2)
    return 1.0 - ((a + b) - disc) / 2.0, 1.0 - (a + b) / 2.0


def _run_protocol(povm: Povm, kind: InstrumentKind, shots_per_probe: int, seed: int, workers: int):
    if povm.dim != 2:
        raise ValueError(f"qubit protocol needs d = 2, got d = {povm.dim}")
    counts = {}
    for k, label in enumerate(PROBE_LABELS):
        v = PROBE_VECTORS[label]
        res = sample_sequential(
            povm, np.outer(v, v.conj()), kind, shots_per_probe, seed,
            stream_key=(k,), workers=workers,
        )
        counts[label] = (res.shots, res.repeat_count)
    freq = {label: r / n for label, (n, r) in counts.items()}
    a, b, c = reconstruct_2x2(freq)
    return counts, a, b, c


def estimate_qubit_e_matrix(povm: Povm, shots_per_probe: int, seed: int, workers: int = 1) -> ExperimentRecord:
    """Estimate the Luder measures of a qubit observable from repeat statistics alone.

    Probe ``k`` in ``PROBE_LABELS`` order samples with ``stream_key=(k,)``.
    """
    counts, a, b, c = _run_protocol(povm, InstrumentKind.LUDER, shots_per_probe, seed, workers)
    worst, avg = worst_and_average(a, b, c)
    return ExperimentRecord(
        instrument=InstrumentKind.LUDER.value, seed=seed, shots_per_state=counts,
        reconstructed_a=a, reconstructed_b=b, reconstructed_c=c,
        estimated_eL=worst, estimated_eLprime=avg,
    )


def estimate_qubit_x_matrix(povm: Povm, shots_per_probe: int, seed: int, workers: int = 1) -> ExperimentRecord:
    """The same protocol with the JMax instrument, estimating ``e`` and ``eprime``."""
    counts, a, b, c = _run_protocol(povm, InstrumentKind.JMAX, shots_per_probe, seed, workers)
    worst, avg = worst_and_average(a, b, c)
    return ExperimentRecord(
        instrument=InstrumentKind.JMAX.value, seed=seed, shots_per_state=counts,
        reconstructed_a=a, reconstructed_b=b, reconstructed_c=c,
        estimated_e=worst, estimated_eprime=avg,
    )
