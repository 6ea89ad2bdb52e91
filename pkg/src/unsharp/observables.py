"""POVMs, density matrices, and the transformations applied to observables."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .linalg import (
    EQ_TOL,
    PSD_TOL,
    LinalgError,
    as_hermitian,
    as_matrix,
    is_unitary,
    lambda_min,
)

COMPLETENESS_TOL = 1e-9
PVM_TOL = 1e-9


class InvalidPovmError(ValueError):
    """The effects do not form a valid observable."""


class EffectNotPsdError(InvalidPovmError):
    def __init__(self, index: int, lam: float):
        self.index = index
        self.lambda_min = lam
        super().__init__(f"effect {index} is not PSD (lambda_min = {lam:.6e})")


class CompletenessError(InvalidPovmError):
    def __init__(self, deviation: float, entry: tuple[int, int]):
        self.deviation = deviation
        self.entry = entry
        super().__init__(
            f"completeness violated: max |sum_i A_i - I| = {deviation:.6e} at entry {entry}"
        )


class InvalidStateError(ValueError):
    pass


def _frozen(m: np.ndarray) -> np.ndarray:
    m = np.array(m, dtype=np.complex128)
    m.setflags(write=False)
    return m


@dataclass(frozen=True, eq=False)
class Povm:
    """An ordered list of effects on a ``dim``-dimensional space.

    Construction validates every invariant; instances are immutable.  Labels
    are cosmetic and never enter any measure.
    """

    effects: tuple[np.ndarray, ...]
    labels: tuple[str, ...]

    def __init__(self, effects: Iterable, labels: Sequence[str] | None = None):
        mats = []
        for k, e in enumerate(effects):
            try:
                mats.append(as_hermitian(e))
            except LinalgError as exc:
                raise InvalidPovmError(f"effect {k}: {exc}") from None
        if not mats:
            raise InvalidPovmError("a POVM needs at least one effect")
        d = mats[0].shape[0]
        for k, m in enumerate(mats):
            if m.shape != (d, d):
                raise InvalidPovmError(f"effect {k} has shape {m.shape}, expected {(d, d)}")
        for k, m in enumerate(mats):
            lam = lambda_min(m, trusted=True)
            if lam < -PSD_TOL:
                raise EffectNotPsdError(k, lam)
        dev = np.abs(sum(mats) - np.eye(d))
        worst = float(dev.max())
        if worst > COMPLETENESS_TOL:
            j, k = np.unravel_index(int(np.argmax(dev)), dev.shape)
            raise CompletenessError(worst, (int(j), int(k)))
        if labels is None:
            labels = [str(i + 1) for i in range(len(mats))]
        labels = tuple(str(x) for x in labels)
        if len(labels) != len(mats):
            raise InvalidPovmError(f"{len(labels)} labels for {len(mats)} effects")
        object.__setattr__(self, "effects", tuple(_frozen(m) for m in mats))
        object.__setattr__(self, "labels", labels)

    @property
    def n(self) -> int:
        return len(self.effects)

    @property
    def dim(self) -> int:
        return self.effects[0].shape[0]

    def __len__(self) -> int:
        return len(self.effects)

    def __iter__(self):
        return iter(self.effects)

    def __getitem__(self, i: int) -> np.ndarray:
        return self.effects[i]

    def __repr__(self) -> str:
        return f"Povm(n={self.n}, dim={self.dim}, labels={list(self.labels)})"


def validate_povm(effects: Iterable, labels: Sequence[str] | None = None) -> Povm:
    """Build a :class:`Povm`, raising :class:`InvalidPovmError` on any violation."""
    return Povm(effects, labels)


def density_matrix(m) -> np.ndarray:
    """Validate a density matrix: Hermitian, PSD within ``PSD_TOL``, unit trace."""
    try:
        rho = as_hermitian(m)
    except LinalgError as exc:
        raise InvalidStateError(str(exc)) from None
    tr = float(np.trace(rho).real)
    if abs(tr - 1.0) > EQ_TOL:
        raise InvalidStateError(f"trace is {tr!r}, expected 1")
    lam = lambda_min(rho, trusted=True)
    if lam < -PSD_TOL:
        raise InvalidStateError(f"state is not PSD (lambda_min = {lam:.6e})")
    return rho


def maximally_mixed(d: int) -> np.ndarray:
    return np.eye(d, dtype=np.complex128) / d


def pure_state(vec) -> np.ndarray:
    v = np.asarray(vec, dtype=np.complex128).ravel()
    v = v / np.linalg.norm(v)
    return np.outer(v, v.conj())


def is_pvm(povm: Povm, tol: float = PVM_TOL) -> bool:
    return all(float(np.max(np.abs(a @ a - a))) <= tol for a in povm)


def trivial_observable(n: int, d: int) -> Povm:
    """The maximally unsharp observable: ``n`` copies of ``I/n``."""
    if n < 1 or d < 1:
        raise ValueError("n and d must be positive")
    return Povm([np.eye(d) / n] * n)


def projective_measurement(basis) -> Povm:
    """Rank-one PVM onto the columns of a unitary ``basis``."""
    u = as_matrix(basis)
    if not is_unitary(u):
        raise ValueError("basis is not unitary")
    return Povm([np.outer(u[:, k], u[:, k].conj()) for k in range(u.shape[1])])


def computational_pvm(d: int) -> Povm:
    return projective_measurement(np.eye(d))


def conjugate_by_unitary(povm: Povm, u) -> Povm:
    """Heisenberg-picture rotation ``A_i -> U^dagger A_i U``."""
    u = as_matrix(u)
    if u.shape[0] != povm.dim:
        raise ValueError(f"unitary has dimension {u.shape[0]}, POVM has {povm.dim}")
    if not is_unitary(u):
        raise ValueError("U is not unitary within tolerance")
    ud = u.conj().T
    return Povm([ud @ a @ u for a in povm], povm.labels)


def _check_unit_interval(name: str, value: float) -> float:
    value = float(value)
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {value!r}")
    return value


def fuzzify_white_noise(povm: Povm, lam: float) -> Povm:
    """Mix every effect with white noise: ``lam * A_i + (1 - lam) * I / n``."""
    lam = _check_unit_interval("lambda", lam)
    noise = (1.0 - lam) * np.eye(povm.dim) / povm.n
    return Povm([lam * a + noise for a in povm], povm.labels)


def coarse_grain(povm: Povm, partition: Sequence[Iterable[int]]) -> Povm:
    """Merge outcomes block-wise; ``partition`` holds 0-based outcome indices.

    Every outcome must appear in exactly one block.
    """
    blocks = [sorted(int(i) for i in block) for block in partition]
    seen = sorted(i for block in blocks for i in block)
    if any(not block for block in blocks) or seen != list(range(povm.n)):
        raise ValueError(f"partition {blocks} does not cover outcomes 0..{povm.n - 1} exactly once")
    effects = [sum(povm[i] for i in block) for block in blocks]
    labels = ["+".join(povm.labels[i] for i in block) for block in blocks]
    return Povm(effects, labels)


def convex_combine(a: Povm, b: Povm, lam: float) -> Povm:
    lam = _check_unit_interval("lambda", lam)
    if a.n != b.n or a.dim != b.dim:
        raise ValueError(f"shape mismatch: (n={a.n}, d={a.dim}) vs (n={b.n}, d={b.dim})")
    return Povm([lam * x + (1.0 - lam) * y for x, y in zip(a, b)], a.labels)


def depolarize_dual(povm: Povm, t: float) -> Povm:
    """Dual of the depolarising channel acting on each effect.

    ``A_i -> t A_i + (1 - t) Tr[A_i] I / d``; for rank-one projectors this is
    ``t A_i + (1 - t) I / d``.
    """
    t = _check_unit_interval("t", t)
    d = povm.dim
    return Povm([t * a + (1.0 - t) * np.trace(a).real * np.eye(d) / d for a in povm], povm.labels)


def relabel(povm: Povm, order: Sequence[int]) -> Povm:
    """Reorder outcomes: outcome ``k`` of the result is outcome ``order[k]`` of ``povm``."""
    order = [int(i) for i in order]
    if sorted(order) != list(range(povm.n)):
        raise ValueError("order must be a permutation of the outcome indices")
    return Povm([povm[i] for i in order], [povm.labels[i] for i in order])
