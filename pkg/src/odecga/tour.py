"""Hamiltonian circuits kept in both visiting-order and predecessor form."""

from __future__ import annotations

from collections.abc import Iterable, Sequence

import numpy as np

from .instance_io import AtspInstance

__all__ = [
    "Tour",
    "TourError",
    "tour_length",
    "make_tour",
    "tour_from_succ",
    "random_tour",
    "arc_set",
    "normalize_order",
    "trusted_tour",
]


class TourError(ValueError):
    """Raised when a vertex sequence is not a Hamiltonian circuit."""


def _readonly(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


class Tour:
    """Immutable tour; ``order`` always starts at vertex 0.

    Build instances with :func:`make_tour` (validating) rather than calling
    the constructor directly.
    """

    __slots__ = ("order", "pred", "succ", "length", "_key")

    def __init__(self, order: np.ndarray, length: int) -> None:
        n = len(order)
        pred = np.empty(n, dtype=np.int64)
        succ = np.empty(n, dtype=np.int64)
        pred[order[1:]] = order[:-1]
        pred[order[0]] = order[-1]
        succ[order[:-1]] = order[1:]
        succ[order[-1]] = order[0]
        self.order = _readonly(order)
        self.pred = _readonly(pred)
        self.succ = _readonly(succ)
        self.length = int(length)
        self._key = order.tobytes()

    @property
    def n(self) -> int:
        return len(self.order)

    def arcs(self) -> list[tuple[int, int]]:
        order = self.order.tolist()
        return list(zip(order, order[1:] + order[:1]))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Tour):
            return NotImplemented
        return self._key == other._key

    def __hash__(self) -> int:
        return hash(self._key)

    def __lt__(self, other: Tour) -> bool:
        # orders by length, then lexicographically by normalized order
        return (self.length, self.order.tolist()) < (other.length, other.order.tolist())

    def __repr__(self) -> str:
        body = self.order.tolist()
        if len(body) > 12:
            body = body[:12] + ["..."]
        return f"Tour(length={self.length}, order={body})"


def normalize_order(order: Sequence[int] | np.ndarray) -> np.ndarray:
    order = np.asarray(order, dtype=np.int64)
    k = int(np.argmin(order))
    return order if k == 0 else np.concatenate((order[k:], order[:k]))


def tour_length(instance: AtspInstance, order: Sequence[int] | np.ndarray) -> int:
    order = np.asarray(order, dtype=np.int64)
    return int(instance.cost[order[:-1], order[1:]].sum() + instance.cost[order[-1], order[0]])


def make_tour(instance: AtspInstance, order: Iterable[int]) -> Tour:
    """Validate a visiting sequence and return the normalized :class:`Tour`."""
    seq = np.asarray(list(order), dtype=np.int64)
    n = instance.n
    if len(seq) != n:
        raise TourError(f"wrong count: expected {n} vertices, got {len(seq)}")
    if len(seq) and (seq.min() < 0 or seq.max() >= n):
        bad = int(seq[(seq < 0) | (seq >= n)][0])
        raise TourError(f"vertex {bad} out of range")
    seen = np.zeros(n, dtype=bool)
    for v in seq.tolist():
        if seen[v]:
            raise TourError(f"duplicate vertex {v}")
        seen[v] = True
    order = normalize_order(seq)
    return Tour(order, tour_length(instance, order))


def tour_from_succ(instance: AtspInstance, succ: Sequence[int] | np.ndarray) -> Tour:
    """Build a tour from a successor array, rejecting subtours."""
    succ = np.asarray(succ, dtype=np.int64)
    n = instance.n
    if len(succ) != n:
        raise TourError(f"wrong count: expected {n} vertices, got {len(succ)}")
    order = np.empty(n, dtype=np.int64)
    v = 0
    for k in range(n):
        order[k] = v
        v = int(succ[v])
        if v == 0 and k < n - 1:
            raise TourError("successor array contains a subtour")
    if v != 0:
        raise TourError("successor array is not a single circuit")
    return make_tour(instance, order)


def random_tour(instance: AtspInstance, seed: int | np.random.Generator) -> Tour:
    rng = np.random.default_rng(seed)
    return make_tour(instance, rng.permutation(instance.n))


def arc_set(tour: Tour) -> set[tuple[int, int]]:
    return set(tour.arcs())


def trusted_tour(instance: AtspInstance, order: np.ndarray, length: int | None = None) -> Tour:
    """Skip validation; for orders produced by the package's own kernels."""
    order = normalize_order(order)
    return Tour(order, tour_length(instance, order) if length is None else length)
