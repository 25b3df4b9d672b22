"""
Slow, obviously correct reference implementations the vectorized code is checked against.
"""
from __future__ import annotations

import math
from typing import Sequence

import numpy as np


def loop_wave_function(points: Sequence[Sequence[float]], sigma: float, x: Sequence[float]) -> float:
    total = 0.0
    for p in points:
        dist2 = sum((a - b) ** 2 for a, b in zip(x, p))
        total += math.exp(-dist2 / (2 * sigma ** 2))
    return total


def loop_potential(points: Sequence[Sequence[float]], sigma: float, x: Sequence[float]) -> float:
    """One pass over the data accumulating the kernel sum and the distance weighted kernel sum."""
    sum1 = 0.0
    sum2 = 0.0
    for p in points:
        dist2 = sum((a - b) ** 2 for a, b in zip(x, p))
        e = math.exp(-dist2 / (2 * sigma ** 2))
        sum1 += e
        sum2 += dist2 * e
    return sum2 / (2 * sigma ** 2 * sum1)


class UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, i: int) -> int:
        while self.parent[i] != i:
            self.parent[i] = self.parent[self.parent[i]]
            i = self.parent[i]
        return i

    def union(self, i: int, j: int):
        ri, rj = self.find(i), self.find(j)
        if ri != rj:
            self.parent[max(ri, rj)] = min(ri, rj)


def union_find_labels(points: np.ndarray, radius: float) -> list[int]:
    """Labels numbered by first appearance, linking every pair closer than `radius`."""
    n = len(points)
    uf = UnionFind(n)
    for i in range(n):
        for j in range(i + 1, n):
            if float(np.sum((points[i] - points[j]) ** 2)) <= radius ** 2:
                uf.union(i, j)
    names: dict[int, int] = {}
    return [names.setdefault(uf.find(i), len(names)) for i in range(n)]


def histogram_mode(points: np.ndarray, num_bins: int) -> float:
    """Center of the fullest bin, bins closed on the right and ties going to the lower bin."""
    distances = []
    for i in range(len(points)):
        for j in range(i + 1, len(points)):
            diff = [float(a) - float(b) for a, b in zip(points[i], points[j])]
            distances.append(math.sqrt(sum(c * c for c in diff)))
    width = max(distances) / num_bins
    counts = [0] * num_bins
    for dist in distances:
        counts[min(max(math.ceil(dist / width) - 1, 0), num_bins - 1)] += 1
    top = counts.index(max(counts))
    edges = np.linspace(0.0, max(distances), num_bins + 1)
    return float((edges[top] + edges[top + 1]) / 2)


def grid_search_minimum(f, lo: float, hi: float, step: float) -> float:
    xs = np.arange(lo, hi + step / 2, step)
    return float(xs[int(np.argmin([f(x) for x in xs]))])


def gradient_flow(field, x0: Sequence[float], step: float = 0.05, tol: float = 1e-8, max_steps: int = 50000):
    """Explicit Euler on the potential in units of sigma, every move at most `step` sigmas long."""
    sigma = field.sigma
    x = np.array(x0, dtype=float)
    for _ in range(max_steps):
        g = sigma * field.potential_gradient(x)
        norm = float(np.linalg.norm(g))
        if norm <= tol:
            break
        x = x - sigma * min(step, step / norm) * g
    return x
