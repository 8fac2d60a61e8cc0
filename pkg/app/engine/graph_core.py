"""
Graphes finis, arêtes orientées et graphe « cerf-volant » des arêtes orientées.

Un graphe est immuable après construction. L'orientation canonique de chaque
arête est (min, max) ; B⃗ est trié lexicographiquement, ce qui rend les
sorties reproductibles octet pour octet.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable

import numpy as np

from app.engine.errors import InvalidInputError, InvalidSizeError


# ═══════════════════════════════════════════════════════════════════════════════
# TYPES
# ═══════════════════════════════════════════════════════════════════════════════

@dataclass(frozen=True)
class OrientedEdge:
    """Arête orientée (tail, head). `id` indexe B⃗ (ou son renversé si is_reversed)."""

    tail: int
    head: int
    id: int
    is_reversed: bool = False

    def reversal(self) -> OrientedEdge:
        return OrientedEdge(self.head, self.tail, self.id, not self.is_reversed)


@dataclass(frozen=True)
class Graph:
    n_vertices: int
    edges: tuple[tuple[int, int], ...]
    origin: int = 0
    kind: str = "custom"
    side: int | None = None
    dim: int | None = None

    @classmethod
    def from_edges(
        cls,
        n_vertices: int,
        edges: Iterable[tuple[int, int]],
        origin: int = 0,
        kind: str = "custom",
        side: int | None = None,
        dim: int | None = None,
    ) -> Graph:
        """Valide et normalise une liste d'arêtes non orientées."""
        n = int(n_vertices)
        if n < 1:
            raise InvalidSizeError("Le graphe doit avoir au moins un sommet.")
        seen: set[tuple[int, int]] = set()
        for u, v in edges:
            u, v = int(u), int(v)
            if not (0 <= u < n and 0 <= v < n):
                raise InvalidInputError(f"Arête ({u}, {v}) hors de 0..{n - 1}.")
            if u == v:
                raise InvalidInputError(f"Boucle interdite sur le sommet {u}.")
            key = (min(u, v), max(u, v))
            if key in seen:
                raise InvalidInputError(f"Arête multiple {key}.")
            seen.add(key)
        if not 0 <= origin < n:
            raise InvalidInputError(f"Origine {origin} hors du graphe.")
        g = cls(n, tuple(sorted(seen)), int(origin), kind, side, dim)
        if np.any(g.distances < 0):
            raise InvalidInputError("Le graphe doit être connexe.")
        return g

    # ─── structure dérivée (calculée une fois) ─────────────────────────────

    @cached_property
    def oriented_edges(self) -> tuple[OrientedEdge, ...]:
        return tuple(OrientedEdge(u, v, i) for i, (u, v) in enumerate(self.edges))

    @cached_property
    def adjacency(self) -> tuple[tuple[int, ...], ...]:
        nbrs: list[list[int]] = [[] for _ in range(self.n_vertices)]
        for u, v in self.edges:
            nbrs[u].append(v)
            nbrs[v].append(u)
        return tuple(tuple(sorted(a)) for a in nbrs)

    @cached_property
    def degrees(self) -> np.ndarray:
        return np.array([len(a) for a in self.adjacency], dtype=np.int64)

    @cached_property
    def degree_bound(self) -> int:
        return int(self.degrees.max()) if self.n_vertices else 0

    @cached_property
    def tails(self) -> np.ndarray:
        return np.array([u for u, _ in self.edges], dtype=np.int64)

    @cached_property
    def heads(self) -> np.ndarray:
        return np.array([v for _, v in self.edges], dtype=np.int64)

    @cached_property
    def distances(self) -> np.ndarray:
        """|x| : distance de graphe à l'origine (BFS). -1 si non atteint."""
        dist = np.full(self.n_vertices, -1, dtype=np.int64)
        dist[self.origin] = 0
        queue = deque([self.origin])
        while queue:
            u = queue.popleft()
            for v in self.adjacency[u]:
                if dist[v] < 0:
                    dist[v] = dist[u] + 1
                    queue.append(v)
        return dist

    @cached_property
    def vertex_edges(self) -> tuple[np.ndarray, np.ndarray]:
        """(indices d'arêtes, signes sgn_x) par sommet, complétés à degree_bound.

        Les cases de complément ont le signe 0 et pointent sur l'arête 0.
        """
        d = self.degree_bound
        idx = np.zeros((self.n_vertices, d), dtype=np.int64)
        sgn_ = np.zeros((self.n_vertices, d), dtype=np.float64)
        fill = np.zeros(self.n_vertices, dtype=np.int64)
        for i, (u, v) in enumerate(self.edges):
            idx[u, fill[u]], sgn_[u, fill[u]] = i, -1.0
            fill[u] += 1
            idx[v, fill[v]], sgn_[v, fill[v]] = i, 1.0
            fill[v] += 1
        return idx, sgn_

    @cached_property
    def padded_neighbors(self) -> np.ndarray:
        """Voisins par sommet, complétés par -1 (auto-boucle) jusqu'à degree_bound."""
        out = np.full((self.n_vertices, self.degree_bound), -1, dtype=np.int64)
        for x, nbrs in enumerate(self.adjacency):
            out[x, : len(nbrs)] = nbrs
        return out

    def label(self) -> str:
        return self.kind

    def are_neighbors(self, x: int, y: int) -> bool:
        return y in self.adjacency[x]

    def check_vertex(self, x: int, name: str = "x") -> int:
        if not 0 <= int(x) < self.n_vertices:
            raise InvalidInputError(f"Sommet {name}={x} hors de 0..{self.n_vertices - 1}.")
        return int(x)


# ═══════════════════════════════════════════════════════════════════════════════
# CONSTRUCTEURS
# ═══════════════════════════════════════════════════════════════════════════════

def build_cycle(n: int) -> Graph:
    """Cycle à n sommets (substitut fini de ℤ)."""
    n = int(n)
    if n < 3:
        raise InvalidSizeError(f"Un cycle demande n >= 3 (reçu {n}) : arêtes multiples sinon.")
    return Graph.from_edges(n, [(i, (i + 1) % n) for i in range(n)], kind="cycle", side=n, dim=1)


def build_torus(side: int, dim: int) -> Graph:
    """Tore (ℤ/side·ℤ)^dim, indexation ligne par ligne."""
    side, dim = int(side), int(dim)
    if side < 3:
        raise InvalidSizeError(f"Le côté du tore doit être >= 3 (reçu {side}).")
    if dim == 1:
        return build_cycle(side)
    if dim != 2:
        raise InvalidSizeError(f"Dimension {dim} non supportée (1 ou 2).")
    edges = []
    for r in range(side):
        for c in range(side):
            v = r * side + c
            edges.append((v, r * side + (c + 1) % side))
            edges.append((v, ((r + 1) % side) * side + c))
    return Graph.from_edges(side * side, edges, kind="torus", side=side, dim=2)


# ═══════════════════════════════════════════════════════════════════════════════
# OPÉRATEURS
# ═══════════════════════════════════════════════════════════════════════════════

def sgn(x: int, b: OrientedEdge) -> int:
    if x == b.tail:
        return -1
    if x == b.head:
        return 1
    return 0


def laplacian(g: Graph) -> np.ndarray:
    """Δ = D - A (lignes de somme nulle, semi-définie positive)."""
    lap = np.zeros((g.n_vertices, g.n_vertices))
    lap[g.tails, g.heads] = -1.0
    lap[g.heads, g.tails] = -1.0
    lap[np.arange(g.n_vertices), np.arange(g.n_vertices)] = g.degrees
    return lap


def incidence_matrix(g: Graph) -> np.ndarray:
    """D de taille |B⃗| × |V|, ligne b = δ_tail(b) - δ_head(b) ; DᵀD = Δ."""
    inc = np.zeros((len(g.edges), g.n_vertices))
    rows = np.arange(len(g.edges))
    inc[rows, g.tails] = 1.0
    inc[rows, g.heads] = -1.0
    return inc


# ═══════════════════════════════════════════════════════════════════════════════
# GRAPHE DES ARÊTES ORIENTÉES (cerf-volant)
# ═══════════════════════════════════════════════════════════════════════════════

@dataclass(frozen=True, eq=False)
class EdgeGraph:
    """Marche sur B (les deux orientations), poids = ∂_b∂_{b'}H gaussien.

    Nœuds 0..m-1 : B⃗ ; nœuds m..2m-1 : renversés. b ∼ b' si b' ≠ b̄ et
    ∂_b∂_{b'}H < 0. κ_b = Σ_{b'∼b} |∂_b∂_{b'}H| - ∂_b∂_bH, de sorte que
    ∂_b L_e = (L_e + L'_p - κ) ∂_b.
    """

    graph: Graph
    nodes: tuple[OrientedEdge, ...]
    weights: dict[tuple[int, int], float]
    kite_adjacency: tuple[tuple[int, ...], ...]
    compensation: np.ndarray = field(repr=False)

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    def reversal_index(self, i: int) -> int:
        m = self.n_nodes // 2
        return (i + m) % self.n_nodes

    def weight(self, i: int, j: int) -> float:
        return self.weights.get((i, j), 0.0)

    def uniform_compensation(self, tol: float = 1e-12) -> float:
        kappa = self.compensation
        if np.ptp(kappa) > tol:
            raise InvalidInputError("La compensation n'est pas uniforme sur ce graphe.")
        return float(kappa[0])

    def kite_generator(self) -> np.ndarray:
        """Laplacien du graphe cerf-volant, taux 1 par voisin (symétrique)."""
        k = self.n_nodes
        gen = np.zeros((k, k))
        for i, nbrs in enumerate(self.kite_adjacency):
            for j in nbrs:
                gen[i, j] = -1.0
            gen[i, i] = len(nbrs)
        return gen


def _inner(a: OrientedEdge, b: OrientedEdge) -> float:
    """⟨δ_tail(a) - δ_head(a), δ_tail(b) - δ_head(b)⟩."""
    return float(
        (a.tail == b.tail) + (a.head == b.head) - (a.tail == b.head) - (a.head == b.tail)
    )


def build_edge_graph(g: Graph) -> EdgeGraph:
    m = len(g.edges)
    forward = list(g.oriented_edges)
    nodes = tuple(forward + [b.reversal() for b in forward])

    incident: list[list[int]] = [[] for _ in range(g.n_vertices)]
    for i, b in enumerate(nodes):
        incident[b.tail].append(i)
        incident[b.head].append(i)

    weights: dict[tuple[int, int], float] = {}
    kite: list[tuple[int, ...]] = []
    kappa = np.zeros(2 * m)
    for i, b in enumerate(nodes):
        rev = (i + m) % (2 * m)
        candidates = sorted(set(incident[b.tail]) | set(incident[b.head]))
        nbrs = []
        retained = 0.0
        for j in candidates:
            w = _inner(b, nodes[j])
            if w != 0.0:
                weights[(i, j)] = w
            if j != i and j != rev and w < 0:
                nbrs.append(j)
                retained += -w
        kite.append(tuple(nbrs))
        kappa[i] = retained - weights[(i, i)]
    return EdgeGraph(g, nodes, weights, tuple(kite), kappa)
