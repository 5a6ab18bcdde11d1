"""Coupling topologies and edge-colouring based gate scheduling.

Supported layouts: linear chains, rectangular grids, and rows of
heavy-hex cells.  A heavy-hex row consists of two horizontal rails of
4C+1 qubits joined by C+1 bridge qubits every fourth column, plus one
pendant qubit above and below each cell's midpoint (where the lattice
would continue), so the maximum degree is 3 even for a single cell.

All three families are bipartite, so an exact minimum edge colouring
with Delta colours always exists and is found by the alternating-path
method; non-bipartite inputs fall back to Misra-Gries (Delta + 1).
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from .errors import DomainError

Edge = tuple[int, int]


@dataclass
class Topology:
    """Undirected, connected coupling graph."""

    num_qubits: int
    edges: frozenset[Edge]
    kind: str = "custom"
    _adj: dict[int, tuple[int, ...]] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.num_qubits < 1:
            raise DomainError("topology needs at least one qubit")
        canon = set()
        for a, b in self.edges:
            if a == b:
                raise DomainError(f"self-coupling ({a}, {b}) not allowed")
            if not (0 <= a < self.num_qubits and 0 <= b < self.num_qubits):
                raise DomainError(f"edge ({a}, {b}) outside qubit range")
            canon.add((min(a, b), max(a, b)))
        self.edges = frozenset(canon)
        adj: dict[int, list[int]] = {q: [] for q in range(self.num_qubits)}
        for a, b in self.edges:
            adj[a].append(b)
            adj[b].append(a)
        self._adj = {q: tuple(sorted(ns)) for q, ns in adj.items()}
        if self.num_qubits > 1 and not self._connected():
            raise DomainError("topology must be connected")

    def _connected(self) -> bool:
        seen = {0}
        frontier = deque([0])
        while frontier:
            for nb in self._adj[frontier.popleft()]:
                if nb not in seen:
                    seen.add(nb)
                    frontier.append(nb)
        return len(seen) == self.num_qubits

    def neighbors(self, q: int) -> tuple[int, ...]:
        return self._adj[q]

    def coupled(self, a: int, b: int) -> bool:
        return (min(a, b), max(a, b)) in self.edges

    @property
    def max_degree(self) -> int:
        return max(len(ns) for ns in self._adj.values())

    def shortest_path(self, src: int, dst: int) -> list[int]:
        """BFS path with smallest-index tie-breaks; includes both endpoints."""
        if src == dst:
            return [src]
        parent = {src: src}
        frontier = deque([src])
        while frontier:
            cur = frontier.popleft()
            for nb in self._adj[cur]:
                if nb not in parent:
                    parent[nb] = cur
                    if nb == dst:
                        path = [dst]
                        while path[-1] != src:
                            path.append(parent[path[-1]])
                        return path[::-1]
                    frontier.append(nb)
        raise DomainError(f"no path between {src} and {dst}")

    def distances_from(self, src: int) -> dict[int, int]:
        dist = {src: 0}
        frontier = deque([src])
        while frontier:
            cur = frontier.popleft()
            for nb in self._adj[cur]:
                if nb not in dist:
                    dist[nb] = dist[cur] + 1
                    frontier.append(nb)
        return dist

    @property
    def diameter(self) -> int:
        return max(
            max(self.distances_from(q).values()) for q in range(self.num_qubits)
        )


def build_topology(kind: str, size) -> Topology:
    """Construct a named topology.

    ``linear`` takes a qubit count, ``grid`` takes (rows, cols), and
    ``heavy-hex`` takes a cell count.
    """
    if kind == "linear":
        n = int(size)
        if n < 1:
            raise DomainError("linear topology needs >= 1 qubit")
        return Topology(n, frozenset((i, i + 1) for i in range(n - 1)), "linear")
    if kind == "grid":
        rows, cols = (int(size[0]), int(size[1]))
        if rows < 1 or cols < 1:
            raise DomainError("grid dimensions must be >= 1")
        edges = set()
        for r in range(rows):
            for c in range(cols):
                q = r * cols + c
                if c + 1 < cols:
                    edges.add((q, q + 1))
                if r + 1 < rows:
                    edges.add((q, q + cols))
        return Topology(rows * cols, frozenset(edges), "grid")
    if kind in ("heavy-hex", "heavy_hex"):
        return _heavy_hex(int(size))
    raise DomainError(f"unknown topology kind {kind!r}")


def _heavy_hex(cells: int) -> Topology:
    if cells < 1:
        raise DomainError("heavy-hex needs >= 1 cell")
    cols = 4 * cells + 1
    top = list(range(cols))
    bottom = list(range(cols, 2 * cols))
    nxt = 2 * cols
    edges = set()
    for rail in (top, bottom):
        edges.update((rail[i], rail[i + 1]) for i in range(cols - 1))
    for j in range(cells + 1):  # bridges every fourth column
        bridge = nxt
        nxt += 1
        edges.add((top[4 * j], bridge))
        edges.add((bridge, bottom[4 * j]))
    for j in range(cells):  # pendant qubits at the cell midpoints
        above = nxt
        nxt += 1
        edges.add((above, top[4 * j + 2]))
        below = nxt
        nxt += 1
        edges.add((below, bottom[4 * j + 2]))
    return Topology(nxt, frozenset(edges), "heavy-hex")


def _bipartition(topo: Topology) -> dict[int, int] | None:
    side = {0: 0}
    frontier = deque([0])
    while frontier:
        cur = frontier.popleft()
        for nb in topo.neighbors(cur):
            if nb not in side:
                side[nb] = side[cur] ^ 1
                frontier.append(nb)
            elif side[nb] == side[cur]:
                return None
    return side


def edge_colouring(topo: Topology) -> list[list[Edge]]:
    """Partition the coupling edges into matchings (parallel gate layers).

    Bipartite topologies (all built-in kinds) get exactly max-degree
    colours via alternating-path recolouring; anything else falls back
    to Misra-Gries with at most Delta + 1 colours.
    """
    if not topo.edges:
        return []
    if _bipartition(topo) is not None:
        colours = _bipartite_colouring(topo)
    else:
        colours = _fallback_colouring(topo)
    classes: dict[int, list[Edge]] = {}
    for edge, colour in colours.items():
        classes.setdefault(colour, []).append(edge)
    return [sorted(classes[c]) for c in sorted(classes)]


def _bipartite_colouring(topo: Topology) -> dict[Edge, int]:
    delta = topo.max_degree
    used: list[set[int]] = [set() for _ in range(topo.num_qubits)]
    colour_of: dict[Edge, int] = {}
    at: list[dict[int, int]] = [dict() for _ in range(topo.num_qubits)]  # colour -> other end

    def free(v: int) -> int:
        for c in range(delta):
            if c not in used[v]:
                return c
        raise AssertionError("no free colour at a vertex with degree <= Delta")

    def assign(u: int, v: int, colour: int):
        colour_of[(min(u, v), max(u, v))] = colour
        used[u].add(colour)
        used[v].add(colour)
        at[u][colour] = v
        at[v][colour] = u

    def unassign(u: int, v: int, colour: int):
        used[u].discard(colour)
        used[v].discard(colour)
        del at[u][colour]
        del at[v][colour]

    for u, v in sorted(topo.edges):
        a = free(u)
        b = free(v)
        if a == b:
            assign(u, v, a)
            continue
        # Flip the a/b alternating path starting at v; in a bipartite
        # graph it can never reach u, so colour a becomes free at v.
        cur, colour = v, a
        chain = []
        while colour in at[cur]:
            nxt = at[cur][colour]
            chain.append((cur, nxt, colour))
            cur, colour = nxt, (b if colour == a else a)
        for x, y, c in chain:
            unassign(x, y, c)
        for x, y, c in chain:
            assign(x, y, b if c == a else a)
        assign(u, v, a)
    return colour_of


def _fallback_colouring(topo: Topology) -> dict[Edge, int]:
    """Greedy colouring; exact search within Delta + 1 if greedy overshoots.

    Vizing's theorem guarantees a Delta + 1 colouring exists, so the
    backtracking pass always terminates with a valid answer.
    """
    ordered = sorted(topo.edges)
    greedy: dict[Edge, int] = {}
    used: list[set[int]] = [set() for _ in range(topo.num_qubits)]
    for u, v in ordered:
        c = 0
        while c in used[u] or c in used[v]:
            c += 1
        greedy[(u, v)] = c
        used[u].add(c)
        used[v].add(c)
    limit = topo.max_degree + 1
    if max(greedy.values()) < limit:
        return greedy

    colour_of: dict[Edge, int] = {}
    used = [set() for _ in range(topo.num_qubits)]

    def place(i: int) -> bool:
        if i == len(ordered):
            return True
        u, v = ordered[i]
        for c in range(limit):
            if c not in used[u] and c not in used[v]:
                colour_of[(u, v)] = c
                used[u].add(c)
                used[v].add(c)
                if place(i + 1):
                    return True
                used[u].discard(c)
                used[v].discard(c)
        return False

    if not place(0):  # unreachable by Vizing's theorem
        raise AssertionError("Delta + 1 edge colouring must exist")
    return colour_of
