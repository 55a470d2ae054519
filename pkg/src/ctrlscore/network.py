"""Directed networks, Laplacian dynamics and the 10-node experiment fixture.

Edge convention: an edge ``(j, i, c)`` means node ``j`` influences node
``i`` with weight ``c``; it populates entry ``a_ij`` of the dynamics.  Getting
this backwards silently permutes the scores.  Node numbers in files and in
:class:`NetworkSpec` are 1-based; arrays are 0-based.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import NetworkSpecError

__all__ = [
    "NetworkSpec",
    "build_laplacian_dynamics",
    "build_adjacency",
    "fixture_fig2",
    "read_edge_list",
    "parse_edge_list",
    "format_edge_list",
    "read_matrix",
    "parse_matrix",
]


@dataclass(frozen=True)
class NetworkSpec:
    node_count: int
    edges: tuple            # (source, target, weight), 1-based
    labels: tuple | None = None

    def __post_init__(self):
        n = self.node_count
        if not isinstance(n, (int, np.integer)) or n < 1:
            raise NetworkSpecError(f"node_count must be a positive integer, got {n!r}")
        seen = set()
        for edge in self.edges:
            if len(edge) != 3:
                raise NetworkSpecError(f"edge {edge!r} must be (source, target, weight)")
            s, t, w = edge
            if not (1 <= s <= n and 1 <= t <= n):
                raise NetworkSpecError(f"edge {s}->{t} references a node outside 1..{n}")
            if s == t:
                raise NetworkSpecError(f"self-loop {s}->{t} is not allowed")
            if not (np.isfinite(w) and w > 0):
                raise NetworkSpecError(f"edge {s}->{t} has nonpositive weight {w!r}")
            if (s, t) in seen:
                raise NetworkSpecError(f"duplicate edge {s}->{t}")
            seen.add((s, t))
        if self.labels is not None and len(self.labels) != n:
            raise NetworkSpecError(f"expected {n} labels, got {len(self.labels)}")

    def in_degree(self, node: int) -> int:
        return sum(1 for _, t, _ in self.edges if t == node)


def build_adjacency(spec: NetworkSpec) -> np.ndarray:
    """Weighted adjacency with ``a[i, j] = c`` for an edge ``j -> i``."""
    A = np.zeros((spec.node_count, spec.node_count))
    for s, t, w in spec.edges:
        A[t - 1, s - 1] = w
    return A


def build_laplacian_dynamics(spec: NetworkSpec) -> np.ndarray:
    """``A = -L``: nonnegative off-diagonal influence, zero row sums."""
    A = build_adjacency(spec)
    A[np.diag_indices_from(A)] = -A.sum(axis=1)
    return A


FIG2_EDGES = (
    (1, 5), (2, 10), (3, 8), (4, 6), (7, 1),
    (7, 2), (7, 3), (7, 4), (9, 1), (10, 6),
)


def fixture_fig2(weight: float = 0.2) -> NetworkSpec:
    """The 10-node, 10-edge directed network with uniform edge weight 0.2."""
    return NetworkSpec(node_count=10, edges=tuple((s, t, weight) for s, t in FIG2_EDGES))


def parse_edge_list(text: str, node_count: int | None = None) -> NetworkSpec:
    """Parse ``source,target,weight`` lines; ``#`` starts a comment, a header row is optional.

    Without ``node_count`` the largest node index is used.
    """
    edges = []
    seen_content = False
    for lineno, line in enumerate(text.splitlines(), start=1):
        raw = line.split("#", 1)[0].strip()
        if not raw:
            continue
        header_allowed = not seen_content
        seen_content = True
        fields = [f.strip() for f in raw.split(",")]
        if len(fields) != 3:
            raise NetworkSpecError(f"line {lineno}: expected 'source,target,weight', got {raw!r}")
        try:
            s, t, w = int(fields[0]), int(fields[1]), float(fields[2])
        except ValueError:
            # a header row has a non-numeric first field
            if header_allowed and not fields[0].lstrip("+-").isdigit():
                continue
            raise NetworkSpecError(f"line {lineno}: cannot parse {raw!r}") from None
        edges.append((s, t, w))
    if node_count is None:
        if not edges:
            raise NetworkSpecError("empty edge list needs an explicit node count")
        node_count = max(max(s, t) for s, t, _ in edges)
    return NetworkSpec(node_count=node_count, edges=tuple(edges))


def read_edge_list(path, node_count: int | None = None) -> NetworkSpec:
    return parse_edge_list(Path(path).read_text(), node_count)


def format_edge_list(spec: NetworkSpec) -> str:
    lines = [f"# {spec.node_count} nodes; edge j,i,c means node j influences node i",
             "source,target,weight"]
    lines += [f"{s},{t},{w:g}" for s, t, w in spec.edges]
    return "\n".join(lines) + "\n"


def parse_matrix(text: str) -> np.ndarray:
    """Dense matrix from whitespace-separated rows (``#`` comments allowed)."""
    rows = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            rows.append([float(v) for v in line.split()])
        except ValueError:
            raise NetworkSpecError(f"line {lineno}: non-numeric entry in {line!r}") from None
    if not rows:
        raise NetworkSpecError("matrix file is empty")
    n = len(rows)
    if any(len(r) != n for r in rows):
        raise NetworkSpecError(f"matrix must be square: {n} rows with lengths {sorted({len(r) for r in rows})}")
    M = np.array(rows)
    if not np.all(np.isfinite(M)):
        raise NetworkSpecError("matrix contains NaN or Inf")
    return M


def read_matrix(path) -> np.ndarray:
    return parse_matrix(Path(path).read_text())
