"""Triangulated 3D face surfaces: OFF I/O, graph geodesics, cropping, sampling.

A surface is an immutable triangle mesh in millimeters with a partial map of
named anatomical landmarks. Geodesic distances are shortest paths along the
mesh edge graph (edge weight = Euclidean length); exact polyhedral geodesics
are deliberately out of scope.
"""

from __future__ import annotations

import io
import os
from typing import IO, Iterable

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph

NOSE_TIP = "NoseTip"
CHIN = "Chin"
EYE_SOCKET_LEFT = "EyeSocketLeft"
EYE_SOCKET_RIGHT = "EyeSocketRight"

#: Closed set of landmark names recognized in scan annotations (case-sensitive).
LANDMARK_NAMES = (NOSE_TIP, CHIN, EYE_SOCKET_LEFT, EYE_SOCKET_RIGHT)


class SurfaceError(ValueError):
    """A mesh violates a structural invariant."""


class OffFormatError(SurfaceError):
    """An OFF document could not be parsed; message carries the line number."""


class Surface:
    """Immutable triangle mesh with optional named landmarks.

    Parameters
    ----------
    vertices : (n, 3) float array
        Vertex coordinates in millimeters, n >= 4.
    triangles : (t, 3) int array
        Vertex-index triples; all indices valid, no triangle repeats an index.
    landmarks : dict, optional
        Partial map from a name in ``LANDMARK_NAMES`` to a vertex index.

    The edge graph must be connected and free of zero-length edges (degenerate
    edges would make max-min sampling nondeterministic).
    """

    def __init__(self, vertices, triangles, landmarks=None):
        v = np.asarray(vertices, dtype=np.float64)
        t = np.asarray(triangles, dtype=np.int64)
        if v.ndim != 2 or v.shape[1] != 3:
            raise SurfaceError("vertices must be an (n, 3) array")
        if not np.all(np.isfinite(v)):
            raise SurfaceError("vertices contain non-finite coordinates")
        if len(v) < 4:
            raise SurfaceError(f"mesh has {len(v)} vertices, need at least 4")
        if t.ndim != 2 or t.shape[1] != 3:
            raise SurfaceError("triangles must be a (t, 3) index array")
        if t.size and (t.min() < 0 or t.max() >= len(v)):
            raise SurfaceError("triangle references an out-of-range vertex index")
        if t.size and (
            np.any(t[:, 0] == t[:, 1]) or np.any(t[:, 1] == t[:, 2]) or np.any(t[:, 0] == t[:, 2])
        ):
            raise SurfaceError("triangle repeats a vertex index")

        self.vertices = v
        self.triangles = t
        self.landmarks = dict(landmarks) if landmarks else {}
        for name, idx in self.landmarks.items():
            if name not in LANDMARK_NAMES:
                raise SurfaceError(f"unknown landmark name {name!r}")
            if not 0 <= int(idx) < len(v):
                raise SurfaceError(f"landmark {name} index {idx} out of range")
            self.landmarks[name] = int(idx)

        self._edges = _unique_edges(t)
        lengths = np.linalg.norm(v[self._edges[:, 0]] - v[self._edges[:, 1]], axis=1)
        if np.any(lengths == 0.0):
            raise SurfaceError("mesh contains a zero-length edge")
        self._edge_lengths = lengths

        n_comp, _ = csgraph.connected_components(self.adjacency, directed=False)
        if n_comp != 1:
            raise SurfaceError(f"mesh edge graph is disconnected ({n_comp} components)")

        v.flags.writeable = False
        t.flags.writeable = False

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def edges(self) -> np.ndarray:
        """Undirected edges as an (e, 2) array of sorted index pairs."""
        return self._edges

    @property
    def adjacency(self) -> sparse.csr_matrix:
        """Symmetric CSR adjacency weighted by Euclidean edge length."""
        adj = getattr(self, "_adjacency", None)
        if adj is None:
            i, j = self._edges[:, 0], self._edges[:, 1]
            w = self._edge_lengths
            n = self.n_vertices
            adj = sparse.csr_matrix(
                (np.concatenate([w, w]), (np.concatenate([i, j]), np.concatenate([j, i]))),
                shape=(n, n),
            )
            self._adjacency = adj
        return adj

    def __eq__(self, other):
        if not isinstance(other, Surface):
            return NotImplemented
        return (
            np.array_equal(self.vertices, other.vertices)
            and np.array_equal(self.triangles, other.triangles)
            and self.landmarks == other.landmarks
        )

    def __repr__(self):
        return (
            f"Surface({self.n_vertices} vertices, {len(self.triangles)} triangles, "
            f"landmarks={sorted(self.landmarks)})"
        )


def _unique_edges(triangles: np.ndarray) -> np.ndarray:
    if triangles.size == 0:
        return np.empty((0, 2), dtype=np.int64)
    pairs = np.concatenate(
        [triangles[:, [0, 1]], triangles[:, [1, 2]], triangles[:, [2, 0]]], axis=0
    )
    pairs.sort(axis=1)
    return np.unique(pairs, axis=0)


# ---------------------------------------------------------------------------
# OFF I/O. Standard OFF text ("OFF" header, counts line, vertex lines, face
# lines), optionally followed by lines of the form "#landmark <name> <index>".


def parse_off(text: str) -> Surface:
    """Parse an OFF document (with optional landmark annotations) into a Surface."""
    lines = text.splitlines()
    landmarks = {}
    body = []  # (line_no, stripped) pairs, comments and blanks removed
    for no, raw in enumerate(lines, start=1):
        line = raw.strip()
        if line.startswith("#landmark"):
            parts = line.split()
            if len(parts) != 3:
                raise OffFormatError(f"line {no}: malformed landmark annotation {line!r}")
            _, name, idx_s = parts
            if name not in LANDMARK_NAMES:
                raise OffFormatError(f"line {no}: unknown landmark name {name!r}")
            try:
                landmarks[name] = int(idx_s)
            except ValueError:
                raise OffFormatError(f"line {no}: landmark index {idx_s!r} is not an integer")
            continue
        if not line or line.startswith("#"):
            continue
        body.append((no, line))

    if not body:
        raise OffFormatError("line 1: empty document")
    no, header = body[0]
    if header != "OFF":
        raise OffFormatError(f"line {no}: expected 'OFF' header, got {header!r}")
    if len(body) < 2:
        raise OffFormatError(f"line {no}: missing counts line after header")
    no, counts = body[1]
    parts = counts.split()
    if len(parts) not in (2, 3) or not all(p.lstrip("-").isdigit() for p in parts):
        raise OffFormatError(f"line {no}: malformed counts line {counts!r}")
    n_vert, n_face = int(parts[0]), int(parts[1])
    if n_vert < 0 or n_face < 0:
        raise OffFormatError(f"line {no}: negative counts")
    if len(body) != 2 + n_vert + n_face:
        raise OffFormatError(
            f"line {no}: counts promise {n_vert} vertices and {n_face} faces, "
            f"found {len(body) - 2} data lines"
        )

    vertices = np.empty((n_vert, 3), dtype=np.float64)
    for k in range(n_vert):
        no, line = body[2 + k]
        parts = line.split()
        if len(parts) != 3:
            raise OffFormatError(f"line {no}: expected 3 coordinates, got {len(parts)}")
        try:
            vertices[k] = [float(p) for p in parts]
        except ValueError:
            raise OffFormatError(f"line {no}: non-numeric coordinate in {line!r}")

    triangles = np.empty((n_face, 3), dtype=np.int64)
    for k in range(n_face):
        no, line = body[2 + n_vert + k]
        parts = line.split()
        if len(parts) != 4 or parts[0] != "3":
            raise OffFormatError(f"line {no}: only triangular faces supported, got {line!r}")
        try:
            tri = [int(p) for p in parts[1:]]
        except ValueError:
            raise OffFormatError(f"line {no}: non-integer vertex index in {line!r}")
        for idx in tri:
            if not 0 <= idx < n_vert:
                raise OffFormatError(f"line {no}: vertex index {idx} out of range (0..{n_vert - 1})")
        if len(set(tri)) != 3:
            raise OffFormatError(f"line {no}: triangle repeats a vertex index")
        triangles[k] = tri

    for name, idx in landmarks.items():
        if not 0 <= idx < n_vert:
            raise OffFormatError(f"landmark {name} index {idx} out of range (0..{n_vert - 1})")

    return Surface(vertices, triangles, landmarks)


def format_off(surface: Surface) -> str:
    """Serialize a Surface as OFF text; floats keep exact round-trip precision."""
    out = ["OFF", f"{surface.n_vertices} {len(surface.triangles)} 0"]
    for x, y, z in surface.vertices:
        out.append(f"{float(x)!r} {float(y)!r} {float(z)!r}")
    for a, b, c in surface.triangles:
        out.append(f"3 {a} {b} {c}")
    for name in sorted(surface.landmarks):
        out.append(f"#landmark {name} {surface.landmarks[name]}")
    return "\n".join(out) + "\n"


def load_surface(source: str | os.PathLike | IO[str]) -> Surface:
    """Load a Surface from a path or an open text stream."""
    if isinstance(source, io.TextIOBase) or hasattr(source, "read"):
        return parse_off(source.read())
    with open(source, "r", encoding="utf-8") as fh:
        return parse_off(fh.read())


def save_surface(surface: Surface, path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_off(surface))


# ---------------------------------------------------------------------------
# Geodesics and geodesic-driven operations.


def geodesic_distances(surface: Surface, source: int) -> np.ndarray:
    """Per-vertex shortest-path distance (mm) from ``source`` along mesh edges.

    All distances are finite because surfaces are connected by construction.
    """
    if not 0 <= source < surface.n_vertices:
        raise SurfaceError(f"source vertex {source} out of range")
    dist = csgraph.dijkstra(surface.adjacency, directed=False, indices=source)
    return dist


def crop_geodesic(surface: Surface, center: str, radius: float) -> Surface:
    """Keep the geodesic ball of ``radius`` mm around the ``center`` landmark.

    Vertices within the radius are kept, then triangles whose three corners
    survive, then the connected component containing the landmark. Landmark
    indices are remapped into the cropped surface.
    """
    if center not in surface.landmarks:
        raise SurfaceError(f"landmark {center!r} not present on surface")
    if radius <= 0:
        raise SurfaceError("crop radius must be positive")
    center_idx = surface.landmarks[center]
    dist = geodesic_distances(surface, center_idx)
    keep = dist <= radius

    tri = surface.triangles
    tri_keep = tri[keep[tri].all(axis=1)]
    if len(tri_keep) == 0:
        raise SurfaceError("crop radius too small: no triangles survive")

    # Connected component of the landmark within the surviving triangles.
    n = surface.n_vertices
    edges = _unique_edges(tri_keep)
    sub = sparse.csr_matrix(
        (np.ones(len(edges) * 2), (np.concatenate([edges[:, 0], edges[:, 1]]),
                                   np.concatenate([edges[:, 1], edges[:, 0]]))),
        shape=(n, n),
    )
    _, labels = csgraph.connected_components(sub, directed=False)
    in_component = labels == labels[center_idx]
    final = np.flatnonzero(keep & in_component)
    if len(final) < 4:
        raise SurfaceError(f"crop result has {len(final)} vertices, need at least 4")
    assert keep[center_idx] and in_component[center_idx]

    remap = -np.ones(n, dtype=np.int64)
    remap[final] = np.arange(len(final))
    tri_final = tri_keep[in_component[tri_keep].all(axis=1)]
    landmarks = {
        name: int(remap[idx])
        for name, idx in surface.landmarks.items()
        if keep[idx] and in_component[idx]
    }
    return Surface(surface.vertices[final], remap[tri_final], landmarks)


def farthest_point_sample(surface: Surface, count: int, seed_vertex: int) -> list[int]:
    """Greedy max-min vertex sampling under geodesic distance.

    Starts at ``seed_vertex``; each step adds the vertex farthest from all
    chosen ones (ties broken by lowest index). Returns indices in selection
    order, so the result for k samples is a prefix of the result for k+1.
    """
    n = surface.n_vertices
    if not 0 <= seed_vertex < n:
        raise SurfaceError(f"seed vertex {seed_vertex} out of range")
    if not 1 <= count <= n:
        raise SurfaceError(f"sample count {count} out of range 1..{n}")
    chosen = [int(seed_vertex)]
    min_dist = geodesic_distances(surface, seed_vertex)
    for _ in range(count - 1):
        nxt = int(np.argmax(min_dist))  # argmax takes the first index on ties
        chosen.append(nxt)
        np.minimum(min_dist, geodesic_distances(surface, nxt), out=min_dist)
    return chosen
