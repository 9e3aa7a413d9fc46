"""Polygonal environments and wall-clipped motion."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

#: Distance kept from a wall when a move is cut off.
COLLISION_MARGIN = 1e-6

#: Points closer than this to a wall do not count as interior.
BOUNDARY_TOL = 1e-9


@dataclass(frozen=True)
class Room:
    """Axis-aligned rectangular region used to label positions."""

    name: str
    xmin: float
    ymin: float
    xmax: float
    ymax: float

    def contains(self, pts) -> np.ndarray:
        pts = np.atleast_2d(pts)
        return ((pts[:, 0] >= self.xmin) & (pts[:, 0] <= self.xmax)
                & (pts[:, 1] >= self.ymin) & (pts[:, 1] <= self.ymax))

    @property
    def center(self) -> np.ndarray:
        return np.array([(self.xmin + self.xmax) / 2, (self.ymin + self.ymax) / 2])

    @property
    def area(self) -> float:
        return (self.xmax - self.xmin) * (self.ymax - self.ymin)


@dataclass(frozen=True)
class Environment2D:
    """Closed polygonal environment made of directed wall segments.

    Attributes
    ----------
    segments : ndarray, shape (m, 4)
        Rows ``(x0, y0, x1, y1)``; the row index is the segment id.
    preset_name : str
    rooms : tuple of Room
        Named regions (rooms, corridors) for labelling; may be empty.
    doors : tuple of Room
        Passages between rooms.
    start : ndarray, shape (2,)
        Default start position (center of the largest room).
    tasks : dict
        Named navigation tasks ``name -> (start, goal, target_region)``.
    """

    segments: np.ndarray
    preset_name: str = "custom"
    rooms: tuple = ()
    doors: tuple = ()
    start: Optional[np.ndarray] = None
    tasks: dict = field(default_factory=dict)

    @property
    def n_segments(self) -> int:
        return self.segments.shape[0]

    @property
    def bounds(self) -> tuple[float, float, float, float]:
        s = self.segments
        xs = np.concatenate([s[:, 0], s[:, 2]])
        ys = np.concatenate([s[:, 1], s[:, 3]])
        return float(xs.min()), float(ys.min()), float(xs.max()), float(ys.max())

    def room_of(self, pts) -> np.ndarray:
        """Name of the room containing each point ('' when none)."""
        pts = np.atleast_2d(pts)
        out = np.full(pts.shape[0], "", dtype=object)
        for room in self.rooms:
            out[(out == "") & room.contains(pts)] = room.name
        return out

    def room(self, name: str) -> Room:
        for r in self.rooms:
            if r.name == name:
                return r
        raise KeyError(name)

    def in_door(self, pts) -> np.ndarray:
        pts = np.atleast_2d(pts)
        hit = np.zeros(pts.shape[0], dtype=bool)
        for d in self.doors:
            hit |= d.contains(pts)
        return hit

    def wall_distance(self, pts) -> np.ndarray:
        """Euclidean distance from each point to the nearest wall."""
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        a = self.segments[:, :2]
        e = self.segments[:, 2:] - a
        w = pts[:, None, :] - a[None]
        t = np.clip(np.sum(w * e, axis=2) / np.sum(e * e, axis=1), 0.0, 1.0)
        closest = a[None] + t[..., None] * e[None]
        return np.min(np.linalg.norm(pts[:, None, :] - closest, axis=2), axis=1)

    def contains(self, pts) -> np.ndarray:
        """Even-odd point-in-polygon test over all loops (obstacles are holes)."""
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        x0, y0, x1, y1 = (self.segments[:, i] for i in range(4))
        px = pts[:, 0:1]
        py = pts[:, 1:2]
        straddle = (y0 > py) != (y1 > py)
        with np.errstate(divide="ignore", invalid="ignore"):
            xcross = x0 + (py - y0) * (x1 - x0) / (y1 - y0)
        crossings = np.sum(straddle & (px < xcross), axis=1)
        return crossings % 2 == 1

    def is_interior(self, pts) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        return self.contains(pts) & (self.wall_distance(pts) > BOUNDARY_TOL)

    def require_interior(self, pos, what: str = "position") -> np.ndarray:
        pos = np.asarray(pos, dtype=float).reshape(2)
        if not np.all(np.isfinite(pos)) or not bool(self.is_interior(pos)[0]):
            raise ValueError(f"{what} ({pos[0]:g}, {pos[1]:g}) is not strictly inside "
                             f"{self.preset_name}")
        return pos

    def lattice(self, n: int) -> tuple[np.ndarray, np.ndarray]:
        """Cell centers of an n×n grid over the bounding box and their interior mask."""
        xmin, ymin, xmax, ymax = self.bounds
        gx = xmin + (np.arange(n) + 0.5) * (xmax - xmin) / n
        gy = ymin + (np.arange(n) + 0.5) * (ymax - ymin) / n
        xx, yy = np.meshgrid(gx, gy)
        pts = np.column_stack([xx.ravel(), yy.ravel()])
        return pts, self.is_interior(pts)


def first_hit(segments: np.ndarray, pos: np.ndarray, disp: np.ndarray) -> float:
    """Smallest path parameter t in [0, 1] where pos + t·disp meets a wall, else inf."""
    a = segments[:, :2]
    e = segments[:, 2:] - a
    denom = disp[0] * e[:, 1] - disp[1] * e[:, 0]
    w = a - pos
    ok = denom != 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        t = (w[:, 0] * e[:, 1] - w[:, 1] * e[:, 0]) / denom
        s = (w[:, 0] * disp[1] - w[:, 1] * disp[0]) / denom
    hit = ok & (t >= 0.0) & (t <= 1.0) & (s >= 0.0) & (s <= 1.0)
    return float(t[hit].min()) if np.any(hit) else np.inf


def move(env: Environment2D, pos: np.ndarray, disp: np.ndarray,
         margin: float = COLLISION_MARGIN) -> np.ndarray:
    """Displace without validating ``pos``; cut off short of the first wall hit."""
    length = float(np.hypot(disp[0], disp[1]))
    if length == 0.0:
        return pos.copy()
    t = first_hit(env.segments, pos, disp)
    if not np.isfinite(t):
        return pos + disp
    t = max(t - margin / length, 0.0)
    new = pos + t * disp
    # grazing hits can leave the point within the boundary tolerance
    if not bool(env.is_interior(new)[0]):
        return pos.copy()
    return new


def step_agent(env: Environment2D, position, control) -> np.ndarray:
    """New position after moving by ``control``, stopped short of any wall."""
    pos = env.require_interior(position)
    disp = np.asarray(control, dtype=float).reshape(2)
    if not np.all(np.isfinite(disp)):
        raise ValueError("control must be finite")
    return move(env, pos, disp)


def geodesic_distances(env: Environment2D, sources, n: int = 80) -> np.ndarray:
    """Approximate walkable distances from each source to every other source.

    Shortest paths on an 8-connected n×n interior lattice whose edges do not
    cross walls; sources snap to their nearest lattice point.
    """
    from scipy.sparse import coo_matrix
    from scipy.sparse.csgraph import dijkstra

    pts, mask = env.lattice(n)
    idx = -np.ones(n * n, dtype=int)
    idx[mask] = np.arange(int(mask.sum()))
    inside = pts[mask]
    rows, cols, w = [], [], []
    for di, dj in ((0, 1), (1, 0), (1, 1), (1, -1)):
        for a in np.flatnonzero(mask):
            i, j = divmod(a, n)
            i2, j2 = i + di, j + dj
            if not (0 <= i2 < n and 0 <= j2 < n):
                continue
            b = i2 * n + j2
            if not mask[b]:
                continue
            disp = pts[b] - pts[a]
            if np.isfinite(first_hit(env.segments, pts[a], disp)):
                continue
            rows.append(idx[a])
            cols.append(idx[b])
            w.append(float(np.hypot(*disp)))
    m = inside.shape[0]
    graph = coo_matrix((w, (rows, cols)), shape=(m, m)).tocsr()
    src = np.atleast_2d(np.asarray(sources, dtype=float))
    snap = [int(np.argmin(np.sum((inside - s) ** 2, axis=1))) for s in src]
    dist = dijkstra(graph, directed=False, indices=snap)
    return dist[:, snap]
