"""Named environments.

Every preset is one or more closed polygon loops (outer boundary
counter-clockwise, obstacles clockwise) rescaled so the bounding box fits
[0, 1]² with its aspect ratio kept. Room rectangles label regions; doors
mark the passages between rooms.

Layouts in raw units before rescaling::

    single_room   unit square
    two_rooms     0.5 x 1 box split by a 0.05-thick wall at y = 0.5,
                  central door of width 0.075
    three_rooms   left/right rooms joined by a central corridor, a third room
                  below the corridor; short passages of width 0.1
    four_rooms    cross-shaped: corridor in the middle, one room per side
    three_rooms_corridor
                  wide corridor along the bottom with three rooms of
                  different sizes above it
    obstacle      0.8 x 1 box with a rectangular block in the middle
"""
from __future__ import annotations

import numpy as np

from .geometry import Environment2D, Room

PRESETS = ("single_room", "two_rooms", "three_rooms", "four_rooms",
           "three_rooms_corridor", "obstacle")

_LOOPS = {
    "single_room": [[(0, 0), (1, 0), (1, 1), (0, 1)]],
    "two_rooms": [[
        (0, 0), (0.5, 0), (0.5, 0.475), (0.2875, 0.475), (0.2875, 0.525), (0.5, 0.525),
        (0.5, 1), (0, 1), (0, 0.525), (0.2125, 0.525), (0.2125, 0.475), (0, 0.475),
    ]],
    "three_rooms": [[
        (0.25, 0), (0.75, 0), (0.75, 0.4), (0.55, 0.4), (0.55, 0.5), (0.6, 0.5),
        (0.6, 0.6), (0.65, 0.6), (0.65, 0.45), (1, 0.45), (1, 0.95), (0.65, 0.95),
        (0.65, 0.7), (0.6, 0.7), (0.6, 0.85), (0.4, 0.85), (0.4, 0.7), (0.35, 0.7),
        (0.35, 0.95), (0, 0.95), (0, 0.45), (0.35, 0.45), (0.35, 0.6), (0.4, 0.6),
        (0.4, 0.5), (0.45, 0.5), (0.45, 0.4), (0.25, 0.4),
    ]],
    "four_rooms": [[
        (0.325, 0), (0.675, 0), (0.675, 0.3), (0.55, 0.3), (0.55, 0.35), (0.65, 0.35),
        (0.65, 0.45), (0.7, 0.45), (0.7, 0.325), (1, 0.325), (1, 0.675), (0.7, 0.675),
        (0.7, 0.55), (0.65, 0.55), (0.65, 0.65), (0.55, 0.65), (0.55, 0.7), (0.675, 0.7),
        (0.675, 1), (0.325, 1), (0.325, 0.7), (0.45, 0.7), (0.45, 0.65), (0.35, 0.65),
        (0.35, 0.55), (0.3, 0.55), (0.3, 0.675), (0, 0.675), (0, 0.325), (0.3, 0.325),
        (0.3, 0.45), (0.35, 0.45), (0.35, 0.35), (0.45, 0.35), (0.45, 0.3), (0.325, 0.3),
    ]],
    "three_rooms_corridor": [[
        (0, 0), (1, 0), (1, 0.3), (0.9, 0.3), (0.9, 0.35), (1, 0.35), (1, 0.9),
        (0.7, 0.9), (0.7, 0.35), (0.8, 0.35), (0.8, 0.3), (0.55, 0.3), (0.55, 0.35),
        (0.65, 0.35), (0.65, 0.7), (0.35, 0.7), (0.35, 0.35), (0.45, 0.35), (0.45, 0.3),
        (0.2, 0.3), (0.2, 0.35), (0.3, 0.35), (0.3, 0.8), (0, 0.8), (0, 0.35),
        (0.1, 0.35), (0.1, 0.3), (0, 0.3),
    ]],
    "obstacle": [
        [(0, 0), (0.8, 0), (0.8, 1), (0, 1)],
        [(0.25, 0.35), (0.25, 0.65), (0.55, 0.65), (0.55, 0.35)],
    ],
}

# (name, xmin, ymin, xmax, ymax) in raw units
_ROOMS = {
    "single_room": [("room", 0, 0, 1, 1)],
    "two_rooms": [("bottom", 0, 0, 0.5, 0.475), ("top", 0, 0.525, 0.5, 1)],
    "three_rooms": [("left", 0, 0.45, 0.35, 0.95), ("right", 0.65, 0.45, 1, 0.95),
                    ("bottom", 0.25, 0, 0.75, 0.4), ("corridor", 0.4, 0.5, 0.6, 0.85)],
    "four_rooms": [("left", 0, 0.325, 0.3, 0.675), ("right", 0.7, 0.325, 1, 0.675),
                   ("bottom", 0.325, 0, 0.675, 0.3), ("top", 0.325, 0.7, 0.675, 1),
                   ("corridor", 0.35, 0.35, 0.65, 0.65)],
    "three_rooms_corridor": [("left", 0, 0.35, 0.3, 0.8), ("center", 0.35, 0.35, 0.65, 0.7),
                             ("right", 0.7, 0.35, 1, 0.9), ("corridor", 0, 0, 1, 0.3)],
    "obstacle": [("room", 0, 0, 0.8, 1)],
}

_DOORS = {
    "two_rooms": [("door", 0.2125, 0.475, 0.2875, 0.525)],
    "three_rooms": [("door_bottom", 0.45, 0.4, 0.55, 0.5), ("door_left", 0.35, 0.6, 0.4, 0.7),
                    ("door_right", 0.6, 0.6, 0.65, 0.7)],
    "four_rooms": [("door_bottom", 0.45, 0.3, 0.55, 0.35), ("door_top", 0.45, 0.65, 0.55, 0.7),
                   ("door_left", 0.3, 0.45, 0.35, 0.55), ("door_right", 0.65, 0.45, 0.7, 0.55)],
    "three_rooms_corridor": [("door_left", 0.1, 0.3, 0.2, 0.35),
                             ("door_center", 0.45, 0.3, 0.55, 0.35),
                             ("door_right", 0.8, 0.3, 0.9, 0.35)],
}

# horizontal stretch applied before normalization; makes the left/right pair
# the geometrically most distant rooms of the symmetric multi-room layouts
_STRETCH = {"three_rooms": 1.6, "four_rooms": 1.3}

# named tasks in raw units: start, goal and the target region a successful
# run ends in (the far side of the obstacle)
_TASKS = {
    "obstacle": {
        "vertical": ((0.125, 0.1), (0.125, 0.9), (0, 0.65, 0.8, 1)),
        "horizontal": ((0.1, 0.2), (0.7, 0.2), (0.55, 0, 0.8, 1)),
    },
}

#: Pair of rooms farthest apart along the walkable interior.
MOST_DISTANT_ROOMS = {
    "two_rooms": ("bottom", "top"),
    "three_rooms": ("left", "right"),
    "four_rooms": ("left", "right"),
    "three_rooms_corridor": ("left", "right"),
}


def make_preset(name: str) -> Environment2D:
    """Build a named environment normalized to the unit square."""
    if name not in _LOOPS:
        raise ValueError(f"unknown preset {name!r}; valid: {', '.join(PRESETS)}")
    stretch = np.array([_STRETCH.get(name, 1.0), 1.0])
    loops = [np.asarray(loop, dtype=float) * stretch for loop in _LOOPS[name]]
    allpts = np.vstack(loops)
    lo = allpts.min(axis=0)
    scale = float((allpts.max(axis=0) - lo).max())

    def norm(p):
        return (np.asarray(p, dtype=float) * stretch - lo) / scale

    segs = []
    for loop in loops:
        p = (loop - lo) / scale
        segs.append(np.hstack([p, np.roll(p, -1, axis=0)]))
    segments = np.vstack(segs)

    def boxes(spec):
        out = []
        for nm, x0, y0, x1, y1 in spec:
            a, b = norm((x0, y0)), norm((x1, y1))
            out.append(Room(nm, float(a[0]), float(a[1]), float(b[0]), float(b[1])))
        return tuple(out)

    rooms = boxes(_ROOMS.get(name, []))
    doors = boxes(_DOORS.get(name, []))
    real_rooms = [r for r in rooms if r.name != "corridor"] or list(rooms)
    largest = max(real_rooms, key=lambda r: r.area)
    start = largest.center
    if name == "obstacle":
        start = norm((0.125, 0.5))
    tasks = {k: (norm(s), norm(g), boxes([(k, *box)])[0])
             for k, (s, g, box) in _TASKS.get(name, {}).items()}
    return Environment2D(segments, name, rooms, doors, start, tasks)


def segments_csv(env: Environment2D, path) -> None:
    """Write ``id,x0,y0,x1,y1`` rows."""
    with open(path, "w") as fh:
        fh.write("id,x0,y0,x1,y1\n")
        for i, s in enumerate(env.segments):
            fh.write(f"{i}," + ",".join(repr(float(v)) for v in s) + "\n")
