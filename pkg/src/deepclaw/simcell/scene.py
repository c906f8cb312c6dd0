"""Ground-truth world state: objects resting on the table and named regions."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from ..errors import SceneGenerationError
from ..geometry import RigidTransform, points_in_polygon, rot_z

SHAPES = ("cube", "blob", "jigsaw_piece")
MAX_PLACEMENT_ATTEMPTS = 10_000


@dataclass(frozen=True, eq=False)
class SceneObject:
    """A rigid object resting on the table.

    ``pose`` places the object's footprint center on the table surface with
    a yaw about base z. ``size`` is (length, width) along the object's local
    x and y: the side length twice for cubes and pieces, ellipse axis lengths
    for blobs (local x is the major axis).
    """

    id: int
    shape: str
    pose: RigidTransform
    color: tuple[int, int, int]
    height: float
    size: tuple[float, float]
    texture_id: int | None = None
    label: int | None = None

    def __post_init__(self):
        if self.shape not in SHAPES:
            raise ValueError(f"unknown shape {self.shape!r}")
        if not min(self.size) > 0:
            raise ValueError("object size must be positive")

    def __eq__(self, other):
        if not isinstance(other, SceneObject):
            return NotImplemented
        return (
            self.id == other.id and self.shape == other.shape and self.pose.allclose(other.pose, 1e-12)
            and tuple(self.color) == tuple(other.color) and self.height == other.height
            and tuple(self.size) == tuple(other.size) and self.texture_id == other.texture_id
            and self.label == other.label
        )

    __hash__ = None

    @property
    def center(self) -> np.ndarray:
        return np.array(self.pose.translation[:2])

    @property
    def yaw(self) -> float:
        return self.pose.yaw

    @property
    def graspable_width(self) -> float:
        return min(self.size)

    @property
    def minor_axis_angle(self) -> float:
        if self.size[1] <= self.size[0]:
            return self.yaw + math.pi / 2
        return self.yaw

    @property
    def grasp_symmetry(self) -> float:
        """Period of the parallel-grasp alignment: pi/2 for squares, pi otherwise."""
        return math.pi / 2 if self.size[0] == self.size[1] else math.pi

    @property
    def radius(self) -> float:
        """Radius of a circle that contains the footprint."""
        if self.shape == "blob":
            return max(self.size) / 2
        return math.hypot(*self.size) / 2

    def footprint(self) -> np.ndarray:
        """Footprint outline in base xy. Ellipses are sampled at 64 vertices."""
        a, b = self.size[0] / 2, self.size[1] / 2
        if self.shape == "blob":
            t = np.linspace(0, 2 * math.pi, 64, endpoint=False)
            local = np.stack([a * np.cos(t), b * np.sin(t)], axis=1)
        else:
            local = np.array([[-a, -b], [a, -b], [a, b], [-a, b]])
        r = rot_z(self.yaw)[:2, :2]
        return local @ r.T + self.center

    def to_local(self, xs, ys):
        c, s = math.cos(self.yaw), math.sin(self.yaw)
        dx, dy = np.asarray(xs) - self.center[0], np.asarray(ys) - self.center[1]
        return c * dx + s * dy, -s * dx + c * dy

    def contains(self, xs, ys):
        lx, ly = self.to_local(xs, ys)
        a, b = self.size[0] / 2, self.size[1] / 2
        if self.shape == "blob":
            return (lx / a) ** 2 + (ly / b) ** 2 <= 1.0
        return (np.abs(lx) <= a) & (np.abs(ly) <= b)

    def moved(self, x, y, yaw, z=None) -> "SceneObject":
        z = self.pose.translation[2] if z is None else z
        return replace(self, pose=RigidTransform(rot_z(yaw), [x, y, z]))

    def to_dict(self) -> dict:
        return {
            "id": self.id, "shape": self.shape, "pose": self.pose.to_dict(),
            "color": list(self.color), "height": self.height, "size": list(self.size),
            "texture_id": self.texture_id, "label": self.label,
        }


@dataclass(frozen=True)
class Region:
    """Named axis-aligned rectangle on the table (bins, boards, slots)."""

    name: str
    x_extent: tuple[float, float]
    y_extent: tuple[float, float]

    @classmethod
    def centered(cls, name, cx, cy, sx, sy) -> "Region":
        return cls(name, (cx - sx / 2, cx + sx / 2), (cy - sy / 2, cy + sy / 2))

    @property
    def center(self) -> np.ndarray:
        return np.array([sum(self.x_extent) / 2, sum(self.y_extent) / 2])

    def contains(self, x, y, margin=0.0) -> bool:
        return (self.x_extent[0] + margin <= x <= self.x_extent[1] - margin
                and self.y_extent[0] + margin <= y <= self.y_extent[1] - margin)

    def corners(self) -> np.ndarray:
        (x0, x1), (y0, y1) = self.x_extent, self.y_extent
        return np.array([[x0, y0], [x1, y0], [x1, y1], [x0, y1]])


@dataclass
class Scene:
    """Mutable world state. Objects are kept sorted by id."""

    objects: list[SceneObject] = field(default_factory=list)
    regions: dict[str, Region] = field(default_factory=dict)

    def __post_init__(self):
        self.objects = sorted(self.objects, key=lambda o: o.id)

    def __len__(self):
        return len(self.objects)

    def get(self, object_id) -> SceneObject:
        for obj in self.objects:
            if obj.id == object_id:
                return obj
        raise KeyError(object_id)

    def add(self, obj: SceneObject) -> None:
        if any(o.id == obj.id for o in self.objects):
            raise ValueError(f"duplicate object id {obj.id}")
        self.objects.append(obj)
        self.objects.sort(key=lambda o: o.id)

    def remove(self, object_id) -> SceneObject:
        obj = self.get(object_id)
        self.objects.remove(obj)
        return obj

    def object_at(self, x, y) -> SceneObject | None:
        """Topmost object whose footprint contains (x, y)."""
        hits = [o for o in self.objects if o.contains(x, y)]
        if not hits:
            return None
        return max(hits, key=lambda o: (o.height, -o.id))

    def copy(self) -> "Scene":
        return Scene(list(self.objects), dict(self.regions))

    def overlaps(self, obj: SceneObject, margin=0.0, ignore=()) -> bool:
        """Conservative overlap test using bounding circles."""
        for other in self.objects:
            if other.id == obj.id or other.id in ignore:
                continue
            if np.hypot(*(other.center - obj.center)) < other.radius + obj.radius + margin:
                return True
        return False


def footprints_overlap(a: SceneObject, b: SceneObject) -> bool:
    """Exact-ish footprint intersection test (vertex containment both ways)."""
    pa, pb = a.footprint(), b.footprint()
    return bool(
        points_in_polygon(pa[:, 0], pa[:, 1], pb).any() or points_in_polygon(pb[:, 0], pb[:, 1], pa).any()
    )


def scatter(scene: Scene, objects, region: Region, rng: np.random.Generator, margin=0.01,
            random_yaw=True, surface_z=0.0) -> list[SceneObject]:
    """Rejection-sample non-overlapping poses for ``objects`` inside ``region``.

    Footprints stay fully inside the region. Raises ``SceneGenerationError``
    once ``MAX_PLACEMENT_ATTEMPTS`` draws are exhausted.
    """
    placed = []
    attempts = 0
    for obj in objects:
        while True:
            attempts += 1
            if attempts > MAX_PLACEMENT_ATTEMPTS:
                raise SceneGenerationError(
                    f"could not place {len(objects)} objects in region {region.name!r}"
                )
            r = obj.radius
            if region.x_extent[1] - region.x_extent[0] < 2 * r or region.y_extent[1] - region.y_extent[0] < 2 * r:
                raise SceneGenerationError(f"object {obj.id} does not fit in region {region.name!r}")
            x = rng.uniform(region.x_extent[0] + r, region.x_extent[1] - r)
            y = rng.uniform(region.y_extent[0] + r, region.y_extent[1] - r)
            yaw = rng.uniform(0, 2 * math.pi) if random_yaw else obj.yaw
            cand = obj.moved(x, y, yaw, z=surface_z)
            if not scene.overlaps(cand, margin):
                scene.add(cand)
                placed.append(cand)
                break
    return placed
