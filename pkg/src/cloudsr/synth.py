"""Synthetic test scenes: a sampled surface plus its rendered silhouette.

The ground-truth cloud samples the camera-visible surface on a uniform
grid; the image is a hard-edged silhouette (foreground inside the projected
shape), so edge detection recovers the shape boundary.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .camera import CameraRig, Extrinsics, project_cloud
from .edges import GrayImage
from .errors import ShapeOutOfFrame
from .geometry import PointCloud3

SHAPES = ("square-plane", "box", "sphere")


@dataclass(frozen=True)
class SceneSpec:
    """A single shape posed in the depth-camera frame.

    extent is the side length for square-plane/box and the diameter for
    sphere; density is surface samples per square meter.
    """

    shape: str
    pose: Extrinsics
    extent: float = 0.5
    density: float = 4e4
    fg: float = 1.0
    bg: float = 0.0

    def __post_init__(self):
        if self.shape not in SHAPES:
            raise ValueError(f"shape must be one of {SHAPES}")
        if not self.extent > 0:
            raise ValueError("extent must be positive")
        if not self.density > 0:
            raise ValueError("density must be positive")
        for v in (self.fg, self.bg):
            if not (0.0 <= v <= 1.0):
                raise ValueError("intensities must lie in [0, 1]")
        if self.fg == self.bg:
            raise ValueError("foreground and background must differ")


def _camera_center_in_tof(rig: CameraRig) -> np.ndarray:
    """RGB camera origin expressed in the depth frame."""
    m = rig.tof_to_rgb_matrix
    r, t = m[:3, :3], m[:3, 3]
    return -r.T @ t


def _grid(n: int) -> np.ndarray:
    """n uniform cell-center offsets in (-0.5, 0.5)."""
    return (np.arange(n) + 0.5) / n - 0.5


def _square_local(extent: float, density: float) -> np.ndarray:
    n = max(1, round(extent * np.sqrt(density)))
    ticks = _grid(n) * extent
    xs, ys = np.meshgrid(ticks, ticks)
    return np.stack([xs.ravel(), ys.ravel(), np.zeros(n * n)], axis=1)


def _box_local(extent: float, density: float, cam_local: np.ndarray):
    """Cell-centered samples of the camera-facing faces of a cube."""
    n = max(1, round(extent * np.sqrt(density)))
    ticks = _grid(n) * extent
    a, b = np.meshgrid(ticks, ticks)
    a, b = a.ravel(), b.ravel()
    h = extent / 2.0
    faces = [
        (np.stack([a, b, np.full_like(a, -h)], 1), np.array([0.0, 0, -1])),
        (np.stack([a, b, np.full_like(a, h)], 1), np.array([0.0, 0, 1])),
        (np.stack([a, np.full_like(a, -h), b], 1), np.array([0.0, -1, 0])),
        (np.stack([a, np.full_like(a, h), b], 1), np.array([0.0, 1, 0])),
        (np.stack([np.full_like(a, -h), a, b], 1), np.array([-1.0, 0, 0])),
        (np.stack([np.full_like(a, h), a, b], 1), np.array([1.0, 0, 0])),
    ]
    visible = []
    for pts, normal in faces:
        center = normal * h
        if np.dot(normal, cam_local - center) > 0:
            visible.append(pts)
    if not visible:
        raise ShapeOutOfFrame("no box face is camera-visible")
    return np.vstack(visible)


def _sphere_local(extent: float, density: float, cam_local: np.ndarray) -> np.ndarray:
    """Ring-grid samples of the camera-facing hemisphere."""
    r = extent / 2.0
    d = cam_local.copy()
    norm = np.linalg.norm(d)
    if norm == 0:
        d = np.array([0.0, 0.0, -1.0])
    else:
        d /= norm
    # orthonormal frame around the view axis
    helper = np.array([1.0, 0.0, 0.0]) if abs(d[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    e1 = np.cross(d, helper)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(d, e1)

    spacing = 1.0 / np.sqrt(density)
    n_rings = max(1, round((np.pi / 2.0) * r / spacing))
    pts = [r * d]  # pole
    for i in range(1, n_rings + 1):
        polar = (np.pi / 2.0) * i / n_rings
        ring_r = r * np.sin(polar)
        n_on_ring = max(1, round(2.0 * np.pi * ring_r / spacing))
        ang = 2.0 * np.pi * np.arange(n_on_ring) / n_on_ring
        ring = (
            r * np.cos(polar) * d[None, :]
            + ring_r * np.cos(ang)[:, None] * e1[None, :]
            + ring_r * np.sin(ang)[:, None] * e2[None, :]
        )
        pts.append(ring)
    return np.vstack([p.reshape(-1, 3) for p in pts])


def _pixel_rays(rig: CameraRig):
    """Unnormalized RGB-frame ray directions through every pixel center."""
    k = rig.k_rgb
    us, vs = np.meshgrid(np.arange(rig.width), np.arange(rig.height))
    return np.stack(
        [(us - k.cx) / k.fx, (vs - k.cy) / k.fy, np.ones_like(us, dtype=float)],
        axis=2,
    )


def _convex_silhouette_mask(rig: CameraRig, tof_pts: np.ndarray) -> np.ndarray:
    """Pixels whose centers fall inside the convex hull of projected points."""
    m = rig.tof_to_rgb_matrix
    xyz = tof_pts @ m[:3, :3].T + m[:3, 3]
    if np.any(xyz[:, 2] <= 0):
        raise ShapeOutOfFrame("shape extends behind the camera")
    k = rig.k_rgb
    u = k.fx * xyz[:, 0] / xyz[:, 2] + k.cx
    v = k.fy * xyz[:, 1] / xyz[:, 2] + k.cy
    proj = np.stack([u, v], axis=1)

    # monotone chain over the few projected corners
    order = sorted(range(len(proj)), key=lambda i: (proj[i, 0], proj[i, 1]))

    def cross(o, a, b):
        return (proj[a, 0] - proj[o, 0]) * (proj[b, 1] - proj[o, 1]) - (
            proj[a, 1] - proj[o, 1]
        ) * (proj[b, 0] - proj[o, 0])

    lower: list[int] = []
    for i in order:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], i) <= 0:
            lower.pop()
        lower.append(i)
    upper: list[int] = []
    for i in reversed(order):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], i) <= 0:
            upper.pop()
        upper.append(i)
    hull = proj[lower[:-1] + upper[:-1]]

    us, vs = np.meshgrid(np.arange(rig.width, dtype=float),
                         np.arange(rig.height, dtype=float))
    inside = np.ones(us.shape, dtype=bool)
    n = hull.shape[0]
    for i in range(n):  # CCW hull: inside means left of every edge
        ax, ay = hull[i]
        bx, by = hull[(i + 1) % n]
        inside &= (bx - ax) * (vs - ay) - (by - ay) * (us - ax) >= 0.0
    return inside


def _sphere_silhouette_mask(rig: CameraRig, center_tof: np.ndarray,
                            radius: float) -> np.ndarray:
    m = rig.tof_to_rgb_matrix
    c = m[:3, :3] @ center_tof + m[:3, 3]
    if c[2] <= radius:
        raise ShapeOutOfFrame("sphere extends behind the camera")
    rays = _pixel_rays(rig)
    norms = np.linalg.norm(rays, axis=2)
    along = rays @ c / norms
    perp2 = float(c @ c) - along**2
    return (along > 0) & (perp2 <= radius * radius)


def synth_scene(spec: SceneSpec, rig: CameraRig):
    """Build (ground-truth cloud, silhouette image) for a scene.

    Raises ShapeOutOfFrame unless every surface sample projects in-frame
    and the silhouette stays clear of the image border.
    """
    pose_r = spec.pose.rotation
    pose_t = spec.pose.translation
    cam_tof = _camera_center_in_tof(rig)
    cam_local = pose_r.T @ (cam_tof - pose_t)

    if spec.shape == "square-plane":
        local = _square_local(spec.extent, spec.density)
    elif spec.shape == "box":
        local = _box_local(spec.extent, spec.density, cam_local)
    else:
        local = _sphere_local(spec.extent, spec.density, cam_local)
    world = local @ pose_r.T + pose_t
    cloud = PointCloud3(world)

    _, index_map = project_cloud(cloud, rig)
    if index_map.size != len(cloud):
        raise ShapeOutOfFrame("some surface samples project out of frame")

    if spec.shape == "sphere":
        mask = _sphere_silhouette_mask(rig, pose_t, spec.extent / 2.0)
    else:
        h = spec.extent / 2.0
        if spec.shape == "square-plane":
            corners_local = np.array(
                [[-h, -h, 0.0], [h, -h, 0.0], [h, h, 0.0], [-h, h, 0.0]]
            )
        else:
            corners_local = np.array(
                [[sx * h, sy * h, sz * h]
                 for sx in (-1, 1) for sy in (-1, 1) for sz in (-1, 1)]
            )
        corners = corners_local @ pose_r.T + pose_t
        mask = _convex_silhouette_mask(rig, corners)

    if (mask[0, :].any() or mask[-1, :].any()
            or mask[:, 0].any() or mask[:, -1].any()):
        raise ShapeOutOfFrame("silhouette touches the image border")
    img = np.where(mask, spec.fg, spec.bg)
    return cloud, GrayImage(img)
