"""RGB-D rig calibration and 3D-to-pixel projection.

The projection chain transforms a depth-camera-frame point into the RGB
camera frame with the two rig extrinsics, then applies the pinhole
intrinsics and the perspective divide.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import AllPointsCulled, BehindCamera, CalibrationError
from .geometry import Point2, Point3, PointCloud3, PointSet2

#: near-plane cutoff in meters; points at or behind it have no projection
EPS_Z = 1e-6

_ORTHO_TOL = 1e-6


@dataclass(frozen=True)
class Intrinsics:
    """Zero-skew pinhole intrinsics (pixels)."""

    fx: float
    fy: float
    cx: float
    cy: float

    def __post_init__(self):
        if not np.all(np.isfinite([self.fx, self.fy, self.cx, self.cy])):
            raise ValueError("intrinsics must be finite")
        if self.fx <= 0 or self.fy <= 0:
            raise ValueError("focal lengths must be positive")

    @property
    def matrix(self) -> np.ndarray:
        """3x3 intrinsic matrix."""
        return np.array(
            [[self.fx, 0.0, self.cx], [0.0, self.fy, self.cy], [0.0, 0.0, 1.0]]
        )


class Extrinsics:
    """4x4 rigid transform (orthonormal rotation block, [0,0,0,1] bottom row)."""

    def __init__(self, matrix, tol: float = _ORTHO_TOL):
        m = np.array(matrix, dtype=np.float64).reshape(4, 4)
        if not np.all(np.isfinite(m)):
            raise CalibrationError("extrinsic matrix must be finite")
        if np.max(np.abs(m[3] - np.array([0.0, 0.0, 0.0, 1.0]))) > tol:
            raise CalibrationError("extrinsic bottom row must be [0, 0, 0, 1]")
        r = m[:3, :3]
        if np.max(np.abs(r.T @ r - np.eye(3))) > tol:
            raise CalibrationError("rotation block fails orthonormality tolerance")
        if np.linalg.det(r) < 0:
            raise CalibrationError("rotation block must have determinant +1")
        m.setflags(write=False)
        self._m = m

    @property
    def matrix(self) -> np.ndarray:
        return self._m

    @property
    def rotation(self) -> np.ndarray:
        return self._m[:3, :3]

    @property
    def translation(self) -> np.ndarray:
        return self._m[:3, 3]

    def inverse(self) -> "Extrinsics":
        """Closed-form rigid inverse [R^T | -R^T t]."""
        r = self.rotation.T
        out = np.eye(4)
        out[:3, :3] = r
        out[:3, 3] = -r @ self.translation
        return Extrinsics(out)

    @classmethod
    def identity(cls) -> "Extrinsics":
        return cls(np.eye(4))

    @classmethod
    def from_rt(cls, rotation, translation) -> "Extrinsics":
        m = np.eye(4)
        m[:3, :3] = np.asarray(rotation, dtype=np.float64)
        m[:3, 3] = np.asarray(translation, dtype=np.float64)
        return cls(m)

    @classmethod
    def from_translation(cls, x: float, y: float, z: float) -> "Extrinsics":
        return cls.from_rt(np.eye(3), [x, y, z])

    def __repr__(self) -> str:
        return f"Extrinsics({self._m.tolist()})"


class CameraRig:
    """RGB intrinsics plus the RGB/TOF extrinsic pair of an RGB-D camera.

    The RGB extrinsic is inverted once here and the combined depth-to-RGB
    transform cached, since every projection reuses it.
    """

    def __init__(self, k_rgb: Intrinsics, e_rgb: Extrinsics, e_tof: Extrinsics,
                 width: int, height: int):
        if width < 1 or height < 1:
            raise ValueError("image dimensions must be at least 1x1")
        self.k_rgb = k_rgb
        self.e_rgb = e_rgb
        self.e_tof = e_tof
        self.width = int(width)
        self.height = int(height)
        chain = e_rgb.inverse().matrix @ e_tof.matrix
        self._rot = np.ascontiguousarray(chain[:3, :3])
        self._trans = np.ascontiguousarray(chain[:3, 3])
        self._rot.setflags(write=False)
        self._trans.setflags(write=False)

    @property
    def tof_to_rgb_matrix(self) -> np.ndarray:
        m = np.eye(4)
        m[:3, :3] = self._rot
        m[:3, 3] = self._trans
        return m

    @classmethod
    def identity(cls, fx: float, fy: float, cx: float, cy: float,
                 width: int, height: int) -> "CameraRig":
        """Rig with identity extrinsics; handy for synthetic scenes."""
        return cls(Intrinsics(fx, fy, cx, cy), Extrinsics.identity(),
                   Extrinsics.identity(), width, height)


def _to_xyz(p) -> np.ndarray:
    if isinstance(p, Point3):
        return p.as_array()
    return np.asarray(p, dtype=np.float64).reshape(3)


def tof_to_rgb_frame(p, rig: CameraRig) -> Point3:
    """Transform a depth-frame point into the RGB camera frame."""
    v = rig._rot @ _to_xyz(p) + rig._trans
    return Point3(float(v[0]), float(v[1]), float(v[2]))


def project(p, rig: CameraRig) -> Point2:
    """Project a depth-frame point to RGB pixel coordinates.

    Raises BehindCamera when the transformed depth is at or below the near
    plane; callers must drop such points before hull computation.
    """
    x, y, z = rig._rot @ _to_xyz(p) + rig._trans
    if z <= EPS_Z:
        raise BehindCamera(f"point depth {z:.3g} m is at or behind the near plane")
    k = rig.k_rgb
    return Point2(float(k.fx * x / z + k.cx), float(k.fy * y / z + k.cy))


def project_cloud(cloud: PointCloud3, rig: CameraRig):
    """Project a cloud, keeping points in front of the camera and in frame.

    Returns (projected PointSet2, index_map) where index_map[i] is the
    source row of projected point i.  Culled count is len(cloud) minus the
    output size.
    """
    xyz = cloud.points @ rig._rot.T + rig._trans
    z = xyz[:, 2]
    k = rig.k_rgb
    with np.errstate(divide="ignore", invalid="ignore"):
        u = k.fx * xyz[:, 0] / z + k.cx
        v = k.fy * xyz[:, 1] / z + k.cy
    keep = (z > EPS_Z) & (u >= 0.0) & (u < rig.width) & (v >= 0.0) & (v < rig.height)
    index_map = np.nonzero(keep)[0]
    if index_map.size == 0:
        raise AllPointsCulled("no point projects inside the image frame")
    pts = np.stack([u[keep], v[keep]], axis=1)
    return PointSet2(pts, role="projection"), index_map


def projection_jacobian(p, rig: CameraRig) -> np.ndarray:
    """2x3 Jacobian d(u, v)/d(x, y, z) of the full projection chain.

    Perspective Jacobian at the RGB-frame point, composed with the rigid
    rotation (translation has zero derivative).
    """
    x, y, z = rig._rot @ _to_xyz(p) + rig._trans
    if z <= EPS_Z:
        raise BehindCamera(f"point depth {z:.3g} m is at or behind the near plane")
    k = rig.k_rgb
    persp = np.array(
        [[k.fx / z, 0.0, -k.fx * x / (z * z)],
         [0.0, k.fy / z, -k.fy * y / (z * z)]]
    )
    return persp @ rig._rot


def projection_jacobians(points: np.ndarray, rig: CameraRig) -> np.ndarray:
    """Batched (N, 2, 3) projection Jacobians; all depths must clear EPS_Z."""
    xyz = points @ rig._rot.T + rig._trans
    z = xyz[:, 2]
    if np.any(z <= EPS_Z):
        raise BehindCamera("a point is at or behind the near plane")
    k = rig.k_rgb
    n = points.shape[0]
    persp = np.zeros((n, 2, 3))
    persp[:, 0, 0] = k.fx / z
    persp[:, 1, 1] = k.fy / z
    persp[:, 0, 2] = -k.fx * xyz[:, 0] / (z * z)
    persp[:, 1, 2] = -k.fy * xyz[:, 1] / (z * z)
    return persp @ rig._rot


def rig_from_dict(data: dict) -> CameraRig:
    """Build a rig from the calibration JSON schema.

    Expected keys: k_rgb {fx, fy, cx, cy}, e_rgb and e_tof as row-major
    16-element arrays, width, height.
    """
    try:
        kd = data["k_rgb"]
        intr = Intrinsics(float(kd["fx"]), float(kd["fy"]),
                          float(kd["cx"]), float(kd["cy"]))
        e_rgb = Extrinsics(np.array(data["e_rgb"], dtype=np.float64).reshape(4, 4))
        e_tof = Extrinsics(np.array(data["e_tof"], dtype=np.float64).reshape(4, 4))
        width = int(data["width"])
        height = int(data["height"])
    except (KeyError, TypeError, ValueError) as exc:
        raise CalibrationError(f"bad calibration data: {exc}") from exc
    return CameraRig(intr, e_rgb, e_tof, width, height)


def load_rig(path) -> CameraRig:
    """Load a calibration JSON file (see rig_from_dict)."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise CalibrationError(f"calibration file is not valid JSON: {exc}") from exc
    return rig_from_dict(data)
