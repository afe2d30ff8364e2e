"""Synthetic light-field sampling: pinhole camera rigs over analytic scenes.

A light-field sample is a finite set of (ray, radiance) pairs.  Scenes are
Lambert-shaded spheres under one directional light plus an ambient term, so
radiance values have closed forms and transform exactly under rigid motions
of the whole setup.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace

import numpy as np

from .ray_geometry import Ray, RigidMotion
from .representations import FieldType, act_on_ray_field
from .conv import SampledRayField

__all__ = [
    "Camera",
    "Sphere",
    "Scene",
    "SampleFormatError",
    "look_at_rotation",
    "make_camera_rig",
    "random_scene",
    "trace_radiance",
    "sample_scene",
    "transform_sample",
    "transform_camera",
    "transform_scene",
    "write_sample",
    "read_sample",
    "read_cameras",
]

_EZ = np.array([0.0, 0.0, 1.0])
_EX = np.array([1.0, 0.0, 0.0])


class SampleFormatError(ValueError):
    """A light-field sample file is malformed; the message names the field."""


@dataclass(frozen=True)
class Camera:
    """Pinhole camera: optical axis along the third column of ``R``.

    ``fov`` is the full angle subtended by the image width (pixels are
    square); pixel (i, j) is row i from the top, column j from the left.
    """

    center: np.ndarray
    R: np.ndarray
    fov: float
    width: int
    height: int

    def __post_init__(self):
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float))
        object.__setattr__(self, "R", np.asarray(self.R, dtype=float))
        if not 0.0 < self.fov < np.pi:
            raise ValueError("fov must lie strictly between 0 and pi")

    def pixel_directions(self) -> np.ndarray:
        """World directions of all pixel rays, shape (height*width, 3), row-major."""
        half = np.tan(self.fov / 2.0)
        u = (np.arange(self.width) + 0.5) / self.width * 2.0 - 1.0
        v = (np.arange(self.height) + 0.5) / self.height * 2.0 - 1.0
        uu, vv = np.meshgrid(u * half, v * half)
        cam = np.stack([uu.ravel(), vv.ravel(), np.ones(uu.size)], axis=1)
        cam /= np.linalg.norm(cam, axis=1, keepdims=True)
        return cam @ self.R.T

    def rays(self) -> np.ndarray:
        """Pixel rays through the center as (height*width, 6) Pluecker rows."""
        D = self.pixel_directions()
        M = np.cross(np.broadcast_to(self.center, D.shape), D)
        return np.hstack([D, M])

    def pixel_ray(self, i: int, j: int) -> Ray:
        d = self.pixel_directions()[i * self.width + j]
        return Ray(d, np.cross(self.center, d))

    @property
    def axis(self) -> np.ndarray:
        return self.R[:, 2]


def look_at_rotation(center, target, up=_EZ, fallback=_EX) -> np.ndarray:
    """Orientation whose optical axis points from ``center`` at ``target``.

    Image up is the world ``up`` projected into the image plane; when the
    axis is parallel to ``up`` (within 1e-12) the ``fallback`` vector takes
    its place.
    """
    center = np.asarray(center, dtype=float)
    f = np.asarray(target, dtype=float) - center
    norm = np.linalg.norm(f)
    if norm < 1e-12:
        raise ValueError("camera center coincides with the look-at target")
    f = f / norm
    u = np.asarray(up, dtype=float)
    u_perp = u - (u @ f) * f
    if np.linalg.norm(u_perp) < 1e-12:
        u = np.asarray(fallback, dtype=float)
        u_perp = u - (u @ f) * f
    y = -u_perp / np.linalg.norm(u_perp)  # image rows grow downward
    x = np.cross(y, f)
    return np.stack([x, y, f], axis=1)


def make_camera_rig(
    half_width: float = 1.0, fov: float = 0.9, width: int = 16, height: int = 16
) -> list:
    """Eight cameras on the corners of a cube, all pointing at the origin."""
    if half_width <= 0.0:
        raise ValueError("cube half-width must be positive")
    cams = []
    for sx in (-1.0, 1.0):
        for sy in (-1.0, 1.0):
            for sz in (-1.0, 1.0):
                center = half_width * np.array([sx, sy, sz])
                cams.append(
                    Camera(center, look_at_rotation(center, np.zeros(3)), fov, width, height)
                )
    return cams


@dataclass(frozen=True)
class Sphere:
    center: np.ndarray
    radius: float
    albedo: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float))
        object.__setattr__(self, "albedo", np.asarray(self.albedo, dtype=float))
        if self.radius <= 0.0:
            raise ValueError("sphere radius must be positive")
        if self.albedo.min() < 0.0 or self.albedo.max() > 1.0:
            raise ValueError("albedo components must lie in [0, 1]")


@dataclass(frozen=True)
class Scene:
    """Lambert spheres under one directional light and an ambient term."""

    spheres: tuple
    light: np.ndarray
    ambient: float

    def __post_init__(self):
        light = np.asarray(self.light, dtype=float)
        object.__setattr__(self, "light", light / np.linalg.norm(light))
        object.__setattr__(self, "spheres", tuple(self.spheres))
        if not 0.0 <= self.ambient <= 1.0:
            raise ValueError("ambient term must lie in [0, 1]")


def random_scene(seed: int, n_spheres: int = 3, ambient: float = 0.2) -> Scene:
    """Seeded scene: spheres inside the unit ball with distinct albedos."""
    rng = np.random.default_rng(seed)
    spheres = []
    for _ in range(n_spheres):
        c = rng.uniform(-0.45, 0.45, size=3)
        r = rng.uniform(0.15, 0.35)
        albedo = rng.uniform(0.2, 1.0, size=3)
        spheres.append(Sphere(c, float(r), albedo))
    light = rng.normal(size=3)
    return Scene(tuple(spheres), light, ambient)


def trace_radiance(scene: Scene, origin, directions: np.ndarray) -> np.ndarray:
    """Radiance of the first-hit surface along each ray from ``origin``.

    Shading is ``albedo * (ambient + max(0, n . light))``; rays that miss
    everything return the background (0, 0, 0).
    """
    origin = np.asarray(origin, dtype=float)
    D = np.atleast_2d(np.asarray(directions, dtype=float))
    n = len(D)
    best_t = np.full(n, np.inf)
    out = np.zeros((n, 3))
    for sph in scene.spheres:
        oc = origin - sph.center
        b = D @ oc
        disc = b**2 - (oc @ oc - sph.radius**2)
        ok = disc > 0.0
        t = np.where(ok, -b - np.sqrt(np.where(ok, disc, 0.0)), np.inf)
        t = np.where(t > 1e-9, t, np.inf)
        closer = t < best_t
        if closer.any():
            hit = origin + t[closer, None] * D[closer]
            normal = (hit - sph.center) / sph.radius
            lam = np.maximum(0.0, normal @ scene.light)
            out[closer] = sph.albedo[None, :] * (scene.ambient + lam[:, None])
            best_t[closer] = t[closer]
    return out


def sample_scene(scene: Scene, cameras) -> SampledRayField:
    """Shoot every pixel ray of every camera and record its radiance.

    Ray order is row-major per camera, cameras in rig order; the per-ray
    view index is kept on the field.
    """
    rays, values, views = [], [], []
    for v, cam in enumerate(cameras):
        r = cam.rays()
        rays.append(r)
        values.append(trace_radiance(scene, cam.center, r[:, :3]))
        views.append(np.full(len(r), v))
    return SampledRayField(
        np.vstack(rays),
        np.vstack(values).astype(complex),
        FieldType.scalar(),
        np.concatenate(views),
    )


def transform_sample(g: RigidMotion, v: SampledRayField) -> SampledRayField:
    """Move a sampled field by a rigid motion: rays move, typed values twist."""
    return act_on_ray_field(g, v)


def transform_camera(g: RigidMotion, cam: Camera) -> Camera:
    """Camera after the whole setup moves by ``g``."""
    return replace(cam, center=g.R @ cam.center + g.t, R=g.R @ cam.R)


def transform_scene(g: RigidMotion, scene: Scene) -> Scene:
    """Scene after the whole setup moves by ``g`` (the light only rotates)."""
    spheres = tuple(
        replace(s, center=g.R @ s.center + g.t) for s in scene.spheres
    )
    return Scene(spheres, g.R @ scene.light, scene.ambient)


def write_sample(v: SampledRayField, path, cameras=()) -> None:
    """Write the interchange JSON: cameras, feature type tag, and rays."""
    if v.ftype != FieldType.scalar() or v.channels != 3:
        raise ValueError("sample files carry scalar3 radiance fields only")
    doc = {
        "cameras": [
            {
                "center": c.center.tolist(),
                "rotation_row_major": c.R.ravel().tolist(),
                "fov": c.fov,
                "width": c.width,
                "height": c.height,
            }
            for c in cameras
        ],
        "feature_type": "scalar3",
        "rays": [
            {
                "d": v.rays[i, :3].tolist(),
                "m": v.rays[i, 3:].tolist(),
                "f": v.values[i].real.tolist(),
                "view": int(v.views[i]) if v.views is not None else 0,
            }
            for i in range(v.n_rays)
        ],
    }
    with open(path, "w") as fh:
        json.dump(doc, fh)


def _need(record: dict, key: str, where: str):
    if not isinstance(record, dict) or key not in record:
        raise SampleFormatError(f"{where}: missing field {key!r}")
    return record[key]


def read_sample(path) -> SampledRayField:
    """Read the rays of an interchange file written by :func:`write_sample`.

    Raises
    ------
    SampleFormatError
        Naming the offending record and field when the file is malformed.
    """
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SampleFormatError(f"not valid JSON: {exc}") from exc
    if _need(doc, "feature_type", "header") != "scalar3":
        raise SampleFormatError("header: feature_type must be 'scalar3'")
    rays, values, views = [], [], []
    for i, rec in enumerate(_need(doc, "rays", "header")):
        where = f"ray {i}"
        rays.append(_need(rec, "d", where) + _need(rec, "m", where))
        values.append(_need(rec, "f", where))
        views.append(_need(rec, "view", where))
    return SampledRayField(
        np.asarray(rays, dtype=float).reshape(len(rays), 6),
        np.asarray(values, dtype=complex),
        FieldType.scalar(),
        np.asarray(views, dtype=int),
    )


def read_cameras(path) -> list:
    """Read the camera rig recorded in an interchange file."""
    with open(path) as fh:
        doc = json.load(fh)
    cams = []
    for i, rec in enumerate(_need(doc, "cameras", "header")):
        where = f"camera {i}"
        R = np.asarray(_need(rec, "rotation_row_major", where), dtype=float)
        if R.size != 9:
            raise SampleFormatError(f"{where}: rotation_row_major must have 9 entries")
        cams.append(
            Camera(
                np.asarray(_need(rec, "center", where), dtype=float),
                R.reshape(3, 3),
                float(_need(rec, "fov", where)),
                int(_need(rec, "width", where)),
                int(_need(rec, "height", where)),
            )
        )
    return cams
