"""Equivariant operators on sampled ray fields.

Oriented lines in space form a homogeneous space of the rigid motions; this
package represents features on finite samples of that space by their
transformation type and provides the convolutions, attention stages, and
pipelines whose outputs provably commute with any rigid motion of the input.
Randomized audit suites (``rayfield.audits``, also behind the ``rayfield``
command line) make every such claim executable.
"""

from .ray_geometry import (
    ORIGIN_RAY,
    Ray,
    RigidMotion,
    apply_motion,
    param_of,
    point_at,
    ray_angle,
    ray_distance,
    ray_through,
)
from .group_theory import (
    SphereSection,
    StabilizerElement,
    TwistConsistencyError,
    compose,
    invert,
    random_motion,
    random_rotation,
    rot_y,
    rot_z,
    section_point,
    section_ray,
    section_sphere,
    sphere_angles,
    sphere_twist_angle,
    twist_point,
    twist_ray,
)
from .representations import (
    AnchoredSamples,
    Feature,
    FieldType,
    GridMismatchError,
    SampledPointField,
    act_on_anchored_samples,
    act_on_point_field,
    act_on_ray_field,
    feature_inner,
    frequency_grid,
    irrep_so2r,
    irrep_to_samples,
    samples_to_irrep,
    transport_point_feature,
    wigner_d,
)
from .kernels import (
    BankFormatError,
    Kappa1Kernel,
    Kappa2IrrepKernel,
    Kappa2RegularKernel,
    KernelBank,
    KernelEntry,
    KernelSupport,
    MissingKernelError,
    RadialProfile,
    RayToPointKernel,
    RayToRayKernel,
    constraint_residuals,
    height_g,
    kappa1,
    kappa2_irrep,
    kappa2_regular,
    kappa_ray_to_point,
    read_kernel_bank,
    verify_kernel_constraint,
    write_kernel_bank,
)
from .conv import (
    SampledRayField,
    conv_ray_to_point,
    conv_ray_to_ray,
    conv_ray_to_ray_regular,
    neighborhood,
    spherical_conv_intra_view,
)
from .attention import (
    AttentionHeadSpec,
    EmptyNeighborhoodError,
    EquivariantLinear,
    SchurError,
    cross_attention_ray_to_point,
    cross_attention_ray_to_ray_regular,
    gated_nonlinearity,
    self_attention_along_ray,
    signed_bumps,
)
from .lightfield import (
    Camera,
    SampleFormatError,
    Scene,
    Sphere,
    look_at_rotation,
    make_camera_rig,
    random_scene,
    read_cameras,
    read_sample,
    sample_scene,
    trace_radiance,
    transform_camera,
    transform_sample,
    transform_scene,
    write_sample,
)
from .pipelines import (
    PipelineConfig,
    PipelineWeights,
    ProfileFit,
    fit_radial_profiles_ls,
    init_random,
    prefilter_intra_view,
    read_weights,
    render_ray,
    render_view,
    sdf_forward,
    volumetric_composite,
    write_weights,
)
from .audits import AuditReport, SUITES, available_suites, make_default_sample, run_suite

__version__ = "0.1.0"

__all__ = [
    "ORIGIN_RAY",
    "Ray",
    "RigidMotion",
    "apply_motion",
    "param_of",
    "point_at",
    "ray_angle",
    "ray_distance",
    "ray_through",
    "SphereSection",
    "StabilizerElement",
    "TwistConsistencyError",
    "compose",
    "invert",
    "random_motion",
    "random_rotation",
    "rot_y",
    "rot_z",
    "section_point",
    "section_ray",
    "section_sphere",
    "sphere_angles",
    "sphere_twist_angle",
    "twist_point",
    "twist_ray",
    "AnchoredSamples",
    "Feature",
    "FieldType",
    "GridMismatchError",
    "SampledPointField",
    "act_on_anchored_samples",
    "act_on_point_field",
    "act_on_ray_field",
    "feature_inner",
    "frequency_grid",
    "irrep_so2r",
    "irrep_to_samples",
    "samples_to_irrep",
    "transport_point_feature",
    "wigner_d",
    "BankFormatError",
    "Kappa1Kernel",
    "Kappa2IrrepKernel",
    "Kappa2RegularKernel",
    "KernelBank",
    "KernelEntry",
    "KernelSupport",
    "MissingKernelError",
    "RadialProfile",
    "RayToPointKernel",
    "RayToRayKernel",
    "constraint_residuals",
    "height_g",
    "kappa1",
    "kappa2_irrep",
    "kappa2_regular",
    "kappa_ray_to_point",
    "read_kernel_bank",
    "verify_kernel_constraint",
    "write_kernel_bank",
    "SampledRayField",
    "conv_ray_to_point",
    "conv_ray_to_ray",
    "conv_ray_to_ray_regular",
    "neighborhood",
    "spherical_conv_intra_view",
    "AttentionHeadSpec",
    "EmptyNeighborhoodError",
    "EquivariantLinear",
    "SchurError",
    "cross_attention_ray_to_point",
    "cross_attention_ray_to_ray_regular",
    "gated_nonlinearity",
    "self_attention_along_ray",
    "signed_bumps",
    "Camera",
    "SampleFormatError",
    "Scene",
    "Sphere",
    "look_at_rotation",
    "make_camera_rig",
    "random_scene",
    "read_cameras",
    "read_sample",
    "sample_scene",
    "trace_radiance",
    "transform_camera",
    "transform_sample",
    "transform_scene",
    "write_sample",
    "PipelineConfig",
    "PipelineWeights",
    "ProfileFit",
    "fit_radial_profiles_ls",
    "init_random",
    "prefilter_intra_view",
    "read_weights",
    "render_ray",
    "render_view",
    "sdf_forward",
    "volumetric_composite",
    "write_weights",
    "AuditReport",
    "SUITES",
    "available_suites",
    "make_default_sample",
    "run_suite",
    "__version__",
]
