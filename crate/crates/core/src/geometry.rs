//! Camera models, poses, rays, and capture-trajectory validation.
//!
//! Conventions (fixed across the toolkit):
//! - Poses are camera-to-world. The camera looks down its local -z axis,
//!   +x is right and +y is up in the camera frame, matching the
//!   COLMAP-to-NeRF `transforms.json` convention.
//! - Pixel centers sit at half-integer offsets: pixel (i, j) samples at
//!   (i + 0.5, j + 0.5).
//! - Roll sign: positive means clockwise when viewed from behind the
//!   camera (looking along the viewing direction).

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};

mod manifest;
pub use manifest::{load_manifest, save_manifest};

/// Orthonormality error below this is accepted untouched.
pub const POSE_ORTHO_EXACT_TOL: f64 = 1e-6;
/// Orthonormality error in (exact, this] is re-orthonormalized by polar
/// projection; beyond it the pose is rejected.
pub const POSE_ORTHO_REJECT_TOL: f64 = 1e-3;

/// Pinhole camera intrinsics in pixel units.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Intrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: u32,
    pub height: u32,
}

impl Intrinsics {
    pub fn validate(&self) -> Result<()> {
        if !(self.fx > 0.0 && self.fy > 0.0) {
            return Err(CoreError::Domain(format!(
                "focal lengths must be positive, got fx={} fy={}",
                self.fx, self.fy
            )));
        }
        if !(0.0..=self.width as f64).contains(&self.cx)
            || !(0.0..=self.height as f64).contains(&self.cy)
        {
            return Err(CoreError::Domain(format!(
                "principal point ({}, {}) outside image {}x{}",
                self.cx, self.cy, self.width, self.height
            )));
        }
        Ok(())
    }
}

/// Rigid camera-to-world transform.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pose {
    pub rotation: Matrix3<f64>,
    pub translation: Vector3<f64>,
}

impl Pose {
    pub fn identity() -> Self {
        Pose {
            rotation: Matrix3::identity(),
            translation: Vector3::zeros(),
        }
    }

    /// Builds a pose, re-orthonormalizing rotations carrying float noise and
    /// rejecting matrices that are not close to a proper rotation.
    pub fn new(rotation: Matrix3<f64>, translation: Vector3<f64>) -> Result<Self> {
        let err = orthonormality_error(&rotation);
        if rotation.determinant() < 0.0 {
            return Err(CoreError::Domain(
                "rotation has negative determinant (reflection)".into(),
            ));
        }
        let rotation = if err <= POSE_ORTHO_EXACT_TOL {
            rotation
        } else if err <= POSE_ORTHO_REJECT_TOL {
            polar_rotation(&rotation)
        } else {
            return Err(CoreError::Domain(format!(
                "rotation orthonormality error {err:.3e} exceeds {POSE_ORTHO_REJECT_TOL:.0e}"
            )));
        };
        Ok(Pose {
            rotation,
            translation,
        })
    }

    /// World-space forward axis (the camera looks along this direction).
    pub fn forward(&self) -> Vector3<f64> {
        -self.rotation.column(2).into_owned()
    }

    /// World-space right axis.
    pub fn right(&self) -> Vector3<f64> {
        self.rotation.column(0).into_owned()
    }

    /// World-space up axis of the camera frame.
    pub fn up(&self) -> Vector3<f64> {
        self.rotation.column(1).into_owned()
    }

    /// Maps a world point into the camera frame.
    pub fn world_to_camera(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.rotation.transpose() * (p - self.translation)
    }
}

/// Frobenius norm of RᵀR - I.
pub fn orthonormality_error(r: &Matrix3<f64>) -> f64 {
    (r.transpose() * r - Matrix3::identity()).norm()
}

/// Nearest rotation in the polar sense (SVD projection, det forced to +1).
fn polar_rotation(r: &Matrix3<f64>) -> Matrix3<f64> {
    let svd = r.svd(true, true);
    let u = svd.u.expect("svd u");
    let vt = svd.v_t.expect("svd v_t");
    let mut rot = u * vt;
    if rot.determinant() < 0.0 {
        let mut u = u;
        for i in 0..3 {
            u[(i, 2)] = -u[(i, 2)];
        }
        rot = u * vt;
    }
    rot
}

/// A ray in world space with a sampling interval.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ray {
    pub origin: Vector3<f64>,
    pub direction: Vector3<f64>,
    pub t_near: f64,
    pub t_far: f64,
}

impl Ray {
    pub fn at(&self, t: f64) -> Vector3<f64> {
        self.origin + self.direction * t
    }

    pub fn with_range(mut self, t_near: f64, t_far: f64) -> Self {
        self.t_near = t_near;
        self.t_far = t_far;
        self
    }
}

/// Default far distance for rays before any scene-specific clipping.
pub const DEFAULT_T_FAR: f64 = 1.0e6;

/// One posed image record.
#[derive(Clone, Debug, PartialEq)]
pub struct FrameEntry {
    pub image_ref: String,
    pub pose: Pose,
    /// Laplacian variance, filled in by the dataset filter.
    pub sharpness: Option<f64>,
}

/// Shared intrinsics plus the ordered capture frames.
#[derive(Clone, Debug, PartialEq)]
pub struct DatasetManifest {
    pub intrinsics: Intrinsics,
    pub frames: Vec<FrameEntry>,
}

impl DatasetManifest {
    pub fn validate(&self) -> Result<()> {
        self.intrinsics.validate()?;
        if self.frames.is_empty() {
            return Err(CoreError::MalformedManifest("no frames".into()));
        }
        let mut seen = std::collections::BTreeSet::new();
        for (i, frame) in self.frames.iter().enumerate() {
            if frame.image_ref.is_empty() {
                return Err(CoreError::MalformedManifest(format!(
                    "frame {i} has empty file_path"
                )));
            }
            if !seen.insert(frame.image_ref.as_str()) {
                return Err(CoreError::MalformedManifest(format!(
                    "duplicate file_path {:?}",
                    frame.image_ref
                )));
            }
            if let Some(s) = frame.sharpness {
                if !(s >= 0.0) {
                    return Err(CoreError::MalformedManifest(format!(
                        "frame {i} has negative sharpness {s}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Casts the ray through pixel (px, py), sampled at the pixel center
/// (px + 0.5, py + 0.5). The origin is the pose translation; the direction
/// is the unit camera-to-world image of ((px+0.5-cx)/fx, -(py+0.5-cy)/fy, -1).
pub fn ray_for_pixel(intr: &Intrinsics, pose: &Pose, px: f64, py: f64) -> Result<Ray> {
    if !(0.0..intr.width as f64).contains(&px) || !(0.0..intr.height as f64).contains(&py) {
        return Err(CoreError::Domain(format!(
            "pixel ({px}, {py}) outside image {}x{}",
            intr.width, intr.height
        )));
    }
    let dir_cam = Vector3::new(
        (px + 0.5 - intr.cx) / intr.fx,
        -(py + 0.5 - intr.cy) / intr.fy,
        -1.0,
    );
    let direction = (pose.rotation * dir_cam).normalize();
    Ok(Ray {
        origin: pose.translation,
        direction,
        t_near: 0.0,
        t_far: DEFAULT_T_FAR,
    })
}

/// Signed roll of the camera about its forward axis, measured against the
/// horizontal plane orthogonal to `up_world`. Positive is clockwise viewed
/// from behind the camera.
pub fn camera_roll(pose: &Pose, up_world: &Vector3<f64>) -> Result<f64> {
    if up_world.norm() == 0.0 {
        return Err(CoreError::Domain("up_world is zero".into()));
    }
    let up = up_world.normalize();
    let fwd = pose.forward();
    let horiz_right = fwd.cross(&up);
    if horiz_right.norm() < 1e-9 {
        return Err(CoreError::DegenerateOrientation);
    }
    // Level reference frame sharing this camera's forward axis.
    let r0 = horiz_right.normalize();
    let u0 = r0.cross(&fwd);
    let right = pose.right();
    Ok((-right.dot(&u0)).atan2(right.dot(&r0)))
}

/// Flags frames whose roll deviates from the dataset median by more than
/// `roll_tol` radians. Frames with a degenerate orientation (forward ∥ up)
/// are always flagged. Output is in ascending frame order.
pub fn validate_trajectory(
    manifest: &DatasetManifest,
    roll_tol: f64,
    up_world: &Vector3<f64>,
) -> Vec<usize> {
    let rolls: Vec<Option<f64>> = manifest
        .frames
        .iter()
        .map(|f| camera_roll(&f.pose, up_world).ok())
        .collect();

    let mut finite: Vec<f64> = rolls.iter().filter_map(|r| *r).collect();
    finite.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = match finite.len() {
        0 => None,
        n if n % 2 == 1 => Some(finite[n / 2]),
        n => Some(0.5 * (finite[n / 2 - 1] + finite[n / 2])),
    };

    rolls
        .iter()
        .enumerate()
        .filter_map(|(i, roll)| match (roll, median) {
            (None, _) => Some(i),
            (Some(r), Some(m)) if (r - m).abs() > roll_tol => Some(i),
            _ => None,
        })
        .collect()
}

/// Axis-aligned box, used as the scene bound for both reconstruction methods.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aabb {
    pub min: [f64; 3],
    pub max: [f64; 3],
}

impl Aabb {
    pub fn new(min: [f64; 3], max: [f64; 3]) -> Self {
        Aabb { min, max }
    }

    pub fn center(&self) -> Vector3<f64> {
        Vector3::new(
            0.5 * (self.min[0] + self.max[0]),
            0.5 * (self.min[1] + self.max[1]),
            0.5 * (self.min[2] + self.max[2]),
        )
    }

    pub fn extent(&self) -> Vector3<f64> {
        Vector3::new(
            self.max[0] - self.min[0],
            self.max[1] - self.min[1],
            self.max[2] - self.min[2],
        )
    }

    pub fn contains(&self, p: &Vector3<f64>) -> bool {
        (0..3).all(|i| p[i] >= self.min[i] && p[i] <= self.max[i])
    }

    /// Maps a contained point into the unit cube.
    pub fn normalize(&self, p: &Vector3<f64>) -> Vector3<f64> {
        let e = self.extent();
        Vector3::new(
            (p[0] - self.min[0]) / e[0],
            (p[1] - self.min[1]) / e[1],
            (p[2] - self.min[2]) / e[2],
        )
    }

    /// Intersects a ray with the box, returning the parameter interval
    /// clipped to [t_near, t_far], or None if the ray misses.
    pub fn clip_ray(&self, ray: &Ray) -> Option<(f64, f64)> {
        let mut t0 = ray.t_near;
        let mut t1 = ray.t_far;
        for i in 0..3 {
            let inv = 1.0 / ray.direction[i];
            let mut a = (self.min[i] - ray.origin[i]) * inv;
            let mut b = (self.max[i] - ray.origin[i]) * inv;
            if a > b {
                std::mem::swap(&mut a, &mut b);
            }
            t0 = t0.max(a);
            t1 = t1.min(b);
            if t0 > t1 {
                return None;
            }
        }
        Some((t0, t1))
    }
}
