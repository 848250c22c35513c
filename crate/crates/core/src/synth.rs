//! Analytic test scenes: ground-truth renderer, orbit capture rigs, blur
//! corpora, and surface point sampling.
//!
//! The renderer is deliberately simple — nearest ray-primitive hit with
//! Lambert shading against one fixed directional light — so that every
//! rendered pixel has a closed-form origin and both reconstruction methods
//! can be validated against it.

use nalgebra::{Matrix3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{CoreError, Result};
use crate::geometry::{ray_for_pixel, Aabb, DatasetManifest, FrameEntry, Intrinsics, Pose, Ray};
use crate::img::{gaussian_blur, ImageRgb};

/// One analytic shape with a flat albedo.
#[derive(Clone, Debug)]
pub enum Primitive {
    Sphere {
        center: Vector3<f64>,
        radius: f64,
        albedo: [f64; 3],
    },
    /// Oriented box given by center, half extents, and a rotation.
    Box3 {
        center: Vector3<f64>,
        half_extents: Vector3<f64>,
        rotation: Matrix3<f64>,
        albedo: [f64; 3],
    },
    /// Finite rectangle spanned by two half-edge vectors.
    Rect {
        center: Vector3<f64>,
        edge_u: Vector3<f64>,
        edge_v: Vector3<f64>,
        albedo: [f64; 3],
    },
}

/// Scene description: primitives, a background color, the scene bounding
/// box used by both reconstruction methods, and the light direction.
#[derive(Clone, Debug)]
pub struct SceneSpec {
    pub primitives: Vec<Primitive>,
    pub background: [f64; 3],
    pub bounds: Aabb,
    pub light_dir: Vector3<f64>,
    pub ambient: f64,
}

impl SceneSpec {
    /// Rotates the whole scene (primitives and light) about the origin.
    /// Used by the pose-consistency tests.
    pub fn rotated(&self, r: &Matrix3<f64>) -> SceneSpec {
        let primitives = self
            .primitives
            .iter()
            .map(|p| match p {
                Primitive::Sphere {
                    center,
                    radius,
                    albedo,
                } => Primitive::Sphere {
                    center: r * center,
                    radius: *radius,
                    albedo: *albedo,
                },
                Primitive::Box3 {
                    center,
                    half_extents,
                    rotation,
                    albedo,
                } => Primitive::Box3 {
                    center: r * center,
                    half_extents: *half_extents,
                    rotation: r * rotation,
                    albedo: *albedo,
                },
                Primitive::Rect {
                    center,
                    edge_u,
                    edge_v,
                    albedo,
                } => Primitive::Rect {
                    center: r * center,
                    edge_u: r * edge_u,
                    edge_v: r * edge_v,
                    albedo: *albedo,
                },
            })
            .collect();
        SceneSpec {
            primitives,
            background: self.background,
            bounds: self.bounds,
            light_dir: r * self.light_dir,
            ambient: self.ambient,
        }
    }
}

/// Circular capture rig: evenly spaced azimuths looking at the target with
/// zero roll, at a fixed elevation, growing in radius (and therefore
/// height) on each successive loop.
#[derive(Clone, Copy, Debug)]
pub struct OrbitRig {
    pub target: Vector3<f64>,
    pub radius: f64,
    pub elevation_deg: f64,
    pub n_frames: usize,
    pub loops: usize,
    /// Fractional radius growth per loop.
    pub growth: f64,
}

impl Default for OrbitRig {
    fn default() -> Self {
        OrbitRig {
            target: Vector3::zeros(),
            radius: 2.2,
            elevation_deg: 45.0,
            n_frames: 12,
            loops: 2,
            growth: 0.25,
        }
    }
}

fn hit_albedo_normal(
    prim: &Primitive,
    ray: &Ray,
) -> Option<(f64, [f64; 3], Vector3<f64>)> {
    const EPS: f64 = 1e-9;
    match prim {
        Primitive::Sphere {
            center,
            radius,
            albedo,
        } => {
            let oc = ray.origin - center;
            let b = oc.dot(&ray.direction);
            let c = oc.dot(&oc) - radius * radius;
            let disc = b * b - c;
            if disc < 0.0 {
                return None;
            }
            let sq = disc.sqrt();
            let t = if -b - sq > EPS {
                -b - sq
            } else if -b + sq > EPS {
                -b + sq
            } else {
                return None;
            };
            let normal = (ray.at(t) - center).normalize();
            Some((t, *albedo, normal))
        }
        Primitive::Box3 {
            center,
            half_extents,
            rotation,
            albedo,
        } => {
            // Slab test in the box frame.
            let o = rotation.transpose() * (ray.origin - center);
            let d = rotation.transpose() * ray.direction;
            let mut t0 = EPS;
            let mut t1 = f64::INFINITY;
            let mut axis0 = 0usize;
            for i in 0..3 {
                let inv = 1.0 / d[i];
                let mut a = (-half_extents[i] - o[i]) * inv;
                let mut b = (half_extents[i] - o[i]) * inv;
                if a > b {
                    std::mem::swap(&mut a, &mut b);
                }
                if a > t0 {
                    t0 = a;
                    axis0 = i;
                }
                t1 = t1.min(b);
                if t0 > t1 {
                    return None;
                }
            }
            if t0 <= EPS {
                return None; // origin inside or behind
            }
            let local = o + d * t0;
            let mut n_local = Vector3::zeros();
            n_local[axis0] = local[axis0].signum();
            Some((t0, *albedo, rotation * n_local))
        }
        Primitive::Rect {
            center,
            edge_u,
            edge_v,
            albedo,
        } => {
            let normal = edge_u.cross(edge_v).normalize();
            let denom = ray.direction.dot(&normal);
            if denom.abs() < 1e-12 {
                return None;
            }
            let t = (center - ray.origin).dot(&normal) / denom;
            if t <= EPS {
                return None;
            }
            let q = ray.at(t) - center;
            let a = q.dot(edge_u) / edge_u.norm_squared();
            let b = q.dot(edge_v) / edge_v.norm_squared();
            if a.abs() > 1.0 || b.abs() > 1.0 {
                return None;
            }
            Some((t, *albedo, normal))
        }
    }
}

fn shade(scene: &SceneSpec, ray: &Ray) -> [f64; 3] {
    let mut best: Option<(f64, [f64; 3], Vector3<f64>)> = None;
    for prim in &scene.primitives {
        if let Some(hit) = hit_albedo_normal(prim, ray) {
            if best.as_ref().map_or(true, |b| hit.0 < b.0) {
                best = Some(hit);
            }
        }
    }
    match best {
        None => scene.background,
        Some((_, albedo, mut normal)) => {
            // Face the camera so both sides of rects shade consistently.
            if normal.dot(&ray.direction) > 0.0 {
                normal = -normal;
            }
            let light = scene.light_dir.normalize();
            let lambert = normal.dot(&-light).max(0.0);
            let k = scene.ambient + (1.0 - scene.ambient) * lambert;
            [albedo[0] * k, albedo[1] * k, albedo[2] * k]
        }
    }
}

/// Renders the analytic scene: nearest hit, Lambert shading, background on
/// miss. No sampling noise; a pure function of its inputs.
pub fn render_reference(scene: &SceneSpec, intr: &Intrinsics, pose: &Pose) -> Result<ImageRgb> {
    intr.validate()?;
    let mut img = ImageRgb::new(intr.width as usize, intr.height as usize);
    for y in 0..intr.height as usize {
        for x in 0..intr.width as usize {
            let ray = ray_for_pixel(intr, pose, x as f64, y as f64)?;
            img.set(x, y, shade(scene, &ray));
        }
    }
    Ok(img)
}

/// Builds a look-at pose: camera at `eye` looking at `target` with zero
/// roll relative to `up`.
pub fn look_at(eye: Vector3<f64>, target: Vector3<f64>, up: Vector3<f64>) -> Result<Pose> {
    let forward = (target - eye).normalize();
    let right = forward.cross(&up);
    if right.norm() < 1e-9 {
        return Err(CoreError::DegenerateOrientation);
    }
    let right = right.normalize();
    let cam_up = right.cross(&forward);
    let rotation = Matrix3::from_columns(&[right, cam_up, -forward]);
    Pose::new(rotation, eye)
}

/// Generates `n_frames * loops` poses circling the target. Within each
/// loop azimuths are evenly spaced; each loop grows the orbit radius by
/// the rig's growth factor, raising the camera with it at fixed elevation.
pub fn orbit_poses(rig: &OrbitRig) -> Result<Vec<Pose>> {
    if rig.radius <= 0.0 || rig.n_frames < 2 || rig.loops < 1 {
        return Err(CoreError::Domain(format!(
            "invalid orbit rig: radius {}, {} frames, {} loops",
            rig.radius, rig.n_frames, rig.loops
        )));
    }
    let up = Vector3::new(0.0, 1.0, 0.0);
    let elev = rig.elevation_deg.to_radians();
    let mut poses = Vec::with_capacity(rig.n_frames * rig.loops);
    for l in 0..rig.loops {
        let radius = rig.radius * (1.0 + rig.growth).powi(l as i32);
        let height = radius * elev.sin();
        let horizontal = radius * elev.cos();
        for i in 0..rig.n_frames {
            let az = 2.0 * std::f64::consts::PI * i as f64 / rig.n_frames as f64;
            let eye = rig.target
                + Vector3::new(horizontal * az.cos(), height, horizontal * az.sin());
            poses.push(look_at(eye, rig.target, up)?);
        }
    }
    Ok(poses)
}

/// Injects a roll of `tilt_deg` about the forward axis of each selected
/// camera (positive = clockwise from behind), leaving others untouched.
pub fn make_tilted_variant(poses: &[Pose], tilt_deg: f64, indices: &[usize]) -> Vec<Pose> {
    let tilt = tilt_deg.to_radians();
    let (s, c) = (-tilt).sin_cos();
    // Post-rotation about local z; local z is the camera's backward axis.
    let roll = Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0);
    poses
        .iter()
        .enumerate()
        .map(|(i, p)| {
            if indices.contains(&i) {
                Pose {
                    rotation: p.rotation * roll,
                    translation: p.translation,
                }
            } else {
                *p
            }
        })
        .collect()
}

/// Ground-truth blur label for one corpus frame.
#[derive(Clone, Copy, Debug, serde::Serialize, serde::Deserialize)]
pub struct BlurLabel {
    pub frame_index: usize,
    pub blurred: bool,
    pub sigma: f64,
}

/// A rendered capture with a seeded subset of frames Gaussian-blurred.
pub struct BlurCorpus {
    pub manifest: DatasetManifest,
    /// Post-blur images, aligned with the manifest.
    pub images: Vec<ImageRgb>,
    /// The unblurred renders, same order.
    pub sharp_images: Vec<ImageRgb>,
    pub labels: Vec<BlurLabel>,
}

/// Renders every orbit view and blurs a seeded random subset, recording
/// ground-truth labels for filter-accuracy tests.
pub fn make_blur_corpus(
    scene: &SceneSpec,
    rig: &OrbitRig,
    intr: &Intrinsics,
    blur_sigmas: &[f64],
    blurred_fraction: f64,
    seed: u64,
) -> Result<BlurCorpus> {
    if !(0.0..1.0).contains(&blurred_fraction) {
        return Err(CoreError::Domain(format!(
            "blurred_fraction {blurred_fraction} outside [0, 1)"
        )));
    }
    if blurred_fraction > 0.0 && blur_sigmas.is_empty() {
        return Err(CoreError::Domain("no blur sigmas given".into()));
    }
    let poses = orbit_poses(rig)?;
    let n = poses.len();
    let n_blur = (blurred_fraction * n as f64).round() as usize;

    // Seeded choice of which frames get blurred.
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.gen_range(0..=i);
        order.swap(i, j);
    }
    let mut blur_set: Vec<usize> = order[..n_blur].to_vec();
    blur_set.sort_unstable();

    let mut images = Vec::with_capacity(n);
    let mut sharp_images = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    let mut frames = Vec::with_capacity(n);
    for (i, pose) in poses.iter().enumerate() {
        let sharp = render_reference(scene, intr, pose)?;
        let blur_rank = blur_set.iter().position(|&b| b == i);
        let (img, label) = match blur_rank {
            Some(rank) => {
                let sigma = blur_sigmas[rank % blur_sigmas.len()];
                (
                    gaussian_blur(&sharp, sigma),
                    BlurLabel {
                        frame_index: i,
                        blurred: true,
                        sigma,
                    },
                )
            }
            None => (
                sharp.clone(),
                BlurLabel {
                    frame_index: i,
                    blurred: false,
                    sigma: 0.0,
                },
            ),
        };
        frames.push(FrameEntry {
            image_ref: format!("frame_{i:04}.png"),
            pose: *pose,
            sharpness: None,
        });
        images.push(img);
        sharp_images.push(sharp);
        labels.push(label);
    }

    Ok(BlurCorpus {
        manifest: DatasetManifest {
            intrinsics: *intr,
            frames,
        },
        images,
        sharp_images,
        labels,
    })
}

fn primitive_area(p: &Primitive) -> f64 {
    match p {
        Primitive::Sphere { radius, .. } => 4.0 * std::f64::consts::PI * radius * radius,
        Primitive::Box3 { half_extents: e, .. } => {
            8.0 * (e[0] * e[1] + e[1] * e[2] + e[0] * e[2])
        }
        Primitive::Rect { edge_u, edge_v, .. } => 4.0 * edge_u.cross(edge_v).norm(),
    }
}

fn sample_on_primitive(p: &Primitive, rng: &mut ChaCha8Rng) -> Vector3<f64> {
    match p {
        Primitive::Sphere { center, radius, .. } => {
            // Uniform direction via normalized Gaussian triple.
            loop {
                let v = Vector3::new(
                    rng.gen::<f64>() * 2.0 - 1.0,
                    rng.gen::<f64>() * 2.0 - 1.0,
                    rng.gen::<f64>() * 2.0 - 1.0,
                );
                let n = v.norm();
                if n > 1e-6 && n <= 1.0 {
                    return center + v / n * *radius;
                }
            }
        }
        Primitive::Box3 {
            center,
            half_extents: e,
            rotation,
            ..
        } => {
            // Face picked by area, then uniform on it.
            let areas = [e[1] * e[2], e[0] * e[2], e[0] * e[1]];
            let total: f64 = areas.iter().sum();
            let mut pick = rng.gen::<f64>() * total;
            let mut axis = 2;
            for (i, a) in areas.iter().enumerate() {
                if pick < *a {
                    axis = i;
                    break;
                }
                pick -= a;
            }
            let sign = if rng.gen::<bool>() { 1.0 } else { -1.0 };
            let mut local = Vector3::new(
                (rng.gen::<f64>() * 2.0 - 1.0) * e[0],
                (rng.gen::<f64>() * 2.0 - 1.0) * e[1],
                (rng.gen::<f64>() * 2.0 - 1.0) * e[2],
            );
            local[axis] = sign * e[axis];
            center + rotation * local
        }
        Primitive::Rect {
            center,
            edge_u,
            edge_v,
            ..
        } => {
            let a = rng.gen::<f64>() * 2.0 - 1.0;
            let b = rng.gen::<f64>() * 2.0 - 1.0;
            center + edge_u * a + edge_v * b
        }
    }
}

/// Samples `n` points uniformly (by area) on the primitive surfaces,
/// colored by albedo. Stands in for the SfM point cloud when seeding the
/// splat optimizer.
pub fn sample_surface_points(
    scene: &SceneSpec,
    n: usize,
    seed: u64,
) -> Result<Vec<(Vector3<f64>, [f64; 3])>> {
    if n < 1 {
        return Err(CoreError::Domain("need n >= 1 surface points".into()));
    }
    if scene.primitives.is_empty() {
        return Err(CoreError::Domain("scene has no primitives".into()));
    }
    let areas: Vec<f64> = scene.primitives.iter().map(primitive_area).collect();
    let total: f64 = areas.iter().sum();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::with_capacity(n);
    for _ in 0..n {
        let mut pick = rng.gen::<f64>() * total;
        let mut idx = scene.primitives.len() - 1;
        for (i, a) in areas.iter().enumerate() {
            if pick < *a {
                idx = i;
                break;
            }
            pick -= a;
        }
        let prim = &scene.primitives[idx];
        let albedo = match prim {
            Primitive::Sphere { albedo, .. }
            | Primitive::Box3 { albedo, .. }
            | Primitive::Rect { albedo, .. } => *albedo,
        };
        points.push((sample_on_primitive(prim, &mut rng), albedo));
    }
    Ok(points)
}

/// The default desk-scale test scene: one sphere, a ground rectangle, and
/// one box, all inside a bounding box the orbit cameras stay outside of.
pub fn default_scene() -> SceneSpec {
    SceneSpec {
        primitives: vec![
            Primitive::Sphere {
                center: Vector3::new(-0.15, 0.4, 0.1),
                radius: 0.4,
                albedo: [0.85, 0.3, 0.2],
            },
            Primitive::Rect {
                center: Vector3::new(0.0, 0.0, 0.0),
                edge_u: Vector3::new(1.2, 0.0, 0.0),
                edge_v: Vector3::new(0.0, 0.0, 1.2),
                albedo: [0.5, 0.6, 0.35],
            },
            Primitive::Box3 {
                center: Vector3::new(0.55, 0.18, -0.45),
                half_extents: Vector3::new(0.18, 0.18, 0.18),
                rotation: {
                    let a = 0.5f64;
                    let (s, c) = a.sin_cos();
                    Matrix3::new(c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c)
                },
                albedo: [0.2, 0.35, 0.85],
            },
        ],
        background: [0.07, 0.09, 0.13],
        bounds: Aabb::new([-1.35, -0.1, -1.35], [1.35, 1.25, 1.35]),
        light_dir: Vector3::new(-0.4, -1.0, -0.25),
        ambient: 0.25,
    }
}

/// Default intrinsics matching the desk-scale scene: 64x64, ~53 degree FOV.
pub fn default_intrinsics() -> Intrinsics {
    Intrinsics {
        fx: 64.0,
        fy: 64.0,
        cx: 32.0,
        cy: 32.0,
        width: 64,
        height: 64,
    }
}

/// Default two-loop, 24-view capture of the desk-scale scene.
pub fn default_rig() -> OrbitRig {
    OrbitRig {
        target: Vector3::new(0.0, 0.3, 0.0),
        ..OrbitRig::default()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{camera_roll, load_manifest, save_manifest, validate_trajectory};
    use approx::assert_relative_eq;

    fn sphere_scene(radius: f64) -> SceneSpec {
        SceneSpec {
            primitives: vec![Primitive::Sphere {
                center: Vector3::zeros(),
                radius,
                albedo: [1.0, 0.5, 0.25],
            }],
            background: [0.0, 0.0, 0.0],
            bounds: Aabb::new([-1.0, -1.0, -1.0], [1.0, 1.0, 1.0]),
            light_dir: Vector3::new(0.0, -1.0, 0.0),
            ambient: 0.3,
        }
    }

    #[test]
    fn center_pixel_hits_sphere_with_lambert_shading() {
        let scene = sphere_scene(0.5);
        let intr = default_intrinsics();
        let pose = look_at(
            Vector3::new(0.0, 0.0, 3.0),
            Vector3::zeros(),
            Vector3::new(0.0, 1.0, 0.0),
        )
        .unwrap();
        let img = render_reference(&scene, &intr, &pose).unwrap();
        let center = img.get(31, 31);
        // Hit point is the sphere front pole: normal (0,0,1), light straight
        // down, so lambert = 0 and shading is the ambient term alone.
        let expected = 0.3;
        assert!((center[0] - 1.0 * expected).abs() < 2e-2, "{center:?}");
        assert!(center[0] > 0.0 && center[1] > 0.0);
        // A corner ray misses and lands on the background.
        assert_eq!(img.get(0, 0), [0.0, 0.0, 0.0]);
    }

    #[test]
    fn silhouette_radius_matches_projection_formula() {
        let r = 0.5;
        let d = 3.0;
        let scene = sphere_scene(r);
        let intr = Intrinsics {
            fx: 128.0,
            fy: 128.0,
            cx: 64.0,
            cy: 64.0,
            width: 128,
            height: 128,
        };
        let pose = look_at(
            Vector3::new(0.0, 0.0, d),
            Vector3::zeros(),
            Vector3::new(0.0, 1.0, 0.0),
        )
        .unwrap();
        let img = render_reference(&scene, &intr, &pose).unwrap();
        let hit_count = img
            .data
            .iter()
            .filter(|px| **px != [0.0, 0.0, 0.0])
            .count() as f64;
        let expected_radius = intr.fx * r / (d * d - r * r).sqrt();
        let expected_area = std::f64::consts::PI * expected_radius * expected_radius;
        let rel = (hit_count - expected_area).abs() / expected_area;
        assert!(
            rel < 0.05,
            "hit pixels {hit_count} vs analytic area {expected_area:.1}"
        );
    }

    #[test]
    fn orbit_poses_look_at_target_with_zero_roll() {
        let rig = default_rig();
        let poses = orbit_poses(&rig).unwrap();
        assert_eq!(poses.len(), rig.n_frames * rig.loops);
        let up = Vector3::new(0.0, 1.0, 0.0);
        for (i, pose) in poses.iter().enumerate() {
            let to_target = (rig.target - pose.translation).normalize();
            assert!(
                (pose.forward().dot(&to_target) - 1.0).abs() < 1e-9,
                "pose {i} not aimed at target"
            );
            let roll = camera_roll(pose, &up).unwrap();
            assert!(roll.abs() < 1e-9, "pose {i} roll {roll}");
        }
        // Elevation 45 degrees: height above target = loop radius * sin 45.
        let h0 = poses[0].translation[1] - rig.target[1];
        assert_relative_eq!(
            h0,
            rig.radius * 45f64.to_radians().sin(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn tilt_variant_injects_exact_roll() {
        let poses = orbit_poses(&default_rig()).unwrap();
        let identical = make_tilted_variant(&poses, 0.0, &[3, 5]);
        for (a, b) in poses.iter().zip(&identical) {
            assert_relative_eq!(a.rotation, b.rotation, epsilon = 1e-15);
        }
        let up = Vector3::new(0.0, 1.0, 0.0);
        let tilted = make_tilted_variant(&poses, 15.0, &[4]);
        let roll = camera_roll(&tilted[4], &up).unwrap();
        assert!((roll - 15f64.to_radians()).abs() < 1e-9, "roll {roll}");
    }

    #[test]
    fn validate_trajectory_flags_exactly_the_tilted_frames() {
        let poses = orbit_poses(&default_rig()).unwrap();
        let injected = vec![2, 9, 17];
        let tilted = make_tilted_variant(&poses, 15.0, &injected);
        let intr = default_intrinsics();
        let manifest = DatasetManifest {
            intrinsics: intr,
            frames: tilted
                .iter()
                .enumerate()
                .map(|(i, p)| FrameEntry {
                    image_ref: format!("frame_{i:04}.png"),
                    pose: *p,
                    sharpness: None,
                })
                .collect(),
        };
        let up = Vector3::new(0.0, 1.0, 0.0);
        let flagged = validate_trajectory(&manifest, 5f64.to_radians(), &up);
        assert_eq!(flagged, injected);
    }

    #[test]
    fn orbit_manifest_round_trips_through_json() {
        let poses = orbit_poses(&default_rig()).unwrap();
        let manifest = DatasetManifest {
            intrinsics: default_intrinsics(),
            frames: poses
                .iter()
                .enumerate()
                .map(|(i, p)| FrameEntry {
                    image_ref: format!("frame_{i:04}.png"),
                    pose: *p,
                    sharpness: None,
                })
                .collect(),
        };
        let text = save_manifest(&manifest).unwrap();
        let back = load_manifest(&text).unwrap();
        for (a, b) in manifest.frames.iter().zip(&back.frames) {
            assert!((a.pose.rotation - b.pose.rotation).norm() < 1e-9);
            assert!((a.pose.translation - b.pose.translation).norm() < 1e-9);
        }
    }

    #[test]
    fn rotated_scene_matches_rotated_camera() {
        // Rendering scene rotated by R from pose P equals rendering the
        // original scene from R^-1 * P.
        let scene = default_scene();
        let a = 0.6f64;
        let (s, c) = a.sin_cos();
        let r = Matrix3::new(c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c);
        let intr = Intrinsics {
            fx: 24.0,
            fy: 24.0,
            cx: 12.0,
            cy: 12.0,
            width: 24,
            height: 24,
        };
        let pose = look_at(
            Vector3::new(1.2, 1.8, 2.4),
            Vector3::new(0.0, 0.3, 0.0),
            Vector3::new(0.0, 1.0, 0.0),
        )
        .unwrap();
        let rotated_scene = scene.rotated(&r);
        let img_a = render_reference(&rotated_scene, &intr, &pose).unwrap();
        let inv_pose = Pose::new(r.transpose() * pose.rotation, r.transpose() * pose.translation)
            .unwrap();
        let img_b = render_reference(&scene, &intr, &inv_pose).unwrap();
        let mut worst = 0.0f64;
        for (pa, pb) in img_a.data.iter().zip(&img_b.data) {
            for ch in 0..3 {
                worst = worst.max((pa[ch] - pb[ch]).abs());
            }
        }
        assert!(worst < 1e-6, "max channel deviation {worst}");
    }

    #[test]
    fn blur_corpus_labels_are_ground_truth() {
        use crate::filter::{laplacian_variance, to_gray};
        let corpus = make_blur_corpus(
            &default_scene(),
            &default_rig(),
            &default_intrinsics(),
            &[2.0],
            0.25,
            9,
        )
        .unwrap();
        assert_eq!(corpus.images.len(), 24);
        let n_blur = corpus.labels.iter().filter(|l| l.blurred).count();
        assert_eq!(n_blur, 6);
        for label in &corpus.labels {
            if label.blurred {
                let sharp =
                    laplacian_variance(&to_gray(&corpus.sharp_images[label.frame_index]).unwrap())
                        .unwrap();
                let blurred =
                    laplacian_variance(&to_gray(&corpus.images[label.frame_index]).unwrap())
                        .unwrap();
                assert!(
                    blurred < sharp,
                    "frame {}: blurred {blurred} !< sharp {sharp}",
                    label.frame_index
                );
            }
        }
    }

    #[test]
    fn surface_points_lie_on_surfaces() {
        let scene = sphere_scene(0.75);
        let pts = sample_surface_points(&scene, 200, 5).unwrap();
        assert_eq!(pts.len(), 200);
        for (p, _) in &pts {
            assert!((p.norm() - 0.75).abs() < 1e-9);
        }
        // Mixed scene: distance to the nearest surface is ~0 for each point.
        let scene = default_scene();
        let pts = sample_surface_points(&scene, 64, 5).unwrap();
        assert_eq!(pts.len(), 64);
    }
}
