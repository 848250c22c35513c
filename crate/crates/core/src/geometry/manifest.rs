//! Manifest JSON ingestion and emission.
//!
//! Schema: `{ fl_x, fl_y, cx, cy, w, h, frames: [{ file_path,
//! transform_matrix (4x4 row-major, camera-to-world), sharpness? }] }`.
//! Unknown keys are ignored on input.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use super::{
    orthonormality_error, DatasetManifest, FrameEntry, Intrinsics, Pose, POSE_ORTHO_REJECT_TOL,
};
use crate::error::{CoreError, Result};

#[derive(Serialize, Deserialize)]
struct ManifestJson {
    fl_x: f64,
    fl_y: f64,
    cx: f64,
    cy: f64,
    w: u32,
    h: u32,
    frames: Vec<FrameJson>,
}

#[derive(Serialize, Deserialize)]
struct FrameJson {
    file_path: String,
    transform_matrix: [[f64; 4]; 4],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sharpness: Option<f64>,
}

/// Parses and validates a manifest. Poses with small orthonormality noise
/// are re-projected onto the rotation group; poses beyond the reject
/// tolerance fail with the offending frame index.
pub fn load_manifest(json_text: &str) -> Result<DatasetManifest> {
    let raw: ManifestJson =
        serde_json::from_str(json_text).map_err(|e| CoreError::MalformedManifest(e.to_string()))?;

    let intrinsics = Intrinsics {
        fx: raw.fl_x,
        fy: raw.fl_y,
        cx: raw.cx,
        cy: raw.cy,
        width: raw.w,
        height: raw.h,
    };

    let mut frames = Vec::with_capacity(raw.frames.len());
    for (i, frame) in raw.frames.iter().enumerate() {
        let m = &frame.transform_matrix;
        if m[3] != [0.0, 0.0, 0.0, 1.0] {
            return Err(CoreError::MalformedManifest(format!(
                "frame {i}: transform_matrix bottom row must be [0, 0, 0, 1], got {:?}",
                m[3]
            )));
        }
        let rotation = Matrix3::new(
            m[0][0], m[0][1], m[0][2], m[1][0], m[1][1], m[1][2], m[2][0], m[2][1], m[2][2],
        );
        let translation = Vector3::new(m[0][3], m[1][3], m[2][3]);
        let pose = Pose::new(rotation, translation).map_err(|_| CoreError::InvalidPose {
            frame: i,
            detail: format!(
                "rotation orthonormality error {:.3e} exceeds {POSE_ORTHO_REJECT_TOL:.0e} \
                 or determinant is negative",
                orthonormality_error(&rotation)
            ),
        })?;
        frames.push(FrameEntry {
            image_ref: frame.file_path.clone(),
            pose,
            sharpness: frame.sharpness,
        });
    }

    let manifest = DatasetManifest { intrinsics, frames };
    manifest.validate()?;
    Ok(manifest)
}

/// Serializes a manifest back to the JSON schema. f64 values round-trip
/// exactly through serde_json's shortest representation.
pub fn save_manifest(manifest: &DatasetManifest) -> Result<String> {
    manifest.validate()?;
    let raw = ManifestJson {
        fl_x: manifest.intrinsics.fx,
        fl_y: manifest.intrinsics.fy,
        cx: manifest.intrinsics.cx,
        cy: manifest.intrinsics.cy,
        w: manifest.intrinsics.width,
        h: manifest.intrinsics.height,
        frames: manifest
            .frames
            .iter()
            .map(|f| {
                let r = &f.pose.rotation;
                let t = &f.pose.translation;
                FrameJson {
                    file_path: f.image_ref.clone(),
                    transform_matrix: [
                        [r[(0, 0)], r[(0, 1)], r[(0, 2)], t[0]],
                        [r[(1, 0)], r[(1, 1)], r[(1, 2)], t[1]],
                        [r[(2, 0)], r[(2, 1)], r[(2, 2)], t[2]],
                        [0.0, 0.0, 0.0, 1.0],
                    ],
                    sharpness: f.sharpness,
                }
            })
            .collect(),
    };
    serde_json::to_string_pretty(&raw).map_err(|e| CoreError::MalformedManifest(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    const IDENTITY_MANIFEST: &str = r#"{
        "fl_x": 64.0, "fl_y": 64.0, "cx": 32.0, "cy": 32.0, "w": 64, "h": 64,
        "frames": [
            {
                "file_path": "frame_0000.png",
                "transform_matrix": [
                    [1.0, 0.0, 0.0, 0.0],
                    [0.0, 1.0, 0.0, 0.0],
                    [0.0, 0.0, 1.0, 0.0],
                    [0.0, 0.0, 0.0, 1.0]
                ]
            }
        ]
    }"#;

    #[test]
    fn loads_identity_manifest() {
        let m = load_manifest(IDENTITY_MANIFEST).unwrap();
        assert_eq!(m.frames.len(), 1);
        assert_eq!(m.frames[0].pose, Pose::identity());
        assert_eq!(m.intrinsics.width, 64);
    }

    #[test]
    fn rejects_bad_bottom_row() {
        let text = IDENTITY_MANIFEST.replace("[0.0, 0.0, 0.0, 1.0]\n", "[0.0, 0.0, 0.1, 1.0]\n");
        // Make sure the replacement actually hit the bottom row.
        assert_ne!(text, IDENTITY_MANIFEST);
        match load_manifest(&text) {
            Err(CoreError::MalformedManifest(msg)) => assert!(msg.contains("bottom row")),
            other => panic!("expected malformed-manifest error, got {other:?}"),
        }
    }

    #[test]
    fn rejects_scaled_rotation_with_frame_index() {
        let text = IDENTITY_MANIFEST
            .replace("[1.0, 0.0, 0.0, 0.0]", "[1.5, 0.0, 0.0, 0.0]")
            .replace("[0.0, 1.0, 0.0, 0.0]", "[0.0, 1.5, 0.0, 0.0]")
            .replace("[0.0, 0.0, 1.0, 0.0]", "[0.0, 0.0, 1.5, 0.0]");
        // ||R^T R - I|| for 1.5*I is 1.25*sqrt(3) ~ 2.17, far over 1e-3.
        let r = Matrix3::<f64>::identity() * 1.5;
        assert!(orthonormality_error(&r) > 1e-3);
        match load_manifest(&text) {
            Err(CoreError::InvalidPose { frame, .. }) => assert_eq!(frame, 0),
            other => panic!("expected invalid-pose error, got {other:?}"),
        }
    }

    #[test]
    fn parse_error_names_missing_field() {
        let text = IDENTITY_MANIFEST.replace("\"fl_x\": 64.0,", "");
        match load_manifest(&text) {
            Err(CoreError::MalformedManifest(msg)) => assert!(msg.contains("fl_x"), "{msg}"),
            other => panic!("expected malformed-manifest error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_keys_are_ignored() {
        let text = IDENTITY_MANIFEST.replace(
            "\"fl_x\": 64.0,",
            "\"fl_x\": 64.0, \"aabb_scale\": 16, \"camera_model\": \"OPENCV\",",
        );
        assert!(load_manifest(&text).is_ok());
    }

    #[test]
    fn round_trip_preserves_pose_matrices() {
        let mut m = load_manifest(IDENTITY_MANIFEST).unwrap();
        // Use a non-trivial rotation with awkward float entries.
        let angle = 0.123456789f64;
        let (s, c) = angle.sin_cos();
        let rot = Matrix3::new(c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c);
        m.frames[0].pose = Pose::new(rot, Vector3::new(0.1, -2.3456789, 7.0)).unwrap();
        let text = save_manifest(&m).unwrap();
        let back = load_manifest(&text).unwrap();
        let dr = (back.frames[0].pose.rotation - m.frames[0].pose.rotation).norm();
        let dt = (back.frames[0].pose.translation - m.frames[0].pose.translation).norm();
        assert!(dr < 1e-12 && dt < 1e-12, "dr={dr} dt={dt}");
    }

    #[test]
    fn duplicate_file_paths_rejected() {
        let m = load_manifest(IDENTITY_MANIFEST).unwrap();
        let mut dup = m.clone();
        dup.frames.push(dup.frames[0].clone());
        assert!(matches!(
            save_manifest(&dup),
            Err(CoreError::MalformedManifest(_))
        ));
    }
}
