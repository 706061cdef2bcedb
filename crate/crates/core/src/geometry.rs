//! Points, rigid poses and the pinhole camera model.

use std::ops::{Add, Mul, Sub};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub const ORIGIN: Point3 = Point3 {
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Point3 { x, y, z }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        Point3::new(a[0], a[1], a[2])
    }

    pub fn dot(&self, other: &Point3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn distance(&self, other: &Point3) -> f64 {
        (*self - *other).norm()
    }
}

impl Add for Point3 {
    type Output = Point3;
    fn add(self, o: Point3) -> Point3 {
        Point3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Point3 {
    type Output = Point3;
    fn sub(self, o: Point3) -> Point3 {
        Point3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Point3 {
    type Output = Point3;
    fn mul(self, s: f64) -> Point3 {
        Point3::new(self.x * s, self.y * s, self.z * s)
    }
}

pub type Matrix3 = [[f64; 3]; 3];

const IDENTITY3: Matrix3 = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];

fn mat_mul(a: &Matrix3, b: &Matrix3) -> Matrix3 {
    let mut out = [[0.0; 3]; 3];
    for (r, row) in out.iter_mut().enumerate() {
        for (c, v) in row.iter_mut().enumerate() {
            *v = (0..3).map(|k| a[r][k] * b[k][c]).sum();
        }
    }
    out
}

fn transpose(a: &Matrix3) -> Matrix3 {
    let mut out = [[0.0; 3]; 3];
    for r in 0..3 {
        for c in 0..3 {
            out[r][c] = a[c][r];
        }
    }
    out
}

fn determinant(a: &Matrix3) -> f64 {
    a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
        + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
}

/// Largest absolute entry of `R^T R - I`.
fn orthonormality_error(r: &Matrix3) -> f64 {
    let rtr = mat_mul(&transpose(r), r);
    let mut err: f64 = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            err = err.max((rtr[i][j] - IDENTITY3[i][j]).abs());
        }
    }
    err
}

/// Rigid transform mapping points from a local (sensor or camera) frame into
/// the world frame.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pose {
    rotation: Matrix3,
    translation: Point3,
}

impl Pose {
    /// Tolerance used to accept a rotation matrix.
    pub const ROTATION_TOLERANCE: f64 = 1e-6;

    pub fn new(rotation: Matrix3, translation: Point3) -> Result<Self> {
        if rotation.iter().flatten().any(|v| !v.is_finite()) || !translation.is_finite() {
            return Err(Error::NonFinite("pose"));
        }
        let ortho = orthonormality_error(&rotation);
        let det = determinant(&rotation);
        if ortho > Self::ROTATION_TOLERANCE || (det - 1.0).abs() > Self::ROTATION_TOLERANCE {
            return Err(Error::InvalidParameter(format!(
                "rotation is not orthonormal with det +1 (orthonormality error {ortho:.3e}, det {det})"
            )));
        }
        Ok(Pose {
            rotation,
            translation,
        })
    }

    pub fn identity() -> Self {
        Pose {
            rotation: IDENTITY3,
            translation: Point3::ORIGIN,
        }
    }

    pub fn from_translation(t: Point3) -> Self {
        Pose {
            rotation: IDENTITY3,
            translation: t,
        }
    }

    /// Rotation of `angle` radians about a unit `axis` (Rodrigues).
    pub fn from_axis_angle(axis: Point3, angle: f64, translation: Point3) -> Result<Self> {
        let n = axis.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::InvalidParameter("rotation axis must be non-zero".into()));
        }
        let (x, y, z) = (axis.x / n, axis.y / n, axis.z / n);
        let (s, c) = angle.sin_cos();
        let t = 1.0 - c;
        let rotation = [
            [t * x * x + c, t * x * y - s * z, t * x * z + s * y],
            [t * x * y + s * z, t * y * y + c, t * y * z - s * x],
            [t * x * z - s * y, t * y * z + s * x, t * z * z + c],
        ];
        Pose::new(rotation, translation)
    }

    /// Row-major 3x4 `[R | t]`, the layout of KITTI pose files.
    pub fn from_row_major_3x4(m: &[f64; 12]) -> Result<Self> {
        let rotation = [[m[0], m[1], m[2]], [m[4], m[5], m[6]], [m[8], m[9], m[10]]];
        Pose::new(rotation, Point3::new(m[3], m[7], m[11]))
    }

    pub fn to_row_major_3x4(&self) -> [f64; 12] {
        let r = &self.rotation;
        let t = &self.translation;
        [
            r[0][0], r[0][1], r[0][2], t.x, r[1][0], r[1][1], r[1][2], t.y, r[2][0], r[2][1], r[2][2], t.z,
        ]
    }

    pub fn rotation(&self) -> &Matrix3 {
        &self.rotation
    }

    pub fn translation(&self) -> Point3 {
        self.translation
    }

    pub fn rotate(&self, p: Point3) -> Point3 {
        let r = &self.rotation;
        Point3::new(
            r[0][0] * p.x + r[0][1] * p.y + r[0][2] * p.z,
            r[1][0] * p.x + r[1][1] * p.y + r[1][2] * p.z,
            r[2][0] * p.x + r[2][1] * p.y + r[2][2] * p.z,
        )
    }

    /// Local frame -> world frame.
    pub fn transform_point(&self, p: Point3) -> Point3 {
        self.rotate(p) + self.translation
    }

    /// World frame -> local frame.
    pub fn inverse_transform_point(&self, p: Point3) -> Point3 {
        let d = p - self.translation;
        let r = &self.rotation;
        Point3::new(
            r[0][0] * d.x + r[1][0] * d.y + r[2][0] * d.z,
            r[0][1] * d.x + r[1][1] * d.y + r[2][1] * d.z,
            r[0][2] * d.x + r[1][2] * d.y + r[2][2] * d.z,
        )
    }

    pub fn inverse(&self) -> Pose {
        let rt = transpose(&self.rotation);
        let inv = Pose {
            rotation: rt,
            translation: Point3::ORIGIN,
        };
        Pose {
            rotation: rt,
            translation: inv.rotate(self.translation) * -1.0,
        }
    }

    /// `self * other`: apply `other` first, then `self`.
    pub fn compose(&self, other: &Pose) -> Pose {
        Pose {
            rotation: mat_mul(&self.rotation, &other.rotation),
            translation: self.transform_point(other.translation),
        }
    }

    pub fn orthonormality_error(&self) -> f64 {
        orthonormality_error(&self.rotation)
    }
}

/// Pinhole intrinsics. Pixel centers sit at integer coordinates, so pixel
/// `(col, row)` corresponds to `(u, v) = (col, row)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CameraIntrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: usize,
    pub height: usize,
}

impl CameraIntrinsics {
    pub fn new(fx: f64, fy: f64, cx: f64, cy: f64, width: usize, height: usize) -> Result<Self> {
        let ok = fx > 0.0
            && fy > 0.0
            && fx.is_finite()
            && fy.is_finite()
            && width > 0
            && height > 0
            && (0.0..width as f64).contains(&cx)
            && (0.0..height as f64).contains(&cy);
        if !ok {
            return Err(Error::InvalidParameter(format!(
                "camera intrinsics fx={fx} fy={fy} cx={cx} cy={cy} size={width}x{height}"
            )));
        }
        Ok(CameraIntrinsics {
            fx,
            fy,
            cx,
            cy,
            width,
            height,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Projection {
    /// Continuous pixel coordinates and camera-frame depth.
    Pixel { u: f64, v: f64, depth: f64 },
    BehindCamera,
}

impl Projection {
    /// Integer pixel `(col, row)` when the projection falls inside the image.
    pub fn pixel_in(&self, intr: &CameraIntrinsics) -> Option<(usize, usize)> {
        match *self {
            Projection::Pixel { u, v, .. } => {
                let (col, row) = (u.round(), v.round());
                if col >= 0.0 && row >= 0.0 && (col as usize) < intr.width && (row as usize) < intr.height {
                    Some((col as usize, row as usize))
                } else {
                    None
                }
            }
            Projection::BehindCamera => None,
        }
    }
}

/// Projects a world point into the image of a camera at `camera_pose`
/// (world-from-camera; camera looks along +Z, X right, Y down).
pub fn project_point(p: Point3, camera_pose: &Pose, intr: &CameraIntrinsics) -> Projection {
    let c = camera_pose.inverse_transform_point(p);
    if c.z <= 0.0 {
        return Projection::BehindCamera;
    }
    Projection::Pixel {
        u: intr.fx * c.x / c.z + intr.cx,
        v: intr.fy * c.y / c.z + intr.cy,
        depth: c.z,
    }
}

/// Inverse of [`project_point`] for a known depth.
pub fn backproject_pixel(u: f64, v: f64, depth: f64, camera_pose: &Pose, intr: &CameraIntrinsics) -> Result<Point3> {
    if !(depth > 0.0 && depth.is_finite()) {
        return Err(Error::InvalidDepth(depth));
    }
    if !u.is_finite() || !v.is_finite() {
        return Err(Error::NonFinite("pixel"));
    }
    let c = Point3::new((u - intr.cx) / intr.fx * depth, (v - intr.cy) / intr.fy * depth, depth);
    Ok(camera_pose.transform_point(c))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn vga() -> CameraIntrinsics {
        CameraIntrinsics::new(500.0, 500.0, 320.0, 240.0, 640, 480).unwrap()
    }

    #[test]
    fn optical_axis_projects_to_principal_point() {
        let p = project_point(Point3::new(0.0, 0.0, 2.0), &Pose::identity(), &vga());
        assert_eq!(
            p,
            Projection::Pixel {
                u: 320.0,
                v: 240.0,
                depth: 2.0
            }
        );
    }

    #[test]
    fn behind_camera() {
        let p = project_point(Point3::new(0.0, 0.0, -1.0), &Pose::identity(), &vga());
        assert_eq!(p, Projection::BehindCamera);
        let p = project_point(Point3::new(1.0, 0.0, 0.0), &Pose::identity(), &vga());
        assert_eq!(p, Projection::BehindCamera);
    }

    #[test]
    fn off_axis_projection() {
        match project_point(Point3::new(0.5, 0.0, 2.0), &Pose::identity(), &vga()) {
            Projection::Pixel { u, v, depth } => {
                assert_eq!(u, 445.0);
                assert_eq!(v, 240.0);
                assert_eq!(depth, 2.0);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn backprojection_examples() {
        let intr = vga();
        let p = backproject_pixel(320.0, 240.0, 3.5, &Pose::identity(), &intr).unwrap();
        assert_eq!(p, Point3::new(0.0, 0.0, 3.5));
        let p = backproject_pixel(445.0, 240.0, 2.0, &Pose::identity(), &intr).unwrap();
        assert_eq!(p, Point3::new(0.5, 0.0, 2.0));
    }

    #[test]
    fn backprojection_rejects_bad_depth() {
        let intr = vga();
        for d in [0.0, -1.0, f64::NAN, f64::INFINITY] {
            assert!(matches!(
                backproject_pixel(1.0, 1.0, d, &Pose::identity(), &intr),
                Err(Error::InvalidDepth(_))
            ));
        }
    }

    #[test]
    fn invalid_intrinsics() {
        assert!(CameraIntrinsics::new(0.0, 1.0, 1.0, 1.0, 4, 4).is_err());
        assert!(CameraIntrinsics::new(1.0, 1.0, 4.0, 1.0, 4, 4).is_err());
        assert!(CameraIntrinsics::new(1.0, 1.0, 1.0, 1.0, 0, 4).is_err());
    }

    #[test]
    fn rejects_non_rotation() {
        let scaled = [[2.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        assert!(Pose::new(scaled, Point3::ORIGIN).is_err());
        let reflection = [[-1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        assert!(Pose::new(reflection, Point3::ORIGIN).is_err());
    }

    #[test]
    fn row_major_round_trip() {
        let pose = Pose::from_axis_angle(Point3::new(0.3, -1.0, 0.2), 0.7, Point3::new(1.0, 2.0, 3.0)).unwrap();
        let back = Pose::from_row_major_3x4(&pose.to_row_major_3x4()).unwrap();
        assert_eq!(pose, back);
    }

    fn arb_pose() -> impl Strategy<Value = Pose> {
        (
            (-1.0f64..1.0, -1.0f64..1.0, 0.1f64..1.0),
            -3.0f64..3.0,
            (-10.0f64..10.0, -10.0f64..10.0, -10.0f64..10.0),
        )
            .prop_map(|((ax, ay, az), angle, (tx, ty, tz))| {
                Pose::from_axis_angle(Point3::new(ax, ay, az), angle, Point3::new(tx, ty, tz)).unwrap()
            })
    }

    proptest! {
        #[test]
        fn project_backproject_identity(pose in arb_pose(), u in 0.0f64..640.0, v in 0.0f64..480.0, d in 0.1f64..50.0) {
            let intr = vga();
            let p = backproject_pixel(u, v, d, &pose, &intr).unwrap();
            match project_point(p, &pose, &intr) {
                Projection::Pixel { u: u2, v: v2, depth } => {
                    prop_assert!((u2 - u).abs() < 1e-9);
                    prop_assert!((v2 - v).abs() < 1e-9);
                    prop_assert!((depth - d).abs() < 1e-9);
                }
                Projection::BehindCamera => prop_assert!(false, "behind camera"),
            }
        }

        #[test]
        fn backproject_project_recovers_point(pose in arb_pose(), x in -5.0f64..5.0, y in -5.0f64..5.0, z in 0.2f64..20.0) {
            let intr = vga();
            let world = pose.transform_point(Point3::new(x, y, z));
            if let Projection::Pixel { u, v, depth } = project_point(world, &pose, &intr) {
                let back = backproject_pixel(u, v, depth, &pose, &intr).unwrap();
                prop_assert!(back.distance(&world) < 1e-9);
            } else {
                prop_assert!(false);
            }
        }

        #[test]
        fn composition_stays_orthonormal(a in arb_pose(), b in arb_pose(), c in arb_pose()) {
            let p = a.compose(&b).compose(&c).compose(&a.inverse());
            prop_assert!(p.orthonormality_error() < 1e-9);
        }

        #[test]
        fn inverse_undoes_transform(a in arb_pose(), x in -5.0f64..5.0, y in -5.0f64..5.0, z in -5.0f64..5.0) {
            let p = Point3::new(x, y, z);
            let q = a.inverse().transform_point(a.transform_point(p));
            prop_assert!(q.distance(&p) < 1e-9);
            prop_assert!(a.inverse_transform_point(a.transform_point(p)).distance(&p) < 1e-9);
        }
    }
}
