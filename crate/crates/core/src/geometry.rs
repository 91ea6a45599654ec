//! Frame normalization and skeleton geometry.
//!
//! World coordinates are right-handed with z up, in meters. Every feature the
//! potentials consume is expressed relative to a [`FacingFrame`], so all
//! scores are invariant to a global translation plus a rotation about z.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::data::{JointId, Skeleton};
use crate::error::{Error, Result};

/// Distance clamp applied to horizontal and vertical feature magnitudes.
pub const DISTANCE_EPS: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3::new(0.0, 0.0, 0.0);
    pub const UNIT_X: Vec3 = Vec3::new(1.0, 0.0, 0.0);
    pub const UNIT_Z: Vec3 = Vec3::new(0.0, 0.0, 1.0);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: Vec3) -> Vec3 {
        Vec3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn norm_xy(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, o: Vec3) -> f64 {
        (self - o).norm()
    }

    /// Unit vector, or `None` when the norm is zero.
    pub fn normalized(self) -> Option<Vec3> {
        let n = self.norm();
        (n > 0.0 && n.is_finite()).then(|| self / n)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    /// Exact at `u = 0` and whenever `self == o`.
    pub fn lerp(self, o: Vec3, u: f64) -> Vec3 {
        self + (o - self) * u
    }

    /// Rotation about the world z axis.
    pub fn rotate_z(self, theta: f64) -> Vec3 {
        let (s, c) = theta.sin_cos();
        Vec3::new(c * self.x - s * self.y, s * self.x + c * self.y, self.z)
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }
}

impl From<[f64; 3]> for Vec3 {
    fn from(a: [f64; 3]) -> Self {
        Vec3::new(a[0], a[1], a[2])
    }
}

impl From<Vec3> for [f64; 3] {
    fn from(v: Vec3) -> Self {
        v.to_array()
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl AddAssign for Vec3 {
    fn add_assign(&mut self, o: Vec3) {
        *self = *self + o;
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, k: f64) -> Vec3 {
        Vec3::new(self.x * k, self.y * k, self.z * k)
    }
}

impl Div<f64> for Vec3 {
    type Output = Vec3;
    fn div(self, k: f64) -> Vec3 {
        Vec3::new(self.x / k, self.y / k, self.z / k)
    }
}

/// Wraps an angle into `(-π, π]`.
pub fn wrap_angle(a: f64) -> f64 {
    let mut w = a.rem_euclid(2.0 * PI);
    if w > PI {
        w -= 2.0 * PI;
    }
    if w <= -PI {
        w += 2.0 * PI;
    }
    w
}

/// Horizontal frame attached to one agent: origin at its base joint, x axis
/// toward the other agent's base joint, z axis world up.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FacingFrame {
    pub origin: Vec3,
    pub x_axis: Vec3,
}

impl FacingFrame {
    pub fn z_axis(&self) -> Vec3 {
        Vec3::UNIT_Z
    }

    pub fn y_axis(&self) -> Vec3 {
        Vec3::UNIT_Z.cross(self.x_axis)
    }

    /// Heading of the x axis in the world xy plane.
    pub fn yaw(&self) -> f64 {
        self.x_axis.y.atan2(self.x_axis.x)
    }

    /// Expresses a world point in this frame.
    pub fn to_local(&self, p: Vec3) -> Vec3 {
        let d = p - self.origin;
        Vec3::new(d.dot(self.x_axis), d.dot(self.y_axis()), d.z)
    }

    /// Inverse of [`FacingFrame::to_local`].
    pub fn to_world(&self, local: Vec3) -> Vec3 {
        self.origin + self.rotate_to_world(local)
    }

    /// Rotates a frame-local direction into world coordinates.
    pub fn rotate_to_world(&self, local: Vec3) -> Vec3 {
        self.x_axis * local.x + self.y_axis() * local.y + Vec3::UNIT_Z * local.z
    }
}

pub fn facing_frame(base_a: Vec3, base_b: Vec3) -> FacingFrame {
    let d = base_b - base_a;
    let h = d.norm_xy();
    let x_axis = if h > 1e-12 {
        Vec3::new(d.x / h, d.y / h, 0.0)
    } else {
        Vec3::UNIT_X
    };
    FacingFrame {
        origin: base_a,
        x_axis,
    }
}

/// Cylindrical decomposition of a displacement in a facing frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CylFeatures {
    pub r_xy: f64,
    pub dz_abs: f64,
    pub dz_sign: i8,
    pub azimuth: f64,
}

impl CylFeatures {
    /// The displacement these features describe, in world coordinates.
    /// Clamped magnitudes are reproduced as clamped.
    pub fn to_offset(&self, frame: &FacingFrame) -> Vec3 {
        let (s, c) = self.azimuth.sin_cos();
        let local = Vec3::new(
            self.r_xy * c,
            self.r_xy * s,
            self.dz_abs * f64::from(self.dz_sign),
        );
        frame.rotate_to_world(local)
    }
}

pub fn cyl_decompose(reference: Vec3, point: Vec3, frame: &FacingFrame) -> CylFeatures {
    decompose_offset(point - reference, frame)
}

/// [`cyl_decompose`] on a displacement that is already a difference.
pub fn decompose_offset(d: Vec3, frame: &FacingFrame) -> CylFeatures {
    let y_axis = frame.y_axis();
    let lx = d.x * frame.x_axis.x + d.y * frame.x_axis.y;
    let ly = d.x * y_axis.x + d.y * y_axis.y;
    CylFeatures {
        r_xy: d.x.hypot(d.y).max(DISTANCE_EPS),
        dz_abs: d.z.abs().max(DISTANCE_EPS),
        dz_sign: if d.z < 0.0 { -1 } else { 1 },
        azimuth: wrap_angle(ly.atan2(lx)),
    }
}

pub fn group_mass_center(points: &[Vec3]) -> Result<Vec3> {
    if points.is_empty() {
        return Err(Error::precondition("mass center of an empty group"));
    }
    let sum = points.iter().fold(Vec3::ZERO, |acc, &p| acc + p);
    Ok(sum / points.len() as f64)
}

/// Partial joint map, e.g. the five modeled joints of a sub-goal.
pub type JointMap = BTreeMap<JointId, Vec3>;

/// Anything that can answer "where is joint j".
pub trait JointLookup {
    fn joint(&self, id: JointId) -> Option<Vec3>;
}

impl JointLookup for JointMap {
    fn joint(&self, id: JointId) -> Option<Vec3> {
        self.get(&id).copied()
    }
}

impl JointLookup for Skeleton {
    fn joint(&self, id: JointId) -> Option<Vec3> {
        Some(self[id])
    }
}

/// Mean Euclidean distance over the requested joints.
pub fn skeleton_distance<A, B>(a: &A, b: &B, joints: &[JointId]) -> Result<f64>
where
    A: JointLookup + ?Sized,
    B: JointLookup + ?Sized,
{
    if joints.is_empty() {
        return Err(Error::precondition("skeleton distance over no joints"));
    }
    let mut total = 0.0;
    for &j in joints {
        let pa = a.joint(j).ok_or_else(|| Error::MissingJoint(j.name().into()))?;
        let pb = b.joint(j).ok_or_else(|| Error::MissingJoint(j.name().into()))?;
        total += pa.distance(pb);
    }
    Ok(total / joints.len() as f64)
}

/// Per-joint mean over a list of skeletons.
pub fn mean_skeleton<'a, I>(skeletons: I) -> Result<Skeleton>
where
    I: IntoIterator<Item = &'a Skeleton>,
{
    let mut acc = [Vec3::ZERO; JointId::COUNT];
    let mut n = 0usize;
    for s in skeletons {
        for (a, p) in acc.iter_mut().zip(s.positions()) {
            *a += *p;
        }
        n += 1;
    }
    if n == 0 {
        return Err(Error::precondition("mean of no skeletons"));
    }
    Ok(Skeleton::from_positions(acc.map(|p| p / n as f64)))
}

pub fn lerp_joints(a: &JointMap, b: &JointMap, u: f64) -> Result<JointMap> {
    if !(0.0..=1.0).contains(&u) {
        return Err(Error::precondition(format!("interpolation fraction {u} outside [0, 1]")));
    }
    if a.len() != b.len() || a.keys().any(|k| !b.contains_key(k)) {
        return Err(Error::precondition("interpolating joint maps with different joints"));
    }
    Ok(a.iter()
        .map(|(&j, &pa)| {
            let pb = b[&j];
            // exact endpoints
            let p = if u == 0.0 {
                pa
            } else if u == 1.0 {
                pb
            } else {
                pa.lerp(pb, u)
            };
            (j, p)
        })
        .collect())
}

/// Rotation about z followed by a translation: `p ↦ Rz(theta)·p + translation`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct YawTransform {
    pub theta: f64,
    pub translation: Vec3,
}

impl YawTransform {
    pub const IDENTITY: YawTransform = YawTransform {
        theta: 0.0,
        translation: Vec3::ZERO,
    };

    pub fn apply(&self, p: Vec3) -> Vec3 {
        p.rotate_z(self.theta) + self.translation
    }
}

/// Least-squares yaw + translation taking `source` joints onto `targets`.
///
/// Closed-form 2D Procrustes on xy; the z shift is the mean z difference.
/// Returns the transform and its sum of squared residuals.
pub fn align_yaw_translate<S>(source: &S, targets: &JointMap) -> Result<(YawTransform, f64)>
where
    S: JointLookup + ?Sized,
{
    if targets.len() < 2 {
        return Err(Error::precondition("alignment needs at least two target joints"));
    }
    let mut pairs = Vec::with_capacity(targets.len());
    for (&j, &t) in targets {
        let s = source
            .joint(j)
            .ok_or_else(|| Error::MissingJoint(j.name().into()))?;
        pairs.push((s, t));
    }
    let n = pairs.len() as f64;
    let (cs, ct) = pairs
        .iter()
        .fold((Vec3::ZERO, Vec3::ZERO), |(a, b), &(s, t)| (a + s, b + t));
    let (cs, ct) = (cs / n, ct / n);
    let (mut sin_acc, mut cos_acc) = (0.0, 0.0);
    for &(s, t) in &pairs {
        let (sx, sy) = (s.x - cs.x, s.y - cs.y);
        let (tx, ty) = (t.x - ct.x, t.y - ct.y);
        cos_acc += sx * tx + sy * ty;
        sin_acc += sx * ty - sy * tx;
    }
    let theta = if sin_acc == 0.0 && cos_acc == 0.0 {
        0.0
    } else {
        sin_acc.atan2(cos_acc)
    };
    let rc = cs.rotate_z(theta);
    let transform = YawTransform {
        theta,
        translation: Vec3::new(ct.x - rc.x, ct.y - rc.y, ct.z - cs.z),
    };
    let residual = pairs
        .iter()
        .map(|&(s, t)| {
            let d = transform.apply(s) - t;
            d.dot(d)
        })
        .sum();
    Ok((transform, residual))
}

/// Analytic two-bone IK.
///
/// Moves `mid` and `end` so that `end` reaches `target` while both bone
/// lengths are preserved and the bend stays in the plane suggested by the
/// current `mid`. Unreachable targets yield a fully extended chain pointing
/// at the target; targets closer than `|a - b|` fold the chain as far as it
/// goes. Returns the new `(mid, end)`.
pub fn two_bone_ik(root: Vec3, mid: Vec3, end: Vec3, target: Vec3, fallback_bend: Vec3) -> (Vec3, Vec3) {
    let a = mid.distance(root);
    let b = end.distance(mid);
    let to_target = target - root;
    let dir = to_target
        .normalized()
        .or_else(|| (end - root).normalized())
        .unwrap_or(-Vec3::UNIT_Z);
    let d = to_target.norm().clamp((a - b).abs(), a + b);

    let bend = {
        let m = mid - root;
        let ortho = m - dir * m.dot(dir);
        ortho.normalized().or_else(|| {
            let f = fallback_bend - dir * fallback_bend.dot(dir);
            f.normalized()
        })
    };
    let bend = bend.unwrap_or_else(|| {
        // any vector orthogonal to dir
        let probe = if dir.x.abs() < 0.9 { Vec3::UNIT_X } else { Vec3::new(0.0, 1.0, 0.0) };
        (probe - dir * probe.dot(dir)).normalized().unwrap_or(Vec3::UNIT_X)
    });

    if a == 0.0 || d == 0.0 {
        let new_mid = root + dir * a;
        return (new_mid, new_mid + dir * b);
    }
    let cos_root = ((a * a + d * d - b * b) / (2.0 * a * d)).clamp(-1.0, 1.0);
    let sin_root = (1.0 - cos_root * cos_root).max(0.0).sqrt();
    let new_mid = root + (dir * cos_root + bend * sin_root) * a;
    // Place the end at distance exactly b from the new mid, along the
    // mid→(root + d·dir) direction, so the second bone length is exact.
    let goal = root + dir * d;
    let new_end = match (goal - new_mid).normalized() {
        Some(u) => new_mid + u * b,
        None => goal,
    };
    (new_mid, new_end)
}
