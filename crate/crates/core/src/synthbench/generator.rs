//! Procedural two-agent scenarios with planted sub-events and groups.
//!
//! Every scenario has three phases. Agents are built from a small body model
//! (fixed proportions times an actor scale) and posed with two-bone IK, so
//! wrists reach their targets exactly whenever the target is within reach.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::data::{Annotations, Dataset, Frame, InteractionSequence, JointId, Skeleton};
use crate::error::{Error, Result};
use crate::geometry::{two_bone_ik, Vec3};
use crate::stats::{standard_normal, substream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    Handshake,
    HighFive,
    PullUp,
    ThrowCatch,
    HandOver,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 5] = [
        ScenarioKind::Handshake,
        ScenarioKind::HighFive,
        ScenarioKind::PullUp,
        ScenarioKind::ThrowCatch,
        ScenarioKind::HandOver,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::Handshake => "handshake",
            ScenarioKind::HighFive => "high_five",
            ScenarioKind::PullUp => "pull_up",
            ScenarioKind::ThrowCatch => "throw_catch",
            ScenarioKind::HandOver => "hand_over",
        }
    }

    /// Interaction label written into generated sequences.
    pub fn label(self) -> &'static str {
        match self {
            ScenarioKind::Handshake => "shake_hands",
            ScenarioKind::HighFive => "high_five",
            ScenarioKind::PullUp => "pull_up",
            ScenarioKind::ThrowCatch => "throw_and_catch",
            ScenarioKind::HandOver => "hand_over",
        }
    }

    pub fn from_name(name: &str) -> Option<ScenarioKind> {
        ScenarioKind::ALL.into_iter().find(|k| k.name() == name)
    }

    pub fn has_object(self) -> bool {
        matches!(self, ScenarioKind::ThrowCatch | ScenarioKind::HandOver)
    }

    pub fn valid_names() -> String {
        ScenarioKind::ALL.map(|k| k.name()).join(", ")
    }
}

/// Actor limb-length multipliers; the two pools share no value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActorPool {
    Train,
    Test,
}

impl ActorPool {
    pub fn scales(self) -> &'static [f64] {
        match self {
            ActorPool::Train => &[0.9, 1.0, 1.1],
            ActorPool::Test => &[0.95, 1.05],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub kind: ScenarioKind,
    /// Per-joint, per-frame Gaussian jitter in meters.
    pub noise_sigma: f64,
    pub fps: f64,
    /// Nominal frames per phase, before jitter.
    pub phase_frames: u32,
    /// Relative phase-duration jitter.
    pub duration_jitter: f64,
    pub pool: ActorPool,
    /// Replace agent 1's left ankle with a static point at a random location.
    pub noise_joint: bool,
    /// Apply a random global yaw and translation per instance.
    pub random_placement: bool,
}

impl ScenarioConfig {
    pub fn new(kind: ScenarioKind) -> Self {
        ScenarioConfig {
            kind,
            noise_sigma: 0.02,
            fps: 12.0,
            phase_frames: 20,
            duration_jitter: 0.2,
            pool: ActorPool::Train,
            noise_joint: false,
            random_placement: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.noise_sigma >= 0.0) || self.phase_frames < 3 || !(0.0..1.0).contains(&self.duration_jitter) {
            return Err(Error::precondition(
                "scenario needs noise_sigma >= 0, phase_frames >= 3 and jitter in [0, 1)",
            ));
        }
        Ok(())
    }
}

fn ease(u: f64) -> f64 {
    u * u * (3.0 - 2.0 * u)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Side {
    Left,
    Right,
}

/// A standing or crouching body: ground position, heading and crouch amount.
#[derive(Debug, Clone, Copy)]
struct Body {
    scale: f64,
    x: f64,
    y: f64,
    heading: f64,
    crouch: f64,
}

impl Body {
    fn forward(&self) -> Vec3 {
        Vec3::new(self.heading.cos(), self.heading.sin(), 0.0)
    }

    fn left(&self) -> Vec3 {
        Vec3::new(-self.heading.sin(), self.heading.cos(), 0.0)
    }

    fn lateral(&self, side: Side) -> Vec3 {
        match side {
            Side::Left => self.left(),
            Side::Right => -self.left(),
        }
    }

    fn upper_arm(&self) -> f64 {
        0.29 * self.scale
    }

    fn forearm(&self) -> f64 {
        0.26 * self.scale
    }

    fn base(&self) -> Vec3 {
        let s = self.scale;
        let standing = 0.08 * s + 0.89 * s * 0.98;
        Vec3::new(self.x, self.y, standing - 0.35 * s * self.crouch)
    }

    fn neck(&self) -> Vec3 {
        self.base() + Vec3::UNIT_Z * (0.5 * self.scale) + self.forward() * (0.15 * self.scale * self.crouch)
    }

    fn shoulder(&self, side: Side) -> Vec3 {
        self.neck() + self.lateral(side) * (0.19 * self.scale) - Vec3::UNIT_Z * (0.05 * self.scale)
    }

    fn rest_wrist(&self, side: Side) -> Vec3 {
        let reach = self.upper_arm() + self.forearm();
        self.shoulder(side) - Vec3::UNIT_Z * (0.95 * reach) + self.forward() * (0.08 * self.scale)
    }

    /// Forearm held forward at waist height.
    fn carry(&self, side: Side) -> Vec3 {
        self.shoulder(side) + self.forward() * (0.3 * self.scale) - Vec3::UNIT_Z * (0.3 * self.scale)
    }

    fn skeleton(&self, wrist_l: Vec3, wrist_r: Vec3) -> Skeleton {
        let s = self.scale;
        let (f, up) = (self.forward(), Vec3::UNIT_Z);
        let base = self.base();
        let mut p = [Vec3::ZERO; JointId::COUNT];
        let mut set = |j: JointId, v: Vec3| p[j.index()] = v;
        set(JointId::SpineBase, base);
        set(
            JointId::SpineMid,
            base + up * (0.25 * s) + f * (0.07 * s * self.crouch),
        );
        let neck = self.neck();
        set(JointId::Neck, neck);
        set(JointId::Head, neck + up * (0.15 * s));
        for (side, sh, el, wr, wrist) in [
            (Side::Left, JointId::ShoulderL, JointId::ElbowL, JointId::WristL, wrist_l),
            (Side::Right, JointId::ShoulderR, JointId::ElbowR, JointId::WristR, wrist_r),
        ] {
            let shoulder = self.shoulder(side);
            let elbow0 = shoulder - up * self.upper_arm() - f * (0.03 * s);
            let wrist0 = elbow0 - up * self.forearm() + f * (0.1 * s);
            let (elbow, w) = two_bone_ik(shoulder, elbow0, wrist0, wrist, -f);
            set(sh, shoulder);
            set(el, elbow);
            set(wr, w);
        }
        for (side, hip_j, knee_j, ankle_j) in [
            (Side::Left, JointId::HipL, JointId::KneeL, JointId::AnkleL),
            (Side::Right, JointId::HipR, JointId::KneeR, JointId::AnkleR),
        ] {
            let hip = base + self.lateral(side) * (0.1 * s) - up * (0.05 * s);
            let ankle_target = Vec3::new(self.x, self.y, 0.08 * s) + self.lateral(side) * (0.1 * s);
            let knee0 = hip - up * (0.45 * s) + f * (0.05 * s);
            let ankle0 = knee0 - up * (0.44 * s);
            let (knee, ankle) = two_bone_ik(hip, knee0, ankle0, ankle_target, f);
            set(hip_j, hip);
            set(knee_j, knee);
            set(ankle_j, ankle);
        }
        Skeleton::from_positions(p)
    }
}

/// Meeting point of the two right hands: on the segment between the right
/// shoulders split by arm reach, shifted vertically by `dz`.
fn meeting_point(a: &Body, b: &Body, dz: f64) -> Vec3 {
    let (sa, sb) = (a.shoulder(Side::Right), b.shoulder(Side::Right));
    let ra = a.upper_arm() + a.forearm();
    let rb = b.upper_arm() + b.forearm();
    sa + (sb - sa) * (ra / (ra + rb)) + Vec3::UNIT_Z * dz
}

/// Bodies facing each other across the origin, `sep` meters apart.
fn facing_pair(s1: f64, s2: f64, sep: f64) -> (Body, Body) {
    let a = Body {
        scale: s1,
        x: -sep / 2.0,
        y: 0.0,
        heading: 0.0,
        crouch: 0.0,
    };
    let b = Body {
        scale: s2,
        x: sep / 2.0,
        y: 0.0,
        heading: std::f64::consts::PI,
        crouch: 0.0,
    };
    (a, b)
}

struct FrameState {
    agent1: Skeleton,
    agent2: Skeleton,
    object: Option<Vec3>,
}

fn lerp(a: f64, b: f64, u: f64) -> f64 {
    a + (b - a) * u
}

/// Noiseless state of a scenario at phase `phase` (0-based) and progress `u`.
fn scenario_state(kind: ScenarioKind, s1: f64, s2: f64, phase: usize, u: f64) -> FrameState {
    let e = ease(u);
    let pose = |a: &Body, b: &Body, w1: Vec3, w2: Vec3, object: Option<Vec3>| FrameState {
        agent1: a.skeleton(a.rest_wrist(Side::Left), w1),
        agent2: b.skeleton(b.rest_wrist(Side::Left), w2),
        object,
    };
    match kind {
        ScenarioKind::Handshake | ScenarioKind::HighFive => {
            let (near, dz) = match kind {
                ScenarioKind::Handshake => (0.75, -0.2),
                _ => (0.65, 0.2),
            };
            let sep = match phase {
                0 => lerp(2.2, near, e),
                1 => near,
                _ => lerp(near, 1.5, e),
            };
            let (a, b) = facing_pair(s1, s2, sep);
            let m = meeting_point(&a, &b, dz);
            let k = match phase {
                0 => 0.0,
                1 => e,
                _ => 1.0 - e,
            };
            let (r1, r2) = (a.rest_wrist(Side::Right), b.rest_wrist(Side::Right));
            pose(&a, &b, r1.lerp(m, k), r2.lerp(m, k), None)
        }
        ScenarioKind::PullUp => {
            let sep = match phase {
                0 => lerp(2.0, 0.8, e),
                _ => 0.8,
            };
            let (mut a, b) = facing_pair(s1, s2, sep);
            a.crouch = if phase == 2 { 1.0 - e } else { 1.0 };
            let m = meeting_point(&a, &b, 0.0);
            let k = match phase {
                0 => 0.0,
                1 => e,
                _ => 1.0,
            };
            let (r1, r2) = (a.rest_wrist(Side::Right), b.rest_wrist(Side::Right));
            pose(&a, &b, r1.lerp(m, k), r2.lerp(m, k), None)
        }
        ScenarioKind::ThrowCatch => {
            let (a, b) = facing_pair(s1, s2, 2.4);
            let throw_at = a.shoulder(Side::Right) + a.forward() * (0.3 * s1) + Vec3::UNIT_Z * (0.25 * s1);
            let catch_at = b.shoulder(Side::Right) + b.forward() * (0.35 * s2) + Vec3::UNIT_Z * (0.05 * s2);
            let (r1, r2) = (a.rest_wrist(Side::Right), b.rest_wrist(Side::Right));
            match phase {
                0 => {
                    let w1 = r1.lerp(throw_at, e);
                    pose(&a, &b, w1, r2, Some(w1))
                }
                1 => {
                    // ballistic: parabola through both endpoints, apex 0.5 m above the chord
                    let ball = throw_at.lerp(catch_at, u) + Vec3::UNIT_Z * (2.0 * u * (1.0 - u));
                    pose(&a, &b, throw_at.lerp(r1, e), r2.lerp(catch_at, e), Some(ball))
                }
                _ => {
                    let w2 = catch_at.lerp(b.carry(Side::Right), e);
                    pose(&a, &b, r1, w2, Some(w2))
                }
            }
        }
        ScenarioKind::HandOver => {
            let sep = match phase {
                0 => lerp(2.2, 0.8, e),
                1 => 0.8,
                _ => 0.8,
            };
            let (a, mut b) = facing_pair(s1, s2, sep);
            if phase == 2 {
                b.x += 0.7 * e;
            }
            let (r1, r2) = (a.rest_wrist(Side::Right), b.rest_wrist(Side::Right));
            let h = {
                let (a0, b0) = facing_pair(s1, s2, 0.8);
                meeting_point(&a0, &b0, -0.2)
            };
            match phase {
                0 => {
                    let w1 = a.carry(Side::Right);
                    pose(&a, &b, w1, r2, Some(w1))
                }
                1 => {
                    let w1 = a.carry(Side::Right).lerp(h, e);
                    pose(&a, &b, w1, r2.lerp(h, e), Some(w1))
                }
                _ => {
                    let w2 = h.lerp(b.carry(Side::Right), e);
                    pose(&a, &b, h.lerp(r1, e), w2, Some(w2))
                }
            }
        }
    }
}

/// Planted functional groups per phase.
pub fn planted_groups(kind: ScenarioKind) -> [Vec<Vec<String>>; 3] {
    let g = |names: &[&str]| names.iter().map(|n| n.to_string()).collect::<Vec<String>>();
    let wrists = g(&["agent1.WristR", "agent2.WristR"]);
    match kind {
        ScenarioKind::Handshake | ScenarioKind::HighFive => [vec![], vec![wrists], vec![]],
        ScenarioKind::PullUp => [vec![], vec![wrists.clone()], vec![wrists]],
        ScenarioKind::ThrowCatch => [vec![], vec![g(&["agent2.WristR", "object"])], vec![]],
        ScenarioKind::HandOver => [vec![], vec![g(&["agent1.WristR", "agent2.WristR", "object"])], vec![]],
    }
}

/// One instance with its planted annotations.
pub fn generate_instance<R: Rng + ?Sized>(cfg: &ScenarioConfig, id: String, rng: &mut R) -> InteractionSequence {
    let scales = cfg.pool.scales();
    let s1 = scales[rng.random_range(0..scales.len())];
    let s2 = scales[rng.random_range(0..scales.len())];
    let durations: [u32; 3] = std::array::from_fn(|_| {
        let j = rng.random_range(-cfg.duration_jitter..=cfg.duration_jitter);
        ((f64::from(cfg.phase_frames) * (1.0 + j)).round() as u32).max(3)
    });
    let (yaw, shift) = if cfg.random_placement {
        let yaw = rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
        let shift = Vec3::new(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0), 0.0);
        (yaw, shift)
    } else {
        (0.0, Vec3::ZERO)
    };
    let noise_point = Vec3::new(
        rng.random_range(-2.0..2.0),
        rng.random_range(-2.0..2.0),
        rng.random_range(0.0..1.5),
    );

    let place = |p: Vec3| p.rotate_z(yaw) + shift;
    let mut frames = Vec::new();
    let mut intervals = Vec::new();
    let mut t = 0u32;
    for (phase, &d) in durations.iter().enumerate() {
        intervals.push([t + 1, t + d]);
        for f in 1..=d {
            t += 1;
            let st = scenario_state(cfg.kind, s1, s2, phase, f64::from(f) / f64::from(d));
            let mut agent1 = st.agent1.map(place);
            if cfg.noise_joint {
                agent1[JointId::AnkleL] = noise_point;
            }
            frames.push(Frame {
                t,
                agent1,
                agent2: st.agent2.map(place),
                object: st.object.map(place),
            });
        }
    }
    if cfg.noise_sigma > 0.0 {
        let sigma = cfg.noise_sigma;
        let mut jitter = |p: Vec3| {
            p + Vec3::new(
                sigma * standard_normal(rng),
                sigma * standard_normal(rng),
                sigma * standard_normal(rng),
            )
        };
        for f in &mut frames {
            for j in JointId::ALL {
                f.agent1[j] = jitter(f.agent1[j]);
                f.agent2[j] = jitter(f.agent2[j]);
            }
            if let Some(o) = f.object {
                f.object = Some(jitter(o));
            }
        }
    }
    let groups = planted_groups(cfg.kind).to_vec();
    InteractionSequence {
        id,
        label: cfg.kind.label().to_string(),
        fps: cfg.fps,
        frames,
        annotations: Some(Annotations {
            intervals,
            labels: vec![1, 2, 3],
            groups: Some(groups),
        }),
    }
}

/// `n` seeded instances of one scenario.
pub fn generate_synthetic(cfg: &ScenarioConfig, n: usize, seed: u64) -> Result<Dataset> {
    cfg.validate()?;
    if n == 0 {
        return Err(Error::precondition("generate at least one instance"));
    }
    let sequences = (0..n)
        .map(|i| {
            let mut rng = substream(seed, i as u64);
            let pool = match cfg.pool {
                ActorPool::Train => "train",
                ActorPool::Test => "test",
            };
            generate_instance(cfg, format!("{}_{pool}_{i:03}", cfg.kind.name()), &mut rng)
        })
        .collect();
    Ok(Dataset {
        sequences,
        dictionary: vec![cfg.kind.label().to_string()],
    })
}
