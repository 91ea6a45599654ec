//! Online synthesis of agent 2 reacting to an observed agent 1.
//!
//! Each step of `ΔT` frames decodes the current sub-event, predicts when it
//! ends, samples sub-goal candidates for agent 2's modeled joints from the
//! spatial potentials, advances the best one by linear progress and lifts
//! the result to a full body with the pose codebook and two-bone IK.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::{Agent, InteractionSequence, JointId, Skeleton};
use crate::error::{Error, Result};
use crate::geometry::{align_yaw_translate, lerp_joints, two_bone_ik, FacingFrame, JointMap, Vec3};
use crate::inference::{dp_parse_prefix, SegmentCap};
use crate::model::{
    group_reference, pose_facing, pose_spatial_features, Entity, InteractionModel, SceneTrack,
};
use crate::stats::{sample, substream, Distribution, KMeansModel};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthesisConfig {
    pub delta_t: u32,
    pub t0: u32,
    pub n_candidates: usize,
    pub duration_retry_cap: usize,
    pub seed: u64,
}

impl Default for SynthesisConfig {
    fn default() -> Self {
        SynthesisConfig {
            delta_t: 5,
            t0: 10,
            n_candidates: 100,
            duration_retry_cap: 50,
            seed: 0,
        }
    }
}

impl SynthesisConfig {
    pub fn validate(&self) -> Result<()> {
        if self.delta_t < 1 || self.t0 < 2 || self.n_candidates < 1 {
            return Err(Error::precondition("synthesis needs delta_t >= 1, t0 >= 2, n >= 1"));
        }
        Ok(())
    }
}

/// One synthesis step, for the optional JSON-lines trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepTrace {
    pub tau: u32,
    pub tau_next: u32,
    pub subevent: u32,
    pub subevent_start: u32,
    pub predicted_end: u32,
    pub progress: f64,
    pub best_score: f64,
}

#[derive(Debug, Clone)]
pub struct SynthesisOutput {
    pub sequence: InteractionSequence,
    pub trace: Vec<StepTrace>,
}

/// Predicted last frame of a sub-event that started at `start` and has run
/// through `tau`. Durations are rounded log-normal draws conditioned on
/// covering the elapsed frames; after `retry_cap` misses the elapsed length
/// or the rounded mode, whichever is larger, is used.
pub fn predict_subevent_end<R: Rng + ?Sized>(
    start: u32,
    tau: u32,
    duration: &Distribution,
    retry_cap: usize,
    rng: &mut R,
) -> u32 {
    let elapsed = (tau + 1).saturating_sub(start).max(1);
    for _ in 0..retry_cap {
        let d = sample(duration, rng).round();
        if d >= f64::from(elapsed) {
            let d = d.min(f64::from(u32::MAX - start)) as u32;
            return start + d - 1;
        }
    }
    let mode = duration.log_normal_mode().unwrap_or(1.0).round();
    let d = if mode > f64::from(elapsed) {
        mode.min(f64::from(u32::MAX - start)) as u32
    } else {
        elapsed
    };
    start + d - 1
}

/// Successor of `s` with a transition probability strictly above every
/// other entry of its row, if one exists.
fn likely_successor(model: &InteractionModel, s: u32) -> Option<u32> {
    let row = &model.potentials.transition[s as usize - 1];
    let (best, &p) = row
        .iter()
        .enumerate()
        .filter(|&(j, _)| j + 1 != s as usize)
        .max_by(|a, b| a.1.total_cmp(b.1))?;
    let unique = row.iter().enumerate().all(|(j, &q)| j == best || q < p);
    unique.then_some(best as u32 + 1)
}

fn agent2_entities(entities: &[Entity]) -> Vec<(usize, JointId)> {
    entities
        .iter()
        .enumerate()
        .filter_map(|(i, e)| match *e {
            Entity::Joint(Agent::Two, j) => Some((i, j)),
            _ => None,
        })
        .collect()
}

/// Scene state a sub-goal is sampled in: current positions plus the
/// positions and agent-2 facing frame at the start of the running sub-event.
#[derive(Debug, Clone)]
pub struct SubgoalContext<'a> {
    pub entities: &'a [Entity],
    pub positions: &'a [Vec3],
    pub start_positions: &'a [Vec3],
    pub start_frame: FacingFrame,
}

impl<'a> SubgoalContext<'a> {
    /// Context whose sub-event starts at the current frame.
    pub fn at_rest(entities: &'a [Entity], positions: &'a [Vec3]) -> Self {
        SubgoalContext {
            entities,
            positions,
            start_positions: positions,
            start_frame: pose_facing(entities, positions, Agent::Two),
        }
    }
}

/// Samples `n` sets of agent-2 modeled-joint positions for sub-event `s`.
///
/// Null joints stay where they are. Affordable joints sample an offset from
/// their spatial potential around the group reference, with non-agent-2
/// members held at their current positions. For a group with observed
/// members `O` and agent-2 members `A`, sampled offsets `o_a` are
/// reconstructed consistently: the mass center is
/// `c = (Σ_O p + Σ_A o_a) / |O|` and `p_a = c + o_a`. A group of agent-2
/// joints only has no observed anchor; its center is the mean of the
/// members' sub-event start positions displaced by samples of their motion
/// potentials.
pub fn sample_subgoal_candidates<R: Rng + ?Sized>(
    model: &InteractionModel,
    s: u32,
    ctx: &SubgoalContext<'_>,
    n: usize,
    rng: &mut R,
) -> Result<Vec<JointMap>> {
    let (entities, positions) = (ctx.entities, ctx.positions);
    let a2 = agent2_entities(entities);
    let frame2 = pose_facing(entities, positions, Agent::Two);
    let groups = model.grouping.groups(s);
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let mut cand: Vec<Vec3> = positions.to_vec();
        for group in &groups {
            let members_a: Vec<usize> = group
                .iter()
                .copied()
                .filter(|&e| entities[e].owner() == Agent::Two && matches!(entities[e], Entity::Joint(..)))
                .collect();
            if members_a.is_empty() {
                continue;
            }
            let offsets: Vec<Vec3> = members_a
                .iter()
                .map(|&e| {
                    let cell = model.potentials.cell(s, e)?;
                    let bundle = cell.spatial.as_ref().ok_or_else(|| Error::MissingPotential {
                        subevent: s,
                        entity: entities[e].name(),
                    })?;
                    Ok(bundle.sample(rng).to_offset(&frame2))
                })
                .collect::<Result<_>>()?;
            let center = if group.len() == 1 {
                group_reference(entities, positions, group[0], group)
            } else {
                let observed: Vec<usize> = group.iter().copied().filter(|e| !members_a.contains(e)).collect();
                if observed.is_empty() {
                    let mut sum = Vec3::ZERO;
                    for &e in &members_a {
                        let step = model.potentials.cell(s, e)?.motion.sample(rng).to_offset(&ctx.start_frame);
                        sum += ctx.start_positions[e] + step;
                    }
                    sum / members_a.len() as f64
                } else {
                    let sum_o = observed.iter().fold(Vec3::ZERO, |acc, &e| acc + positions[e]);
                    let sum_off = offsets.iter().fold(Vec3::ZERO, |acc, &o| acc + o);
                    (sum_o + sum_off) / observed.len() as f64
                }
            };
            for (&e, &off) in members_a.iter().zip(&offsets) {
                cand[e] = center + off;
            }
        }
        out.push(a2.iter().map(|&(e, j)| (j, cand[e])).collect());
    }
    Ok(out)
}

/// Motion score of agent 2 moving from frame `start` to `pose`, plus the
/// spatial score of `pose` weighted by progress `u`.
#[allow(clippy::too_many_arguments)]
pub fn score_candidate(
    model: &InteractionModel,
    s: u32,
    track: &SceneTrack,
    start: u32,
    positions: &[Vec3],
    pose: &JointMap,
    u: f64,
) -> Result<f64> {
    let entities = &track.entities;
    let mut p = positions.to_vec();
    let a2 = agent2_entities(entities);
    for &(e, j) in &a2 {
        p[e] = pose[&j];
    }
    let frame_start = track.facing(start, Agent::Two);
    let mut motion = 0.0;
    for &(e, _) in &a2 {
        let d = p[e] - track.position(start, e);
        let f = crate::geometry::decompose_offset(d, frame_start);
        motion += model.potentials.cell(s, e)?.motion.log_density(&f);
    }
    let mut spatial = 0.0;
    for group in model.grouping.groups(s) {
        for &e in &group {
            if entities[e].owner() != Agent::Two || !matches!(entities[e], Entity::Joint(..)) {
                continue;
            }
            let cell = model.potentials.cell(s, e)?;
            if let Some(b) = &cell.spatial {
                spatial += b.log_density(&pose_spatial_features(entities, &p, e, &group));
            }
        }
    }
    Ok(motion + u * spatial)
}

fn centroid_skeleton(codebook: &KMeansModel, k: usize) -> Option<Skeleton> {
    let c = codebook.centroids.get(k)?;
    if c.len() != 3 * JointId::COUNT {
        return None;
    }
    let mut p = [Vec3::ZERO; JointId::COUNT];
    for (i, v) in p.iter_mut().enumerate() {
        *v = Vec3::new(c[3 * i], c[3 * i + 1], c[3 * i + 2]);
    }
    Some(Skeleton::from_positions(p))
}

const LIMBS: [(JointId, JointId, JointId); 4] = [
    (JointId::ShoulderL, JointId::ElbowL, JointId::WristL),
    (JointId::ShoulderR, JointId::ElbowR, JointId::WristR),
    (JointId::HipL, JointId::KneeL, JointId::AnkleL),
    (JointId::HipR, JointId::KneeR, JointId::AnkleR),
];

/// Lifts modeled-joint targets to a full skeleton.
///
/// The codebook centroid with the smallest residual after yaw-and-translation
/// alignment is placed with its base on the target base; each limb then
/// reaches its target by two-bone IK. Targets identical to `current`'s modeled
/// joints return `current` unchanged. An empty codebook uses `current` as
/// the template.
pub fn fit_full_body(targets: &JointMap, codebook: &KMeansModel, current: &Skeleton) -> Result<Skeleton> {
    let base_target = *targets
        .get(&JointId::SpineBase)
        .ok_or_else(|| Error::MissingJoint(JointId::SpineBase.name().into()))?;
    if targets.iter().all(|(&j, &p)| current[j] == p) {
        return Ok(current.clone());
    }
    let mut best: Option<(f64, Skeleton)> = None;
    for k in 0..codebook.centroids.len() {
        let Some(c) = centroid_skeleton(codebook, k) else { continue };
        let (xf, residual) = align_yaw_translate(&c, targets)?;
        if best.as_ref().is_none_or(|b| residual < b.0) {
            best = Some((residual, c.map(|p| xf.apply(p))));
        }
    }
    let mut skel = match best {
        Some((_, s)) => s,
        None => {
            let (xf, _) = align_yaw_translate(current, targets)?;
            current.map(|p| xf.apply(p))
        }
    };
    let shift = base_target - skel.base();
    skel = skel.map(|p| p + shift);
    // knees bend forward and elbows backward when a limb is straight
    let forward = (skel[JointId::Neck] - skel.base()).cross(skel[JointId::ShoulderR] - skel[JointId::ShoulderL]);
    for (root, mid, end) in LIMBS {
        if let Some(&target) = targets.get(&end) {
            let bend = if matches!(end, JointId::AnkleL | JointId::AnkleR) {
                forward
            } else {
                -forward
            };
            let (m, e) = two_bone_ik(skel[root], skel[mid], skel[end], target, bend);
            skel[mid] = m;
            skel[end] = e;
        }
    }
    Ok(skel)
}

fn positions_at(track_frames: &[crate::data::Frame], entities: &[Entity], t: u32) -> Vec<Vec3> {
    let f = &track_frames[t as usize - 1];
    entities
        .iter()
        .map(|e| match *e {
            Entity::Joint(a, j) => f.agent(a)[j],
            Entity::Object => f.object.unwrap_or(Vec3::ZERO),
        })
        .collect()
}

/// Synthesizes agent 2 over `observed`, which supplies agent 1, the object
/// and agent 2's first `t0` frames.
pub fn synthesize(
    observed: &InteractionSequence,
    model: &InteractionModel,
    config: &SynthesisConfig,
) -> Result<SynthesisOutput> {
    config.validate()?;
    let t_len = observed.len() as u32;
    let mut seq = observed.clone();
    let mut trace = Vec::new();
    if t_len <= config.t0 {
        return Ok(SynthesisOutput { sequence: seq, trace });
    }
    let entities = crate::model::entities(observed.has_object());
    if entities != model.potentials.entities {
        return Err(Error::precondition("observed entity layout differs from the model"));
    }
    let mut rng: ChaCha8Rng = substream(config.seed, 3);
    let mut tau = config.t0;
    while tau < t_len {
        let next = (tau + config.delta_t).min(t_len);
        let hold = seq.frames[tau as usize - 1].agent2.clone();
        for t in tau + 1..=next {
            seq.frames[t as usize - 1].agent2 = hold.clone();
        }
        let track = SceneTrack::from_sequence(&InteractionSequence {
            frames: seq.frames[..next as usize].to_vec(),
            ..seq.clone()
        });
        let dp = dp_parse_prefix(&track, model, SegmentCap::DurationPrior, tau)?;
        let (&(start, _), &s) = dp
            .parse
            .intervals
            .last()
            .zip(dp.parse.labels.last())
            .expect("parses are non-empty");
        let duration = &model.potentials.durations[s as usize - 1];
        let mut tau2 = predict_subevent_end(start, tau, duration, config.duration_retry_cap, &mut rng);
        let (mut s, mut start) = (s, start);
        // The current sub-event is expected to cover less than half of this
        // window, so aim for its most likely successor instead.
        if tau2 - tau < next - tau2.min(next) {
            if let Some(succ) = likely_successor(model, s) {
                start = tau2 + 1;
                s = succ;
                let d = &model.potentials.durations[s as usize - 1];
                tau2 = predict_subevent_end(start, start, d, config.duration_retry_cap, &mut rng).max(next);
            }
        }
        let u = if tau2 <= tau {
            1.0
        } else {
            (f64::from(next - tau) / f64::from(tau2 - tau)).clamp(0.0, 1.0)
        };

        let positions = positions_at(&seq.frames, &entities, next);
        let current = hold.modeled();
        let start_positions = positions_at(&seq.frames, &entities, start);
        let ctx = SubgoalContext {
            entities: &entities,
            positions: &positions,
            start_positions: &start_positions,
            start_frame: track.facing(start, Agent::Two).clone(),
        };
        let candidates = sample_subgoal_candidates(model, s, &ctx, config.n_candidates, &mut rng)?;
        let mut best: Option<(f64, JointMap)> = None;
        for cand in candidates {
            let pose = lerp_joints(&current, &cand, u)?;
            let score = score_candidate(model, s, &track, start, &positions, &pose, u)?;
            if best.as_ref().is_none_or(|b| score > b.0) {
                best = Some((score, pose));
            }
        }
        let (best_score, goal) = best.expect("at least one candidate");

        let steps = next - tau;
        let mut prev = hold.clone();
        for (i, t) in (tau + 1..=next).enumerate() {
            let frac = (i as f64 + 1.0) / f64::from(steps);
            let targets = lerp_joints(&current, &goal, frac)?;
            let skel = fit_full_body(&targets, &model.skeleton_codebook, &prev)?;
            seq.frames[t as usize - 1].agent2 = skel.clone();
            prev = skel;
        }
        trace.push(StepTrace {
            tau,
            tau_next: next,
            subevent: s,
            subevent_start: start,
            predicted_end: tau2,
            progress: u,
            best_score,
        });
        tau = next;
    }
    Ok(SynthesisOutput { sequence: seq, trace })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{entities, fit_potentials, ConfigEcho, Grouping, SubEventParse};
    use crate::stats::DistributionKind;
    use rand::SeedableRng;

    fn standing(x: f64, facing: f64) -> Skeleton {
        // facing = +1 looks along +x, -1 along -x
        let s = facing;
        let p = |dx: f64, dy: f64, z: f64| Vec3::new(x + s * dx, s * dy, z);
        let mut pos = [Vec3::ZERO; JointId::COUNT];
        let set = |pos: &mut [Vec3; JointId::COUNT], j: JointId, v: Vec3| pos[j.index()] = v;
        set(&mut pos, JointId::SpineBase, p(0.0, 0.0, 1.0));
        set(&mut pos, JointId::SpineMid, p(0.0, 0.0, 1.25));
        set(&mut pos, JointId::Neck, p(0.0, 0.0, 1.5));
        set(&mut pos, JointId::Head, p(0.0, 0.0, 1.65));
        set(&mut pos, JointId::ShoulderL, p(0.0, 0.2, 1.45));
        set(&mut pos, JointId::ElbowL, p(0.0, 0.22, 1.17));
        set(&mut pos, JointId::WristL, p(0.02, 0.22, 0.92));
        set(&mut pos, JointId::ShoulderR, p(0.0, -0.2, 1.45));
        set(&mut pos, JointId::ElbowR, p(0.0, -0.22, 1.17));
        set(&mut pos, JointId::WristR, p(0.02, -0.22, 0.92));
        set(&mut pos, JointId::HipL, p(0.0, 0.1, 0.95));
        set(&mut pos, JointId::KneeL, p(0.02, 0.1, 0.5));
        set(&mut pos, JointId::AnkleL, p(0.0, 0.1, 0.08));
        set(&mut pos, JointId::HipR, p(0.0, -0.1, 0.95));
        set(&mut pos, JointId::KneeR, p(0.02, -0.1, 0.5));
        set(&mut pos, JointId::AnkleR, p(0.0, -0.1, 0.08));
        Skeleton::from_positions(pos)
    }

    fn codebook_of(skels: &[Skeleton], other_base: Vec3) -> KMeansModel {
        let centroids = skels
            .iter()
            .map(|s| {
                let f = crate::geometry::facing_frame(s.base(), other_base);
                JointId::ALL.iter().flat_map(|&j| f.to_local(s[j]).to_array()).collect()
            })
            .collect::<Vec<Vec<f64>>>();
        KMeansModel {
            k: centroids.len(),
            feature_dim: 48,
            centroids,
            inertia_trace: vec![],
        }
    }

    fn bones(s: &Skeleton) -> Vec<f64> {
        LIMBS
            .iter()
            .flat_map(|&(r, m, e)| [s[r].distance(s[m]), s[m].distance(s[e])])
            .collect()
    }

    #[test]
    fn duration_prediction_statistics() {
        let d = Distribution::LogNormal { mu: 20f64.ln(), sigma: 0.5 };
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 10_000;
        let mut sum = 0.0;
        for _ in 0..n {
            let end = predict_subevent_end(5, 5, &d, 50, &mut rng);
            assert!(end >= 5);
            sum += f64::from(end - 5 + 1);
        }
        let mean = sum / f64::from(n);
        let expect = 20.0 * (0.125f64).exp();
        assert!((expect - 22.66).abs() < 0.01);
        assert!((mean / expect - 1.0).abs() < 0.05, "{mean}");
    }

    #[test]
    fn duration_prediction_cap_path_and_determinism() {
        let d = Distribution::LogNormal { mu: 20f64.ln(), sigma: 0.5 };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        // far beyond any plausible draw: the sub-event ends now
        assert_eq!(predict_subevent_end(1, 500, &d, 50, &mut rng), 500);
        let a: Vec<u32> = {
            let mut r = ChaCha8Rng::seed_from_u64(3);
            (0..20).map(|_| predict_subevent_end(1, 4, &d, 50, &mut r)).collect()
        };
        let b: Vec<u32> = {
            let mut r = ChaCha8Rng::seed_from_u64(3);
            (0..20).map(|_| predict_subevent_end(1, 4, &d, 50, &mut r)).collect()
        };
        assert_eq!(a, b);
    }

    #[test]
    fn full_body_exact_match_returns_transformed_centroid() {
        let template = standing(0.0, 1.0);
        let cb = codebook_of(&[template.clone(), standing(0.0, 1.0).map(|p| p * 1.3)], Vec3::new(1.0, 0.0, 1.0));
        let theta = 0.7;
        let moved = |p: Vec3| p.rotate_z(theta) + Vec3::new(2.0, -1.0, 0.0);
        let target_skel = template.map(moved);
        let targets = target_skel.modeled();
        let current = standing(5.0, -1.0);
        let fit = fit_full_body(&targets, &cb, &current).unwrap();
        for j in JointId::ALL {
            assert!(fit[j].distance(target_skel[j]) < 1e-9, "{j}");
        }
    }

    #[test]
    fn full_body_out_of_reach_clamps_and_keeps_bones() {
        let template = standing(0.0, 1.0);
        let cb = codebook_of(&[template.clone()], Vec3::new(1.0, 0.0, 1.0));
        let mut targets = template.modeled();
        let far = Vec3::new(3.0, -0.2, 1.45);
        targets.insert(JointId::WristR, far);
        let fit = fit_full_body(&targets, &cb, &standing(0.3, 1.0)).unwrap();
        let (s, w) = (fit[JointId::ShoulderR], fit[JointId::WristR]);
        let reach = template[JointId::ShoulderR].distance(template[JointId::ElbowR])
            + template[JointId::ElbowR].distance(template[JointId::WristR]);
        assert!((s.distance(w) - reach).abs() < 1e-9);
        let dir = (far - s).normalized().unwrap();
        assert!(((w - s).normalized().unwrap() - dir).norm() < 1e-9);
        for (a, b) in bones(&fit).iter().zip(bones(&template)) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn full_body_preserves_bones_for_random_targets() {
        let template = standing(0.0, 1.0);
        let cb = codebook_of(&[template.clone()], Vec3::new(1.0, 0.0, 1.0));
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let mut targets = template.modeled();
            for j in JointId::MODELED {
                let jitter = Vec3::new(rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5));
                targets.insert(j, template[j] + jitter);
            }
            let fit = fit_full_body(&targets, &cb, &template).unwrap();
            assert!(fit.base().distance(targets[&JointId::SpineBase]) < 1e-12);
            for (a, b) in bones(&fit).iter().zip(bones(&template)) {
                assert!((a - b).abs() < 1e-9);
            }
        }
    }

    fn approach_sequence(t_len: u32, with_contact: bool) -> InteractionSequence {
        let frames = (1..=t_len)
            .map(|t| {
                let a1 = standing(0.0, 1.0);
                let mut a2 = standing(1.6 - 0.005 * f64::from(t), -1.0);
                if with_contact {
                    let w = a1[JointId::WristR];
                    a2[JointId::WristR] = a2[JointId::WristR].lerp(w, f64::from(t) / f64::from(t_len));
                }
                crate::data::Frame { t, agent1: a1, agent2: a2, object: None }
            })
            .collect();
        InteractionSequence {
            id: "s".into(),
            label: "toy".into(),
            fps: 12.0,
            frames,
            annotations: None,
        }
    }

    fn model_for(seqs: &[InteractionSequence], grouping: Grouping) -> InteractionModel {
        let tracks: Vec<SceneTrack> = seqs.iter().map(SceneTrack::from_sequence).collect();
        let parse = SubEventParse::single(seqs[0].len() as u32, 1);
        let pairs: Vec<(&SceneTrack, &SubEventParse)> = tracks.iter().map(|t| (t, &parse)).collect();
        let potentials = fit_potentials(&pairs, &grouping);
        let cb = codebook_of(&[standing(0.0, 1.0)], Vec3::new(1.0, 0.0, 1.0));
        InteractionModel {
            label: "toy".into(),
            num_subevents: 1,
            num_categories: 1,
            grouping,
            potentials,
            subevent_marginal: vec![1.0],
            skeleton_codebook: cb,
            config: ConfigEcho {
                distance_eps: 1e-4,
                lambda_merge: 1.0,
                beta: 0.3,
                gamma: 1.0,
                seed: 0,
                variant: "full".into(),
            },
        }
    }

    #[test]
    fn all_null_model_is_static() {
        let seqs = vec![approach_sequence(30, true), approach_sequence(30, false)];
        let model = model_for(&seqs, Grouping::all_null(1, entities(false)));
        let cfg = SynthesisConfig::default();
        let out = synthesize(&seqs[0], &model, &cfg).unwrap();
        let warm = &out.sequence.frames[cfg.t0 as usize - 1].agent2;
        for f in &out.sequence.frames[cfg.t0 as usize..] {
            assert_eq!(&f.agent2, warm);
        }
        assert_eq!(out.sequence.frames.len(), 30);
        assert!(crate::data::validate_sequence(&out.sequence).is_valid());
    }

    #[test]
    fn candidates_null_joints_stay_and_seeds_matter() {
        let seqs = vec![approach_sequence(20, true)];
        let model = model_for(&seqs, Grouping::all_null(1, entities(false)));
        let track = SceneTrack::from_sequence(&seqs[0]);
        let pos = track.positions[9].clone();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let c = sample_subgoal_candidates(&model, 1, &SubgoalContext::at_rest(&track.entities, &pos), 5, &mut rng).unwrap();
        for cand in &c {
            for (j, p) in cand {
                assert_eq!(*p, seqs[0].frames[9].agent2[*j]);
            }
        }
    }

    #[test]
    fn paired_wrist_candidates_concentrate_near_partner() {
        let mut seqs = Vec::new();
        for i in 0..8 {
            let mut s = approach_sequence(20, true);
            let last = s.frames.len() - 1;
            let w = s.frames[last].agent1[JointId::WristR];
            let jitter = Vec3::new(0.01 * (i as f64 - 4.0) / 4.0, 0.005 * (i % 3) as f64, -0.004 * (i % 2) as f64);
            s.frames[last].agent2[JointId::WristR] = w + jitter;
            seqs.push(s);
        }
        let ents = entities(false);
        let mut g = Grouping::all_null(1, ents.clone());
        let mut row = vec![0; ents.len()];
        row[2] = 1; // agent1 wrist R
        row[7] = 1; // agent2 wrist R
        g.set_row(1, row);
        let model = model_for(&seqs, g);
        let track = SceneTrack::from_sequence(&seqs[0]);
        let pos = track.positions[9].clone();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let c = sample_subgoal_candidates(&model, 1, &SubgoalContext::at_rest(&track.entities, &pos), 200, &mut rng).unwrap();
        let partner = pos[2];
        let close = c.iter().filter(|m| m[&JointId::WristR].distance(partner) < 0.05).count();
        assert!(close as f64 / 200.0 > 0.9, "{close}");
        let mut r1 = ChaCha8Rng::seed_from_u64(2);
        let mut r2 = ChaCha8Rng::seed_from_u64(3);
        let a = sample_subgoal_candidates(&model, 1, &SubgoalContext::at_rest(&track.entities, &pos), 3, &mut r1).unwrap();
        let b = sample_subgoal_candidates(&model, 1, &SubgoalContext::at_rest(&track.entities, &pos), 3, &mut r2).unwrap();
        assert_ne!(a, b);
        let _ = DistributionKind::Weibull;
    }

    #[test]
    fn short_sequence_returns_warm_start() {
        let seqs = vec![approach_sequence(8, true)];
        let model = model_for(&seqs, Grouping::all_null(1, entities(false)));
        let out = synthesize(&seqs[0], &model, &SynthesisConfig::default()).unwrap();
        assert_eq!(out.sequence, seqs[0]);
        assert!(out.trace.is_empty());
    }
}
