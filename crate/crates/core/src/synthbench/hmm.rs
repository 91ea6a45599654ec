//! Discrete multi-level Markov baseline.
//!
//! The state of a frame is the product of four discrete levels: the
//! inter-agent base distance bin, the relative heading bin, the cluster of
//! agent 1's pose (plus the object) and the cluster of agent 2's pose, both
//! poses expressed in agent 1's facing frame. Synthesis keeps the first
//! three levels from the observation and picks the most probable agent-2
//! cluster under add-one smoothed transition counts. When every candidate
//! is tied (an unseen context), the previous agent-2 cluster is kept, then
//! the lowest index wins. Emitted centroids are smoothed with a centred
//! moving average over the synthesized frames.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::data::{Frame, InteractionSequence, JointId, Skeleton};
use crate::error::{Error, Result};
use crate::geometry::{facing_frame, wrap_angle, FacingFrame, Vec3};
use crate::stats::{kmeans_assign, kmeans_fit, substream, KMeansModel};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HmmConfig {
    pub distance_bins: usize,
    pub yaw_bins: usize,
    pub agent1_clusters: usize,
    pub agent2_clusters: usize,
    /// Moving-average window over synthesized frames (odd).
    pub smoothing_window: usize,
    pub seed: u64,
}

impl Default for HmmConfig {
    fn default() -> Self {
        HmmConfig {
            distance_bins: 5,
            yaw_bins: 8,
            agent1_clusters: 50,
            agent2_clusters: 50,
            smoothing_window: 5,
            seed: 0,
        }
    }
}

impl HmmConfig {
    pub fn validate(&self) -> Result<()> {
        if self.distance_bins == 0
            || self.yaw_bins == 0
            || self.agent1_clusters == 0
            || self.agent2_clusters == 0
            || self.smoothing_window % 2 == 0
        {
            return Err(Error::precondition(
                "hmm needs positive bin and cluster counts and an odd smoothing window",
            ));
        }
        Ok(())
    }
}

/// Discrete state: (distance bin, yaw bin, agent-1 cluster, agent-2 cluster).
type State = (usize, usize, usize, usize);

/// Observed levels of a frame, without the agent-2 cluster.
type Context = (usize, usize, usize);

/// Heading from the shoulder line: forward is the left-pointing shoulder
/// axis turned a quarter turn clockwise.
fn heading(s: &Skeleton) -> f64 {
    let left = s[JointId::ShoulderL] - s[JointId::ShoulderR];
    (-left.x).atan2(left.y)
}

fn agent1_frame(agent1: &Skeleton, agent2_base: Vec3) -> FacingFrame {
    facing_frame(agent1.base(), agent2_base)
}

fn agent1_features(frame: &Frame, agent2_base: Vec3) -> Vec<f64> {
    let f = agent1_frame(&frame.agent1, agent2_base);
    let mut out: Vec<f64> = JointId::ALL
        .iter()
        .flat_map(|&j| f.to_local(frame.agent1[j]).to_array())
        .collect();
    if let Some(o) = frame.object {
        out.extend(f.to_local(o).to_array());
    }
    out
}

fn agent2_features(agent1: &Skeleton, agent2: &Skeleton) -> Vec<f64> {
    let f = agent1_frame(agent1, agent2.base());
    JointId::ALL
        .iter()
        .flat_map(|&j| f.to_local(agent2[j]).to_array())
        .collect()
}

#[derive(Debug, Clone)]
pub struct HmmBaseline {
    config: HmmConfig,
    distance_cuts: Vec<f64>,
    agent1_codebook: KMeansModel,
    agent2_codebook: KMeansModel,
    /// Transition counts from a state into each agent-2 cluster, keyed by
    /// the previous state and the next context.
    counts: HashMap<(State, Context), Vec<u32>>,
}

impl HmmBaseline {
    pub fn fit(train: &[InteractionSequence], config: &HmmConfig) -> Result<Self> {
        config.validate()?;
        let frames: Vec<&Frame> = train.iter().flat_map(|s| &s.frames).collect();
        if frames.is_empty() {
            return Err(Error::precondition("hmm baseline needs training frames"));
        }
        if train.iter().any(|s| s.has_object() != train[0].has_object()) {
            return Err(Error::precondition("training sequences disagree on object presence"));
        }

        let mut distances: Vec<f64> = frames
            .iter()
            .map(|f| f.agent1.base().distance(f.agent2.base()))
            .collect();
        distances.sort_by(f64::total_cmp);
        let distance_cuts = (1..config.distance_bins)
            .map(|i| distances[(i * distances.len() / config.distance_bins).min(distances.len() - 1)])
            .collect();

        let a1: Vec<Vec<f64>> = frames.iter().map(|f| agent1_features(f, f.agent2.base())).collect();
        let a2: Vec<Vec<f64>> = frames.iter().map(|f| agent2_features(&f.agent1, &f.agent2)).collect();
        let agent1_codebook = kmeans_fit(&a1, config.agent1_clusters.min(a1.len()), &mut substream(config.seed, 4))?;
        let mut agent2_codebook =
            kmeans_fit(&a2, config.agent2_clusters.min(a2.len()), &mut substream(config.seed, 5))?;
        agent2_codebook.inertia_trace.clear();

        let mut model = HmmBaseline {
            config: config.clone(),
            distance_cuts,
            agent1_codebook,
            agent2_codebook,
            counts: HashMap::new(),
        };
        for seq in train {
            let mut prev: Option<State> = None;
            for f in &seq.frames {
                let state = model.state(f, f.agent2.base(), &f.agent2)?;
                if let Some(p) = prev {
                    let k2 = model.agent2_codebook.k;
                    let row = model
                        .counts
                        .entry((p, (state.0, state.1, state.2)))
                        .or_insert_with(|| vec![0; k2]);
                    row[state.3] += 1;
                }
                prev = Some(state);
            }
        }
        Ok(model)
    }

    fn context(&self, frame: &Frame, agent2_base: Vec3, agent2_heading: f64) -> Result<Context> {
        let d = frame.agent1.base().distance(agent2_base);
        let d_bin = self.distance_cuts.partition_point(|&c| c <= d);
        let rel = wrap_angle(agent2_heading - heading(&frame.agent1));
        let width = std::f64::consts::TAU / self.config.yaw_bins as f64;
        let y_bin = (((rel + std::f64::consts::PI) / width).floor() as usize).min(self.config.yaw_bins - 1);
        let c1 = kmeans_assign(&self.agent1_codebook, &agent1_features(frame, agent2_base))?;
        Ok((d_bin, y_bin, c1))
    }

    fn state(&self, frame: &Frame, agent2_base: Vec3, agent2: &Skeleton) -> Result<State> {
        let (d, y, c1) = self.context(frame, agent2_base, heading(agent2))?;
        let c2 = kmeans_assign(&self.agent2_codebook, &agent2_features(&frame.agent1, agent2))?;
        Ok((d, y, c1, c2))
    }

    /// Most probable next agent-2 cluster; ties keep `prev.3`, then the
    /// lowest index.
    fn next_cluster(&self, prev: State, ctx: Context) -> usize {
        let Some(row) = self.counts.get(&(prev, ctx)) else {
            return prev.3;
        };
        let max = row.iter().copied().max().unwrap_or(0);
        if row[prev.3] == max {
            return prev.3;
        }
        row.iter().position(|&c| c == max).unwrap_or(prev.3)
    }

    fn emit(&self, c2: usize, agent1: &Skeleton, agent2_base: Vec3) -> Skeleton {
        let f = agent1_frame(agent1, agent2_base);
        let c = &self.agent2_codebook.centroids[c2];
        let mut p = [Vec3::ZERO; JointId::COUNT];
        for (i, v) in p.iter_mut().enumerate() {
            *v = f.to_world(Vec3::new(c[3 * i], c[3 * i + 1], c[3 * i + 2]));
        }
        Skeleton::from_positions(p)
    }

    /// Replaces agent 2 after frame `t0` with the baseline's prediction.
    pub fn synthesize(&self, observed: &InteractionSequence, t0: usize) -> Result<InteractionSequence> {
        let t_len = observed.len();
        if t0 == 0 || t0 > t_len {
            return Err(Error::precondition(format!("warm start of {t0} frames for a sequence of {t_len}")));
        }
        let mut seq = observed.clone();
        let f0 = &seq.frames[t0 - 1];
        let mut prev = self.state(f0, f0.agent2.base(), &f0.agent2)?;
        let mut prev_agent2 = f0.agent2.clone();
        let mut raw = Vec::with_capacity(t_len - t0);
        for t in t0..t_len {
            let frame = &seq.frames[t];
            let base = prev_agent2.base();
            let ctx = self.context(frame, base, heading(&prev_agent2))?;
            let c2 = self.next_cluster(prev, ctx);
            let skel = self.emit(c2, &frame.agent1, base);
            prev = (ctx.0, ctx.1, ctx.2, c2);
            prev_agent2 = skel.clone();
            raw.push(skel);
        }
        let half = self.config.smoothing_window / 2;
        for i in 0..raw.len() {
            let lo = i.saturating_sub(half);
            let hi = (i + half).min(raw.len() - 1);
            let n = (hi - lo + 1) as f64;
            let mut p = [Vec3::ZERO; JointId::COUNT];
            for s in &raw[lo..=hi] {
                for (acc, j) in p.iter_mut().zip(JointId::ALL) {
                    *acc += s[j];
                }
            }
            seq.frames[t0 + i].agent2 = Skeleton::from_positions(p.map(|v| v / n));
        }
        Ok(seq)
    }
}

/// Agent 2 frozen at its last warm-start pose.
pub fn static_baseline(observed: &InteractionSequence, t0: usize) -> Result<InteractionSequence> {
    if t0 == 0 || t0 > observed.len() {
        return Err(Error::precondition("warm start longer than the sequence"));
    }
    let mut seq = observed.clone();
    let hold = seq.frames[t0 - 1].agent2.clone();
    for f in &mut seq.frames[t0..] {
        f.agent2 = hold.clone();
    }
    Ok(seq)
}
