//! Structure learning: Metropolis-Hastings over sub-event parses with an inner
//! Gibbs sampler over joint selection and grouping.
//!
//! Proposals move sub-event boundaries only between atomic intervals (maximal
//! runs of one k-means pose cluster). After every proposal the grouping is
//! refined by a fixed number of Gibbs sweeps, and the best grouping visited
//! scores the proposed state.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::data::{Agent, InteractionSequence, JointId};
use crate::error::{Error, Result};
use crate::geometry::{CylFeatures, Vec3, DISTANCE_EPS};
use crate::model::{
    fit_durations, fit_potentials, fit_transitions, grouping_log_prior, groups_of, normalize_row,
    ConfigEcho, CrpConfig, FeatureBundle, Grouping, InteractionModel, SceneTrack, SubEventParse,
};
use crate::stats::{kmeans_assign, kmeans_fit, log_pdf, substream, DistributionKind, KMeansModel};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProposalConfig {
    pub lambda_merge: f64,
    /// Probabilities of (merge, split, relabel).
    pub q: [f64; 3],
    pub atomic_k: usize,
}

impl Default for ProposalConfig {
    fn default() -> Self {
        ProposalConfig {
            lambda_merge: 1.0,
            q: [0.4, 0.4, 0.2],
            atomic_k: 50,
        }
    }
}

/// Which parts of the model are learned.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    #[default]
    Full,
    /// Every entity affordable, all in one group; no Gibbs sampling.
    V1,
    /// A single sub-event type.
    V2,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::Full => "full",
            Variant::V1 => "v1",
            Variant::V2 => "v2",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LearnConfig {
    pub num_subevents: usize,
    pub outer_iters: usize,
    pub gibbs_sweeps: usize,
    pub crp: CrpConfig,
    pub proposal: ProposalConfig,
    pub seed: u64,
    /// Size of the category dictionary, for the uniform category prior.
    pub num_categories: usize,
    pub variant: Variant,
}

impl Default for LearnConfig {
    fn default() -> Self {
        LearnConfig {
            num_subevents: 3,
            outer_iters: 100,
            gibbs_sweeps: 5,
            crp: CrpConfig::default(),
            proposal: ProposalConfig::default(),
            seed: 0,
            num_categories: 1,
            variant: Variant::Full,
        }
    }
}

impl LearnConfig {
    pub fn validate(&self) -> Result<()> {
        let q = self.proposal.q;
        if self.num_subevents < 1 || self.outer_iters < 1 || self.num_categories < 1 {
            return Err(Error::precondition(
                "num_subevents, outer_iters and num_categories must be at least 1",
            ));
        }
        if q.iter().any(|&x| !(x >= 0.0)) || ((q.iter().sum::<f64>()) - 1.0).abs() > 1e-9 {
            return Err(Error::precondition("proposal kind probabilities must sum to 1"));
        }
        if !(self.proposal.lambda_merge > 0.0) || self.proposal.atomic_k < 2 {
            return Err(Error::precondition("lambda_merge > 0 and atomic_k >= 2 required"));
        }
        self.crp.validate()
    }

    /// Sub-event count after applying the variant.
    pub fn effective_subevents(&self) -> usize {
        match self.variant {
            Variant::V2 => 1,
            _ => self.num_subevents,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProposalKind {
    Merge,
    Split,
    Relabel,
}

impl ProposalKind {
    const ALL: [ProposalKind; 3] = [ProposalKind::Merge, ProposalKind::Split, ProposalKind::Relabel];

    fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Proposal {
    pub parse: SubEventParse,
    pub log_q_fwd: f64,
    pub log_q_rev: f64,
    pub kind: ProposalKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iteration: usize,
    pub log_prob: f64,
    pub best_log_prob: f64,
    pub accepted: bool,
    /// `None` when no valid proposal could be formed.
    pub kind: Option<ProposalKind>,
}

/// A training sequence with its precomputed proposal geometry.
#[derive(Debug, Clone)]
pub struct Instance {
    pub track: SceneTrack,
    pub atomic: Vec<(u32, u32)>,
    /// Prefix sums of entity positions in agent 1's facing frame; `prefix[t][e]`
    /// covers frames `1..=t`.
    prefix: Vec<Vec<Vec3>>,
}

impl Instance {
    pub fn new(track: SceneTrack, atomic: Vec<(u32, u32)>) -> Self {
        let n = track.entities.len();
        let mut prefix = vec![vec![Vec3::ZERO; n]];
        for t in 1..=track.len() {
            let frame = track.facing(t, Agent::One);
            let prev = prefix.last().expect("non-empty");
            let row = (0..n)
                .map(|e| prev[e] + frame.to_local(track.position(t, e)))
                .collect();
            prefix.push(row);
        }
        Instance {
            track,
            atomic,
            prefix,
        }
    }

    fn mean_pose(&self, (a, b): (u32, u32)) -> Vec<Vec3> {
        let len = f64::from(b - a + 1);
        self.prefix[b as usize]
            .iter()
            .zip(&self.prefix[a as usize - 1])
            .map(|(&hi, &lo)| (hi - lo) / len)
            .collect()
    }

    /// Mean entity distance between the average normalized poses of two spans.
    pub fn pose_distance(&self, x: (u32, u32), y: (u32, u32)) -> f64 {
        let (mx, my) = (self.mean_pose(x), self.mean_pose(y));
        mx.iter().zip(&my).map(|(p, q)| p.distance(*q)).sum::<f64>() / mx.len() as f64
    }

    /// Atomic interval starts strictly inside `(a, b]`.
    pub fn internal_boundaries(&self, (a, b): (u32, u32)) -> Vec<u32> {
        self.atomic
            .iter()
            .map(|iv| iv.0)
            .filter(|&s| s > a && s <= b)
            .collect()
    }

    pub fn respects_atomic(&self, parse: &SubEventParse) -> bool {
        parse
            .boundaries()
            .iter()
            .all(|b| self.atomic.iter().any(|iv| iv.0 == *b))
    }
}

/// Per-frame pose features: every entity in agent 1's facing frame.
fn frame_features(track: &SceneTrack, t: u32) -> Vec<f64> {
    let frame = track.facing(t, Agent::One);
    (0..track.entities.len())
        .flat_map(|e| frame.to_local(track.position(t, e)).to_array())
        .collect()
}

/// Maximal runs of equal labels, as 1-based inclusive intervals.
pub fn run_length_intervals(labels: &[usize]) -> Vec<(u32, u32)> {
    let mut out: Vec<(u32, u32)> = Vec::new();
    for (i, l) in labels.iter().enumerate() {
        let t = i as u32 + 1;
        match out.last_mut() {
            Some(last) if labels[i - 1] == *l => last.1 = t,
            _ => out.push((t, t)),
        }
    }
    out
}

/// Atomic intervals of a sequence from per-frame k-means labels, with
/// `min(k, T)` clusters.
pub fn atomic_intervals(track: &SceneTrack, k: usize, seed: u64) -> Result<Vec<(u32, u32)>> {
    if track.len() < 2 {
        return Err(Error::precondition("atomic intervals need T >= 2"));
    }
    let points: Vec<Vec<f64>> = (1..=track.len()).map(|t| frame_features(track, t)).collect();
    let k = k.min(points.len());
    let mut rng = substream(seed, 0);
    let model = kmeans_fit(&points, k, &mut rng)?;
    let labels = points
        .iter()
        .map(|p| kmeans_assign(&model, p))
        .collect::<Result<Vec<_>>>()?;
    Ok(run_length_intervals(&labels))
}

/// `num_subevents` contiguous blocks of near-equal length, snapped to atomic
/// starts, labeled 1, 2, ...
pub fn initial_parse(inst: &Instance, num_subevents: usize) -> SubEventParse {
    let t_len = inst.track.len();
    let starts: Vec<u32> = inst.atomic.iter().skip(1).map(|iv| iv.0).collect();
    let mut cuts: Vec<u32> = Vec::new();
    for j in 1..num_subevents {
        let target = (f64::from(t_len) * j as f64 / num_subevents as f64).round() as u32 + 1;
        let best = starts
            .iter()
            .copied()
            .filter(|&s| cuts.last().is_none_or(|&c| s > c))
            .min_by_key(|&s| (s.abs_diff(target), s));
        if let Some(s) = best {
            cuts.push(s);
        }
    }
    let mut intervals = Vec::new();
    let mut a = 1;
    for &c in &cuts {
        intervals.push((a, c - 1));
        a = c;
    }
    intervals.push((a, t_len));
    let labels = (1..=intervals.len() as u32).collect();
    SubEventParse { intervals, labels }
}

fn feasible(kind: ProposalKind, inst: &Instance, parse: &SubEventParse) -> bool {
    match kind {
        ProposalKind::Merge => parse.len() >= 2,
        ProposalKind::Split => parse
            .intervals
            .iter()
            .any(|&iv| !inst.internal_boundaries(iv).is_empty()),
        ProposalKind::Relabel => true,
    }
}

/// ln of the kind probability after renormalizing over feasible kinds.
fn log_kind_prob(kind: ProposalKind, inst: &Instance, parse: &SubEventParse, cfg: &ProposalConfig) -> f64 {
    let total: f64 = ProposalKind::ALL
        .iter()
        .filter(|&&k| feasible(k, inst, parse))
        .map(|k| cfg.q[k.index()])
        .sum();
    (cfg.q[kind.index()] / total).ln()
}

fn merge_weights(inst: &Instance, parse: &SubEventParse, lambda: f64) -> Vec<f64> {
    parse
        .intervals
        .windows(2)
        .map(|w| (-lambda * inst.pose_distance(w[0], w[1])).exp())
        .collect()
}

/// Internal boundaries of a segment with their selection probabilities,
/// proportional to `1 - e^{-λd}` (uniform when every weight vanishes).
fn split_boundaries(inst: &Instance, (a, b): (u32, u32), lambda: f64) -> Vec<(u32, f64)> {
    let cands = inst.internal_boundaries((a, b));
    let w: Vec<f64> = cands
        .iter()
        .map(|&c| 1.0 - (-lambda * inst.pose_distance((a, c - 1), (c, b))).exp())
        .collect();
    let total: f64 = w.iter().sum();
    cands
        .iter()
        .zip(&w)
        .map(|(&c, &wi)| {
            let p = if total > 0.0 {
                wi / total
            } else {
                1.0 / cands.len() as f64
            };
            (c, p)
        })
        .collect()
}

fn splittable(inst: &Instance, parse: &SubEventParse) -> Vec<usize> {
    (0..parse.len())
        .filter(|&k| !inst.internal_boundaries(parse.intervals[k]).is_empty())
        .collect()
}

/// ln Q of merging pair `(k, k+1)` of `parse` into `label`.
fn log_q_merge(inst: &Instance, parse: &SubEventParse, k: usize, cfg: &ProposalConfig, num_s: usize) -> f64 {
    let w = merge_weights(inst, parse, cfg.lambda_merge);
    let total: f64 = w.iter().sum();
    log_kind_prob(ProposalKind::Merge, inst, parse, cfg) + (w[k] / total).ln() - (num_s as f64).ln()
}

/// ln Q of splitting segment `k` of `parse` at `boundary` into two labels.
fn log_q_split(
    inst: &Instance,
    parse: &SubEventParse,
    k: usize,
    boundary: u32,
    cfg: &ProposalConfig,
    num_s: usize,
) -> f64 {
    let n_split = splittable(inst, parse).len() as f64;
    let p_b = split_boundaries(inst, parse.intervals[k], cfg.lambda_merge)
        .into_iter()
        .find(|&(c, _)| c == boundary)
        .map_or(0.0, |(_, p)| p);
    log_kind_prob(ProposalKind::Split, inst, parse, cfg) - n_split.ln() + p_b.ln()
        - 2.0 * (num_s as f64).ln()
}

fn valid_labels(labels: &[u32]) -> bool {
    labels.windows(2).all(|w| w[0] != w[1])
}

pub fn apply_merge(parse: &SubEventParse, k: usize, label: u32) -> Option<SubEventParse> {
    let mut intervals = parse.intervals.clone();
    let mut labels = parse.labels.clone();
    intervals[k].1 = intervals[k + 1].1;
    intervals.remove(k + 1);
    labels[k] = label;
    labels.remove(k + 1);
    valid_labels(&labels).then_some(SubEventParse { intervals, labels })
}

pub fn apply_split(parse: &SubEventParse, k: usize, boundary: u32, l1: u32, l2: u32) -> Option<SubEventParse> {
    let (a, b) = parse.intervals[k];
    if boundary <= a || boundary > b {
        return None;
    }
    let mut intervals = parse.intervals.clone();
    let mut labels = parse.labels.clone();
    intervals[k] = (a, boundary - 1);
    intervals.insert(k + 1, (boundary, b));
    labels[k] = l1;
    labels.insert(k + 1, l2);
    valid_labels(&labels).then_some(SubEventParse { intervals, labels })
}

fn pick<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> usize {
    let total: f64 = weights.iter().sum();
    let mut u = rng.random::<f64>() * total;
    for (i, &w) in weights.iter().enumerate() {
        if u < w {
            return i;
        }
        u -= w;
    }
    weights.iter().rposition(|&w| w > 0.0).unwrap_or(0)
}

/// Draws one merge/split/relabel proposal; `None` when the drawn move yields
/// an invalid parse (consecutive equal labels). Such proposals are rejected.
pub fn propose<R: Rng + ?Sized>(
    inst: &Instance,
    parse: &SubEventParse,
    num_s: usize,
    cfg: &ProposalConfig,
    rng: &mut R,
) -> (ProposalKind, Option<Proposal>) {
    let weights: Vec<f64> = ProposalKind::ALL
        .iter()
        .map(|&k| if feasible(k, inst, parse) { cfg.q[k.index()] } else { 0.0 })
        .collect();
    let kind = ProposalKind::ALL[pick(&weights, rng)];
    let label = |rng: &mut R| rng.random_range(1..=num_s as u32);
    let proposal = match kind {
        ProposalKind::Merge => {
            let w = merge_weights(inst, parse, cfg.lambda_merge);
            let k = pick(&w, rng);
            let l = label(rng);
            apply_merge(parse, k, l).map(|new| {
                let boundary = parse.intervals[k + 1].0;
                Proposal {
                    log_q_fwd: log_q_merge(inst, parse, k, cfg, num_s),
                    log_q_rev: log_q_split(inst, &new, k, boundary, cfg, num_s),
                    parse: new,
                    kind,
                }
            })
        }
        ProposalKind::Split => {
            let segs = splittable(inst, parse);
            let k = segs[rng.random_range(0..segs.len())];
            let cands = split_boundaries(inst, parse.intervals[k], cfg.lambda_merge);
            let p: Vec<f64> = cands.iter().map(|c| c.1).collect();
            let boundary = cands[pick(&p, rng)].0;
            let (l1, l2) = (label(rng), label(rng));
            apply_split(parse, k, boundary, l1, l2).map(|new| Proposal {
                log_q_fwd: log_q_split(inst, parse, k, boundary, cfg, num_s),
                log_q_rev: log_q_merge(inst, &new, k, cfg, num_s),
                parse: new,
                kind,
            })
        }
        ProposalKind::Relabel => {
            let k = rng.random_range(0..parse.len());
            let l = label(rng);
            let mut labels = parse.labels.clone();
            labels[k] = l;
            valid_labels(&labels).then(|| {
                let q = log_kind_prob(kind, inst, parse, cfg)
                    - ((parse.len() * num_s) as f64).ln();
                Proposal {
                    parse: SubEventParse {
                        intervals: parse.intervals.clone(),
                        labels,
                    },
                    log_q_fwd: q,
                    log_q_rev: q,
                    kind,
                }
            })
        }
    };
    (kind, proposal)
}

/// Prior probabilities of re-inserting one entity into the remaining row.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalPrior {
    pub null: f64,
    /// By dense group id of the remainder, `existing[h - 1]`.
    pub existing: Vec<f64>,
    pub new_group: f64,
}

impl ConditionalPrior {
    pub fn total(&self) -> f64 {
        self.null + self.existing.iter().sum::<f64>() + self.new_group
    }
}

/// CRP-with-inclusion conditional for entity `e`; its current entry in `row`
/// is ignored. `M` counts `e` itself as affordable.
pub fn gibbs_conditional(row: &[u32], e: usize, crp: &CrpConfig) -> ConditionalPrior {
    let mut rest = row.to_vec();
    rest[e] = 0;
    let groups = groups_of(&normalize_row(&rest));
    let m = groups.iter().map(Vec::len).sum::<usize>() + 1;
    let denom = (m - 1) as f64 + crp.gamma;
    ConditionalPrior {
        null: 1.0 - crp.beta,
        existing: groups
            .iter()
            .map(|g| crp.beta * g.len() as f64 / denom)
            .collect(),
        new_group: crp.beta * crp.gamma / denom,
    }
}

/// Candidate rows for entity `e`: Null, each remaining group, a new group.
pub fn candidate_rows(row: &[u32], e: usize) -> Vec<Vec<u32>> {
    let mut rest = row.to_vec();
    rest[e] = 0;
    let rest = normalize_row(&rest);
    let h = rest.iter().copied().max().unwrap_or(0);
    (0..=h + 1)
        .map(|z| {
            let mut r = rest.clone();
            r[e] = z;
            normalize_row(&r)
        })
        .collect()
}

/// Likelihood terms of the grouping-dependent part of the joint, for fixed
/// parses. Spatial group scores are cached by (sub-event, member mask).
pub struct GroupScorer<'a> {
    instances: &'a [Instance],
    /// Segments of each sub-event type: `(instance, start, end)`.
    segments: Vec<Vec<(usize, u32, u32)>>,
    /// `motion[s - 1][e]` for (Null, affordable).
    motion: Vec<Vec<[f64; 2]>>,
    cache: HashMap<(u32, u64), f64>,
}

fn bundle_score(samples: &[CylFeatures], kind: DistributionKind) -> f64 {
    let b = FeatureBundle::fit(samples, kind);
    samples.iter().map(|f| b.log_density(f)).sum()
}

impl<'a> GroupScorer<'a> {
    pub fn new(instances: &'a [Instance], parses: &[SubEventParse], num_s: usize) -> Self {
        let mut segments = vec![Vec::new(); num_s];
        for (n, p) in parses.iter().enumerate() {
            for ((a, b), s) in p.segments() {
                segments[s as usize - 1].push((n, a, b));
            }
        }
        let n_ent = instances[0].track.entities.len();
        let motion = segments
            .iter()
            .map(|segs| {
                (0..n_ent)
                    .map(|e| {
                        let f: Vec<CylFeatures> = segs
                            .iter()
                            .map(|&(n, a, b)| instances[n].track.motion_features(a, b, e))
                            .collect();
                        [
                            bundle_score(&f, DistributionKind::Exponential),
                            bundle_score(&f, DistributionKind::Weibull),
                        ]
                    })
                    .collect()
            })
            .collect();
        GroupScorer {
            instances,
            segments,
            motion,
            cache: HashMap::new(),
        }
    }

    fn group_score(&mut self, s: u32, group: &[usize]) -> f64 {
        let mask = group.iter().fold(0u64, |m, &e| m | (1 << e));
        if let Some(&v) = self.cache.get(&(s, mask)) {
            return v;
        }
        let segs = &self.segments[s as usize - 1];
        let v = group
            .iter()
            .map(|&e| {
                let f: Vec<CylFeatures> = segs
                    .iter()
                    .map(|&(n, _, b)| self.instances[n].track.spatial_features(b, e, group))
                    .collect();
                bundle_score(&f, DistributionKind::Weibull)
            })
            .sum();
        self.cache.insert((s, mask), v);
        v
    }

    /// Spatial plus motion log-likelihood of sub-event type `s` under `row`.
    pub fn type_log_likelihood(&mut self, s: u32, row: &[u32]) -> f64 {
        let motion: f64 = row
            .iter()
            .enumerate()
            .map(|(e, &z)| self.motion[s as usize - 1][e][usize::from(z > 0)])
            .sum();
        let spatial: f64 = groups_of(row).iter().map(|g| self.group_score(s, g)).sum();
        motion + spatial
    }
}

/// Grouping-independent terms: category, first-label anchor, durations and
/// transitions, summed over instances.
pub fn structure_log_prob(parses: &[SubEventParse], num_s: usize, num_categories: usize) -> f64 {
    let refs: Vec<&SubEventParse> = parses.iter().collect();
    let durations = fit_durations(&refs, num_s);
    let trans = fit_transitions(&refs, num_s);
    parses
        .iter()
        .map(|p| {
            let mut v = -(num_categories as f64).ln() - (num_s as f64).ln();
            for ((a, b), s) in p.segments() {
                v += log_pdf(&durations[s as usize - 1], f64::from(b - a + 1));
            }
            for w in p.labels.windows(2) {
                v += trans[w[0] as usize - 1][w[1] as usize - 1].ln();
            }
            v
        })
        .sum()
}

/// ln p(𝒢, Z) with potentials re-fit to `parses` and `grouping`, via the
/// cached decomposition.
pub fn decomposed_joint_log_prob(
    scorer: &mut GroupScorer<'_>,
    parses: &[SubEventParse],
    grouping: &Grouping,
    crp: &CrpConfig,
    num_categories: usize,
) -> f64 {
    let num_s = grouping.num_subevents();
    let mut total = structure_log_prob(parses, num_s, num_categories);
    for s in 1..=num_s as u32 {
        let row = grouping.assignments(s);
        total += scorer.type_log_likelihood(s, row) + grouping_log_prior(row, crp);
    }
    total
}

/// Runs `sweeps` Gibbs sweeps and returns the best grouping visited with its
/// grouping-dependent score. The final sampled grouping is discarded; the
/// sampler's purpose here is maximization.
pub fn gibbs_sweeps<R: Rng + ?Sized>(
    scorer: &mut GroupScorer<'_>,
    start: &Grouping,
    crp: &CrpConfig,
    sweeps: usize,
    rng: &mut R,
) -> Grouping {
    let mut current = start.clone();
    let mut best = start.clone();
    for s in 1..=current.num_subevents() as u32 {
        let score = |sc: &mut GroupScorer<'_>, row: &[u32]| {
            sc.type_log_likelihood(s, row) + grouping_log_prior(row, crp)
        };
        let mut best_score = score(scorer, best.assignments(s));
        let mut order: Vec<usize> = (0..current.entities.len()).collect();
        for _ in 0..sweeps {
            order.shuffle(rng);
            for &e in &order {
                let cands = candidate_rows(current.assignments(s), e);
                let scores: Vec<f64> = cands.iter().map(|r| score(scorer, r)).collect();
                let top = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let w: Vec<f64> = scores.iter().map(|v| (v - top).exp()).collect();
                let i = pick(&w, rng);
                if scores[i] > best_score {
                    best_score = scores[i];
                    best.set_row(s, cands[i].clone());
                }
                current.set_row(s, cands[i].clone());
            }
        }
    }
    best
}

/// Outcome of [`learn`]: the model plus the best parses and the trace.
#[derive(Debug, Clone)]
pub struct LearnOutcome {
    pub model: InteractionModel,
    pub parses: Vec<SubEventParse>,
    pub best_log_prob: f64,
    pub trace: Vec<TraceRow>,
}

/// Codebook features of an agent-2 skeleton: all joints in its own facing frame.
pub fn codebook_features(frame: &crate::data::Frame) -> Vec<f64> {
    let b2 = frame.agent2.base();
    let f = crate::geometry::facing_frame(b2, frame.agent1.base());
    JointId::ALL
        .iter()
        .flat_map(|&j| f.to_local(frame.agent2[j]).to_array())
        .collect()
}

pub fn prepare_instances(seqs: &[InteractionSequence], atomic_k: usize, seed: u64) -> Result<Vec<Instance>> {
    seqs.iter()
        .enumerate()
        .map(|(n, seq)| {
            let track = SceneTrack::from_sequence(seq);
            let atomic = atomic_intervals(&track, atomic_k, seed.wrapping_add(1 + n as u64))?;
            Ok(Instance::new(track, atomic))
        })
        .collect()
}

/// Learns an interaction model from instances of one category.
pub fn learn(seqs: &[InteractionSequence], config: &LearnConfig) -> Result<LearnOutcome> {
    config.validate()?;
    let first = seqs
        .first()
        .ok_or_else(|| Error::precondition("learning needs at least one instance"))?;
    if let Some(other) = seqs.iter().find(|s| s.label != first.label) {
        return Err(Error::LabelMismatch {
            expected: first.label.clone(),
            found: other.label.clone(),
        });
    }
    if seqs.iter().any(|s| s.has_object() != first.has_object()) {
        return Err(Error::precondition("instances disagree on object presence"));
    }
    let num_s = config.effective_subevents();
    let instances = prepare_instances(seqs, config.proposal.atomic_k, config.seed)?;
    let mut rng = substream(config.seed, 1);
    let ents = instances[0].track.entities.clone();
    let gibbs = config.variant != Variant::V1;

    let refine = |parses: &[SubEventParse], start: &Grouping, rng: &mut rand_chacha::ChaCha8Rng| {
        let mut scorer = GroupScorer::new(&instances, parses, num_s);
        let g = if gibbs {
            gibbs_sweeps(&mut scorer, start, &config.crp, config.gibbs_sweeps, rng)
        } else {
            start.clone()
        };
        let lp = decomposed_joint_log_prob(&mut scorer, parses, &g, &config.crp, config.num_categories);
        (g, lp)
    };

    let mut parses: Vec<SubEventParse> = instances.iter().map(|i| initial_parse(i, num_s)).collect();
    let start = if gibbs {
        Grouping::all_null(num_s, ents.clone())
    } else {
        Grouping::single_group(num_s, ents.clone())
    };
    let (mut grouping, mut log_prob) = refine(&parses, &start, &mut rng);
    let mut best = (log_prob, parses.clone(), grouping.clone());
    let mut trace = Vec::with_capacity(config.outer_iters);

    for iteration in 1..=config.outer_iters {
        let n = rng.random_range(0..instances.len());
        let (kind, proposal) = propose(&instances[n], &parses[n], num_s, &config.proposal, &mut rng);
        let mut accepted = false;
        if let Some(p) = proposal {
            let mut cand = parses.clone();
            cand[n] = p.parse;
            let (g, lp) = refine(&cand, &grouping, &mut rng);
            let log_alpha = (lp + p.log_q_rev - log_prob - p.log_q_fwd).min(0.0);
            if rng.random::<f64>().ln() < log_alpha {
                accepted = true;
                parses = cand;
                grouping = g;
                log_prob = lp;
                if log_prob > best.0 {
                    best = (log_prob, parses.clone(), grouping.clone());
                }
            }
        }
        trace.push(TraceRow {
            iteration,
            log_prob,
            best_log_prob: best.0,
            accepted,
            kind: Some(kind),
        });
    }

    let (best_log_prob, best_parses, best_grouping) = best;
    let model = build_model(seqs, &instances, &best_parses, best_grouping, config)?;
    Ok(LearnOutcome {
        model,
        parses: best_parses,
        best_log_prob,
        trace,
    })
}

fn build_model(
    seqs: &[InteractionSequence],
    instances: &[Instance],
    parses: &[SubEventParse],
    grouping: Grouping,
    config: &LearnConfig,
) -> Result<InteractionModel> {
    let num_s = grouping.num_subevents();
    let pairs: Vec<(&SceneTrack, &SubEventParse)> =
        instances.iter().map(|i| &i.track).zip(parses).collect();
    let potentials = fit_potentials(&pairs, &grouping);
    let mut counts = vec![1.0; num_s];
    for p in parses {
        for &l in &p.labels {
            counts[l as usize - 1] += 1.0;
        }
    }
    let total: f64 = counts.iter().sum();
    let points: Vec<Vec<f64>> = seqs
        .iter()
        .flat_map(|s| s.frames.iter().map(codebook_features))
        .collect();
    let k = config.proposal.atomic_k.min(points.len());
    let codebook = kmeans_fit(&points, k, &mut substream(config.seed, 2))?;
    Ok(InteractionModel {
        label: seqs[0].label.clone(),
        num_subevents: num_s,
        num_categories: config.num_categories,
        grouping,
        potentials,
        subevent_marginal: counts.iter().map(|c| c / total).collect(),
        skeleton_codebook: KMeansModel {
            inertia_trace: Vec::new(),
            ..codebook
        },
        config: ConfigEcho {
            distance_eps: DISTANCE_EPS,
            lambda_merge: config.proposal.lambda_merge,
            beta: config.crp.beta,
            gamma: config.crp.gamma,
            seed: config.seed,
            variant: config.variant.name().to_string(),
        },
    })
}
