//! Parse graphs, joint groupings, potentials and their probability terms.
//!
//! Log-probabilities decompose as
//!
//! ```text
//! ln p(G, Z) = Σ_s ln p(Z^s)
//!            + Σ_k [ spatial(T_k) + motion(T_k) + ln LogNormal(|T_k|) ]
//!            + ln p(c) + ln(1/|S|) + Σ_{k≥2} ln p(s_k | s_{k-1})
//! ```
//!
//! where spatial terms only count affordable entities at the last frame of a
//! sub-event, and motion terms count every entity's displacement across it.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::data::{Agent, Annotations, InteractionSequence, JointId};
use crate::error::{Error, Result};
use crate::geometry::{decompose_offset, facing_frame, CylFeatures, FacingFrame, Vec3};
use crate::stats::{fit_mle, log_pdf, sample, Distribution, DistributionKind, KMeansModel};

/// Labeled partition of frames `1..=T` into sub-events. Labels are 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SubEventParse {
    pub intervals: Vec<(u32, u32)>,
    pub labels: Vec<u32>,
}

impl SubEventParse {
    pub fn new(intervals: Vec<(u32, u32)>, labels: Vec<u32>, t_len: u32) -> Result<Self> {
        let p = SubEventParse { intervals, labels };
        p.check(t_len)?;
        Ok(p)
    }

    /// One sub-event over the whole sequence.
    pub fn single(t_len: u32, label: u32) -> Self {
        SubEventParse {
            intervals: vec![(1, t_len)],
            labels: vec![label],
        }
    }

    pub fn check(&self, t_len: u32) -> Result<()> {
        let bad = |m: &str| Err(Error::precondition(format!("invalid parse: {m}")));
        if self.intervals.is_empty() || self.intervals.len() != self.labels.len() {
            return bad("intervals and labels must be non-empty and equally long");
        }
        let mut next = 1;
        for (k, &(a, b)) in self.intervals.iter().enumerate() {
            if a != next || b < a {
                return bad("intervals must tile 1..T contiguously");
            }
            next = b + 1;
            if self.labels[k] == 0 {
                return bad("labels are 1-based");
            }
            if k > 0 && self.labels[k] == self.labels[k - 1] {
                return bad("consecutive sub-events share a label");
            }
        }
        if next != t_len + 1 {
            return bad("intervals do not cover 1..T");
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn t_len(&self) -> u32 {
        self.intervals.last().map_or(0, |iv| iv.1)
    }

    /// First frames of sub-events 2..K.
    pub fn boundaries(&self) -> Vec<u32> {
        self.intervals.iter().skip(1).map(|iv| iv.0).collect()
    }

    pub fn segments(&self) -> impl Iterator<Item = ((u32, u32), u32)> + '_ {
        self.intervals.iter().copied().zip(self.labels.iter().copied())
    }

    pub fn label_at(&self, t: u32) -> Option<u32> {
        self.segments()
            .find(|&((a, b), _)| a <= t && t <= b)
            .map(|(_, l)| l)
    }

    pub fn to_annotations(&self) -> Annotations {
        Annotations {
            intervals: self.intervals.iter().map(|&(a, b)| [a, b]).collect(),
            labels: self.labels.clone(),
            groups: None,
        }
    }

    pub fn from_annotations(a: &Annotations, t_len: u32) -> Result<Self> {
        SubEventParse::new(
            a.intervals.iter().map(|iv| (iv[0], iv[1])).collect(),
            a.labels.clone(),
            t_len,
        )
    }
}

/// Something that carries affordance: a modeled joint of one agent, or the object.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Entity {
    Joint(Agent, JointId),
    Object,
}

impl Entity {
    /// Agent whose facing frame expresses this entity's features.
    pub fn owner(self) -> Agent {
        match self {
            Entity::Joint(a, _) => a,
            Entity::Object => Agent::One,
        }
    }

    pub fn name(self) -> String {
        match self {
            Entity::Joint(a, j) => format!("{a}.{j}"),
            Entity::Object => "object".to_string(),
        }
    }

    pub fn parse(name: &str) -> Option<Entity> {
        if name == "object" {
            return Some(Entity::Object);
        }
        let (a, j) = name.split_once('.')?;
        let agent = match a {
            "agent1" => Agent::One,
            "agent2" => Agent::Two,
            _ => return None,
        };
        let joint = JointId::from_name(j)?;
        JointId::MODELED.contains(&joint).then_some(Entity::Joint(agent, joint))
    }
}

impl fmt::Display for Entity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl Serialize for Entity {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.name())
    }
}

impl<'de> Deserialize<'de> for Entity {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let name = String::deserialize(d)?;
        Entity::parse(&name).ok_or_else(|| serde::de::Error::custom(format!("unknown entity {name}")))
    }
}

/// Modeled entities in canonical order: agent 1's joints, agent 2's, then the object.
pub fn entities(with_object: bool) -> Vec<Entity> {
    let mut v: Vec<Entity> = [Agent::One, Agent::Two]
        .iter()
        .flat_map(|&a| JointId::MODELED.iter().map(move |&j| Entity::Joint(a, j)))
        .collect();
    if with_object {
        v.push(Entity::Object);
    }
    v
}

/// Per-frame entity positions and facing frames of one sequence.
#[derive(Debug, Clone)]
pub struct SceneTrack {
    pub entities: Vec<Entity>,
    /// `positions[t - 1][e]`
    pub positions: Vec<Vec<Vec3>>,
    frames: [Vec<FacingFrame>; 2],
}

impl SceneTrack {
    pub fn from_sequence(seq: &InteractionSequence) -> Self {
        let entities = entities(seq.has_object());
        let positions = seq
            .frames
            .iter()
            .map(|f| {
                entities
                    .iter()
                    .map(|e| match *e {
                        Entity::Joint(a, j) => f.agent(a)[j],
                        Entity::Object => f.object.unwrap_or(Vec3::ZERO),
                    })
                    .collect()
            })
            .collect();
        SceneTrack::from_positions(entities, positions)
    }

    pub fn from_positions(entities: Vec<Entity>, positions: Vec<Vec<Vec3>>) -> Self {
        let base = |a: Agent| {
            let idx = entities
                .iter()
                .position(|&e| e == Entity::Joint(a, JointId::SpineBase))
                .expect("base joints are always modeled");
            idx
        };
        let (b1, b2) = (base(Agent::One), base(Agent::Two));
        let f1 = positions.iter().map(|p| facing_frame(p[b1], p[b2])).collect();
        let f2 = positions.iter().map(|p| facing_frame(p[b2], p[b1])).collect();
        SceneTrack {
            entities,
            positions,
            frames: [f1, f2],
        }
    }

    pub fn len(&self) -> u32 {
        self.positions.len() as u32
    }

    /// The first `t` frames.
    pub fn prefix(&self, t: u32) -> SceneTrack {
        let t = t as usize;
        SceneTrack {
            entities: self.entities.clone(),
            positions: self.positions[..t].to_vec(),
            frames: [self.frames[0][..t].to_vec(), self.frames[1][..t].to_vec()],
        }
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn has_object(&self) -> bool {
        self.entities.contains(&Entity::Object)
    }

    pub fn position(&self, t: u32, e: usize) -> Vec3 {
        self.positions[t as usize - 1][e]
    }

    pub fn facing(&self, t: u32, agent: Agent) -> &FacingFrame {
        let i = match agent {
            Agent::One => 0,
            Agent::Two => 1,
        };
        &self.frames[i][t as usize - 1]
    }

    pub fn base_index(&self, agent: Agent) -> usize {
        self.entities
            .iter()
            .position(|&e| e == Entity::Joint(agent, JointId::SpineBase))
            .expect("base joints are always modeled")
    }

    /// Spatial features of entity `e` at frame `t` relative to its group.
    pub fn spatial_features(&self, t: u32, e: usize, group: &[usize]) -> CylFeatures {
        pose_spatial_features(&self.entities, &self.positions[t as usize - 1], e, group)
    }

    /// Displacement features of entity `e` from `t1` to `t2`, in its owner's
    /// facing frame at `t1`.
    pub fn motion_features(&self, t1: u32, t2: u32, e: usize) -> CylFeatures {
        let owner = self.entities[e].owner();
        decompose_offset(
            self.position(t2, e) - self.position(t1, e),
            self.facing(t1, owner),
        )
    }
}

/// Reference point of entity `e`'s group in one frame of positions: the mass
/// center of a multi-member group, otherwise the other agent's base joint
/// (agent 1's base for the object).
pub fn group_reference(entities: &[Entity], positions: &[Vec3], e: usize, group: &[usize]) -> Vec3 {
    if group.len() >= 2 {
        let sum = group.iter().fold(Vec3::ZERO, |acc, &m| acc + positions[m]);
        return sum / group.len() as f64;
    }
    let other = match entities[e] {
        Entity::Joint(a, _) => a.other(),
        Entity::Object => Agent::One,
    };
    let base = entities
        .iter()
        .position(|&x| x == Entity::Joint(other, JointId::SpineBase))
        .expect("base joints are always modeled");
    positions[base]
}

/// Facing frame of `agent` in one frame of positions.
pub fn pose_facing(entities: &[Entity], positions: &[Vec3], agent: Agent) -> FacingFrame {
    let base = |a: Agent| {
        let i = entities
            .iter()
            .position(|&x| x == Entity::Joint(a, JointId::SpineBase))
            .expect("base joints are always modeled");
        positions[i]
    };
    facing_frame(base(agent), base(agent.other()))
}

/// Spatial features of entity `e` relative to its group, in its owner's
/// facing frame, for one frame of positions.
pub fn pose_spatial_features(entities: &[Entity], positions: &[Vec3], e: usize, group: &[usize]) -> CylFeatures {
    let reference = group_reference(entities, positions, e, group);
    let frame = pose_facing(entities, positions, entities[e].owner());
    decompose_offset(positions[e] - reference, &frame)
}

/// Selection and grouping of entities per sub-event type.
///
/// `table[s - 1][e]` is 0 for the Null group and a group id `h >= 1`
/// otherwise. Ids are kept dense (1..=H, in order of first appearance).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Grouping {
    pub entities: Vec<Entity>,
    pub table: Vec<Vec<u32>>,
}

impl Grouping {
    pub fn all_null(num_subevents: usize, entities: Vec<Entity>) -> Self {
        let n = entities.len();
        Grouping {
            entities,
            table: vec![vec![0; n]; num_subevents],
        }
    }

    /// Every entity affordable and in a single group, for every sub-event type.
    pub fn single_group(num_subevents: usize, entities: Vec<Entity>) -> Self {
        let n = entities.len();
        Grouping {
            entities,
            table: vec![vec![1; n]; num_subevents],
        }
    }

    pub fn num_subevents(&self) -> usize {
        self.table.len()
    }

    pub fn assignments(&self, s: u32) -> &[u32] {
        &self.table[s as usize - 1]
    }

    pub fn is_affordable(&self, s: u32, e: usize) -> bool {
        self.assignments(s)[e] > 0
    }

    /// Members of each group of sub-event type `s`, indexed by `h - 1`.
    pub fn groups(&self, s: u32) -> Vec<Vec<usize>> {
        groups_of(self.assignments(s))
    }

    /// Members of the group containing `e` (empty when `e` is Null).
    pub fn group_of(&self, s: u32, e: usize) -> Vec<usize> {
        let row = self.assignments(s);
        if row[e] == 0 {
            return Vec::new();
        }
        (0..row.len()).filter(|&i| row[i] == row[e]).collect()
    }

    pub fn affordable_count(&self, s: u32) -> usize {
        self.assignments(s).iter().filter(|&&z| z > 0).count()
    }

    pub fn set_row(&mut self, s: u32, row: Vec<u32>) {
        self.table[s as usize - 1] = normalize_row(&row);
    }

    pub fn log_prior(&self, crp: &CrpConfig) -> f64 {
        self.table.iter().map(|row| grouping_log_prior(row, crp)).sum()
    }
}

/// Members of each non-Null group in a row, by dense id.
pub fn groups_of(row: &[u32]) -> Vec<Vec<usize>> {
    let h = row.iter().copied().max().unwrap_or(0) as usize;
    let mut out = vec![Vec::new(); h];
    for (e, &z) in row.iter().enumerate() {
        if z > 0 {
            out[z as usize - 1].push(e);
        }
    }
    out.retain(|g| !g.is_empty());
    out
}

/// Renumbers group ids densely in order of first appearance.
pub fn normalize_row(row: &[u32]) -> Vec<u32> {
    let mut map: Vec<(u32, u32)> = Vec::new();
    row.iter()
        .map(|&z| {
            if z == 0 {
                return 0;
            }
            if let Some(&(_, to)) = map.iter().find(|(from, _)| *from == z) {
                return to;
            }
            let to = map.len() as u32 + 1;
            map.push((z, to));
            to
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CrpConfig {
    /// Bernoulli inclusion prior.
    pub beta: f64,
    /// CRP concentration.
    pub gamma: f64,
}

impl Default for CrpConfig {
    fn default() -> Self {
        CrpConfig {
            beta: 0.3,
            gamma: 1.0,
        }
    }
}

impl CrpConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0 && self.beta < 1.0) || !(self.gamma > 0.0) {
            return Err(Error::precondition(format!(
                "CRP parameters beta = {}, gamma = {} out of range",
                self.beta, self.gamma
            )));
        }
        Ok(())
    }
}

/// Selection-and-grouping prior of one sub-event type's assignment row:
/// CRP partition probability of the affordable entities times an independent
/// Bernoulli(beta) inclusion term per entity.
///
/// The partition term is `γ^H Γ(γ)/Γ(γ+M) Π_h (M_h - 1)!`, which for γ = 1 is
/// `Π_h (M_h - 1)! / M!`.
pub fn grouping_log_prior(row: &[u32], crp: &CrpConfig) -> f64 {
    let groups = groups_of(row);
    let m: usize = groups.iter().map(Vec::len).sum();
    let mut crp_term = groups.len() as f64 * crp.gamma.ln();
    for g in &groups {
        crp_term += (1..g.len()).map(|i| (i as f64).ln()).sum::<f64>();
    }
    crp_term -= (0..m).map(|i| (crp.gamma + i as f64).ln()).sum::<f64>();
    let null = row.len() - m;
    crp_term + m as f64 * crp.beta.ln() + null as f64 * (1.0 - crp.beta).ln()
}

/// The four densities over a [`CylFeatures`] value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureBundle {
    pub r_xy: Distribution,
    pub dz: Distribution,
    pub azimuth: Distribution,
    pub dz_sign: Distribution,
}

impl FeatureBundle {
    pub fn log_density(&self, f: &CylFeatures) -> f64 {
        log_pdf(&self.r_xy, f.r_xy)
            + log_pdf(&self.dz, f.dz_abs)
            + log_pdf(&self.azimuth, f.azimuth)
            + log_pdf(&self.dz_sign, if f.dz_sign > 0 { 1.0 } else { 0.0 })
    }

    /// Fits the bundle; distance components use `distance_kind`
    /// (Weibull or Exponential). An empty sample set yields default priors.
    pub fn fit(samples: &[CylFeatures], distance_kind: DistributionKind) -> FeatureBundle {
        if samples.is_empty() {
            return FeatureBundle {
                r_xy: Distribution::default_prior(distance_kind),
                dz: Distribution::default_prior(distance_kind),
                azimuth: Distribution::default_prior(DistributionKind::VonMises),
                dz_sign: Distribution::default_prior(DistributionKind::Bernoulli),
            };
        }
        let col = |f: fn(&CylFeatures) -> f64| samples.iter().map(f).collect::<Vec<f64>>();
        let fit = |kind, xs: Vec<f64>| fit_mle(kind, &xs).expect("features lie in the support");
        FeatureBundle {
            r_xy: fit(distance_kind, col(|f| f.r_xy)),
            dz: fit(distance_kind, col(|f| f.dz_abs)),
            azimuth: fit(DistributionKind::VonMises, col(|f| f.azimuth)),
            dz_sign: fit(
                DistributionKind::Bernoulli,
                col(|f| if f.dz_sign > 0 { 1.0 } else { 0.0 }),
            ),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> CylFeatures {
        let r_xy = sample(&self.r_xy, rng).max(crate::geometry::DISTANCE_EPS);
        let dz_abs = sample(&self.dz, rng).max(crate::geometry::DISTANCE_EPS);
        let azimuth = crate::geometry::wrap_angle(sample(&self.azimuth, rng));
        let dz_sign = if sample(&self.dz_sign, rng) > 0.5 { 1 } else { -1 };
        CylFeatures {
            r_xy,
            dz_abs,
            dz_sign,
            azimuth,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceRule {
    /// Offsets are taken from the group's mass center.
    MassCenter,
    /// Lone member: offsets are taken from the other agent's base joint.
    OtherBase,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntityPotential {
    /// Present iff the entity is affordable in this sub-event type.
    pub spatial: Option<FeatureBundle>,
    pub motion: FeatureBundle,
    pub reference: Option<ReferenceRule>,
}

/// All fitted densities of one interaction category.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialSet {
    pub entities: Vec<Entity>,
    /// `cells[s - 1][e]`
    pub cells: Vec<Vec<EntityPotential>>,
    /// Log-normal duration prior per sub-event type.
    pub durations: Vec<Distribution>,
    /// `transition[from - 1][to - 1]`, Laplace-smoothed.
    pub transition: Vec<Vec<f64>>,
}

impl PotentialSet {
    pub fn num_subevents(&self) -> usize {
        self.durations.len()
    }

    pub fn cell(&self, s: u32, e: usize) -> Result<&EntityPotential> {
        self.cells
            .get(s as usize - 1)
            .and_then(|row| row.get(e))
            .ok_or_else(|| Error::MissingPotential {
                subevent: s,
                entity: self
                    .entities
                    .get(e)
                    .map_or_else(|| format!("#{e}"), |x| x.name()),
            })
    }

    pub(crate) fn check_track(&self, track: &SceneTrack) -> Result<()> {
        if let Some(e) = track.entities.iter().find(|e| !self.entities.contains(e)) {
            return Err(Error::MissingPotential {
                subevent: 0,
                entity: e.name(),
            });
        }
        if track.entities != self.entities {
            return Err(Error::precondition("entity layout differs from the fitted potentials"));
        }
        Ok(())
    }

    pub fn log_transition(&self, from: u32, to: u32) -> f64 {
        self.transition[from as usize - 1][to as usize - 1].ln()
    }
}

fn check_segment(track: &SceneTrack, (t1, t2): (u32, u32)) -> Result<()> {
    if t1 < 1 || t2 < t1 || t2 > track.len() {
        return Err(Error::precondition(format!(
            "segment [{t1}, {t2}] outside 1..={}",
            track.len()
        )));
    }
    Ok(())
}

/// Spatial log-potential of a segment: affordable entities at its last frame,
/// offset from their group reference.
pub fn spatial_log_potential(
    track: &SceneTrack,
    segment: (u32, u32),
    grouping: &Grouping,
    potentials: &PotentialSet,
    s: u32,
) -> Result<f64> {
    check_segment(track, segment)?;
    potentials.check_track(track)?;
    let t = segment.1;
    let mut total = 0.0;
    for group in grouping.groups(s) {
        for &e in &group {
            let cell = potentials.cell(s, e)?;
            let bundle = cell.spatial.as_ref().ok_or_else(|| Error::MissingPotential {
                subevent: s,
                entity: track.entities[e].name(),
            })?;
            total += bundle.log_density(&track.spatial_features(t, e, &group));
        }
    }
    Ok(total)
}

/// Motion log-potential of a segment: every entity's displacement from the
/// first to the last frame.
pub fn motion_log_potential(
    track: &SceneTrack,
    segment: (u32, u32),
    grouping: &Grouping,
    potentials: &PotentialSet,
    s: u32,
) -> Result<f64> {
    check_segment(track, segment)?;
    potentials.check_track(track)?;
    let _ = grouping;
    let mut total = 0.0;
    for e in 0..track.entities.len() {
        let cell = potentials.cell(s, e)?;
        total += cell
            .motion
            .log_density(&track.motion_features(segment.0, segment.1, e));
    }
    Ok(total)
}

pub fn segment_log_likelihood(
    track: &SceneTrack,
    segment: (u32, u32),
    grouping: &Grouping,
    potentials: &PotentialSet,
    s: u32,
) -> Result<f64> {
    Ok(spatial_log_potential(track, segment, grouping, potentials, s)?
        + motion_log_potential(track, segment, grouping, potentials, s)?)
}

pub fn duration_log_prior(length: u32, s: u32, potentials: &PotentialSet) -> f64 {
    log_pdf(&potentials.durations[s as usize - 1], f64::from(length))
}

/// ln p(G | Z) for one instance, including the uniform category prior and the
/// uniform anchor for the first sub-event.
pub fn parse_graph_log_prob(
    track: &SceneTrack,
    parse: &SubEventParse,
    grouping: &Grouping,
    potentials: &PotentialSet,
    num_categories: usize,
) -> Result<f64> {
    parse.check(track.len())?;
    let num_s = potentials.num_subevents() as f64;
    let mut total = -(num_categories as f64).ln() - num_s.ln();
    let mut prev: Option<u32> = None;
    for ((a, b), s) in parse.segments() {
        total += segment_log_likelihood(track, (a, b), grouping, potentials, s)?;
        total += duration_log_prior(b - a + 1, s, potentials);
        if let Some(p) = prev {
            total += potentials.log_transition(p, s);
        }
        prev = Some(s);
    }
    Ok(total)
}

/// ln p(𝒢, Z): the grouping prior once, plus every instance's parse graph.
pub fn joint_log_prob(
    instances: &[(&SceneTrack, &SubEventParse)],
    grouping: &Grouping,
    potentials: &PotentialSet,
    crp: &CrpConfig,
    num_categories: usize,
) -> Result<f64> {
    let mut total = grouping.log_prior(crp);
    for (track, parse) in instances {
        total += parse_graph_log_prob(track, parse, grouping, potentials, num_categories)?;
    }
    Ok(total)
}

/// Row-normalized transition counts with add-one smoothing.
pub fn fit_transitions(parses: &[&SubEventParse], num_subevents: usize) -> Vec<Vec<f64>> {
    let mut counts = vec![vec![1.0; num_subevents]; num_subevents];
    for p in parses {
        for w in p.labels.windows(2) {
            counts[w[0] as usize - 1][w[1] as usize - 1] += 1.0;
        }
    }
    for row in &mut counts {
        let total: f64 = row.iter().sum();
        for c in row.iter_mut() {
            *c /= total;
        }
    }
    counts
}

pub fn fit_durations(parses: &[&SubEventParse], num_subevents: usize) -> Vec<Distribution> {
    (1..=num_subevents as u32)
        .map(|s| {
            let lens: Vec<f64> = parses
                .iter()
                .flat_map(|p| p.segments())
                .filter(|&(_, l)| l == s)
                .map(|((a, b), _)| f64::from(b - a + 1))
                .collect();
            if lens.is_empty() {
                Distribution::default_prior(DistributionKind::LogNormal)
            } else {
                fit_mle(DistributionKind::LogNormal, &lens).expect("durations are positive")
            }
        })
        .collect()
}

/// Fits the potentials of sub-event type `s` for one entity, given the
/// segments carrying that label.
pub fn fit_cell(
    instances: &[(&SceneTrack, &SubEventParse)],
    grouping: &Grouping,
    s: u32,
    e: usize,
) -> EntityPotential {
    let group = grouping.group_of(s, e);
    let affordable = !group.is_empty();
    let mut motion = Vec::new();
    let mut spatial = Vec::new();
    for (track, parse) in instances {
        for ((a, b), l) in parse.segments() {
            if l != s {
                continue;
            }
            motion.push(track.motion_features(a, b, e));
            if affordable {
                spatial.push(track.spatial_features(b, e, &group));
            }
        }
    }
    let distance_kind = if affordable {
        DistributionKind::Weibull
    } else {
        DistributionKind::Exponential
    };
    EntityPotential {
        spatial: affordable.then(|| FeatureBundle::fit(&spatial, DistributionKind::Weibull)),
        motion: FeatureBundle::fit(&motion, distance_kind),
        reference: affordable.then_some(if group.len() >= 2 {
            ReferenceRule::MassCenter
        } else {
            ReferenceRule::OtherBase
        }),
    }
}

/// Maximum-likelihood potentials for a set of parsed instances under a grouping.
pub fn fit_potentials(instances: &[(&SceneTrack, &SubEventParse)], grouping: &Grouping) -> PotentialSet {
    let num_s = grouping.num_subevents();
    let cells = (1..=num_s as u32)
        .map(|s| {
            (0..grouping.entities.len())
                .map(|e| fit_cell(instances, grouping, s, e))
                .collect()
        })
        .collect();
    let parses: Vec<&SubEventParse> = instances.iter().map(|(_, p)| *p).collect();
    PotentialSet {
        entities: grouping.entities.clone(),
        cells,
        durations: fit_durations(&parses, num_s),
        transition: fit_transitions(&parses, num_s),
    }
}

/// Settings echoed into a learned model for reproducibility.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub distance_eps: f64,
    pub lambda_merge: f64,
    pub beta: f64,
    pub gamma: f64,
    pub seed: u64,
    pub variant: String,
}

/// A learned social-affordance model of one interaction category.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InteractionModel {
    pub label: String,
    pub num_subevents: usize,
    /// Size of the category dictionary; p(c) is uniform over it.
    pub num_categories: usize,
    pub grouping: Grouping,
    pub potentials: PotentialSet,
    /// Label frequencies over the training parses (add-one smoothed).
    pub subevent_marginal: Vec<f64>,
    /// K-means codebook of agent-2 full-body poses in agent 2's own facing
    /// frame, base-joint centred.
    pub skeleton_codebook: KMeansModel,
    pub config: ConfigEcho,
}

impl InteractionModel {
    pub fn transition(&self) -> &[Vec<f64>] {
        &self.potentials.transition
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn parse_graph_log_prob(&self, track: &SceneTrack, parse: &SubEventParse) -> Result<f64> {
        parse_graph_log_prob(track, parse, &self.grouping, &self.potentials, self.num_categories)
    }
}
