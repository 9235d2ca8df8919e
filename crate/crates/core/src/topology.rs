//! Object → TAP/channel association and backup TAP selection.

use std::cmp::Ordering;

use crate::error::TopologyError;
use crate::scenario::PlacedScenario;
use crate::spectrum::{availability, ChannelProcess, Link};

/// Redundancy knobs used while forming the topology.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AssociationPolicy {
    /// Channels per link, primary included (`w`).
    pub channels_per_link: usize,
    /// TAPs per object, primary included (`n_a`).
    pub taps_per_object: usize,
    /// Channel preference from the edge monitor, best first. When set, the
    /// primary channel on the chosen TAP is the first usable entry.
    pub channel_ranking: Option<Vec<usize>>,
}

impl AssociationPolicy {
    pub fn new(channels_per_link: usize, taps_per_object: usize) -> Self {
        Self {
            channels_per_link,
            taps_per_object,
            channel_ranking: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Assignment {
    pub tap: usize,
    pub channel: usize,
    /// `availability(link, channel) * tap.availability`
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    /// `None` for objects with no usable (TAP, channel) pair.
    pub assignments: Vec<Option<Assignment>>,
    /// Per object, up to `w - 1` extra channels on the primary link.
    pub backup_channels: Vec<Vec<usize>>,
    /// Per object, up to `n_a - 1` extra TAPs.
    pub backup_taps: Vec<Vec<usize>>,
    pub signaling_messages: u64,
}

impl Topology {
    pub fn assigned(&self) -> impl Iterator<Item = (usize, &Assignment)> {
        self.assignments
            .iter()
            .enumerate()
            .filter_map(|(i, a)| a.as_ref().map(|a| (i, a)))
    }

    /// Objects served by each TAP.
    pub fn tap_loads(&self, n_tap: usize) -> Vec<usize> {
        let mut loads = vec![0; n_tap];
        for (_, a) in self.assigned() {
            loads[a.tap] += 1;
        }
        loads
    }

    /// Primary channel followed by backups, for `object`.
    pub fn link_channels(&self, object: usize) -> Vec<usize> {
        match &self.assignments[object] {
            Some(a) => std::iter::once(a.channel)
                .chain(self.backup_channels[object].iter().copied())
                .collect(),
            None => Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    tap: usize,
    channel: usize,
    score: f64,
    distance: f64,
    incentive: f64,
}

/// Preference order: higher score, shorter distance, higher incentive,
/// lower TAP id, lower channel id. `Less` means `a` is preferred.
fn preference(a: &Candidate, b: &Candidate) -> Ordering {
    b.score
        .total_cmp(&a.score)
        .then(a.distance.total_cmp(&b.distance))
        .then(b.incentive.total_cmp(&a.incentive))
        .then(a.tap.cmp(&b.tap))
        .then(a.channel.cmp(&b.channel))
}

/// Forms the association by probing every (TAP, channel) pair from every
/// object. A TAP that is not available at all answers its first probe with
/// a refusal, so it costs one message instead of one per channel.
pub fn form_topology(placed: &PlacedScenario, channels: &[ChannelProcess], policy: &AssociationPolicy) -> Topology {
    let scenario = &placed.scenario;
    let n_o = placed.object_positions.len();
    let n_tap = placed.tap_positions.len();
    let mut signaling = 0u64;
    let mut assignments = Vec::with_capacity(n_o);
    let mut backup_channels = Vec::with_capacity(n_o);
    let mut backup_taps = Vec::with_capacity(n_o);

    for i in 0..n_o {
        // Best channel per TAP.
        let mut per_tap: Vec<Candidate> = Vec::with_capacity(n_tap);
        for (j, profile) in scenario.tap_profiles.iter().enumerate().take(n_tap) {
            if profile.availability <= 0.0 {
                signaling += 1;
                continue;
            }
            let link = Link::new(i, j);
            let distance = placed.distance(i, j);
            let best = channels
                .iter()
                .map(|ch| {
                    signaling += 1;
                    Candidate {
                        tap: j,
                        channel: ch.channel_id,
                        score: availability(link, ch) * profile.availability,
                        distance,
                        incentive: profile.incentive_weight,
                    }
                })
                .min_by(preference);
            if let Some(c) = best.filter(|c| c.score > 0.0) {
                per_tap.push(c);
            }
        }
        per_tap.sort_by(preference);

        let Some(primary) = per_tap.first().copied() else {
            assignments.push(None);
            backup_channels.push(Vec::new());
            backup_taps.push(Vec::new());
            continue;
        };

        let link = Link::new(i, primary.tap);
        let tap_avail = scenario.tap_profiles[primary.tap].availability;
        let usable: Vec<(usize, f64)> = channels
            .iter()
            .map(|ch| (ch.channel_id, availability(link, ch)))
            .filter(|(_, a)| *a > 0.0)
            .collect();
        let order: Vec<usize> = match &policy.channel_ranking {
            Some(ranking) => ranking
                .iter()
                .copied()
                .filter(|id| usable.iter().any(|(u, _)| u == id))
                .collect(),
            None => {
                let mut by_avail = usable.clone();
                by_avail.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
                by_avail.into_iter().map(|(id, _)| id).collect()
            }
        };
        let channel = if policy.channel_ranking.is_some() {
            order.first().copied().unwrap_or(primary.channel)
        } else {
            primary.channel
        };
        let score = usable
            .iter()
            .find(|(id, _)| *id == channel)
            .map_or(primary.score, |(_, a)| a * tap_avail);

        let extra_channels = policy.channels_per_link.saturating_sub(1);
        backup_channels.push(
            order
                .iter()
                .copied()
                .filter(|&c| c != channel)
                .take(extra_channels)
                .collect(),
        );
        let extra_taps = policy.taps_per_object.saturating_sub(1);
        backup_taps.push(per_tap.iter().skip(1).take(extra_taps).map(|c| c.tap).collect());
        assignments.push(Some(Assignment {
            tap: primary.tap,
            channel,
            score,
        }));
    }

    Topology {
        assignments,
        backup_channels,
        backup_taps,
        signaling_messages: signaling,
    }
}

/// A TAP offered as backup together with its link reliability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TapCandidate {
    pub tap: usize,
    pub reliability: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BackupSelection {
    /// Selected TAP ids, in candidate order.
    pub taps: Vec<usize>,
    pub reliability: f64,
    /// `false` when even the full candidate set misses `xi_min`.
    pub feasible: bool,
}

/// `1 - Π(1 - ξ_j)` over the candidates at `indices`, which must be sorted.
fn set_reliability(candidates: &[TapCandidate], indices: &[usize]) -> f64 {
    1.0 - indices
        .iter()
        .map(|&k| 1.0 - candidates[k].reliability)
        .product::<f64>()
}

struct SubsetSearch<'a> {
    candidates: &'a [TapCandidate],
    /// Candidate indices by decreasing reliability.
    order: Vec<usize>,
    xi_min: f64,
    best: Option<(f64, Vec<usize>)>,
}

impl SubsetSearch<'_> {
    fn sorted(&self, chosen: &[usize]) -> Vec<usize> {
        let mut v = chosen.to_vec();
        v.sort_unstable();
        v
    }

    // Reliability bound if the remaining `need` picks come from `order[from..]`
    // taking the first (best) or last (worst) entries.
    fn bound(&self, chosen: &[usize], from: usize, need: usize, best: bool) -> f64 {
        let tail = &self.order[from..];
        let extra = if best {
            &tail[..need]
        } else {
            &tail[tail.len() - need..]
        };
        let mut all: Vec<usize> = chosen.iter().chain(extra).copied().collect();
        all.sort_unstable();
        set_reliability(self.candidates, &all)
    }

    fn search(&mut self, chosen: &mut Vec<usize>, from: usize, need: usize) {
        if need == 0 {
            let set = self.sorted(chosen);
            let rel = set_reliability(self.candidates, &set);
            if rel < self.xi_min {
                return;
            }
            let better = match &self.best {
                None => true,
                Some((r, s)) => rel < *r || (rel == *r && set < *s),
            };
            if better {
                self.best = Some((rel, set));
            }
            return;
        }
        if self.order.len() - from < need {
            return;
        }
        if self.bound(chosen, from, need, true) < self.xi_min {
            return;
        }
        if let Some((r, _)) = &self.best {
            // Even the weakest completion cannot get below the incumbent.
            if self.bound(chosen, from, need, false) > *r {
                return;
            }
        }
        for pos in from..self.order.len() {
            chosen.push(self.order[pos]);
            self.search(chosen, pos + 1, need - 1);
            chosen.pop();
        }
    }
}

/// Smallest TAP set whose combined reliability `1 - Π(1 - ξ_j)` reaches
/// `xi_min`. Among sets of that size the one closest above `xi_min` wins,
/// then the lexicographically smallest candidate index set.
pub fn select_backup_taps(candidates: &[TapCandidate], xi_min: f64) -> Result<BackupSelection, TopologyError> {
    if candidates.is_empty() {
        return Err(TopologyError::NoCandidates);
    }
    if let Some(c) = candidates
        .iter()
        .find(|c| !(c.reliability > 0.0 && c.reliability <= 1.0))
    {
        return Err(TopologyError::BadReliability(c.reliability));
    }
    if !(xi_min > 0.0 && xi_min < 1.0) {
        return Err(TopologyError::BadTarget(xi_min));
    }

    let mut order: Vec<usize> = (0..candidates.len()).collect();
    order.sort_by(|&a, &b| {
        candidates[b]
            .reliability
            .total_cmp(&candidates[a].reliability)
            .then(a.cmp(&b))
    });

    let mut search = SubsetSearch {
        candidates,
        order,
        xi_min,
        best: None,
    };
    for k in 1..=candidates.len() {
        search.search(&mut Vec::with_capacity(k), 0, k);
        if let Some((reliability, set)) = search.best.take() {
            return Ok(BackupSelection {
                taps: set.iter().map(|&k| candidates[k].tap).collect(),
                reliability,
                feasible: true,
            });
        }
    }
    let all: Vec<usize> = (0..candidates.len()).collect();
    Ok(BackupSelection {
        taps: candidates.iter().map(|c| c.tap).collect(),
        reliability: set_reliability(candidates, &all),
        feasible: false,
    })
}
