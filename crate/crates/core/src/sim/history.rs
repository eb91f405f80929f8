use super::Scheme;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// One merger: blocks `merged` (sorted ids, at least two) become `new_block`
/// at `time`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MergeEvent {
    pub time: f64,
    pub merged: Vec<usize>,
    pub new_block: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimMetadata {
    /// Scheme asked for; [`CoalescentHistory::scheme`] is the one that ran.
    pub requested_scheme: Scheme,
    pub x_min: Option<f64>,
    /// Expected number of mergers lost to the Poisson cutoff over the run:
    /// `∫ C(N(t), 2) Λ((0, x_min)) dt`.
    pub missed_merger_bound: f64,
    pub kingman_superposition: bool,
    /// Poisson points generated (including those marking fewer than two
    /// blocks) and Kingman pair events.
    pub poisson_points: u64,
    pub kingman_events: u64,
    /// Events sharing their time with the previous event; kept in
    /// generation order.
    pub tied_event_times: usize,
    pub notes: Vec<String>,
}

impl SimMetadata {
    pub(crate) fn exact(scheme: Scheme) -> Self {
        Self {
            requested_scheme: scheme,
            x_min: None,
            missed_merger_bound: 0.0,
            kingman_superposition: false,
            poisson_points: 0,
            kingman_events: 0,
            tied_event_times: 0,
            notes: Vec::new(),
        }
    }
}

/// A sample path of the n-coalescent up to absorption or a horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoalescentHistory {
    pub n: usize,
    pub seed: u64,
    pub scheme: Scheme,
    pub horizon: Option<f64>,
    pub events: Vec<MergeEvent>,
    pub metadata: SimMetadata,
}

/// Right-continuous step function on `[0, ∞)`: `values[0]` before
/// `times[0]`, `values[i + 1]` from `times[i]` on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepFunction {
    pub times: Vec<f64>,
    pub values: Vec<usize>,
}

impl StepFunction {
    pub fn at(&self, t: f64) -> usize {
        self.values[self.times.partition_point(|&s| s <= t)]
    }
}

impl CoalescentHistory {
    pub(crate) fn finish(mut self) -> Self {
        self.metadata.tied_event_times = self.events.windows(2).filter(|w| w[1].time == w[0].time).count();
        if self.metadata.tied_event_times > 0 {
            self.metadata
                .notes
                .push(format!("{} events share a time with their predecessor", self.metadata.tied_event_times));
        }
        self
    }

    /// Number of blocks after the last event.
    pub fn final_block_count(&self) -> usize {
        self.n - self.events.iter().map(|e| e.merged.len() - 1).sum::<usize>()
    }

    /// Time of the event leaving one block, if the path got there.
    pub fn absorption_time(&self) -> Option<f64> {
        if self.n == 1 {
            return Some(0.0);
        }
        if self.final_block_count() == 1 {
            self.events.last().map(|e| e.time)
        } else {
            None
        }
    }

    pub fn first_event(&self) -> Option<&MergeEvent> {
        self.events.first()
    }

    /// Checks ids, ordering and the partition property along the path.
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Validation("history with n = 0".into()));
        }
        let mut alive = vec![true; self.n + self.events.len()];
        alive[self.n..].iter_mut().for_each(|a| *a = false);
        let mut size = vec![1usize; self.n + self.events.len()];
        let mut last = 0.0;
        for (i, e) in self.events.iter().enumerate() {
            if !(e.time > 0.0) || e.time < last || !e.time.is_finite() {
                return Err(Error::Validation(format!("event {i} has time {} after {last}", e.time)));
            }
            if let Some(h) = self.horizon {
                if e.time > h {
                    return Err(Error::Validation(format!("event {i} at {} beyond horizon {h}", e.time)));
                }
            }
            last = e.time;
            if e.merged.len() < 2 || e.new_block != self.n + i {
                return Err(Error::Validation(format!("event {i} is malformed")));
            }
            if e.merged.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Validation(format!("event {i} block ids are not strictly sorted")));
            }
            let mut s = 0;
            for &b in &e.merged {
                if b >= e.new_block || !alive[b] {
                    return Err(Error::Validation(format!("event {i} merges block {b} which is not alive")));
                }
                alive[b] = false;
                s += size[b];
            }
            alive[e.new_block] = true;
            size[e.new_block] = s;
        }
        let total: usize = (0..alive.len()).filter(|&b| alive[b]).map(|b| size[b]).sum();
        if total != self.n {
            return Err(Error::Validation(format!("blocks cover {total} leaves, not {}", self.n)));
        }
        Ok(())
    }

    /// `N(t)`, the number of blocks at time `t`.
    pub fn block_count_trajectory(&self) -> StepFunction {
        let mut times = Vec::with_capacity(self.events.len());
        let mut values = vec![self.n];
        let mut b = self.n;
        for e in &self.events {
            b -= e.merged.len() - 1;
            if times.last() == Some(&e.time) {
                *values.last_mut().unwrap() = b;
            } else {
                times.push(e.time);
                values.push(b);
            }
        }
        StepFunction { times, values }
    }

    /// Number of events with time `<= t`.
    pub fn events_until(&self, t: f64) -> usize {
        self.events.partition_point(|e| e.time <= t)
    }

    /// Block label of every leaf at time `t`; labels are `0..blocks` in
    /// order of each block's smallest leaf.
    pub fn leaf_labels_at(&self, t: f64) -> Vec<usize> {
        let upto = self.events_until(t);
        let mut parent: Vec<usize> = (0..self.n + upto).collect();
        for e in &self.events[..upto] {
            for &b in &e.merged {
                parent[b] = e.new_block;
            }
        }
        let mut root = vec![usize::MAX; self.n + upto];
        for b in (0..self.n + upto).rev() {
            root[b] = if parent[b] == b { b } else { root[parent[b]] };
        }
        let mut label = vec![usize::MAX; self.n + upto];
        let mut next = 0;
        (0..self.n)
            .map(|leaf| {
                let r = root[leaf];
                if label[r] == usize::MAX {
                    label[r] = next;
                    next += 1;
                }
                label[r]
            })
            .collect()
    }

    /// Blocks of the partition at time `t` as sorted leaf lists, ordered by
    /// smallest leaf.
    pub fn partition_at(&self, t: f64) -> Vec<Vec<usize>> {
        let labels = self.leaf_labels_at(t);
        let count = labels.iter().max().map_or(0, |m| m + 1);
        let mut blocks = vec![Vec::new(); count];
        for (leaf, &l) in labels.iter().enumerate() {
            blocks[l].push(leaf);
        }
        blocks
    }

    /// `|block| / n` for each block alive at `t`, ordered as in
    /// [`partition_at`](Self::partition_at).
    pub fn block_frequencies(&self, t: f64) -> Vec<f64> {
        self.partition_at(t)
            .iter()
            .map(|b| b.len() as f64 / self.n as f64)
            .collect()
    }

    /// Block sizes in decreasing order after each event: the unlabeled
    /// block-size process.
    pub fn block_size_process(&self) -> Vec<Vec<usize>> {
        let mut size = vec![1usize; self.n + self.events.len()];
        let mut alive: Vec<usize> = (0..self.n).collect();
        let mut out = Vec::with_capacity(self.events.len());
        for e in &self.events {
            size[e.new_block] = e.merged.iter().map(|&b| size[b]).sum();
            alive.retain(|b| e.merged.binary_search(b).is_err());
            alive.push(e.new_block);
            let mut sizes: Vec<usize> = alive.iter().map(|&b| size[b]).collect();
            sizes.sort_unstable_by(|a, b| b.cmp(a));
            out.push(sizes);
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::InvalidArgument(format!("serialize history: {e}")))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let h: Self = serde_json::from_str(s).map_err(|e| Error::Parse {
            spec: "history".into(),
            reason: e.to_string(),
        })?;
        h.validate()?;
        Ok(h)
    }
}
