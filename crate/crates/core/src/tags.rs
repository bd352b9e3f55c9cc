//! Detector time tags and the trial/window layout shared by the sampler and
//! the tabulator.

use crate::protocol::ExperimentConfig;

/// Current TagStream format version.
pub const FORMAT_VERSION: u16 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[repr(u8)]
pub enum PulseLabel {
    Write = 0,
    Read = 1,
}

impl PulseLabel {
    pub fn from_byte(b: u8) -> Option<Self> {
        match b {
            0 => Some(PulseLabel::Write),
            1 => Some(PulseLabel::Read),
            _ => None,
        }
    }
}

/// One registered click. `time_ps` is measured from the start of the trial's
/// write window.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TagRecord {
    pub trial_index: u64,
    pub detector: u8,
    pub pulse: PulseLabel,
    pub time_ps: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StreamHeader {
    pub version: u16,
    pub config_hash: u64,
    pub trial_count: u64,
}

/// Records sorted by trial index, then pulse, then detector.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TagStream {
    pub header: StreamHeader,
    pub records: Vec<TagRecord>,
}

impl TagStream {
    pub fn empty(config_hash: u64, trial_count: u64) -> Self {
        Self {
            header: StreamHeader {
                version: FORMAT_VERSION,
                config_hash,
                trial_count,
            },
            records: Vec::new(),
        }
    }
}

/// A contiguous range of trials run at one write-to-read delay.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DelayBlock {
    pub delta_t_ns: f64,
    pub first_trial: u64,
    pub trials: u64,
}

impl DelayBlock {
    pub fn end(&self) -> u64 {
        self.first_trial + self.trials
    }
}

/// Window geometry and the split of trials over delay settings. The write
/// window is `[0, write_window_ps)`; the read window of a block starts
/// `delta_t` after the write window closes.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialLayout {
    pub write_window_ps: u64,
    pub read_window_ps: u64,
    pub blocks: Vec<DelayBlock>,
}

pub(crate) fn ns_to_ps(ns: f64) -> u64 {
    (ns * 1e3).round() as u64
}

impl TrialLayout {
    /// Splits `total` trials as evenly as possible over `delays`.
    pub fn new(write_window_ns: f64, read_window_ns: f64, delays: &[f64], total: u64) -> Self {
        let k = delays.len() as u128;
        let bound = |i: u128| (i * total as u128 / k) as u64;
        let blocks = delays
            .iter()
            .enumerate()
            .map(|(i, &dt)| {
                let (a, b) = (bound(i as u128), bound(i as u128 + 1));
                DelayBlock {
                    delta_t_ns: dt,
                    first_trial: a,
                    trials: b - a,
                }
            })
            .collect();
        Self {
            write_window_ps: ns_to_ps(write_window_ns),
            read_window_ps: ns_to_ps(read_window_ns),
            blocks,
        }
    }

    pub fn from_config(cfg: &ExperimentConfig) -> Self {
        Self::new(
            cfg.chain.window_write_ns,
            cfg.chain.window_read_ns,
            &cfg.protocol.delta_t_list,
            cfg.protocol.trials,
        )
    }

    pub fn total_trials(&self) -> u64 {
        self.blocks.last().map_or(0, |b| b.end())
    }

    /// Index of the block containing `trial`.
    pub fn block_of(&self, trial: u64) -> Option<usize> {
        let i = self.blocks.partition_point(|b| b.end() <= trial);
        (i < self.blocks.len() && self.blocks[i].first_trial <= trial).then_some(i)
    }

    pub fn read_start_ps(&self, block: usize) -> u64 {
        self.write_window_ps + ns_to_ps(self.blocks[block].delta_t_ns)
    }

    /// Window `[start, end)` of `pulse` in `block`.
    pub fn window(&self, block: usize, pulse: PulseLabel) -> (u64, u64) {
        match pulse {
            PulseLabel::Write => (0, self.write_window_ps),
            PulseLabel::Read => {
                let s = self.read_start_ps(block);
                (s, s + self.read_window_ps)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn blocks_partition_the_trials() {
        let l = TrialLayout::new(60.0, 55.0, &[100.0, 200.0, 300.0], 10);
        let sizes: Vec<u64> = l.blocks.iter().map(|b| b.trials).collect();
        assert_eq!(sizes, vec![3, 3, 4]);
        assert_eq!(l.total_trials(), 10);
        assert_eq!(l.block_of(0), Some(0));
        assert_eq!(l.block_of(3), Some(1));
        assert_eq!(l.block_of(9), Some(2));
        assert_eq!(l.block_of(10), None);
        assert_eq!(l.window(1, PulseLabel::Read), (260_000, 315_000));
    }

    #[test]
    fn empty_blocks_are_skipped_by_lookup() {
        let l = TrialLayout::new(60.0, 55.0, &[100.0, 200.0, 300.0], 1);
        assert_eq!(l.block_of(0), Some(2));
        let l = TrialLayout::new(60.0, 55.0, &[100.0], 0);
        assert_eq!(l.block_of(0), None);
    }
}
