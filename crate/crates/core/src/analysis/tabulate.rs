//! Windowed assignment of tags to (trial, pulse, detector) cells.

use serde::Serialize;

use crate::error::{AnalysisError, FormatError};
use crate::protocol::{pattern_bits, pattern_index};
use crate::tags::{ns_to_ps, PulseLabel, TagStream, TrialLayout};

/// Event counters of one group of trials. `write_read` counts trials with a
/// click on either write detector and either read detector.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct EventCounts {
    pub trials: u64,
    pub w1: u64,
    pub w2: u64,
    pub r1: u64,
    pub r2: u64,
    pub w1w2: u64,
    pub r1r2: u64,
    pub write_any: u64,
    pub read_any: u64,
    pub write_read: u64,
}

impl EventCounts {
    pub fn from_patterns(hist: &[u64; 16]) -> Self {
        let mut c = EventCounts::default();
        for (k, &n) in hist.iter().enumerate() {
            let [w1, w2, r1, r2] = pattern_bits(k);
            c.trials += n;
            c.w1 += n * w1 as u64;
            c.w2 += n * w2 as u64;
            c.r1 += n * r1 as u64;
            c.r2 += n * r2 as u64;
            c.w1w2 += n * (w1 && w2) as u64;
            c.r1r2 += n * (r1 && r2) as u64;
            let (w, r) = (w1 || w2, r1 || r2);
            c.write_any += n * w as u64;
            c.read_any += n * r as u64;
            c.write_read += n * (w && r) as u64;
        }
        c
    }

    pub fn merge(mut self, o: &EventCounts) -> Self {
        self.trials += o.trials;
        self.w1 += o.w1;
        self.w2 += o.w2;
        self.r1 += o.r1;
        self.r2 += o.r2;
        self.w1w2 += o.w1w2;
        self.r1r2 += o.r1r2;
        self.write_any += o.write_any;
        self.read_any += o.read_any;
        self.write_read += o.write_read;
        self
    }
}

/// Write and read events of trial pairs (n, n + Δn) inside one block.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct PairCounts {
    pub pairs: u64,
    pub write: u64,
    pub read: u64,
    pub both: u64,
}

/// Per-trial click patterns plus the layout they were cut with.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialTable {
    pub layout: TrialLayout,
    /// Effective read window after trimming.
    pub read_window_ps: u64,
    patterns: Vec<u8>,
}

/// Assigns every record to its trial cell. Read clicks later than
/// `read_window_ns` into the read window are dropped, which trims the window
/// without resimulating.
pub fn tabulate(
    stream: &TagStream,
    layout: &TrialLayout,
    read_window_ns: Option<f64>,
) -> Result<TrialTable, FormatError> {
    let trials = stream.header.trial_count;
    if trials != layout.total_trials() {
        return Err(FormatError::LayoutMismatch(format!(
            "stream holds {trials} trials, layout expects {}",
            layout.total_trials()
        )));
    }
    let read_window_ps = match read_window_ns {
        None => layout.read_window_ps,
        Some(w) => {
            let ps = ns_to_ps(w);
            if !(w > 0.0) || ps > layout.read_window_ps {
                return Err(FormatError::LayoutMismatch(format!(
                    "read window {w} ns must be positive and within the recorded {} ns",
                    layout.read_window_ps as f64 * 1e-3
                )));
            }
            ps
        }
    };
    let mut patterns = vec![0u8; trials as usize];
    for (i, r) in stream.records.iter().enumerate() {
        let bad = |reason: String| FormatError::BadRecord {
            index: i as u64,
            offset: (super::format::HEADER_LEN + i * super::format::RECORD_LEN) as u64,
            reason,
        };
        let block = layout
            .block_of(r.trial_index)
            .ok_or_else(|| bad(format!("trial {} outside the layout", r.trial_index)))?;
        let (lo, hi) = layout.window(block, r.pulse);
        if r.time_ps < lo || r.time_ps >= hi {
            return Err(bad(format!(
                "{:?} label at {} ps lies outside its window [{lo}, {hi})",
                r.pulse, r.time_ps
            )));
        }
        if r.pulse == PulseLabel::Read && r.time_ps >= lo + read_window_ps {
            continue;
        }
        let d = r.detector == 1;
        let bit = match r.pulse {
            PulseLabel::Write => pattern_index(!d, d, false, false),
            PulseLabel::Read => pattern_index(false, false, !d, d),
        };
        patterns[r.trial_index as usize] |= bit as u8;
    }
    Ok(TrialTable {
        layout: layout.clone(),
        read_window_ps,
        patterns,
    })
}

impl TrialTable {
    pub fn trial_count(&self) -> u64 {
        self.patterns.len() as u64
    }

    pub fn blocks(&self) -> usize {
        self.layout.blocks.len()
    }

    /// Click flags (w1, w2, r1, r2) of one trial.
    pub fn trial(&self, index: u64) -> [bool; 4] {
        pattern_bits(self.patterns[index as usize] as usize)
    }

    fn block_slice(&self, block: usize) -> &[u8] {
        let b = &self.layout.blocks[block];
        &self.patterns[b.first_trial as usize..b.end() as usize]
    }

    pub fn pattern_counts(&self, block: usize) -> [u64; 16] {
        let mut h = [0u64; 16];
        for &p in self.block_slice(block) {
            h[p as usize] += 1;
        }
        h
    }

    pub fn block_counts(&self, block: usize) -> EventCounts {
        EventCounts::from_patterns(&self.pattern_counts(block))
    }

    /// Counts summed over all delay settings.
    pub fn pooled_counts(&self) -> EventCounts {
        (0..self.blocks()).fold(EventCounts::default(), |acc, b| acc.merge(&self.block_counts(b)))
    }

    /// Pairs the write window of trial n with the read window of trial
    /// n + Δn, both inside `block`.
    pub fn pair_counts(&self, block: usize, delta_n: i64) -> Result<PairCounts, AnalysisError> {
        let s = self.block_slice(block);
        let shift = delta_n.unsigned_abs() as usize;
        if shift >= s.len() {
            return Err(AnalysisError::NoPairs {
                delta_n,
                trials: s.len() as u64,
            });
        }
        let n = s.len() - shift;
        let (writes, reads) = if delta_n >= 0 {
            (&s[..n], &s[shift..])
        } else {
            (&s[shift..], &s[..n])
        };
        let mut c = PairCounts {
            pairs: n as u64,
            write: 0,
            read: 0,
            both: 0,
        };
        for (&w, &r) in writes.iter().zip(reads) {
            let w = w & 0b0011 != 0;
            let r = r & 0b1100 != 0;
            c.write += w as u64;
            c.read += r as u64;
            c.both += (w && r) as u64;
        }
        Ok(c)
    }

    /// Copy in which a registered click survives only when
    /// `coin(trial, slot)` returns true; slots follow the pattern bit order.
    pub fn thinned(&self, mut coin: impl FnMut(u64, usize) -> bool) -> Self {
        let mut out = self.clone();
        for (t, p) in out.patterns.iter_mut().enumerate() {
            for slot in 0..4 {
                if *p & (1 << slot) != 0 && !coin(t as u64, slot) {
                    *p &= !(1 << slot);
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tags::TagRecord;

    fn layout(trials: u64) -> TrialLayout {
        TrialLayout::new(60.0, 55.0, &[100.0], trials)
    }

    #[test]
    fn empty_stream_counts_nothing() {
        let s = TagStream::empty(0, 5);
        let t = tabulate(&s, &layout(5), None).unwrap();
        let c = t.block_counts(0);
        assert_eq!(c.trials, 5);
        assert_eq!(c, EventCounts { trials: 5, ..Default::default() });
    }

    #[test]
    fn single_write_click_on_second_detector() {
        let mut s = TagStream::empty(0, 3);
        s.records.push(TagRecord {
            trial_index: 0,
            detector: 1,
            pulse: PulseLabel::Write,
            time_ps: 10,
        });
        let c = tabulate(&s, &layout(3), None).unwrap().block_counts(0);
        assert_eq!(c.w2, 1);
        assert_eq!(c.w1 + c.r1 + c.r2 + c.w1w2 + c.r1r2 + c.write_read, 0);
    }

    #[test]
    fn window_mismatch_and_trimming() {
        let l = layout(2);
        let (lo, _) = l.window(0, PulseLabel::Read);
        let mut s = TagStream::empty(0, 2);
        s.records.push(TagRecord {
            trial_index: 1,
            detector: 0,
            pulse: PulseLabel::Read,
            time_ps: lo + 40_000,
        });
        assert_eq!(tabulate(&s, &l, None).unwrap().block_counts(0).r1, 1);
        assert_eq!(tabulate(&s, &l, Some(30.0)).unwrap().block_counts(0).r1, 0);
        assert!(tabulate(&s, &l, Some(80.0)).is_err());
        s.records[0].pulse = PulseLabel::Write;
        assert!(matches!(
            tabulate(&s, &l, None),
            Err(FormatError::BadRecord { index: 0, .. })
        ));
    }

    #[test]
    fn pair_offsets() {
        let l = layout(4);
        let mut s = TagStream::empty(0, 4);
        let (rlo, _) = l.window(0, PulseLabel::Read);
        for (trial, pulse, time) in [(0, PulseLabel::Write, 5), (1, PulseLabel::Read, rlo)] {
            s.records.push(TagRecord {
                trial_index: trial,
                detector: 0,
                pulse,
                time_ps: time,
            });
        }
        let t = tabulate(&s, &l, None).unwrap();
        assert_eq!(t.pair_counts(0, 0).unwrap().both, 0);
        let c = t.pair_counts(0, 1).unwrap();
        assert_eq!((c.pairs, c.write, c.read, c.both), (3, 1, 1, 1));
        assert_eq!(t.pair_counts(0, -1).unwrap().both, 0);
        assert!(t.pair_counts(0, 4).is_err());
    }
}
