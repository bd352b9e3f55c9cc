//! Monte-Carlo sampling of detector tags from precomputed outcome tables.
//!
//! Every trial owns a fixed slice of one ChaCha8 keystream (16 words starting
//! at `16 · trial_index`), so the output depends only on the seed and the
//! tables, never on chunking or thread count.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::table::{pattern_bits, OutcomeTable};
use crate::tags::{PulseLabel, TagRecord, TagStream, TrialLayout};

const WORDS_PER_TRIAL: u128 = 16;
const CHUNK: u64 = 1 << 15;

/// Counter-based stream identifiers; each consumer gets its own keystream.
pub(crate) const STREAM_TRIALS: u64 = 0;

/// A keystream positioned at `slot · words_per_slot` 32-bit words.
pub(crate) fn keystream(seed: u64, stream: u64, slot: u64, words_per_slot: u128) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng.set_word_pos(slot as u128 * words_per_slot);
    rng
}

/// Uniform in [0, 1) with 53 random bits.
pub(crate) fn unit(x: u64) -> f64 {
    (x >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Cumulative distribution with the tail pinned above any unit draw.
pub(crate) fn cumulative<const N: usize>(probs: &[f64; N]) -> [f64; N] {
    let total: f64 = probs.iter().sum();
    let mut cdf = [0.0; N];
    let mut acc = 0.0;
    for (c, p) in cdf.iter_mut().zip(probs) {
        acc += p / total;
        *c = acc;
    }
    if let Some(last) = probs.iter().rposition(|&p| p > 0.0) {
        for c in &mut cdf[last..] {
            *c = f64::INFINITY;
        }
    }
    cdf
}

pub(crate) fn draw<const N: usize>(cdf: &[f64; N], u: f64) -> usize {
    cdf.iter().position(|&c| u < c).unwrap_or(N - 1)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SampleOutput {
    pub stream: TagStream,
    /// Per delay block, number of trials that produced each pattern.
    pub pattern_counts: Vec<[u64; 16]>,
}

/// Draws one click pattern per trial and places each click uniformly inside
/// its window. `tables[i]` drives `layout.blocks[i]`.
pub fn sample_trials(
    layout: &TrialLayout,
    tables: &[OutcomeTable],
    seed: u64,
    config_hash: u64,
) -> SampleOutput {
    assert_eq!(layout.blocks.len(), tables.len(), "one table per delay block");
    let cdfs: Vec<[f64; 16]> = tables.iter().map(|t| cumulative(&t.probabilities)).collect();
    let total = layout.total_trials();
    let n_chunks = total.div_ceil(CHUNK);

    let parts: Vec<(Vec<TagRecord>, Vec<[u64; 16]>)> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let start = c * CHUNK;
            let end = (start + CHUNK).min(total);
            sample_range(layout, &cdfs, seed, start, end)
        })
        .collect();

    let mut stream = TagStream::empty(config_hash, total);
    let mut pattern_counts = vec![[0u64; 16]; tables.len()];
    stream.records.reserve(parts.iter().map(|p| p.0.len()).sum());
    for (records, counts) in parts {
        stream.records.extend(records);
        for (acc, c) in pattern_counts.iter_mut().zip(&counts) {
            for k in 0..16 {
                acc[k] += c[k];
            }
        }
    }
    SampleOutput {
        stream,
        pattern_counts,
    }
}

fn sample_range(
    layout: &TrialLayout,
    cdfs: &[[f64; 16]],
    seed: u64,
    start: u64,
    end: u64,
) -> (Vec<TagRecord>, Vec<[u64; 16]>) {
    let mut rng = keystream(seed, STREAM_TRIALS, start, WORDS_PER_TRIAL);
    let mut records = Vec::new();
    let mut counts = vec![[0u64; 16]; cdfs.len()];
    let mut block = layout.block_of(start).unwrap_or(0);
    let mut words = [0u64; 8];
    for trial in start..end {
        while layout.blocks[block].end() <= trial {
            block += 1;
        }
        for w in &mut words {
            *w = rng.next_u64();
        }
        let k = draw(&cdfs[block], unit(words[0]));
        counts[block][k] += 1;
        if k == 0 {
            continue;
        }
        let bits = pattern_bits(k);
        for (slot, &clicked) in bits.iter().enumerate() {
            if !clicked {
                continue;
            }
            let pulse = if slot < 2 { PulseLabel::Write } else { PulseLabel::Read };
            let (lo, hi) = layout.window(block, pulse);
            let offset = ((unit(words[1 + slot]) * (hi - lo) as f64) as u64).min(hi - lo - 1);
            records.push(TagRecord {
                trial_index: trial,
                detector: (slot % 2) as u8,
                pulse,
                time_ps: lo + offset,
            });
        }
    }
    (records, counts)
}

/// Draws `n` independent categorical outcomes and returns their histogram.
pub(crate) fn sample_counts<const N: usize>(
    probs: &[f64; N],
    n: u64,
    seed: u64,
    stream: u64,
) -> [u64; N] {
    let cdf = cumulative(probs);
    let n_chunks = n.div_ceil(CHUNK);
    (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let start = c * CHUNK;
            let end = (start + CHUNK).min(n);
            let mut rng = keystream(seed, stream, start, 2);
            let mut h = [0u64; N];
            for _ in start..end {
                h[draw(&cdf, rng.random::<f64>())] += 1;
            }
            h
        })
        .reduce(
            || [0u64; N],
            |mut a, b| {
                for k in 0..N {
                    a[k] += b[k];
                }
                a
            },
        )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::{build_outcome_table, ExperimentConfig};

    fn small_run(trials: u64, seed: u64) -> SampleOutput {
        let mut cfg = ExperimentConfig::default();
        cfg.protocol.trials = trials;
        cfg.protocol.delta_t_list = vec![100.0, 300.0];
        let layout = TrialLayout::from_config(&cfg);
        let tables: Vec<_> = cfg
            .protocol
            .delta_t_list
            .iter()
            .map(|&dt| build_outcome_table(&cfg, dt).unwrap())
            .collect();
        sample_trials(&layout, &tables, seed, cfg.hash())
    }

    #[test]
    fn zero_trials_give_an_empty_stream() {
        let out = small_run(0, 1);
        assert!(out.stream.records.is_empty());
        assert_eq!(out.stream.header.trial_count, 0);
    }

    #[test]
    fn silent_table_emits_nothing() {
        let layout = TrialLayout::new(60.0, 55.0, &[100.0], 1000);
        let mut t = build_outcome_table(&ExperimentConfig::default(), 100.0).unwrap();
        t.probabilities = [0.0; 16];
        t.probabilities[0] = 1.0;
        let out = sample_trials(&layout, &[t], 3, 0);
        assert!(out.stream.records.is_empty());
        assert_eq!(out.pattern_counts[0][0], 1000);
    }

    #[test]
    fn records_sit_inside_their_windows_and_are_ordered() {
        let out = small_run(200_000, 7);
        let mut cfg = ExperimentConfig::default();
        cfg.protocol.trials = 200_000;
        cfg.protocol.delta_t_list = vec![100.0, 300.0];
        let layout = TrialLayout::from_config(&cfg);
        assert!(!out.stream.records.is_empty());
        for w in out.stream.records.windows(2) {
            assert!(w[0].trial_index <= w[1].trial_index);
        }
        for r in &out.stream.records {
            let b = layout.block_of(r.trial_index).unwrap();
            let (lo, hi) = layout.window(b, r.pulse);
            assert!(r.time_ps >= lo && r.time_ps < hi);
        }
    }

    #[test]
    fn same_seed_same_stream_across_thread_counts() {
        let a = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| small_run(100_000, 11));
        let b = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap()
            .install(|| small_run(100_000, 11));
        assert_eq!(a, b);
        assert_ne!(a.stream.records, small_run(100_000, 12).stream.records);
    }

    #[test]
    fn cumulative_pins_the_tail() {
        let cdf = cumulative(&[0.5, 0.5, 0.0]);
        assert_eq!(draw(&cdf, 0.999_999_999), 1);
        let cdf = cumulative(&[1.0, 0.0]);
        assert_eq!(draw(&cdf, 0.999_999_999_999), 0);
    }
}
