//! Adaptive synthetic oversampling of minority classes.
//!
//! Minority samples surrounded by majority-class neighbors receive more
//! synthetic points; points are generated by linear interpolation toward
//! minority-class members of the seed's neighborhood.

use crate::rng::{self, SplitMix64};
use crate::{Error, Result};
use rayon::prelude::*;

/// Balancing parameters. `k_neighbors = 5`, `beta = 1.0`, and
/// `imbalance_threshold = 0.75` are the reference defaults.
#[derive(Debug, Clone)]
pub struct BalanceConfig {
    pub k_neighbors: usize,
    /// Fraction of the majority/minority gap to fill, in (0, 1].
    pub beta: f64,
    /// Classes at or above this count ratio to the majority class are
    /// left untouched. In (0, 1].
    pub imbalance_threshold: f64,
    pub seed: u64,
}

impl BalanceConfig {
    pub fn new(seed: u64) -> Self {
        BalanceConfig {
            k_neighbors: 5,
            beta: 1.0,
            imbalance_threshold: 0.75,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.k_neighbors < 1 {
            return Err(Error::Argument("k_neighbors must be >= 1".into()));
        }
        if !(self.beta > 0.0 && self.beta <= 1.0) {
            return Err(Error::Argument(format!("beta must be in (0, 1], got {}", self.beta)));
        }
        if !(self.imbalance_threshold > 0.0 && self.imbalance_threshold <= 1.0) {
            return Err(Error::Argument(format!(
                "imbalance_threshold must be in (0, 1], got {}",
                self.imbalance_threshold
            )));
        }
        Ok(())
    }
}

/// One sample of the balanced output.
#[derive(Debug, Clone, PartialEq)]
pub struct BalancedSample {
    pub features: Vec<f64>,
    pub label: u8,
    pub synthetic: bool,
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Indices of the `k` nearest neighbors of sample `i` (excluding itself),
/// by Euclidean distance with index order breaking ties.
fn k_nearest(samples: &[(Vec<f64>, u8)], i: usize, k: usize) -> Vec<usize> {
    let mut dists: Vec<(f64, usize)> = samples
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != i)
        .map(|(j, (x, _))| (squared_distance(&samples[i].0, x), j))
        .collect();
    dists.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite distances"));
    dists.into_iter().take(k).map(|(_, j)| j).collect()
}

/// Oversample every class whose count ratio to the majority class falls
/// below the imbalance threshold.
///
/// For such a class with `m_s` samples against majority count `m_l`,
/// `G = round((m_l - m_s) * beta)` synthetic points are distributed over
/// the class's samples proportionally to the fraction of majority-class
/// members among each sample's `k` nearest neighbors (uniformly when that
/// density signal is zero everywhere). Each synthetic point is
/// `x_i + lambda * (x_z - x_i)` with `lambda` uniform in [0, 1) and `x_z`
/// a uniformly chosen minority-class member of the seed's neighborhood
/// (the seed itself when it has none). Original samples are never
/// modified; synthetic samples are appended after them.
pub fn balance(samples: &[(Vec<f64>, u8)], cfg: &BalanceConfig) -> Result<Vec<BalancedSample>> {
    cfg.validate()?;
    let mut counts: std::collections::BTreeMap<u8, usize> = std::collections::BTreeMap::new();
    for (_, label) in samples {
        *counts.entry(*label).or_insert(0) += 1;
    }
    if counts.len() < 2 {
        return Err(Error::Argument(format!(
            "balancing requires at least 2 classes, got {}",
            counts.len()
        )));
    }
    let m_l = *counts.values().max().expect("non-empty");
    // Smallest label among the largest classes is "the" majority class for
    // the density estimate.
    let majority_label = *counts
        .iter()
        .find(|(_, &c)| c == m_l)
        .map(|(l, _)| l)
        .expect("non-empty");

    let mut out: Vec<BalancedSample> = samples
        .iter()
        .map(|(x, label)| BalancedSample {
            features: x.clone(),
            label: *label,
            synthetic: false,
        })
        .collect();

    let mut rng = rng::stream(cfg.seed, rng::tags::ADASYN);
    for (&label, &m_s) in &counts {
        if label == majority_label {
            continue;
        }
        if (m_s as f64) / (m_l as f64) >= cfg.imbalance_threshold {
            continue;
        }
        if m_s < cfg.k_neighbors + 1 {
            log::warn!(
                "class {label} has {m_s} samples (< k + 1 = {}); skipping balancing for it",
                cfg.k_neighbors + 1
            );
            continue;
        }
        generate_for_class(samples, label, majority_label, m_l, m_s, cfg, &mut rng, &mut out);
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn generate_for_class(
    samples: &[(Vec<f64>, u8)],
    label: u8,
    majority_label: u8,
    m_l: usize,
    m_s: usize,
    cfg: &BalanceConfig,
    rng: &mut SplitMix64,
    out: &mut Vec<BalancedSample>,
) {
    let total_new = ((m_l - m_s) as f64 * cfg.beta).round();
    let seeds: Vec<usize> = samples
        .iter()
        .enumerate()
        .filter(|(_, (_, l))| *l == label)
        .map(|(i, _)| i)
        .collect();

    // k-NN queries are pure; run them in parallel, keeping seed order.
    let neighborhoods: Vec<Vec<usize>> = seeds
        .par_iter()
        .map(|&i| k_nearest(samples, i, cfg.k_neighbors))
        .collect();

    let ratios: Vec<f64> = neighborhoods
        .iter()
        .map(|nn| {
            nn.iter().filter(|&&j| samples[j].1 == majority_label).count() as f64
                / cfg.k_neighbors as f64
        })
        .collect();
    let ratio_sum: f64 = ratios.iter().sum();

    for ((&i, nn), &r) in seeds.iter().zip(&neighborhoods).zip(&ratios) {
        let weight = if ratio_sum == 0.0 {
            1.0 / m_s as f64
        } else {
            r / ratio_sum
        };
        let g_i = (weight * total_new).round() as usize;
        if g_i == 0 {
            continue;
        }
        let minority_neighbors: Vec<usize> = nn
            .iter()
            .copied()
            .filter(|&j| samples[j].1 == label)
            .collect();
        let x_i = &samples[i].0;
        for _ in 0..g_i {
            let x_z = if minority_neighbors.is_empty() {
                x_i
            } else {
                &samples[minority_neighbors[rng.next_index(minority_neighbors.len())]].0
            };
            let lambda = rng.next_f64();
            let features = x_i
                .iter()
                .zip(x_z)
                .map(|(a, b)| a + lambda * (b - a))
                .collect();
            out.push(BalancedSample {
                features,
                label,
                synthetic: true,
            });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian_cluster(
        rng: &mut SplitMix64,
        center: &[f64],
        spread: f64,
        count: usize,
        label: u8,
    ) -> Vec<(Vec<f64>, u8)> {
        (0..count)
            .map(|_| {
                let x = center
                    .iter()
                    .map(|&c| c + spread * rng.next_gaussian())
                    .collect();
                (x, label)
            })
            .collect()
    }

    /// Distance from `p` to the segment [a, b].
    fn distance_to_segment(p: &[f64], a: &[f64], b: &[f64]) -> f64 {
        let len_sq = squared_distance(a, b);
        let t = if len_sq == 0.0 {
            0.0
        } else {
            let dot: f64 = p
                .iter()
                .zip(a)
                .zip(b.iter().zip(a))
                .map(|((pv, av), (bv, av2))| (pv - av) * (bv - av2))
                .sum();
            (dot / len_sq).clamp(0.0, 1.0)
        };
        let proj: Vec<f64> = a.iter().zip(b).map(|(av, bv)| av + t * (bv - av)).collect();
        squared_distance(p, &proj).sqrt()
    }

    #[test]
    fn balanced_input_passes_through_unchanged() {
        let mut rng = SplitMix64::new(1);
        let mut samples = gaussian_cluster(&mut rng, &[0.0, 0.0], 1.0, 100, 1);
        samples.extend(gaussian_cluster(&mut rng, &[10.0, 10.0], 1.0, 100, 2));
        let out = balance(&samples, &BalanceConfig::new(7)).unwrap();
        assert_eq!(out.len(), 200);
        for (sample, (x, label)) in out.iter().zip(&samples) {
            assert_eq!(&sample.features, x);
            assert_eq!(sample.label, *label);
            assert!(!sample.synthetic);
        }
    }

    #[test]
    fn fewer_than_two_classes_is_an_error() {
        let samples = vec![(vec![0.0], 1u8); 10];
        assert!(matches!(
            balance(&samples, &BalanceConfig::new(1)),
            Err(Error::Argument(_))
        ));
    }

    #[test]
    fn synthetic_count_is_near_the_gap() {
        // 100 vs 40 with beta = 1: G = 60, and per-seed rounding keeps the
        // actual count within the number of minority seeds of G.
        let mut rng = SplitMix64::new(2);
        let mut samples = gaussian_cluster(&mut rng, &[0.0, 0.0], 1.0, 100, 1);
        samples.extend(gaussian_cluster(&mut rng, &[20.0, 20.0], 1.0, 40, 2));
        let out = balance(&samples, &BalanceConfig::new(11)).unwrap();
        let synthetic = out.iter().filter(|s| s.synthetic).count();
        assert!(
            (synthetic as i64 - 60).unsigned_abs() as usize <= 40,
            "synthetic count {synthetic} too far from 60"
        );
        for s in out.iter().filter(|s| s.synthetic) {
            assert_eq!(s.label, 2);
        }
        // Originals first, unchanged.
        for (sample, (x, label)) in out.iter().take(140).zip(&samples) {
            assert_eq!(&sample.features, x);
            assert_eq!(sample.label, *label);
        }
    }

    #[test]
    fn synthetics_lie_on_seed_to_neighbor_segments() {
        let mut rng = SplitMix64::new(3);
        let mut samples = gaussian_cluster(&mut rng, &[0.0, 0.0, 0.0], 1.0, 80, 1);
        samples.extend(gaussian_cluster(&mut rng, &[8.0, 8.0, 8.0], 1.5, 30, 2));
        let cfg = BalanceConfig::new(5);
        let out = balance(&samples, &cfg).unwrap();
        let minority: Vec<&(Vec<f64>, u8)> =
            samples.iter().filter(|(_, l)| *l == 2).collect();
        for s in out.iter().filter(|s| s.synthetic) {
            // Membership oracle: minimum distance to any segment between a
            // minority sample and one of its k nearest minority neighbors.
            let mut best = f64::INFINITY;
            for (i, (x, _)) in samples.iter().enumerate() {
                if samples[i].1 != 2 {
                    continue;
                }
                for &j in &k_nearest(&samples, i, cfg.k_neighbors) {
                    if samples[j].1 != 2 {
                        continue;
                    }
                    best = best.min(distance_to_segment(&s.features, x, &samples[j].0));
                }
                // A seed with no minority neighbor reuses itself.
                best = best.min(distance_to_segment(&s.features, x, x));
            }
            assert!(best < 1e-6, "synthetic point {best} away from any segment");
            let _ = &minority;
        }
    }

    #[test]
    fn near_balanced_class_receives_no_synthetics() {
        // Ratio 0.90 >= threshold 0.75: untouched; ratio 0.40: augmented.
        let mut rng = SplitMix64::new(4);
        let mut samples = gaussian_cluster(&mut rng, &[0.0, 0.0], 1.0, 100, 1);
        samples.extend(gaussian_cluster(&mut rng, &[12.0, 0.0], 1.0, 90, 2));
        samples.extend(gaussian_cluster(&mut rng, &[0.0, 12.0], 1.0, 40, 3));
        let out = balance(&samples, &BalanceConfig::new(9)).unwrap();
        assert_eq!(out.iter().filter(|s| s.synthetic && s.label == 2).count(), 0);
        assert!(out.iter().filter(|s| s.synthetic && s.label == 3).count() > 0);
    }

    #[test]
    fn deterministic_for_a_seed() {
        let mut rng = SplitMix64::new(6);
        let mut samples = gaussian_cluster(&mut rng, &[0.0], 1.0, 50, 1);
        samples.extend(gaussian_cluster(&mut rng, &[5.0], 1.0, 20, 2));
        let a = balance(&samples, &BalanceConfig::new(42)).unwrap();
        let b = balance(&samples, &BalanceConfig::new(42)).unwrap();
        assert_eq!(a, b);
        let c = balance(&samples, &BalanceConfig::new(43)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn tiny_class_is_skipped_with_no_synthetics() {
        let mut rng = SplitMix64::new(8);
        let mut samples = gaussian_cluster(&mut rng, &[0.0, 0.0], 1.0, 50, 1);
        samples.extend(gaussian_cluster(&mut rng, &[9.0, 9.0], 1.0, 4, 2)); // < k + 1
        let out = balance(&samples, &BalanceConfig::new(10)).unwrap();
        assert_eq!(out.len(), 54);
        assert!(out.iter().all(|s| !s.synthetic));
    }
}
