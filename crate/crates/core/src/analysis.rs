//! Characterization of efficient structures: robustness under random
//! displacement, active/inactive module detection, inactive-module
//! ablation, backbone eigenvalue shifts and spectral commensurability.

use crate::dynamics::{
    build_hamiltonian, default_window, efficiency, efficiency_with_window, eigendecompose,
    OccupationTrajectory,
};
use crate::error::{CoreError, Result};
use crate::geometry::displace_with;
use crate::network::UnionFind;
use crate::seed::stream_rng;
use crate::structure::{distance, Point, Structure};
use rayon::prelude::*;
use std::collections::BTreeSet;

/// Configuration of a robustness probe.
#[derive(Debug, Clone, Copy)]
pub struct RobustnessOptions {
    pub trials: usize,
    /// Side of the displacement cube, in r0.
    pub side: f64,
    /// Whether the input/output sites are displaced too.
    pub move_endpoints: bool,
}

impl Default for RobustnessOptions {
    fn default() -> Self {
        RobustnessOptions {
            trials: 1000,
            side: 0.05,
            move_endpoints: true,
        }
    }
}

/// Outcome of a robustness probe.
#[derive(Debug, Clone, Copy)]
pub struct RobustnessResult {
    pub eps_original: f64,
    /// Mean efficiency loss over the displacement trials.
    pub delta_eps: f64,
    /// Sample standard deviation of the trial efficiencies.
    pub std: f64,
    pub trials: usize,
    pub side: f64,
}

/// Draws `trials` displaced copies of the structure, evaluates the
/// efficiency of each and reports the mean loss. Trial `k` uses the
/// ChaCha stream derived from `(seed, k)`, so results are independent of
/// scheduling and worker count.
pub fn robustness(s: &Structure, seed: u64, opts: &RobustnessOptions) -> Result<RobustnessResult> {
    if opts.trials == 0 {
        return Err(CoreError::InvalidInput("need at least one trial".into()));
    }
    let eps_original = efficiency(s)?.efficiency;
    let losses: Vec<f64> = (0..opts.trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = stream_rng(seed, trial as u64);
            let displaced = displace_with(s, &mut rng, opts.side, opts.move_endpoints)?;
            Ok(eps_original - efficiency(&displaced)?.efficiency)
        })
        .collect::<Result<_>>()?;
    let mean_loss: f64 = losses.iter().sum::<f64>() / opts.trials as f64;
    let std = if opts.trials < 2 {
        0.0
    } else {
        let var = losses
            .iter()
            .map(|l| (l - mean_loss).powi(2))
            .sum::<f64>()
            / (opts.trials - 1) as f64;
        var.sqrt()
    };
    Ok(RobustnessResult {
        eps_original,
        delta_eps: mean_loss,
        std,
        trials: opts.trials,
        side: opts.side,
    })
}

/// Split of a structure into the excitation-carrying backbone and the
/// tightly packed groups that never get populated.
#[derive(Debug, Clone, PartialEq)]
pub struct ModulePartition {
    /// Site indices of the active module; always contains the input and
    /// output sites.
    pub backbone: Vec<usize>,
    /// Inactive pair/triplet site-index groups, disjoint from the backbone.
    pub inactive_groups: Vec<Vec<usize>>,
}

/// Default linkage distance for grouping tightly packed intermediates.
pub const DEFAULT_LINK_CUT: f64 = 0.35;
/// Default occupation ceiling below which a group counts as inactive.
pub const DEFAULT_OCC_CUT: f64 = 0.1;

/// Groups intermediate sites by single-linkage clustering at `link_cut`;
/// a group of two or three sites is an inactive module iff every member's
/// maximal occupation over the trajectory stays below `occ_cut`. Everything
/// else is backbone. An empty group list is a perfectly valid outcome.
pub fn detect_modules(
    s: &Structure,
    traj: &OccupationTrajectory,
    link_cut: f64,
    occ_cut: f64,
) -> ModulePartition {
    let n = s.n();
    assert!(
        traj.occupations.first().map(|q| q.len()) == Some(n),
        "trajectory does not match the structure"
    );
    let mut max_occ = vec![0.0f64; n];
    for q in &traj.occupations {
        for (m, &qi) in max_occ.iter_mut().zip(q) {
            *m = m.max(qi);
        }
    }

    let inter: Vec<usize> = (1..n - 1).collect();
    let mut uf = UnionFind::new(inter.len());
    for a in 0..inter.len() {
        for b in (a + 1)..inter.len() {
            if distance(s.coords[inter[a]], s.coords[inter[b]]) <= link_cut {
                uf.union(a, b);
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for (local, &site) in inter.iter().enumerate() {
        groups.entry(uf.find(local)).or_default().push(site);
    }

    let mut backbone = vec![0, n - 1];
    let mut inactive_groups = Vec::new();
    for (_, group) in groups {
        let quiet = group.iter().all(|&site| max_occ[site] < occ_cut);
        if (2..=3).contains(&group.len()) && quiet {
            inactive_groups.push(group);
        } else {
            backbone.extend(group);
        }
    }
    backbone.sort_unstable();
    inactive_groups.sort_by_key(|g| g[0]);
    ModulePartition {
        backbone,
        inactive_groups,
    }
}

/// Efficiency losses upon removing inactive groups, individually and
/// jointly.
#[derive(Debug, Clone)]
pub struct AblationResult {
    pub groups: Vec<Vec<usize>>,
    /// `eps(full) - eps(without group)`, one entry per group.
    pub per_group_loss: Vec<f64>,
    /// `eps(full) - eps(without all groups)`.
    pub joint_loss: f64,
    pub eps_full: f64,
}

impl AblationResult {
    /// Sum of the individual losses, for collectiveness comparisons
    /// against the joint loss.
    pub fn sum_of_individual(&self) -> f64 {
        self.per_group_loss.iter().sum()
    }
}

/// Removes each site group (and then their union) from the structure and
/// recomputes the efficiency over the unchanged full-structure window.
pub fn ablate(s: &Structure, groups: &[Vec<usize>]) -> Result<AblationResult> {
    let n = s.n();
    let mut union: BTreeSet<usize> = BTreeSet::new();
    for g in groups {
        for &site in g {
            if site >= n {
                return Err(CoreError::InvalidInput(format!(
                    "site index {site} out of range for {n} sites"
                )));
            }
            if site == 0 || site == n - 1 {
                return Err(CoreError::InvalidInput(
                    "groups must not contain the input or output site".into(),
                ));
            }
            if !union.insert(site) {
                return Err(CoreError::InvalidInput(format!(
                    "groups overlap on site {site}"
                )));
            }
        }
    }
    if n - union.len() < 2 {
        return Err(CoreError::InvalidInput(
            "removal would leave fewer than 2 sites".into(),
        ));
    }

    let window = default_window(s);
    let eps_full = efficiency_with_window(s, window)?.efficiency;
    let reduced_eps = |remove: &BTreeSet<usize>| -> Result<f64> {
        let coords: Vec<Point> = s
            .coords
            .iter()
            .enumerate()
            .filter(|(i, _)| !remove.contains(i))
            .map(|(_, &p)| p)
            .collect();
        Ok(efficiency_with_window(&Structure::raw(s.id, coords), window)?.efficiency)
    };

    let mut per_group_loss = Vec::with_capacity(groups.len());
    for g in groups {
        let remove: BTreeSet<usize> = g.iter().copied().collect();
        per_group_loss.push(eps_full - reduced_eps(&remove)?);
    }
    let joint_loss = eps_full - reduced_eps(&union)?;
    Ok(AblationResult {
        groups: groups.to_vec(),
        per_group_loss,
        joint_loss,
        eps_full,
    })
}

/// Full vs backbone-only spectra and the shifts of the backbone-localized
/// eigenvalues induced by the inactive sites.
#[derive(Debug, Clone)]
pub struct SpectrumShift {
    pub full_eigenvalues: Vec<f64>,
    /// Spectrum of the Hamiltonian restricted to the backbone sites.
    pub backbone_eigenvalues: Vec<f64>,
    /// Per full eigenvector: total amplitude weight on the backbone sites.
    pub localization_weights: Vec<f64>,
    /// Full eigenvalues whose eigenvectors are backbone-localized
    /// (weight >= 0.5), ascending.
    pub backbone_localized: Vec<f64>,
    /// `lambda_full - lambda_backbone` per backbone-localized state,
    /// matched in ascending order.
    pub matched_shifts: Vec<f64>,
}

/// Eigendecomposes the full and the backbone-only Hamiltonians and matches
/// backbone-localized full eigenvalues against the bare backbone spectrum.
/// If the count of backbone-localized eigenvectors does not equal the
/// backbone size the classification is ambiguous and an error listing all
/// weights is returned instead of a silent misassignment.
pub fn spectrum_shift(s: &Structure, part: &ModulePartition) -> Result<SpectrumShift> {
    let n = s.n();
    if part.inactive_groups.is_empty() {
        return Err(CoreError::InvalidInput(
            "partition has no inactive groups".into(),
        ));
    }
    let mut seen: BTreeSet<usize> = BTreeSet::new();
    for &site in part
        .backbone
        .iter()
        .chain(part.inactive_groups.iter().flatten())
    {
        if site >= n || !seen.insert(site) {
            return Err(CoreError::InvalidInput(
                "partition is not a disjoint cover of the site set".into(),
            ));
        }
    }
    if seen.len() != n {
        return Err(CoreError::InvalidInput(
            "partition does not cover all sites".into(),
        ));
    }
    if !part.backbone.contains(&0) || !part.backbone.contains(&(n - 1)) {
        return Err(CoreError::InvalidInput(
            "backbone must contain the input and output sites".into(),
        ));
    }

    let full = eigendecompose(&build_hamiltonian(s)?)?;
    let backbone_structure = Structure::raw(
        s.id,
        part.backbone.iter().map(|&i| s.coords[i]).collect(),
    );
    let backbone = eigendecompose(&build_hamiltonian(&backbone_structure)?)?;

    let weights: Vec<f64> = (0..n)
        .map(|k| {
            part.backbone
                .iter()
                .map(|&i| full.component(i, k).powi(2))
                .sum()
        })
        .collect();
    let localized: Vec<usize> = (0..n).filter(|&k| weights[k] >= 0.5).collect();
    if localized.len() != part.backbone.len() {
        return Err(CoreError::AmbiguousLocalization {
            found: localized.len(),
            expected: part.backbone.len(),
            weights,
        });
    }
    let backbone_localized: Vec<f64> = localized
        .iter()
        .map(|&k| full.eigenvalues[k])
        .collect();
    let matched_shifts: Vec<f64> = backbone_localized
        .iter()
        .zip(&backbone.eigenvalues)
        .map(|(full_l, bare_l)| full_l - bare_l)
        .collect();
    Ok(SpectrumShift {
        full_eigenvalues: full.eigenvalues,
        backbone_eigenvalues: backbone.eigenvalues,
        localization_weights: weights,
        backbone_localized,
        matched_shifts,
    })
}

/// Result of the commensurability fit: 0 means the backbone-localized
/// eigenvalue differences are exact integer multiples of the fundamental.
#[derive(Debug, Clone, Copy)]
pub struct CommensurabilityFit {
    /// RMS residual of the differences from integer multiples, normalized
    /// by the fundamental.
    pub score: f64,
    /// Fitted fundamental frequency (a subharmonic of the physical one may
    /// be reported when both fit exactly).
    pub fundamental: f64,
}

/// Fits the backbone-localized eigenvalue differences to integer multiples
/// of a fundamental frequency scanned over `(2*pi/window) * [0.5, 8]`.
pub fn commensurability(shift: &SpectrumShift, window: f64) -> Result<CommensurabilityFit> {
    let lam = &shift.backbone_localized;
    if lam.len() < 2 {
        return Err(CoreError::InvalidInput(
            "need at least 2 backbone-localized eigenvalues".into(),
        ));
    }
    if !(window > 0.0) || !window.is_finite() {
        return Err(CoreError::InvalidInput(format!(
            "window must be positive and finite, got {window}"
        )));
    }
    let deltas: Vec<f64> = lam[1..].iter().map(|l| l - lam[0]).collect();
    let unit = 2.0 * std::f64::consts::PI / window;
    let (lo, hi) = (0.5 * unit, 8.0 * unit);

    let score_at = |omega: f64| -> f64 {
        let mut acc = 0.0;
        for d in &deltas {
            let r = d - (d / omega).round() * omega;
            acc += r * r;
        }
        (acc / deltas.len() as f64).sqrt() / omega
    };

    // Coarse scan, descending so exact ties resolve to the larger
    // fundamental, then a fixed-point refinement of the winning basin.
    let grid = 4096;
    let mut best_score = f64::INFINITY;
    let mut best_omega = hi;
    for g in (0..=grid).rev() {
        let omega = lo + (hi - lo) * g as f64 / grid as f64;
        let sc = score_at(omega);
        if sc < best_score {
            best_score = sc;
            best_omega = omega;
        }
    }
    for _ in 0..20 {
        let num: f64 = deltas.iter().map(|d| d * d).sum();
        let denom: f64 = deltas
            .iter()
            .map(|d| (d / best_omega).round() * d)
            .sum();
        if denom <= 0.0 {
            break;
        }
        let candidate = (num / denom).clamp(lo, hi);
        let sc = score_at(candidate);
        if sc < best_score {
            best_score = sc;
            best_omega = candidate;
        } else {
            break;
        }
    }
    Ok(CommensurabilityFit {
        score: best_score,
        fundamental: best_omega,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::trajectory;
    use crate::geometry::generate_structure;
    use approx::assert_abs_diff_eq;

    fn random_structure(n: usize, salt: u64) -> Structure {
        let mut rng = stream_rng(0xAB5E ^ salt, 0);
        generate_structure(&mut rng, n, salt).unwrap()
    }

    #[test]
    fn robustness_zero_side_is_exactly_zero() {
        let s = random_structure(5, 1);
        let opts = RobustnessOptions {
            trials: 50,
            side: 0.0,
            move_endpoints: true,
        };
        let r = robustness(&s, 7, &opts).unwrap();
        assert_eq!(r.delta_eps, 0.0);
        assert_eq!(r.std, 0.0);
    }

    #[test]
    fn robustness_is_deterministic_per_seed() {
        let s = random_structure(5, 2);
        let opts = RobustnessOptions {
            trials: 64,
            side: 0.05,
            move_endpoints: true,
        };
        let a = robustness(&s, 99, &opts).unwrap();
        let b = robustness(&s, 99, &opts).unwrap();
        assert_eq!(a.delta_eps, b.delta_eps);
        assert_eq!(a.std, b.std);
    }

    #[test]
    fn robustness_estimates_converge_with_trials() {
        // Monte-Carlo oracle: doubling the trial budget moves the estimate
        // by less than 3 combined standard errors.
        let s = random_structure(5, 3);
        let small = robustness(
            &s,
            11,
            &RobustnessOptions {
                trials: 1000,
                side: 0.05,
                move_endpoints: true,
            },
        )
        .unwrap();
        let large = robustness(
            &s,
            12,
            &RobustnessOptions {
                trials: 10_000,
                side: 0.05,
                move_endpoints: true,
            },
        )
        .unwrap();
        let se = (small.std.powi(2) / 1000.0 + large.std.powi(2) / 10_000.0).sqrt();
        assert!(
            (small.delta_eps - large.delta_eps).abs() < 3.0 * se,
            "{} vs {} (se {se})",
            small.delta_eps,
            large.delta_eps
        );
    }

    /// Four backbone sites near the diagonal plus a tight pair tucked away
    /// from it. The pair couples weakly to the backbone and stays dark.
    fn planted_pair_structure() -> Structure {
        Structure::raw(
            0,
            vec![
                [0.0, 0.0, 0.0],
                [0.35, 0.30, 0.35],  // backbone
                [0.65, 0.70, 0.65],  // backbone
                [0.95, 0.10, 0.15],  // pair member
                [0.95, 0.10, 0.35],  // pair member, 0.2 above
                [1.0, 1.0, 1.0],
            ],
        )
    }

    #[test]
    fn detect_modules_finds_planted_pair() {
        let s = planted_pair_structure();
        let traj = trajectory(&s, 512).unwrap();
        // The planted pair stays essentially unpopulated.
        let max_occ = |site: usize| {
            traj.occupations
                .iter()
                .map(|q| q[site])
                .fold(0.0f64, f64::max)
        };
        assert!(max_occ(3) < 0.01, "pair site occupied: {}", max_occ(3));
        assert!(max_occ(4) < 0.01, "pair site occupied: {}", max_occ(4));
        let part = detect_modules(&s, &traj, DEFAULT_LINK_CUT, DEFAULT_OCC_CUT);
        assert_eq!(part.inactive_groups, vec![vec![3, 4]]);
        assert_eq!(part.backbone, vec![0, 1, 2, 5]);
    }

    #[test]
    fn detect_modules_degenerate_cuts_find_nothing() {
        let s = planted_pair_structure();
        let traj = trajectory(&s, 256).unwrap();
        let no_link = detect_modules(&s, &traj, 0.0, DEFAULT_OCC_CUT);
        assert!(no_link.inactive_groups.is_empty());
        assert_eq!(no_link.backbone.len(), 6);
        let no_occ = detect_modules(&s, &traj, DEFAULT_LINK_CUT, 0.0);
        assert!(no_occ.inactive_groups.is_empty());
    }

    #[test]
    fn detect_modules_ignores_spread_out_sites() {
        // Roughly equidistant four-site geometry: no tight pairs.
        let s = Structure::raw(
            0,
            vec![
                [0.0, 0.0, 0.0],
                [0.38, 0.31, 0.30],
                [0.66, 0.70, 0.64],
                [1.0, 1.0, 1.0],
            ],
        );
        let traj = trajectory(&s, 256).unwrap();
        let part = detect_modules(&s, &traj, DEFAULT_LINK_CUT, DEFAULT_OCC_CUT);
        assert!(part.inactive_groups.is_empty());
        assert_eq!(part.backbone, vec![0, 1, 2, 3]);
    }

    #[test]
    fn ablate_empty_group_costs_nothing() {
        let s = random_structure(5, 4);
        let r = ablate(&s, &[vec![]]).unwrap();
        assert_eq!(r.per_group_loss, vec![0.0]);
        assert_eq!(r.joint_loss, 0.0);
    }

    #[test]
    fn ablate_joint_equals_direct_union_evaluation() {
        let s = planted_pair_structure();
        let r = ablate(&s, &[vec![3], vec![4]]).unwrap();
        let direct = ablate(&s, &[vec![3, 4]]).unwrap();
        assert_eq!(r.joint_loss, direct.per_group_loss[0]);
        assert_eq!(r.joint_loss, direct.joint_loss);
    }

    #[test]
    fn ablate_rejects_bad_groups() {
        let s = random_structure(5, 5);
        assert!(ablate(&s, &[vec![0]]).is_err());
        assert!(ablate(&s, &[vec![4]]).is_err());
        assert!(ablate(&s, &[vec![1], vec![1]]).is_err());
        assert!(ablate(&s, &[vec![9]]).is_err());
        // Removing every intermediate is allowed: the corner pair remains.
        let bare = ablate(&s, &[vec![1, 2, 3]]).unwrap();
        let corner_eps = (std::f64::consts::PI / 5.0).sin().powi(2);
        assert!((bare.eps_full - bare.joint_loss - corner_eps).abs() < 1e-9);
    }

    fn remote_pair_structure(pair_distance: f64) -> (Structure, ModulePartition) {
        let s = Structure::raw(
            0,
            vec![
                [0.0, 0.0, 0.0],
                [pair_distance, 0.0, 0.0],
                [pair_distance, 0.0, 0.2],
                [1.0, 1.0, 1.0],
            ],
        );
        let part = ModulePartition {
            backbone: vec![0, 3],
            inactive_groups: vec![vec![1, 2]],
        };
        (s, part)
    }

    #[test]
    fn decoupled_pair_shifts_vanish() {
        let (s, part) = remote_pair_structure(1e3);
        let shift = spectrum_shift(&s, &part).unwrap();
        assert_eq!(shift.matched_shifts.len(), 2);
        for d in &shift.matched_shifts {
            assert!(d.abs() < 1e-6, "shift {d}");
        }
        let r = ablate(&s, &[vec![1, 2]]).unwrap();
        assert!(r.joint_loss.abs() < 1e-6, "loss {}", r.joint_loss);
    }

    #[test]
    fn localization_weights_account_for_backbone_size() {
        let (s, part) = remote_pair_structure(2.0);
        let shift = spectrum_shift(&s, &part).unwrap();
        let total: f64 = shift.localization_weights.iter().sum();
        assert_abs_diff_eq!(total, part.backbone.len() as f64, epsilon = 1e-10);
        for w in &shift.localization_weights {
            assert!(!(0.4..=0.6).contains(w), "borderline weight {w}");
        }
    }

    #[test]
    fn shifts_match_second_order_perturbation_theory() {
        // Two-site backbone coupled to a tight off-diagonal pair. Oracle:
        // second-order shift sum_q |<b|H|q>|^2 / (lambda_b - lambda_q)
        // computed from the block structure of H. The pair levels sit far
        // from the backbone levels while the induced backbone shift stays
        // small against the backbone spacing, so the per-state formula
        // applies.
        let s = Structure::raw(
            0,
            vec![
                [0.0, 0.0, 0.0],
                [0.7, 0.0, 0.0],
                [0.7, 0.0, 0.15],
                [1.0, 1.0, 1.0],
            ],
        );
        let part = ModulePartition {
            backbone: vec![0, 3],
            inactive_groups: vec![vec![1, 2]],
        };
        let shift = spectrum_shift(&s, &part).unwrap();

        let h = build_hamiltonian(&s).unwrap();
        let backbone_sites = [0usize, 3];
        let pair_sites = [1usize, 2];
        let bare_b = eigendecompose(
            &build_hamiltonian(&Structure::raw(
                0,
                backbone_sites.iter().map(|&i| s.coords[i]).collect(),
            ))
            .unwrap(),
        )
        .unwrap();
        let bare_p = eigendecompose(
            &build_hamiltonian(&Structure::raw(
                0,
                pair_sites.iter().map(|&i| s.coords[i]).collect(),
            ))
            .unwrap(),
        )
        .unwrap();

        for (b_idx, lambda_b) in bare_b.eigenvalues.iter().enumerate() {
            let mut pt2 = 0.0;
            for (p_idx, lambda_p) in bare_p.eigenvalues.iter().enumerate() {
                let mut amp = 0.0;
                for (bi, &site_b) in backbone_sites.iter().enumerate() {
                    for (pi, &site_p) in pair_sites.iter().enumerate() {
                        amp += bare_b.component(bi, b_idx)
                            * h.at(site_b, site_p)
                            * bare_p.component(pi, p_idx);
                    }
                }
                pt2 += amp * amp / (lambda_b - lambda_p);
            }
            let measured = shift.matched_shifts[b_idx];
            assert!(
                (measured - pt2).abs() <= 0.1 * pt2.abs().max(1e-12),
                "state {b_idx}: measured {measured} vs PT2 {pt2}"
            );
        }
    }

    #[test]
    fn ambiguous_localization_is_an_error() {
        // Resonant geometry (found by scanning random 4-site draws): the
        // claimed two-site backbone hybridizes with the intermediates and
        // only one eigenvector reaches weight 0.5.
        let s = Structure::raw(
            0,
            vec![
                [0.0, 0.0, 0.0],
                [0.7870286797150415, 0.8437857892732996, 0.9881502637624153],
                [0.8852439392375372, 0.3097692492656672, 0.6040587364806266],
                [1.0, 1.0, 1.0],
            ],
        );
        let part = ModulePartition {
            backbone: vec![0, 3],
            inactive_groups: vec![vec![1, 2]],
        };
        match spectrum_shift(&s, &part) {
            Err(CoreError::AmbiguousLocalization {
                found, expected, weights,
            }) => {
                assert_eq!(found, 1);
                assert_eq!(expected, 2);
                assert_eq!(weights.len(), 4);
            }
            other => panic!("expected ambiguity diagnostic, got {other:?}"),
        }
    }

    #[test]
    fn spectrum_shift_requires_inactive_groups() {
        let s = random_structure(5, 6);
        let part = ModulePartition {
            backbone: (0..5).collect(),
            inactive_groups: vec![],
        };
        assert!(spectrum_shift(&s, &part).is_err());
    }

    fn fit_for(levels: &[f64], window: f64) -> CommensurabilityFit {
        let shift = SpectrumShift {
            full_eigenvalues: levels.to_vec(),
            backbone_eigenvalues: levels.to_vec(),
            localization_weights: vec![1.0; levels.len()],
            backbone_localized: levels.to_vec(),
            matched_shifts: vec![0.0; levels.len()],
        };
        commensurability(&shift, window).unwrap()
    }

    #[test]
    fn exact_ladder_is_perfectly_commensurate() {
        let fit = fit_for(&[0.0, 1.0, 2.0, 3.0], 2.0 * std::f64::consts::PI);
        assert!(fit.score < 1e-12, "score {}", fit.score);
        // All differences are integer multiples of the fitted fundamental.
        for d in [1.0, 2.0, 3.0] {
            let k = d / fit.fundamental;
            assert!((k - k.round()).abs() < 1e-9);
        }
    }

    #[test]
    fn incommensurate_levels_score_positive() {
        // With the window at 4.0 the scan floor exceeds the only common
        // divisor (0.5) of the differences {1, 2.5}.
        let fit = fit_for(&[0.0, 1.0, 2.5], 4.0);
        assert!(fit.score > 0.01, "score {}", fit.score);
    }
}
