use amyloid_core::evaluation::{mann_whitney_auc, roc_auc};
use amyloid_core::Label;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// P(score_pos > score_neg) + P(tie) / 2 by explicit pair enumeration.
fn pair_count_auc(scores: &[f64], labels: &[Label]) -> f64 {
    let (mut wins, mut pairs) = (0.0, 0.0);
    for (i, &si) in scores.iter().enumerate() {
        for (j, &sj) in scores.iter().enumerate() {
            if labels[i] == Label::Pos && labels[j] == Label::Neg {
                pairs += 1.0;
                if si > sj {
                    wins += 1.0;
                } else if si == sj {
                    wins += 0.5;
                }
            }
        }
    }
    wins / pairs
}

#[test]
fn trapezoid_equals_rank_statistic() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for trial in 0..1000 {
        let n = rng.random_range(2..80);
        let levels = rng.random_range(1..12);
        let scores: Vec<f64> = (0..n).map(|_| rng.random_range(0..levels) as f64 * 0.25 - 1.0).collect();
        let mut labels: Vec<Label> = (0..n).map(|_| if rng.random_bool(0.4) { Label::Pos } else { Label::Neg }).collect();
        labels[0] = Label::Pos;
        labels[1] = Label::Neg;
        let (roc, trap) = roc_auc(&scores, &labels).unwrap();
        let mw = mann_whitney_auc(&scores, &labels).unwrap();
        let pc = pair_count_auc(&scores, &labels);
        assert!((trap - mw).abs() < 1e-12, "trial {trial}: {trap} vs {mw}");
        assert!((trap - pc).abs() < 1e-12, "trial {trial}: {trap} vs {pc}");
        assert_eq!(roc.points.first(), Some(&(0.0, 0.0)));
        assert_eq!(roc.points.last(), Some(&(1.0, 1.0)));
    }
}
