use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::EvalError;
use crate::Label;

/// Splits row indices into `k` disjoint folds with per-class counts as even as possible.
///
/// Each class is shuffled with its own seeded stream and dealt round-robin;
/// the negative class continues dealing where the positive class stopped so
/// fold sizes also stay within one of each other. Indices within a fold are
/// sorted.
pub fn stratified_kfold(labels: &[Label], k: usize, seed: u64) -> Result<Vec<Vec<usize>>, EvalError> {
    if k < 2 {
        return Err(EvalError::BadK(k));
    }
    let mut folds = vec![Vec::new(); k];
    let mut next = 0;
    for (stream, class) in [Label::Pos, Label::Neg].into_iter().enumerate() {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        if members.len() < k {
            return Err(EvalError::ClassTooSmall { class, count: members.len(), k });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream as u64);
        members.shuffle(&mut rng);
        for i in members {
            folds[next].push(i);
            next = (next + 1) % k;
        }
    }
    folds.iter_mut().for_each(|f| f.sort_unstable());
    Ok(folds)
}
