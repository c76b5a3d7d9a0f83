//! Reductions of a training history.

use super::trainer::EpochRecord;

/// Epoch of the best test trace acceptance (earliest on ties) times the
/// training-set size. `None` for an empty history.
pub fn sample_complexity(history: &[EpochRecord], train_set_size: usize) -> Option<u64> {
    let mut best: Option<&EpochRecord> = None;
    for r in history {
        if best.is_none_or(|b| r.test_trace_acc > b.test_trace_acc) {
            best = Some(r);
        }
    }
    best.map(|b| b.epoch as u64 * train_set_size as u64)
}

/// First recorded epoch with test trace acceptance at or above `threshold`.
pub fn convergence_epoch(history: &[EpochRecord], threshold: f64) -> Option<usize> {
    history
        .iter()
        .find(|r| r.test_trace_acc >= threshold)
        .map(|r| r.epoch)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(epoch: usize, acc: f64) -> EpochRecord {
        EpochRecord {
            epoch,
            loss: 0.1,
            test_step_acc: acc,
            test_trace_acc: acc,
        }
    }

    #[test]
    fn best_epoch_times_train_size() {
        let h = [rec(0, 0.1), rec(100, 0.5), rec(400, 1.0), rec(500, 1.0)];
        assert_eq!(sample_complexity(&h, 9000), Some(3_600_000));
        assert_eq!(
            sample_complexity(&[rec(0, 0.3), rec(100, 0.2)], 9000),
            Some(0)
        );
        assert_eq!(
            sample_complexity(&[rec(0, 0.3), rec(100, 0.7), rec(200, 0.7)], 10),
            Some(1000)
        );
        assert_eq!(sample_complexity(&[], 10), None);
    }

    #[test]
    fn first_crossing() {
        let h = [rec(0, 0.1), rec(100, 0.5), rec(300, 0.92), rec(400, 0.95)];
        assert_eq!(convergence_epoch(&h, 0.9), Some(300));
        assert_eq!(convergence_epoch(&h, 0.99), None);
        assert_eq!(convergence_epoch(&h, 0.0), Some(0));
    }
}
