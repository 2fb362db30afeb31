/// Fraction of the data an SRD epoch backpropagates: `γ^epoch` before the
/// revision epochs, `1` during them.
pub fn srd_fraction(gamma: f64, epoch: usize, epochs: usize, revision: usize) -> f64 {
    if epoch + revision > epochs {
        1.0
    } else {
        gamma.powi(epoch as i32)
    }
}

/// `⌊srd_fraction · N⌋`.
pub fn srd_epoch_count(
    gamma: f64,
    epoch: usize,
    epochs: usize,
    revision: usize,
    n: usize,
) -> usize {
    let k = (srd_fraction(gamma, epoch, epochs, revision) * n as f64).floor() as usize;
    k.min(n)
}

/// Dataset-granularity effective epochs: `R + Σ_{e=1}^{E-R} γ^e`.
pub fn srd_effective_epochs_closed_form(gamma: f64, epochs: usize, revision: usize) -> f64 {
    let dropout_epochs = epochs.saturating_sub(revision);
    let sum = if gamma == 1.0 {
        dropout_epochs as f64
    } else {
        gamma * (1.0 - gamma.powi(dropout_epochs as i32)) / (1.0 - gamma)
    };
    revision.min(epochs) as f64 + sum
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fraction_is_gamma_to_the_epoch() {
        assert_eq!(srd_fraction(0.95, 1, 30, 1), 0.95);
        assert!((srd_fraction(0.95, 2, 30, 1) - 0.9025).abs() < 1e-15);
        assert_eq!(srd_fraction(0.95, 30, 30, 1), 1.0);
        assert_eq!(srd_fraction(0.5, 3, 10, 3), 0.125);
        assert_eq!(srd_fraction(0.5, 8, 10, 3), 1.0);
    }

    #[test]
    fn fraction_matches_epoch_scan() {
        for &(gamma, epochs, revision) in &[(0.95, 30, 1), (0.8, 12, 4), (0.99, 200, 1)] {
            let mut r = 1.0;
            for epoch in 1..=epochs {
                r *= gamma;
                let expected = if epoch > epochs - revision { 1.0 } else { r };
                let got = srd_fraction(gamma, epoch, epochs, revision);
                assert!((got - expected).abs() < 1e-12, "epoch {epoch}");
            }
        }
    }

    #[test]
    fn closed_form_matches_direct_sum() {
        for &(gamma, epochs, revision) in &[(0.95, 30, 1), (0.98, 800, 0), (0.7, 5, 2)] {
            let direct: f64 = (1..=epochs)
                .map(|e| srd_fraction(gamma, e, epochs, revision))
                .sum();
            let closed = srd_effective_epochs_closed_form(gamma, epochs, revision);
            assert!(
                (direct - closed).abs() < 1e-9,
                "{gamma} {epochs} {revision}"
            );
        }
    }

    #[test]
    fn table_anchor_thirty_epochs() {
        let ee = srd_effective_epochs_closed_form(0.95, 30, 1);
        assert!((ee - 15.71).abs() < 0.01, "{ee}");
    }

    #[test]
    fn long_schedule_with_one_revision_epoch() {
        let ee = srd_effective_epochs_closed_form(0.98, 800, 1);
        assert!((ee - 50.0).abs() < 1e-3, "{ee}");
    }

    #[test]
    fn no_dropout_limit() {
        assert_eq!(srd_effective_epochs_closed_form(1.0, 17, 1), 17.0);
        let near = srd_effective_epochs_closed_form(1.0 - 1e-12, 17, 1);
        assert!((near - 17.0).abs() < 1e-6);
    }
}
