use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::Finding;
use crate::channels::{
    apply_via_choi, choi_of_channel, g_functionality_n, kraus_apply, post_select_exact, post_select_successes,
    KrausChannel,
};
use crate::error::Result;
use crate::qmat::random::{random_density, random_pure};
use crate::qmat::{matrix_trace_distance, trace_distance, ComplexMatrix, DensityMatrix};

/// `Tr(Υ)·G(ρᵀ, ∅, Υ/TrΥ)` for the depolarizing channel on `|+⟩`, against the
/// closed form `p|+⟩⟨+| + (1−p)I/2` written out entry by entry.
pub(super) fn choi_identity() -> Result<Finding> {
    let plus = DensityMatrix::named("+")?;
    let mut worst: f64 = 0.0;
    for p in [0.0, 0.3, 0.7, 1.0] {
        let choi = choi_of_channel(&KrausChannel::depolarizing(p)?);
        let g = g_functionality_n(&plus.transpose(), &choi.normalized()?, &[])?.scale_real(choi.trace());
        let expected = ComplexMatrix::from_real(2, 2, &[0.5, 0.5 * p, 0.5 * p, 0.5])?;
        worst = worst.max(matrix_trace_distance(&g, &expected)?);
    }
    Ok(Finding::new(worst <= 1e-12, format!("max trace distance {worst:.2e} over p in {{0, .3, .7, 1}} (tol 1e-12)")))
}

pub(super) fn choi_round_trip() -> Result<Finding> {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC40);
    let mut worst: f64 = 0.0;
    for i in 0..50 {
        let n = 1 + i % 2;
        let channel = KrausChannel::random(n, n, 1 + i % 4, &mut rng);
        let choi = choi_of_channel(&channel);
        for j in 0..10 {
            let rho = random_density(n, 1 + j % (1 << n), &mut rng);
            worst = worst.max(trace_distance(&apply_via_choi(&choi, &rho)?, &kraus_apply(&channel, &rho)?)?);
        }
    }
    Ok(Finding::new(worst <= 1e-10, format!("50 channels x 10 states, max trace distance {worst:.2e} (tol 1e-10)")))
}

/// For a trace-preserving channel on `d_in` dimensions `Tr(Υ) = d_in`, so the
/// success rate should be `1/d_in`.
pub(super) fn post_selection_rate() -> Result<Finding> {
    const ATTEMPTS: u64 = 10_000;
    let mut rng = ChaCha8Rng::seed_from_u64(0xC41);
    let cases: Vec<(&str, KrausChannel, DensityMatrix, DensityMatrix)> = vec![
        ("identity(1)", KrausChannel::identity(1), random_pure(1, &mut rng), DensityMatrix::empty()),
        ("depolarizing(0.3)", KrausChannel::depolarizing(0.3)?, random_pure(1, &mut rng), DensityMatrix::empty()),
        ("depolarizing(1)", KrausChannel::depolarizing(1.0)?, random_density(1, 2, &mut rng), DensityMatrix::empty()),
        ("identity(2)", KrausChannel::identity(2), random_pure(1, &mut rng), random_pure(1, &mut rng)),
    ];
    let mut passed = true;
    let mut parts = Vec::new();
    for (name, channel, rho_a, rho_b) in &cases {
        let choi = choi_of_channel(channel);
        let expected = 1.0 / (1u64 << channel.in_qubits()) as f64;
        let exact = post_select_exact(&choi, rho_a, rho_b)?.success_probability;
        let hits = post_select_successes(&choi, rho_a, rho_b, ATTEMPTS, &mut rng)?;
        let freq = hits as f64 / ATTEMPTS as f64;
        let sigma = (expected * (1.0 - expected) / ATTEMPTS as f64).sqrt();
        let z = (freq - expected).abs() / sigma;
        passed &= (exact - expected).abs() <= 1e-12 && z <= 5.0;
        parts.push(format!("{name} {freq:.4} vs {expected:.4} ({z:.1}σ)"));
    }
    Ok(Finding::new(passed, parts.join(", ")))
}
