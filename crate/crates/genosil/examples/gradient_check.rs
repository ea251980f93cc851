//! Verify the analytic gradients against central finite differences.
//!
//! The training step backpropagates one scalar loss through three networks
//! at once: imitation error through the policy and, via the latent sample,
//! into the encoder; reconstruction error through the decoder into the
//! encoder; and the KL term directly into the encoder heads. This example
//! perturbs random parameters from each block of the flat vector and
//! compares the analytic derivative with `(L(p+h) - L(p-h)) / 2h`.
//!
//! ```bash
//! cargo run --example gradient_check
//! ```

use genosil::latent::{decoder_kaiming, Encoder};
use genosil::nn::DenseNet;
use genosil::policy::PolicyNet;
use genosil::trainer::{genosil_batch_grads, total_loss, TrainSample};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

const C_DIM: usize = 7; // obstacle position + velocity + radius + goal (planar)
const S_DIM: usize = 3;
const A_DIM: usize = 2;
const Z_DIM: usize = 3;
const BATCH: usize = 4;
const BETA: f64 = 0.4;
const GAMMA: f64 = 0.7;

/// Recompute the weighted batch loss at the given flat parameter vector.
fn loss_at(
    encoder: &Encoder,
    decoder: &DenseNet,
    policy: &PolicyNet,
    params: &[f64],
    samples: &[TrainSample<'_>],
) -> f64 {
    let mut enc = encoder.clone();
    let mut dec = decoder.clone();
    let mut pol = policy.clone();
    let mut offset = enc.assign_params(params);
    offset += dec.assign_params(&params[offset..]);
    pol.assign_params(&params[offset..]);
    let (terms, _) = genosil_batch_grads(&enc, &dec, &pol, samples, BETA, GAMMA).unwrap();
    total_loss(terms.imitation, terms.kl, terms.reconstruction, BETA, GAMMA)
}

fn main() -> genosil::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let encoder = Encoder::kaiming(C_DIM, &[8, 8], Z_DIM, &mut rng);
    let decoder = decoder_kaiming(Z_DIM, &[8], C_DIM, &mut rng);
    let policy = PolicyNet::kaiming(S_DIM, Z_DIM, &[16], A_DIM, &mut rng);

    // A small random batch; eps is the unit-normal draw that the
    // reparameterized latent sample is built from.
    let draw = |rng: &mut ChaCha8Rng, n: usize, scale: f64| -> Vec<f64> {
        (0..n)
            .map(|_| rng.sample::<f64, _>(StandardNormal) * scale)
            .collect()
    };
    let mut storage = Vec::new();
    for _ in 0..BATCH {
        storage.push((
            draw(&mut rng, S_DIM, 2.0),
            draw(&mut rng, C_DIM, 0.5),
            draw(&mut rng, A_DIM, 1.0),
            draw(&mut rng, Z_DIM, 1.0),
        ));
    }
    let samples: Vec<TrainSample<'_>> = storage
        .iter()
        .map(|(s, c, a, e)| TrainSample {
            state: s,
            c_norm: c,
            action: a,
            eps: e,
        })
        .collect();

    let (terms, grad) = genosil_batch_grads(&encoder, &decoder, &policy, &samples, BETA, GAMMA)?;
    println!(
        "batch loss terms: imitation {:.4}, kl {:.4}, reconstruction {:.4}",
        terms.imitation, terms.kl, terms.reconstruction
    );

    let mut params = Vec::new();
    encoder.flatten_params_into(&mut params);
    decoder.flatten_params_into(&mut params);
    policy.flatten_params_into(&mut params);
    println!("parameter vector length: {}\n", params.len());

    let blocks = [
        ("encoder", 0, encoder.param_count()),
        (
            "decoder",
            encoder.param_count(),
            encoder.param_count() + decoder.param_count(),
        ),
        (
            "policy",
            encoder.param_count() + decoder.param_count(),
            params.len(),
        ),
    ];
    let h = 1e-6;
    println!(
        "{:>8} {:>8} {:>15} {:>15} {:>11}",
        "block", "index", "analytic", "numeric", "rel err"
    );
    let mut worst_rel = 0.0f64;
    for (name, lo, hi) in blocks {
        for _ in 0..8 {
            let i = rng.random_range(lo..hi);
            let mut p = params.clone();
            p[i] += h;
            let up = loss_at(&encoder, &decoder, &policy, &p, &samples);
            p[i] -= 2.0 * h;
            let down = loss_at(&encoder, &decoder, &policy, &p, &samples);
            let numeric = (up - down) / (2.0 * h);
            let rel = (grad[i] - numeric).abs() / grad[i].abs().max(numeric.abs()).max(1e-8);
            worst_rel = worst_rel.max(rel);
            println!(
                "{:>8} {:>8} {:>15.8} {:>15.8} {:>11.2e}",
                name, i, grad[i], numeric, rel
            );
        }
    }
    println!("\nworst relative error: {worst_rel:.2e}");
    assert!(worst_rel < 1e-4, "analytic and numeric gradients disagree");
    println!("analytic gradients agree with finite differences");
    Ok(())
}
