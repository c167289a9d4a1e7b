//! Deterministic Monte-Carlo sampler for mixture-elliptic P&L, used as the
//! independent cross-check for the analytic VaR/ES engines.
//!
//! Sampling is chunked: chunk `c` draws from its own counter-derived RNG
//! stream `(seed, c)`, so serial and parallel runs produce bit-identical
//! batches regardless of worker count.

use std::fs;
use std::io::{Read as _, Write as _};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, ChiSquared, Distribution, StandardNormal};
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::model::{GeneratorKind, Portfolio, ValidatedModel};

/// Draws per RNG stream; the last chunk may be shorter.
pub const CHUNK: usize = 65_536;
/// Bootstrap replicates for the ES standard error.
pub const BOOTSTRAP_RESAMPLES: usize = 200;
// RNG stream reserved for the bootstrap walk (never a chunk index)
const BOOTSTRAP_STREAM: u64 = u64::MAX;

const MAGIC: &[u8; 16] = b"MIXRISK-BATCH-01";

/// A simulated P&L sample plus the recipe that reproduces it.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    /// P&L per draw (losses negative).
    pub pnl: Vec<f64>,
    pub seed: u64,
    pub chunks: usize,
    /// Digest of the generating model and portfolio; all-zero for batches
    /// loaded from disk (the dump header stores only magic, N, seed).
    pub model_hash: [u8; 32],
}

/// A point estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
}

/// SHA-256 digest of the sampling configuration (model + portfolio), over a
/// canonical little-endian byte encoding.
pub fn model_digest(model: &ValidatedModel<f64>, p: &Portfolio<f64>) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(b"MIXRISK-MODEL-01");
    h.update((model.dimension() as u64).to_le_bytes());
    h.update((model.components().len() as u64).to_le_bytes());
    for c in model.components() {
        h.update(c.weight.to_le_bytes());
        for m in &c.mean {
            h.update(m.to_le_bytes());
        }
        let n = c.scale.dim();
        for i in 0..n {
            for j in 0..n {
                h.update(c.scale.get(i, j).to_le_bytes());
            }
        }
        match &c.generator {
            GeneratorKind::Normal => h.update([0u8]),
            GeneratorKind::StudentT { nu } => {
                h.update([1u8]);
                h.update(nu.to_le_bytes());
            }
            // the function itself is not digestible; tag only
            GeneratorKind::Custom { .. } => h.update([2u8]),
        }
    }
    for d in &p.delta {
        h.update(d.to_le_bytes());
    }
    h.update(p.theta.to_le_bytes());
    h.update(p.horizon.to_le_bytes());
    h.finalize().into()
}

// per-component quantities the sampler needs, precomputed once
struct SamplerComponent {
    cum_weight: f64,
    mu_pnl: f64,        // delta · mu
    proj: Vec<f64>,     // Lᵗ delta, so delta·(L eps) = proj·eps
    nu: Option<f64>,    // Some for Student, None for normal
}

/// Draw `n_draws` P&L samples from the mixture law: pick component j with
/// probability β_j, draw z ~ N(0, Σ_j) via the Cholesky factor, divide by
/// √(χ²_ν/ν) for Student components, and set P&L = δ·x − Θ·t. Θ·t enters
/// with a minus sign because it is supplied in the loss orientation — the
/// analytic engines add it to VaR/ES — keeping empirical and analytic
/// figures comparable for any Θ.
pub fn sample_mixture(
    model: &ValidatedModel<f64>,
    p: &Portfolio<f64>,
    n_draws: usize,
    seed: u64,
) -> Result<SampleBatch> {
    if n_draws == 0 {
        return Err(Error::domain("sample_mixture", "n_draws must be at least 1"));
    }
    let dim = model.dimension();
    if p.delta.len() != dim {
        return Err(Error::DimensionMismatch {
            message: format!(
                "delta length {} does not match model dimension {dim}",
                p.delta.len()
            ),
        });
    }

    let mut cum = 0.0;
    let mut comps = Vec::with_capacity(model.components().len());
    for (j, c) in model.components().iter().enumerate() {
        let nu = match &c.generator {
            GeneratorKind::StudentT { nu } => Some(*nu),
            GeneratorKind::Normal => None,
            GeneratorKind::Custom { .. } => {
                return Err(Error::Unsupported(
                    "custom radial generators have no generic sampler".into(),
                ))
            }
        };
        cum += c.weight;
        let mut proj = vec![0.0; dim];
        let lower = model.factor(j).lower();
        for col in 0..dim {
            // (Lᵗ delta)[col] = Σ_row L[row][col] · delta[row]
            for row in col..dim {
                proj[col] += lower.get(row, col) * p.delta[row];
            }
        }
        comps.push(SamplerComponent {
            cum_weight: cum,
            mu_pnl: c.mean.iter().zip(&p.delta).map(|(m, d)| m * d).sum(),
            proj,
            nu,
        });
    }

    let carry = p.carry();
    let chunks = n_draws.div_ceil(CHUNK);
    let pnl: Vec<f64> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let size = if c == chunks - 1 { n_draws - c * CHUNK } else { CHUNK };
            sample_chunk(&comps, dim, carry, seed, c as u64, size)
        })
        .collect::<Result<Vec<Vec<f64>>>>()?
        .concat();

    Ok(SampleBatch { pnl, seed, chunks, model_hash: model_digest(model, p) })
}

fn sample_chunk(
    comps: &[SamplerComponent],
    dim: usize,
    carry: f64,
    seed: u64,
    stream: u64,
    size: usize,
) -> Result<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let chi: Vec<Option<ChiSquared<f64>>> = comps
        .iter()
        .map(|c| {
            c.nu.map(|nu| {
                ChiSquared::new(nu)
                    .map_err(|e| Error::domain("sample_mixture", format!("chi-square: {e}")))
            })
            .transpose()
        })
        .collect::<Result<_>>()?;

    let mut out = Vec::with_capacity(size);
    for _ in 0..size {
        let u: f64 = rng.gen();
        let j = comps
            .iter()
            .position(|c| u < c.cum_weight)
            .unwrap_or(comps.len() - 1);
        let mut z = 0.0;
        for k in 0..dim {
            let eps: f64 = rng.sample(StandardNormal);
            z += comps[j].proj[k] * eps;
        }
        if let Some(dist) = &chi[j] {
            let nu = comps[j].nu.unwrap();
            let w = dist.sample(&mut rng) / nu;
            z /= w.sqrt();
        }
        // Θ·t is supplied in the loss orientation (it adds to the analytic
        // VaR/ES), so it enters the P&L with a minus sign
        out.push(comps[j].mu_pnl + z - carry);
    }
    Ok(out)
}

fn check_tail(n: usize, alpha: f64) -> Result<usize> {
    if !(alpha > 0.0 && alpha < 0.5) {
        return Err(Error::domain(
            "empirical tail",
            format!("alpha must lie in (0, 0.5), got {alpha}"),
        ));
    }
    let k = (alpha * n as f64).ceil() as usize;
    if k < 100 {
        return Err(Error::TailSampleTooSmall { effective: k as f64 });
    }
    Ok(k)
}

fn sorted_pnl(batch: &SampleBatch) -> Vec<f64> {
    let mut s = batch.pnl.clone();
    s.sort_unstable_by(f64::total_cmp);
    s
}

/// Empirical VaR: −(lower order statistic at index ⌈αN⌉), no interpolation.
/// The standard error is the order-statistic asymptotic
/// √(α(1−α)/N)/f̂ with f̂ a symmetric finite-difference density estimate at
/// the quantile (window ⌈√N⌉ order statistics each side).
pub fn empirical_var(batch: &SampleBatch, alpha: f64) -> Result<Estimate> {
    let n = batch.pnl.len();
    let k = check_tail(n, alpha)?;
    let sorted = sorted_pnl(batch);
    let value = -sorted[k - 1];

    let m = (n as f64).sqrt().ceil() as usize;
    let lo = (k - 1).saturating_sub(m);
    let hi = (k - 1 + m).min(n - 1);
    let width = sorted[hi] - sorted[lo];
    let std_error = if width > 0.0 {
        let density = ((hi - lo) as f64 / n as f64) / width;
        (alpha * (1.0 - alpha) / n as f64).sqrt() / density
    } else {
        0.0 // point mass at the quantile
    };
    Ok(Estimate { value, std_error })
}

/// Empirical ES: mean of −P&L over the worst ⌈αN⌉ draws. The standard error
/// is a nonparametric bootstrap over [`BOOTSTRAP_RESAMPLES`] resamples; each
/// resample's tail is generated directly by a sequential-binomial walk over
/// the sorted sample, so no full N-point resample is materialized.
pub fn empirical_es(batch: &SampleBatch, alpha: f64) -> Result<Estimate> {
    let n = batch.pnl.len();
    let k = check_tail(n, alpha)?;
    let sorted = sorted_pnl(batch);
    let value = -sorted[..k].iter().sum::<f64>() / k as f64;

    let mut rng = ChaCha8Rng::seed_from_u64(batch.seed);
    rng.set_stream(BOOTSTRAP_STREAM);
    let mut replicates = Vec::with_capacity(BOOTSTRAP_RESAMPLES);
    for _ in 0..BOOTSTRAP_RESAMPLES {
        // multinomial resample counts, realized sequentially: the count at
        // sorted position i is Binomial(draws left, 1/(positions left))
        let mut draws_left = n as u64;
        let mut need = k as u64;
        let mut acc = 0.0;
        for (i, &x) in sorted.iter().enumerate() {
            if need == 0 || draws_left == 0 {
                break;
            }
            let p = 1.0 / (n - i) as f64;
            let c = Binomial::new(draws_left, p)
                .map_err(|e| Error::domain("empirical_es", format!("binomial: {e}")))?
                .sample(&mut rng);
            let take = c.min(need);
            acc += x * take as f64;
            need -= take;
            draws_left -= c;
        }
        replicates.push(-acc / k as f64);
    }
    let mean = replicates.iter().sum::<f64>() / replicates.len() as f64;
    let var = replicates.iter().map(|r| (r - mean).powi(2)).sum::<f64>()
        / (replicates.len() - 1) as f64;
    Ok(Estimate { value, std_error: var.sqrt() })
}

/// Dump a batch: 32-byte header (16-byte magic, N as u64 LE, seed as u64 LE)
/// followed by N little-endian f64 P&L values.
pub fn write_batch(batch: &SampleBatch, path: &Path) -> Result<()> {
    let mut f = fs::File::create(path)?;
    f.write_all(MAGIC)?;
    f.write_all(&(batch.pnl.len() as u64).to_le_bytes())?;
    f.write_all(&batch.seed.to_le_bytes())?;
    let mut buf = Vec::with_capacity(batch.pnl.len() * 8);
    for x in &batch.pnl {
        buf.extend_from_slice(&x.to_le_bytes());
    }
    f.write_all(&buf)?;
    Ok(())
}

/// Load a batch written by [`write_batch`]. The digest is not stored in the
/// dump, so `model_hash` comes back all-zero.
pub fn read_batch(path: &Path) -> Result<SampleBatch> {
    let mut f = fs::File::open(path)?;
    let mut header = [0u8; 32];
    f.read_exact(&mut header)?;
    if &header[..16] != MAGIC {
        return Err(Error::Parse("batch file has the wrong magic header".into()));
    }
    let n = u64::from_le_bytes(header[16..24].try_into().unwrap()) as usize;
    let seed = u64::from_le_bytes(header[24..32].try_into().unwrap());
    let mut payload = Vec::new();
    f.read_to_end(&mut payload)?;
    if payload.len() != n * 8 {
        return Err(Error::Parse(format!(
            "batch payload holds {} bytes, expected {}",
            payload.len(),
            n * 8
        )));
    }
    let pnl = payload
        .chunks_exact(8)
        .map(|b| f64::from_le_bytes(b.try_into().unwrap()))
        .collect();
    Ok(SampleBatch { pnl, seed, chunks: n.div_ceil(CHUNK), model_hash: [0u8; 32] })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{EllipticComponent, Matrix, MixtureModel};
    use approx::assert_abs_diff_eq;

    fn one_component(gen: GeneratorKind<f64>, mean: f64) -> ValidatedModel<f64> {
        MixtureModel {
            components: vec![EllipticComponent {
                weight: 1.0,
                mean: vec![mean],
                scale: Matrix::identity(1),
                generator: gen,
            }],
            dimension: 1,
        }
        .validate()
        .unwrap()
    }

    fn unit_portfolio() -> Portfolio<f64> {
        Portfolio::new(vec![1.0]).unwrap()
    }

    #[test]
    fn replay_is_bit_exact_and_thread_independent() {
        let model = one_component(GeneratorKind::StudentT { nu: 5.0 }, 0.0);
        let p = unit_portfolio();
        let a = sample_mixture(&model, &p, 150_000, 7).unwrap();
        let b = sample_mixture(&model, &p, 150_000, 7).unwrap();
        assert_eq!(a.pnl, b.pnl);
        assert_eq!(a.model_hash, b.model_hash);
        assert_eq!(a.chunks, 3);

        let serial = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| sample_mixture(&model, &p, 150_000, 7).unwrap());
        assert_eq!(a.pnl, serial.pnl);

        let c = sample_mixture(&model, &p, 150_000, 8).unwrap();
        assert_ne!(a.pnl, c.pnl);
    }

    #[test]
    fn normal_sample_mean_obeys_lln() {
        let n = 262_144;
        let model = one_component(GeneratorKind::Normal, 0.3);
        let batch = sample_mixture(&model, &unit_portfolio(), n, 42).unwrap();
        let mean = batch.pnl.iter().sum::<f64>() / n as f64;
        assert_abs_diff_eq!(mean, 0.3, epsilon = 4.0 / (n as f64).sqrt());
    }

    #[test]
    fn student_sample_variance_matches_moment_identity() {
        // Var = nu/(nu-2) for scale 1
        let n = 400_000;
        let model = one_component(GeneratorKind::StudentT { nu: 5.0 }, 0.0);
        let batch = sample_mixture(&model, &unit_portfolio(), n, 42).unwrap();
        let mean = batch.pnl.iter().sum::<f64>() / n as f64;
        let var = batch.pnl.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
        assert!((var - 5.0 / 3.0).abs() / (5.0 / 3.0) < 0.05, "variance {var}");
    }

    #[test]
    fn component_frequencies_match_weights() {
        // well-separated means let the sign of the draw identify the component
        let mk = |mean: f64, w: f64| EllipticComponent {
            weight: w,
            mean: vec![mean],
            scale: Matrix::identity(1),
            generator: GeneratorKind::Normal,
        };
        let model = MixtureModel {
            components: vec![mk(-10.0, 0.3), mk(10.0, 0.7)],
            dimension: 1,
        }
        .validate()
        .unwrap();
        let n = 200_000;
        let batch = sample_mixture(&model, &unit_portfolio(), n, 1).unwrap();
        let frac = batch.pnl.iter().filter(|&&x| x < 0.0).count() as f64 / n as f64;
        assert_abs_diff_eq!(frac, 0.3, epsilon = 4.0 * (0.3f64 * 0.7 / n as f64).sqrt());
    }

    #[test]
    fn carry_shifts_every_draw_toward_larger_losses() {
        let model = one_component(GeneratorKind::Normal, 0.0);
        let plain = sample_mixture(&model, &unit_portfolio(), 4000, 3).unwrap();
        let carry = Portfolio::with_theta(vec![1.0], 0.5, 2.0).unwrap();
        let shifted = sample_mixture(&model, &carry, 4000, 3).unwrap();
        // Θ·t = 1 in the loss orientation: P&L drops by 1, so the empirical
        // VaR rises by 1, matching the analytic Θ·t term
        for (a, b) in plain.pnl.iter().zip(&shifted.pnl) {
            assert_abs_diff_eq!(a - b, 1.0, epsilon = 1e-12);
        }
        let v_plain = empirical_var(&plain, 0.05).unwrap().value;
        let v_shift = empirical_var(&shifted, 0.05).unwrap().value;
        assert_abs_diff_eq!(v_shift - v_plain, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn empirical_var_and_es_on_constant_batch() {
        let batch = SampleBatch {
            pnl: vec![-2.5; 100_000],
            seed: 0,
            chunks: 2,
            model_hash: [0; 32],
        };
        let var = empirical_var(&batch, 0.01).unwrap();
        assert_eq!(var.value, 2.5);
        assert_eq!(var.std_error, 0.0);
        let es = empirical_es(&batch, 0.01).unwrap();
        assert_eq!(es.value, 2.5);
    }

    #[test]
    fn empirical_var_matches_known_quantiles() {
        let n = 400_000;
        let normal = one_component(GeneratorKind::Normal, 0.0);
        let batch = sample_mixture(&normal, &unit_portfolio(), n, 42).unwrap();
        let est = empirical_var(&batch, 0.01).unwrap();
        assert!(
            (est.value - 2.3263478740408408).abs() <= 3.0 * est.std_error,
            "normal VaR {} ± {}",
            est.value,
            est.std_error
        );

        let t3 = one_component(GeneratorKind::StudentT { nu: 3.0 }, 0.0);
        let batch = sample_mixture(&t3, &unit_portfolio(), n, 42).unwrap();
        let est = empirical_var(&batch, 0.01).unwrap();
        assert!(
            (est.value - 4.540702858471386).abs() <= 3.0 * est.std_error,
            "t3 VaR {} ± {}",
            est.value,
            est.std_error
        );
    }

    #[test]
    fn empirical_es_matches_normal_closed_form() {
        let n = 400_000;
        let normal = one_component(GeneratorKind::Normal, 0.0);
        let batch = sample_mixture(&normal, &unit_portfolio(), n, 11).unwrap();
        let est = empirical_es(&batch, 0.05).unwrap();
        assert!(
            (est.value - 2.0627128075074253).abs() <= 3.0 * est.std_error,
            "normal ES {} ± {}",
            est.value,
            est.std_error
        );
        let var = empirical_var(&batch, 0.05).unwrap();
        assert!(est.value >= var.value);
    }

    #[test]
    fn small_tails_are_rejected() {
        let batch = SampleBatch { pnl: vec![0.0; 1000], seed: 0, chunks: 1, model_hash: [0; 32] };
        match empirical_var(&batch, 0.05) {
            Err(Error::TailSampleTooSmall { effective }) => assert_eq!(effective, 50.0),
            other => panic!("expected tail-sample error, got {other:?}"),
        }
    }

    #[test]
    fn custom_generators_are_not_sampled() {
        let g = std::sync::Arc::new(|u: f64| (-u / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt());
        let model = MixtureModel {
            components: vec![EllipticComponent {
                weight: 1.0,
                mean: vec![0.0],
                scale: Matrix::identity(1),
                generator: GeneratorKind::Custom { g },
            }],
            dimension: 1,
        }
        .validate()
        .unwrap();
        assert!(matches!(
            sample_mixture(&model, &unit_portfolio(), 1000, 0),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn batch_round_trips_through_disk() {
        let model = one_component(GeneratorKind::StudentT { nu: 4.0 }, 0.1);
        let batch = sample_mixture(&model, &unit_portfolio(), 5000, 99).unwrap();
        let path = std::env::temp_dir().join(format!("mixrisk-batch-{}.bin", std::process::id()));
        write_batch(&batch, &path).unwrap();
        let loaded = read_batch(&path).unwrap();
        std::fs::remove_file(&path).ok();
        assert_eq!(batch.pnl, loaded.pnl);
        assert_eq!(batch.seed, loaded.seed);
        assert_eq!(batch.chunks, loaded.chunks);
        assert_eq!(loaded.model_hash, [0u8; 32]);
    }

    #[test]
    fn corrupt_magic_is_rejected() {
        let path = std::env::temp_dir().join(format!("mixrisk-bad-{}.bin", std::process::id()));
        std::fs::write(&path, b"not a batch file, just thirty-two bytes!").unwrap();
        let err = read_batch(&path).unwrap_err();
        std::fs::remove_file(&path).ok();
        assert!(matches!(err, Error::Parse(_)));
    }
}
