//! Synthetic separable instances `X = W·H`.
//!
//! All APIs index rows from 0. The Hilbert entry formula `1/(i + j − 1)` is stated
//! with 1-based `i, j`; in 0-based terms it is `1/(i + j + 1)`.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::matrix::DataMatrix;
use crate::rng::{substream, tag};

/// A separable matrix together with the factors that produced it.
#[derive(Debug, Clone)]
pub struct SeparableInstance {
    pub x: DataMatrix,
    pub w: DataMatrix,
    pub h: DataMatrix,
    pub true_extreme_indices: Vec<usize>,
}

impl SeparableInstance {
    /// `‖X − W·H‖_F / ‖X‖_F`.
    pub fn reconstruction_error(&self) -> f64 {
        let wh = self.w.matmul(&self.h).expect("factor shapes agree");
        let norm = self.x.frobenius_norm();
        let dist = self.x.frobenius_distance(&wh).expect("shapes agree");
        if norm > 0.0 {
            dist / norm
        } else {
            dist
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Generator {
    Uniform,
    Hilbert,
}

impl std::str::FromStr for Generator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(Generator::Uniform),
            "hilbert" => Ok(Generator::Hilbert),
            other => Err(Error::arg(format!("unknown generator {other:?}"))),
        }
    }
}

impl Generator {
    pub fn generate(self, n: usize, p: usize, k: usize, seed: u64) -> Result<SeparableInstance> {
        match self {
            Generator::Uniform => gen_uniform_separable(n, p, k, seed),
            Generator::Hilbert => gen_hilbert_separable(n, p, k, seed),
        }
    }
}

fn check_dims(n: usize, p: usize, k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::arg("k must be at least 1"));
    }
    if k > n || k > p {
        return Err(Error::arg(format!("k = {k} must not exceed n = {n} or p = {p}")));
    }
    Ok(())
}

/// `W` with the `k × k` identity on top and uniform rows normalized to sum to one below.
fn mixing_weights(n: usize, k: usize, seed: u64) -> DataMatrix {
    let mut rng = substream(seed, tag::GENERATOR, 1);
    let mut values = vec![0.0; n * k];
    for i in 0..k {
        values[i * k + i] = 1.0;
    }
    for row in values[k * k..].chunks_exact_mut(k) {
        row.iter_mut().for_each(|v| *v = rng.gen::<f64>());
        let sum: f64 = row.iter().sum();
        if sum > 0.0 {
            row.iter_mut().for_each(|v| *v /= sum);
        } else {
            row.iter_mut().for_each(|v| *v = 1.0 / k as f64);
        }
    }
    DataMatrix::from_vec(n, k, values).expect("weights are finite")
}

fn assemble(w: DataMatrix, h: DataMatrix, k: usize) -> Result<SeparableInstance> {
    let mut x = w.matmul(&h)?;
    // identity rows of W reproduce the archetypes bit for bit
    let mut values = x.clone().into_array();
    for i in 0..k {
        values.row_mut(i).assign(&h.row(i));
    }
    x = DataMatrix::new(values)?;
    Ok(SeparableInstance {
        x,
        w,
        h,
        true_extreme_indices: (0..k).collect(),
    })
}

/// `H` with i.i.d. uniform `[0, 1)` entries.
pub fn gen_uniform_separable(n: usize, p: usize, k: usize, seed: u64) -> Result<SeparableInstance> {
    check_dims(n, p, k)?;
    let mut rng = substream(seed, tag::GENERATOR, 0);
    let h_values: Vec<f64> = (0..k * p).map(|_| rng.gen::<f64>()).collect();
    let h = DataMatrix::from_vec(k, p, h_values)?;
    assemble(mixing_weights(n, k, seed), h, k)
}

/// First `k` rows of the `p × p` Hilbert matrix.
pub fn hilbert_rows(k: usize, p: usize) -> DataMatrix {
    let values = (0..k)
        .flat_map(|i| (0..p).map(move |j| 1.0 / (i + j + 1) as f64))
        .collect();
    DataMatrix::from_vec(k, p, values).expect("Hilbert entries are finite")
}

/// `H` = first `k` rows of the `p × p` Hilbert matrix; `W` as for the uniform generator.
pub fn gen_hilbert_separable(n: usize, p: usize, k: usize, seed: u64) -> Result<SeparableInstance> {
    check_dims(n, p, k)?;
    assemble(mixing_weights(n, k, seed), hilbert_rows(k, p), k)
}

/// Noisy pairs instance.
#[derive(Debug, Clone)]
pub struct NoisyPairs {
    /// Observed `W·H + N`.
    pub x: DataMatrix,
    /// Noise-free `W·H`.
    pub clean: DataMatrix,
    pub w: DataMatrix,
    pub h: DataMatrix,
}

/// Mixing matrix `[I; W₂]` of shape `(k + C(k,2)) × k`: the identity, then one row per
/// pair `a < b` (lexicographic) with `1/2` in columns `a` and `b`.
pub fn pair_weights(k: usize) -> DataMatrix {
    let pairs = k * (k - 1) / 2;
    let mut values = vec![0.0; (k + pairs) * k];
    for i in 0..k {
        values[i * k + i] = 1.0;
    }
    let mut row = k;
    for a in 0..k {
        for b in a + 1..k {
            values[row * k + a] = 0.5;
            values[row * k + b] = 0.5;
            row += 1;
        }
    }
    DataMatrix::from_vec(k + pairs, k, values).expect("finite")
}

/// `W·H + ε·N` with `Wᵀ = [I W₂]`, uniform `H` (`k × p`) and standard normal `N`.
///
/// Noise is drawn from its own stream, so for a fixed seed the instances at
/// different `ε` share `H` and the noise direction.
pub fn gen_noisy_pairs(p: usize, k: usize, epsilon: f64, seed: u64) -> Result<NoisyPairs> {
    if k < 2 {
        return Err(Error::arg("noisy pairs need k >= 2"));
    }
    if p == 0 {
        return Err(Error::arg("p must be at least 1"));
    }
    if !(epsilon >= 0.0 && epsilon.is_finite()) {
        return Err(Error::arg(format!("epsilon must be finite and >= 0, got {epsilon}")));
    }
    let mut rng = substream(seed, tag::GENERATOR, 2);
    let h = DataMatrix::from_vec(k, p, (0..k * p).map(|_| rng.gen::<f64>()).collect())?;
    let w = pair_weights(k);
    let clean = w.matmul(&h)?;
    let mut noise_rng = substream(seed, tag::NOISE, 0);
    let mut noisy = clean.clone().into_array();
    if epsilon > 0.0 {
        noisy.iter_mut().for_each(|v| {
            let z: f64 = noise_rng.sample(StandardNormal);
            *v += epsilon * z;
        });
    }
    Ok(NoisyPairs {
        x: DataMatrix::new(noisy)?,
        clean,
        w,
        h,
    })
}
