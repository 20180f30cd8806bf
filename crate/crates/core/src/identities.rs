//! Numerical checks of the finite identities behind the spectral formula:
//! the 3×3 linear algebra of the old-form space spanned by μ, B₂μ, B₄μ,
//! scalar collapses, Gamma-function identities and the unit-power sign rule.
//!
//! λ = λ(2) enters as a free real parameter and χ = χ_D(2) as ±1; every
//! statement is checked pointwise over sampled parameters. The Gram matrix
//! is normalized so that ⟨μ, μ⟩ = 1.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rug::Float;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::qfield::{make_context, FieldContext};
use crate::special::{gamma, pi, rgamma, sin_pi, CNum};

/// Fields used when an identity depends on D.
pub const SAMPLE_FIELDS: [i64; 4] = [2, 5, 13, 29];

/// A 3×3 complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat3(pub [[CNum; 3]; 3]);

impl Mat3 {
    fn from_fn(mut f: impl FnMut(usize, usize) -> CNum) -> Self {
        Mat3(std::array::from_fn(|i| std::array::from_fn(|j| f(i, j))))
    }

    /// Matrix with rational entries num/den.
    pub fn rational(prec: u32, entries: [[(i64, i64); 3]; 3]) -> Self {
        Mat3::from_fn(|i, j| {
            let (num, den) = entries[i][j];
            CNum::from_i64(prec, num) / den
        })
    }

    pub fn transpose(&self) -> Self {
        Mat3::from_fn(|i, j| self.0[j][i].clone())
    }

    pub fn mul(&self, other: &Mat3) -> Self {
        Mat3::from_fn(|i, j| {
            (0..3).fold(CNum::zero(self.0[0][0].prec()), |acc, k| {
                &acc + &(&self.0[i][k] * &other.0[k][j])
            })
        })
    }

    pub fn sub(&self, other: &Mat3) -> Self {
        Mat3::from_fn(|i, j| &self.0[i][j] - &other.0[i][j])
    }

    pub fn det(&self) -> CNum {
        let m = &self.0;
        let minor = |a: usize, b: usize, c: usize, d: usize| {
            &(&m[1][a] * &m[2][b]) - &(&m[1][c] * &m[2][d])
        };
        let t0 = &m[0][0] * &minor(1, 2, 2, 1);
        let t1 = &m[0][1] * &minor(0, 2, 2, 0);
        let t2 = &m[0][2] * &minor(0, 1, 1, 0);
        &(&t0 - &t1) + &t2
    }

    /// Inverse by the adjugate; errors on a singular matrix.
    pub fn inverse(&self) -> Result<Self> {
        let det = self.det();
        if det.is_zero() {
            return Err(Error::domain("singular matrix"));
        }
        let m = &self.0;
        let cof = |i: usize, j: usize| {
            let r = [(i + 1) % 3, (i + 2) % 3];
            let c = [(j + 1) % 3, (j + 2) % 3];
            &(&m[r[0]][c[0]] * &m[r[1]][c[1]]) - &(&m[r[0]][c[1]] * &m[r[1]][c[0]])
        };
        Ok(Mat3::from_fn(|i, j| &cof(j, i) / &det))
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().map(CNum::abs_f64).fold(0.0, f64::max)
    }

    /// Bilinear form uᵗ M v.
    pub fn form(&self, u: &[CNum; 3], v: &[CNum; 3]) -> CNum {
        let mut acc = CNum::zero(self.0[0][0].prec());
        for (ui, row) in u.iter().zip(&self.0) {
            for (mij, vj) in row.iter().zip(v) {
                acc = &acc + &(&(ui * mij) * vj);
            }
        }
        acc
    }
}

fn check_chi(chi: i32) -> Result<()> {
    if chi == 1 || chi == -1 {
        Ok(())
    } else {
        Err(Error::domain(format!("chi must be -1 or +1, got {chi}")))
    }
}

/// Fricke involution on the basis μ, B₂μ, B₄μ.
pub fn w_matrix(prec: u32) -> Mat3 {
    Mat3::rational(prec, [[(0, 1), (0, 1), (1, 2)], [(0, 1), (1, 1), (0, 1)], [(2, 1), (0, 1), (0, 1)]])
}

/// T₂ on the basis μ, B₂μ, B₄μ.
pub fn t2_matrix(lambda: &CNum, chi: i32) -> Mat3 {
    let p = lambda.prec();
    let z = || CNum::zero(p);
    Mat3([
        [lambda.clone(), CNum::one(p), z()],
        [CNum::from_i64(p, -i64::from(chi)), z(), CNum::one(p)],
        [z(), z(), z()],
    ])
}

/// Adjoint of T₂ on the basis μ, B₂μ, B₄μ.
pub fn t2_adjoint_matrix(lambda: &CNum, chi: i32) -> Mat3 {
    let p = lambda.prec();
    let z = || CNum::zero(p);
    Mat3([
        [z(), z(), z()],
        [CNum::from_i64(p, 2), z(), CNum::from_f64(p, -0.5 * f64::from(chi), 0.0)],
        [z(), CNum::from_i64(p, 2), lambda.clone()],
    ])
}

/// Gram matrix of μ, B₂μ, B₄μ with ⟨μ, μ⟩ = 1.
pub fn gram_matrix(lambda: &CNum, chi: i32) -> Mat3 {
    let p = lambda.prec();
    let two_plus_chi = i64::from(2 + chi);
    let a = &(lambda * 4i64) / two_plus_chi;
    let b = &(&(&(lambda * lambda) * 2i64) / two_plus_chi) - i64::from(chi);
    let c = &(lambda * 2i64) / two_plus_chi;
    let g = Mat3([
        [CNum::from_i64(p, 4), a.clone(), b.clone()],
        [a, CNum::from_i64(p, 2), c.clone()],
        [b, c, CNum::one(p)],
    ]);
    Mat3::from_fn(|i, j| &g.0[i][j] / 4i64)
}

/// Coordinates of the orthogonal basis μ₁, μ₂, μ₃ in the basis μ, B₂μ, B₄μ.
pub fn orthogonal_basis(lambda: &CNum, chi: i32) -> [[CNum; 3]; 3] {
    let p = lambda.prec();
    let z = || CNum::zero(p);
    [
        [CNum::one(p), z(), z()],
        [-&(lambda / i64::from(2 + chi)), CNum::one(p), z()],
        [CNum::from_f64(p, 0.25 * f64::from(chi), 0.0), -&(lambda * 0.5), CNum::one(p)],
    ]
}

/// The norms ⟨μₖ, μₖ⟩ / ⟨μ, μ⟩ in closed form.
pub fn basis_norms(lambda: &CNum, chi: i32) -> [CNum; 3] {
    let p = lambda.prec();
    let l2 = lambda * lambda;
    let n2 = &CNum::from_f64(p, 0.5, 0.0) - &(&l2 / i64::from(5 + 4 * chi));
    let n3 = &CNum::from_f64(p, 3.0 / 16.0, 0.0)
        - &(&(&l2 * i64::from(2 - chi)) / i64::from(8 * (2 + chi)));
    [CNum::one(p), n2, n3]
}

/// Outcome of one identity over one or more parameter samples.
#[derive(Debug, Clone, Serialize)]
pub struct IdentityReport {
    pub name: String,
    pub samples: Vec<String>,
    pub max_residual: f64,
    pub tolerance: f64,
    /// The sample attaining `max_residual`.
    pub worst_sample: String,
    pub passed: bool,
}

impl IdentityReport {
    fn single(name: &str, sample: String, residual: f64, tolerance: f64) -> Self {
        IdentityReport {
            name: name.to_string(),
            samples: vec![sample.clone()],
            max_residual: residual,
            tolerance,
            worst_sample: sample,
            passed: residual < tolerance,
        }
    }

    /// Combine reports of the same identity into one. The merged report passes
    /// when every sample passed its own tolerance; `tolerance` is the loosest of them.
    pub fn merge(reports: Vec<IdentityReport>) -> Option<IdentityReport> {
        let mut iter = reports.into_iter();
        let mut acc = iter.next()?;
        for r in iter {
            if r.max_residual > acc.max_residual || r.max_residual.is_nan() {
                acc.max_residual = r.max_residual;
                acc.worst_sample = r.worst_sample;
            }
            acc.tolerance = acc.tolerance.max(r.tolerance);
            acc.passed &= r.passed;
            acc.samples.extend(r.samples);
        }
        Some(acc)
    }
}

fn tolerance(prec: u32, slack: i32) -> f64 {
    f64::from(-(prec as i32) + slack).exp2()
}

fn rel_residual(a: &CNum, b: &CNum) -> f64 {
    let r = a.rel_dist(b);
    if r.is_nan() {
        f64::INFINITY
    } else {
        r
    }
}

fn lambda_sample(lambda: &CNum, chi: i32) -> String {
    format!("lambda={}, chi={chi}", lambda.re_f64())
}

/// Tᵗ₂ G = G T₂* and T₂* = W T₂ W⁻¹, entrywise to 2^(-prec+16).
pub fn check_gram(lambda: &CNum, chi: i32) -> Result<IdentityReport> {
    check_chi(chi)?;
    let p = lambda.prec();
    let t2 = t2_matrix(lambda, chi);
    let t2s = t2_adjoint_matrix(lambda, chi);
    let g = gram_matrix(lambda, chi);
    let w = w_matrix(p);
    let scale = g.max_abs().max(t2.max_abs()).max(1.0);
    let r1 = t2.transpose().mul(&g).sub(&g.mul(&t2s)).max_abs();
    let r2 = w.mul(&t2).mul(&w.inverse()?).sub(&t2s).max_abs();
    let residual = r1.max(r2) / scale;
    Ok(IdentityReport::single("gram", lambda_sample(lambda, chi), residual, tolerance(p, 16)))
}

/// μ₁, μ₂, μ₃ are G-orthogonal with the closed-form norms.
pub fn check_orthogonal_basis(lambda: &CNum, chi: i32) -> Result<IdentityReport> {
    check_chi(chi)?;
    let p = lambda.prec();
    let g = gram_matrix(lambda, chi);
    let basis = orthogonal_basis(lambda, chi);
    let norms = basis_norms(lambda, chi);
    let scale = g.max_abs().max(1.0);
    let mut residual: f64 = 0.0;
    for i in 0..3 {
        for j in i..3 {
            let ip = g.form(&basis[i], &basis[j]);
            let target = if i == j { norms[i].clone() } else { CNum::zero(p) };
            residual = residual.max(ip.dist(&target) / scale);
        }
    }
    Ok(IdentityReport::single("orthogonal_basis", lambda_sample(lambda, chi), residual, tolerance(p, 16)))
}

/// λ² - χ + (3 - (2-χ)λ²)/(2-χ) = 2.
pub fn check_assembly_scalar(lambda: &CNum, chi: i32) -> Result<IdentityReport> {
    check_chi(chi)?;
    let p = lambda.prec();
    let l2 = lambda * lambda;
    let two_minus_chi = i64::from(2 - chi);
    let frac = &(&CNum::from_i64(p, 3) - &(&l2 * two_minus_chi)) / two_minus_chi;
    let value = &(&l2 - i64::from(chi)) + &frac;
    let residual = value.dist(&CNum::from_i64(p, 2)) / l2.abs_f64().max(1.0);
    Ok(IdentityReport::single("assembly_scalar", lambda_sample(lambda, chi), residual, tolerance(p, 16)))
}

/// Reject `z` within 2^(-prec/4) of an integer; `k` of the error holds |n|.
fn reject_near_integer(z: &CNum) -> Result<()> {
    reject_near(z, z.re_f64().round())
}

/// Reject `z` within 2^(-prec/4) of a pole of Γ.
fn reject_near_gamma_pole(z: &CNum) -> Result<()> {
    reject_near(z, z.re_f64().round().min(0.0))
}

fn reject_near(z: &CNum, n: f64) -> Result<()> {
    let distance = z.dist(&CNum::from_f64(z.prec(), n, 0.0));
    if distance <= (-f64::from(z.prec()) / 4.0).exp2() {
        return Err(Error::NearPole { k: n.abs() as u64, m: 0, distance });
    }
    Ok(())
}

/// (a) Γ(1/2 - s/2)/Γ(s/2) = 2^s Γ(1-s) sin(πs/2) / √π and
/// (b) 2Γ(s/2-it)Γ(s/2+it) sin(πs/2) / (Γ(1/2-it)Γ(1/2+it))
///     = Γ(s/2-it)/Γ(1-s/2-it) + Γ(s/2+it)/Γ(1-s/2+it).
pub fn check_gamma_identities(s: &CNum, t: &Float) -> Result<IdentityReport> {
    let p = s.prec();
    reject_near_integer(s)?;
    let half = &(s * 0.5);
    let sqrt_pi = CNum::from_real(pi(p).sqrt());
    let sin_half = sin_pi(half);

    let lhs_a = &gamma(&(&(-half) + 0.5))? * &rgamma(half);
    let two_s = (s * &Float::with_val(p, 2).ln()).exp();
    let rhs_a = &(&(&two_s * &gamma(&(&(-s) + 1i64))?) * &sin_half) / &sqrt_pi;
    let ra = rel_residual(&lhs_a, &rhs_a);

    let it = CNum::from_parts(Float::new(p), Float::with_val(p, t));
    let g_minus = gamma(&(half - &it))?;
    let g_plus = gamma(&(half + &it))?;
    let half_c = CNum::from_f64(p, 0.5, 0.0);
    let lhs_b = &(&(&(&g_minus * &g_plus) * 2i64) * &sin_half)
        * &(&rgamma(&(&half_c - &it)) * &rgamma(&(&half_c + &it)));
    let one_minus_half = &(-half) + 1i64;
    let rhs_b = &(&g_minus * &rgamma(&(&one_minus_half - &it)))
        + &(&g_plus * &rgamma(&(&one_minus_half + &it)));
    let rb = rel_residual(&lhs_b, &rhs_b);

    Ok(IdentityReport::single(
        "gamma_identities",
        format!("s={}, t={}", s.to_f64_string(), t.to_f64()),
        ra.max(rb),
        tolerance(p, 20),
    ))
}

/// (4Dπ)^s √π / (4Γ(s)(4πℓ)^s Γ(s+1/2)) = q^s / (8Γ(2s)).
pub fn check_duplication_assembly(s: &CNum, ctx: &FieldContext) -> Result<IdentityReport> {
    reject_near_gamma_pole(s)?;
    reject_near_gamma_pole(&(s + 0.5))?;
    let (lhs, rhs) = duplication_sides(s, ctx);
    Ok(IdentityReport::single(
        "duplication_assembly",
        format!("D={}, s={}", ctx.d, s.to_f64_string()),
        rel_residual(&lhs, &rhs),
        tolerance(s.prec(), 20),
    ))
}

/// Both sides of the duplication identity, with 1/Γ evaluated by `rgamma`.
fn duplication_sides(s: &CNum, ctx: &FieldContext) -> (CNum, CNum) {
    let p = s.prec();
    let four_pi = pi(p) * 4u32;
    let power = |base: Float| (s * &base.ln()).exp();
    let lhs = &(&(&power(Float::with_val(p, &four_pi * ctx.d)) * &CNum::from_real(pi(p).sqrt()))
        * &(&rgamma(s) * &rgamma(&(s + 0.5))))
        / &(&power(Float::with_val(p, &four_pi * ctx.ell)) * 4i64);
    let rhs = &(&power(Float::with_val(p, ctx.q)) * &rgamma(&(s * 2i64))) / 8i64;
    (lhs, rhs)
}

/// ε^(imπ/log ε) = (-1)^m.
pub fn check_eigenvalue_sign(m: i64, ctx: &FieldContext) -> Result<IdentityReport> {
    let p = ctx.prec();
    let log_eps = ctx.log_eps_at(p);
    let t = pi(p) * m / &log_eps;
    let value = CNum::from_parts(Float::new(p), t * &log_eps).exp();
    let sign = if m % 2 == 0 { 1 } else { -1 };
    let residual = value.dist(&CNum::from_i64(p, sign));
    Ok(IdentityReport::single(
        "eigenvalue_sign",
        format!("D={}, m={m}", ctx.d),
        residual,
        tolerance(p, 8 + (m.unsigned_abs().max(1) as f64).log2().ceil() as i32),
    ))
}

/// Run every identity over `samples` seeded random parameter draws.
/// Returns one merged report per identity, in a fixed order.
pub fn identity_suite(seed: u64, samples: usize, prec: u32) -> Result<Vec<IdentityReport>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let contexts = SAMPLE_FIELDS
        .iter()
        .map(|&d| make_context(d, prec))
        .collect::<Result<Vec<_>>>()?;
    let lambda_max = 2.0 * std::f64::consts::SQRT_2;
    let mut by_name: Vec<Vec<IdentityReport>> = vec![Vec::new(); 6];
    for _ in 0..samples {
        let lambda = CNum::from_f64(prec, rng.gen_range(-lambda_max..=lambda_max), 0.0);
        let chi = if rng.gen_bool(0.5) { 1 } else { -1 };
        by_name[0].push(check_gram(&lambda, chi)?);
        by_name[1].push(check_orthogonal_basis(&lambda, chi)?);
        by_name[2].push(check_assembly_scalar(&lambda, chi)?);

        let s = sample_away_from_integers(&mut rng, prec);
        let t = Float::with_val(prec, rng.gen_range(-4.0..=4.0));
        by_name[3].push(check_gamma_identities(&s, &t)?);

        let ctx = &contexts[rng.gen_range(0..contexts.len())];
        let s = sample_away_from_integers(&mut rng, prec);
        by_name[4].push(check_duplication_assembly(&s, ctx)?);
        by_name[5].push(check_eigenvalue_sign(rng.gen_range(-50..=50), ctx)?);
    }
    Ok(by_name.into_iter().filter_map(IdentityReport::merge).collect())
}

/// s with |Re s|, |Im s| ≤ 3 and Re s at least 0.05 from every half-integer.
fn sample_away_from_integers(rng: &mut ChaCha8Rng, prec: u32) -> CNum {
    loop {
        let re: f64 = rng.gen_range(-3.0..=3.0);
        let im: f64 = rng.gen_range(-3.0..=3.0);
        let frac = (2.0 * re - (2.0 * re).round()).abs();
        if frac > 0.1 {
            return CNum::from_f64(prec, re, im);
        }
    }
}

trait ShortDisplay {
    fn to_f64_string(&self) -> String;
}

impl ShortDisplay for CNum {
    fn to_f64_string(&self) -> String {
        format!("{}{:+}i", self.re_f64(), self.im_f64())
    }
}
