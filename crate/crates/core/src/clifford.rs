//! Dirac matrices, light-cone operators and the spin inner product.
//!
//! Everything here uses the Dirac representation: `gamma^0 = diag(1, 1, -1, -1)`
//! and `gamma^k` carries the Pauli matrix `sigma_k` in its off-diagonal blocks
//! (`+sigma_k` upper right, `-sigma_k` lower left). Spinor components are
//! therefore representation dependent; every scalar built from them
//! (inner products, norms of residuals) is not.

use std::fmt;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub};
use std::sync::LazyLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Minkowski metric `diag(1, -1, -1, -1)`.
pub const METRIC: [f64; 4] = [1.0, -1.0, -1.0, -1.0];

/// A 4-component complex spinor.
#[derive(Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Spinor(pub [Complex64; 4]);

/// A dense 4x4 complex matrix acting on spinors.
#[derive(Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SpinMatrix(pub [[Complex64; 4]; 4]);

impl Spinor {
    pub const fn zero() -> Self {
        Spinor([ZERO; 4])
    }

    /// Unit vector along component `i`.
    pub fn basis(i: usize) -> Self {
        let mut out = Self::zero();
        out.0[i] = ONE;
        out
    }

    pub fn from_parts(re: [f64; 4], im: [f64; 4]) -> Self {
        Spinor(std::array::from_fn(|i| Complex64::new(re[i], im[i])))
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Spinor(self.0.map(|x| x * c))
    }

    /// Plain Hermitian product `a^dagger b` (positive definite, not the spin product).
    pub fn hermitian_dot(&self, other: &Spinor) -> Complex64 {
        self.0.iter().zip(other.0.iter()).map(|(a, b)| a.conj() * b).sum()
    }

    /// Euclidean norm on C^4.
    pub fn norm(&self) -> f64 {
        self.0.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.re.is_finite() && x.im.is_finite())
    }
}

impl Default for Spinor {
    fn default() -> Self {
        Self::zero()
    }
}

impl fmt::Debug for Spinor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.0.iter()).finish()
    }
}

impl Index<usize> for Spinor {
    type Output = Complex64;
    fn index(&self, i: usize) -> &Complex64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for Spinor {
    fn index_mut(&mut self, i: usize) -> &mut Complex64 {
        &mut self.0[i]
    }
}

impl Add for Spinor {
    type Output = Spinor;
    fn add(self, rhs: Spinor) -> Spinor {
        Spinor(std::array::from_fn(|i| self.0[i] + rhs.0[i]))
    }
}

impl AddAssign for Spinor {
    fn add_assign(&mut self, rhs: Spinor) {
        for i in 0..4 {
            self.0[i] += rhs.0[i];
        }
    }
}

impl Sub for Spinor {
    type Output = Spinor;
    fn sub(self, rhs: Spinor) -> Spinor {
        Spinor(std::array::from_fn(|i| self.0[i] - rhs.0[i]))
    }
}

impl Neg for Spinor {
    type Output = Spinor;
    fn neg(self) -> Spinor {
        Spinor(self.0.map(|x| -x))
    }
}

impl Mul<Spinor> for Complex64 {
    type Output = Spinor;
    fn mul(self, rhs: Spinor) -> Spinor {
        rhs.scale(self)
    }
}

impl Mul<Spinor> for f64 {
    type Output = Spinor;
    fn mul(self, rhs: Spinor) -> Spinor {
        rhs.scale(Complex64::new(self, 0.0))
    }
}

impl SpinMatrix {
    pub const fn zero() -> Self {
        SpinMatrix([[ZERO; 4]; 4])
    }

    pub fn identity() -> Self {
        Self::diagonal([ONE; 4])
    }

    pub fn diagonal(d: [Complex64; 4]) -> Self {
        let mut m = Self::zero();
        for (i, x) in d.into_iter().enumerate() {
            m.0[i][i] = x;
        }
        m
    }

    pub fn scale(&self, c: Complex64) -> Self {
        SpinMatrix(self.0.map(|row| row.map(|x| x * c)))
    }

    pub fn scale_real(&self, c: f64) -> Self {
        self.scale(Complex64::new(c, 0.0))
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Self {
        SpinMatrix(std::array::from_fn(|i| {
            std::array::from_fn(|j| self.0[j][i].conj())
        }))
    }

    /// Adjoint with respect to the spin inner product: `gamma^0 M^dagger gamma^0`.
    pub fn spin_adjoint(&self) -> Self {
        let g0 = &light_cone().gamma[0];
        *g0 * self.dagger() * *g0
    }

    pub fn trace(&self) -> Complex64 {
        (0..4).map(|i| self.0[i][i]).sum()
    }

    pub fn column(&self, j: usize) -> Spinor {
        Spinor(std::array::from_fn(|i| self.0[i][j]))
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.0
            .iter()
            .flat_map(|row| row.iter())
            .map(|x| x.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.0
            .iter()
            .flat_map(|row| row.iter())
            .map(|x| x.norm())
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.0
            .iter()
            .flat_map(|row| row.iter())
            .all(|x| x.re.is_finite() && x.im.is_finite())
    }

    /// Entries in row-major order.
    pub fn entries(&self) -> impl Iterator<Item = Complex64> + '_ {
        self.0.iter().flat_map(|row| row.iter().copied())
    }
}

impl Default for SpinMatrix {
    fn default() -> Self {
        Self::zero()
    }
}

impl fmt::Debug for SpinMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.0.iter()).finish()
    }
}

impl Add for SpinMatrix {
    type Output = SpinMatrix;
    fn add(self, rhs: SpinMatrix) -> SpinMatrix {
        SpinMatrix(std::array::from_fn(|i| {
            std::array::from_fn(|j| self.0[i][j] + rhs.0[i][j])
        }))
    }
}

impl AddAssign for SpinMatrix {
    fn add_assign(&mut self, rhs: SpinMatrix) {
        *self = *self + rhs;
    }
}

impl Sub for SpinMatrix {
    type Output = SpinMatrix;
    fn sub(self, rhs: SpinMatrix) -> SpinMatrix {
        SpinMatrix(std::array::from_fn(|i| {
            std::array::from_fn(|j| self.0[i][j] - rhs.0[i][j])
        }))
    }
}

impl Neg for SpinMatrix {
    type Output = SpinMatrix;
    fn neg(self) -> SpinMatrix {
        self.scale_real(-1.0)
    }
}

impl Mul for SpinMatrix {
    type Output = SpinMatrix;
    fn mul(self, rhs: SpinMatrix) -> SpinMatrix {
        SpinMatrix(std::array::from_fn(|i| {
            std::array::from_fn(|j| (0..4).map(|k| self.0[i][k] * rhs.0[k][j]).sum())
        }))
    }
}

impl Mul<Spinor> for SpinMatrix {
    type Output = Spinor;
    fn mul(self, rhs: Spinor) -> Spinor {
        Spinor(std::array::from_fn(|i| {
            (0..4).map(|k| self.0[i][k] * rhs.0[k]).sum()
        }))
    }
}

impl Mul<SpinMatrix> for Complex64 {
    type Output = SpinMatrix;
    fn mul(self, rhs: SpinMatrix) -> SpinMatrix {
        rhs.scale(self)
    }
}

impl Mul<SpinMatrix> for f64 {
    type Output = SpinMatrix;
    fn mul(self, rhs: SpinMatrix) -> SpinMatrix {
        rhs.scale_real(self)
    }
}

/// Cached Dirac matrices together with the light-cone operators built from them.
#[derive(Debug, Clone, Copy)]
pub struct LightCone {
    pub gamma: [SpinMatrix; 4],
    /// `N+ = (gamma^0 + gamma^1) / 2`
    pub n_plus: SpinMatrix,
    /// `N- = (gamma^0 - gamma^1) / 2`
    pub n_minus: SpinMatrix,
    /// `Pi+ = N+ N-`
    pub pi_plus: SpinMatrix,
    /// `Pi- = N- N+`
    pub pi_minus: SpinMatrix,
}

static LIGHT_CONE: LazyLock<LightCone> = LazyLock::new(|| {
    let gamma = [0, 1, 2, 3].map(gamma_matrix);
    let n_plus = (gamma[0] + gamma[1]).scale_real(0.5);
    let n_minus = (gamma[0] - gamma[1]).scale_real(0.5);
    LightCone {
        gamma,
        n_plus,
        n_minus,
        pi_plus: n_plus * n_minus,
        pi_minus: n_minus * n_plus,
    }
});

/// Shared, lazily built light-cone operator table.
pub fn light_cone() -> &'static LightCone {
    &LIGHT_CONE
}

fn gamma_matrix(j: usize) -> SpinMatrix {
    let mut m = SpinMatrix::zero();
    if j == 0 {
        return SpinMatrix::diagonal([ONE, ONE, -ONE, -ONE]);
    }
    let sigma: [[Complex64; 2]; 2] = match j {
        1 => [[ZERO, ONE], [ONE, ZERO]],
        2 => [[ZERO, -I], [I, ZERO]],
        3 => [[ONE, ZERO], [ZERO, -ONE]],
        _ => unreachable!(),
    };
    for a in 0..2 {
        for b in 0..2 {
            m.0[a][b + 2] = sigma[a][b];
            m.0[a + 2][b] = -sigma[a][b];
        }
    }
    m
}

/// The Dirac matrix `gamma^j` for `j` in `0..=3`.
pub fn dirac_gamma(j: usize) -> Result<SpinMatrix> {
    if j > 3 {
        return Err(Error::GammaIndex(j));
    }
    Ok(light_cone().gamma[j])
}

/// `(N+, N-, Pi+, Pi-)`.
pub fn lightcone_operators() -> (SpinMatrix, SpinMatrix, SpinMatrix, SpinMatrix) {
    let lc = light_cone();
    (lc.n_plus, lc.n_minus, lc.pi_plus, lc.pi_minus)
}

/// Spin inner product `psi^dagger gamma^0 phi`, of signature (2, 2).
pub fn spin_inner(psi: &Spinor, phi: &Spinor) -> Complex64 {
    // gamma^0 = diag(1, 1, -1, -1)
    let p = &psi.0;
    let q = &phi.0;
    p[0].conj() * q[0] + p[1].conj() * q[1] - p[2].conj() * q[2] - p[3].conj() * q[3]
}

/// `gamma^2 (k2 + a2) + gamma^3 (k3 + a3)`.
pub fn transverse_slash(k2: f64, k3: f64, a2: f64, a3: f64) -> SpinMatrix {
    let g = &light_cone().gamma;
    g[2].scale_real(k2 + a2) + g[3].scale_real(k3 + a3)
}

/// Orthonormal (in the Hermitian sense) basis of the range of `Pi-`.
pub fn pi_minus_basis() -> [Spinor; 2] {
    let pm = light_cone().pi_minus;
    // Pi- has rank 2; in this representation the images of e1 and e2 are
    // independent and orthogonal.
    [0, 1].map(|i| {
        let v = pm * Spinor::basis(i);
        v.scale(Complex64::new(1.0 / v.norm(), 0.0))
    })
}

/// Projects an arbitrary spinor onto the range of `Pi-`.
pub fn project_pi_minus(psi: &Spinor) -> Spinor {
    light_cone().pi_minus * *psi
}
