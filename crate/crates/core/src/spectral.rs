//! Circulant matrices and their Fourier eigenstructure.
//!
//! For `c = (c_0..c_{n-1})` the circulant `Cir(c)` has entry `(i, j) = c[(i - j) mod n]`,
//! so column `j` is `c` rotated down `j` times. Its eigenvalues are
//! `psi_m = <V_m, c> + i <U_m, c>` with `V_m[j] = cos(2 pi j m / n)` and
//! `U_m[j] = sin(2 pi j m / n)`. The inverse is again circulant with first
//! column `t_hat`, where `t_hat[k] = (1/<c,1> + T_k(c)) / n` and each `T_k`
//! is a real sum over conjugate eigenvalue pairs.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use thiserror::Error;

use crate::exact::{self, Rational};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SpectralError {
    #[error("circulant matrix is singular")]
    SingularCirculant,
    #[error("mode index {m} out of range for n = {n}")]
    ModeOutOfRange { n: usize, m: usize },
    #[error("empty vector")]
    Empty,
}

/// Relative tolerance under which a projection length counts as zero.
pub const SINGULAR_TOL: f64 = 1e-9;

/// Cosine and sine of `2 pi a / n` for every residue `a`.
#[derive(Debug)]
pub struct FourierTable {
    n: usize,
    cos: Vec<f64>,
    sin: Vec<f64>,
}

impl FourierTable {
    fn build(n: usize) -> Self {
        let mut cos = vec![0.0; n];
        let mut sin = vec![0.0; n];
        for a in 0..n {
            // exact values at quarter turns
            if (4 * a) % n == 0 {
                let (c, s) = match 4 * a / n {
                    0 => (1.0, 0.0),
                    1 => (0.0, 1.0),
                    2 => (-1.0, 0.0),
                    _ => (0.0, -1.0),
                };
                cos[a] = c;
                sin[a] = s;
                continue;
            }
            // share values between a and n - a so conjugate modes match bit for bit
            let (r, sign) = if 2 * a > n { (n - a, -1.0) } else { (a, 1.0) };
            let angle = 2.0 * std::f64::consts::PI * r as f64 / n as f64;
            cos[a] = angle.cos();
            sin[a] = sign * angle.sin();
        }
        Self { n, cos, sin }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `cos(2 pi a / n)` for any integer `a`.
    pub fn cos(&self, a: i64) -> f64 {
        self.cos[a.rem_euclid(self.n as i64) as usize]
    }

    pub fn sin(&self, a: i64) -> f64 {
        self.sin[a.rem_euclid(self.n as i64) as usize]
    }

    pub fn v(&self, m: usize) -> Vec<f64> {
        (0..self.n).map(|j| self.cos((j * m) as i64)).collect()
    }

    pub fn u(&self, m: usize) -> Vec<f64> {
        (0..self.n).map(|j| self.sin((j * m) as i64)).collect()
    }
}

/// Shared per-`n` trigonometric table.
pub fn fourier_table(n: usize) -> Arc<FourierTable> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<FourierTable>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("fourier cache poisoned");
    guard
        .entry(n)
        .or_insert_with(|| Arc::new(FourierTable::build(n)))
        .clone()
}

/// The real vectors `(V_m, U_m)` with `sqrt(n) y^m = V_m - i U_m`.
pub fn fourier_pair(n: usize, m: usize) -> Result<(Vec<f64>, Vec<f64>), SpectralError> {
    if m >= n {
        return Err(SpectralError::ModeOutOfRange { n, m });
    }
    let t = fourier_table(n);
    Ok((t.v(m), t.u(m)))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[derive(Debug, Clone)]
pub struct Spectrum {
    pub n: usize,
    pub psi_re: Vec<f64>,
    pub psi_im: Vec<f64>,
    pub proj_len_sq: Vec<f64>,
    table: Arc<FourierTable>,
}

impl Spectrum {
    pub fn v(&self, m: usize) -> Vec<f64> {
        self.table.v(m)
    }

    pub fn u(&self, m: usize) -> Vec<f64> {
        self.table.u(m)
    }

    /// Modes `m = 1..=floor(n/2)` that must be nonzero for invertibility.
    pub fn half_modes(&self) -> std::ops::RangeInclusive<usize> {
        1..=self.n / 2
    }
}

pub fn eigenvalues(c: &[f64]) -> Spectrum {
    let n = c.len();
    let table = fourier_table(n.max(1));
    let mut psi_re = Vec::with_capacity(n);
    let mut psi_im = Vec::with_capacity(n);
    for m in 0..n {
        psi_re.push(dot(&table.v(m), c));
        psi_im.push(dot(&table.u(m), c));
    }
    let proj_len_sq = psi_re.iter().zip(&psi_im).map(|(a, b)| a * a + b * b).collect();
    Spectrum {
        n,
        psi_re,
        psi_im,
        proj_len_sq,
        table,
    }
}

fn singular_threshold(c: &[f64]) -> f64 {
    SINGULAR_TOL * (1.0 + dot(c, c))
}

/// True when some eigenvalue vanishes within the scale-aware tolerance.
pub fn is_singular(spec: &Spectrum, c: &[f64]) -> bool {
    let tol = singular_threshold(c);
    spec.proj_len_sq[0] <= tol || spec.half_modes().any(|m| spec.proj_len_sq[m] <= tol)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TValues {
    pub t: Vec<f64>,
    pub t_hat: Vec<f64>,
    pub t_bar: Vec<f64>,
    pub layer_sum: f64,
}

/// `T_k(c)` for all `k`, the inverse's first column `t_hat`, and its first row `t_bar`.
pub fn t_values(c: &[f64]) -> Result<TValues, SpectralError> {
    let n = c.len();
    if n == 0 {
        return Err(SpectralError::Empty);
    }
    let spec = eigenvalues(c);
    if is_singular(&spec, c) {
        return Err(SpectralError::SingularCirculant);
    }
    let table = &spec.table;
    let pairs = (n - 1) / 2;
    let mut t = vec![0.0; n];
    for (k, tk) in t.iter_mut().enumerate() {
        let mut acc = 0.0;
        for m in 1..=pairs {
            // <sigma^{-k}(V_m), c> = sum_j c_j cos(2 pi (j + k) m / n)
            let shifted: f64 = c
                .iter()
                .enumerate()
                .map(|(j, cj)| cj * table.cos(((j + k) * m) as i64))
                .sum();
            acc += 2.0 * shifted / spec.proj_len_sq[m];
        }
        if n.is_multiple_of(2) {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            acc += sign / spec.psi_re[n / 2];
        }
        *tk = acc;
    }
    let layer_sum: f64 = c.iter().sum();
    let t_hat: Vec<f64> = t.iter().map(|tk| (1.0 / layer_sum + tk) / n as f64).collect();
    let t_bar = (0..n).map(|j| t_hat[(n - j) % n]).collect();
    Ok(TValues {
        t,
        t_hat,
        t_bar,
        layer_sum,
    })
}

pub fn t_values_int(c: &[i64]) -> Result<TValues, SpectralError> {
    let cf: Vec<f64> = c.iter().map(|&v| v as f64).collect();
    t_values(&cf)
}

/// Exact first column of `Cir(c)^{-1}` by rational elimination.
pub fn t_hat_exact(c: &[i64]) -> Result<Vec<Rational>, SpectralError> {
    let n = c.len();
    if n == 0 {
        return Err(SpectralError::Empty);
    }
    let mut e1 = vec![0; n];
    e1[0] = 1;
    exact::solve_integer(&circulant(c.to_vec()).rows(), &e1).ok_or(SpectralError::SingularCirculant)
}

/// `det Cir(c)` through the conjugate-pair product of eigenvalues.
pub fn det_circulant(c: &[f64]) -> f64 {
    let n = c.len();
    if n == 0 {
        return 1.0;
    }
    let spec = eigenvalues(c);
    let mut det = spec.psi_re[0];
    for m in 1..=(n - 1) / 2 {
        det *= spec.proj_len_sq[m];
    }
    if n.is_multiple_of(2) {
        det *= spec.psi_re[n / 2];
    }
    det
}

/// Square circulant matrix given by its first column.
#[derive(Debug, Clone, PartialEq)]
pub struct CirculantMatrix<T> {
    pub first_column: Vec<T>,
}

impl<T: Clone> CirculantMatrix<T> {
    pub fn size(&self) -> usize {
        self.first_column.len()
    }

    pub fn entry(&self, i: usize, j: usize) -> T {
        let n = self.size();
        self.first_column[(i + n - j % n) % n].clone()
    }

    pub fn rows(&self) -> Vec<Vec<T>> {
        let n = self.size();
        (0..n).map(|i| (0..n).map(|j| self.entry(i, j)).collect()).collect()
    }
}

pub fn circulant<T: Clone>(c: Vec<T>) -> CirculantMatrix<T> {
    CirculantMatrix { first_column: c }
}

/// `n x k` matrix: `Cir(c[..k])` on top, then rows constant at `c[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialCirculantMatrix<T> {
    pub c: Vec<T>,
    pub k: usize,
}

impl<T: Clone> PartialCirculantMatrix<T> {
    pub fn entry(&self, i: usize, j: usize) -> T {
        if i < self.k {
            self.c[(i + self.k - j) % self.k].clone()
        } else {
            self.c[i].clone()
        }
    }

    pub fn rows(&self) -> Vec<Vec<T>> {
        (0..self.c.len())
            .map(|i| (0..self.k).map(|j| self.entry(i, j)).collect())
            .collect()
    }
}

pub fn partial_circulant<T: Clone>(c: Vec<T>, k: usize) -> PartialCirculantMatrix<T> {
    assert!(k >= 1 && k <= c.len(), "active prefix must satisfy 1 <= k <= n");
    PartialCirculantMatrix { c, k }
}

fn write_rows<T: fmt::Display>(f: &mut fmt::Formatter<'_>, rows: &[Vec<T>]) -> fmt::Result {
    for row in rows {
        let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        writeln!(f, "[{}]", cells.join(", "))?;
    }
    Ok(())
}

impl<T: Clone + fmt::Display> fmt::Display for CirculantMatrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_rows(f, &self.rows())
    }
}

impl<T: Clone + fmt::Display> fmt::Display for PartialCirculantMatrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_rows(f, &self.rows())
    }
}
