//! Steady states of an N-level Lindblad master equation.
//!
//! The Hamiltonian is written as `H = -ħ M` with `M` Hermitian, so
//! `dρ/dt = i[M, ρ] + Σ Γ (σρσ† − ½{σ†σ, ρ}) − γ_ij ρ_ij`, where the last term
//! is extra pure dephasing of coherence `ρ_ij`.
//!
//! The density matrix is parameterized by N² real numbers: the N populations
//! followed by `Re ρ_ij, Im ρ_ij` for every `i < j`. Every Hermitian matrix
//! maps to exactly one such vector, so solutions are Hermitian by
//! construction.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Systems whose equilibrated reciprocal condition falls below this are
/// treated as having a non-unique steady state.
pub const DEGENERATE_RCOND: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jump {
    pub from: usize,
    pub to: usize,
    pub rate: f64,
}

#[derive(Debug, Clone)]
pub struct MasterEquation {
    n: usize,
    coupling: DMatrix<Complex64>,
    jumps: Vec<Jump>,
    dephasing: DMatrix<f64>,
}

/// Steady-state density matrix with the conditioning of the solve.
#[derive(Debug, Clone)]
pub struct SteadyState {
    pub rho: DMatrix<Complex64>,
    pub rcond: f64,
}

impl MasterEquation {
    pub fn new(n: usize) -> Self {
        assert!(n >= 2, "a master equation needs at least two levels");
        MasterEquation {
            n,
            coupling: DMatrix::zeros(n, n),
            jumps: Vec::new(),
            dephasing: DMatrix::zeros(n, n),
        }
    }

    pub fn levels(&self) -> usize {
        self.n
    }

    /// Sets the diagonal entry `M_ii`.
    pub fn set_energy(&mut self, i: usize, value: f64) {
        self.coupling[(i, i)] = Complex64::new(value, 0.0);
    }

    /// Sets `M_ij = value` and `M_ji = conj(value)`.
    pub fn set_coupling(&mut self, i: usize, j: usize, value: Complex64) {
        assert_ne!(i, j);
        self.coupling[(i, j)] = value;
        self.coupling[(j, i)] = value.conj();
    }

    /// Adds spontaneous transfer `from → to` at `rate`.
    pub fn add_decay(&mut self, from: usize, to: usize, rate: f64) {
        assert_ne!(from, to);
        if rate != 0.0 {
            self.jumps.push(Jump { from, to, rate });
        }
    }

    /// Adds pure dephasing of coherence `ρ_ij` (and `ρ_ji`).
    pub fn add_dephasing(&mut self, i: usize, j: usize, rate: f64) {
        assert_ne!(i, j);
        self.dephasing[(i, j)] += rate;
        self.dephasing[(j, i)] += rate;
    }

    /// Evaluates `dρ/dt`.
    pub fn apply(&self, rho: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        let i = Complex64::new(0.0, 1.0);
        let m = &self.coupling;
        let mut out = (m * rho - rho * m) * i;
        for jump in &self.jumps {
            let (f, t, g) = (jump.from, jump.to, jump.rate);
            out[(t, t)] += rho[(f, f)] * g;
            for k in 0..self.n {
                out[(f, k)] -= rho[(f, k)] * (0.5 * g);
                out[(k, f)] -= rho[(k, f)] * (0.5 * g);
            }
        }
        for r in 0..self.n {
            for c in 0..self.n {
                if r != c {
                    out[(r, c)] -= rho[(r, c)] * self.dephasing[(r, c)];
                }
            }
        }
        out
    }

    pub fn real_dim(&self) -> usize {
        self.n * self.n
    }

    pub fn to_real(&self, rho: &DMatrix<Complex64>) -> DVector<f64> {
        let n = self.n;
        let mut x = DVector::zeros(n * n);
        for k in 0..n {
            x[k] = rho[(k, k)].re;
        }
        let mut idx = n;
        for r in 0..n {
            for c in (r + 1)..n {
                x[idx] = rho[(r, c)].re;
                x[idx + 1] = rho[(r, c)].im;
                idx += 2;
            }
        }
        x
    }

    pub fn from_real(&self, x: &DVector<f64>) -> DMatrix<Complex64> {
        let n = self.n;
        let mut rho = DMatrix::zeros(n, n);
        for k in 0..n {
            rho[(k, k)] = Complex64::new(x[k], 0.0);
        }
        let mut idx = n;
        for r in 0..n {
            for c in (r + 1)..n {
                let z = Complex64::new(x[idx], x[idx + 1]);
                rho[(r, c)] = z;
                rho[(c, r)] = z.conj();
                idx += 2;
            }
        }
        rho
    }

    /// Real N²×N² generator `A` with `d x/dt = A x`.
    pub fn generator(&self) -> DMatrix<f64> {
        let d = self.real_dim();
        let mut a = DMatrix::zeros(d, d);
        let mut basis = DVector::zeros(d);
        for col in 0..d {
            basis[col] = 1.0;
            let image = self.to_real(&self.apply(&self.from_real(&basis)));
            a.set_column(col, &image);
            basis[col] = 0.0;
        }
        a
    }

    /// Solves `A x = 0` with the equation of population `replace` swapped for
    /// `Σ_k weights[k] ρ_kk = 1`.
    pub fn steady_state(&self, weights: &[f64], replace: usize) -> Result<SteadyState> {
        assert_eq!(weights.len(), self.n);
        assert!(replace < self.n);
        let d = self.real_dim();
        let mut a = self.generator();
        for c in 0..d {
            a[(replace, c)] = if c < self.n { weights[c] } else { 0.0 };
        }
        let mut b = DVector::zeros(d);
        b[replace] = 1.0;

        // Row then column equilibration so that rcond reflects structure, not units.
        let mut col_scale = DVector::from_element(d, 1.0);
        for r in 0..d {
            let s = a.row(r).amax();
            if s > 0.0 {
                a.row_mut(r).scale_mut(1.0 / s);
                b[r] /= s;
            }
        }
        for c in 0..d {
            let s = a.column(c).amax();
            if s > 0.0 {
                a.column_mut(c).scale_mut(1.0 / s);
                col_scale[c] = 1.0 / s;
            }
        }

        let sv = a.clone().singular_values();
        let smax = sv.max();
        let smin = sv.min();
        let rcond = if smax > 0.0 { smin / smax } else { 0.0 };
        if !(rcond >= DEGENERATE_RCOND) {
            return Err(Error::DegenerateSteadyState { rcond });
        }
        let y = a.lu().solve(&b).ok_or(Error::Numerical { rcond })?;
        let x = y.component_mul(&col_scale);
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical { rcond });
        }
        Ok(SteadyState { rho: self.from_real(&x), rcond })
    }

    /// `max|dρ/dt| / (max|A| · max|ρ|)` for a candidate steady state.
    pub fn relative_residual(&self, rho: &DMatrix<Complex64>) -> f64 {
        let r = self.apply(rho);
        let scale = self.generator().amax() * rho.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let num = r.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if scale > 0.0 {
            num / scale
        } else {
            num
        }
    }
}

/// Largest `|ρ_ij − conj(ρ_ji)|` relative to the largest element.
pub fn hermiticity_error(rho: &DMatrix<Complex64>) -> f64 {
    let n = rho.nrows();
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for r in 0..n {
        for c in 0..n {
            worst = worst.max((rho[(r, c)] - rho[(c, r)].conj()).norm());
            scale = scale.max(rho[(r, c)].norm());
        }
    }
    if scale > 0.0 {
        worst / scale
    } else {
        worst
    }
}
