//! Time-domain reference for the susceptibilities: integrate the full
//! Schrödinger equation of a weakly driven few-level model with RK4 and fit
//! the dipole expectation value to harmonics.

#![allow(dead_code)]

use moldep_core::moldata::MoleculeModel;
use moldep_core::units::HBAR;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Frequencies closer than this (relative) are merged in the fit basis.
const MERGE: f64 = 1e-6;

pub struct DipoleTrace {
    pub t: Vec<f64>,
    pub mu: Vec<f64>,
    /// Angular frequencies present at first order (all ≥ 0).
    pub basis: Vec<f64>,
}

/// Populated levels `initial` (index, amplitude) driven by Σ F cos(Ω t).
pub fn dipole_trace(
    model: &MoleculeModel,
    initial: &[(usize, Complex64)],
    drive: &[(f64, f64)],
    t_end: f64,
    dt: f64,
) -> DipoleTrace {
    let n = model.states().len();
    let e0 = model.states().iter().map(|s| s.energy).fold(f64::INFINITY, f64::min);
    let w: Vec<f64> = model.states().iter().map(|s| (s.energy - e0) / HBAR).collect();
    let mut mu = vec![vec![0.0; n]; n];
    for ((a, b), v) in model.dipoles().iter() {
        mu[a][b] = v;
        mu[b][a] = v;
    }
    let pairs: Vec<(usize, usize, f64)> = (0..n)
        .flat_map(|j| (0..n).map(move |k| (j, k)))
        .filter(|&(j, k)| mu[j][k] != 0.0)
        .map(|(j, k)| (j, k, mu[j][k]))
        .collect();

    let field = |t: f64| drive.iter().map(|&(f, om)| f * (om * t).cos()).sum::<f64>();
    // dc_j/dt = (i/ħ) 𝓔(t) Σ_k μ_jk e^{iω_jk t} c_k
    let rhs = |t: f64, c: &[Complex64], out: &mut [Complex64]| {
        out.iter_mut().for_each(|o| *o = Complex64::new(0.0, 0.0));
        let scale = Complex64::new(0.0, field(t) / HBAR);
        for &(j, k, m) in &pairs {
            out[j] += scale * m * Complex64::from_polar(1.0, (w[j] - w[k]) * t) * c[k];
        }
    };
    let expectation = |t: f64, c: &[Complex64]| {
        pairs
            .iter()
            .map(|&(j, k, m)| (c[j].conj() * c[k] * m * Complex64::from_polar(1.0, (w[j] - w[k]) * t)).re)
            .sum::<f64>()
    };

    let mut c = vec![Complex64::new(0.0, 0.0); n];
    for &(i, a) in initial {
        c[i] = a;
    }
    let steps = (t_end / dt).round() as usize;
    let stride = 8;
    let mut trace_t = Vec::with_capacity(steps / stride + 1);
    let mut trace_mu = Vec::with_capacity(steps / stride + 1);
    let (mut k1, mut k2, mut k3, mut k4) = (c.clone(), c.clone(), c.clone(), c.clone());
    let mut tmp = c.clone();
    for s in 0..=steps {
        let t = s as f64 * dt;
        if s % stride == 0 {
            trace_t.push(t);
            trace_mu.push(expectation(t, &c));
        }
        if s == steps {
            break;
        }
        rhs(t, &c, &mut k1);
        for i in 0..n {
            tmp[i] = c[i] + k1[i] * (0.5 * dt);
        }
        rhs(t + 0.5 * dt, &tmp, &mut k2);
        for i in 0..n {
            tmp[i] = c[i] + k2[i] * (0.5 * dt);
        }
        rhs(t + 0.5 * dt, &tmp, &mut k3);
        for i in 0..n {
            tmp[i] = c[i] + k3[i] * dt;
        }
        rhs(t + dt, &tmp, &mut k4);
        for i in 0..n {
            c[i] += (k1[i] + k2[i] * 2.0 + k3[i] * 2.0 + k4[i]) * (dt / 6.0);
        }
    }

    // Forced lines |ω_ki ± Ω| and free lines |ω_jk| for populated k, i.
    let populated: Vec<usize> = initial.iter().map(|&(i, _)| i).collect();
    let mut basis = Vec::new();
    for &k in &populated {
        for &i in &populated {
            for &(_, om) in drive {
                basis.push((w[k] - w[i] + om).abs());
                basis.push((w[k] - w[i] - om).abs());
            }
        }
        for (j, &wj) in w.iter().enumerate() {
            if j != k {
                basis.push((wj - w[k]).abs());
            }
        }
    }
    basis.sort_by(f64::total_cmp);
    basis.dedup_by(|a, b| (*a - *b).abs() <= MERGE * b.abs().max(1.0));
    basis.retain(|&f| f > 0.0);
    DipoleTrace {
        t: trace_t,
        mu: trace_mu,
        basis,
    }
}

impl DipoleTrace {
    /// Z with ⟨μ⟩ ⊃ Re[Z e^{iωt}]; `omega` may be negative.
    pub fn amplitude(&self, omega: f64) -> Complex64 {
        let target = omega.abs();
        let col = self
            .basis
            .iter()
            .position(|&f| (f - target).abs() <= MERGE * target)
            .unwrap_or_else(|| panic!("frequency {omega:e} is not in the fit basis"));
        let rows = self.t.len();
        let cols = 1 + 2 * self.basis.len();
        let a = DMatrix::from_fn(rows, cols, |r, c| {
            let t = self.t[r];
            match c {
                0 => 1.0,
                c if c % 2 == 1 => (self.basis[(c - 1) / 2] * t).cos(),
                c => (self.basis[(c - 2) / 2] * t).sin(),
            }
        });
        let b = DVector::from_column_slice(&self.mu);
        let x = a.svd(true, true).solve(&b, 1e-14).expect("least squares");
        let (cos, sin) = (x[1 + 2 * col], x[2 + 2 * col]);
        let z = Complex64::new(cos, -sin);
        if omega < 0.0 {
            z.conj()
        } else {
            z
        }
    }
}

/// Relative difference of two complex numbers, against the larger modulus.
pub fn relative(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / a.norm().max(b.norm())
}
