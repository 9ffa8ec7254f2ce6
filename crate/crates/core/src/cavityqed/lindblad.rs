//! Vectorized Lindblad generator for the driven atom-cavity system and its
//! steady state.
//!
//! Basis |atom, n> with atom in {g, e} and n = 0..=nmax, flattened as
//! atom * (nmax + 1) + n. Density matrices are vectorized row-major, so that
//! vec(A rho B) = (A kron B^T) vec(rho).

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use super::{CavityError, CavitySystem, Result, TRUNCATION_WARNING};

type CMatrix = DMatrix<Complex64>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

struct Operators {
    dim: usize,
    a: CMatrix,
    sigma_minus: CMatrix,
    number: CMatrix,
    excited: CMatrix,
    ground: CMatrix,
}

impl Operators {
    fn new(nmax: usize) -> Self {
        let nf = nmax + 1;
        let dim = 2 * nf;
        let idx = |atom: usize, n: usize| atom * nf + n;
        let mut a = CMatrix::zeros(dim, dim);
        let mut sigma_minus = CMatrix::zeros(dim, dim);
        let mut number = CMatrix::zeros(dim, dim);
        let mut excited = CMatrix::zeros(dim, dim);
        let mut ground = CMatrix::zeros(dim, dim);
        for atom in 0..2 {
            for n in 0..nf {
                if n > 0 {
                    a[(idx(atom, n - 1), idx(atom, n))] = Complex64::new((n as f64).sqrt(), 0.0);
                }
                number[(idx(atom, n), idx(atom, n))] = Complex64::new(n as f64, 0.0);
            }
        }
        for n in 0..nf {
            sigma_minus[(idx(0, n), idx(1, n))] = ONE;
            excited[(idx(1, n), idx(1, n))] = ONE;
            ground[(idx(0, n), idx(0, n))] = ONE;
        }
        Operators { dim, a, sigma_minus, number, excited, ground }
    }
}

// L[(i,j),(k,l)] += c A_ik B_lj, i.e. the superoperator of rho -> c A rho B.
fn add_sandwich(sup: &mut CMatrix, c: Complex64, a: &CMatrix, b: &CMatrix) {
    let d = a.nrows();
    let a_nz: Vec<(usize, usize, Complex64)> = nonzeros(a);
    let b_nz: Vec<(usize, usize, Complex64)> = nonzeros(b);
    for &(i, k, aik) in &a_nz {
        for &(l, j, blj) in &b_nz {
            sup[(i * d + j, k * d + l)] += c * aik * blj;
        }
    }
}

fn nonzeros(m: &CMatrix) -> Vec<(usize, usize, Complex64)> {
    let mut out = Vec::new();
    for c in 0..m.ncols() {
        for r in 0..m.nrows() {
            let v = m[(r, c)];
            if v != ZERO {
                out.push((r, c, v));
            }
        }
    }
    out
}

fn hamiltonian(sys: &CavitySystem, ops: &Operators, drive: f64, omega_p: f64) -> CMatrix {
    let g = sys.g();
    let ad = ops.a.adjoint();
    let sp = ops.sigma_minus.adjoint();
    let coupling = &ad * &ops.sigma_minus + &sp * &ops.a;
    &ops.number * Complex64::from(sys.omega_c - omega_p)
        + &ops.excited * Complex64::from(sys.omega_a + sys.delta_e - omega_p)
        + &ops.ground * Complex64::from(sys.delta_b)
        + coupling * Complex64::from(g)
        + (&ops.a + &ad) * Complex64::from(drive)
}

fn liouvillian(sys: &CavitySystem, ops: &Operators, drive: f64, omega_p: f64) -> CMatrix {
    let d = ops.dim;
    let id = CMatrix::identity(d, d);
    let h = hamiltonian(sys, ops, drive, omega_p);
    let mut sup = CMatrix::zeros(d * d, d * d);
    add_sandwich(&mut sup, -I, &h, &id);
    add_sandwich(&mut sup, I, &id, &h);
    let jumps = [
        (&ops.a * Complex64::from((2.0 * sys.kappa).sqrt())),
        (&ops.sigma_minus * Complex64::from((2.0 * sys.gamma).sqrt())),
    ];
    for l in &jumps {
        let ld = l.adjoint();
        let ldl = &ld * l;
        add_sandwich(&mut sup, ONE, l, &ld);
        add_sandwich(&mut sup, Complex64::from(-0.5), &ldl, &id);
        add_sandwich(&mut sup, Complex64::from(-0.5), &id, &ldl);
    }
    sup
}

/// Steady state and its diagnostics.
#[derive(Debug, Clone)]
pub struct SteadyState {
    pub rho: CMatrix,
    pub nmax: usize,
    /// <a+ a>.
    pub mean_n: f64,
    /// <a+ a+ a a>.
    pub pair_moment: f64,
    /// <n> / (drive / kappa)^2.
    pub transmission: f64,
    pub trace_error: f64,
    pub hermiticity_error: f64,
    pub min_eigenvalue: f64,
    /// Population of the highest Fock level kept.
    pub top_fock_population: f64,
    /// Set when the top Fock population exceeds the warning threshold.
    pub truncation_warning: bool,
    /// Set when <n> >= 0.1 nmax, i.e. the drive is not weak for this truncation.
    pub drive_warning: bool,
}

impl SteadyState {
    /// None when <n> = 0.
    pub fn g2(&self) -> Option<f64> {
        (self.mean_n > 0.0).then(|| self.pair_moment / (self.mean_n * self.mean_n))
    }
}

/// Solves L[rho] = 0 with unit trace for cavity drive `drive` (rad/s) at
/// probe frequency `omega_p`. One generator row is replaced by the trace
/// condition; the dense LU solution gets one step of iterative refinement.
pub fn steady_state(sys: &CavitySystem, drive: f64, omega_p: f64) -> Result<SteadyState> {
    sys.validate()?;
    if !(drive >= 0.0 && drive.is_finite()) {
        return Err(CavityError::OutOfRange { what: "drive", bound: "non-negative", value: drive });
    }
    if !omega_p.is_finite() {
        return Err(CavityError::OutOfRange { what: "omega_p", bound: "finite", value: omega_p });
    }
    let ops = Operators::new(sys.nmax);
    let d = ops.dim;
    let mut sup = liouvillian(sys, &ops, drive, omega_p);
    for col in 0..d * d {
        sup[(0, col)] = ZERO;
    }
    for i in 0..d {
        sup[(0, i * d + i)] = ONE;
    }
    let mut rhs = DVector::<Complex64>::zeros(d * d);
    rhs[0] = ONE;

    let singular = || CavityError::Singular { g: sys.g(), kappa: sys.kappa, gamma: sys.gamma, omega_p };
    let lu = sup.clone().lu();
    let mut x = lu.solve(&rhs).ok_or_else(singular)?;
    let residual = &rhs - &sup * &x;
    if let Some(dx) = lu.solve(&residual) {
        x += dx;
    }
    if x.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(singular());
    }

    let rho = CMatrix::from_fn(d, d, |i, j| x[i * d + j]);
    let nf = sys.nmax + 1;
    let mut trace = ZERO;
    let mut mean_n = 0.0;
    let mut pair_moment = 0.0;
    let mut top = 0.0;
    for atom in 0..2 {
        for n in 0..nf {
            let k = atom * nf + n;
            let p = rho[(k, k)].re;
            trace += rho[(k, k)];
            mean_n += n as f64 * p;
            pair_moment += (n * n.saturating_sub(1)) as f64 * p;
            if n == sys.nmax {
                top += p;
            }
        }
    }
    let hermiticity_error = (0..d)
        .flat_map(|i| (0..d).map(move |j| (i, j)))
        .map(|(i, j)| (rho[(i, j)] - rho[(j, i)].conj()).norm())
        .fold(0.0, f64::max);
    let hermitian = (&rho + rho.adjoint()) * Complex64::from(0.5);
    let min_eigenvalue = SymmetricEigen::new(hermitian).eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    let scale = drive / sys.kappa;
    let transmission = if scale > 0.0 { mean_n / (scale * scale) } else { 0.0 };

    Ok(SteadyState {
        nmax: sys.nmax,
        mean_n,
        pair_moment,
        transmission,
        trace_error: (trace - ONE).norm(),
        hermiticity_error,
        min_eigenvalue,
        top_fock_population: top,
        truncation_warning: top > TRUNCATION_WARNING,
        drive_warning: mean_n >= 0.1 * sys.nmax as f64,
        rho,
    })
}
