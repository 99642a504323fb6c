//! Example systems and seeded random ensembles.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{self, DISTRIBUTION_TOL};
use crate::propagation::{LindbladModel, NonHermitianModel};
use crate::state::{DensityOperator, StateVector};
use crate::{c64, ComplexMatrix, ComplexVector};

/// Continuous-time Markov chain with rates `W[nu][mu]` for the transition
/// `mu -> nu` and initial distribution `P(., 0)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalMarkovModel {
    rates: Vec<Vec<f64>>,
    initial: Vec<f64>,
}

impl ClassicalMarkovModel {
    /// Diagonal entries of `rates` are ignored.
    pub fn new(rates: Vec<Vec<f64>>, initial: Vec<f64>) -> Result<Self> {
        let n = rates.len();
        if n == 0 {
            return Err(Error::BadParameter("Markov chain needs at least one state".into()));
        }
        for (nu, row) in rates.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Shape(format!("rate row {nu} has {} entries, expected {n}", row.len())));
            }
            for (mu, &w) in row.iter().enumerate() {
                if nu != mu && !(w.is_finite() && w >= 0.0) {
                    return Err(Error::BadParameter(format!(
                        "rate W[{nu}][{mu}] = {w} must be finite and nonnegative"
                    )));
                }
            }
        }
        if initial.len() != n {
            return Err(Error::Shape(format!("initial distribution has {} entries, expected {n}", initial.len())));
        }
        metrics::validate_distribution(&initial)?;
        let mut rates = rates;
        for (k, row) in rates.iter_mut().enumerate() {
            row[k] = 0.0;
        }
        Ok(Self { rates, initial })
    }

    pub fn n_states(&self) -> usize {
        self.rates.len()
    }

    pub fn rates(&self) -> &[Vec<f64>] {
        &self.rates
    }

    pub fn initial(&self) -> &[f64] {
        &self.initial
    }

    /// Generator `G` of `dP/dt = G P`, with `G[mu][mu] = -sum_{nu != mu} W[nu][mu]`.
    pub fn generator(&self) -> DMatrix<f64> {
        let n = self.n_states();
        let mut g = DMatrix::from_fn(n, n, |nu, mu| self.rates[nu][mu]);
        for mu in 0..n {
            g[(mu, mu)] = -(0..n).map(|nu| self.rates[nu][mu]).sum::<f64>();
        }
        g
    }

    /// `P(t) = e^{G t} P(0)`, clipped to the simplex against roundoff.
    pub fn distribution_at(&self, t: f64) -> Result<Vec<f64>> {
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::BadParameter(format!("time {t} must be finite and nonnegative")));
        }
        let prop = (self.generator() * t).exp();
        if !prop.iter().all(|x| x.is_finite()) {
            return Err(Error::NumericalOverflow);
        }
        let p = prop * nalgebra::DVector::from_column_slice(&self.initial);
        let mut p: Vec<f64> = p.iter().map(|&x| x.max(0.0)).collect();
        let total: f64 = p.iter().sum();
        if (total - 1.0).abs() > DISTRIBUTION_TOL.sqrt() {
            return Err(Error::IntegratorDiverged(format!("probability total drifted to {total}")));
        }
        p.iter_mut().for_each(|x| *x /= total);
        Ok(p)
    }

    /// Dynamical activity rate `sum_{nu != mu} W[nu][mu] p[mu]`.
    pub fn activity(&self, p: &[f64]) -> Result<f64> {
        if p.len() != self.n_states() {
            return Err(Error::Shape(format!("distribution has {} entries, expected {}", p.len(), self.n_states())));
        }
        Ok(self.rates.iter().map(|row| row.iter().zip(p).map(|(w, q)| w * q).sum::<f64>()).sum())
    }

    /// Activity rate of the initial distribution.
    pub fn initial_activity(&self) -> f64 {
        self.activity(&self.initial).expect("validated length")
    }

    pub fn initial_density(&self) -> Result<DensityOperator> {
        DensityOperator::diagonal(&self.initial)
    }
}

fn basis_op(n: usize, nu: usize, mu: usize, amplitude: f64) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(n, n);
    m[(nu, mu)] = c64(amplitude, 0.0);
    m
}

fn diag(v: &[f64]) -> ComplexMatrix {
    ComplexMatrix::from_diagonal(&ComplexVector::from_iterator(v.len(), v.iter().map(|&x| c64(x, 0.0))))
}

fn positive(name: &str, x: f64) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(Error::BadParameter(format!("{name} = {x} must be positive")))
    }
}

/// Pure dephasing `H_S = 0`, `L = sqrt(gamma) sigma_z`.
pub fn make_dephasing(gamma: f64) -> Result<LindbladModel> {
    positive("gamma", gamma)?;
    LindbladModel::new(ComplexMatrix::zeros(2, 2), vec![diag(&[1.0, -1.0]) * c64(gamma.sqrt(), 0.0)])
}

/// Thermal occupation `1 / (e^{beta omega} - 1)`.
pub fn thermal_occupation(beta: f64, omega: f64) -> f64 {
    1.0 / (beta * omega).exp_m1()
}

/// Parameters of the three-level autonomous refrigerator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RefrigeratorParams {
    pub gamma: f64,
    pub omega1: f64,
    pub omega2: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub beta3: f64,
}

impl RefrigeratorParams {
    /// `omega3 = omega1 + omega2`.
    pub fn omega3(&self) -> f64 {
        self.omega1 + self.omega2
    }

    /// Rates `W[nu][mu]` on the basis `(g, A, B)`.
    pub fn rates(&self) -> [[f64; 3]; 3] {
        let n1 = thermal_occupation(self.beta1, self.omega1);
        let n2 = thermal_occupation(self.beta2, self.omega2);
        let n3 = thermal_occupation(self.beta3, self.omega3());
        let g = self.gamma;
        [[0.0, g * (n1 + 1.0), g * (n3 + 1.0)], [g * n1, 0.0, g * (n2 + 1.0)], [g * n3, g * n2, 0.0]]
    }
}

/// Three-level refrigerator on `(g, A, B)` with energies `(0, omega1, omega1 + omega2)`,
/// coupled to three baths; jumps `sqrt(W[nu][mu]) |nu><mu|` in the order
/// `Ag, gA, BA, AB, Bg, gB`.
pub fn make_refrigerator(
    gamma: f64,
    omega1: f64,
    omega2: f64,
    beta1: f64,
    beta2: f64,
    beta3: f64,
) -> Result<LindbladModel> {
    for (name, x) in
        [("gamma", gamma), ("omega1", omega1), ("omega2", omega2), ("beta1", beta1), ("beta2", beta2), ("beta3", beta3)]
    {
        positive(name, x)?;
    }
    let p = RefrigeratorParams { gamma, omega1, omega2, beta1, beta2, beta3 };
    let w = p.rates();
    let jumps = [(1, 0), (0, 1), (2, 1), (1, 2), (2, 0), (0, 2)]
        .iter()
        .map(|&(nu, mu)| basis_op(3, nu, mu, w[nu][mu].sqrt()))
        .collect();
    LindbladModel::new(diag(&[0.0, omega1, p.omega3()]), jumps)
}

/// Embedding `H_S = 0`, `L = sqrt(W[nu][mu]) |nu><mu|` for every positive rate.
pub fn make_classical(markov: &ClassicalMarkovModel) -> Result<LindbladModel> {
    let n = markov.n_states();
    let mut jumps = Vec::new();
    for nu in 0..n {
        for mu in 0..n {
            let w = markov.rates()[nu][mu];
            if nu != mu && w > 0.0 {
                jumps.push(basis_op(n, nu, mu, w.sqrt()));
            }
        }
    }
    LindbladModel::new(ComplexMatrix::zeros(n, n), jumps)
}

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian_complex<R: Rng + ?Sized>(rng: &mut R) -> crate::C64 {
    c64(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Haar-random unitary from the QR decomposition of a Ginibre matrix.
pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    let g = ComplexMatrix::from_fn(dim, dim, |_, _| gaussian_complex(rng));
    let (q, r) = g.qr().unpack();
    let phases = ComplexMatrix::from_diagonal(&ComplexVector::from_iterator(
        dim,
        (0..dim).map(|k| {
            let d = r[(k, k)];
            if d.norm() > 0.0 {
                d / d.norm()
            } else {
                c64(1.0, 0.0)
            }
        }),
    ));
    q * phases
}

/// Random commuting pair: `H` eigenvalues uniform in `[-1, 1]`, `Gamma`
/// eigenvalues uniform in `[0, gamma_scale]`, sharing a Haar-random eigenbasis.
pub fn random_commuting(dim: usize, seed: u64, gamma_scale: f64) -> Result<NonHermitianModel> {
    if dim < 2 {
        return Err(Error::BadParameter(format!("dimension {dim} must be at least 2")));
    }
    if !(gamma_scale.is_finite() && gamma_scale >= 0.0) {
        return Err(Error::BadParameter(format!("gamma_scale = {gamma_scale} must be nonnegative")));
    }
    let mut rng = seeded_rng(seed);
    let u = random_unitary(dim, &mut rng);
    let e: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..=1.0)).collect();
    let g: Vec<f64> = (0..dim).map(|_| gamma_scale * rng.random::<f64>()).collect();
    let h = &u * diag(&e) * u.adjoint();
    let gamma = &u * diag(&g) * u.adjoint();
    NonHermitianModel::new(crate::linalg::hermitian_part(&h), crate::linalg::hermitian_part(&gamma))
}

/// Random Lindblad model with diagonal `H_S`, transition jumps
/// `sqrt(W) |nu><mu|` and one complex diagonal dephasing jump, so that `H_S`
/// and `sum L^dagger L` are both diagonal.
pub fn random_diagonal_lindblad(dim: usize, seed: u64, rate_scale: f64) -> Result<LindbladModel> {
    if dim < 2 {
        return Err(Error::BadParameter(format!("dimension {dim} must be at least 2")));
    }
    positive("rate_scale", rate_scale)?;
    let mut rng = seeded_rng(seed);
    let e: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..=1.0)).collect();
    let mut jumps = Vec::new();
    for nu in 0..dim {
        for mu in 0..dim {
            if nu != mu && rng.random::<f64>() < 0.7 {
                jumps.push(basis_op(dim, nu, mu, (rate_scale * rng.random::<f64>()).sqrt()));
            }
        }
    }
    let deph = ComplexVector::from_fn(dim, |_, _| gaussian_complex(&mut rng) * (0.5 * rate_scale).sqrt());
    jumps.push(ComplexMatrix::from_diagonal(&deph));
    LindbladModel::new(diag(&e), jumps)
}

/// Random chain with every rate uniform in `[0, rate_scale]` and a random initial distribution.
pub fn random_classical(n_states: usize, seed: u64, rate_scale: f64) -> Result<ClassicalMarkovModel> {
    if n_states < 2 {
        return Err(Error::BadParameter(format!("chain needs at least 2 states, got {n_states}")));
    }
    positive("rate_scale", rate_scale)?;
    let mut rng = seeded_rng(seed);
    let rates = (0..n_states).map(|_| (0..n_states).map(|_| rate_scale * rng.random::<f64>()).collect()).collect();
    ClassicalMarkovModel::new(rates, random_distribution(n_states, &mut rng))
}

/// Random Hermitian matrix `(G + G^dagger) / 2` from a Ginibre matrix.
pub fn random_hermitian<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    let g = ComplexMatrix::from_fn(dim, dim, |_, _| gaussian_complex(rng));
    crate::linalg::hermitian_part(&g)
}

/// Uniform sample from the probability simplex.
pub fn random_distribution<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    let x: Vec<f64> = (0..n).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let total: f64 = x.iter().sum();
    x.into_iter().map(|v| v / total).collect()
}

/// Haar-random pure state.
pub fn random_pure_state<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<StateVector> {
    let v = ComplexVector::from_fn(dim, |_, _| gaussian_complex(rng));
    Ok(StateVector::new(v)?.normalize()?.0)
}

/// Random full-rank mixed state `G G^dagger / Tr` from a Ginibre matrix.
pub fn random_density<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<DensityOperator> {
    let g = ComplexMatrix::from_fn(dim, dim, |_, _| gaussian_complex(rng));
    let m = &g * g.adjoint();
    let tr = crate::linalg::trace(&m).re;
    DensityOperator::new(crate::linalg::hermitian_part(&(m / c64(tr, 0.0))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::closed::commutator_check;
    use crate::linalg::max_abs;
    use crate::propagation::{evolve_lindblad, kraus_step};

    #[test]
    fn dephasing_structure() {
        let m = make_dephasing(1.0).unwrap();
        assert!(max_abs(&(m.dissipation_rate_operator() - ComplexMatrix::identity(2, 2))) < 1e-15);
        assert!(max_abs(&(m.effective_hamiltonian() - ComplexMatrix::identity(2, 2) * c64(0.0, -0.5))) < 1e-15);
        assert!(matches!(make_dephasing(0.0), Err(Error::BadParameter(_))));
        assert!(matches!(make_dephasing(-1.0), Err(Error::BadParameter(_))));
    }

    #[test]
    fn dephasing_kraus_step_scales_coherence() {
        // L = sqrt(gamma / 2) sigma_z reproduces the rate-gamma Kraus form.
        let (gamma, dt) = (0.8, 1e-3);
        let m = make_dephasing(gamma / 2.0).unwrap();
        let rho = DensityOperator::new(ComplexMatrix::from_element(2, 2, c64(0.5, 0.0))).unwrap();
        let out = kraus_step(&m, &rho, dt).unwrap();
        let q = gamma * dt / 2.0;
        assert!((out.matrix()[(0, 1)].re - 0.5 * (1.0 - 2.0 * q)).abs() <= (gamma * dt).powi(2));
    }

    #[test]
    fn dephasing_coherence_fades() {
        let m = make_dephasing(1.0).unwrap();
        let rho = DensityOperator::new(ComplexMatrix::from_element(2, 2, c64(0.5, 0.0))).unwrap();
        let out = evolve_lindblad(&m, &rho, 20.0).unwrap();
        assert!(out.matrix()[(0, 1)].norm() < 1e-8);
    }

    #[test]
    fn refrigerator_rates() {
        let m = make_refrigerator(1.0, 1.0, 0.5, 1.0, 1.0, 1.0).unwrap();
        let w_ag = m.jumps()[0][(1, 0)].norm_sqr();
        let w_ga = m.jumps()[1][(0, 1)].norm_sqr();
        let e = 1f64.exp();
        assert!((w_ag - 1.0 / (e - 1.0)).abs() < 1e-14);
        assert!((w_ga - e / (e - 1.0)).abs() < 1e-14);
        assert!((w_ag / w_ga - (-1f64).exp()).abs() < 1e-14);
        assert!(commutator_check(m.h_s(), &m.dissipation_rate_operator()).0 <= 1e-14);
        let cold = make_refrigerator(1.0, 1.0, 0.5, 1e3, 1e3, 1e3).unwrap();
        for k in [0, 2, 4] {
            assert!(max_abs(&cold.jumps()[k]) < 1e-100);
        }
        for k in [1, 3, 5] {
            assert!((max_abs(&cold.jumps()[k]) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn refrigerator_coherent_start_is_not_classical() {
        let m = make_refrigerator(1.0, 1.0, 0.5, 1.0, 2.0, 0.5).unwrap();
        let psi = StateVector::uniform(3).unwrap();
        let out = evolve_lindblad(&m, &DensityOperator::from_pure(&psi).unwrap(), 0.7).unwrap();
        assert!(out.matrix()[(0, 1)].norm() > 1e-3);
    }

    #[test]
    fn classical_two_state_closed_form() {
        let chain = ClassicalMarkovModel::new(vec![vec![0.0, 1.0], vec![1.0, 0.0]], vec![1.0, 0.0]).unwrap();
        assert_eq!(chain.initial_activity(), 1.0);
        for t in [0.1, 0.5, 1.0, 3.0] {
            let p = chain.distribution_at(t).unwrap();
            let expected = (1.0 + (-2.0 * t).exp()) / 2.0;
            assert!((p[0] - expected).abs() < 1e-13);
            let rho = evolve_lindblad(&make_classical(&chain).unwrap(), &chain.initial_density().unwrap(), t).unwrap();
            assert!((rho.matrix()[(0, 0)].re - expected).abs() < 1e-10);
            assert!(rho.matrix()[(0, 1)].norm() < 1e-10);
        }
    }

    #[test]
    fn absorbing_chain_reaches_sink() {
        let chain = ClassicalMarkovModel::new(vec![vec![0.0, 0.0], vec![2.0, 0.0]], vec![1.0, 0.0]).unwrap();
        let p = chain.distribution_at(30.0).unwrap();
        assert!(p[1] > 1.0 - 1e-12);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn classical_validation() {
        assert!(ClassicalMarkovModel::new(vec![vec![0.0, -1.0], vec![1.0, 0.0]], vec![1.0, 0.0]).is_err());
        assert!(ClassicalMarkovModel::new(vec![vec![0.0, 1.0], vec![1.0, 0.0]], vec![0.7, 0.0]).is_err());
        assert!(ClassicalMarkovModel::new(vec![vec![0.0, 1.0]], vec![1.0]).is_err());
    }

    #[test]
    fn random_commuting_properties() {
        for seed in 0..20 {
            let m = random_commuting(4, seed, 1.0).unwrap();
            assert!(commutator_check(m.h(), m.gamma()).1);
            assert!(crate::linalg::herm_eig(m.gamma()).unwrap().min() >= -1e-12);
        }
        let a = random_commuting(3, 7, 0.5).unwrap();
        let b = random_commuting(3, 7, 0.5).unwrap();
        assert_eq!(a.h(), b.h());
        assert_eq!(a.gamma(), b.gamma());
        assert_eq!(max_abs(random_commuting(3, 1, 0.0).unwrap().gamma()), 0.0);
    }

    #[test]
    fn random_diagonal_lindblad_commutes() {
        for seed in 0..20 {
            let m = random_diagonal_lindblad(3, seed, 1.0).unwrap();
            assert!(commutator_check(m.h_s(), &m.dissipation_rate_operator()).1);
        }
    }
}
