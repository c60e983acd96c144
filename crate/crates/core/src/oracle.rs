//! Brute-force reference: the full `2^N`-dimensional Hamiltonian
//!
//! ```text
//! H = ω Σ I_nz + (g/2) Σ_{m≠n} (ζ I_mz I_nz − I_mx I_nx − I_my I_ny)
//! ```
//!
//! in the product basis, diagonalized numerically, with
//! `P_n(t) = tr{e^{iHt} I_1z e^{−iHt} I_nz} / tr{I_1z²}`.
//!
//! The transverse part `I_mx I_nx + I_my I_ny = ½(I_m⁺I_n⁻ + I_m⁻I_n⁺)` is real,
//! so every stored operator is a real symmetric matrix. Basis state `s` has
//! spin `n` (0-based) down when bit `n` of `s` is set.

use crate::error::{Error, Result};
use crate::numeric::{DenseMatrix, SymmetricEigen};
use crate::spectral_cg::{multiplicity_w, HalfInt};

pub const MAX_ORACLE_SPINS: usize = 12;

/// Dense spin operators of an `N`-spin cluster plus one Hamiltonian.
#[derive(Debug, Clone)]
pub struct SpinOperatorSet {
    n_spins: usize,
    omega: f64,
    g: f64,
    zeta: f64,
    hamiltonian: DenseMatrix,
    total_spin_sq: DenseMatrix,
}

fn spin_z(state: usize, spin: usize) -> f64 {
    if state >> spin & 1 == 0 {
        0.5
    } else {
        -0.5
    }
}

/// Builds `Σ_{m<n} [c_zz I_mz I_nz + c_ff (I_m⁺I_n⁻ + I_m⁻I_n⁺)] + diag(f(s))`.
fn pair_operator(n: usize, c_zz: f64, c_ff: f64, diag: impl Fn(usize) -> f64) -> DenseMatrix {
    let dim = 1usize << n;
    let mut h = DenseMatrix::zeros(dim);
    for s in 0..dim {
        let mut d = diag(s);
        for a in 0..n {
            for b in a + 1..n {
                d += c_zz * spin_z(s, a) * spin_z(s, b);
                if (s >> a & 1) != (s >> b & 1) {
                    let flipped = s ^ (1 << a) ^ (1 << b);
                    h[(s, flipped)] += c_ff;
                }
            }
        }
        h[(s, s)] += d;
    }
    h
}

pub fn build_operators(n: usize, omega: f64, g: f64, zeta: f64) -> Result<SpinOperatorSet> {
    if !(2..=MAX_ORACLE_SPINS).contains(&n) {
        return Err(Error::SpinCountOutOfRange { n, min: 2, max: MAX_ORACLE_SPINS });
    }
    for (name, v) in [("omega", omega), ("g", g), ("zeta", zeta)] {
        if !v.is_finite() {
            return Err(Error::Domain(format!("{name}={v} must be finite")));
        }
    }
    let total_z = |s: usize| (0..n).map(|a| spin_z(s, a)).sum::<f64>();
    let hamiltonian = pair_operator(n, g * zeta, -0.5 * g, |s| omega * total_z(s));
    // I² = Σ_n I_n² + 2 Σ_{m<n} I_m·I_n = 3N/4 + Σ_{m<n} (2 I_mz I_nz + I_m⁺I_n⁻ + I_m⁻I_n⁺)
    let total_spin_sq = pair_operator(n, 2.0, 1.0, |_| 0.75 * n as f64);
    Ok(SpinOperatorSet { n_spins: n, omega, g, zeta, hamiltonian, total_spin_sq })
}

impl SpinOperatorSet {
    pub fn n_spins(&self) -> usize {
        self.n_spins
    }

    pub fn dimension(&self) -> usize {
        1 << self.n_spins
    }

    pub fn parameters(&self) -> (f64, f64, f64) {
        (self.omega, self.g, self.zeta)
    }

    pub fn hamiltonian(&self) -> &DenseMatrix {
        &self.hamiltonian
    }

    pub fn total_spin_sq(&self) -> &DenseMatrix {
        &self.total_spin_sq
    }

    /// Same cluster with the Hamiltonian replaced by `−(g/2) I²`.
    pub fn effective(&self) -> Self {
        let dim = self.dimension();
        let h = DenseMatrix::from_fn(dim, |r, c| -0.5 * self.g * self.total_spin_sq[(r, c)]);
        Self { omega: 0.0, zeta: 0.0, hamiltonian: h, ..self.clone() }
    }

    /// Diagonal of `I_nz` (0-based spin index).
    pub fn spin_z_diagonal(&self, spin: usize) -> Vec<f64> {
        (0..self.dimension()).map(|s| spin_z(s, spin)).collect()
    }

    pub fn total_z_diagonal(&self) -> Vec<f64> {
        (0..self.dimension())
            .map(|s| (0..self.n_spins).map(|a| spin_z(s, a)).sum())
            .collect()
    }

    pub fn total_z(&self) -> DenseMatrix {
        let d = self.total_z_diagonal();
        DenseMatrix::from_fn(self.dimension(), |r, c| if r == c { d[r] } else { 0.0 })
    }

    /// Total `I_x`.
    pub fn total_x(&self) -> DenseMatrix {
        self.transverse(|_| 0.5)
    }

    /// Real matrix `K` with `I_y = i K`; `K = ½ Σ (I⁻ − I⁺)` is antisymmetric.
    pub fn total_y_skew(&self) -> DenseMatrix {
        self.transverse(|up| if up { 0.5 } else { -0.5 })
    }

    /// Single-spin flips with amplitude `amp(spin was up)`.
    fn transverse(&self, amp: impl Fn(bool) -> f64) -> DenseMatrix {
        let dim = self.dimension();
        let mut m = DenseMatrix::zeros(dim);
        for s in 0..dim {
            for a in 0..self.n_spins {
                m[(s ^ (1 << a), s)] = amp(s >> a & 1 == 0);
            }
        }
        m
    }

    /// `max |[H, I²]|`.
    pub fn commutator_residual(&self) -> f64 {
        let ab = self.hamiltonian.matmul(&self.total_spin_sq);
        let ba = self.total_spin_sq.matmul(&self.hamiltonian);
        ab.sub(&ba).max_abs()
    }

    /// Diagonalizes the Hamiltonian block by block.
    pub fn evolution(&self) -> Result<Evolution> {
        Evolution::new(self, &self.hamiltonian)
    }

    /// Eigenvalues of `I²` grouped as `(I, count)`; fails if an eigenvalue is
    /// not within 1e-8 of some `I(I+1)`.
    pub fn total_spin_multiplicities(&self) -> Result<Vec<(HalfInt, usize)>> {
        let spectrum = Evolution::new(self, &self.total_spin_sq)?;
        let mut counts = vec![0usize; self.n_spins + 1];
        for v in spectrum.eigenvalues() {
            // I(I+1) = v  =>  2I = sqrt(4v + 1) − 1
            let doubled = ((4.0 * v + 1.0).max(0.0).sqrt() - 1.0).round();
            let i = HalfInt::from_doubled(doubled as i64);
            if doubled < 0.0 || doubled as usize > self.n_spins || (i.casimir() - v).abs() > 1e-8 {
                return Err(Error::Domain(format!("I² eigenvalue {v} is not of the form I(I+1)")));
            }
            counts[doubled as usize] += 1;
        }
        Ok(counts
            .into_iter()
            .enumerate()
            .filter(|&(_, c)| c > 0)
            .map(|(d, c)| (HalfInt::from_doubled(d as i64), c))
            .collect())
    }

    /// `(2I + 1) w(I)` for every total spin of the cluster.
    pub fn expected_multiplicities(&self) -> Result<Vec<(HalfInt, usize)>> {
        let n = self.n_spins;
        crate::spectral_cg::fragment_spins(n)
            .map(|i| Ok((i, ((i.doubled() + 1) as f64 * multiplicity_w(i, n)?).round() as usize)))
            .collect()
    }
}

/// Connected components of the sparsity graph of `m`, each sorted.
fn blocks_of(m: &DenseMatrix) -> Vec<Vec<usize>> {
    let dim = m.dim();
    let mut parent: Vec<usize> = (0..dim).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for r in 0..dim {
        for (c, &v) in m.row(r).iter().enumerate().skip(r + 1) {
            if v != 0.0 || m[(c, r)] != 0.0 {
                let (a, b) = (find(&mut parent, r), find(&mut parent, c));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; dim];
    for s in 0..dim {
        let root = find(&mut parent, s);
        if slot[root] == usize::MAX {
            slot[root] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[root]].push(s);
    }
    groups
}

#[derive(Debug, Clone)]
struct Block {
    states: Vec<usize>,
    eigen: SymmetricEigen,
}

/// Eigendecomposition of a block-diagonal symmetric operator.
#[derive(Debug, Clone)]
pub struct Evolution {
    n_spins: usize,
    blocks: Vec<Block>,
}

impl Evolution {
    fn new(ops: &SpinOperatorSet, m: &DenseMatrix) -> Result<Self> {
        let blocks = blocks_of(m)
            .into_iter()
            .map(|states| {
                let sub = DenseMatrix::from_fn(states.len(), |r, c| m[(states[r], states[c])]);
                SymmetricEigen::new(&sub).map(|eigen| Block { states, eigen })
            })
            .collect::<Result<_>>()?;
        Ok(Self { n_spins: ops.n_spins, blocks })
    }

    pub fn eigenvalues(&self) -> impl Iterator<Item = f64> + '_ {
        self.blocks.iter().flat_map(|b| b.eigen.values.iter().copied())
    }

    pub fn block_sizes(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.states.len()).collect()
    }

    /// `V_bᵀ diag(z) V_b` for each block.
    fn projected(&self, spin: usize) -> Vec<DenseMatrix> {
        self.blocks
            .iter()
            .map(|b| {
                let d = b.states.len();
                let z: Vec<f64> = b.states.iter().map(|&s| spin_z(s, spin)).collect();
                let v = &b.eigen.vectors;
                DenseMatrix::from_fn(d, |j, k| (0..d).map(|s| v[(s, j)] * z[s] * v[(s, k)]).sum())
            })
            .collect()
    }

    /// `(λ_j − λ_k, A_jk B_jk)` over `j ≤ k`, with off-diagonal weights doubled.
    fn pair_weights(&self, spin: usize) -> Vec<(f64, f64)> {
        let first = self.projected(0);
        let other = if spin == 0 { first.clone() } else { self.projected(spin) };
        let mut out = Vec::new();
        for ((b, a), bm) in self.blocks.iter().zip(&first).zip(&other) {
            let lam = &b.eigen.values;
            for j in 0..lam.len() {
                out.push((0.0, a[(j, j)] * bm[(j, j)]));
                for k in j + 1..lam.len() {
                    let w = 2.0 * a[(j, k)] * bm[(j, k)];
                    if w != 0.0 {
                        out.push((lam[j] - lam[k], w));
                    }
                }
            }
        }
        out
    }

    /// `P_n(t)` for 1-based spin index `n` at each time `t`.
    pub fn polarization_series(&self, n: usize, times: &[f64]) -> Result<Vec<f64>> {
        if n == 0 || n > self.n_spins {
            return Err(Error::IndexOutOfRange { index: n, max: self.n_spins });
        }
        let weights = self.pair_weights(n - 1);
        let norm = 4.0 / (1u64 << self.n_spins) as f64;
        Ok(times
            .iter()
            .map(|&t| norm * weights.iter().map(|&(f, w)| w * (f * t).cos()).sum::<f64>())
            .collect())
    }

    pub fn polarization(&self, n: usize, t: f64) -> Result<f64> {
        Ok(self.polarization_series(n, &[t])?[0])
    }
}

/// `P_n(t)` from a fresh diagonalization of `ops`.
pub fn polarization_trace_exact(ops: &SpinOperatorSet, n: usize, t: f64) -> Result<f64> {
    ops.evolution()?.polarization(n, t)
}

/// Oracle `P₁` at dimensionless times `τ = g t / 2` under `−(g/2) I²` with `g = 1`.
pub fn oracle_p1_tau(n: usize, taus: &[f64]) -> Result<Vec<f64>> {
    let ops = build_operators(n, 0.0, 1.0, 0.0)?.effective();
    let times: Vec<f64> = taus.iter().map(|tau| 2.0 * tau).collect();
    ops.evolution()?.polarization_series(1, &times)
}

/// Largest deviations found by [`invariance_check`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvarianceReport {
    /// full Hamiltonian vs `−(g/2) I²`, any spin
    pub model_gap: f64,
    /// `|Σ_n P_n − 1|`
    pub conservation: f64,
    /// spread of `P_2 … P_N`
    pub equivalence: f64,
}

impl InvarianceReport {
    pub fn max_deviation(&self) -> f64 {
        self.model_gap.max(self.conservation).max(self.equivalence)
    }

    pub fn passes(&self, tolerance: f64) -> bool {
        self.max_deviation() < tolerance
    }
}

/// Compares `P_n(t)` under the full Hamiltonian for each `(ω, ζ)` with the
/// effective `−(g/2) I²`, and checks conservation and equivalence of spins
/// `2..=N`.
pub fn invariance_check(n: usize, g: f64, times: &[f64], parameter_sets: &[(f64, f64)]) -> Result<InvarianceReport> {
    if n > 10 {
        return Err(Error::SpinCountOutOfRange { n, min: 2, max: 10 });
    }
    let base = build_operators(n, 0.0, g, 0.0)?;
    let reference = base.effective().evolution()?;
    let reference_traces: Vec<Vec<f64>> =
        (1..=n).map(|k| reference.polarization_series(k, times)).collect::<Result<_>>()?;

    let mut report = InvarianceReport { model_gap: 0.0, conservation: 0.0, equivalence: 0.0 };
    let mut all = vec![reference_traces.clone()];
    for &(omega, zeta) in parameter_sets {
        let evo = build_operators(n, omega, g, zeta)?.evolution()?;
        let traces: Vec<Vec<f64>> = (1..=n).map(|k| evo.polarization_series(k, times)).collect::<Result<_>>()?;
        for (got, want) in traces.iter().zip(&reference_traces) {
            for (x, y) in got.iter().zip(want) {
                report.model_gap = report.model_gap.max((x - y).abs());
            }
        }
        all.push(traces);
    }
    for traces in &all {
        for i in 0..times.len() {
            let total: f64 = traces.iter().map(|tr| tr[i]).sum();
            report.conservation = report.conservation.max((total - 1.0).abs());
            for other in &traces[2..] {
                report.equivalence = report.equivalence.max((other[i] - traces[1][i]).abs());
            }
        }
    }
    Ok(report)
}
