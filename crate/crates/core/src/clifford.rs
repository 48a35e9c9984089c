//! Qubit Clifford groups, their qutrit embeddings, and the phase-randomized
//! extended set `C_N x {1_2 (+) (+-1)}^(x N)`.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::FRAC_1_SQRT_2;

#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;

use crate::linalg::ComplexMatrix;
use crate::register::{self, computational_indices, leakage_indices, qubit_dim, qutrit_dim};
use crate::{tol, Error, Result, C64};

/// Number of elements of the `N`-qubit Clifford group modulo global phase.
pub fn expected_cardinality(n_qubits: usize) -> Option<usize> {
    match n_qubits {
        1 => Some(24),
        2 => Some(11520),
        _ => None,
    }
}

/// Scales `u` so that its first entry of non-negligible modulus (row-major
/// scan) is real and positive.
pub fn canonicalize_phase(u: &ComplexMatrix) -> ComplexMatrix {
    match u.as_slice().iter().find(|z| z.norm() > tol::PHASE_PIVOT) {
        Some(&pivot) => u.scale(pivot.conj() / pivot.norm()),
        None => u.clone(),
    }
}

/// Quantized entries of the phase-canonical form; equal fingerprints mean
/// equal up to global phase.
pub fn fingerprint(u: &ComplexMatrix) -> Vec<i64> {
    let c = canonicalize_phase(u);
    let q = |x: f64| {
        let v = (x * tol::FINGERPRINT_SCALE).round() as i64;
        // avoid distinct keys for +0 and -0 after rounding
        if v == 0 {
            0
        } else {
            v
        }
    };
    c.as_slice()
        .iter()
        .flat_map(|z| [q(z.re), q(z.im)])
        .collect()
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn hadamard() -> ComplexMatrix {
    let h = FRAC_1_SQRT_2;
    ComplexMatrix::from_real(2, 2, &[h, h, h, -h]).expect("2x2")
}

fn phase_s() -> ComplexMatrix {
    ComplexMatrix::from_diag(&[c(1.0, 0.0), c(0.0, 1.0)])
}

fn cnot() -> ComplexMatrix {
    ComplexMatrix::from_real(
        4,
        4,
        &[
            1.0, 0.0, 0.0, 0.0, //
            0.0, 1.0, 0.0, 0.0, //
            0.0, 0.0, 0.0, 1.0, //
            0.0, 0.0, 1.0, 0.0,
        ],
    )
    .expect("4x4")
}

/// Generator names and qubit matrices: `H` and `S` on every qubit, plus a
/// CNOT (control qubit 0) for two qubits.
pub fn generators(n_qubits: usize) -> Result<Vec<(&'static str, ComplexMatrix)>> {
    let i2 = ComplexMatrix::identity(2);
    match n_qubits {
        1 => Ok(vec![("h0", hadamard()), ("s0", phase_s())]),
        2 => Ok(vec![
            ("h0", hadamard().kron(&i2)),
            ("h1", i2.kron(&hadamard())),
            ("s0", phase_s().kron(&i2)),
            ("s1", i2.kron(&phase_s())),
            ("cx01", cnot()),
        ]),
        n => Err(Error::InvalidArgument(format!(
            "Clifford group generation supports 1 or 2 qubits, got {n}"
        ))),
    }
}

/// The `N`-qubit Clifford group modulo global phase.
///
/// Elements are phase-canonical and ordered by descending fingerprint,
/// which puts the identity first. `words[i]` lists generator indices in
/// application order with `elements[i] = g[w_last] ... g[w_0]`.
#[derive(Clone, Debug)]
pub struct CliffordGroup {
    n_qubits: usize,
    generator_names: Vec<String>,
    elements: Vec<ComplexMatrix>,
    words: Vec<Vec<u8>>,
    index: BTreeMap<Vec<i64>, usize>,
}

/// Enumerates the group as the closure of its generators.
pub fn generate_clifford_group(n_qubits: usize) -> Result<CliffordGroup> {
    let gens = generators(n_qubits)?;
    let limit = expected_cardinality(n_qubits).expect("checked by generators");
    let dim = qubit_dim(n_qubits);

    let identity = ComplexMatrix::identity(dim);
    let mut seen: BTreeMap<Vec<i64>, usize> = BTreeMap::new();
    let mut elements = vec![canonicalize_phase(&identity)];
    let mut words: Vec<Vec<u8>> = vec![Vec::new()];
    seen.insert(fingerprint(&identity), 0);

    let mut head = 0;
    while head < elements.len() {
        for (g_idx, (_, g)) in gens.iter().enumerate() {
            let next = canonicalize_phase(&(g * &elements[head]));
            let key = fingerprint(&next);
            if seen.contains_key(&key) {
                continue;
            }
            if elements.len() == limit {
                return Err(Error::Integrity(format!(
                    "closure exceeded expected cardinality {limit}"
                )));
            }
            let mut word = words[head].clone();
            word.push(g_idx as u8);
            seen.insert(key, elements.len());
            elements.push(next);
            words.push(word);
        }
        head += 1;
    }
    if elements.len() != limit {
        return Err(Error::Integrity(format!(
            "closure produced {} elements, expected {limit}",
            elements.len()
        )));
    }
    CliffordGroup::from_parts(
        n_qubits,
        gens.iter().map(|(n, _)| n.to_string()).collect(),
        elements,
        words,
    )
}

impl CliffordGroup {
    /// Reassembles a group (e.g. from a cache file), re-sorting into
    /// canonical order and checking cardinality, unitarity and uniqueness.
    pub fn from_parts(
        n_qubits: usize,
        generator_names: Vec<String>,
        elements: Vec<ComplexMatrix>,
        words: Vec<Vec<u8>>,
    ) -> Result<Self> {
        let expected = expected_cardinality(n_qubits).ok_or_else(|| {
            Error::InvalidArgument(format!("unsupported group size N = {n_qubits}"))
        })?;
        if elements.len() != expected || words.len() != expected {
            return Err(Error::Integrity(format!(
                "group has {} elements ({} words), expected {expected}",
                elements.len(),
                words.len()
            )));
        }
        let dim = qubit_dim(n_qubits);
        let mut keyed: Vec<(Vec<i64>, ComplexMatrix, Vec<u8>)> = Vec::with_capacity(expected);
        for (u, w) in elements.into_iter().zip(words) {
            if u.rows() != dim || u.cols() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: u.rows(),
                });
            }
            let residual = u.unitarity_residual();
            if residual > tol::UNITARY {
                return Err(Error::NotUnitary { residual });
            }
            let u = canonicalize_phase(&u);
            keyed.push((fingerprint(&u), u, w));
        }
        keyed.sort_by(|a, b| b.0.cmp(&a.0));
        let mut index = BTreeMap::new();
        for (i, (k, _, _)) in keyed.iter().enumerate() {
            if index.insert(k.clone(), i).is_some() {
                return Err(Error::Integrity("duplicate group element".into()));
            }
        }
        let (elements, words) = keyed.into_iter().map(|(_, u, w)| (u, w)).unzip();
        Ok(Self {
            n_qubits,
            generator_names,
            elements,
            words,
            index,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn generator_names(&self) -> &[String] {
        &self.generator_names
    }

    pub fn elements(&self) -> &[ComplexMatrix] {
        &self.elements
    }

    pub fn words(&self) -> &[Vec<u8>] {
        &self.words
    }

    /// Index of the element equal to `u` up to global phase.
    pub fn find(&self, u: &ComplexMatrix) -> Option<usize> {
        self.index.get(&fingerprint(u)).copied()
    }

    /// Number of entangling generators in the word of element `i`.
    fn entangler_count(&self, i: usize) -> usize {
        self.words[i]
            .iter()
            .filter(|&&g| self.generator_names[g as usize].starts_with("cx"))
            .count()
    }
}

/// Action of a gate on the leakage subspace.
#[derive(Clone, Debug)]
pub enum LeakageAction {
    /// Identity on every non-computational state.
    Identity,
    /// Phase `phi_k` for each qudit `k` sitting in its leakage level.
    FixedPhases(Vec<f64>),
    /// Leakage block taken from a full `3^N` unitary, which must not couple
    /// the computational and leakage subspaces.
    Custom(ComplexMatrix),
}

/// A gate on the `3^N` register that preserves the computational subspace.
#[derive(Clone, Debug)]
pub struct QutritUnitary {
    n_qubits: usize,
    full: ComplexMatrix,
    comp_block: ComplexMatrix,
    leakage_diagonal: bool,
}

impl QutritUnitary {
    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.full.rows()
    }

    pub fn full(&self) -> &ComplexMatrix {
        &self.full
    }

    pub fn comp_block(&self) -> &ComplexMatrix {
        &self.comp_block
    }

    pub fn leakage_block(&self) -> ComplexMatrix {
        let leak = leakage_indices(self.n_qubits);
        self.full.select(&leak, &leak)
    }

    /// Whether the leakage block is diagonal (within `1e-12`).
    pub fn leakage_diagonal(&self) -> bool {
        self.leakage_diagonal
    }

    /// Validates an arbitrary `3^N` unitary as a leakage-preserving gate.
    pub fn from_full(full: ComplexMatrix) -> Result<Self> {
        let n_qubits = register::qubits_from_qutrit_dim(full.rows())
            .filter(|_| full.is_square())
            .ok_or(Error::DimensionMismatch {
                expected: qutrit_dim(1),
                found: full.rows(),
            })?;
        let residual = full.unitarity_residual();
        if residual > tol::UNITARY {
            return Err(Error::NotUnitary { residual });
        }
        let off = off_block_norm(&full, n_qubits);
        if off > tol::ALGEBRAIC {
            return Err(Error::MixesSubspaces { residual: off });
        }
        let comp = computational_indices(n_qubits);
        let comp_block = full.select(&comp, &comp);
        let leakage_diagonal =
            is_diagonal(&full.select(&leakage_indices(n_qubits), &leakage_indices(n_qubits)));
        Ok(Self {
            n_qubits,
            full,
            comp_block,
            leakage_diagonal,
        })
    }

    /// Assembles a gate from its two blocks without validation.
    fn from_blocks(
        n_qubits: usize,
        comp_block: &ComplexMatrix,
        leak_block: &ComplexMatrix,
    ) -> Self {
        let comp = computational_indices(n_qubits);
        let leak = leakage_indices(n_qubits);
        let d = qutrit_dim(n_qubits);
        let mut full = ComplexMatrix::zeros(d, d);
        for (i, &ri) in comp.iter().enumerate() {
            for (j, &rj) in comp.iter().enumerate() {
                full[(ri, rj)] = comp_block[(i, j)];
            }
        }
        for (i, &ri) in leak.iter().enumerate() {
            for (j, &rj) in leak.iter().enumerate() {
                full[(ri, rj)] = leak_block[(i, j)];
            }
        }
        Self {
            n_qubits,
            full,
            comp_block: comp_block.clone(),
            leakage_diagonal: is_diagonal(leak_block),
        }
    }

    /// Product `self * rhs` (apply `rhs` first).
    pub fn compose(&self, rhs: &QutritUnitary) -> QutritUnitary {
        QutritUnitary {
            n_qubits: self.n_qubits,
            full: &self.full * &rhs.full,
            comp_block: &self.comp_block * &rhs.comp_block,
            leakage_diagonal: false,
        }
        .refresh_flag()
    }

    pub fn adjoint(&self) -> QutritUnitary {
        QutritUnitary {
            n_qubits: self.n_qubits,
            full: self.full.adjoint(),
            comp_block: self.comp_block.adjoint(),
            leakage_diagonal: self.leakage_diagonal,
        }
    }

    fn refresh_flag(mut self) -> Self {
        self.leakage_diagonal = is_diagonal(&self.leakage_block());
        self
    }

    pub fn identity(n_qubits: usize) -> Self {
        let d = qutrit_dim(n_qubits);
        Self {
            n_qubits,
            full: ComplexMatrix::identity(d),
            comp_block: ComplexMatrix::identity(qubit_dim(n_qubits)),
            leakage_diagonal: true,
        }
    }
}

fn is_diagonal(m: &ComplexMatrix) -> bool {
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            if i != j && m[(i, j)].norm() > tol::ALGEBRAIC {
                return false;
            }
        }
    }
    true
}

fn off_block_norm(full: &ComplexMatrix, n_qubits: usize) -> f64 {
    let comp = computational_indices(n_qubits);
    let leak = leakage_indices(n_qubits);
    let a = full.select(&comp, &leak).max_abs();
    let b = full.select(&leak, &comp).max_abs();
    a.max(b)
}

/// Diagonal leakage block carrying phase `phi_k` for every qudit in level 2.
fn phase_leak_block(n_qubits: usize, phases: &[f64]) -> ComplexMatrix {
    let diag: Vec<C64> = leakage_indices(n_qubits)
        .iter()
        .map(|&idx| {
            let total: f64 = register::levels(n_qubits, idx)
                .iter()
                .zip(phases)
                .filter(|(&l, _)| l == 2)
                .map(|(_, &p)| p)
                .sum();
            C64::new(total.cos(), total.sin())
        })
        .collect();
    ComplexMatrix::from_diag(&diag)
}

/// Embeds a `2^N` qubit unitary into the `3^N` register.
pub fn embed_qutrit(u: &ComplexMatrix, action: &LeakageAction) -> Result<QutritUnitary> {
    let n_qubits = register::qubits_from_qubit_dim(u.rows())
        .filter(|&n| n >= 1 && u.is_square())
        .ok_or(Error::DimensionMismatch {
            expected: 2,
            found: u.rows(),
        })?;
    let residual = u.unitarity_residual();
    if residual > tol::UNITARY {
        return Err(Error::NotUnitary { residual });
    }
    let n_leak = qutrit_dim(n_qubits) - qubit_dim(n_qubits);
    let leak_block = match action {
        LeakageAction::Identity => ComplexMatrix::identity(n_leak),
        LeakageAction::FixedPhases(phases) => {
            if phases.len() != n_qubits {
                return Err(Error::DimensionMismatch {
                    expected: n_qubits,
                    found: phases.len(),
                });
            }
            phase_leak_block(n_qubits, phases)
        }
        LeakageAction::Custom(full) => {
            if full.rows() != qutrit_dim(n_qubits) || !full.is_square() {
                return Err(Error::DimensionMismatch {
                    expected: qutrit_dim(n_qubits),
                    found: full.rows(),
                });
            }
            let off = off_block_norm(full, n_qubits);
            if off > tol::ALGEBRAIC {
                return Err(Error::MixesSubspaces { residual: off });
            }
            let leak = leakage_indices(n_qubits);
            let block = full.select(&leak, &leak);
            let residual = block.unitarity_residual();
            if residual > tol::UNITARY {
                return Err(Error::NotUnitary { residual });
            }
            block
        }
    };
    Ok(QutritUnitary::from_blocks(n_qubits, u, &leak_block))
}

/// Two-qutrit CNOT that additionally flips the target when the control sits
/// in its leakage level (`|20> <-> |21>`).
pub fn leak_mixing_cnot() -> ComplexMatrix {
    let mut full = ComplexMatrix::zeros(9, 9);
    // (control, target) levels -> output levels
    for ctrl in 0..3 {
        for tgt in 0..3 {
            let out_tgt = match (ctrl, tgt) {
                (1, 0) | (2, 0) => 1,
                (1, 1) | (2, 1) => 0,
                _ => tgt,
            };
            full[(ctrl * 3 + out_tgt, ctrl * 3 + tgt)] = C64::new(1.0, 0.0);
        }
    }
    full
}

/// How the entangling generator acts on leaked states.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EntanglerVariant {
    /// Diagonal on the leakage subspace; the set stays a twirl design.
    Diagonal,
    /// [`leak_mixing_cnot`]: permutes leaked states; not a twirl design.
    LeakMixing,
}

/// Leakage behaviour of the implemented single-element gates.
#[derive(Clone, Debug, PartialEq)]
pub enum LeakagePolicy {
    Identity,
    /// The same per-qudit phases on every element.
    FixedPhases(Vec<f64>),
    /// Independent uniform phases per element and qudit, drawn from `seed`.
    RandomPhases {
        seed: u64,
    },
}

/// `+-1` phase on each qudit's leakage level.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PhaseMask {
    signs: Vec<i8>,
}

impl PhaseMask {
    pub fn new(signs: Vec<i8>) -> Result<Self> {
        if signs.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::InvalidArgument(
                "phase mask signs must be +-1".into(),
            ));
        }
        Ok(Self { signs })
    }

    /// Mask whose bit `k` (qudit 0 most significant) selects sign `-1`.
    pub fn from_bits(n_qubits: usize, bits: usize) -> Self {
        let signs = (0..n_qubits)
            .map(|k| {
                if (bits >> (n_qubits - 1 - k)) & 1 == 1 {
                    -1
                } else {
                    1
                }
            })
            .collect();
        Self { signs }
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    /// Diagonal of `(x)_k diag(1, 1, s_k)` on the register.
    pub fn diagonal(&self) -> Vec<f64> {
        let n = self.signs.len();
        (0..qutrit_dim(n))
            .map(|idx| {
                register::levels(n, idx)
                    .iter()
                    .zip(&self.signs)
                    .filter(|(&l, _)| l == 2)
                    .map(|(_, &s)| s as f64)
                    .product()
            })
            .collect()
    }

    pub fn operator(&self) -> ComplexMatrix {
        let d: Vec<C64> = self
            .diagonal()
            .into_iter()
            .map(|x| C64::new(x, 0.0))
            .collect();
        ComplexMatrix::from_diag(&d)
    }
}

#[derive(Clone, Debug)]
pub struct CliffordElement {
    pub id: usize,
    pub gate: QutritUnitary,
}

/// One draw from the extended set.
#[derive(Clone, Copy, Debug)]
pub struct ElementRef<'a> {
    /// Flat index `clifford_id * masks + mask_index`.
    pub index: usize,
    pub clifford: &'a CliffordElement,
    pub mask: &'a PhaseMask,
    mask_diag: &'a [f64],
}

impl ElementRef<'_> {
    /// Full unitary `M G`: the Clifford gate followed by the phase mask.
    pub fn unitary(&self) -> ComplexMatrix {
        let g = self.clifford.gate.full();
        ComplexMatrix::from_fn(g.rows(), g.cols(), |i, j| g[(i, j)] * self.mask_diag[i])
    }

    /// `U rho U^dagger` for this element.
    pub fn conjugate(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        let mut out = rho.conjugate_by(self.clifford.gate.full());
        let d = self.mask_diag;
        let n = out.rows();
        for i in 0..n {
            for j in 0..n {
                if d[i] * d[j] < 0.0 {
                    out[(i, j)] = -out[(i, j)];
                }
            }
        }
        out
    }

    pub fn mask_diagonal(&self) -> &[f64] {
        self.mask_diag
    }
}

/// Options for assembling an [`ExtendedCliffordSet`].
#[derive(Clone, Debug, PartialEq)]
pub struct SetConfig {
    pub policy: LeakagePolicy,
    pub entangler: EntanglerVariant,
    /// When false only the trivial mask is used (plain Clifford set).
    pub phase_masks: bool,
}

impl Default for SetConfig {
    fn default() -> Self {
        Self {
            policy: LeakagePolicy::Identity,
            entangler: EntanglerVariant::Diagonal,
            phase_masks: true,
        }
    }
}

/// The extended Clifford set; immutable after construction.
#[derive(Clone, Debug)]
pub struct ExtendedCliffordSet {
    n_qubits: usize,
    cliffords: Vec<CliffordElement>,
    masks: Vec<PhaseMask>,
    mask_diags: Vec<Vec<f64>>,
    twirl_design: bool,
}

/// Generates `C_N` and builds the extended set with all `2^N` masks.
pub fn build_extended_set(
    n_qubits: usize,
    policy: LeakagePolicy,
    entangler: EntanglerVariant,
) -> Result<ExtendedCliffordSet> {
    let group = generate_clifford_group(n_qubits)?;
    ExtendedCliffordSet::build(
        &group,
        &SetConfig {
            policy,
            entangler,
            phase_masks: true,
        },
    )
}

impl ExtendedCliffordSet {
    pub fn build(group: &CliffordGroup, config: &SetConfig) -> Result<Self> {
        let n = group.n_qubits();
        let n_leak = qutrit_dim(n) - qubit_dim(n);
        let leak_idx = leakage_indices(n);
        let mixing_perm = match (config.entangler, n) {
            (EntanglerVariant::LeakMixing, 2) => {
                let full = leak_mixing_cnot();
                Some(full.select(&leak_idx, &leak_idx))
            }
            _ => None,
        };
        let mut phase_rng = match config.policy {
            LeakagePolicy::RandomPhases { seed } => Some(crate::rng_from_seed(seed)),
            _ => None,
        };
        if let LeakagePolicy::FixedPhases(p) = &config.policy {
            if p.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: p.len(),
                });
            }
        }

        let mut cliffords = Vec::with_capacity(group.len());
        for (id, u) in group.elements().iter().enumerate() {
            let phases = match (&config.policy, phase_rng.as_mut()) {
                (LeakagePolicy::FixedPhases(p), _) => Some(p.clone()),
                (LeakagePolicy::RandomPhases { .. }, Some(rng)) => Some(
                    (0..n)
                        .map(|_| rng.random::<f64>() * 2.0 * core::f64::consts::PI)
                        .collect(),
                ),
                _ => None,
            };
            let mut leak = match phases {
                Some(p) => phase_leak_block(n, &p),
                None => ComplexMatrix::identity(n_leak),
            };
            if let Some(perm) = &mixing_perm {
                if group.entangler_count(id) % 2 == 1 {
                    leak = &leak * perm;
                }
            }
            cliffords.push(CliffordElement {
                id,
                gate: QutritUnitary::from_blocks(n, u, &leak),
            });
        }

        let masks: Vec<PhaseMask> = if config.phase_masks {
            (0..qubit_dim(n))
                .map(|b| PhaseMask::from_bits(n, b))
                .collect()
        } else {
            vec![PhaseMask::from_bits(n, 0)]
        };
        let mask_diags = masks.iter().map(PhaseMask::diagonal).collect();
        // masks are diagonal, so the design condition only depends on the gates
        let twirl_design = cliffords.iter().all(|c| c.gate.leakage_diagonal());
        Ok(Self {
            n_qubits: n,
            cliffords,
            masks,
            mask_diags,
            twirl_design,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        qutrit_dim(self.n_qubits)
    }

    /// `|C_N| * (number of masks)`.
    pub fn len(&self) -> usize {
        self.cliffords.len() * self.masks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cliffords.is_empty()
    }

    pub fn cliffords(&self) -> &[CliffordElement] {
        &self.cliffords
    }

    pub fn masks(&self) -> &[PhaseMask] {
        &self.masks
    }

    pub fn twirl_design(&self) -> bool {
        self.twirl_design
    }

    /// Element with flat index `index`.
    pub fn element(&self, index: usize) -> ElementRef<'_> {
        let m = self.masks.len();
        let (c, k) = (index / m, index % m);
        ElementRef {
            index,
            clifford: &self.cliffords[c],
            mask: &self.masks[k],
            mask_diag: &self.mask_diags[k],
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = ElementRef<'_>> + '_ {
        (0..self.len()).map(move |i| self.element(i))
    }

    /// Uniform draw over cliffords x masks.
    pub fn sample_element<R: Rng + ?Sized>(&self, rng: &mut R) -> ElementRef<'_> {
        self.element(rng.random_range(0..self.len()))
    }
}

/// Gate undoing the computational action of `product` (identity on leakage).
pub fn comp_inverse(product: &ComplexMatrix) -> QutritUnitary {
    let n = register::qubits_from_qubit_dim(product.rows()).expect("2^N block");
    let n_leak = qutrit_dim(n) - qubit_dim(n);
    QutritUnitary::from_blocks(n, &product.adjoint(), &ComplexMatrix::identity(n_leak))
}

/// Final gate of a sequence: the conjugate transpose of the product of the
/// computational blocks, in application order, embedded with identity on
/// leakage. Exact on the computational subspace only.
pub fn inverting_gate(sequence: &[ElementRef<'_>]) -> Result<QutritUnitary> {
    let first = sequence
        .first()
        .ok_or_else(|| Error::InvalidArgument("empty sequence".into()))?;
    let mut product = ComplexMatrix::identity(first.clifford.gate.comp_block().rows());
    for e in sequence {
        product = e.clifford.gate.comp_block() * &product;
    }
    Ok(comp_inverse(&product))
}

/// `max |(X - Y)_{ij}|` after removing the global phase of each.
pub fn phase_insensitive_distance(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    canonicalize_phase(a).max_abs_diff(&canonicalize_phase(b))
}
