//! Basis conventions for qutrit registers.
//!
//! Each qudit has levels `|0>, |1>, |2>`; the register index of a basis
//! state is `sum_k level_k * 3^(N-1-k)`, so qudit 0 is the most significant
//! digit. The computational subspace is spanned by states whose levels are
//! all in `{0, 1}` and is ordered like the corresponding qubit register
//! (`sum_k bit_k * 2^(N-1-k)`).

use alloc::vec::Vec;

/// Largest register handled by the crate.
pub const MAX_QUBITS: usize = 3;

pub fn qutrit_dim(n_qubits: usize) -> usize {
    3usize.pow(n_qubits as u32)
}

pub fn qubit_dim(n_qubits: usize) -> usize {
    1usize << n_qubits
}

/// Levels of each qudit for register index `index`.
pub fn levels(n_qubits: usize, mut index: usize) -> Vec<u8> {
    let mut out = alloc::vec![0u8; n_qubits];
    for k in (0..n_qubits).rev() {
        out[k] = (index % 3) as u8;
        index /= 3;
    }
    out
}

pub fn is_computational(n_qubits: usize, index: usize) -> bool {
    levels(n_qubits, index).iter().all(|&l| l < 2)
}

/// Register index of each computational basis state, in qubit order.
pub fn computational_indices(n_qubits: usize) -> Vec<usize> {
    (0..qubit_dim(n_qubits))
        .map(|b| {
            (0..n_qubits).fold(0, |acc, k| {
                let bit = (b >> (n_qubits - 1 - k)) & 1;
                acc * 3 + bit
            })
        })
        .collect()
}

/// Register indices outside the computational subspace, ascending.
pub fn leakage_indices(n_qubits: usize) -> Vec<usize> {
    (0..qutrit_dim(n_qubits))
        .filter(|&i| !is_computational(n_qubits, i))
        .collect()
}

/// Infers `N` from a `2^N` qubit dimension.
pub fn qubits_from_qubit_dim(dim: usize) -> Option<usize> {
    (0..=MAX_QUBITS).find(|&n| qubit_dim(n) == dim)
}

/// Infers `N` from a `3^N` register dimension.
pub fn qubits_from_qutrit_dim(dim: usize) -> Option<usize> {
    (0..=MAX_QUBITS).find(|&n| qutrit_dim(n) == dim)
}
