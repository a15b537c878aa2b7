//! Input and target states for the overlap preset.

use std::f64::consts::PI;

use anyhow::{bail, Result};
use serde::{Deserialize, Serialize};
use shadowqpt::channels::{apply_gates, ghz_process, ChannelKind, Gate};
use shadowqpt::qmat::{CMatrix, C64, ONE, ZERO};

/// Per-qubit `R_x` angles of the product input family.
pub const PHI: [f64; 4] = [0.1717, 0.1234, 0.9876, 0.888];

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputState {
    /// `|0⟩^n`
    Zero,
    /// `|+i⟩^n`
    PlusI,
    /// `⊗_j R_x(φ_j) |0⟩`
    RxPhi,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetRotation {
    Ry,
    Rx,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OverlapFamily {
    pub input: InputState,
    pub rotation: TargetRotation,
}

impl OverlapFamily {
    pub const ALL: [OverlapFamily; 6] = [
        OverlapFamily { input: InputState::Zero, rotation: TargetRotation::Ry },
        OverlapFamily { input: InputState::Zero, rotation: TargetRotation::Rx },
        OverlapFamily { input: InputState::RxPhi, rotation: TargetRotation::Ry },
        OverlapFamily { input: InputState::RxPhi, rotation: TargetRotation::Rx },
        OverlapFamily { input: InputState::PlusI, rotation: TargetRotation::Ry },
        OverlapFamily { input: InputState::PlusI, rotation: TargetRotation::Rx },
    ];

    pub fn label(&self) -> String {
        let input = match self.input {
            InputState::Zero => "zero",
            InputState::PlusI => "plus_i",
            InputState::RxPhi => "rx_phi",
        };
        let rot = match self.rotation {
            TargetRotation::Ry => "ry",
            TargetRotation::Rx => "rx",
        };
        format!("{input}/{rot}")
    }
}

fn basis_zero(n: usize) -> Vec<C64> {
    let mut v = vec![ZERO; 1 << n];
    v[0] = ONE;
    v
}

fn run(n: usize, gates: &[Gate]) -> Result<Vec<C64>> {
    let mut v = basis_zero(n);
    apply_gates(&mut v, n, gates)?;
    Ok(v)
}

pub fn input_state(input: InputState, n: usize) -> Result<CMatrix> {
    let gates: Vec<Gate> = match input {
        InputState::Zero => Vec::new(),
        // S H |0⟩ = |+i⟩
        InputState::PlusI => (0..n).flat_map(|j| [Gate::new("H", &[j]), Gate::new("S", &[j])]).collect(),
        InputState::RxPhi => {
            if n > PHI.len() {
                bail!("the R_x(φ) input family is defined for at most {} qubits", PHI.len());
            }
            (0..n).map(|j| Gate::with_params("RX", &[j], &[PHI[j]])).collect()
        }
    };
    Ok(CMatrix::projector(&run(n, &gates)?))
}

/// GHZ preparation circuit preceded by `R(θ)` on every qubit.
pub fn target_state(rotation: TargetRotation, theta: f64, n: usize) -> Result<CMatrix> {
    let name = match rotation {
        TargetRotation::Ry => "RY",
        TargetRotation::Rx => "RX",
    };
    let mut gates: Vec<Gate> = (0..n).map(|j| Gate::with_params(name, &[j], &[theta])).collect();
    match ghz_process(n)?.kind {
        ChannelKind::Gates { gates: g } => gates.extend(g),
        _ => unreachable!("GHZ process is a gate list"),
    }
    Ok(CMatrix::projector(&run(n, &gates)?))
}

/// `count` evenly spaced angles covering `[0, 2π]` with both endpoints.
pub fn angle_grid(count: usize) -> Vec<f64> {
    (0..count).map(|i| 2.0 * PI * i as f64 / (count - 1) as f64).collect()
}
