use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qmat::{kron_all, CMatrix, C64, I, ONE, ZERO};

/// Single-qubit basis rotation applied right before a computational-basis measurement.
///
/// Labels read in circuit order: `HX` applies `H` and then `X`. The phase gate
/// inside `SH`/`SHX` is `S†`, so that `SH` sends outcome `0` to `|r⟩ = (|0⟩ + i|1⟩)/√2`.
/// `I`, `H`, `SH` measure `Z`, `X`, `Y`; the `X`-suffixed labels only relabel outcomes.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RotationLabel {
    I,
    H,
    SH,
    X,
    HX,
    SHX,
}

impl RotationLabel {
    /// Measurement-side set `{I, H, SH}`.
    pub const MEASURE: [RotationLabel; 3] = [RotationLabel::I, RotationLabel::H, RotationLabel::SH];

    /// Preparation-side set `{I, H, SH, X, HX, SHX}`.
    pub const ALL: [RotationLabel; 6] = [
        RotationLabel::I,
        RotationLabel::H,
        RotationLabel::SH,
        RotationLabel::X,
        RotationLabel::HX,
        RotationLabel::SHX,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RotationLabel::I => "I",
            RotationLabel::H => "H",
            RotationLabel::SH => "SH",
            RotationLabel::X => "X",
            RotationLabel::HX => "HX",
            RotationLabel::SHX => "SHX",
        }
    }

    pub fn matrix(self) -> CMatrix {
        let s = 0.5f64.sqrt();
        let h = CMatrix::from_real_rows(&[&[s, s], &[s, -s]]).unwrap();
        let sdg = CMatrix::diag(&[ONE, -I]);
        let x = CMatrix::from_rows(&[vec![ZERO, ONE], vec![ONE, ZERO]]).unwrap();
        match self {
            RotationLabel::I => CMatrix::identity(2),
            RotationLabel::H => h,
            RotationLabel::SH => &h * &sdg,
            RotationLabel::X => x,
            RotationLabel::HX => &x * &h,
            RotationLabel::SHX => &x * &(&h * &sdg),
        }
    }

    /// Eigenbasis this label measures, ignoring outcome relabeling.
    pub fn basis(self) -> char {
        match self {
            RotationLabel::I | RotationLabel::X => 'Z',
            RotationLabel::H | RotationLabel::HX => 'X',
            RotationLabel::SH | RotationLabel::SHX => 'Y',
        }
    }

    pub fn is_measure_label(self) -> bool {
        Self::MEASURE.contains(&self)
    }
}

impl fmt::Display for RotationLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RotationLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .iter()
            .copied()
            .find(|l| l.as_str() == s)
            .ok_or_else(|| Error::UnknownLabel(s.to_string()))
    }
}

impl Serialize for RotationLabel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for RotationLabel {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Tensor product of per-wire rotations, wire 0 most significant.
pub fn rotation_unitary(labels: &[RotationLabel]) -> CMatrix {
    let mats: Vec<CMatrix> = labels.iter().map(|l| l.matrix()).collect();
    kron_all(mats.iter())
}

/// The six Pauli-6 effects `⅓|ψ⟩⟨ψ|` for `|0⟩, |1⟩, |+⟩, |−⟩, |r⟩, |l⟩`.
pub fn pauli6_effects() -> Vec<CMatrix> {
    let s = 0.5f64.sqrt();
    let c = |re: f64, im: f64| C64::new(re, im);
    let states: [[C64; 2]; 6] = [
        [c(1.0, 0.0), c(0.0, 0.0)],
        [c(0.0, 0.0), c(1.0, 0.0)],
        [c(s, 0.0), c(s, 0.0)],
        [c(s, 0.0), c(-s, 0.0)],
        [c(s, 0.0), c(0.0, s)],
        [c(s, 0.0), c(0.0, -s)],
    ];
    states
        .iter()
        .map(|v| CMatrix::projector(v).scale_real(1.0 / 3.0))
        .collect()
}
