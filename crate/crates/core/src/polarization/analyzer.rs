use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::str::FromStr;

use nalgebra::Vector3;
use num_complex::Complex64;

use super::JonesVector;
use crate::error::{Error, Result};

/// The ten analyzer settings used by the five-basis fidelity measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AnalyzerLabel {
    H,
    V,
    D,
    A,
    L,
    R,
    /// Elliptical state halfway between L and D on the Poincaré sphere.
    ELD,
    ERA,
    ELA,
    ERD,
}

impl AnalyzerLabel {
    pub const ALL: [AnalyzerLabel; 10] = [
        Self::H,
        Self::V,
        Self::D,
        Self::A,
        Self::L,
        Self::R,
        Self::ELD,
        Self::ERA,
        Self::ELA,
        Self::ERD,
    ];

    /// Unit Stokes vector of the setting.
    pub fn stokes(self) -> Vector3<f64> {
        let h = FRAC_1_SQRT_2;
        match self {
            Self::H => Vector3::new(1.0, 0.0, 0.0),
            Self::V => Vector3::new(-1.0, 0.0, 0.0),
            Self::D => Vector3::new(0.0, 1.0, 0.0),
            Self::A => Vector3::new(0.0, -1.0, 0.0),
            Self::L => Vector3::new(0.0, 0.0, 1.0),
            Self::R => Vector3::new(0.0, 0.0, -1.0),
            Self::ELD => Vector3::new(0.0, h, h),
            Self::ERA => Vector3::new(0.0, -h, -h),
            Self::ELA => Vector3::new(0.0, -h, h),
            Self::ERD => Vector3::new(0.0, h, -h),
        }
    }

    pub fn orthogonal(self) -> Self {
        match self {
            Self::H => Self::V,
            Self::V => Self::H,
            Self::D => Self::A,
            Self::A => Self::D,
            Self::L => Self::R,
            Self::R => Self::L,
            Self::ELD => Self::ERA,
            Self::ERA => Self::ELD,
            Self::ELA => Self::ERD,
            Self::ERD => Self::ELA,
        }
    }
}

impl fmt::Display for AnalyzerLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::H => "H",
            Self::V => "V",
            Self::D => "D",
            Self::A => "A",
            Self::L => "L",
            Self::R => "R",
            Self::ELD => "E_LD",
            Self::ERA => "E_RA",
            Self::ELA => "E_LA",
            Self::ERD => "E_RD",
        };
        f.write_str(s)
    }
}

/// A polarization analyzer: the state transmitted by one arm of a
/// polarization-resolving detection unit.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyzerSetting {
    label: Option<AnalyzerLabel>,
    jones: JonesVector,
    stokes: Vector3<f64>,
}

impl AnalyzerSetting {
    pub fn new(label: AnalyzerLabel) -> Self {
        let stokes = label.stokes();
        Self {
            label: Some(label),
            jones: jones_from_stokes(&stokes),
            stokes,
        }
    }

    /// Arbitrary analyzer at a point on the Poincaré sphere. The vector is
    /// normalised; a zero vector is rejected.
    pub fn from_stokes(stokes: Vector3<f64>) -> Result<Self> {
        let norm = stokes.norm();
        if !(norm.is_finite() && norm > 1e-12) {
            return Err(Error::range("stokes", "vector must be finite and non-zero"));
        }
        let stokes = stokes / norm;
        Ok(Self {
            label: None,
            jones: jones_from_stokes(&stokes),
            stokes,
        })
    }

    pub fn label(&self) -> Option<AnalyzerLabel> {
        self.label
    }

    pub fn jones(&self) -> &JonesVector {
        &self.jones
    }

    pub fn stokes(&self) -> &Vector3<f64> {
        &self.stokes
    }

    /// The orthogonal analyzer, antipodal on the Poincaré sphere.
    pub fn orthogonal(&self) -> Self {
        match self.label {
            Some(label) => Self::new(label.orthogonal()),
            None => Self {
                label: None,
                jones: jones_from_stokes(&(-self.stokes)),
                stokes: -self.stokes,
            },
        }
    }
}

/// Jones vector `(cos(θ/2), sin(θ/2)·e^{iφ})` for the Stokes point with polar
/// angle θ from H and azimuth φ measured from D towards L.
fn jones_from_stokes(s: &Vector3<f64>) -> JonesVector {
    let a = ((1.0 + s[0]) / 2.0).max(0.0).sqrt();
    let b = ((1.0 - s[0]) / 2.0).max(0.0).sqrt();
    let azimuth = s[2].atan2(s[1]);
    JonesVector::new(Complex64::new(a, 0.0), Complex64::from_polar(b, azimuth))
}

/// Standard Jones → Stokes map.
pub fn stokes_from_jones(j: &JonesVector) -> Vector3<f64> {
    let (a, b) = (j[0], j[1]);
    let cross = a.conj() * b;
    Vector3::new(a.norm_sqr() - b.norm_sqr(), 2.0 * cross.re, 2.0 * cross.im)
}

/// The five measurement bases of the fidelity protocol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BasisLabel {
    HV,
    DA,
    LR,
    /// E_LD / E_RA
    EldEra,
    /// E_LA / E_RD
    ElaErd,
}

impl BasisLabel {
    pub const ALL: [BasisLabel; 5] = [Self::HV, Self::DA, Self::LR, Self::EldEra, Self::ElaErd];

    pub fn plus(self) -> AnalyzerLabel {
        match self {
            Self::HV => AnalyzerLabel::H,
            Self::DA => AnalyzerLabel::D,
            Self::LR => AnalyzerLabel::L,
            Self::EldEra => AnalyzerLabel::ELD,
            Self::ElaErd => AnalyzerLabel::ELA,
        }
    }

    /// Short lowercase name, also used for run file names.
    pub fn file_stem(self) -> &'static str {
        match self {
            Self::HV => "hv",
            Self::DA => "da",
            Self::LR => "lr",
            Self::EldEra => "elderra",
            Self::ElaErd => "elaerd",
        }
    }

    pub fn index(self) -> usize {
        Self::ALL.iter().position(|&b| b == self).unwrap()
    }
}

impl fmt::Display for BasisLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::HV => "HV",
            Self::DA => "DA",
            Self::LR => "LR",
            Self::EldEra => "ELD_ERA",
            Self::ElaErd => "ELA_ERD",
        })
    }
}

impl FromStr for BasisLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key: String = s
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .map(|c| c.to_ascii_lowercase())
            .collect();
        match key.as_str() {
            "hv" => Ok(Self::HV),
            "da" => Ok(Self::DA),
            "lr" => Ok(Self::LR),
            "elderra" | "eldera" => Ok(Self::EldEra),
            "elaerd" => Ok(Self::ElaErd),
            _ => Err(Error::range(
                "basis",
                format!("unknown basis `{s}` (expected HV, DA, LR, ELD_ERA or ELA_ERD)"),
            )),
        }
    }
}

/// An orthogonal pair of analyzer settings, i.e. the two output ports of a
/// polarizing beam splitter preceded by a polarization controller.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementBasis {
    pub plus: AnalyzerSetting,
    pub minus: AnalyzerSetting,
}

impl MeasurementBasis {
    pub fn new(label: BasisLabel) -> Self {
        let plus = AnalyzerSetting::new(label.plus());
        let minus = plus.orthogonal();
        Self { plus, minus }
    }

    pub fn from_plus(plus: AnalyzerSetting) -> Self {
        let minus = plus.orthogonal();
        Self { plus, minus }
    }
}
