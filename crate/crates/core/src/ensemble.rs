use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Scalar field of the density matrices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Real,
    Complex,
    Quaternion,
}

impl Family {
    pub const ALL: [Family; 3] = [Family::Real, Family::Complex, Family::Quaternion];

    /// Dyson index: 1, 2 or 4 real parameters per off-diagonal entry.
    pub fn beta(self) -> u32 {
        match self {
            Family::Real => 1,
            Family::Complex => 2,
            Family::Quaternion => 4,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Real => "real",
            Family::Complex => "complex",
            Family::Quaternion => "quaternion",
        })
    }
}

impl FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "real" | "realdet" => Ok(Family::Real),
            "complex" | "complexdet" => Ok(Family::Complex),
            "quaternion" | "quat" | "quatdet" => Ok(Family::Quaternion),
            _ => Err(format!("unknown family {s:?} (real, complex, quaternion)")),
        }
    }
}

/// Which determinant a Monte Carlo run measures.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Target {
    #[serde(rename = "det")]
    Det,
    #[serde(rename = "detPT")]
    DetPt,
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Target::Det => "det",
            Target::DetPt => "detPT",
        })
    }
}

impl FromStr for Target {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "det" => Ok(Target::Det),
            "detPT" | "detpt" | "pt" => Ok(Target::DetPt),
            _ => Err(format!("unknown target {s:?} (det, detPT)")),
        }
    }
}
