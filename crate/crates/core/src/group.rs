use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Field;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    SO,
    SU,
    Sp,
    Spin,
}

impl Family {
    pub const ALL: [Family; 4] = [Family::SO, Family::SU, Family::Sp, Family::Spin];

    /// Smallest admissible rank parameter.
    pub fn min_n(self) -> usize {
        match self {
            Family::SO | Family::SU => 2,
            Family::Sp => 1,
            Family::Spin => 3,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Family::SO => "SO",
            Family::SU => "SU",
            Family::Sp => "Sp",
            Family::Spin => "Spin",
        };
        f.write_str(s)
    }
}

impl FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "so" => Ok(Family::SO),
            "su" => Ok(Family::SU),
            "sp" => Ok(Family::Sp),
            "spin" => Ok(Family::Spin),
            _ => Err(Error::Config(format!("unknown family {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GroupSpec {
    pub family: Family,
    pub n: usize,
}

impl GroupSpec {
    pub fn new(family: Family, n: usize) -> Result<Self> {
        if n < family.min_n() {
            return Err(Error::InvalidShape(format!("{family}({n}) needs n ≥ {}", family.min_n())));
        }
        Ok(GroupSpec { family, n })
    }

    pub fn so(n: usize) -> Self {
        Self::new(Family::SO, n).expect("SO(n) needs n ≥ 2")
    }

    pub fn su(n: usize) -> Self {
        Self::new(Family::SU, n).expect("SU(n) needs n ≥ 2")
    }

    pub fn sp(n: usize) -> Self {
        Self::new(Family::Sp, n).expect("Sp(n) needs n ≥ 1")
    }

    pub fn spin(n: usize) -> Self {
        Self::new(Family::Spin, n).expect("Spin(n) needs n ≥ 3")
    }

    /// Native entry field; Spin has none.
    pub fn field(&self) -> Option<Field> {
        match self.family {
            Family::SO => Some(Field::Real),
            Family::SU => Some(Field::Complex),
            Family::Sp => Some(Field::Quaternion),
            Family::Spin => None,
        }
    }

    /// Rank of the root system.
    pub fn rank(&self) -> usize {
        match self.family {
            Family::SO | Family::Spin => self.n / 2,
            Family::SU => self.n - 1,
            Family::Sp => self.n,
        }
    }
}

impl fmt::Display for GroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.family, self.n)
    }
}

impl FromStr for GroupSpec {
    type Err = Error;
    /// Parses `SO(8)`, `so8`, `sp(3)`.
    fn from_str(s: &str) -> Result<Self> {
        let t: String = s.chars().filter(|c| !c.is_whitespace() && *c != '(' && *c != ')').collect();
        let split = t.find(|c: char| c.is_ascii_digit()).ok_or_else(|| Error::Config(format!("bad group {s:?}")))?;
        let family: Family = t[..split].parse()?;
        let n: usize = t[split..].parse().map_err(|_| Error::Config(format!("bad group {s:?}")))?;
        GroupSpec::new(family, n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fields_and_parsing() {
        assert_eq!(GroupSpec::so(8).field(), Some(Field::Real));
        assert_eq!(GroupSpec::su(4).field(), Some(Field::Complex));
        assert_eq!(GroupSpec::sp(2).field(), Some(Field::Quaternion));
        assert_eq!(GroupSpec::spin(7).field(), None);
        assert_eq!("SO(8)".parse::<GroupSpec>().unwrap(), GroupSpec::so(8));
        assert_eq!("spin5".parse::<GroupSpec>().unwrap(), GroupSpec::spin(5));
        assert!(GroupSpec::new(Family::Spin, 2).is_err());
        assert!(GroupSpec::new(Family::Sp, 1).is_ok());
    }
}
