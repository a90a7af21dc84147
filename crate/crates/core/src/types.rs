//! Critical point types.

use alloc::format;

/// Type of a nondegenerate critical point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PointType {
    Min,
    Max,
    Saddle,
}

impl PointType {
    pub const ALL: [PointType; 3] = [PointType::Min, PointType::Max, PointType::Saddle];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            PointType::Min => "min",
            PointType::Max => "max",
            PointType::Saddle => "saddle",
        }
    }
}

impl core::fmt::Display for PointType {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Classifies a Hessian by `b = -trace` and `c = det`.
///
/// Returns `None` on the measure-zero boundary (`c = 0`, or `c > 0` with `b = 0`).
pub fn classify(b: f64, c: f64) -> Option<PointType> {
    if c < 0.0 {
        Some(PointType::Saddle)
    } else if c > 0.0 && b < 0.0 {
        Some(PointType::Min)
    } else if c > 0.0 && b > 0.0 {
        Some(PointType::Max)
    } else {
        None
    }
}

/// A type filter: one of the three types, or "extremum" (min or max).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TypeClass {
    Min,
    Max,
    Saddle,
    Extremum,
}

impl TypeClass {
    pub fn contains(self, t: PointType) -> bool {
        match self {
            TypeClass::Min => t == PointType::Min,
            TypeClass::Max => t == PointType::Max,
            TypeClass::Saddle => t == PointType::Saddle,
            TypeClass::Extremum => t != PointType::Saddle,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            TypeClass::Min => "min",
            TypeClass::Max => "max",
            TypeClass::Saddle => "saddle",
            TypeClass::Extremum => "extremum",
        }
    }
}

impl core::str::FromStr for TypeClass {
    type Err = crate::Error;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "min" | "minimum" => Ok(TypeClass::Min),
            "max" | "maximum" => Ok(TypeClass::Max),
            "saddle" => Ok(TypeClass::Saddle),
            "extremum" | "ext" => Ok(TypeClass::Extremum),
            other => Err(crate::Error::InvalidArgument(format!("unknown critical point type {other:?}"))),
        }
    }
}

/// Ordered pair of type filters: the first applies to the point at the origin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TypePair(pub TypeClass, pub TypeClass);

impl TypePair {
    pub fn contains(&self, first: PointType, second: PointType) -> bool {
        self.0.contains(first) && self.1.contains(second)
    }
}

impl core::fmt::Display for TypePair {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "{},{}", self.0.as_str(), self.1.as_str())
    }
}

impl core::str::FromStr for TypePair {
    type Err = crate::Error;
    /// `a,b` with each of `min`, `max`, `saddle`, `extremum`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (a, b) = s
            .split_once(',')
            .ok_or_else(|| crate::Error::InvalidArgument(format!("type pair {s:?} must look like min,max")))?;
        Ok(TypePair(a.parse()?, b.parse()?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    #[test]
    fn classification_rule() {
        // H = diag(-1,-2): b = 3, c = 2
        assert_eq!(classify(3.0, 2.0), Some(PointType::Max));
        // H = diag(1,-1)
        assert_eq!(classify(0.0, -1.0), Some(PointType::Saddle));
        assert_eq!(classify(-2.0, 1.0), Some(PointType::Min));
        assert_eq!(classify(1.0, 0.0), None);
    }

    #[test]
    fn pair_parsing() {
        let p: TypePair = "max,min".parse().unwrap();
        assert_eq!(p, TypePair(TypeClass::Max, TypeClass::Min));
        assert!(p.contains(PointType::Max, PointType::Min));
        assert!(!p.contains(PointType::Min, PointType::Max));
        let e: TypePair = "extremum,saddle".parse().unwrap();
        assert!(e.contains(PointType::Min, PointType::Saddle));
        assert!("min".parse::<TypePair>().is_err());
        assert!("min,foo".parse::<TypePair>().is_err());
        assert_eq!(p.to_string(), "max,min");
    }
}
