use crate::error::{Error, Result};
use num_integer::Integer;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use std::fmt;

/// Largest element any base set may hold.
pub const ELEMENT_CAP: i64 = 1 << 62;

/// Strictly increasing nonnegative integers, each at most 2^62.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SortedIntSet(Vec<i64>);

impl SortedIntSet {
    /// Wraps a vector that the caller knows is strictly increasing and in range.
    pub fn from_sorted(elems: Vec<i64>) -> Result<Self> {
        for w in elems.windows(2) {
            if w[0] >= w[1] {
                return Err(Error::PreconditionViolated(format!(
                    "set not strictly increasing at {} >= {}",
                    w[0], w[1]
                )));
            }
        }
        if let Some(&x) = elems.first() {
            if x < 0 {
                return Err(Error::NegativeInput(x as i128));
            }
        }
        if let Some(&x) = elems.last() {
            if x > ELEMENT_CAP {
                return Err(Error::OverflowRisk(x as i128));
            }
        }
        Ok(SortedIntSet(elems))
    }

    pub(crate) fn from_sorted_unchecked(elems: Vec<i64>) -> Self {
        debug_assert!(elems.windows(2).all(|w| w[0] < w[1]));
        SortedIntSet(elems)
    }

    /// Sorts and deduplicates arbitrary nonnegative values.
    pub fn from_unsorted(mut elems: Vec<i64>) -> Result<Self> {
        elems.sort_unstable();
        elems.dedup();
        Self::from_sorted(elems)
    }

    pub fn as_slice(&self) -> &[i64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<i64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn min(&self) -> Option<i64> {
        self.0.first().copied()
    }

    pub fn max(&self) -> Option<i64> {
        self.0.last().copied()
    }

    pub fn contains(&self, x: i64) -> bool {
        self.0.binary_search(&x).is_ok()
    }

    /// Largest element not exceeding `z`.
    pub fn largest_at_most(&self, z: i128) -> Option<i64> {
        let idx = self.0.partition_point(|&a| (a as i128) <= z);
        if idx == 0 {
            None
        } else {
            Some(self.0[idx - 1])
        }
    }

    /// |A ∩ [lo, hi]|.
    pub fn count_in(&self, lo: i128, hi: i128) -> usize {
        if hi < lo {
            return 0;
        }
        let a = self.0.partition_point(|&x| (x as i128) < lo);
        let b = self.0.partition_point(|&x| (x as i128) <= hi);
        b - a
    }

    pub fn iter(&self) -> impl Iterator<Item = i64> + '_ {
        self.0.iter().copied()
    }

    pub fn sum(&self) -> i128 {
        self.0.iter().map(|&x| x as i128).sum()
    }
}

impl fmt::Display for SortedIntSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, "}}")
    }
}

/// Result of [`normalize`]: the clean set plus how many duplicates were dropped.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Normalized {
    pub set: SortedIntSet,
    pub duplicates: usize,
}

/// Sorts and deduplicates raw input, rejecting negatives and values above 2^62.
pub fn normalize(raw: &[i128]) -> Result<Normalized> {
    let mut v = Vec::with_capacity(raw.len());
    for &x in raw {
        if x < 0 {
            return Err(Error::NegativeInput(x));
        }
        if x > ELEMENT_CAP as i128 {
            return Err(Error::OverflowRisk(x));
        }
        v.push(x as i64);
    }
    let before = v.len();
    v.sort_unstable();
    v.dedup();
    let duplicates = before - v.len();
    Ok(Normalized {
        set: SortedIntSet(v),
        duplicates,
    })
}

/// gcd of all elements; `{0}` has gcd 0.
pub fn gcd_all(a: &SortedIntSet) -> Result<i64> {
    if a.is_empty() {
        return Err(Error::EmptySet);
    }
    Ok(a.iter().fold(0i64, |g, x| g.gcd(&x)))
}

/// Shifted and scaled copy of a set, with the map back to the original values.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShiftScaled {
    pub set: SortedIntSet,
    pub offset: i64,
    pub scale: i64,
}

impl ShiftScaled {
    pub fn map_back(&self, v: i64) -> i64 {
        v * self.scale + self.offset
    }
}

/// Translates a set to contain 0 and divides by the gcd of the result.
pub fn shift_scale_normalize(a: &SortedIntSet) -> Result<ShiftScaled> {
    if a.len() < 2 {
        return Err(Error::TooSmall {
            need: 2,
            got: a.len(),
        });
    }
    let offset = a.as_slice()[0];
    let scale = a.iter().fold(0i64, |g, x| g.gcd(&(x - offset)));
    let set = a.iter().map(|x| (x - offset) / scale).collect();
    Ok(ShiftScaled {
        set: SortedIntSet(set),
        offset,
        scale,
    })
}

/// Exact density ρ_z(A) = min over z' in [1, z] of |A[1, z']| / z'.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Density(pub Ratio<i128>);

impl Density {
    pub fn value(&self) -> Ratio<i128> {
        self.0
    }

    pub fn numer(&self) -> i128 {
        *self.0.numer()
    }

    pub fn denom(&self) -> i128 {
        *self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.numer() == 0
    }
}

impl fmt::Display for Density {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// The density together with the z' that attains it.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DensityWithArg {
    pub density: Density,
    pub argmin: i128,
}

/// Computes ρ_z(A) exactly. The ratio only needs checking just before each
/// element of A and at z, since |A[1, z']| steps up only at elements.
pub fn density(a: &SortedIntSet, z: i128) -> Density {
    density_with_arg(a, z).density
}

pub fn density_with_arg(a: &SortedIntSet, z: i128) -> DensityWithArg {
    assert!(z >= 1, "density needs z >= 1");
    let mut best = Ratio::new(a.count_in(1, z) as i128, z);
    let mut arg = z;
    let start = a.as_slice().partition_point(|&x| x < 2);
    let mut below = a.count_in(1, 1) as i128;
    for &x in &a.as_slice()[start..] {
        let x = x as i128;
        if x > z {
            break;
        }
        let zp = x - 1;
        let r = Ratio::new(below, zp);
        if r < best || (r == best && zp < arg) {
            best = r;
            arg = zp;
        }
        below += 1;
    }
    DensityWithArg {
        density: Density(best),
        argmin: arg,
    }
}

/// Parses the shared set file format: whitespace-separated decimal integers,
/// with `#` starting a comment that runs to the end of the line.
pub fn parse_set_text(text: &str) -> Result<Vec<i128>> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let body = match line.find('#') {
            Some(p) => &line[..p],
            None => line,
        };
        for tok in body.split_whitespace() {
            let v: i128 = tok
                .parse()
                .map_err(|_| Error::Parse(format!("line {}: bad integer {tok:?}", lineno + 1)))?;
            out.push(v);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(v: &[i64]) -> SortedIntSet {
        SortedIntSet::from_unsorted(v.to_vec()).unwrap()
    }

    #[test]
    fn normalize_examples() {
        let n = normalize(&[3, 1, 3, 0]).unwrap();
        assert_eq!(n.set.as_slice(), &[0, 1, 3]);
        assert_eq!(n.duplicates, 1);
        assert!(normalize(&[]).unwrap().set.is_empty());
        assert_eq!(normalize(&[5]).unwrap().set.as_slice(), &[5]);
        assert_eq!(normalize(&[-1]), Err(Error::NegativeInput(-1)));
        let big = (1i128 << 62) + 1;
        assert_eq!(normalize(&[big]), Err(Error::OverflowRisk(big)));
    }

    #[test]
    fn gcd_examples() {
        assert_eq!(gcd_all(&s(&[0, 4, 6])), Ok(2));
        assert_eq!(gcd_all(&s(&[0, 3, 5])), Ok(1));
        assert_eq!(gcd_all(&s(&[0])), Ok(0));
        assert_eq!(gcd_all(&s(&[])), Err(Error::EmptySet));
    }

    #[test]
    fn shift_scale_examples() {
        let r = shift_scale_normalize(&s(&[4, 10, 16])).unwrap();
        assert_eq!((r.set.as_slice(), r.offset, r.scale), (&[0, 1, 2][..], 4, 6));
        let r = shift_scale_normalize(&s(&[0, 1])).unwrap();
        assert_eq!((r.set.as_slice(), r.offset, r.scale), (&[0, 1][..], 0, 1));
        let r = shift_scale_normalize(&s(&[7, 9])).unwrap();
        assert_eq!((r.set.as_slice(), r.offset, r.scale), (&[0, 1][..], 7, 2));
        assert!(matches!(
            shift_scale_normalize(&s(&[3])),
            Err(Error::TooSmall { .. })
        ));
    }

    #[test]
    fn density_examples() {
        assert_eq!(density(&s(&[0, 1, 3]), 3).value(), Ratio::new(1, 2));
        assert_eq!(density(&s(&[0]), 5).value(), Ratio::new(0, 1));
        let full: Vec<i64> = (0..=9).collect();
        assert_eq!(density(&s(&full), 9).value(), Ratio::new(1, 1));
        assert_eq!(density(&s(&[0, 1, 5]), 5).value(), Ratio::new(1, 4));
    }

    #[test]
    fn density_matches_definition() {
        // independent enumeration over every z'
        for mask in 0u32..(1 << 9) {
            let v: Vec<i64> = (0..9).filter(|i| mask >> i & 1 == 1).collect();
            let a = s(&v);
            for z in 1..=10i128 {
                let mut best = Ratio::new(1i128, 1);
                for zp in 1..=z {
                    let c = v.iter().filter(|&&x| x >= 1 && (x as i128) <= zp).count() as i128;
                    best = best.min(Ratio::new(c, zp));
                }
                let got = density_with_arg(&a, z);
                assert_eq!(got.density.value(), best, "{v:?} z={z}");
                let c = a.count_in(1, got.argmin) as i128;
                assert_eq!(Ratio::new(c, got.argmin), best);
            }
        }
    }

    #[test]
    fn parse_format() {
        let t = "# header\n1 2  3\n4 # trailing\n\n5\n";
        assert_eq!(parse_set_text(t).unwrap(), vec![1, 2, 3, 4, 5]);
        assert!(parse_set_text("1 x").is_err());
    }
}
