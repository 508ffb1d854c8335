//! Exact base-m fixed-point codes for multisets.
//!
//! A [`DigitVector`] with base `m` and digits `a_1, a_2, ...` stands for the
//! number `Σ a_i m^{-i}`. Adding codes counts, shifting multiplies by a
//! negative power of `m`. Digits never carry: reaching the base is an error.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DigitVector {
    base: u32,
    /// `digits[i]` is the coefficient of `m^{-(i+1)}`. No trailing zeros.
    digits: Vec<u32>,
}

impl DigitVector {
    pub fn zero(base: u32) -> Self {
        assert!(base >= 2, "base must be at least 2");
        DigitVector { base, digits: Vec::new() }
    }

    /// Builds a vector from explicit digits, first digit at position 1.
    pub fn from_digits(base: u32, digits: &[u32]) -> Result<Self> {
        assert!(base >= 2, "base must be at least 2");
        if let Some(i) = digits.iter().position(|&d| d >= base) {
            return Err(Error::DigitOverflow { position: i + 1, base });
        }
        let mut v = DigitVector { base, digits: digits.to_vec() };
        v.normalize();
        Ok(v)
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    /// Digits up to the last nonzero one.
    pub fn digits(&self) -> &[u32] {
        &self.digits
    }

    /// Digit at 1-based `position`.
    pub fn digit(&self, position: usize) -> u32 {
        position.checked_sub(1).and_then(|i| self.digits.get(i)).copied().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.digits.is_empty()
    }

    /// 1-based positions holding a nonzero digit.
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.digits.iter().enumerate().filter(|(_, &d)| d != 0).map(|(i, _)| i + 1)
    }

    fn normalize(&mut self) {
        while self.digits.last() == Some(&0) {
            self.digits.pop();
        }
    }

    /// In-place digit-wise addition.
    pub fn add_assign(&mut self, other: &DigitVector) -> Result<()> {
        if self.base != other.base {
            return Err(Error::BaseMismatch(self.base, other.base));
        }
        if self.digits.len() < other.digits.len() {
            self.digits.resize(other.digits.len(), 0);
        }
        for (i, (a, &b)) in self.digits.iter_mut().zip(&other.digits).enumerate() {
            *a += b;
            if *a >= self.base {
                return Err(Error::DigitOverflow { position: i + 1, base: self.base });
            }
        }
        self.normalize();
        Ok(())
    }
}

impl fmt::Debug for DigitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "0.")?;
        if self.digits.is_empty() {
            write!(f, "0")?;
        }
        for d in &self.digits {
            if self.base <= 10 {
                write!(f, "{d}")?;
            } else {
                write!(f, "[{d}]")?;
            }
        }
        write!(f, "_{}", self.base)
    }
}

/// `m^{-i}`: a single 1 at `position`.
pub fn code_of(position: usize, base: u32) -> DigitVector {
    assert!(position >= 1, "positions start at 1");
    assert!(base >= 2, "base must be at least 2");
    let mut digits = vec![0; position];
    digits[position - 1] = 1;
    DigitVector { base, digits }
}

pub fn add(a: &DigitVector, b: &DigitVector) -> Result<DigitVector> {
    let mut out = a.clone();
    out.add_assign(b)?;
    Ok(out)
}

/// Multiplies by `m^{-offset}`.
pub fn shift(a: &DigitVector, offset: usize) -> DigitVector {
    if a.is_zero() {
        return a.clone();
    }
    let mut digits = vec![0; offset];
    digits.extend_from_slice(&a.digits);
    DigitVector { base: a.base, digits }
}

/// Sum of `code_of(i)` over the multiset, with multiplicity.
pub fn encode_multiset(positions: &[usize], base: u32) -> Result<DigitVector> {
    let mut acc = DigitVector::zero(base);
    if let Some(&max) = positions.iter().max() {
        acc.digits = vec![0; max];
    }
    for &p in positions {
        assert!(p >= 1, "positions start at 1");
        let d = &mut acc.digits[p - 1];
        *d += 1;
        if *d >= base {
            return Err(Error::DigitOverflow { position: p, base });
        }
    }
    acc.normalize();
    Ok(acc)
}

/// All multisets over `1..=max_position` with at most `max_order` elements,
/// each given as a sorted position list.
pub fn all_multisets(max_position: usize, max_order: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, max_pos: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        out.push(cur.clone());
        if left == 0 {
            return;
        }
        for p in start..=max_pos {
            cur.push(p);
            rec(p, max_pos, left - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(1, max_position, max_order, &mut Vec::new(), &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::HashSet;

    fn dv(base: u32, digits: &[u32]) -> DigitVector {
        DigitVector::from_digits(base, digits).unwrap()
    }

    #[test]
    fn code_examples() {
        assert_eq!(code_of(1, 3).digits(), &[1]);
        assert_eq!(code_of(3, 5).digits(), &[0, 0, 1]);
        assert_eq!(add(&code_of(2, 3), &code_of(2, 3)).unwrap().digits(), &[0, 2]);
    }

    #[test]
    fn add_examples() {
        let a = dv(3, &[1, 2]);
        assert_eq!(add(&a, &DigitVector::zero(3)).unwrap(), a);
        assert_eq!(add(&a, &dv(3, &[1, 0])).unwrap(), dv(3, &[2, 2]));
        let err = add(&dv(3, &[2]), &dv(3, &[1])).unwrap_err();
        assert_eq!(err, Error::DigitOverflow { position: 1, base: 3 });
        assert_eq!(add(&dv(3, &[1]), &dv(4, &[1])).unwrap_err().code(), "BASE_MISMATCH");
    }

    #[test]
    fn shift_examples() {
        let a = dv(3, &[1, 2]);
        assert_eq!(shift(&a, 0), a);
        assert_eq!(shift(&dv(3, &[1]), 2), dv(3, &[0, 0, 1]));
        assert_eq!(shift(&DigitVector::zero(3), 4), DigitVector::zero(3));
    }

    #[test]
    fn trailing_zeros_do_not_affect_equality() {
        assert_eq!(dv(4, &[1, 0, 0]), dv(4, &[1]));
        assert_eq!(format!("{:?}", dv(4, &[2, 0, 1])), "0.201_4");
    }

    #[test]
    fn encode_examples() {
        assert!(encode_multiset(&[], 4).unwrap().is_zero());
        assert_eq!(encode_multiset(&[1, 1, 3], 4).unwrap(), dv(4, &[2, 0, 1]));
        assert_eq!(encode_multiset(&[2, 2, 2], 3).unwrap_err().code(), "DIGIT_OVERFLOW");
    }

    #[test]
    fn exhaustive_small_case_has_35_distinct_codes() {
        let sets = all_multisets(4, 3);
        assert_eq!(sets.len(), 35);
        let codes: HashSet<DigitVector> = sets.iter().map(|s| encode_multiset(s, 4).unwrap()).collect();
        assert_eq!(codes.len(), 35);
    }

    #[test]
    fn shifted_blocks_are_disjoint() {
        // Codes with positions ≤ width, shifted by width·j, never share a digit.
        let width = 4;
        let sets = all_multisets(width, 2);
        for a in &sets {
            for b in &sets {
                let x = shift(&encode_multiset(a, 3).unwrap(), width);
                let y = shift(&encode_multiset(b, 3).unwrap(), 2 * width);
                let sx: HashSet<usize> = x.support().collect();
                assert!(y.support().all(|p| !sx.contains(&p)));
                assert!(add(&x, &y).is_ok());
            }
        }
    }

    fn arb_dv() -> impl Strategy<Value = DigitVector> {
        prop::collection::vec(0u32..2, 0..6).prop_map(|d| dv(5, &d))
    }

    proptest! {
        #[test]
        fn add_commutes_and_associates(a in arb_dv(), b in arb_dv(), c in arb_dv()) {
            prop_assert_eq!(add(&a, &b).unwrap(), add(&b, &a).unwrap());
            let left = add(&add(&a, &b).unwrap(), &c);
            let right = add(&a, &add(&b, &c).unwrap());
            prop_assert_eq!(left, right);
        }

        #[test]
        fn shift_distributes_over_add(a in arb_dv(), b in arb_dv(), o in 0usize..5) {
            let lhs = shift(&add(&a, &b).unwrap(), o);
            let rhs = add(&shift(&a, o), &shift(&b, o)).unwrap();
            prop_assert_eq!(lhs, rhs);
        }
    }
}
