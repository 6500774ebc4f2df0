//! Integer intervals with Java wrap-around awareness.

use std::fmt;

use serde::Serialize;

use crate::frontend::ast::{BinOp, JType};

/// A closed range of integers, or the empty set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Interval {
    Empty,
    Range { lo: i64, hi: i64 },
}

/// Value range of an integral type.
pub fn type_range(ty: JType) -> (i64, i64) {
    match ty {
        JType::Byte => (i8::MIN as i64, i8::MAX as i64),
        JType::Short => (i16::MIN as i64, i16::MAX as i64),
        JType::Char => (0, u16::MAX as i64),
        JType::Int => (i32::MIN as i64, i32::MAX as i64),
        JType::Long => (i64::MIN, i64::MAX),
        other => panic!("{other} has no integer range"),
    }
}

impl Interval {
    pub fn new(lo: i64, hi: i64) -> Self {
        if lo <= hi {
            Interval::Range { lo, hi }
        } else {
            Interval::Empty
        }
    }

    pub fn point(v: i64) -> Self {
        Interval::Range { lo: v, hi: v }
    }

    pub fn top(ty: JType) -> Self {
        let (lo, hi) = type_range(ty);
        Interval::Range { lo, hi }
    }

    pub fn bounds(self) -> Option<(i64, i64)> {
        match self {
            Interval::Empty => None,
            Interval::Range { lo, hi } => Some((lo, hi)),
        }
    }

    pub fn is_empty(self) -> bool {
        self == Interval::Empty
    }

    pub fn contains(self, v: i64) -> bool {
        self.bounds().is_some_and(|(lo, hi)| lo <= v && v <= hi)
    }

    pub fn singleton(self) -> Option<i64> {
        self.bounds().filter(|(lo, hi)| lo == hi).map(|(lo, _)| lo)
    }

    /// Smallest interval containing both.
    pub fn join(self, other: Interval) -> Interval {
        match (self.bounds(), other.bounds()) {
            (None, _) => other,
            (_, None) => self,
            (Some((a, b)), Some((c, d))) => Interval::new(a.min(c), b.max(d)),
        }
    }

    pub fn is_subset_of(self, other: Interval) -> bool {
        match (self.bounds(), other.bounds()) {
            (None, _) => true,
            (_, None) => false,
            (Some((a, b)), Some((c, d))) => c <= a && b <= d,
        }
    }

    /// `[lo, hi]` computed exactly, or the whole of `ty` when it leaves the
    /// type's range and would wrap.
    fn fit(lo: i128, hi: i128, ty: JType) -> Interval {
        let (min, max) = type_range(ty);
        if lo >= min as i128 && hi <= max as i128 {
            Interval::new(lo as i64, hi as i64)
        } else {
            Interval::top(ty)
        }
    }

    /// Value after conversion to `to`.
    pub fn convert(self, to: JType) -> Interval {
        match self.bounds() {
            None => Interval::Empty,
            Some((lo, hi)) => Interval::fit(lo as i128, hi as i128, to),
        }
    }

    pub fn neg(self, ty: JType) -> Interval {
        match self.bounds() {
            None => Interval::Empty,
            Some((lo, hi)) => Interval::fit(-(hi as i128), -(lo as i128), ty),
        }
    }

    pub fn abs(self, ty: JType) -> Interval {
        match self.bounds() {
            None => Interval::Empty,
            Some((lo, hi)) if lo >= 0 => Interval::new(lo, hi),
            Some((lo, hi)) if hi <= 0 => Interval::fit(-(hi as i128), -(lo as i128), ty),
            Some((lo, hi)) => Interval::fit(0, (-(lo as i128)).max(hi as i128), ty),
        }
    }

    /// `self op other` at the promoted type `ty`. Division and remainder
    /// ignore a zero divisor, which faults.
    pub fn arith(self, op: BinOp, other: Interval, ty: JType) -> Interval {
        let (Some((a, b)), Some((c, d))) = (self.bounds(), other.bounds()) else {
            return Interval::Empty;
        };
        let (a, b, c, d) = (a as i128, b as i128, c as i128, d as i128);
        match op {
            BinOp::Add => Interval::fit(a + c, b + d, ty),
            BinOp::Sub => Interval::fit(a - d, b - c, ty),
            BinOp::Mul => {
                let p = [a * c, a * d, b * c, b * d];
                Interval::fit(*p.iter().min().unwrap(), *p.iter().max().unwrap(), ty)
            }
            BinOp::Div => {
                // split the divisor around zero; each piece has a fixed sign
                // so the quotient is monotone in both operands
                let mut out = Interval::Empty;
                for (lo, hi) in [(c, d.min(-1)), (c.max(1), d)] {
                    if lo > hi {
                        continue;
                    }
                    let q = [a / lo, a / hi, b / lo, b / hi];
                    out = out.join(Interval::fit(*q.iter().min().unwrap(), *q.iter().max().unwrap(), ty));
                }
                out
            }
            BinOp::Rem => {
                if c == 0 && d == 0 {
                    return Interval::Empty;
                }
                let m = c.abs().max(d.abs()) - 1;
                let (lo, hi) = if a >= 0 {
                    (0, b.min(m))
                } else if b <= 0 {
                    ((-m).max(a), 0)
                } else {
                    ((-m).max(a), m.min(b))
                };
                Interval::fit(lo, hi, ty)
            }
            other => panic!("not arithmetic: {other:?}"),
        }
    }

    /// Three-valued comparison. A relation is decided only when the
    /// operands are disjoint or both are single values.
    pub fn compare(self, op: BinOp, other: Interval) -> Option<bool> {
        let ((a, b), (c, d)) = (self.bounds()?, other.bounds()?);
        if a == b && c == d {
            return Some(crate::arith::compare(op, a, c));
        }
        let below = b < c;
        let above = a > d;
        if !below && !above {
            return None;
        }
        Some(match op {
            BinOp::Lt | BinOp::Le => below,
            BinOp::Gt | BinOp::Ge => above,
            BinOp::Eq => false,
            BinOp::Ne => true,
            other => panic!("not a comparison: {other:?}"),
        })
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Interval::Empty => write!(f, "empty"),
            Interval::Range { lo, hi } => write!(f, "[{lo}, {hi}]"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith;
    use proptest::prelude::*;

    fn iv(lo: i64, hi: i64) -> Interval {
        Interval::new(lo, hi)
    }

    #[test]
    fn squares_by_brute_force() {
        // i * i over [-3, 2]; the enumeration is the oracle
        let r = iv(-3, 2).arith(BinOp::Mul, iv(-3, 2), JType::Int);
        let vals: Vec<i64> = (-3..=2).flat_map(|x| (-3..=2).map(move |y| x * y)).collect();
        assert!(vals.iter().all(|v| r.contains(*v)));
        assert_eq!(r, iv(-6, 9));
    }

    #[test]
    fn overflow_widens_to_the_type() {
        let max = i32::MAX as i64;
        assert_eq!(iv(max, max).arith(BinOp::Add, iv(1, 1), JType::Int), Interval::top(JType::Int));
        assert_eq!(iv(i32::MIN as i64, 0).neg(JType::Int), Interval::top(JType::Int));
        assert_eq!(iv(-1, -1).arith(BinOp::Div, iv(0, 0), JType::Int), Interval::Empty);
    }

    #[test]
    fn decisions_need_disjoint_operands() {
        assert_eq!(iv(19, 21).compare(BinOp::Lt, iv(8, 18)), Some(false));
        assert_eq!(iv(17, 19).compare(BinOp::Lt, iv(7, 17)), None);
        assert_eq!(iv(3, 3).compare(BinOp::Le, iv(3, 3)), Some(true));
        assert_eq!(iv(0, 2).compare(BinOp::Ne, iv(3, 9)), Some(true));
    }

    fn ops() -> impl Strategy<Value = BinOp> {
        prop_oneof![
            Just(BinOp::Add),
            Just(BinOp::Sub),
            Just(BinOp::Mul),
            Just(BinOp::Div),
            Just(BinOp::Rem)
        ]
    }

    fn small() -> impl Strategy<Value = (i64, i64)> {
        prop_oneof![
            (-40i64..40, 0i64..12).prop_map(|(lo, w)| (lo, lo + w)),
            (Just(i32::MAX as i64 - 5), 0i64..5).prop_map(|(lo, w)| (lo, lo + w)),
            (Just(i32::MIN as i64), 0i64..5).prop_map(|(lo, w)| (lo, lo + w)),
        ]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(2000))]

        #[test]
        fn arithmetic_is_sound(op in ops(), a in small(), b in small()) {
            let r = iv(a.0, a.1).arith(op, iv(b.0, b.1), JType::Int);
            for x in a.0..=a.1 {
                for y in b.0..=b.1 {
                    if let Some(v) = arith::arith(op, x, y, JType::Int) {
                        prop_assert!(r.contains(v), "{x} {op:?} {y} = {v} not in {r}");
                    }
                }
            }
        }

        #[test]
        fn comparisons_are_sound(op in prop_oneof![Just(BinOp::Lt), Just(BinOp::Le), Just(BinOp::Gt),
                Just(BinOp::Ge), Just(BinOp::Eq), Just(BinOp::Ne)], a in small(), b in small()) {
            if let Some(v) = iv(a.0, a.1).compare(op, iv(b.0, b.1)) {
                for x in a.0..=a.1 {
                    for y in b.0..=b.1 {
                        prop_assert_eq!(arith::compare(op, x, y), v);
                    }
                }
            }
        }
    }
}
