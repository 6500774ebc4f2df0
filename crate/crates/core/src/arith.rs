//! Java integer semantics on `i64` carriers.

use crate::frontend::ast::{BinOp, JType};

/// Reduce `v` to the value range of `ty` (two's complement wrap, `char`
/// unsigned).
pub fn wrap(v: i64, ty: JType) -> i64 {
    match ty {
        JType::Byte => v as i8 as i64,
        JType::Short => v as i16 as i64,
        JType::Char => v as u16 as i64,
        JType::Int => v as i32 as i64,
        _ => v,
    }
}

/// Arithmetic at the promoted type `ty` (int or long). `None` when dividing
/// by zero.
pub fn arith(op: BinOp, a: i64, b: i64, ty: JType) -> Option<i64> {
    if ty == JType::Long {
        Some(match op {
            BinOp::Add => a.wrapping_add(b),
            BinOp::Sub => a.wrapping_sub(b),
            BinOp::Mul => a.wrapping_mul(b),
            BinOp::Div => a.checked_div(b).or_else(|| (b != 0).then(|| a.wrapping_div(b)))?,
            BinOp::Rem => a.checked_rem(b).or_else(|| (b != 0).then(|| a.wrapping_rem(b)))?,
            _ => panic!("not arithmetic: {op:?}"),
        })
    } else {
        let (a, b) = (a as i32, b as i32);
        let r = match op {
            BinOp::Add => a.wrapping_add(b),
            BinOp::Sub => a.wrapping_sub(b),
            BinOp::Mul => a.wrapping_mul(b),
            BinOp::Div => {
                if b == 0 {
                    return None;
                }
                a.wrapping_div(b)
            }
            BinOp::Rem => {
                if b == 0 {
                    return None;
                }
                a.wrapping_rem(b)
            }
            _ => panic!("not arithmetic: {op:?}"),
        };
        Some(r as i64)
    }
}

pub fn compare(op: BinOp, a: i64, b: i64) -> bool {
    match op {
        BinOp::Lt => a < b,
        BinOp::Gt => a > b,
        BinOp::Le => a <= b,
        BinOp::Ge => a >= b,
        BinOp::Eq => a == b,
        BinOp::Ne => a != b,
        _ => panic!("not a comparison: {op:?}"),
    }
}

pub fn neg(a: i64, ty: JType) -> i64 {
    wrap(a.wrapping_neg(), ty)
}

/// `Math.abs`, which leaves the minimum value unchanged.
pub fn abs(a: i64, ty: JType) -> i64 {
    wrap(a.wrapping_abs(), ty)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn java_edge_cases() {
        let min = i32::MIN as i64;
        assert_eq!(arith(BinOp::Div, min, -1, JType::Int), Some(min));
        assert_eq!(arith(BinOp::Rem, min, -1, JType::Int), Some(0));
        assert_eq!(arith(BinOp::Rem, -7, 2, JType::Int), Some(-1));
        assert_eq!(arith(BinOp::Rem, 7, -2, JType::Int), Some(1));
        assert_eq!(arith(BinOp::Div, -7, 2, JType::Int), Some(-3));
        assert_eq!(arith(BinOp::Add, i32::MAX as i64, 1, JType::Int), Some(min));
        assert_eq!(arith(BinOp::Div, 1, 0, JType::Int), None);
        assert_eq!(arith(BinOp::Div, i64::MIN, -1, JType::Long), Some(i64::MIN));
        assert_eq!(abs(min, JType::Int), min);
        assert_eq!(wrap(65536 + 65, JType::Char), 65);
        assert_eq!(wrap(200, JType::Byte), -56);
    }
}
