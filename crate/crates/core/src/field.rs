//! Table-driven arithmetic in the small finite fields GF(q), q ∈ {2,3,4,5,7,8}.
//!
//! Elements are the integers `0..q`. For prime `q` these are residues mod `q`;
//! for `q = 4` and `q = 8` an element is a bit-packed polynomial over GF(2),
//! reduced modulo x²+x+1 and x³+x+1 respectively. In GF(4) the element `2` is
//! the class of x (often written ω) and `3` is ω+1.

use crate::error::{Error, Result};

/// Field orders with fixed tables.
pub const SUPPORTED_ORDERS: [u32; 6] = [2, 3, 4, 5, 7, 8];

/// Addition, multiplication and inversion tables of GF(q).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldTable {
    q: u8,
    characteristic: u8,
    add: Vec<u8>,
    mul: Vec<u8>,
    neg: Vec<u8>,
    inv: Vec<u8>,
}

fn poly_mul_mod(a: u8, b: u8, modulus: u16, degree: u32) -> u8 {
    let mut acc: u16 = 0;
    for bit in 0..8 {
        if b & (1 << bit) != 0 {
            acc ^= (a as u16) << bit;
        }
    }
    for shift in (0..8u32).rev() {
        let top = degree + shift;
        if top < 16 && acc & (1 << top) != 0 {
            acc ^= modulus << shift;
        }
    }
    acc as u8
}

impl FieldTable {
    /// Builds the tables for GF(q). Only the orders in [`SUPPORTED_ORDERS`] are accepted.
    pub fn new(q: u32) -> Result<Self> {
        let (characteristic, add, mul) = match q {
            2 | 3 | 5 | 7 => {
                let n = q as usize;
                let add = (0..n * n).map(|k| ((k / n + k % n) % n) as u8).collect();
                let mul = (0..n * n).map(|k| ((k / n) * (k % n) % n) as u8).collect();
                (q as u8, add, mul)
            }
            4 | 8 => {
                let n = q as usize;
                let (modulus, degree) = if q == 4 { (0b111, 2) } else { (0b1011, 3) };
                let add = (0..n * n).map(|k| ((k / n) ^ (k % n)) as u8).collect();
                let mul = (0..n * n)
                    .map(|k| poly_mul_mod((k / n) as u8, (k % n) as u8, modulus, degree))
                    .collect();
                (2, add, mul)
            }
            _ => return Err(Error::UnsupportedField(q)),
        };
        let n = q as usize;
        let mut table = FieldTable {
            q: q as u8,
            characteristic,
            add,
            mul,
            neg: vec![0; n],
            inv: vec![0; n],
        };
        for a in 0..n as u8 {
            for b in 0..n as u8 {
                if table.add(a, b) == 0 {
                    table.neg[a as usize] = b;
                }
                if table.mul(a, b) == 1 {
                    table.inv[a as usize] = b;
                }
            }
        }
        Ok(table)
    }

    pub fn order(&self) -> u8 {
        self.q
    }

    pub fn characteristic(&self) -> u8 {
        self.characteristic
    }

    #[inline]
    pub fn add(&self, a: u8, b: u8) -> u8 {
        self.add[a as usize * self.q as usize + b as usize]
    }

    #[inline]
    pub fn sub(&self, a: u8, b: u8) -> u8 {
        self.add(a, self.neg[b as usize])
    }

    #[inline]
    pub fn mul(&self, a: u8, b: u8) -> u8 {
        self.mul[a as usize * self.q as usize + b as usize]
    }

    #[inline]
    pub fn neg(&self, a: u8) -> u8 {
        self.neg[a as usize]
    }

    /// Multiplicative inverse; `None` for zero.
    #[inline]
    pub fn inv(&self, a: u8) -> Option<u8> {
        if a == 0 {
            None
        } else {
            Some(self.inv[a as usize])
        }
    }

    pub fn elements(&self) -> impl Iterator<Item = u8> {
        0..self.q
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn char_two_addition() {
        let f = FieldTable::new(2).unwrap();
        assert_eq!(f.add(1, 1), 0);
    }

    #[test]
    fn gf4_omega_squared() {
        // x * x = x^2 = x + 1 mod x^2 + x + 1
        let f = FieldTable::new(4).unwrap();
        assert_eq!(f.mul(2, 2), 3);
        assert_eq!(f.mul(2, 3), 1);
    }

    #[test]
    fn gf5_product() {
        let f = FieldTable::new(5).unwrap();
        assert_eq!(f.mul(3, 4), 2);
    }

    #[test]
    fn gf8_reduces_by_cubic() {
        // x * x^2 = x^3 = x + 1
        let f = FieldTable::new(8).unwrap();
        assert_eq!(f.mul(0b010, 0b100), 0b011);
    }

    #[test]
    fn rejects_unsupported_orders() {
        for q in [0, 1, 6, 9, 16] {
            assert!(matches!(FieldTable::new(q), Err(Error::UnsupportedField(_))));
        }
    }

    #[test]
    fn field_axioms_hold_exhaustively() {
        for q in SUPPORTED_ORDERS {
            let f = FieldTable::new(q).unwrap();
            assert!(q % f.characteristic() as u32 == 0);
            let els: Vec<u8> = f.elements().collect();
            for &a in &els {
                assert_eq!(f.add(a, 0), a);
                assert_eq!(f.mul(a, 1), a);
                assert_eq!(f.add(a, f.neg(a)), 0);
                if a != 0 {
                    assert_eq!(f.mul(a, f.inv(a).unwrap()), 1);
                }
                for &b in &els {
                    assert_eq!(f.add(a, b), f.add(b, a));
                    assert_eq!(f.mul(a, b), f.mul(b, a));
                    for &c in &els {
                        assert_eq!(f.add(f.add(a, b), c), f.add(a, f.add(b, c)));
                        assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
                        assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
                    }
                }
            }
        }
    }
}
