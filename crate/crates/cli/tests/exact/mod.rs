//! Exact rational scalar backed by malachite, wrapped so it satisfies the
//! `num-traits` bounds the fitting code is generic over.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Rem, Sub};

use malachite_base::num::arithmetic::traits::Floor;
use malachite_base::num::conversion::traits::RoundingFrom;
use malachite_base::rounding_modes::RoundingMode;
use malachite_nz::integer::Integer;
use malachite_q::Rational;
use num_traits::{FromPrimitive, Num, One, ToPrimitive, Zero};

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Q(pub Rational);

impl Q {
    pub fn new(num: i64, den: i64) -> Self {
        Q(Rational::from_signeds(num, den))
    }
}

impl fmt::Debug for Q {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Q {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $op:tt) => {
        impl $tr for Q {
            type Output = Q;
            fn $m(self, rhs: Q) -> Q {
                Q(self.0 $op rhs.0)
            }
        }
    };
}
binop!(Add, add, +);
binop!(Sub, sub, -);
binop!(Mul, mul, *);
binop!(Div, div, /);

impl Rem for Q {
    type Output = Q;
    /// Remainder of truncating division, as for the primitive types.
    fn rem(self, rhs: Q) -> Q {
        let q = &self.0 / &rhs.0;
        let t = if q < 0 { -(-q).floor() } else { q.floor() };
        Q(self.0 - Rational::from(t) * rhs.0)
    }
}

impl Neg for Q {
    type Output = Q;
    fn neg(self) -> Q {
        Q(-self.0)
    }
}

impl Zero for Q {
    fn zero() -> Q {
        Q(Rational::from(0))
    }
    fn is_zero(&self) -> bool {
        self.0 == 0
    }
}

impl One for Q {
    fn one() -> Q {
        Q(Rational::from(1))
    }
}

impl Num for Q {
    type FromStrRadixErr = ();
    fn from_str_radix(s: &str, radix: u32) -> Result<Q, ()> {
        if radix != 10 {
            return Err(());
        }
        s.parse::<Rational>().map(Q).map_err(|_| ())
    }
}

impl FromPrimitive for Q {
    fn from_i64(n: i64) -> Option<Q> {
        Some(Q(Rational::from(n)))
    }
    fn from_u64(n: u64) -> Option<Q> {
        Some(Q(Rational::from(n)))
    }
    fn from_f64(n: f64) -> Option<Q> {
        Rational::try_from(n).ok().map(Q)
    }
}

impl ToPrimitive for Q {
    fn to_i64(&self) -> Option<i64> {
        let (t, _) = Integer::rounding_from(&self.0, RoundingMode::Down);
        i64::try_from(&t).ok()
    }
    fn to_u64(&self) -> Option<u64> {
        let (t, _) = Integer::rounding_from(&self.0, RoundingMode::Down);
        u64::try_from(&t).ok()
    }
    fn to_f64(&self) -> Option<f64> {
        Some(f64::rounding_from(&self.0, RoundingMode::Nearest).0)
    }
}
