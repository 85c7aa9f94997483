//! Finite fields `GF(p^k)` by table lookup, for affine geometries.

/// `(p, k)` with `q = p^k`, if `q` is a prime power.
pub fn prime_power(q: usize) -> Option<(usize, u32)> {
    if q < 2 {
        return None;
    }
    let p = (2..=q).find(|d| q.is_multiple_of(*d))?;
    let mut rest = q;
    let mut k = 0;
    while rest.is_multiple_of(p) {
        rest /= p;
        k += 1;
    }
    (rest == 1).then_some((p, k))
}

/// Elements are `0..q`, read as base-`p` digit vectors (polynomial
/// coefficients, lowest degree first).
#[derive(Clone, Debug)]
pub struct Field {
    q: usize,
    add: Vec<u16>,
    mul: Vec<u16>,
    neg: Vec<u16>,
}

fn digits(x: usize, p: usize, k: usize) -> Vec<usize> {
    let mut out = vec![0; k];
    let mut x = x;
    for d in out.iter_mut() {
        *d = x % p;
        x /= p;
    }
    out
}

fn undigits(d: &[usize], p: usize) -> usize {
    d.iter().rev().fold(0, |acc, &c| acc * p + c)
}

/// Product of two polynomials reduced modulo a monic `modulus` of degree `k`
/// (given by its `k` lower coefficients).
fn poly_mul(a: &[usize], b: &[usize], modulus: &[usize], p: usize) -> Vec<usize> {
    let k = modulus.len();
    let mut prod = vec![0; 2 * k];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            prod[i + j] = (prod[i + j] + x * y) % p;
        }
    }
    for deg in (k..2 * k).rev() {
        let c = prod[deg];
        if c == 0 {
            continue;
        }
        prod[deg] = 0;
        // x^k = -modulus
        for (i, &m) in modulus.iter().enumerate() {
            let idx = deg - k + i;
            prod[idx] = (prod[idx] + c * (p - m)) % p;
        }
    }
    prod.truncate(k);
    prod
}

impl Field {
    pub fn new(q: usize) -> Option<Field> {
        let (p, k) = prime_power(q)?;
        if q > u16::MAX as usize {
            return None;
        }
        let k = k as usize;
        let add: Vec<u16> = (0..q * q)
            .map(|ab| {
                let (a, b) = (digits(ab / q, p, k), digits(ab % q, p, k));
                let s: Vec<usize> = a.iter().zip(&b).map(|(x, y)| (x + y) % p).collect();
                undigits(&s, p) as u16
            })
            .collect();
        // First monic modulus giving a product without zero divisors.
        let modulus = (0..q).map(|c| digits(c, p, k)).find(|m| {
            (1..q).all(|a| {
                (1..q)
                    .all(|b| undigits(&poly_mul(&digits(a, p, k), &digits(b, p, k), m, p), p) != 0)
            })
        })?;
        let mul: Vec<u16> = (0..q * q)
            .map(|ab| {
                undigits(
                    &poly_mul(&digits(ab / q, p, k), &digits(ab % q, p, k), &modulus, p),
                    p,
                ) as u16
            })
            .collect();
        let neg = (0..q)
            .map(|a| (0..q).find(|&b| add[a * q + b] == 0).unwrap() as u16)
            .collect();
        Some(Field { q, add, mul, neg })
    }

    pub fn order(&self) -> usize {
        self.q
    }

    pub fn add(&self, a: usize, b: usize) -> usize {
        self.add[a * self.q + b] as usize
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.mul[a * self.q + b] as usize
    }

    pub fn neg(&self, a: usize) -> usize {
        self.neg[a] as usize
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn detects_prime_powers() {
        assert_eq!(prime_power(8), Some((2, 3)));
        assert_eq!(prime_power(9), Some((3, 2)));
        assert_eq!(prime_power(7), Some((7, 1)));
        assert_eq!(prime_power(12), None);
        assert_eq!(prime_power(1), None);
    }

    #[test]
    fn field_axioms_hold() {
        for q in [2, 3, 4, 5, 7, 8, 9, 16, 25, 27] {
            let f = Field::new(q).unwrap();
            for a in 0..q {
                assert_eq!(f.add(a, 0), a);
                assert_eq!(f.mul(a, 1), a);
                assert_eq!(f.add(a, f.neg(a)), 0);
                if a != 0 {
                    assert!(
                        (1..q).any(|b| f.mul(a, b) == 1),
                        "no inverse for {a} in GF({q})"
                    );
                }
                for b in 0..q {
                    assert_eq!(f.add(a, b), f.add(b, a));
                    assert_eq!(f.mul(a, b), f.mul(b, a));
                    for c in 0..q {
                        assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
                        assert_eq!(f.mul(a, f.mul(b, c)), f.mul(f.mul(a, b), c));
                    }
                }
            }
        }
        assert!(Field::new(6).is_none());
    }
}
