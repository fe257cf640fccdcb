use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

const SMALL_PRIMES: [u32; 25] =
    [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97];

/// Miller-Rabin with `rounds` bases drawn from a fixed-seed stream, after
/// trial division by the primes below 100. Deterministic for a given input.
pub fn is_probable_prime(n: &BigUint, rounds: usize) -> bool {
    let two = BigUint::from(2u32);
    if n < &two {
        return false;
    }
    for &p in &SMALL_PRIMES {
        let p = BigUint::from(p);
        if *n == p {
            return true;
        }
        if (n % &p).is_zero() {
            return false;
        }
    }

    let one = BigUint::one();
    let n_minus_one = n - &one;
    let s = n_minus_one.trailing_zeros().unwrap_or(0);
    let d = &n_minus_one >> s;

    let mut rng = ChaCha20Rng::seed_from_u64(0x6d69_6c6c_6572);
    let nbytes = n.bits().div_ceil(8) as usize + 8;
    let mut buf = vec![0u8; nbytes];
    let span = n - 3u32; // bases in [2, n-2]

    'witness: for _ in 0..rounds {
        rng.fill_bytes(&mut buf);
        let a = BigUint::from_bytes_be(&buf).mod_floor(&span) + &two;
        let mut x = a.modpow(&d, n);
        if x == one || x == n_minus_one {
            continue;
        }
        for _ in 1..s {
            x = x.modpow(&two, n);
            if x == n_minus_one {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classifies_small_numbers() {
        let primes: Vec<u32> =
            (0..400u32).filter(|&n| n >= 2 && (2..n).take_while(|d| d * d <= n).all(|d| n % d != 0)).collect();
        for n in 0..400u32 {
            assert_eq!(is_probable_prime(&BigUint::from(n), 64), primes.contains(&n), "n = {n}");
        }
    }

    #[test]
    fn large_values() {
        let m127 = (BigUint::one() << 127u32) - 1u32;
        assert!(is_probable_prime(&m127, 64));
        let m61 = (BigUint::one() << 61u32) - 1u32;
        assert!(is_probable_prime(&m61, 64));
        // 2^128 + 1 = 59649589127497217 * 5704689200685129054721
        let f7 = (BigUint::one() << 128u32) + 1u32;
        assert!(!is_probable_prime(&f7, 64));
        // Carmichael number
        assert!(!is_probable_prime(&BigUint::from(561u32), 64));
        assert!(!is_probable_prime(&(&m127 * &m61), 64));
    }
}
