//! Elementary number-theoretic functions on machine integers.

/// Greatest common divisor of two `i64` values (always nonnegative).
pub fn gcd_i64(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.unsigned_abs(), b.unsigned_abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a as i64
}

/// Sum of divisors `σ(m) = Σ_{t | m} t` for `m ≥ 1`.
pub fn sigma(m: u64) -> u64 {
    assert!(m >= 1, "sigma requires m >= 1");
    factorize(m).into_iter().fold(1u64, |acc, (p, e)| {
        // 1 + p + ... + p^e
        let mut pk = 1u64;
        let mut s = 1u64;
        for _ in 0..e {
            pk *= p;
            s += pk;
        }
        acc * s
    })
}

/// Sum of `k`-th powers of divisors `σ_k(m)`; `σ_0` counts divisors.
pub fn sigma_k(k: u32, m: u64) -> u64 {
    assert!(m >= 1, "sigma_k requires m >= 1");
    let mut total: u128 = 0;
    let mut i = 1u64;
    while i * i <= m {
        if m % i == 0 {
            total += (i as u128).pow(k);
            let j = m / i;
            if j != i {
                total += (j as u128).pow(k);
            }
        }
        i += 1;
    }
    u64::try_from(total).expect("sigma_k overflows u64")
}

/// Euler's totient `φ(n)`.
pub fn phi(n: u64) -> u64 {
    factorize(n).into_iter().fold(n, |acc, (p, _)| acc / p * (p - 1))
}

/// Prime factorization by trial division: returns `(p, e)` pairs with
/// ascending `p`.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    assert!(n >= 1, "factorize requires n >= 1");
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= n {
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// Möbius function `μ(n)`.
pub fn moebius(n: u64) -> i64 {
    let f = factorize(n);
    if f.iter().any(|&(_, e)| e > 1) {
        0
    } else if f.len() % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Index `[SL₂(Z) : Γ₀(N)] = N · Π_{p | N} (1 + 1/p)`.
pub fn index_gamma0(n: u64) -> u64 {
    assert!(n >= 1, "index_gamma0 requires N >= 1");
    factorize(n).into_iter().fold(n, |acc, (p, _)| acc / p * (p + 1))
}

/// Kronecker symbol `(a/n)`, defined for all integers.
///
/// Conventions: `(a/0) = 1` if `a = ±1` and `0` otherwise; `(a/-1) = 1` for
/// `a ≥ 0` and `-1` for `a < 0`; `(a/2) = 0` for even `a`, `+1` for
/// `a ≡ ±1 (mod 8)`, `-1` for `a ≡ ±3 (mod 8)`.
pub fn kronecker(a: i64, n: i64) -> i32 {
    if n == 0 {
        return if a == 1 || a == -1 { 1 } else { 0 };
    }
    let mut result = 1i32;
    let mut n = n;
    if n < 0 {
        if a < 0 {
            result = -result;
        }
        n = -n;
    }
    // Split off the even part of n via (a/2).
    let mut a = a;
    while n % 2 == 0 {
        if a % 2 == 0 {
            return 0;
        }
        let r = a.rem_euclid(8);
        if r == 3 || r == 5 {
            result = -result;
        }
        n /= 2;
    }
    // Jacobi symbol (a/n) for odd n >= 1 by quadratic reciprocity.
    a = a.rem_euclid(n);
    while a != 0 {
        while a % 2 == 0 {
            a /= 2;
            let r = n.rem_euclid(8);
            if r == 3 || r == 5 {
                result = -result;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if a.rem_euclid(4) == 3 && n.rem_euclid(4) == 3 {
            result = -result;
        }
        a = a.rem_euclid(n);
    }
    if n == 1 {
        result
    } else {
        0
    }
}

/// Is `D` a fundamental discriminant?
///
/// `D = 1` counts as fundamental (the trivial character).  Otherwise either
/// `D ≡ 1 (mod 4)` and `D` is squarefree, or `D = 4m` with `m ≡ 2, 3 (mod 4)`
/// squarefree.
pub fn is_fundamental(d: i64) -> bool {
    fn squarefree(x: i64) -> bool {
        let x = x.unsigned_abs();
        if x == 0 {
            return false;
        }
        factorize(x).iter().all(|&(_, e)| e == 1)
    }
    if d == 1 {
        return true;
    }
    if d == 0 {
        return false;
    }
    if d.rem_euclid(4) == 1 {
        return squarefree(d);
    }
    if d % 4 == 0 {
        let m = d / 4;
        let r = m.rem_euclid(4);
        return (r == 2 || r == 3) && squarefree(m);
    }
    false
}

/// Does `x` have a square root modulo `m` (`m ≥ 1`)?
pub fn is_square_mod(x: i64, m: i64) -> bool {
    assert!(m >= 1, "is_square_mod requires m >= 1");
    let x = x.rem_euclid(m);
    (0..m).any(|r| (r * r - x).rem_euclid(m) == 0)
}
