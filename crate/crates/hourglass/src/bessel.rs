//! Bessel functions of the first kind J_n and modified second kind K_n for
//! real positive arguments, plus first derivatives via recurrence.
//!
//! J0/J1 use rational minimax fits below 8 and the standard asymptotic
//! expansion above; K0/K1 use the A&S-style series/asymptotic split. Higher
//! orders come from the three-term recurrences (downward with normalization
//! for J to stay stable).

use std::f64::consts::PI;

/// J_0(x).
pub fn j0(x: f64) -> f64 {
    let ax = x.abs();
    if ax < 8.0 {
        let y = x * x;
        let p1 = 57568490574.0 + y * (-13362590354.0 + y * (651619640.7 + y * (-11214424.18 + y * (77392.33017 + y * (-184.9052456)))));
        let p2 = 57568490411.0 + y * (1029532985.0 + y * (9494680.718 + y * (59272.64853 + y * (267.8532712 + y))));
        p1 / p2
    } else {
        let z = 8.0 / ax;
        let y = z * z;
        let xx = ax - 0.785398164;
        let p1 = 1.0 + y * (-0.1098628627e-2 + y * (0.2734510407e-4 + y * (-0.2073370639e-5 + y * 0.2093887211e-6)));
        let p2 = -0.1562499995e-1 + y * (0.1430488765e-3 + y * (-0.6911147651e-5 + y * (0.7621095161e-6 + y * (-0.934935152e-7))));
        (2.0 / (PI * ax)).sqrt() * (xx.cos() * p1 - z * xx.sin() * p2)
    }
}

/// J_1(x).
pub fn j1(x: f64) -> f64 {
    let ax = x.abs();
    let r = if ax < 8.0 {
        let y = x * x;
        let p1 = x * (72362614232.0 + y * (-7895059235.0 + y * (242396853.1 + y * (-2972611.439 + y * (15704.48260 + y * (-30.16036606))))));
        let p2 = 144725228442.0 + y * (2300535178.0 + y * (18583304.74 + y * (99447.43394 + y * (376.9991397 + y))));
        return p1 / p2;
    } else {
        let z = 8.0 / ax;
        let y = z * z;
        let xx = ax - 2.356194491;
        let p1 = 1.0 + y * (0.183105e-2 + y * (-0.3516396496e-4 + y * (0.2457520174e-5 + y * (-0.240337019e-6))));
        let p2 = 0.04687499995 + y * (-0.2002690873e-3 + y * (0.8449199096e-5 + y * (-0.88228987e-6 + y * 0.105787412e-6)));
        (2.0 / (PI * ax)).sqrt() * (xx.cos() * p1 - z * xx.sin() * p2)
    };
    if x < 0.0 {
        -r
    } else {
        r
    }
}

/// J_n(x) for n >= 0, x >= 0. Downward recurrence with renormalization for
/// x < n, upward otherwise.
pub fn jn(n: u32, x: f64) -> f64 {
    match n {
        0 => return j0(x),
        1 => return j1(x),
        _ => {}
    }
    let nf = n as f64;
    if x == 0.0 {
        return 0.0;
    }
    if x > nf {
        // upward recurrence is stable here
        let tox = 2.0 / x;
        let mut bjm = j0(x);
        let mut bj = j1(x);
        for j in 1..n {
            let bjp = (j as f64) * tox * bj - bjm;
            bjm = bj;
            bj = bjp;
        }
        bj
    } else {
        // downward recurrence from well above n, normalized by
        // J0 + 2*sum J_{2k} = 1
        let acc = 160.0f64;
        let tox = 2.0 / x;
        let m = 2 * ((n as usize + ((acc * nf).sqrt() as usize)) / 2);
        let mut jsum = false;
        let mut sum = 0.0;
        let mut bjp = 0.0f64;
        let mut bj = 1.0f64;
        let mut ans = 0.0;
        for j in (1..=m).rev() {
            let bjm = (j as f64) * tox * bj - bjp;
            bjp = bj;
            bj = bjm;
            if bj.abs() > 1e150 {
                bj *= 1e-150;
                bjp *= 1e-150;
                ans *= 1e-150;
                sum *= 1e-150;
            }
            if jsum {
                sum += bj;
            }
            jsum = !jsum;
            if j == n as usize {
                ans = bjp;
            }
        }
        sum = 2.0 * sum - bj;
        ans / sum
    }
}

/// I_0(x), needed for K_0 at small argument.
fn i0(x: f64) -> f64 {
    let ax = x.abs();
    if ax < 3.75 {
        let y = (x / 3.75) * (x / 3.75);
        1.0 + y * (3.5156229 + y * (3.0899424 + y * (1.2067492 + y * (0.2659732 + y * (0.360768e-1 + y * 0.45813e-2)))))
    } else {
        let y = 3.75 / ax;
        (ax.exp() / ax.sqrt())
            * (0.39894228 + y * (0.1328592e-1 + y * (0.225319e-2 + y * (-0.157565e-2 + y * (0.916281e-2 + y * (-0.2057706e-1 + y * (0.2635537e-1 + y * (-0.1647633e-1 + y * 0.392377e-2))))))))
    }
}

fn i1(x: f64) -> f64 {
    let ax = x.abs();
    let r = if ax < 3.75 {
        let y = (x / 3.75) * (x / 3.75);
        ax * (0.5 + y * (0.87890594 + y * (0.51498869 + y * (0.15084934 + y * (0.2658733e-1 + y * (0.301532e-2 + y * 0.32411e-3))))))
    } else {
        let y = 3.75 / ax;
        let mut a = 0.2282967e-1 + y * (-0.2895312e-1 + y * (0.1787654e-1 - y * 0.420059e-2));
        a = 0.39894228 + y * (-0.3988024e-1 + y * (-0.362018e-2 + y * (0.163801e-2 + y * (-0.1031555e-1 + y * a))));
        a * ax.exp() / ax.sqrt()
    };
    if x < 0.0 {
        -r
    } else {
        r
    }
}

/// K_0(x), x > 0.
pub fn k0(x: f64) -> f64 {
    if x <= 2.0 {
        let y = x * x / 4.0;
        (-(x / 2.0).ln()) * i0(x)
            + (-0.57721566 + y * (0.42278420 + y * (0.23069756 + y * (0.3488590e-1 + y * (0.262698e-2 + y * (0.10750e-3 + y * 0.74e-5))))))
    } else {
        let y = 2.0 / x;
        ((-x).exp() / x.sqrt())
            * (1.25331414 + y * (-0.7832358e-1 + y * (0.2189568e-1 + y * (-0.1062446e-1 + y * (0.587872e-2 + y * (-0.251540e-2 + y * 0.53208e-3))))))
    }
}

/// K_1(x), x > 0.
pub fn k1(x: f64) -> f64 {
    if x <= 2.0 {
        let y = x * x / 4.0;
        ((x / 2.0).ln()) * i1(x)
            + (1.0 / x)
                * (1.0 + y * (0.15443144 + y * (-0.67278579 + y * (-0.18156897 + y * (-0.1919402e-1 + y * (-0.110404e-2 + y * (-0.4686e-4)))))))
    } else {
        let y = 2.0 / x;
        ((-x).exp() / x.sqrt())
            * (1.25331414 + y * (0.23498619 + y * (-0.3655620e-1 + y * (0.1504268e-1 + y * (-0.780353e-2 + y * (0.325614e-2 + y * (-0.68245e-3)))))))
    }
}

/// K_n(x) for n >= 0, x > 0. Upward recurrence (stable for K).
pub fn kn(n: u32, x: f64) -> f64 {
    match n {
        0 => return k0(x),
        1 => return k1(x),
        _ => {}
    }
    let tox = 2.0 / x;
    let mut bkm = k0(x);
    let mut bk = k1(x);
    for j in 1..n {
        let bkp = (j as f64) * tox * bk + bkm;
        bkm = bk;
        bk = bkp;
    }
    bk
}

/// d/dx J_n(x) via (J_{n-1} - J_{n+1}) / 2.
pub fn jn_prime(n: u32, x: f64) -> f64 {
    if n == 0 {
        -j1(x)
    } else {
        0.5 * (jn(n - 1, x) - jn(n + 1, x))
    }
}

/// d/dx K_n(x) via -(K_{n-1} + K_{n+1}) / 2.
pub fn kn_prime(n: u32, x: f64) -> f64 {
    if n == 0 {
        -k1(x)
    } else {
        -0.5 * (kn(n - 1, x) + kn(n + 1, x))
    }
}
