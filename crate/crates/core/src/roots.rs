//! Real roots of the reaction polynomial `f_m(u) = u³ − u + b`.

/// `f_m(u) = u³ − u + b`
pub fn reaction_polynomial(u: f64, b: f64) -> f64 {
    u * u * u - u + b
}

/// Real roots of `u³ − u + b = 0`, ascending, polished by Newton.
pub fn cubic_roots(b: f64) -> Vec<f64> {
    // depressed cubic t³ + p t + q with p = −1, q = b
    let disc = 4.0 / 27.0 - b * b;
    let mut roots = if disc > 0.0 {
        // three real roots, trigonometric form
        let m = 2.0 / 3f64.sqrt();
        let theta = (1.5 * b * 3f64.sqrt() / -1.0).clamp(-1.0, 1.0).acos() / 3.0;
        (0..3)
            .map(|k| m * (theta - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos())
            .collect::<Vec<_>>()
    } else {
        let s = (b * b / 4.0 - 1.0 / 27.0).max(0.0).sqrt();
        vec![(-b / 2.0 + s).cbrt() + (-b / 2.0 - s).cbrt()]
    };
    for r in roots.iter_mut() {
        for _ in 0..4 {
            let d = 3.0 * *r * *r - 1.0;
            if d != 0.0 {
                *r -= reaction_polynomial(*r, b) / d;
            }
        }
    }
    roots.sort_by(f64::total_cmp);
    roots
}

/// Roots where `f_m' = 3u² − 1 > 0`: stable equilibria of `u̇ = −f_m(u)`.
pub fn stable_roots(b: f64) -> Vec<f64> {
    cubic_roots(b).into_iter().filter(|r| 3.0 * r * r - 1.0 > 0.0).collect()
}

/// The stable state with the lower potential: the well whose sign is
/// opposite to `b` (`+1` at `b = 0`). This is the constant a uniform run
/// settles to from small data around zero.
pub fn preferred_stable_root(b: f64) -> f64 {
    let roots = stable_roots(b);
    if b > 0.0 {
        roots[0]
    } else {
        *roots.last().unwrap()
    }
}
