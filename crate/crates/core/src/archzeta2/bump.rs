//! The frozen C-infinity cut-off functions.

fn mollifier(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        (-1.0 / t).exp()
    }
}

/// Smooth step: 0 for `t <= 0`, 1 for `t >= 1`.
pub fn smoothstep(t: f64) -> f64 {
    let a = mollifier(t);
    let b = mollifier(1.0 - t);
    if a == 0.0 {
        0.0
    } else if b == 0.0 {
        1.0
    } else {
        a / (a + b)
    }
}

/// The test-function bump: 1 on `|z| <= 1`, 0 on `|z| >= 2`.
pub fn bump(r: f64) -> f64 {
    1.0 - smoothstep(r - 1.0)
}

/// Partition-of-unity profile: 1 on `t <= 1/2`, 0 on `t >= 1`.
pub fn plateau(t: f64) -> f64 {
    bump(2.0 * t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plateau_and_support() {
        assert_eq!(bump(0.3), 1.0);
        assert_eq!(bump(1.0), 1.0);
        assert_eq!(bump(2.0), 0.0);
        assert_eq!(bump(5.0), 0.0);
        assert!((bump(1.5) - 0.5).abs() < 1e-15);
        assert_eq!(plateau(0.5), 1.0);
        assert_eq!(plateau(1.0), 0.0);
    }

    #[test]
    fn monotone_between() {
        let mut last = 1.0;
        for k in 0..=100 {
            let v = bump(1.0 + k as f64 / 100.0);
            assert!(v <= last);
            last = v;
        }
    }
}
