//! Smooth compactly supported profiles: mollifier bumps and the
//! plateau/transition shapes used by partitions of unity.

/// One-dimensional radial profile r ↦ φ(r) defining a radial kernel
/// φ(x) = profile(|x|).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProfileShape {
    /// exp(-1/(1-r^2)) for r < 1, zero outside: the standard mollifier.
    Bump,
    /// exp(-r^2 / (2 sigma^2)) truncated at the support radius.
    Gaussian { sigma: f64 },
    /// cos^2(pi r / 2) for r < 1: a cheap C^1 test kernel.
    Cosine,
}

/// A radial kernel profile with declared support radius and an optional
/// normalization contract (discrete unit mass after sampling).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialProfile {
    pub shape: ProfileShape,
    pub support_radius: f64,
    pub normalized: bool,
}

impl RadialProfile {
    /// The standard normalized mollifier: smooth, nonnegative, supported
    /// in the unit ball, discrete mass one at every sampling scale.
    pub fn standard_bump() -> Self {
        RadialProfile {
            shape: ProfileShape::Bump,
            support_radius: 1.0,
            normalized: true,
        }
    }

    pub fn truncated_gaussian(sigma: f64, support_radius: f64) -> Self {
        RadialProfile {
            shape: ProfileShape::Gaussian { sigma },
            support_radius,
            normalized: true,
        }
    }

    /// Unnormalized profile value at radius r.
    pub fn eval(&self, r: f64) -> f64 {
        if r >= self.support_radius {
            return 0.0;
        }
        match self.shape {
            ProfileShape::Bump => {
                let s = r / self.support_radius;
                let denom = 1.0 - s * s;
                if denom <= 0.0 {
                    0.0
                } else {
                    (-1.0 / denom).exp()
                }
            }
            ProfileShape::Gaussian { sigma } => (-r * r / (2.0 * sigma * sigma)).exp(),
            ProfileShape::Cosine => {
                let s = r / self.support_radius;
                let c = (std::f64::consts::FRAC_PI_2 * s).cos();
                c * c
            }
        }
    }

    pub fn is_nonnegative(&self) -> bool {
        true
    }

    /// Radial derivative dφ/dr at radius r.
    pub fn derivative(&self, r: f64) -> f64 {
        if r >= self.support_radius {
            return 0.0;
        }
        match self.shape {
            ProfileShape::Bump => {
                let w = self.support_radius;
                let u = r / w;
                let denom = 1.0 - u * u;
                if denom <= 0.0 {
                    0.0
                } else {
                    (-1.0 / denom).exp() * (-2.0 * u / (w * denom * denom))
                }
            }
            ProfileShape::Gaussian { sigma } => {
                -(r / (sigma * sigma)) * (-r * r / (2.0 * sigma * sigma)).exp()
            }
            ProfileShape::Cosine => {
                let w = self.support_radius;
                let s = r / w;
                let half_pi = std::f64::consts::FRAC_PI_2;
                -2.0 * (half_pi / w) * (half_pi * s).cos() * (half_pi * s).sin()
            }
        }
    }
}

/// C^inf step: 1 for u <= 0, 0 for u >= 1, strictly decreasing between.
/// Built from the standard transition e^{-1/u}/(e^{-1/u} + e^{-1/(1-u)}).
pub fn smooth_step_down(u: f64) -> f64 {
    if u <= 0.0 {
        1.0
    } else if u >= 1.0 {
        0.0
    } else {
        let a = (-1.0 / (1.0 - u)).exp();
        let b = (-1.0 / u).exp();
        a / (a + b)
    }
}

/// Plateau bump: 1 on [0, inner], smooth transition to 0 at outer.
pub fn plateau(r: f64, inner: f64, outer: f64) -> f64 {
    smooth_step_down((r - inner) / (outer - inner))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_support_and_positivity() {
        let p = RadialProfile::standard_bump();
        assert_eq!(p.eval(1.0), 0.0);
        assert_eq!(p.eval(1.5), 0.0);
        assert!(p.eval(0.0) > p.eval(0.5));
        assert!(p.eval(0.999) > 0.0);
    }

    #[test]
    fn smooth_step_monotone() {
        assert_eq!(smooth_step_down(-0.1), 1.0);
        assert_eq!(smooth_step_down(1.0), 0.0);
        let mut prev = 1.0;
        for k in 1..50 {
            let v = smooth_step_down(k as f64 / 50.0);
            assert!(v <= prev + 1e-15);
            prev = v;
        }
    }

    #[test]
    fn plateau_is_one_inside() {
        assert_eq!(plateau(0.3, 0.5, 1.0), 1.0);
        assert_eq!(plateau(0.5, 0.5, 1.0), 1.0);
        assert!(plateau(0.75, 0.5, 1.0) > 0.0);
        assert_eq!(plateau(1.0, 0.5, 1.0), 0.0);
    }
}
