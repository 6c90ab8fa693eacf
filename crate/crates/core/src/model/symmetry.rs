use super::{DensityProfile, ModelParams};

/// (α, β, Ω_A, Ω_D) → (β, α, Ω_D, Ω_A) and ρ(x) → 1 − ρ(1 − x).
pub fn particle_hole_transform(params: &ModelParams, profile: &DensityProfile) -> (ModelParams, DensityProfile) {
    let p = ModelParams {
        alpha: params.beta,
        beta: params.alpha,
        omega_a: params.omega_d,
        omega_d: params.omega_a,
        epsilon: params.epsilon,
    };
    let values = profile.values().iter().rev().map(|v| 1.0 - v).collect();
    (p, DensityProfile::from_parts_unchecked(profile.grid().to_vec(), values))
}

impl ModelParams {
    pub fn hole_transform(&self) -> ModelParams {
        ModelParams {
            alpha: self.beta,
            beta: self.alpha,
            omega_a: self.omega_d,
            omega_d: self.omega_a,
            epsilon: self.epsilon,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn half_profile_is_fixed() {
        let p = ModelParams::special(0.25, 0.125, 0.25, 0.01).unwrap();
        let r = DensityProfile::from_fn(16, |_| 0.5).unwrap();
        let (q, s) = particle_hole_transform(&p, &r);
        assert_eq!((q.alpha, q.beta, q.omega_a, q.omega_d), (0.125, 0.25, 0.25, 0.25));
        assert_eq!(s, r);
    }

    proptest! {
        #[test]
        fn involution(a in 0.01f64..0.99, b in 0.01f64..0.99, oa in 0.0f64..2.0, od in 0.01f64..2.0,
                      vals in proptest::collection::vec(0.0f64..1.0, 33)) {
            let p = ModelParams::new(a, b, oa, od, 0.01).unwrap();
            let r = DensityProfile::from_values(vals).unwrap();
            let (p1, r1) = particle_hole_transform(&p, &r);
            let (p2, r2) = particle_hole_transform(&p1, &r1);
            prop_assert_eq!(p2, p);
            for (x, y) in r2.values().iter().zip(r.values()) {
                prop_assert!((x - y).abs() <= 1e-15);
            }
            prop_assert!((p1.k() * p.k() - 1.0).abs() < 1e-12 || p.omega_a == 0.0);
        }
    }
}
