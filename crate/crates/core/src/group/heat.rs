use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{Group, GroupElement};
use crate::error::{Error, Result};

/// Truncation constant `c` in `j_max = ⌈c/√τ⌉`; the neglected tail is
/// bounded by `e^{-c²}`.
pub const SERIES_CUTOFF: f64 = 12.0;

/// Below this `sin ψ` the image sum switches to its Taylor expansion about
/// the nearest endpoint of `[0, π]`.
const ENDPOINT_SIN: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HeatMethod {
    /// Truncated character expansion `Σ_ρ dim ρ e^{-τ C(ρ)} χ_ρ(g)`.
    CharSeries,
    /// Poisson-resummed sum over geodesics winding through the cut locus.
    GaussianImages,
    /// Images for `τ < 1`, characters otherwise.
    Auto,
}

/// Heat kernel `K_τ` on SU(2) or U(1), as a density with respect to the
/// normalized Haar measure, with the per-`τ` data precomputed.
#[derive(Debug, Clone)]
pub struct HeatKernel {
    group: Group,
    tau: f64,
    method: HeatMethod,
    coeffs: Vec<f64>,
    images: i64,
    prefactor: f64,
}

impl HeatKernel {
    pub fn new(group: Group, tau: f64, method: HeatMethod) -> Result<Self> {
        if !(tau > 0.0) || !tau.is_finite() {
            return Err(Error::NonPositiveTime(tau));
        }
        let method = match method {
            HeatMethod::Auto if tau < 1.0 => HeatMethod::GaussianImages,
            HeatMethod::Auto => HeatMethod::CharSeries,
            m => m,
        };
        let j_max = (SERIES_CUTOFF / tau.sqrt()).ceil() as usize;
        let mut kernel = HeatKernel {
            group,
            tau,
            method,
            coeffs: Vec::new(),
            images: ((40.0 * tau).sqrt() / (2.0 * PI)).ceil() as i64 + 1,
            prefactor: 0.0,
        };
        match (group, method) {
            (Group::Su2, HeatMethod::CharSeries) => {
                // coefficient of U_k with k = 2j: (k+1) e^{-τ k(k+2)/4}
                kernel.coeffs = (0..=2 * j_max)
                    .map(|k| {
                        let k = k as f64;
                        (k + 1.0) * (-tau * k * (k + 2.0) / 4.0).exp()
                    })
                    .collect();
            }
            (Group::U1, HeatMethod::CharSeries) => {
                kernel.coeffs = (0..=j_max)
                    .map(|n| (-tau * (n * n) as f64).exp())
                    .collect();
            }
            (Group::Su2, HeatMethod::GaussianImages) => {
                kernel.prefactor = (tau / 4.0).exp() * 2.0 * PI.sqrt() * tau.powf(-1.5);
            }
            (Group::U1, HeatMethod::GaussianImages) => {
                kernel.prefactor = (PI / tau).sqrt();
            }
            (_, HeatMethod::Auto) => unreachable!(),
        }
        Ok(kernel)
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn method(&self) -> HeatMethod {
        self.method
    }

    pub fn group(&self) -> Group {
        self.group
    }

    /// Number of retained irreps for the character series.
    pub fn series_terms(&self) -> usize {
        self.coeffs.len()
    }

    pub fn eval(&self, g: &GroupElement) -> f64 {
        match (g, self.method) {
            (GroupElement::Su2(q), HeatMethod::CharSeries) => clenshaw_u(&self.coeffs, q.w),
            (GroupElement::Su2(q), _) => {
                let psi = q.class_angle();
                self.prefactor * self.su2_image_ratio(psi, q.vec_norm())
            }
            (GroupElement::U1(t), HeatMethod::CharSeries) => {
                let mut s = self.coeffs[0];
                for (n, c) in self.coeffs.iter().enumerate().skip(1) {
                    s += 2.0 * c * (n as f64 * t).cos();
                }
                s
            }
            (GroupElement::U1(_), _) => {
                let theta = g.class_angle();
                let mut s = 0.0;
                for m in -self.images..=self.images {
                    let u = theta + 2.0 * PI * m as f64;
                    s += (-u * u / (4.0 * self.tau)).exp();
                }
                self.prefactor * s
            }
        }
    }

    /// `f(ψ)/sin ψ` with `f(ψ) = Σ_m h(ψ + 2πm)`, `h(u) = u e^{-u²/τ}`.
    fn su2_image_ratio(&self, psi: f64, sin_psi: f64) -> f64 {
        let tau = self.tau;
        if sin_psi > ENDPOINT_SIN {
            let mut f = 0.0;
            for m in -self.images..=self.images {
                let u = psi + 2.0 * PI * m as f64;
                f += u * (-u * u / tau).exp();
            }
            return f / sin_psi;
        }
        // f is odd about both 0 and π, so f/sin ψ = c (f' + (f' + f''') δ²/6) + O(δ⁴)
        let (p, c) = if psi < PI / 2.0 { (0.0, 1.0) } else { (PI, -1.0) };
        let delta = psi - p;
        let (mut d1, mut d3) = (0.0, 0.0);
        for m in -self.images..=self.images {
            let u = p + 2.0 * PI * m as f64;
            let e = (-u * u / tau).exp();
            let u2 = u * u;
            d1 += e * (1.0 - 2.0 * u2 / tau);
            d3 += e * (-6.0 / tau + 24.0 * u2 / (tau * tau) - 8.0 * u2 * u2 / (tau * tau * tau));
        }
        c * (d1 + (d1 + d3) * delta * delta / 6.0)
    }
}

/// `Σ_k a_k U_k(x)` by Clenshaw's recurrence.
fn clenshaw_u(a: &[f64], x: f64) -> f64 {
    let (mut b1, mut b2) = (0.0, 0.0);
    for &ak in a.iter().rev() {
        let b0 = ak + 2.0 * x * b1 - b2;
        b2 = b1;
        b1 = b0;
    }
    b1
}

/// One-shot heat-kernel evaluation.
pub fn heat_kernel(tau: f64, g: &GroupElement, method: HeatMethod) -> Result<f64> {
    Ok(HeatKernel::new(g.group(), tau, method)?.eval(g))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::Quat;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn agree(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * a.abs().max(b.abs()).max(1.0)
    }

    #[test]
    fn rejects_non_positive_time() {
        let g = Group::Su2.identity();
        assert!(matches!(heat_kernel(0.0, &g, HeatMethod::CharSeries), Err(Error::NonPositiveTime(_))));
        assert!(heat_kernel(-1.0, &g, HeatMethod::GaussianImages).is_err());
    }

    #[test]
    fn identity_value_matches_direct_partial_sum() {
        // K_1(𝟙) = Σ_j (2j+1)² e^{-j(j+1)}, summed directly to n = 60
        let direct: f64 = (1..=60)
            .map(|n| {
                let n = n as f64;
                n * n * (-(n * n - 1.0) / 4.0).exp()
            })
            .sum();
        let id = Group::Su2.identity();
        let a = heat_kernel(1.0, &id, HeatMethod::CharSeries).unwrap();
        let b = heat_kernel(1.0, &id, HeatMethod::GaussianImages).unwrap();
        assert!(agree(a, direct, 1e-13), "{a} vs {direct}");
        assert!(agree(a, b, 1e-10), "{a} vs {b}");
    }

    #[test]
    fn evaluators_agree_on_random_elements() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for group in [Group::Su2, Group::U1] {
            for tau in [0.01, 0.03, 0.1, 0.3, 0.5, 1.0] {
                let series = HeatKernel::new(group, tau, HeatMethod::CharSeries).unwrap();
                let images = HeatKernel::new(group, tau, HeatMethod::GaussianImages).unwrap();
                for _ in 0..500 {
                    let g = group.haar_sample(&mut rng);
                    let (a, b) = (series.eval(&g), images.eval(&g));
                    assert!(agree(a, b, 1e-10), "{group} tau={tau}: {a} vs {b} at {g:?}");
                }
            }
        }
    }

    #[test]
    fn evaluators_agree_near_endpoints() {
        for tau in [0.01, 0.1, 1.0] {
            let series = HeatKernel::new(Group::Su2, tau, HeatMethod::CharSeries).unwrap();
            let images = HeatKernel::new(Group::Su2, tau, HeatMethod::GaussianImages).unwrap();
            for psi in [0.0, 1e-9, 1e-6, 5e-5, 2e-4, PI - 2e-4, PI - 5e-5, PI - 1e-7, PI] {
                let g = GroupElement::su2_axis_angle(psi, [0.3, -0.4, 0.5]);
                let (a, b) = (series.eval(&g), images.eval(&g));
                assert!(agree(a, b, 1e-10), "tau={tau} psi={psi}: {a} vs {b}");
            }
            let minus = GroupElement::Su2(-Quat::IDENTITY);
            assert!(agree(series.eval(&minus), images.eval(&minus), 1e-10));
        }
    }

    #[test]
    fn class_function_and_positive() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for tau in [0.01, 0.2, 1.0] {
            let k = HeatKernel::new(Group::Su2, tau, HeatMethod::Auto).unwrap();
            for _ in 0..300 {
                let g = Group::Su2.haar_sample(&mut rng);
                let h = Group::Su2.haar_sample(&mut rng);
                let a = k.eval(&g);
                let b = k.eval(&(h * g * h.inverse()));
                assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
                assert!(a > 0.0 || (tau < 0.1 && a.abs() < 1e-100), "tau={tau}: {a}");
            }
        }
    }

    #[test]
    fn mc_integral_is_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let k = HeatKernel::new(Group::Su2, 0.5, HeatMethod::Auto).unwrap();
        let n = 400_000;
        let (mut s, mut s2) = (0.0, 0.0);
        for _ in 0..n {
            let v = k.eval(&Group::Su2.haar_sample(&mut rng));
            s += v;
            s2 += v * v;
        }
        let mean = s / n as f64;
        let se = ((s2 / n as f64 - mean * mean) / n as f64).sqrt();
        assert!((mean - 1.0).abs() < 3.0 * se, "{mean} ± {se}");
    }

    #[test]
    fn semigroup_by_monte_carlo() {
        // ∫ K_s(g h⁻¹) K_t(h) dh = K_{s+t}(g)
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let ks = HeatKernel::new(Group::Su2, 0.3, HeatMethod::Auto).unwrap();
        let kt = HeatKernel::new(Group::Su2, 0.4, HeatMethod::Auto).unwrap();
        let kst = HeatKernel::new(Group::Su2, 0.7, HeatMethod::Auto).unwrap();
        for _ in 0..3 {
            let g = Group::Su2.haar_sample(&mut rng);
            let n = 300_000;
            let (mut s, mut s2) = (0.0, 0.0);
            for _ in 0..n {
                let h = Group::Su2.haar_sample(&mut rng);
                let v = ks.eval(&(g * h.inverse())) * kt.eval(&h);
                s += v;
                s2 += v * v;
            }
            let mean = s / n as f64;
            let se = ((s2 / n as f64 - mean * mean) / n as f64).sqrt();
            let exact = kst.eval(&g);
            assert!((mean - exact).abs() < 3.0 * se, "{mean} ± {se} vs {exact}");
        }
    }

    #[test]
    fn clenshaw_matches_direct_sum() {
        let a = [0.5, -1.0, 0.25, 2.0];
        let x = 0.37;
        let direct: f64 = a
            .iter()
            .enumerate()
            .map(|(k, c)| c * crate::group::chebyshev_u(k, x))
            .sum();
        assert!((clenshaw_u(&a, x) - direct).abs() < 1e-14);
    }
}
