//! Empirical models generated by two-particle pure states and local binary
//! measurements, including the Hardy correlations.

use std::collections::BTreeSet;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::boxes::{Context, EmpiricalModel, Site};
use crate::DEFAULT_TOL;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuantumError {
    #[error("state norm is {0}, expected 1")]
    NotNormalized(f64),
    #[error("context {0} does not take one site from each particle")]
    BadContext(usize),
    #[error("layout refers to unknown site index {0}")]
    UnknownSite(usize),
    #[error("search did not reproduce the target correlations: {0}")]
    Search(String),
}

/// Amplitudes over `|00⟩, |01⟩, |10⟩, |11⟩`, particle 1 first.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PureState2x2 {
    pub amps: [Complex64; 4],
}

impl PureState2x2 {
    pub fn new(amps: [Complex64; 4]) -> Result<Self, QuantumError> {
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(QuantumError::NotNormalized(norm.sqrt()));
        }
        Ok(PureState2x2 { amps })
    }

    /// Scales `amps` to unit norm.
    pub fn normalized(amps: [Complex64; 4]) -> Self {
        let n = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        PureState2x2 { amps: amps.map(|a| a / n) }
    }
}

/// Projective two-outcome measurement of a single qubit along a Bloch direction.
///
/// Outcome `G` projects onto `(cos θ/2, e^{iϕ} sin θ/2)`, outcome `R` onto the
/// orthogonal vector, so the projectors are complete by construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinaryMeasurement {
    pub polar: f64,
    pub azimuth: f64,
}

impl BinaryMeasurement {
    pub fn computational() -> Self {
        BinaryMeasurement { polar: 0.0, azimuth: 0.0 }
    }

    /// Real measurement whose `G` vector is `(cos α, sin α)`.
    pub fn real_angle(alpha: f64) -> Self {
        BinaryMeasurement { polar: 2.0 * alpha, azimuth: 0.0 }
    }

    /// Unit vectors for outcomes `G` and `R`.
    pub fn vectors(&self) -> [[Complex64; 2]; 2] {
        let (c, s) = ((self.polar / 2.0).cos(), (self.polar / 2.0).sin());
        let phase = Complex64::from_polar(1.0, self.azimuth);
        [[Complex64::new(c, 0.0), phase * s], [-phase.conj() * s, Complex64::new(c, 0.0)]]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayoutSite {
    pub id: String,
    pub info_set: String,
    /// 1 or 2.
    pub particle: u8,
    pub measurement: BinaryMeasurement,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementLayout {
    pub sites: Vec<LayoutSite>,
    /// Pairs (particle-1 site, particle-2 site).
    pub contexts: Vec<(usize, usize)>,
}

impl MeasurementLayout {
    fn check(&self) -> Result<(), QuantumError> {
        for (c, &(a, b)) in self.contexts.iter().enumerate() {
            for s in [a, b] {
                if s >= self.sites.len() {
                    return Err(QuantumError::UnknownSite(s));
                }
            }
            if self.sites[a].particle != 1 || self.sites[b].particle != 2 {
                return Err(QuantumError::BadContext(c));
            }
        }
        Ok(())
    }
}

/// Born-rule probabilities `|⟨v_a ⊗ w_b|ψ⟩|²` for every context, outcomes `G`, `R`.
pub fn born_box(state: &PureState2x2, layout: &MeasurementLayout) -> Result<EmpiricalModel, QuantumError> {
    layout.check()?;
    let sites = layout.sites.iter().map(|s| Site::new(&s.id, &s.info_set, &["G", "R"])).collect();
    let contexts = layout
        .contexts
        .iter()
        .map(|&(a, b)| {
            let va = layout.sites[a].measurement.vectors();
            let vb = layout.sites[b].measurement.vectors();
            let mut probs = Vec::with_capacity(4);
            for x in &va {
                for y in &vb {
                    let amp: Complex64 = (0..2)
                        .flat_map(|i| (0..2).map(move |j| (i, j)))
                        .map(|(i, j)| x[i].conj() * y[j].conj() * state.amps[2 * i + j])
                        .sum();
                    probs.push(amp.norm_sqr());
                }
            }
            Context { sites: vec![a, b], probs }
        })
        .collect();
    EmpiricalModel::new(sites, contexts, 1e-12).map_err(|e| QuantumError::Search(e.to_string()))
}

/// Parameters of the Hardy construction, serialisable for reproducibility.
///
/// The state is `c|00⟩ + s|11⟩` with `s = -τc`; West and North measure along
/// angle `atan √τ`, East and South along `atan τ^{-3/2}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HardyParams {
    pub tau: f64,
    pub c: f64,
    pub s: f64,
    pub west: f64,
    pub east: f64,
    pub north: f64,
    pub south: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HardyInstance {
    pub params: HardyParams,
    pub state: PureState2x2,
    pub layout: MeasurementLayout,
    pub model: EmpiricalModel,
}

/// `P(GG | East, South)` as a function of τ once the three zero constraints hold.
pub fn hardy_paradox_probability(tau: f64) -> f64 {
    let t2 = tau * tau;
    t2 * (t2 - 1.0).powi(2) / ((1.0 + t2) * (1.0 + tau * t2).powi(2))
}

fn paradox_log_slope(tau: f64) -> f64 {
    let t2 = tau * tau;
    2.0 / tau + 4.0 * tau / (t2 - 1.0) - 2.0 * tau / (1.0 + t2) - 6.0 * t2 / (1.0 + tau * t2)
}

/// Maximises the paradox probability over τ ∈ (0, 1): golden-section search to
/// bracket the optimum, then bisection on the sign of the analytic log-derivative.
pub fn hardy_optimal_tau() -> f64 {
    let inv = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (1e-6, 1.0 - 1e-6);
    let mut x1 = b - inv * (b - a);
    let mut x2 = a + inv * (b - a);
    let (mut f1, mut f2) = (hardy_paradox_probability(x1), hardy_paradox_probability(x2));
    while b - a > 1e-6 {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv * (b - a);
            f2 = hardy_paradox_probability(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv * (b - a);
            f1 = hardy_paradox_probability(x1);
        }
    }
    let (mut lo, mut hi) = (a - 1e-6, b + 1e-6);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if paradox_log_slope(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-16 {
            break;
        }
    }
    0.5 * (lo + hi)
}

pub fn hardy_params(tau: f64) -> HardyParams {
    let c = 1.0 / (1.0 + tau * tau).sqrt();
    let west = tau.sqrt().atan();
    let east = tau.powf(-1.5).atan();
    HardyParams { tau, c, s: -tau * c, west, east, north: west, south: east }
}

/// Builds state, layout and model from explicit parameters.
pub fn hardy_from_params(params: &HardyParams) -> Result<HardyInstance, QuantumError> {
    let z = Complex64::new(0.0, 0.0);
    let state = PureState2x2::new([Complex64::new(params.c, 0.0), z, z, Complex64::new(params.s, 0.0)])?;
    let site = |id: &str, particle, alpha| LayoutSite {
        id: id.to_string(),
        info_set: id.to_string(),
        particle,
        measurement: BinaryMeasurement::real_angle(alpha),
    };
    let layout = MeasurementLayout {
        sites: vec![
            site("West", 1, params.west),
            site("East", 1, params.east),
            site("North", 2, params.north),
            site("South", 2, params.south),
        ],
        contexts: vec![(0, 2), (1, 2), (0, 3), (1, 3)],
    };
    let model = born_box(&state, &layout)?;
    Ok(HardyInstance { params: params.clone(), state, layout, model })
}

/// The Hardy instance maximising `P(GG | East, South)`.
///
/// Contexts are (West, North), (East, North), (West, South), (East, South); the
/// first has `RR` impossible, the next two `GG` impossible.
pub fn hardy_instance() -> Result<HardyInstance, QuantumError> {
    let h = hardy_from_params(&hardy_params(hardy_optimal_tau()))?;
    let zeros = [(0, 3), (1, 0), (2, 0)];
    for (c, o) in zeros {
        let p = h.model.contexts()[c].probs[o];
        if p.abs() > DEFAULT_TOL {
            return Err(QuantumError::Search(format!("context {c} outcome {o} has probability {p}")));
        }
    }
    Ok(h)
}

/// Number (1..=16) of a point of `{G,R}⁴` given the set of sites showing `R`,
/// ordered by how many sites show `R`, then cyclically from West through North,
/// East and South, adjacent pairs before opposite ones.
pub fn hardy_point_number(red: &BTreeSet<&str>) -> Option<usize> {
    const ORDER: [&[&str]; 16] = [
        &[],
        &["West"],
        &["North"],
        &["East"],
        &["South"],
        &["West", "North"],
        &["North", "East"],
        &["East", "South"],
        &["South", "West"],
        &["West", "East"],
        &["North", "South"],
        &["West", "North", "East"],
        &["North", "East", "South"],
        &["East", "South", "West"],
        &["South", "West", "North"],
        &["West", "North", "East", "South"],
    ];
    ORDER.iter().position(|set| set.len() == red.len() && set.iter().all(|s| red.contains(s))).map(|i| i + 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boxes::is_no_signaling;
    use crate::PHI;
    use proptest::prelude::*;

    fn comp_layout() -> MeasurementLayout {
        let s = |id: &str, particle| LayoutSite {
            id: id.into(),
            info_set: id.into(),
            particle,
            measurement: BinaryMeasurement::computational(),
        };
        MeasurementLayout { sites: vec![s("A", 1), s("B", 2)], contexts: vec![(0, 1)] }
    }

    #[test]
    fn product_state_gives_point_masses() {
        let z = Complex64::new(0.0, 0.0);
        let state = PureState2x2::new([Complex64::new(1.0, 0.0), z, z, z]).unwrap();
        let m = born_box(&state, &comp_layout()).unwrap();
        assert_eq!(m.contexts()[0].probs, vec![1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn bell_state_same_basis_correlates() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let z = Complex64::new(0.0, 0.0);
        let state = PureState2x2::new([Complex64::new(h, 0.0), z, z, Complex64::new(h, 0.0)]).unwrap();
        let m = born_box(&state, &comp_layout()).unwrap();
        let p = &m.contexts()[0].probs;
        assert!((p[0] - 0.5).abs() < 1e-15 && (p[3] - 0.5).abs() < 1e-15);
        assert!(p[1].abs() < 1e-15 && p[2].abs() < 1e-15);
    }

    #[test]
    fn unnormalized_state_rejected() {
        let z = Complex64::new(0.0, 0.0);
        assert!(PureState2x2::new([Complex64::new(2.0, 0.0), z, z, z]).is_err());
    }

    #[test]
    fn same_particle_context_rejected() {
        let mut l = comp_layout();
        l.sites[1].particle = 1;
        let z = Complex64::new(0.0, 0.0);
        let state = PureState2x2::new([Complex64::new(1.0, 0.0), z, z, z]).unwrap();
        assert_eq!(born_box(&state, &l), Err(QuantumError::BadContext(0)));
    }

    #[test]
    fn hardy_table_entries() {
        let h = hardy_instance().unwrap();
        let c = h.model.contexts();
        let row1 = [PHI.powi(3), PHI.powi(2), PHI.powi(2), 0.0];
        for (p, e) in c[0].probs.iter().zip(row1) {
            assert!((p - e).abs() < 1e-9, "{p} vs {e}");
        }
        assert!(c[1].probs[0].abs() < 1e-9);
        assert!(c[2].probs[0].abs() < 1e-9);
        assert!((c[3].probs[0] - (5.0 * 5f64.sqrt() - 11.0) / 2.0).abs() < 1e-9);
        assert!((c[3].probs[0] - PHI.powi(5)).abs() < 1e-9);
    }

    #[test]
    fn hardy_tau_relation() {
        // at the optimum τ + 1/τ = φ^-2
        let t = hardy_optimal_tau();
        assert!((t + 1.0 / t - 1.0 / (PHI * PHI)).abs() < 1e-9);
    }

    #[test]
    fn hardy_params_roundtrip() {
        let h = hardy_instance().unwrap();
        let text = serde_json::to_string(&h.params).unwrap();
        let p: HardyParams = serde_json::from_str(&text).unwrap();
        assert_eq!(hardy_from_params(&p).unwrap().model, h.model);
    }

    #[test]
    fn point_numbers_are_a_bijection() {
        let names = ["West", "North", "East", "South"];
        let mut seen = BTreeSet::new();
        for mask in 0..16u32 {
            let red: BTreeSet<&str> = (0..4).filter(|i| mask >> i & 1 == 1).map(|i| names[i]).collect();
            seen.insert(hardy_point_number(&red).unwrap());
        }
        assert_eq!(seen, (1..=16).collect());
    }

    fn cplx() -> impl Strategy<Value = Complex64> {
        (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(a, b)| Complex64::new(a, b))
    }

    fn meas() -> impl Strategy<Value = BinaryMeasurement> {
        (0.0f64..std::f64::consts::PI, 0.0f64..std::f64::consts::TAU)
            .prop_map(|(polar, azimuth)| BinaryMeasurement { polar, azimuth })
    }

    proptest! {
        #[test]
        fn born_boxes_are_no_signaling(amps in prop::array::uniform4(cplx()), ms in prop::array::uniform4(meas())) {
            prop_assume!(amps.iter().map(|a| a.norm_sqr()).sum::<f64>() > 1e-3);
            let state = PureState2x2::normalized(amps);
            let site = |i: usize, particle| LayoutSite {
                id: format!("s{i}"), info_set: format!("s{i}"), particle, measurement: ms[i],
            };
            let layout = MeasurementLayout {
                sites: vec![site(0, 1), site(1, 1), site(2, 2), site(3, 2)],
                contexts: vec![(0, 2), (1, 2), (0, 3), (1, 3)],
            };
            let m = born_box(&state, &layout).unwrap();
            for c in m.contexts() {
                prop_assert!((c.probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            }
            prop_assert!(is_no_signaling(&m, 1e-10).max_gap < 1e-10);
        }
    }
}
