//! Parameter presets that regenerate the data behind the standard comparison plots.
//!
//! Plots 1-12 show Clopper-Pearson against the rigorous Massart limits over
//! k, plots 13-20 the same against the tuned limits, and plots 21-27 the
//! error probabilities of the Wald, tuned and rigorous intervals against N.
//! Presets 21-27 sweep N over 10..1000 in steps of 10, or
//! 10^4..10^6 in steps of 10^4 when p = 1e-5.

use binomci::Method;

#[derive(Debug, Clone, PartialEq)]
pub enum Preset {
    /// Limits as a function of k for fixed N.
    OverK {
        trials: u64,
        delta: f64,
        methods: Vec<Method>,
    },
    /// Error probability as a function of N for fixed p.
    OverN {
        true_p: f64,
        delta: f64,
        grid: &'static str,
        methods: Vec<Method>,
    },
}

pub fn preset(id: u32) -> Option<Preset> {
    use Method::*;
    let delta_alt = |i: u32| if i % 2 == 1 { 0.05 } else { 0.01 };
    match id {
        1..=12 => {
            let n = [10, 50, 100, 500, 1000, 5000][((id - 1) / 2) as usize];
            Some(Preset::OverK {
                trials: n,
                delta: delta_alt(id),
                methods: vec![ClopperPearson, MassartRigorous],
            })
        }
        13..=20 => {
            let n = [50, 100, 500, 1000][((id - 13) / 2) as usize];
            Some(Preset::OverK {
                trials: n,
                delta: delta_alt(id),
                methods: vec![ClopperPearson, MassartTuned],
            })
        }
        21..=27 => {
            let (true_p, delta) = [
                (0.5, 0.05),
                (0.01, 0.05),
                (0.5, 0.01),
                (0.01, 0.01),
                (0.5, 0.001),
                (0.01, 0.001),
                (1e-5, 0.001),
            ][(id - 21) as usize];
            let grid = if true_p < 1e-3 {
                "10000:10000:1000000"
            } else {
                "10:10:1000"
            };
            Some(Preset::OverN {
                true_p,
                delta,
                grid,
                methods: vec![Wald, MassartTuned, MassartRigorous],
            })
        }
        _ => None,
    }
}
