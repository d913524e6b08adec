//! Fast invariant suite behind the `verify` command.

use cluster_mbqc::channel::{channel_matrix, channel_matrix_with, Axis, EvalPath, RotationSchedule};
use cluster_mbqc::ground_state::{solve_exact, GroundState, SolverParams};
use cluster_mbqc::oracle::{enumerate_channel, MeasurementPlan};
use cluster_mbqc::pauli::{string_order_geq, string_order_pair, symmetry_generators, ChainSpec, PauliString};
use cluster_mbqc::string_order::{convexity_check, factorization_residual, profile, Parity, ProfileOptions};
use serde::Serialize;

use crate::error::Result;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &str, worst: f64, tol: f64) -> Check {
    Check {
        name: name.to_string(),
        passed: worst <= tol,
        detail: format!("worst {worst:.3e} (tol {tol:.0e})"),
    }
}

fn operator_identity(n: usize) -> Result<bool> {
    let id = PauliString::identity(n);
    for k in 1..n - 1 {
        for l in (k + 2..n).step_by(2) {
            let p = string_order_geq(k, n)?.try_mul(&string_order_pair(k, l, n)?)?.try_mul(&string_order_geq(l, n)?)?;
            if p != id {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

fn states(n: usize) -> Result<Vec<GroundState>> {
    [0.0, 0.3, 0.6]
        .iter()
        .map(|&a| Ok(solve_exact(&ChainSpec::new(n, a)?, &SolverParams::default())?))
        .collect()
}

pub fn run_all() -> Result<Vec<Check>> {
    let mut out = Vec::new();

    let ok = (5..=13).step_by(2).map(operator_identity).collect::<Result<Vec<_>>>()?;
    out.push(Check {
        name: "string product identity".into(),
        passed: ok.iter().all(|&b| b),
        detail: "K_{>=k} K_{k,l} K_{>=l} = I for N <= 13".into(),
    });

    let n = 9;
    let sts = states(n)?;
    let (g0, g1) = symmetry_generators(n)?;
    let mut sym: f64 = 0.0;
    let mut ident: f64 = 0.0;
    let mut path: f64 = 0.0;
    let mut gm: f64 = 0.0;
    let mut oracle: f64 = 0.0;
    let mut convex = true;
    for st in &sts {
        sym = sym.max((st.expectation(&g0)? - 1.0).abs()).max((st.expectation(&g1)? - 1.0).abs());
        for k in 1..n - 1 {
            for l in (k + 2..n).step_by(2) {
                ident = ident.max(factorization_residual(st, k, l)?.0);
            }
        }
        for (axis, d) in [(Axis::Z, 3), (Axis::X, 1)] {
            for m in 1..=3 {
                let s = RotationSchedule::with_gamma(axis, m, 2, d, 0.37, 0.3)?;
                let a = channel_matrix_with(st, &s, EvalPath::SubsetOnly)?;
                let b = channel_matrix_with(st, &s, EvalPath::NetworkOnly)?;
                path = path.max((a.expectation - b.expectation).norm());
                gm = gm.max((a.d_m - 2.0 * a.gm.norm()).abs());
                if m <= 2 {
                    let o = enumerate_channel(st, &MeasurementPlan::from_schedule(n, &s)?)?;
                    oracle = oracle.max((o.channel - channel_matrix(st, &s)?.matrix).abs().max());
                }
            }
        }
        let p = profile(st, Parity::Odd, &ProfileOptions { delta_max: Some(6) })?;
        convex &= convexity_check(&p, 1e-6)?.is_convex;
    }
    out.push(check("symmetry of ground states", sym, 1e-8));
    out.push(check("product identity on states", ident, 1e-10));
    out.push(check("subset and network paths agree", path, 1e-10));
    out.push(check("d_m equals 2|G_m|", gm, 1e-12));
    out.push(check("oracle matches channel", oracle, 1e-8));
    out.push(Check {
        name: "string order convex".into(),
        passed: convex,
        detail: format!("N = {n}, alpha in {{0, 0.3, 0.6}}"),
    });
    Ok(out)
}
