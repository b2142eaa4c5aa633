//! Residual traces of the ℓ2,0 solver with the stopping rule switched off.

use std::io::Write;

use jointsparse::admm::{solve, ResidualTriple, SolverConfig};
use jointsparse::ProblemInstance;

use crate::error::Result;

/// Per-iteration `(‖B−S‖_F, ‖Sᵏ⁺¹−Sᵏ‖_F, ‖L‖_F)` for `cfg.max_iter` iterations.
pub fn residual_trace(inst: &ProblemInstance, cfg: &SolverConfig) -> Result<Vec<ResidualTriple>> {
    let cfg = SolverConfig {
        criterion_enabled: false,
        ..cfg.clone()
    };
    Ok(solve(&inst.phi, &inst.y, &cfg)?.residual_history)
}

/// Elementwise mean of equal-length traces.
pub fn mean_trace(traces: &[Vec<ResidualTriple>]) -> Vec<ResidualTriple> {
    let Some(first) = traces.first() else {
        return Vec::new();
    };
    let n = traces.len() as f64;
    (0..first.len())
        .map(|i| {
            let (mut p, mut c, mut d) = (0.0, 0.0, 0.0);
            for t in traces {
                p += t[i].primal;
                c += t[i].change;
                d += t[i].dual;
            }
            ResidualTriple {
                primal: p / n,
                change: c / n,
                dual: d / n,
            }
        })
        .collect()
}

pub fn write_trace_csv<W: Write>(out: W, trace: &[ResidualTriple]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["iteration", "primal", "change", "dual"])?;
    for (i, r) in trace.iter().enumerate() {
        w.write_record([
            (i + 1).to_string(),
            format!("{:e}", r.primal),
            format!("{:e}", r.change),
            format!("{:e}", r.dual),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use jointsparse::{generate, InstanceSpec};

    #[test]
    fn trace_ignores_the_criterion() {
        let inst = generate(InstanceSpec::new(40, 20, 3, 2, 1)).unwrap();
        let cfg = SolverConfig {
            max_iter: 300,
            ..SolverConfig::new(5)
        };
        assert_eq!(residual_trace(&inst, &cfg).unwrap().len(), 300);
    }

    #[test]
    fn mean_of_two() {
        let a = vec![ResidualTriple { primal: 1.0, change: 2.0, dual: 3.0 }];
        let b = vec![ResidualTriple { primal: 3.0, change: 4.0, dual: 5.0 }];
        assert_eq!(
            mean_trace(&[a, b]),
            vec![ResidualTriple { primal: 2.0, change: 3.0, dual: 4.0 }]
        );
    }

    #[test]
    fn csv_layout() {
        let mut buf = Vec::new();
        let t = vec![ResidualTriple { primal: 0.5, change: 0.25, dual: 0.0 }];
        write_trace_csv(&mut buf, &t).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "iteration,primal,change,dual\n1,5e-1,2.5e-1,0e0\n");
    }
}
