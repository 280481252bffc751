//! Structural distances between networks and log-likelihood error metrics.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::dag::Dag;
use crate::error::{Error, Result};
use crate::learning::NodeTypeMap;

/// Reference log-likelihoods with magnitude below this are left out of RMAE.
pub const RMAE_ZERO_THRESHOLD: f64 = 1e-12;

fn check_same_nodes(a: &[String], b: &[String]) -> Result<()> {
    let sa: BTreeSet<&String> = a.iter().collect();
    let sb: BTreeSet<&String> = b.iter().collect();
    if a.len() != b.len() || sa != sb {
        return Err(Error::NodeSetMismatch(format!("{a:?} vs {b:?}")));
    }
    Ok(())
}

fn named_arcs(d: &Dag) -> BTreeSet<(&str, &str)> {
    d.arcs().into_iter().map(|(u, v)| (d.name(u), d.name(v))).collect()
}

fn undirected(arcs: &BTreeSet<(&'_ str, &'_ str)>) -> BTreeSet<(String, String)> {
    arcs.iter()
        .map(|&(u, v)| {
            if u <= v {
                (u.to_string(), v.to_string())
            } else {
                (v.to_string(), u.to_string())
            }
        })
        .collect()
}

/// Hamming distance between skeletons.
pub fn hmd(d1: &Dag, d2: &Dag) -> Result<usize> {
    check_same_nodes(d1.nodes(), d2.nodes())?;
    let s1 = undirected(&named_arcs(d1));
    let s2 = undirected(&named_arcs(d2));
    Ok(s1.symmetric_difference(&s2).count())
}

/// Skeleton differences plus shared edges with opposite orientation.
pub fn shd(d1: &Dag, d2: &Dag) -> Result<usize> {
    let h = hmd(d1, d2)?;
    let a2 = named_arcs(d2);
    let flips = named_arcs(d1)
        .iter()
        .filter(|&&(u, v)| a2.contains(&(v, u)))
        .count();
    Ok(h + flips)
}

/// Nodes whose parametric/nonparametric class differs.
pub fn thmd(t1: &NodeTypeMap, t2: &NodeTypeMap) -> Result<usize> {
    check_same_nodes(t1.names(), t2.names())?;
    let t2 = t2.reordered(t1.names())?;
    Ok(t1
        .types()
        .iter()
        .zip(t2.types())
        .filter(|(a, b)| a.is_parametric() != b.is_parametric())
        .count())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoglikErrors {
    pub rmse: f64,
    /// Mean relative absolute error in percent; `None` when every reference
    /// value was excluded.
    pub rmae_percent: Option<f64>,
    pub excluded: usize,
}

pub fn loglik_errors(reference: &[f64], estimate: &[f64]) -> Result<LoglikErrors> {
    if reference.is_empty() || reference.len() != estimate.len() {
        return Err(Error::Data(format!(
            "loglik vectors must be non-empty and equal length ({} vs {})",
            reference.len(),
            estimate.len()
        )));
    }
    let n = reference.len() as f64;
    let mse = reference.iter().zip(estimate).map(|(r, e)| (r - e).powi(2)).sum::<f64>() / n;
    let mut rel = 0.0;
    let mut used = 0usize;
    for (r, e) in reference.iter().zip(estimate) {
        if r.abs() >= RMAE_ZERO_THRESHOLD {
            rel += ((r - e) / r).abs();
            used += 1;
        }
    }
    Ok(LoglikErrors {
        rmse: mse.sqrt(),
        rmae_percent: (used > 0).then(|| 100.0 * rel / used as f64),
        excluded: reference.len() - used,
    })
}

/// `baseline / candidate`; above 1 means the candidate is faster.
pub fn speed_ratio(baseline_seconds: f64, candidate_seconds: f64) -> Result<f64> {
    if !(candidate_seconds > 0.0) || !(baseline_seconds >= 0.0) {
        return Err(Error::Data(format!(
            "speed ratio needs a positive candidate time and non-negative baseline, got {baseline_seconds} / {candidate_seconds}"
        )));
    }
    Ok(baseline_seconds / candidate_seconds)
}

/// Wall-clock seconds for structure learning and test evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RunTiming {
    pub hc_seconds: f64,
    pub test_seconds: f64,
}

impl RunTiming {
    /// HC and test ratios of `baseline` over `self`.
    pub fn ratios_against(&self, baseline: &RunTiming) -> Result<(f64, f64)> {
        Ok((
            speed_ratio(baseline.hc_seconds, self.hc_seconds)?,
            speed_ratio(baseline.test_seconds, self.test_seconds)?,
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learning::NodeType;

    fn dag(arcs: &[(&str, &str)]) -> Dag {
        Dag::acyclic(&["A", "B", "C"], arcs).unwrap()
    }

    #[test]
    fn distances() {
        let ab = dag(&[("A", "B")]);
        let ba = dag(&[("B", "A")]);
        let empty = dag(&[]);
        assert_eq!(hmd(&ab, &ab).unwrap(), 0);
        assert_eq!(hmd(&ab, &ba).unwrap(), 0);
        assert_eq!(hmd(&ab, &empty).unwrap(), 1);
        assert_eq!(shd(&ab, &ba).unwrap(), 1);
        assert_eq!(shd(&ab, &ab).unwrap(), 0);
        let chain = dag(&[("A", "B"), ("B", "C")]);
        assert_eq!(shd(&chain, &ba).unwrap(), 2);
        let other = Dag::empty(&["A", "B", "D"]).unwrap();
        assert!(matches!(hmd(&ab, &other), Err(Error::NodeSetMismatch(_))));
    }

    #[test]
    fn type_distance_is_class_level() {
        use NodeType::*;
        let names = ["A", "B"];
        let a = NodeTypeMap::new(&names, vec![LinearGaussian, Ckde]).unwrap();
        let b = NodeTypeMap::new(&names, vec![Ckde, Sbkde]).unwrap();
        assert_eq!(thmd(&a, &a).unwrap(), 0);
        assert_eq!(thmd(&a, &b).unwrap(), 1);
        let c = NodeTypeMap::new(&["B", "A"], vec![Fkde, LinearGaussian]).unwrap();
        assert_eq!(thmd(&a, &c).unwrap(), 0);
    }

    #[test]
    fn loglik_error_values() {
        let e = loglik_errors(&[1.0, 4.0], &[1.0, 2.0]).unwrap();
        assert!((e.rmse - 2f64.sqrt()).abs() < 1e-12);
        assert!((e.rmae_percent.unwrap() - 25.0).abs() < 1e-12);
        let e = loglik_errors(&[-2.0], &[-1.0]).unwrap();
        assert_eq!((e.rmse, e.rmae_percent), (1.0, Some(50.0)));
        let e = loglik_errors(&[0.0, 0.0], &[1.0, 1.0]).unwrap();
        assert_eq!((e.rmae_percent, e.excluded), (None, 2));
        assert!(loglik_errors(&[], &[]).is_err());
    }

    #[test]
    fn ratios() {
        assert_eq!(speed_ratio(10.0, 5.0).unwrap(), 2.0);
        assert_eq!(speed_ratio(5.0, 10.0).unwrap(), 0.5);
        assert_eq!(speed_ratio(3.0, 3.0).unwrap(), 1.0);
        assert!(speed_ratio(1.0, 0.0).is_err());
    }
}
