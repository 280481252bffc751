//! The eight synthetic generative networks and ancestral sampling.

use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution, Exp, Gamma, Normal};
use serde::{Deserialize, Serialize};

use crate::dag::Dag;
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::learning::{NodeType, NodeTypeMap};

/// Lower bound applied to parent-derived positive parameters.
pub const PARAM_FLOOR: f64 = 1e-6;

/// `coef · Π vars`, with `vars` indexing the network's nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub coef: f64,
    pub vars: Vec<usize>,
}

/// Polynomial in the parent values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Expr {
    pub constant: f64,
    pub terms: Vec<Term>,
}

impl Expr {
    pub fn constant(c: f64) -> Self {
        Expr {
            constant: c,
            terms: Vec::new(),
        }
    }

    pub fn eval(&self, values: &[f64]) -> f64 {
        self.constant
            + self
                .terms
                .iter()
                .map(|t| t.coef * t.vars.iter().map(|&v| values[v]).product::<f64>())
                .sum::<f64>()
    }

    fn vars(&self) -> impl Iterator<Item = usize> + '_ {
        self.terms.iter().flat_map(|t| t.vars.iter().copied())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub weight: f64,
    pub mean: Expr,
    pub sd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum NodeSampler {
    LinearGaussian { mean: Expr, sd: f64 },
    Mixture { components: Vec<Component> },
    /// Parameterised by the mean `1/λ`.
    Exponential { mean: Expr },
    Gamma { shape: Expr, scale: f64 },
    Beta { alpha: Expr, beta: Expr },
    Laplace { location: Expr, scale: f64 },
}

impl NodeSampler {
    /// Single Gaussians are parametric; everything else is not.
    pub fn is_parametric(&self) -> bool {
        matches!(self, NodeSampler::LinearGaussian { .. })
    }

    fn exprs(&self) -> Vec<&Expr> {
        match self {
            NodeSampler::LinearGaussian { mean, .. } => vec![mean],
            NodeSampler::Mixture { components } => components.iter().map(|c| &c.mean).collect(),
            NodeSampler::Exponential { mean } => vec![mean],
            NodeSampler::Gamma { shape, .. } => vec![shape],
            NodeSampler::Beta { alpha, beta } => vec![alpha, beta],
            NodeSampler::Laplace { location, .. } => vec![location],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenerativeSpec {
    dag: Dag,
    samplers: Vec<NodeSampler>,
}

impl GenerativeSpec {
    /// `samplers` follow the DAG's node order; every variable an expression
    /// reads must be a parent of its node.
    pub fn new(dag: Dag, samplers: Vec<NodeSampler>) -> Result<Self> {
        if !dag.is_acyclic() {
            return Err(Error::Structure("generative network must be acyclic".into()));
        }
        if samplers.len() != dag.node_count() {
            return Err(Error::Config(format!(
                "{} samplers for {} nodes",
                samplers.len(),
                dag.node_count()
            )));
        }
        for (v, s) in samplers.iter().enumerate() {
            if let Some(u) = s.exprs().into_iter().flat_map(Expr::vars).find(|&u| !dag.has_arc(u, v)) {
                return Err(Error::Config(format!(
                    "sampler of `{}` reads `{}`, which is not a parent",
                    dag.name(v),
                    dag.name(u)
                )));
            }
            if let NodeSampler::Mixture { components } = s {
                let total: f64 = components.iter().map(|c| c.weight).sum();
                if components.iter().any(|c| !(c.weight > 0.0)) || (total - 1.0).abs() > 1e-12 {
                    return Err(Error::Config(format!("mixture weights of `{}` are invalid", dag.name(v))));
                }
            }
        }
        Ok(GenerativeSpec { dag, samplers })
    }

    pub fn dag(&self) -> &Dag {
        &self.dag
    }

    pub fn samplers(&self) -> &[NodeSampler] {
        &self.samplers
    }

    /// LG for single-Gaussian nodes, `nonparametric` for the rest.
    pub fn true_types(&self, nonparametric: NodeType) -> NodeTypeMap {
        let types = self
            .samplers
            .iter()
            .map(|s| {
                if s.is_parametric() {
                    NodeType::LinearGaussian
                } else {
                    nonparametric
                }
            })
            .collect();
        NodeTypeMap::new(self.dag.nodes(), types).expect("one sampler per node")
    }

    /// Ancestral sampling; columns follow the DAG's topological order.
    pub fn sample(&self, n: usize, seed: u64) -> Result<Dataset> {
        if n == 0 {
            return Err(Error::Config("sample size must be at least 1".into()));
        }
        let order = self.dag.topological_order_indices()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = self.dag.node_count();
        let mut columns = vec![Vec::with_capacity(n); k];
        let mut values = vec![0.0; k];
        for _ in 0..n {
            for &v in &order {
                let x = draw(&self.samplers[v], &values, &mut rng)
                    .map_err(|message| Error::Sampling {
                        node: self.dag.name(v).to_string(),
                        message,
                    })?;
                values[v] = x;
                columns[v].push(x);
            }
        }
        let names: Vec<&str> = order.iter().map(|&v| self.dag.name(v)).collect();
        let columns = order.iter().map(|&v| std::mem::take(&mut columns[v])).collect();
        Dataset::from_columns(&names, columns)
    }
}

fn positive(name: &str, v: f64) -> std::result::Result<f64, String> {
    if v.is_finite() {
        Ok(v.max(PARAM_FLOOR))
    } else {
        Err(format!("{name} evaluated to {v}"))
    }
}

fn draw(s: &NodeSampler, values: &[f64], rng: &mut ChaCha8Rng) -> std::result::Result<f64, String> {
    let err = |e: &dyn std::fmt::Display| e.to_string();
    let x = match s {
        NodeSampler::LinearGaussian { mean, sd } => {
            Normal::new(mean.eval(values), *sd).map_err(|e| err(&e))?.sample(rng)
        }
        NodeSampler::Mixture { components } => {
            let u: f64 = rng.random();
            let mut acc = 0.0;
            let mut chosen = components.last().expect("non-empty mixture");
            for c in components {
                acc += c.weight;
                if u < acc {
                    chosen = c;
                    break;
                }
            }
            Normal::new(chosen.mean.eval(values), chosen.sd)
                .map_err(|e| err(&e))?
                .sample(rng)
        }
        NodeSampler::Exponential { mean } => {
            let m = mean.eval(values);
            if !(m.is_finite() && m > 0.0) {
                return Err(format!("exponential mean evaluated to {m}"));
            }
            let rate = positive("rate", 1.0 / m)?;
            Exp::new(rate).map_err(|e| err(&e))?.sample(rng).max(f64::MIN_POSITIVE)
        }
        NodeSampler::Gamma { shape, scale } => {
            let k = positive("shape", shape.eval(values))?;
            Gamma::new(k, *scale).map_err(|e| err(&e))?.sample(rng).max(f64::MIN_POSITIVE)
        }
        NodeSampler::Beta { alpha, beta } => {
            let a = positive("alpha", alpha.eval(values))?;
            let b = positive("beta", beta.eval(values))?;
            let x: f64 = Beta::new(a, b).map_err(|e| err(&e))?.sample(rng);
            if x.is_nan() {
                return Err("beta draw is NaN".into());
            }
            x.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON)
        }
        NodeSampler::Laplace { location, scale } => {
            let u: f64 = rng.sample::<f64, _>(Open01) - 0.5;
            location.eval(values) - scale * u.signum() * (1.0 - 2.0 * u.abs()).ln()
        }
    };
    if x.is_finite() {
        Ok(x)
    } else {
        Err(format!("draw evaluated to {x}"))
    }
}

/// Builds polynomials over named nodes of one network.
struct Net {
    names: Vec<&'static str>,
    arcs: Vec<(&'static str, &'static str)>,
    samplers: Vec<NodeSampler>,
}

impl Net {
    fn new(names: &[&'static str]) -> Self {
        Net {
            names: names.to_vec(),
            arcs: Vec::new(),
            samplers: Vec::new(),
        }
    }

    fn idx(&self, name: &str) -> usize {
        self.names.iter().position(|n| *n == name).expect("declared node")
    }

    /// `constant + Σ coef · Π vars`.
    fn expr(&self, constant: f64, terms: &[(f64, &[&str])]) -> Expr {
        Expr {
            constant,
            terms: terms
                .iter()
                .map(|(c, vars)| Term {
                    coef: *c,
                    vars: vars.iter().map(|v| self.idx(v)).collect(),
                })
                .collect(),
        }
    }

    fn node(&mut self, name: &'static str, parents: &[&'static str], sampler: NodeSampler) {
        assert_eq!(self.samplers.len(), self.idx(name));
        self.arcs.extend(parents.iter().map(|&p| (p, name)));
        self.samplers.push(sampler);
    }

    fn gauss(&mut self, name: &'static str, parents: &[&'static str], mean: Expr, sd: f64) {
        self.node(name, parents, NodeSampler::LinearGaussian { mean, sd });
    }

    fn mix(&mut self, name: &'static str, parents: &[&'static str], comps: Vec<(f64, Expr, f64)>) {
        let components = comps
            .into_iter()
            .map(|(weight, mean, sd)| Component { weight, mean, sd })
            .collect();
        self.node(name, parents, NodeSampler::Mixture { components });
    }

    fn build(self) -> GenerativeSpec {
        let dag = Dag::acyclic(&self.names, &self.arcs).expect("valid synthetic network");
        GenerativeSpec::new(dag, self.samplers).expect("valid synthetic samplers")
    }
}

fn spbn1() -> GenerativeSpec {
    let mut n = Net::new(&["A", "B", "C", "D", "E", "F", "G"]);
    let c = |n: &Net, k| n.expr(k, &[]);
    n.gauss("A", &[], c(&n, 3.0), 2.0);
    n.gauss("B", &["A"], n.expr(0.0, &[(0.5, &["A"])]), 2.0);
    n.mix("C", &["A"], vec![(0.45, n.expr(0.0, &[(0.5, &["A"])]), 1.5), (0.55, c(&n, 5.0), 1.0)]);
    n.mix("D", &["B", "C"], vec![(0.5, n.expr(0.0, &[(0.5, &["C", "B"])]), 1.0), (0.5, c(&n, 3.5), 1.0)]);
    n.mix("E", &["D", "C"], vec![(0.5, n.expr(0.0, &[(1.0, &["D"]), (1.0, &["C"])]), 1.0), (0.5, c(&n, 2.0), 1.0)]);
    n.mix(
        "F",
        &["E", "D", "A"],
        vec![
            (0.5, n.expr(0.0, &[(1.0, &["E"]), (1.0, &["D"])]), 1.0),
            (0.5, n.expr(0.0, &[(0.7, &["A"])]), 0.5),
        ],
    );
    n.gauss("G", &["C"], n.expr(0.0, &[(0.3, &["C"])]), 2.0);
    n.build()
}

fn spbn2() -> GenerativeSpec {
    let mut n = Net::new(&["A", "B", "C", "D", "E", "H", "I", "J", "F", "G", "K", "L", "M"]);
    let c = |n: &Net, k| n.expr(k, &[]);
    n.gauss("A", &[], c(&n, 4.0), 1.5);
    n.mix("B", &["A"], vec![(0.4, n.expr(0.0, &[(1.2, &["A"])]), 1.1), (0.6, c(&n, 1.0), 1.0)]);
    n.mix("C", &["A"], vec![(0.5, n.expr(1.0, &[(1.0, &["A"])]), 1.2), (0.5, c(&n, 1.0), 1.0)]);
    n.gauss("D", &["A"], n.expr(0.0, &[(0.8, &["A"])]), 1.3);
    n.mix("E", &["C"], vec![(0.6, n.expr(0.0, &[(1.2, &["C"])]), 1.3), (0.4, c(&n, -1.0), 1.5)]);
    n.mix("H", &["D"], vec![(0.6, n.expr(0.0, &[(2.0, &["D"])]), 1.2), (0.4, c(&n, 0.0), 1.8)]);
    n.gauss("I", &["B"], n.expr(0.0, &[(0.6, &["B"])]), 2.0);
    n.gauss("J", &["E"], n.expr(0.0, &[(0.7, &["E"])]), 1.7);
    n.mix(
        "F",
        &["C", "H"],
        vec![(0.5, n.expr(0.0, &[(1.1, &["C"]), (1.0, &["H"])]), 1.0), (0.5, c(&n, 15.0), 1.2)],
    );
    n.mix(
        "G",
        &["D", "J"],
        vec![(0.5, n.expr(0.0, &[(0.8, &["D"]), (1.0, &["J"])]), 1.0), (0.5, c(&n, 0.0), 1.0)],
    );
    n.gauss("K", &["F"], n.expr(0.0, &[(0.3, &["F"])]), 2.0);
    n.mix(
        "L",
        &["A", "C", "F", "H", "D"],
        vec![
            (0.5, n.expr(0.0, &[(1.0, &["A"]), (1.0, &["C"]), (1.0, &["F"])]), 1.0),
            (0.5, n.expr(0.0, &[(0.6, &["H"]), (1.0, &["D"])]), 1.5),
        ],
    );
    n.mix(
        "M",
        &["B", "E", "G", "J"],
        vec![
            (0.4, n.expr(0.0, &[(1.0, &["B"]), (1.0, &["E"]), (1.0, &["G"])]), 1.2),
            (0.6, n.expr(0.0, &[(0.7, &["J"])]), 1.3),
        ],
    );
    n.build()
}

fn spbn3() -> GenerativeSpec {
    let mut n = Net::new(&["A", "B", "C", "D", "E", "F", "G", "H"]);
    let c = |n: &Net, k| n.expr(k, &[]);
    n.mix("A", &[], vec![(0.5, c(&n, 4.0), 2.0), (0.5, c(&n, 1.0), 1.0)]);
    n.gauss("B", &["A"], n.expr(0.0, &[(0.5, &["A"])]), 2.0);
    n.gauss("C", &["B"], n.expr(0.0, &[(2.0, &["B"])]), 1.5);
    n.mix("D", &["B"], vec![(0.5, n.expr(-1.0, &[(1.0, &["B"])]), 1.0), (0.5, c(&n, 10.0), 1.5)]);
    n.mix("E", &["D"], vec![(0.5, n.expr(0.0, &[(2.0, &["D"])]), 1.5), (0.5, c(&n, 3.0), 1.0)]);
    n.mix("F", &["D"], vec![(0.6, n.expr(0.0, &[(1.5, &["D"])]), 1.5), (0.4, c(&n, 0.0), 1.0)]);
    n.gauss("G", &["C"], n.expr(5.0, &[(0.3, &["C"])]), 1.0);
    n.mix("H", &["C"], vec![(0.5, n.expr(0.0, &[(0.5, &["C"])]), 1.0), (0.5, c(&n, 10.0), 1.0)]);
    n.build()
}

fn spbn4() -> GenerativeSpec {
    let mut n = Net::new(&[
        "A", "B", "C", "D", "E", "F", "G", "H", "K", "I", "J", "O", "M", "N", "L",
    ]);
    let c = |n: &Net, k| n.expr(k, &[]);
    n.gauss("A", &[], c(&n, 5.0), 2.0);
    n.gauss("B", &["A"], n.expr(2.0, &[(1.0, &["A"])]), 1.5);
    n.mix("C", &["A"], vec![(0.4, n.expr(2.0, &[(1.0, &["A"])]), 1.0), (0.6, c(&n, 1.0), 1.5)]);
    n.mix("D", &["B"], vec![(0.5, n.expr(0.0, &[(0.8, &["B"])]), 1.5), (0.5, c(&n, 15.0), 1.5)]);
    n.gauss("E", &["C"], n.expr(0.0, &[(0.7, &["C"])]), 2.0);
    n.mix("F", &["C"], vec![(0.5, n.expr(0.0, &[(1.2, &["C"])]), 1.5), (0.5, c(&n, -3.0), 1.0)]);
    n.mix("G", &["D"], vec![(0.6, n.expr(4.0, &[(1.0, &["D"])]), 1.0), (0.4, c(&n, 8.0), 1.5)]);
    n.gauss("H", &["D"], n.expr(0.0, &[(0.4, &["D"])]), 2.0);
    n.gauss("K", &["D"], n.expr(0.0, &[(0.5, &["D"])]), 2.5);
    n.mix("I", &["E"], vec![(0.55, n.expr(0.0, &[(1.3, &["E"])]), 2.0), (0.45, c(&n, 0.0), 1.0)]);
    n.gauss("J", &["E"], n.expr(0.0, &[(0.5, &["E"])]), 2.0);
    n.mix("O", &["F"], vec![(0.3, n.expr(1.0, &[(1.0, &["F"])]), 1.4), (0.7, c(&n, -2.0), 0.7)]);
    n.mix("M", &["J"], vec![(0.6, n.expr(0.0, &[(1.5, &["J"])]), 1.0), (0.4, c(&n, 7.0), 1.5)]);
    n.mix("N", &["J"], vec![(0.4, n.expr(0.0, &[(1.1, &["J"])]), 1.2), (0.6, c(&n, -1.0), 1.3)]);
    n.mix("L", &["H"], vec![(0.5, n.expr(0.0, &[(0.3, &["H"])]), 1.1), (0.5, c(&n, 5.0), 1.4)]);
    n.build()
}

fn spbn5() -> GenerativeSpec {
    let mut n = Net::new(&["A", "B", "C", "D", "E", "F", "G"]);
    let exp = |mean| NodeSampler::Exponential { mean };
    n.node("A", &[], exp(n.expr(1.0, &[])));
    n.node("B", &["A"], exp(n.expr(0.0, &[(1.0, &["A"])])));
    n.node("C", &["A"], exp(n.expr(0.0, &[(2.0, &["A"])])));
    n.node("D", &["B", "C"], exp(n.expr(0.0, &[(1.0, &["B", "C"])])));
    n.node("E", &["D", "C"], exp(n.expr(0.0, &[(1.0, &["D", "C"])])));
    n.node(
        "F",
        &["E", "D", "A"],
        exp(n.expr(0.0, &[(1.0, &["A"]), (2.0, &["D"]), (1.0, &["E"])])),
    );
    n.node("G", &["C"], exp(n.expr(0.0, &[(1.0, &["C"])])));
    n.build()
}

fn spbn6() -> GenerativeSpec {
    let mut n = Net::new(&["A", "B", "C", "D", "E", "F", "G", "H"]);
    let gamma = |shape| NodeSampler::Gamma { shape, scale: 1.0 };
    let v = |n: &Net, p| n.expr(0.0, &[(1.0, &[p])]);
    n.node("A", &[], gamma(n.expr(2.0, &[])));
    for (child, parent) in [("B", "A"), ("C", "B"), ("D", "B"), ("E", "D"), ("F", "D"), ("G", "C"), ("H", "C")] {
        n.node(child, &[parent], gamma(v(&n, parent)));
    }
    n.build()
}

fn spbn7() -> GenerativeSpec {
    let mut n = Net::new(&["A", "B", "C", "D", "E", "F", "G"]);
    let beta = |alpha, beta| NodeSampler::Beta { alpha, beta };
    let v = |n: &Net, p| n.expr(0.0, &[(1.0, &[p])]);
    n.node("A", &[], beta(n.expr(2.0, &[]), n.expr(8.0, &[])));
    n.node("B", &["A"], beta(v(&n, "A"), n.expr(2.0, &[])));
    n.node("C", &["A"], beta(v(&n, "A"), n.expr(4.0, &[])));
    n.node("D", &["B", "C"], beta(v(&n, "B"), v(&n, "C")));
    n.node("E", &["D", "C"], beta(v(&n, "D"), v(&n, "C")));
    n.node(
        "F",
        &["E", "D", "A"],
        beta(n.expr(0.0, &[(1.0, &["A"]), (2.0, &["D"])]), v(&n, "E")),
    );
    n.node("G", &["C"], beta(n.expr(1.0, &[]), v(&n, "C")));
    n.build()
}

fn spbn8() -> GenerativeSpec {
    let mut n = Net::new(&["A", "B", "C", "D", "E", "F", "G", "H"]);
    let lap = |location| NodeSampler::Laplace { location, scale: 2.0 };
    let v = |n: &Net, p| n.expr(0.0, &[(1.0, &[p])]);
    n.node("A", &[], lap(n.expr(5.0, &[])));
    for (child, parent) in [("B", "A"), ("C", "B"), ("D", "B"), ("E", "D"), ("F", "D"), ("G", "C"), ("H", "C")] {
        n.node(child, &[parent], lap(v(&n, parent)));
    }
    n.build()
}

/// Synthetic network `id` in `1..=8`.
pub fn build_synthetic(id: u32) -> Result<GenerativeSpec> {
    Ok(match id {
        1 => spbn1(),
        2 => spbn2(),
        3 => spbn3(),
        4 => spbn4(),
        5 => spbn5(),
        6 => spbn6(),
        7 => spbn7(),
        8 => spbn8(),
        _ => return Err(Error::Config(format!("synthetic network id must be 1..=8, got {id}"))),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_counts() {
        let expect = [(1, 7, 10, 3), (2, 13, 21, 5), (3, 8, 7, 1), (4, 15, 14, 1)];
        for (id, nodes, arcs, max_pa) in expect {
            let s = build_synthetic(id).unwrap();
            assert_eq!(s.dag().node_count(), nodes, "spbn {id}");
            assert_eq!(s.dag().arc_count(), arcs, "spbn {id}");
            assert_eq!(s.dag().max_in_degree(), max_pa, "spbn {id}");
        }
        assert_eq!(build_synthetic(5).unwrap().dag(), build_synthetic(1).unwrap().dag());
        assert_eq!(build_synthetic(7).unwrap().dag(), build_synthetic(1).unwrap().dag());
        assert_eq!(build_synthetic(6).unwrap().dag(), build_synthetic(3).unwrap().dag());
        assert_eq!(build_synthetic(8).unwrap().dag(), build_synthetic(3).unwrap().dag());
        assert!(build_synthetic(0).is_err());
        assert!(build_synthetic(9).is_err());
    }

    #[test]
    fn columns_follow_declared_topological_order() {
        let s = build_synthetic(2).unwrap();
        let data = s.sample(5, 1).unwrap();
        assert_eq!(data.names(), s.dag().nodes());
    }

    #[test]
    fn rejects_reading_non_parents() {
        let dag = Dag::empty(&["A", "B"]).unwrap();
        let bad = NodeSampler::LinearGaussian {
            mean: Expr {
                constant: 0.0,
                terms: vec![Term { coef: 1.0, vars: vec![0] }],
            },
            sd: 1.0,
        };
        let ok = NodeSampler::LinearGaussian {
            mean: Expr::constant(0.0),
            sd: 1.0,
        };
        assert!(GenerativeSpec::new(dag, vec![ok, bad]).is_err());
    }

    #[test]
    fn true_types_mark_single_gaussians() {
        use NodeType::*;
        let t = build_synthetic(3).unwrap().true_types(Ckde);
        assert_eq!(t.types(), &[Ckde, LinearGaussian, LinearGaussian, Ckde, Ckde, Ckde, LinearGaussian, Ckde]);
        let t = build_synthetic(8).unwrap().true_types(Sbkde);
        assert!(t.types().iter().all(|&x| x == Sbkde));
    }
}
