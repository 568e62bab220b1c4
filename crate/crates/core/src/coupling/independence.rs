use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::realization::{p_hat, CoupledBondRealization};
use crate::error::{invalid, Result};
use crate::lattice::Site;
use crate::stats::{bonferroni, chi_square_mutual_independence, TestReport};

/// The bond `<from, from + e_axis>` of `Z^d`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BondSpec {
    pub from: Site,
    pub axis: usize,
}

impl BondSpec {
    pub fn new(from: Site, axis: usize) -> Result<Self> {
        if axis >= from.dim() {
            return Err(invalid(format!(
                "axis {axis} out of range for dimension {}",
                from.dim()
            )));
        }
        Ok(Self { from, axis })
    }

    pub fn to(&self) -> Site {
        self.from.step(self.axis)
    }
}

/// Geometric relation between the bonds of a tuple.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TupleKind {
    SharedDeparture,
    SharedArrival,
    HeadToTail,
    Disjoint,
    FanOut,
}

impl TupleKind {
    pub fn name(self) -> &'static str {
        match self {
            TupleKind::SharedDeparture => "shared-departure",
            TupleKind::SharedArrival => "shared-arrival",
            TupleKind::HeadToTail => "head-to-tail",
            TupleKind::Disjoint => "disjoint",
            TupleKind::FanOut => "fan-out",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BondTuple {
    pub kind: TupleKind,
    pub bonds: Vec<BondSpec>,
}

impl BondTuple {
    pub fn new(kind: TupleKind, bonds: Vec<BondSpec>) -> Result<Self> {
        if bonds.len() < 2 {
            return Err(invalid("a bond tuple needs at least two bonds"));
        }
        if bonds.len() > 16 {
            return Err(invalid("bond tuples are limited to 16 bonds"));
        }
        for (i, a) in bonds.iter().enumerate() {
            if a.from.dim() != bonds[0].from.dim() {
                return Err(invalid("bonds of a tuple must share the dimension"));
            }
            if bonds[..i].contains(a) {
                return Err(invalid(format!("duplicate bond {a:?} in tuple")));
            }
        }
        Ok(Self { kind, bonds })
    }
}

/// One tuple of bonds next to each relevant geometry, in dimension `dim`.
pub fn standard_tuples(dim: usize) -> Result<Vec<BondTuple>> {
    if dim < 2 {
        return Err(invalid("independence battery needs dimension >= 2"));
    }
    let o = Site::origin(dim);
    let far = {
        let mut c = vec![0i64; dim];
        c[0] = 7;
        c[1] = -5;
        Site::new(&c)?
    };
    let b = |from: Site, axis: usize| BondSpec::new(from, axis);
    let arrival = o.step(0).step(1);
    Ok(vec![
        BondTuple::new(TupleKind::SharedDeparture, vec![b(o, 0)?, b(o, 1)?])?,
        BondTuple::new(
            TupleKind::SharedArrival,
            vec![b(arrival.step_back(0), 0)?, b(arrival.step_back(1), 1)?],
        )?,
        BondTuple::new(TupleKind::HeadToTail, vec![b(o, 0)?, b(o.step(0), 1)?])?,
        BondTuple::new(TupleKind::HeadToTail, vec![b(o, 0)?, b(o.step(0), 0)?])?,
        BondTuple::new(TupleKind::Disjoint, vec![b(o, 0)?, b(far, 0)?])?,
        BondTuple::new(TupleKind::FanOut, (0..dim).map(|i| b(o, i)).collect::<Result<_>>()?)?,
    ])
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TupleReport {
    pub kind: TupleKind,
    pub bonds: Vec<BondSpec>,
    /// Joint outcome counts indexed by the bit pattern (bit `i` = bond `i` open).
    pub joint_counts: Vec<u64>,
    pub marginals: Vec<f64>,
    /// Joint frequencies predicted by the product of the empirical marginals.
    pub product_prediction: Vec<f64>,
    /// Pearson correlation of the two indicators, for pairs only.
    pub correlation: Option<f64>,
    pub all_open_frequency: f64,
    pub all_open_target: f64,
    pub all_open_std_error: f64,
    pub chi_square: TestReport,
}

impl TupleReport {
    /// `|corr| < 3 / sqrt(n)` (pairs) and all-open frequency within 3 SE of
    /// `p_hat^k`.
    pub fn moments_ok(&self) -> bool {
        let n = self.chi_square.n as f64;
        let corr_ok = self
            .correlation
            .map_or(true, |c| c.abs() < 3.0 / n.sqrt());
        corr_ok
            && (self.all_open_frequency - self.all_open_target).abs()
                < 3.0 * self.all_open_std_error
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndependenceReport {
    pub amplitude: f64,
    pub p_hat: f64,
    pub trials: u64,
    pub alpha: f64,
    pub corrected_alpha: f64,
    pub tuples: Vec<TupleReport>,
    pub pass: bool,
}

impl IndependenceReport {
    pub fn of_kind(&self, kind: TupleKind) -> impl Iterator<Item = &TupleReport> {
        self.tuples.iter().filter(move |t| t.kind == kind)
    }
}

fn joint_counts(tuple: &BondTuple, amplitude: f64, trials: u64, seed: u64) -> Result<Vec<u64>> {
    let k = tuple.bonds.len();
    // Validate once; the per-trial closure below cannot fail afterwards.
    CoupledBondRealization::for_trial(seed, 0, amplitude)?;
    let counts = (0..trials)
        .into_par_iter()
        .fold(
            || vec![0u64; 1 << k],
            |mut acc, trial| {
                let r = CoupledBondRealization::for_trial(seed, trial, amplitude)
                    .expect("amplitude validated");
                let mut pattern = 0usize;
                for (i, bond) in tuple.bonds.iter().enumerate() {
                    if r.open_along(&bond.from, bond.axis) {
                        pattern |= 1 << i;
                    }
                }
                acc[pattern] += 1;
                acc
            },
        )
        .reduce(
            || vec![0u64; 1 << k],
            |mut a, b| {
                a.iter_mut().zip(&b).for_each(|(x, y)| *x += y);
                a
            },
        );
    Ok(counts)
}

fn tuple_report(tuple: &BondTuple, counts: Vec<u64>, p: f64, alpha: f64) -> Result<TupleReport> {
    let k = tuple.bonds.len();
    let n: u64 = counts.iter().sum();
    let nf = n as f64;
    let marginals: Vec<f64> = (0..k)
        .map(|i| {
            counts
                .iter()
                .enumerate()
                .filter(|(pat, _)| pat & (1 << i) != 0)
                .map(|(_, c)| *c)
                .sum::<u64>() as f64
                / nf
        })
        .collect();
    let product_prediction: Vec<f64> = (0..counts.len())
        .map(|pat| {
            (0..k)
                .map(|i| if pat & (1 << i) != 0 { marginals[i] } else { 1.0 - marginals[i] })
                .product()
        })
        .collect();
    let correlation = (k == 2).then(|| {
        let (pa, pb) = (marginals[0], marginals[1]);
        let pab = counts[3] as f64 / nf;
        let denom = (pa * (1.0 - pa) * pb * (1.0 - pb)).sqrt();
        if denom > 0.0 {
            (pab - pa * pb) / denom
        } else {
            0.0
        }
    });
    let target = p.powi(k as i32);
    let all_open_frequency = counts[counts.len() - 1] as f64 / nf;
    Ok(TupleReport {
        kind: tuple.kind,
        bonds: tuple.bonds.clone(),
        marginals,
        product_prediction,
        correlation,
        all_open_frequency,
        all_open_target: target,
        all_open_std_error: (target * (1.0 - target) / nf).sqrt(),
        chi_square: chi_square_mutual_independence(&counts, k, alpha)?,
        joint_counts: counts,
    })
}

/// Estimates the joint law of each tuple of bond indicators over `trials`
/// independent `X`/`Y` realizations and tests it against the product of its
/// marginals. The battery passes iff every chi-square test passes at the
/// Bonferroni-corrected level.
pub fn verify_independence(
    amplitude: f64,
    tuples: &[BondTuple],
    trials: u64,
    seed: u64,
    alpha: f64,
) -> Result<IndependenceReport> {
    if tuples.is_empty() {
        return Err(invalid("independence battery is empty"));
    }
    if trials == 0 {
        return Err(invalid("independence battery needs at least one trial"));
    }
    let p = p_hat(amplitude)?;
    let corrected = bonferroni(alpha, tuples.len());
    let mut reports = Vec::with_capacity(tuples.len());
    for tuple in tuples {
        let counts = joint_counts(tuple, amplitude, trials, seed)?;
        reports.push(tuple_report(tuple, counts, p, corrected)?);
    }
    let pass = reports.iter().all(|r| r.chi_square.pass);
    Ok(IndependenceReport {
        amplitude,
        p_hat: p,
        trials,
        alpha,
        corrected_alpha: corrected,
        tuples: reports,
        pass,
    })
}
