//! Identity checks assembled into reports.
//!
//! A check compares a residual against a tolerance on the realization's
//! check block. Exact-field residuals use tolerance zero; float tolerances
//! are `coefficient · dim · scale`, where `scale` is the largest magnitude of
//! the terms entering the identity (at least one). A block with fewer than
//! two labels makes a check vacuous rather than passing.

use std::fmt::Write as _;

use num_complex::Complex64;
use num_rational::BigRational;
use rayon::prelude::*;
use serde::Serialize;

use crate::algebra::{
    casimir, casimir_eigenvalue, casimir_symmetric, field_params, AlgebraParams, Spin,
};
use crate::error::{Error, Result};
use crate::field::{format_rational, int, Field, FieldKind};
use crate::fock::{FockSpace, Operator};
use crate::realizations::{
    generic_realization, hp_quadratic, hp_simple, villain_ladder, CheckBlock, LadderPoint, Mode,
    Realization, RealizationKind, Recipe,
};
use crate::similarity::{conjugate, matching_transform, s1_recurrence, unitarization_check};
use crate::surd::Surd;

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyConfig {
    pub tolerance_coefficient: f64,
    /// Dimensions for Villain convergence ladders.
    pub ladder: Vec<usize>,
    /// Required `r(last)/r(first)` along a ladder.
    pub convergence_ratio: f64,
    /// Allowed relative increase between consecutive ladder points.
    pub monotone_slack: f64,
    /// `⟨0|S|0⟩` for similarity checks.
    pub q0: BigRational,
    /// Cap on sweep worker threads; `None` uses the global pool.
    pub threads: Option<usize>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            tolerance_coefficient: 1e-12,
            ladder: vec![32, 64, 128],
            convergence_ratio: 0.5,
            monotone_slack: 0.10,
            q0: int(1),
            threads: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Vacuous,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Vacuous => "VACUOUS",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub block_size: usize,
    pub pass: bool,
    pub status: Status,
}

impl Check {
    pub fn new(name: &str, residual: f64, tolerance: f64, block_size: usize) -> Self {
        Self::with_minimum(name, residual, tolerance, block_size, 2)
    }

    fn with_minimum(name: &str, residual: f64, tolerance: f64, block_size: usize, min: usize) -> Self {
        let status = if block_size < min {
            Status::Vacuous
        } else if residual <= tolerance {
            Status::Pass
        } else {
            Status::Fail
        };
        Check {
            name: name.to_string(),
            residual,
            tolerance,
            block_size,
            pass: status == Status::Pass,
            status,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RealizationSummary {
    pub kind: String,
    pub k: usize,
    pub c1: String,
    pub c3: String,
    pub j2: u32,
    pub dim: usize,
    pub field: String,
}

impl RealizationSummary {
    pub fn new(kind: &str, k: usize, params: &AlgebraParams, spin: Spin, dim: usize, field: FieldKind) -> Self {
        RealizationSummary {
            kind: kind.to_string(),
            k,
            c1: format_rational(&params.c1),
            c3: format_rational(&params.c3),
            j2: spin.twice(),
            dim,
            field: field.as_str().to_string(),
        }
    }

    fn of<T: Field>(r: &Realization<T>) -> Self {
        Self::new(r.kind.as_str(), r.step, &r.params, r.spin, r.dim(), T::KIND)
    }
}

/// One Villain ladder point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LadderEntry {
    pub dim: usize,
    pub block_size: usize,
    pub raise_lower: f64,
    pub j3_raise: f64,
    pub casimir_deviation: f64,
}

impl From<&LadderPoint> for LadderEntry {
    fn from(p: &LadderPoint) -> Self {
        LadderEntry {
            dim: p.dim,
            block_size: p.block_size,
            raise_lower: p.raise_lower,
            j3_raise: p.j3_raise,
            casimir_deviation: p.casimir_deviation,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerificationReport {
    pub realization_summary: RealizationSummary,
    /// Whether residuals were computed in the exact field.
    pub exact: bool,
    pub checks: Vec<Check>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dim_ladder: Option<Vec<LadderEntry>>,
    /// Construction or verification failure; the report then counts as failed.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl VerificationReport {
    pub fn failed(summary: RealizationSummary, error: &Error) -> Self {
        VerificationReport {
            realization_summary: summary,
            exact: false,
            checks: Vec::new(),
            dim_ladder: None,
            error: Some(error.to_string()),
        }
    }

    pub fn status(&self) -> Status {
        if self.error.is_some() || self.checks.iter().any(|c| c.status == Status::Fail) {
            Status::Fail
        } else if self.checks.iter().all(|c| c.status == Status::Vacuous) {
            Status::Vacuous
        } else {
            Status::Pass
        }
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Fixed-width table, byte-deterministic for fixed inputs.
    pub fn to_text(&self) -> String {
        let s = &self.realization_summary;
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{} k={} C1={} C3={} j2={} dim={} field={} : {}",
            s.kind,
            s.k,
            s.c1,
            s.c3,
            s.j2,
            s.dim,
            s.field,
            self.status().as_str()
        );
        if let Some(e) = &self.error {
            let _ = writeln!(out, "  error: {e}");
        }
        if !self.checks.is_empty() {
            let _ = writeln!(out, "  {:<30} {:>12} {:>12} {:>6}  status", "check", "residual", "tolerance", "block");
        }
        for c in &self.checks {
            let _ = writeln!(
                out,
                "  {:<30} {:>12.4e} {:>12.4e} {:>6}  {}",
                c.name,
                c.residual,
                c.tolerance,
                c.block_size,
                c.status.as_str()
            );
        }
        if let Some(ladder) = &self.dim_ladder {
            let _ = writeln!(out, "  {:>6} {:>6} {:>12} {:>12} {:>12}", "dim", "block", "raise-lower", "j3-raise", "casimir");
            for p in ladder {
                let _ = writeln!(
                    out,
                    "  {:>6} {:>6} {:>12.4e} {:>12.4e} {:>12.4e}",
                    p.dim, p.block_size, p.raise_lower, p.j3_raise, p.casimir_deviation
                );
            }
        }
        out
    }
}

/// `0` when every report passes, `1` when any fails, otherwise `2` when some
/// report has only vacuous checks.
pub fn exit_code(reports: &[VerificationReport]) -> i32 {
    let statuses: Vec<Status> = reports.iter().map(VerificationReport::status).collect();
    if statuses.contains(&Status::Fail) {
        1
    } else if statuses.contains(&Status::Vacuous) {
        2
    } else {
        0
    }
}

pub fn reports_to_text(reports: &[VerificationReport]) -> String {
    reports.iter().map(VerificationReport::to_text).collect::<Vec<_>>().join("\n")
}

struct Tolerances {
    coefficient: f64,
    dim: usize,
    exact: bool,
}

impl Tolerances {
    fn of(&self, scale: f64) -> f64 {
        if self.exact {
            0.0
        } else {
            self.coefficient * self.dim as f64 * scale.max(1.0)
        }
    }
}

/// Runs the full check suite on one realization.
pub fn verify_realization<T: Field>(r: &Realization<T>, config: &VerifyConfig) -> VerificationReport {
    let summary = RealizationSummary::of(r);
    let result = if r.kind.is_villain() {
        verify_villain(&r.to_complex(), config)
    } else {
        verify_shift(r, config).map(|checks| (checks, None))
    };
    match result {
        Ok((checks, dim_ladder)) => VerificationReport {
            realization_summary: summary,
            exact: T::is_exact(),
            checks,
            dim_ladder,
            error: None,
        },
        Err(e) => VerificationReport::failed(summary, &e),
    }
}

fn verify_shift<T: Field>(r: &Realization<T>, config: &VerifyConfig) -> Result<Vec<Check>> {
    let block = r.block()?;
    let size = block.size();
    let tol = Tolerances {
        coefficient: config.tolerance_coefficient,
        dim: r.dim(),
        exact: T::is_exact(),
    };
    let norm = |m: &Operator<T>| block.max_abs(m);
    let (c1, c3) = field_params::<T>(&r.params);
    let mut checks = Vec::new();

    let bracket = r.jp.commutator(&r.jm)?;
    let lin = r.j3.scaled(&c1);
    let cub = r.j3.pow(3).scaled(&c3);
    checks.push(Check::new(
        "closure/raise-lower",
        norm(&(&(&bracket - &lin) - &cub)),
        tol.of(norm(&bracket).max(norm(&lin)).max(norm(&cub))),
        size,
    ));
    let j3p = r.j3.commutator(&r.jp)?;
    let j3m = r.j3.commutator(&r.jm)?;
    let scale_p = norm(&j3p).max(norm(&r.jp));
    let scale_m = norm(&j3m).max(norm(&r.jm));
    checks.push(Check::new("closure/j3-raise", norm(&(&j3p - &r.jp)), tol.of(scale_p), size));
    checks.push(Check::new("closure/j3-lower", norm(&(&j3m + &r.jm)), tol.of(scale_m), size));
    if r.step > 1 {
        let k = T::from_int(r.step as i64);
        checks.push(Check::new("graded/j3-raise", norm(&(&j3p - &r.jp.scaled(&k))), tol.of(scale_p), size));
        checks.push(Check::new("graded/j3-lower", norm(&(&j3m + &r.jm.scaled(&k))), tol.of(scale_m), size));
    }

    let c = casimir(r)?;
    let c_sym = casimir_symmetric(r)?;
    let c_norm = norm(&c);
    checks.push(Check::new(
        "casimir/forms-agree",
        norm(&(&c - &c_sym)),
        tol.of(c_norm.max(norm(&c_sym))),
        size,
    ));
    for (name, g) in [("casimir/commutes-jp", &r.jp), ("casimir/commutes-jm", &r.jm), ("casimir/commutes-j3", &r.j3)] {
        checks.push(Check::new(name, norm(&c.commutator(g)?), tol.of(c_norm * norm(g)), size));
    }
    let target = T::from_rational(&casimir_eigenvalue(&r.params, r.spin));
    let shifted = &c - &Operator::identity(r.space()).scaled(&target);
    checks.push(Check::new(
        "casimir/eigenvalue",
        norm(&shifted),
        tol.of(c_norm.max(target.magnitude())),
        size,
    ));

    if r.kind.is_unitary() {
        checks.push(Check::new(
            "adjointness",
            norm(&(&r.jp - &r.jm.adjoint())),
            tol.of(norm(&r.jp)),
            size,
        ));
    } else {
        checks.extend(similarity_checks(r, config, &tol)?);
    }
    Ok(checks)
}

/// Unitarization and conjugation to the matching unitary realization.
fn similarity_checks<T: Field>(r: &Realization<T>, config: &VerifyConfig, tol: &Tolerances) -> Result<Vec<Check>> {
    let space = r.space();
    let hp: Realization<T> = match (r.kind, r.step) {
        (RealizationKind::Dyson, 1) => hp_simple(space, &r.params, r.spin),
        (RealizationKind::Dyson, 2) => hp_quadratic(space, &r.params, r.spin),
        (_, k) => generic_realization(space, k, &r.params, r.spin, Mode::Unitary)?,
    };
    let s = if r.step == 1 {
        s1_recurrence(&r.params, r.spin, &config.q0, r.dim() - 1)?
    } else {
        matching_transform(r, &hp, &config.q0)?
    };
    let u = unitarization_check(r, &s)?;
    let joint: Vec<usize> = s
        .valid_indices()
        .into_iter()
        .filter(|&n| hp.admissible[n])
        .collect();
    let c = conjugate(r, &s)?;
    let block = CheckBlock::Indices(joint);
    let diff = block.max_abs(&(&c.jp - &hp.jp)).max(block.max_abs(&(&c.jm - &hp.jm)));
    let scale = block.max_abs(&hp.jp).max(r.jp.max_abs_on(&s.valid_indices()));
    Ok(vec![
        Check::new("similarity/unitarization", u.residual, tol.of(scale), u.block_size),
        Check::new("similarity/conjugate-to-hp", diff, tol.of(scale), block.size()),
    ])
}

type VillainOutcome = (Vec<Check>, Option<Vec<LadderEntry>>);

fn verify_villain(r: &Realization<Complex64>, config: &VerifyConfig) -> Result<VillainOutcome> {
    let form = if r.kind == RealizationKind::VillainForm1 { 1 } else { 2 };
    let tol = Tolerances {
        coefficient: config.tolerance_coefficient,
        dim: r.dim(),
        exact: false,
    };
    let mut checks = vec![Check::new(
        "adjointness",
        (&r.jp - &r.jm.adjoint()).max_abs(),
        tol.of(r.jp.max_abs()),
        r.dim(),
    )];
    let points = villain_ladder(form, &r.params, r.spin, &config.ladder, r.villain_g)?;
    let block = points.iter().map(|p| p.block_size).min().unwrap_or(0);
    let series = |f: fn(&LadderPoint) -> f64| points.iter().map(f).collect::<Vec<f64>>();
    for (name, values) in [
        ("j3-raise", series(|p| p.j3_raise)),
        ("casimir", series(|p| p.casimir_deviation)),
    ] {
        let min_points = if values.len() >= 2 { 2 } else { usize::MAX };
        let (first, last) = (values[0], values[values.len() - 1]);
        checks.push(Check::with_minimum(
            &format!("convergence/{name}"),
            last / first,
            config.convergence_ratio,
            block,
            min_points,
        ));
        let worst_step = values
            .windows(2)
            .map(|w| w[1] / w[0])
            .fold(0.0f64, f64::max);
        checks.push(Check::with_minimum(
            &format!("monotone/{name}"),
            worst_step,
            1.0 + config.monotone_slack,
            block,
            min_points,
        ));
    }
    Ok((checks, Some(points.iter().map(LadderEntry::from).collect())))
}

/// A parameter point of a sweep grid.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GridPoint {
    pub params: AlgebraParams,
    pub spin: Spin,
}

/// `{(2,0), (−2,0), (1,1), (2,1), (−2,1), (3,−1), (0,2)} × j ∈ {½, 1, …, 3}`.
pub fn default_grid() -> Vec<GridPoint> {
    let pairs = [(2, 0), (-2, 0), (1, 1), (2, 1), (-2, 1), (3, -1), (0, 2)];
    pairs
        .iter()
        .flat_map(|&(c1, c3)| {
            (1..=6).map(move |j2| GridPoint {
                params: AlgebraParams::from_ints(c1, c3),
                spin: Spin::from_twice(j2),
            })
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FieldChoice {
    Exact,
    Float,
}

impl FieldChoice {
    pub fn kind(self) -> FieldKind {
        match self {
            FieldChoice::Exact => FieldKind::Rational,
            FieldChoice::Float => FieldKind::Complex,
        }
    }
}

/// Builds `recipe` at `point` in the chosen field and verifies it.
pub fn build_and_verify(
    recipe: &Recipe,
    point: &GridPoint,
    dim: usize,
    field: FieldChoice,
    config: &VerifyConfig,
) -> VerificationReport {
    let summary = RealizationSummary::new(&recipe.label(), recipe.k, &point.params, point.spin, dim, field.kind());
    let run = || -> Result<VerificationReport> {
        let space = FockSpace::new(dim)?;
        Ok(match field {
            FieldChoice::Exact => {
                verify_realization(&recipe.build::<Surd>(space, &point.params, point.spin)?, config)
            }
            FieldChoice::Float => {
                verify_realization(&recipe.build::<Complex64>(space, &point.params, point.spin)?, config)
            }
        })
    };
    run().unwrap_or_else(|e| VerificationReport::failed(summary, &e))
}

/// Verifies every `(point, recipe)` pair; reports are ordered by grid index,
/// then recipe. Failures are recorded in their report.
pub fn sweep(
    grid: &[GridPoint],
    recipes: &[Recipe],
    dim: usize,
    field: FieldChoice,
    config: &VerifyConfig,
) -> Vec<VerificationReport> {
    let jobs: Vec<(&GridPoint, &Recipe)> = grid
        .iter()
        .flat_map(|p| recipes.iter().map(move |r| (p, r)))
        .collect();
    let work = || -> Vec<VerificationReport> {
        jobs.par_iter()
            .map(|(p, r)| build_and_verify(r, p, dim, field, config))
            .collect()
    };
    match config.threads {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build() {
            Ok(pool) => pool.install(work),
            Err(_) => work(),
        },
        None => work(),
    }
}
