//! Report envelopes and deterministic JSON serialization.
//!
//! Reports must be byte-identical across runs with the same inputs: keys
//! follow struct declaration order, floats are printed with 17 significant
//! digits, and the envelope carries no wall-clock timestamp (the field is
//! always null). Undefined numeric quantities serialize as a null `value`
//! with a machine-readable `reason` alongside.

use std::io::Write;
use std::path::Path;

use ibnet::assort::{AssortProfile, Coefficient, ProfileEntry};
use ibnet::collapse::{CollapseReport, SignConditionsReport, SignVerdict};
use ibnet::graph::Directedness;
use ibnet::sis::{ChainReport, DominanceGap, EquilibriumResult};
use ibnet::spectral::{Remedy, SpectralReport, WalkSpec};
use serde::Serialize;

use crate::io::{hash_file, IoError};

#[derive(Serialize)]
pub struct InputStamp {
    pub path: String,
    pub fnv1a64: String,
}

impl InputStamp {
    pub fn new(path: &Path) -> Result<Self, IoError> {
        Ok(InputStamp { path: path.display().to_string(), fnv1a64: hash_file(path)? })
    }
}

/// Common report wrapper. `timestamp` is always null so that identical
/// inputs produce byte-identical reports.
#[derive(Serialize)]
pub struct Envelope<P: Serialize> {
    pub tool_version: &'static str,
    pub command: &'static str,
    pub inputs: Vec<InputStamp>,
    pub timestamp: Option<String>,
    pub warnings: Vec<String>,
    pub payload: P,
}

impl<P: Serialize> Envelope<P> {
    pub fn new(command: &'static str, inputs: Vec<InputStamp>, payload: P) -> Self {
        Envelope {
            tool_version: env!("CARGO_PKG_VERSION"),
            command,
            inputs,
            timestamp: None,
            warnings: Vec::new(),
            payload,
        }
    }
}

/// A numeric value that may be undefined for a stated reason.
#[derive(Serialize)]
pub struct MaybeValue {
    pub value: Option<f64>,
    pub reason: Option<&'static str>,
}

impl MaybeValue {
    pub fn defined(value: f64) -> Self {
        MaybeValue { value: Some(value), reason: None }
    }

    pub fn undefined(reason: &'static str) -> Self {
        MaybeValue { value: None, reason: Some(reason) }
    }

    pub fn from_coefficient(c: &Coefficient<f64>) -> Self {
        match c {
            Ok(v) => MaybeValue::defined(*v),
            Err(r) => MaybeValue::undefined(r.as_str()),
        }
    }

    pub fn is_undefined(&self) -> bool {
        self.value.is_none()
    }
}

#[derive(Serialize)]
pub struct ProfileEntryJson {
    pub stratum: &'static str,
    pub mass: f64,
    pub arc_count: usize,
    pub coefficient: MaybeValue,
}

pub fn profile_json(profile: &AssortProfile<f64>) -> Vec<ProfileEntryJson> {
    profile
        .entries
        .iter()
        .map(|e: &ProfileEntry<f64>| ProfileEntryJson {
            stratum: e.stratum.label(profile.directedness()),
            mass: e.mass,
            arc_count: e.arc_count,
            coefficient: MaybeValue::from_coefficient(&e.coefficient),
        })
        .collect()
}

pub fn profile_has_undefined(profile: &AssortProfile<f64>) -> bool {
    profile.entries.iter().any(|e| e.coefficient.is_err())
}

#[derive(Serialize)]
pub struct LabelMapJson {
    pub label: String,
    pub id: usize,
}

pub fn label_map_json(mapping: &[(String, usize)]) -> Vec<LabelMapJson> {
    mapping.iter().map(|(label, id)| LabelMapJson { label: label.clone(), id: *id }).collect()
}

#[derive(Serialize)]
pub struct WalkJson {
    pub remedy: &'static str,
    pub alpha: Option<f64>,
    pub teleport_target: Option<&'static str>,
}

pub fn walk_json(walk: &WalkSpec<f64>) -> WalkJson {
    match walk.remedy {
        Remedy::Teleport => WalkJson {
            remedy: walk.remedy.as_str(),
            alpha: Some(walk.alpha),
            teleport_target: Some(if walk.pi0.is_some() { "custom" } else { "uniform" }),
        },
        _ => WalkJson { remedy: walk.remedy.as_str(), alpha: None, teleport_target: None },
    }
}

#[derive(Serialize)]
pub struct StratumMomentsJson {
    pub stratum: &'static str,
    pub pi: f64,
    pub measure: f64,
    pub mean_tail: f64,
    pub mean_head: f64,
    pub sd_tail: f64,
    pub sd_head: f64,
    pub covariance: f64,
    pub correlation: MaybeValue,
}

#[derive(Serialize)]
pub struct CollapseJson {
    pub mode: &'static str,
    pub strata: Vec<StratumMomentsJson>,
    pub empty_strata: Vec<&'static str>,
    pub cov_in: f64,
    pub cov_between: f64,
    pub mean_tail_in: f64,
    pub mean_head_in: f64,
    pub sd_tail_in: f64,
    pub sd_head_in: f64,
    pub r_in: MaybeValue,
    pub decomp_residual: f64,
    pub corr_residual: MaybeValue,
}

pub fn collapse_json(report: &CollapseReport<f64>, directedness: Directedness) -> CollapseJson {
    CollapseJson {
        mode: report.mode.as_str(),
        strata: report
            .strata
            .iter()
            .map(|s| StratumMomentsJson {
                stratum: s.stratum.label(directedness),
                pi: s.pi,
                measure: s.measure,
                mean_tail: s.mean_tail,
                mean_head: s.mean_head,
                sd_tail: s.sd_tail,
                sd_head: s.sd_head,
                covariance: s.covariance,
                correlation: MaybeValue::from_coefficient(&s.correlation),
            })
            .collect(),
        empty_strata: report.empty_strata.iter().map(|s| s.label(directedness)).collect(),
        cov_in: report.cov_in,
        cov_between: report.cov_between,
        mean_tail_in: report.mean_tail_in,
        mean_head_in: report.mean_head_in,
        sd_tail_in: report.sd_tail_in,
        sd_head_in: report.sd_head_in,
        r_in: MaybeValue::from_coefficient(&report.r_in),
        decomp_residual: report.decomp_residual,
        corr_residual: report
            .corr_residual
            .map(MaybeValue::defined)
            .unwrap_or_else(|| MaybeValue::undefined("zero_variance")),
    }
}

#[derive(Serialize)]
pub struct GroupSignJson {
    pub group: usize,
    pub measure: f64,
    pub pi: f64,
    pub boundary_mean: MaybeValue,
    pub interior_mean: MaybeValue,
    pub tail_mean: MaybeValue,
    pub head_mean: MaybeValue,
    pub covariance: MaybeValue,
}

#[derive(Serialize)]
pub struct ConditionJson {
    pub condition: &'static str,
    pub holds: bool,
    pub margin: f64,
}

#[derive(Serialize)]
pub struct SignJson {
    pub weighted: bool,
    pub groups: Vec<GroupSignJson>,
    pub tail_mean: f64,
    pub head_mean: f64,
    pub tail_sd: f64,
    pub head_sd: f64,
    pub covariance: f64,
    pub between_term: f64,
    pub conditions: Vec<ConditionJson>,
    pub strict: bool,
    pub verdict: &'static str,
    pub observed: MaybeValue,
}

pub fn sign_json(report: &SignConditionsReport<f64>) -> SignJson {
    let opt = |v: Option<f64>, reason: &'static str| {
        v.map(MaybeValue::defined).unwrap_or_else(|| MaybeValue::undefined(reason))
    };
    SignJson {
        weighted: report.weighted,
        groups: report
            .groups
            .iter()
            .map(|g| GroupSignJson {
                group: g.group,
                measure: g.measure,
                pi: g.pi,
                boundary_mean: opt(g.boundary_mean, "empty_boundary"),
                interior_mean: opt(g.interior_mean, "empty_interior"),
                tail_mean: opt(g.tail_mean, "no_b_to_i_arcs"),
                head_mean: opt(g.head_mean, "no_b_to_i_arcs"),
                covariance: opt(g.covariance, "no_b_to_i_arcs"),
            })
            .collect(),
        tail_mean: report.tail_mean,
        head_mean: report.head_mean,
        tail_sd: report.tail_sd,
        head_sd: report.head_sd,
        covariance: report.covariance,
        between_term: report.between_term,
        conditions: ["i", "ii", "iii", "iv", "v"]
            .iter()
            .zip(&report.conditions)
            .map(|(name, c)| ConditionJson { condition: name, holds: c.holds, margin: c.margin })
            .collect(),
        strict: report.strict,
        verdict: report.verdict.as_str(),
        observed: MaybeValue::from_coefficient(&report.observed),
    }
}

pub fn sign_is_undefined(report: &SignConditionsReport<f64>) -> bool {
    report.verdict == SignVerdict::NotApplicable || report.observed.is_err()
}

#[derive(Serialize)]
pub struct EquilibriumJson {
    pub method: &'static str,
    pub threshold_margin: f64,
    pub iterations: usize,
    pub residual: f64,
    pub degraded: bool,
    pub x_star: Vec<f64>,
}

pub fn equilibrium_json(eq: &EquilibriumResult<f64>) -> EquilibriumJson {
    EquilibriumJson {
        method: eq.method.as_str(),
        threshold_margin: eq.threshold_margin,
        iterations: eq.iterations,
        residual: eq.residual,
        degraded: eq.degraded,
        x_star: eq.x_star.clone(),
    }
}

#[derive(Serialize)]
pub struct DominanceJson {
    pub group: usize,
    pub boundary_mean: MaybeValue,
    pub interior_mean: MaybeValue,
    pub gap: MaybeValue,
    pub dominant: Option<bool>,
    pub skipped: Option<&'static str>,
}

pub fn dominance_json(gaps: &[DominanceGap<f64>]) -> Vec<DominanceJson> {
    gaps.iter()
        .map(|d| {
            let reason = d.skipped.map(|s| s.as_str()).unwrap_or("skipped");
            DominanceJson {
                group: d.group,
                boundary_mean: d
                    .boundary_mean
                    .map(MaybeValue::defined)
                    .unwrap_or_else(|| MaybeValue::undefined(reason)),
                interior_mean: d
                    .interior_mean
                    .map(MaybeValue::defined)
                    .unwrap_or_else(|| MaybeValue::undefined(reason)),
                gap: d.gap.map(MaybeValue::defined).unwrap_or_else(|| MaybeValue::undefined(reason)),
                dominant: d.dominant,
                skipped: d.skipped.map(|s| s.as_str()),
            }
        })
        .collect()
}

#[derive(Serialize)]
pub struct SandwichJson {
    pub lower: f64,
    pub lambda2: f64,
    pub upper: f64,
    pub holds: bool,
}

#[derive(Serialize)]
pub struct SpectralJson {
    pub walk: WalkJson,
    pub stationary_residual: f64,
    pub stationary_iterations: usize,
    pub phi: Vec<f64>,
    pub eigenvalues: Vec<f64>,
    pub h_exact: MaybeValue,
    pub phi_blocks: Option<Vec<MaybeValue>>,
    pub phi_max: MaybeValue,
    pub sandwich: Option<SandwichJson>,
}

pub fn spectral_json(report: &SpectralReport<f64>) -> SpectralJson {
    SpectralJson {
        walk: walk_json(&report.walk),
        stationary_residual: report.stationary.residual,
        stationary_iterations: report.stationary.iterations,
        phi: report.stationary.phi.clone(),
        eigenvalues: report.eigenvalues.clone(),
        h_exact: report
            .h_exact
            .map(MaybeValue::defined)
            .unwrap_or_else(|| MaybeValue::undefined("not_computed")),
        phi_blocks: report.phi_blocks.as_ref().map(|blocks| {
            blocks
                .iter()
                .map(|b| {
                    b.map(MaybeValue::defined)
                        .unwrap_or_else(|| MaybeValue::undefined("trivial_block"))
                })
                .collect()
        }),
        phi_max: report
            .phi_max
            .map(MaybeValue::defined)
            .unwrap_or_else(|| MaybeValue::undefined("no_proper_block")),
        sandwich: report.sandwich.map(|s| SandwichJson {
            lower: s.lower,
            lambda2: s.lambda2,
            upper: s.upper,
            holds: s.holds,
        }),
    }
}

#[derive(Serialize)]
pub struct ChainVerdictJson {
    pub disease_free: bool,
    pub dominance_all_groups: Option<bool>,
    pub premises_hold: bool,
    pub observed_negative: Option<bool>,
    pub chain_holds: bool,
    pub notes: Vec<String>,
}

#[derive(Serialize)]
pub struct ChainJson {
    pub walk: WalkJson,
    pub phi_blocks: Vec<MaybeValue>,
    pub phi_max: MaybeValue,
    pub equilibrium: EquilibriumJson,
    pub dominance: Vec<DominanceJson>,
    pub profile: Vec<ProfileEntryJson>,
    pub sign: Option<SignJson>,
    pub verdict: ChainVerdictJson,
}

pub fn chain_json(report: &ChainReport<f64>) -> ChainJson {
    ChainJson {
        walk: walk_json(&report.walk),
        phi_blocks: report
            .phi_blocks
            .iter()
            .map(|b| {
                b.map(MaybeValue::defined)
                    .unwrap_or_else(|| MaybeValue::undefined("trivial_block"))
            })
            .collect(),
        phi_max: report
            .phi_max
            .map(MaybeValue::defined)
            .unwrap_or_else(|| MaybeValue::undefined("no_proper_block")),
        equilibrium: equilibrium_json(&report.equilibrium),
        dominance: dominance_json(&report.dominance),
        profile: profile_json(&report.profile),
        sign: report.sign.as_ref().map(sign_json),
        verdict: ChainVerdictJson {
            disease_free: report.verdict.disease_free,
            dominance_all_groups: report.verdict.dominance_all_groups,
            premises_hold: report.verdict.premises_hold,
            observed_negative: report.verdict.observed_negative,
            chain_holds: report.verdict.chain_holds,
            notes: report.verdict.notes.clone(),
        },
    }
}

/// JSON formatter printing every float with 17 significant digits.
struct Float17;

impl serde_json::ser::Formatter for Float17 {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()>
    where
        W: ?Sized + Write,
    {
        if !value.is_finite() {
            return Err(std::io::Error::new(
                std::io::ErrorKind::InvalidData,
                "non-finite float in report",
            ));
        }
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W>(&mut self, writer: &mut W, value: f32) -> std::io::Result<()>
    where
        W: ?Sized + Write,
    {
        self.write_f64(writer, value as f64)
    }
}

/// Serializes an envelope deterministically (struct key order, fixed float
/// formatting) with a trailing newline.
pub fn to_json_bytes<P: Serialize>(envelope: &Envelope<P>) -> Result<Vec<u8>, serde_json::Error> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, Float17);
    envelope.serialize(&mut ser)?;
    out.push(b'\n');
    Ok(out)
}
