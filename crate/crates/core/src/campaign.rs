//! Exhaustive fault-injection campaigns: enumerate every addressable bit in
//! the configured region, run one seeded pipeline per address, and aggregate
//! the outcomes into deterministic CSV.
//!
//! Determinism is load-bearing: every run is seeded, rows are sorted by
//! address before emission, and floats are formatted with a fixed precision,
//! so two runs of the same campaign — serial or parallel — produce
//! byte-identical files.

use std::fs;
use std::ops::Range;
use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::ckks::{Backend, CkksContext, Message, Params};
use crate::error::{Error, Result};
use crate::fault::{
    compute_baseline, run_with_baseline, FaultSpec, InjectionResult, Outcome, Representation,
    Target,
};
use crate::pgm::GrayImage;

/// Root-sum-square slot distance between two recoveries (or a recovery and
/// the original message).
pub fn l2_error(a: &Message, b: &Message) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: b.len(),
            got: a.len(),
        });
    }
    Ok(a.slots()
        .iter()
        .zip(b.slots())
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt())
}

/// Largest single-slot distance between two messages.
pub fn max_slot_error(a: &Message, b: &Message) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: b.len(),
            got: a.len(),
        });
    }
    Ok(a.slots()
        .iter()
        .zip(b.slots())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max))
}

/// What the campaign encrypts.
#[derive(Debug, Clone)]
pub enum MessageSource {
    /// Slot k holds `(k+1)/slot_count` — nonzero in every slot, bounded by 1.
    Ramp,
    /// Explicit slots (must match the parameter set's slot count).
    Slots(Vec<Complex64>),
}

/// A full sweep description: one parameter set, one message, and the
/// rectangular address region `targets × representations × coeffs × bits`.
#[derive(Debug, Clone)]
pub struct CampaignConfig {
    pub params: Params,
    pub message: MessageSource,
    pub targets: Vec<Target>,
    pub representations: Vec<Representation>,
    pub coeff_range: Range<usize>,
    pub bit_range: Range<u32>,
    /// Scale factors visited by [`sweep_scale_factors`]; ignored by
    /// [`sweep_bits`], which uses `params.delta`.
    pub deltas: Vec<u64>,
    pub tau_benign: f64,
    pub parallel: bool,
}

impl CampaignConfig {
    fn resolve_message(&self) -> Result<Message> {
        let slots = self.params.slot_count();
        match &self.message {
            MessageSource::Ramp => Ok(Message::ramp(slots)),
            MessageSource::Slots(v) => {
                if v.len() != slots {
                    return Err(Error::DimensionMismatch {
                        expected: slots,
                        got: v.len(),
                    });
                }
                Ok(Message::new(v.clone()))
            }
        }
    }

    /// Rejects empty axes and addresses outside the representation's bounds
    /// before any pipeline work is spent.
    fn validate_axes(&self) -> Result<()> {
        if self.targets.is_empty() || self.representations.is_empty() {
            return Err(Error::InvalidParams(
                "campaign needs at least one target and one representation".into(),
            ));
        }
        if self.coeff_range.is_empty() || self.bit_range.is_empty() {
            return Err(Error::InvalidParams(
                "campaign address ranges must be non-empty".into(),
            ));
        }
        if self.coeff_range.end > self.params.n {
            return Err(Error::AddressOutOfRange {
                what: "coefficient range end",
                value: self.coeff_range.end as u64,
                bound: self.params.n as u64,
            });
        }
        for &repr in &self.representations {
            let (bound, backend) = match repr {
                Representation::Big => (self.params.modulus().bits(), Backend::Textbook),
                Representation::RnsLimb(_) | Representation::NttLimb(_) => (64, Backend::RnsNtt),
            };
            if self.params.backend != backend {
                return Err(Error::InvalidParams(format!(
                    "representation {} is not addressable on the {} backend",
                    repr.kind_str(),
                    self.params.backend.as_str()
                )));
            }
            if u64::from(self.bit_range.end) > bound {
                return Err(Error::AddressOutOfRange {
                    what: "bit range end",
                    value: u64::from(self.bit_range.end),
                    bound,
                });
            }
            if let Some(k) = repr.limb() {
                if k >= self.params.chain.len() {
                    return Err(Error::AddressOutOfRange {
                        what: "limb index",
                        value: k as u64,
                        bound: self.params.chain.len() as u64,
                    });
                }
            }
        }
        if !(self.tau_benign.is_finite() && self.tau_benign > 0.0) {
            return Err(Error::InvalidParams(format!(
                "benign threshold must be positive and finite, got {}",
                self.tau_benign
            )));
        }
        Ok(())
    }

    fn expand_specs(&self) -> Vec<FaultSpec> {
        let mut specs = Vec::with_capacity(
            self.targets.len()
                * self.representations.len()
                * self.coeff_range.len()
                * self.bit_range.len(),
        );
        for &target in &self.targets {
            for &representation in &self.representations {
                for coeff_index in self.coeff_range.clone() {
                    for bit_index in self.bit_range.clone() {
                        specs.push(FaultSpec {
                            stage: target.stage(),
                            target,
                            representation,
                            coeff_index,
                            bit_index,
                        });
                    }
                }
            }
        }
        specs
    }
}

/// One CSV row: the fault address, the classification, and the error
/// magnitudes of that single injection run.
#[derive(Debug, Clone, PartialEq)]
pub struct CampaignRow {
    pub backend: Backend,
    pub target: Target,
    pub representation: Representation,
    pub coeff_index: usize,
    pub bit_index: u32,
    pub delta: u64,
    pub outcome: Outcome,
    pub l2_error: f64,
    pub max_slot_error: f64,
    pub baseline_l2: f64,
    pub seed: u64,
}

impl CampaignRow {
    /// Assembles the row for one injection under the given parameter set.
    pub fn from_result(params: &Params, spec: &FaultSpec, r: &InjectionResult) -> Self {
        CampaignRow {
            backend: params.backend,
            target: spec.target,
            representation: spec.representation,
            coeff_index: spec.coeff_index,
            bit_index: spec.bit_index,
            delta: params.delta,
            outcome: r.outcome,
            l2_error: r.l2_error,
            max_slot_error: r.max_slot_error,
            baseline_l2: r.baseline_l2,
            seed: params.seed,
        }
    }

    fn sort_key(&self) -> (u8, (u8, u8, usize, usize, u32), u64, u64) {
        let backend_rank = match self.backend {
            Backend::Textbook => 0,
            Backend::RnsNtt => 1,
        };
        let spec = FaultSpec {
            stage: self.target.stage(),
            target: self.target,
            representation: self.representation,
            coeff_index: self.coeff_index,
            bit_index: self.bit_index,
        };
        (backend_rank, spec.sort_key(), self.delta, self.seed)
    }
}

fn run_specs(
    config: &CampaignConfig,
    ctx: &CkksContext,
    z: &Message,
    specs: &[FaultSpec],
) -> Result<Vec<CampaignRow>> {
    let baseline = compute_baseline(ctx, z)?;
    let run_one = |spec: &FaultSpec| -> Result<CampaignRow> {
        let r = run_with_baseline(ctx, z, Some(spec), &baseline, config.tau_benign)?;
        Ok(CampaignRow::from_result(&config.params, spec, &r))
    };
    if config.parallel {
        specs.par_iter().map(run_one).collect()
    } else {
        specs.iter().map(run_one).collect()
    }
}

/// Runs one injection per address in the configured region, at the single
/// scale factor `params.delta`. Rows come back sorted by address.
pub fn sweep_bits(config: &CampaignConfig) -> Result<Vec<CampaignRow>> {
    config.validate_axes()?;
    let ctx = CkksContext::new(config.params.clone())?;
    let z = config.resolve_message()?;
    let specs = config.expand_specs();
    let mut rows = run_specs(config, &ctx, &z, &specs)?;
    rows.sort_by_key(|r| r.sort_key());
    Ok(rows)
}

/// Repeats the bit sweep once per scale factor in `config.deltas`, holding
/// the message, seed, and modulus chain fixed, so the only thing that moves
/// between row groups is Δ.
pub fn sweep_scale_factors(config: &CampaignConfig) -> Result<Vec<CampaignRow>> {
    if config.deltas.is_empty() {
        return Err(Error::InvalidParams(
            "scale-factor sweep needs at least one delta".into(),
        ));
    }
    let mut rows = Vec::new();
    for &delta in &config.deltas {
        let params = Params::new(
            config.params.n,
            delta,
            config.params.chain.clone(),
            config.params.sigma,
            config.params.backend,
            config.params.seed,
        )?;
        let sub = CampaignConfig {
            params,
            ..config.clone()
        };
        rows.extend(sweep_bits(&sub)?);
    }
    rows.sort_by_key(|r| r.sort_key());
    Ok(rows)
}

/// A fault aimed at one block of an image run.
#[derive(Debug, Clone)]
pub struct ImageFault {
    pub spec: FaultSpec,
    pub block: usize,
}

/// Pushes an image through the pipeline block by block (N/2 pixels per
/// block, zero-padded tail), optionally injecting one fault into one block,
/// and reassembles the recovered image.
///
/// Each block runs under `seed + block_index`, so blocks are independent
/// pipelines. Pixels map to slots as `v/255` on the way in and are rounded
/// and clamped back to `0..=255` on the way out. A DETECTED block has no
/// recovery to render and comes back black; the returned row (present when
/// a fault was given) records the injection's classification.
pub fn image_campaign(
    config: &CampaignConfig,
    image: &GrayImage,
    fault: Option<&ImageFault>,
) -> Result<(GrayImage, Option<CampaignRow>)> {
    let slots_per_block = config.params.slot_count();
    let total = image.pixels().len();
    let blocks = total.div_ceil(slots_per_block);
    if let Some(f) = fault {
        if f.block >= blocks {
            return Err(Error::AddressOutOfRange {
                what: "block index",
                value: f.block as u64,
                bound: blocks as u64,
            });
        }
    }

    let mut out = vec![0u8; total];
    let mut row = None;
    for b in 0..blocks {
        let start = b * slots_per_block;
        let end = (start + slots_per_block).min(total);
        let mut slots = vec![Complex64::new(0.0, 0.0); slots_per_block];
        for (s, &px) in slots.iter_mut().zip(&image.pixels()[start..end]) {
            *s = Complex64::new(px as f64 / 255.0, 0.0);
        }

        let params = Params::new(
            config.params.n,
            config.params.delta,
            config.params.chain.clone(),
            config.params.sigma,
            config.params.backend,
            config.params.seed.wrapping_add(b as u64),
        )?;
        let ctx = CkksContext::new(params)?;
        let z = Message::new(slots);
        let baseline = compute_baseline(&ctx, &z)?;
        let spec = fault.filter(|f| f.block == b).map(|f| &f.spec);
        let r = run_with_baseline(&ctx, &z, spec, &baseline, config.tau_benign)?;
        if let Some(s) = spec {
            row = Some(CampaignRow::from_result(ctx.params(), s, &r));
        }
        if let Some(rec) = &r.recovered {
            for (i, slot) in rec.slots()[..end - start].iter().enumerate() {
                out[start + i] = (slot.re * 255.0).round().clamp(0.0, 255.0) as u8;
            }
        }
        // a DETECTED block stays black: there is nothing to render
    }
    Ok((GrayImage::new(image.width(), image.height(), out)?, row))
}

pub const CSV_HEADER: &str = "backend,target,representation,limb,coeff_index,bit_index,delta,\
                              outcome,l2_error,max_slot_error,baseline_l2,seed";

fn format_float(v: f64) -> String {
    if v.is_infinite() {
        "inf".to_string()
    } else {
        format!("{v:.6e}")
    }
}

/// Renders rows (sorted by address) into the CSV format, header included.
pub fn csv_string(rows: &[CampaignRow]) -> String {
    let mut sorted: Vec<&CampaignRow> = rows.iter().collect();
    sorted.sort_by_key(|r| r.sort_key());
    let mut out = String::with_capacity(64 * (sorted.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in sorted {
        let limb = r
            .representation
            .limb()
            .map(|k| k.to_string())
            .unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.backend.as_str(),
            r.target.as_str(),
            r.representation.kind_str(),
            limb,
            r.coeff_index,
            r.bit_index,
            r.delta,
            r.outcome.as_str(),
            format_float(r.l2_error),
            format_float(r.max_slot_error),
            format_float(r.baseline_l2),
            r.seed,
        ));
    }
    out
}

/// Writes the CSV through a sibling temp file and an atomic rename.
pub fn emit_csv(rows: &[CampaignRow], path: &Path) -> Result<()> {
    let name = path
        .file_name()
        .ok_or_else(|| Error::InvalidParams(format!("not a writable path: {}", path.display())))?;
    let tmp = path.with_file_name(format!("{}.tmp", name.to_string_lossy()));
    fs::write(&tmp, csv_string(rows))?;
    fs::rename(&tmp, path)?;
    Ok(())
}
