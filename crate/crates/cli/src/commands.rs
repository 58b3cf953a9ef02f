//! The pipeline stages. Each reads its predecessors' artifacts from the
//! output directory and writes its own.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use anyhow::Context;
use fuelmodel::cycle::load_cycle;
use fuelmodel::dyno::{measured_trace, process_log, DynoLog};
use fuelmodel::extraction::{extract_from_runs, Extraction, VcdDataset};
use fuelmodel::reference::{self, SimMode};
use fuelmodel::semi::SemiPrincipledModel;
use fuelmodel::simplified::{fit_simplified, positivity_minimum, SimplifiedModel};
use fuelmodel::trace::Trace;
use fuelmodel::validation::{self, Pair, ValidationReport};
use fuelmodel::vehicle::VehicleConfig;

use crate::artifacts::{self, Layout, Provenance};
use crate::config::{stem, Loaded, RunConfig};
use crate::error::CliError;
use crate::svg::{line_chart, Series};

pub const REFERENCE: &str = "reference";
pub const SEMI: &str = "semi";
pub const SIMPLIFIED: &str = "simplified";
pub const DYNO: &str = "dyno";

pub struct Ctx {
    pub cfg: RunConfig,
    pub prov: Provenance,
    pub layout: Layout,
    /// Print progress lines to stdout.
    pub verbose: bool,
}

impl Ctx {
    pub fn new(loaded: Loaded) -> Self {
        Self {
            layout: Layout::new(&loaded.config.output_dir),
            prov: Provenance::new(&loaded.hash),
            cfg: loaded.config,
            verbose: true,
        }
    }

    fn note(&self, path: &Path) {
        if self.verbose {
            let shown = path.strip_prefix(&self.layout.root).unwrap_or(path);
            println!("wrote {}", shown.display());
        }
    }

    fn vehicle(&self) -> Result<VehicleConfig, CliError> {
        VehicleConfig::load(&self.cfg.vehicle).map_err(|e| CliError::input(&self.cfg.vehicle, e))
    }

    fn write_trace(&self, path: &Path, trace: &Trace) -> anyhow::Result<()> {
        let w = artifacts::create(path)?;
        trace
            .write_csv(w, Some(&self.prov.comment()))
            .with_context(|| format!("writing {}", path.display()))?;
        self.note(path);
        Ok(())
    }

    fn write_json<T: serde::Serialize>(&self, path: &Path, value: &T) -> anyhow::Result<()> {
        artifacts::write_json(path, value, &self.prov)?;
        self.note(path);
        Ok(())
    }
}

fn read_trace(path: &Path, name: &str, stage: &'static str) -> Result<Trace, CliError> {
    let text = artifacts::read_prerequisite(path, stage)?;
    Trace::read_csv(name, text.as_bytes()).map_err(|e| CliError::input(path, e))
}

/// Drive every configured cycle through the reference powertrain, once in
/// dynamometer (VCD) mode and once in normal mode.
pub fn simulate(ctx: &Ctx) -> anyhow::Result<()> {
    let veh = ctx.vehicle()?;
    for path in ctx.cfg.all_cycles() {
        let cycle = load_cycle(&path, ctx.cfg.unit).map_err(|e| CliError::input(&path, e))?;
        let cycle = cycle.resample(ctx.cfg.dt).map_err(|e| CliError::input(&path, e))?;
        let name = stem(&path);
        for (mode, out) in [
            (SimMode::Vcd, ctx.layout.vcd_trace(&name)),
            (SimMode::Base, ctx.layout.reference_trace(&name)),
        ] {
            let trace = reference::simulate(&cycle, &reference::flat, &veh, mode)
                .with_context(|| format!("simulating {name}"))?;
            ctx.write_trace(&out, &trace)?;
        }
    }
    Ok(())
}

pub fn extract(ctx: &Ctx) -> anyhow::Result<()> {
    let veh = ctx.vehicle()?;
    let (mut vcd, mut base) = (Vec::new(), Vec::new());
    for path in &ctx.cfg.cycles.extraction {
        let name = stem(path);
        vcd.push(read_trace(&ctx.layout.vcd_trace(&name), &name, "simulate")?);
        base.push(read_trace(&ctx.layout.reference_trace(&name), &name, "simulate")?);
    }
    let vcd = VcdDataset::from_traces(SimMode::Vcd, vcd);
    let base = VcdDataset::from_traces(SimMode::Base, base);
    let ex = extract_from_runs(&veh, &vcd, &base, &ctx.cfg.map_degrees, &ctx.cfg.correction_bins)
        .context("extracting maps and constants")?;
    ctx.write_json(&ctx.layout.extraction(), &ex)
}

pub fn fit_semi(ctx: &Ctx) -> anyhow::Result<()> {
    let veh = ctx.vehicle()?;
    let ex: Extraction = artifacts::read_json(&ctx.layout.extraction(), "extract")?;
    let mut model = SemiPrincipledModel::new(&veh, ex);
    model.gear_hold_accel = ctx.cfg.semi.gear_hold_accel;
    ctx.write_json(&ctx.layout.semi_model(), &model)
}

fn load_semi(ctx: &Ctx) -> Result<SemiPrincipledModel, CliError> {
    artifacts::read_json(&ctx.layout.semi_model(), "fit-semi")
}

fn load_simplified(ctx: &Ctx) -> Result<SimplifiedModel, CliError> {
    artifacts::read_json(&ctx.layout.simplified_model(), "fit-simplified")
}

pub fn fit_simplified_cmd(ctx: &Ctx) -> anyhow::Result<()> {
    let semi = load_semi(ctx)?;
    let model = fit_simplified(&semi, &ctx.cfg.simplified).context("fitting the simplified model")?;
    if ctx.verbose {
        println!(
            "simplified fit: rms {:.4} g/s, min f_p(v, a_min) {:.4} g/s",
            model.diagnostics.rms,
            positivity_minimum(&model)
        );
    }
    ctx.write_json(&ctx.layout.simplified_model(), &model)
}

/// Turn each dynamometer log into a speed/acceleration profile and a
/// measured trace on the same grid.
pub fn ingest(ctx: &Ctx) -> anyhow::Result<()> {
    for path in &ctx.cfg.dyno_logs {
        let name = stem(path);
        let file = File::open(path).map_err(|e| CliError::io(path, e))?;
        let log = DynoLog::read_csv(&name, file).map_err(|e| CliError::input(path, e))?;
        let profile = process_log(&log, &ctx.cfg.ingest).with_context(|| format!("processing {}", path.display()))?;
        let out = ctx.layout.profile(&name);
        profile.write_csv(artifacts::create(&out)?, Some(&ctx.prov.comment()))?;
        ctx.note(&out);
        ctx.write_json(&ctx.layout.profile_meta(&name), &profile.provenance)?;
        ctx.write_trace(&ctx.layout.measured_trace(&name), &measured_trace(&log, &profile))?;
    }
    Ok(())
}

struct Compared {
    cycle: String,
    reference: Trace,
    semi: Trace,
    simplified: Trace,
}

/// Compare the models with the reference runs (and dynamometer logs, if any)
/// and write reports and figure data.
pub fn validate(ctx: &Ctx) -> anyhow::Result<()> {
    let semi = load_semi(ctx)?;
    let simple = load_simplified(ctx)?;

    let mut sim_runs = Vec::new();
    for path in &ctx.cfg.cycles.evaluation {
        let name = stem(path);
        let reference = read_trace(&ctx.layout.reference_trace(&name), &name, "simulate")?;
        sim_runs.push(predict(ctx, &semi, &simple, name, reference)?);
    }
    let mut dyno_runs = Vec::new();
    for path in &ctx.cfg.dyno_logs {
        let name = stem(path);
        let measured = read_trace(&ctx.layout.measured_trace(&name), &name, "ingest")?;
        dyno_runs.push(predict(ctx, &semi, &simple, name, measured)?);
    }

    let mut reports = vec![
        report(ctx, &sim_runs, SEMI, REFERENCE, |c| (&c.reference, &c.semi))?,
        report(ctx, &sim_runs, SIMPLIFIED, REFERENCE, |c| (&c.reference, &c.simplified))?,
        report(ctx, &sim_runs, SIMPLIFIED, SEMI, |c| (&c.semi, &c.simplified))?,
    ];
    if !dyno_runs.is_empty() {
        reports.push(report(ctx, &dyno_runs, SEMI, DYNO, |c| (&c.reference, &c.semi))?);
        reports.push(report(ctx, &dyno_runs, SIMPLIFIED, DYNO, |c| (&c.reference, &c.simplified))?);
    }
    if ctx.verbose {
        for (model, reference, rep) in &reports {
            println!("\n{model} vs {reference}\n{}", rep.to_table());
        }
    }
    Ok(())
}

fn predict(
    ctx: &Ctx,
    semi: &SemiPrincipledModel,
    simple: &SimplifiedModel,
    cycle: String,
    reference: Trace,
) -> anyhow::Result<Compared> {
    let r = &reference;
    let s = semi.eval_trace(&cycle, &r.t, &r.v, &r.a, &r.grade);
    let p = simple.eval_trace(&cycle, &r.t, &r.v, &r.a, &r.grade);
    ctx.write_trace(&ctx.layout.prediction(&cycle, SEMI), &s)?;
    ctx.write_trace(&ctx.layout.prediction(&cycle, SIMPLIFIED), &p)?;
    Ok(Compared {
        cycle,
        reference,
        semi: s,
        simplified: p,
    })
}

type Pick = fn(&Compared) -> (&Trace, &Trace);

fn report<'a>(
    ctx: &Ctx,
    runs: &'a [Compared],
    model: &'a str,
    reference: &'a str,
    pick: Pick,
) -> anyhow::Result<(&'a str, &'a str, ValidationReport)> {
    let pairs: Vec<Pair<'_>> = runs
        .iter()
        .map(|c| {
            let (r, m) = pick(c);
            Pair {
                cycle: &c.cycle,
                reference: r,
                model: m,
            }
        })
        .collect();
    let dt = ctx.cfg.dt;
    let rep = validation::build_report(&pairs, reference, model, dt)
        .with_context(|| format!("comparing {model} with {reference}"))?;
    ctx.write_json(&ctx.layout.report(model, reference, "json"), &rep)?;
    let txt = ctx.layout.report(model, reference, "txt");
    artifacts::write_text(&txt, &format!("# {}\n{}", ctx.prov.comment(), rep.to_table()))?;
    ctx.note(&txt);
    for p in &pairs {
        let al = validation::align(p.reference, p.model, dt)?;
        let file = validation::comparison_file_name(p.cycle, model, reference);
        let out = ctx.layout.figure(&file);
        let mut w = artifacts::create(&out)?;
        writeln!(w, "# {}", ctx.prov.comment()).map_err(|e| CliError::io(&out, e))?;
        validation::write_comparison_csv(w, &al)?;
        ctx.note(&out);
        if ctx.cfg.svg {
            let svg = line_chart(
                &format!("{}: {model} vs {reference}", p.cycle),
                "t (s)",
                "fuel rate (g/s)",
                &al.t,
                &[
                    Series {
                        label: reference,
                        color: "black",
                        y: &al.fuel.0,
                    },
                    Series {
                        label: model,
                        color: "#d62728",
                        y: &al.fuel.1,
                    },
                ],
            );
            let out = out.with_extension("svg");
            artifacts::write_text(&out, &svg)?;
            ctx.note(&out);
        }
    }
    Ok((model, reference, rep))
}

pub fn pipeline(ctx: &Ctx) -> anyhow::Result<()> {
    simulate(ctx)?;
    extract(ctx)?;
    fit_semi(ctx)?;
    fit_simplified_cmd(ctx)?;
    ingest(ctx)?;
    validate(ctx)
}
