//! Named, configurable verification experiments over the `finsler` library.
//! Each run yields an [`ExperimentReport`] and, with an output directory,
//! `report.json`, `table.csv` and `plot_*.svg` under `<out>/<experiment>/`.

pub mod config;
pub mod experiments;
pub mod plot;
pub mod report;

pub use config::{ConfigFile, Experiment, ExperimentConfig};
pub use report::{Check, ExperimentReport, Section};

use anyhow::{Context, Result};
use experiments::{definition, Ctx};
use report::SectionSummary;

/// Runs one named section of an experiment; errors become a failed check.
pub fn run_section(ctx: &Ctx, name: &str) -> Result<Section> {
    let def = definition(ctx.cfg.experiment)
        .sections
        .iter()
        .find(|s| s.name == name)
        .with_context(|| format!("{} has no section {name:?}", ctx.cfg.experiment))?;
    Ok(guarded(ctx, def))
}

fn guarded(ctx: &Ctx, def: &experiments::SectionDef) -> Section {
    match (def.run)(ctx) {
        Ok(s) => s,
        Err(e) => Section {
            checks: vec![Check::error(format!("{}: completed", def.name), &e)],
            ..Default::default()
        },
    }
}

pub fn run(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let ctx = Ctx::new(cfg)?;
    let def = definition(cfg.experiment);
    let mut sections = Vec::new();
    let mut extras = serde_json::Map::new();
    let mut rows = Vec::new();
    for sd in def.sections {
        let sec = guarded(&ctx, sd);
        for (k, v) in sec.extras {
            extras.insert(format!("{}.{k}", sd.name), v);
        }
        rows.extend(sec.rows);
        sections.push(SectionSummary {
            name: sd.name.to_string(),
            passed: sec.checks.iter().all(|c| c.passed),
            checks: sec.checks,
        });
    }
    let failed = sections.iter().flat_map(|s| &s.checks).filter(|c| !c.passed).count();
    let total = sections.iter().map(|s| s.checks.len()).sum::<usize>();
    let report = ExperimentReport {
        experiment: cfg.experiment.id().to_string(),
        title: cfg.experiment.title().to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: cfg.clone(),
        passed: total - failed,
        failed,
        sections,
        extras,
        rows,
    };
    if let Some(out) = &cfg.out {
        write_outputs(&report, out, cfg.plots)?;
    }
    Ok(report)
}

pub fn write_outputs(report: &ExperimentReport, out: &std::path::Path, plots: bool) -> Result<()> {
    let dir = report.dir(out);
    std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    report.write_json(&dir.join("report.json"))?;
    report.write_table(&dir.join("table.csv"))?;
    if plots {
        let exp: Experiment = report.experiment.parse()?;
        for spec in definition(exp).plots {
            if report.rows.iter().any(|r| r.series.starts_with(spec.prefix)) {
                plot::render(spec, &report.rows, &dir.join(spec.file))?;
            }
        }
    }
    Ok(())
}
