use std::f64::consts::TAU;
use std::fs;
use std::path::Path;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use log::info;
use serde_json::{json, Value};
use stirsap::experiments::*;
use stirsap::io::*;
use stirsap::pulse::stirsap_pulses;
use stirsap::{validate_config, ConfigSnapshot, Convergence, Protocol, StateVector, TimeGrid};

use crate::{Cli, Command, Range};

struct Campaign {
    parsed: ParsedConfig,
    manifest: RunManifest,
    started: Instant,
}

impl Campaign {
    fn opts(&self) -> &RunOptions {
        &self.parsed.campaign.run
    }

    fn write(&self, name: &str, table: &CsvTable, convergence: Option<Convergence>, summary: Value) -> Result<()> {
        let meta = CampaignMetadata {
            manifest: Some(self.manifest.clone()),
            config: ConfigSnapshot {
                pulse: self.parsed.pulse,
                system: self.parsed.system,
            },
            campaign: self.parsed.campaign,
            wall_time_seconds: self.started.elapsed().as_secs_f64(),
            convergence,
            summary,
        };
        let path = write_campaign(&self.manifest.output_dir, name, table, &meta)?;
        info!("wrote {}", path.display());
        Ok(())
    }
}

/// The parsed config and the override entries it was built with.
fn load(cli: &Cli) -> Result<(ParsedConfig, Vec<String>)> {
    let g = &cli.global;
    let text = match &g.config {
        Some(path) => fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?,
        None => String::new(),
    };
    let mut overrides = g.overrides.clone();
    if let Some(t) = &g.total_time {
        overrides.push(format!("total_time = {t}"));
    }
    let origin = g.config.as_deref().unwrap_or(Path::new("<defaults>"));
    let parsed = parse_config_with_overrides(&text, &overrides).with_context(|| format!("config {}", origin.display()))?;
    Ok((parsed, overrides))
}

fn command_name(command: &Command) -> &'static str {
    match command {
        Command::Dynamics { .. } => "dynamics",
        Command::SweepTime { .. } => "sweep-time",
        Command::SweepAmplitude { .. } => "sweep-amplitude",
        Command::SweepDelay { .. } => "sweep-delay",
        Command::SweepDetuning { .. } => "sweep-detuning",
        Command::Peaks { .. } => "peaks",
        Command::Speedup => "speedup",
        Command::Cycles { .. } => "cycles",
        Command::Bloch => "bloch",
        Command::Pulses { .. } => "pulses",
        Command::Validate => "validate",
    }
}

fn slug(p: Protocol) -> String {
    p.tag().to_ascii_lowercase()
}

/// `start..=end` in `samples` points.
fn linspace(range: &Range, start: f64, end: f64, samples: usize) -> Result<Vec<f64>> {
    let (a, b, n) = (range.from.unwrap_or(start), range.to.unwrap_or(end), range.samples.unwrap_or(samples));
    if n == 0 || !a.is_finite() || !b.is_finite() {
        bail!("range needs finite bounds and at least one sample");
    }
    if n == 1 {
        return Ok(vec![a]);
    }
    Ok((0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect())
}

fn merged(sweeps: &[stirsap::SweepResult]) -> Convergence {
    sweeps.iter().fold(Convergence::default(), |c, s| c.merge(s.convergence))
}

fn robustness(ctx: &Campaign, name: &str, spec: RobustnessSpec) -> Result<()> {
    let p = &ctx.parsed;
    let sweeps = robustness_sweep(&spec, &p.pulse, &p.system, ctx.opts())?;
    let minima: serde_json::Map<String, Value> = sweeps
        .iter()
        .map(|s| (slug(s.protocol), json!(s.min_efficiency())))
        .collect();
    println!("{name}: minimum efficiency {}", Value::Object(minima.clone()));
    ctx.write(name, &sweep_table(&sweeps)?, Some(merged(&sweeps)), json!({ "min_efficiency": minima }))
}

pub fn run(cli: &Cli) -> Result<()> {
    let name = command_name(&cli.command);
    let (parsed, overrides) = load(cli)?;
    let ctx = Campaign {
        parsed,
        manifest: RunManifest::new(name, cli.global.config.clone(), overrides, cli.global.out.clone()),
        started: Instant::now(),
    };
    let (pulse, system) = (ctx.parsed.pulse, ctx.parsed.system);
    let t0 = system.pi_time();
    let omega0 = system.reference_rabi;

    match &cli.command {
        Command::Validate => {
            let report = validate_config(&pulse, &system);
            for c in &report.checks {
                println!("{} {}: {}", if c.passed { "ok  " } else { "FAIL" }, c.name, c.message);
            }
            println!("large detuning: {}", report.large_detuning);
            if !report.is_valid() {
                bail!("{} invariant(s) violated", report.failures().count());
            }
        }
        Command::Dynamics { protocol, three_level } => {
            let (traj, file) = if *three_level {
                (run_three_level(*protocol, &pulse, &system, ctx.opts())?, format!("dynamics_{}_lambda", slug(*protocol)))
            } else {
                (
                    run_dynamics(*protocol, pulse.total_time, &pulse, &system, ctx.opts())?,
                    format!("dynamics_{}", slug(*protocol)),
                )
            };
            let last = traj.final_populations();
            println!("final P1 = {:.6} P2 = {:.6}", last[0], last[1]);
            let convergence = Convergence::of(&traj.diagnostics);
            let summary = json!({ "protocol": protocol, "final_populations": last });
            ctx.write(&file, &trajectory_table(&traj, None)?, Some(convergence), summary)?;
        }
        Command::SweepTime { protocols, range } => {
            let protocols = if protocols.is_empty() {
                vec![Protocol::Stirsap, Protocol::Stirap]
            } else {
                protocols.clone()
            };
            let values = linspace(range, 0.5, 30.0, 60)?;
            let times: Vec<f64> = values.iter().map(|k| k * t0).collect();
            let sweeps = protocols
                .iter()
                .map(|&p| efficiency_vs_time(p, &times, &pulse, &system, ctx.opts()))
                .collect::<stirsap::Result<Vec<_>>>()?;
            let mut table = sweep_table(&sweeps)?;
            table.header.insert(1, "t_over_t0".into());
            for (row, v) in table.rows.iter_mut().zip(&values) {
                row.insert(1, *v);
            }
            ctx.write("sweep_time", &table, Some(merged(&sweeps)), json!({ "t0": t0 }))?;
        }
        Command::SweepAmplitude { protocols, range } => {
            let base = RobustnessSpec::amplitude();
            let samples = linspace(range, base.start, base.end, base.samples)?;
            let spec = RobustnessSpec {
                start: samples[0],
                end: *samples.last().unwrap(),
                samples: samples.len(),
                protocols: if protocols.is_empty() { base.protocols.clone() } else { protocols.clone() },
                ..base
            };
            robustness(&ctx, "sweep_amplitude", spec)?;
        }
        Command::SweepDelay { adapt, range } => {
            let base = RobustnessSpec::delay(*adapt);
            let samples = linspace(range, base.start, base.end, base.samples)?;
            let spec = RobustnessSpec {
                start: samples[0],
                end: *samples.last().unwrap(),
                samples: samples.len(),
                ..base
            };
            let file = if *adapt { "sweep_delay_adapted" } else { "sweep_delay_fixed" };
            robustness(&ctx, file, spec)?;
        }
        Command::SweepDetuning { protocols, range } => {
            let base = RobustnessSpec::detuning();
            let mhz = TAU * 1e6;
            let samples = linspace(range, base.start / mhz, base.end / mhz, base.samples)?;
            let spec = RobustnessSpec {
                start: samples[0] * mhz,
                end: samples.last().unwrap() * mhz,
                samples: samples.len(),
                protocols: if protocols.is_empty() { base.protocols.clone() } else { protocols.clone() },
                ..base
            };
            robustness(&ctx, "sweep_detuning", spec)?;
        }
        Command::Peaks { range } => {
            let target = ctx.parsed.campaign.fidelity_target;
            let search = PeakSearch::default();
            let mut table = CsvTable::new(&["t_over_t0", "omega_ap", "omega_sa"]);
            for k in linspace(range, 1.0, 20.0, 20)? {
                let ap = required_peak(Protocol::Stirap, k * t0, target, &pulse, &system, &search, ctx.opts())?;
                let sa = required_peak(Protocol::Stirsap, k * t0, target, &pulse, &system, &search, ctx.opts())?;
                table.push(vec![k, ap / omega0, sa / omega0])?;
            }
            ctx.write("peaks", &table, None, json!({ "fidelity_target": target, "t0": t0 }))?;
        }
        Command::Speedup => {
            let report = speedup_analysis(
                &default_peak_grid(),
                ctx.parsed.campaign.fidelity_target,
                &pulse,
                &system,
                &PeakSearch::default(),
                &TimeSearch::default(),
                ctx.opts(),
            )?;
            let (plateau, argmax) = (report.plateau_ratio(), report.argmax_difference());
            println!("plateau T_AP/T_SA = {plateau:.4}; argmax of T_AP - T_SA at {argmax:.3} Ω0");
            let summary = json!({ "plateau_ratio": plateau, "argmax_difference": argmax });
            ctx.write("speedup", &speedup_table(&report), None, summary)?;
        }
        Command::Cycles { cycles, p1 } => {
            let n = cycles.unwrap_or(ctx.parsed.campaign.cycles);
            let initial = StateVector::two_level_superposition(*p1, 0.0)?;
            let rows = multi_cycle(&initial, n, Protocol::Stirsap, &pulse, &system, ctx.opts())?;
            let last = rows.last().expect("row 0 is always present");
            println!("after {n} cycles: P1 = {:.6} P2 = {:.6}", last.p1, last.p2);
            ctx.write("cycles", &cycles_table(&rows), None, json!({ "cycles": n, "initial_p1": p1 }))?;
        }
        Command::Bloch => {
            let cmp = bloch_comparison(&pulse, &system, pulse.total_time, ctx.opts())?;
            let summary = json!({
                "bare_deviation": cmp.bare_deviation(),
                "shortcut_deviation": cmp.shortcut_deviation(),
                "transformed_deviation": cmp.transformed_deviation(),
            });
            println!("max angle to the bare field direction: {summary}");
            ctx.write("bloch", &bloch_table(&cmp), None, summary)?;
        }
        Command::Pulses { protocol } => {
            let grid = TimeGrid::new(0.0, pulse.total_time, ctx.opts().intervals)?;
            let table = pulse_table(&stirsap_pulses(&pulse, &system, &grid)?);
            let table = match protocol {
                Protocol::Stirsap => table,
                Protocol::Stirap => {
                    let mut t = CsvTable::new(&["t", "omega_p", "omega_s"]);
                    t.rows = table.rows.iter().map(|r| r[..3].to_vec()).collect();
                    t
                }
                Protocol::ResonantPi => bail!("the resonant π reference has no pulse shapes"),
            };
            ctx.write(&format!("pulses_{}", slug(*protocol)), &table, None, json!({ "protocol": protocol }))?;
        }
    }
    Ok(())
}
