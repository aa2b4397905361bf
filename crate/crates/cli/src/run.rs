//! Subcommand implementations.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use moldep_core::analysis::{
    broaden_histogram, narrowest, peak_metrics, periodicity_report, tallest, BinnedSeries, PeakRecord,
    PeriodicityReport,
};
use moldep_core::datasets;
use moldep_core::dynamics::{
    deposit_ensemble, min_well_period, well_domain, BeamConfig, DepositionOptions, DepositionRun,
};
use moldep_core::export::{export_table, Cell, Table, ToTable};
use moldep_core::mixture::{build_thermal_mixture, simulate_mixture_deposition, MixtureSpec, PreparationPulse};
use moldep_core::moldata::{assess_pair, load_molecule, validate_transitions, MoleculeModel};
use moldep_core::potential::{find_extrema, sample_potential, OpticalPotentialSpec, PotentialTerms, StandingWaveConfig};
use moldep_core::suscept::{resonance_detuning, susceptibility_set, SuperpositionSpec, SusceptOptions};
use moldep_core::units::angular_to_wavenumber;
use num_complex::Complex64;

use crate::config::{Config, SweepParameter};
use crate::manifest::{DatasetRecord, RunManifest};
use crate::CliError;

/// Environment variable naming the default dataset file.
pub const DATASET_ENV: &str = "MOLDEP_DATASET";

const BUILTINS: [(&str, &str); 3] = [
    ("n2_synthetic", datasets::N2_SYNTHETIC),
    ("three_level", datasets::THREE_LEVEL),
    ("lambda_four_level", datasets::LAMBDA_FOUR_LEVEL),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Potential,
    Deposit,
    Sweep,
    Mixture,
    Validate,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Potential => "potential",
            Command::Deposit => "deposit",
            Command::Sweep => "sweep",
            Command::Mixture => "mixture",
            Command::Validate => "validate",
        }
    }
}

pub struct Options {
    pub overrides: Vec<String>,
    pub workers: Option<usize>,
    pub strict: bool,
    pub out: Option<PathBuf>,
}

fn runtime(e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(anyhow::anyhow!("{e}"))
}

fn invalid(e: impl std::fmt::Display) -> CliError {
    CliError::Validation(e.to_string())
}

/// Dataset text and its provenance label.
fn dataset_source(config: &Config) -> Result<(String, String), CliError> {
    let spec = config
        .dataset
        .path
        .clone()
        .or_else(|| std::env::var(DATASET_ENV).ok().filter(|s| !s.is_empty()))
        .unwrap_or_else(|| "builtin:n2_synthetic".into());
    if let Some(name) = spec.strip_prefix("builtin:") {
        let (_, text) = BUILTINS
            .iter()
            .find(|(n, _)| *n == name)
            .ok_or_else(|| invalid(format!("unknown built-in dataset `{name}`")))?;
        return Ok((spec.clone(), text.to_string()));
    }
    let text = fs::read_to_string(&spec).map_err(|e| invalid(format!("cannot read dataset {spec}: {e}")))?;
    Ok((spec, text))
}

struct Setup {
    config: Config,
    model: MoleculeModel,
    dataset: DatasetRecord,
    field: StandingWaveConfig,
    beam: BeamConfig,
    warnings: Vec<String>,
}

impl Setup {
    fn new(config: Config) -> Result<Self, CliError> {
        let (source, text) = dataset_source(&config)?;
        let model = load_molecule(&text).map_err(|e| invalid(format!("dataset {source}: {e}")))?;
        let dataset = DatasetRecord::new(source, &text);
        if let Some(expected) = &config.dataset.expected_sha256 {
            if *expected != dataset.sha256 {
                return Err(invalid(format!(
                    "dataset {} has sha256 {}, the manifest recorded {expected}",
                    dataset.source, dataset.sha256
                )));
            }
        }
        let f = &config.field;
        let field = StandingWaveConfig::new(f.e1, f.e2, f.lambda1, f.lambda2, f.theta_f).map_err(invalid)?;
        let b = &config.beam;
        let beam = BeamConfig {
            vz: b.vz,
            nozzle_width: b.nozzle_width,
            sigma_v: b.sigma_v,
            t_int: b.t_int,
            t_free: b.t_free,
            mass: model.mass(),
        };
        beam.validate().map_err(invalid)?;
        Ok(Setup {
            config,
            model,
            dataset,
            field,
            beam,
            warnings: Vec::new(),
        })
    }

    fn superposition(&self) -> Result<SuperpositionSpec, CliError> {
        let s = &self.config.superposition;
        let m = &self.model;
        let a = m.ground_state(s.state1.nu, s.state1.j, s.state1.m).map_err(invalid)?;
        let b = m.ground_state(s.state2.nu, s.state2.j, s.state2.m).map_err(invalid)?;
        let c1 = Complex64::new(s.c1, 0.0);
        let c2 = Complex64::from_polar(s.c2, -s.theta);
        if s.normalize {
            SuperpositionSpec::normalized(m, a, b, c1, c2)
        } else {
            SuperpositionSpec::new(m, a, b, c1, c2)
        }
        .map_err(invalid)
    }

    /// Warn (or fail under `strict`) when E₁ + ħω₁ ≠ E₂ + ħω₂ beyond tolerance.
    fn check_resonance(&mut self, sup: &SuperpositionSpec, strict: bool) -> Result<(), CliError> {
        let detuning = angular_to_wavenumber(resonance_detuning(&self.model, &self.field, sup));
        let tolerance = self.config.field.resonance_tolerance_cm;
        if detuning.abs() > tolerance {
            let message = format!(
                "resonance residual E1 + hbar w1 - E2 - hbar w2 = {detuning:.3} cm-1 for `{}`/`{}` exceeds {tolerance} cm-1",
                self.model.state(sup.state1).id,
                self.model.state(sup.state2).id
            );
            if strict {
                return Err(CliError::Validation(message));
            }
            eprintln!("warning: {message}");
            self.warnings.push(message);
        }
        Ok(())
    }

    fn potential(&self, sup: &SuperpositionSpec, field: &StandingWaveConfig) -> Result<OpticalPotentialSpec, CliError> {
        let chi = susceptibility_set(&self.model, sup, field, &SusceptOptions::default()).map_err(runtime)?;
        Ok(OpticalPotentialSpec::averaged(chi, *field).with_terms(self.config.simulation.terms))
    }

    fn deposition_options(&self, workers: Option<usize>) -> DepositionOptions {
        let sim = &self.config.simulation;
        DepositionOptions {
            bin_width: sim.bin_width,
            integrator: sim.integrator,
            dt: sim.dt,
            workers,
        }
    }
}

struct Artifacts {
    dir: PathBuf,
    written: Vec<PathBuf>,
}

impl Artifacts {
    fn new(dir: PathBuf) -> Result<Self, CliError> {
        fs::create_dir_all(&dir).map_err(|e| runtime(format!("cannot create {}: {e}", dir.display())))?;
        Ok(Artifacts { dir, written: Vec::new() })
    }

    fn table<T: ToTable + ?Sized>(&mut self, name: &str, object: &T) -> Result<(), CliError> {
        let exported = export_table(object, &self.dir.join(name)).map_err(runtime)?;
        self.written.push(exported.table);
        self.written.extend(exported.plot);
        Ok(())
    }

    fn raw(&mut self, name: &str, table: &Table) -> Result<(), CliError> {
        let path = self.dir.join(name);
        fs::write(&path, table.to_csv()).map_err(runtime)?;
        self.written.push(path);
        Ok(())
    }
}

fn peaks_of(series: &BinnedSeries, fraction: f64) -> Result<Vec<PeakRecord>, CliError> {
    peak_metrics(series, fraction).map_err(runtime)
}

fn describe(label: &str, peaks: &[PeakRecord]) -> String {
    match (narrowest(peaks), tallest(peaks)) {
        (Some(n), Some(t)) => format!(
            "{label}: {} peaks, narrowest FWHM {:.3} nm, tallest {} counts at {:.1} nm (contrast {:.2})",
            peaks.len(),
            n.fwhm * 1e9,
            t.height,
            t.position * 1e9,
            t.contrast
        ),
        _ => format!("{label}: no peaks"),
    }
}

fn periodicity_table(rows: &[(&str, PeriodicityReport)]) -> Table {
    Table {
        columns: vec![
            "signal".into(),
            "dominant_period(um)".into(),
            "beat_length(um)".into(),
            "periodicity_score".into(),
        ],
        rows: rows
            .iter()
            .map(|(name, r)| {
                vec![
                    Cell::Text(name.to_string()),
                    r.dominant_period.map(|p| p * 1e6).into(),
                    r.beat_length.map(|p| p * 1e6).into(),
                    r.periodicity_score.into(),
                ]
            })
            .collect(),
        plot: None,
    }
}

struct Totals {
    trajectories: u64,
    steps: u64,
}

fn run_potential(setup: &mut Setup, sup: &SuperpositionSpec, out: &mut Artifacts) -> Result<Totals, CliError> {
    let spec = setup.potential(sup, &setup.field)?;
    let p = &setup.config.potential;
    let samples = sample_potential(&spec, p.x_min, p.x_max, p.samples);
    let extrema = find_extrema(&spec, (p.x_min, p.x_max), spec.default_grid(p.x_min, p.x_max)).map_err(runtime)?;
    let dx = (p.x_max - p.x_min) / (p.samples - 1) as f64;
    let total = periodicity_report(&samples.total(), dx, None).map_err(runtime)?;
    let interference = periodicity_report(&samples.v_in, dx, None).map_err(runtime)?;
    out.table("potential.csv", &samples)?;
    out.table("extrema.csv", extrema.as_slice())?;
    out.raw("periodicity.csv", &periodicity_table(&[("V", total), ("V_in", interference)]))?;
    let period = min_well_period(&spec, setup.beam.mass, well_domain(&setup.field, &setup.beam)).map_err(runtime)?;
    println!(
        "{} extrema on [{:.3}, {:.3}] um; shortest well period {}",
        extrema.len(),
        p.x_min * 1e6,
        p.x_max * 1e6,
        period.map_or("n/a".into(), |t| format!("{:.4} us (T/4 = {:.4} us)", t * 1e6, t * 0.25e6))
    );
    println!(
        "periodicity: V score {:.3}, V_in beat length {}",
        total.periodicity_score,
        interference.beat_length.map_or("none".into(), |b| format!("{:.4} um", b * 1e6))
    );
    Ok(Totals { trajectories: 0, steps: 0 })
}

/// One deposition, its histogram and peak tables named with `suffix`.
fn deposit_one(
    setup: &Setup,
    spec: &OpticalPotentialSpec,
    beam: &BeamConfig,
    workers: Option<usize>,
    out: &mut Artifacts,
    suffix: &str,
) -> Result<(DepositionRun, Vec<PeakRecord>), CliError> {
    let sim = &setup.config.simulation;
    let run = deposit_ensemble(spec, beam, sim.trajectories, sim.seed, &setup.deposition_options(workers)).map_err(runtime)?;
    let series = BinnedSeries::from(&run.histogram);
    let peaks = peaks_of(&series, setup.config.analysis.threshold_fraction)?;
    out.table(&format!("histogram{suffix}.csv"), &run.histogram)?;
    out.table(&format!("peaks{suffix}.csv"), peaks.as_slice())?;
    let sigma = setup.config.analysis.broaden_sigma_v;
    if sigma > 0.0 {
        let broadened = broaden_histogram(&series, sigma, beam.t_int).map_err(runtime)?;
        out.table(&format!("histogram{suffix}_broadened.csv"), &broadened)?;
    }
    Ok((run, peaks))
}

fn comparison_table(coherent: &[PeakRecord], incoherent: &[PeakRecord]) -> Table {
    let pick = |p: &[PeakRecord]| (narrowest(p).map(|r| r.fwhm), tallest(p).map(|r| r.height));
    let (fc, hc) = pick(coherent);
    let (fi, hi) = pick(incoherent);
    let ratio = |a: Option<f64>, b: Option<f64>| a.zip(b).map(|(a, b)| a / b);
    Table {
        columns: vec![
            "narrowest_fwhm_full(nm)".into(),
            "narrowest_fwhm_ni(nm)".into(),
            "fwhm_ratio_ni_over_full".into(),
            "tallest_full(count)".into(),
            "tallest_ni(count)".into(),
            "height_ratio_full_over_ni".into(),
        ],
        rows: vec![vec![
            fc.map(|v| v * 1e9).into(),
            fi.map(|v| v * 1e9).into(),
            ratio(fi, fc).into(),
            hc.into(),
            hi.into(),
            ratio(hc, hi).into(),
        ]],
        plot: None,
    }
}

fn run_deposit(setup: &mut Setup, sup: &SuperpositionSpec, workers: Option<usize>, out: &mut Artifacts) -> Result<Totals, CliError> {
    let spec = setup.potential(sup, &setup.field)?;
    let (run, peaks) = deposit_one(setup, &spec, &setup.beam, workers, out, "")?;
    let mut totals = Totals {
        trajectories: run.trajectories as u64,
        steps: run.total_steps(),
    };
    println!(
        "{} trajectories, {} steps each (dt {:.4e} s)",
        run.trajectories, run.plan.steps, run.plan.dt
    );
    println!("{}", describe("deposit", &peaks));
    if setup.config.simulation.compare {
        let ni = spec.with_terms(PotentialTerms::NonInterference);
        let (run_ni, peaks_ni) = deposit_one(setup, &ni, &setup.beam, workers, out, "_ni")?;
        totals.trajectories += run_ni.trajectories as u64;
        totals.steps += run_ni.total_steps();
        println!("{}", describe("V_ni only", &peaks_ni));
        out.raw("comparison.csv", &comparison_table(&peaks, &peaks_ni))?;
    }
    Ok(totals)
}

fn run_sweep(setup: &mut Setup, workers: Option<usize>, out: &mut Artifacts) -> Result<Totals, CliError> {
    let sweep = setup
        .config
        .sweep
        .clone()
        .ok_or_else(|| invalid("config key `sweep`: the sweep command needs a [sweep] section"))?;
    let base = setup.superposition()?;
    let mut totals = Totals { trajectories: 0, steps: 0 };
    let mut rows = Vec::new();
    let name = serde_json::to_value(sweep.parameter).expect("enum serializes");
    let name = name.as_str().expect("string tag").to_string();
    for (i, &value) in sweep.values.iter().enumerate() {
        let mut field = setup.field;
        let mut beam = setup.beam;
        let mut sup = base;
        match sweep.parameter {
            SweepParameter::ThetaF => field.theta_f = value,
            SweepParameter::TInt => beam.t_int = value,
            SweepParameter::FieldRatio => field.e2 = field.e1 * value,
            SweepParameter::Population1 => {
                sup = SuperpositionSpec::with_phase(&setup.model, base.state1, base.state2, value, base.theta())
                    .map_err(invalid)?;
            }
        }
        field.validate().map_err(invalid)?;
        beam.validate().map_err(invalid)?;
        let spec = setup.potential(&sup, &field)?;
        let mut sub = Artifacts::new(out.dir.join(format!("{name}_{i:03}")))?;
        let (run, peaks) = deposit_one(setup, &spec, &beam, workers, &mut sub, "")?;
        out.written.append(&mut sub.written);
        totals.trajectories += run.trajectories as u64;
        totals.steps += run.total_steps();
        println!("{}", describe(&format!("{name} = {value}"), &peaks));
        rows.push(vec![
            Cell::Float(value),
            Cell::Int(peaks.len() as i64),
            narrowest(&peaks).map(|p| p.fwhm * 1e9).into(),
            tallest(&peaks).map(|p| p.height).into(),
            tallest(&peaks).map(|p| p.position * 1e9).into(),
        ]);
    }
    let summary = Table {
        columns: vec![
            name.clone(),
            "peaks".into(),
            "narrowest_fwhm(nm)".into(),
            "tallest(count)".into(),
            "tallest_x(nm)".into(),
        ],
        rows,
        plot: None,
    };
    out.raw("sweep.csv", &summary)?;
    Ok(totals)
}

fn mixture_of(setup: &Setup) -> Result<MixtureSpec, CliError> {
    let m = &setup.config.mixture;
    let pulse = PreparationPulse {
        field_strength: m.field_strength,
        spectral_width: m.spectral_width,
        ..PreparationPulse::reference()
    };
    build_thermal_mixture(&setup.model, m.temperature, m.cutoff, &pulse).map_err(invalid)
}

fn run_mixture(setup: &mut Setup, workers: Option<usize>, strict: bool, out: &mut Artifacts) -> Result<Totals, CliError> {
    let mixture = mixture_of(setup)?;
    let worst = mixture
        .components
        .iter()
        .max_by(|a, b| {
            let d = |c: &SuperpositionSpec| resonance_detuning(&setup.model, &setup.field, c).abs();
            d(&a.superposition).total_cmp(&d(&b.superposition))
        })
        .map(|c| c.superposition)
        .expect("validated mixture is non-empty");
    setup.check_resonance(&worst, strict)?;
    let sim = setup.config.simulation.clone();
    let opts = setup.deposition_options(workers);
    let mut totals = Totals { trajectories: 0, steps: 0 };
    let mut variants = vec![(sim.terms, "")];
    if sim.compare {
        variants.push((PotentialTerms::NonInterference, "_ni"));
    }
    let mut peak_sets = Vec::new();
    for (terms, suffix) in variants {
        let run = simulate_mixture_deposition(
            &setup.model,
            &mixture,
            &setup.field,
            &setup.beam,
            sim.trajectories,
            sim.seed,
            terms,
            &opts,
        )
        .map_err(runtime)?;
        let peaks = peaks_of(&BinnedSeries::from(&run.combined), setup.config.analysis.threshold_fraction)?;
        out.table(&format!("histogram{suffix}.csv"), &run.combined)?;
        out.table(&format!("peaks{suffix}.csv"), peaks.as_slice())?;
        if suffix.is_empty() {
            out.raw("components.csv", &run.components.as_slice().to_table())?;
            if setup.config.mixture.export_components {
                let mut sub = Artifacts::new(out.dir.join("components"))?;
                for c in &run.components {
                    sub.table(&format!("J{}_M{}.csv", c.j, c.m), &c.histogram)?;
                }
                out.written.append(&mut sub.written);
            }
        }
        for c in &run.components {
            totals.trajectories += c.trajectories as u64;
            totals.steps += c.trajectories as u64 * c.steps as u64;
        }
        println!(
            "{}",
            describe(if suffix.is_empty() { "mixture" } else { "mixture, V_ni only" }, &peaks)
        );
        peak_sets.push(peaks);
    }
    println!("{} components at {} K", mixture.components.len(), mixture.temperature);
    if let [full, ni] = peak_sets.as_slice() {
        out.raw("comparison.csv", &comparison_table(full, ni))?;
    }
    Ok(totals)
}

fn run_validate(setup: &mut Setup, strict: bool) -> Result<(), CliError> {
    let report = validate_transitions(&setup.model);
    println!(
        "dataset {} (sha256 {}): {} states, {} dipoles",
        setup.dataset.source,
        setup.dataset.sha256,
        setup.model.states().len(),
        setup.model.dipoles().len()
    );
    if !report.is_clean() {
        for v in &report.violations {
            eprintln!("violation: {} - {}: {}", v.a, v.b, v.rule);
        }
        return Err(CliError::Validation(format!(
            "{} dipole entries break the selection rules",
            report.violations.len()
        )));
    }
    let sup = setup.superposition()?;
    let (a, b) = (setup.model.state(sup.state1), setup.model.state(sup.state2));
    println!("superposition {} / {}: {}", a.id, b.id, assess_pair(a, b));
    setup.check_resonance(&sup, strict)?;
    susceptibility_set(&setup.model, &sup, &setup.field, &SusceptOptions::default()).map_err(invalid)?;
    if setup.config.sweep.is_some() {
        println!("sweep section present");
    }
    mixture_of(setup)?;
    println!("config valid");
    Ok(())
}

/// Execute `command` with a loaded configuration.
pub fn execute(command: Command, config: Config, opts: &Options) -> Result<(), CliError> {
    let start = Instant::now();
    let mut setup = Setup::new(config)?;
    if command == Command::Validate {
        return run_validate(&mut setup, opts.strict);
    }
    let dir = opts.out.clone().unwrap_or_else(|| setup.config.output.dir.clone());
    let mut out = Artifacts::new(dir)?;
    let totals = match command {
        Command::Mixture => run_mixture(&mut setup, opts.workers, opts.strict, &mut out)?,
        _ => {
            let sup = setup.superposition()?;
            setup.check_resonance(&sup, opts.strict)?;
            match command {
                Command::Potential => run_potential(&mut setup, &sup, &mut out)?,
                Command::Deposit => run_deposit(&mut setup, &sup, opts.workers, &mut out)?,
                Command::Sweep => run_sweep(&mut setup, opts.workers, &mut out)?,
                Command::Mixture | Command::Validate => unreachable!(),
            }
        }
    };
    let manifest = RunManifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        command: command.name().into(),
        seed: setup.config.simulation.seed,
        config: setup.config,
        overrides: opts.overrides.clone(),
        dataset: setup.dataset,
        workers: opts.workers,
        artifacts: out.written.clone(),
        trajectories: totals.trajectories,
        integration_steps: totals.steps,
        wall_clock_seconds: start.elapsed().as_secs_f64(),
        warnings: setup.warnings,
    };
    let path = manifest.write(&out.dir).map_err(runtime)?;
    println!("wrote {} artifacts and {}", out.written.len(), display(&path));
    Ok(())
}

fn display(p: &Path) -> String {
    p.display().to_string()
}
