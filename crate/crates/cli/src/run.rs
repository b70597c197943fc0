//! Experiment dispatch and the `run` command.

use std::fs;
use std::io::Write;
use std::path::Path;
use std::process::ExitCode;

use bell_lab::hbt::hbt_locality_audit;
use bell_lab::locality::{audit_model, CheckGrid};
use bell_lab::metrics::{chsh_for_model, correlator_table, maximize_chsh_for_model};
use bell_lab::model::behavior_from_model;
use bell_lab::polytope::{chsh_inequalities, membership};
use bell_lab::{ConditionalModel, ModelDescriptor};

use crate::config::{parse_config, ConfigError, ExperimentKind, Overrides, Plan};
use crate::report::{
    ChshReport, CorrelateReport, HbtExperimentReport, LocalityAuditReport, MembershipReport, RenderError, Report,
};

/// Failure of the `run` command, split by exit status.
#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("invalid config: {0}")]
    Validation(#[from] ConfigError),
    #[error("{0}")]
    Runtime(String),
}

impl RunError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            RunError::Validation(_) => ExitCode::from(1),
            RunError::Runtime(_) => ExitCode::from(2),
        }
    }
}

impl From<bell_lab::Error> for RunError {
    fn from(e: bell_lab::Error) -> Self {
        RunError::Runtime(e.to_string())
    }
}

impl From<RenderError> for RunError {
    fn from(e: RenderError) -> Self {
        RunError::Runtime(e.to_string())
    }
}

fn descriptor(plan: &Plan) -> &ModelDescriptor {
    plan.model.as_ref().expect("validated plans carry a model where needed")
}

/// Runs a validated plan.
pub fn execute(plan: &Plan) -> Result<Report, bell_lab::Error> {
    let integ = &plan.integration;
    Ok(match plan.experiment {
        ExperimentKind::Correlate => {
            let d = descriptor(plan);
            let model = d.build()?;
            let correlators = correlator_table(&model, &plan.settings_a, &plan.settings_b, integ)?;
            let behavior = behavior_from_model(&model, &plan.settings_a, &plan.settings_b, integ)?;
            Report::Correlate(CorrelateReport {
                model: d.clone(),
                integration: integ.clone(),
                settings_a: plan.settings_a.clone(),
                settings_b: plan.settings_b.clone(),
                correlators,
                behavior,
            })
        }
        ExperimentKind::Chsh => {
            let d = descriptor(plan);
            let model = d.build()?;
            let s = [plan.settings_a[0], plan.settings_a[1], plan.settings_b[0], plan.settings_b[1]];
            let result = chsh_for_model(&model, s, integ)?;
            Report::Chsh(ChshReport { model: d.clone(), integration: integ.clone(), search: None, result })
        }
        ExperimentKind::Maximize => {
            let d = descriptor(plan);
            let model = d.build()?;
            let result = maximize_chsh_for_model(&model, &plan.search, integ)?;
            Report::Maximize(ChshReport {
                model: d.clone(),
                integration: integ.clone(),
                search: Some(plan.search),
                result,
            })
        }
        ExperimentKind::CheckLocality => {
            let d = descriptor(plan);
            let model = d.build()?;
            let grid = if plan.settings_a.is_empty() {
                CheckGrid::with_counts(model.source(), plan.grid.settings, plan.grid.hidden)?
            } else {
                let spec = format!(
                    "{}x{} configured settings; hidden: {}",
                    plan.settings_a.len(),
                    plan.settings_b.len(),
                    model.source().describe_probes(plan.grid.hidden)
                );
                CheckGrid::new(
                    plan.settings_a.clone(),
                    plan.settings_b.clone(),
                    model.source().probe_points(plan.grid.hidden),
                    spec,
                )?
            };
            let reports = audit_model(&model, &grid, plan.tolerance)?.to_vec();
            Report::CheckLocality(LocalityAuditReport {
                model: d.clone(),
                all_passed: reports.iter().all(|r| r.passed()),
                reports,
            })
        }
        ExperimentKind::PolytopeMembership => {
            let behavior = match &plan.behavior {
                Some(b) => b.clone(),
                None => behavior_from_model(&descriptor(plan).build()?, &plan.settings_a, &plan.settings_b, integ)?,
            };
            let chsh_forms = chsh_inequalities(&behavior)?;
            let verdict = membership(&behavior, plan.tolerance)?;
            Report::PolytopeMembership(MembershipReport {
                model: if plan.behavior.is_some() { None } else { plan.model.clone() },
                tolerance: plan.tolerance,
                behavior,
                chsh_forms,
                verdict,
            })
        }
        ExperimentKind::Hbt => {
            let config = plan.hbt.clone().expect("validated hbt plans carry a config");
            let audit = hbt_locality_audit(&config, &plan.settings_a, &plan.settings_b, plan.tolerance)?;
            Report::Hbt(HbtExperimentReport {
                config,
                settings_a: plan.settings_a.clone(),
                settings_b: plan.settings_b.clone(),
                audit,
            })
        }
    })
}

/// Reads, validates, executes and renders one config file.
///
/// Returns the rendered report and the destination path, if any.
pub fn run_config(path: &Path, overrides: &Overrides, workers: Option<usize>) -> Result<(Vec<u8>, Option<std::path::PathBuf>), RunError> {
    let text = fs::read_to_string(path)
        .map_err(|e| RunError::Validation(ConfigError::new("", format!("cannot read {}: {e}", path.display()))))?;
    let plan = parse_config(&text, overrides)?;
    let report = match workers {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| RunError::Runtime(format!("thread pool: {e}")))?;
            pool.install(|| execute(&plan))?
        }
        None => execute(&plan)?,
    };
    Ok((report.render(plan.format)?, plan.out.clone()))
}

/// Runs a config and writes the report, returning the process exit status.
pub fn run_command(path: &Path, overrides: &Overrides, workers: Option<usize>) -> ExitCode {
    let result = run_config(path, overrides, workers).and_then(|(bytes, out)| {
        match out {
            Some(p) => fs::write(&p, &bytes).map_err(|e| RunError::Runtime(format!("cannot write {}: {e}", p.display()))),
            None => std::io::stdout().write_all(&bytes).map_err(|e| RunError::Runtime(format!("stdout: {e}"))),
        }
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("bell-lab: {e}");
            e.exit_code()
        }
    }
}
