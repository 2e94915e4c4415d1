mod cli;
mod commands;
mod presets;
mod run;

use std::collections::BTreeMap;
use std::fs;
use std::process::ExitCode;

use clap::Parser;
use kerr_echo::scenario::{parse_override, Scenario};

use cli::Cli;
use run::{sha256_hex, Failure, Index, ManifestTiming, OutputDir, RunManifest, INDEX_FILE, MANIFEST_FILE};

const SCHEMA: u32 = 1;

/// Scenario text from `--config` or the preset. A manifest contributes its resolved scenario.
fn scenario_text(cli: &Cli) -> Result<String, Failure> {
    let Some(path) = &cli.common.config else {
        return Ok(presets::preset(cli.command).to_string());
    };
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::Validation(format!("cannot read config {}: {e}", path.display())))?;
    if path.extension().is_some_and(|e| e == "json") {
        let manifest: RunManifest = serde_json::from_str(&text)
            .map_err(|e| Failure::Validation(format!("{} is not a run manifest: {e}", path.display())))?;
        return manifest.resolved_scenario.ok_or_else(|| {
            Failure::Validation(format!("manifest {} has no resolved scenario", path.display()))
        });
    }
    Ok(text)
}

fn load_scenario(cli: &Cli) -> Result<Scenario, Failure> {
    let text = scenario_text(cli)?;
    let mut overrides = cli
        .common
        .overrides
        .iter()
        .map(|s| parse_override(s))
        .collect::<kerr_echo::Result<Vec<_>>>()?;
    if let Some(seed) = cli.common.seed {
        overrides.push(("ensemble.seed".into(), seed.to_string()));
    }
    Ok(Scenario::parse(&text, &overrides)?)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    if let Some(n) = cli.common.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot start {n} worker threads: {e}");
            return ExitCode::from(4);
        }
    }
    let mut out = match OutputDir::prepare(&cli.common.out, cli.common.force) {
        Ok(o) => o,
        Err(f) => {
            eprintln!("error: {}", f.message());
            return ExitCode::from(f.exit_code() as u8);
        }
    };

    let scenario = load_scenario(&cli);
    let result = scenario
        .as_ref()
        .map_err(|f| Failure::Validation(f.message().to_string()))
        .and_then(|s| commands::run(cli.command, s, cli.common.long, &mut out));
    let (result, scenario) = match scenario {
        Ok(s) => (result, Some(s)),
        Err(f) => (Err(f), None),
    };

    let exit_code = result.as_ref().map_or_else(Failure::exit_code, |_| 0);
    let resolved = scenario.as_ref().map(Scenario::to_toml);
    let entries = out.index.clone();
    let index = Index {
        schema: SCHEMA,
        subcommand: cli.command.name(),
        entries: &entries,
    };
    let manifest = RunManifest {
        schema: SCHEMA,
        tool: "kerr-echo".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        engine_versions: BTreeMap::from([("kerr-echo".to_string(), kerr_echo::VERSION.to_string())]),
        subcommand: cli.command.name().into(),
        status: if result.is_ok() { "ok" } else { "failed" }.into(),
        exit_code,
        error: result.as_ref().err().map(|f| f.message().to_string()),
        scenario_sha256: resolved.as_deref().map(sha256_hex),
        seed: scenario.as_ref().map(|s| s.ensemble.seed),
        resolved_scenario: resolved,
        threads: rayon::current_num_threads(),
        outputs: out.outputs.clone(),
        timings: out
            .timings
            .iter()
            .map(|t| ManifestTiming {
                phase: t.phase.clone(),
                seconds: t.seconds,
            })
            .collect(),
    };
    let written = out
        .write(INDEX_FILE, |mut w| kerr_echo::output::write_json(&mut w, &index))
        .and_then(|_| out.write(MANIFEST_FILE, |mut w| kerr_echo::output::write_json(&mut w, &manifest)));

    match (result, written) {
        (Err(f), _) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.exit_code() as u8)
        }
        (Ok(()), Err(f)) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(4)
        }
        (Ok(()), Ok(())) => {
            println!("{}: wrote {} files to {}", cli.command.name(), out.outputs.len(), out.root().display());
            ExitCode::SUCCESS
        }
    }
}
