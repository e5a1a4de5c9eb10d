//! The `roamauth` command line.
//!
//! Exit codes are part of the interface:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | handshake agreed / attack matched `--expect` / command done |
//! | 1 | handshake aborted / attack did not match `--expect` |
//! | 2 | usage or configuration error, including refused toy-curve claims |
//! | 3 | input or output file problem |
//!
//! Every command is a function of its flags and `--seed`. The deployment
//! (CA, HA and FA keys) is drawn from stream 0 of the seed and the session
//! from stream 1, so a card written by `register` fits `handshake` run with
//! the same seed and curve.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::Deserialize;

use crate::attacks::{run_attack, AttackKind, AttackOptions, Dictionary, DEFAULT_TRIALS};
use crate::crypto::{CurveProfile, Identity, Suite, SuiteConfig};
use crate::harness::cost::{published_mu_bits, published_ops, published_rounds, CostReport};
use crate::harness::matrix::functionality_matrix;
use crate::harness::scenario::BatchConfig;
use crate::harness::{
    run_proposed, run_session, HarnessError, Hook, Outcome, ProposedWorld, Scenario, SchemeId,
    SessionRun, TamperHook, DEFAULT_PASSWORD, DEFAULT_USER,
};
use crate::proposed::{self, MobileUser, SmartCard};

pub const CONFIG_ENV: &str = "ROAMAUTH_CONFIG";

#[derive(Parser, Debug)]
#[command(
    name = "roamauth",
    version,
    about = "Roaming authentication protocols, attacks and cost reports"
)]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone, Default)]
pub struct Common {
    /// Curve profile: toy (order 997) or p256.
    #[arg(long, global = true)]
    pub curve: Option<CurveProfile>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// TOML file with default values for these flags.
    #[arg(long, global = true, env = CONFIG_ENV)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Allow security claims on the toy curve.
    #[arg(long, global = true)]
    pub allow_toy: bool,
    /// Overwrite existing output files.
    #[arg(long, global = true)]
    pub force: bool,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Expect {
    Success,
    Failure,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Register a user with the home agent and write the smart card.
    Register {
        #[arg(long, default_value = DEFAULT_USER)]
        id: String,
        #[arg(long)]
        password: String,
        /// Card file to write.
        #[arg(long)]
        out: PathBuf,
    },
    /// Change the password stored on a card, offline.
    Passwd {
        #[arg(long)]
        card: PathBuf,
        #[arg(long, default_value = DEFAULT_USER)]
        id: String,
        #[arg(long)]
        password: String,
        #[arg(long)]
        new_password: String,
    },
    /// Run one scenario and write its transcript and cost report.
    Handshake {
        #[arg(long)]
        scheme: Option<SchemeId>,
        #[arg(long)]
        scenario: Option<Scenario>,
        /// Use this card instead of registering a fresh user (proposed only).
        #[arg(long)]
        card: Option<PathBuf>,
        #[arg(long, default_value = DEFAULT_USER)]
        id: String,
        #[arg(long)]
        password: Option<String>,
        /// Flip a bit in the frame sent at this step.
        #[arg(long)]
        tamper: Option<usize>,
        /// Directory for transcript and report files.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run one attack and print its outcome.
    Attack {
        #[arg(long)]
        attack: AttackKind,
        #[arg(long)]
        scheme: Option<SchemeId>,
        #[arg(long, value_enum)]
        expect: Option<Expect>,
        /// Candidate passwords, one per line (`hex:` for binary ones).
        #[arg(long)]
        dict: Option<PathBuf>,
        /// Grant the discrete log oracle (toy curve only).
        #[arg(long)]
        oracle: bool,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare stored cost reports with the published tables and measure the
    /// functionality matrix.
    Report {
        /// Directory holding `*.cost.json` files from `handshake --out`.
        #[arg(long)]
        runs: PathBuf,
        #[arg(long)]
        trials: Option<usize>,
        /// Directory for the comparison files; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run every entry of a batch file.
    Batch {
        file: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Defaults read from the config file. Command line flags win.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub curve: Option<CurveProfile>,
    pub seed: Option<u64>,
    pub scheme: Option<SchemeId>,
    pub scenario: Option<Scenario>,
    pub format: Option<Format>,
    pub dict: Option<PathBuf>,
    pub trials: Option<usize>,
}

/// Resolved settings shared by every command.
#[derive(Debug, Clone)]
pub struct CliConfig {
    pub curve: CurveProfile,
    pub seed: u64,
    pub scheme: SchemeId,
    pub scenario: Scenario,
    pub format: Format,
    pub dict: Option<PathBuf>,
    pub trials: usize,
    pub allow_toy: bool,
    pub force: bool,
}

impl CliConfig {
    pub fn resolve(common: &Common, file: FileConfig) -> Self {
        CliConfig {
            curve: common.curve.or(file.curve).unwrap_or_default(),
            seed: common.seed.or(file.seed).unwrap_or(0),
            scheme: file.scheme.unwrap_or(SchemeId::Proposed),
            scenario: file.scenario.unwrap_or(Scenario::ForeignAuth),
            format: common.format.or(file.format).unwrap_or_default(),
            dict: file.dict,
            trials: file.trials.unwrap_or(DEFAULT_TRIALS),
            allow_toy: common.allow_toy,
            force: common.force,
        }
    }

    fn suite(&self) -> Result<Suite, Failure> {
        Suite::new(SuiteConfig::with_curve(self.curve)).map_err(|e| Failure::Usage(e.to_string()))
    }

    fn rng(&self, stream: u64) -> ChaCha20Rng {
        let mut rng = ChaCha20Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        rng
    }
}

enum Failure {
    /// Exit 1 with this message.
    Negative(String),
    Usage(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Negative(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Io(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Negative(m) | Failure::Usage(m) | Failure::Io(m) => m,
        }
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure::Io(format!("{}: {e}", path.display()))
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| io_err(path, e))
}

fn write_new(path: &Path, data: &[u8], force: bool) -> Result<(), Failure> {
    if path.exists() && !force {
        return Err(Failure::Io(format!(
            "{} exists; pass --force to overwrite",
            path.display()
        )));
    }
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    }
    fs::write(path, data).map_err(|e| io_err(path, e))
}

fn emit(out: Option<&Path>, text: &str, force: bool) -> Result<(), Failure> {
    match out {
        Some(p) => write_new(p, text.as_bytes(), force),
        None => {
            let mut so = std::io::stdout().lock();
            let _ = so.write_all(text.as_bytes());
            if !text.ends_with('\n') {
                let _ = so.write_all(b"\n");
            }
            Ok(())
        }
    }
}

fn identity(label: &str) -> Result<Identity, Failure> {
    Identity::from_label(label).map_err(|e| Failure::Usage(format!("--id: {e}")))
}

fn load_card(suite: &Suite, path: &Path) -> Result<SmartCard, Failure> {
    SmartCard::from_json(suite.curve(), &read(path)?).map_err(|e| io_err(path, e))
}

fn deployment(cfg: &CliConfig, suite: &Suite) -> ProposedWorld {
    ProposedWorld::generate(suite, &mut cfg.rng(0))
}

fn cmd_register(cfg: &CliConfig, id: &str, password: &str, out: &Path) -> Result<(), Failure> {
    if cfg.scheme != SchemeId::Proposed {
        return Err(Failure::Usage(
            "card files exist for the proposed scheme only".into(),
        ));
    }
    let suite = cfg.suite()?;
    let world = deployment(cfg, &suite);
    let mu = world.register_quiet(&suite, identity(id)?, password.as_bytes(), &mut cfg.rng(1));
    write_new(out, mu.card.to_json().as_bytes(), cfg.force)?;
    eprintln!("card written to {}", out.display());
    Ok(())
}

fn cmd_passwd(
    cfg: &CliConfig,
    card: &Path,
    id: &str,
    password: &str,
    new: &str,
) -> Result<(), Failure> {
    let suite = cfg.suite()?;
    let mu = MobileUser {
        id: identity(id)?,
        password: password.as_bytes().to_vec(),
        card: load_card(&suite, card)?,
    };
    let updated = proposed::password_change(&suite.engine(), &mu, new.as_bytes(), &mut cfg.rng(1))
        .map_err(|e| Failure::Negative(format!("password change refused: {e}")))?;
    write_new(card, updated.to_json().as_bytes(), true)
}

fn session(
    cfg: &CliConfig,
    card: Option<&Path>,
    id: &str,
    password: Option<&str>,
    hook: Option<&mut dyn Hook>,
) -> Result<SessionRun, Failure> {
    let suite = cfg.suite()?;
    let harness = |e: HarnessError| Failure::Usage(e.to_string());
    match (cfg.scheme, card) {
        (SchemeId::Mun, Some(_)) => Err(Failure::Usage(
            "--card applies to the proposed scheme only".into(),
        )),
        (SchemeId::Mun, None) => {
            run_session(&suite, SchemeId::Mun, cfg.scenario, &mut cfg.rng(1), hook).map_err(harness)
        }
        (SchemeId::Proposed, _) if cfg.scenario == Scenario::Registration => run_session(
            &suite,
            SchemeId::Proposed,
            Scenario::Registration,
            &mut cfg.rng(1),
            hook,
        )
        .map_err(harness),
        (SchemeId::Proposed, _) => {
            let world = deployment(cfg, &suite);
            let mut rng = cfg.rng(1);
            let mu = match card {
                Some(path) => {
                    let card = load_card(&suite, path)?;
                    if card.c != world.ha.c_pub() || card.id_ha != world.ha.id() {
                        return Err(Failure::Usage(format!(
                            "{} was issued by a different home agent; use the --seed and --curve given to register",
                            path.display()
                        )));
                    }
                    let pw = password.ok_or_else(|| {
                        Failure::Usage("--password is required with --card".into())
                    })?;
                    MobileUser {
                        id: identity(id)?,
                        password: pw.as_bytes().to_vec(),
                        card,
                    }
                }
                None => {
                    let pw = password.map(str::as_bytes).unwrap_or(DEFAULT_PASSWORD);
                    world.register_quiet(&suite, identity(id)?, pw, &mut rng)
                }
            };
            Ok(run_proposed(
                &suite,
                &world,
                &mu,
                cfg.scenario,
                &mut rng,
                hook,
            ))
        }
    }
}

fn cmd_handshake(
    cfg: &CliConfig,
    card: Option<&Path>,
    id: &str,
    password: Option<&str>,
    tamper: Option<usize>,
    out: Option<&Path>,
) -> Result<(), Failure> {
    let mut hook = tamper.map(|step| TamperHook { step });
    let run = session(
        cfg,
        card,
        id,
        password,
        hook.as_mut().map(|h| h as &mut dyn Hook),
    )?;
    if let Some(dir) = out {
        let stem = format!(
            "{}-{}-{}",
            cfg.scheme,
            cfg.scenario.to_string().replace(':', "-"),
            cfg.seed
        );
        let file = |ext: &str| dir.join(format!("{stem}.{ext}"));
        write_new(
            &file("transcript.jsonl"),
            run.transcript.to_jsonl().as_bytes(),
            cfg.force,
        )?;
        write_new(
            &file("transcript.bin"),
            &run.transcript.to_binary(),
            cfg.force,
        )?;
        write_new(
            &file("cost.json"),
            run.report.to_json().as_bytes(),
            cfg.force,
        )?;
        write_new(&file("cost.csv"), run.report.to_csv().as_bytes(), cfg.force)?;
    }
    let summary = serde_json::json!({
        "scheme": cfg.scheme,
        "scenario": cfg.scenario,
        "curve": cfg.curve,
        "seed": cfg.seed,
        "rounds": run.report.rounds,
        "mu_bits": run.report.mu_bits,
        "outcome": run.outcome,
    });
    let text = match cfg.format {
        Format::Json => serde_json::to_string_pretty(&summary).expect("summary serializes"),
        Format::Csv => run.report.to_csv(),
    };
    emit(None, &text, false)?;
    match &run.outcome {
        Outcome::Aborted {
            party,
            code,
            reason,
        } => Err(Failure::Negative(format!(
            "aborted by {party} (code {code}): {reason}"
        ))),
        o if !o.is_success() => Err(Failure::Negative("session keys differ".into())),
        _ => Ok(()),
    }
}

const TOY_REFUSAL: &str = "refusing --expect failure on the toy curve: its group has 997 elements, so any \
     discrete log is found by enumeration and a failed attack there says nothing about the protocol; \
     rerun on p256 or pass --allow-toy";

fn cmd_attack(
    cfg: &CliConfig,
    kind: AttackKind,
    expect: Option<Expect>,
    dict: Option<&Path>,
    oracle: bool,
    trials: Option<usize>,
    out: Option<&Path>,
) -> Result<(), Failure> {
    if cfg.curve.is_toy() && expect == Some(Expect::Failure) && !cfg.allow_toy {
        return Err(Failure::Usage(TOY_REFUSAL.into()));
    }
    let suite = cfg.suite()?;
    let dictionary = match dict.or(cfg.dict.as_deref()) {
        Some(p) => Some(Dictionary::load(p).map_err(|e| Failure::Io(e.to_string()))?),
        None => None,
    };
    let opts = AttackOptions {
        oracle,
        dictionary,
        trials: Some(trials.unwrap_or(cfg.trials)),
    };
    let outcome = run_attack(&suite, cfg.scheme, kind, &opts, &mut cfg.rng(1))
        .map_err(|e| Failure::Usage(e.to_string()))?;
    emit(out, &outcome.to_json(), cfg.force)?;
    let verdict = if outcome.succeeded {
        "succeeded"
    } else {
        "failed"
    };
    eprintln!("{kind} against {}: {verdict}", cfg.scheme);
    if outcome.succeeded && !outcome.is_sound() {
        return Err(Failure::Negative(
            "success claimed without sound evidence".into(),
        ));
    }
    match expect {
        Some(Expect::Success) if !outcome.succeeded => {
            Err(Failure::Negative("expected the attack to succeed".into()))
        }
        Some(Expect::Failure) if outcome.succeeded => {
            Err(Failure::Negative("expected the attack to fail".into()))
        }
        _ => Ok(()),
    }
}

fn load_reports(dir: &Path) -> Result<Vec<CostReport>, Failure> {
    if !dir.is_dir() {
        return Err(Failure::Io(format!(
            "run directory {} does not exist",
            dir.display()
        )));
    }
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| io_err(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.to_string_lossy().ends_with(".cost.json"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(Failure::Io(format!(
            "no *.cost.json files in {}; produce them with `roamauth handshake --out {}`",
            dir.display(),
            dir.display()
        )));
    }
    paths
        .iter()
        .map(|p| serde_json::from_str(&read(p)?).map_err(|e| io_err(p, e)))
        .collect()
}

fn communication_table(reports: &[CostReport]) -> String {
    let mut s = String::from(
        "scheme,scenario,rounds,published_rounds,mu_bits,published_mu_bits,delta,rule\n",
    );
    for r in reports {
        let foreign = r.scenario == Scenario::ForeignAuth.to_string();
        s.push_str(&format!(
            "{},{},{},{},{},{},{},\"{}\"\n",
            r.scheme,
            r.scenario,
            r.rounds,
            if foreign {
                published_rounds(r.scheme).to_string()
            } else {
                String::new()
            },
            r.mu_bits,
            if foreign {
                published_mu_bits(r.scheme).to_string()
            } else {
                String::new()
            },
            r.mu_bits_delta.map(|d| d.to_string()).unwrap_or_default(),
            r.rule_text
        ));
    }
    s
}

fn operation_table(reports: &[CostReport]) -> String {
    let mut s = String::from("scheme,role,source,add,hash,mul,esym,dsym,gsign,vsign\n");
    for r in reports
        .iter()
        .filter(|r| r.scenario == Scenario::ForeignAuth.to_string())
    {
        for row in &r.ops {
            for (source, m) in [
                ("measured", row.measured),
                ("published", published_ops(r.scheme, row.role)),
            ] {
                s.push_str(&format!(
                    "{},{},{source},{},{},{},{},{},{},{}\n",
                    r.scheme,
                    row.role,
                    m.add,
                    m.hash,
                    m.mul_label(),
                    m.esym,
                    m.dsym,
                    m.gsign,
                    m.vsign
                ));
            }
        }
    }
    s
}

fn cmd_report(
    cfg: &CliConfig,
    runs: &Path,
    trials: Option<usize>,
    out: Option<&Path>,
) -> Result<(), Failure> {
    let reports = load_reports(runs)?;
    let suite = cfg.suite()?;
    if cfg.curve.is_toy() {
        eprintln!("note: toy curve; attack rows measure a group small enough to enumerate");
    }
    let matrix = functionality_matrix(&suite, cfg.seed, trials.unwrap_or(cfg.trials))
        .map_err(|e| Failure::Usage(e.to_string()))?;
    let files: Vec<(&str, String)> = match cfg.format {
        Format::Csv => vec![
            ("communication.csv", communication_table(&reports)),
            ("operations.csv", operation_table(&reports)),
            ("functionality.csv", matrix.to_csv()),
        ],
        Format::Json => vec![
            (
                "costs.json",
                serde_json::to_string_pretty(&reports).expect("reports serialize"),
            ),
            ("functionality.json", matrix.to_json()),
        ],
    };
    for (name, text) in &files {
        match out {
            Some(dir) => write_new(&dir.join(name), text.as_bytes(), cfg.force)?,
            None => emit(None, &format!("# {name}\n{text}"), false)?,
        }
    }
    for (row, scheme) in matrix.mismatches() {
        eprintln!("mismatch: {scheme} / {row}");
    }
    Ok(())
}

fn cmd_batch(cfg: &CliConfig, file: &Path, out: Option<&Path>) -> Result<(), Failure> {
    let batch = BatchConfig::from_toml_str(&read(file)?)
        .map_err(|e| Failure::Usage(format!("{}: {e}", file.display())))?;
    let suite = Suite::new(SuiteConfig::with_curve(batch.curve))
        .map_err(|e| Failure::Usage(e.to_string()))?;
    let results = batch
        .execute(&suite)
        .map_err(|e| Failure::Usage(e.to_string()))?;
    let mut failed = 0;
    let mut lines = String::new();
    for r in &results {
        failed += usize::from(!r.run.outcome.is_success());
        let line = serde_json::json!({
            "entry": r.entry,
            "seed": r.seed,
            "scheme": r.scheme,
            "scenario": r.scenario,
            "rounds": r.run.report.rounds,
            "mu_bits": r.run.report.mu_bits,
            "outcome": r.run.outcome,
        });
        lines.push_str(&line.to_string());
        lines.push('\n');
    }
    emit(out, &lines, cfg.force)?;
    if failed > 0 {
        return Err(Failure::Negative(format!(
            "{failed} of {} runs failed",
            results.len()
        )));
    }
    Ok(())
}

fn file_config(common: &Common) -> Result<FileConfig, Failure> {
    match &common.config {
        Some(p) => {
            toml::from_str(&read(p)?).map_err(|e| Failure::Usage(format!("{}: {e}", p.display())))
        }
        None => Ok(FileConfig::default()),
    }
}

fn dispatch(cli: Cli) -> Result<(), Failure> {
    let mut cfg = CliConfig::resolve(&cli.common, file_config(&cli.common)?);
    match cli.command {
        Command::Register { id, password, out } => cmd_register(&cfg, &id, &password, &out),
        Command::Passwd {
            card,
            id,
            password,
            new_password,
        } => cmd_passwd(&cfg, &card, &id, &password, &new_password),
        Command::Handshake {
            scheme,
            scenario,
            card,
            id,
            password,
            tamper,
            out,
        } => {
            cfg.scheme = scheme.unwrap_or(cfg.scheme);
            cfg.scenario = scenario.unwrap_or(cfg.scenario);
            cmd_handshake(
                &cfg,
                card.as_deref(),
                &id,
                password.as_deref(),
                tamper,
                out.as_deref(),
            )
        }
        Command::Attack {
            attack,
            scheme,
            expect,
            dict,
            oracle,
            trials,
            out,
        } => {
            cfg.scheme = scheme.unwrap_or(cfg.scheme);
            cmd_attack(
                &cfg,
                attack,
                expect,
                dict.as_deref(),
                oracle,
                trials,
                out.as_deref(),
            )
        }
        Command::Report { runs, trials, out } => cmd_report(&cfg, &runs, trials, out.as_deref()),
        Command::Batch { file, out } => cmd_batch(&cfg, &file, out.as_deref()),
    }
}

/// Entry point for the binary.
pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("roamauth: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
