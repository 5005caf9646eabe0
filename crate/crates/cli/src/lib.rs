//! Command-line front end: parse a structure function from a config file,
//! `DBARG_*` environment variables and flags, run one pipeline and write a
//! deterministic JSON report plus optional CSV samples.

pub mod commands;
pub mod config;
pub mod report;

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use config::{Command, Layer, RunConfig};

/// Exit status when every check passes.
pub const EXIT_OK: i32 = 0;
/// At least one check failed; the first failure is named on stderr.
pub const EXIT_CHECK_FAILED: i32 = 1;
/// Bad configuration or usage.
pub const EXIT_CONFIG: i32 = 2;
/// The report or CSV could not be written.
pub const EXIT_IO: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "dbarg", version, about = "Deformed oscillator algebras: classification, coherent states, Bargmann weights")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Option<Cmd>,

    #[command(flatten)]
    pub opts: Opts,
}

#[derive(Subcommand, Debug, Clone, Copy)]
pub enum Cmd {
    /// Spectrum of N and coherent-state domain
    Classify,
    /// Coherent-state domain with norm, kernel and eigenvector checks
    Domain,
    /// Solve for the Bargmann weight; CSV (x,F) or (x_k,w_k)
    Weight,
    /// Truncated algebra, moments, resolution of identity, recursion
    Verify,
    /// Reproducing kernel G(u) on a real grid; CSV (u,Re G,Im G)
    Kernel,
    /// Everything above in one report, weight samples as CSV
    Export,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Command {
        match c {
            Cmd::Classify => Command::Classify,
            Cmd::Domain => Command::Domain,
            Cmd::Weight => Command::Weight,
            Cmd::Verify => Command::Verify,
            Cmd::Kernel => Command::Kernel,
            Cmd::Export => Command::Export,
        }
    }
}

/// Every option is also a config-file key and a `DBARG_*` variable.
#[derive(Args, Debug, Default)]
pub struct Opts {
    /// Flat `key = value` config file
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// affine, qlinear, qinverse, shiftexp, qosc, qosc1, explog, qbracket, qparen, poly
    #[arg(long, global = true)]
    pub family: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub q: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub sigma: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub lambda_minus: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub lambda_plus: Option<String>,
    /// Additive constant of the q-linear family
    #[arg(long = "const", global = true, allow_hyphen_values = true)]
    pub constant: Option<String>,
    /// Coefficient list, ascending powers: `0,0,0,1` or `[0,0,0,1]`
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub coeffs: Option<String>,
    /// `a` of `a + q^x`
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub a: Option<String>,
    /// Representation label in [0, 1)
    #[arg(long, global = true)]
    pub mu: Option<String>,
    /// Truncation dimension of the matrix checks
    #[arg(long, global = true)]
    pub dim: Option<String>,
    /// Lowest basis index when the spectrum has no edge
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub offset: Option<String>,
    /// Override the default check tolerances
    #[arg(long, global = true)]
    pub tol: Option<String>,
    /// JSON report path (stdout if absent)
    #[arg(long, global = true)]
    pub out: Option<String>,
    /// CSV samples path
    #[arg(long, global = true)]
    pub csv: Option<String>,
    #[arg(long, global = true)]
    pub x_min: Option<String>,
    #[arg(long, global = true)]
    pub x_max: Option<String>,
    /// Grid size of weight and kernel samples
    #[arg(long, global = true)]
    pub points: Option<String>,
    /// Highest moment index checked
    #[arg(long, global = true)]
    pub n_max: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub u_min: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub u_max: Option<String>,
}

impl Opts {
    fn layer(&self) -> Layer {
        let mut l = Layer::default();
        let flags: [(&str, &Option<String>); 20] = [
            ("family", &self.family),
            ("q", &self.q),
            ("sigma", &self.sigma),
            ("lambda-minus", &self.lambda_minus),
            ("lambda-plus", &self.lambda_plus),
            ("const", &self.constant),
            ("coeffs", &self.coeffs),
            ("a", &self.a),
            ("mu", &self.mu),
            ("dim", &self.dim),
            ("offset", &self.offset),
            ("tol", &self.tol),
            ("out", &self.out),
            ("csv", &self.csv),
            ("x-min", &self.x_min),
            ("x-max", &self.x_max),
            ("points", &self.points),
            ("n-max", &self.n_max),
            ("u-min", &self.u_min),
            ("u-max", &self.u_max),
        ];
        for (k, v) in flags {
            l.set_flag(k, v.as_deref());
        }
        l
    }
}

/// Merge file, environment and flags (in increasing precedence) and validate.
pub fn resolve<E>(cli: &Cli, env: E) -> Result<RunConfig, config::ConfigError>
where
    E: IntoIterator<Item = (String, String)>,
{
    let file = match &cli.opts.config {
        Some(p) => Layer::parse_file(p)?,
        None => Layer::default(),
    };
    let merged = file.overlay(Layer::from_env(env)?).overlay(cli.opts.layer());
    RunConfig::from_layer(&merged, cli.command.map(Command::from))
}

fn write_file(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> std::io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    f(&mut w)?;
    w.flush()
}

/// Run the CLI; returns the process exit status.
pub fn run<I, T, E>(args: I, env: E, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
    E: IntoIterator<Item = (String, String)>,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { stderr.write_all(text.as_bytes()) } else { stdout.write_all(text.as_bytes()) };
            return code;
        }
    };
    let cfg = match resolve(&cli, env) {
        Ok(c) => c,
        Err(e) => {
            let _ = writeln!(stderr, "dbarg: {e}");
            return EXIT_CONFIG;
        }
    };
    let outcome = commands::run(&cfg);
    let json = outcome.report.to_json();
    let written = match &cfg.out {
        Some(p) => write_file(p, |w| w.write_all(json.as_bytes())),
        None => stdout.write_all(json.as_bytes()),
    };
    if let Err(e) = written {
        let _ = writeln!(stderr, "dbarg: cannot write report: {e}");
        return EXIT_IO;
    }
    if let Some(path) = &cfg.csv {
        match &outcome.table {
            Some(t) => {
                if let Err(e) = write_file(path, |w| t.write(w)) {
                    let _ = writeln!(stderr, "dbarg: cannot write {}: {e}", path.display());
                    return EXIT_IO;
                }
            }
            None => {
                let _ = writeln!(stderr, "dbarg: no samples to write for `{}`", cfg.command.name());
            }
        }
    }
    match &outcome.report.first_failure {
        None => EXIT_OK,
        Some(f) => {
            let _ = writeln!(stderr, "dbarg: check failed: {f}");
            EXIT_CHECK_FAILED
        }
    }
}
