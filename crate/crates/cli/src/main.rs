use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use ktc_cli::{commands, format, report};
use ktc_core::gft::GroupSpec;
use ktc_core::matrix::RingTag;

/// Desk-scale checks for exact and Waldhausen categories, K0,
/// simplicial cohomology, group-field round trips, brane classification
/// and virtual-dimension bookkeeping.
#[derive(Parser)]
#[command(name = "ktc", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Input description file.
    #[arg(long, global = true, default_value = "-")]
    input: String,

    /// S-construction level.
    #[arg(long, global = true, default_value_t = 2)]
    level: usize,

    /// Nerve truncation level.
    #[arg(long, global = true, default_value_t = 3)]
    truncate: usize,

    /// Coefficient ring: z or zmod:<p>.
    #[arg(long, global = true, default_value = "z")]
    ring: String,

    /// Group for field expansions: cyclic:<N> or circle:<N>.
    #[arg(long, global = true, default_value = "cyclic:2")]
    group: String,

    /// Report format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Human)]
    format: Format,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Human,
    Machine,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Check the category axioms of every category block.
    CheckCategory,
    /// Check the exact-structure axioms of every exact block.
    CheckExact,
    /// Check Waldhausen axioms (declared blocks and converted exact blocks).
    CheckWaldhausen,
    /// Build the S-construction at --level over each structure.
    SConstruct,
    /// Build the nerve of each category block up to --truncate.
    Nerve,
    /// Compute the Grothendieck group of each exact block.
    K0,
    /// Compute cohomology of each complex block over --ring.
    Cohomology,
    /// Solve the potential sequence for each declared cochain.
    Potential,
    /// Barycentrically refine each complex block.
    Refine,
    /// Compare the first two complex blocks for invariant preservation.
    TheoremCheck,
    /// Decompose and reconstruct each field block over --group.
    GftRoundtrip,
    /// Classify the gauge group of each branes block.
    BranesClassify,
    /// Compute H^3 twist classes of degree-3 cochains.
    TwistClass,
    /// Evaluate virtual dimensions and emerge discrete branes.
    Pndp,
}

impl Command {
    fn kind(self) -> commands::CommandKind {
        use commands::CommandKind as K;
        match self {
            Command::CheckCategory => K::CheckCategory,
            Command::CheckExact => K::CheckExact,
            Command::CheckWaldhausen => K::CheckWaldhausen,
            Command::SConstruct => K::SConstruct,
            Command::Nerve => K::Nerve,
            Command::K0 => K::K0,
            Command::Cohomology => K::Cohomology,
            Command::Potential => K::Potential,
            Command::Refine => K::Refine,
            Command::TheoremCheck => K::TheoremCheck,
            Command::GftRoundtrip => K::GftRoundtrip,
            Command::BranesClassify => K::BranesClassify,
            Command::TwistClass => K::TwistClass,
            Command::Pndp => K::Pndp,
        }
    }
}

fn parse_group(s: &str) -> Result<GroupSpec, String> {
    let (kind, n) = s
        .split_once(':')
        .ok_or_else(|| format!("expected cyclic:<N> or circle:<N>, got {s}"))?;
    let n: usize = n.parse().map_err(|_| format!("bad group size in {s}"))?;
    match kind {
        "cyclic" => GroupSpec::cyclic(n).map_err(|e| e.to_string()),
        "circle" => GroupSpec::circle(n).map_err(|e| e.to_string()),
        other => Err(format!("unknown group kind {other}")),
    }
}

fn run() -> Result<i32, (String, i32)> {
    let cli = Cli::parse();
    let ring: RingTag =
        format::parse_ring(&cli.ring).map_err(|e| (format!("--ring: {e}"), 2))?;
    let group = parse_group(&cli.group).map_err(|e| (format!("--group: {e}"), 2))?;
    let text = if cli.input == "-" {
        use std::io::Read;
        let mut buf = String::new();
        std::io::stdin()
            .read_to_string(&mut buf)
            .map_err(|e| (format!("reading stdin: {e}"), 2))?;
        buf
    } else {
        std::fs::read_to_string(&cli.input)
            .map_err(|e| (format!("reading {}: {e}", cli.input), 2))?
    };
    let doc = format::parse_document(&text).map_err(|e| (e.to_string(), 2))?;
    let opts = commands::Options {
        level: cli.level,
        truncate: cli.truncate,
        ring,
        group,
    };
    let rep = commands::run_command(cli.command.kind(), &opts, &doc)
        .map_err(|e| (e.to_string(), 2))?;
    let fmt = match cli.format {
        Format::Human => report::ReportFormat::Human,
        Format::Machine => report::ReportFormat::Machine,
    };
    print!("{}", rep.render(fmt));
    Ok(rep.exit_code())
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code as u8),
        Err((message, code)) => {
            eprintln!("ktc: {message}");
            ExitCode::from(code as u8)
        }
    }
}
