use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use tf_cli::run::{run, Command, Options};
use tf_cli::Dialect;
use tf_kernel::goodness::Profile;

/// Batch checker and translator for lambda-free logical framework sources.
#[derive(Parser)]
#[command(name = "tfc", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum DialectArg {
    Tf,
    Tfk,
    Lf,
}

impl From<DialectArg> for Dialect {
    fn from(d: DialectArg) -> Dialect {
        match d {
            DialectArg::Tf => Dialect::Tf,
            DialectArg::Tfk => Dialect::Tfk,
            DialectArg::Lf => Dialect::Lf,
        }
    }
}

#[derive(clap::Args)]
struct Common {
    /// Input files (`.tft`).
    #[arg(required = true)]
    files: Vec<PathBuf>,
    /// Dialect of the input files.
    #[arg(long, value_enum, default_value = "tf")]
    dialect: DialectArg,
    /// Fuel for rewriting searches and conversion.
    #[arg(long, default_value_t = 64)]
    fuel: u64,
    /// Treat `unknown` results as failures.
    #[arg(long)]
    strict_unknown: bool,
    /// Fixture files whose declarations are loaded first.
    #[arg(long)]
    include: Vec<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check declarations, judgements and derivation scripts.
    Check {
        #[command(flatten)]
        common: Common,
    },
    /// Synthesise the kinds of the objects in `check` items.
    Synth {
        #[command(flatten)]
        common: Common,
    },
    /// Decide the equality judgements in `check` items by rewriting.
    Equal {
        #[command(flatten)]
        common: Common,
    },
    /// Translate between dialects.
    Translate {
        #[command(flatten)]
        common: Common,
        /// Target dialect.
        #[arg(long, value_enum)]
        to: DialectArg,
    },
    /// Read the traditional framework back into the lambda-free one.
    Nf {
        #[command(flatten)]
        common: Common,
    },
    /// Lift Church-typed sources into the traditional framework.
    Lift {
        #[command(flatten)]
        common: Common,
    },
    /// Fill in kind labels (Curry-typed to Church-typed).
    Label {
        #[command(flatten)]
        common: Common,
    },
    /// Erase kind labels (Church-typed to Curry-typed).
    Erase {
        #[command(flatten)]
        common: Common,
    },
    /// Check the translation roundtrips on the typing items.
    Roundtrip {
        #[command(flatten)]
        common: Common,
    },
    /// Classify the goodness of the declared theory.
    Classify {
        #[command(flatten)]
        common: Common,
    },
    /// Check the small-kind profiles.
    Profile {
        #[command(flatten)]
        common: Common,
        /// Every variable small of order at most 1 (equations allowed).
        #[arg(long, conflicts_with = "spar_omega_minus")]
        spar2: bool,
        /// Every variable small, no equations.
        #[arg(long)]
        spar_omega_minus: bool,
    },
    /// Exhaustively reduce typable objects and track the readback.
    SnProbe {
        #[command(flatten)]
        common: Common,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, common, to, profile) = match cli.command {
        Cmd::Check { common } => (Command::Check, common, None, None),
        Cmd::Synth { common } => (Command::Synth, common, None, None),
        Cmd::Equal { common } => (Command::Equal, common, None, None),
        Cmd::Translate { common, to } => (Command::Translate, common, Some(to.into()), None),
        Cmd::Nf { common } => (Command::Nf, common, None, None),
        Cmd::Lift { common } => (Command::Lift, common, None, None),
        Cmd::Label { common } => (Command::Label, common, None, None),
        Cmd::Erase { common } => (Command::Erase, common, None, None),
        Cmd::Roundtrip { common } => (Command::Roundtrip, common, None, None),
        Cmd::Classify { common } => (Command::Classify, common, None, None),
        Cmd::Profile { common, spar2, spar_omega_minus } => {
            let profile = if spar_omega_minus {
                Profile::SparOmegaMinus
            } else {
                let _ = spar2;
                Profile::SparTwo
            };
            (Command::Profile, common, None, Some(profile))
        }
        Cmd::SnProbe { common } => (Command::SnProbe, common, None, None),
    };
    let options = Options {
        command,
        dialect: common.dialect.into(),
        fuel: common.fuel,
        strict_unknown: common.strict_unknown,
        includes: common.include,
        to,
        profile,
        files: common.files,
    };
    let outcome = run(&options);
    print!("{}", outcome.stdout());
    ExitCode::from(outcome.exit.clamp(0, 255) as u8)
}
