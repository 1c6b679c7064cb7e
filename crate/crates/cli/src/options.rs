use kmsat::encoder::EncodeOptions;
use kmsat::formula::{Form, LiftMode, PreprocessOptions};
use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Bnf,
    Nnf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Lift {
    #[default]
    No,
    Yes,
    Ctrl,
}

/// The option matrix of one run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunOptions {
    pub format: Format,
    pub lift: Lift,
    pub plr: bool,
    pub bcp: bool,
    pub simplify: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { format: Format::Bnf, lift: Lift::No, plr: false, bcp: false, simplify: true }
    }
}

impl RunOptions {
    pub fn preprocess(&self) -> PreprocessOptions {
        PreprocessOptions {
            format: match self.format {
                Format::Bnf => Form::Bnf,
                Format::Nnf => Form::Nnf,
            },
            lift: match self.lift {
                Lift::No => LiftMode::NoLift,
                Lift::Yes => LiftMode::Lift,
                Lift::Ctrl => LiftMode::CtrlLift,
            },
            simplify: self.simplify,
        }
    }

    pub fn encode(&self) -> EncodeOptions {
        EncodeOptions { plr: self.plr, bcp: self.bcp, ..Default::default() }
    }

    /// The 12 combinations format x lift x plr-bcp, simplification on.
    pub fn matrix() -> Vec<RunOptions> {
        let mut out = Vec::new();
        for format in [Format::Bnf, Format::Nnf] {
            for lift in [Lift::No, Lift::Yes, Lift::Ctrl] {
                for both in [false, true] {
                    out.push(RunOptions { format, lift, plr: both, bcp: both, simplify: true });
                }
            }
        }
        out
    }
}

impl fmt::Display for RunOptions {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let format = match self.format {
            Format::Bnf => "bnf",
            Format::Nnf => "nnf",
        };
        let lift = match self.lift {
            Lift::No => "no",
            Lift::Yes => "lift",
            Lift::Ctrl => "ctrl",
        };
        write!(f, "{format}/{lift}")?;
        if self.plr {
            write!(f, "/plr")?;
        }
        if self.bcp {
            write!(f, "/bcp")?;
        }
        if !self.simplify {
            write!(f, "/nosimp")?;
        }
        Ok(())
    }
}

/// Option flags shared by `encode`, `solve` and `bench`.
#[derive(Debug, Clone, Copy, Default, clap::Args)]
pub struct OptionFlags {
    #[arg(long, value_enum, default_value_t = Format::Bnf)]
    pub format: Format,
    #[arg(long, value_enum, default_value_t = Lift::No)]
    pub lift: Lift,
    /// Pure literal reduction during encoding.
    #[arg(long)]
    pub plr: bool,
    /// Boolean constraint propagation during encoding.
    #[arg(long)]
    pub bcp: bool,
    /// Both --plr and --bcp.
    #[arg(long = "plr-bcp")]
    pub plr_bcp: bool,
    /// Skip Boolean simplification in preprocessing.
    #[arg(long = "no-simplify")]
    pub no_simplify: bool,
}

impl From<OptionFlags> for RunOptions {
    fn from(f: OptionFlags) -> Self {
        RunOptions {
            format: f.format,
            lift: f.lift,
            plr: f.plr || f.plr_bcp,
            bcp: f.bcp || f.plr_bcp,
            simplify: !f.no_simplify,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_has_twelve_distinct_entries() {
        let m = RunOptions::matrix();
        let set: std::collections::HashSet<_> = m.iter().collect();
        assert_eq!((m.len(), set.len()), (12, 12));
        assert_eq!(m[3].to_string(), "bnf/lift/plr/bcp");
    }

    #[test]
    fn flags_sugar() {
        let flags = OptionFlags { plr_bcp: true, no_simplify: true, ..Default::default() };
        let o = RunOptions::from(flags);
        assert!(o.plr && o.bcp && !o.simplify);
    }

    #[test]
    fn toml_defaults() {
        let o: RunOptions = toml::from_str("lift = \"ctrl\"\nbcp = true").unwrap();
        assert_eq!(o, RunOptions { lift: Lift::Ctrl, bcp: true, ..Default::default() });
        assert!(toml::from_str::<RunOptions>("colour = 1").is_err());
    }
}
