//! Box and map-state selectors shared across subcommands.

use std::io::Read;

use clap::{Args, ValueEnum};
use nsbox_core::{Epsilon, NsBox, PlaneCoords};

use crate::CliError;

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum BoxName {
    /// The PR box (a ^ b = xy).
    Pr,
    /// The correlated local box (a = b always).
    Pc,
    /// The anti-PR box (a ^ b = xy ^ 1).
    AntiPr,
    /// The anti-correlated local box (a != b always).
    Pa,
    /// The fully mixed box.
    One,
}

/// Selects a box by name, parameter, plane coordinates or file.
#[derive(Args, Debug)]
pub struct BoxSel {
    /// Named box.
    #[arg(long, value_enum)]
    pub name: Option<BoxName>,
    /// Correlated box parameter in [0, 1].
    #[arg(long)]
    pub eps: Option<f64>,
    /// Plane coordinate: weight of PR.
    #[arg(long, requires = "gamma")]
    pub xi: Option<f64>,
    /// Plane coordinate: weight of Pc (anti-PR gets 1 - xi - gamma).
    #[arg(long, allow_negative_numbers = true, requires = "xi")]
    pub gamma: Option<f64>,
    /// Read the box from a JSON or CSV file; '-' reads standard input.
    #[arg(long = "box", value_name = "PATH")]
    pub file: Option<String>,
}

impl BoxSel {
    pub fn resolve(&self) -> Result<NsBox, CliError> {
        let mut picked = 0;
        picked += usize::from(self.name.is_some());
        picked += usize::from(self.eps.is_some());
        picked += usize::from(self.xi.is_some());
        picked += usize::from(self.file.is_some());
        if picked != 1 {
            return Err(CliError::Domain(
                "select exactly one of --name, --eps, --xi/--gamma, --box".into(),
            ));
        }
        if let Some(name) = self.name {
            return Ok(match name {
                BoxName::Pr => NsBox::pr(),
                BoxName::Pc => NsBox::pc(),
                BoxName::AntiPr => NsBox::anti_pr(),
                BoxName::Pa => NsBox::pa(),
                BoxName::One => NsBox::fully_mixed(),
            });
        }
        if let Some(e) = self.eps {
            return Ok(NsBox::correlated(Epsilon::new(e)?));
        }
        if let (Some(xi), Some(gamma)) = (self.xi, self.gamma) {
            return Ok(NsBox::from_plane(PlaneCoords::new(xi, gamma))?);
        }
        read_box(self.file.as_deref().expect("file selector"))
    }
}

/// Reads a box table from a path or standard input, accepting the JSON
/// object form or a CSV line of 16 floats.
pub fn read_box(path: &str) -> Result<NsBox, CliError> {
    let raw = if path == "-" {
        let mut buf = String::new();
        std::io::stdin()
            .read_to_string(&mut buf)
            .map_err(|e| CliError::Internal(format!("reading stdin: {e}")))?;
        buf
    } else {
        std::fs::read_to_string(path)
            .map_err(|e| CliError::Domain(format!("reading {path}: {e}")))?
    };
    let trimmed = raw.trim();
    let b = if trimmed.starts_with('{') {
        NsBox::from_json(trimmed)?
    } else {
        NsBox::from_csv_line(trimmed)?
    };
    if !b.is_valid() {
        return Err(CliError::Domain(format!(
            "box from {path} violates normalization or non-negativity"
        )));
    }
    Ok(b)
}

/// Selects a 1-D or 2-D map state.
#[derive(Args, Debug)]
pub struct StateSel {
    /// Correlated box parameter in [0, 1] (1-D map).
    #[arg(long)]
    pub eps: Option<f64>,
    /// Plane coordinate: weight of PR (2-D map).
    #[arg(long, requires = "gamma")]
    pub xi: Option<f64>,
    /// Plane coordinate: weight of Pc.
    #[arg(long, allow_negative_numbers = true, requires = "xi")]
    pub gamma: Option<f64>,
}

pub enum State {
    Eps(Epsilon),
    Plane(PlaneCoords),
}

impl StateSel {
    pub fn resolve(&self) -> Result<State, CliError> {
        match (self.eps, self.xi, self.gamma) {
            (Some(e), None, None) => Ok(State::Eps(Epsilon::new(e)?)),
            (None, Some(xi), Some(gamma)) => {
                let c = PlaneCoords::new(xi, gamma);
                NsBox::from_plane(c)?;
                if !c.in_constraint_region() {
                    return Err(CliError::Domain(format!(
                        "({xi}, {gamma}) is outside the section"
                    )));
                }
                Ok(State::Plane(c))
            }
            _ => Err(CliError::Domain(
                "select exactly one of --eps or --xi/--gamma".into(),
            )),
        }
    }
}
