//! Least-squares analysis of measurement data.
//!
//! * [`linear`]: straight-line fits (resistance chains, loss per bridge).
//! * [`resistance`]: the geometric ratio of a bridge unit and the resistivity
//!   fit across units.
//! * [`notch`]: side-coupled resonator transmission and its fit.
//! * [`tls`]: power-dependent TLS loss and photon number.
//! * [`lm`]: the damped Gauss–Newton solver behind the nonlinear fits.

pub mod linear;
pub mod lm;
pub mod notch;
pub mod resistance;
pub mod tls;

use std::io::Read;

pub use linear::{linear_fit, LinearFit};
pub use notch::{fit_notch, notch_s21, NotchFitResult, NotchModel};
pub use resistance::{fit_resistivity, geometric_ratio, Dims, ResistivityFit, UnitGeometry};
pub use tls::{fit_tls, photon_number, tls_loss, TlsFitResult, TlsParams};

use crate::error::{Error, Result};

/// Reads a CSV with exactly the given header and all-numeric columns.
pub fn read_columns<R: Read>(reader: R, header: &[&str]) -> Result<Vec<Vec<f64>>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let found = rdr.headers()?.clone();
    if found.len() != header.len() || found.iter().zip(header).any(|(a, b)| a != *b) {
        return Err(Error::Field {
            field: "header".into(),
            message: format!(
                "expected `{}`, found `{}`",
                header.join(","),
                found.iter().collect::<Vec<_>>().join(",")
            ),
        });
    }
    let mut rows = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record?;
        let row = record
            .iter()
            .zip(header)
            .map(|(v, name)| {
                v.parse::<f64>().map_err(|_| Error::Field {
                    field: format!("row {}, column `{name}`", i + 2),
                    message: format!("`{v}` is not a number"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    Ok(rows)
}
