//! Dense spectra of preconditioned operators for plotting.

use std::path::Path;

use clap::ValueEnum;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use symtoep::spectral::{
    preconditioned_spectrum_general, preconditioned_spectrum_spd, write_spectrum, DENSE_EIG_CAP,
};
use symtoep::toeplitz::{flip_rows, Symmetrized};
use symtoep::{Preconditioner, ToeplitzOperator};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::runner::prepare;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SpectrumTarget {
    /// Eigenvalues of `P⁻¹ A`.
    Nonsym,
    /// Eigenvalues of `P⁻¹ Y A`.
    Symmetrized,
}

/// Eigenvalues of `P⁻¹ A` or `P⁻¹ Y A`, sorted by real then imaginary part.
/// SPD preconditioners on the symmetrized target give exactly real values.
pub fn spectrum(
    op: &ToeplitzOperator,
    p: &dyn Preconditioner,
    target: SpectrumTarget,
) -> CliResult<Vec<Complex64>> {
    check_cap(op.size())?;
    match target {
        SpectrumTarget::Nonsym => Ok(preconditioned_spectrum_general(p, op)?),
        SpectrumTarget::Symmetrized if p.is_spd() => {
            let s = flip_rows(&op.to_dense()?);
            let s = (&s + s.transpose()) * 0.5;
            let eigs = preconditioned_spectrum_spd(p, &s)?;
            Ok(eigs.into_iter().map(|l| Complex64::new(l, 0.0)).collect())
        }
        SpectrumTarget::Symmetrized => Ok(preconditioned_spectrum_general(p, &Symmetrized::new(op))?),
    }
}

fn check_cap(size: usize) -> CliResult<()> {
    if size > DENSE_EIG_CAP {
        return Err(CliError::Config(format!(
            "spectrum export needs a dense eigensolve; {size} unknowns exceed the cap of {DENSE_EIG_CAP}"
        )));
    }
    Ok(())
}

/// Writes the spectrum for the first configured size; returns the line count.
pub fn export_spectrum(cfg: &RunConfig, target: SpectrumTarget, path: &Path) -> CliResult<usize> {
    cfg.validate()?;
    let n = cfg.sizes[0];
    let unknowns = match cfg.example {
        crate::config::Example::Ex3 => n * n,
        _ => n,
    };
    check_cap(unknowns)?;
    let prepared = prepare(cfg, n)?;
    let eigs = spectrum(&prepared.instance.operator, prepared.preconditioner.as_ref(), target)?;
    write_spectrum(path, &eigs)?;
    Ok(eigs.len())
}
