//! Run configuration and its validation.

use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use symtoep::krylov::{MinresStopping, DEFAULT_MAXIT, DEFAULT_TOL};
use symtoep::multigrid::VCycleConfig;
use symtoep::MatvecKernel;
use symtoep::problems::{Example3Params, RhsDistribution};

use crate::error::{CliError, CliResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Example {
    Ex1,
    Ex2,
    Ex3,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SolverKind {
    Minres,
    Gmres,
    Lsqr,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum PrecondKind {
    None,
    Ar,
    AmExact,
    AmBanded,
    CircStrang,
    CircOptimal,
    CircSuperoptimal,
    CircAbsStrang,
    CircAbsOptimal,
    CircAbsSuperoptimal,
    BlockCirc,
    BlockCircAbs,
    MgA,
    MgAr,
    MgAm,
}

/// Random right-hand side of `ex1`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum RhsKind {
    /// Uniform on `[0, 1)`.
    #[default]
    Uniform,
    /// Standard normal.
    Normal,
}

impl From<RhsKind> for RhsDistribution {
    fn from(k: RhsKind) -> Self {
        match k {
            RhsKind::Uniform => RhsDistribution::Uniform,
            RhsKind::Normal => RhsDistribution::Normal,
        }
    }
}

/// MINRES stopping test.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum MinresStop {
    /// `‖r‖_{P⁻¹} ≤ tol·‖b‖` confirmed by `‖r‖₂ ≤ tol·‖b‖`.
    #[default]
    RhsScaled,
    /// `‖r_k‖_{P⁻¹}/‖r_0‖_{P⁻¹} < tol`.
    Preconditioned,
}

impl From<MinresStop> for MinresStopping {
    fn from(k: MinresStop) -> Self {
        match k {
            MinresStop::RhsScaled => MinresStopping::RhsScaled,
            MinresStop::Preconditioned => MinresStopping::Preconditioned,
        }
    }
}

/// Product kernel for one-level operators.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum MatvecChoice {
    /// `direct` for `ex1`, `fft` otherwise.
    #[default]
    Auto,
    Fft,
    /// `O(n²)` row sums; one-level examples only.
    Direct,
}

macro_rules! display_as_value_name {
    ($($t:ty),*) => {$(
        impl std::fmt::Display for $t {
            fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
                let v = self.to_possible_value().expect("no skipped variants");
                f.write_str(v.get_name())
            }
        }
    )*};
}

display_as_value_name!(Example, SolverKind, PrecondKind, RhsKind, MinresStop, MatvecChoice);

impl PrecondKind {
    /// Symmetric positive definite by construction, so usable with MINRES.
    pub fn is_spd(self) -> bool {
        use PrecondKind::*;
        matches!(
            self,
            None | Ar
                | AmExact
                | AmBanded
                | CircAbsStrang
                | CircAbsOptimal
                | CircAbsSuperoptimal
                | BlockCircAbs
                | MgAr
                | MgAm
        )
    }

    pub fn is_multigrid(self) -> bool {
        matches!(self, PrecondKind::MgA | PrecondKind::MgAr | PrecondKind::MgAm)
    }

    /// Label used in the grid table header.
    pub fn label(self) -> &'static str {
        use PrecondKind::*;
        match self {
            None => "I",
            Ar => "A_R",
            AmExact => "A_M",
            AmBanded => "A_M(band)",
            CircStrang | CircOptimal | CircSuperoptimal | BlockCirc => "C_n",
            CircAbsStrang | CircAbsOptimal | CircAbsSuperoptimal | BlockCircAbs => "|C_n|",
            MgA => "MG(A_n)",
            MgAr => "MG(A_R)",
            MgAm => "MG(A_M)",
        }
    }

    fn supported_by(self, example: Example) -> bool {
        use PrecondKind::*;
        match example {
            Example::Ex1 => !matches!(self, AmBanded | BlockCirc | BlockCircAbs),
            Example::Ex2 => !matches!(self, BlockCirc | BlockCircAbs),
            Example::Ex3 => matches!(self, None | Ar | AmExact | BlockCirc | BlockCircAbs | MgA | MgAr),
        }
    }
}

/// Multigrid settings that replace the per-example defaults.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MgOverrides {
    /// Pre- and post-smoothing sweeps (equal, so the cycle stays symmetric).
    pub sweeps: Option<usize>,
    pub omega: Option<f64>,
    pub coarsest: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub example: Example,
    /// Unknowns per axis.
    pub sizes: Vec<usize>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub d_plus: Option<f64>,
    pub d_minus: Option<f64>,
    pub e_plus: Option<f64>,
    pub e_minus: Option<f64>,
    pub solver: SolverKind,
    pub precond: PrecondKind,
    pub tol: f64,
    pub maxit: usize,
    pub seed: u64,
    pub rhs: RhsKind,
    pub minres_stop: MinresStop,
    pub matvec: MatvecChoice,
    pub mg: MgOverrides,
}

pub const DEFAULT_SEED: u64 = 1;

/// Example 2 defaults: `α = 1.5`, `(d₊, d₋) = (0.5, 1)`.
const EX2_DEFAULTS: (f64, f64, f64) = (1.5, 0.5, 1.0);

impl RunConfig {
    pub fn new(example: Example, sizes: Vec<usize>, solver: SolverKind, precond: PrecondKind) -> Self {
        Self {
            example,
            sizes,
            alpha: None,
            beta: None,
            d_plus: None,
            d_minus: None,
            e_plus: None,
            e_minus: None,
            solver,
            precond,
            tol: DEFAULT_TOL,
            maxit: DEFAULT_MAXIT,
            seed: DEFAULT_SEED,
            rhs: RhsKind::default(),
            minres_stop: MinresStop::default(),
            matvec: MatvecChoice::default(),
            mg: MgOverrides::default(),
        }
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = Some(alpha);
        self
    }

    pub fn with_beta(mut self, beta: f64) -> Self {
        self.beta = Some(beta);
        self
    }

    pub fn with_d(mut self, d_plus: f64, d_minus: f64) -> Self {
        self.d_plus = Some(d_plus);
        self.d_minus = Some(d_minus);
        self
    }

    pub fn with_e(mut self, e_plus: f64, e_minus: f64) -> Self {
        self.e_plus = Some(e_plus);
        self.e_minus = Some(e_minus);
        self
    }

    pub fn with_maxit(mut self, maxit: usize) -> Self {
        self.maxit = maxit;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_rhs(mut self, rhs: RhsKind) -> Self {
        self.rhs = rhs;
        self
    }

    pub fn with_minres_stop(mut self, stop: MinresStop) -> Self {
        self.minres_stop = stop;
        self
    }

    pub fn with_matvec(mut self, matvec: MatvecChoice) -> Self {
        self.matvec = matvec;
        self
    }

    /// Kernel actually used for `A`.
    pub fn matvec_kernel(&self) -> MatvecKernel {
        match (self.matvec, self.example) {
            (MatvecChoice::Direct, _) | (MatvecChoice::Auto, Example::Ex1) => MatvecKernel::Direct,
            _ => MatvecKernel::Fft,
        }
    }

    /// Rejects incompatible or malformed settings before any computation.
    pub fn validate(&self) -> CliResult<()> {
        let fail = |msg: String| Err(CliError::Config(msg));
        if self.sizes.is_empty() {
            return fail("at least one size is required".into());
        }
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return fail(format!("tolerance {} must lie in (0, 1)", self.tol));
        }
        if self.maxit == 0 {
            return fail("maxit must be positive".into());
        }
        if self.solver == SolverKind::Minres && !self.precond.is_spd() {
            return fail(format!(
                "MINRES needs a symmetric positive definite preconditioner; {} is not",
                self.precond
            ));
        }
        if !self.precond.supported_by(self.example) {
            return fail(format!("preconditioner {} is not available for {}", self.precond, self.example));
        }
        if self.matvec == MatvecChoice::Direct && self.example == Example::Ex3 {
            return fail("the direct product needs a one-level example".into());
        }
        let given = |v: Option<f64>| v.is_some();
        match self.example {
            Example::Ex1 => {
                if [self.alpha, self.beta, self.d_plus, self.d_minus, self.e_plus, self.e_minus]
                    .into_iter()
                    .any(given)
                {
                    return fail("ex1 takes no model parameters".into());
                }
            }
            Example::Ex2 => {
                if [self.beta, self.e_plus, self.e_minus].into_iter().any(given) {
                    return fail("ex2 takes only --alpha, --dplus and --dminus".into());
                }
                let (alpha, d_plus, d_minus) = self.example2_params();
                if !(alpha > 1.0 && alpha < 2.0) {
                    return fail(format!("alpha {alpha} must lie in (1, 2)"));
                }
                check_weights("d", d_plus, d_minus)?;
            }
            Example::Ex3 => {
                let p = self.example3_params();
                for (name, v) in [("alpha", p.alpha), ("beta", p.beta)] {
                    if !(v > 1.0 && v < 2.0) {
                        return fail(format!("{name} {v} must lie in (1, 2)"));
                    }
                }
                check_weights("d", p.d_plus, p.d_minus)?;
                check_weights("e", p.e_plus, p.e_minus)?;
            }
        }
        let min_size = match self.example {
            Example::Ex3 => 7,
            _ => 8,
        };
        if let Some(&n) = self.sizes.iter().find(|&&n| n < min_size) {
            return fail(format!("size {n} is below the minimum {min_size} for {}", self.example));
        }
        if self.precond.is_multigrid() {
            let cfg = self.vcycle_config();
            cfg.validate().map_err(|e| CliError::Config(e.to_string()))?;
            if let Some(&n) = self.sizes.iter().find(|&&n| !(n + 1).is_power_of_two()) {
                return fail(format!("multigrid needs sizes of the form 2^k - 1, got {n}"));
            }
            if let Some(&n) = self.sizes.iter().find(|&&n| n <= cfg.coarsest_size) {
                return fail(format!(
                    "size {n} does not exceed the coarsest multigrid size {}",
                    cfg.coarsest_size
                ));
            }
        }
        Ok(())
    }

    /// `(α, d₊, d₋)` with defaults filled in.
    pub fn example2_params(&self) -> (f64, f64, f64) {
        let (a, dp, dm) = EX2_DEFAULTS;
        (
            self.alpha.unwrap_or(a),
            self.d_plus.unwrap_or(dp),
            self.d_minus.unwrap_or(dm),
        )
    }

    pub fn example3_params(&self) -> Example3Params {
        let d = Example3Params::default();
        Example3Params {
            alpha: self.alpha.unwrap_or(d.alpha),
            beta: self.beta.unwrap_or(d.beta),
            d_plus: self.d_plus.unwrap_or(d.d_plus),
            d_minus: self.d_minus.unwrap_or(d.d_minus),
            e_plus: self.e_plus.unwrap_or(d.e_plus),
            e_minus: self.e_minus.unwrap_or(d.e_minus),
        }
    }

    /// Per-example V-cycle settings, then the overrides.
    pub fn vcycle_config(&self) -> VCycleConfig {
        let (sweeps, omega, coarsest) = match self.example {
            Example::Ex1 => {
                let omega = match self.solver {
                    SolverKind::Gmres => 0.1,
                    SolverKind::Lsqr => 0.4,
                    SolverKind::Minres => 0.5,
                };
                (2, omega, 15)
            }
            Example::Ex2 if self.precond == PrecondKind::MgAm => (1, 0.7, 127),
            Example::Ex2 => (2, 0.7, 127),
            Example::Ex3 => (4, 0.9, 7),
        };
        let sweeps = self.mg.sweeps.unwrap_or(sweeps);
        VCycleConfig {
            pre_smooth: sweeps,
            post_smooth: sweeps,
            omega: self.mg.omega.unwrap_or(omega),
            coarsest_size: self.mg.coarsest.unwrap_or(coarsest),
        }
    }
}

fn check_weights(name: &str, plus: f64, minus: f64) -> CliResult<()> {
    if !(plus >= 0.0 && minus >= 0.0 && plus.is_finite() && minus.is_finite()) || plus + minus == 0.0 {
        return Err(CliError::Config(format!(
            "{name} weights ({plus}, {minus}) must be nonnegative and not both zero"
        )));
    }
    Ok(())
}
