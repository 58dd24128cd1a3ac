use std::path::PathBuf;

use clap::{Args, ValueEnum};
use inextensa_core::domain::Domain;
use inextensa_core::tensor::Point3;
use sha2::{Digest, Sha256};

use crate::Failure;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Obj,
    Json,
}

/// Flags shared by every subcommand.
#[derive(Args, Clone, Debug)]
pub struct CommonArgs {
    /// JSON spec file.
    #[arg(long)]
    pub spec: PathBuf,
    /// Reference box `x0,x1,y0,y1,z0,z1`; defaults depend on the spec.
    #[arg(long)]
    pub domain: Option<String>,
    /// Grid nodes per axis, `N` or `Nx,Ny,Nz`.
    #[arg(long)]
    pub grid: Option<String>,
    /// Tolerance for purely differential residuals.
    #[arg(long, default_value_t = 1e-10)]
    pub tol_diff: f64,
    /// Tolerance for Ricci curvature entries.
    #[arg(long, default_value_t = 1e-9)]
    pub tol_flat: f64,
    /// Tolerance for quadrature-coupled residuals.
    #[arg(long, default_value_t = 1e-7)]
    pub tol_quad: f64,
    /// Number of sampled materials.
    #[arg(long, default_value_t = 10)]
    pub materials: usize,
    #[arg(long, env = "INEXTENSA_SEED", default_value_t = 1)]
    pub seed: u64,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Keep per-point residual records in reports.
    #[arg(long)]
    pub records: bool,
}

/// Validated run configuration with the spec already read.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub spec_text: String,
    pub spec_sha256: String,
    pub bounds: Option<[f64; 6]>,
    pub grid: Option<[usize; 3]>,
    pub tol_diff: f64,
    pub tol_flat: f64,
    pub tol_quad: f64,
    pub materials: usize,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub records: bool,
}

fn input(msg: impl Into<String>) -> Failure {
    Failure::Input(msg.into())
}

fn parse_list<T: std::str::FromStr>(flag: &str, text: &str) -> Result<Vec<T>, Failure> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<T>()
                .map_err(|_| input(format!("--{flag}: cannot parse {s:?}")))
        })
        .collect()
}

pub fn parse_point(flag: &str, text: &str) -> Result<Point3, Failure> {
    let v: Vec<f64> = parse_list(flag, text)?;
    if v.len() != 3 {
        return Err(input(format!("--{flag} takes x,y,z")));
    }
    Point3::new(v[0], v[1], v[2]).map_err(|e| input(e.to_string()))
}

impl RunConfig {
    pub fn from_args(a: &CommonArgs) -> Result<Self, Failure> {
        for (name, tol) in [
            ("tol-diff", a.tol_diff),
            ("tol-flat", a.tol_flat),
            ("tol-quad", a.tol_quad),
        ] {
            if !(tol > 0.0 && tol.is_finite()) {
                return Err(input(format!("--{name} must be positive")));
            }
        }
        if a.materials == 0 {
            return Err(input("--materials must be at least 1"));
        }
        let bounds = match &a.domain {
            None => None,
            Some(t) => {
                let v: Vec<f64> = parse_list("domain", t)?;
                let b: [f64; 6] = v
                    .try_into()
                    .map_err(|_| input("--domain takes x0,x1,y0,y1,z0,z1"))?;
                Some(b)
            }
        };
        let grid = match &a.grid {
            None => None,
            Some(t) => {
                let v: Vec<usize> = parse_list("grid", t)?;
                let g = match v[..] {
                    [n] => [n, n, n],
                    [x, y, z] => [x, y, z],
                    _ => return Err(input("--grid takes N or Nx,Ny,Nz")),
                };
                if g.iter().any(|&n| n < 2) {
                    return Err(input("--grid counts must be at least 2"));
                }
                Some(g)
            }
        };
        let bytes = std::fs::read(&a.spec)
            .map_err(|e| input(format!("cannot read {}: {e}", a.spec.display())))?;
        let spec_sha256 = Sha256::digest(&bytes)
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect();
        let spec_text = String::from_utf8(bytes).map_err(|_| input("spec is not UTF-8"))?;
        Ok(RunConfig {
            spec_text,
            spec_sha256,
            bounds,
            grid,
            tol_diff: a.tol_diff,
            tol_flat: a.tol_flat,
            tol_quad: a.tol_quad,
            materials: a.materials,
            seed: a.seed,
            out: a.out.clone(),
            format: a.format,
            records: a.records,
        })
    }

    /// The requested box, or `default` with the requested grid applied.
    pub fn domain(&self, default: Domain, default_grid: usize) -> Result<Domain, Failure> {
        let counts = self.grid.unwrap_or([default_grid; 3]);
        let bounds = self.bounds.unwrap_or(default.bounds);
        Domain::new(bounds, counts).map_err(Failure::from)
    }

    pub fn json_only(&self) -> Result<(), Failure> {
        match self.format {
            Some(Format::Obj) => Err(input("this subcommand writes JSON only")),
            _ => Ok(()),
        }
    }
}
