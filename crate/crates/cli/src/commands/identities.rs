use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde_json::json;

use stpair_core::arith::{check_cosine_identity, hecke_product_residual, Angle, HECKE_INDEX_CAP, IDENTITY_TOLERANCE};
use stpair_core::kernels::{eval_kernel, lattice_sum_oracle, make_kernel, mean_mass_identity};
use stpair_core::{CoefficientTable, SpectralTestFunction};

use super::{rel, DEFAULT_SEED};
use crate::args::IdentitiesArgs;
use crate::config::Params;
use crate::error::{CliError, Result};
use crate::report::{Check, Outcome, Table};

const KERNEL_TOLERANCE: f64 = 1e-6;
const MEAN_MASS_TOLERANCE: f64 = 1e-8;
const KERNEL_SCALES: [usize; 3] = [2, 10, 50];
const MEAN_MASS_PSI: [f64; 4] = [0.1, 0.25, 0.3, 0.4];

struct Row {
    name: &'static str,
    cases: usize,
    max: f64,
    limit: f64,
}

pub fn run(a: &IdentitiesArgs, seed: Option<u64>, p: &mut Params) -> Result<Outcome> {
    let trials = p.get("trials", a.trials, 1000)?;
    let cap = p.get("index-cap", a.index_cap, 60)?;
    let points = p.get("kernel-points", a.kernel_points, 100)?;
    let terms = p.get("lattice-terms", a.lattice_terms, 200_000)?;
    let seed = p.get("seed", seed, DEFAULT_SEED)?;
    p.finish()?;
    if cap > HECKE_INDEX_CAP {
        return Err(CliError::usage(
            format!("--index-cap {cap} exceeds {HECKE_INDEX_CAP}"),
            format!("use --index-cap {HECKE_INDEX_CAP} or less"),
        ));
    }
    if trials == 0 || points == 0 {
        return Err(CliError::usage(
            "--trials and --kernel-points must be positive",
            "pass e.g. --trials 1000",
        ));
    }

    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let angle = |rng: &mut ChaCha20Rng| Angle::new(rng.random::<f64>()).expect("unit interval");

    let mut cosine: f64 = 0.0;
    for _ in 0..trials {
        let theta = angle(&mut rng);
        let (lhs, rhs) = check_cosine_identity(theta, rng.random_range(0..=cap as usize));
        cosine = cosine.max(rel(lhs, rhs));
    }

    let mut products: f64 = 0.0;
    for _ in 0..trials {
        let theta = angle(&mut rng);
        let mut idx = || rng.random_range(0..=cap);
        let (i, j, l, n) = (idx(), idx(), idx(), idx());
        products = products.max(hecke_product_residual(theta, i, j, l, n)?);
    }

    let fejer = SpectralTestFunction::fejer();
    let mut kernel: f64 = 0.0;
    for &scale in &KERNEL_SCALES {
        let k = make_kernel(&fejer, scale)?;
        for _ in 0..points {
            let theta = rng.random::<f64>();
            let space = lattice_sum_oracle(&fejer, scale, theta, terms)?;
            kernel = kernel.max((eval_kernel(&k, theta) - space).abs());
        }
    }

    let mut mass: f64 = 0.0;
    for &scale in &KERNEL_SCALES {
        let k = make_kernel(&fejer, scale)?;
        for &psi in &MEAN_MASS_PSI {
            let table = CoefficientTable::new(&fejer, &fejer, scale, psi, 10)?;
            let (lhs, rhs) = mean_mass_identity(&table, &k);
            mass = mass.max((lhs - rhs).abs());
        }
    }

    let rows = [
        Row {
            name: "cosine",
            cases: trials,
            max: cosine,
            limit: IDENTITY_TOLERANCE,
        },
        Row {
            name: "hecke-products",
            cases: trials,
            max: products,
            limit: IDENTITY_TOLERANCE,
        },
        Row {
            name: "kernel-lattice",
            cases: points * KERNEL_SCALES.len(),
            max: kernel,
            limit: KERNEL_TOLERANCE,
        },
        Row {
            name: "mean-mass",
            cases: KERNEL_SCALES.len() * MEAN_MASS_PSI.len(),
            max: mass,
            limit: MEAN_MASS_TOLERANCE,
        },
    ];
    let mut table = Table::new(&["identity", "cases", "max_residual", "limit"]);
    let mut result = serde_json::Map::new();
    let mut checks = Vec::new();
    for r in &rows {
        table.push(vec![json!(r.name), json!(r.cases), json!(r.max), json!(r.limit)]);
        result.insert(r.name.to_string(), json!({"cases": r.cases, "max_residual": r.max}));
        checks.push(Check::below(
            r.name,
            r.max,
            r.limit,
            format!("max residual over {} cases", r.cases),
        ));
    }
    Ok(Outcome {
        result: result.into(),
        checks,
        table,
        seed: Some(seed),
    })
}
