//! Command bodies, separated from argument parsing so tests can call them.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::ops::Range;
use std::path::Path;

use kadets_core::extend2d::{check_extension, extend_with_details, ExtensionCheck, Ray, Trim};
use kadets_core::fixtures;
use kadets_core::minimax::OPT_TOL;
use kadets_core::noneuclid::mc::{EpsNeighborhood, Isoperimetry, StarCorrelation};
use kadets_core::noneuclid::{
    hyperbolic_counterexample_search, mc_eps_neighborhood, mc_isoperimetry, mc_star_correlation,
    spherical_inradius, CounterexampleReport, SphericalConvexSet, SphericalPointSet, StarBody,
    MC_SE_BAND,
};
use kadets_core::partition::restrict;
use kadets_core::verify::{
    gen_instance, kadets_sum, verify_batch, BatchReport, InstanceKind, KadetsReport,
};
use kadets_core::{EPS_GEO, EPS_LP};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, EXIT_PASS, EXIT_VIOLATION};
use crate::instance::{AmbientTag, InstanceFile};
use crate::svg;

/// Envelope shared by every report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportFile<T> {
    pub command: String,
    pub version: String,
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub passed: bool,
    pub result: T,
}

impl<T: Serialize> ReportFile<T> {
    fn new(
        command: &str,
        tolerances: &[(&str, f64)],
        seed: Option<u64>,
        passed: bool,
        result: T,
    ) -> Self {
        Self {
            command: command.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            tolerances: tolerances
                .iter()
                .map(|(k, v)| (k.to_string(), *v))
                .collect(),
            seed,
            passed,
            result,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }
}

/// Text of the report and the process exit code.
#[derive(Clone, Debug)]
pub struct CmdOutput {
    pub report: String,
    pub code: u8,
}

fn output<T: Serialize>(r: ReportFile<T>) -> CmdOutput {
    CmdOutput {
        code: if r.passed { EXIT_PASS } else { EXIT_VIOLATION },
        report: r.to_json(),
    }
}

pub fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::io(path.display().to_string(), e))
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text =
        std::fs::read_to_string(path).map_err(|e| CliError::io(path.display().to_string(), e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Input(format!("schema: {e}")))
}

pub fn inradius(path: &Path, tol: f64) -> Result<CmdOutput, CliError> {
    let loaded = InstanceFile::read(path)?.load()?;
    let report = kadets_sum(&loaded.body, &loaded.cells)?;
    let passed = report.margin >= -tol;
    Ok(output(ReportFile::new(
        "inradius",
        &[("margin", tol), ("lp", EPS_LP)],
        None,
        passed,
        report,
    )))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtendResult {
    pub cells: usize,
    pub rays: Vec<Ray>,
    pub trims: Vec<Trim>,
    pub certificates: Vec<f64>,
    pub check: ExtensionCheck,
    pub kadets: KadetsReport,
}

pub struct ExtendOptions<'a> {
    pub out: Option<&'a Path>,
    pub svg: Option<&'a Path>,
    /// Picture margin around `B`, in diameters of `B`.
    pub pad: f64,
    pub samples: usize,
    pub seed: u64,
}

pub fn extend2d(path: &Path, opts: &ExtendOptions) -> Result<CmdOutput, CliError> {
    let loaded = InstanceFile::read(path)?.load()?;
    let Some(b) = loaded.polygon.as_ref() else {
        return Err(CliError::Input("extend2d needs a planar instance".into()));
    };
    let ext = extend_with_details(b, &loaded.cells)?;
    let check = check_extension(b, &loaded.cells, &ext.cells, opts.samples, opts.seed);
    if !check.ok() {
        let at = check
            .first_failure
            .map(|p| format!(" at ({:.9}, {:.9})", p[0], p[1]))
            .unwrap_or_default();
        return Err(CliError::Contract(format!(
            "extension check failed{at}: {} mismatches, {} uncovered, {} overlapping, {} non-convex",
            check.mismatches, check.uncovered, check.overlapping, check.nonconvex
        )));
    }
    let kadets = kadets_sum(&loaded.body, &restrict(&ext.cells, &loaded.body))?;
    if let Some(out) = opts.out {
        let mut file = InstanceFile::from_cells(b, &ext.cells, AmbientTag::Space);
        file.metadata
            .insert("extended_from".into(), path.display().to_string().into());
        write_file(out, &(file.to_json() + "\n"))?;
    }
    if let Some(p) = opts.svg {
        write_file(p, &svg::extension_svg(b, &ext, &kadets, opts.pad))?;
    }
    let passed = kadets.margin >= -kadets_core::verify::EXTENDED_MARGIN_TOL;
    Ok(output(ReportFile::new(
        "extend2d",
        &[
            ("margin", kadets_core::verify::EXTENDED_MARGIN_TOL),
            ("geo", EPS_GEO),
        ],
        Some(opts.seed),
        passed,
        ExtendResult {
            cells: ext.cells.len(),
            rays: ext.rays.rays.clone(),
            trims: ext.rays.trims.clone(),
            certificates: ext.rays.certificates.clone(),
            check,
            kadets,
        },
    )))
}

/// Parses `a..b` (half-open) or a single seed.
pub fn parse_seeds(s: &str) -> Result<Range<u64>, String> {
    let parse = |t: &str| {
        t.trim()
            .parse::<u64>()
            .map_err(|e| format!("bad seed {t:?}: {e}"))
    };
    match s.split_once("..") {
        Some((a, b)) => {
            let (a, b) = (parse(a)?, parse(b)?);
            if a >= b {
                return Err(format!("empty seed range {s}"));
            }
            Ok(a..b)
        }
        None => {
            let a = parse(s)?;
            Ok(a..a + 1)
        }
    }
}

pub fn verify(
    kind: InstanceKind,
    seeds: Range<u64>,
    k: usize,
    d: usize,
    jobs: usize,
    samples: usize,
) -> Result<CmdOutput, CliError> {
    let mut pool = rayon::ThreadPoolBuilder::new();
    if jobs > 0 {
        pool = pool.num_threads(jobs);
    }
    let pool = pool
        .build()
        .map_err(|e| CliError::Input(format!("thread pool: {e}")))?;
    let start = seeds.start;
    let report: BatchReport = pool.install(|| verify_batch(kind, seeds, k, d, samples));
    let passed = report.failures.is_empty();
    Ok(output(ReportFile::new(
        "verify",
        &[("margin", kind.margin_tol())],
        Some(start),
        passed,
        report,
    )))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Lemma {
    Star,
    Eps,
    Iso,
    Kadets,
}

impl std::str::FromStr for Lemma {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "star" => Ok(Lemma::Star),
            "eps" => Ok(Lemma::Eps),
            "iso" => Ok(Lemma::Iso),
            "kadets" => Ok(Lemma::Kadets),
            _ => Err(format!(
                "unknown lemma {s:?}; expected star, eps, iso or kadets"
            )),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverCheck {
    pub sets: usize,
    pub radii: Vec<f64>,
    pub sum: f64,
    /// Uniform samples of the sphere lying in none of the sets.
    pub uncovered: usize,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "check", rename_all = "snake_case")]
pub enum SphereCheck {
    Star {
        name: String,
        result: StarCorrelation,
    },
    Eps {
        name: String,
        result: EpsNeighborhood,
    },
    Iso {
        name: String,
        result: Isoperimetry,
    },
    Cover {
        name: String,
        result: CoverCheck,
    },
}

impl SphereCheck {
    fn holds(&self) -> bool {
        match self {
            SphereCheck::Star { result, .. } => result.holds,
            SphereCheck::Eps { result, .. } => result.holds,
            SphereCheck::Iso { result, .. } => result.holds,
            SphereCheck::Cover { result, .. } => result.holds,
        }
    }
}

fn z_rotation(a: f64) -> Vec<Vec<f64>> {
    vec![
        vec![a.cos(), -a.sin(), 0.0],
        vec![a.sin(), a.cos(), 0.0],
        vec![0.0, 0.0, 1.0],
    ]
}

fn cover_check(
    sets: &[SphericalConvexSet],
    samples: usize,
    seed: u64,
) -> Result<CoverCheck, CliError> {
    let radii = sets
        .iter()
        .map(|k| spherical_inradius(k).map(|r| r.0))
        .collect::<Result<Vec<_>, _>>()?;
    let sum: f64 = radii.iter().sum();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut uncovered = 0;
    for _ in 0..samples {
        let g: [f64; 3] = std::array::from_fn(|_| rng.sample(StandardNormal));
        let l = (g[0] * g[0] + g[1] * g[1] + g[2] * g[2]).sqrt();
        let u: Vec<f64> = g.iter().map(|x| x / l).collect();
        if !sets.iter().any(|k| k.contains(&u, 1e-12)) {
            uncovered += 1;
        }
    }
    Ok(CoverCheck {
        sets: sets.len(),
        radii,
        sum,
        uncovered,
        holds: uncovered == 0 && sum >= PI - 1e-12,
    })
}

fn kadets_covers(samples: usize, seed: u64) -> Result<Vec<SphereCheck>, CliError> {
    let mut out = Vec::new();
    let hemis = vec![
        SphericalConvexSet::hemisphere(vec![0.0, 0.0, 1.0])?,
        SphericalConvexSet::hemisphere(vec![0.0, 0.0, -1.0])?,
    ];
    let mut c = cover_check(&hemis, samples, seed)?;
    // equality case: compared exactly
    c.holds &= c.sum == PI;
    out.push(SphereCheck::Cover {
        name: "two hemispheres".into(),
        result: c,
    });
    let m = 5;
    let alpha = 2.0 * PI / m as f64;
    let lune = SphericalConvexSet::lune(alpha)?;
    let lunes: Vec<_> = (0..m)
        .map(|i| lune.rotated(&z_rotation(alpha * i as f64)))
        .collect();
    out.push(SphereCheck::Cover {
        name: format!("{m} lunes"),
        result: cover_check(&lunes, samples, seed + 1)?,
    });
    let mut octants = Vec::new();
    for sx in [1.0, -1.0] {
        for sy in [1.0, -1.0] {
            for sz in [1.0, -1.0] {
                octants.push(SphericalConvexSet::triangle([
                    [sx, 0.0, 0.0],
                    [0.0, sy, 0.0],
                    [0.0, 0.0, sz],
                ])?);
            }
        }
    }
    out.push(SphereCheck::Cover {
        name: "octants".into(),
        result: cover_check(&octants, samples, seed + 2)?,
    });
    Ok(out)
}

pub fn sphere(
    lemma: Lemma,
    samples: usize,
    seed: u64,
    input: Option<&Path>,
    dim: usize,
) -> Result<CmdOutput, CliError> {
    let mut checks = Vec::new();
    match lemma {
        Lemma::Star => {
            let bodies: Vec<(String, StarBody, usize)> = match input {
                Some(p) => {
                    let t: StarBody = read_json(p)?;
                    vec![(p.display().to_string(), t, dim)]
                }
                None => vec![
                    (
                        "halfplane".into(),
                        StarBody::HalfSpace {
                            normal: vec![0.3, -1.0],
                        },
                        2,
                    ),
                    (
                        "cone and ball".into(),
                        StarBody::ConeBall {
                            axis: vec![1.0, 0.2],
                            half_angle: 0.5,
                            radius: 0.6,
                        },
                        2,
                    ),
                    ("whole plane".into(), StarBody::Whole, 2),
                ],
            };
            for (i, (name, t, n)) in bodies.into_iter().enumerate() {
                let result = mc_star_correlation(n, &t, 1.0, samples, seed + i as u64)?;
                checks.push(SphereCheck::Star { name, result });
            }
        }
        Lemma::Eps => {
            let sets: Vec<(String, SphericalPointSet)> = match input {
                Some(p) => vec![(p.display().to_string(), read_json(p)?)],
                None => {
                    let octa = (0..6)
                        .map(|i| {
                            let mut p = vec![0.0; 3];
                            p[i / 2] = if i % 2 == 0 { 1.0 } else { -1.0 };
                            p
                        })
                        .collect();
                    let equator = (0..720)
                        .map(|i| {
                            let t = i as f64 * PI / 360.0;
                            vec![t.cos(), t.sin(), 0.0]
                        })
                        .collect();
                    vec![
                        (
                            "antipodal pair".into(),
                            SphericalPointSet::new(
                                vec![vec![0.0, 0.0, 1.0], vec![0.0, 0.0, -1.0]],
                                0.3,
                            )?,
                        ),
                        ("octahedron".into(), SphericalPointSet::new(octa, 0.3)?),
                        ("equator".into(), SphericalPointSet::new(equator, 0.2)?),
                    ]
                }
            };
            for (i, (name, x)) in sets.into_iter().enumerate() {
                let result = mc_eps_neighborhood(&x, samples, seed + i as u64)?;
                checks.push(SphereCheck::Eps { name, result });
            }
        }
        Lemma::Iso => {
            let sets: Vec<(String, SphericalConvexSet)> = match input {
                Some(p) => vec![(p.display().to_string(), read_json(p)?)],
                None => vec![
                    ("lune".into(), SphericalConvexSet::lune(1.1)?),
                    (
                        "cap".into(),
                        SphericalConvexSet::cap(vec![0.0, 0.6, 0.8], 0.7)?,
                    ),
                    (
                        "triangle".into(),
                        SphericalConvexSet::triangle([
                            [1.0, 0.2, 0.1],
                            [0.1, 1.0, 0.3],
                            [0.2, -0.1, 1.0],
                        ])?,
                    ),
                ],
            };
            for (i, (name, k)) in sets.into_iter().enumerate() {
                // re-validate sets read from files
                let k = SphericalConvexSet::new(k.ambient, k.normals, k.offsets)?;
                let result = mc_isoperimetry(&k, samples, seed + i as u64)?;
                checks.push(SphereCheck::Iso { name, result });
            }
        }
        Lemma::Kadets => checks.extend(kadets_covers(samples.min(200_000), seed)?),
    }
    let passed = checks.iter().all(SphereCheck::holds);
    Ok(output(ReportFile::new(
        "sphere",
        &[("se_band", MC_SE_BAND)],
        Some(seed),
        passed,
        checks,
    )))
}

pub fn hyperbolic(rho: f64, grid: usize, svg_path: Option<&Path>) -> Result<CmdOutput, CliError> {
    if !rho.is_finite() || rho <= 0.0 {
        return Err(CliError::Input(format!("rho must be positive, got {rho}")));
    }
    let rep: CounterexampleReport = hyperbolic_counterexample_search(rho, grid)?;
    if let Some(p) = svg_path {
        write_file(p, &svg::hyperbolic_svg(&rep))?;
    }
    // the search always reports; `found` records whether the cover beats the
    // Euclidean bound
    let r = ReportFile::new(
        "hyperbolic",
        &[("optimizer", OPT_TOL), ("margin", 10.0 * OPT_TOL)],
        None,
        true,
        rep,
    );
    Ok(CmdOutput {
        code: EXIT_PASS,
        report: r.to_json(),
    })
}

pub fn gen(kind: InstanceKind, seed: u64, k: usize, d: usize) -> Result<String, CliError> {
    let inst = gen_instance(kind, seed, k, d)?;
    Ok(InstanceFile::from_instance(&inst).to_json() + "\n")
}

pub const FIXTURES: [&str; 5] = ["slabs", "square-split", "quadrants", "pinwheel", "slanted"];

pub fn fixture(name: &str, k: usize) -> Result<String, CliError> {
    let (poly, cells) = match name {
        "slabs" => (fixtures::unit_square(), fixtures::equal_slabs(k.max(1)).1),
        "square-split" => fixtures::square_split(0.5),
        "quadrants" => fixtures::square_quadrants(),
        "pinwheel" => fixtures::pinwheel(),
        "slanted" => fixtures::slanted_strip(),
        _ => {
            return Err(CliError::Input(format!(
                "unknown fixture {name:?}; expected one of {}",
                FIXTURES.join(", ")
            )))
        }
    };
    let mut f = InstanceFile::from_cells(&poly, &cells, AmbientTag::Body);
    f.metadata.insert("fixture".into(), name.into());
    Ok(f.to_json() + "\n")
}
