//! Monte-Carlo checks: Gaussian correlation of a centred ball with a star body,
//! ε-neighbourhoods of point sets not in an open hemisphere, and the area bound
//! for a spherical convex set in terms of its inradius.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::sphere::{cap_fraction, sphere_measure, spherical_inradius};
use super::{SphericalConvexSet, SphericalPointSet};
use crate::error::NonEuclidError;
use crate::geom::{dot, norm};

/// Inequalities count as holding when violated by at most this many standard errors.
pub const MC_SE_BAND: f64 = 3.0;

const CHUNK: usize = 1 << 15;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub se: f64,
    pub samples: usize,
}

impl McEstimate {
    fn scaled(self, s: f64) -> Self {
        Self {
            estimate: self.estimate * s,
            se: self.se * s.abs(),
            samples: self.samples,
        }
    }
}

/// Sums and cross sums of up to three indicator streams.
#[derive(Clone, Copy, Debug, Default)]
struct Moments {
    n: usize,
    s: [f64; 3],
    ss: [[f64; 3]; 3],
}

impl Moments {
    fn push(&mut self, v: [f64; 3]) {
        self.n += 1;
        for i in 0..3 {
            self.s[i] += v[i];
            for j in 0..3 {
                self.ss[i][j] += v[i] * v[j];
            }
        }
    }

    fn merge(mut self, o: &Moments) -> Self {
        self.n += o.n;
        for i in 0..3 {
            self.s[i] += o.s[i];
            for j in 0..3 {
                self.ss[i][j] += o.ss[i][j];
            }
        }
        self
    }

    fn mean(&self, i: usize) -> f64 {
        self.s[i] / self.n as f64
    }

    fn cov(&self, i: usize, j: usize) -> f64 {
        let n = self.n as f64;
        (self.ss[i][j] - self.s[i] * self.s[j] / n) / (n - 1.0).max(1.0)
    }

    /// Estimate of a smooth function of the means with gradient `g`, delta method.
    fn delta(&self, value: f64, g: [f64; 3]) -> McEstimate {
        let mut var = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                var += g[i] * g[j] * self.cov(i, j);
            }
        }
        McEstimate {
            estimate: value,
            se: (var.max(0.0) / self.n as f64).sqrt(),
            samples: self.n,
        }
    }

    fn single(&self, i: usize) -> McEstimate {
        let mut g = [0.0; 3];
        g[i] = 1.0;
        self.delta(self.mean(i), g)
    }
}

fn chunk_seed(seed: u64, chunk: u64) -> u64 {
    seed ^ chunk.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Runs `samples` draws in parallel chunks with per-chunk seeds; the result does
/// not depend on the thread count.
fn accumulate<F>(samples: usize, seed: u64, draw: F) -> Moments
where
    F: Fn(&mut ChaCha8Rng) -> [f64; 3] + Sync,
{
    let chunks = samples.div_ceil(CHUNK);
    let parts: Vec<Moments> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(chunk_seed(seed, c as u64));
            let count = CHUNK.min(samples - c * CHUNK);
            let mut m = Moments::default();
            for _ in 0..count {
                m.push(draw(&mut rng));
            }
            m
        })
        .collect();
    parts.iter().fold(Moments::default(), |a, b| a.merge(b))
}

fn gaussian(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    (0..d).map(|_| rng.sample(StandardNormal)).collect()
}

fn uniform_sphere(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    loop {
        let g = gaussian(rng, d);
        let l = norm(&g);
        if l > 1e-12 {
            return g.into_iter().map(|x| x / l).collect();
        }
    }
}

/// Star-shaped sets with respect to the origin.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum StarBody {
    Whole,
    /// `{x : normal·x ≥ 0}`.
    HalfSpace {
        normal: Vec<f64>,
    },
    /// Union of the cone of half-angle `half_angle` about `axis` and the ball of `radius`.
    ConeBall {
        axis: Vec<f64>,
        half_angle: f64,
        radius: f64,
    },
    /// `{x : |x|_∞ ≤ half_width}`.
    Cube {
        half_width: f64,
    },
}

impl StarBody {
    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            StarBody::Whole => true,
            StarBody::HalfSpace { normal } => dot(normal, x) >= 0.0,
            StarBody::ConeBall {
                axis,
                half_angle,
                radius,
            } => {
                let l = norm(x);
                l <= *radius || dot(axis, x) >= half_angle.cos() * l * norm(axis)
            }
            StarBody::Cube { half_width } => x.iter().all(|v| v.abs() <= *half_width),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StarCorrelation {
    /// `μ(B ∩ T) μ(R^n)` for the standard Gaussian `μ`.
    pub lhs: McEstimate,
    /// `μ(B) μ(T)`.
    pub rhs: McEstimate,
    pub diff: McEstimate,
    pub holds: bool,
}

/// Gaussian correlation between the ball of radius `ball_radius` at the origin
/// and the star body `t` in `R^dim`.
pub fn mc_star_correlation(
    dim: usize,
    t: &StarBody,
    ball_radius: f64,
    samples: usize,
    seed: u64,
) -> Result<StarCorrelation, NonEuclidError> {
    if dim == 0 || samples < 2 || !(ball_radius >= 0.0) {
        return Err(NonEuclidError::Invalid(
            "bad dimension, radius or sample count".into(),
        ));
    }
    let r2 = ball_radius * ball_radius;
    let m = accumulate(samples, seed, |rng| {
        let x = gaussian(rng, dim);
        let in_b = dot(&x, &x) <= r2;
        let in_t = t.contains(&x);
        [
            f64::from(u8::from(in_b && in_t)),
            f64::from(u8::from(in_b)),
            f64::from(u8::from(in_t)),
        ]
    });
    let (a, b, c) = (m.mean(0), m.mean(1), m.mean(2));
    let lhs = m.single(0);
    let rhs = m.delta(b * c, [0.0, c, b]);
    let diff = m.delta(a - b * c, [1.0, -c, -b]);
    Ok(StarCorrelation {
        lhs,
        rhs,
        diff,
        holds: diff.estimate >= -MC_SE_BAND * diff.se,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpsNeighborhood {
    /// Measure of the ε-neighbourhood of the point set.
    pub lhs: McEstimate,
    /// Measure of the ε-neighbourhood of two antipodal points, closed form.
    pub rhs: f64,
    /// The same, estimated from the shared samples.
    pub rhs_mc: McEstimate,
    pub diff: McEstimate,
    pub hemisphere_margin: f64,
    pub holds: bool,
}

/// ε-neighbourhood of `x` against that of a pair of antipodal points. Errors
/// when `x` lies in an open hemisphere (margin above `1e-9`).
pub fn mc_eps_neighborhood(
    x: &SphericalPointSet,
    samples: usize,
    seed: u64,
) -> Result<EpsNeighborhood, NonEuclidError> {
    let margin = x.hemisphere_margin();
    if margin > 1e-9 {
        return Err(NonEuclidError::InOpenHemisphere(margin));
    }
    let d = x.ambient();
    let n = d - 1;
    let ce = x.eps.cos();
    let m = accumulate(samples, seed, |rng| {
        let u = uniform_sphere(rng, d);
        let hit = x.points.iter().any(|p| dot(p, &u) >= ce);
        let pair = u[d - 1].abs() >= ce;
        let (a, b) = (f64::from(u8::from(hit)), f64::from(u8::from(pair)));
        [a, b, a - b]
    });
    let total = sphere_measure(n);
    let lhs = m.single(0).scaled(total);
    let rhs_mc = m.single(1).scaled(total);
    let diff = m.single(2).scaled(total);
    let rhs = 2.0 * cap_fraction(n, x.eps) * total;
    let holds = lhs.estimate - rhs >= -MC_SE_BAND * lhs.se;
    Ok(EpsNeighborhood {
        lhs,
        rhs,
        rhs_mc,
        diff,
        hemisphere_margin: margin,
        holds,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Isoperimetry {
    pub area: McEstimate,
    pub inradius: f64,
    /// Measure of the lune with the same inradius: `r σ_n / π`.
    pub bound: f64,
    pub holds: bool,
}

/// Measure of a spherical convex set against the lune bound from its inradius.
pub fn mc_isoperimetry(
    k: &SphericalConvexSet,
    samples: usize,
    seed: u64,
) -> Result<Isoperimetry, NonEuclidError> {
    let (r, _) = spherical_inradius(k)?;
    let d = k.ambient;
    let total = sphere_measure(d - 1);
    let m = accumulate(samples, seed, |rng| {
        let u = uniform_sphere(rng, d);
        [f64::from(u8::from(k.contains(&u, 0.0))), 0.0, 0.0]
    });
    let area = m.single(0).scaled(total);
    let bound = r * total / std::f64::consts::PI;
    Ok(Isoperimetry {
        area,
        inradius: r,
        bound,
        holds: area.estimate <= bound + MC_SE_BAND * area.se,
    })
}
