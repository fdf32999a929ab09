//! The averaged witness functions and the audit of their variation bound.
//!
//! For a cover `U` and a scale `n`, with `S_x(k) = { i : B(x, k) ⊆ U_i }`:
//!
//! ```text
//! η_x = (1/n) Σ_{k=n+1}^{2n} ξ_{S_x(k)}        (a probability vector over elements)
//! ζ_x = J(η_x),  J(δ_i) = δ_{basepoint(i)}     (a probability vector over points)
//! ```
//!
//! For `d(x, y) ≤ R < n` the variation is bounded by
//!
//! ```text
//! ‖ζ_x − ζ_y‖ ≤ ‖η_x − η_y‖ ≤ (2/n) Σ_k (1 − |S_x(k+R)| / |S_x(k−R)|) ≤ 2 (1 − m^{−2R/n})
//! ```
//!
//! Everything except the last term is computed with exact rationals.

mod l1;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Pow, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::covers::{ball_lebesgue_from, BallLebesgue, Cover, ElementId, InscribedRadii};
use crate::covers::{mesh, multiplicity};
use crate::spaces::{FiniteMetricSpace, PointId, SpaceError};

pub use l1::L1Vector;

/// Absolute slack allowed on the floating-point side of the final inequality.
pub const BOUND_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WitnessError {
    #[error(
        "empty S_x(k) at x = {x}, k = {k} (ball-Lebesgue radius at x is {ball_lebesgue}); \
         increase cover overlap or reduce n"
    )]
    EmptySSet { x: PointId, k: u32, ball_lebesgue: u32 },
    #[error("empty S_x(k); increase cover overlap or reduce n")]
    EmptyUniform,
    #[error("scale n must be at least 1")]
    ZeroScale,
    #[error("bound auditing needs R < n, got n = {n} and R = {r}")]
    RadiusNotBelowScale { n: u32, r: u32 },
    #[error("points {x} and {y} are at distance {dist}, more than R = {r}")]
    TooFar { x: PointId, y: PointId, dist: u32, r: u32 },
    #[error("nesting needs k ≥ R, got k = {k} and R = {r}")]
    ScaleBelowRadius { k: u32, r: u32 },
    #[error(transparent)]
    Space(#[from] SpaceError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WitnessParams {
    /// Scale of the averaging window `[n+1, 2n]`.
    pub n: u32,
    /// Displacement bound `R`.
    pub r: u32,
}

impl WitnessParams {
    pub fn new(n: u32, r: u32) -> Self {
        WitnessParams { n, r }
    }
}

/// `Bound` audits the full inequality chain and needs `R < n` and ball-Lebesgue
/// `≥ 2n + R`; `ConstructionOnly` measures distances only and needs `≥ 2n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Bound,
    ConstructionOnly,
}

/// The parts of a pair audit that only exist in bound mode.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainAudit {
    /// `(2/n) Σ_{k=n+1}^{2n} (1 − |S_x(k+R)| / |S_x(k−R)|)`.
    pub rhs_chain: BigRational,
    /// `2 (1 − m^{−2R/n})`.
    pub rhs_final: f64,
    /// All three inclusions of the nesting chain, for every `k` in the window.
    pub nesting_ok: bool,
    /// Arithmetic mean of the ratios raised to `n` dominates their product,
    /// the product equals its telescoped form, and it is at least `m^{−2R}`.
    pub amgm_ok: bool,
    /// `1 ≤ |S_x(k)|, |S_y(k)| ≤ m` for `k ∈ [n+1−R, 2n+R]`.
    pub cardinality_ok: bool,
    /// `zeta_dist ≤ eta_dist ≤ rhs_chain ≤ rhs_final + BOUND_TOLERANCE`.
    pub chain_ok: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairAudit {
    pub x: PointId,
    pub y: PointId,
    pub eta_dist: BigRational,
    pub zeta_dist: BigRational,
    pub chain: Option<ChainAudit>,
}

impl PairAudit {
    /// Every checked relation holds. Without a chain only the contraction
    /// `zeta_dist ≤ eta_dist` is checked.
    pub fn holds(&self) -> bool {
        match &self.chain {
            Some(c) => c.chain_ok && c.nesting_ok && c.amgm_ok && c.cardinality_ok,
            None => self.zeta_dist <= self.eta_dist,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WitnessReport {
    pub params: WitnessParams,
    pub mode: Mode,
    pub multiplicity: u32,
    pub mesh: u32,
    pub ball_lebesgue_global: u32,
    pub measured_sup_eta: BigRational,
    pub measured_sup_zeta: BigRational,
    /// `2 (1 − m^{−2R/n})`, bound mode only.
    pub bound_final: Option<f64>,
    /// `max_x max { d(x, p) : p ∈ supp ζ_x }`.
    pub support_radius: u32,
    pub worst_pair: PairAudit,
    pub pairs_examined: usize,
    pub all_pairs_ok: bool,
}

/// `ξ_S`, the uniform probability vector on `S`.
pub fn xi_uniform(set: &[ElementId]) -> Result<L1Vector<ElementId>, WitnessError> {
    l1::uniform(set).ok_or(WitnessError::EmptyUniform)
}

pub fn l1_distance<I: Ord + Copy>(u: &L1Vector<I>, v: &L1Vector<I>) -> BigRational {
    u.l1_distance(v)
}

/// `2 (1 − m^{−2R/n})` in floating point.
pub fn theoretical_bound(m: u32, r: u32, n: u32) -> f64 {
    let exponent = -(2.0 * r as f64) / n as f64;
    2.0 * (1.0 - (m as f64).powf(exponent))
}

fn ratio(num: usize, den: usize) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

fn is_subset(a: &[ElementId], b: &[ElementId]) -> bool {
    a.iter().all(|i| b.binary_search(i).is_ok())
}

fn intersection(a: &[ElementId], b: &[ElementId]) -> Vec<ElementId> {
    a.iter().copied().filter(|i| b.binary_search(i).is_ok()).collect()
}

fn union(a: &[ElementId], b: &[ElementId]) -> Vec<ElementId> {
    let mut out: Vec<_> = a.iter().chain(b).copied().collect();
    out.sort_unstable();
    out.dedup();
    out
}

fn factorial(m: u32) -> BigInt {
    (1..=m).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

/// Precomputed view of a cover for building witnesses.
pub struct WitnessContext<'a> {
    space: &'a FiniteMetricSpace,
    cover: &'a Cover,
    radii: InscribedRadii,
    lebesgue: BallLebesgue,
    multiplicity: u32,
    mesh: u32,
}

impl<'a> WitnessContext<'a> {
    pub fn new(space: &'a FiniteMetricSpace, cover: &'a Cover) -> Self {
        let radii = InscribedRadii::new(space, cover);
        let lebesgue = ball_lebesgue_from(&radii, space);
        WitnessContext {
            space,
            cover,
            multiplicity: multiplicity(space, cover),
            mesh: mesh(space, cover),
            radii,
            lebesgue,
        }
    }

    pub fn space(&self) -> &FiniteMetricSpace {
        self.space
    }

    pub fn cover(&self) -> &Cover {
        self.cover
    }

    pub fn multiplicity(&self) -> u32 {
        self.multiplicity
    }

    pub fn mesh(&self) -> u32 {
        self.mesh
    }

    pub fn ball_lebesgue(&self) -> &BallLebesgue {
        &self.lebesgue
    }

    /// `S_x(k)`: elements containing `B(x, k)`, ascending. May be empty.
    pub fn s_set(&self, x: PointId, k: u32) -> Vec<ElementId> {
        self.radii.containing_ball(x, k)
    }

    /// Fails with the smallest empty `k ≤ top` when `S_x(top)` is empty.
    fn require_nonempty(&self, x: PointId, top: u32) -> Result<(), WitnessError> {
        self.space.check_point(x)?;
        if self.lebesgue.reaches(x, top) {
            return Ok(());
        }
        let radius = self.lebesgue.per_point[x.index()];
        Err(WitnessError::EmptySSet { x, k: radius + 1, ball_lebesgue: radius })
    }

    /// `η^n_x = (1/n) Σ_{k=n+1}^{2n} ξ_{S_x(k)}`.
    pub fn eta(&self, n: u32, x: PointId) -> Result<L1Vector<ElementId>, WitnessError> {
        if n == 0 {
            return Err(WitnessError::ZeroScale);
        }
        self.require_nonempty(x, 2 * n)?;
        let mut out = L1Vector::new();
        for k in n + 1..=2 * n {
            let set = self.s_set(x, k);
            let weight = ratio(1, n as usize * set.len());
            for i in set {
                out.add_mass(i, weight.clone());
            }
        }
        Ok(out)
    }

    /// `ζ^n_x`, the pushforward of `η^n_x` along the basepoints.
    pub fn zeta(&self, n: u32, x: PointId) -> Result<L1Vector<PointId>, WitnessError> {
        Ok(self.push(&self.eta(n, x)?))
    }

    fn push(&self, eta: &L1Vector<ElementId>) -> L1Vector<PointId> {
        eta.pushforward(|i| self.cover.basepoint(i))
    }

    /// The three inclusions
    /// `S_x(k+R) ⊆ S_x(k) ∩ S_y(k) ⊆ S_x(k) ∪ S_y(k) ⊆ S_x(k−R)`.
    pub fn nesting_check(
        &self,
        x: PointId,
        y: PointId,
        k: u32,
        r: u32,
    ) -> Result<[bool; 3], WitnessError> {
        self.space.check_point(x)?;
        self.space.check_point(y)?;
        let dist = self.space.dist(x, y);
        if dist > r {
            return Err(WitnessError::TooFar { x, y, dist, r });
        }
        if k < r {
            return Err(WitnessError::ScaleBelowRadius { k, r });
        }
        Ok(self.nesting_unchecked(x, y, k, r))
    }

    fn nesting_unchecked(&self, x: PointId, y: PointId, k: u32, r: u32) -> [bool; 3] {
        let sx = self.s_set(x, k);
        let sy = self.s_set(y, k);
        let meet = intersection(&sx, &sy);
        let join = union(&sx, &sy);
        [
            is_subset(&self.s_set(x, k + r), &meet),
            is_subset(&meet, &join),
            is_subset(&join, &self.s_set(x, k - r)),
        ]
    }

    fn check_bound_params(&self, params: WitnessParams) -> Result<(), WitnessError> {
        if params.n == 0 {
            return Err(WitnessError::ZeroScale);
        }
        if params.r >= params.n {
            return Err(WitnessError::RadiusNotBelowScale { n: params.n, r: params.r });
        }
        Ok(())
    }

    /// Audits the whole inequality chain for one pair with `d(x, y) ≤ R`.
    pub fn pair_audit(
        &self,
        params: WitnessParams,
        x: PointId,
        y: PointId,
    ) -> Result<PairAudit, WitnessError> {
        self.check_bound_params(params)?;
        self.space.check_point(x)?;
        self.space.check_point(y)?;
        let dist = self.space.dist(x, y);
        if dist > params.r {
            return Err(WitnessError::TooFar { x, y, dist, r: params.r });
        }
        let top = 2 * params.n + params.r;
        self.require_nonempty(x, top)?;
        self.require_nonempty(y, top)?;
        let eta_x = self.eta(params.n, x)?;
        let eta_y = self.eta(params.n, y)?;
        Ok(self.audit_cached(params, x, y, &eta_x, &eta_y, &self.push(&eta_x), &self.push(&eta_y)))
    }

    #[allow(clippy::too_many_arguments)]
    fn audit_cached(
        &self,
        params: WitnessParams,
        x: PointId,
        y: PointId,
        eta_x: &L1Vector<ElementId>,
        eta_y: &L1Vector<ElementId>,
        zeta_x: &L1Vector<PointId>,
        zeta_y: &L1Vector<PointId>,
    ) -> PairAudit {
        let WitnessParams { n, r } = params;
        let eta_dist = eta_x.l1_distance(eta_y);
        let zeta_dist = zeta_x.l1_distance(zeta_y);
        let m = self.multiplicity;

        // |S_x(j)| for j in [n+1−R, 2n+R], indexed from the window start
        let lo = n + 1 - r;
        let sizes = |p: PointId| -> Vec<usize> {
            (lo..=2 * n + r).map(|j| self.s_set(p, j).len()).collect()
        };
        let sx = sizes(x);
        let sy = sizes(y);
        let size_at = |j: u32| sx[(j - lo) as usize];
        let cardinality_ok = sx.iter().chain(&sy).all(|&s| s >= 1 && s <= m as usize);

        let ratios: Vec<BigRational> =
            (n + 1..=2 * n).map(|k| ratio(size_at(k + r), size_at(k - r))).collect();
        let one = BigRational::one();
        let n_q = BigRational::from_integer(BigInt::from(n));
        let sum_ratios = ratios.iter().fold(BigRational::zero(), |acc, q| acc + q);
        let rhs_chain = BigRational::from_integer(BigInt::from(2))
            * (BigRational::from_integer(BigInt::from(n)) - &sum_ratios)
            / &n_q;

        let mean = &sum_ratios / &n_q;
        let product = ratios.iter().fold(one.clone(), |acc, q| acc * q);
        let telescoped = (2 * n - r + 1..=2 * n + r).fold(one.clone(), |acc, j| acc * ratio(size_at(j), 1))
            / (n - r + 1..=n + r).fold(one.clone(), |acc, j| acc * ratio(size_at(j), 1));
        let floor = BigRational::new(BigInt::one(), BigInt::from(m).pow(2 * r));
        let amgm_ok = product == telescoped && Pow::pow(&mean, n) >= product && product >= floor;

        let nesting_ok = (n + 1..=2 * n).all(|k| self.nesting_unchecked(x, y, k, r).iter().all(|&b| b));

        let rhs_final = theoretical_bound(m, r, n);
        let slack = BigRational::from_float(rhs_final + BOUND_TOLERANCE).expect("bound is finite");
        let chain_ok = zeta_dist <= eta_dist && eta_dist <= rhs_chain && rhs_chain <= slack;

        PairAudit {
            x,
            y,
            eta_dist,
            zeta_dist,
            chain: Some(ChainAudit { rhs_chain, rhs_final, nesting_ok, amgm_ok, cardinality_ok, chain_ok }),
        }
    }

    /// Exact sup of the variation over all ordered pairs at distance ≤ R.
    pub fn report(&self, params: WitnessParams, mode: Mode) -> Result<WitnessReport, WitnessError> {
        let WitnessParams { n, r } = params;
        let top = match mode {
            Mode::Bound => {
                self.check_bound_params(params)?;
                2 * n + r
            }
            Mode::ConstructionOnly => {
                if n == 0 {
                    return Err(WitnessError::ZeroScale);
                }
                2 * n
            }
        };
        for x in self.space.points() {
            self.require_nonempty(x, top)?;
        }

        let points: Vec<PointId> = self.space.points().collect();
        let etas: Vec<L1Vector<ElementId>> = points
            .par_iter()
            .map(|&x| self.eta(n, x).expect("nonempty S-sets were checked"))
            .collect();
        let zetas: Vec<L1Vector<PointId>> = etas.par_iter().map(|e| self.push(e)).collect();

        let support_radius = zetas
            .iter()
            .zip(&points)
            .flat_map(|(z, &x)| z.support().map(move |p| self.space.dist(x, p)))
            .max()
            .unwrap_or(0);

        let pairs: Vec<(PointId, PointId)> = points
            .iter()
            .flat_map(|&x| {
                self.space
                    .row(x)
                    .iter()
                    .enumerate()
                    .filter(|&(_, &d)| d <= r)
                    .map(move |(y, _)| (x, PointId(y as u32)))
            })
            .collect();
        let audits: Vec<PairAudit> = pairs
            .par_iter()
            .map(|&(x, y)| {
                let (ex, ey) = (&etas[x.index()], &etas[y.index()]);
                let (zx, zy) = (&zetas[x.index()], &zetas[y.index()]);
                match mode {
                    Mode::Bound => self.audit_cached(params, x, y, ex, ey, zx, zy),
                    Mode::ConstructionOnly => PairAudit {
                        x,
                        y,
                        eta_dist: ex.l1_distance(ey),
                        zeta_dist: zx.l1_distance(zy),
                        chain: None,
                    },
                }
            })
            .collect();

        // serial reduction in pair order: ties keep the lexicographically first pair
        let mut sup_eta = BigRational::zero();
        let mut worst: Option<&PairAudit> = None;
        for audit in &audits {
            if audit.eta_dist > sup_eta {
                sup_eta = audit.eta_dist.clone();
            }
            let better = match worst {
                None => true,
                Some(w) => (&audit.zeta_dist, &audit.eta_dist) > (&w.zeta_dist, &w.eta_dist),
            };
            if better {
                worst = Some(audit);
            }
        }
        let worst = worst.expect("every point pairs with itself").clone();

        Ok(WitnessReport {
            params,
            mode,
            multiplicity: self.multiplicity,
            mesh: self.mesh,
            ball_lebesgue_global: self.lebesgue.global,
            measured_sup_eta: sup_eta,
            measured_sup_zeta: worst.zeta_dist.clone(),
            bound_final: (mode == Mode::Bound).then(|| theoretical_bound(self.multiplicity, r, n)),
            support_radius,
            worst_pair: worst,
            pairs_examined: audits.len(),
            all_pairs_ok: audits.iter().all(PairAudit::holds),
        })
    }

    /// Whether `m! · n · ζ^n_x` is integer-valued for every `x`.
    pub fn integer_scaling_check(&self, n: u32) -> Result<bool, WitnessError> {
        let scale = BigRational::from_integer(factorial(self.multiplicity) * BigInt::from(n));
        for x in self.space.points() {
            let zeta = self.zeta(n, x)?;
            if !zeta.iter().all(|(_, v)| (v * &scale).is_integer()) {
                return Ok(false);
            }
        }
        Ok(true)
    }
}
