//! Detectors for SM and SMX, each instrumented with a real-multiplication
//! counter.
//!
//! - [`sm_ml`], [`smx_ml`]: exhaustive search.
//! - [`sm_rx`]: receive-side sphere decoder. Each candidate accumulates its
//!   distance one real receive dimension at a time and is dropped as soon as
//!   the partial sum leaves the sphere.
//! - [`sm_tx`]: transmit-side sphere decoder. Only candidates inside the
//!   imaginary/real intervals of the triangularized model are scored, see
//!   [`enumerate_theta`].
//! - [`smx_sd`]: depth-first Schnorr-Euchner sphere decoder for SMX on the
//!   same triangularized model.
//!
//! All sphere decoders shrink the radius to the metric of each accepted point
//! and, when a pass finds nothing, quadruple the squared radius and start
//! over. Ties keep the first point found.
//!
//! Operation counts follow fixed per-step coefficients rather than micro-op
//! tallies: 8 per complex metric term for SM-ML, `4(Nt + 1)` per receive
//! antenna and candidate for SMX-ML, 3 per real receive dimension for SM-Rx,
//! and the pre-computation/interval/candidate costs of
//! [`crate::complexity`] for the transmit-side searches.

use num_complex::Complex64;
use thiserror::Error;

use crate::complexity::{c_precomp, c_sm_ml};
use crate::linalg::{build_real_model, ComplexMatrix, LinalgError, OpCounter, RealMatrix, RealModel};
use crate::modem::{smx_gain, Constellation, ImagGroups, Modem, Scheme, TxVector};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DetectError {
    #[error("no candidate inside the sphere (r2 = {r2})")]
    EmptySphere { r2: f64 },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("shape mismatch: {0}")]
    Shape(String),
}

/// Squared search radius and the constant it was derived from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphereRadius {
    pub r2: f64,
    pub alpha: f64,
}

impl SphereRadius {
    pub fn infinite() -> Self {
        Self {
            r2: f64::INFINITY,
            alpha: f64::INFINITY,
        }
    }
}

/// `R^2 = alpha * Nr * sigma_n2`. With `sigma_n2` the total noise variance
/// per receive antenna, `|n|^2 / sigma_n2` is Gamma(Nr, 1), so the
/// transmitted point misses the sphere with probability
/// `Q(Nr, alpha * Nr)`.
pub fn initial_radius(nr: usize, sigma_n2: f64, alpha: f64) -> SphereRadius {
    SphereRadius {
        r2: alpha * nr as f64 * sigma_n2,
        alpha,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectionOutcome {
    pub estimate: TxVector,
    /// Metric of the estimate in the detector's own metric.
    pub metric: f64,
    pub ops: OpCounter,
    /// Candidates whose full metric was computed (SM-Tx), leaves reached
    /// (SMX-SD) or candidates that completed all receive dimensions (SM-Rx).
    pub candidates_inside: u64,
    /// Real-part interval evaluations (SM-Tx only).
    pub n19_evaluations: u64,
    /// Sum over candidates of receive dimensions combined (SM-Rx only).
    pub ntilde_sum: u64,
    pub restarts: u32,
}

impl DetectionOutcome {
    fn new(estimate: TxVector, metric: f64, ops: OpCounter) -> Self {
        Self {
            estimate,
            metric,
            ops,
            candidates_inside: 0,
            n19_evaluations: 0,
            ntilde_sum: 0,
            restarts: 0,
        }
    }
}

fn check_y(y_len: usize, nr: usize) -> Result<(), DetectError> {
    if y_len != nr {
        return Err(DetectError::Shape(format!(
            "received vector has {y_len} entries, channel has {nr} rows"
        )));
    }
    Ok(())
}

/// Exhaustive SM detection over all `Nt * M` (antenna, symbol) pairs.
pub fn sm_ml(
    y: &[Complex64],
    h: &ComplexMatrix,
    constellation: &Constellation,
) -> Result<DetectionOutcome, DetectError> {
    let (nr, nt) = (h.rows(), h.cols());
    check_y(y.len(), nr)?;
    let mut ops = OpCounter::new();
    let mut best = (0, 0, f64::INFINITY);
    for l in 0..nt {
        for (sym, &s) in constellation.points().iter().enumerate() {
            let mut metric = 0.0;
            for r in 0..nr {
                metric += (y[r] - h[(r, l)] * s).norm_sqr();
            }
            ops.add(8 * nr as u64);
            if metric < best.2 {
                best = (l, sym, metric);
            }
        }
    }
    Ok(DetectionOutcome::new(
        TxVector::Sm {
            nt,
            antenna: best.0,
            symbol: best.1,
        },
        best.2,
        ops,
    ))
}

/// Every SMX word with its dense transmit vector, in word order.
#[derive(Debug, Clone)]
pub struct Codebook {
    words: Vec<TxVector>,
    dense: Vec<Vec<Complex64>>,
}

impl Codebook {
    pub fn new(modem: &Modem) -> Self {
        let words = modem.codebook();
        let dense = words.iter().map(|w| modem.dense(w)).collect();
        Self { words, dense }
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn nt(&self) -> usize {
        self.dense.first().map_or(0, Vec::len)
    }
}

/// Exhaustive SMX detection over the full codebook.
pub fn smx_ml(y: &[Complex64], h: &ComplexMatrix, codebook: &Codebook) -> Result<DetectionOutcome, DetectError> {
    let (nr, nt) = (h.rows(), h.cols());
    check_y(y.len(), nr)?;
    if codebook.nt() != nt {
        return Err(DetectError::Shape(format!(
            "codebook has {} antennas, channel has {nt} columns",
            codebook.nt()
        )));
    }
    let per_candidate = 4 * (nt as u64 + 1) * nr as u64;
    let mut ops = OpCounter::new();
    let mut best = (0, f64::INFINITY);
    for (idx, x) in codebook.dense.iter().enumerate() {
        let mut metric = 0.0;
        for r in 0..nr {
            let mut e = y[r];
            for (t, xv) in x.iter().enumerate() {
                e -= h[(r, t)] * xv;
            }
            metric += e.norm_sqr();
        }
        ops.add(per_candidate);
        if metric < best.1 {
            best = (idx, metric);
        }
    }
    Ok(DetectionOutcome::new(codebook.words[best.0].clone(), best.1, ops))
}

/// Receive-side SM sphere decoder on the real-valued model.
///
/// `y_bar` has `2Nr` entries and `h_bar` is the `2Nr x 2Nt` real channel.
/// For each candidate the squared error of one real receive dimension is
/// added at a time (3 operations each); the candidate is abandoned once the
/// partial sum exceeds the current radius. A candidate that completes all
/// `2Nr` dimensions inside the sphere becomes the new radius.
pub fn sm_rx(
    y_bar: &[f64],
    h_bar: &RealMatrix,
    constellation: &Constellation,
    nt: usize,
    radius: SphereRadius,
) -> Result<DetectionOutcome, DetectError> {
    let dims = h_bar.rows();
    if y_bar.len() != dims || h_bar.cols() != 2 * nt {
        return Err(DetectError::Shape(format!(
            "y_bar has {} entries, h_bar is {}x{}, nt = {nt}",
            y_bar.len(),
            h_bar.rows(),
            h_bar.cols()
        )));
    }
    let mut ops = OpCounter::new();
    let mut r2 = radius.r2;
    let mut ntilde_total = 0u64;
    let mut restarts = 0u32;
    loop {
        let mut best: Option<(usize, usize, f64)> = None;
        let mut completed = 0u64;
        let mut ntilde_pass = 0u64;
        for l in 0..nt {
            for (sym, s) in constellation.points().iter().enumerate() {
                let mut acc = 0.0;
                let mut n = 0;
                for r in 0..dims {
                    let e = y_bar[r] - h_bar[(r, l)] * s.re - h_bar[(r, l + nt)] * s.im;
                    acc += e * e;
                    n += 1;
                    if acc > r2 {
                        break;
                    }
                }
                ntilde_pass += n as u64;
                if n == dims && acc <= r2 {
                    completed += 1;
                    if best.is_none_or(|b| acc < b.2) {
                        best = Some((l, sym, acc));
                    }
                    r2 = acc;
                }
            }
        }
        ops.add(3 * ntilde_pass);
        ntilde_total += ntilde_pass;
        if let Some((antenna, symbol, metric)) = best {
            let mut out = DetectionOutcome::new(TxVector::Sm { nt, antenna, symbol }, metric, ops);
            out.ntilde_sum = ntilde_total;
            out.candidates_inside = completed;
            out.restarts = restarts;
            return Ok(out);
        }
        r2 *= 4.0;
        restarts += 1;
    }
}

/// One member of the candidate set found by [`enumerate_theta`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaPoint {
    pub antenna: usize,
    pub symbol: usize,
    pub metric: f64,
}

/// Result of one pass over the SM transmit search space.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaSearch {
    /// Points accepted into the sphere, in enumeration order.
    pub members: Vec<ThetaPoint>,
    /// Index into `members` of the metric minimizer (first on ties).
    pub best: Option<usize>,
    /// Candidates whose full metric was computed.
    pub examined: u64,
    /// Real-part interval evaluations.
    pub n19: u64,
    pub ops: OpCounter,
    /// Squared radius at the end of the pass.
    pub final_r2: f64,
}

impl ThetaSearch {
    pub fn best_point(&self) -> Option<ThetaPoint> {
        self.best.map(|i| self.members[i])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RadiusUpdate {
    /// Shrink the radius to each accepted point's metric.
    Shrink,
    /// Keep the initial radius (emits the full sphere membership set).
    Fixed,
}

/// Candidate indices in `[lo, hi]` ordered by distance to the interval
/// centre; ties keep ascending order.
fn schnorr_euchner<I>(values: I, lo: f64, hi: f64, out: &mut Vec<(f64, usize)>)
where
    I: Iterator<Item = (usize, f64)>,
{
    out.clear();
    let centre = 0.5 * (lo + hi);
    out.extend(values.filter(|&(_, v)| v >= lo && v <= hi).map(|(i, v)| ((v - centre).abs(), i)));
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
}

fn theta_pass(model: &RealModel, groups: &ImagGroups, r2_init: f64, update: RadiusUpdate) -> ThetaSearch {
    let nt = model.nt;
    let d = &model.d_bar;
    let z = &model.z_bar;
    let mut r2 = r2_init;
    let mut ops = OpCounter::new();
    let mut members: Vec<ThetaPoint> = Vec::new();
    let mut best: Option<usize> = None;
    let (mut examined, mut n19) = (0u64, 0u64);
    let mut imag_order = Vec::with_capacity(groups.levels.len());
    let mut real_order = Vec::new();

    for l in 0..nt {
        let il = l + nt;
        // imaginary-part interval from row l + Nt: two divisions
        ops.add(2);
        let r = r2.sqrt();
        let (lo, hi) = ((z[il] - r) / d[(il, il)], (z[il] + r) / d[(il, il)]);
        schnorr_euchner(groups.levels.iter().map(|g| g.imag).enumerate(), lo, hi, &mut imag_order);
        // rows below l + Nt see no transmitted component
        let tail: f64 = (il + 1..2 * nt).map(|v| z[v] * z[v]).sum();

        for &(_, gi) in &imag_order {
            let level = &groups.levels[gi];
            let v = level.imag;
            n19 += 1;
            ops.add(2 * nt as u64 + 3);
            let mut lower = tail;
            for nu in nt..=il {
                let e = z[nu] - d[(nu, il)] * v;
                lower += e * e;
            }
            let rp2 = r2 - lower;
            if rp2 < 0.0 {
                continue;
            }
            let rp = rp2.sqrt();
            let zl = z[l] - d[(l, il)] * v;
            let (lo_re, hi_re) = ((zl - rp) / d[(l, l)], (zl + rp) / d[(l, l)]);
            schnorr_euchner(level.members.iter().map(|m| m.0).enumerate(), lo_re, hi_re, &mut real_order);

            for &(_, mi) in &real_order {
                let (re, symbol) = level.members[mi];
                examined += 1;
                ops.add(3 * nt as u64);
                let mut metric = lower;
                for nu in 0..nt {
                    let e = z[nu] - d[(nu, l)] * re - d[(nu, il)] * v;
                    metric += e * e;
                }
                if metric <= r2 {
                    if best.is_none_or(|b| metric < members[b].metric) {
                        best = Some(members.len());
                    }
                    members.push(ThetaPoint {
                        antenna: l,
                        symbol,
                        metric,
                    });
                    if update == RadiusUpdate::Shrink {
                        r2 = metric;
                    }
                }
            }
        }
    }
    ThetaSearch {
        members,
        best,
        examined,
        n19,
        ops,
        final_r2: r2,
    }
}

/// Enumerates the SM points inside the sphere `|z - D x|^2 <= R^2`.
///
/// For each antenna the distinct imaginary levels are screened by the
/// interval of row `l + Nt` (closest to the interval centre first). Each
/// surviving level fixes the lower half of the metric, which leaves a
/// residual radius `R'` and an interval on the real part from row `l`. Each
/// symbol on that level inside the real interval gets its full metric. The
/// real-part interval is computed once per (antenna, imaginary level).
pub fn enumerate_theta(
    model: &RealModel,
    constellation: &Constellation,
    radius: SphereRadius,
    update: RadiusUpdate,
) -> Result<ThetaSearch, DetectError> {
    let search = theta_pass(model, &constellation.imag_groups(1.0), radius.r2, update);
    if search.members.is_empty() {
        return Err(DetectError::EmptySphere { r2: radius.r2 });
    }
    Ok(search)
}

/// Transmit-side SM sphere decoder with cached constellation tables.
#[derive(Debug, Clone)]
pub struct SmTx {
    groups: ImagGroups,
}

impl SmTx {
    pub fn new(constellation: &Constellation) -> Self {
        Self {
            groups: constellation.imag_groups(1.0),
        }
    }

    pub fn detect(
        &self,
        y: &[Complex64],
        h: &ComplexMatrix,
        sigma_n2: f64,
        radius: SphereRadius,
    ) -> Result<DetectionOutcome, DetectError> {
        let nr = h.rows();
        check_y(y.len(), nr)?;
        let model = build_real_model(h, y, sigma_n2)?;
        self.detect_model(&model, radius)
    }

    pub fn detect_model(&self, model: &RealModel, radius: SphereRadius) -> Result<DetectionOutcome, DetectError> {
        let mut ops = OpCounter::new();
        ops.add(c_precomp(model.nt, model.nr));
        let (mut examined, mut n19) = (0u64, 0u64);
        let mut r2 = radius.r2;
        let mut restarts = 0u32;
        loop {
            let search = theta_pass(model, &self.groups, r2, RadiusUpdate::Shrink);
            ops.add(search.ops.get());
            examined += search.examined;
            n19 += search.n19;
            if let Some(p) = search.best_point() {
                let mut out = DetectionOutcome::new(
                    TxVector::Sm {
                        nt: model.nt,
                        antenna: p.antenna,
                        symbol: p.symbol,
                    },
                    p.metric,
                    ops,
                );
                out.candidates_inside = examined;
                out.n19_evaluations = n19;
                out.restarts = restarts;
                return Ok(out);
            }
            r2 *= 4.0;
            restarts += 1;
        }
    }
}

pub fn sm_tx(
    y: &[Complex64],
    h: &ComplexMatrix,
    constellation: &Constellation,
    sigma_n2: f64,
    radius: SphereRadius,
) -> Result<DetectionOutcome, DetectError> {
    SmTx::new(constellation).detect(y, h, sigma_n2, radius)
}

/// Depth-first Schnorr-Euchner sphere decoder for SMX.
///
/// The real unknowns are ordered `[Re x_0..Re x_{Nt-1}, Im x_0..Im x_{Nt-1}]`
/// and decided from the last row of `D` upwards, so the imaginary part of
/// every antenna is fixed before its real part. That lets non-separable
/// (cross) constellations restrict each real part to the symbols on the
/// chosen imaginary level.
///
/// Cost per visited node: `2Nt + 3` for its interval, the same charge SM-Tx
/// pays per level; 3 per child whose partial distance is evaluated.
#[derive(Debug, Clone)]
pub struct SmxSd {
    groups: ImagGroups,
}

struct SdSearch<'a> {
    nt: usize,
    d: &'a RealMatrix,
    z: &'a [f64],
    groups: &'a ImagGroups,
    r2: f64,
    x: Vec<f64>,
    level_of: Vec<usize>,
    symbol_of: Vec<usize>,
    best: Option<(Vec<usize>, f64)>,
    ops: OpCounter,
    leaves: u64,
    scratch: Vec<Vec<(f64, usize)>>,
}

impl SdSearch<'_> {
    fn visit(&mut self, k: usize, pd: f64) {
        let n = 2 * self.nt;
        let mut c = self.z[k];
        for j in k + 1..n {
            c -= self.d[(k, j)] * self.x[j];
        }
        self.ops.add(n as u64 + 3);
        let dkk = self.d[(k, k)];
        let rem = self.r2 - pd;
        if rem < 0.0 {
            return;
        }
        let half = rem.sqrt();
        let (lo, hi) = ((c - half) / dkk, (c + half) / dkk);
        let mut order = std::mem::take(&mut self.scratch[k]);
        if k >= self.nt {
            schnorr_euchner(self.groups.levels.iter().map(|g| g.imag).enumerate(), lo, hi, &mut order);
        } else {
            let level = &self.groups.levels[self.level_of[k]];
            schnorr_euchner(level.members.iter().map(|m| m.0).enumerate(), lo, hi, &mut order);
        }
        for &(_, idx) in &order {
            let v = if k >= self.nt {
                self.groups.levels[idx].imag
            } else {
                self.groups.levels[self.level_of[k]].members[idx].0
            };
            self.ops.add(3);
            let e = c - dkk * v;
            let npd = pd + e * e;
            if npd > self.r2 {
                break;
            }
            self.x[k] = v;
            if k >= self.nt {
                self.level_of[k - self.nt] = idx;
            } else {
                self.symbol_of[k] = self.groups.levels[self.level_of[k]].members[idx].1;
            }
            if k == 0 {
                self.leaves += 1;
                if self.best.as_ref().is_none_or(|b| npd < b.1) {
                    self.best = Some((self.symbol_of.clone(), npd));
                }
                self.r2 = npd;
            } else {
                self.visit(k - 1, npd);
            }
        }
        self.scratch[k] = order;
    }
}

impl SmxSd {
    pub fn new(constellation: &Constellation, nt: usize) -> Self {
        Self {
            groups: constellation.imag_groups(smx_gain(nt)),
        }
    }

    pub fn detect(
        &self,
        y: &[Complex64],
        h: &ComplexMatrix,
        sigma_n2: f64,
        radius: SphereRadius,
    ) -> Result<DetectionOutcome, DetectError> {
        check_y(y.len(), h.rows())?;
        let model = build_real_model(h, y, sigma_n2)?;
        self.detect_model(&model, radius)
    }

    pub fn detect_model(&self, model: &RealModel, radius: SphereRadius) -> Result<DetectionOutcome, DetectError> {
        let nt = model.nt;
        let mut ops = OpCounter::new();
        ops.add(c_precomp(nt, model.nr));
        let mut r2 = radius.r2;
        let mut restarts = 0u32;
        let mut leaves = 0u64;
        loop {
            let mut s = SdSearch {
                nt,
                d: &model.d_bar,
                z: &model.z_bar,
                groups: &self.groups,
                r2,
                x: vec![0.0; 2 * nt],
                level_of: vec![0; nt],
                symbol_of: vec![0; nt],
                best: None,
                ops: OpCounter::new(),
                leaves: 0,
                scratch: vec![Vec::new(); 2 * nt],
            };
            s.visit(2 * nt - 1, 0.0);
            ops.add(s.ops.get());
            leaves += s.leaves;
            if let Some((symbols, metric)) = s.best {
                let mut out = DetectionOutcome::new(TxVector::Smx { symbols }, metric, ops);
                out.candidates_inside = leaves;
                out.restarts = restarts;
                return Ok(out);
            }
            r2 *= 4.0;
            restarts += 1;
        }
    }
}

pub fn smx_sd(
    y: &[Complex64],
    h: &ComplexMatrix,
    constellation: &Constellation,
    sigma_n2: f64,
    radius: SphereRadius,
) -> Result<DetectionOutcome, DetectError> {
    SmxSd::new(constellation, h.cols()).detect(y, h, sigma_n2, radius)
}

/// Detector selector used by the sweep harness and the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum DetectorKind {
    #[serde(rename = "sm-ml")]
    SmMl,
    #[serde(rename = "sm-rx")]
    SmRx,
    #[serde(rename = "sm-tx")]
    SmTx,
    #[serde(rename = "smx-ml")]
    SmxMl,
    #[serde(rename = "smx-sd")]
    SmxSd,
}

impl DetectorKind {
    pub const ALL: [DetectorKind; 5] = [
        DetectorKind::SmMl,
        DetectorKind::SmRx,
        DetectorKind::SmTx,
        DetectorKind::SmxMl,
        DetectorKind::SmxSd,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DetectorKind::SmMl => "sm-ml",
            DetectorKind::SmRx => "sm-rx",
            DetectorKind::SmTx => "sm-tx",
            DetectorKind::SmxMl => "smx-ml",
            DetectorKind::SmxSd => "smx-sd",
        }
    }

    pub fn scheme(self) -> Scheme {
        match self {
            DetectorKind::SmMl | DetectorKind::SmRx | DetectorKind::SmTx => Scheme::Sm,
            DetectorKind::SmxMl | DetectorKind::SmxSd => Scheme::Smx,
        }
    }

    pub fn uses_radius(self) -> bool {
        matches!(self, DetectorKind::SmRx | DetectorKind::SmTx | DetectorKind::SmxSd)
    }
}

impl std::fmt::Display for DetectorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for DetectorKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        DetectorKind::ALL
            .into_iter()
            .find(|d| d.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown detector `{s}` (expected one of sm-ml, sm-rx, sm-tx, smx-ml, smx-sd)"))
    }
}

/// A ready-to-run detector with its per-system tables built once.
#[derive(Debug, Clone)]
pub enum Detector {
    SmMl,
    SmRx,
    SmTx(SmTx),
    SmxMl(Codebook),
    SmxSd(SmxSd),
}

impl Detector {
    pub fn new(kind: DetectorKind, modem: &Modem) -> Result<Self, DetectError> {
        if kind.scheme() != modem.scheme() {
            return Err(DetectError::Shape(format!(
                "detector {kind} does not apply to {} transmission",
                modem.scheme()
            )));
        }
        Ok(match kind {
            DetectorKind::SmMl => Detector::SmMl,
            DetectorKind::SmRx => Detector::SmRx,
            DetectorKind::SmTx => Detector::SmTx(SmTx::new(modem.constellation())),
            DetectorKind::SmxMl => Detector::SmxMl(Codebook::new(modem)),
            DetectorKind::SmxSd => Detector::SmxSd(SmxSd::new(modem.constellation(), modem.nt())),
        })
    }

    pub fn kind(&self) -> DetectorKind {
        match self {
            Detector::SmMl => DetectorKind::SmMl,
            Detector::SmRx => DetectorKind::SmRx,
            Detector::SmTx(_) => DetectorKind::SmTx,
            Detector::SmxMl(_) => DetectorKind::SmxMl,
            Detector::SmxSd(_) => DetectorKind::SmxSd,
        }
    }

    pub fn detect(
        &self,
        y: &[Complex64],
        h: &ComplexMatrix,
        constellation: &Constellation,
        sigma_n2: f64,
        radius: SphereRadius,
    ) -> Result<DetectionOutcome, DetectError> {
        match self {
            Detector::SmMl => sm_ml(y, h, constellation),
            Detector::SmRx => {
                check_y(y.len(), h.rows())?;
                let y_bar = crate::linalg::real_expand_vector(y);
                let h_bar = crate::linalg::real_expand_matrix(h);
                sm_rx(&y_bar, &h_bar, constellation, h.cols(), radius)
            }
            Detector::SmTx(d) => d.detect(y, h, sigma_n2, radius),
            Detector::SmxMl(book) => smx_ml(y, h, book),
            Detector::SmxSd(d) => d.detect(y, h, sigma_n2, radius),
        }
    }
}

/// `100 * ops / C_SM-ML` at the given spectral efficiency.
pub fn relative_complexity(outcome: &DetectionOutcome, m: u32, nr: usize) -> f64 {
    100.0 * outcome.ops.get() as f64 / c_sm_ml(m, nr) as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{draw_channel, transmit, trial_rng};
    use crate::linalg::{real_expand_matrix, real_expand_vector};
    use rand::Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn radius_examples() {
        assert!((initial_radius(1, 1.0, 13.8).r2 - 13.8).abs() < 1e-12);
        assert!((initial_radius(4, 0.5, 5.3).r2 - 10.6).abs() < 1e-12);
        let a = initial_radius(2, 0.1, 8.3).r2;
        let b = initial_radius(2, 0.2, 8.3).r2;
        assert!((b - 2.0 * a).abs() < 1e-12);
    }

    #[test]
    fn sm_ml_noiseless_and_op_count() {
        let modem = Modem::new(Scheme::Sm, 4, 16).unwrap();
        let mut rng = trial_rng(1, 0);
        let h = draw_channel(2, 4, &mut rng);
        let x = TxVector::Sm { nt: 4, antenna: 1, symbol: 2 };
        let y = transmit(&h, &x, modem.constellation(), 0.0, &mut rng).unwrap();
        let out = sm_ml(&y, &h, modem.constellation()).unwrap();
        assert_eq!(out.estimate, x);
        assert_eq!(out.ops.get(), 1024);
    }

    #[test]
    fn smx_ml_noiseless_and_op_count() {
        let modem = Modem::new(Scheme::Smx, 3, 4).unwrap();
        let book = Codebook::new(&modem);
        let mut rng = trial_rng(2, 0);
        let h = draw_channel(2, 3, &mut rng);
        let x = modem.map_word(45);
        let y = transmit(&h, &x, modem.constellation(), 0.0, &mut rng).unwrap();
        let out = smx_ml(&y, &h, &book).unwrap();
        assert_eq!(out.estimate, x);
        assert_eq!(out.ops.get(), 2048);
    }

    #[test]
    fn sm_ml_matches_brute_force() {
        let modem = Modem::new(Scheme::Sm, 4, 8).unwrap();
        let mut rng = trial_rng(3, 0);
        for _ in 0..100 {
            let h = draw_channel(2, 4, &mut rng);
            let x = modem.map_word(rng.random_range(0..32));
            let y = transmit(&h, &x, modem.constellation(), 0.5, &mut rng).unwrap();
            let out = sm_ml(&y, &h, modem.constellation()).unwrap();
            let brute = modem
                .codebook()
                .into_iter()
                .map(|cand| {
                    let hx = h.mul_vec(&modem.dense(&cand));
                    let d: f64 = y.iter().zip(&hx).map(|(a, b)| (a - b).norm_sqr()).sum();
                    (cand, d)
                })
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .unwrap();
            assert_eq!(out.estimate, brute.0);
        }
    }

    #[test]
    fn sm_rx_infinite_radius_is_ml_with_full_dimensions() {
        let modem = Modem::new(Scheme::Sm, 4, 4).unwrap();
        let mut rng = trial_rng(4, 0);
        for _ in 0..1000 {
            let h = draw_channel(3, 4, &mut rng);
            let x = modem.map_word(rng.random_range(0..16));
            let y = transmit(&h, &x, modem.constellation(), 0.3, &mut rng).unwrap();
            let ml = sm_ml(&y, &h, modem.constellation()).unwrap();
            let rx = sm_rx(
                &real_expand_vector(&y),
                &real_expand_matrix(&h),
                modem.constellation(),
                4,
                SphereRadius::infinite(),
            )
            .unwrap();
            assert_eq!(rx.estimate, ml.estimate);
            assert!((rx.metric - ml.metric).abs() < 1e-9);
            // the first candidate always completes, later ones may be cut
            assert!(rx.ntilde_sum >= 16 && rx.ntilde_sum <= 16 * 6);
            assert_eq!(rx.ops.get(), 3 * rx.ntilde_sum);
        }
    }

    #[test]
    fn sm_rx_noiseless_generous_radius() {
        let modem = Modem::new(Scheme::Sm, 2, 16).unwrap();
        let mut rng = trial_rng(5, 0);
        let h = draw_channel(2, 2, &mut rng);
        let x = TxVector::Sm { nt: 2, antenna: 1, symbol: 9 };
        let y = transmit(&h, &x, modem.constellation(), 0.0, &mut rng).unwrap();
        let out = sm_rx(
            &real_expand_vector(&y),
            &real_expand_matrix(&h),
            modem.constellation(),
            2,
            initial_radius(2, 0.1, 8.3),
        )
        .unwrap();
        assert_eq!(out.estimate, x);
        assert_eq!(out.restarts, 0);
        assert!(out.ops.get() >= 3 * 32 && out.ops.get() <= 6 * 2 * 32);
    }

    #[test]
    fn sm_rx_restarts_when_sphere_is_empty() {
        let modem = Modem::new(Scheme::Sm, 2, 4).unwrap();
        let mut rng = trial_rng(6, 0);
        let h = draw_channel(2, 2, &mut rng);
        let x = modem.map_word(5);
        let y = transmit(&h, &x, modem.constellation(), 1.0, &mut rng).unwrap();
        let tiny = SphereRadius { r2: 1e-9, alpha: 0.0 };
        let out = sm_rx(&real_expand_vector(&y), &real_expand_matrix(&h), modem.constellation(), 2, tiny).unwrap();
        let ml = sm_ml(&y, &h, modem.constellation()).unwrap();
        assert!(out.restarts > 0);
        assert_eq!(out.estimate, ml.estimate);
    }

    #[test]
    fn theta_exact_match_only() {
        // D = I, z = expand(e_1 * s_1): only (antenna 0, symbol 0) is within 0.1.
        let qpsk = Constellation::new(4).unwrap();
        let s = qpsk.point(0);
        let model = RealModel {
            nt: 2,
            nr: 2,
            h_bar: RealMatrix::identity(4),
            g_bar: RealMatrix::identity(4),
            d_bar: RealMatrix::identity(4),
            rho_bar: real_expand_vector(&[s, c(0.0, 0.0)]),
            z_bar: real_expand_vector(&[s, c(0.0, 0.0)]),
            phi: 0.0,
        };
        let r = SphereRadius { r2: 0.01, alpha: 0.0 };
        let search = enumerate_theta(&model, &qpsk, r, RadiusUpdate::Fixed).unwrap();
        assert_eq!(search.members.len(), 1);
        assert_eq!((search.members[0].antenna, search.members[0].symbol), (0, 0));
        assert!(search.members[0].metric < 1e-30);
    }

    fn brute_theta(model: &RealModel, modem: &Modem, r2: f64) -> Vec<(usize, usize)> {
        let mut v: Vec<_> = modem
            .codebook()
            .into_iter()
            .filter_map(|x| {
                let metric = model.metric(&real_expand_vector(&modem.dense(&x)));
                match x {
                    TxVector::Sm { antenna, symbol, .. } if metric <= r2 => Some((antenna, symbol)),
                    _ => None,
                }
            })
            .collect();
        v.sort_unstable();
        v
    }

    #[test]
    fn theta_matches_brute_force_small() {
        let modem = Modem::new(Scheme::Sm, 2, 4).unwrap();
        let mut rng = trial_rng(7, 0);
        for trial in 0..200 {
            let nr = 1 + trial % 3;
            let h = draw_channel(nr, 2, &mut rng);
            let x = modem.map_word(rng.random_range(0..8));
            let y = transmit(&h, &x, modem.constellation(), 0.5, &mut rng).unwrap();
            let model = build_real_model(&h, &y, 0.5).unwrap();
            let r2 = rng.random_range(0.05..3.0);
            let expected = brute_theta(&model, &modem, r2);
            let got = enumerate_theta(&model, modem.constellation(), SphereRadius { r2, alpha: 0.0 }, RadiusUpdate::Fixed);
            match got {
                Ok(search) => {
                    let mut pts: Vec<_> = search.members.iter().map(|p| (p.antenna, p.symbol)).collect();
                    pts.sort_unstable();
                    assert_eq!(pts, expected);
                }
                Err(DetectError::EmptySphere { .. }) => assert!(expected.is_empty()),
                Err(e) => panic!("{e}"),
            }
        }
    }

    #[test]
    fn imaginary_interval_matches_scalar_inequality() {
        // A level passes the imaginary interval iff |z_{l+Nt} - D v| <= R.
        let modem = Modem::new(Scheme::Sm, 4, 16).unwrap();
        let groups = modem.constellation().imag_groups(1.0);
        let mut rng = trial_rng(8, 0);
        let mut order = Vec::new();
        for _ in 0..100 {
            let h = draw_channel(4, 4, &mut rng);
            let x = modem.map_word(rng.random_range(0..64));
            let y = transmit(&h, &x, modem.constellation(), 0.2, &mut rng).unwrap();
            let m = build_real_model(&h, &y, 0.2).unwrap();
            let r: f64 = rng.random_range(0.1..1.5);
            for l in 0..4 {
                let il = l + 4;
                let dd = m.d_bar[(il, il)];
                let (lo, hi) = ((m.z_bar[il] - r) / dd, (m.z_bar[il] + r) / dd);
                schnorr_euchner(groups.levels.iter().map(|g| g.imag).enumerate(), lo, hi, &mut order);
                for (gi, g) in groups.levels.iter().enumerate() {
                    let scalar = (m.z_bar[il] - dd * g.imag).abs() <= r;
                    let inside = order.iter().any(|&(_, i)| i == gi);
                    if ((m.z_bar[il] - dd * g.imag).abs() - r).abs() > 1e-12 {
                        assert_eq!(scalar, inside);
                    }
                }
                // closest to centre first
                for w in order.windows(2) {
                    assert!(w[0].0 <= w[1].0);
                }
            }
        }
    }

    #[test]
    fn sm_tx_equals_ml_when_determined() {
        let modem = Modem::new(Scheme::Sm, 2, 16).unwrap();
        let tx = SmTx::new(modem.constellation());
        let mut rng = trial_rng(9, 0);
        let sigma_n2 = 0.1;
        let radius = initial_radius(4, sigma_n2, 5.3);
        for _ in 0..1000 {
            let h = draw_channel(4, 2, &mut rng);
            let x = modem.map_word(rng.random_range(0..32));
            let y = transmit(&h, &x, modem.constellation(), sigma_n2, &mut rng).unwrap();
            let ml = sm_ml(&y, &h, modem.constellation()).unwrap();
            let out = tx.detect(&y, &h, sigma_n2, radius).unwrap();
            assert_eq!(out.estimate, ml.estimate);
            assert!(
                out.ops.get()
                    <= crate::complexity::c_tx_bound(2, 4, out.candidates_inside, out.n19_evaluations)
            );
        }
    }

    #[test]
    fn sm_tx_noiseless_generous_radius() {
        let modem = Modem::new(Scheme::Sm, 4, 4).unwrap();
        let mut rng = trial_rng(10, 0);
        let h = draw_channel(2, 4, &mut rng);
        let x = TxVector::Sm { nt: 4, antenna: 2, symbol: 3 };
        let y = transmit(&h, &x, modem.constellation(), 0.0, &mut rng).unwrap();
        let out = sm_tx(&y, &h, modem.constellation(), 1e-3, initial_radius(2, 1.0, 8.3)).unwrap();
        assert_eq!(out.estimate, x);
        assert_eq!(out.restarts, 0);
    }

    #[test]
    fn sm_tx_radius_shrinks_monotonically() {
        let modem = Modem::new(Scheme::Sm, 4, 16).unwrap();
        let mut rng = trial_rng(11, 0);
        for _ in 0..200 {
            let h = draw_channel(2, 4, &mut rng);
            let x = modem.map_word(rng.random_range(0..64));
            let y = transmit(&h, &x, modem.constellation(), 0.3, &mut rng).unwrap();
            let model = build_real_model(&h, &y, 0.3).unwrap();
            if let Ok(s) = enumerate_theta(&model, modem.constellation(), initial_radius(2, 0.3, 8.3), RadiusUpdate::Shrink) {
                for w in s.members.windows(2) {
                    assert!(w[1].metric <= w[0].metric);
                }
                assert_eq!(s.best_point().unwrap().metric, s.final_r2);
            }
        }
    }

    #[test]
    fn smx_sd_noiseless_and_ml_agreement() {
        let modem = Modem::new(Scheme::Smx, 2, 8).unwrap();
        let book = Codebook::new(&modem);
        let sd = SmxSd::new(modem.constellation(), 2);
        let mut rng = trial_rng(12, 0);
        let h = draw_channel(2, 2, &mut rng);
        let x = modem.map_word(37);
        let y = transmit(&h, &x, modem.constellation(), 0.0, &mut rng).unwrap();
        assert_eq!(sd.detect(&y, &h, 1e-3, initial_radius(2, 1e-3, 8.3)).unwrap().estimate, x);

        let sigma_n2 = 0.05;
        for _ in 0..1000 {
            let h = draw_channel(2, 2, &mut rng);
            let x = modem.map_word(rng.random_range(0..64));
            let y = transmit(&h, &x, modem.constellation(), sigma_n2, &mut rng).unwrap();
            let ml = smx_ml(&y, &h, &book).unwrap();
            let out = sd.detect(&y, &h, sigma_n2, initial_radius(2, sigma_n2, 8.3)).unwrap();
            assert_eq!(out.estimate, ml.estimate);
        }
    }

    #[test]
    fn smx_sd_handles_cross_constellations() {
        let modem = Modem::new(Scheme::Smx, 2, 32).unwrap();
        let book = Codebook::new(&modem);
        let sd = SmxSd::new(modem.constellation(), 2);
        let mut rng = trial_rng(13, 0);
        for _ in 0..300 {
            let h = draw_channel(3, 2, &mut rng);
            let x = modem.map_word(rng.random_range(0..1024));
            let y = transmit(&h, &x, modem.constellation(), 0.02, &mut rng).unwrap();
            let ml = smx_ml(&y, &h, &book).unwrap();
            let out = sd.detect(&y, &h, 0.02, SphereRadius::infinite()).unwrap();
            assert_eq!(out.estimate, ml.estimate);
        }
    }

    #[test]
    fn detector_kind_round_trip() {
        for k in DetectorKind::ALL {
            assert_eq!(k.name().parse::<DetectorKind>(), Ok(k));
        }
        assert!("sm-foo".parse::<DetectorKind>().is_err());
        let sm = Modem::new(Scheme::Sm, 2, 2).unwrap();
        assert!(Detector::new(DetectorKind::SmxSd, &sm).is_err());
    }
}
