//! Metric time series: assembly, autocorrelation, stationarity tests and the
//! four-moment summary.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphmetrics::NetworkMetrics;

/// The twelve per-partition measurements, in table order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MetricKind {
    Clustering,
    Diameter,
    Radius,
    Cliques,
    Load,
    Transitivity,
    Betweenness,
    ShortestPath,
    Degree,
    Intermittency,
    Nodes,
    Edges,
}

impl MetricKind {
    pub const ALL: [MetricKind; 12] = [
        MetricKind::Clustering,
        MetricKind::Diameter,
        MetricKind::Radius,
        MetricKind::Cliques,
        MetricKind::Load,
        MetricKind::Transitivity,
        MetricKind::Betweenness,
        MetricKind::ShortestPath,
        MetricKind::Degree,
        MetricKind::Intermittency,
        MetricKind::Nodes,
        MetricKind::Edges,
    ];

    pub fn symbol(self) -> &'static str {
        crate::graphmetrics::METRIC_NAMES[self.index()]
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_symbol(s: &str) -> Option<MetricKind> {
        MetricKind::ALL.iter().copied().find(|m| m.symbol() == s)
    }
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSeries {
    pub book: String,
    pub metric: MetricKind,
    pub values: Vec<f64>,
}

/// One series per metric from a book's per-partition table.
pub fn build_series(book: &str, rows: &[NetworkMetrics]) -> Result<Vec<MetricSeries>> {
    if rows.len() < 2 {
        return Err(Error::EmptySeries(book.to_string()));
    }
    let arrays: Vec<[f64; 12]> = rows.iter().map(NetworkMetrics::to_array).collect();
    Ok(MetricKind::ALL
        .iter()
        .map(|&metric| MetricSeries {
            book: book.to_string(),
            metric,
            values: arrays.iter().map(|a| a[metric.index()]).collect(),
        })
        .collect())
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Autocorrelation {
    /// r(0) ..= r(max_lag)
    pub values: Vec<f64>,
    /// Half-width of the 5% significance band, `1.96 / sqrt(T)`.
    pub band: f64,
}

pub fn autocorrelation(x: &[f64], max_lag: usize) -> Result<Autocorrelation> {
    let t = x.len();
    if max_lag < 1 || t <= max_lag {
        return Err(Error::InvalidArgument(format!(
            "need T > max_lag >= 1, got T={t}, max_lag={max_lag}"
        )));
    }
    let m = mean(x);
    let d: Vec<f64> = x.iter().map(|v| v - m).collect();
    let denom: f64 = d.iter().map(|v| v * v).sum();
    if denom == 0.0 {
        return Err(Error::DegenerateSeries);
    }
    let values = (0..=max_lag)
        .map(|lag| d[..t - lag].iter().zip(&d[lag..]).map(|(a, b)| a * b).sum::<f64>() / denom)
        .collect();
    Ok(Autocorrelation {
        values,
        band: 1.96 / (t as f64).sqrt(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TestId {
    #[serde(rename = "KPSS")]
    Kpss,
    #[serde(rename = "ADF")]
    Adf,
    #[serde(rename = "MacKinnon-finite")]
    MackinnonFinite,
    #[serde(rename = "MacKinnon-asymptotic")]
    MackinnonAsymptotic,
}

impl TestId {
    pub const ALL: [TestId; 4] = [
        TestId::Kpss,
        TestId::Adf,
        TestId::MackinnonFinite,
        TestId::MackinnonAsymptotic,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TestId::Kpss => "KPSS",
            TestId::Adf => "ADF",
            TestId::MackinnonFinite => "MacKinnon-finite",
            TestId::MackinnonAsymptotic => "MacKinnon-asymptotic",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NullHypothesis {
    Stationary,
    UnitRoot,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationarityReport {
    pub test: TestId,
    pub statistic: f64,
    pub p_value: f64,
    pub null_hypothesis: NullHypothesis,
    pub reject_at_05: bool,
    pub lags: usize,
}

impl StationarityReport {
    /// Whether the outcome at level `alpha` argues against stationarity:
    /// KPSS rejects, or a unit-root test fails to reject.
    pub fn suggests_nonstationary(&self, alpha: f64) -> bool {
        let reject = self.p_value < alpha;
        match self.null_hypothesis {
            NullHypothesis::Stationary => reject,
            NullHypothesis::UnitRoot => !reject,
        }
    }
}

fn check_len(x: &[f64], min: usize) -> Result<()> {
    if x.len() < min {
        return Err(Error::SeriesTooShort { len: x.len(), min });
    }
    let m = mean(x);
    if x.iter().all(|v| (v - m).abs() == 0.0) {
        return Err(Error::DegenerateSeries);
    }
    Ok(())
}

const MIN_TEST_LEN: usize = 20;

// KPSS level-stationarity critical values at 10%, 5%, 2.5% and 1%.
const KPSS_CRIT: [f64; 4] = [0.347, 0.463, 0.574, 0.739];
const KPSS_PVALS: [f64; 4] = [0.10, 0.05, 0.025, 0.01];

/// Newey–West bandwidth `floor(4 (T/100)^(1/4))`.
pub fn kpss_bandwidth(t: usize) -> usize {
    ((4.0 * (t as f64 / 100.0).powf(0.25)).floor() as usize).min(t - 1)
}

/// KPSS statistic with an explicit bandwidth.
pub fn kpss_statistic(x: &[f64], bandwidth: usize) -> f64 {
    let t = x.len();
    let m = mean(x);
    let e: Vec<f64> = x.iter().map(|v| v - m).collect();
    let mut partial = 0.0;
    let mut eta = 0.0;
    for v in &e {
        partial += v;
        eta += partial * partial;
    }
    let mut s = e.iter().map(|v| v * v).sum::<f64>();
    for lag in 1..=bandwidth {
        let w = 1.0 - lag as f64 / (bandwidth as f64 + 1.0);
        let cov: f64 = e[lag..].iter().zip(&e[..t - lag]).map(|(a, b)| a * b).sum();
        s += 2.0 * w * cov;
    }
    let s = s / t as f64;
    eta / ((t * t) as f64 * s)
}

/// Linear interpolation in the KPSS table; clipped to [0.01, 0.10].
pub fn kpss_p_value(stat: f64) -> f64 {
    if stat <= KPSS_CRIT[0] {
        return KPSS_PVALS[0];
    }
    if stat >= KPSS_CRIT[3] {
        return KPSS_PVALS[3];
    }
    let i = KPSS_CRIT.windows(2).position(|w| stat <= w[1]).unwrap_or(2);
    let frac = (stat - KPSS_CRIT[i]) / (KPSS_CRIT[i + 1] - KPSS_CRIT[i]);
    KPSS_PVALS[i] + frac * (KPSS_PVALS[i + 1] - KPSS_PVALS[i])
}

/// KPSS test of level stationarity (null: stationary).
pub fn kpss_test(x: &[f64]) -> Result<StationarityReport> {
    check_len(x, MIN_TEST_LEN)?;
    let lags = kpss_bandwidth(x.len());
    let statistic = kpss_statistic(x, lags);
    let p_value = kpss_p_value(statistic);
    Ok(StationarityReport {
        test: TestId::Kpss,
        statistic,
        p_value,
        null_hypothesis: NullHypothesis::Stationary,
        reject_at_05: p_value < 0.05,
        lags,
    })
}

/// Which MacKinnon response surface produces the p-value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PValueVariant {
    Finite,
    Asymptotic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LagSelection {
    /// Fixed order `floor(12 (T/100)^(1/4))`.
    Schwert,
    /// Order minimizing AIC, searched up to the Schwert order.
    Aic,
}

/// Schwert's rule `floor(12 (T/100)^(1/4))`.
pub fn schwert_lags(t: usize) -> usize {
    (12.0 * (t as f64 / 100.0).powf(0.25)).floor() as usize
}

// Response-surface coefficients for the tau statistic of a regression with a
// constant and one integrated series.
const TAU_C_STAR: f64 = -1.61;
const TAU_C_MIN: f64 = -18.83;
const TAU_C_MAX: f64 = 2.74;
const TAU_C_SMALLP: [f64; 3] = [2.1659, 1.4412, 3.8269e-2];
const TAU_C_LARGEP: [f64; 4] = [1.7339, 9.3202e-1, -1.2745e-1, -1.0368e-2];
// Finite-sample critical values b0 + b1/T + b2/T^2 + b3/T^3 at 1%, 5%, 10%.
const TAU_C_CRIT: [[f64; 4]; 3] = [
    [-3.43035, -6.5393, -16.786, -79.433],
    [-2.86154, -2.8903, -4.234, -40.040],
    [-2.56677, -1.5384, -2.809, 0.0],
];
const CRIT_LEVELS: [f64; 3] = [0.01, 0.05, 0.10];

pub(crate) fn std_normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Standard normal quantile by bisection then Newton steps on the CDF.
pub(crate) fn std_normal_quantile(p: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0, "quantile needs p in (0, 1)");
    let (mut lo, mut hi) = (-40.0f64, 40.0f64);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if std_normal_cdf(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..3 {
        let pdf = (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
        if pdf > 0.0 {
            x -= (std_normal_cdf(x) - p) / pdf;
        }
    }
    x
}

fn poly(coefs: &[f64], x: f64) -> f64 {
    coefs.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

/// Asymptotic p-value of an ADF tau statistic (constant, no trend).
pub fn mackinnon_p_asymptotic(stat: f64) -> f64 {
    if stat > TAU_C_MAX {
        return 1.0;
    }
    if stat < TAU_C_MIN {
        return 0.0;
    }
    let z = if stat <= TAU_C_STAR {
        poly(&TAU_C_SMALLP, stat)
    } else {
        poly(&TAU_C_LARGEP, stat)
    };
    std_normal_cdf(z)
}

/// Critical values at 1%, 5% and 10% for `nobs` observations (`None` gives
/// the asymptotic values).
pub fn mackinnon_crit(nobs: Option<usize>) -> [f64; 3] {
    let mut out = [0.0; 3];
    for (slot, b) in out.iter_mut().zip(TAU_C_CRIT.iter()) {
        *slot = match nobs {
            None => b[0],
            Some(n) => poly(b, 1.0 / n as f64),
        };
    }
    out
}

/// Finite-sample p-value: the statistic is shifted by the gap between the
/// finite-sample and asymptotic critical values (interpolated in p) and then
/// read off the asymptotic surface.
pub fn mackinnon_p_finite(stat: f64, nobs: usize) -> f64 {
    let finite = mackinnon_crit(Some(nobs));
    let asym = mackinnon_crit(None);
    let shift: Vec<f64> = finite.iter().zip(&asym).map(|(f, a)| f - a).collect();
    let shift_at = |p: f64| -> f64 {
        if p <= CRIT_LEVELS[0] {
            return shift[0];
        }
        if p >= CRIT_LEVELS[2] {
            return shift[2];
        }
        let i = if p <= CRIT_LEVELS[1] { 0 } else { 1 };
        let frac = (p - CRIT_LEVELS[i]) / (CRIT_LEVELS[i + 1] - CRIT_LEVELS[i]);
        shift[i] + frac * (shift[i + 1] - shift[i])
    };
    let mut p = mackinnon_p_asymptotic(stat);
    for _ in 0..100 {
        let next = mackinnon_p_asymptotic(stat - shift_at(p));
        if (next - p).abs() < 1e-14 {
            return next;
        }
        p = next;
    }
    p
}

struct OlsFit {
    coef: DVector<f64>,
    se: DVector<f64>,
    ssr: f64,
}

fn ols(x: &DMatrix<f64>, y: &DVector<f64>) -> Result<OlsFit> {
    let (n, k) = x.shape();
    if n <= k {
        return Err(Error::SingularRegression);
    }
    let qr = x.clone().qr();
    let r = qr.r();
    let max_diag = (0..k).map(|i| r[(i, i)].abs()).fold(0.0, f64::max);
    if max_diag == 0.0 || (0..k).any(|i| r[(i, i)].abs() <= 1e-10 * max_diag) {
        return Err(Error::SingularRegression);
    }
    let qty = qr.q().transpose() * y;
    let coef = r
        .solve_upper_triangular(&qty)
        .ok_or(Error::SingularRegression)?;
    let resid = y - x * &coef;
    let ssr = resid.dot(&resid);
    let sigma2 = ssr / (n - k) as f64;
    let r_inv = r
        .solve_upper_triangular(&DMatrix::identity(k, k))
        .ok_or(Error::SingularRegression)?;
    let cov_diag: Vec<f64> = (0..k).map(|i| r_inv.row(i).norm_squared() * sigma2).collect();
    Ok(OlsFit {
        coef,
        se: DVector::from_iterator(k, cov_diag.into_iter().map(f64::sqrt)),
        ssr,
    })
}

/// Design for `dy_t = a + g*y_{t-1} + sum_i b_i dy_{t-i}` using `sample_lags`
/// to fix the sample and the first `used_lags` lagged differences as regressors.
/// Columns: constant, level, lagged differences.
fn adf_design(x: &[f64], sample_lags: usize, used_lags: usize) -> (DMatrix<f64>, DVector<f64>) {
    let dx: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let nobs = dx.len() - sample_lags;
    let k = 2 + used_lags;
    let mut design = DMatrix::zeros(nobs, k);
    let mut y = DVector::zeros(nobs);
    for row in 0..nobs {
        let t = row + sample_lags;
        y[row] = dx[t];
        design[(row, 0)] = 1.0;
        design[(row, 1)] = x[t];
        for i in 1..=used_lags {
            design[(row, 1 + i)] = dx[t - i];
        }
    }
    (design, y)
}

/// ADF tau statistic and the lag order used.
pub fn adf_statistic(x: &[f64], lags: LagSelection) -> Result<(f64, usize, usize)> {
    check_len(x, MIN_TEST_LEN)?;
    let max_lag = schwert_lags(x.len()).min(x.len() / 2 - 2);
    let used = match lags {
        LagSelection::Schwert => max_lag,
        LagSelection::Aic => {
            let mut best: Option<(f64, usize)> = None;
            for lag in 0..=max_lag {
                let (d, y) = adf_design(x, max_lag, lag);
                let fit = ols(&d, &y)?;
                let n = y.len() as f64;
                let llf = -n / 2.0 * ((2.0 * std::f64::consts::PI).ln() + (fit.ssr / n).ln() + 1.0);
                let aic = -2.0 * llf + 2.0 * d.ncols() as f64;
                if best.is_none_or(|(b, _)| aic < b) {
                    best = Some((aic, lag));
                }
            }
            best.map(|b| b.1).unwrap_or(0)
        }
    };
    let (design, y) = adf_design(x, used, used);
    let fit = ols(&design, &y)?;
    Ok((fit.coef[1] / fit.se[1], used, y.len()))
}

/// Augmented Dickey–Fuller test with a constant (null: unit root), lag order
/// by Schwert's rule.
pub fn adf_test(x: &[f64], variant: PValueVariant) -> Result<StationarityReport> {
    adf_test_with(x, variant, LagSelection::Schwert)
}

pub fn adf_test_with(x: &[f64], variant: PValueVariant, lags: LagSelection) -> Result<StationarityReport> {
    let (statistic, used, nobs) = adf_statistic(x, lags)?;
    let (test, p_value) = match (lags, variant) {
        (LagSelection::Aic, PValueVariant::Asymptotic) => (TestId::Adf, mackinnon_p_asymptotic(statistic)),
        (LagSelection::Aic, PValueVariant::Finite) => (TestId::Adf, mackinnon_p_finite(statistic, nobs)),
        (LagSelection::Schwert, PValueVariant::Asymptotic) => {
            (TestId::MackinnonAsymptotic, mackinnon_p_asymptotic(statistic))
        }
        (LagSelection::Schwert, PValueVariant::Finite) => {
            (TestId::MackinnonFinite, mackinnon_p_finite(statistic, nobs))
        }
    };
    Ok(StationarityReport {
        test,
        statistic,
        p_value,
        null_hypothesis: NullHypothesis::UnitRoot,
        reject_at_05: p_value < 0.05,
        lags: used,
    })
}

/// First four moments of a series: the mean, then signed `i`-th roots of the
/// `i`-th central moments with a `T - 1` denominator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentVector {
    pub metric: MetricKind,
    pub mu: [f64; 4],
}

pub fn moments(x: &[f64]) -> Result<[f64; 4]> {
    if x.len() < 2 {
        return Err(Error::EmptySeries(format!("{} value(s)", x.len())));
    }
    let mu1 = mean(x);
    let denom = (x.len() - 1) as f64;
    let mut out = [mu1, 0.0, 0.0, 0.0];
    for i in 2..=4 {
        let radicand = x.iter().map(|v| (v - mu1).powi(i as i32)).sum::<f64>() / denom;
        out[i - 1] = radicand.signum() * radicand.abs().powf(1.0 / i as f64);
        if radicand == 0.0 {
            out[i - 1] = 0.0;
        }
    }
    Ok(out)
}

pub fn series_moments(s: &MetricSeries) -> Result<MomentVector> {
    Ok(MomentVector {
        metric: s.metric,
        mu: moments(&s.values)?,
    })
}

/// Outcome of one test in the battery.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TestOutcome {
    Report {
        statistic: f64,
        p_value: f64,
        reject_at_05: bool,
    },
    Failed {
        error: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatteryRow {
    pub metric: MetricKind,
    pub tests: BTreeMap<TestId, TestOutcome>,
    /// At least two tests point away from stationarity.
    pub flagged: bool,
}

fn run_test(test: TestId, x: &[f64]) -> Result<StationarityReport> {
    match test {
        TestId::Kpss => kpss_test(x),
        TestId::Adf => adf_test_with(x, PValueVariant::Asymptotic, LagSelection::Aic),
        TestId::MackinnonFinite => adf_test(x, PValueVariant::Finite),
        TestId::MackinnonAsymptotic => adf_test(x, PValueVariant::Asymptotic),
    }
}

/// Runs the four tests on every series. Flagged metrics stay in the output.
pub fn stationarity_battery(series: &[MetricSeries], alpha: f64) -> Vec<BatteryRow> {
    series
        .iter()
        .map(|s| {
            let mut tests = BTreeMap::new();
            let mut against = 0;
            for test in TestId::ALL {
                let outcome = match run_test(test, &s.values) {
                    Ok(r) => {
                        if r.suggests_nonstationary(alpha) {
                            against += 1;
                        }
                        TestOutcome::Report {
                            statistic: r.statistic,
                            p_value: r.p_value,
                            reject_at_05: r.reject_at_05,
                        }
                    }
                    Err(e) => TestOutcome::Failed { error: e.to_string() },
                };
                tests.insert(test, outcome);
            }
            BatteryRow {
                metric: s.metric,
                tests,
                flagged: against >= 2,
            }
        })
        .collect()
}
