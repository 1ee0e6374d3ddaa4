//! Efficiency functions: execution-time multipliers as a function of the
//! resource a hardware unit receives.
//!
//! Every variant maps `x > 0` to a positive multiplier that is non-increasing
//! in `x`. Power laws are the workhorse (`1/(alpha * x^beta)`; `alpha = 1`
//! is the baseline general-purpose core), the cache and branch variants model
//! CPU-internal units whose hit/prediction rate saturates with resource.

use super::ModelError;

/// Rate curve `1 - (1 - base) * x^(-rate)`, clamped to `[0, 1)`.
///
/// `value(1) == base` and the curve approaches 1 as `x` grows. Below the
/// activation point `(1 - base)^(1/rate)` (always `<= 1`) the curve is clamped
/// to zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SaturatingCurve {
    base: f64,
    rate: f64,
}

impl SaturatingCurve {
    pub fn new(base: f64, rate: f64) -> Result<Self, ModelError> {
        if !(0.0..1.0).contains(&base) {
            return Err(ModelError::InvalidParameter(format!(
                "saturating curve base must lie in [0, 1), got {base}"
            )));
        }
        if !(rate.is_finite() && rate > 0.0) {
            return Err(ModelError::InvalidParameter(format!(
                "saturating curve rate must be positive, got {rate}"
            )));
        }
        Ok(Self { base, rate })
    }

    pub fn base(&self) -> f64 {
        self.base
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    /// Complement `1 - value(x)`, computed without cancellation.
    pub fn complement(&self, x: f64) -> f64 {
        ((1.0 - self.base) * x.powf(-self.rate)).min(1.0)
    }

    pub fn value(&self, x: f64) -> f64 {
        1.0 - self.complement(x)
    }

    /// Derivative of `value`; zero on the clamped region.
    pub fn deriv(&self, x: f64) -> f64 {
        if x < self.activation_point() {
            0.0
        } else {
            (1.0 - self.base) * self.rate * x.powf(-self.rate - 1.0)
        }
    }

    /// Smallest `x` at which the curve leaves zero.
    pub fn activation_point(&self) -> f64 {
        (1.0 - self.base).powf(1.0 / self.rate)
    }
}

/// Piecewise power law through a table of `(x, f(x))` samples.
///
/// `log f` is interpolated linearly in `log x`, which reproduces power laws
/// exactly and keeps the curve positive and monotone.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedCurve {
    xs: Vec<f64>,
    fs: Vec<f64>,
    log_xs: Vec<f64>,
    log_fs: Vec<f64>,
}

impl TabulatedCurve {
    pub fn new(points: &[(f64, f64)]) -> Result<Self, ModelError> {
        if points.len() < 2 {
            return Err(ModelError::InvalidParameter(
                "tabulated function needs at least two points".into(),
            ));
        }
        for (i, &(x, f)) in points.iter().enumerate() {
            if !(x.is_finite() && x > 0.0 && f.is_finite() && f > 0.0) {
                return Err(ModelError::InvalidParameter(format!(
                    "tabulated point {i} = ({x}, {f}) must be finite and positive"
                )));
            }
        }
        for (i, w) in points.windows(2).enumerate() {
            if w[1].0 <= w[0].0 {
                return Err(ModelError::InvalidParameter(format!(
                    "tabulated x values must be strictly increasing (point {})",
                    i + 1
                )));
            }
            if w[1].1 >= w[0].1 {
                return Err(ModelError::InvalidParameter(format!(
                    "tabulated function must be strictly decreasing (point {})",
                    i + 1
                )));
            }
        }
        let xs: Vec<f64> = points.iter().map(|p| p.0).collect();
        let fs: Vec<f64> = points.iter().map(|p| p.1).collect();
        Ok(Self {
            log_xs: xs.iter().map(|x| x.ln()).collect(),
            log_fs: fs.iter().map(|f| f.ln()).collect(),
            xs,
            fs,
        })
    }

    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.xs.iter().copied().zip(self.fs.iter().copied())
    }

    pub fn lower(&self) -> f64 {
        self.xs[0]
    }

    pub fn upper(&self) -> f64 {
        self.xs[self.xs.len() - 1]
    }

    fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        // index of the first knot strictly greater than x, kept inside 1..n
        let hi = self.xs.partition_point(|&k| k <= x).clamp(1, n - 1);
        let lo = hi - 1;
        if x == self.xs[lo] {
            return self.fs[lo];
        }
        if x == self.xs[hi] {
            return self.fs[hi];
        }
        let s = (x.ln() - self.log_xs[lo]) / (self.log_xs[hi] - self.log_xs[lo]);
        (self.log_fs[lo] + s * (self.log_fs[hi] - self.log_fs[lo])).exp()
    }

    /// Log-log slopes between consecutive knots are non-decreasing.
    pub fn is_convex(&self) -> bool {
        let slopes: Vec<f64> = (1..self.xs.len())
            .map(|i| (self.log_fs[i] - self.log_fs[i - 1]) / (self.log_xs[i] - self.log_xs[i - 1]))
            .collect();
        slopes.windows(2).all(|w| w[1] >= w[0] - 1e-12 * w[0].abs())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum EfficiencyFunction {
    /// `1 / (alpha * x^beta)`.
    PowerLaw {
        alpha: f64,
        beta: f64,
    },
    /// `hit(x) * t_hit + (1 - hit(x)) * t_miss`.
    Cache {
        hit_curve: SaturatingCurve,
        t_hit: f64,
        t_miss: f64,
    },
    /// `(1 - predict(x)) * t_mispredict`.
    Branch {
        predict_curve: SaturatingCurve,
        t_mispredict: f64,
    },
    /// `t_unit / x`.
    Throughput {
        t_unit: f64,
    },
    Tabulated(TabulatedCurve),
}

fn positive(name: &str, v: f64) -> Result<(), ModelError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(ModelError::InvalidParameter(format!(
            "{name} must be positive and finite, got {v}"
        )))
    }
}

impl EfficiencyFunction {
    pub fn power_law(alpha: f64, beta: f64) -> Result<Self, ModelError> {
        let f = Self::PowerLaw { alpha, beta };
        f.validate()?;
        Ok(f)
    }

    pub fn throughput(t_unit: f64) -> Result<Self, ModelError> {
        let f = Self::Throughput { t_unit };
        f.validate()?;
        Ok(f)
    }

    pub fn cache(hit_curve: SaturatingCurve, t_hit: f64, t_miss: f64) -> Result<Self, ModelError> {
        let f = Self::Cache {
            hit_curve,
            t_hit,
            t_miss,
        };
        f.validate()?;
        Ok(f)
    }

    pub fn branch(predict_curve: SaturatingCurve, t_mispredict: f64) -> Result<Self, ModelError> {
        let f = Self::Branch {
            predict_curve,
            t_mispredict,
        };
        f.validate()?;
        Ok(f)
    }

    pub fn tabulated(points: &[(f64, f64)]) -> Result<Self, ModelError> {
        Ok(Self::Tabulated(TabulatedCurve::new(points)?))
    }

    /// Re-checks parameters; variants are plain data so they can be built
    /// literally and validated later.
    pub fn validate(&self) -> Result<(), ModelError> {
        match self {
            Self::PowerLaw { alpha, beta } => {
                positive("power-law alpha", *alpha)?;
                positive("power-law beta", *beta)
            }
            Self::Throughput { t_unit } => positive("throughput t_unit", *t_unit),
            Self::Cache {
                hit_curve,
                t_hit,
                t_miss,
            } => {
                SaturatingCurve::new(hit_curve.base, hit_curve.rate)?;
                positive("cache t_hit", *t_hit)?;
                positive("cache t_miss", *t_miss)?;
                if t_miss <= t_hit {
                    return Err(ModelError::InvalidParameter(format!(
                        "cache t_miss ({t_miss}) must exceed t_hit ({t_hit})"
                    )));
                }
                Ok(())
            }
            Self::Branch {
                predict_curve,
                t_mispredict,
            } => {
                SaturatingCurve::new(predict_curve.base, predict_curve.rate)?;
                positive("branch t_mispredict", *t_mispredict)
            }
            Self::Tabulated(_) => Ok(()),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Self::PowerLaw { .. } => "power_law",
            Self::Cache { .. } => "cache",
            Self::Branch { .. } => "branch",
            Self::Throughput { .. } => "throughput",
            Self::Tabulated(_) => "tabulated",
        }
    }

    /// Closed interval of admissible resource values (lower end exclusive
    /// when it is zero).
    pub fn domain(&self) -> (f64, f64) {
        match self {
            Self::Tabulated(t) => (t.lower(), t.upper()),
            _ => (0.0, f64::INFINITY),
        }
    }

    fn check_domain(&self, x: f64) -> Result<(), ModelError> {
        let (lo, hi) = self.domain();
        let ok = x.is_finite() && x > 0.0 && x >= lo && x <= hi;
        if ok {
            Ok(())
        } else {
            Err(ModelError::Domain {
                function: self.kind(),
                value: x,
            })
        }
    }

    pub fn eval(&self, x: f64) -> Result<f64, ModelError> {
        self.check_domain(x)?;
        Ok(self.eval_unchecked(x))
    }

    pub(crate) fn eval_unchecked(&self, x: f64) -> f64 {
        match self {
            Self::PowerLaw { alpha, beta } => 1.0 / (alpha * x.powf(*beta)),
            Self::Throughput { t_unit } => t_unit / x,
            Self::Cache {
                hit_curve,
                t_hit,
                t_miss,
            } => t_hit + (t_miss - t_hit) * hit_curve.complement(x),
            Self::Branch {
                predict_curve,
                t_mispredict,
            } => t_mispredict * predict_curve.complement(x),
            Self::Tabulated(t) => t.eval(x),
        }
    }

    pub fn eval_deriv(&self, x: f64) -> Result<f64, ModelError> {
        self.check_domain(x)?;
        Ok(self.deriv_unchecked(x))
    }

    pub(crate) fn deriv_unchecked(&self, x: f64) -> f64 {
        match self {
            Self::PowerLaw { alpha, beta } => -beta / (alpha * x.powf(beta + 1.0)),
            Self::Throughput { t_unit } => -t_unit / (x * x),
            Self::Cache {
                hit_curve,
                t_hit,
                t_miss,
            } => -(t_miss - t_hit) * hit_curve.deriv(x),
            Self::Branch {
                predict_curve,
                t_mispredict,
            } => -t_mispredict * predict_curve.deriv(x),
            Self::Tabulated(t) => {
                let h = (1e-6 * x).max(1e-9);
                let (lo, hi) = (t.lower(), t.upper());
                let a = (x - h).max(lo);
                let b = (x + h).min(hi);
                (t.eval(b) - t.eval(a)) / (b - a)
            }
        }
    }

    /// Point from which the function is convex and strictly decreasing.
    /// Below it the cache and branch variants are flat.
    pub fn convex_from(&self) -> f64 {
        match self {
            Self::Cache { hit_curve, .. } => hit_curve.activation_point(),
            Self::Branch { predict_curve, .. } => predict_curve.activation_point(),
            Self::Tabulated(t) => t.lower(),
            _ => 0.0,
        }
    }

    /// Whether the function is convex on `[convex_from(), domain().1]`.
    pub fn is_convex(&self) -> bool {
        match self {
            Self::Tabulated(t) => t.is_convex(),
            _ => true,
        }
    }

    /// `f(x) -> infinity` as `x -> 0`, i.e. a unit with no resource has no
    /// throughput at all.
    pub fn starves_at_zero(&self) -> bool {
        matches!(self, Self::PowerLaw { .. } | Self::Throughput { .. })
    }

    /// Solves `weight * f'(x) = -slope` for `x`, with `slope > 0`.
    ///
    /// Uses the closed form where one exists and monotone bisection
    /// otherwise. The result is clamped to the convex part of the domain.
    pub fn marginal_inverse(&self, weight: f64, slope: f64) -> f64 {
        let clamp = |x: f64| {
            let (_, hi) = self.domain();
            x.max(self.convex_from()).min(hi)
        };
        match self {
            Self::PowerLaw { alpha, beta } => clamp((weight * beta / (alpha * slope)).powf(1.0 / (beta + 1.0))),
            Self::Throughput { t_unit } => clamp((weight * t_unit / slope).sqrt()),
            Self::Cache {
                hit_curve,
                t_hit,
                t_miss,
            } => {
                let c = (t_miss - t_hit) * (1.0 - hit_curve.base) * hit_curve.rate;
                clamp((weight * c / slope).powf(1.0 / (hit_curve.rate + 1.0)))
            }
            Self::Branch {
                predict_curve,
                t_mispredict,
            } => {
                let c = t_mispredict * (1.0 - predict_curve.base) * predict_curve.rate;
                clamp((weight * c / slope).powf(1.0 / (predict_curve.rate + 1.0)))
            }
            Self::Tabulated(_) => self.marginal_inverse_bisect(weight, slope),
        }
    }

    /// Generic inversion of the weighted marginal by bisection in `log x`.
    pub fn marginal_inverse_bisect(&self, weight: f64, slope: f64) -> f64 {
        let (dom_lo, dom_hi) = self.domain();
        let mut lo = self.convex_from().max(dom_lo).max(1e-300);
        let mut hi = if dom_hi.is_finite() { dom_hi } else { 1e300 };
        // steeper than the target means the unit still wants more resource
        let wants_more = |x: f64| weight * self.deriv_unchecked(x) < -slope;
        if !wants_more(lo) {
            return lo;
        }
        if wants_more(hi) {
            return hi;
        }
        for _ in 0..200 {
            let mid = (lo.ln() + 0.5 * (hi.ln() - lo.ln())).exp();
            if mid <= lo || mid >= hi {
                break;
            }
            if wants_more(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1e-300)
    }

    #[test]
    fn power_law_examples() {
        let acc = EfficiencyFunction::power_law(100.0, 0.5).unwrap();
        assert!(close(acc.eval(1.0).unwrap(), 0.01, 1e-15));
        assert!(close(acc.eval(4.0).unwrap(), 0.005, 1e-15));
        let bgp = EfficiencyFunction::power_law(1.0, 1.0).unwrap();
        assert_eq!(bgp.eval(1.0).unwrap(), 1.0);
        assert!(close(bgp.eval_deriv(2.0).unwrap(), -0.25, 1e-15));
        let pollack = EfficiencyFunction::power_law(1.0, 0.5).unwrap();
        assert!(close(pollack.eval_deriv(4.0).unwrap(), -0.0625, 1e-15));
    }

    #[test]
    fn throughput_divides() {
        let f = EfficiencyFunction::throughput(2.0).unwrap();
        assert_eq!(f.eval(4.0).unwrap(), 0.5);
        assert_eq!(f.eval_deriv(4.0).unwrap(), -0.125);
    }

    #[test]
    fn domain_errors() {
        let f = EfficiencyFunction::power_law(1.0, 1.0).unwrap();
        assert!(matches!(f.eval(0.0), Err(ModelError::Domain { .. })));
        assert!(matches!(f.eval(-1.0), Err(ModelError::Domain { .. })));
        assert!(matches!(f.eval_deriv(f64::NAN), Err(ModelError::Domain { .. })));
        let t = EfficiencyFunction::tabulated(&[(1.0, 1.0), (2.0, 0.5)]).unwrap();
        assert!(t.eval(0.5).is_err());
        assert!(t.eval(2.5).is_err());
        assert!(t.eval(2.0).is_ok());
    }

    #[test]
    fn invalid_parameters_rejected() {
        assert!(EfficiencyFunction::power_law(0.0, 1.0).is_err());
        assert!(EfficiencyFunction::power_law(1.0, -1.0).is_err());
        assert!(EfficiencyFunction::throughput(f64::INFINITY).is_err());
        let c = SaturatingCurve::new(0.5, 0.5).unwrap();
        assert!(EfficiencyFunction::cache(c, 10.0, 1.0).is_err());
        assert!(SaturatingCurve::new(1.0, 0.5).is_err());
        assert!(SaturatingCurve::new(0.5, 0.0).is_err());
        assert!(EfficiencyFunction::tabulated(&[(1.0, 1.0)]).is_err());
        assert!(EfficiencyFunction::tabulated(&[(1.0, 1.0), (2.0, 1.0)]).is_err());
        assert!(EfficiencyFunction::tabulated(&[(2.0, 1.0), (1.0, 0.5)]).is_err());
    }

    #[test]
    fn saturating_curve_shape() {
        let c = SaturatingCurve::new(0.8, 0.5).unwrap();
        assert!(close(c.value(1.0), 0.8, 1e-15));
        assert!(c.value(1e12) < 1.0);
        assert!(c.value(1e12) > 0.999_999);
        assert!(close(c.activation_point(), 0.04, 1e-12));
        assert_eq!(c.value(0.01), 0.0);
        assert_eq!(c.deriv(0.01), 0.0);
    }

    #[test]
    fn tabulated_is_exact_for_power_laws() {
        let pts: Vec<(f64, f64)> = (0..20)
            .map(|i| {
                let x = 0.5 * 1.3f64.powi(i);
                (x, 3.0 * x.powf(-0.7))
            })
            .collect();
        let t = EfficiencyFunction::tabulated(&pts).unwrap();
        for x in [0.6, 1.0, 2.0, 7.5] {
            assert!(close(t.eval(x).unwrap(), 3.0 * f64::powf(x, -0.7), 1e-12));
        }
        match &t {
            EfficiencyFunction::Tabulated(c) => assert!(c.is_convex()),
            _ => unreachable!(),
        }
    }

    #[test]
    fn tabulated_derivative_matches_analytic_oracle() {
        // f(x) = 1/x sampled densely; analytic f'(2) = -0.25.
        let pts: Vec<(f64, f64)> = (0..=400)
            .map(|i| {
                let x = 0.5 + i as f64 * 0.01;
                (x, 1.0 / x)
            })
            .collect();
        let t = EfficiencyFunction::tabulated(&pts).unwrap();
        let d = t.eval_deriv(2.0).unwrap();
        assert!((d + 0.25).abs() < 1e-4, "{d}");
        // one-sided at the table edge stays finite
        assert!(t.eval_deriv(0.5).unwrap() < 0.0);
    }

    #[test]
    fn non_convex_table_detected() {
        let t = TabulatedCurve::new(&[(1.0, 1.0), (2.0, 0.9), (3.0, 0.2)]).unwrap();
        assert!(!t.is_convex());
    }

    #[test]
    fn marginal_inverse_closed_forms_agree_with_bisection() {
        let c = SaturatingCurve::new(0.8, 0.5).unwrap();
        let fs = [
            EfficiencyFunction::power_law(3.0, 0.7).unwrap(),
            EfficiencyFunction::throughput(2.5).unwrap(),
            EfficiencyFunction::cache(c, 1.0, 40.0).unwrap(),
            EfficiencyFunction::branch(c, 12.0).unwrap(),
        ];
        for f in &fs {
            for slope in [1e-3, 0.1, 1.0, 5.0] {
                let a = f.marginal_inverse(0.7, slope);
                let b = f.marginal_inverse_bisect(0.7, slope);
                assert!(close(a, b, 1e-9), "{} {slope}: {a} vs {b}", f.kind());
                if a > f.convex_from() {
                    assert!(close(0.7 * f.deriv_unchecked(a), -slope, 1e-9));
                }
            }
        }
    }

    #[test]
    fn cache_bounded_by_hit_and_miss_times() {
        let c = SaturatingCurve::new(0.6, 0.5).unwrap();
        let f = EfficiencyFunction::cache(c, 2.0, 30.0).unwrap();
        for x in [1e-3, 0.1, 1.0, 10.0, 1e6] {
            let v = f.eval(x).unwrap();
            assert!((2.0..=30.0).contains(&v));
        }
        assert!(close(f.eval(1.0).unwrap(), 0.6 * 2.0 + 0.4 * 30.0, 1e-14));
    }
}
