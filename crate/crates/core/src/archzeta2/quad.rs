//! Adaptive Gauss-Kronrod 10/21 quadrature, generic over real, complex and error-carrying values.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

pub trait QuadValue:
    Copy + Send + Sync + Default + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self>
{
    fn norm(self) -> f64;
}

impl QuadValue for f64 {
    fn norm(self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn norm(self) -> f64 {
        Complex64::norm(self)
    }
}

/// A value together with an accumulated absolute error bound. Integrating it integrates both
/// channels with the same positive weights.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct WithErr<T> {
    pub v: T,
    pub e: f64,
}

impl<T: QuadValue> Add for WithErr<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self { v: self.v + o.v, e: self.e + o.e }
    }
}

impl<T: QuadValue> Sub for WithErr<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self { v: self.v - o.v, e: self.e + o.e }
    }
}

impl<T: QuadValue> Mul<f64> for WithErr<T> {
    type Output = Self;
    fn mul(self, k: f64) -> Self {
        Self { v: self.v * k, e: self.e * k.abs() }
    }
}

impl<T: QuadValue> QuadValue for WithErr<T> {
    fn norm(self) -> f64 {
        self.v.norm()
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct Estimate<T> {
    pub value: T,
    pub error: f64,
    pub evals: usize,
}

impl<T: QuadValue> Estimate<T> {
    pub fn zero() -> Self {
        Self { value: T::default(), error: 0.0, evals: 0 }
    }
}

impl<T: QuadValue> Estimate<WithErr<T>> {
    /// Folds the inner error channel into the error bound.
    pub fn flatten(self) -> Estimate<T> {
        Estimate {
            value: self.value.v,
            error: self.error + self.value.e,
            evals: self.evals,
        }
    }
}

/// Ordered compensated (Neumaier) sum of estimates.
pub fn sum_estimates<T: QuadValue + Compensated>(items: &[Estimate<T>]) -> Estimate<T> {
    Estimate {
        value: T::compensated_sum(items.iter().map(|e| e.value)),
        error: items.iter().map(|e| e.error).sum(),
        evals: items.iter().map(|e| e.evals).sum(),
    }
}

pub trait Compensated: Sized {
    fn compensated_sum(items: impl Iterator<Item = Self>) -> Self;
}

pub fn neumaier(items: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for x in items {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

impl Compensated for f64 {
    fn compensated_sum(items: impl Iterator<Item = Self>) -> Self {
        neumaier(items)
    }
}

impl Compensated for Complex64 {
    fn compensated_sum(items: impl Iterator<Item = Self>) -> Self {
        let all: Vec<Complex64> = items.collect();
        Complex64::new(
            neumaier(all.iter().map(|z| z.re)),
            neumaier(all.iter().map(|z| z.im)),
        )
    }
}

#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_208_292_856_342,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// One 21-point Kronrod panel on `[a, b]` with the QUADPACK error heuristic.
pub fn gk21<T: QuadValue>(f: &(impl Fn(f64) -> T + ?Sized), a: f64, b: f64) -> (T, f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut resk = fc * WGK[10];
    let mut resg = T::default();
    let mut resabs = fc.norm() * WGK[10];
    let mut vals = [(T::default(), T::default()); 10];
    for j in 0..10 {
        let dx = h * XGK[j];
        let (f1, f2) = (f(c - dx), f(c + dx));
        vals[j] = (f1, f2);
        resk = resk + (f1 + f2) * WGK[j];
        resabs += WGK[j] * (f1.norm() + f2.norm());
        if j % 2 == 1 {
            resg = resg + (f1 + f2) * WG[j / 2];
        }
    }
    let mean = resk * 0.5;
    let mut resasc = WGK[10] * (fc - mean).norm();
    for j in 0..10 {
        resasc += WGK[j] * ((vals[j].0 - mean).norm() + (vals[j].1 - mean).norm());
    }
    let h_abs = h.abs();
    resasc *= h_abs;
    resabs *= h_abs;
    let mut err = ((resk - resg) * h).norm();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * resabs);
    }
    (resk * h, err, resabs)
}

struct Panel<T> {
    a: f64,
    b: f64,
    value: T,
    error: f64,
    abs: f64,
}

impl<T> PartialEq for Panel<T> {
    fn eq(&self, o: &Self) -> bool {
        self.error == o.error && self.a == o.a
    }
}
impl<T> Eq for Panel<T> {}
impl<T> PartialOrd for Panel<T> {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl<T> Ord for Panel<T> {
    fn cmp(&self, o: &Self) -> Ordering {
        self.error
            .total_cmp(&o.error)
            .then_with(|| o.a.total_cmp(&self.a))
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_panels: usize,
}

impl Tolerance {
    pub fn new(abs: f64, rel: f64) -> Self {
        Self { abs, rel, max_panels: 400 }
    }
}

/// Globally adaptive bisection on `[a, b]`.
pub fn integrate<T: QuadValue + Compensated>(
    f: &(impl Fn(f64) -> T + ?Sized),
    a: f64,
    b: f64,
    tol: Tolerance,
) -> Estimate<T> {
    if a == b {
        return Estimate::zero();
    }
    let (v, e, abs) = gk21(f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Panel { a, b, value: v, error: e, abs });
    let mut total_err = e;
    let mut total_abs = abs;
    let mut evals = 21;
    let mut total = v;
    // The last term stops refinement once the error is at the rounding floor of the
    // absolute integrand, so cancelling integrands do not exhaust the panel budget.
    while total_err
        > tol
            .abs
            .max(tol.rel * total.norm())
            .max(100.0 * f64::EPSILON * total_abs)
        && heap.len() < tol.max_panels
    {
        let worst = heap.pop().expect("nonempty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            heap.push(worst);
            break;
        }
        let (v1, e1, a1) = gk21(f, worst.a, mid);
        let (v2, e2, a2) = gk21(f, mid, worst.b);
        evals += 42;
        total = total - worst.value + v1 + v2;
        total_err += e1 + e2 - worst.error;
        total_abs += a1 + a2 - worst.abs;
        heap.push(Panel { a: worst.a, b: mid, value: v1, error: e1, abs: a1 });
        heap.push(Panel { a: mid, b: worst.b, value: v2, error: e2, abs: a2 });
    }
    let mut panels: Vec<Panel<T>> = heap.into_vec();
    panels.sort_by(|x, y| x.a.total_cmp(&y.a));
    Estimate {
        value: T::compensated_sum(panels.iter().map(|p| p.value)),
        error: panels.iter().map(|p| p.error).sum(),
        evals,
    }
}

impl<T: QuadValue + Compensated> Compensated for WithErr<T> {
    fn compensated_sum(items: impl Iterator<Item = Self>) -> Self {
        let all: Vec<Self> = items.collect();
        WithErr {
            v: T::compensated_sum(all.iter().map(|x| x.v)),
            e: all.iter().map(|x| x.e).sum(),
        }
    }
}

/// Integral over consecutive sub-intervals split at sorted `breaks` (endpoints included).
pub fn integrate_breaks<T: QuadValue + Compensated>(
    f: &(impl Fn(f64) -> T + ?Sized),
    breaks: &[f64],
    tol: Tolerance,
) -> Estimate<T> {
    let pieces = breaks.len().saturating_sub(1).max(1) as f64;
    let sub = Tolerance { abs: tol.abs / pieces, ..tol };
    let parts: Vec<Estimate<T>> = breaks
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| integrate(f, w[0], w[1], sub))
        .collect();
    sum_estimates(&parts)
}
