//! Adaptive Gauss–Kronrod quadrature and Gauss–Legendre rules.
//!
//! The adaptive driver uses the 21-point Kronrod extension of the 10-point
//! Gauss rule and bisects the interval with the largest error estimate
//! until the global estimate meets the tolerance.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::scalar::Real;

// Kronrod abscissae on [0, 1]; odd indices are the 10-point Gauss nodes.
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
    0.123_491_976_262_065_851_077_600_525_634_075,
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

/// Tolerances and limits for the adaptive driver.
#[derive(Debug, Clone, Copy)]
pub struct QuadConfig<T> {
    pub abs_tol: T,
    pub rel_tol: T,
    pub max_subdivisions: usize,
}

impl<T: Real> Default for QuadConfig<T> {
    fn default() -> Self {
        Self { abs_tol: T::zero(), rel_tol: T::of(1e-12), max_subdivisions: 400 }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadResult<T> {
    pub value: T,
    pub error: T,
    pub evaluations: usize,
    pub converged: bool,
}

impl<T: Real> QuadResult<T> {
    fn zero() -> Self {
        Self { value: T::zero(), error: T::zero(), evaluations: 0, converged: true }
    }

    fn merge(self, other: Self) -> Self {
        Self {
            value: self.value + other.value,
            error: self.error + other.error,
            evaluations: self.evaluations + other.evaluations,
            converged: self.converged && other.converged,
        }
    }
}

/// One application of the 21-point rule; returns (kronrod, |kronrod - gauss|).
fn gk21<T: Real, F: Fn(T) -> T>(f: &F, lo: T, hi: T) -> (T, T) {
    let half = T::of(0.5);
    let center = half * (lo + hi);
    let half_len = half * (hi - lo);
    let fc = f(center);
    let mut kronrod = fc * T::of(WGK[10]);
    let mut gauss = T::zero();
    for j in 0..10 {
        let x = half_len * T::of(XGK[j]);
        let pair = f(center - x) + f(center + x);
        kronrod = kronrod + T::of(WGK[j]) * pair;
        if j % 2 == 1 {
            gauss = gauss + T::of(WG[j / 2]) * pair;
        }
    }
    (kronrod * half_len, ((kronrod - gauss) * half_len).abs())
}

struct Segment<T> {
    lo: T,
    hi: T,
    value: T,
    error: T,
}

impl<T: PartialOrd> PartialEq for Segment<T> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}

impl<T: PartialOrd> Eq for Segment<T> {}

impl<T: PartialOrd> PartialOrd for Segment<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<T: PartialOrd> Ord for Segment<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.partial_cmp(&other.error).unwrap_or(Ordering::Equal)
    }
}

/// Adaptive integration of `f` over the finite interval `[lo, hi]`.
pub fn integrate<T: Real, F: Fn(T) -> T>(f: F, lo: T, hi: T, cfg: &QuadConfig<T>) -> QuadResult<T> {
    if lo == hi {
        return QuadResult::zero();
    }
    let (value, error) = gk21(&f, lo, hi);
    let mut heap = BinaryHeap::new();
    heap.push(Segment { lo, hi, value, error });
    let mut total = value;
    let mut total_err = error;
    let mut evaluations = 21;
    let mut subdivisions = 0;
    let mut converged = true;

    loop {
        let target = cfg.abs_tol.max(cfg.rel_tol * total.abs());
        if total_err <= target {
            break;
        }
        if subdivisions >= cfg.max_subdivisions {
            converged = false;
            break;
        }
        let seg = heap.pop().expect("heap is never empty");
        let mid = T::of(0.5) * (seg.lo + seg.hi);
        if mid <= seg.lo || mid >= seg.hi {
            // interval exhausted at machine precision
            heap.push(seg);
            converged = false;
            break;
        }
        let (v1, e1) = gk21(&f, seg.lo, mid);
        let (v2, e2) = gk21(&f, mid, seg.hi);
        evaluations += 42;
        subdivisions += 1;
        total = total - seg.value + v1 + v2;
        total_err = total_err - seg.error + e1 + e2;
        heap.push(Segment { lo: seg.lo, hi: mid, value: v1, error: e1 });
        heap.push(Segment { lo: mid, hi: seg.hi, value: v2, error: e2 });
    }

    // re-sum to shed the drift of the running updates
    let (value, error) = heap.iter().fold((T::zero(), T::zero()), |(v, e), s| (v + s.value, e + s.error));
    QuadResult { value, error, evaluations, converged }
}

/// Integrates over consecutive pieces `[points[0], points[1]], [points[1], points[2]], ...`.
pub fn integrate_pieces<T: Real, F: Fn(T) -> T>(f: F, points: &[T], cfg: &QuadConfig<T>) -> QuadResult<T> {
    points.windows(2).map(|w| integrate(&f, w[0], w[1], cfg)).fold(QuadResult::zero(), QuadResult::merge)
}

/// Integral of `f` over `[lo, ∞)` with `lo > 0`, via the substitution
/// `r = lo / t`. Power-law tails `r^-k` become polynomials in `t`.
pub fn integrate_to_infinity<T: Real, F: Fn(T) -> T>(f: F, lo: T, cfg: &QuadConfig<T>) -> QuadResult<T> {
    assert!(lo > T::zero(), "semi-infinite quadrature needs a positive lower limit");
    let g = |t: T| {
        let r = lo / t;
        f(r) * lo / (t * t)
    };
    integrate(g, T::zero(), T::one(), cfg)
}

/// Nodes and weights of the n-point Gauss–Legendre rule on [-1, 1].
pub fn gauss_legendre<T: Real>(n: usize) -> (Vec<T>, Vec<T>) {
    assert!(n >= 1);
    let mut nodes = vec![T::zero(); n];
    let mut weights = vec![T::zero(); n];
    let nf = T::of_usize(n);
    for i in 0..n.div_ceil(2) {
        let mut x = (T::PI() * (T::of_usize(i) + T::of(0.75)) / (nf + T::of(0.5))).cos();
        let mut dp = T::one();
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x = x - dx;
            if dx.abs() <= T::epsilon() * T::of(4.0) {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != T::zero() {
            dp = d;
        }
        let w = T::of(2.0) / ((T::one() - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = T::zero();
    }
    (nodes, weights)
}

fn legendre_with_derivative<T: Real>(n: usize, x: T) -> (T, T) {
    let mut p0 = T::one();
    let mut p1 = x;
    if n == 0 {
        return (p0, T::zero());
    }
    for k in 2..=n {
        let kf = T::of_usize(k);
        let p2 = ((T::of(2.0) * kf - T::one()) * x * p1 - (kf - T::one()) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = T::of_usize(n);
    let d = nf * (x * p1 - p0) / (x * x - T::one());
    (p1, d)
}
