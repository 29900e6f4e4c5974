//! Fixed Gauss rules.

/// Kronrod abscissae of the 21-point rule on `[-1, 1]` (non-negative half).
#[allow(clippy::excessive_precision)]
pub(crate) const XGK: [f64; 11] = [
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

/// Weights of the embedded 10-point Gauss rule (at `XGK[1], XGK[3], ...`).
#[allow(clippy::excessive_precision)]
pub(crate) const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[allow(clippy::excessive_precision)]
pub(crate) const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// The 21 Kronrod nodes of `[a, b]` in a fixed order: center first, then
/// symmetric pairs from the outside in.
pub(crate) fn kronrod_nodes(a: f64, b: f64) -> [f64; 21] {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut out = [c; 21];
    for j in 0..10 {
        out[1 + 2 * j] = c - h * XGK[j];
        out[2 + 2 * j] = c + h * XGK[j];
    }
    out
}

/// Kronrod estimate, Gauss estimate and `∫ |f|` from values at `kronrod_nodes`.
pub(crate) fn kronrod_combine(values: &[f64; 21], half_width: f64) -> (f64, f64, f64) {
    let mut k = WGK[10] * values[0];
    let mut abs = WGK[10] * values[0].abs();
    let mut g = 0.0;
    for j in 0..10 {
        let pair = values[1 + 2 * j] + values[2 + 2 * j];
        k += WGK[j] * pair;
        abs += WGK[j] * (values[1 + 2 * j].abs() + values[2 + 2 * j].abs());
        if j % 2 == 1 {
            g += WG[j / 2] * pair;
        }
    }
    (k * half_width, g * half_width, abs * half_width.abs())
}

/// QUADPACK-style error estimate for a single 21-point panel.
pub(crate) fn kronrod_error(values: &[f64; 21], half_width: f64) -> (f64, f64) {
    let (k, g, _) = kronrod_combine(values, half_width);
    let mean = k / (2.0 * half_width);
    let mut asc = WGK[10] * (values[0] - mean).abs();
    for j in 0..10 {
        asc += WGK[j] * ((values[1 + 2 * j] - mean).abs() + (values[2 + 2 * j] - mean).abs());
    }
    asc *= half_width.abs();
    let mut err = (k - g).abs();
    if asc != 0.0 && err != 0.0 {
        err = asc * (200.0 * err / asc).powf(1.5).min(1.0);
    }
    // floor at the rounding level of the panel sum
    let abs_sum = kronrod_combine(values, half_width).2;
    if abs_sum > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * abs_sum);
    }
    (k, err)
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    if n == 1 {
        return (vec![0.0], vec![2.0]);
    }
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kronrod_integrates_polynomials() {
        let nodes = kronrod_nodes(0.0, 2.0);
        let vals: [f64; 21] = nodes.map(|x| x.powi(20));
        let (k, err) = kronrod_error(&vals, 1.0);
        let exact = 2f64.powi(21) / 21.0;
        assert!(((k - exact) / exact).abs() < 1e-13);
        assert!(err >= 0.0);
    }

    #[test]
    fn gauss_legendre_exactness() {
        for n in [1, 2, 5, 16, 33, 64] {
            let (x, w) = gauss_legendre(n);
            let total: f64 = w.iter().sum();
            assert!((total - 2.0).abs() < 1e-13, "n={n}");
            let deg = 2 * n - 1;
            let approx: f64 = x
                .iter()
                .zip(&w)
                .map(|(x, w)| w * x.powi(deg as i32 - 1))
                .sum();
            let exact = if (deg - 1) % 2 == 0 {
                2.0 / deg as f64
            } else {
                0.0
            };
            assert!((approx - exact).abs() < 1e-12, "n={n}");
        }
    }
}
