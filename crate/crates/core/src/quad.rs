//! Adaptive Gauss-Kronrod (G7, K15) quadrature for small vector-valued
//! integrands on finite intervals.

/// Kronrod-15 abscissae on [0, 1] side of the symmetric rule.
const XGK: [f64; 8] = [
    0.991_455_371_120_813,
    0.949_107_912_342_759,
    0.864_864_423_359_769,
    0.741_531_185_599_394,
    0.586_087_235_467_691,
    0.405_845_151_377_397,
    0.207_784_955_007_898,
    0.0,
];

/// Kronrod-15 weights matching `XGK`.
const WGK: [f64; 8] = [
    0.022_935_322_010_529,
    0.063_092_092_629_979,
    0.104_790_010_322_250,
    0.140_653_259_715_525,
    0.169_004_726_639_267,
    0.190_350_578_064_785,
    0.204_432_940_075_298,
    0.209_482_141_084_728,
];

/// Gauss-7 weights for the odd-indexed abscissae of `XGK`.
const WG: [f64; 4] = [
    0.129_484_966_168_870,
    0.279_705_391_489_277,
    0.381_830_050_505_119,
    0.417_959_183_673_469,
];

struct Segment<const N: usize> {
    lo: f64,
    hi: f64,
    value: [f64; N],
    error: f64,
}

fn gk15<const N: usize, F: Fn(f64) -> [f64; N]>(f: &F, lo: f64, hi: f64) -> Segment<N> {
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let mut kronrod = [0.0; N];
    let mut gauss = [0.0; N];
    for (i, (&x, &wk)) in XGK.iter().zip(WGK.iter()).enumerate() {
        let (fp, fm) = if x == 0.0 {
            let v = f(center);
            (v, [0.0; N])
        } else {
            (f(center + half * x), f(center - half * x))
        };
        for k in 0..N {
            let pair = if x == 0.0 { fp[k] } else { fp[k] + fm[k] };
            kronrod[k] += wk * pair;
            // odd indices (and the center point, i = 7) carry the G7 rule
            if i % 2 == 1 {
                gauss[k] += WG[i / 2] * pair;
            }
        }
    }
    let mut err = 0.0;
    let mut value = [0.0; N];
    for k in 0..N {
        value[k] = kronrod[k] * half;
        err += (kronrod[k] - gauss[k]).abs() * half.abs();
    }
    Segment {
        lo,
        hi,
        value,
        error: err,
    }
}

/// Integrate a vector-valued function over `[lo, hi]` to the requested
/// absolute tolerance (summed across components), bisecting the segment with
/// the largest error estimate. Returns the value and the final error
/// estimate; `None` if the subdivision budget is exhausted first.
pub fn integrate<const N: usize, F: Fn(f64) -> [f64; N]>(
    f: F,
    lo: f64,
    hi: f64,
    abs_tol: f64,
    max_segments: usize,
) -> Option<([f64; N], f64)> {
    let mut segments = vec![gk15(&f, lo, hi)];
    loop {
        let total_err: f64 = segments.iter().map(|s| s.error).sum();
        if total_err <= abs_tol {
            break;
        }
        if segments.len() >= max_segments {
            return None;
        }
        let worst = segments
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.error.partial_cmp(&b.1.error).unwrap())
            .map(|(i, _)| i)
            .unwrap();
        let seg = segments.swap_remove(worst);
        let mid = 0.5 * (seg.lo + seg.hi);
        segments.push(gk15(&f, seg.lo, mid));
        segments.push(gk15(&f, mid, seg.hi));
    }
    let mut value = [0.0; N];
    let mut err = 0.0;
    for s in &segments {
        for (acc, v) in value.iter_mut().zip(&s.value) {
            *acc += *v;
        }
        err += s.error;
    }
    Some((value, err))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let (v, _) = integrate(|x| [x * x * x - 2.0 * x + 1.0], -1.0, 3.0, 1e-12, 100).unwrap();
        // antiderivative x^4/4 - x^2 + x evaluated on [-1, 3]
        let exact = (81.0 / 4.0 - 9.0 + 3.0) - (0.25 - 1.0 - 1.0);
        assert!((v[0] - exact).abs() < 1e-12);
    }

    #[test]
    fn narrow_lorentzian() {
        let w: f64 = 1e-3;
        let (v, _) = integrate(|x| [w / (x * x + w * w)], -50.0, 50.0, 1e-10, 4000).unwrap();
        assert!((v[0] - 2.0 * (50.0f64 / w).atan()).abs() < 1e-9);
    }

    #[test]
    fn vector_components_integrate_independently() {
        let (v, _) = integrate(|x| [x.cos(), x.sin()], 0.0, std::f64::consts::PI, 1e-12, 200).unwrap();
        assert!(v[0].abs() < 1e-12);
        assert!((v[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn budget_exhaustion_returns_none() {
        let w: f64 = 1e-9;
        assert!(integrate(|x| [w / (x * x + w * w)], -1.0, 1.0, 1e-14, 4).is_none());
    }
}
