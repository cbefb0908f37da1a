//! Globally adaptive Gauss-Kronrod (G7/K15) quadrature for pairs of
//! integrands sharing one set of nodes.
//!
//! The interval with the largest error estimate is bisected until the summed
//! estimate drops below the tolerance. The final reduction runs over intervals
//! sorted by left endpoint, so the result does not depend on heap order.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::logspace::NeumaierSum;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_225,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];

// Gauss weights for XGK[1], XGK[3], XGK[5] and the center
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
pub(crate) struct QuadSettings {
    pub tol: f64,
    pub min_panels: usize,
    pub max_intervals: usize,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct QuadOutcome {
    pub integral: [f64; 2],
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: [f64; 2],
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

fn gauss_kronrod<F: Fn(f64) -> [f64; 2]>(f: &F, a: f64, b: f64) -> Panel {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mid = f(center);
    let mut kron = [WGK[7] * mid[0], WGK[7] * mid[1]];
    let mut gauss = [WG[3] * mid[0], WG[3] * mid[1]];
    for i in 0..7 {
        let dx = half * XGK[i];
        let lo = f(center - dx);
        let hi = f(center + dx);
        for c in 0..2 {
            let s = lo[c] + hi[c];
            kron[c] += WGK[i] * s;
            if i % 2 == 1 {
                gauss[c] += WG[i / 2] * s;
            }
        }
    }
    let value = [kron[0] * half, kron[1] * half];
    let error = ((kron[0] - gauss[0]) * half)
        .abs()
        .max(((kron[1] - gauss[1]) * half).abs());
    Panel { a, b, value, error }
}

/// Integrates `f` over `[breaks[0], breaks[last]]`. `breaks` must be sorted
/// and are always panel boundaries.
pub(crate) fn integrate_pair<F: Fn(f64) -> [f64; 2]>(
    f: F,
    breaks: &[f64],
    settings: QuadSettings,
) -> Result<QuadOutcome> {
    if breaks.len() < 2 || breaks.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidArgument(
            "quadrature breakpoints must be strictly increasing".into(),
        ));
    }
    let total = breaks[breaks.len() - 1] - breaks[0];
    let mut heap = BinaryHeap::new();
    for w in breaks.windows(2) {
        let pieces = ((settings.min_panels as f64 * (w[1] - w[0]) / total).ceil() as usize).max(1);
        let step = (w[1] - w[0]) / pieces as f64;
        for k in 0..pieces {
            let a = w[0] + step * k as f64;
            let b = if k + 1 == pieces { w[1] } else { a + step };
            heap.push(gauss_kronrod(&f, a, b));
        }
    }

    let mut frozen: Vec<Panel> = Vec::new();
    let mut err_sum: f64 = heap.iter().map(|p| p.error).sum();
    loop {
        if err_sum <= settings.tol {
            // incremental updates drift; confirm with a fresh sum
            err_sum = heap.iter().chain(frozen.iter()).map(|p| p.error).sum();
            if err_sum <= settings.tol {
                break;
            }
        }
        if heap.len() + frozen.len() >= settings.max_intervals {
            return Err(Error::QuadratureCapExceeded {
                cap: settings.max_intervals,
                estimate: err_sum,
            });
        }
        let Some(worst) = heap.pop() else {
            return Err(Error::QuadratureCapExceeded {
                cap: settings.max_intervals,
                estimate: err_sum,
            });
        };
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            frozen.push(worst);
            continue;
        }
        let left = gauss_kronrod(&f, worst.a, mid);
        let right = gauss_kronrod(&f, mid, worst.b);
        err_sum += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }

    let mut panels: Vec<Panel> = heap.into_vec();
    panels.extend(frozen);
    panels.sort_by(|x, y| x.a.total_cmp(&y.a));
    let mut sums = [NeumaierSum::new(), NeumaierSum::new()];
    for p in &panels {
        sums[0].add(p.value[0]);
        sums[1].add(p.value[1]);
    }
    Ok(QuadOutcome {
        integral: [sums[0].value(), sums[1].value()],
    })
}
