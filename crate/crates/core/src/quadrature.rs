//! One-dimensional quadrature over unions of closed intervals.
//!
//! Both rules sum in a fixed order so that results do not depend on how many
//! threads evaluated the integrand.

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Nodes handled by one parallel task; fixed so the summation tree is fixed.
const CHUNK: usize = 1024;

/// Pairwise (cascade) summation in index order.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= 16 {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Subtracts open excluded intervals from `[lo, hi]` and returns the closed
/// remainder, sorted and disjoint. Zero-width pieces are dropped.
pub fn complement(lo: f64, hi: f64, excluded: &[Interval]) -> Vec<Interval> {
    let mut ex: Vec<Interval> = excluded
        .iter()
        .filter(|e| e.hi > lo && e.lo < hi && e.hi > e.lo)
        .copied()
        .collect();
    ex.sort_by(|a, b| a.lo.total_cmp(&b.lo));
    let mut out = Vec::new();
    let mut cursor = lo;
    for e in ex {
        if e.lo > cursor {
            out.push(Interval { lo: cursor, hi: e.lo.min(hi) });
        }
        cursor = cursor.max(e.hi);
        if cursor >= hi {
            break;
        }
    }
    if cursor < hi {
        out.push(Interval { lo: cursor, hi });
    }
    out.retain(|i| i.hi > i.lo);
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureResult {
    pub value: f64,
    /// Absolute error estimate; zero when the rule provides none.
    pub error: f64,
    pub evaluations: usize,
}

/// Composite trapezoid rule on the uniform grid `lo + i·h`, `i = 0..n`,
/// restricted to `pieces`. Each piece contributes its interior grid nodes
/// plus its exact endpoints, so pieces that coincide with `[lo, hi]`
/// reproduce the plain rule.
pub fn trapezoid<F>(f: F, lo: f64, hi: f64, n: usize, pieces: &[Interval]) -> Result<QuadratureResult>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    if n < 2 {
        return Err(Error::Invalid("trapezoid rule needs at least two nodes".into()));
    }
    let h = (hi - lo) / (n - 1) as f64;
    let grid = |i: usize| if i == n - 1 { hi } else { lo + i as f64 * h };

    // Abscissae and weights for every piece, in order.
    let mut xs: Vec<f64> = Vec::new();
    let mut ws: Vec<f64> = Vec::new();
    for piece in pieces {
        let first = ((piece.lo - lo) / h).floor() as isize + 1;
        let last = ((piece.hi - lo) / h).ceil() as isize - 1;
        let mut pts = vec![piece.lo];
        for i in first.max(0)..=last.min(n as isize - 1) {
            let x = grid(i as usize);
            if x > piece.lo && x < piece.hi {
                pts.push(x);
            }
        }
        pts.push(piece.hi);
        for k in 0..pts.len() {
            let left = if k > 0 { pts[k] - pts[k - 1] } else { 0.0 };
            let right = if k + 1 < pts.len() { pts[k + 1] - pts[k] } else { 0.0 };
            xs.push(pts[k]);
            ws.push(0.5 * (left + right));
        }
    }

    let chunk_sums: Vec<f64> = xs
        .par_chunks(CHUNK)
        .zip(ws.par_chunks(CHUNK))
        .map(|(xc, wc)| {
            let terms = xc
                .iter()
                .zip(wc)
                .map(|(&x, &w)| f(x).map(|y| y * w))
                .collect::<Result<Vec<f64>>>()?;
            Ok(pairwise_sum(&terms))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(QuadratureResult { value: pairwise_sum(&chunk_sums), error: 0.0, evaluations: xs.len() })
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_3,
    0.949_107_912_342_758_524_526_189_684_047_9,
    0.864_864_423_359_769_072_789_712_788_640_9,
    0.741_531_185_599_394_439_863_864_773_280_8,
    0.586_087_235_467_691_130_294_144_845_693_0,
    0.405_845_151_377_397_166_906_606_412_076_96,
    0.207_784_955_007_898_467_600_689_403_773_2,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_97,
    0.063_092_092_629_978_553_290_700_663_189_2,
    0.104_790_010_322_250_183_839_876_322_541_5,
    0.140_653_259_715_525_918_745_189_590_510_2,
    0.169_004_726_639_267_902_826_583_426_598_6,
    0.190_350_578_064_785_409_913_256_402_421_0,
    0.204_432_940_075_298_892_414_161_999_234_6,
    0.209_482_141_084_727_828_012_999_174_891_7,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_1,
    0.279_705_391_489_276_667_901_467_771_423_8,
    0.381_830_050_505_118_944_950_369_775_489_0,
    0.417_959_183_673_469_387_755_102_040_816_3,
];

#[derive(Debug, Clone, Copy)]
struct Panel {
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
}

fn kronrod15<F: Fn(f64) -> Result<f64>>(f: &F, lo: f64, hi: f64) -> Result<Panel> {
    let c = 0.5 * (lo + hi);
    let r = 0.5 * (hi - lo);
    let fc = f(c)?;
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = r * XGK[j];
        let pair = f(c - dx)? + f(c + dx)?;
        kron += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    Ok(Panel { lo, hi, value: kron * r, error: ((kron - gauss) * r).abs() })
}

/// Globally adaptive Gauss–Kronrod (7/15) integration over `pieces`.
///
/// The pieces are first cut into about `initial_panels` equal-width panels;
/// the panel with the largest error estimate is then bisected until the
/// summed estimate is below `rel_tol·|value| + abs_tol`.
pub fn gauss_kronrod<F>(
    f: F,
    pieces: &[Interval],
    initial_panels: usize,
    rel_tol: f64,
    abs_tol: f64,
    max_panels: usize,
) -> Result<QuadratureResult>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    let total: f64 = pieces.iter().map(Interval::width).sum();
    if total <= 0.0 {
        return Ok(QuadratureResult { value: 0.0, error: 0.0, evaluations: 0 });
    }
    let mut bounds = Vec::new();
    for piece in pieces {
        let k = ((initial_panels as f64 * piece.width() / total).ceil() as usize).max(1);
        let h = piece.width() / k as f64;
        for i in 0..k {
            let a = piece.lo + i as f64 * h;
            let b = if i + 1 == k { piece.hi } else { a + h };
            bounds.push((a, b));
        }
    }
    let mut panels: Vec<Panel> = bounds
        .par_iter()
        .map(|&(a, b)| kronrod15(&f, a, b))
        .collect::<Result<Vec<_>>>()?;
    let mut evaluations = 15 * panels.len();

    loop {
        let values: Vec<f64> = panels.iter().map(|p| p.value).collect();
        let errors: Vec<f64> = panels.iter().map(|p| p.error).collect();
        let value = pairwise_sum(&values);
        let error = pairwise_sum(&errors);
        let target = rel_tol * value.abs() + abs_tol;
        if error <= target {
            return Ok(QuadratureResult { value, error, evaluations });
        }
        if panels.len() >= max_panels {
            let denom = value.abs().max(f64::MIN_POSITIVE);
            return Err(Error::Quadrature { achieved: error / denom, requested: rel_tol });
        }
        // Bisect the worst eighth of the panels at once (at least one).
        let mut order: Vec<usize> = (0..panels.len()).collect();
        order.sort_by(|&i, &j| panels[j].error.total_cmp(&panels[i].error).then(i.cmp(&j)));
        let count = (panels.len() / 8).max(1).min(max_panels - panels.len());
        let mut split: Vec<usize> = order[..count].to_vec();
        split.sort_unstable();
        let halves: Vec<(Panel, Panel)> = split
            .par_iter()
            .map(|&i| {
                let p = panels[i];
                let mid = 0.5 * (p.lo + p.hi);
                Ok((kronrod15(&f, p.lo, mid)?, kronrod15(&f, mid, p.hi)?))
            })
            .collect::<Result<Vec<_>>>()?;
        evaluations += 30 * halves.len();
        let mut next = Vec::with_capacity(panels.len() + halves.len());
        let mut it = split.iter().zip(halves).peekable();
        for (i, p) in panels.iter().enumerate() {
            match it.peek() {
                Some((&j, _)) if j == i => {
                    let (_, (l, r)) = it.next().unwrap();
                    next.push(l);
                    next.push(r);
                }
                _ => next.push(*p),
            }
        }
        panels = next;
    }
}
