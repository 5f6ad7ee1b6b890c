//! Strip spaces: the region under a slowly growing ceiling curve over the
//! x-axis, with tall vertical strips glued on between gap centres, truncated at
//! height `H`. Also the three-block band of the separation picture.

use crate::error::{Error, Result};

use super::polygon::Polygon;
use super::Xy;

/// Ceiling curve bounding the low region.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Ceiling {
    /// `y = √x`.
    Sqrt,
    /// `y = 1 + ln(1 + x)`.
    Log,
}

impl Ceiling {
    pub fn at(self, x: f64) -> f64 {
        match self {
            Ceiling::Sqrt => x.max(0.0).sqrt(),
            Ceiling::Log => 1.0 + x.max(0.0).ln_1p(),
        }
    }

    fn name(self) -> &'static str {
        match self {
            Ceiling::Sqrt => "sqrt",
            Ceiling::Log => "log",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum StripLayout {
    /// Gap centres `c_1 < c_2 < …`; strip `i` spans `[c_i + ½, c_{i+1} − ½] × [0, H]`
    /// whenever that interval is nonempty. The region ends at the last centre.
    Gaps { centers: Vec<f64>, ceiling: Ceiling, height: f64 },
    /// Two tall blocks joined by a lower band; the axis runs along `y = 0`.
    Band,
}

/// Band geometry: blocks `[0, 5]` and `[13, 18]` of height 9.25, band `[5, 13]` of
/// height 4.5, all centred on the axis.
pub mod band {
    pub const BLOCK_LEFT: (f64, f64) = (0.0, 5.0);
    pub const BLOCK_RIGHT: (f64, f64) = (13.0, 18.0);
    pub const BLOCK_HALF: f64 = 4.625;
    pub const BAND_HALF: f64 = 2.25;
    /// Pole centres of the two vertical curtains dual to the axis.
    pub const H_CENTER: f64 = 7.5;
    pub const K_CENTER: f64 = 10.5;
}

impl StripLayout {
    /// Strips between consecutive squares: `[i²+½, (i+1)²−½]` for `i = 1..=n`.
    pub fn example51(n: usize, height: f64) -> Self {
        StripLayout::Gaps { centers: (1..=n + 1).map(|j| (j * j) as f64).collect(), ceiling: Ceiling::Sqrt, height }
    }

    /// Gap centres at `i^k` under the logarithmic ceiling.
    pub fn power_gaps(n: usize, k: f64, height: f64) -> Self {
        StripLayout::Gaps { centers: (1..=n + 1).map(|i| (i as f64).powf(k)).collect(), ceiling: Ceiling::Log, height }
    }

    pub fn descriptor(&self) -> String {
        match self {
            StripLayout::Gaps { centers, ceiling, height } => {
                let cs: Vec<String> = centers.iter().map(|c| c.to_string()).collect();
                format!("gaps:{}:H={}:[{}]", ceiling.name(), height, cs.join(","))
            }
            StripLayout::Band => "band".into(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct StripSpace {
    pub layout: StripLayout,
    pub polygon: Polygon,
    /// Open x-intervals of the tall strips.
    pub strips: Vec<(f64, f64)>,
    pub x_end: f64,
}

const CEIL_SAMPLES: usize = 8;

impl StripSpace {
    pub fn new(layout: StripLayout) -> Result<Self> {
        match &layout {
            StripLayout::Gaps { centers, ceiling, height } => {
                let (verts, strips, x_end) = gaps_boundary(centers, *ceiling, *height)?;
                let polygon = Polygon::new(verts)?;
                Ok(StripSpace { layout, polygon, strips, x_end })
            }
            StripLayout::Band => {
                use band::*;
                let v = vec![
                    [BLOCK_LEFT.0, -BLOCK_HALF],
                    [BLOCK_LEFT.1, -BLOCK_HALF],
                    [BLOCK_LEFT.1, -BAND_HALF],
                    [BLOCK_RIGHT.0, -BAND_HALF],
                    [BLOCK_RIGHT.0, -BLOCK_HALF],
                    [BLOCK_RIGHT.1, -BLOCK_HALF],
                    [BLOCK_RIGHT.1, BLOCK_HALF],
                    [BLOCK_RIGHT.0, BLOCK_HALF],
                    [BLOCK_RIGHT.0, BAND_HALF],
                    [BLOCK_LEFT.1, BAND_HALF],
                    [BLOCK_LEFT.1, BLOCK_HALF],
                    [BLOCK_LEFT.0, BLOCK_HALF],
                ];
                let polygon = Polygon::new(v)?;
                Ok(StripSpace { layout, polygon, strips: vec![], x_end: BLOCK_RIGHT.1 })
            }
        }
    }

    pub fn height(&self) -> f64 {
        match &self.layout {
            StripLayout::Gaps { height, .. } => *height,
            StripLayout::Band => 2.0 * band::BLOCK_HALF,
        }
    }

    pub fn ceiling(&self) -> Option<Ceiling> {
        match &self.layout {
            StripLayout::Gaps { ceiling, .. } => Some(*ceiling),
            StripLayout::Band => None,
        }
    }

    pub fn gap_centers(&self) -> &[f64] {
        match &self.layout {
            StripLayout::Gaps { centers, .. } => centers,
            StripLayout::Band => &[],
        }
    }

    /// Index of the strip whose open interval contains `x`.
    pub fn strip_at(&self, x: f64) -> Option<usize> {
        self.strips.iter().position(|&(a, b)| a < x && x < b)
    }
}

fn gaps_boundary(centers: &[f64], ceiling: Ceiling, height: f64) -> Result<(Vec<Xy>, Vec<(f64, f64)>, f64)> {
    if centers.len() < 2 {
        return Err(Error::InvalidSpace("need at least two gap centres".into()));
    }
    if centers[0] < 0.5 || centers.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidSpace("gap centres must increase from at least 0.5".into()));
    }
    let x_end = *centers.last().unwrap();
    if !(height >= 1.0) || height <= ceiling.at(x_end) {
        return Err(Error::TruncationTooLow(format!("height {height} must exceed the ceiling {} at x = {x_end}", ceiling.at(x_end))));
    }
    let strips: Vec<(f64, f64)> =
        centers.windows(2).map(|w| (w[0] + 0.5, w[1] - 0.5)).filter(|(a, b)| b > a).collect();
    // Low-region x-intervals between strips, left to right.
    let mut lows = Vec::new();
    let mut x = 0.0;
    for &(a, b) in &strips {
        lows.push((x, a));
        x = b;
    }
    lows.push((x, x_end));
    let mut v: Vec<Xy> = vec![[0.0, 0.0], [x_end, 0.0]];
    for (k, &(a, b)) in lows.iter().enumerate().rev() {
        // Ceiling from b down to a; the first low interval is refined near 0.
        for s in 0..=CEIL_SAMPLES {
            let f = 1.0 - s as f64 / CEIL_SAMPLES as f64;
            let f = if k == 0 && ceiling == Ceiling::Sqrt { f * f } else { f };
            let xs = a + f * (b - a);
            v.push([xs, ceiling.at(xs)]);
        }
        if k > 0 {
            let (sa, sb) = strips[k - 1];
            v.push([sb, height]);
            v.push([sa, height]);
        }
    }
    if ceiling.at(0.0) == 0.0 {
        v.pop();
    }
    Ok((v, strips, x_end))
}
