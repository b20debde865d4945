//! Reference implementations written without the library's formulas.
//!
//! The projection oracle never uses the closed-form multiplier: for each face
//! of the yield surface it walks down the face's flow line by bisection on a
//! separately coded yield function, then keeps the feasible candidate
//! closest to the trial in the complementary-energy metric.

#![allow(dead_code)]

/// One drawn material point: regime flags, moduli and a trial stress.
#[derive(Debug, Clone, Copy)]
pub struct Case {
    pub iso: bool,
    pub kin: bool,
    pub thermo: bool,
    pub young: f64,
    pub k: f64,
    pub h: f64,
    pub sigma_y0: f64,
    pub omega: f64,
    pub t_ref: f64,
    pub temperature: f64,
    pub sigma: f64,
    pub beta_i: f64,
    pub beta_k: f64,
}

impl Case {
    pub fn yield_stress(&self) -> f64 {
        if self.thermo {
            self.sigma_y0 * (1.0 - self.omega * (self.temperature - self.t_ref))
        } else {
            self.sigma_y0
        }
    }

    /// `|σ − β_k| + β_i − σ_Y`, with absent terms dropped.
    pub fn f(&self, sigma: f64, beta_i: f64, beta_k: f64) -> f64 {
        let centre = if self.kin { beta_k } else { 0.0 };
        let expand = if self.iso { beta_i } else { 0.0 };
        (sigma - centre).abs() + expand - self.yield_stress()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Projection {
    pub lambda: f64,
    pub sigma: f64,
    pub beta_i: f64,
    pub beta_k: f64,
}

fn point_on_line(c: &Case, face: f64, mu: f64) -> (f64, f64, f64) {
    let a_i = if c.iso { 1.0 } else { 0.0 };
    let a_k = if c.kin { -face } else { 0.0 };
    (
        c.sigma - mu * c.young * face,
        c.beta_i - mu * c.k * a_i,
        c.beta_k - mu * c.h * a_k,
    )
}

fn distance(c: &Case, p: (f64, f64, f64)) -> f64 {
    let mut d = (p.0 - c.sigma).powi(2) / c.young;
    if c.iso {
        d += (p.1 - c.beta_i).powi(2) / c.k;
    }
    if c.kin {
        d += (p.2 - c.beta_k).powi(2) / c.h;
    }
    d
}

/// Closest admissible point to the trial stress of `c`.
pub fn project(c: &Case) -> Projection {
    let f_trial = c.f(c.sigma, c.beta_i, c.beta_k);
    if f_trial <= 0.0 {
        return Projection {
            lambda: 0.0,
            sigma: c.sigma,
            beta_i: c.beta_i,
            beta_k: c.beta_k,
        };
    }
    let mut best: Option<(f64, Projection)> = None;
    for face in [1.0, -1.0] {
        let g = |mu: f64| {
            let (s, bi, bk) = point_on_line(c, face, mu);
            c.f(s, bi, bk)
        };
        // f is convex along the line: locate its minimum by ternary search,
        // then the first root by bisection on [0, argmin]
        let (mut a, mut b) = (0.0_f64, 1e6_f64);
        for _ in 0..400 {
            let m1 = a + (b - a) / 3.0;
            let m2 = b - (b - a) / 3.0;
            if g(m1) <= g(m2) {
                b = m2;
            } else {
                a = m1;
            }
        }
        let mut hi = 0.5 * (a + b);
        if g(hi) > 0.0 {
            continue;
        }
        let mut lo = 0.0;
        for _ in 0..300 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if g(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let mu = if g(lo).abs() < g(hi).abs() { lo } else { hi };
        let p = point_on_line(c, face, mu);
        // the candidate must sit on this face, not past the kink
        let centre = if c.kin { p.2 } else { 0.0 };
        if (p.0 - centre) * face < 0.0 {
            continue;
        }
        let d = distance(c, p);
        if best.as_ref().is_none_or(|(bd, _)| d < *bd) {
            best = Some((
                d,
                Projection {
                    lambda: mu,
                    sigma: p.0,
                    beta_i: p.1,
                    beta_k: p.2,
                },
            ));
        }
    }
    best.expect("no feasible face").1
}

/// `cos(ωt)` with `ω = sqrt(E/m)`: free elastic motion from `ε = 1, v = 0`.
pub fn harmonic(young: f64, mass: f64, t: f64) -> f64 {
    ((young / mass).sqrt() * t).cos()
}

/// Sum of squares fit slope, written out directly.
pub fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let sx: f64 = xs.iter().sum();
    let sy: f64 = ys.iter().sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| x * y).sum();
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}
