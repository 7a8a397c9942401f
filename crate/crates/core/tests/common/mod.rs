//! Independent reference implementations used as test oracles.
#![allow(dead_code)]

pub mod fixtures;

use gazekit::descriptor::{GrayPatch, HogParams};
use gazekit::geometry::Vec3;

/// Plain HoG: per-cell loops, triangular orientation kernel, explicit
/// border handling. Shares no code with the library implementation.
pub fn reference_hog(p: &GrayPatch, params: &HogParams) -> Vec<f64> {
    let (w, h) = (p.width(), p.height());
    let cs = params.cell_size;
    let nb = params.n_bins;
    let (cx_n, cy_n) = (w / cs, h / cs);
    let bw = 180.0 / nb as f64;
    let px = |x: i64, y: i64| -> f64 {
        let x = if x < 0 {
            0
        } else if x >= w as i64 {
            w as i64 - 1
        } else {
            x
        };
        let y = if y < 0 {
            0
        } else if y >= h as i64 {
            h as i64 - 1
        } else {
            y
        };
        p.get(x as usize, y as usize)
    };

    let mut cells = vec![vec![vec![0.0f64; nb]; cx_n]; cy_n];
    for (cy, row) in cells.iter_mut().enumerate() {
        for (cx, hist) in row.iter_mut().enumerate() {
            for y in cy * cs..(cy + 1) * cs {
                for x in cx * cs..(cx + 1) * cs {
                    let (xi, yi) = (x as i64, y as i64);
                    let gx = px(xi + 1, yi) - px(xi - 1, yi);
                    let gy = px(xi, yi + 1) - px(xi, yi - 1);
                    let mag = (gx * gx + gy * gy).sqrt();
                    if mag == 0.0 {
                        continue;
                    }
                    let mut ang = gy.atan2(gx).to_degrees();
                    while ang < 0.0 {
                        ang += 180.0;
                    }
                    while ang >= 180.0 {
                        ang -= 180.0;
                    }
                    for (b, slot) in hist.iter_mut().enumerate() {
                        let center = b as f64 * bw;
                        let mut d = (ang - center).abs();
                        if d > 90.0 {
                            d = 180.0 - d;
                        }
                        let k = 1.0 - d / bw;
                        if k > 0.0 {
                            *slot += mag * k;
                        }
                    }
                }
            }
        }
    }

    let bs = params.block_size;
    let mut out = Vec::new();
    for by in 0..=(cy_n - bs) {
        for bx in 0..=(cx_n - bs) {
            let mut v = Vec::new();
            for row in &cells[by..by + bs] {
                for cell in &row[bx..bx + bs] {
                    v.extend_from_slice(cell);
                }
            }
            let n = v.iter().map(|a| a * a).sum::<f64>().sqrt();
            if n > 0.0 {
                let clipped: Vec<f64> = v
                    .iter()
                    .map(|a| (a / n).min(params.clip_threshold))
                    .collect();
                let n2 = clipped.iter().map(|a| a * a).sum::<f64>().sqrt();
                v = clipped.iter().map(|a| a / n2).collect();
            }
            out.extend(v);
        }
    }
    out
}

pub type Mat3 = [[f64; 3]; 3];

pub fn mat_mul(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut m = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                m[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    m
}

pub fn mat_vec(a: &Mat3, v: [f64; 3]) -> [f64; 3] {
    let mut o = [0.0; 3];
    for i in 0..3 {
        for k in 0..3 {
            o[i] += a[i][k] * v[k];
        }
    }
    o
}

pub fn rot_y(deg: f64) -> Mat3 {
    let (s, c) = deg.to_radians().sin_cos();
    [[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]]
}

pub fn rot_x(deg: f64) -> Mat3 {
    let (s, c) = deg.to_radians().sin_cos();
    [[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]]
}

pub fn rot_z(deg: f64) -> Mat3 {
    let (s, c) = deg.to_radians().sin_cos();
    [[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]]
}

/// Yaw about +Y, then pitch raising +Z toward +Y, then roll about +Z.
pub fn euler_matrix(yaw: f64, pitch: f64, roll: f64) -> Mat3 {
    mat_mul(&mat_mul(&rot_y(yaw), &rot_x(-pitch)), &rot_z(roll))
}

/// Spherical linear interpolation between unit 4-vectors.
pub fn slerp(a: [f64; 4], b: [f64; 4], t: f64) -> [f64; 4] {
    let mut d: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
    let mut b = b;
    if d < 0.0 {
        d = -d;
        b = b.map(|v| -v);
    }
    let theta = d.clamp(-1.0, 1.0).acos();
    if theta < 1e-12 {
        return a;
    }
    let s = theta.sin();
    let wa = ((1.0 - t) * theta).sin() / s;
    let wb = (t * theta).sin() / s;
    [0, 1, 2, 3].map(|i| wa * a[i] + wb * b[i])
}

/// Solves the normal equations (X^T X) beta = X^T y by Gauss-Jordan
/// elimination with partial pivoting.
pub fn normal_equations(x: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
    let p = x[0].len();
    let mut a = vec![vec![0.0; p + 1]; p];
    for (row, &yi) in x.iter().zip(y) {
        for i in 0..p {
            for j in 0..p {
                a[i][j] += row[i] * row[j];
            }
            a[i][p] += row[i] * yi;
        }
    }
    for col in 0..p {
        let piv = (col..p)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, piv);
        let d = a[col][col];
        for v in a[col].iter_mut() {
            *v /= d;
        }
        for r in 0..p {
            if r != col {
                let f = a[r][col];
                let src = a[col].clone();
                for (v, s) in a[r].iter_mut().zip(&src) {
                    *v -= f * s;
                }
            }
        }
    }
    a.iter().map(|r| r[p]).collect()
}

pub fn angle_between(a: Vec3, b: Vec3) -> f64 {
    let c = a.dot(b) / (a.norm() * b.norm());
    a.cross(b).norm().atan2(c * a.norm() * b.norm())
}

/// Tiny deterministic generator for fixtures (xorshift64*).
pub struct Lcg(pub u64);

impl Lcg {
    pub fn next_u64(&mut self) -> u64 {
        self.0 ^= self.0 >> 12;
        self.0 ^= self.0 << 25;
        self.0 ^= self.0 >> 27;
        self.0.wrapping_mul(0x2545_F491_4F6C_DD1D)
    }

    /// Uniform in [0, 1).
    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.unit()
    }
}

pub fn random_patch(rng: &mut Lcg, w: usize, h: usize) -> GrayPatch {
    let px: Vec<f64> = (0..w * h).map(|_| rng.unit()).collect();
    GrayPatch::new(w, h, px).unwrap()
}

/// Blocks `first .. first + n` of a synthetic looker as a dataset.
pub fn synth(
    profile: &gazekit::synthlab::LookerProfile,
    first: u32,
    n: u32,
    condition: gazekit::datasets::Condition,
) -> gazekit::datasets::Dataset {
    let scene = gazekit::geometry::SceneLayout::default();
    let blocks =
        gazekit::synthlab::generate_block_range(profile, &scene, first, n, condition, profile.seed)
            .unwrap();
    gazekit::synthlab::blocks_to_dataset(&scene, &blocks)
}

pub fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}
