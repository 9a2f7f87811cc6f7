//! The Makar–Limanov functional
//! `P = ⟨∇u, D²u ∇u⟩ - |∇u|² Δu + u((Δu)² - D²u : D²u)`.

use serde::{Deserialize, Serialize};

use super::{GridField, NodeKind};

/// `P` at every node whose 3×3 block is interior; other nodes are marked
/// exterior with value 0.
pub fn makar_limanov(f: &GridField) -> GridField {
    let (nx, ny) = f.shape();
    let h = f.h();
    let mut values = vec![0.0; nx * ny];
    let mut kinds = vec![NodeKind::Exterior; nx * ny];
    for j in 1..ny.saturating_sub(1) {
        for i in 1..nx.saturating_sub(1) {
            if !f.block_is_interior(i, j, 1) {
                continue;
            }
            let u = |di: i64, dj: i64| f.value((i as i64 + di) as usize, (j as i64 + dj) as usize);
            let c = u(0, 0);
            let ux = (u(1, 0) - u(-1, 0)) / (2.0 * h);
            let uy = (u(0, 1) - u(0, -1)) / (2.0 * h);
            let uxx = (u(1, 0) - 2.0 * c + u(-1, 0)) / (h * h);
            let uyy = (u(0, 1) - 2.0 * c + u(0, -1)) / (h * h);
            let uxy = (u(1, 1) - u(-1, 1) - u(1, -1) + u(-1, -1)) / (4.0 * h * h);
            let lap = uxx + uyy;
            let quad = ux * ux * uxx + 2.0 * ux * uy * uxy + uy * uy * uyy;
            let frob = uxx * uxx + 2.0 * uxy * uxy + uyy * uyy;
            let k = f.index(i, j);
            values[k] = quad - (ux * ux + uy * uy) * lap + c * (lap * lap - frob);
            kinds[k] = NodeKind::Interior;
        }
    }
    f.with_values(values, kinds)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MakarLimanovReport {
    /// Largest 5-point Laplacian of `P` over nodes with a full stencil.
    pub max_laplacian: f64,
    pub global_min: f64,
    /// Distance to the boundary of the node attaining `global_min`.
    pub argmin_distance: f64,
    /// Smallest `P` among nodes within `2h` of the boundary.
    pub band_min: f64,
    /// The minimum is attained, up to `tolerance`, within `2h` of the boundary.
    pub min_near_boundary: bool,
    pub tolerance: f64,
}

/// Superharmonicity and boundary-minimum diagnostics for a field from
/// [`makar_limanov`]. `tolerance` absorbs the roundoff that decides where a
/// (nearly) constant `P` attains its grid minimum.
pub fn makar_limanov_report(p: &GridField, tolerance: f64) -> MakarLimanovReport {
    let (nx, ny) = p.shape();
    let h = p.h();
    let mut max_laplacian = f64::NEG_INFINITY;
    let mut global_min = f64::INFINITY;
    let mut argmin_distance = f64::NAN;
    let mut band_min = f64::INFINITY;
    for j in 0..ny {
        for i in 0..nx {
            if !p.kind(i, j).is_unknown() {
                continue;
            }
            let v = p.value(i, j);
            let dist = p.distance(i, j);
            if v < global_min {
                global_min = v;
                argmin_distance = dist;
            }
            if dist <= 2.0 * h {
                band_min = band_min.min(v);
            }
            let cross = [(1, 0), (-1, 0), (0, 1), (0, -1)];
            let full = i > 0
                && j > 0
                && i + 1 < nx
                && j + 1 < ny
                && cross
                    .iter()
                    .all(|&(di, dj)| p.kind((i as i64 + di) as usize, (j as i64 + dj) as usize).is_unknown());
            if full {
                let lap = (p.value(i + 1, j) + p.value(i - 1, j) + p.value(i, j + 1) + p.value(i, j - 1) - 4.0 * v)
                    / (h * h);
                max_laplacian = max_laplacian.max(lap);
            }
        }
    }
    MakarLimanovReport {
        max_laplacian,
        global_min,
        argmin_distance,
        band_min,
        min_near_boundary: argmin_distance <= 2.0 * h || band_min <= global_min + tolerance,
        tolerance,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{ConvexDomain, Point};
    use crate::torsion::solve_torsion;

    #[test]
    fn disk_functional_is_constant() {
        let d = ConvexDomain::disk(1.0).unwrap();
        let f = solve_torsion(&d, 1.0 / 32.0).unwrap();
        let p = makar_limanov(&f);
        let (i, j) = p.node_at(Point::ORIGIN).unwrap();
        assert!((p.value(i, j) - 0.125).abs() < 1e-7);
        let r = makar_limanov_report(&p, 1e-6);
        assert!((r.global_min - 0.125).abs() < 1e-6);
        assert!(r.max_laplacian <= 50.0 * f.h() * f.h());
        assert!(r.min_near_boundary);
    }

    #[test]
    fn ellipse_functional_matches_closed_form() {
        let (a, b) = (2.0f64, 1.0f64);
        let s = a * a + b * b;
        let expect = a * a * b * b / s * (b * b / s) * (a * a / s);
        let f = solve_torsion(&ConvexDomain::ellipse(a, b).unwrap(), 1.0 / 32.0).unwrap();
        let p = makar_limanov(&f);
        let r = makar_limanov_report(&p, 1e-6);
        assert!((r.global_min - expect).abs() < 1e-6, "{} vs {expect}", r.global_min);
    }

    #[test]
    fn square_functional_is_superharmonic_with_boundary_minimum() {
        let f = solve_torsion(&ConvexDomain::rectangle(1.0, 1.0).unwrap(), 1.0 / 32.0).unwrap();
        let p = makar_limanov(&f);
        let r = makar_limanov_report(&p, 0.0);
        assert!(r.argmin_distance <= 2.0 * f.h(), "{r:?}");
    }
}
