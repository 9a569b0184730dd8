//! Grid domains with masks and distance-to-boundary fields.

use serde::Deserialize;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct DiskSpec {
    pub cx: f64,
    pub cy: f64,
    pub r: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Shape {
    /// Fills the bounding box.
    Rectangle { width: f64, height: f64 },
    Disk(DiskSpec),
    UnionOfDisks(Vec<DiskSpec>),
    Annulus { cx: f64, cy: f64, r_in: f64, r_out: f64 },
    /// [0, L]^2 with Dirichlet zeros on the two axes and mirror
    /// (zero normal difference) conditions on the outer edges.
    SquareOddSymmetry { l: f64 },
}

impl Shape {
    fn bbox(&self) -> (f64, f64, f64, f64) {
        match self {
            Shape::Rectangle { width, height } => (0.0, *width, 0.0, *height),
            Shape::Disk(d) => (d.cx - d.r, d.cx + d.r, d.cy - d.r, d.cy + d.r),
            Shape::UnionOfDisks(ds) => {
                let mut b = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
                for d in ds {
                    b.0 = b.0.min(d.cx - d.r);
                    b.1 = b.1.max(d.cx + d.r);
                    b.2 = b.2.min(d.cy - d.r);
                    b.3 = b.3.max(d.cy + d.r);
                }
                b
            }
            Shape::Annulus { cx, cy, r_out, .. } => {
                (cx - r_out, cx + r_out, cy - r_out, cy + r_out)
            }
            Shape::SquareOddSymmetry { l } => (0.0, *l, 0.0, *l),
        }
    }

    fn contains(&self, x: f64, y: f64) -> bool {
        match self {
            Shape::Rectangle { width, height } => {
                x > 0.0 && x < *width && y > 0.0 && y < *height
            }
            Shape::Disk(d) => (x - d.cx).hypot(y - d.cy) < d.r,
            Shape::UnionOfDisks(ds) => {
                ds.iter().any(|d| (x - d.cx).hypot(y - d.cy) < d.r)
            }
            Shape::Annulus { cx, cy, r_in, r_out } => {
                let rho = (x - cx).hypot(y - cy);
                rho > *r_in && rho < *r_out
            }
            Shape::SquareOddSymmetry { l } => {
                // The far edges are included; accumulated roundoff in
                // the grid coordinates must not push them out.
                let hi = l * (1.0 + 1e-12);
                x > 0.0 && x <= hi && y > 0.0 && y <= hi
            }
        }
    }

    pub fn scaled(&self, factor: f64) -> Shape {
        let s = factor;
        match self {
            Shape::Rectangle { width, height } => {
                Shape::Rectangle { width: width * s, height: height * s }
            }
            Shape::Disk(d) => Shape::Disk(DiskSpec { cx: d.cx * s, cy: d.cy * s, r: d.r * s }),
            Shape::UnionOfDisks(ds) => Shape::UnionOfDisks(
                ds.iter()
                    .map(|d| DiskSpec { cx: d.cx * s, cy: d.cy * s, r: d.r * s })
                    .collect(),
            ),
            Shape::Annulus { cx, cy, r_in, r_out } => Shape::Annulus {
                cx: cx * s,
                cy: cy * s,
                r_in: r_in * s,
                r_out: r_out * s,
            },
            Shape::SquareOddSymmetry { l } => Shape::SquareOddSymmetry { l: l * s },
        }
    }
}

/// JSON form of a domain: {"shape": "...", "params": {...}, "h": ...}.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSpec {
    pub shape: String,
    #[serde(default)]
    pub params: serde_json::Value,
    pub h: f64,
}

impl DomainSpec {
    pub fn to_shape(&self) -> Result<Shape> {
        let p = &self.params;
        let get = |key: &str| -> Result<f64> {
            p.get(key)
                .and_then(|v| v.as_f64())
                .ok_or_else(|| Error::Config(format!("domain params missing '{key}'")))
        };
        match self.shape.as_str() {
            "rectangle" => Ok(Shape::Rectangle { width: get("width")?, height: get("height")? }),
            "disk" => Ok(Shape::Disk(DiskSpec { cx: 0.0, cy: 0.0, r: get("r")? })),
            "annulus" => Ok(Shape::Annulus {
                cx: 0.0,
                cy: 0.0,
                r_in: get("r_in")?,
                r_out: get("r_out")?,
            }),
            "union_of_disks" => {
                let arr = p
                    .get("disks")
                    .and_then(|v| v.as_array())
                    .ok_or_else(|| Error::Config("union_of_disks needs 'disks' array".into()))?;
                let mut disks = Vec::new();
                for d in arr {
                    let f = |k: &str| {
                        d.get(k)
                            .and_then(|v| v.as_f64())
                            .ok_or_else(|| Error::Config(format!("disk missing '{k}'")))
                    };
                    disks.push(DiskSpec { cx: f("cx")?, cy: f("cy")?, r: f("r")? });
                }
                Ok(Shape::UnionOfDisks(disks))
            }
            "square_with_odd_symmetry" => Ok(Shape::SquareOddSymmetry { l: get("l")? }),
            other => Err(Error::Config(format!("unknown shape '{other}'"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Domain2D {
    pub shape: Shape,
    pub h: f64,
    /// Bounding box (x_min, x_max, y_min, y_max), grid-aligned.
    pub bbox: (f64, f64, f64, f64),
    /// Node counts per side (nodes, not cells).
    pub nx: usize,
    pub ny: usize,
    /// Per-node interior mask.
    pub inside: Vec<bool>,
    /// Distance to the boundary, zero at exterior nodes.
    pub dist: Vec<f64>,
}

impl Domain2D {
    pub fn build(shape: Shape, h: f64) -> Result<Domain2D> {
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::Domain("grid spacing must be positive".into()));
        }
        let (x0, x1, y0, y1) = shape.bbox();
        // Pad one cell so the exterior ring exists on all sides.
        let nx = ((x1 - x0) / h).round() as usize + 3;
        let ny = ((y1 - y0) / h).round() as usize + 3;
        if nx * ny > 16_000_000 {
            return Err(Error::Domain(format!(
                "grid of {} x {} nodes exceeds the budget",
                nx, ny
            )));
        }
        let x_min = x0 - h;
        let y_min = y0 - h;
        let mut inside = vec![false; nx * ny];
        for j in 0..ny {
            for i in 0..nx {
                let x = x_min + i as f64 * h;
                let y = y_min + j as f64 * h;
                inside[j * nx + i] = shape.contains(x, y);
            }
        }
        // Outer-edge mirror nodes of the odd-symmetry square must not
        // touch the padded frame, which stays exterior.
        for j in 0..ny {
            inside[j * nx] = false;
            inside[j * nx + nx - 1] = false;
        }
        for i in 0..nx {
            inside[i] = false;
            inside[(ny - 1) * nx + i] = false;
        }
        if !inside.iter().any(|&b| b) {
            return Err(Error::Domain("domain has empty interior".into()));
        }
        let mut dom = Domain2D {
            shape,
            h,
            bbox: (x_min, x_min + (nx - 1) as f64 * h, y_min, y_min + (ny - 1) as f64 * h),
            nx,
            ny,
            inside,
            dist: Vec::new(),
        };
        dom.check_connected()?;
        dom.dist = dom.distance_field();
        Ok(dom)
    }

    pub fn node_xy(&self, idx: usize) -> (f64, f64) {
        let i = idx % self.nx;
        let j = idx / self.nx;
        (self.bbox.0 + i as f64 * self.h, self.bbox.2 + j as f64 * self.h)
    }

    pub fn node_at(&self, x: f64, y: f64) -> Option<usize> {
        let i = ((x - self.bbox.0) / self.h).round() as isize;
        let j = ((y - self.bbox.2) / self.h).round() as isize;
        if i < 0 || j < 0 || i as usize >= self.nx || j as usize >= self.ny {
            return None;
        }
        Some(j as usize * self.nx + i as usize)
    }

    pub fn dist_at(&self, x: f64, y: f64) -> f64 {
        self.node_at(x, y).map(|p| self.dist[p]).unwrap_or(0.0)
    }

    pub fn max_dist(&self) -> f64 {
        self.dist.iter().cloned().fold(0.0, f64::max)
    }

    /// Has the mirror boundary of the odd-symmetry square on the
    /// far x/y edges.
    pub fn is_odd_symmetry(&self) -> bool {
        matches!(self.shape, Shape::SquareOddSymmetry { .. })
    }

    fn check_connected(&self) -> Result<()> {
        let first = self.inside.iter().position(|&b| b).unwrap();
        let mut seen = vec![false; self.inside.len()];
        let mut stack = vec![first];
        seen[first] = true;
        let mut count = 1usize;
        while let Some(p) = stack.pop() {
            let i = p % self.nx;
            let j = p / self.nx;
            let mut push = |q: usize| {
                if self.inside[q] && !seen[q] {
                    seen[q] = true;
                    stack.push(q);
                    count += 1;
                }
            };
            if i > 0 {
                push(p - 1);
            }
            if i + 1 < self.nx {
                push(p + 1);
            }
            if j > 0 {
                push(p - self.nx);
            }
            if j + 1 < self.ny {
                push(p + self.nx);
            }
        }
        let total = self.inside.iter().filter(|&&b| b).count();
        if count != total {
            return Err(Error::Domain(
                "domain interior is disconnected (disjoint disks?)".into(),
            ));
        }
        Ok(())
    }

    /// Distance to the exterior by a two-pass 8-neighbor chamfer sweep
    /// followed by Godunov Eikonal correction sweeps.
    fn distance_field(&self) -> Vec<f64> {
        let (nx, ny, h) = (self.nx, self.ny, self.h);
        let diag = h * std::f64::consts::SQRT_2;
        let mut d: Vec<f64> = self
            .inside
            .iter()
            .map(|&b| if b { f64::INFINITY } else { 0.0 })
            .collect();

        // The mirror edges of the odd-symmetry square are not actual
        // boundary: seed them at infinity-like large values instead by
        // reflecting, i.e. treat the frame beyond them as interior for
        // the distance computation. Simplest correct treatment: extend
        // distances across the mirror line afterwards; here we instead
        // exclude those exterior seeds.
        let mirror = self.is_odd_symmetry();
        let mirror_skip = |i: usize, j: usize| -> bool {
            if !mirror {
                return false;
            }
            // Frame nodes adjacent to the far edges do not induce
            // boundary distance.
            i + 1 >= self.nx || j + 1 >= self.ny
        };
        if mirror {
            for j in 0..ny {
                for i in 0..nx {
                    if !self.inside[j * nx + i] && mirror_skip(i, j) {
                        d[j * nx + i] = f64::INFINITY;
                    }
                }
            }
        }

        let idx = |i: usize, j: usize| j * nx + i;
        // Forward chamfer pass.
        for j in 0..ny {
            for i in 0..nx {
                let p = idx(i, j);
                if d[p] == 0.0 {
                    continue;
                }
                let mut best = d[p];
                if i > 0 {
                    best = best.min(d[idx(i - 1, j)] + h);
                }
                if j > 0 {
                    best = best.min(d[idx(i, j - 1)] + h);
                    if i > 0 {
                        best = best.min(d[idx(i - 1, j - 1)] + diag);
                    }
                    if i + 1 < nx {
                        best = best.min(d[idx(i + 1, j - 1)] + diag);
                    }
                }
                d[p] = best;
            }
        }
        // Backward chamfer pass.
        for j in (0..ny).rev() {
            for i in (0..nx).rev() {
                let p = idx(i, j);
                if d[p] == 0.0 {
                    continue;
                }
                let mut best = d[p];
                if i + 1 < nx {
                    best = best.min(d[idx(i + 1, j)] + h);
                }
                if j + 1 < ny {
                    best = best.min(d[idx(i, j + 1)] + h);
                    if i + 1 < nx {
                        best = best.min(d[idx(i + 1, j + 1)] + diag);
                    }
                    if i > 0 {
                        best = best.min(d[idx(i - 1, j + 1)] + diag);
                    }
                }
                d[p] = best;
            }
        }
        // Godunov upwind correction: one round of four directional
        // sweeps sharpens the chamfer metric toward Euclidean.
        let update = |d: &mut Vec<f64>, i: usize, j: usize| {
            let p = idx(i, j);
            if d[p] == 0.0 {
                return;
            }
            let mut ax = f64::INFINITY;
            if i > 0 {
                ax = ax.min(d[idx(i - 1, j)]);
            }
            if i + 1 < nx {
                ax = ax.min(d[idx(i + 1, j)]);
            }
            let mut ay = f64::INFINITY;
            if j > 0 {
                ay = ay.min(d[idx(i, j - 1)]);
            }
            if j + 1 < ny {
                ay = ay.min(d[idx(i, j + 1)]);
            }
            let (a, b) = if ax <= ay { (ax, ay) } else { (ay, ax) };
            if !a.is_finite() {
                return;
            }
            let cand = if b - a >= h {
                a + h
            } else {
                0.5 * (a + b + (2.0 * h * h - (b - a) * (b - a)).sqrt())
            };
            if cand < d[p] {
                d[p] = cand;
            }
        };
        for j in 0..ny {
            for i in 0..nx {
                update(&mut d, i, j);
            }
        }
        for j in 0..ny {
            for i in (0..nx).rev() {
                update(&mut d, i, j);
            }
        }
        for j in (0..ny).rev() {
            for i in 0..nx {
                update(&mut d, i, j);
            }
        }
        for j in (0..ny).rev() {
            for i in (0..nx).rev() {
                update(&mut d, i, j);
            }
        }
        for v in &mut d {
            if !v.is_finite() {
                *v = 0.0;
            }
        }
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disk_distance_matches_geometry() {
        let dom = Domain2D::build(
            Shape::Disk(DiskSpec { cx: 0.0, cy: 0.0, r: 10.0 }),
            0.1,
        )
        .unwrap();
        assert!((dom.dist_at(0.0, 0.0) - 10.0).abs() <= 0.2);
        // Off-axis probe where the chamfer metric is weakest.
        let (x, y) = (5.0 * (22.5f64).to_radians().cos(), 5.0 * (22.5f64).to_radians().sin());
        let exact = 10.0 - (x.hypot(y));
        assert!(
            (dom.dist_at(x, y) - exact).abs() <= 0.2,
            "dist {} vs {}",
            dom.dist_at(x, y),
            exact
        );
    }

    #[test]
    fn rectangle_distance_matches_geometry() {
        let dom = Domain2D::build(Shape::Rectangle { width: 30.0, height: 30.0 }, 0.1).unwrap();
        assert!((dom.dist_at(15.0, 15.0) - 15.0).abs() <= 0.2);
        assert!((dom.dist_at(1.0, 15.0) - 1.0).abs() <= 0.2);
    }

    #[test]
    fn overlapping_disks_connect_disjoint_reject() {
        let overlapping = Shape::UnionOfDisks(vec![
            DiskSpec { cx: 0.0, cy: 0.0, r: 12.0 },
            DiskSpec { cx: 20.0, cy: 0.0, r: 12.0 },
        ]);
        assert!(Domain2D::build(overlapping, 0.25).is_ok());

        let disjoint = Shape::UnionOfDisks(vec![
            DiskSpec { cx: 0.0, cy: 0.0, r: 5.0 },
            DiskSpec { cx: 20.0, cy: 0.0, r: 5.0 },
        ]);
        assert!(Domain2D::build(disjoint, 0.25).is_err());
    }

    #[test]
    fn annulus_distance_peaks_at_midradius() {
        let dom = Domain2D::build(
            Shape::Annulus { cx: 0.0, cy: 0.0, r_in: 4.0, r_out: 10.0 },
            0.1,
        )
        .unwrap();
        assert!((dom.dist_at(7.0, 0.0) - 3.0).abs() <= 0.2);
        assert!((dom.max_dist() - 3.0).abs() <= 0.2);
    }

    #[test]
    fn empty_interior_rejected() {
        assert!(Domain2D::build(Shape::Disk(DiskSpec { cx: 0.0, cy: 0.0, r: 0.01 }), 0.1).is_err());
    }

    #[test]
    fn odd_symmetry_square_keeps_far_edges_interior() {
        let dom = Domain2D::build(Shape::SquareOddSymmetry { l: 10.0 }, 0.1).unwrap();
        // Axis nodes are exterior (Dirichlet zeros)...
        let p = dom.node_at(0.0, 5.0).unwrap();
        assert!(!dom.inside[p]);
        // ...while the far edges belong to the unknowns.
        let q = dom.node_at(10.0, 5.0).unwrap();
        assert!(dom.inside[q]);
        // Distance ignores the mirror edges: at the far corner the
        // nearest true boundary is an axis, 10 away.
        let c = dom.node_at(10.0, 10.0).unwrap();
        assert!((dom.dist[c] - 10.0).abs() <= 0.3);
    }

    #[test]
    fn domain_spec_parses() {
        let spec: DomainSpec =
            serde_json::from_str(r#"{"shape":"disk","params":{"r":3.0},"h":0.1}"#).unwrap();
        let shape = spec.to_shape().unwrap();
        assert_eq!(shape, Shape::Disk(DiskSpec { cx: 0.0, cy: 0.0, r: 3.0 }));
        assert!(serde_json::from_str::<DomainSpec>(r#"{"shape":"disk","h":0.1,"x":1}"#).is_err());
    }
}
