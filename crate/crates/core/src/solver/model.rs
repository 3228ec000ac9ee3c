//! Layered phantom geometry and its structured quadrilateral mesh.
//!
//! Coordinates: `x` runs along the sponge from its left end, `y = 0` is the
//! sponge top surface, the sponge and the absorber band lie below, the gel
//! layer and standoff pad above (centred on the sponge).

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::element::{stiffness, ElementMatrix};
use super::material::{ElasticMaterial, RegionProps, SpongeSpec};
use super::SolverError;
use crate::dispersion::VoigtMaterial;
use crate::scalar::{is_pos, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Region {
    Pad = 0,
    Gel = 1,
    Sponge = 2,
    Absorber = 3,
}

impl Region {
    pub const ALL: [Region; 4] = [Region::Pad, Region::Gel, Region::Sponge, Region::Absorber];

    pub fn name(self) -> &'static str {
        match self {
            Region::Pad => "pad",
            Region::Gel => "gel",
            Region::Sponge => "sponge",
            Region::Absorber => "absorber",
        }
    }
}

/// Dimensions of the layered phantom, metres.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, bound(deserialize = "T: Scalar + Deserialize<'de>"))]
pub struct PhantomGeometry<T = f64> {
    pub pad_length: T,
    pub pad_height: T,
    pub sponge_length: T,
    pub sponge_height: T,
    pub gel_thickness: T,
    pub element_size: T,
    /// Depth of the damped band below the sponge.
    pub absorber_width: T,
    /// Peak mass-proportional damping rate at the bottom of the band, 1/s.
    pub absorber_damping: T,
    /// Width of the driven segment at the top-left corner of the pad.
    pub contact_width: T,
    /// Width of the clamped segment centred on the pad top.
    pub clamp_width: T,
    /// Dashpots on the lateral faces of the pad and gel.
    pub absorbing_pad_edges: bool,
}

impl<T: Scalar> Default for PhantomGeometry<T> {
    fn default() -> Self {
        Self {
            pad_length: T::lit(0.09),
            pad_height: T::lit(0.015),
            sponge_length: T::lit(0.12),
            sponge_height: T::lit(0.02),
            gel_thickness: T::zero(),
            element_size: T::lit(0.001),
            absorber_width: T::lit(0.01),
            absorber_damping: T::lit(3000.0),
            contact_width: T::lit(0.003),
            clamp_width: T::lit(0.01),
            absorbing_pad_edges: false,
        }
    }
}

/// Sponge block with a free top surface and absorbing sides and bottom.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, bound(deserialize = "T: Scalar + Deserialize<'de>"))]
pub struct HalfSpaceGeometry<T = f64> {
    pub length: T,
    pub depth: T,
    pub element_size: T,
    pub absorber_width: T,
    pub absorber_damping: T,
    pub contact_width: T,
    /// Distance of the driven segment from the left edge.
    pub source_offset: T,
}

impl<T: Scalar> Default for HalfSpaceGeometry<T> {
    fn default() -> Self {
        Self {
            length: T::lit(0.12),
            depth: T::lit(0.04),
            element_size: T::lit(0.001),
            absorber_width: T::lit(0.01),
            absorber_damping: T::lit(3000.0),
            contact_width: T::lit(0.003),
            source_offset: T::lit(0.01),
        }
    }
}

/// Number of elements spanning `len`, if commensurate with `h` within 1e-9 m
/// or a few ulps of `len`, whichever is looser.
fn cells<T: Scalar>(what: &str, len: T, h: T, allow_zero: bool) -> Result<usize, SolverError> {
    if !len.is_finite() || len < T::zero() || (!allow_zero && len == T::zero()) {
        return Err(SolverError::Meshing(format!(
            "{what} must be positive, got {len}"
        )));
    }
    let n = (len / h).round();
    let tol = T::lit(1e-9).max(T::lit(64.0) * T::epsilon() * len);
    if (n * h - len).abs() > tol {
        return Err(SolverError::Meshing(format!(
            "{what} = {len} m is not a multiple of element size {h} m"
        )));
    }
    n.to_usize()
        .ok_or_else(|| SolverError::Meshing(format!("{what}: bad cell count")))
}

/// Meshed phantom. Immutable after construction.
#[derive(Debug, Clone)]
pub struct PhantomModel<T = f64> {
    pub(crate) h: T,
    pub(crate) nodes: Vec<[T; 2]>,
    pub(crate) elements: Vec<[u32; 4]>,
    pub(crate) element_region: Vec<Region>,
    pub(crate) props: [Option<RegionProps<T>>; 4],
    pub(crate) stiffness: [Option<ElementMatrix<T>>; 4],
    pub(crate) mass: Vec<T>,
    /// Per-node mass-proportional damping coefficient, N s/m.
    pub(crate) mass_damping: Vec<T>,
    /// Per-node dashpot coefficients (x, y), N s/m.
    pub(crate) dashpots: Vec<(u32, [T; 2])>,
    pub(crate) driven: Vec<u32>,
    pub(crate) fixed: Vec<u32>,
    pub(crate) surface: Vec<u32>,
    pub(crate) contact_width: T,
}

struct Block {
    region: Region,
    i: (i64, i64),
    j: (i64, i64),
}

impl<T: Scalar> PhantomModel<T> {
    pub fn element_size(&self) -> T {
        self.h
    }
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }
    pub fn element_count(&self) -> usize {
        self.elements.len()
    }
    pub fn node(&self, id: usize) -> [T; 2] {
        self.nodes[id]
    }
    pub fn elements_in(&self, region: Region) -> usize {
        self.element_region.iter().filter(|&&r| r == region).count()
    }
    pub fn region_props(&self, region: Region) -> Option<&RegionProps<T>> {
        self.props[region as usize].as_ref()
    }
    pub fn driven_nodes(&self) -> &[u32] {
        &self.driven
    }
    pub fn fixed_nodes(&self) -> &[u32] {
        &self.fixed
    }
    pub fn absorbing_nodes(&self) -> impl Iterator<Item = u32> + '_ {
        self.dashpots.iter().map(|d| d.0)
    }
    /// Nodes on the sponge top surface ordered by x.
    pub fn surface_nodes(&self) -> &[u32] {
        &self.surface
    }
    pub fn contact_width(&self) -> T {
        self.contact_width
    }

    /// Surface node closest to `x`, if one lies within a quarter element.
    pub fn surface_node_at(&self, x: T) -> Option<u32> {
        let tol = self.h * T::lit(0.25);
        self.surface
            .iter()
            .copied()
            .find(|&n| (self.nodes[n as usize][0] - x).abs() <= tol)
    }

    fn mesh(
        h: T,
        blocks: &[Block],
        props: [Option<RegionProps<T>>; 4],
        band: Option<Band<T>>,
    ) -> Self {
        let i_min = blocks.iter().map(|b| b.i.0).min().unwrap();
        let i_max = blocks.iter().map(|b| b.i.1).max().unwrap();
        let j_min = blocks.iter().map(|b| b.j.0).min().unwrap();
        let j_max = blocks.iter().map(|b| b.j.1).max().unwrap();
        let w = (i_max - i_min + 1) as usize;
        let hgt = (j_max - j_min + 1) as usize;
        let idx = |i: i64, j: i64| (j - j_min) as usize * w + (i - i_min) as usize;

        let region_at = |i: i64, j: i64| {
            blocks
                .iter()
                .find(|b| i >= b.i.0 && i < b.i.1 && j >= b.j.0 && j < b.j.1)
                .map(|b| b.region)
        };
        let mut used = vec![false; w * hgt];
        let mut cell_list = Vec::new();
        for j in j_min..j_max {
            for i in i_min..i_max {
                if let Some(r) = region_at(i, j) {
                    cell_list.push((i, j, r));
                    for (di, dj) in [(0, 0), (1, 0), (1, 1), (0, 1)] {
                        used[idx(i + di, j + dj)] = true;
                    }
                }
            }
        }
        let mut id = vec![u32::MAX; w * hgt];
        let mut nodes = Vec::new();
        for j in j_min..=j_max {
            for i in i_min..=i_max {
                let k = idx(i, j);
                if used[k] {
                    id[k] = nodes.len() as u32;
                    nodes.push([T::from_i64(i).unwrap() * h, T::from_i64(j).unwrap() * h]);
                }
            }
        }

        let mut elements = Vec::with_capacity(cell_list.len());
        let mut element_region = Vec::with_capacity(cell_list.len());
        let mut mass = vec![T::zero(); nodes.len()];
        let mut mass_damping = vec![T::zero(); nodes.len()];
        let quarter = T::lit(0.25) * h * h;
        for &(i, j, r) in &cell_list {
            let conn = [idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1)].map(|k| id[k]);
            let p = props[r as usize].expect("region material");
            let m = p.rho * quarter;
            let alpha = band.map_or(T::zero(), |b| b.rate(i, j));
            for &n in &conn {
                mass[n as usize] = mass[n as usize] + m;
                mass_damping[n as usize] = mass_damping[n as usize] + alpha * m;
            }
            elements.push(conn);
            element_region.push(r);
        }
        let stiffness =
            Region::ALL.map(|r| props[r as usize].map(|p| stiffness(p.youngs, p.poisson, h)));

        let surface = (i_min..=i_max)
            .map(|i| idx(i, 0))
            .filter(|&k| used[k])
            .map(|k| id[k])
            .collect();

        Self {
            h,
            nodes,
            elements,
            element_region,
            props,
            stiffness,
            mass,
            mass_damping,
            dashpots: Vec::new(),
            driven: Vec::new(),
            fixed: Vec::new(),
            surface,
            contact_width: T::zero(),
        }
    }

    fn top_nodes_between(&self, y: T, x0: T, x1: T) -> Vec<u32> {
        let tol = self.h * T::lit(1e-3);
        (0..self.nodes.len() as u32)
            .filter(|&n| {
                let [x, yy] = self.nodes[n as usize];
                (yy - y).abs() <= tol && x >= x0 - tol && x <= x1 + tol
            })
            .collect()
    }

    /// Lysmer dashpots on the bottom line and on vertical edge segments `(x, y_lo, y_hi)`.
    fn add_dashpots(&mut self, y_bottom: T, sides: &[(T, T, T)]) {
        let tol = self.h * T::lit(1e-3);
        let half = self.h * T::lit(0.5);
        let mut coeff = vec![[T::zero(); 2]; self.nodes.len()];
        let mut touched = vec![false; self.nodes.len()];
        for (e, conn) in self.elements.iter().enumerate() {
            let p = self.props[self.element_region[e] as usize].unwrap();
            let el = p.as_elastic();
            let (zp, zs) = (p.rho * el.p_wave_speed(), p.rho * el.s_wave_speed());
            // edges: (a, b, normal is y?)
            for k in 0..4 {
                let (a, b) = (conn[k] as usize, conn[(k + 1) % 4] as usize);
                let (pa, pb) = (self.nodes[a], self.nodes[b]);
                let bottom = (pa[1] - y_bottom).abs() <= tol && (pb[1] - y_bottom).abs() <= tol;
                let side = sides.iter().any(|&(x, lo, hi)| {
                    [pa, pb]
                        .iter()
                        .all(|p| (p[0] - x).abs() <= tol && p[1] >= lo - tol && p[1] <= hi + tol)
                });
                let c = if bottom {
                    [zs * half, zp * half]
                } else if side {
                    [zp * half, zs * half]
                } else {
                    continue;
                };
                for n in [a, b] {
                    coeff[n][0] = coeff[n][0] + c[0];
                    coeff[n][1] = coeff[n][1] + c[1];
                    touched[n] = true;
                }
            }
        }
        self.dashpots = (0..self.nodes.len())
            .filter(|&n| touched[n])
            .map(|n| (n as u32, coeff[n]))
            .collect();
    }

    /// Plain-text report of element counts, node sets and time step.
    pub fn summary(&self, dt: T) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "element_size_m {}", self.h);
        let _ = writeln!(s, "nodes {}", self.nodes.len());
        let _ = writeln!(s, "elements {}", self.elements.len());
        for r in Region::ALL {
            let _ = writeln!(s, "elements_{} {}", r.name(), self.elements_in(r));
        }
        let _ = writeln!(s, "driven_nodes {}", self.driven.len());
        let _ = writeln!(s, "fixed_nodes {}", self.fixed.len());
        let _ = writeln!(s, "absorbing_nodes {}", self.dashpots.len());
        let _ = writeln!(s, "surface_nodes {}", self.surface.len());
        let _ = writeln!(s, "dt_s {:e}", dt.to_f64_lossy());
        s
    }
}

/// Graded mass-proportional damping: the band below the sponge plus
/// lateral strips of the same width at both ends, for `j < 0`.
#[derive(Debug, Clone, Copy)]
struct Band<T> {
    /// First cell row above the bottom band.
    top: i64,
    /// Cell columns `left..right` span the block.
    left: i64,
    right: i64,
    width: i64,
    peak: T,
}

impl<T: Scalar> Band<T> {
    /// Damping rate at cell `(i, j)`, `peak * d^2` with `d` the normalised depth into the band.
    fn rate(&self, i: i64, j: i64) -> T {
        if j >= 0 || self.width <= 0 {
            return T::zero();
        }
        let w = T::from_i64(self.width).unwrap();
        let depth = |cells: i64| (T::from_i64(cells).unwrap() - T::lit(0.5)) / w;
        let mut d = T::zero();
        if j < self.top {
            d = d.max(depth(self.top - j));
        }
        if i < self.left + self.width {
            d = d.max(depth(self.left + self.width - i));
        }
        if i >= self.right - self.width {
            d = d.max(depth(i - (self.right - self.width) + 1));
        }
        self.peak * d * d
    }
}

fn region_props<T: Scalar>(
    pad: &ElasticMaterial<T>,
    gel: &VoigtMaterial<T>,
    sponge: &SpongeSpec<T>,
) -> Result<[Option<RegionProps<T>>; 4], SolverError> {
    pad.validate()?;
    gel.validate()
        .map_err(|e| SolverError::InvalidInput(e.to_string()))?;
    sponge.validate()?;
    let s = RegionProps::voigt(&sponge.solver_material());
    Ok([
        Some(RegionProps::elastic(pad)),
        Some(RegionProps::voigt(gel)),
        Some(s),
        Some(s),
    ])
}

/// Meshes the pad / gel / sponge / absorber stack.
pub fn build_model<T: Scalar>(
    geometry: &PhantomGeometry<T>,
    pad: &ElasticMaterial<T>,
    gel: &VoigtMaterial<T>,
    sponge: &SpongeSpec<T>,
) -> Result<PhantomModel<T>, SolverError> {
    let g = geometry;
    let h = g.element_size;
    if !is_pos(h) {
        return Err(SolverError::Meshing("element_size must be positive".into()));
    }
    let nx = cells("sponge_length", g.sponge_length, h, false)? as i64;
    let npx = cells("pad_length", g.pad_length, h, false)? as i64;
    let nph = cells("pad_height", g.pad_height, h, false)? as i64;
    let ns = cells("sponge_height", g.sponge_height, h, false)? as i64;
    let na = cells("absorber_width", g.absorber_width, h, false)? as i64;
    let ng = cells("gel_thickness", g.gel_thickness, h, true)? as i64;
    let nc = cells("contact_width", g.contact_width, h, false)? as i64;
    let nclamp = cells("clamp_width", g.clamp_width, h, true)? as i64;
    if npx > nx || (nx - npx) % 2 != 0 {
        return Err(SolverError::Meshing(
            "pad must fit on the sponge with an integer element offset on each side".into(),
        ));
    }
    if nclamp % 2 != 0 {
        return Err(SolverError::Meshing(
            "clamp_width must span an even number of elements".into(),
        ));
    }
    let i0 = (nx - npx) / 2;
    let mut blocks = vec![
        Block {
            region: Region::Absorber,
            i: (0, nx),
            j: (-ns - na, -ns),
        },
        Block {
            region: Region::Sponge,
            i: (0, nx),
            j: (-ns, 0),
        },
    ];
    if ng > 0 {
        blocks.push(Block {
            region: Region::Gel,
            i: (i0, i0 + npx),
            j: (0, ng),
        });
    }
    blocks.push(Block {
        region: Region::Pad,
        i: (i0, i0 + npx),
        j: (ng, ng + nph),
    });

    let props = region_props(pad, gel, sponge)?;
    let band = Band {
        top: -ns,
        left: 0,
        right: nx,
        width: na,
        peak: g.absorber_damping,
    };
    let mut model = PhantomModel::mesh(h, &blocks, props, Some(band));

    let hf = |n: i64| T::from_i64(n).unwrap() * h;
    let y_top = hf(ng + nph);
    let x_pad = hf(i0);
    model.driven = model.top_nodes_between(y_top, x_pad, x_pad + hf(nc));
    if nclamp > 0 {
        let xc = hf(i0 + npx / 2);
        let half = hf(nclamp / 2);
        model.fixed = model.top_nodes_between(y_top, xc - half, xc + half);
    }
    if model.driven.iter().any(|n| model.fixed.contains(n)) {
        return Err(SolverError::Meshing(
            "driven and clamped segments overlap".into(),
        ));
    }
    let y_bottom = hf(-ns - na);
    let mut sides = vec![
        (T::zero(), y_bottom, T::zero()),
        (hf(nx), y_bottom, T::zero()),
    ];
    if g.absorbing_pad_edges {
        sides.push((x_pad, T::zero(), y_top));
        sides.push((x_pad + hf(npx), T::zero(), y_top));
    }
    model.add_dashpots(y_bottom, &sides);
    model.contact_width = g.contact_width;
    Ok(model)
}

/// Meshes a homogeneous sponge block with a free top surface driven near its left end.
pub fn build_half_space<T: Scalar>(
    geometry: &HalfSpaceGeometry<T>,
    sponge: &SpongeSpec<T>,
) -> Result<PhantomModel<T>, SolverError> {
    let g = geometry;
    let h = g.element_size;
    if !is_pos(h) {
        return Err(SolverError::Meshing("element_size must be positive".into()));
    }
    let nx = cells("length", g.length, h, false)? as i64;
    let ns = cells("depth", g.depth, h, false)? as i64;
    let na = cells("absorber_width", g.absorber_width, h, false)? as i64;
    let nc = cells("contact_width", g.contact_width, h, false)? as i64;
    let no = cells("source_offset", g.source_offset, h, true)? as i64;
    if no + nc > nx {
        return Err(SolverError::Meshing(
            "driven segment lies outside the block".into(),
        ));
    }
    sponge.validate()?;
    let s = RegionProps::voigt(&sponge.solver_material());
    let props = [None, None, Some(s), Some(s)];
    let blocks = [
        Block {
            region: Region::Absorber,
            i: (0, nx),
            j: (-ns - na, -ns),
        },
        Block {
            region: Region::Sponge,
            i: (0, nx),
            j: (-ns, 0),
        },
    ];
    let band = Band {
        top: -ns,
        left: 0,
        right: nx,
        width: na,
        peak: g.absorber_damping,
    };
    let mut model = PhantomModel::mesh(h, &blocks, props, Some(band));
    let hf = |n: i64| T::from_i64(n).unwrap() * h;
    model.driven = model.top_nodes_between(T::zero(), hf(no), hf(no + nc));
    let y_bottom = hf(-ns - na);
    model.add_dashpots(
        y_bottom,
        &[
            (T::zero(), y_bottom, T::zero()),
            (hf(nx), y_bottom, T::zero()),
        ],
    );
    model.contact_width = g.contact_width;
    Ok(model)
}
