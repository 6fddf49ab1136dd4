//! Sampling charts on regular grids and exporting the result.
//!
//! Vertices are stored row-major with `x` varying fastest. Every writer
//! formats floats with 17 significant digits, so identical inputs give
//! identical bytes.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diffgeo::{Bounds, GridSpec};
use crate::error::{Error, Result};
use crate::immersions::{Ambient, SurfaceChart};
use crate::lorentz::{disc_projection, Vec3};

pub const MESH_VERSION: u32 = 1;

/// How ambient points become 3D positions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Projection {
    /// `H31`: `(x₁, x₂, x₄)`. `H2xR`: `(p₂, p₃, t)`.
    Raw,
    /// `H2xR` only: `(disc_u, disc_v, t)`.
    Disc,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Vertex {
    pub x: f64,
    pub y: f64,
    pub position: [f64; 3],
    pub quadric_residual: f64,
    pub conformal_factor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeshGrid {
    pub version: u32,
    pub label: String,
    pub ambient: Ambient,
    pub projection: Projection,
    pub nx: usize,
    pub ny: usize,
    pub bounds: Bounds,
    pub vertices: Vec<Vertex>,
}

fn e17(v: f64) -> String {
    format!("{v:.16e}")
}

fn position(c: &SurfaceChart, x: f64, y: f64, proj: Projection) -> Result<(Vertex, [f64; 6])> {
    let p = c.eval(x, y)?;
    let pos = match (c.ambient(), proj) {
        (Ambient::H31, Projection::Raw) => [p.c[0], p.c[1], p.c[3]],
        (Ambient::H2xR, Projection::Raw) => [p.c[1], p.c[2], p.c[3]],
        (Ambient::H2xR, Projection::Disc) => {
            let (u, v) = disc_projection(Vec3([p.c[0], p.c[1], p.c[2]]))?;
            [u, v, p.c[3]]
        }
        (amb, proj) => {
            return Err(Error::NotApplicable(format!("{proj:?} projection of a chart in {amb}")));
        }
    };
    Ok((
        Vertex {
            x,
            y,
            position: pos,
            quadric_residual: p.quadric_residual(),
            conformal_factor: c.declared_conformal_factor(x, y)?,
        },
        p.c,
    ))
}

impl MeshGrid {
    pub fn sample(c: &SurfaceChart, grid: &GridSpec, proj: Projection) -> Result<MeshGrid> {
        let b = grid.resolve(c)?;
        let vertices = grid
            .points(&b)
            .par_iter()
            .map(|&(x, y)| position(c, x, y, proj).map(|v| v.0))
            .collect::<Result<Vec<_>>>()?;
        Ok(MeshGrid {
            version: MESH_VERSION,
            label: c.label().to_string(),
            ambient: c.ambient(),
            projection: proj,
            nx: grid.nx,
            ny: grid.ny,
            bounds: b,
            vertices,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    /// Quads as zero-based vertex indices, counter-clockwise in the
    /// parameter plane.
    pub fn quads(&self) -> impl Iterator<Item = [usize; 4]> + '_ {
        let nx = self.nx;
        (0..self.ny.saturating_sub(1)).flat_map(move |j| {
            (0..nx.saturating_sub(1)).map(move |i| {
                let a = j * nx + i;
                [a, a + 1, a + 1 + nx, a + nx]
            })
        })
    }

    pub fn max_quadric_residual(&self) -> f64 {
        self.vertices.iter().map(|v| v.quadric_residual).fold(0.0, f64::max)
    }

    pub fn to_obj(&self) -> String {
        let mut s = String::new();
        let b = &self.bounds;
        let _ = writeln!(s, "# maxsurf mesh v{}", self.version);
        let _ = writeln!(s, "# chart {}", self.label);
        let _ = writeln!(s, "# ambient {} projection {:?}", self.ambient, self.projection);
        let _ = writeln!(s, "# grid {}x{}", self.nx, self.ny);
        let _ = writeln!(s, "# bounds {}:{}:{}:{}", e17(b.x0), e17(b.x1), e17(b.y0), e17(b.y1));
        for v in &self.vertices {
            let [a, b, c] = v.position;
            let _ = writeln!(s, "v {} {} {}", e17(a), e17(b), e17(c));
        }
        for q in self.quads() {
            let _ = writeln!(s, "f {} {} {} {}", q[0] + 1, q[1] + 1, q[2] + 1, q[3] + 1);
        }
        s
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("mesh serialises")
    }

    pub fn from_json(s: &str) -> Result<MeshGrid> {
        let m: MeshGrid = serde_json::from_str(s).map_err(|e| Error::Parse {
            line: e.line(),
            message: e.to_string(),
        })?;
        if m.version != MESH_VERSION || m.vertices.len() != m.nx * m.ny {
            return Err(Error::Parse {
                line: 0,
                message: "version or vertex count mismatch".into(),
            });
        }
        Ok(m)
    }

    /// `x,y,X,Y,Z,quadric_residual,conformal_factor` per vertex.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("x,y,X,Y,Z,quadric_residual,conformal_factor\n");
        for v in &self.vertices {
            let [a, b, c] = v.position;
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{}",
                e17(v.x),
                e17(v.y),
                e17(a),
                e17(b),
                e17(c),
                e17(v.quadric_residual),
                e17(v.conformal_factor)
            );
        }
        s
    }

    /// Top view: the first two position coordinates.
    pub fn to_top_csv(&self) -> String {
        let mut s = String::from("x,y,u,v\n");
        for v in &self.vertices {
            let _ = writeln!(
                s,
                "{},{},{},{}",
                e17(v.x),
                e17(v.y),
                e17(v.position[0]),
                e17(v.position[1])
            );
        }
        s
    }
}
