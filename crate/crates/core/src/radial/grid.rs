use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Node placement rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Spacing {
    Uniform,
    /// Mesh width at both ends is `1/ratio` times the width at `r = 1/2`.
    Graded { ratio: f64 },
    /// Nodes supplied by the caller.
    Custom,
}

pub const DEFAULT_GRADING: f64 = 4.0;

/// Nodes `0 < r_0 < … < r_{N−1} = 1`; the origin is never a node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialGrid {
    nodes: Vec<f64>,
    pub spacing: Spacing,
    pub n: u32,
}

impl RadialGrid {
    pub fn uniform(nodes: usize, n: u32) -> Result<Self> {
        let mut g = Self::graded(nodes, n, 1.0)?;
        g.spacing = Spacing::Uniform;
        Ok(g)
    }

    /// `r_i = g(i/N)`, `i = 1..N`, with
    /// `g'(s) = c_e + (c_m − c_e) sin²(πs)`, `c_e = 2/(1+ratio)`, `c_m = 2 − c_e`.
    /// The map is smooth, so the composed second-order stencils stay
    /// second order in the interior.
    pub fn graded(nodes: usize, n: u32, ratio: f64) -> Result<Self> {
        if nodes < 3 {
            return Err(Error::InvalidInput(format!("grid needs at least 3 nodes, got {nodes}")));
        }
        if !(ratio.is_finite() && ratio >= 1.0) {
            return Err(Error::InvalidInput(format!("grading ratio must be ≥ 1, got {ratio}")));
        }
        let ce = 2.0 / (1.0 + ratio);
        let cm = 2.0 - ce;
        let g = |s: f64| ce * s + (cm - ce) * (0.5 * s - (2.0 * std::f64::consts::PI * s).sin() / (4.0 * std::f64::consts::PI));
        let nn = nodes as f64;
        let mut r: Vec<f64> = (1..=nodes).map(|i| g(i as f64 / nn)).collect();
        r[nodes - 1] = 1.0;
        let mut out = Self::from_nodes(r, n)?;
        out.spacing = Spacing::Graded { ratio };
        Ok(out)
    }

    /// Default grid: graded with [`DEFAULT_GRADING`].
    pub fn default_for(nodes: usize, n: u32) -> Result<Self> {
        Self::graded(nodes, n, DEFAULT_GRADING)
    }

    pub fn from_nodes(nodes: Vec<f64>, n: u32) -> Result<Self> {
        if nodes.len() < 3 {
            return Err(Error::InvalidInput("grid needs at least 3 nodes".into()));
        }
        if !(nodes[0] > 0.0) {
            return Err(Error::InvalidInput(format!("first node must be > 0, got {}", nodes[0])));
        }
        if *nodes.last().unwrap() != 1.0 {
            return Err(Error::InvalidInput("last node must equal 1".into()));
        }
        if let Some(w) = nodes.windows(2).find(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidInput(format!("nodes not strictly increasing at {} ≥ {}", w[0], w[1])));
        }
        Ok(Self { nodes, spacing: Spacing::Custom, n })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Largest spacing, including the gap from the origin to the first node.
    pub fn max_spacing(&self) -> f64 {
        self.nodes.windows(2).map(|w| w[1] - w[0]).fold(self.nodes[0], f64::max)
    }
}

/// Values attached to the nodes of a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialField {
    pub grid: RadialGrid,
    pub values: Vec<f64>,
}

impl RadialField {
    pub fn new(grid: RadialGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidInput(format!(
                "field has {} values for {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite value at node {i}")));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: RadialGrid) -> Self {
        let values = vec![0.0; grid.len()];
        Self { grid, values }
    }

    pub fn from_fn(grid: RadialGrid, f: impl Fn(f64) -> f64) -> Result<Self> {
        let v = grid.nodes().iter().map(|&r| f(r)).collect();
        Self::new(grid, v)
    }

    /// Value at `r = 0` by quadratic extrapolation in `r²` through the three
    /// innermost nodes (radial fields are even in `r`).
    pub fn center_value(&self) -> f64 {
        let r = self.grid.nodes();
        let (x0, x1, x2) = (r[0] * r[0], r[1] * r[1], r[2] * r[2]);
        let (y0, y1, y2) = (self.values[0], self.values[1], self.values[2]);
        let l0 = x1 * x2 / ((x0 - x1) * (x0 - x2));
        let l1 = x0 * x2 / ((x1 - x0) * (x1 - x2));
        let l2 = x0 * x1 / ((x2 - x0) * (x2 - x1));
        y0 * l0 + y1 * l1 + y2 * l2
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "r,value")?;
        for (r, v) in self.grid.nodes().iter().zip(&self.values) {
            writeln!(w, "{r:e},{v:e}")?;
        }
        Ok(())
    }

    /// Reads `r,value` CSV; the grid is rebuilt as a custom grid in dimension `n`.
    pub fn read_csv<R: BufRead>(r: R, n: u32) -> Result<Self> {
        let mut lines = r.lines();
        match lines.next() {
            Some(Ok(h)) if h.trim() == "r,value" => {}
            _ => return Err(Error::Parse("expected header `r,value`".into())),
        }
        let (mut nodes, mut values) = (Vec::new(), Vec::new());
        for (i, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let (a, b) = line
                .split_once(',')
                .ok_or_else(|| Error::Parse(format!("line {}: expected two fields", i + 2)))?;
            let parse = |s: &str| s.trim().parse::<f64>().map_err(|e| Error::Parse(format!("line {}: {e}", i + 2)));
            nodes.push(parse(a)?);
            values.push(parse(b)?);
        }
        Self::new(RadialGrid::from_nodes(nodes, n)?, values)
    }
}
