//! Grid-function snapshots: a one-line JSON header `{d, h, M}` followed by
//! CSV rows `(index vector, re, im)`.

use std::fs;
use std::io::Write as _;
use std::path::Path;

use nilab_core::error::{Error, Result};
use nilab_core::lattice::{FreqLattice, GridFn, MAX_DIM};
use nilab_core::picard::PicardStack;

pub fn save_gridfn(path: &Path, grid: &GridFn) -> Result<()> {
    let lat = grid.lattice();
    let mut file = std::io::BufWriter::new(fs::File::create(path)?);
    writeln!(
        file,
        "{}",
        serde_json::json!({"d": lat.dim(), "h": lat.spacing(), "M": lat.points_per_axis()})
    )?;
    let mut idx = [0i64; MAX_DIM];
    let d = lat.dim();
    for (flat, v) in grid.values().iter().enumerate() {
        lat.signed_index(flat, &mut idx[..d]);
        for j in &idx[..d] {
            write!(file, "{j},")?;
        }
        writeln!(file, "{},{}", v.re, v.im)?;
    }
    Ok(())
}

pub fn load_gridfn(path: &Path) -> Result<GridFn> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::Config("empty snapshot".into()))?;
    let meta: serde_json::Value =
        serde_json::from_str(header).map_err(|e| Error::Config(format!("bad header: {e}")))?;
    let d = meta["d"].as_u64().ok_or_else(|| Error::Config("missing d".into()))? as usize;
    let h = meta["h"].as_f64().ok_or_else(|| Error::Config("missing h".into()))?;
    let m = meta["M"].as_u64().ok_or_else(|| Error::Config("missing M".into()))? as usize;
    let lat = FreqLattice::new(d, h, m)?;
    let mut grid = GridFn::zeros(lat.clone());
    for line in lines {
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != d + 2 {
            return Err(Error::Config(format!("bad row '{line}'")));
        }
        let mut idx = [0i64; MAX_DIM];
        for a in 0..d {
            idx[a] = cells[a]
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("bad index '{line}'")))?;
        }
        let re: f64 =
            cells[d].trim().parse().map_err(|_| Error::Config(format!("bad value '{line}'")))?;
        let im: f64 = cells[d + 1]
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("bad value '{line}'")))?;
        let flat = lat
            .flat_from_signed(&idx[..d])
            .ok_or_else(|| Error::Range(format!("index outside lattice: '{line}'")))?;
        grid.values_mut()[flat] = num_complex::Complex64::new(re, im);
    }
    Ok(grid)
}

/// Export the stack's stored levels keyed by `(k, time-node index)`.
pub fn save_stack_snapshots(dir: &Path, stack: &PicardStack, k_max: u32, n: f64) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut k = 1;
    while k <= k_max {
        let level = stack.picard_iterate(k)?;
        for (i, g) in level.at_nodes.iter().enumerate() {
            save_gridfn(&dir.join(format!("N{n}_U{k}_node{i}.csv")), g)?;
        }
        save_gridfn(&dir.join(format!("N{n}_U{k}_final.csv")), &level.at_final)?;
        k += 2;
    }
    Ok(())
}
