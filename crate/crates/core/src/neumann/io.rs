use std::io::Write;

use super::{FieldTuple, Grid};
use crate::error::{check_dim, Error, Result};

/// Node-ordered CSV with header `x[,y],u1,…,un`. Floats use the shortest
/// round-trip representation.
pub fn write_csv<W: Write>(mut out: W, grid: &Grid, u: &FieldTuple) -> Result<()> {
    check_dim(grid.node_count(), u.nodes())?;
    let io = |e: std::io::Error| Error::Internal(format!("csv write failed: {e}"));
    let mut header = vec!["x".to_string()];
    if grid.dim() == 2 {
        header.push("y".into());
    }
    header.extend((1..=u.n()).map(|i| format!("u{i}")));
    writeln!(out, "{}", header.join(",")).map_err(io)?;
    for k in 0..grid.node_count() {
        let mut row: Vec<String> = grid.coords(k).iter().map(|v| v.to_string()).collect();
        row.extend(u.components().iter().map(|c| c[k].to_string()));
        writeln!(out, "{}", row.join(",")).map_err(io)?;
    }
    Ok(())
}
