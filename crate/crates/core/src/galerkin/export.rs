use std::io::Write;

use nalgebra::{DMatrix, DVector};

use super::basis::PointGrid;
use super::linop::{evaluate, scalar_value, stf_values, vector_values, LinOp};
use super::space::{DiscreteSpaces, Field};
use crate::error::Result;

/// Writes the nonzero entries as `row col value` lines.
pub fn write_coordinate<W: Write>(m: &DMatrix<f64>, mut out: W) -> Result<()> {
    writeln!(out, "% {} {}", m.nrows(), m.ncols())?;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            let v = m[(i, j)];
            if v != 0.0 {
                writeln!(out, "{i} {j} {v:e}")?;
            }
        }
    }
    Ok(())
}

/// Named pointwise components of the five fields.
fn components() -> Vec<(String, LinOp, bool)> {
    let mut out = Vec::new();
    let sig = stf_values(Field::Sigma, 3);
    for i in 0..3 {
        for j in i..3 {
            out.push((
                format!("sigma_{}{}", i + 1, j + 1),
                sig[i * 3 + j].clone(),
                true,
            ));
        }
    }
    for (i, op) in vector_values(Field::S, 3).into_iter().enumerate() {
        out.push((format!("s_{}", i + 1), op, true));
    }
    out.push(("p".to_string(), scalar_value(Field::Pressure), true));
    for (i, op) in vector_values(Field::Velocity, 3).into_iter().enumerate() {
        out.push((format!("u_{}", i + 1), op, false));
    }
    out.push(("theta".to_string(), scalar_value(Field::Temperature), false));
    out
}

/// Writes a discrete solution as CSV rows `point, x, y, z, component, value`.
pub fn write_fields_csv<W: Write>(
    spaces: &DiscreteSpaces,
    v: &DVector<f64>,
    q: &DVector<f64>,
    grid: &PointGrid,
    out: W,
) -> Result<()> {
    let full = spaces.expand_v(v);
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["point", "x", "y", "z", "component", "value"])
        .map_err(csv_error)?;
    let points: Vec<[f64; 3]> = grid.iter().map(|(x, _)| x).collect();
    for (name, op, on_v) in components() {
        let vals = if on_v {
            evaluate(&spaces.v_layout, &full, &op, grid, None)
        } else {
            evaluate(&spaces.q_layout, q, &op, grid, None)
        };
        for (k, (x, val)) in points.iter().zip(vals).enumerate() {
            w.write_record([
                k.to_string(),
                x[0].to_string(),
                x[1].to_string(),
                x[2].to_string(),
                name.clone(),
                val.to_string(),
            ])
            .map_err(csv_error)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub(crate) fn csv_error(e: csv::Error) -> crate::error::Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => io.into(),
        other => std::io::Error::other(format!("{other:?}")).into(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::galerkin::space::{Pairing, PressureMode};

    #[test]
    fn coordinate_format_lists_nonzeros() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -2.5]);
        let mut buf = Vec::new();
        write_coordinate(&m, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 3);
        assert!(text.contains("1 1 -2.5e0"));
    }

    #[test]
    fn field_csv_has_a_row_per_point_and_component() {
        let s = DiscreteSpaces::new(1, 1, PressureMode::Full, Pairing::Enriched).unwrap();
        let grid = s.v_layout.blocks[0].space.volume_grid(2);
        let mut buf = Vec::new();
        write_fields_csv(
            &s,
            &DVector::zeros(s.dim_v()),
            &DVector::zeros(s.dim_q()),
            &grid,
            &mut buf,
        )
        .unwrap();
        let rows = String::from_utf8(buf).unwrap().lines().count();
        assert_eq!(rows, 1 + grid.len() * (6 + 3 + 1 + 3 + 1));
    }
}
