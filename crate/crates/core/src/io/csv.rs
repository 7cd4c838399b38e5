use std::io::Write;

use crate::dynamics::Trajectory;

/// Fixed 17-significant-digit scientific notation, so output is byte-stable
/// and parses back to the same `f64`.
pub fn format_real(v: f64) -> String {
    format!("{v:.16e}")
}

/// Row indices: every `stride`-th sample plus the last one.
fn kept_rows(len: usize, stride: usize) -> impl Iterator<Item = usize> {
    let stride = stride.max(1);
    (0..len).filter(move |&i| i % stride == 0 || i + 1 == len)
}

/// Writes `t,x_1,…,x_n` rows.
pub fn write_trajectory_csv<W: Write>(
    w: &mut W,
    traj: &Trajectory,
    stride: usize,
) -> std::io::Result<()> {
    let n = traj.states.first().map_or(0, |x| x.dim());
    let header: Vec<String> = std::iter::once("t".to_string())
        .chain((1..=n).map(|i| format!("x_{i}")))
        .collect();
    writeln!(w, "{}", header.join(","))?;
    for i in kept_rows(traj.times.len(), stride) {
        let row: Vec<String> = std::iter::once(traj.times[i])
            .chain(traj.states[i].iter().copied())
            .map(format_real)
            .collect();
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

/// Writes a header followed by one row per kept time index; `columns[c][i]`
/// is the value of column `c` at index `i`.
pub fn write_series_csv<W: Write>(
    w: &mut W,
    header: &[&str],
    columns: &[&[f64]],
    stride: usize,
) -> std::io::Result<()> {
    writeln!(w, "{}", header.join(","))?;
    let len = columns.iter().map(|c| c.len()).min().unwrap_or(0);
    for i in kept_rows(len, stride) {
        let row: Vec<String> = columns.iter().map(|c| format_real(c[i])).collect();
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keeps_stride_and_last() {
        assert_eq!(kept_rows(7, 3).collect::<Vec<_>>(), vec![0, 3, 6]);
        assert_eq!(kept_rows(8, 3).collect::<Vec<_>>(), vec![0, 3, 6, 7]);
        assert_eq!(kept_rows(3, 0).collect::<Vec<_>>(), vec![0, 1, 2]);
    }

    #[test]
    fn reals_round_trip() {
        for v in [0.1, -1.0 / 3.0, 1e-300, 6.02e23, 0.0] {
            assert_eq!(format_real(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(format_real(1.0), "1.0000000000000000e0");
    }

    #[test]
    fn series_layout() {
        let mut buf = Vec::new();
        write_series_csv(&mut buf, &["t", "y"], &[&[0.0, 1.0], &[2.0, 3.0]], 1).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "t,y\n0.0000000000000000e0,2.0000000000000000e0\n1.0000000000000000e0,3.0000000000000000e0\n");
    }
}
