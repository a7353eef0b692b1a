//! Plot-ready artifacts: a CSV pairing input and embedding coordinates and
//! a gnuplot script that draws them side by side.

use std::fmt::Write;

use lsdr_core::io::column_names;
use lsdr_core::Matrix;

/// `[x | y | skeletal]` with a header row.
pub fn plot_table(x: &Matrix, y: &Matrix, skeletal: &[usize]) -> (Matrix, Vec<String>) {
    let (n, p) = x.shape();
    let d = y.cols();
    let mut out = Matrix::zeros(n, p + d + 1);
    for i in 0..n {
        let row = out.row_mut(i);
        row[..p].copy_from_slice(x.row(i));
        row[p..p + d].copy_from_slice(y.row(i));
    }
    for &i in skeletal {
        out[(i, p + d)] = 1.0;
    }
    let mut header = column_names("x", p);
    header.extend(column_names("y", d));
    header.push("skeletal".into());
    (out, header)
}

/// Gnuplot script for a table written by [`plot_table`] to `data_file`.
pub fn gnuplot_script(
    data_file: &str,
    image_file: &str,
    p: usize,
    d: usize,
    title: &str,
) -> String {
    let y1 = p + 1;
    let flag = p + d + 1;
    let mut s = String::new();
    let _ = writeln!(s, "# run from the directory holding {data_file}");
    let _ = writeln!(s, "set datafile separator ','");
    let _ = writeln!(s, "set datafile commentschars '#'");
    let _ = writeln!(s, "set terminal pngcairo size 1200,560");
    let _ = writeln!(s, "set output '{image_file}'");
    let _ = writeln!(s, "set key off");
    let _ = writeln!(s, "set palette rgb 33,13,10");
    let _ = writeln!(s, "set multiplot layout 1,2 title '{title}'");

    let _ = writeln!(s, "set title 'input'");
    match p {
        1 => {
            let _ = writeln!(
                s,
                "plot '{data_file}' skip 1 using 1:(0):{y1} with points pt 7 ps 0.6 palette"
            );
        }
        2 => {
            let _ = writeln!(
                s,
                "plot '{data_file}' skip 1 using 1:2:{y1} with points pt 7 ps 0.6 palette, \\\n     '' skip 1 using 1:(${flag} > 0 ? $2 : 1/0) with points pt 6 ps 1.2 lc rgb 'black'"
            );
        }
        _ => {
            let _ = writeln!(
                s,
                "splot '{data_file}' skip 1 using 1:2:3:{y1} with points pt 7 ps 0.6 palette, \\\n      '' skip 1 using 1:2:(${flag} > 0 ? $3 : 1/0) with points pt 6 ps 1.2 lc rgb 'black'"
            );
        }
    }

    let _ = writeln!(s, "set title 'embedding (d = {d})'");
    let second = if d >= 2 {
        format!("{}", y1 + 1)
    } else {
        "(0)".to_string()
    };
    let _ = writeln!(
        s,
        "plot '{data_file}' skip 1 using {y1}:{second}:{y1} with points pt 7 ps 0.6 palette"
    );
    let _ = writeln!(s, "unset multiplot");
    s
}
