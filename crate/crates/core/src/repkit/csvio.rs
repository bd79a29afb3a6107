//! Columnar CSV for the representations: a header naming each field and one
//! row per index. Floats use 17 significant digits so values round-trip.

use super::{GRMatrix, GvRCholesky, GvRMatrix, InvCholRep, RowMatrix};
use crate::error::{Error, Result};

pub(crate) fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn names(prefix: &str, p: usize) -> impl Iterator<Item = String> + '_ {
    (1..=p).map(move |k| format!("{prefix}_{k}"))
}

fn write_table(header: Vec<String>, rows: impl Iterator<Item = Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Csv(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Csv(e.to_string()))
}

/// Parses a table of `index, block_1 (p cols), block_2 (p cols), …`.
fn read_blocks(text: &str, blocks: usize) -> Result<Vec<RowMatrix>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let width = r.headers()?.len();
    if width < 1 + blocks || (width - 1) % blocks != 0 {
        return Err(Error::Csv(format!("unexpected column count {width}")));
    }
    let p = (width - 1) / blocks;
    let mut data = vec![Vec::new(); blocks];
    let mut n = 0;
    for rec in r.records() {
        let rec = rec?;
        for b in 0..blocks {
            for k in 0..p {
                let field = &rec[1 + b * p + k];
                let v: f64 = field
                    .trim()
                    .parse()
                    .map_err(|_| Error::Csv(format!("bad number {field:?}")))?;
                data[b].push(v);
            }
        }
        n += 1;
    }
    data.into_iter().map(|d| RowMatrix::from_row_major(n, p, d)).collect()
}

fn row_fields(i: usize, parts: &[&[f64]]) -> Vec<String> {
    let mut out = vec![(i + 1).to_string()];
    for part in parts {
        out.extend(part.iter().map(|&x| fmt_f64(x)));
    }
    out
}

impl GRMatrix {
    /// Columns `i, u_1…u_p, v_1…v_p`.
    pub fn to_csv(&self) -> Result<String> {
        let p = self.rank();
        let header = std::iter::once("i".to_string()).chain(names("u", p)).chain(names("v", p)).collect();
        write_table(header, (0..self.n()).map(|i| row_fields(i, &[self.u.row(i), self.v.row(i)])))
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut b = read_blocks(text, 2)?;
        let v = b.pop().unwrap();
        let u = b.pop().unwrap();
        Self::new(u, v)
    }
}

impl GvRMatrix {
    /// Columns `i, c_1…c_p, s_1…s_p, nu_hat_1…nu_hat_p`.
    pub fn to_csv(&self) -> Result<String> {
        let p = self.rank();
        let header = std::iter::once("i".to_string())
            .chain(names("c", p))
            .chain(names("s", p))
            .chain(names("nu_hat", p))
            .collect();
        write_table(
            header,
            (0..self.n()).map(|i| row_fields(i, &[self.c.row(i), self.s.row(i), self.nu_hat.row(i)])),
        )
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut b = read_blocks(text, 3)?;
        let nu = b.pop().unwrap();
        let s = b.pop().unwrap();
        let c = b.pop().unwrap();
        Self::new(c, s, nu)
    }
}

impl GvRCholesky<'_> {
    /// Columns `i, w_1…w_p, f`; the shared `(c, s)` live with the source matrix.
    pub fn to_csv(&self) -> Result<String> {
        let header = std::iter::once("i".to_string()).chain(names("w", self.rank())).chain(["f".to_string()]).collect();
        write_table(header, (0..self.n()).map(|i| row_fields(i, &[self.w.row(i), &[self.f[i]]])))
    }
}

impl InvCholRep {
    /// Columns `i, c_bar_*, f_bar, w_bar_*, s_bar_kl` with `S̄` flattened row-major;
    /// the last row leaves `w_bar` and `s_bar` empty.
    pub fn to_csv(&self) -> Result<String> {
        let (n, p) = (self.n(), self.c_bar.ncols());
        let mut header: Vec<String> = std::iter::once("i".to_string())
            .chain(names("c_bar", p))
            .chain(["f_bar".to_string()])
            .chain(names("w_bar", p))
            .collect();
        for k in 1..=p {
            for l in 1..=p {
                header.push(format!("s_bar_{k}{l}"));
            }
        }
        let rows = (0..n).map(|i| {
            let mut r = row_fields(i, &[self.c_bar.row(i), &[self.f_bar[i]]]);
            if i + 1 < n {
                r.extend(self.w_bar.row(i).iter().map(|&x| fmt_f64(x)));
                let sb = &self.s_bar[i];
                for k in 0..p {
                    for l in 0..p {
                        r.push(fmt_f64(sb[(k, l)]));
                    }
                }
            } else {
                r.extend(std::iter::repeat_n(String::new(), p + p * p));
            }
            r
        });
        write_table(header, rows)
    }
}

#[cfg(test)]
mod tests {
    use super::super::*;

    #[test]
    fn gr_round_trip_is_exact() {
        let u = RowMatrix::from_fn(4, 2, |i, k| (i as f64 + 0.1) / (k as f64 + 3.0));
        let v = RowMatrix::from_fn(4, 2, |i, k| -(1.0 / 3.0) * (i * k) as f64 + 1e-300);
        let gr = GRMatrix::new(u, v).unwrap();
        let text = gr.to_csv().unwrap();
        assert!(text.starts_with("i,u_1,u_2,v_1,v_2\n"));
        assert_eq!(GRMatrix::from_csv(&text).unwrap(), gr);
    }

    #[test]
    fn gvr_round_trip_is_exact() {
        let gr = GRMatrix::from_vectors(&[0.3, -0.7, 0.2], &[1.0 / 7.0, 2.0, -5.5]).unwrap();
        let g = gr_to_gvr(&gr);
        let back = GvRMatrix::from_csv(&g.to_csv().unwrap()).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn malformed_tables_are_rejected() {
        assert!(GvRMatrix::from_csv("i,c_1,s_1\n1,1,0\n").is_err());
        assert!(GRMatrix::from_csv("i,u_1,v_1\n1,x,0\n").is_err());
    }
}
