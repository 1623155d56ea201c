//! CSV and SVG writers.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use crate::CliError;

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

/// Write via a sibling temp file and rename, so readers never see a partial file.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    let result = std::fs::File::create(&tmp)
        .and_then(|mut f| {
            f.write_all(contents.as_bytes())?;
            f.sync_all()
        })
        .and_then(|_| std::fs::rename(&tmp, path));
    if let Err(e) = result {
        let _ = std::fs::remove_file(&tmp);
        return Err(io_err(path, e));
    }
    Ok(())
}

/// To `path`, or stdout when `None`.
pub fn emit(path: Option<&Path>, contents: &str) -> Result<(), CliError> {
    match path {
        Some(p) => write_atomic(p, contents),
        None => std::io::stdout()
            .write_all(contents.as_bytes())
            .map_err(|e| CliError::Io(format!("stdout: {e}"))),
    }
}

#[derive(Debug, Clone, Copy)]
pub enum Cell {
    F(f64),
    U(u64),
    B(bool),
}

impl std::fmt::Display for Cell {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Cell::F(x) if x.is_nan() => f.write_str("nan"),
            Cell::F(x) if x.is_infinite() => f.write_str(if *x > 0.0 { "inf" } else { "-inf" }),
            Cell::F(x) => write!(f, "{x:.16e}"),
            Cell::U(n) => write!(f, "{n}"),
            Cell::B(b) => write!(f, "{}", u8::from(*b)),
        }
    }
}

/// CSV with the config TOML as a `# ` header and optional `# # ` notes.
pub fn csv(header_toml: &str, notes: &[String], columns: &[&str], rows: &[Vec<Cell>]) -> String {
    let mut s = String::new();
    for line in header_toml.lines() {
        let _ = writeln!(s, "# {line}");
    }
    for n in notes {
        let _ = writeln!(s, "# # {n}");
    }
    let _ = writeln!(s, "{}", columns.join(","));
    for row in rows {
        let cells: Vec<String> = row.iter().map(Cell::to_string).collect();
        let _ = writeln!(s, "{}", cells.join(","));
    }
    s
}

/// Parsed data rows of a CSV written by [`csv`].
#[derive(Debug, Clone)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn parse(text: &str) -> Result<Self, String> {
        let mut lines = text
            .lines()
            .filter(|l| !l.starts_with('#') && !l.trim().is_empty());
        let columns: Vec<String> = lines
            .next()
            .ok_or("no column header")?
            .split(',')
            .map(|c| c.trim().to_string())
            .collect();
        let mut rows = Vec::new();
        for (i, line) in lines.enumerate() {
            let row: Vec<f64> = line
                .split(',')
                .map(|c| c.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|e| format!("row {}: {e}", i + 1))?;
            if row.len() != columns.len() {
                return Err(format!(
                    "row {} has {} cells, expected {}",
                    i + 1,
                    row.len(),
                    columns.len()
                ));
            }
            rows.push(row);
        }
        Ok(Self { columns, rows })
    }

    pub fn column(&self, name: &str) -> Result<Vec<f64>, String> {
        let j = self
            .columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| format!("missing column `{name}`"))?;
        Ok(self.rows.iter().map(|r| r[j]).collect())
    }
}

pub struct Series<'a> {
    pub label: &'a str,
    pub y: &'a [f64],
    pub dashed: bool,
}

const COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

/// Minimal line plot.
pub fn svg(title: &str, xlabel: &str, x: &[f64], series: &[Series<'_>]) -> String {
    let (w, h, ml, mr, mt, mb) = (640.0, 400.0, 60.0, 20.0, 30.0, 45.0);
    let finite = |v: &&f64| v.is_finite();
    let xmin = x
        .iter()
        .filter(finite)
        .cloned()
        .fold(f64::INFINITY, f64::min);
    let xmax = x
        .iter()
        .filter(finite)
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    let ys = series.iter().flat_map(|s| s.y.iter()).filter(finite);
    let (mut ymin, mut ymax) = ys.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| {
        (a.min(v), b.max(v))
    });
    if !ymin.is_finite() {
        (ymin, ymax) = (0.0, 1.0);
    }
    if ymax - ymin < 1e-12 {
        ymin -= 0.5;
        ymax += 0.5;
    }
    let xspan = if xmax > xmin { xmax - xmin } else { 1.0 };
    let px = |v: f64| ml + (v - xmin) / xspan * (w - ml - mr);
    let py = |v: f64| h - mb - (v - ymin) / (ymax - ymin) * (h - mt - mb);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="18" text-anchor="middle">{}</text>"#,
        w / 2.0,
        escape(title)
    );
    let _ = writeln!(
        s,
        r#"<path d="M{ml},{mt} V{} H{}" fill="none" stroke="black"/>"#,
        h - mb,
        w - mr
    );
    for k in 0..=4 {
        let fx = xmin + xspan * k as f64 / 4.0;
        let fy = ymin + (ymax - ymin) * k as f64 / 4.0;
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{}" text-anchor="middle">{fx:.3}</text>"#,
            px(fx),
            h - mb + 16.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{:.1}" text-anchor="end">{fy:.3}</text>"#,
            ml - 4.0,
            py(fy) + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        w / 2.0,
        h - 8.0,
        escape(xlabel)
    );
    for (i, ser) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let pts: Vec<String> = x
            .iter()
            .zip(ser.y)
            .filter(|(a, b)| a.is_finite() && b.is_finite())
            .map(|(&a, &b)| format!("{:.2},{:.2}", px(a), py(b)))
            .collect();
        let dash = if ser.dashed {
            r#" stroke-dasharray="5,4""#
        } else {
            ""
        };
        let _ = writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"{dash}/>"#,
            pts.join(" ")
        );
        let ly = mt + 14.0 * i as f64 + 8.0;
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{ly}" fill="{color}" text-anchor="end">{}</text>"#,
            w - mr - 4.0,
            escape(ser.label)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip() {
        let text = csv(
            "seed = 1",
            &["note".into()],
            &["t_ns", "v", "ok"],
            &[vec![Cell::F(0.5), Cell::F(f64::NAN), Cell::B(true)]],
        );
        assert!(text.starts_with("# seed = 1\n# # note\nt_ns,v,ok\n"));
        let t = Table::parse(&text).unwrap();
        assert_eq!(t.column("t_ns").unwrap(), vec![0.5]);
        assert!(t.column("v").unwrap()[0].is_nan());
        assert!(t.column("nope").is_err());
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = std::env::temp_dir().join(format!("spinbeats-out-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let p = dir.join("a.csv");
        write_atomic(&p, "one").unwrap();
        write_atomic(&p, "two").unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "two");
        assert_eq!(std::fs::read_dir(&dir).unwrap().count(), 1);
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn svg_is_well_formed() {
        let x = [0.0, 1.0, 2.0];
        let y = [0.1, f64::NAN, 0.3];
        let s = svg(
            "a<b",
            "t",
            &x,
            &[Series {
                label: "y",
                y: &y,
                dashed: true,
            }],
        );
        assert!(s.starts_with("<svg") && s.trim_end().ends_with("</svg>"));
        assert!(s.contains("a&lt;b"));
    }
}
