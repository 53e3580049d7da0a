//! CSV tables and hand-written SVG plots.

use std::fmt::Write as _;

use causabound::asymptotics::ProfileRow;

/// Nine significant digits, no locale, no exponent unless `|x| < 1e-4`.
pub fn sig9(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    if x.abs() < 1e-4 {
        return format!("{x:.8e}");
    }
    let mag = x.abs().log10().floor() as i32;
    let decimals = (8 - mag).max(0) as usize;
    let s = format!("{x:.decimals$}");
    // rounding can carry into a new digit (0.9999999999 -> 1.000000000)
    let rounded: f64 = s.parse().unwrap_or(x);
    if decimals > 0 && rounded.abs().log10().floor() as i32 > mag {
        return format!("{x:.prec$}", prec = decimals - 1);
    }
    s
}

fn opt(x: Option<f64>) -> String {
    x.map(sig9).unwrap_or_default()
}

/// Short human-readable number: at most six decimals, trailing zeros cut.
pub fn short(x: f64) -> String {
    let s = format!("{x:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.to_string() }
}

pub const PROFILE_HEADER: &str = "n,uLB,uUB,oLB,oUB,mLB,mUB";

pub fn profile_csv(rows: &[ProfileRow]) -> String {
    let mut out = String::new();
    out.push_str(PROFILE_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.n,
            sig9(r.u_lb),
            sig9(r.u_ub),
            sig9(r.o_lb),
            sig9(r.o_ub),
            opt(r.m_lb),
            opt(r.m_ub)
        );
    }
    out
}

/// A CSV with a header and numeric rows; `None` cells are left empty.
pub fn table_csv(header: &[&str], rows: &[Vec<Option<f64>>]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for r in rows {
        let cells: Vec<String> = r.iter().map(|&v| opt(v)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub struct Band<'a> {
    pub label: &'a str,
    pub color: &'a str,
    pub lower: Vec<(f64, f64)>,
    pub upper: Vec<(f64, f64)>,
}

pub struct Line<'a> {
    pub label: &'a str,
    pub color: &'a str,
    pub dashed: bool,
    pub points: Vec<(f64, f64)>,
}

pub struct Plot<'a> {
    pub title: String,
    pub x_label: &'a str,
    pub x_range: (f64, f64),
    pub bands: Vec<Band<'a>>,
    pub lines: Vec<Line<'a>>,
}

const W: f64 = 640.0;
const H: f64 = 420.0;
const LEFT: f64 = 60.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;

fn px(v: f64) -> String {
    format!("{v:.2}")
}

impl Plot<'_> {
    fn sx(&self, x: f64) -> f64 {
        let (a, b) = self.x_range;
        let t = if b > a { (x - a) / (b - a) } else { 0.5 };
        LEFT + t * (W - LEFT - RIGHT)
    }

    fn sy(&self, y: f64) -> f64 {
        H - BOTTOM - y.clamp(0.0, 1.0) * (H - TOP - BOTTOM)
    }

    fn path(&self, pts: &[(f64, f64)]) -> String {
        pts.iter()
            .map(|&(x, y)| format!("{},{}", px(self.sx(x)), px(self.sy(y))))
            .collect::<Vec<_>>()
            .join(" ")
    }

    pub fn to_svg(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
        let _ = writeln!(s, r#"<text x="{}" y="22" font-size="14">{}</text>"#, px(LEFT), escape(&self.title));

        // axes and ticks
        let (x0, x1, y0, y1) = (self.sx(self.x_range.0), self.sx(self.x_range.1), self.sy(0.0), self.sy(1.0));
        let _ = writeln!(
            s,
            r#"<path d="M{} {} L{} {} L{} {}" fill="none" stroke="black"/>"#,
            px(x0), px(y1), px(x0), px(y0), px(x1), px(y0)
        );
        for i in 0..=5 {
            let v = i as f64 / 5.0;
            let y = self.sy(v);
            let _ = writeln!(
                s,
                r##"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="#ddd"/><text x="{}" y="{}" text-anchor="end">{}</text>"##,
                px(x0), px(y), px(x1), px(y), px(x0 - 6.0), px(y + 4.0), short(v)
            );
        }
        for i in 0..=5 {
            let v = self.x_range.0 + (self.x_range.1 - self.x_range.0) * i as f64 / 5.0;
            let x = self.sx(v);
            let _ = writeln!(
                s,
                r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="black"/><text x="{}" y="{}" text-anchor="middle">{}</text>"#,
                px(x), px(y0), px(x), px(y0 + 5.0), px(x), px(y0 + 18.0), short(v)
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            px((x0 + x1) / 2.0), px(H - 12.0), escape(self.x_label)
        );

        for b in &self.bands {
            let mut outline: Vec<(f64, f64)> = b.upper.clone();
            outline.extend(b.lower.iter().rev());
            if !outline.is_empty() {
                let _ = writeln!(
                    s,
                    r#"<polygon points="{}" fill="{}" fill-opacity="0.15" stroke="none"/>"#,
                    self.path(&outline), b.color
                );
            }
            for edge in [&b.lower, &b.upper] {
                if !edge.is_empty() {
                    let _ = writeln!(
                        s,
                        r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="1.5"/>"#,
                        self.path(edge), b.color
                    );
                }
            }
        }
        for l in &self.lines {
            let dash = if l.dashed { r#" stroke-dasharray="5,3""# } else { "" };
            let _ = writeln!(
                s,
                r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="1.5"{dash}/>"#,
                self.path(&l.points), l.color
            );
        }

        // legend
        let entries: Vec<(&str, &str)> = self
            .bands
            .iter()
            .map(|b| (b.label, b.color))
            .chain(self.lines.iter().map(|l| (l.label, l.color)))
            .collect();
        for (i, (label, color)) in entries.iter().enumerate() {
            let y = TOP + 10.0 + 18.0 * i as f64;
            let x = W - RIGHT + 12.0;
            let _ = writeln!(
                s,
                r#"<rect x="{}" y="{}" width="12" height="12" fill="{color}"/><text x="{}" y="{}">{}</text>"#,
                px(x), px(y - 10.0), px(x + 18.0), px(y), escape(label)
            );
        }
        s.push_str("</svg>\n");
        s
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_significant_digits() {
        assert_eq!(sig9(0.5), "0.500000000");
        assert_eq!(sig9(1.0), "1.00000000");
        assert_eq!(sig9(1.0 / 3.0), "0.333333333");
        assert_eq!(sig9(0.45225425), "0.452254250");
        assert_eq!(sig9(12.5), "12.5000000");
        assert_eq!(sig9(123456789.4), "123456789");
        assert_eq!(sig9(0.0), "0");
        assert_eq!(sig9(-0.25), "-0.250000000");
        assert_eq!(sig9(0.05), "0.0500000000");
        assert_eq!(sig9(0.0001234), "0.000123400000");
        assert_eq!(sig9(4.7e-5), "4.70000000e-5");
        assert_eq!(sig9(0.99999999999), "1.00000000");
        assert_eq!(sig9(0.0999999999999), "0.100000000");
    }

    #[test]
    fn short_numbers() {
        assert_eq!(short(0.49999996), "0.5");
        assert_eq!(short(1.0), "1");
        assert_eq!(short(0.4608053), "0.460805");
        assert_eq!(short(-0.0000001), "0");
    }

    #[test]
    fn empty_mixed_cells() {
        let rows = vec![ProfileRow { n: 1, u_lb: 0.5, u_ub: 1.0, o_lb: 0.5, o_ub: 1.0, m_lb: None, m_ub: None }];
        assert_eq!(
            profile_csv(&rows),
            "n,uLB,uUB,oLB,oUB,mLB,mUB\n1,0.500000000,1.00000000,0.500000000,1.00000000,,\n"
        );
    }

    #[test]
    fn svg_is_well_formed_enough() {
        let p = Plot {
            title: "t < 1".into(),
            x_label: "n",
            x_range: (1.0, 3.0),
            bands: vec![Band { label: "u", color: "blue", lower: vec![(1.0, 0.2), (3.0, 0.2)], upper: vec![(1.0, 1.0), (3.0, 0.9)] }],
            lines: vec![Line { label: "x", color: "black", dashed: true, points: vec![(1.0, 0.5), (3.0, 0.5)] }],
        };
        let s = p.to_svg();
        assert!(s.starts_with("<svg") && s.ends_with("</svg>\n"));
        assert!(s.contains("t &lt; 1"));
        assert_eq!(s.matches("<polyline").count(), 3);
    }
}
