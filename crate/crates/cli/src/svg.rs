//! SVG diagram of a lattice: couplings, tracked units, sublattice labels
//! and unit edge positions.

use std::fmt::Write as _;

use hexsse::Lattice;

const SCALE: f64 = 40.0;
const PAD: f64 = 30.0;

pub fn render(lattice: &Lattice) -> String {
    let sites = lattice.sites();
    let max_x = sites.iter().map(|s| s.pos[0]).fold(0.0, f64::max);
    let max_y = sites.iter().map(|s| s.pos[1]).fold(0.0, f64::max);
    let width = max_x * SCALE + 2.0 * PAD;
    let height = max_y * SCALE + 2.0 * PAD;
    let px = |p: [f64; 2]| (PAD + p[0] * SCALE, height - PAD - p[1] * SCALE);
    let short = |a: usize, b: usize| {
        let (pa, pb) = (sites[a].pos, sites[b].pos);
        ((pa[0] - pb[0]).powi(2) + (pa[1] - pb[1]).powi(2)).sqrt() < 1.01
    };

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" font-family="sans-serif">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);

    for unit in lattice.units() {
        let ring = unit.sites;
        if (0..6).all(|k| short(ring[k], ring[(k + 1) % 6])) {
            let points: Vec<String> = ring
                .iter()
                .map(|&s| {
                    let (x, y) = px(sites[s].pos);
                    format!("{x:.1},{y:.1}")
                })
                .collect();
            let _ = writeln!(
                out,
                r##"<polygon points="{}" fill="#d8f0d8" stroke="none"/>"##,
                points.join(" ")
            );
        }
    }

    for b in lattice.bonds() {
        if !short(b.i, b.j) {
            continue;
        }
        let (x1, y1) = px(sites[b.i].pos);
        let (x2, y2) = px(sites[b.j].pos);
        let (color, w) = if b.coupling > 0 {
            ("#d02020", 3.0)
        } else {
            ("#606060", 1.5)
        };
        let _ = writeln!(
            out,
            r#"<line x1="{x1:.1}" y1="{y1:.1}" x2="{x2:.1}" y2="{y2:.1}" stroke="{color}" stroke-width="{w}"/>"#
        );
        if b.unit_pos > 0 {
            let _ = writeln!(
                out,
                r##"<text x="{:.1}" y="{:.1}" font-size="9" fill="#206020" text-anchor="middle">e{}</text>"##,
                (x1 + x2) / 2.0,
                (y1 + y2) / 2.0 - 3.0,
                b.unit_pos
            );
        }
    }

    for s in sites {
        let (x, y) = px(s.pos);
        let _ = writeln!(
            out,
            r#"<circle cx="{x:.1}" cy="{y:.1}" r="7" fill="white" stroke="black"/>"#
        );
        if let Some(label) = s.sublattice {
            let _ = writeln!(
                out,
                r#"<text x="{x:.1}" y="{:.1}" font-size="10" text-anchor="middle">{label}</text>"#,
                y + 3.5
            );
        }
    }
    let _ = writeln!(out, "</svg>");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use hexsse::CouplingPattern;

    #[test]
    fn diagram_lists_every_site() {
        let lat = Lattice::build(5, 2, CouplingPattern::Default).unwrap();
        let svg = render(&lat);
        assert_eq!(svg.matches("<circle").count(), 36);
        assert!(svg.contains("#d02020"));
        assert!(svg.ends_with("</svg>\n"));
    }
}
