//! Space-time diagrams: one wire per qubit, one box per action over its interval.
//! Actions overlapping on a wire (measurement branches, non-local overlaps) get extra lanes.

use std::fmt::Write as _;

use crate::model::{ActionRef, System};

#[derive(Clone, Debug, PartialEq)]
pub struct Placed {
    pub action: ActionRef,
    pub id: String,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Wire {
    pub qubit: String,
    pub lanes: Vec<Vec<Placed>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Layout {
    pub t0: f64,
    pub t1: f64,
    pub wires: Vec<Wire>,
    /// Branching actions with their children, for the legend.
    pub forks: Vec<(String, Vec<String>)>,
}

pub fn layout(s: &System) -> Layout {
    let t1 = s.max_time().to_f64().max(1.0);
    let mut wires = Vec::new();
    for q in s.qubits() {
        let mut acts: Vec<Placed> = s
            .actions()
            .filter(|(_, a)| a.register().contains(q))
            .map(|(r, a)| Placed {
                action: r,
                id: a.id().to_string(),
                lo: a.interval().lo().to_f64(),
                hi: a.interval().hi().to_f64(),
            })
            .collect();
        acts.sort_by(|a, b| a.lo.total_cmp(&b.lo).then(a.hi.total_cmp(&b.hi)).then(a.action.cmp(&b.action)));
        let mut lanes: Vec<Vec<Placed>> = Vec::new();
        for a in acts {
            match lanes.iter_mut().find(|l| l.last().is_none_or(|p| p.hi < a.lo)) {
                Some(l) => l.push(a),
                None => lanes.push(vec![a]),
            }
        }
        if lanes.is_empty() {
            lanes.push(Vec::new());
        }
        wires.push(Wire {
            qubit: q.to_string(),
            lanes,
        });
    }
    let mut forks = Vec::new();
    for p in s.processes() {
        for n in p.bfs() {
            if p.children(n).len() > 1 {
                forks.push((
                    p.action(n).id().to_string(),
                    p.children(n).iter().map(|&k| p.action(k).id().to_string()).collect(),
                ));
            }
        }
    }
    Layout { t0: 0.0, t1, wires, forks }
}

pub fn ascii(s: &System, width: usize) -> String {
    let l = layout(s);
    let width = width.max(16);
    let col = |t: f64| (((t - l.t0) / (l.t1 - l.t0)) * (width - 1) as f64).round() as usize;
    let name_w = l.wires.iter().map(|w| w.qubit.len()).max().unwrap_or(1).max(2);
    let mut out = String::new();
    for w in &l.wires {
        for (li, lane) in w.lanes.iter().enumerate() {
            let mut row = vec!['-'; width];
            for a in lane {
                let (c0, c1) = (col(a.lo), col(a.hi).min(width - 1));
                if c1 <= c0 {
                    row[c0] = '*';
                    continue;
                }
                for c in row.iter_mut().take(c1).skip(c0 + 1) {
                    *c = '=';
                }
                row[c0] = '[';
                row[c1] = ']';
                for (k, ch) in a.id.chars().take(c1 - c0 - 1).enumerate() {
                    row[c0 + 1 + k] = ch;
                }
            }
            let name = if li == 0 { w.qubit.as_str() } else { "" };
            let joint = if li == 0 { '|' } else { '\\' };
            let _ = writeln!(out, "{name:>name_w$} {joint}{}", row.into_iter().collect::<String>());
        }
    }
    let mut axis = vec![' '; width];
    let start = format!("{}", l.t0);
    let end = format!("{}", l.t1);
    for (k, ch) in start.chars().enumerate() {
        axis[k] = ch;
    }
    for (k, ch) in end.chars().enumerate() {
        let at = width.saturating_sub(end.len()) + k;
        axis[at] = ch;
    }
    let _ = writeln!(out, "{:>name_w$}  {}", "t", axis.into_iter().collect::<String>());
    for (parent, kids) in &l.forks {
        let _ = writeln!(out, "fork {parent} -> {}", kids.join(" | "));
    }
    out
}

const PALETTE: [&str; 6] = ["#8ecae6", "#ffb703", "#90be6d", "#f28482", "#b8b8ff", "#f4a261"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn svg(s: &System) -> String {
    let l = layout(s);
    let (left, right, lane_h, top) = (60.0, 20.0, 26.0, 20.0);
    let plot_w = 800.0;
    let x = |t: f64| left + (t - l.t0) / (l.t1 - l.t0) * plot_w;
    let lanes: usize = l.wires.iter().map(|w| w.lanes.len()).sum();
    let height = top * 2.0 + lane_h * lanes as f64 + 20.0;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{height}" font-family="monospace" font-size="11">"#,
        left + plot_w + right
    );
    let mut y = top;
    let mut centers = std::collections::HashMap::new();
    for w in &l.wires {
        for (li, lane) in w.lanes.iter().enumerate() {
            let cy = y + lane_h / 2.0;
            if li == 0 {
                let _ = writeln!(out, r#"<text x="4" y="{}">{}</text>"#, cy + 4.0, escape(&w.qubit));
            }
            let _ = writeln!(
                out,
                r#"<line x1="{left}" y1="{cy}" x2="{}" y2="{cy}" stroke="{}" />"#,
                left + plot_w,
                if li == 0 { "#333" } else { "#bbb" }
            );
            for a in lane {
                let (x0, x1) = (x(a.lo), x(a.hi).max(x(a.lo) + 2.0));
                let fill = PALETTE[a.action.process % PALETTE.len()];
                let _ = writeln!(
                    out,
                    r##"<rect x="{x0:.1}" y="{:.1}" width="{:.1}" height="{:.1}" fill="{fill}" stroke="#333"><title>{}</title></rect>"##,
                    y + 3.0,
                    x1 - x0,
                    lane_h - 6.0,
                    escape(&a.id)
                );
                let _ = writeln!(out, r#"<text x="{:.1}" y="{:.1}">{}</text>"#, x0 + 2.0, cy + 4.0, escape(&a.id));
                centers.insert((w.qubit.clone(), a.id.clone()), (x0, x1, cy));
            }
            y += lane_h;
        }
    }
    for (parent, kids) in &l.forks {
        for w in &l.wires {
            let Some(&(_, px1, py)) = centers.get(&(w.qubit.clone(), parent.clone())) else { continue };
            for k in kids {
                if let Some(&(kx0, _, ky)) = centers.get(&(w.qubit.clone(), k.clone())) {
                    let _ = writeln!(
                        out,
                        r##"<path d="M{px1:.1},{py:.1} L{kx0:.1},{ky:.1}" stroke="#555" fill="none" stroke-dasharray="3,2" />"##
                    );
                }
            }
        }
    }
    let _ = writeln!(
        out,
        r#"<text x="{left}" y="{:.1}">t={}</text><text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#,
        height - 6.0,
        l.t0,
        left + plot_w,
        height - 6.0,
        l.t1
    );
    out.push_str("</svg>\n");
    out
}
