//! Top-down SVG plot of a run: terrain, trajectory, landmarks and cost-map insets.

use std::fmt::Write;

use crate::costmap::CostMap;
use crate::navigator::EpisodeResult;
use crate::route::Landmark;
use crate::world::{SemanticClass, VehicleState, WorldMap};

const PX_PER_M: f64 = 20.0;
const INSET_PX: f64 = 160.0;
const MARGIN: f64 = 10.0;

pub fn class_color(c: SemanticClass) -> &'static str {
    match c {
        SemanticClass::Smooth => "#3a9a3a",
        SemanticClass::Rough => "#e8d33a",
        SemanticClass::Bumpy => "#ef8a24",
        SemanticClass::Forbidden => "#d2322d",
        SemanticClass::Obstacle => "#2f5fc4",
        SemanticClass::Background => "#000000",
    }
}

fn star(cx: f64, cy: f64, r: f64) -> String {
    (0..10)
        .map(|k| {
            let a = -std::f64::consts::FRAC_PI_2 + k as f64 * std::f64::consts::PI / 5.0;
            let rr = if k % 2 == 0 { r } else { r * 0.45 };
            format!("{:.1},{:.1}", cx + rr * a.cos(), cy + rr * a.sin())
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn inset(out: &mut String, cost: &CostMap, x0: f64, y0: f64, label: &str) {
    let (w, h) = cost.dims();
    let block = 4usize;
    let cell_px = INSET_PX / (w.max(h) as f64 / block as f64);
    let _ = writeln!(out, r#"<g transform="translate({x0:.1},{y0:.1})">"#);
    for by in (0..h).step_by(block) {
        for bx in (0..w).step_by(block) {
            let (mut sum, mut n) = (0.0, 0usize);
            for y in by..(by + block).min(h) {
                for x in bx..(bx + block).min(w) {
                    sum += cost.get(x, y);
                    n += 1;
                }
            }
            let g = (255.0 * (1.0 - sum / n as f64 / cost.c_max())).round() as u8;
            // Forward (high row index) drawn at the top.
            let py = (h - (by + block).min(h)) as f64 / block as f64 * cell_px;
            let _ = writeln!(
                out,
                r#"<rect x="{:.1}" y="{:.1}" width="{:.2}" height="{:.2}" fill="rgb({g},{g},{g})"/>"#,
                (bx / block) as f64 * cell_px,
                py,
                cell_px + 0.05,
                cell_px + 0.05
            );
        }
    }
    let _ = writeln!(
        out,
        r#"<rect width="{INSET_PX}" height="{INSET_PX}" fill="none" stroke="black"/><text x="0" y="{:.1}" font-size="11">{label}</text></g>"#,
        INSET_PX + 13.0
    );
}

pub fn render_run_svg(
    world: &WorldMap,
    plan: &[Landmark],
    start: &VehicleState,
    result: &EpisodeResult,
    title: &str,
) -> String {
    let (gw, gh) = world.semantics().dims();
    let res = world.resolution();
    let map_w = world.width_m() * PX_PER_M;
    let map_h = world.height_m() * PX_PER_M;
    let insets = result.snapshots.len();
    let width = map_w + 2.0 * MARGIN + if insets > 0 { INSET_PX + 2.0 * MARGIN } else { 0.0 };
    let height = (map_h + 2.0 * MARGIN + 20.0).max(insets as f64 * (INSET_PX + 25.0) + 30.0);
    let px = |x: f64| MARGIN + x * PX_PER_M;
    let py = |y: f64| MARGIN + 20.0 + map_h - y * PX_PER_M;

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}">"#
    );
    let _ = writeln!(out, r#"<text x="{MARGIN}" y="15" font-size="13">{title}</text>"#);
    let cell = res * PX_PER_M;
    let sem = world.semantics();
    for j in 0..gh {
        let mut i = 0;
        while i < gw {
            let c = sem[(i, j)];
            let mut k = i + 1;
            while k < gw && sem[(k, j)] == c {
                k += 1;
            }
            let _ = writeln!(
                out,
                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{}"/>"#,
                px(i as f64 * res),
                py((j + 1) as f64 * res),
                (k - i) as f64 * cell + 0.05,
                cell + 0.05,
                class_color(c)
            );
            i = k;
        }
    }

    if !result.trace.is_empty() {
        let pts: Vec<String> = std::iter::once((start.x, start.y))
            .chain(result.trace.iter().map(|r| (r.x, r.y)))
            .map(|(x, y)| format!("{:.1},{:.1}", px(x), py(y)))
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline points="{}" fill="none" stroke="white" stroke-width="2.5"/>"#,
            pts.join(" ")
        );
    }
    for lm in world.landmarks() {
        let (cx, cy) = (px(lm.position[0]), py(lm.position[1]));
        let _ = writeln!(
            out,
            r#"<polygon points="{}" fill="white" stroke="black"/><text x="{:.1}" y="{:.1}" font-size="11" fill="white">{}</text>"#,
            star(cx, cy, 8.0),
            cx + 10.0,
            cy - 6.0,
            lm.name.as_str()
        );
    }
    let _ = writeln!(
        out,
        r#"<circle cx="{:.1}" cy="{:.1}" r="5" fill="white" stroke="black"/>"#,
        px(start.x),
        py(start.y)
    );
    if let Some(goal) = plan.last().and_then(|l| world.landmark(l)) {
        let (gx, gy) = (px(goal.position[0]), py(goal.position[1]));
        let _ = writeln!(
            out,
            r#"<path d="M{:.1},{:.1} L{:.1},{:.1} M{:.1},{:.1} L{:.1},{:.1}" stroke="magenta" stroke-width="3"/>"#,
            gx - 7.0,
            gy - 7.0,
            gx + 7.0,
            gy + 7.0,
            gx - 7.0,
            gy + 7.0,
            gx + 7.0,
            gy - 7.0
        );
    }
    for (n, snap) in result.snapshots.iter().enumerate() {
        let label = format!("tick {} ({})", snap.tick, snap.maneuver);
        inset(&mut out, &snap.cost, map_w + 3.0 * MARGIN, 20.0 + n as f64 * (INSET_PX + 25.0), &label);
    }
    out.push_str("</svg>\n");
    out
}
