//! Overhead (top-down) SVG rendering of a run: world geometry, occupancy
//! slice, panels colored by kind and status, trajectory and touch markers.

use crate::mapping::{CellState, OccupancyGrid};
use crate::nav::{LogEvent, LogRecord};
use crate::perception::{SurfaceRegistry, SurfaceStatus};
use crate::sim::{PanelKind, Scenario};
use std::fmt::Write;

const SCALE: f64 = 40.0; // px per meter
const MARGIN: f64 = 20.0;

struct Frame {
    min_x: f64,
    max_y: f64,
}

impl Frame {
    fn x(&self, wx: f64) -> f64 {
        MARGIN + (wx - self.min_x) * SCALE
    }
    fn y(&self, wy: f64) -> f64 {
        MARGIN + (self.max_y - wy) * SCALE
    }
}

/// Renders the run to a standalone SVG string. The registry (for surface
/// status colors) and the grid (for an occupancy slice at flight height)
/// are optional layers.
pub fn render_run_svg(
    scenario: &Scenario,
    log: &[LogRecord],
    registry: Option<&SurfaceRegistry>,
    grid: Option<&OccupancyGrid>,
) -> String {
    let b = &scenario.bounds;
    let frame = Frame {
        min_x: b.min.x,
        max_y: b.max.y,
    };
    let width = (b.max.x - b.min.x) * SCALE + 2.0 * MARGIN;
    let height = (b.max.y - b.min.y) * SCALE + 2.0 * MARGIN;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}">"#
    );
    let _ = writeln!(
        svg,
        r#"<rect x="0" y="0" width="{width:.0}" height="{height:.0}" fill="white"/>"#
    );
    let _ = writeln!(
        svg,
        r##"<rect x="{:.1}" y="{:.1}" width="{:.1}" height="{:.1}" fill="none" stroke="#444" stroke-width="2"/>"##,
        frame.x(b.min.x),
        frame.y(b.max.y),
        (b.max.x - b.min.x) * SCALE,
        (b.max.y - b.min.y) * SCALE
    );

    // Occupancy slice at flight heights, drawn under everything else.
    if let Some(g) = grid {
        let res = g.resolution();
        let _ = writeln!(svg, r##"<g fill="#c8c8c8">"##);
        let mut drawn = std::collections::BTreeSet::new();
        for v in g.occupied_voxels() {
            let c = g.voxel_center(&v);
            if !(0.5..=1.9).contains(&c.z) {
                continue;
            }
            if drawn.insert((v[0], v[1])) {
                let _ = writeln!(
                    svg,
                    r#"<rect x="{:.1}" y="{:.1}" width="{:.1}" height="{:.1}"/>"#,
                    frame.x(c.x - res * 0.5),
                    frame.y(c.y + res * 0.5),
                    res * SCALE,
                    res * SCALE
                );
            }
        }
        let _ = writeln!(svg, "</g>");
    }

    // Opaque obstacles.
    let _ = writeln!(svg, r##"<g fill="#888888">"##);
    for o in &scenario.obstacles {
        let _ = writeln!(
            svg,
            r#"<rect x="{:.1}" y="{:.1}" width="{:.1}" height="{:.1}"/>"#,
            frame.x(o.min.x),
            frame.y(o.max.y),
            (o.max.x - o.min.x) * SCALE,
            (o.max.y - o.min.y) * SCALE
        );
    }
    let _ = writeln!(svg, "</g>");

    // Glass panels: blue = true glass, red = phantom region.
    for panel in &scenario.glass_panels {
        let (w_axis, _) = panel.axes();
        let a = panel.center - w_axis * (panel.width * 0.5);
        let c = panel.center + w_axis * (panel.width * 0.5);
        let color = match panel.kind {
            PanelKind::True => "#2060d0",
            PanelKind::Phantom => "#d03030",
        };
        let _ = writeln!(
            svg,
            r#"<line x1="{:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="{color}" stroke-width="5"/>"#,
            frame.x(a.x),
            frame.y(a.y),
            frame.x(c.x),
            frame.y(c.y)
        );
    }

    // Fused surface estimates, colored by lifecycle.
    if let Some(reg) = registry {
        for s in &reg.surfaces {
            let verts = s.polygon.world_vertices();
            let color = match s.status {
                SurfaceStatus::Potential => "#e0a000",
                SurfaceStatus::Confirmed => "#104090",
                SurfaceStatus::Invalidated => "#909090",
            };
            let mut points = String::new();
            for v in &verts {
                let _ = write!(points, "{:.1},{:.1} ", frame.x(v.x), frame.y(v.y));
            }
            let _ = writeln!(
                svg,
                r#"<polygon points="{}" fill="none" stroke="{color}" stroke-width="2" stroke-dasharray="4 3"/>"#,
                points.trim_end()
            );
        }
    }

    // Trajectory.
    if !log.is_empty() {
        let mut points = String::new();
        for (i, r) in log.iter().enumerate() {
            if i % 5 == 0 || i + 1 == log.len() {
                let _ = write!(
                    points,
                    "{:.1},{:.1} ",
                    frame.x(r.position.x),
                    frame.y(r.position.y)
                );
            }
        }
        let _ = writeln!(
            svg,
            r#"<polyline points="{}" fill="none" stroke="black" stroke-width="1.5"/>"#,
            points.trim_end()
        );
    }

    // Event markers.
    for r in log {
        let Some(event) = &r.event else { continue };
        let (color, radius) = match event {
            LogEvent::TouchStart { .. } => ("#ff70b0", 4.0),
            LogEvent::Contact { .. } => ("#ff1090", 5.0),
            LogEvent::Invalidated { .. } => ("#30b030", 5.0),
            LogEvent::Bump { .. } => ("#d02020", 3.0),
            _ => continue,
        };
        let _ = writeln!(
            svg,
            r#"<circle cx="{:.1}" cy="{:.1}" r="{radius:.1}" fill="{color}"/>"#,
            frame.x(r.position.x),
            frame.y(r.position.y)
        );
    }

    // Start and goal.
    let s = &scenario.start.position;
    let _ = writeln!(
        svg,
        r##"<circle cx="{:.1}" cy="{:.1}" r="6" fill="#20a020"/>"##,
        frame.x(s.x),
        frame.y(s.y)
    );
    let g = &scenario.goal;
    let _ = writeln!(
        svg,
        r##"<circle cx="{:.1}" cy="{:.1}" r="6" fill="#d02020"/>"##,
        frame.x(g.x),
        frame.y(g.y)
    );

    svg.push_str("</svg>\n");
    svg
}

/// Top-down slice of the occupancy grid alone.
pub fn render_grid_svg(grid: &OccupancyGrid, z_band: (f64, f64)) -> String {
    let dims = grid.dims();
    let res = grid.resolution();
    let width = dims[0] as f64 * res * SCALE + 2.0 * MARGIN;
    let height = dims[1] as f64 * res * SCALE + 2.0 * MARGIN;
    let origin = grid.origin();
    let frame = Frame {
        min_x: origin.x,
        max_y: origin.y + dims[1] as f64 * res,
    };
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}">"#
    );
    let _ = writeln!(
        svg,
        r#"<rect x="0" y="0" width="{width:.0}" height="{height:.0}" fill="white"/>"#
    );
    let mut cells: std::collections::BTreeMap<(i32, i32), CellState> = std::collections::BTreeMap::new();
    for iz in 0..dims[2] {
        for iy in 0..dims[1] {
            for ix in 0..dims[0] {
                let v = [ix as i32, iy as i32, iz as i32];
                let c = grid.voxel_center(&v);
                if c.z < z_band.0 || c.z > z_band.1 {
                    continue;
                }
                match grid.state(&v) {
                    CellState::Occupied => {
                        cells.insert((v[0], v[1]), CellState::Occupied);
                    }
                    CellState::Free => {
                        cells.entry((v[0], v[1])).or_insert(CellState::Free);
                    }
                    CellState::Unknown => {}
                }
            }
        }
    }
    for ((ix, iy), state) in cells {
        let color = match state {
            CellState::Occupied => "#505050",
            CellState::Free => "#e8f4e8",
            CellState::Unknown => continue,
        };
        let c = grid.voxel_center(&[ix, iy, 0]);
        let _ = writeln!(
            svg,
            r#"<rect x="{:.1}" y="{:.1}" width="{:.1}" height="{:.1}" fill="{color}"/>"#,
            frame.x(c.x - res * 0.5),
            frame.y(c.y + res * 0.5),
            res * SCALE,
            res * SCALE
        );
    }
    svg.push_str("</svg>\n");
    svg
}
