//! Standalone grouped-bar SVG charts for sweep summaries.

const PALETTE: [&str; 8] = [
    "#4e79a7", "#f28e2b", "#59a14f", "#e15759", "#76b7b2", "#edc948", "#b07aa1", "#9c755f",
];

const WIDTH: f64 = 960.0;
const HEIGHT: f64 = 480.0;
const MARGIN_LEFT: f64 = 80.0;
const MARGIN_RIGHT: f64 = 170.0;
const MARGIN_TOP: f64 = 50.0;
const MARGIN_BOTTOM: f64 = 70.0;

/// One bar per (group, series) pair; `None` cells are skipped.
#[derive(Debug, Clone)]
pub struct GroupedBarChart {
    pub title: String,
    pub y_label: String,
    pub group_labels: Vec<String>,
    pub series_labels: Vec<String>,
    /// Indexed `[group][series]`.
    pub values: Vec<Vec<Option<f64>>>,
}

impl GroupedBarChart {
    pub fn to_svg(&self) -> String {
        let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
        let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
        let groups = self.group_labels.len().max(1);
        let series = self.series_labels.len().max(1);

        let max_value = self
            .values
            .iter()
            .flatten()
            .flatten()
            .fold(0.0f64, |a, &b| a.max(b));
        let y_max = if max_value > 0.0 { max_value * 1.08 } else { 1.0 };

        let mut svg = String::new();
        svg.push_str(&format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
             viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\">\n"
        ));
        svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
        svg.push_str(&format!(
            "<text x=\"{:.1}\" y=\"28\" font-size=\"17\" text-anchor=\"middle\">{}</text>\n",
            MARGIN_LEFT + plot_w / 2.0,
            escape(&self.title)
        ));

        // Y axis: gridlines, tick labels, axis label.
        for tick in 0..=5 {
            let frac = tick as f64 / 5.0;
            let value = y_max * frac;
            let y = MARGIN_TOP + plot_h * (1.0 - frac);
            svg.push_str(&format!(
                "<line x1=\"{MARGIN_LEFT:.1}\" y1=\"{y:.1}\" x2=\"{:.1}\" y2=\"{y:.1}\" \
                 stroke=\"#dddddd\"/>\n",
                MARGIN_LEFT + plot_w
            ));
            svg.push_str(&format!(
                "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"11\" text-anchor=\"end\">{}</text>\n",
                MARGIN_LEFT - 6.0,
                y + 4.0,
                format_tick(value, y_max)
            ));
        }
        svg.push_str(&format!(
            "<text x=\"20\" y=\"{:.1}\" font-size=\"13\" text-anchor=\"middle\" \
             transform=\"rotate(-90 20 {:.1})\">{}</text>\n",
            MARGIN_TOP + plot_h / 2.0,
            MARGIN_TOP + plot_h / 2.0,
            escape(&self.y_label)
        ));

        // Bars.
        let group_w = plot_w / groups as f64;
        let bar_w = (group_w * 0.85) / series as f64;
        for (gi, group) in self.group_labels.iter().enumerate() {
            let group_x = MARGIN_LEFT + gi as f64 * group_w;
            for si in 0..series {
                let Some(value) = self
                    .values
                    .get(gi)
                    .and_then(|row| row.get(si))
                    .copied()
                    .flatten()
                else {
                    continue;
                };
                let h = (value / y_max).clamp(0.0, 1.0) * plot_h;
                let x = group_x + group_w * 0.075 + si as f64 * bar_w;
                let y = MARGIN_TOP + plot_h - h;
                svg.push_str(&format!(
                    "<rect x=\"{x:.2}\" y=\"{y:.2}\" width=\"{:.2}\" height=\"{h:.2}\" \
                     fill=\"{}\"><title>{}: {}</title></rect>\n",
                    (bar_w * 0.92).max(1.0),
                    PALETTE[si % PALETTE.len()],
                    escape(&format!("{group} / {}", self.series_labels[si])),
                    format!("{value:.4}")
                ));
            }
            svg.push_str(&format!(
                "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"12\" text-anchor=\"middle\">{}</text>\n",
                group_x + group_w / 2.0,
                MARGIN_TOP + plot_h + 22.0,
                escape(group)
            ));
        }

        // Axis frame.
        svg.push_str(&format!(
            "<line x1=\"{MARGIN_LEFT:.1}\" y1=\"{MARGIN_TOP:.1}\" x2=\"{MARGIN_LEFT:.1}\" \
             y2=\"{:.1}\" stroke=\"black\"/>\n",
            MARGIN_TOP + plot_h
        ));
        svg.push_str(&format!(
            "<line x1=\"{MARGIN_LEFT:.1}\" y1=\"{:.1}\" x2=\"{:.1}\" y2=\"{:.1}\" \
             stroke=\"black\"/>\n",
            MARGIN_TOP + plot_h,
            MARGIN_LEFT + plot_w,
            MARGIN_TOP + plot_h
        ));

        // Legend.
        let legend_x = MARGIN_LEFT + plot_w + 18.0;
        for (si, label) in self.series_labels.iter().enumerate() {
            let y = MARGIN_TOP + 10.0 + si as f64 * 22.0;
            svg.push_str(&format!(
                "<rect x=\"{legend_x:.1}\" y=\"{:.1}\" width=\"14\" height=\"14\" fill=\"{}\"/>\n",
                y - 11.0,
                PALETTE[si % PALETTE.len()]
            ));
            svg.push_str(&format!(
                "<text x=\"{:.1}\" y=\"{y:.1}\" font-size=\"12\">{}</text>\n",
                legend_x + 20.0,
                escape(label)
            ));
        }

        svg.push_str("</svg>\n");
        svg
    }
}

fn format_tick(value: f64, y_max: f64) -> String {
    if y_max >= 100.0 {
        format!("{value:.0}")
    } else if y_max >= 2.0 {
        format!("{value:.1}")
    } else {
        format!("{value:.2}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
