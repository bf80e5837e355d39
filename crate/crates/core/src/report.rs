//! Spectrum decay reports: the diagnostic that tells how many terms a
//! reduced model needs.
//!
//! Emits a CSV table of `(m, λ_m, σ_m, cumulative energy fraction)` and a
//! dependency-free semilog SVG decay plot with byte-deterministic output.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    /// 1-based mode index.
    pub mode: usize,
    pub eigenvalue: f64,
    pub singular_value: f64,
    pub cumulative_fraction: f64,
}

#[derive(Debug, Clone)]
pub struct SpectrumReport {
    rows: Vec<ReportRow>,
}

impl SpectrumReport {
    pub fn from_eigenvalues(eigenvalues: &[f64]) -> Result<Self> {
        if eigenvalues.iter().any(|&l| !l.is_finite() || l < 0.0) {
            return Err(Error::InvalidInput(
                "eigenvalues must be finite and non-negative".into(),
            ));
        }
        for pair in eigenvalues.windows(2) {
            if pair[1] > pair[0] {
                return Err(Error::InvalidInput(
                    "eigenvalues must be in descending order".into(),
                ));
            }
        }
        let total: f64 = eigenvalues.iter().sum();
        let mut rows = Vec::with_capacity(eigenvalues.len());
        let mut cumulative = 0.0;
        for (i, &lambda) in eigenvalues.iter().enumerate() {
            cumulative += lambda;
            rows.push(ReportRow {
                mode: i + 1,
                eigenvalue: lambda,
                singular_value: lambda.sqrt(),
                cumulative_fraction: if total > 0.0 { cumulative / total } else { 0.0 },
            });
        }
        if let Some(last) = rows.last() {
            if total > 0.0 && (last.cumulative_fraction - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidInput(format!(
                    "cumulative fraction ends at {} instead of 1",
                    last.cumulative_fraction
                )));
            }
        }
        Ok(Self { rows })
    }

    pub fn rows(&self) -> &[ReportRow] {
        &self.rows
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for row in &self.rows {
            out.push_str(&format!(
                "{},{},{},{}\n",
                row.mode,
                crate::io::format_float(row.eigenvalue),
                crate::io::format_float(row.singular_value),
                crate::io::format_float(row.cumulative_fraction),
            ));
        }
        out
    }

    /// Semilog-y decay plot: mode index against log₁₀ λ_m.
    pub fn to_svg(&self) -> String {
        const WIDTH: f64 = 640.0;
        const HEIGHT: f64 = 480.0;
        const MARGIN_L: f64 = 70.0;
        const MARGIN_R: f64 = 20.0;
        const MARGIN_T: f64 = 20.0;
        const MARGIN_B: f64 = 50.0;
        let plot_w = WIDTH - MARGIN_L - MARGIN_R;
        let plot_h = HEIGHT - MARGIN_T - MARGIN_B;

        let positive: Vec<&ReportRow> = self.rows.iter().filter(|r| r.eigenvalue > 0.0).collect();
        let (log_min, log_max) = if positive.is_empty() {
            (-1.0, 0.0)
        } else {
            let max = positive
                .iter()
                .map(|r| r.eigenvalue.log10())
                .fold(f64::NEG_INFINITY, f64::max);
            let min = positive
                .iter()
                .map(|r| r.eigenvalue.log10())
                .fold(f64::INFINITY, f64::min);
            (min.floor(), max.ceil().max(min.floor() + 1.0))
        };
        let n = self.rows.len().max(1) as f64;

        let x_of = |mode: usize| MARGIN_L + plot_w * (mode as f64 - 0.5) / n;
        let y_of = |lambda: f64| {
            let t = (lambda.log10() - log_min) / (log_max - log_min);
            MARGIN_T + plot_h * (1.0 - t)
        };

        let mut svg = String::new();
        svg.push_str(&format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
        ));
        svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
        // Axes.
        svg.push_str(&format!(
            "<line x1=\"{MARGIN_L}\" y1=\"{MARGIN_T}\" x2=\"{MARGIN_L}\" y2=\"{:.2}\" stroke=\"black\"/>\n",
            MARGIN_T + plot_h
        ));
        svg.push_str(&format!(
            "<line x1=\"{MARGIN_L}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"black\"/>\n",
            MARGIN_T + plot_h,
            MARGIN_L + plot_w,
            MARGIN_T + plot_h
        ));
        // Decade gridlines and labels.
        let mut decade = log_min as i64;
        while decade <= log_max as i64 {
            let y = MARGIN_T + plot_h * (1.0 - (decade as f64 - log_min) / (log_max - log_min));
            svg.push_str(&format!(
                "<line x1=\"{MARGIN_L}\" y1=\"{y:.2}\" x2=\"{:.2}\" y2=\"{y:.2}\" stroke=\"#cccccc\" stroke-dasharray=\"3,3\"/>\n",
                MARGIN_L + plot_w
            ));
            svg.push_str(&format!(
                "<text x=\"{:.2}\" y=\"{:.2}\" font-family=\"monospace\" font-size=\"12\" text-anchor=\"end\">1e{decade}</text>\n",
                MARGIN_L - 6.0,
                y + 4.0
            ));
            decade += 1;
        }
        svg.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\" font-family=\"monospace\" font-size=\"12\" text-anchor=\"middle\">mode</text>\n",
            MARGIN_L + plot_w / 2.0,
            HEIGHT - 12.0
        ));
        // Polyline through the positive eigenvalues.
        if !positive.is_empty() {
            let points: Vec<String> = positive
                .iter()
                .map(|r| format!("{:.2},{:.2}", x_of(r.mode), y_of(r.eigenvalue)))
                .collect();
            svg.push_str(&format!(
                "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\" points=\"{}\"/>\n",
                points.join(" ")
            ));
            for r in &positive {
                svg.push_str(&format!(
                    "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"2.5\" fill=\"#1f77b4\"/>\n",
                    x_of(r.mode),
                    y_of(r.eigenvalue)
                ));
            }
        }
        svg.push_str("</svg>\n");
        svg
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cumulative_fraction_is_monotone_and_ends_at_one() {
        let report = SpectrumReport::from_eigenvalues(&[4.0, 1.0, 0.25, 0.05]).unwrap();
        let mut last = 0.0;
        for row in report.rows() {
            assert!(row.cumulative_fraction >= last);
            last = row.cumulative_fraction;
        }
        assert!((last - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn rejects_increasing_eigenvalues() {
        assert!(SpectrumReport::from_eigenvalues(&[1.0, 2.0]).is_err());
    }

    #[test]
    fn csv_and_svg_are_deterministic() {
        let a = SpectrumReport::from_eigenvalues(&[4.0, 1.0, 0.3]).unwrap();
        let b = SpectrumReport::from_eigenvalues(&[4.0, 1.0, 0.3]).unwrap();
        assert_eq!(a.to_csv(), b.to_csv());
        assert_eq!(a.to_svg(), b.to_svg());
        assert!(a.to_svg().starts_with("<svg"));
        assert_eq!(a.to_csv().lines().count(), 3);
    }

    #[test]
    fn empty_spectrum_renders() {
        let report = SpectrumReport::from_eigenvalues(&[]).unwrap();
        assert_eq!(report.to_csv(), "");
        assert!(report.to_svg().contains("</svg>"));
    }
}
