//! Per-instance rows of a batch run and their renderings.
//!
//! Everything in `report.csv` and the rendered table is a function of the
//! configuration, so reruns give identical bytes; wall times live in a
//! separate `timings.csv`.

use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct Row {
    pub id: String,
    pub agents: usize,
    pub objects: usize,
    pub p_min: Option<usize>,
    pub floor_mu: Option<usize>,
    /// Largest certified cardinality.
    pub z: Option<usize>,
    /// Smallest cardinality known to fail, or `floor_mu`; equals `z` when
    /// optimal.
    pub upper: Option<usize>,
    pub status: String,
    pub iterations: usize,
    pub columns: usize,
    pub error: String,
    #[serde(skip)]
    pub seconds: f64,
}

impl Row {
    pub fn failed(id: String, agents: usize, objects: usize, error: String, seconds: f64) -> Self {
        Row {
            id,
            agents,
            objects,
            p_min: None,
            floor_mu: None,
            z: None,
            upper: None,
            status: "error".into(),
            iterations: 0,
            columns: 0,
            error,
            seconds,
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == "optimal"
    }

    pub fn is_error(&self) -> bool {
        self.status == "error"
    }

    /// `z − p⁻` for optimal rows.
    pub fn gain(&self) -> Option<usize> {
        match (self.is_optimal(), self.z, self.p_min) {
            (true, Some(z), Some(p)) => Some(z.saturating_sub(p)),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunReport {
    pub rows: Vec<Row>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub instances: usize,
    pub optimal: usize,
    pub budget_exhausted: usize,
    pub errors: usize,
    pub z_at_floor_mu: usize,
    pub z_above_p_min: usize,
    /// Optimal rows whose `z` falls outside `[p⁻, ⌊μ⌋]`.
    pub out_of_bounds: usize,
    pub mean_gain: Option<f64>,
    /// Mean of `(z − p⁻) / p⁻` in percent.
    pub mean_relative_gain: Option<f64>,
}

impl RunReport {
    pub fn summary(&self) -> Summary {
        let optimal: Vec<&Row> = self.rows.iter().filter(|r| r.is_optimal()).collect();
        let mean = |v: Vec<f64>| (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64);
        Summary {
            instances: self.rows.len(),
            optimal: optimal.len(),
            budget_exhausted: self.rows.iter().filter(|r| r.status == "budget-exhausted").count(),
            errors: self.rows.iter().filter(|r| r.is_error()).count(),
            z_at_floor_mu: optimal.iter().filter(|r| r.z.is_some() && r.z == r.floor_mu).count(),
            z_above_p_min: optimal.iter().filter(|r| r.gain().is_some_and(|g| g > 0)).count(),
            out_of_bounds: optimal
                .iter()
                .filter(|r| match (r.z, r.p_min, r.floor_mu) {
                    (Some(z), Some(p), Some(f)) => z < p || z > f,
                    _ => false,
                })
                .count(),
            mean_gain: mean(optimal.iter().filter_map(|r| r.gain()).map(|g| g as f64).collect()),
            mean_relative_gain: mean(
                optimal
                    .iter()
                    .filter(|r| r.p_min.is_some_and(|p| p > 0))
                    .filter_map(|r| Some(100.0 * r.gain()? as f64 / r.p_min? as f64))
                    .collect(),
            ),
        }
    }

    pub fn to_csv(&self) -> Result<String, csv::Error> {
        let mut w = csv::Writer::from_writer(Vec::new());
        if self.rows.is_empty() {
            w.write_record([
                "id", "agents", "objects", "p_min", "floor_mu", "z", "upper", "status", "iterations", "columns",
                "error",
            ])?;
        }
        for r in &self.rows {
            w.serialize(r)?;
        }
        Ok(String::from_utf8(w.into_inner().map_err(|e| e.into_error())?).expect("csv output is UTF-8"))
    }

    pub fn timings_csv(&self) -> Result<String, csv::Error> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["id", "seconds"])?;
        for r in &self.rows {
            w.write_record([r.id.clone(), format!("{:.3}", r.seconds)])?;
        }
        Ok(String::from_utf8(w.into_inner().map_err(|e| e.into_error())?).expect("csv output is UTF-8"))
    }

    /// Fixed-width table followed by the summary.
    pub fn render(&self) -> String {
        let opt = |v: Option<usize>| v.map_or("-".to_string(), |v| v.to_string());
        let header = ["id", "|N|", "|O|", "p-", "floor(mu)", "z", "status", "iters", "cols"];
        let body: Vec<[String; 9]> = self
            .rows
            .iter()
            .map(|r| {
                let z = match (r.z, r.upper) {
                    (Some(z), Some(u)) if !r.is_optimal() && u != z => format!("[{z}, {u})"),
                    (z, _) => opt(z),
                };
                [
                    r.id.clone(),
                    r.agents.to_string(),
                    r.objects.to_string(),
                    opt(r.p_min),
                    opt(r.floor_mu),
                    z,
                    r.status.clone(),
                    r.iterations.to_string(),
                    r.columns.to_string(),
                ]
            })
            .collect();
        let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
        for row in &body {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.len());
            }
        }
        let line = |cells: Vec<&str>| -> String {
            let parts: Vec<String> = cells
                .iter()
                .zip(&widths)
                .enumerate()
                .map(|(c, (s, w))| if c == 0 { format!("{s:<w$}") } else { format!("{s:>w$}") })
                .collect();
            parts.join("  ").trim_end().to_string()
        };
        let mut out = String::new();
        out.push_str(&line(header.to_vec()));
        out.push('\n');
        out.push_str(&"-".repeat(widths.iter().sum::<usize>() + 2 * (widths.len() - 1)));
        out.push('\n');
        for row in &body {
            out.push_str(&line(row.iter().map(String::as_str).collect()));
            out.push('\n');
        }
        let s = self.summary();
        let pct = |v: Option<f64>, unit: &str| v.map_or("-".to_string(), |v| format!("{v:.2}{unit}"));
        out.push('\n');
        out.push_str(&format!(
            "instances {}, optimal {}, budget exhausted {}, errors {}\n",
            s.instances, s.optimal, s.budget_exhausted, s.errors
        ));
        out.push_str(&format!(
            "z = floor(mu) on {} of {} optimal, z > p- on {}, mean gain {} ({})\n",
            s.z_at_floor_mu,
            s.optimal,
            s.z_above_p_min,
            pct(s.mean_gain, ""),
            pct(s.mean_relative_gain, "%")
        ));
        if s.out_of_bounds > 0 {
            out.push_str(&format!("warning: {} optimal rows fall outside [p-, floor(mu)]\n", s.out_of_bounds));
        }
        out
    }
}
