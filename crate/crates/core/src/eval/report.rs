use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::metrics::{accuracy_by_snr, confusion_matrix, sensitivity, AccuracyCurve, ConfusionMatrix, Predictions, Scope};
use super::svg::{heatmap, line_chart, Series};
use super::EvalError;

/// Everything `emit_report` writes.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub class_names: Vec<String>,
    pub threshold: f64,
    pub overall: AccuracyCurve,
    pub per_class: Vec<AccuracyCurve>,
    /// One matrix per SNR present in the predictions, ascending.
    pub matrices: Vec<ConfusionMatrix>,
}

impl EvalReport {
    pub fn sensitivity(&self, scope: Scope) -> Option<i16> {
        match scope {
            Scope::Overall => sensitivity(&self.overall, self.threshold),
            Scope::Class(c) => sensitivity(&self.per_class[c], self.threshold),
        }
    }

    fn scope_name(&self, scope: Scope) -> (&'static str, &str) {
        match scope {
            Scope::Overall => ("overall", "all"),
            Scope::Class(c) => ("class", &self.class_names[c]),
        }
    }

    fn curves(&self) -> impl Iterator<Item = &AccuracyCurve> {
        std::iter::once(&self.overall).chain(&self.per_class)
    }

    pub fn curves_csv(&self) -> String {
        let mut out = String::from("scope,class_name,snr_db,accuracy,n_examples\n");
        for c in self.curves() {
            let (scope, name) = self.scope_name(c.scope);
            for p in &c.points {
                let _ = writeln!(out, "{scope},{name},{},{},{}", p.snr_db, p.accuracy, p.n_examples);
            }
        }
        out
    }

    pub fn sensitivity_csv(&self) -> String {
        let mut out = String::from("scope,class_name,threshold,snr_db_or_NA\n");
        for c in self.curves() {
            let (scope, name) = self.scope_name(c.scope);
            let s = sensitivity(c, self.threshold).map_or_else(|| "NA".to_string(), |v| v.to_string());
            let _ = writeln!(out, "{scope},{name},{},{s}", self.threshold);
        }
        out
    }

    pub fn confusion_csv(&self) -> String {
        let mut out = String::from("snr_db,true_class,pred_class,count\n");
        for m in &self.matrices {
            for t in 0..m.n_classes {
                for p in 0..m.n_classes {
                    let _ = writeln!(
                        out,
                        "{},{},{},{}",
                        m.snr_db,
                        self.class_names[t],
                        self.class_names[p],
                        m.get(t, p)
                    );
                }
            }
        }
        out
    }
}

pub fn build_report(preds: &Predictions, class_names: &[String], grid: &[i16], threshold: f64) -> Result<EvalReport, EvalError> {
    if preds.items.is_empty() {
        return Err(EvalError::EmptySplit);
    }
    if class_names.len() != preds.n_classes {
        return Err(EvalError::ClassCount {
            classifier: preds.n_classes,
            split: class_names.len(),
        });
    }
    let (overall, per_class) = accuracy_by_snr(preds, grid);
    let matrices = preds
        .snr_values()
        .into_iter()
        .map(|s| confusion_matrix(preds, s))
        .collect::<Result<_, _>>()?;
    Ok(EvalReport {
        class_names: class_names.to_vec(),
        threshold,
        overall,
        per_class,
        matrices,
    })
}

fn points(c: &AccuracyCurve) -> Vec<(f64, f64)> {
    c.points.iter().map(|p| (p.snr_db as f64, p.accuracy)).collect()
}

fn write(out_dir: &Path, name: &str, body: &str, written: &mut Vec<PathBuf>) -> Result<(), EvalError> {
    let path = out_dir.join(name);
    fs::write(&path, body)?;
    written.push(path);
    Ok(())
}

/// Write `curves.csv`, `sensitivity.csv`, `confusion.csv`,
/// `accuracy_overall.svg`, `accuracy_per_class.svg` and one
/// `confusion_<snr>dB.svg` per matrix. Returns the paths written.
pub fn emit_report(report: &EvalReport, out_dir: &Path) -> Result<Vec<PathBuf>, EvalError> {
    fs::create_dir_all(out_dir)?;
    let mut written = Vec::new();
    write(out_dir, "curves.csv", &report.curves_csv(), &mut written)?;
    write(out_dir, "sensitivity.csv", &report.sensitivity_csv(), &mut written)?;
    write(out_dir, "confusion.csv", &report.confusion_csv(), &mut written)?;
    let overall = line_chart(
        "Average accuracy",
        "SNR (dB)",
        &[Series {
            label: "all classes",
            points: points(&report.overall),
        }],
    );
    write(out_dir, "accuracy_overall.svg", &overall, &mut written)?;
    let series: Vec<Series<'_>> = report
        .per_class
        .iter()
        .zip(&report.class_names)
        .map(|(c, name)| Series {
            label: name,
            points: points(c),
        })
        .collect();
    let per_class = line_chart("Accuracy per class", "SNR (dB)", &series);
    write(out_dir, "accuracy_per_class.svg", &per_class, &mut written)?;
    for m in &report.matrices {
        let svg = heatmap(&format!("Confusion matrix at {} dB", m.snr_db), &report.class_names, &m.counts);
        write(out_dir, &format!("confusion_{}dB.svg", m.snr_db), &svg, &mut written)?;
    }
    Ok(written)
}

/// Overall curves of several runs in one CSV (`<stem>.csv`, scope = run
/// label) and one chart (`<stem>.svg`).
pub fn emit_comparison(runs: &[(String, AccuracyCurve)], out_dir: &Path, stem: &str) -> Result<Vec<PathBuf>, EvalError> {
    fs::create_dir_all(out_dir)?;
    let mut csv = String::from("scope,class_name,snr_db,accuracy,n_examples\n");
    for (label, c) in runs {
        for p in &c.points {
            let _ = writeln!(csv, "{label},all,{},{},{}", p.snr_db, p.accuracy, p.n_examples);
        }
    }
    let series: Vec<Series<'_>> = runs
        .iter()
        .map(|(label, c)| Series {
            label,
            points: points(c),
        })
        .collect();
    let mut written = Vec::new();
    write(out_dir, &format!("{stem}.csv"), &csv, &mut written)?;
    write(
        out_dir,
        &format!("{stem}.svg"),
        &line_chart("Average accuracy by model", "SNR (dB)", &series),
        &mut written,
    )?;
    Ok(written)
}
