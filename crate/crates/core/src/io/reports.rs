//! Report rendering: human-readable aligned text with 1-based class indices
//! (the conventional table display) and machine-readable CSV that stays
//! 0-based like every other file format.

use std::fmt::Write as _;

use crate::metrics::StreamReport;
use crate::predictor::TrainReport;

pub const FALSE_RECOGNITION_CSV_HEADER: &str = "# signseg false-recognition report v1 (0-based class indices)\nstream_id,avg_max_softmax,correct_class,correct_prob,false_class,false_prob,window_start";

pub const STREAM_CSV_HEADER: &str = "# signseg stream report v1 (0-based class indices)\nstream_id,avg_max_softmax,exact_match,word_recall,edit_distance,expected,recognized";

pub const TRAIN_CSV_HEADER: &str =
    "# signseg train report v1\nepoch,learning_rate,train_loss,train_accuracy,val_loss,val_accuracy";

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{x:.2}"))
}

/// Aggregate false-recognition table, one block per stream, displayed
/// 1-based.
pub fn false_recognition_text(reports: &[StreamReport]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<10} {:>8} {:>14} {:>13} {:>12} {:>11}",
        "stream", "avg", "correct class", "correct prob", "false class", "false prob"
    );
    let mut total = 0usize;
    for report in reports {
        let avg = fmt_opt(report.avg_max_softmax);
        if report.false_recognitions.is_empty() {
            let _ = writeln!(
                out,
                "{:<10} {:>8} {:>14} {:>13} {:>12} {:>11}",
                report.stream_id + 1,
                avg,
                "-",
                "-",
                "-",
                "-"
            );
        } else {
            for (i, row) in report.false_recognitions.iter().enumerate() {
                let lead = if i == 0 {
                    format!("{}", report.stream_id + 1)
                } else {
                    String::new()
                };
                let lead_avg = if i == 0 { avg.clone() } else { String::new() };
                let _ = writeln!(
                    out,
                    "{:<10} {:>8} {:>14} {:>13.2} {:>12} {:>11.2}",
                    lead,
                    lead_avg,
                    row.correct_class + 1,
                    row.correct_prob,
                    row.false_class + 1,
                    row.false_prob
                );
                total += 1;
            }
        }
    }
    let signs: usize = reports.iter().map(|r| r.expected.len()).sum();
    let _ = writeln!(
        out,
        "total: {total} false recognized isolated signs in {signs} across {} streams",
        reports.len()
    );
    out.push_str("note: accuracy spread, when shown elsewhere, is computed across seeds\n");
    out
}

pub fn false_recognition_csv(reports: &[StreamReport]) -> String {
    let mut out = String::from(FALSE_RECOGNITION_CSV_HEADER);
    out.push('\n');
    for report in reports {
        for row in &report.false_recognitions {
            let _ = writeln!(
                out,
                "{},{},{},{:.6},{},{:.6},{}",
                row.stream_id,
                report
                    .avg_max_softmax
                    .map_or_else(String::new, |v| format!("{v:.6}")),
                row.correct_class,
                row.correct_prob,
                row.false_class,
                row.false_prob,
                row.window_start
            );
        }
    }
    out
}

pub fn stream_reports_text(reports: &[StreamReport]) -> String {
    let mut out = String::new();
    for report in reports {
        let m = crate::metrics::sequence_metrics(&report.expected, &report.recognized);
        let _ = writeln!(
            out,
            "stream {:>3}: avg max softmax {}  exact {}  recall {:.3}  edits {}",
            report.stream_id + 1,
            fmt_opt(report.avg_max_softmax),
            if report.exact_match { "yes" } else { "no" },
            m.word_recall,
            m.edit_distance
        );
        let disp = |words: &[usize]| {
            words
                .iter()
                .map(|w| (w + 1).to_string())
                .collect::<Vec<_>>()
                .join(" ")
        };
        let _ = writeln!(out, "  expected:   {}", disp(&report.expected));
        let _ = writeln!(out, "  recognized: {}", disp(&report.recognized));
    }
    out
}

pub fn stream_reports_csv(reports: &[StreamReport]) -> String {
    let mut out = String::from(STREAM_CSV_HEADER);
    out.push('\n');
    for report in reports {
        let m = crate::metrics::sequence_metrics(&report.expected, &report.recognized);
        let join = |words: &[usize]| {
            words
                .iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>()
                .join(" ")
        };
        let _ = writeln!(
            out,
            "{},{},{},{:.6},{},{},{}",
            report.stream_id,
            report
                .avg_max_softmax
                .map_or_else(String::new, |v| format!("{v:.6}")),
            report.exact_match,
            m.word_recall,
            m.edit_distance,
            join(&report.expected),
            join(&report.recognized)
        );
    }
    out
}

/// Three-phase accuracy summary in the conventional train/validation/test
/// table shape.
pub fn train_summary_text(report: &TrainReport) -> String {
    let last = report.epochs.last();
    let fmt_acc = |v: Option<f64>| v.map_or_else(|| "-".into(), |a| format!("{:.1}%", a * 100.0));
    let mut out = String::new();
    let _ = writeln!(out, "phase        accuracy");
    let _ = writeln!(
        out,
        "train        {}",
        fmt_acc(last.map(|e| e.train_accuracy))
    );
    let _ = writeln!(
        out,
        "validation   {}",
        fmt_acc(last.and_then(|e| e.val_accuracy))
    );
    let _ = writeln!(out, "test         {}", fmt_acc(report.test_accuracy));
    let _ = writeln!(
        out,
        "stopped at epoch {} (best {}), seed {}",
        report.stopped_epoch, report.best_epoch, report.seed
    );
    out
}

pub fn train_report_csv(report: &TrainReport) -> String {
    let mut out = String::from(TRAIN_CSV_HEADER);
    out.push('\n');
    for e in &report.epochs {
        let opt = |v: Option<f64>| v.map_or_else(String::new, |x| format!("{x:.6}"));
        let _ = writeln!(
            out,
            "{},{:.6},{:.6},{:.6},{},{}",
            e.epoch,
            e.learning_rate,
            e.train_loss,
            e.train_accuracy,
            opt(e.val_loss),
            opt(e.val_accuracy)
        );
    }
    out
}
