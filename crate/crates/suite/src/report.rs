//! Report rendering: per-world CSV and a leaderboard-style markdown table.

use crate::scoring::EnvScore;

/// Per-world rows plus the aggregate, fixed-precision for byte-stable
/// regeneration.
pub fn render_csv(method: &str, rows: &[EnvScore], aggregate: f64) -> String {
    let mut out = String::new();
    out.push_str("world_id,optimal_time,trials,successes,collisions,timeouts,score\n");
    for r in rows {
        out.push_str(&format!(
            "{},{:.6},{},{},{},{},{:.6}\n",
            r.world_id, r.optimal_time, r.trials, r.successes, r.collisions, r.timeouts, r.score
        ));
    }
    out.push_str(&format!("aggregate,{method},,,,,{aggregate:.6}\n"));
    out
}

/// Leaderboard table (rank, method, score) followed by the per-world
/// breakdown. Methods are ranked by descending score.
pub fn render_markdown(methods: &[(String, Vec<EnvScore>, f64)]) -> String {
    let mut ranked: Vec<&(String, Vec<EnvScore>, f64)> = methods.iter().collect();
    ranked.sort_by(|a, b| b.2.total_cmp(&a.2).then(a.0.cmp(&b.0)));
    let mut out = String::new();
    out.push_str("| Rank | Method | Score |\n|---|---|---|\n");
    for (i, (method, _, aggregate)) in ranked.iter().enumerate() {
        out.push_str(&format!("| {} | {} | {:.4} |\n", i + 1, method, aggregate));
    }
    for (method, rows, aggregate) in &ranked {
        out.push_str(&format!(
            "\n## {method} ({:.4})\n\n| World | OT (s) | Succ | Coll | T/O | Score |\n|---|---|---|---|---|---|\n",
            aggregate
        ));
        for r in rows.iter() {
            out.push_str(&format!(
                "| {} | {:.2} | {} | {} | {} | {:.4} |\n",
                r.world_id, r.optimal_time, r.successes, r.collisions, r.timeouts, r.score
            ));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(id: &str, score: f64) -> EnvScore {
        EnvScore {
            world_id: id.to_string(),
            optimal_time: 2.0,
            trials: 1,
            successes: 1,
            collisions: 0,
            timeouts: 0,
            score,
        }
    }

    #[test]
    fn csv_has_aggregate_row() {
        let csv = render_csv("pursuit+fi", &[row("w0", 0.25)], 0.25);
        assert!(csv.starts_with("world_id,"));
        assert!(csv.contains("aggregate,pursuit+fi"));
        assert!(csv.trim_end().ends_with("0.250000"));
    }

    #[test]
    fn markdown_ranks_methods_by_score() {
        let md = render_markdown(&[
            ("slow".into(), vec![row("w0", 0.1)], 0.1),
            ("fast".into(), vec![row("w0", 0.2)], 0.2),
        ]);
        assert!(md.starts_with("| Rank | Method | Score |"));
        let fast = md.find("| 1 | fast |").unwrap();
        let slow = md.find("| 2 | slow |").unwrap();
        assert!(fast < slow);
    }

    #[test]
    fn csv_regeneration_is_byte_identical() {
        let rows = vec![row("w0", 0.25), row("w1", 0.125)];
        let a = render_csv("m", &rows, 0.1875);
        let b = render_csv("m", &rows, 0.1875);
        assert_eq!(a, b);
    }
}
