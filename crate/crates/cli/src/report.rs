use serde::Serialize;

use frobq::suites::{CheckResult, Summary, SuiteConfig};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Serialize)]
pub struct Report {
    pub version: u32,
    pub config: ConfigOut,
    pub results: Vec<ResultOut>,
    pub summary: SummaryOut,
}

#[derive(Serialize)]
pub struct ConfigOut {
    pub p: u32,
    pub n: usize,
    #[serde(rename = "N")]
    pub precision: usize,
    pub floor: Option<i32>,
    pub seed: u64,
    pub suite: String,
}

#[derive(Serialize)]
pub struct ResultOut {
    pub suite: String,
    pub check: String,
    pub criterion: u8,
    pub params: String,
    pub status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    pub ms: u128,
}

#[derive(Serialize, Clone, Copy)]
pub struct SummaryOut {
    pub pass: usize,
    pub fail: usize,
    pub error: usize,
}

impl Report {
    pub fn new(cfg: &SuiteConfig, suite: &str, results: &[CheckResult], timing: bool) -> Report {
        let s = Summary::of(results);
        Report {
            version: SCHEMA_VERSION,
            config: ConfigOut { p: cfg.p, n: cfg.n, precision: cfg.precision, floor: cfg.floor, seed: cfg.seed, suite: suite.into() },
            results: results
                .iter()
                .map(|r| ResultOut {
                    suite: r.suite.clone(),
                    check: r.check.clone(),
                    criterion: r.criterion,
                    params: r.params.clone(),
                    status: r.status.as_str(),
                    witness: r.witness.clone(),
                    note: r.note.clone(),
                    ms: if timing { r.ms } else { 0 },
                })
                .collect(),
            summary: SummaryOut { pass: s.pass, fail: s.fail, error: s.error },
        }
    }

    pub fn ok(&self) -> bool {
        self.summary.fail == 0 && self.summary.error == 0
    }

    pub fn json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    pub fn markdown(&self) -> String {
        let c = &self.config;
        let mut s = format!(
            "# frobq report\n\np = {}, n = {}, N = {}, floor = {}, seed = {}, suite = `{}`\n\n",
            c.p,
            c.n,
            c.precision,
            c.floor.map_or("default".to_string(), |f| f.to_string()),
            c.seed,
            c.suite
        );
        s.push_str("| criterion | suite | check | status | ms | details |\n|---|---|---|---|---|---|\n");
        for r in &self.results {
            let detail = r.witness.as_deref().or(r.note.as_deref()).unwrap_or("").replace('|', "\\|");
            s.push_str(&format!("| {} | {} | `{}` | {} | {} | {} |\n", r.criterion, r.suite, r.check, r.status, r.ms, detail));
        }
        let m = self.summary;
        s.push_str(&format!("\n**pass {} · fail {} · error {}**\n", m.pass, m.fail, m.error));
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_results_have_zero_summary() {
        let r = Report::new(&SuiteConfig::new(3, 1), "all", &[], true);
        assert!(r.ok());
        assert!(r.json().contains("\"pass\": 0"));
        assert!(r.markdown().contains("pass 0"));
    }
}
