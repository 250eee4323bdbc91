// Golden-transcript cases, shared by the CLI tests and the acceptance run.

use std::path::{Path, PathBuf};

use psdpencil_cli::{run, schema, CliOutput};

pub fn cli_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../cli")
}

pub struct Case {
    pub golden: String,
    pub args: Vec<String>,
}

impl Case {
    pub fn command(&self) -> &str {
        &self.args[0]
    }

    /// Arguments with the fixture name resolved against `tests/fixtures`.
    pub fn argv(&self, json: bool) -> Vec<String> {
        let fixtures = cli_dir().join("tests/fixtures");
        let mut v = vec!["psdpencil".to_string()];
        for (i, a) in self.args.iter().enumerate() {
            if i > 0 && a.ends_with(".json") {
                v.push(fixtures.join(a).to_string_lossy().into_owned());
            } else {
                v.push(a.clone());
            }
        }
        if json {
            v.push("--json".into());
        }
        v
    }
}

pub fn cases() -> Vec<Case> {
    let text =
        std::fs::read_to_string(cli_dir().join("tests/golden/cases.txt")).expect("cases.txt");
    text.lines()
        .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
        .map(|l| {
            let (golden, args) = l.split_once('|').expect("`golden | args`");
            Case {
                golden: golden.trim().to_string(),
                args: args.split_whitespace().map(String::from).collect(),
            }
        })
        .collect()
}

pub fn validate(schema_text: &str, doc: &serde_json::Value) -> Result<(), String> {
    let schema: serde_json::Value = serde_json::from_str(schema_text).map_err(|e| e.to_string())?;
    let v = jsonschema::validator_for(&schema).map_err(|e| format!("bad schema: {e}"))?;
    let errs: Vec<String> = v
        .iter_errors(doc)
        .map(|e| format!("{} at {}", e, e.instance_path()))
        .collect();
    if errs.is_empty() {
        Ok(())
    } else {
        Err(errs.join("; "))
    }
}

/// Text output matches the transcript byte for byte on two runs, and the
/// `--json` output is one document valid against the command's schema.
pub fn check(case: &Case) -> Result<(), String> {
    let want = std::fs::read_to_string(cli_dir().join("tests/golden").join(&case.golden))
        .map_err(|e| format!("{}: {e}", case.golden))?;
    let first: CliOutput = run(case.argv(false));
    let second = run(case.argv(false));
    if first.code != 0 {
        return Err(format!(
            "{}: exit {} ({})",
            case.golden,
            first.code,
            first.stderr.trim()
        ));
    }
    if first.stdout != second.stdout {
        return Err(format!("{}: output differs between runs", case.golden));
    }
    if first.stdout != want {
        return Err(format!(
            "{}: differs from transcript:\n{}",
            case.golden, first.stdout
        ));
    }
    let json = run(case.argv(true));
    if json.code != 0 {
        return Err(format!("{} --json: exit {}", case.golden, json.code));
    }
    let doc: serde_json::Value = serde_json::from_str(&json.stdout)
        .map_err(|e| format!("{} --json: not JSON: {e}", case.golden))?;
    let sch = schema::for_command(case.command(), false).ok_or("no schema")?;
    validate(sch, &doc).map_err(|e| format!("{} --json: {e}", case.golden))
}
