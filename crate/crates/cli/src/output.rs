//! Report files and their reproducibility header.

use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::ValueEnum;
use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Md,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Md => "md",
            Format::Json => "json",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Header {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// SHA-256 of the effective configuration and command options.
    pub config_sha256: String,
    pub seed: u64,
}

impl Header {
    pub fn new(command: &str, config: &impl Serialize, options: &impl Serialize, seed: u64) -> Self {
        let payload = serde_json::json!({ "command": command, "config": config, "options": options });
        let digest = Sha256::digest(payload.to_string().as_bytes());
        Self {
            tool: "platewise".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            config_sha256: hex::encode(digest),
            seed,
        }
    }

    fn lines(&self) -> [String; 4] {
        [
            format!("{} {} {}", self.tool, self.version, self.command),
            format!("config_sha256: {}", self.config_sha256),
            format!("seed: {}", self.seed),
            String::new(),
        ]
    }

    /// `# `-prefixed lines for CSV files.
    pub fn csv_block(&self) -> String {
        self.lines()[..3].iter().map(|l| format!("# {l}\n")).collect()
    }

    pub fn md_block(&self) -> String {
        let mut out = String::from("<!--\n");
        for l in &self.lines()[..3] {
            out += l;
            out.push('\n');
        }
        out += "-->\n\n";
        out
    }

    pub fn json_with(&self, body: &impl Serialize) -> String {
        let doc = serde_json::json!({ "header": self, "report": body });
        serde_json::to_string_pretty(&doc).expect("report serializes") + "\n"
    }
}

pub struct Writer {
    pub out: PathBuf,
    pub header: Header,
    pub written: Vec<PathBuf>,
}

impl Writer {
    pub fn new(out: &Path, header: Header) -> anyhow::Result<Self> {
        std::fs::create_dir_all(out).with_context(|| format!("creating output directory {}", out.display()))?;
        Ok(Self { out: out.to_path_buf(), header, written: Vec::new() })
    }

    pub fn raw(&mut self, name: &str, contents: &str) -> anyhow::Result<PathBuf> {
        let path = self.out.join(name);
        std::fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
        self.written.push(path.clone());
        Ok(path)
    }

    pub fn csv(&mut self, name: &str, body: &str) -> anyhow::Result<PathBuf> {
        let text = self.header.csv_block() + body;
        self.raw(name, &text)
    }

    pub fn md(&mut self, name: &str, body: &str) -> anyhow::Result<PathBuf> {
        let text = self.header.md_block() + body;
        self.raw(name, &text)
    }

    pub fn json(&mut self, name: &str, body: &impl Serialize) -> anyhow::Result<PathBuf> {
        let text = self.header.json_with(body);
        self.raw(name, &text)
    }

    /// One report in each requested format as `<stem>.<ext>`.
    pub fn report(
        &mut self,
        stem: &str,
        formats: &[Format],
        csv: impl Fn() -> String,
        md: impl Fn() -> String,
        json: &impl Serialize,
    ) -> anyhow::Result<()> {
        for &f in formats {
            let name = format!("{stem}.{}", f.extension());
            match f {
                Format::Csv => self.csv(&name, &csv())?,
                Format::Md => self.md(&name, &md())?,
                Format::Json => self.json(&name, json)?,
            };
        }
        Ok(())
    }
}
