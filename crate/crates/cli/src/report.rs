use std::fmt::Display;
use std::path::{Path, PathBuf};

use cryoqpm::{Error, Result};

/// `key = value` report, printed to stdout and written to the output directory.
#[derive(Default)]
pub struct Report {
    lines: Vec<String>,
}

impl Report {
    pub fn value(&mut self, key: &str, value: impl Display) -> &mut Self {
        self.lines.push(format!("{key} = {value}"));
        self
    }

    pub fn text(&mut self, key: &str, value: impl Display) -> &mut Self {
        self.lines.push(format!("{key} = \"{value}\""));
        self
    }

    pub fn finish(&self, out: &Output, name: &str) -> Result<()> {
        let text = self.lines.join("\n") + "\n";
        print!("{text}");
        out.write(name, &text)?;
        Ok(())
    }
}

pub struct Output {
    pub dir: PathBuf,
    pub plot: bool,
}

impl Output {
    pub fn new(dir: PathBuf, plot: bool) -> Result<Self> {
        std::fs::create_dir_all(&dir).map_err(|e| Error::Io {
            path: dir.display().to_string(),
            source: e,
        })?;
        Ok(Self { dir, plot })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn write(&self, name: &str, text: &str) -> Result<PathBuf> {
        let path = self.path(name);
        std::fs::write(&path, text).map_err(|e| Error::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        Ok(path)
    }

    /// Gnuplot script for columns `x:y...` of a CSV written by this run.
    pub fn plot_curves(&self, csv: &str, xlabel: &str, ylabel: &str, columns: &[usize]) -> Result<()> {
        if !self.plot {
            return Ok(());
        }
        let series: Vec<String> = columns
            .iter()
            .map(|c| format!("'{csv}' using 1:{c} with lines title columnheader({c})"))
            .collect();
        let script = format!(
            "set datafile separator ','\nset key autotitle columnheader\nset xlabel '{xlabel}'\nset ylabel '{ylabel}'\nplot {}\n",
            series.join(", \\\n     ")
        );
        self.write(&script_name(csv), &script).map(|_| ())
    }

    pub fn plot_matrix(&self, csv: &str) -> Result<()> {
        if !self.plot {
            return Ok(());
        }
        let script = format!(
            "set datafile separator ','\nset xlabel 'idler column'\nset ylabel 'signal row'\n\
             plot '{csv}' matrix rowheaders columnheaders with image\n"
        );
        self.write(&script_name(csv), &script).map(|_| ())
    }
}

fn script_name(csv: &str) -> String {
    Path::new(csv).with_extension("gp").display().to_string()
}
