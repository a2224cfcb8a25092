//! Dataset ingestion: PatternText files and PGM image directories.
//!
//! Both loaders produce raw patterns with string labels. Training tasks
//! read the label as the target bit pattern; classification tasks map
//! sorted distinct labels to class indices.

use crate::error::{data, HarnessError};
use memnet::bank::ClassDataset;
use memnet::trainer::Dataset;
use std::collections::BTreeSet;
use std::path::Path;

pub const PATTERN_TEXT_HEADER: &str = "MEMNET-PAT 1";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawPatterns {
    pub inputs: Vec<Vec<bool>>,
    pub labels: Vec<String>,
}

impl RawPatterns {
    /// Labels as target bit patterns, all of one width.
    pub fn into_training(self) -> Result<Dataset, HarnessError> {
        let mut targets = Vec::with_capacity(self.labels.len());
        let width = self.labels.first().map(|l| l.len()).unwrap_or(0);
        for (index, label) in self.labels.iter().enumerate() {
            let bits = parse_bitstring(label)
                .ok_or_else(|| data(format!("sample {index}: target '{label}' is not a bit pattern")))?;
            if bits.len() != width {
                return Err(data(format!(
                    "sample {index}: target width {} differs from first target width {width}",
                    bits.len()
                )));
            }
            targets.push(bits);
        }
        Dataset::new(self.inputs, targets).map_err(data)
    }

    /// Labels as class names: sorted distinct names map to 0..k.
    pub fn into_classes(self) -> Result<(ClassDataset, Vec<String>), HarnessError> {
        let names: Vec<String> = self
            .labels
            .iter()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .cloned()
            .collect();
        let labels = self
            .labels
            .iter()
            .map(|label| names.binary_search(label).expect("name from this label set"))
            .collect();
        let dataset = ClassDataset::new(self.inputs, labels).map_err(data)?;
        Ok((dataset, names))
    }
}

fn parse_bitstring(text: &str) -> Option<Vec<bool>> {
    text.chars()
        .map(|c| match c {
            '0' => Some(false),
            '1' => Some(true),
            _ => None,
        })
        .collect()
}

/// PatternText: header `MEMNET-PAT 1`, then one `<bitstring> <label>` per
/// line. Errors name the offending 1-based line.
pub fn load_pattern_text(path: &Path) -> Result<RawPatterns, HarnessError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| data(format!("dataset {}: {e}", path.display())))?;
    let name = path.display();
    let mut lines = text.lines().enumerate();
    let header = lines
        .next()
        .ok_or_else(|| data(format!("{name}: empty file, expected header '{PATTERN_TEXT_HEADER}'")))?;
    if header.1.trim() != PATTERN_TEXT_HEADER {
        return Err(data(format!(
            "{name}: line 1: bad header '{}', expected '{PATTERN_TEXT_HEADER}'",
            header.1.trim()
        )));
    }
    let mut inputs: Vec<Vec<bool>> = Vec::new();
    let mut labels: Vec<String> = Vec::new();
    for (index, raw) in lines {
        let line_no = index + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let mut tokens = line.split_whitespace();
        let (Some(pattern), Some(label), None) = (tokens.next(), tokens.next(), tokens.next())
        else {
            return Err(data(format!(
                "{name}: line {line_no}: expected '<bitstring> <label>'"
            )));
        };
        let bits = parse_bitstring(pattern).ok_or_else(|| {
            data(format!(
                "{name}: line {line_no}: pattern contains a character other than 0 or 1"
            ))
        })?;
        if let Some(first) = inputs.first() {
            if bits.len() != first.len() {
                return Err(data(format!(
                    "{name}: line {line_no}: pattern length {} differs from first sample length {}",
                    bits.len(),
                    first.len()
                )));
            }
        }
        inputs.push(bits);
        labels.push(label.to_string());
    }
    if inputs.is_empty() {
        return Err(data(format!("{name}: no samples")));
    }
    Ok(RawPatterns { inputs, labels })
}

/// PGM directory: one subdirectory per class, `.pgm` files inside. Each
/// image flattens row-major; pixel >= threshold reads as 1.
pub fn load_pgm_directory(root: &Path, threshold: u8) -> Result<RawPatterns, HarnessError> {
    let mut class_dirs: Vec<std::path::PathBuf> = Vec::new();
    let entries = std::fs::read_dir(root)
        .map_err(|e| data(format!("dataset {}: {e}", root.display())))?;
    for entry in entries {
        let entry = entry.map_err(|e| data(format!("dataset {}: {e}", root.display())))?;
        let path = entry.path();
        if path.is_dir() {
            class_dirs.push(path);
        }
    }
    class_dirs.sort();
    let mut inputs: Vec<Vec<bool>> = Vec::new();
    let mut labels: Vec<String> = Vec::new();
    for dir in &class_dirs {
        let label = dir
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .ok_or_else(|| data(format!("class directory {} has no name", dir.display())))?;
        let mut files: Vec<std::path::PathBuf> = std::fs::read_dir(dir)
            .map_err(|e| data(format!("class directory {}: {e}", dir.display())))?
            .filter_map(|entry| entry.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|ext| ext == "pgm"))
            .collect();
        files.sort();
        for file in files {
            let pixels = load_pgm(&file)?;
            let bits: Vec<bool> = pixels.iter().map(|&p| p >= threshold as u16).collect();
            if let Some(first) = inputs.first() {
                if bits.len() != first.len() {
                    return Err(data(format!(
                        "image {}: {} pixels, but the first image has {}",
                        file.display(),
                        bits.len(),
                        first.len()
                    )));
                }
            }
            inputs.push(bits);
            labels.push(label.clone());
        }
    }
    if inputs.is_empty() {
        return Err(data(format!(
            "dataset {}: no .pgm files under class subdirectories",
            root.display()
        )));
    }
    Ok(RawPatterns { inputs, labels })
}

/// Minimal PGM reader: P2 (ASCII) and P5 (binary), 8-bit maxval,
/// `#` comments allowed in the header.
fn load_pgm(path: &Path) -> Result<Vec<u16>, HarnessError> {
    let bytes =
        std::fs::read(path).map_err(|e| data(format!("image {}: {e}", path.display())))?;
    let bad = |detail: &str| data(format!("image {}: {detail}", path.display()));
    let mut pos = 0usize;

    let next_token = |pos: &mut usize| -> Option<String> {
        loop {
            while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
                *pos += 1;
            }
            if *pos < bytes.len() && bytes[*pos] == b'#' {
                while *pos < bytes.len() && bytes[*pos] != b'\n' {
                    *pos += 1;
                }
                continue;
            }
            break;
        }
        let start = *pos;
        while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        (*pos > start).then(|| String::from_utf8_lossy(&bytes[start..*pos]).into_owned())
    };

    let magic = next_token(&mut pos).ok_or_else(|| bad("missing magic number"))?;
    if magic != "P2" && magic != "P5" {
        return Err(bad(&format!("unsupported magic '{magic}', expected P2 or P5")));
    }
    let header_number = |name: &str, pos: &mut usize| -> Result<usize, HarnessError> {
        next_token(pos)
            .and_then(|t| t.parse::<usize>().ok())
            .ok_or_else(|| bad(&format!("bad or missing {name}")))
    };
    let width = header_number("width", &mut pos)?;
    let height = header_number("height", &mut pos)?;
    let maxval = header_number("maxval", &mut pos)?;
    if width == 0 || height == 0 {
        return Err(bad("zero image dimension"));
    }
    if maxval == 0 || maxval > 255 {
        return Err(bad(&format!("maxval {maxval} outside 1..=255")));
    }
    let count = width * height;
    let mut pixels: Vec<u16> = Vec::with_capacity(count);
    if magic == "P2" {
        for _ in 0..count {
            let value = next_token(&mut pos)
                .and_then(|t| t.parse::<u16>().ok())
                .ok_or_else(|| bad("truncated pixel data"))?;
            if value as usize > maxval {
                return Err(bad(&format!("pixel {value} exceeds maxval {maxval}")));
            }
            pixels.push(value);
        }
    } else {
        // Binary payload starts after exactly one whitespace byte.
        if pos >= bytes.len() || !bytes[pos].is_ascii_whitespace() {
            return Err(bad("missing separator before binary pixels"));
        }
        pos += 1;
        if bytes.len() < pos + count {
            return Err(bad("truncated pixel data"));
        }
        for &byte in &bytes[pos..pos + count] {
            if byte as usize > maxval {
                return Err(bad(&format!("pixel {byte} exceeds maxval {maxval}")));
            }
            pixels.push(byte as u16);
        }
    }
    Ok(pixels)
}
