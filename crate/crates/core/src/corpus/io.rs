//! On-disk formats.
//!
//! Corpus files are newline-delimited JSON objects with keys `id`, `source`,
//! `target`, optional `level` and `split`, in that order. Document fields hold
//! one sentence per line; padding sentences appear as `<pad>`.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{CoherenceExample, ConsensusClass, LeveledArticle, SimplificationInstance, Split};
use crate::error::{Error, Result};
use crate::textproc::{Document, Sentence, PAD_TOKEN};

#[derive(Serialize, Deserialize)]
struct InstanceRecord {
    id: String,
    source: String,
    target: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    level: Option<u8>,
    split: Split,
}

fn encode_document(doc: &Document) -> Result<String> {
    let mut lines = Vec::with_capacity(doc.sentences.len());
    for s in &doc.sentences {
        if s.text.contains('\n') {
            return Err(Error::InvalidArgument(format!(
                "sentence in {} contains a newline",
                doc.id
            )));
        }
        lines.push(s.text.as_str());
    }
    Ok(lines.join("\n"))
}

fn decode_document(id: String, field: &str) -> Result<Document> {
    let sentences: Vec<Sentence> = field
        .split('\n')
        .map(|line| {
            if line == PAD_TOKEN {
                Sentence::pad()
            } else {
                Sentence::new(line)
            }
        })
        .collect();
    if field.is_empty() {
        return Err(Error::EmptyText(format!("document {id} is empty")));
    }
    let pad_count = sentences.iter().filter(|s| s.is_pad).count();
    Ok(Document {
        id,
        sentences,
        pad_count,
    })
}

pub fn write_instances<W: Write>(out: W, instances: &[SimplificationInstance]) -> Result<()> {
    let mut out = BufWriter::new(out);
    for inst in instances {
        let record = InstanceRecord {
            id: inst.id.clone(),
            source: encode_document(&inst.source)?,
            target: encode_document(&inst.target)?,
            level: inst.readability_label,
            split: inst.split,
        };
        serde_json::to_writer(&mut out, &record)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_instances<R: BufRead>(input: R) -> Result<Vec<SimplificationInstance>> {
    let mut out = Vec::new();
    for (lineno, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: InstanceRecord = serde_json::from_str(&line)
            .map_err(|e| Error::Parse(format!("corpus line {}: {e}", lineno + 1)))?;
        out.push(SimplificationInstance {
            source: decode_document(format!("{}/source", rec.id), &rec.source)?,
            target: decode_document(format!("{}/target", rec.id), &rec.target)?,
            id: rec.id,
            readability_label: rec.level,
            split: rec.split,
        });
    }
    Ok(out)
}

#[derive(Deserialize)]
struct GcdcRecord {
    text: String,
    expert_ratings: Vec<u8>,
}

/// Reads `{"text": ..., "expert_ratings": [...]}` records.
pub fn read_gcdc<R: BufRead>(input: R) -> Result<Vec<(String, Vec<u8>)>> {
    let mut out = Vec::new();
    for (lineno, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: GcdcRecord = serde_json::from_str(&line)
            .map_err(|e| Error::Parse(format!("gcdc line {}: {e}", lineno + 1)))?;
        out.push((rec.text, rec.expert_ratings));
    }
    Ok(out)
}

#[derive(Serialize)]
struct CoherenceRecord<'a> {
    id: &'a str,
    text: String,
    expert_ratings: &'a [u8],
    consensus: ConsensusClass,
    label: u8,
}

pub fn write_coherence_examples<W: Write>(out: W, examples: &[CoherenceExample]) -> Result<()> {
    let mut out = BufWriter::new(out);
    for e in examples {
        let rec = CoherenceRecord {
            id: &e.document.id,
            text: e.document.text(),
            expert_ratings: &e.expert_ratings,
            consensus: e.consensus_class,
            label: e.binary_label,
        };
        serde_json::to_writer(&mut out, &rec)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

fn parse_level_file(name: &str) -> Option<(String, u8)> {
    let stem = name.strip_suffix(".txt")?;
    let (head, level) = stem.rsplit_once('.')?;
    let level: u8 = level.parse().ok()?;
    let id = head.strip_suffix(".en").unwrap_or(head);
    Some((id.to_string(), level))
}

/// Reads a directory of `<article>.en.<level>.txt` (or `<article>.<level>.txt`) files.
pub fn read_leveled_dir(dir: &Path) -> Result<Vec<LeveledArticle>> {
    let mut by_id: BTreeMap<String, BTreeMap<u8, String>> = BTreeMap::new();
    let mut names: Vec<_> = fs::read_dir(dir)?
        .filter_map(|e| e.ok())
        .filter(|e| e.path().is_file())
        .filter_map(|e| e.file_name().into_string().ok())
        .collect();
    names.sort();
    for name in names {
        if let Some((id, level)) = parse_level_file(&name) {
            let text = fs::read_to_string(dir.join(&name))?;
            by_id.entry(id).or_default().insert(level, text);
        }
    }
    Ok(by_id
        .into_iter()
        .map(|(article_id, versions)| LeveledArticle {
            article_id,
            versions,
        })
        .collect())
}

pub fn write_leveled_dir(dir: &Path, articles: &[LeveledArticle]) -> Result<()> {
    fs::create_dir_all(dir)?;
    for a in articles {
        for (level, text) in &a.versions {
            fs::write(dir.join(format!("{}.en.{level}.txt", a.article_id)), text)?;
        }
    }
    Ok(())
}

/// Reads `source.txt` and `target.txt`, one document per line, aligned by line.
pub fn read_pairs_dir(dir: &Path) -> Result<Vec<(String, String)>> {
    let read = |name: &str| -> Result<Vec<String>> {
        let f = fs::File::open(dir.join(name))?;
        BufReader::new(f).lines().map(|l| Ok(l?)).collect()
    };
    let (src, tgt) = (read("source.txt")?, read("target.txt")?);
    if src.len() != tgt.len() {
        return Err(Error::Parse(format!(
            "source.txt has {} lines but target.txt has {}",
            src.len(),
            tgt.len()
        )));
    }
    Ok(src.into_iter().zip(tgt).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn record_layout_is_fixed() {
        let inst = SimplificationInstance::new("x.0-4", "A cat. A dog.", "A cat.", None, Split::Test, 3).unwrap();
        let mut buf = Vec::new();
        write_instances(&mut buf, &[inst.clone()]).unwrap();
        let line = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(
            line,
            "{\"id\":\"x.0-4\",\"source\":\"A cat.\\nA dog.\\n<pad>\",\"target\":\"A cat.\\n<pad>\\n<pad>\",\"split\":\"test\"}\n"
        );
        let back = read_instances(&buf[..]).unwrap();
        assert_eq!(back, vec![inst]);
    }

    #[test]
    fn level_is_written_when_present() {
        let inst = SimplificationInstance::new("y", "A.", "B.", Some(2), Split::Train, 1).unwrap();
        let mut buf = Vec::new();
        write_instances(&mut buf, &[inst]).unwrap();
        assert!(String::from_utf8(buf).unwrap().contains("\"target\":\"B.\",\"level\":2,\"split\":\"train\""));
    }

    #[test]
    fn bad_lines_are_parse_errors() {
        assert!(matches!(read_instances(&b"{nope}\n"[..]), Err(Error::Parse(_))));
        assert!(matches!(read_gcdc(&b"{\"text\": 1}\n"[..]), Err(Error::Parse(_))));
    }

    #[test]
    fn level_file_names() {
        assert_eq!(parse_level_file("yawning.en.3.txt"), Some(("yawning".into(), 3)));
        assert_eq!(parse_level_file("a.b.0.txt"), Some(("a.b".into(), 0)));
        assert_eq!(parse_level_file("notes.txt"), None);
    }
}
