use std::fmt::Write as _;

use super::{BioLabel, CorpusError, Sentence, TaggedDocument, Token};

const DOC_HEADER: &str = "#doc ";

/// One token line split into its tab-separated columns.
#[derive(Debug)]
pub(crate) struct RawRow<'a> {
    pub line: usize,
    pub cols: Vec<&'a str>,
}

#[derive(Debug)]
pub(crate) struct RawDoc<'a> {
    pub id: String,
    pub line: usize,
    pub sentences: Vec<Vec<RawRow<'a>>>,
}

/// Splits a CoNLL-style stream into documents, sentences and columns
/// without interpreting the columns.
pub(crate) fn parse_raw(text: &str) -> Result<Vec<RawDoc<'_>>, CorpusError> {
    let mut docs: Vec<RawDoc> = Vec::new();
    let mut current: Vec<RawRow> = Vec::new();

    fn close_sentence<'a>(docs: &mut [RawDoc<'a>], current: &mut Vec<RawRow<'a>>) {
        if !current.is_empty() {
            // A token line is only accepted after a header, so `docs` is non-empty here.
            docs.last_mut()
                .expect("token rows require a document")
                .sentences
                .push(std::mem::take(current));
        }
    }

    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw_line.strip_suffix('\r').unwrap_or(raw_line);
        if line.trim().is_empty() {
            close_sentence(&mut docs, &mut current);
            continue;
        }
        if let Some(id) = line.strip_prefix(DOC_HEADER) {
            if !line.contains('\t') {
                close_sentence(&mut docs, &mut current);
                if let Some(prev) = docs.last() {
                    if prev.sentences.is_empty() {
                        return Err(CorpusError::EmptyDocument {
                            doc_id: prev.id.clone(),
                            line: prev.line,
                        });
                    }
                }
                let id = id.trim();
                if id.is_empty() {
                    return Err(CorpusError::Parse {
                        line: line_no,
                        message: "document header without an id".into(),
                    });
                }
                docs.push(RawDoc {
                    id: id.to_string(),
                    line: line_no,
                    sentences: Vec::new(),
                });
                continue;
            }
        }
        if docs.is_empty() {
            return Err(CorpusError::Parse {
                line: line_no,
                message: "token line before the first `#doc <id>` header".into(),
            });
        }
        let cols: Vec<&str> = line.split('\t').collect();
        current.push(RawRow { line: line_no, cols });
    }
    close_sentence(&mut docs, &mut current);
    if let Some(last) = docs.last() {
        if last.sentences.is_empty() {
            return Err(CorpusError::EmptyDocument {
                doc_id: last.id.clone(),
                line: last.line,
            });
        }
    }
    Ok(docs)
}

pub(crate) fn parse_label(col: &str, line: usize) -> Result<BioLabel, CorpusError> {
    col.parse().map_err(|e: super::LabelParseError| CorpusError::Parse {
        line,
        message: e.0,
    })
}

/// Parses a CoNLL-style stream into documents.
///
/// Only the first three columns are read; prediction columns are ignored.
/// An empty or missing label column leaves the gold label unset.
pub fn read_conll(text: &str) -> Result<Vec<TaggedDocument>, CorpusError> {
    parse_raw(text)?
        .into_iter()
        .map(|raw| {
            let sentences = raw
                .sentences
                .into_iter()
                .map(|rows| {
                    let tokens = rows
                        .into_iter()
                        .map(|row| {
                            let surface = row.cols[0];
                            let pos = row.cols.get(1).copied().unwrap_or("");
                            let gold = match row.cols.get(2) {
                                Some(c) if !c.is_empty() => Some(parse_label(c, row.line)?),
                                _ => None,
                            };
                            Token::new(surface, pos, gold).map_err(|e| CorpusError::Parse {
                                line: row.line,
                                message: e.to_string(),
                            })
                        })
                        .collect::<Result<Vec<_>, _>>()?;
                    Ok(Sentence { tokens })
                })
                .collect::<Result<Vec<_>, CorpusError>>()?;
            Ok(TaggedDocument::new(raw.id, sentences))
        })
        .collect()
}

/// Renders documents in the canonical layout.
///
/// When `labels` is given it must mirror the documents sentence by sentence
/// and token by token; the labels are written as a fourth column.
pub fn write_conll(
    docs: &[TaggedDocument],
    labels: Option<&[Vec<Vec<BioLabel>>]>,
) -> Result<String, CorpusError> {
    if let Some(labels) = labels {
        if labels.len() != docs.len() {
            return Err(CorpusError::LengthMismatch {
                doc_id: String::new(),
                detail: format!("{} label documents for {} documents", labels.len(), docs.len()),
            });
        }
        for (doc, doc_labels) in docs.iter().zip(labels) {
            if doc_labels.len() != doc.sentences.len() {
                return Err(CorpusError::LengthMismatch {
                    doc_id: doc.doc_id.clone(),
                    detail: format!(
                        "{} label sentences for {} sentences",
                        doc_labels.len(),
                        doc.sentences.len()
                    ),
                });
            }
            for (i, (s, l)) in doc.sentences.iter().zip(doc_labels).enumerate() {
                if s.len() != l.len() {
                    return Err(CorpusError::LengthMismatch {
                        doc_id: doc.doc_id.clone(),
                        detail: format!("sentence {i}: {} labels for {} tokens", l.len(), s.len()),
                    });
                }
            }
        }
    }

    let mut out = String::new();
    for (d, doc) in docs.iter().enumerate() {
        let _ = writeln!(out, "{DOC_HEADER}{}", doc.doc_id);
        for (s, sentence) in doc.sentences.iter().enumerate() {
            for (t, token) in sentence.tokens.iter().enumerate() {
                out.push_str(&token.surface);
                out.push('\t');
                out.push_str(&token.pos);
                let pred = labels.map(|l| l[d][s][t]);
                match (token.gold, pred) {
                    (Some(g), Some(p)) => {
                        let _ = write!(out, "\t{g}\t{p}");
                    }
                    (None, Some(p)) => {
                        let _ = write!(out, "\t\t{p}");
                    }
                    (Some(g), None) => {
                        let _ = write!(out, "\t{g}");
                    }
                    (None, None) => {}
                }
                out.push('\n');
            }
            out.push('\n');
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::EntityType;

    #[test]
    fn single_location_token() {
        let docs = read_conll("#doc d1\nSwifterbant\tN\tB-LOC\n\n").unwrap();
        assert_eq!(docs.len(), 1);
        assert_eq!(docs[0].doc_id, "d1");
        assert_eq!(docs[0].sentences.len(), 1);
        let tok = &docs[0].sentences[0].tokens[0];
        assert_eq!(tok.surface, "Swifterbant");
        assert_eq!(tok.gold, Some(BioLabel::B(EntityType::Location)));
    }

    #[test]
    fn single_outside_token() {
        let docs = read_conll("#doc d1\nhond\tN\tO\n\n").unwrap();
        assert_eq!(docs[0].sentences[0].tokens[0].gold, Some(BioLabel::O));
        assert_eq!(docs[0].token_count(), 1);
    }

    #[test]
    fn unknown_type_names_line() {
        let err = read_conll("#doc d1\nhond\tN\tO\naxe\tN\tB-TOOL\n").unwrap_err();
        match err {
            CorpusError::Parse { line, message } => {
                assert_eq!(line, 3);
                assert!(message.contains("TOOL"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_label_column_is_unlabelled() {
        let docs = read_conll("#doc a\nput\tN\n").unwrap();
        assert_eq!(docs[0].sentences[0].tokens[0].gold, None);
        assert_eq!(docs[0].sentences[0].tokens[0].pos, "N");
    }

    #[test]
    fn empty_documents_rejected() {
        assert!(matches!(
            read_conll("#doc a\n\n#doc b\nx\tN\tO\n"),
            Err(CorpusError::EmptyDocument { ref doc_id, .. }) if doc_id == "a"
        ));
        assert!(matches!(
            read_conll("#doc a\nx\tN\tO\n\n#doc b\n\n"),
            Err(CorpusError::EmptyDocument { ref doc_id, .. }) if doc_id == "b"
        ));
    }

    #[test]
    fn token_before_header_rejected() {
        assert!(matches!(read_conll("x\tN\tO\n"), Err(CorpusError::Parse { line: 1, .. })));
    }

    #[test]
    fn hash_token_is_not_a_header() {
        let docs = read_conll("#doc a\n#doc\tPUNC\tO\n#\tPUNC\tO\n").unwrap();
        assert_eq!(docs[0].sentences[0].surfaces(), vec!["#doc", "#"]);
    }

    #[test]
    fn prediction_column_appended() {
        let docs = read_conll("#doc d\nurn\tN\tB-ART\npit\tN\n").unwrap();
        let labels = vec![vec![vec![BioLabel::O, BioLabel::B(EntityType::Context)]]];
        let text = write_conll(&docs, Some(&labels)).unwrap();
        assert_eq!(text, "#doc d\nurn\tN\tB-ART\tO\npit\tN\t\tB-CON\n\n");
        // reading the file back ignores the prediction column
        assert_eq!(read_conll(&text).unwrap(), docs);
    }

    #[test]
    fn short_label_list_rejected() {
        let docs = read_conll("#doc d\nurn\tN\tB-ART\npit\tN\tO\n").unwrap();
        let labels = vec![vec![vec![BioLabel::O]]];
        assert!(matches!(
            write_conll(&docs, Some(&labels)),
            Err(CorpusError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn crlf_and_multiple_blank_lines() {
        let docs = read_conll("#doc d\r\na\tN\tO\r\n\r\n\r\nb\tN\tO\r\n").unwrap();
        assert_eq!(docs[0].sentences.len(), 2);
    }
}
