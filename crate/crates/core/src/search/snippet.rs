pub const SNIPPET_WIDTH: usize = 160;
pub const HIT_OPEN: &str = "<em>";
pub const HIT_CLOSE: &str = "</em>";

/// Char ranges of alphanumeric runs whose lowercase form is in `terms`.
fn hit_ranges(chars: &[char], terms: &[String]) -> Vec<(usize, usize)> {
    let mut hits = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        if !chars[i].is_alphanumeric() {
            i += 1;
            continue;
        }
        let start = i;
        while i < chars.len() && chars[i].is_alphanumeric() {
            i += 1;
        }
        let word: String = chars[start..i].iter().flat_map(|c| c.to_lowercase()).collect();
        if terms.contains(&word) {
            hits.push((start, i));
        }
    }
    hits
}

/// A window of at most `width` chars of `text` around the first query-term
/// hit, with every hit inside the window wrapped in `<em>` markers. Without
/// a hit the window is the start of the text. Words cut by the window edges
/// are dropped unless nothing would remain.
pub fn snippet(text: &str, terms: &[String], width: usize) -> String {
    let chars: Vec<char> = text.chars().collect();
    let hits = hit_ranges(&chars, terms);
    let (start, end) = window(&chars, &hits, width);
    let mut out = String::new();
    let mut pos = start;
    for &(s, e) in hits.iter().filter(|&&(s, e)| s >= start && e <= end) {
        out.extend(&chars[pos..s]);
        out.push_str(HIT_OPEN);
        out.extend(&chars[s..e]);
        out.push_str(HIT_CLOSE);
        pos = e;
    }
    out.extend(&chars[pos..end]);
    out
}

fn window(chars: &[char], hits: &[(usize, usize)], width: usize) -> (usize, usize) {
    let n = chars.len();
    let start = match hits.first() {
        Some(&(s, e)) => {
            let centre = (s + e) / 2;
            centre.saturating_sub(width / 2).min(n.saturating_sub(width))
        }
        None => 0,
    };
    let end = (start + width).min(n);
    let cut = |i: usize| i > 0 && i < n && chars[i - 1].is_alphanumeric() && chars[i].is_alphanumeric();
    let mut s = start;
    while s < end && cut(s) {
        s += 1;
    }
    let mut e = end;
    while e > s && cut(e) {
        e -= 1;
    }
    if s < e {
        (s, e)
    } else {
        (start, end)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn terms(t: &[&str]) -> Vec<String> {
        t.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn prefix_without_hit() {
        let text = "a".repeat(300);
        assert_eq!(snippet(&text, &[], 160), "a".repeat(160));
        assert_eq!(snippet("urn pot bijl", &[], 9), "urn pot ");
        assert_eq!(snippet("kort", &terms(&["urn"]), 160), "kort");
    }

    #[test]
    fn centred_window() {
        let text = format!("{} Urn {}", "x".repeat(200), "y".repeat(200));
        let s = snippet(&text, &terms(&["urn"]), 40);
        assert_eq!(s, " <em>Urn</em> ");
        let text = format!("{} Urn {}", "xx ".repeat(60), "yy ".repeat(60));
        let s = snippet(&text, &terms(&["urn"]), 41);
        let plain = s.replace(HIT_OPEN, "").replace(HIT_CLOSE, "");
        assert!(plain.chars().count() <= 41);
        // only whole "xx" / "yy" words at the edges
        assert!(plain.split(' ').all(|w| w.is_empty() || w == "xx" || w == "yy" || w == "Urn"), "{s}");
        let open = s.find(HIT_OPEN).unwrap();
        assert!(open > 12 && open < 25, "{s}");
    }

    #[test]
    fn short_text_marks_every_hit() {
        assert_eq!(
            snippet("upside down urn, upside", &terms(&["upside", "urn"]), 160),
            "<em>upside</em> down <em>urn</em>, <em>upside</em>"
        );
    }

    proptest! {
        #[test]
        fn marker_count_matches_hits_in_window(words in prop::collection::vec(prop::sample::select(vec!["urn", "pot", "Urn", "bijl", "urnen"]), 0..80), width in 5usize..200) {
            let text = words.join(" ");
            let q = terms(&["urn"]);
            let s = snippet(&text, &q, width);
            let plain = s.replace(HIT_OPEN, "").replace(HIT_CLOSE, "");
            prop_assert!(text.contains(&plain));
            prop_assert!(plain.chars().count() <= width);
            // recount whole-word hits that the window does not cut
            let chars: Vec<char> = text.chars().collect();
            let (start, end) = window(&chars, &hit_ranges(&chars, &q), width);
            let whole_words = |i: usize| i == 0 || i == chars.len() || chars[i - 1] == ' ' || chars[i] == ' ';
            prop_assert!(end - start == width.min(chars.len()) || (whole_words(start) && whole_words(end)));
            prop_assert_eq!(plain.chars().collect::<Vec<_>>(), chars[start..end].to_vec());
            let mut expected = 0;
            let mut offset = 0;
            for w in text.split(' ') {
                let len = w.chars().count();
                if w.to_lowercase() == "urn" && offset >= start && offset + len <= end {
                    expected += 1;
                }
                offset += len + 1;
            }
            prop_assert_eq!(s.matches(HIT_OPEN).count(), expected);
            prop_assert_eq!(s.matches(HIT_CLOSE).count(), expected);
        }
    }
}
