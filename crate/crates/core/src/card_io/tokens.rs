use super::DeckFormat;

/// A field of a card row. `quote` records the delimiter it was enclosed in.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Token {
    pub text: String,
    pub quote: Option<char>,
}

/// Split one data line into fields.
///
/// Text decks separate fields by runs of whitespace and/or commas; csv decks
/// by single commas, with surrounding whitespace trimmed. Single- and
/// double-quoted fields may contain separators.
pub(crate) fn tokenize(line: &str, format: DeckFormat) -> Result<Vec<Token>, String> {
    let mut tokens = Vec::new();
    let mut chars = line.chars().peekable();
    let is_sep = |c: char| match format {
        DeckFormat::Txt => c.is_whitespace() || c == ',',
        DeckFormat::Csv => c == ',',
    };
    // csv: a separator was just consumed, so a field must follow
    let mut expect_field = false;
    loop {
        while let Some(&c) = chars.peek() {
            let skip = match format {
                DeckFormat::Txt => is_sep(c),
                DeckFormat::Csv => c.is_whitespace(),
            };
            if skip {
                chars.next();
            } else {
                break;
            }
        }
        let Some(&first) = chars.peek() else {
            if expect_field {
                return Err("empty trailing field".into());
            }
            break;
        };
        if format == DeckFormat::Csv && first == ',' {
            return Err("empty field".into());
        }
        let token = if first == '\'' || first == '"' {
            chars.next();
            let mut text = String::new();
            loop {
                match chars.next() {
                    Some(c) if c == first => break,
                    Some(c) => text.push(c),
                    None => return Err(format!("unterminated {first} quote")),
                }
            }
            Token { text, quote: Some(first) }
        } else {
            let mut text = String::new();
            while let Some(&c) = chars.peek() {
                if is_sep(c) || (format == DeckFormat::Csv && c.is_whitespace()) {
                    break;
                }
                if c == '\'' || c == '"' {
                    return Err(format!("stray quote in field '{text}{c}'"));
                }
                text.push(c);
                chars.next();
            }
            Token { text, quote: None }
        };
        tokens.push(token);
        expect_field = false;
        if format == DeckFormat::Csv {
            while let Some(&c) = chars.peek() {
                if c.is_whitespace() {
                    chars.next();
                } else {
                    break;
                }
            }
            match chars.next() {
                None => break,
                Some(',') => expect_field = true,
                Some(c) => return Err(format!("unexpected '{c}' after field")),
            }
        }
    }
    Ok(tokens)
}

/// Lines that carry data: neither blank nor `#` comments.
pub(crate) fn is_data_line(line: &str) -> bool {
    let t = line.trim();
    !t.is_empty() && !t.starts_with('#')
}

#[cfg(test)]
mod tests {
    use super::*;

    fn texts(line: &str, f: DeckFormat) -> Vec<String> {
        tokenize(line, f).unwrap().into_iter().map(|t| t.text).collect()
    }

    #[test]
    fn txt_splits_on_whitespace_and_commas() {
        assert_eq!(texts("1  'A1'  3000 0", DeckFormat::Txt), ["1", "A1", "3000", "0"]);
        assert_eq!(texts("1 'A10101' 10,20,30,40", DeckFormat::Txt), ["1", "A10101", "10", "20", "30", "40"]);
    }

    #[test]
    fn quoted_fields_keep_separators() {
        let t = tokenize("1,1,'A1','A2',\"-120, 300, 300, 0.9216\"", DeckFormat::Csv).unwrap();
        assert_eq!(t.len(), 5);
        assert_eq!(t[4].text, "-120, 300, 300, 0.9216");
        assert_eq!(t[4].quote, Some('"'));
        assert_eq!(t[2].quote, Some('\''));
    }

    #[test]
    fn csv_rejects_empty_fields() {
        assert!(tokenize("1,,2", DeckFormat::Csv).is_err());
        assert!(tokenize("1,2,", DeckFormat::Csv).is_err());
        assert_eq!(texts(" 1 , 2 ", DeckFormat::Csv), ["1", "2"]);
    }

    #[test]
    fn unterminated_quote_is_an_error() {
        assert!(tokenize("1 'A1", DeckFormat::Txt).is_err());
    }
}
