/// Lowercases every token and masks each decimal digit with `#`.
pub fn normalize_text<S: AsRef<str>>(tokens: &[S]) -> Vec<String> {
    tokens.iter().map(|t| normalize_token(t.as_ref())).collect()
}

pub fn normalize_token(token: &str) -> String {
    token
        .chars()
        .flat_map(char::to_lowercase)
        .map(|c| if c.is_ascii_digit() { '#' } else { c })
        .collect()
}

/// Splits on whitespace and normalizes.
pub fn normalize_line(line: &str) -> Vec<String> {
    line.split_whitespace().map(normalize_token).collect()
}
