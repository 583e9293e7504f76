use super::ReasonerError;

/// Node tasks need at least two options, distinct and pairwise non-substring once
/// lowercased, otherwise answers cannot be matched unambiguously.
pub fn validate_options(options: &[String]) -> Result<(), ReasonerError> {
    if options.len() < 2 {
        return Err(ReasonerError::InvalidOptions("at least two options are required".into()));
    }
    let lowered: Vec<String> = options.iter().map(|o| o.to_lowercase()).collect();
    for (i, a) in lowered.iter().enumerate() {
        if a.trim().is_empty() {
            return Err(ReasonerError::InvalidOptions("empty option".into()));
        }
        for (j, b) in lowered.iter().enumerate() {
            if i != j && b.contains(a.as_str()) {
                return Err(ReasonerError::InvalidOptions(format!(
                    "`{}` is contained in `{}`",
                    options[i], options[j]
                )));
            }
        }
    }
    Ok(())
}

fn last_position(haystack: &str, needle: &str) -> Option<usize> {
    haystack.rfind(needle)
}

/// The option mentioned last in the response, case-insensitively. The
/// answer usually follows the reasoning, so later mentions win.
pub fn parse_node_answer(response: &str, options: &[String]) -> Result<String, ReasonerError> {
    let text = response.to_lowercase();
    options
        .iter()
        .filter_map(|o| last_position(&text, &o.to_lowercase()).map(|p| (p, o)))
        .max_by_key(|(p, _)| *p)
        .map(|(_, o)| o.clone())
        .ok_or(ReasonerError::Unparseable)
}

/// The last of `true` / `false` mentioned in the response.
pub fn parse_link_answer(response: &str) -> Result<bool, ReasonerError> {
    let text = response.to_lowercase();
    match (last_position(&text, "true"), last_position(&text, "false")) {
        (Some(t), Some(f)) => Ok(t > f),
        (Some(_), None) => Ok(true),
        (None, Some(_)) => Ok(false),
        (None, None) => Err(ReasonerError::Unparseable),
    }
}
