use super::{Example, NEGATIVE, POSITIVE};
use crate::graph::NodeId;

const INDUCTIVE_TEMPLATE: &str = include_str!("../../templates/inductive.txt");
/// Node question with `{node_a}` and `{options}` placeholders.
pub const NODE_INSTRUCTION: &str = include_str!("../../templates/node_question.txt");
/// Link question with `{node_a}` and `{node_b}` placeholders.
pub const LINK_INSTRUCTION: &str = include_str!("../../templates/link_question.txt");

pub fn inductive_instruction() -> &'static str {
    INDUCTIVE_TEMPLATE.trim_end()
}

pub fn node_question(target: &NodeId, options: &[String]) -> String {
    NODE_INSTRUCTION
        .trim_end()
        .replace("{node_a}", target.as_str())
        .replace("{options}", &format!("[{}]", options.join(", ")))
}

pub fn link_question(a: &NodeId, b: &NodeId) -> String {
    LINK_INSTRUCTION
        .trim_end()
        .replace("{node_a}", a.as_str())
        .replace("{node_b}", b.as_str())
}

/// How a memory label is shown to the model.
fn display_label(label: &str) -> &str {
    match label {
        POSITIVE => "TRUE",
        NEGATIVE => "FALSE",
        other => other,
    }
}

pub fn render_examples(examples: &[Example]) -> String {
    let mut out = String::from("Examples:");
    for (i, ex) in examples.iter().enumerate() {
        out.push_str(&format!(
            "\n\nexample_{}:\n{}\nlabel: {}",
            i + 1,
            ex.sample.text,
            display_label(&ex.label)
        ));
    }
    out
}

pub fn build_inductive_prompt(examples: &[Example]) -> String {
    format!("{}\n\n{}", render_examples(examples), inductive_instruction())
}

/// Examples, induced reasons (skipped when empty), target, question.
pub fn build_deductive_prompt(examples: &[Example], reasons: &str, target_text: &str, question: &str) -> String {
    let mut out = render_examples(examples);
    let reasons = reasons.trim();
    if !reasons.is_empty() {
        out.push_str("\n\nReasons:\n");
        out.push_str(reasons);
    }
    out.push_str(&format!("\n\nTarget:\n{target_text}\n\n{question}"));
    out
}

pub fn build_cot_prompt(examples: &[Example], target_text: &str, question: &str) -> String {
    format!("{}\n\nTarget:\n{target_text}\n\n{question}", render_examples(examples))
}

pub fn build_simple_prompt(target_text: &str, question: &str) -> String {
    format!("Target:\n{target_text}\n\n{question}")
}
