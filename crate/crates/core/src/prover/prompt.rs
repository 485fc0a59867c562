use crate::kb::{KbError, VerbalizationSchema};
use crate::oracle::{AbstractRule, RuleEntry, RuleExample};

use super::{PromptVariant, Query};

pub fn task_line(text: &str) -> String {
    format!("Task: {text}\n")
}

/// `Task:` line plus one `Step i:` line per body atom, using variable names.
pub fn abstract_block(rule: &AbstractRule, schema: &VerbalizationSchema) -> Result<String, KbError> {
    let mut out = task_line(&rule.head.render(schema)?);
    for (i, atom) in rule.body.iter().enumerate() {
        out.push_str(&format!("Step {}: {}\n", i + 1, atom.render(schema)?));
    }
    Ok(out)
}

/// `Task:` line plus one `Step i:` line per grounded step.
pub fn grounded_block(ex: &RuleExample, schema: &VerbalizationSchema) -> Result<String, KbError> {
    let mut out = task_line(&schema.verbalize(&ex.task)?);
    for (i, step) in ex.steps.iter().enumerate() {
        out.push_str(&format!("Step {}: {}\n", i + 1, schema.verbalize(step)?));
    }
    Ok(out)
}

/// Concatenates the example blocks and the query's task line.
///
/// Every example is followed by a blank line. `lmlp` puts the abstract block
/// before the grounded one, `lmlp-reverse` swaps them, `only-rule` keeps the
/// abstract block only and `no-prompt` drops the examples.
pub fn build_prompt(
    examples: &[&RuleEntry],
    query: &Query,
    variant: PromptVariant,
    schema: &VerbalizationSchema,
) -> Result<String, KbError> {
    let mut out = String::new();
    if variant != PromptVariant::NoPrompt {
        for entry in examples {
            let rule = abstract_block(&entry.rule, schema)?;
            match variant {
                PromptVariant::Lmlp => {
                    out.push_str(&rule);
                    out.push_str(&grounded_block(&entry.example, schema)?);
                }
                PromptVariant::LmlpReverse => {
                    out.push_str(&grounded_block(&entry.example, schema)?);
                    out.push_str(&rule);
                }
                PromptVariant::OnlyRule => out.push_str(&rule),
                PromptVariant::NoPrompt => unreachable!(),
            }
            out.push('\n');
        }
    }
    out.push_str(&task_line(&schema.verbalize(query)?));
    Ok(out)
}
