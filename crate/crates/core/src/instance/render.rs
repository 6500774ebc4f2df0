//! Turning a placeholder valuation into a student-facing program.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::frontend::ast::SkeletonAst;
use crate::frontend::printer::print_instance;
use crate::value::Value;

use super::interp::{interpret, ExecTrace, InterpConfig};

/// A rendered instance together with its reference execution.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InstanceBundle {
    /// Plain program: annotations and generation-only code removed,
    /// placeholders replaced by literals.
    pub rendered_source: String,
    pub valuation: BTreeMap<usize, Value>,
    /// Execution of the skeleton under the valuation, assertions enabled.
    pub trace: ExecTrace,
    /// The same program with the hole shown as `??`.
    pub hole_rendered_source: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RenderError {
    #[error("no value for placeholder {0}")]
    MissingValue(usize),
    #[error("value for placeholder {0} does not match its type")]
    WrongKind(usize),
}

/// Render `ast` under `valuation` and run it in the reference interpreter.
pub fn render_instance(
    ast: &SkeletonAst,
    valuation: &BTreeMap<usize, Value>,
    hole: Option<usize>,
    cfg: &InterpConfig,
) -> Result<InstanceBundle, RenderError> {
    for p in &ast.placeholders {
        let v = valuation.get(&p.id).ok_or(RenderError::MissingValue(p.id))?;
        if !v.kind_matches(p.kind) {
            return Err(RenderError::WrongKind(p.id));
        }
    }
    let rendered_source = print_instance(ast, valuation, None);
    let hole_rendered_source = hole.map(|h| {
        let mut without = valuation.clone();
        without.remove(&h);
        print_instance(ast, &without, Some(h))
    });
    Ok(InstanceBundle {
        rendered_source,
        valuation: valuation.clone(),
        trace: interpret(ast, valuation, cfg),
        hole_rendered_source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::load;

    #[test]
    fn halving_and_doubling_an_even_element() {
        let src = "int[] arr = INTARRAY(list(5), range(1, 100)); int idx = INT(range(0, 4));\n\
                   ASSERT(arr[idx] % 2 == 0);\narr[idx] /= 2;\narr[idx] *= 2;";
        let ast = load(src).unwrap();
        let vals = BTreeMap::from([
            (0, Value::IntArray(vec![23, 8, 43, 67, 59])),
            (1, Value::Int(1)),
        ]);
        let b = render_instance(&ast, &vals, Some(1), &InterpConfig::default()).unwrap();
        assert!(b.rendered_source.contains("int[] arr = new int[] { 23, 8, 43, 67, 59 };"), "{}", b.rendered_source);
        assert!(b.rendered_source.contains("int idx = 1;"));
        assert!(!b.rendered_source.contains("ASSERT"));
        assert!(b.hole_rendered_source.unwrap().contains("int idx = ??;"));
        assert!(b.trace.all_assertions_hold());
        assert_eq!(b.trace.final_store["arr"], Value::IntArray(vec![23, 8, 43, 67, 59]));
    }

    #[test]
    fn placeholder_free_skeletons_only_lose_annotations() {
        let ast = load("int x = 2;\nASSERT(x > 1);\nSystem.out.print(1 + 1);").unwrap();
        let b = render_instance(&ast, &BTreeMap::new(), None, &InterpConfig::default()).unwrap();
        assert_eq!(b.rendered_source.trim(), "int x = 2;\nSystem.out.print(1 + 1);");
        assert_eq!(b.trace.output, "2");
    }

    #[test]
    fn missing_values_are_errors() {
        let ast = load("int x = INT(range(0, 3));").unwrap();
        let err = render_instance(&ast, &BTreeMap::new(), None, &InterpConfig::default()).unwrap_err();
        assert_eq!(err, RenderError::MissingValue(0));
    }
}
